#pragma once

#include <Eigen/Dense>
#include <iosfwd>
#include <vector>

namespace rbai {

enum class LpStatus { Optimal, Infeasible, Unbounded, IterationLimit };

const char* lp_status_name(LpStatus status);

/// maximize c.x subject to row-wise a x {=,<,>} b and x >= 0.
struct LpProblem {
    Eigen::MatrixXd a;
    Eigen::VectorXd b;
    std::vector<char> rel;  // one of '=', '<', '>' per row
    Eigen::VectorXd c;

    // Optional: one column index per row forming a primal-feasible basis
    // (callers that know a starting vertex can skip phase one). Column
    // indices refer to `a`; slack columns cannot be named here. Ignored when
    // empty or when the named basis turns out infeasible or singular.
    std::vector<int> basis_hint;

    int rows() const { return static_cast<int>(a.rows()); }
    int cols() const { return static_cast<int>(a.cols()); }
};

struct LpResult {
    LpStatus status = LpStatus::IterationLimit;
    double objective = 0.0;
    Eigen::VectorXd x;
    long iterations = 0;
};

// Dense two-phase tableau simplex. Entering columns by steepest-edge-style
// pricing with a Bland fallback after degenerate runs; leaving rows by a
// lexicographic ratio test, so the method terminates and is fully
// deterministic. The tableau is recomputed from the original system whenever
// roundoff builds up.
LpResult solve_lp(const LpProblem& problem);

// Plain-text standard-form listing (objective row, constraint rows, bounds)
// for cross-checking a problem with external tools.
void write_lp_listing(std::ostream& os, const LpProblem& problem);

}  // namespace rbai
