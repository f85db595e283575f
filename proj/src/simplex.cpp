#include "simplex.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

#include "errors.hpp"

namespace rbai {

namespace {

constexpr double kPivotTol = 1e-9;
constexpr double kReducedCostTol = 1e-9;
constexpr double kDegenerateImprovement = 1e-12;
constexpr int kDegenerateRunForBland = 60;
// Tableau refresh triggers: magnitudes past these mean accumulated pivot
// error, not problem data.
constexpr double kRhsBlowup = 1e7;
constexpr double kReducedCostBlowup = 1e9;
constexpr long kRefactorInterval = 500;

using RowMajorMatrix =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Dense tableau with the frozen augmented system kept alongside, so the
// representation can be recomputed exactly from the current basis whenever
// pivot roundoff has built up.
struct Tableau {
    RowMajorMatrix a0;       // frozen augmented constraint matrix, m x total
    Eigen::VectorXd b0;      // frozen right-hand side, >= 0
    RowMajorMatrix t;        // current tableau rows
    Eigen::VectorXd rhs;     // current basic values, kept >= 0
    Eigen::VectorXd rc;      // reduced costs of the active objective
    std::vector<int> basis;  // basic column per row
    std::vector<int> lex_order;
    int enter_limit = 0;     // columns at or past this never enter (artificials)
    long iterations = 0;
    long last_refactor = -1;

    int rows() const { return static_cast<int>(t.rows()); }
    int cols() const { return static_cast<int>(t.cols()); }

    void pivot(int row, int col) {
        double p = t(row, col);
        t.row(row) /= p;
        rhs[row] /= p;
        for (int i = 0; i < rows(); ++i) {
            if (i == row) continue;
            double f = t(i, col);
            if (f == 0.0) continue;
            t.row(i) -= f * t.row(row);
            rhs[i] -= f * rhs[row];
            if (rhs[i] < 0.0 && rhs[i] > -1e-9) rhs[i] = 0.0;
        }
        double fr = rc[col];
        if (fr != 0.0) rc -= fr * t.row(row).transpose();
        basis[row] = col;
        ++iterations;
    }

    // Recompute the tableau and basic values exactly from the frozen system
    // and the current basis, then rebuild the reduced costs. Returns the
    // most negative basic value seen (0 when primal feasible).
    double refactorize(const Eigen::VectorXd& objective_coeffs) {
        const int m = rows();
        Eigen::MatrixXd basis_matrix(m, m);
        for (int i = 0; i < m; ++i) basis_matrix.col(i) = a0.col(basis[i]);
        Eigen::PartialPivLU<Eigen::MatrixXd> lu(basis_matrix);
        Eigen::MatrixXd fresh = lu.solve(Eigen::MatrixXd(a0));
        Eigen::VectorXd fresh_rhs = lu.solve(b0);
        if (!fresh.allFinite() || !fresh_rhs.allFinite()) {
            raise(ErrorCode::NumericalBreakdown, "singular basis during refactorization");
        }
        t = fresh;
        rhs = fresh_rhs;
        double worst = 0.0;
        for (int i = 0; i < m; ++i) {
            if (rhs[i] < 0.0) {
                worst = std::min(worst, rhs[i]);
                rhs[i] = 0.0;
            }
        }
        rebuild_reduced_costs(objective_coeffs);
        last_refactor = iterations;
        return worst;
    }

    void checked_refactorize(const Eigen::VectorXd& objective_coeffs) {
        if (refactorize(objective_coeffs) < -1e-5) {
            raise(ErrorCode::NumericalBreakdown,
                  "basis lost primal feasibility beyond tolerance");
        }
    }

    void rebuild_reduced_costs(const Eigen::VectorXd& objective_coeffs) {
        rc = objective_coeffs;
        for (int i = 0; i < rows(); ++i) {
            double cb = objective_coeffs[basis[i]];
            if (cb != 0.0) rc -= cb * t.row(i).transpose();
        }
        for (int i = 0; i < rows(); ++i) rc[basis[i]] = 0.0;
    }

    bool looks_unstable() const {
        if (rhs.lpNorm<Eigen::Infinity>() > kRhsBlowup) return true;
        double worst = 0.0;
        for (int j = 0; j < enter_limit; ++j) worst = std::max(worst, rc[j]);
        return worst > kReducedCostBlowup;
    }

    // Fixed column order for lexicographic comparisons: the basis columns at
    // phase start come first (they form an identity there, making every row
    // lexicographically positive), then the remaining columns.
    void freeze_lex_order() {
        const int n = cols();
        lex_order.clear();
        lex_order.reserve(n);
        std::vector<char> used(n, 0);
        for (int b : basis) {
            lex_order.push_back(b);
            used[b] = 1;
        }
        for (int k = 0; k < n; ++k) {
            if (!used[k]) lex_order.push_back(k);
        }
    }

    // Lexicographic comparison of rows i and j scaled by their pivot-column
    // entries; breaks ratio-test ties so that no basis ever repeats.
    bool lex_less(int i, int j, int col) const {
        const double di = t(i, col);
        const double dj = t(j, col);
        const double ri = std::max(rhs[i], 0.0) / di;
        const double rj = std::max(rhs[j], 0.0) / dj;
        double scale = std::max({1.0, std::abs(ri), std::abs(rj)});
        if (ri < rj - 1e-12 * scale) return true;
        if (rj < ri - 1e-12 * scale) return false;
        for (int k : lex_order) {
            const double vi = t(i, k) / di;
            const double vj = t(j, k) / dj;
            scale = std::max({1.0, std::abs(vi), std::abs(vj)});
            if (vi < vj - 1e-12 * scale) return true;
            if (vj < vi - 1e-12 * scale) return false;
        }
        return false;
    }

    // Entries this far below their column's largest magnitude are exact
    // zeros corrupted by roundoff; pivoting on one destroys the basis.
    double phantom_bar(int col) const {
        double scale = 0.0;
        for (int i = 0; i < rows(); ++i) scale = std::max(scale, std::abs(t(i, col)));
        return std::max(kPivotTol, 1e-7 * scale);
    }

    // Leaving row via the lexicographic ratio test; guarantees no basis
    // repeats, used to escape degeneracy. Returns -1 when the direction is
    // unbounded, -2 when only phantom pivots are available.
    int ratio_row(int col) const {
        const double bar = phantom_bar(col);
        int best = -1;
        bool any = false;
        for (int i = 0; i < rows(); ++i) {
            if (t(i, col) <= kPivotTol) continue;
            any = true;
            if (t(i, col) < bar) continue;
            if (best < 0 || lex_less(i, best, col)) best = i;
        }
        return best >= 0 ? best : (any ? -2 : -1);
    }

    // Two-pass Harris ratio test: bound the step with a small feasibility
    // allowance, then take the numerically largest pivot the bound admits.
    // Large pivots keep the multipliers, and therefore the roundoff, small;
    // any feasibility slip is at most the allowance per step and is wiped by
    // the next refactorization. Same return convention as ratio_row.
    int harris_ratio_row(int col) const {
        constexpr double kFeasTol = 1e-9;
        double theta_max = std::numeric_limits<double>::infinity();
        for (int i = 0; i < rows(); ++i) {
            double d = t(i, col);
            if (d <= kPivotTol) continue;
            theta_max = std::min(theta_max, (std::max(rhs[i], 0.0) + kFeasTol) / d);
        }
        if (theta_max == std::numeric_limits<double>::infinity()) return -1;
        const double bar = phantom_bar(col);
        int best = -1;
        double best_pivot = 0.0;
        for (int i = 0; i < rows(); ++i) {
            double d = t(i, col);
            if (d < bar) continue;
            if (std::max(rhs[i], 0.0) / d > theta_max) continue;
            if (d > best_pivot) {
                best_pivot = d;
                best = i;
            }
        }
        return best >= 0 ? best : -2;
    }
};

enum class PhaseOutcome { Converged, Unbounded, IterationLimit };

// Runs the simplex loop on the active objective until no reduced cost
// exceeds tolerance.
PhaseOutcome run_phase(Tableau& tab, long max_iterations, double* objective_value,
                       const Eigen::VectorXd& objective_coeffs) {
    int degenerate_run = 0;
    int confirmations = 0;
    bool bland = false;
    std::vector<char> banned(tab.enter_limit, 0);
    auto current_objective = [&]() {
        double v = 0.0;
        for (int i = 0; i < tab.rows(); ++i) {
            double c = objective_coeffs[tab.basis[i]];
            if (c != 0.0) v += c * tab.rhs[i];
        }
        return v;
    };
    double last = current_objective();
    // a refresh costs O(m^2 n), so amortize it over more pivots as the
    // problem grows
    const long refactor_interval = std::max<long>(kRefactorInterval, tab.rows());
    while (tab.iterations < max_iterations) {
        if (tab.iterations != tab.last_refactor &&
            (tab.looks_unstable() ||
             tab.iterations - tab.last_refactor >= refactor_interval)) {
            tab.checked_refactorize(objective_coeffs);
            std::fill(banned.begin(), banned.end(), 0);
            last = current_objective();
        }
        int enter = -1;
        if (bland) {
            for (int j = 0; j < tab.enter_limit; ++j) {
                if (banned[j] || tab.rc[j] <= kReducedCostTol) continue;
                enter = j;
                break;
            }
        } else {
            // steepest-edge-style pricing: rate improvement per unit step
            // length in the current basis; far fewer degenerate pivots than
            // the most-positive-cost rule on these flow polytopes
            Eigen::VectorXd gamma =
                tab.t.leftCols(tab.enter_limit).colwise().squaredNorm();
            double best = 0.0;
            for (int j = 0; j < tab.enter_limit; ++j) {
                if (banned[j] || tab.rc[j] <= kReducedCostTol) continue;
                double score = tab.rc[j] * tab.rc[j] / (1.0 + gamma[j]);
                if (score > best) {
                    best = score;
                    enter = j;
                }
            }
        }
        if (enter < 0) {
            // confirm optimality on a freshly computed representation; give
            // up after a few rounds of tolerance-level flip-flop
            bool fresh = tab.iterations == tab.last_refactor &&
                         std::none_of(banned.begin(), banned.end(),
                                      [](char b) { return b != 0; });
            if (fresh || ++confirmations > 3) {
                *objective_value = current_objective();
                return PhaseOutcome::Converged;
            }
            tab.checked_refactorize(objective_coeffs);
            std::fill(banned.begin(), banned.end(), 0);
            last = current_objective();
            continue;
        }
        int leave = bland ? tab.ratio_row(enter) : tab.harris_ratio_row(enter);
        if (leave == -1) return PhaseOutcome::Unbounded;
        if (leave == -2) {
            // only roundoff-scale pivots in this column: refresh once for a
            // clean view, otherwise set the column aside until the next
            // refactorization
            if (tab.iterations != tab.last_refactor) {
                tab.checked_refactorize(objective_coeffs);
                std::fill(banned.begin(), banned.end(), 0);
                last = current_objective();
            } else {
                banned[enter] = 1;
            }
            continue;
        }
        tab.pivot(leave, enter);
        double now = current_objective();
        if (now - last < kDegenerateImprovement) {
            if (++degenerate_run >= kDegenerateRunForBland) bland = true;
        } else {
            degenerate_run = 0;
            bland = false;
        }
        last = now;
    }
    return PhaseOutcome::IterationLimit;
}

}  // namespace

const char* lp_status_name(LpStatus status) {
    switch (status) {
    case LpStatus::Optimal: return "optimal";
    case LpStatus::Infeasible: return "infeasible";
    case LpStatus::Unbounded: return "unbounded";
    case LpStatus::IterationLimit: return "iteration-limit";
    }
    return "unknown";
}

LpResult solve_lp(const LpProblem& problem) {
    const int m = problem.rows();
    const int n = problem.cols();
    if (m == 0 || n == 0) raise(ErrorCode::InvalidArgument, "empty linear program");
    if (problem.b.size() != m || static_cast<int>(problem.rel.size()) != m ||
        problem.c.size() != n) {
        raise(ErrorCode::InvalidArgument, "inconsistent linear program dimensions");
    }

    // Normalize to b >= 0 and count slack columns. Sign flips on inequality
    // rows would invalidate a caller-supplied basis, so reject that mix.
    Eigen::MatrixXd a = problem.a;
    Eigen::VectorXd b = problem.b;
    std::vector<char> rel = problem.rel;
    bool flipped = false;
    for (int i = 0; i < m; ++i) {
        if (b[i] < 0.0) {
            a.row(i) = -a.row(i);
            b[i] = -b[i];
            rel[i] = rel[i] == '<' ? '>' : (rel[i] == '>' ? '<' : '=');
            flipped = true;
        }
    }
    int slacks = 0;
    for (char r : rel) {
        if (r != '=') ++slacks;
    }

    const int slack_base = n;
    const int art_base = n + slacks;

    Tableau tab;
    tab.a0 = RowMajorMatrix::Zero(m, art_base + m);
    tab.a0.leftCols(n) = a;
    tab.b0 = b;
    tab.basis.assign(m, -1);
    tab.enter_limit = art_base;

    // Default crash basis: slacks where available, artificials elsewhere.
    std::vector<int> slack_of_row(m, -1);
    int next_slack = slack_base;
    int next_art = art_base;
    std::vector<int> art_rows;
    for (int i = 0; i < m; ++i) {
        if (rel[i] == '<') {
            tab.a0(i, next_slack) = 1.0;
            slack_of_row[i] = next_slack;
            tab.basis[i] = next_slack++;
        } else {
            if (rel[i] == '>') {
                tab.a0(i, next_slack) = -1.0;
                slack_of_row[i] = next_slack++;
            }
            tab.a0(i, next_art) = 1.0;
            tab.basis[i] = next_art++;
            art_rows.push_back(i);
        }
    }
    const int used_total = next_art;
    tab.a0.conservativeResize(m, used_total);
    tab.t = tab.a0;
    tab.rhs = tab.b0;

    const long max_iterations = 2000 + 40L * (m + used_total);
    LpResult result;

    Eigen::VectorXd c2 = Eigen::VectorXd::Zero(used_total);
    c2.head(n) = problem.c;

    // A caller-supplied feasible basis skips phase one. Rows not covered by
    // the hint fall back to their slack; the hint is dropped entirely if the
    // resulting basis is singular or infeasible.
    bool have_start = false;
    if (!flipped && static_cast<int>(problem.basis_hint.size()) == m) {
        std::vector<int> saved = tab.basis;
        bool plausible = true;
        std::vector<char> used(used_total, 0);
        for (int i = 0; i < m && plausible; ++i) {
            int col = problem.basis_hint[i];
            if (col < 0) col = slack_of_row[i];
            if (col < 0 || col >= art_base || used[col]) {
                plausible = false;
                break;
            }
            used[col] = 1;
            tab.basis[i] = col;
        }
        if (plausible) {
            try {
                if (tab.refactorize(c2) >= -1e-9) {
                    have_start = true;
                } else {
                    tab.basis = saved;
                }
            } catch (const Error&) {
                tab.basis = saved;
            }
        } else {
            tab.basis = saved;
        }
    }

    if (!have_start && !art_rows.empty()) {
        // Phase 1: maximize minus the sum of artificials.
        Eigen::VectorXd c1 = Eigen::VectorXd::Zero(used_total);
        for (int j = art_base; j < used_total; ++j) c1[j] = -1.0;
        tab.t = tab.a0;
        tab.rhs = tab.b0;
        tab.last_refactor = -1;
        tab.rebuild_reduced_costs(c1);
        tab.freeze_lex_order();
        double phase1 = 0.0;
        PhaseOutcome out = run_phase(tab, max_iterations, &phase1, c1);
        if (out == PhaseOutcome::IterationLimit) {
            result.status = LpStatus::IterationLimit;
            result.iterations = tab.iterations;
            return result;
        }
        // Phase 1 is bounded by construction, so Unbounded cannot happen.
        if (phase1 < -1e-7) {
            result.status = LpStatus::Infeasible;
            result.iterations = tab.iterations;
            return result;
        }
        // Drive zero-valued artificials out of the basis where possible;
        // rows that resist are redundant and stay inert (their coefficients
        // on real columns are zero and remain so under later pivots). Work
        // on a freshly recomputed tableau so stale entries cannot select a
        // pivot that is zero in exact arithmetic, pivot on the largest
        // coefficient in the row, and never pivot a row carrying real mass.
        tab.checked_refactorize(c1);
        for (int i = 0; i < m; ++i) {
            if (tab.basis[i] < art_base) continue;
            if (tab.rhs[i] > 1e-9) continue;
            int best_col = -1;
            double best_mag = 1e-7;
            for (int j = 0; j < art_base; ++j) {
                if (std::abs(tab.t(i, j)) > best_mag) {
                    best_mag = std::abs(tab.t(i, j));
                    best_col = j;
                }
            }
            if (best_col >= 0) tab.pivot(i, best_col);
        }
        tab.checked_refactorize(c2);
    } else if (!have_start) {
        tab.rebuild_reduced_costs(c2);
        tab.last_refactor = tab.iterations;
    }

    // Phase 2 on the real objective.
    tab.freeze_lex_order();
    double objective = 0.0;
    PhaseOutcome out = run_phase(tab, max_iterations, &objective, c2);
    result.iterations = tab.iterations;
    if (out == PhaseOutcome::Unbounded) {
        result.status = LpStatus::Unbounded;
        return result;
    }
    if (out == PhaseOutcome::IterationLimit) {
        result.status = LpStatus::IterationLimit;
        return result;
    }

    // Extract the solution from an exactly recomputed representation.
    tab.checked_refactorize(c2);
    result.status = LpStatus::Optimal;
    result.x = Eigen::VectorXd::Zero(n);
    for (int i = 0; i < m; ++i) {
        if (tab.basis[i] < n) result.x[tab.basis[i]] = std::max(tab.rhs[i], 0.0);
    }
    result.objective = problem.c.dot(result.x);
    return result;
}

void write_lp_listing(std::ostream& os, const LpProblem& problem) {
    os << "maximize\n ";
    for (int j = 0; j < problem.cols(); ++j) {
        if (problem.c[j] != 0.0) os << " + " << problem.c[j] << " x" << j;
    }
    os << "\nsubject to\n";
    for (int i = 0; i < problem.rows(); ++i) {
        os << " r" << i << ":";
        for (int j = 0; j < problem.cols(); ++j) {
            if (problem.a(i, j) != 0.0) os << " + " << problem.a(i, j) << " x" << j;
        }
        os << ' ' << (problem.rel[i] == '=' ? "=" : (problem.rel[i] == '<' ? "<=" : ">="))
           << ' ' << problem.b[i] << "\n";
    }
    os << "bounds\n x0 .. x" << problem.cols() - 1 << " >= 0\n";
}

}  // namespace rbai
