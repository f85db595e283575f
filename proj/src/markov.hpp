#pragma once

#include <Eigen/Dense>
#include <vector>

#include "errors.hpp"

namespace rbai {

inline constexpr double kRowSumTol = 1e-12;

/// Probability vector over the common state space.
class Distribution {
  public:
    // Validates nonnegativity and normalization to within 1e-12.
    static Distribution validated(Eigen::VectorXd probs);

    // Wraps without checking; for values produced by library solvers.
    static Distribution unchecked(Eigen::VectorXd probs) { return Distribution(std::move(probs)); }

    const Eigen::VectorXd& probs() const { return probs_; }
    int size() const { return static_cast<int>(probs_.size()); }
    double operator[](int i) const { return probs_[i]; }

  private:
    explicit Distribution(Eigen::VectorXd probs) : probs_(std::move(probs)) {}
    Eigen::VectorXd probs_;
};

/// Row-stochastic matrix over a finite state space. Instances used as arm
/// kernels must additionally be ergodic; validated() enforces all of it.
class TransitionMatrix {
  public:
    // Full validation: square with at least 2 states, entries >= 0, row sums
    // within 1e-12 of 1, and the positive-entry digraph irreducible and
    // aperiodic. Throws NegativeEntry / RowSumViolation / NotErgodic.
    static TransitionMatrix validated(Eigen::MatrixXd rows);

    // Only checks shape and stochasticity, not ergodicity. For scaffolding
    // chains (e.g. permutation matrices) that never act as arm kernels.
    static TransitionMatrix stochastic_only(Eigen::MatrixXd rows);

    const Eigen::MatrixXd& matrix() const { return m_; }
    int size() const { return static_cast<int>(m_.rows()); }
    double operator()(int from, int to) const { return m_(from, to); }
    Eigen::VectorXd row(int i) const { return m_.row(i); }

  private:
    explicit TransitionMatrix(Eigen::MatrixXd m) : m_(std::move(m)) {}
    Eigen::MatrixXd m_;
};

// True iff the positive-entry digraph is strongly connected and the gcd of
// its cycle lengths is 1.
bool is_ergodic(const TransitionMatrix& p);

// Unique stationary distribution of an ergodic chain, by direct linear solve
// with one equation replaced by the normalization. Throws SingularSystem if
// the system does not pin down a distribution (non-ergodic input).
Distribution stationary_distribution(const TransitionMatrix& p);

// Stationary distribution of an arbitrary row-stochastic matrix given as a
// plain Eigen matrix (used for the induced chains over the delay state space,
// which are too large to revalidate entry by entry).
Eigen::VectorXd stationary_of_kernel(const Eigen::MatrixXd& kernel);

// d-fold product P^d by repeated squaring, d >= 1.
TransitionMatrix matrix_power(const TransitionMatrix& p, int d);

// KL divergence in nats between distributions on the same support, with the
// convention 0 log 0/0 = 0. Throws SupportViolation when p(i) > 0 = q(i).
double kl_divergence(const Eigen::VectorXd& p, const Eigen::VectorXd& q);
double kl_divergence(const Distribution& p, const Distribution& q);

// Relative entropy between Bernoulli(x) and Bernoulli(y), x,y in (0,1).
double bernoulli_kl(double x, double y);

// True iff every row of p has the same zero pattern as the matching row of q.
// This is preserved by taking matrix powers, so checking d = 1 suffices.
bool mutually_abs_continuous(const TransitionMatrix& p, const TransitionMatrix& q);

/// Cache of the d-step kernels P_k^d, d = 1..max_power, for each matrix in a
/// bank. Built once per problem instance; every likelihood update and every
/// LP coefficient reads from it.
class KernelPowerCache {
  public:
    KernelPowerCache(const std::vector<TransitionMatrix>& bank, int max_power);

    // (bank index, number of steps d in 1..max_power) -> P_k^d
    const Eigen::MatrixXd& power(int bank_index, int d) const;

    int bank_size() const { return static_cast<int>(powers_.size()); }
    int max_power() const { return max_power_; }
    int state_count() const { return state_count_; }

  private:
    std::vector<std::vector<Eigen::MatrixXd>> powers_;
    int max_power_;
    int state_count_;
};

}  // namespace rbai
