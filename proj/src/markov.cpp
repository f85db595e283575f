#include "markov.hpp"

#include <cmath>
#include <numeric>
#include <queue>
#include <sstream>

namespace rbai {

namespace {

void check_stochastic(const Eigen::MatrixXd& m) {
    if (m.rows() != m.cols()) {
        raise(ErrorCode::ValidationError, "transition matrix must be square");
    }
    if (m.rows() < 2) {
        raise(ErrorCode::ValidationError, "state space must have at least 2 states");
    }
    for (int i = 0; i < m.rows(); ++i) {
        for (int j = 0; j < m.cols(); ++j) {
            if (m(i, j) < 0.0) {
                std::ostringstream oss;
                oss << "entry (" << i << "," << j << ") = " << m(i, j);
                raise(ErrorCode::NegativeEntry, oss.str());
            }
        }
        double sum = m.row(i).sum();
        if (std::abs(sum - 1.0) > kRowSumTol) {
            std::ostringstream oss;
            oss << "row " << i << " sums to " << sum;
            raise(ErrorCode::RowSumViolation, oss.str());
        }
    }
}

// Adjacency of the positive-entry digraph.
std::vector<std::vector<int>> positive_graph(const Eigen::MatrixXd& m) {
    int n = static_cast<int>(m.rows());
    std::vector<std::vector<int>> adj(n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            if (m(i, j) > 0.0) adj[i].push_back(j);
        }
    }
    return adj;
}

std::vector<int> bfs_levels(const std::vector<std::vector<int>>& adj, int start) {
    std::vector<int> level(adj.size(), -1);
    std::queue<int> q;
    level[start] = 0;
    q.push(start);
    while (!q.empty()) {
        int u = q.front();
        q.pop();
        for (int v : adj[u]) {
            if (level[v] < 0) {
                level[v] = level[u] + 1;
                q.push(v);
            }
        }
    }
    return level;
}

bool strongly_connected(const std::vector<std::vector<int>>& adj) {
    int n = static_cast<int>(adj.size());
    std::vector<std::vector<int>> radj(n);
    for (int u = 0; u < n; ++u) {
        for (int v : adj[u]) radj[v].push_back(u);
    }
    auto fwd = bfs_levels(adj, 0);
    auto bwd = bfs_levels(radj, 0);
    for (int i = 0; i < n; ++i) {
        if (fwd[i] < 0 || bwd[i] < 0) return false;
    }
    return true;
}

// For a strongly connected digraph the period equals
// gcd over edges (u,v) of (level[u] + 1 - level[v]).
int graph_period(const std::vector<std::vector<int>>& adj) {
    auto level = bfs_levels(adj, 0);
    int g = 0;
    for (int u = 0; u < static_cast<int>(adj.size()); ++u) {
        for (int v : adj[u]) {
            g = std::gcd(g, std::abs(level[u] + 1 - level[v]));
        }
    }
    return g == 0 ? 1 : g;
}

}  // namespace

Distribution Distribution::validated(Eigen::VectorXd probs) {
    if (probs.size() < 1) {
        raise(ErrorCode::ValidationError, "distribution must be non-empty");
    }
    for (int i = 0; i < probs.size(); ++i) {
        if (probs[i] < 0.0) raise(ErrorCode::NegativeEntry, "distribution entry < 0");
    }
    if (std::abs(probs.sum() - 1.0) > kRowSumTol) {
        std::ostringstream oss;
        oss << "distribution sums to " << probs.sum();
        raise(ErrorCode::RowSumViolation, oss.str());
    }
    return Distribution(std::move(probs));
}

TransitionMatrix TransitionMatrix::stochastic_only(Eigen::MatrixXd rows) {
    check_stochastic(rows);
    return TransitionMatrix(std::move(rows));
}

TransitionMatrix TransitionMatrix::validated(Eigen::MatrixXd rows) {
    check_stochastic(rows);
    TransitionMatrix p(std::move(rows));
    if (!is_ergodic(p)) {
        raise(ErrorCode::NotErgodic, "chain is not irreducible and aperiodic");
    }
    return p;
}

bool is_ergodic(const TransitionMatrix& p) {
    auto adj = positive_graph(p.matrix());
    if (!strongly_connected(adj)) return false;
    return graph_period(adj) == 1;
}

Eigen::VectorXd stationary_of_kernel(const Eigen::MatrixXd& kernel) {
    const int n = static_cast<int>(kernel.rows());
    // (P^T - I) mu = 0 with the last equation replaced by sum(mu) = 1.
    Eigen::MatrixXd a = kernel.transpose() - Eigen::MatrixXd::Identity(n, n);
    a.row(n - 1).setOnes();
    Eigen::VectorXd b = Eigen::VectorXd::Zero(n);
    b[n - 1] = 1.0;

    Eigen::PartialPivLU<Eigen::MatrixXd> lu(a);
    Eigen::VectorXd mu = lu.solve(b);
    // Iterative refinement keeps the residual near machine precision for the
    // larger induced chains.
    mu += lu.solve(b - a * mu);
    mu += lu.solve(b - a * mu);

    if (!mu.allFinite()) {
        raise(ErrorCode::SingularSystem, "stationary solve produced non-finite values");
    }
    double residual = (kernel.transpose() * mu - mu).lpNorm<Eigen::Infinity>();
    if (residual > 1e-12 || std::abs(mu.sum() - 1.0) > 1e-12) {
        raise(ErrorCode::SingularSystem, "stationary solve did not converge");
    }
    return mu;
}

Distribution stationary_distribution(const TransitionMatrix& p) {
    return Distribution::unchecked(stationary_of_kernel(p.matrix()));
}

TransitionMatrix matrix_power(const TransitionMatrix& p, int d) {
    if (d < 1) raise(ErrorCode::InvalidArgument, "matrix power requires d >= 1");
    const int n = p.size();
    Eigen::MatrixXd result = Eigen::MatrixXd::Identity(n, n);
    Eigen::MatrixXd base = p.matrix();
    int e = d;
    while (e > 0) {
        if (e & 1) result = result * base;
        e >>= 1;
        if (e > 0) base = base * base;
    }
    return TransitionMatrix::stochastic_only(std::move(result));
}

double kl_divergence(const Eigen::VectorXd& p, const Eigen::VectorXd& q) {
    if (p.size() != q.size()) {
        raise(ErrorCode::InvalidArgument, "KL divergence requires equal support sizes");
    }
    double sum = 0.0;
    for (int i = 0; i < p.size(); ++i) {
        if (p[i] == 0.0) continue;  // 0 log 0/0 = 0
        if (q[i] == 0.0) {
            raise(ErrorCode::SupportViolation, "p(i) > 0 where q(i) = 0");
        }
        sum += p[i] * std::log(p[i] / q[i]);
    }
    return sum;
}

double kl_divergence(const Distribution& p, const Distribution& q) {
    return kl_divergence(p.probs(), q.probs());
}

double bernoulli_kl(double x, double y) {
    if (!(x > 0.0 && x < 1.0 && y > 0.0 && y < 1.0)) {
        raise(ErrorCode::DomainError, "bernoulli_kl requires arguments strictly inside (0,1)");
    }
    return x * std::log(x / y) + (1.0 - x) * std::log((1.0 - x) / (1.0 - y));
}

bool mutually_abs_continuous(const TransitionMatrix& p, const TransitionMatrix& q) {
    if (p.size() != q.size()) {
        raise(ErrorCode::InvalidArgument, "matrices must have the same size");
    }
    for (int i = 0; i < p.size(); ++i) {
        for (int j = 0; j < p.size(); ++j) {
            if ((p(i, j) > 0.0) != (q(i, j) > 0.0)) return false;
        }
    }
    return true;
}

KernelPowerCache::KernelPowerCache(const std::vector<TransitionMatrix>& bank, int max_power)
    : max_power_(max_power) {
    if (bank.empty()) raise(ErrorCode::InvalidArgument, "empty kernel bank");
    if (max_power < 1) raise(ErrorCode::InvalidArgument, "max_power must be >= 1");
    state_count_ = bank.front().size();
    powers_.reserve(bank.size());
    for (const auto& p : bank) {
        if (p.size() != state_count_) {
            raise(ErrorCode::InvalidArgument, "bank matrices differ in size");
        }
        std::vector<Eigen::MatrixXd> pows;
        pows.reserve(max_power);
        pows.push_back(p.matrix());
        for (int d = 2; d <= max_power; ++d) {
            pows.push_back(pows.back() * p.matrix());
        }
        powers_.push_back(std::move(pows));
    }
}

const Eigen::MatrixXd& KernelPowerCache::power(int bank_index, int d) const {
    return powers_.at(bank_index).at(d - 1);
}

}  // namespace rbai
