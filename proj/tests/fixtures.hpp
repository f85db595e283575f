// Shared instance builders for the test suites.
#pragma once

#include "instance.hpp"
#include "oracles.hpp"

namespace fixtures {

inline Eigen::MatrixXd mat2(double a, double b, double c, double d) {
    Eigen::MatrixXd m(2, 2);
    m << a, b, c, d;
    return m;
}

// Two arms on {0,1}: kernels differ in row 0 only; reward counts state 1.
inline rbai::ProblemInstance two_arm() {
    std::vector<rbai::TransitionMatrix> bank;
    bank.push_back(rbai::TransitionMatrix::validated(mat2(0.3, 0.7, 0.6, 0.4)));
    bank.push_back(rbai::TransitionMatrix::validated(mat2(0.7, 0.3, 0.6, 0.4)));
    Eigen::VectorXd f(2);
    f << 0.0, 1.0;
    return rbai::ProblemInstance::validated(
        std::move(bank), f, rbai::ArmAssignment{{0, 1}},
        rbai::Distribution::validated(Eigen::VectorXd::Constant(2, 0.5)));
}

// Identical-rows kernels: each chain draws fresh states from its stationary
// distribution, so observations are effectively independent draws.
inline rbai::TransitionMatrix identical_rows(const Eigen::VectorXd& mu) {
    Eigen::MatrixXd m(mu.size(), mu.size());
    for (int i = 0; i < mu.size(); ++i) m.row(i) = mu.transpose();
    return rbai::TransitionMatrix::validated(m);
}

inline rbai::ProblemInstance identical_rows_two_arm() {
    Eigen::VectorXd mu1(2), mu2(2);
    mu1 << 0.35, 0.65;
    mu2 << 0.8, 0.2;
    std::vector<rbai::TransitionMatrix> bank{identical_rows(mu1), identical_rows(mu2)};
    Eigen::VectorXd f(2);
    f << 0.0, 1.0;
    return rbai::ProblemInstance::validated(
        std::move(bank), f, rbai::ArmAssignment{{0, 1}},
        rbai::Distribution::validated(Eigen::VectorXd::Constant(2, 0.5)));
}

inline rbai::ProblemInstance identical_rows_three_arm() {
    Eigen::VectorXd mu1(2), mu2(2), mu3(2);
    mu1 << 0.35, 0.65;
    mu2 << 0.8, 0.2;
    mu3 << 0.5, 0.5;
    std::vector<rbai::TransitionMatrix> bank{identical_rows(mu1), identical_rows(mu2),
                                             identical_rows(mu3)};
    Eigen::VectorXd f(2);
    f << 0.0, 1.0;
    return rbai::ProblemInstance::validated(
        std::move(bank), f, rbai::ArmAssignment{{0, 1, 2}},
        rbai::Distribution::validated(Eigen::VectorXd::Constant(2, 0.5)));
}

// Random instance with all-positive kernels, bank 0 strictly best.
inline rbai::ProblemInstance random_instance(int arms, int states, rbai::Rng& rng,
                                             double min_gap = 1e-3) {
    Eigen::VectorXd f(states);
    for (int i = 0; i < states; ++i) f[i] = i;
    while (true) {
        std::vector<rbai::TransitionMatrix> bank;
        std::vector<double> means;
        for (int k = 0; k < arms; ++k) {
            bank.push_back(rbai::TransitionMatrix::validated(
                oracle::random_ergodic_tpm(states, rng)));
            means.push_back(rbai::ergodic_mean(bank.back(), f));
        }
        int argmax = 0;
        for (int k = 1; k < arms; ++k) {
            if (means[k] > means[argmax]) argmax = k;
        }
        std::swap(bank[0], bank[argmax]);
        std::swap(means[0], means[argmax]);
        bool clear = true;
        for (int k = 1; k < arms; ++k) {
            if (means[0] - means[k] < min_gap) clear = false;
        }
        if (!clear) continue;
        std::vector<int> perm(arms);
        for (int a = 0; a < arms; ++a) perm[a] = a;
        return rbai::ProblemInstance::validated(
            std::move(bank), f, rbai::ArmAssignment{perm},
            rbai::Distribution::validated(
                Eigen::VectorXd::Constant(states, 1.0 / states)));
    }
}

}  // namespace fixtures
