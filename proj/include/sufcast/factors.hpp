#pragma once

#include <filesystem>
#include <string>

#include <Eigen/Dense>

namespace sufcast {

/// Principal-component solution of the constrained least-squares factor problem
/// min ||X - B F'||_F subject to F'F/T = I and B'B diagonal.
struct FactorEstimate {
    Eigen::MatrixXd loadings;       // p x K
    Eigen::MatrixXd factors;        // T x K, row t is f_t
    Eigen::VectorXd eigenvalues;    // top K eigenvalues of X'X / (pT), descending
    Eigen::MatrixXd loadings_pinv;  // K x p, (B'B)^{-1} B'

    int num_factors() const { return static_cast<int>(factors.cols()); }

    /// Factors of new observations (columns of `x_new`) through the fitted
    /// loadings; returns one row per column.
    Eigen::MatrixXd project(const Eigen::MatrixXd& x_new) const;
};

/// Which Gram matrix feeds the eigensolver. `time_gram` is X'X (T x T),
/// `series_gram` is XX' (p x p); `automatic` picks the smaller one.
enum class FactorRoute { automatic, time_gram, series_gram };

FactorEstimate fit_factors(const Eigen::MatrixXd& x, int k, FactorRoute route = FactorRoute::automatic);

/// Least-squares factors given known loadings: row t is (B'B)^{-1} B' x_t.
Eigen::MatrixXd estimated_factors_known_loadings(const Eigen::MatrixXd& x, const Eigen::MatrixXd& loadings);

/// x - B F'.
Eigen::MatrixXd residuals(const Eigen::MatrixXd& x, const FactorEstimate& fit);

enum class FactorPenalty {
    ic1,  // (p+T)/(pT) log(pT/(p+T))
    ic2,  // (p+T)/(pT) log(min(p,T))
    ic3,  // log(min(p,T)) / min(p,T)
};

FactorPenalty parse_factor_penalty(const std::string& name);
std::string to_string(FactorPenalty penalty);
double factor_penalty(FactorPenalty penalty, double p, double t);

struct NumFactorsSelection {
    int k_hat = 0;
    int k_max = 0;
    FactorPenalty penalty = FactorPenalty::ic1;
    Eigen::VectorXd log_residual;  // index K = 0..k_max
    Eigen::VectorXd penalty_term;
    Eigen::VectorXd criterion;
};

/// Minimizes log(||X - X F_K F_K'/T||^2 / (pT)) + K g(p,T) over K = 0..k_max.
/// Mean squares below 1e-12 of the total are treated as exact zeros and the
/// log argument is floored at 1e-300; ties go to the smaller K.
NumFactorsSelection select_num_factors(const Eigen::MatrixXd& x, int k_max,
                                       FactorPenalty penalty = FactorPenalty::ic1);

/// loadings.csv, factors.csv, eigenvalues.csv
void write_factor_estimate(const std::filesystem::path& dir, const FactorEstimate& fit);
FactorEstimate read_factor_estimate(const std::filesystem::path& dir);

}  // namespace sufcast
