#include "sufcast/factors.hpp"

#include <algorithm>
#include <cmath>

#include "sufcast/error.hpp"
#include "sufcast/linalg.hpp"
#include "sufcast/matrix_io.hpp"

namespace sufcast {

namespace {

constexpr double kZeroResidualRatio = 1e-12;
constexpr double kLogFloor = 1e-300;

void check_finite(const Eigen::MatrixXd& x) {
    if (!x.allFinite()) throw DataError("predictor matrix contains non-finite values");
}

Eigen::MatrixXd loadings_pseudo_inverse(const Eigen::MatrixXd& b) {
    // B'B is diagonal up to rounding, so invert column by column; exactly
    // zero columns (rank-deficient X) map to zero rows.
    Eigen::MatrixXd pinv = Eigen::MatrixXd::Zero(b.cols(), b.rows());
    const double scale = std::max(1.0, b.squaredNorm());
    for (Eigen::Index j = 0; j < b.cols(); ++j) {
        double d = b.col(j).squaredNorm();
        if (d > 1e-28 * scale) pinv.row(j) = b.col(j).transpose() / d;
    }
    return pinv;
}

}  // namespace

Eigen::MatrixXd FactorEstimate::project(const Eigen::MatrixXd& x_new) const {
    if (x_new.rows() != loadings_pinv.cols()) throw ConfigError("new observations have the wrong number of series");
    return (loadings_pinv * x_new).transpose();
}

FactorEstimate fit_factors(const Eigen::MatrixXd& x, int k, FactorRoute route) {
    const Eigen::Index p = x.rows();
    const Eigen::Index T = x.cols();
    if (k < 1 || k > std::min(p, T)) {
        throw ConfigError("number of factors " + std::to_string(k) + " outside [1, min(p, T)] = [1, " +
                          std::to_string(std::min(p, T)) + "]");
    }
    check_finite(x);

    if (route == FactorRoute::automatic) route = T <= p ? FactorRoute::time_gram : FactorRoute::series_gram;

    const double sqrt_t = std::sqrt(static_cast<double>(T));
    FactorEstimate fit;
    Eigen::VectorXd top(k);
    Eigen::MatrixXd f(T, k);

    if (route == FactorRoute::series_gram) {
        Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(p, p);
        gram.selfadjointView<Eigen::Lower>().rankUpdate(x);
        gram.triangularView<Eigen::StrictlyUpper>() = gram.transpose();
        auto eig = sorted_symmetric_eigen(gram);
        top = eig.values.head(k);
        const double tiny = 1e-24 * std::max(1.0, eig.values(0));
        if ((top.array() <= tiny).any()) {
            // Null directions of XX' carry no information about X'X's
            // eigenvectors; fall back to the T x T problem.
            return fit_factors(x, k, FactorRoute::time_gram);
        }
        f = x.transpose() * eig.vectors.leftCols(k);
        for (Eigen::Index j = 0; j < k; ++j) f.col(j) *= sqrt_t / f.col(j).norm();
    } else {
        Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(T, T);
        gram.selfadjointView<Eigen::Lower>().rankUpdate(x.transpose());
        gram.triangularView<Eigen::StrictlyUpper>() = gram.transpose();
        auto eig = sorted_symmetric_eigen(gram);
        top = eig.values.head(k);
        f = eig.vectors.leftCols(k) * sqrt_t;
    }
    fix_column_signs(f);

    fit.factors = std::move(f);
    fit.loadings = x * fit.factors / static_cast<double>(T);
    fit.eigenvalues = top.cwiseMax(0.0) / (static_cast<double>(p) * static_cast<double>(T));
    fit.loadings_pinv = loadings_pseudo_inverse(fit.loadings);
    return fit;
}

Eigen::MatrixXd estimated_factors_known_loadings(const Eigen::MatrixXd& x, const Eigen::MatrixXd& loadings) {
    if (x.rows() != loadings.rows()) throw ConfigError("loadings and predictors disagree on the number of series");
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(loadings);
    if (qr.rank() < loadings.cols()) throw NumericalError("loadings matrix is rank deficient");
    return qr.solve(x).transpose();
}

Eigen::MatrixXd residuals(const Eigen::MatrixXd& x, const FactorEstimate& fit) {
    if (x.rows() != fit.loadings.rows() || x.cols() != fit.factors.rows())
        throw ConfigError("predictor matrix does not match the factor estimate");
    return x - fit.loadings * fit.factors.transpose();
}

FactorPenalty parse_factor_penalty(const std::string& name) {
    if (name == "ic1") return FactorPenalty::ic1;
    if (name == "ic2") return FactorPenalty::ic2;
    if (name == "ic3") return FactorPenalty::ic3;
    throw ConfigError("unknown factor penalty '" + name + "' (expected ic1, ic2 or ic3)");
}

std::string to_string(FactorPenalty penalty) {
    switch (penalty) {
        case FactorPenalty::ic1: return "ic1";
        case FactorPenalty::ic2: return "ic2";
        case FactorPenalty::ic3: return "ic3";
    }
    return "ic1";
}

double factor_penalty(FactorPenalty penalty, double p, double t) {
    const double m = std::min(p, t);
    switch (penalty) {
        case FactorPenalty::ic1: return (p + t) / (p * t) * std::log(p * t / (p + t));
        case FactorPenalty::ic2: return (p + t) / (p * t) * std::log(m);
        case FactorPenalty::ic3: return std::log(m) / m;
    }
    return 0.0;
}

NumFactorsSelection select_num_factors(const Eigen::MatrixXd& x, int k_max, FactorPenalty penalty) {
    const Eigen::Index p = x.rows();
    const Eigen::Index T = x.cols();
    if (k_max < 1 || k_max > std::min(p, T)) {
        throw ConfigError("k_max " + std::to_string(k_max) + " outside [1, min(p, T)]");
    }
    check_finite(x);

    // Residual sum of squares after K factors = total - sum of the top K
    // eigenvalues of the (smaller) Gram matrix.
    Eigen::MatrixXd gram;
    if (T <= p) {
        gram = Eigen::MatrixXd::Zero(T, T);
        gram.selfadjointView<Eigen::Lower>().rankUpdate(x.transpose());
    } else {
        gram = Eigen::MatrixXd::Zero(p, p);
        gram.selfadjointView<Eigen::Lower>().rankUpdate(x);
    }
    gram.triangularView<Eigen::StrictlyUpper>() = gram.transpose();
    auto eig = sorted_symmetric_eigen(gram);

    const double pt = static_cast<double>(p) * static_cast<double>(T);
    const double total = x.squaredNorm();
    const double g = factor_penalty(penalty, static_cast<double>(p), static_cast<double>(T));

    NumFactorsSelection sel;
    sel.k_max = k_max;
    sel.penalty = penalty;
    sel.log_residual.resize(k_max + 1);
    sel.penalty_term.resize(k_max + 1);
    sel.criterion.resize(k_max + 1);
    double explained = 0.0;
    for (int k = 0; k <= k_max; ++k) {
        if (k > 0) explained += std::max(0.0, eig.values(k - 1));
        double rss = total - explained;
        if (rss <= kZeroResidualRatio * total) rss = 0.0;
        sel.log_residual(k) = std::log(std::max(rss / pt, kLogFloor));
        sel.penalty_term(k) = k * g;
        sel.criterion(k) = sel.log_residual(k) + sel.penalty_term(k);
    }
    Eigen::Index best = 0;
    for (Eigen::Index k = 1; k <= k_max; ++k) {
        if (sel.criterion(k) < sel.criterion(best)) best = k;
    }
    sel.k_hat = static_cast<int>(best);
    return sel;
}

void write_factor_estimate(const std::filesystem::path& dir, const FactorEstimate& fit) {
    std::filesystem::create_directories(dir);
    std::vector<std::string> cols;
    for (int j = 0; j < fit.num_factors(); ++j) cols.push_back("f" + std::to_string(j + 1));
    write_matrix_csv(dir / "loadings.csv", fit.loadings, cols);
    write_matrix_csv(dir / "factors.csv", fit.factors, cols);
    write_matrix_csv(dir / "eigenvalues.csv", fit.eigenvalues, {"eigenvalue"});
}

FactorEstimate read_factor_estimate(const std::filesystem::path& dir) {
    FactorEstimate fit;
    fit.loadings = read_matrix_csv(dir / "loadings.csv");
    fit.factors = read_matrix_csv(dir / "factors.csv");
    Eigen::MatrixXd ev = read_matrix_csv(dir / "eigenvalues.csv");
    fit.eigenvalues = ev.col(0);
    fit.loadings_pinv = loadings_pseudo_inverse(fit.loadings);
    return fit;
}

}  // namespace sufcast
