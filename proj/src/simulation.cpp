#include "sufcast/simulation.hpp"

#include <algorithm>
#include <cmath>

#include "sufcast/error.hpp"
#include "sufcast/linalg.hpp"

namespace sufcast {

LinkModel parse_link_model(const std::string& name) {
    if (name == "I" || name == "1") return LinkModel::I;
    if (name == "II" || name == "2") return LinkModel::II;
    if (name == "III" || name == "3") return LinkModel::III;
    if (name == "IV" || name == "4") return LinkModel::IV;
    throw ConfigError("unknown link model '" + name + "' (expected I, II, III or IV)");
}

std::string to_string(LinkModel model) {
    switch (model) {
        case LinkModel::I: return "I";
        case LinkModel::II: return "II";
        case LinkModel::III: return "III";
        case LinkModel::IV: return "IV";
    }
    return "?";
}

double link_value(LinkModel model, double a, double b) {
    switch (model) {
        case LinkModel::I: return 0.4 * a * a + 3.0 * std::sin(b / 4.0);
        case LinkModel::II: return 3.0 * std::sin(a / 4.0) + 3.0 * std::sin(b / 4.0);
        case LinkModel::III: return 0.4 * a * a + std::sqrt(std::abs(b));
        case LinkModel::IV: return a * (b + 1.0);
    }
    throw ConfigError("unknown link model");
}

namespace {

Eigen::VectorXd default_direction(const std::vector<double>& head, int k) {
    Eigen::VectorXd v = Eigen::VectorXd::Zero(k);
    for (int i = 0; i < k && i < static_cast<int>(head.size()); ++i) v(i) = head[static_cast<std::size_t>(i)];
    const double n = v.norm();
    if (n == 0.0) throw ConfigError("default direction vanishes for K = " + std::to_string(k));
    return v / n;
}

void check_direction(const Eigen::VectorXd& v, int k, const char* name) {
    if (v.size() == 0) return;
    if (v.size() != k) throw ConfigError(std::string(name) + " must have K = " + std::to_string(k) + " entries");
    if (!v.allFinite() || std::abs(v.norm() - 1.0) > 1e-8) throw ConfigError(std::string(name) + " must be a unit vector");
}

}  // namespace

void DgpSpec::validate() const {
    if (p < 1 || t < 2 || k < 1) throw ConfigError("DGP needs p >= 1, T >= 2 and K >= 1");
    check_direction(phi1, k, "phi1");
    check_direction(phi2, k, "phi2");
    direction1();
    direction2();
    if (!(loading_low < loading_high)) throw ConfigError("loading range must be non-empty");
    if (!(ar_low <= ar_high) || ar_low <= -1.0 || ar_high >= 1.0)
        throw ConfigError("AR coefficient range must lie inside (-1, 1)");
    if (!(sigma >= 0.0) || !(factor_innovation_sd >= 0.0) || !(error_innovation_sd >= 0.0))
        throw ConfigError("noise scales must be nonnegative");
    if (burn_in < 0) throw ConfigError("burn-in must be nonnegative");
}

Eigen::VectorXd DgpSpec::direction1() const {
    return phi1.size() ? phi1 : default_direction({1, 1, 1, 0, 0, 0}, k);
}

Eigen::VectorXd DgpSpec::direction2() const {
    return phi2.size() ? phi2 : default_direction({1, 0, 0, 0, 1, 3}, k);
}

std::mt19937_64 make_rng(std::uint64_t seed, std::uint64_t stream, std::uint64_t replicate) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(replicate),
                      static_cast<std::uint32_t>(replicate >> 32)};
    return std::mt19937_64(seq);
}

namespace {

Eigen::MatrixXd draw_loadings(const DgpSpec& spec, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(spec.loading_low, spec.loading_high);
    Eigen::MatrixXd b(spec.p, spec.k);
    for (int i = 0; i < spec.p; ++i)
        for (int j = 0; j < spec.k; ++j) b(i, j) = u(rng);
    return b;
}

}  // namespace

DgpParameters draw_parameters(const DgpSpec& spec) {
    spec.validate();
    auto rng = make_rng(spec.seed, 0, 0);
    std::uniform_real_distribution<double> ar(spec.ar_low, spec.ar_high);
    DgpParameters out;
    out.alpha.resize(spec.k);
    for (int j = 0; j < spec.k; ++j) out.alpha(j) = ar(rng);
    out.rho.resize(spec.p);
    for (int i = 0; i < spec.p; ++i) out.rho(i) = ar(rng);
    out.loadings = draw_loadings(spec, rng);
    return out;
}

IdentifiedRotation identifiability_rotation(const Eigen::MatrixXd& f, const Eigen::MatrixXd& b) {
    const Eigen::Index k = f.cols();
    if (b.cols() != k || f.rows() < 1) throw ConfigError("factors and loadings must share K columns");
    const double t = static_cast<double>(f.rows());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> cov((f.transpose() * f / t).eval());
    const Eigen::VectorXd ev = cov.eigenvalues();
    if (ev.minCoeff() <= 1e-12 * std::max(1.0, ev.maxCoeff())) throw NumericalError("F'F is rank deficient");
    const Eigen::MatrixXd& u = cov.eigenvectors();
    const Eigen::MatrixXd root = u * ev.cwiseSqrt().asDiagonal() * u.transpose();
    const Eigen::MatrixXd inv_root = u * ev.cwiseSqrt().cwiseInverse().asDiagonal() * u.transpose();

    const Eigen::MatrixXd btb = b.transpose() * b;
    if (Eigen::FullPivLU<Eigen::MatrixXd>(btb).rank() < k) throw NumericalError("B'B is rank deficient");
    const auto g = sorted_symmetric_eigen(root * btb * root);

    IdentifiedRotation out;
    out.h = g.vectors.transpose() * inv_root;
    out.factors = f * out.h.transpose();
    for (Eigen::Index j = 0; j < k; ++j) {
        const Eigen::Index i = first_max_abs_index(out.factors.col(j));
        if (out.factors(i, j) < 0.0) {
            out.h.row(j) *= -1.0;
            out.factors.col(j) *= -1.0;
        }
    }
    out.loadings = b * (root * g.vectors);
    for (Eigen::Index j = 0; j < k; ++j)
        if (out.h.row(j).dot(g.vectors.col(j).transpose() * inv_root) < 0.0) out.loadings.col(j) *= -1.0;
    return out;
}

SimDraw sample_dgp(const DgpSpec& spec, const DgpParameters& params, int replicate, int t_len, int rotation_cols) {
    spec.validate();
    const int t = t_len < 0 ? spec.t : t_len;
    if (t < 1) throw ConfigError("number of periods must be positive");
    if (replicate < 0) throw ConfigError("replicate index must be nonnegative");
    auto rng = make_rng(spec.seed, 1, static_cast<std::uint64_t>(replicate));
    std::normal_distribution<double> normal(0.0, 1.0);

    SimDraw d;
    d.loadings = spec.fixed_loadings ? params.loadings : draw_loadings(spec, rng);
    d.directions.resize(spec.k, 2);
    d.directions.col(0) = spec.direction1();
    d.directions.col(1) = spec.direction2();

    Eigen::VectorXd f = Eigen::VectorXd::Zero(spec.k);
    Eigen::VectorXd u = Eigen::VectorXd::Zero(spec.p);
    auto step = [&] {
        for (int j = 0; j < spec.k; ++j) f(j) = params.alpha(j) * f(j) + spec.factor_innovation_sd * normal(rng);
        for (int i = 0; i < spec.p; ++i) u(i) = params.rho(i) * u(i) + spec.error_innovation_sd * normal(rng);
    };
    for (int s = 0; s < spec.burn_in; ++s) step();

    d.factors.resize(t, spec.k);
    Eigen::MatrixXd errors(spec.p, t);
    d.y.resize(t);
    for (int s = 0; s < t; ++s) {
        step();
        d.factors.row(s) = f.transpose();
        errors.col(s) = u;
        const double eps = normal(rng);
        d.y(s) = link_value(spec.link, d.directions.col(0).dot(f), d.directions.col(1).dot(f)) + spec.sigma * eps;
    }
    d.x = d.loadings * d.factors.transpose() + errors;

    const int rot = rotation_cols < 0 ? t : std::min(rotation_cols, t);
    if (rot > 0) {
        const auto r = identifiability_rotation(d.factors.topRows(rot), d.loadings);
        d.rotation = r.h;
        d.rotated_directions = r.h.transpose().fullPivLu().solve(d.directions);
    }
    return d;
}

SimDraw sample_dgp(const DgpSpec& spec, int replicate) {
    return sample_dgp(spec, draw_parameters(spec), replicate);
}

double subspace_r2(const Eigen::VectorXd& phi_hat, const Eigen::MatrixXd& true_span) {
    const double n = phi_hat.norm();
    if (!(n > 0.0) || !std::isfinite(n)) throw ConfigError("direction must be a nonzero finite vector");
    if (true_span.rows() != phi_hat.size()) throw ConfigError("direction and span dimensions differ");
    const Eigen::MatrixXd q = orthonormal_basis(true_span);
    const double r2 = (q.transpose() * (phi_hat / n)).squaredNorm();
    return std::clamp(r2, 0.0, 1.0);
}

Eigen::MatrixXd aligned_true_span(const Eigen::MatrixXd& estimated, const Eigen::MatrixXd& rotated_factors,
                                  const Eigen::MatrixXd& rotated_directions) {
    if (estimated.rows() != rotated_factors.rows() || estimated.cols() != rotated_factors.cols())
        throw ConfigError("estimated and true factors must have the same shape");
    // f_hat ~ O f_tilde with O orthogonal, so phi_tilde' f_tilde = (O phi_tilde)' f_hat.
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(rotated_factors.transpose() * estimated,
                                          Eigen::ComputeFullU | Eigen::ComputeFullV);
    const Eigen::MatrixXd o = svd.matrixV() * svd.matrixU().transpose();
    return orthonormal_basis(o * rotated_directions);
}

}  // namespace sufcast
