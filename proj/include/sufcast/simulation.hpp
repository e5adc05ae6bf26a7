#pragma once

#include <cstdint>
#include <random>
#include <string>

#include <Eigen/Dense>

namespace sufcast {

/// Link functions of the simulated single- and two-index models, in a = phi1'f
/// and b = phi2'f.
///   I:   0.4 a^2 + 3 sin(b / 4)
///   II:  3 sin(a / 4) + 3 sin(b / 4)
///   III: 0.4 a^2 + |b|^(1/2)
///   IV:  a (b + 1)
enum class LinkModel { I, II, III, IV };

LinkModel parse_link_model(const std::string& name);
std::string to_string(LinkModel model);
double link_value(LinkModel model, double a, double b);

struct DgpSpec {
    int p = 100;
    int t = 500;
    int k = 6;
    Eigen::VectorXd phi1;  // empty: (1,1,1,0,0,0)/sqrt(3) padded to K
    Eigen::VectorXd phi2;  // empty: (1,0,0,0,1,3)/sqrt(11) padded to K
    double loading_low = -1.0;
    double loading_high = 2.0;
    double ar_low = 0.2;
    double ar_high = 0.8;
    double sigma = 0.2;
    double factor_innovation_sd = 1.0;
    double error_innovation_sd = 1.0;
    int burn_in = 100;
    LinkModel link = LinkModel::I;
    bool fixed_loadings = true;  // draw loadings once per study rather than per replicate
    std::uint64_t seed = 1;

    /// Fills default directions and checks ranges; throws ConfigError.
    void validate() const;
    Eigen::VectorXd direction1() const;
    Eigen::VectorXd direction2() const;
};

/// Quantities drawn once per study.
struct DgpParameters {
    Eigen::VectorXd alpha;     // K factor AR coefficients
    Eigen::VectorXd rho;       // p error AR coefficients
    Eigen::MatrixXd loadings;  // p x K; used for every replicate when fixed
};

/// Generator for (seed, stream, replicate). Stream 0 is reserved for the study
/// parameters, stream 1 for replicate draws.
std::mt19937_64 make_rng(std::uint64_t seed, std::uint64_t stream, std::uint64_t replicate);

DgpParameters draw_parameters(const DgpSpec& spec);

struct IdentifiedRotation {
    Eigen::MatrixXd h;         // K x K, f -> h f
    Eigen::MatrixXd factors;   // T x K, F h'
    Eigen::MatrixXd loadings;  // p x K, B h^{-1}
};

/// H with T^{-1} H F'F H' = I and H^{-T} B'B H^{-1} diagonal with descending
/// entries. Rows are signed so that each rotated factor column has a
/// nonnegative largest-magnitude entry.
IdentifiedRotation identifiability_rotation(const Eigen::MatrixXd& f, const Eigen::MatrixXd& b);

struct SimDraw {
    Eigen::MatrixXd x;        // p x T
    Eigen::VectorXd y;        // y(t) is the response one step after factor row t
    Eigen::MatrixXd factors;  // T x K
    Eigen::MatrixXd loadings; // p x K
    Eigen::MatrixXd directions;          // K x 2, (phi1, phi2)
    Eigen::MatrixXd rotation;            // identifiability H
    Eigen::MatrixXd rotated_directions;  // H^{-T} (phi1, phi2)
};

/// Draws `t_len` periods (spec.t when negative). The rotation is computed on
/// the first `rotation_cols` periods (all when negative, skipped when 0).
SimDraw sample_dgp(const DgpSpec& spec, const DgpParameters& params, int replicate, int t_len = -1,
                   int rotation_cols = -1);
SimDraw sample_dgp(const DgpSpec& spec, int replicate);

/// Squared norm of the projection of phi_hat / |phi_hat| onto span(true_span).
double subspace_r2(const Eigen::VectorXd& phi_hat, const Eigen::MatrixXd& true_span);

/// Orthonormal basis of the true directions expressed in the estimated factor
/// coordinates. `rotated_factors` (T x K) are the identified true factors and
/// `estimated` the PCA factors on the same periods; the two are related by
/// the orthogonal Procrustes fit of F_hat on F_tilde.
Eigen::MatrixXd aligned_true_span(const Eigen::MatrixXd& estimated, const Eigen::MatrixXd& rotated_factors,
                                  const Eigen::MatrixXd& rotated_directions);

}  // namespace sufcast
