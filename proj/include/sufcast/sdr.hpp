#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include <Eigen/Dense>

#include "sufcast/slice_moments.hpp"

namespace sufcast {

enum class KernelMethod { sir, dr, tm, ensemble };

/// How var(f) enters the directional-regression kernel: the identity (factors
/// are normalized to unit sample covariance) or the pooled within-slice
/// second moment, which equals the sample covariance of the centered factors.
enum class VarianceMode { identity, pooled };

KernelMethod parse_kernel_method(const std::string& name);
std::string to_string(KernelMethod method);
VarianceMode parse_variance_mode(const std::string& name);
std::string to_string(VarianceMode mode);

/// A symmetric K x K candidate matrix whose leading eigenvectors estimate the
/// central subspace.
struct KernelEstimate {
    KernelMethod method = KernelMethod::dr;
    VarianceMode variance_mode = VarianceMode::identity;
    int slice_count = 0;
    Eigen::MatrixXd matrix;
    Eigen::VectorXd eigenvalues;   // descending
    Eigen::MatrixXd eigenvectors;  // matching unit columns, sign-fixed
    Eigen::MatrixXd directions;    // K x L, empty until extract_directions is applied

    int num_factors() const { return static_cast<int>(matrix.rows()); }
};

/// Splits observations into `h_count` groups of consecutive rank (sizes differ
/// by at most one); equal values are ordered by time index.
SliceAssignment slice(const Eigen::VectorXd& y, int h_count);

/// Default number of slices.
inline constexpr int kDefaultSlices = 10;

KernelEstimate sir_kernel(const Eigen::MatrixXd& factors, const SliceAssignment& slices,
                          Execution exec = Execution::parallel);

/// Directional regression through the expanded (moment) form:
/// 2 sum_h p_h (V - S_h)^2 + 2 W^2 + 2 (sum_h p_h m_h'm_h) W, W = sum_h p_h m_h m_h'.
KernelEstimate dr_kernel(const Eigen::MatrixXd& factors, const SliceAssignment& slices,
                         VarianceMode mode = VarianceMode::identity, Execution exec = Execution::parallel);

/// Directional regression through the slice-pair double sum
/// sum_{h,g} p_h p_g (2V - S_h - S_g + m_h m_g' + m_g m_h')^2. O(H^2 K^3); kept
/// as the independent check of `dr_kernel`.
KernelEstimate dr_kernel_pairform(const Eigen::MatrixXd& factors, const SliceAssignment& slices,
                                  VarianceMode mode = VarianceMode::identity);

/// Inverse third-moment kernel with the global third moment subtracted from
/// every slice's central third moment. Needs at least two points per slice.
KernelEstimate tm_kernel(const Eigen::MatrixXd& factors, const SliceAssignment& slices,
                         Execution exec = Execution::parallel);

/// DR + TM.
KernelEstimate ensemble_kernel(const KernelEstimate& dr, const KernelEstimate& tm);

/// Dispatches on `method`; the ensemble builds both parts from one set of moments.
KernelEstimate build_kernel(KernelMethod method, const Eigen::MatrixXd& factors, const SliceAssignment& slices,
                            VarianceMode mode = VarianceMode::identity, Execution exec = Execution::parallel);

/// Leading `l` eigenvectors of the kernel (K x l, orthonormal, sign-fixed).
Eigen::MatrixXd extract_directions(const KernelEstimate& kernel, int l);

/// Copy of `kernel` with `directions` set to its leading `l` eigenvectors.
KernelEstimate with_directions(KernelEstimate kernel, int l);

struct DimensionSelection {
    int l_hat = 1;
    int k_c = 1;
    int tau = 0;
    double c_t = 0.0;
    Eigen::VectorXd objective;  // G(l) for l = 1..K_c, stored at index l-1
};

inline constexpr double kDefaultCensoring = 0.5;
inline constexpr double kPositiveEigenvalue = 1e-12;

/// Maximizes G(l) = (T/2) sum_{i = 1 + min(tau, l)}^{K_c} {log(1 + lambda_i) - lambda_i}
///                  - C_T l (2K - l + 1) / 2 over l = 1..K_c, K_c = round(c K).
/// Ties go to the smaller l.
DimensionSelection select_dimension(const KernelEstimate& kernel, int t_len, double c_censor, double c_t);

/// Default penalty scale: sqrt(K/p) T + sqrt(T) for SIR and DR,
/// sqrt(K/p) T + sqrt(K T) for TM and the ensemble, times `multiplier`.
double default_ct(KernelMethod method, int k, int p, int t_len, double multiplier = 1.0);

/// kernel.csv (matrix), kernel_eigenvalues.csv, kernel.json (summary and G(l) trace).
void write_kernel(const std::filesystem::path& dir, const KernelEstimate& kernel,
                  const std::optional<DimensionSelection>& selection = std::nullopt);

}  // namespace sufcast
