#pragma once

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "sufcast/sdr.hpp"
#include "sufcast/slice_moments.hpp"

namespace sufcast {

/// Forecasting methods: sufficient forecasting with one of the SDR kernels,
/// the linear diffusion index (pc) or an additive model on all factors (nlpc).
enum class ForecastMethod { sir, dr, tm, ens, pc, nlpc };

ForecastMethod parse_forecast_method(const std::string& name);
std::string to_string(ForecastMethod method);
bool is_sdr(ForecastMethod method);
KernelMethod kernel_method(ForecastMethod method);

/// One univariate smoother of the additive fit. The smoother is the
/// Nadaraya-Watson average of `partial_residual` over `index_values`, minus
/// `offset`.
struct AdditiveComponent {
    Eigen::VectorXd index_values;
    Eigen::VectorXd partial_residual;
    double bandwidth = 1.0;
    double offset = 0.0;  // training mean of the smooth; nonzero only with two or more active indices
    bool active = true;
};

struct ForecastModel {
    enum class Kind { additive, linear };

    Kind kind = Kind::additive;
    ForecastMethod method = ForecastMethod::dr;
    int horizon = 1;
    Eigen::MatrixXd directions;  // K x L; maps a factor vector to the model's indices
    double intercept = 0.0;      // training target mean (additive) or OLS intercept (linear)
    std::vector<AdditiveComponent> components;
    Eigen::VectorXd coefficients;  // linear kind only
    int sweeps = 0;
    bool converged = true;
    std::vector<std::string> warnings;

    int num_indices() const { return static_cast<int>(directions.cols()); }

    /// e.g. "DR(2)", "PC", "NL-PC".
    std::string tag() const;
};

struct AdditiveOptions {
    std::optional<std::vector<double>> bandwidths;  // per index; default normal reference
    double tolerance = 1e-8;
    int max_sweeps = 100;
    Execution exec = Execution::parallel;
};

/// Backfits y = mean(y) + sum_j s_j(index_j) with Gaussian Nadaraya-Watson
/// smoothers on the centered targets. With two or more active indices each
/// smooth is centered over the training sample so the level stays in the
/// intercept. A constant index gets s_j = 0 and a warning.
ForecastModel fit_additive(const Eigen::MatrixXd& indices, const Eigen::VectorXd& targets,
                           const AdditiveOptions& options = {});

/// Additive fit on the indices factors * directions.
ForecastModel fit_index_model(const Eigen::MatrixXd& factors, const Eigen::VectorXd& targets,
                              const Eigen::MatrixXd& directions, ForecastMethod method,
                              const AdditiveOptions& options = {});

enum class PcMode { linear, additive };

/// Linear mode: OLS of targets on an intercept and all K factors.
/// Additive mode: fit_additive on all factors (directions = I_K).
ForecastModel fit_pc_baseline(const Eigen::MatrixXd& factors, const Eigen::VectorXd& targets, PcMode mode,
                              const AdditiveOptions& options = {});

/// Forecast from one factor vector (length K).
double predict(const ForecastModel& model, const Eigen::VectorXd& f_new);

/// One forecast per row of `factor_rows`.
Eigen::VectorXd predict_rows(const ForecastModel& model, const Eigen::MatrixXd& factor_rows);

}  // namespace sufcast
