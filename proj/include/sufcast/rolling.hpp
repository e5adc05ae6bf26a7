#pragma once

#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "sufcast/factors.hpp"
#include "sufcast/forecaster.hpp"
#include "sufcast/panel.hpp"

namespace sufcast {

/// Benchmark mean in the out-of-sample R^2 denominator.
enum class BenchmarkMean {
    rolling,  // training-window target mean at each origin
    full,     // mean of the realized evaluation targets
};

struct RollingConfig {
    int window = 120;
    int horizon = 1;
    ForecastMethod method = ForecastMethod::dr;
    int num_factors = 8;
    bool select_factors = false;  // choose K per origin with select_num_factors
    int k_max = 8;
    FactorPenalty penalty = FactorPenalty::ic1;
    int num_directions = 1;
    bool select_directions = false;  // choose L per origin with select_dimension
    double c_censor = 0.5;
    double ct_multiplier = 1.0;
    int slices = 10;
    VarianceMode variance_mode = VarianceMode::identity;
    int n_eval = 240;
    bool standardize = true;
    BenchmarkMean benchmark = BenchmarkMean::rolling;
    bool include_target = false;  // add the target's own series to the predictor panel

    void validate() const;
};

/// Everything visible at a forecast origin.
struct OriginWindow {
    Eigen::Index origin = 0;         // column of the panel at which the forecast is made
    Eigen::MatrixXd x;               // p x window predictor columns ending at the origin (raw)
    Eigen::VectorXd train_targets;   // h-step targets for the first window - h columns
};

struct OriginPrediction {
    double forecast = 0.0;
    int num_factors = 0;
    int num_directions = 0;
};

using OriginForecaster = std::function<OriginPrediction(const OriginWindow&)>;

struct OriginForecast {
    Eigen::Index origin = 0;
    std::string label;
    double realized = 0.0;
    double forecast = 0.0;
    double pc_forecast = 0.0;
    double benchmark_mean = 0.0;
    int num_factors = 0;
    int num_directions = 0;
};

struct ForecastMetrics {
    double mse = 0.0;
    double r2 = 0.0;
};

/// MSE and out-of-sample R^2 = 1 - sum (y - yhat)^2 / sum (y - ybar)^2.
ForecastMetrics forecast_metrics(const Eigen::VectorXd& realized, const Eigen::VectorXd& forecast,
                                 const Eigen::VectorXd& benchmark);

struct EvalReport {
    std::string method_tag;
    int window = 0;
    int horizon = 1;
    BenchmarkMean benchmark = BenchmarkMean::rolling;
    std::vector<OriginForecast> origins;
    double mse = 0.0;
    double pc_mse = 0.0;
    double relative_mse = 1.0;  // MSE / MSE(PC)
    double r2 = 0.0;
    double pc_r2 = 0.0;

    /// "method=DR(1) h=1 MSE=... RMSE=... R2=..." with 3 significant digits.
    std::string summary_line() const;
};

/// The built-in forecaster for `config.method` at one origin.
OriginPrediction forecast_at_origin(const OriginWindow& window, const RollingConfig& config);

/// Rolling out-of-sample evaluation over the last `n_eval` origins with a
/// linear PC baseline fitted on identical windows.
EvalReport rolling_evaluate(const PanelData& panel, const RollingConfig& config);

/// Same, with a caller-supplied forecaster in place of `config.method`.
EvalReport rolling_evaluate(const PanelData& panel, const RollingConfig& config, const OriginForecaster& forecaster,
                            const std::string& method_tag);

/// forecasts.csv and summary.json.
void write_eval_report(const std::filesystem::path& dir, const EvalReport& report);

}  // namespace sufcast
