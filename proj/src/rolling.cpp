#include "sufcast/rolling.hpp"

#include <cmath>
#include <exception>
#include <fstream>
#include <limits>
#include <optional>

#include <json.hpp>

#include "sufcast/error.hpp"
#include "sufcast/matrix_io.hpp"
#include "sufcast/sdr.hpp"

namespace sufcast {

void RollingConfig::validate() const {
    if (window < 2) throw ConfigError("window must be at least 2");
    if (horizon < 1) throw ConfigError("horizon must be at least 1");
    if (window - horizon < 5) throw ConfigError("window minus horizon must leave at least 5 training pairs");
    if (!select_factors && num_factors < 1) throw ConfigError("number of factors must be positive");
    if (select_factors && k_max < 1) throw ConfigError("k_max must be positive");
    if (!select_directions && num_directions < 1) throw ConfigError("number of directions must be positive");
    if (slices < 1) throw ConfigError("number of slices must be positive");
    if (n_eval < 1) throw ConfigError("n_eval must be positive");
    if (!(c_censor > 0.0 && c_censor < 1.0)) throw ConfigError("censoring constant must lie in (0, 1)");
    if (!(ct_multiplier > 0.0)) throw ConfigError("C_T multiplier must be positive");
}

ForecastMetrics forecast_metrics(const Eigen::VectorXd& realized, const Eigen::VectorXd& forecast,
                                 const Eigen::VectorXd& benchmark) {
    const auto n = realized.size();
    if (n == 0 || forecast.size() != n || benchmark.size() != n)
        throw ConfigError("forecast metric inputs must be non-empty and equally long");
    ForecastMetrics m;
    const double sse = (realized - forecast).squaredNorm();
    const double sst = (realized - benchmark).squaredNorm();
    m.mse = sse / static_cast<double>(n);
    m.r2 = sst > 0.0 ? 1.0 - sse / sst : (sse == 0.0 ? 1.0 : -std::numeric_limits<double>::infinity());
    return m;
}

std::string EvalReport::summary_line() const {
    return "method=" + method_tag + " h=" + std::to_string(horizon) + " MSE=" + format_short(mse) +
           " RMSE=" + format_short(relative_mse) + " R2=" + format_short(r2);
}

namespace {

struct WindowFactors {
    Eigen::MatrixXd factors;  // window x K (K may be 0)
    int k = 0;
};

WindowFactors window_factors(const OriginWindow& w, const RollingConfig& config) {
    Eigen::MatrixXd x = w.x;
    if (config.standardize) x = standardize_rows(x, {0, x.cols()}).first;
    const int cap = static_cast<int>(std::min(x.rows(), x.cols()));
    WindowFactors out;
    if (config.select_factors) {
        out.k = select_num_factors(x, std::min(config.k_max, cap), config.penalty).k_hat;
    } else {
        if (config.num_factors > cap)
            throw ConfigError("K = " + std::to_string(config.num_factors) + " exceeds min(p, window) = " + std::to_string(cap));
        out.k = config.num_factors;
    }
    if (out.k > 0) out.factors = fit_factors(x, out.k).factors;
    return out;
}

double pc_forecast(const WindowFactors& wf, const OriginWindow& w) {
    const Eigen::Index n_train = w.train_targets.size();
    if (wf.k == 0) return w.train_targets.mean();
    auto model = fit_pc_baseline(wf.factors.topRows(n_train), w.train_targets, PcMode::linear);
    return predict(model, wf.factors.row(wf.factors.rows() - 1).transpose());
}

OriginPrediction method_forecast(const WindowFactors& wf, const OriginWindow& w, const RollingConfig& config) {
    const Eigen::Index n_train = w.train_targets.size();
    OriginPrediction pred;
    pred.num_factors = wf.k;
    if (wf.k == 0) {
        pred.forecast = w.train_targets.mean();
        return pred;
    }
    const Eigen::MatrixXd train = wf.factors.topRows(n_train);
    const Eigen::VectorXd latest = wf.factors.row(wf.factors.rows() - 1).transpose();

    switch (config.method) {
        case ForecastMethod::pc: {
            pred.forecast = pc_forecast(wf, w);
            pred.num_directions = wf.k;
            return pred;
        }
        case ForecastMethod::nlpc: {
            auto model = fit_pc_baseline(train, w.train_targets, PcMode::additive);
            pred.forecast = predict(model, latest);
            pred.num_directions = wf.k;
            return pred;
        }
        default: break;
    }

    const KernelMethod km = kernel_method(config.method);
    const auto slices = slice(w.train_targets, config.slices);
    const auto kernel = build_kernel(km, train, slices, config.variance_mode);
    int l = std::min(config.num_directions, wf.k);
    if (config.select_directions) {
        const double ct = default_ct(km, wf.k, static_cast<int>(w.x.rows()), static_cast<int>(n_train), config.ct_multiplier);
        l = select_dimension(kernel, static_cast<int>(n_train), config.c_censor, ct).l_hat;
    }
    auto model = fit_index_model(train, w.train_targets, extract_directions(kernel, l), config.method);
    pred.forecast = predict(model, latest);
    pred.num_directions = l;
    return pred;
}

}  // namespace

OriginPrediction forecast_at_origin(const OriginWindow& window, const RollingConfig& config) {
    return method_forecast(window_factors(window, config), window, config);
}

namespace {

struct Layout {
    Eigen::MatrixXd x;
    Eigen::VectorXd targets;  // h-step targets aligned with x columns
    Eigen::Index first_origin = 0;
};

Layout layout(const PanelData& panel, const RollingConfig& config) {
    config.validate();
    panel.validate();
    Layout out;
    if (config.include_target) {
        out.x.resize(panel.x.rows() + 1, panel.x.cols());
        out.x.topRows(panel.x.rows()) = panel.x;
        out.x.bottomRows(1) = panel.y.transpose();
    } else {
        out.x = panel.x;
    }
    const Eigen::Index T = panel.num_periods();
    const Eigen::Index needed = static_cast<Eigen::Index>(config.window) + config.n_eval + config.horizon - 1;
    if (T < needed) {
        throw ConfigError("insufficient data: window " + std::to_string(config.window) + ", n_eval " +
                          std::to_string(config.n_eval) + " and horizon " + std::to_string(config.horizon) +
                          " need at least " + std::to_string(needed) + " periods, panel has " + std::to_string(T));
    }
    out.targets = make_h_step_target(panel.y, config.horizon);
    out.first_origin = out.targets.size() - config.n_eval;
    return out;
}

OriginWindow make_window(const Layout& lay, Eigen::Index origin, const RollingConfig& config) {
    OriginWindow w;
    w.origin = origin;
    const Eigen::Index start = origin - config.window + 1;
    w.x = lay.x.middleCols(start, config.window);
    w.train_targets = lay.targets.segment(start, config.window - config.horizon);
    return w;
}

EvalReport evaluate(const PanelData& panel, const RollingConfig& config, const OriginForecaster* custom,
                    const std::string& tag) {
    const Layout lay = layout(panel, config);
    const int n = config.n_eval;
    EvalReport report;
    report.method_tag = tag;
    report.window = config.window;
    report.horizon = config.horizon;
    report.benchmark = config.benchmark;
    report.origins.resize(static_cast<std::size_t>(n));
    std::vector<std::exception_ptr> errors(static_cast<std::size_t>(n));

#pragma omp parallel for schedule(dynamic)
    for (int i = 0; i < n; ++i) {
        auto& rec = report.origins[static_cast<std::size_t>(i)];
        try {
            const Eigen::Index origin = lay.first_origin + i;
            const OriginWindow w = make_window(lay, origin, config);
            rec.origin = origin;
            rec.label = panel.time_labels[static_cast<std::size_t>(origin)];
            rec.realized = lay.targets(origin);
            rec.benchmark_mean = w.train_targets.mean();
            const WindowFactors wf = window_factors(w, config);
            rec.pc_forecast = pc_forecast(wf, w);
            const OriginPrediction pred = custom ? (*custom)(w) : method_forecast(wf, w, config);
            rec.forecast = pred.forecast;
            rec.num_factors = custom ? pred.num_factors : wf.k;
            rec.num_directions = pred.num_directions;
        } catch (...) {
            errors[static_cast<std::size_t>(i)] = std::current_exception();
        }
    }
    for (int i = 0; i < n; ++i) {
        if (!errors[static_cast<std::size_t>(i)]) continue;
        const std::string where = "origin " + panel.time_labels[static_cast<std::size_t>(lay.first_origin + i)] + ": ";
        try {
            std::rethrow_exception(errors[static_cast<std::size_t>(i)]);
        } catch (const Error& e) {
            rethrow_with_prefix(e, where);
        } catch (const std::exception& e) {
            throw NumericalError(where + e.what());
        }
    }

    Eigen::VectorXd realized(n), forecast(n), pc(n), bench(n);
    for (int i = 0; i < n; ++i) {
        const auto& rec = report.origins[static_cast<std::size_t>(i)];
        realized(i) = rec.realized;
        forecast(i) = rec.forecast;
        pc(i) = rec.pc_forecast;
        bench(i) = rec.benchmark_mean;
    }
    if (config.benchmark == BenchmarkMean::full) {
        bench.setConstant(realized.mean());
        for (auto& rec : report.origins) rec.benchmark_mean = bench(0);
    }
    const auto m = forecast_metrics(realized, forecast, bench);
    const auto base = forecast_metrics(realized, pc, bench);
    report.mse = m.mse;
    report.r2 = m.r2;
    report.pc_mse = base.mse;
    report.pc_r2 = base.r2;
    report.relative_mse = base.mse > 0.0 ? m.mse / base.mse : (m.mse == 0.0 ? 1.0 : std::numeric_limits<double>::infinity());
    return report;
}

}  // namespace

EvalReport rolling_evaluate(const PanelData& panel, const RollingConfig& config) {
    std::string tag = to_string(config.method);
    if (is_sdr(config.method)) tag += config.select_directions ? "(auto)" : "(" + std::to_string(config.num_directions) + ")";
    return evaluate(panel, config, nullptr, tag);
}

EvalReport rolling_evaluate(const PanelData& panel, const RollingConfig& config, const OriginForecaster& forecaster,
                            const std::string& method_tag) {
    return evaluate(panel, config, &forecaster, method_tag);
}

void write_eval_report(const std::filesystem::path& dir, const EvalReport& report) {
    std::filesystem::create_directories(dir);
    {
        std::ofstream out(dir / "forecasts.csv", std::ios::binary);
        if (!out) throw DataError("cannot write " + (dir / "forecasts.csv").string());
        out << "origin,label,realized,forecast,pc_forecast,benchmark_mean,num_factors,num_directions\n";
        for (const auto& r : report.origins) {
            out << r.origin << ',' << r.label << ',' << format_double(r.realized) << ',' << format_double(r.forecast)
                << ',' << format_double(r.pc_forecast) << ',' << format_double(r.benchmark_mean) << ','
                << r.num_factors << ',' << r.num_directions << '\n';
        }
    }
    nlohmann::ordered_json j;
    j["method"] = report.method_tag;
    j["horizon"] = report.horizon;
    j["window"] = report.window;
    j["n_eval"] = report.origins.size();
    j["benchmark_mean"] = report.benchmark == BenchmarkMean::rolling ? "rolling" : "full";
    j["mse"] = report.mse;
    j["pc_mse"] = report.pc_mse;
    j["relative_mse"] = report.relative_mse;
    j["r2"] = report.r2;
    j["pc_r2"] = report.pc_r2;
    std::vector<int> ks, ls;
    for (const auto& r : report.origins) {
        ks.push_back(r.num_factors);
        ls.push_back(r.num_directions);
    }
    j["selected_k"] = ks;
    j["selected_l"] = ls;
    std::ofstream(dir / "summary.json") << j.dump(2) << '\n';
}

}  // namespace sufcast
