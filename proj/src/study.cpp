#include "sufcast/study.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>

#include <json.hpp>

#include "sufcast/error.hpp"
#include "sufcast/matrix_io.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace sufcast {

void StudyConfig::validate() const {
    dgp.validate();
    if (n_reps < 1) throw ConfigError("n_reps must be at least 1");
    if (methods.empty()) throw ConfigError("at least one method is required");
    if (!metrics.directions && !metrics.forecast && !metrics.order) throw ConfigError("no metric selected");
    if (slices < 1) throw ConfigError("number of slices must be positive");
    if (num_directions < 1 || num_directions > dgp.k) throw ConfigError("number of directions must lie in [1, K]");
    if (metrics.directions && dgp.k < 2) throw ConfigError("direction metrics need K >= 2");
    if (metrics.forecast && n_test < 1) throw ConfigError("n_test must be positive");
    if (metrics.order && k_max < 1) throw ConfigError("k_max must be positive");
    if (!(c_censor > 0.0 && c_censor < 1.0)) throw ConfigError("censoring constant must lie in (0, 1)");
}

const CellSummary& StudyResult::cell(const std::string& column) const {
    for (const auto& c : cells)
        if (c.column == column) return c;
    throw ConfigError("no table column named " + column);
}

double median(std::vector<double> v) {
    if (v.empty()) throw ConfigError("median of an empty set");
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

double sample_sd(const std::vector<double>& v) {
    if (v.size() < 2) return 0.0;
    double mean = 0.0;
    for (double x : v) mean += x;
    mean /= static_cast<double>(v.size());
    double ss = 0.0;
    for (double x : v) ss += (x - mean) * (x - mean);
    return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

namespace {

double oos_r2(const Eigen::VectorXd& realized, const Eigen::VectorXd& forecast, double benchmark) {
    const double sse = (realized - forecast).squaredNorm();
    const double sst = (realized.array() - benchmark).square().sum();
    return 1.0 - sse / sst;
}

}  // namespace

ReplicationRecord run_replication(const StudyConfig& config, const DgpParameters& params, int replicate) {
    ReplicationRecord rec;
    rec.replicate = replicate;
    for (auto m : config.methods) {
        MethodOutcome o;
        o.method = m;
        rec.outcomes.push_back(o);
    }
    try {
        const int t = config.dgp.t;
        const int t_total = t + (config.metrics.forecast ? config.n_test : 0);
        const SimDraw draw = sample_dgp(config.dgp, params, replicate, t_total, config.metrics.directions ? t : 0);
        const Eigen::MatrixXd x_train = draw.x.leftCols(t);
        const Eigen::VectorXd y_train = draw.y.head(t);

        if (config.metrics.order)
            rec.k_hat = select_num_factors(x_train, std::min(config.k_max, std::min(config.dgp.p, t)), config.penalty).k_hat;

        const auto fit = fit_factors(x_train, config.dgp.k);
        Eigen::MatrixXd span;
        if (config.metrics.directions) {
            const Eigen::MatrixXd rotated = draw.factors.topRows(t) * draw.rotation.transpose();
            span = aligned_true_span(fit.factors, rotated, draw.rotated_directions);
        }
        Eigen::MatrixXd f_test;
        Eigen::VectorXd y_test;
        if (config.metrics.forecast) {
            f_test = fit.project(draw.x.rightCols(config.n_test));
            y_test = draw.y.tail(config.n_test);
        }
        const double y_bar = y_train.mean();
        const SliceAssignment slices = slice(y_train, config.slices);
        AdditiveOptions opts;
        opts.exec = Execution::serial;

        for (auto& out : rec.outcomes) {
            try {
                if (!is_sdr(out.method)) {
                    if (config.metrics.forecast) {
                        const auto mode = out.method == ForecastMethod::pc ? PcMode::linear : PcMode::additive;
                        const auto model = fit_pc_baseline(fit.factors, y_train, mode, opts);
                        out.oos_r2 = oos_r2(y_test, predict_rows(model, f_test), y_bar);
                    }
                    continue;
                }
                const KernelMethod km = kernel_method(out.method);
                const auto kernel = build_kernel(km, fit.factors, slices, config.variance_mode, Execution::serial);
                if (config.metrics.directions) {
                    out.r2_phi1 = subspace_r2(kernel.eigenvectors.col(0), span);
                    out.r2_phi2 = subspace_r2(kernel.eigenvectors.col(1), span);
                }
                if (config.metrics.order) {
                    const double ct = default_ct(km, config.dgp.k, config.dgp.p, t, config.ct_multiplier);
                    out.l_hat = select_dimension(kernel, t, config.c_censor, ct).l_hat;
                }
                if (config.metrics.forecast) {
                    const auto model = fit_index_model(fit.factors, y_train,
                                                       extract_directions(kernel, config.num_directions), out.method, opts);
                    out.oos_r2 = oos_r2(y_test, predict_rows(model, f_test), y_bar);
                }
            } catch (const std::exception& e) {
                out.error = e.what();
            }
        }
    } catch (const std::exception& e) {
        rec.error = e.what();
    }
    return rec;
}

namespace {

struct Column {
    std::string name;
    std::vector<double> values;
};

std::vector<CellSummary> summarize(const StudyConfig& config, const std::vector<ReplicationRecord>& records) {
    std::vector<Column> cols;
    auto add = [&](const std::string& name, auto&& getter) {
        Column c{name, {}};
        for (const auto& r : records) {
            if (!r.error.empty()) continue;
            if (auto v = getter(r); !std::isnan(v)) c.values.push_back(v);
        }
        cols.push_back(std::move(c));
    };
    constexpr double nan = std::numeric_limits<double>::quiet_NaN();
    if (config.metrics.order) {
        add("k_hat", [](const ReplicationRecord& r) { return double(r.k_hat); });
        add("k_hat_rate", [&](const ReplicationRecord& r) { return r.k_hat == config.dgp.k ? 100.0 : 0.0; });
    }
    for (std::size_t m = 0; m < config.methods.size(); ++m) {
        const auto method = config.methods[m];
        const std::string tag = to_string(method);
        auto ok = [m](const ReplicationRecord& r) { return r.outcomes[m].error.empty(); };
        if (is_sdr(method) && config.metrics.directions) {
            add(tag + "_r2_phi1", [&](const ReplicationRecord& r) { return ok(r) ? 100.0 * r.outcomes[m].r2_phi1 : nan; });
            add(tag + "_r2_phi2", [&](const ReplicationRecord& r) { return ok(r) ? 100.0 * r.outcomes[m].r2_phi2 : nan; });
        }
        if (config.metrics.forecast)
            add(tag + "_oos_r2", [&](const ReplicationRecord& r) { return ok(r) ? 100.0 * r.outcomes[m].oos_r2 : nan; });
        if (is_sdr(method) && config.metrics.order) {
            add(tag + "_l_hat", [&](const ReplicationRecord& r) { return ok(r) ? double(r.outcomes[m].l_hat) : nan; });
            add(tag + "_l_hat_rate", [&](const ReplicationRecord& r) {
                return ok(r) ? (r.outcomes[m].l_hat == config.num_directions ? 100.0 : 0.0) : nan;
            });
        }
    }
    std::vector<CellSummary> cells;
    for (auto& c : cols) {
        CellSummary s;
        s.column = c.name;
        s.count = static_cast<int>(c.values.size());
        if (s.count > 0) {
            s.median = median(c.values);
            s.mean = std::accumulate(c.values.begin(), c.values.end(), 0.0) / s.count;
            s.sd = sample_sd(c.values);
        } else {
            s.median = s.mean = s.sd = nan;
        }
        s.rate = c.name.ends_with("_rate");
        cells.push_back(std::move(s));
    }
    return cells;
}

}  // namespace

StudyResult monte_carlo_study(const StudyConfig& config) {
    config.validate();
    const auto start = std::chrono::steady_clock::now();
    const DgpParameters params = draw_parameters(config.dgp);
    StudyResult result;
    result.config = config;
    result.records.resize(static_cast<std::size_t>(config.n_reps));

#pragma omp parallel for schedule(dynamic)
    for (int r = 0; r < config.n_reps; ++r) result.records[static_cast<std::size_t>(r)] = run_replication(config, params, r);

    for (const auto& rec : result.records) {
        bool failed = !rec.error.empty();
        for (const auto& o : rec.outcomes) failed = failed || !o.error.empty();
        result.failures += failed ? 1 : 0;
    }
    result.cells = summarize(config, result.records);
    result.runtime_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return result;
}

void write_study_table(const std::filesystem::path& path, const StudyResult& result) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write " + path.string());
    const auto& c = result.config;
    out << "model,p,T,n_reps,failures";
    for (const auto& cell : result.cells) {
        if (cell.rate) out << ',' << cell.column;
        else out << ',' << cell.column << "_median," << cell.column << "_sd";
    }
    out << '\n';
    out << to_string(c.dgp.link) << ',' << c.dgp.p << ',' << c.dgp.t << ',' << c.n_reps << ',' << result.failures;
    for (const auto& cell : result.cells) {
        if (cell.rate) out << ',' << format_double(cell.mean);
        else out << ',' << format_double(cell.median) << ',' << format_double(cell.sd);
    }
    out << '\n';
}

void write_study(const std::filesystem::path& dir, const StudyResult& result) {
    std::filesystem::create_directories(dir);
    write_study_table(dir / "table.csv", result);
    const auto& c = result.config;
    {
        std::ofstream out(dir / "replications.csv", std::ios::binary);
        if (!out) throw DataError("cannot write " + (dir / "replications.csv").string());
        out << "replicate,method,r2_phi1,r2_phi2,oos_r2,k_hat,l_hat,error\n";
        for (const auto& r : result.records) {
            for (const auto& o : r.outcomes) {
                std::string err = r.error.empty() ? o.error : r.error;
                std::replace(err.begin(), err.end(), ',', ';');
                std::replace(err.begin(), err.end(), '\n', ' ');
                out << r.replicate << ',' << to_string(o.method) << ',' << format_double(o.r2_phi1) << ','
                    << format_double(o.r2_phi2) << ',' << format_double(o.oos_r2) << ',' << r.k_hat << ',' << o.l_hat
                    << ',' << err << '\n';
            }
        }
    }
    nlohmann::ordered_json j;
    j["version"] = kVersion;
    j["seed"] = c.dgp.seed;
    j["model"] = to_string(c.dgp.link);
    j["p"] = c.dgp.p;
    j["T"] = c.dgp.t;
    j["K"] = c.dgp.k;
    j["n_reps"] = c.n_reps;
    j["failures"] = result.failures;
    nlohmann::ordered_json failed = nlohmann::ordered_json::array();
    for (const auto& r : result.records) {
        if (!r.error.empty()) failed.push_back({{"replicate", r.replicate}, {"error", r.error}});
        for (const auto& o : r.outcomes)
            if (!o.error.empty())
                failed.push_back({{"replicate", r.replicate}, {"method", to_string(o.method)}, {"error", o.error}});
    }
    j["failed"] = failed;
    nlohmann::ordered_json cells = nlohmann::ordered_json::array();
    for (const auto& cell : result.cells) {
        nlohmann::ordered_json e{{"column", cell.column}, {"count", cell.count}};
        if (cell.rate) e["rate"] = cell.mean;
        else {
            e["median"] = cell.median;
            e["mean"] = cell.mean;
            e["sd"] = cell.sd;
        }
        cells.push_back(std::move(e));
    }
    j["cells"] = cells;
#ifdef _OPENMP
    j["threads"] = omp_get_max_threads();
#else
    j["threads"] = 1;
#endif
    j["runtime_seconds"] = result.runtime_seconds;
    std::ofstream(dir / "metadata.json") << j.dump(2) << '\n';
}

}  // namespace sufcast
