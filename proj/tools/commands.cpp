#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>

#include <CLI11.hpp>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "run_config.hpp"
#include "sufcast/error.hpp"
#include "sufcast/factors.hpp"
#include "sufcast/matrix_io.hpp"
#include "sufcast/panel.hpp"
#include "sufcast/rolling.hpp"
#include "sufcast/sdr.hpp"
#include "sufcast/study.hpp"

namespace sufcast::cli {

using nlohmann::ordered_json;

namespace {

ordered_json common_defaults() {
    return ordered_json{{"output_dir", default_output_dir()}, {"threads", 0}};
}

ordered_json input_defaults() {
    return ordered_json{{"input", ""}, {"target", ""}, {"delimiter", ","}, {"strict", false}};
}

ordered_json simulate_defaults() {
    ordered_json j{{"model", "I"},        {"p", 100},
                   {"T", 500},            {"K", 6},
                   {"n_reps", 200},       {"seed", 1},
                   {"methods", "sir,dr"}, {"metrics", "directions"},
                   {"H", kDefaultSlices}, {"L", 2},
                   {"variance_mode", "identity"}, {"n_test", 100},
                   {"k_max", 8},          {"penalty", "ic1"},
                   {"c_censor", kDefaultCensoring}, {"ct_multiplier", 1.0},
                   {"sigma", 0.2},        {"fixed_loadings", true},
                   {"burn_in", 100}};
    j.update(common_defaults());
    return j;
}

ordered_json forecast_defaults() {
    ordered_json j = input_defaults();
    j.update(ordered_json{{"method", "dr"},
                          {"K", 8},
                          {"k_max", 8},
                          {"penalty", "ic1"},
                          {"L", 1},
                          {"H", kDefaultSlices},
                          {"horizon", 1},
                          {"window", 120},
                          {"n_eval", 240},
                          {"variance_mode", "identity"},
                          {"c_censor", kDefaultCensoring},
                          {"ct_multiplier", 1.0},
                          {"benchmark", "rolling"},
                          {"standardize", true},
                          {"include_target", false}});
    j.update(common_defaults());
    return j;
}

ordered_json select_defaults() {
    ordered_json j = input_defaults();
    j.update(ordered_json{{"method", "dr"},
                          {"K", "auto"},
                          {"k_max", 8},
                          {"penalty", "ic1"},
                          {"H", kDefaultSlices},
                          {"horizon", 1},
                          {"variance_mode", "identity"},
                          {"c_censor", kDefaultCensoring},
                          {"ct_multiplier", 1.0},
                          {"standardize", true},
                          {"include_target", false}});
    j.update(common_defaults());
    return j;
}

ordered_json factors_defaults() {
    ordered_json j = input_defaults();
    j.update(ordered_json{{"K", "auto"},
                          {"k_max", 8},
                          {"penalty", "ic1"},
                          {"standardize", true},
                          {"include_target", false}});
    j.update(common_defaults());
    return j;
}

void apply_threads(const RunConfig& cfg) {
    const int threads = cfg.get_int("threads");
    if (threads < 0) throw ConfigError("threads must be nonnegative");
#ifdef _OPENMP
    if (threads > 0) omp_set_num_threads(threads);
#endif
}

std::filesystem::path prepare_output(const RunConfig& cfg) {
    const std::filesystem::path dir = cfg.get_string("output_dir");
    if (dir.empty()) throw ConfigError("output_dir must not be empty");
    std::filesystem::create_directories(dir);
    cfg.write(dir / "config.json");
    return dir;
}

PanelData load_panel(const RunConfig& cfg) {
    const std::string input = cfg.get_string("input");
    const std::string target = cfg.get_string("target");
    if (input.empty()) throw ConfigError("input is required");
    if (target.empty()) throw ConfigError("target is required");
    const std::string delim = cfg.get_string("delimiter");
    if (delim.size() != 1) throw ConfigError("delimiter must be one character");
    CsvOptions opts;
    opts.delimiter = delim[0];
    opts.strict = cfg.get_bool("strict");
    auto load = load_csv(input, target, opts);
    if (load.rows_dropped > 0)
        std::cerr << "dropped " << load.rows_dropped << " rows with missing values\n";
    if (cfg.get_bool("include_target")) {
        PanelData& p = load.panel;
        Eigen::MatrixXd x(p.x.rows() + 1, p.x.cols());
        x.topRows(p.x.rows()) = p.x;
        x.bottomRows(1) = p.y.transpose();
        p.x = std::move(x);
        p.series_names.push_back(p.target_name);
    }
    return std::move(load.panel);
}

Eigen::MatrixXd prepared_predictors(const RunConfig& cfg, const PanelData& panel) {
    return cfg.get_bool("standardize") ? standardize_rows(panel.x, {0, panel.x.cols()}).first : panel.x;
}

int choose_k(const RunConfig& cfg, const Eigen::MatrixXd& x, std::optional<NumFactorsSelection>& sel) {
    const int cap = static_cast<int>(std::min(x.rows(), x.cols()));
    if (cfg.is_auto("K")) {
        sel = select_num_factors(x, std::min(cfg.get_int("k_max"), cap), parse_factor_penalty(cfg.get_string("penalty")));
        return sel->k_hat;
    }
    const int k = cfg.get_int("K");
    if (k < 1 || k > cap) throw ConfigError("K must lie in [1, min(p, T)] = [1, " + std::to_string(cap) + "]");
    return k;
}

void write_factor_trace(const std::filesystem::path& path, const NumFactorsSelection& sel) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write " + path.string());
    out << "k,log_residual,penalty,criterion\n";
    for (Eigen::Index k = 0; k < sel.criterion.size(); ++k)
        out << k << ',' << format_double(sel.log_residual(k)) << ',' << format_double(sel.penalty_term(k)) << ','
            << format_double(sel.criterion(k)) << '\n';
}

int cmd_simulate(const RunConfig& cfg) {
    StudyConfig sc;
    sc.dgp.link = parse_link_model(cfg.get_string("model"));
    sc.dgp.p = cfg.get_int("p");
    sc.dgp.t = cfg.get_int("T");
    sc.dgp.k = cfg.get_int("K");
    sc.dgp.sigma = cfg.get_double("sigma");
    sc.dgp.fixed_loadings = cfg.get_bool("fixed_loadings");
    sc.dgp.burn_in = cfg.get_int("burn_in");
    const int seed = cfg.get_int("seed");
    if (seed < 0) throw ConfigError("seed must be nonnegative");
    sc.dgp.seed = static_cast<std::uint64_t>(seed);
    sc.n_reps = cfg.get_int("n_reps");
    sc.methods.clear();
    for (const auto& m : cfg.get_list("methods")) sc.methods.push_back(parse_forecast_method(m));
    sc.metrics = StudyMetrics{false, false, false};
    for (const auto& m : cfg.get_list("metrics")) {
        if (m == "directions") sc.metrics.directions = true;
        else if (m == "forecast") sc.metrics.forecast = true;
        else if (m == "order") sc.metrics.order = true;
        else throw ConfigError("unknown metric '" + m + "' (expected directions, forecast or order)");
    }
    sc.slices = cfg.get_int("H");
    sc.num_directions = cfg.get_int("L");
    sc.variance_mode = parse_variance_mode(cfg.get_string("variance_mode"));
    sc.n_test = cfg.get_int("n_test");
    sc.k_max = cfg.get_int("k_max");
    sc.penalty = parse_factor_penalty(cfg.get_string("penalty"));
    sc.c_censor = cfg.get_double("c_censor");
    sc.ct_multiplier = cfg.get_double("ct_multiplier");
    sc.validate();

    const auto dir = prepare_output(cfg);
    const auto result = monte_carlo_study(sc);
    write_study(dir, result);
    std::cout << "model=" << to_string(sc.dgp.link) << " p=" << sc.dgp.p << " T=" << sc.dgp.t
              << " reps=" << sc.n_reps << " failures=" << result.failures << '\n';
    for (const auto& c : result.cells) {
        if (c.rate) std::cout << "  " << c.column << "=" << format_short(c.mean) << "%\n";
        else std::cout << "  " << c.column << " median=" << format_short(c.median) << " sd=" << format_short(c.sd) << '\n';
    }
    return 0;
}

int cmd_forecast(const RunConfig& cfg) {
    RollingConfig rc;
    rc.method = parse_forecast_method(cfg.get_string("method"));
    rc.select_factors = cfg.is_auto("K");
    if (!rc.select_factors) rc.num_factors = cfg.get_int("K");
    rc.k_max = cfg.get_int("k_max");
    rc.penalty = parse_factor_penalty(cfg.get_string("penalty"));
    rc.select_directions = cfg.is_auto("L");
    if (!rc.select_directions) rc.num_directions = cfg.get_int("L");
    rc.slices = cfg.get_int("H");
    rc.horizon = cfg.get_int("horizon");
    rc.window = cfg.get_int("window");
    rc.n_eval = cfg.get_int("n_eval");
    rc.variance_mode = parse_variance_mode(cfg.get_string("variance_mode"));
    rc.c_censor = cfg.get_double("c_censor");
    rc.ct_multiplier = cfg.get_double("ct_multiplier");
    const std::string bench = cfg.get_string("benchmark");
    if (bench == "rolling") rc.benchmark = BenchmarkMean::rolling;
    else if (bench == "full") rc.benchmark = BenchmarkMean::full;
    else throw ConfigError("benchmark must be 'rolling' or 'full'");
    rc.standardize = cfg.get_bool("standardize");
    rc.validate();

    const PanelData panel = load_panel(cfg);
    const auto dir = prepare_output(cfg);
    const auto report = rolling_evaluate(panel, rc);
    write_eval_report(dir, report);
    std::cout << report.summary_line() << '\n';
    return 0;
}

int cmd_select(const RunConfig& cfg) {
    const PanelData panel = load_panel(cfg);
    const int h = cfg.get_int("horizon");
    const auto method = parse_kernel_method(cfg.get_string("method"));
    const auto mode = parse_variance_mode(cfg.get_string("variance_mode"));
    const int slices = cfg.get_int("H");
    const double c_censor = cfg.get_double("c_censor");
    const auto dir = prepare_output(cfg);

    const Eigen::MatrixXd x = prepared_predictors(cfg, panel);
    std::optional<NumFactorsSelection> ksel;
    const int k = choose_k(cfg, x, ksel);
    if (ksel) write_factor_trace(dir / "factor_criterion.csv", *ksel);

    ordered_json j;
    j["k_hat"] = k;
    j["k_selected"] = ksel.has_value();
    if (k == 0) {
        j["l_hat"] = 0;
        std::ofstream(dir / "selection.json") << j.dump(2) << '\n';
        std::cout << "K=0 L=0\n";
        return 0;
    }
    const Eigen::VectorXd target = make_h_step_target(panel.y, h);
    const auto n = static_cast<int>(target.size());
    const Eigen::MatrixXd f = fit_factors(x, k).factors.topRows(n);
    const auto kernel = build_kernel(method, f, slice(target, slices), mode);
    const double ct = default_ct(method, k, static_cast<int>(x.rows()), n, cfg.get_double("ct_multiplier"));
    const auto lsel = select_dimension(kernel, n, c_censor, ct);
    {
        std::ofstream out(dir / "dimension_objective.csv", std::ios::binary);
        if (!out) throw DataError("cannot write dimension_objective.csv");
        out << "l,objective\n";
        for (Eigen::Index l = 0; l < lsel.objective.size(); ++l)
            out << l + 1 << ',' << format_double(lsel.objective(l)) << '\n';
    }
    write_kernel(dir, with_directions(kernel, lsel.l_hat), lsel);
    j["l_hat"] = lsel.l_hat;
    j["k_c"] = lsel.k_c;
    j["tau"] = lsel.tau;
    j["c_t"] = lsel.c_t;
    std::ofstream(dir / "selection.json") << j.dump(2) << '\n';
    std::cout << "K=" << k << " L=" << lsel.l_hat << '\n';
    return 0;
}

int cmd_factors(const RunConfig& cfg) {
    const PanelData panel = load_panel(cfg);
    const auto dir = prepare_output(cfg);
    const Eigen::MatrixXd x = prepared_predictors(cfg, panel);
    std::optional<NumFactorsSelection> ksel;
    const int k = choose_k(cfg, x, ksel);
    if (ksel) write_factor_trace(dir / "factor_criterion.csv", *ksel);
    if (k == 0) throw NumericalError("selected number of factors is 0; nothing to dump");
    write_factor_estimate(dir, fit_factors(x, k));
    std::cout << "K=" << k << " p=" << x.rows() << " T=" << x.cols() << '\n';
    return 0;
}

struct Command {
    const char* name;
    const char* help;
    ordered_json (*defaults)();
    int (*run)(const RunConfig&);
};

const Command kCommands[] = {
    {"simulate", "Monte Carlo study of direction recovery, forecasting and order selection", simulate_defaults,
     cmd_simulate},
    {"forecast", "Rolling-window out-of-sample evaluation on a CSV panel", forecast_defaults, cmd_forecast},
    {"select", "Number of factors and number of directions with criterion traces", select_defaults, cmd_select},
    {"factors", "Estimate and dump factors, loadings and eigenvalues", factors_defaults, cmd_factors},
};

int exit_code(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::config: return 2;
        case ErrorKind::data: return 3;
        case ErrorKind::numerical: return 4;
    }
    return 4;
}

}  // namespace

int run(int argc, const char* const* argv) {
    CLI::App app{"Sufficient forecasting with factor models and inverse-moment dimension reduction"};
    app.require_subcommand(1);
    app.footer("Outputs go to output_dir, default $SUFCAST_OUTPUT_DIR or ./sufcast-output.\n"
               "Exit codes: 0 success, 2 configuration error, 3 data error, 4 numerical failure.");

    struct Bound {
        const Command* command;
        CLI::App* sub;
        std::string config_path;
        std::map<std::string, std::string> flags;
    };
    std::vector<Bound> bound;
    bound.reserve(std::size(kCommands));
    for (const auto& c : kCommands) {
        Bound& b = bound.emplace_back();
        b.command = &c;
        b.sub = app.add_subcommand(c.name, c.help);
        b.sub->add_option("--config", b.config_path, "JSON file of key/value settings (flags override it)");
        const auto defaults = c.defaults();
        for (auto it = defaults.begin(); it != defaults.end(); ++it) {
            const std::string key = it.key();
            b.sub->add_option_function<std::string>(
                     "--" + key, [&b, key](const std::string& v) { b.flags[key] = v; }, "default: " + it.value().dump())
                ->type_name("VALUE");
        }
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    for (auto& b : bound) {
        if (!b.sub->parsed()) continue;
        try {
            RunConfig cfg(b.command->defaults());
            if (!b.config_path.empty()) cfg.merge_file(b.config_path);
            for (const auto& [key, value] : b.flags) cfg.set_from_string(key, value);
            apply_threads(cfg);
            return b.command->run(cfg);
        } catch (const Error& e) {
            std::cerr << "error: " << e.what() << '\n';
            return exit_code(e.kind());
        } catch (const std::filesystem::filesystem_error& e) {
            std::cerr << "error: " << e.what() << '\n';
            return 3;
        } catch (const std::exception& e) {
            std::cerr << "error: " << e.what() << '\n';
            return 4;
        }
    }
    return 2;
}

}  // namespace sufcast::cli
