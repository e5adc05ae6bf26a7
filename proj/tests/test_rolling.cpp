#include <doctest.h>

#include <fstream>

#include <json.hpp>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "sufcast/error.hpp"
#include "sufcast/rolling.hpp"
#include "sufcast/simulation.hpp"
#include "test_util.hpp"

using namespace sufcast;

namespace {

PanelData simulated_panel(int p, int t, std::uint64_t seed, LinkModel link = LinkModel::I) {
    DgpSpec spec;
    spec.p = p;
    spec.t = t;
    spec.k = 3;
    spec.phi1 = Eigen::Vector3d(1, 0, 0);
    spec.phi2 = Eigen::Vector3d(0, 1, 0);
    spec.link = link;
    spec.seed = seed;
    const auto draw = sample_dgp(spec, draw_parameters(spec), 0, t, 0);
    PanelData panel;
    panel.x = draw.x;
    // raw target observed at column t is the response to factors at t - 1
    panel.y.resize(t);
    panel.y(0) = 0.0;
    panel.y.tail(t - 1) = draw.y.head(t - 1);
    for (int i = 0; i < p; ++i) panel.series_names.push_back("x" + std::to_string(i));
    for (int s = 0; s < t; ++s) panel.time_labels.push_back(std::to_string(1000 + s));
    panel.target_name = "y";
    return panel;
}

RollingConfig small_config(ForecastMethod method) {
    RollingConfig c;
    c.method = method;
    c.window = 60;
    c.num_factors = 3;
    c.num_directions = 2;
    c.slices = 5;
    c.n_eval = 12;
    return c;
}

}  // namespace

TEST_SUITE("rolling") {

TEST_CASE("perfect foresight stub") {
    const PanelData panel = simulated_panel(10, 90, 1);
    const RollingConfig config = small_config(ForecastMethod::dr);
    const Eigen::VectorXd targets = make_h_step_target(panel.y, 1);
    const auto report = rolling_evaluate(
        panel, config, [&](const OriginWindow& w) { return OriginPrediction{targets(w.origin), 0, 0}; }, "oracle");
    CHECK(report.mse == 0.0);
    CHECK(report.r2 == 1.0);
    CHECK(report.method_tag == "oracle");
}

TEST_CASE("window mean stub has zero R^2 against the rolling mean") {
    const PanelData panel = simulated_panel(10, 90, 2);
    const auto report = rolling_evaluate(
        panel, small_config(ForecastMethod::dr),
        [](const OriginWindow& w) { return OriginPrediction{w.train_targets.mean(), 0, 0}; }, "mean");
    CHECK(report.r2 == 0.0);
    CHECK(report.mse > 0.0);
}

TEST_CASE("two origins with a scalar series") {
    PanelData panel;
    panel.x.resize(1, 8);
    panel.x << 1, 2, 4, 3, 5, 7, 6, 8;
    panel.y.resize(8);
    panel.y << 0, 1, 1, 2, 3, 5, 8, 13;
    panel.series_names = {"x"};
    panel.time_labels = {"1", "2", "3", "4", "5", "6", "7", "8"};
    panel.target_name = "y";
    RollingConfig config;
    config.window = 6;
    config.horizon = 1;
    config.n_eval = 2;
    config.num_factors = 1;
    // Forecast = last predictor value in the window.
    const auto report = rolling_evaluate(
        panel, config, [](const OriginWindow& w) { return OriginPrediction{w.x(0, w.x.cols() - 1), 0, 0}; }, "last");
    REQUIRE(report.origins.size() == 2);
    // targets y^1_t = y_{t+1}; origins are columns 5 and 6 (0-based)
    CHECK(report.origins[0].origin == 5);
    CHECK(report.origins[0].realized == 8.0);
    CHECK(report.origins[0].forecast == 7.0);
    CHECK(report.origins[1].realized == 13.0);
    CHECK(report.origins[1].forecast == 6.0);
    CHECK(report.mse == doctest::Approx(((8.0 - 7.0) * (8.0 - 7.0) + (13.0 - 6.0) * (13.0 - 6.0)) / 2.0));
    // training targets for origin 5: y^1 over columns 0..4 = (1,1,2,3,5)
    CHECK(report.origins[0].benchmark_mean == doctest::Approx(12.0 / 5.0));
}

TEST_CASE("R^2 and MSE are consistent and PC is its own unit") {
    const PanelData panel = simulated_panel(12, 100, 3);
    for (auto method : {ForecastMethod::dr, ForecastMethod::pc}) {
        const auto report = rolling_evaluate(panel, small_config(method));
        double sst = 0.0;
        for (const auto& o : report.origins) sst += (o.realized - o.benchmark_mean) * (o.realized - o.benchmark_mean);
        const double n = static_cast<double>(report.origins.size());
        CHECK(report.r2 == doctest::Approx(1.0 - report.mse * n / sst).epsilon(1e-12));
        CHECK(report.mse >= 0.0);
        CHECK(report.r2 <= 1.0);
        if (method == ForecastMethod::pc) {
            CHECK(report.relative_mse == 1.0);
            CHECK(report.pc_mse == report.mse);
        }
    }
}

TEST_CASE("full-sample benchmark mean") {
    const PanelData panel = simulated_panel(10, 90, 4);
    RollingConfig config = small_config(ForecastMethod::pc);
    config.benchmark = BenchmarkMean::full;
    const auto report = rolling_evaluate(panel, config);
    double mean = 0.0;
    for (const auto& o : report.origins) mean += o.realized;
    mean /= static_cast<double>(report.origins.size());
    for (const auto& o : report.origins) CHECK(o.benchmark_mean == doctest::Approx(mean));
}

TEST_CASE("forecasts do not look past the origin") {
    const PanelData panel = simulated_panel(15, 110, 5);
    for (auto method : {ForecastMethod::dr, ForecastMethod::sir, ForecastMethod::nlpc, ForecastMethod::pc}) {
        RollingConfig config = small_config(method);
        config.select_directions = method == ForecastMethod::dr;
        const auto base = rolling_evaluate(panel, config);
        const auto first = base.origins.front().origin;

        PanelData future = panel;
        for (Eigen::Index c = first + 1; c < future.x.cols(); ++c) {
            future.x.col(c) = future.x.col(c) * 3.0 + Eigen::VectorXd::Constant(future.x.rows(), 7.0);
            future.y(c) += 100.0;
        }
        const auto moved = rolling_evaluate(future, config);
        CHECK(moved.origins.front().forecast == base.origins.front().forecast);
        CHECK(moved.origins.front().pc_forecast == base.origins.front().pc_forecast);
        CHECK(moved.origins.back().forecast != base.origins.back().forecast);
    }
}

TEST_CASE("evaluation is deterministic and independent of the thread count") {
    const PanelData panel = simulated_panel(12, 100, 6);
    RollingConfig config = small_config(ForecastMethod::ens);
    config.select_factors = true;
    config.select_directions = true;
    const auto a = rolling_evaluate(panel, config);
#ifdef _OPENMP
    const int saved = omp_get_max_threads();
    omp_set_num_threads(3);
#endif
    const auto b = rolling_evaluate(panel, config);
#ifdef _OPENMP
    omp_set_num_threads(saved);
#endif
    REQUIRE(a.origins.size() == b.origins.size());
    for (std::size_t i = 0; i < a.origins.size(); ++i) {
        CHECK(a.origins[i].forecast == b.origins[i].forecast);
        CHECK(a.origins[i].num_factors == b.origins[i].num_factors);
        CHECK(a.origins[i].num_directions == b.origins[i].num_directions);
    }
    CHECK(a.mse == b.mse);
    CHECK(a.r2 == b.r2);
}

TEST_CASE("too little data") {
    const PanelData panel = simulated_panel(10, 60, 7);
    RollingConfig config = small_config(ForecastMethod::dr);
    config.window = 55;
    config.n_eval = 10;
    try {
        rolling_evaluate(panel, config);
        FAIL("expected an error");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("insufficient data") != std::string::npos);
    }
}

TEST_CASE("errors carry the origin label") {
    const PanelData panel = simulated_panel(10, 90, 8);
    try {
        rolling_evaluate(
            panel, small_config(ForecastMethod::dr),
            [](const OriginWindow& w) -> OriginPrediction {
                if (w.origin == 85) throw NumericalError("boom");
                return {0.0, 0, 0};
            },
            "stub");
        FAIL("expected an error");
    } catch (const NumericalError& e) {
        const std::string msg = e.what();
        CHECK(msg.find("origin 1085") != std::string::npos);
        CHECK(msg.find("boom") != std::string::npos);
    }
}

TEST_CASE("multi-step targets and selected directions are recorded") {
    const PanelData panel = simulated_panel(12, 110, 9);
    RollingConfig config = small_config(ForecastMethod::dr);
    config.horizon = 3;
    config.select_directions = true;
    const auto report = rolling_evaluate(panel, config);
    const Eigen::VectorXd target = make_h_step_target(panel.y, 3);
    for (const auto& o : report.origins) {
        CHECK(o.realized == target(o.origin));
        CHECK(o.num_directions >= 1);
        CHECK(o.num_directions <= 2);  // K_c = round(0.5 * 3)
    }
    CHECK(report.method_tag == "DR(auto)");
}

TEST_CASE("report files") {
    testutil::TempDir dir("rolling");
    const PanelData panel = simulated_panel(10, 90, 10);
    RollingConfig config = small_config(ForecastMethod::dr);
    config.select_directions = true;
    const auto report = rolling_evaluate(panel, config);
    write_eval_report(dir.path(), report);
    std::ifstream in(dir / "summary.json");
    const auto j = nlohmann::json::parse(in);
    CHECK(j["method"] == "DR(auto)");
    CHECK(j["selected_l"].size() == 12);
    CHECK(j["mse"].get<double>() == report.mse);
    std::ifstream csv(dir / "forecasts.csv");
    std::string line;
    int lines = 0;
    while (std::getline(csv, line)) ++lines;
    CHECK(lines == 13);
    CHECK(report.summary_line().rfind("method=DR(auto) h=1 MSE=", 0) == 0);
}

TEST_CASE("configuration checks") {
    RollingConfig c;
    c.window = 4;
    CHECK_THROWS_AS(c.validate(), ConfigError);
    c = RollingConfig{};
    c.horizon = 0;
    CHECK_THROWS_AS(c.validate(), ConfigError);
    c = RollingConfig{};
    c.c_censor = 1.0;
    CHECK_THROWS_AS(c.validate(), ConfigError);
    CHECK_NOTHROW(RollingConfig{}.validate());
}

}  // TEST_SUITE
