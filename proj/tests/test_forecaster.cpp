#include <doctest.h>

#include "sufcast/error.hpp"
#include "sufcast/forecaster.hpp"
#include "sufcast/smoother.hpp"
#include "test_util.hpp"

using namespace sufcast;

TEST_SUITE("forecaster") {

TEST_CASE("constant targets give constant predictions") {
    const Eigen::MatrixXd idx = testutil::gaussian(40, 2, 1);
    const Eigen::VectorXd y = Eigen::VectorXd::Constant(40, 3.25);
    const auto model = fit_additive(idx, y);
    for (int i = 0; i < 10; ++i) CHECK(predict(model, testutil::gaussian_vector(2, 100 + i)) == doctest::Approx(3.25).epsilon(1e-14));
    CHECK(model.intercept == 3.25);
}

TEST_CASE("three-point Gaussian average by hand") {
    Eigen::MatrixXd idx(3, 1);
    idx << 0, 1, 2;
    Eigen::VectorXd y(3);
    y << 0, 1, 0;
    AdditiveOptions opts;
    opts.bandwidths = std::vector<double>{1.0};
    const auto model = fit_additive(idx, y, opts);
    const double w = std::exp(-0.5);
    const double expected = (w * 0.0 + 1.0 + w * 0.0) / (1.0 + 2.0 * w);
    CHECK(predict(model, Eigen::VectorXd::Constant(1, 1.0)) == doctest::Approx(expected).epsilon(1e-13));
    CHECK(nw_evaluate(1.0, idx.col(0), y, 1.0) == doctest::Approx(expected).epsilon(1e-13));
}

TEST_CASE("small bandwidth interpolates training targets") {
    Eigen::MatrixXd idx(6, 1);
    idx << 0.1, 0.9, 2.3, 3.0, 4.4, 5.2;
    Eigen::VectorXd y(6);
    y << 1, -2, 0.5, 4, 3, -1;
    AdditiveOptions opts;
    opts.bandwidths = std::vector<double>{1e-3};
    const auto model = fit_additive(idx, y, opts);
    for (int i = 0; i < 6; ++i) CHECK(predict(model, Eigen::VectorXd::Constant(1, idx(i, 0))) == doctest::Approx(y(i)).epsilon(1e-10));

    // Through factors and directions: a training factor row maps to its target.
    const Eigen::MatrixXd f = testutil::gaussian(6, 3, 4);
    Eigen::MatrixXd phi = Eigen::MatrixXd::Zero(3, 1);
    phi(0, 0) = 1.0;
    const auto m2 = fit_index_model(f, y, phi, ForecastMethod::dr, opts);
    for (int i = 0; i < 6; ++i) CHECK(predict(m2, f.row(i).transpose()) == doctest::Approx(y(i)).epsilon(1e-10));
    CHECK(m2.tag() == "DR(1)");
}

TEST_CASE("degenerate index is fixed at zero with a warning") {
    Eigen::MatrixXd idx(8, 2);
    idx.col(0) = testutil::gaussian_vector(8, 3);
    idx.col(1).setConstant(2.0);
    const Eigen::VectorXd y = testutil::gaussian_vector(8, 4);
    const auto model = fit_additive(idx, y);
    CHECK_FALSE(model.components[1].active);
    REQUIRE_FALSE(model.warnings.empty());
    CHECK(model.warnings[0].find("zero variance") != std::string::npos);
    Eigen::VectorXd at(2);
    at << 0.3, 2.0;
    const double a = predict(model, at);
    at(1) = 50.0;
    CHECK(predict(model, at) == a);
}

TEST_CASE("all components inactive predicts the intercept") {
    Eigen::MatrixXd idx = Eigen::MatrixXd::Constant(7, 2, 1.5);
    const Eigen::VectorXd y = testutil::gaussian_vector(7, 8);
    const auto model = fit_additive(idx, y);
    CHECK(predict(model, Eigen::Vector2d(-4, 9)) == doctest::Approx(y.mean()).epsilon(1e-15));
}

TEST_CASE("backfitting converges and predictions stay finite far from the data") {
    const Eigen::MatrixXd idx = testutil::gaussian(200, 3, 10);
    Eigen::VectorXd y(200);
    for (int i = 0; i < 200; ++i) y(i) = std::sin(idx(i, 0)) + idx(i, 1) * idx(i, 1) + 0.1 * idx(i, 2);
    const auto model = fit_additive(idx, y);
    CHECK(model.converged);
    for (const auto& c : model.components) CHECK(c.bandwidth > 0.0);
    CHECK(std::isfinite(predict(model, Eigen::Vector3d(1e6, -1e6, 40))));
    const Eigen::VectorXd fitted = predict_rows(model, idx);
    const double r2 = 1.0 - (y - fitted).squaredNorm() / (y.array() - y.mean()).square().sum();
    CHECK(r2 > 0.9);
}

TEST_CASE("multi-index smooths are centered on the training sample") {
    const Eigen::MatrixXd idx = testutil::gaussian(80, 2, 21);
    Eigen::VectorXd y(80);
    for (int i = 0; i < 80; ++i) y(i) = idx(i, 0) * idx(i, 0) + std::cos(idx(i, 1));
    const auto model = fit_additive(idx, y);
    CHECK(model.converged);
    const Eigen::VectorXd fitted = predict_rows(model, idx);
    CHECK(fitted.mean() == doctest::Approx(y.mean()).epsilon(1e-9));
    for (const auto& c : model.components) CHECK(c.offset != 0.0);
}

TEST_CASE("normal reference bandwidth") {
    Eigen::VectorXd v(5);
    v << 1, 2, 3, 4, 5;
    CHECK(normal_reference_bandwidth(v) == doctest::Approx(1.06 * std::sqrt(2.5) * std::pow(5.0, -0.2)));
    CHECK(normal_reference_bandwidth(Eigen::VectorXd::Constant(4, 1.0)) == 0.0);
}

TEST_CASE("additive fit errors") {
    CHECK_THROWS_AS(fit_additive(testutil::gaussian(4, 1, 1), testutil::gaussian_vector(4, 2)), ConfigError);
    CHECK_THROWS_AS(fit_additive(testutil::gaussian(6, 1, 1), testutil::gaussian_vector(5, 2)), ConfigError);
    AdditiveOptions bad;
    bad.bandwidths = std::vector<double>{0.0};
    CHECK_THROWS_AS(fit_additive(testutil::gaussian(6, 1, 1), testutil::gaussian_vector(6, 2), bad), ConfigError);
    Eigen::MatrixXd nan = testutil::gaussian(6, 1, 1);
    nan(2, 0) = std::numeric_limits<double>::infinity();
    CHECK_THROWS_AS(fit_additive(nan, testutil::gaussian_vector(6, 2)), DataError);
    const auto model = fit_additive(testutil::gaussian(6, 1, 1), testutil::gaussian_vector(6, 2));
    CHECK_THROWS_AS(predict(model, Eigen::Vector2d(1, 2)), ConfigError);
    CHECK_THROWS_AS(predict(model, Eigen::VectorXd::Constant(1, std::nan(""))), DataError);
}

TEST_CASE("linear PC reproduces exact linear targets") {
    const Eigen::MatrixXd f = testutil::gaussian(30, 3, 20);
    const Eigen::Vector3d beta(0.5, -2.0, 1.25);
    const Eigen::VectorXd y = (f * beta).array() + 4.0;
    const auto model = fit_pc_baseline(f, y, PcMode::linear);
    CHECK(model.intercept == doctest::Approx(4.0).epsilon(1e-12));
    CHECK((model.coefficients - beta).norm() < 1e-12);
    CHECK((predict_rows(model, f) - y).norm() < 1e-10);
    CHECK(model.tag() == "PC");
}

TEST_CASE("linear PC through two points") {
    Eigen::MatrixXd f(2, 1);
    f << 1, 3;
    Eigen::VectorXd y(2);
    y << 2, 6;
    const auto model = fit_pc_baseline(f, y, PcMode::linear);
    CHECK(model.coefficients(0) == doctest::Approx(2.0));
    CHECK(model.intercept == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(predict(model, Eigen::VectorXd::Constant(1, 2.0)) == doctest::Approx(4.0));
}

TEST_CASE("linear PC matches the normal equations") {
    const Eigen::MatrixXd f = testutil::gaussian(25, 4, 30);
    const Eigen::VectorXd y = testutil::gaussian_vector(25, 31);
    Eigen::MatrixXd design(25, 5);
    design << Eigen::VectorXd::Ones(25), f;
    const Eigen::VectorXd coef = (design.transpose() * design).ldlt().solve(design.transpose() * y);
    const auto model = fit_pc_baseline(f, y, PcMode::linear);
    CHECK(std::abs(model.intercept - coef(0)) < 1e-10);
    CHECK((model.coefficients - coef.tail(4)).norm() < 1e-10);
}

TEST_CASE("linear PC rank deficiency and size errors") {
    Eigen::MatrixXd f = testutil::gaussian(10, 2, 1);
    f.col(1) = 2.0 * f.col(0);
    CHECK_THROWS_AS(fit_pc_baseline(f, testutil::gaussian_vector(10, 2), PcMode::linear), NumericalError);
    CHECK_THROWS_AS(fit_pc_baseline(testutil::gaussian(3, 3, 1), testutil::gaussian_vector(3, 2), PcMode::linear),
                    ConfigError);
}

TEST_CASE("additive PC uses every factor") {
    const Eigen::MatrixXd f = testutil::gaussian(50, 3, 40);
    const Eigen::VectorXd y = f.col(0).array().square() + f.col(2).array();
    const auto model = fit_pc_baseline(f, y, PcMode::additive);
    CHECK(model.num_indices() == 3);
    CHECK(model.directions == Eigen::MatrixXd::Identity(3, 3));
    CHECK(model.tag() == "NL-PC");
    const auto direct = fit_additive(f, y);
    CHECK(predict(model, f.row(7).transpose()) == predict(direct, f.row(7).transpose()));
}

TEST_CASE("serial and parallel smoother matrices are bit-identical") {
    const Eigen::VectorXd data = testutil::gaussian_vector(123, 50);
    const Eigen::VectorXd at = testutil::gaussian_vector(77, 51);
    const Eigen::MatrixXd a = nw_weights_serial(at, data, 0.4);
    const Eigen::MatrixXd b = nw_weights_parallel(at, data, 0.4);
    CHECK(a == b);
    for (Eigen::Index i = 0; i < a.rows(); ++i) CHECK(a.row(i).sum() == doctest::Approx(1.0).epsilon(1e-14));

    const Eigen::MatrixXd idx = testutil::gaussian(60, 2, 52);
    const Eigen::VectorXd y = testutil::gaussian_vector(60, 53);
    AdditiveOptions s, p;
    s.exec = Execution::serial;
    p.exec = Execution::parallel;
    const auto ms = fit_additive(idx, y, s);
    const auto mp = fit_additive(idx, y, p);
    CHECK(predict_rows(ms, idx) == predict_rows(mp, idx));
}

TEST_CASE("smoother weights stay finite far outside the data") {
    Eigen::VectorXd data(3);
    data << 0, 1, 2;
    const Eigen::MatrixXd w = nw_weights_serial(Eigen::VectorXd::Constant(1, 1e4), data, 0.1);
    CHECK(w.allFinite());
    CHECK(w(0, 2) == doctest::Approx(1.0));
}

TEST_CASE("method names") {
    CHECK(parse_forecast_method("nlpc") == ForecastMethod::nlpc);
    CHECK(to_string(ForecastMethod::ens) == "ENS");
    CHECK(is_sdr(ForecastMethod::tm));
    CHECK_FALSE(is_sdr(ForecastMethod::pc));
    CHECK(kernel_method(ForecastMethod::ens) == KernelMethod::ensemble);
    CHECK_THROWS_AS(kernel_method(ForecastMethod::pc), ConfigError);
    CHECK_THROWS_AS(parse_forecast_method("lasso"), ConfigError);
}

}  // TEST_SUITE
