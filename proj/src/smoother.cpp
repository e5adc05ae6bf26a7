#include "sufcast/smoother.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "sufcast/error.hpp"

namespace sufcast {

namespace {

void check(const Eigen::VectorXd& data, double bandwidth) {
    if (data.size() == 0) throw ConfigError("smoother has no data");
    if (!(bandwidth > 0.0) || !std::isfinite(bandwidth)) throw ConfigError("bandwidth must be positive and finite");
}

inline void weight_row(double x, const Eigen::VectorXd& data, double inv_two_h2, double* out) {
    const Eigen::Index n = data.size();
    double dmin = std::numeric_limits<double>::infinity();
    for (Eigen::Index j = 0; j < n; ++j) {
        const double d = x - data(j);
        dmin = std::min(dmin, d * d);
    }
    double total = 0.0;
    for (Eigen::Index j = 0; j < n; ++j) {
        const double d = x - data(j);
        out[j] = std::exp(-(d * d - dmin) * inv_two_h2);
        total += out[j];
    }
    for (Eigen::Index j = 0; j < n; ++j) out[j] /= total;
}

}  // namespace

Eigen::MatrixXd nw_weights_serial(const Eigen::VectorXd& at, const Eigen::VectorXd& data, double bandwidth) {
    check(data, bandwidth);
    // Row-major so each evaluation point owns a contiguous row.
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> w(at.size(), data.size());
    const double inv = 1.0 / (2.0 * bandwidth * bandwidth);
    for (Eigen::Index i = 0; i < at.size(); ++i) weight_row(at(i), data, inv, w.row(i).data());
    return w;
}

Eigen::MatrixXd nw_weights_parallel(const Eigen::VectorXd& at, const Eigen::VectorXd& data, double bandwidth) {
    check(data, bandwidth);
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> w(at.size(), data.size());
    const double inv = 1.0 / (2.0 * bandwidth * bandwidth);
    const Eigen::Index n = at.size();
#pragma omp parallel for schedule(static)
    for (Eigen::Index i = 0; i < n; ++i) weight_row(at(i), data, inv, w.row(i).data());
    return w;
}

double nw_evaluate(double at, const Eigen::VectorXd& data, const Eigen::VectorXd& values, double bandwidth) {
    check(data, bandwidth);
    if (values.size() != data.size()) throw ConfigError("smoother values and data differ in length");
    Eigen::VectorXd w(data.size());
    weight_row(at, data, 1.0 / (2.0 * bandwidth * bandwidth), w.data());
    return w.dot(values);
}

double normal_reference_bandwidth(const Eigen::VectorXd& v) {
    const auto n = static_cast<double>(v.size());
    if (v.size() < 2) return 0.0;
    const double mean = v.mean();
    const double sd = std::sqrt((v.array() - mean).square().sum() / (n - 1.0));
    return 1.06 * sd * std::pow(n, -0.2);
}

}  // namespace sufcast
