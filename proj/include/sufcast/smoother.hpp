#pragma once

#include <Eigen/Dense>

#include "sufcast/slice_moments.hpp"

namespace sufcast {

// Gaussian Nadaraya-Watson smoothing. Weights are computed relative to the
// nearest data point, exp(-(d^2 - d_min^2) / (2 h^2)), so the nearest
// observation always carries weight one: tiny bandwidths interpolate and
// evaluation points far outside the data fall back to the closest value.

/// Row i holds the normalized weights for evaluating at `at(i)` over `data`.
Eigen::MatrixXd nw_weights_serial(const Eigen::VectorXd& at, const Eigen::VectorXd& data, double bandwidth);
Eigen::MatrixXd nw_weights_parallel(const Eigen::VectorXd& at, const Eigen::VectorXd& data, double bandwidth);

inline Eigen::MatrixXd nw_weights(const Eigen::VectorXd& at, const Eigen::VectorXd& data, double bandwidth,
                                  Execution exec = Execution::parallel) {
    return exec == Execution::serial ? nw_weights_serial(at, data, bandwidth)
                                     : nw_weights_parallel(at, data, bandwidth);
}

double nw_evaluate(double at, const Eigen::VectorXd& data, const Eigen::VectorXd& values, double bandwidth);

/// 1.06 sd(v) n^{-1/5}; zero for a constant vector.
double normal_reference_bandwidth(const Eigen::VectorXd& v);

}  // namespace sufcast
