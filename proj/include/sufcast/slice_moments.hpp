#pragma once

#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace sufcast {

/// Partition of T observations into H slices by rank of the target.
struct SliceAssignment {
    int h_count = 0;
    std::vector<int> labels;                         // length T, values in [0, H)
    std::vector<Eigen::Index> counts;                // c_0 .. c_{H-1}
    std::vector<double> boundaries;                  // largest target value in each slice
    std::vector<std::vector<Eigen::Index>> members;  // time indices per slice, ascending

    Eigen::Index num_observations() const { return static_cast<Eigen::Index>(labels.size()); }

    /// Throws if counts, labels and members disagree or a slice is empty.
    void validate() const;
};

/// Rows (a, b) with a <= b of a K^2 x K third-moment array, in lexicographic order.
std::vector<std::pair<int, int>> distinct_row_pairs(int k);

/// Per-slice moments of a (globally centered) T x K factor matrix.
struct SliceMoments {
    Eigen::VectorXd weights;              // c_h / T
    std::vector<Eigen::VectorXd> means;   // slice means m_h
    std::vector<Eigen::MatrixXd> second;  // sum_{t in h} z_t z_t' / c_h
    // Filled only when third moments are requested: within-slice central
    // third moments and the global raw third moment, both as the reduced
    // K(K+1)/2 x K matrix of distinct rows.
    std::vector<Eigen::MatrixXd> third;
    Eigen::MatrixXd global_third;
};

enum class Execution { serial, parallel };

/// Reference implementation: one pass over time accumulating into slice bins,
/// then a second pass for the centered third moments.
SliceMoments slice_moments_serial(const Eigen::MatrixXd& z, const SliceAssignment& slices, bool with_third);

/// OpenMP implementation: slices are processed concurrently, each summing its
/// members in time order, so results match the serial reference bit for bit.
SliceMoments slice_moments_parallel(const Eigen::MatrixXd& z, const SliceAssignment& slices, bool with_third);

inline SliceMoments slice_moments(const Eigen::MatrixXd& z, const SliceAssignment& slices, bool with_third,
                                  Execution exec = Execution::parallel) {
    return exec == Execution::serial ? slice_moments_serial(z, slices, with_third)
                                     : slice_moments_parallel(z, slices, with_third);
}

}  // namespace sufcast
