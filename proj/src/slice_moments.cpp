#include "sufcast/slice_moments.hpp"

#include <numeric>
#include <string>

#include "sufcast/error.hpp"

namespace sufcast {

void SliceAssignment::validate() const {
    if (h_count < 1) throw ConfigError("slice count must be at least 1");
    if (static_cast<int>(counts.size()) != h_count || static_cast<int>(members.size()) != h_count)
        throw ConfigError("slice assignment is inconsistent with its slice count");
    Eigen::Index total = 0;
    for (int h = 0; h < h_count; ++h) {
        const auto c = counts[static_cast<std::size_t>(h)];
        if (c < 1) throw ConfigError("slice " + std::to_string(h) + " is empty");
        if (static_cast<Eigen::Index>(members[static_cast<std::size_t>(h)].size()) != c)
            throw ConfigError("slice " + std::to_string(h) + " member list does not match its count");
        total += c;
    }
    if (total != num_observations()) throw ConfigError("slice counts do not sum to the number of observations");
}

std::vector<std::pair<int, int>> distinct_row_pairs(int k) {
    std::vector<std::pair<int, int>> pairs;
    pairs.reserve(static_cast<std::size_t>(k * (k + 1) / 2));
    for (int a = 0; a < k; ++a)
        for (int b = a; b < k; ++b) pairs.emplace_back(a, b);
    return pairs;
}

namespace {

void check_inputs(const Eigen::MatrixXd& z, const SliceAssignment& slices) {
    slices.validate();
    if (slices.num_observations() != z.rows())
        throw ConfigError("slice assignment covers " + std::to_string(slices.num_observations()) +
                          " observations but the factor matrix has " + std::to_string(z.rows()));
}

SliceMoments allocate(Eigen::Index k, int h_count, bool with_third) {
    SliceMoments m;
    m.weights = Eigen::VectorXd::Zero(h_count);
    m.means.assign(static_cast<std::size_t>(h_count), Eigen::VectorXd::Zero(k));
    m.second.assign(static_cast<std::size_t>(h_count), Eigen::MatrixXd::Zero(k, k));
    if (with_third) {
        const Eigen::Index rows = k * (k + 1) / 2;
        m.third.assign(static_cast<std::size_t>(h_count), Eigen::MatrixXd::Zero(rows, k));
        m.global_third = Eigen::MatrixXd::Zero(rows, k);
    }
    return m;
}

// Adds v_a v_b v' for every distinct (a, b) into `acc`.
inline void add_cubic(Eigen::MatrixXd& acc, const std::vector<std::pair<int, int>>& pairs, const double* v,
                      Eigen::Index k) {
    for (std::size_t r = 0; r < pairs.size(); ++r) {
        const double ab = v[pairs[r].first] * v[pairs[r].second];
        for (Eigen::Index c = 0; c < k; ++c) acc(static_cast<Eigen::Index>(r), c) += ab * v[c];
    }
}

void combine_global_third(SliceMoments& m, const std::vector<Eigen::MatrixXd>& raw_third, Eigen::Index t_len) {
    for (const auto& raw : raw_third) m.global_third += raw;
    m.global_third /= static_cast<double>(t_len);
}

}  // namespace

SliceMoments slice_moments_serial(const Eigen::MatrixXd& z, const SliceAssignment& slices, bool with_third) {
    check_inputs(z, slices);
    const Eigen::Index T = z.rows();
    const Eigen::Index K = z.cols();
    const int H = slices.h_count;
    SliceMoments m = allocate(K, H, with_third);
    const auto pairs = distinct_row_pairs(static_cast<int>(K));
    std::vector<Eigen::MatrixXd> raw_third;
    if (with_third) raw_third.assign(static_cast<std::size_t>(H), Eigen::MatrixXd::Zero(m.global_third.rows(), K));

    std::vector<double> row(static_cast<std::size_t>(K));
    for (Eigen::Index t = 0; t < T; ++t) {
        const auto h = static_cast<std::size_t>(slices.labels[static_cast<std::size_t>(t)]);
        for (Eigen::Index a = 0; a < K; ++a) row[static_cast<std::size_t>(a)] = z(t, a);
        for (Eigen::Index a = 0; a < K; ++a) {
            m.means[h](a) += row[static_cast<std::size_t>(a)];
            for (Eigen::Index b = 0; b < K; ++b)
                m.second[h](a, b) += row[static_cast<std::size_t>(a)] * row[static_cast<std::size_t>(b)];
        }
        if (with_third) add_cubic(raw_third[h], pairs, row.data(), K);
    }
    for (int h = 0; h < H; ++h) {
        const auto hs = static_cast<std::size_t>(h);
        const double c = static_cast<double>(slices.counts[hs]);
        m.weights(h) = c / static_cast<double>(T);
        m.means[hs] /= c;
        m.second[hs] /= c;
    }
    if (!with_third) return m;

    for (Eigen::Index t = 0; t < T; ++t) {
        const auto h = static_cast<std::size_t>(slices.labels[static_cast<std::size_t>(t)]);
        for (Eigen::Index a = 0; a < K; ++a) row[static_cast<std::size_t>(a)] = z(t, a) - m.means[h](a);
        add_cubic(m.third[h], pairs, row.data(), K);
    }
    for (int h = 0; h < H; ++h) m.third[static_cast<std::size_t>(h)] /= static_cast<double>(slices.counts[static_cast<std::size_t>(h)]);
    combine_global_third(m, raw_third, T);
    return m;
}

SliceMoments slice_moments_parallel(const Eigen::MatrixXd& z, const SliceAssignment& slices, bool with_third) {
    check_inputs(z, slices);
    const Eigen::Index T = z.rows();
    const Eigen::Index K = z.cols();
    const int H = slices.h_count;
    SliceMoments m = allocate(K, H, with_third);
    const auto pairs = distinct_row_pairs(static_cast<int>(K));
    std::vector<Eigen::MatrixXd> raw_third;
    if (with_third) raw_third.assign(static_cast<std::size_t>(H), Eigen::MatrixXd::Zero(m.global_third.rows(), K));

#pragma omp parallel for schedule(dynamic)
    for (int h = 0; h < H; ++h) {
        const auto hs = static_cast<std::size_t>(h);
        const auto& idx = slices.members[hs];
        std::vector<double> row(static_cast<std::size_t>(K));
        Eigen::VectorXd& mean = m.means[hs];
        Eigen::MatrixXd& second = m.second[hs];
        for (Eigen::Index t : idx) {
            for (Eigen::Index a = 0; a < K; ++a) row[static_cast<std::size_t>(a)] = z(t, a);
            for (Eigen::Index a = 0; a < K; ++a) {
                mean(a) += row[static_cast<std::size_t>(a)];
                for (Eigen::Index b = 0; b < K; ++b)
                    second(a, b) += row[static_cast<std::size_t>(a)] * row[static_cast<std::size_t>(b)];
            }
            if (with_third) add_cubic(raw_third[hs], pairs, row.data(), K);
        }
        const double c = static_cast<double>(slices.counts[hs]);
        m.weights(h) = c / static_cast<double>(T);
        mean /= c;
        second /= c;
        if (with_third) {
            for (Eigen::Index t : idx) {
                for (Eigen::Index a = 0; a < K; ++a) row[static_cast<std::size_t>(a)] = z(t, a) - mean(a);
                add_cubic(m.third[hs], pairs, row.data(), K);
            }
            m.third[hs] /= c;
        }
    }
    if (with_third) combine_global_third(m, raw_third, T);
    return m;
}

}  // namespace sufcast
