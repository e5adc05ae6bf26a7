#include "sufcast/sdr.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include <json.hpp>

#include "sufcast/error.hpp"
#include "sufcast/linalg.hpp"
#include "sufcast/matrix_io.hpp"

namespace sufcast {

KernelMethod parse_kernel_method(const std::string& name) {
    if (name == "sir") return KernelMethod::sir;
    if (name == "dr") return KernelMethod::dr;
    if (name == "tm") return KernelMethod::tm;
    if (name == "ens" || name == "dr+tm" || name == "ensemble") return KernelMethod::ensemble;
    throw ConfigError("unknown kernel method '" + name + "' (expected sir, dr, tm or ens)");
}

std::string to_string(KernelMethod method) {
    switch (method) {
        case KernelMethod::sir: return "SIR";
        case KernelMethod::dr: return "DR";
        case KernelMethod::tm: return "TM";
        case KernelMethod::ensemble: return "DR+TM";
    }
    return "DR";
}

VarianceMode parse_variance_mode(const std::string& name) {
    if (name == "identity") return VarianceMode::identity;
    if (name == "pooled") return VarianceMode::pooled;
    throw ConfigError("unknown variance mode '" + name + "' (expected identity or pooled)");
}

std::string to_string(VarianceMode mode) { return mode == VarianceMode::identity ? "identity" : "pooled"; }

SliceAssignment slice(const Eigen::VectorXd& y, int h_count) {
    const Eigen::Index T = y.size();
    if (h_count < 1) throw ConfigError("number of slices must be at least 1");
    if (h_count > T) {
        throw ConfigError("number of slices " + std::to_string(h_count) + " exceeds the number of observations " +
                          std::to_string(T));
    }
    if (!y.allFinite()) throw DataError("slicing target contains non-finite values");

    std::vector<Eigen::Index> order(static_cast<std::size_t>(T));
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) { return y(a) < y(b); });

    SliceAssignment s;
    s.h_count = h_count;
    s.labels.assign(static_cast<std::size_t>(T), 0);
    s.counts.assign(static_cast<std::size_t>(h_count), 0);
    s.boundaries.assign(static_cast<std::size_t>(h_count), 0.0);
    s.members.assign(static_cast<std::size_t>(h_count), {});
    for (int h = 0; h < h_count; ++h) {
        const Eigen::Index lo = static_cast<Eigen::Index>(h) * T / h_count;
        const Eigen::Index hi = static_cast<Eigen::Index>(h + 1) * T / h_count;
        auto& members = s.members[static_cast<std::size_t>(h)];
        for (Eigen::Index r = lo; r < hi; ++r) {
            const Eigen::Index t = order[static_cast<std::size_t>(r)];
            s.labels[static_cast<std::size_t>(t)] = h;
            members.push_back(t);
        }
        std::sort(members.begin(), members.end());
        s.counts[static_cast<std::size_t>(h)] = hi - lo;
        s.boundaries[static_cast<std::size_t>(h)] = y(order[static_cast<std::size_t>(hi - 1)]);
    }
    return s;
}

namespace {

Eigen::MatrixXd centered(const Eigen::MatrixXd& factors) {
    if (factors.cols() < 1) throw ConfigError("factor matrix has no columns");
    if (!factors.allFinite()) throw DataError("factor matrix contains non-finite values");
    Eigen::RowVectorXd mean = factors.colwise().mean();
    return factors.rowwise() - mean;
}

KernelEstimate finish(KernelMethod method, VarianceMode mode, int slice_count, Eigen::MatrixXd m) {
    KernelEstimate k;
    k.method = method;
    k.variance_mode = mode;
    k.slice_count = slice_count;
    k.matrix = 0.5 * (m + m.transpose());
    auto eig = sorted_symmetric_eigen(k.matrix);
    k.eigenvalues = std::move(eig.values);
    k.eigenvectors = std::move(eig.vectors);
    return k;
}

Eigen::MatrixXd variance_estimate(const SliceMoments& mom, VarianceMode mode, Eigen::Index k) {
    if (mode == VarianceMode::identity) return Eigen::MatrixXd::Identity(k, k);
    Eigen::MatrixXd v = Eigen::MatrixXd::Zero(k, k);
    for (std::size_t h = 0; h < mom.second.size(); ++h) v += mom.weights(static_cast<Eigen::Index>(h)) * mom.second[h];
    return v;
}

Eigen::MatrixXd sir_matrix(const SliceMoments& mom, Eigen::Index k) {
    Eigen::MatrixXd w = Eigen::MatrixXd::Zero(k, k);
    for (std::size_t h = 0; h < mom.means.size(); ++h)
        w += mom.weights(static_cast<Eigen::Index>(h)) * mom.means[h] * mom.means[h].transpose();
    return w;
}

Eigen::MatrixXd dr_matrix(const SliceMoments& mom, VarianceMode mode, Eigen::Index k) {
    const Eigen::MatrixXd v = variance_estimate(mom, mode, k);
    const Eigen::MatrixXd w = sir_matrix(mom, k);
    Eigen::MatrixXd second_term = Eigen::MatrixXd::Zero(k, k);
    double mean_norm = 0.0;
    for (std::size_t h = 0; h < mom.means.size(); ++h) {
        const double p = mom.weights(static_cast<Eigen::Index>(h));
        const Eigen::MatrixXd a = v - mom.second[h];
        second_term += p * a * a;
        mean_norm += p * mom.means[h].squaredNorm();
    }
    return 2.0 * second_term + 2.0 * w * w + 2.0 * mean_norm * w;
}

Eigen::MatrixXd tm_matrix(const SliceMoments& mom, Eigen::Index k) {
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(k, k);
    for (std::size_t h = 0; h < mom.third.size(); ++h) {
        const Eigen::MatrixXd mu = mom.third[h] - mom.global_third;
        m += mom.weights(static_cast<Eigen::Index>(h)) * mu.transpose() * mu;
    }
    return m;
}

void require_tm_slices(const SliceAssignment& slices) {
    for (int h = 0; h < slices.h_count; ++h) {
        if (slices.counts[static_cast<std::size_t>(h)] < 2) {
            throw ConfigError("slice " + std::to_string(h) +
                              " has fewer than 2 observations; third moments need at least 2 per slice");
        }
    }
}

}  // namespace

KernelEstimate sir_kernel(const Eigen::MatrixXd& factors, const SliceAssignment& slices, Execution exec) {
    const auto z = centered(factors);
    const auto mom = slice_moments(z, slices, false, exec);
    return finish(KernelMethod::sir, VarianceMode::identity, slices.h_count, sir_matrix(mom, z.cols()));
}

KernelEstimate dr_kernel(const Eigen::MatrixXd& factors, const SliceAssignment& slices, VarianceMode mode,
                         Execution exec) {
    const auto z = centered(factors);
    const auto mom = slice_moments(z, slices, false, exec);
    return finish(KernelMethod::dr, mode, slices.h_count, dr_matrix(mom, mode, z.cols()));
}

KernelEstimate dr_kernel_pairform(const Eigen::MatrixXd& factors, const SliceAssignment& slices, VarianceMode mode) {
    const auto z = centered(factors);
    const auto mom = slice_moments_serial(z, slices, false);
    const Eigen::Index k = z.cols();
    const Eigen::MatrixXd v = variance_estimate(mom, mode, k);
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(k, k);
    const auto H = mom.means.size();
    for (std::size_t h = 0; h < H; ++h) {
        for (std::size_t g = 0; g < H; ++g) {
            const Eigen::MatrixXd cross = mom.means[h] * mom.means[g].transpose();
            const Eigen::MatrixXd pair = 2.0 * v - mom.second[h] - mom.second[g] + cross + cross.transpose();
            m += mom.weights(static_cast<Eigen::Index>(h)) * mom.weights(static_cast<Eigen::Index>(g)) * pair * pair;
        }
    }
    return finish(KernelMethod::dr, mode, slices.h_count, std::move(m));
}

KernelEstimate tm_kernel(const Eigen::MatrixXd& factors, const SliceAssignment& slices, Execution exec) {
    slices.validate();
    require_tm_slices(slices);
    const auto z = centered(factors);
    const auto mom = slice_moments(z, slices, true, exec);
    return finish(KernelMethod::tm, VarianceMode::identity, slices.h_count, tm_matrix(mom, z.cols()));
}

KernelEstimate ensemble_kernel(const KernelEstimate& dr, const KernelEstimate& tm) {
    if (dr.matrix.rows() != tm.matrix.rows() || dr.matrix.cols() != tm.matrix.cols())
        throw ConfigError("ensemble parts have different dimensions");
    return finish(KernelMethod::ensemble, dr.variance_mode, dr.slice_count, dr.matrix + tm.matrix);
}

KernelEstimate build_kernel(KernelMethod method, const Eigen::MatrixXd& factors, const SliceAssignment& slices,
                            VarianceMode mode, Execution exec) {
    switch (method) {
        case KernelMethod::sir: return sir_kernel(factors, slices, exec);
        case KernelMethod::dr: return dr_kernel(factors, slices, mode, exec);
        case KernelMethod::tm: return tm_kernel(factors, slices, exec);
        case KernelMethod::ensemble: {
            slices.validate();
            require_tm_slices(slices);
            const auto z = centered(factors);
            const auto mom = slice_moments(z, slices, true, exec);
            const Eigen::Index k = z.cols();
            return finish(KernelMethod::ensemble, mode, slices.h_count, dr_matrix(mom, mode, k) + tm_matrix(mom, k));
        }
    }
    throw ConfigError("unknown kernel method");
}

Eigen::MatrixXd extract_directions(const KernelEstimate& kernel, int l) {
    if (l < 1 || l > kernel.num_factors()) {
        throw ConfigError("number of directions " + std::to_string(l) + " outside [1, " +
                          std::to_string(kernel.num_factors()) + "]");
    }
    return kernel.eigenvectors.leftCols(l);
}

KernelEstimate with_directions(KernelEstimate kernel, int l) {
    kernel.directions = extract_directions(kernel, l);
    return kernel;
}

DimensionSelection select_dimension(const KernelEstimate& kernel, int t_len, double c_censor, double c_t) {
    const int k = kernel.num_factors();
    if (!(c_censor > 0.0 && c_censor < 1.0)) throw ConfigError("censoring constant must lie in (0, 1)");
    if (t_len < 1) throw ConfigError("sample size must be positive");
    DimensionSelection sel;
    sel.k_c = static_cast<int>(std::lround(c_censor * k));
    if (sel.k_c < 1) {
        throw ConfigError("censored dimension round(c K) = " + std::to_string(sel.k_c) +
                          " is below 1; increase K or the censoring constant");
    }
    sel.c_t = c_t;
    const Eigen::VectorXd& lambda = kernel.eigenvalues;
    sel.tau = static_cast<int>((lambda.array() > kPositiveEigenvalue).count());

    sel.objective.resize(sel.k_c);
    for (int l = 1; l <= sel.k_c; ++l) {
        double fit = 0.0;
        for (int i = 1 + std::min(sel.tau, l); i <= sel.k_c; ++i) {
            const double li = lambda(i - 1);
            fit += std::log1p(li) - li;
        }
        sel.objective(l - 1) = 0.5 * t_len * fit - c_t * l * (2.0 * k - l + 1.0) / 2.0;
    }
    Eigen::Index best = 0;
    for (Eigen::Index i = 1; i < sel.objective.size(); ++i) {
        if (sel.objective(i) > sel.objective(best)) best = i;
    }
    sel.l_hat = static_cast<int>(best) + 1;
    return sel;
}

double default_ct(KernelMethod method, int k, int p, int t_len, double multiplier) {
    if (k < 1 || p < 1 || t_len < 1) throw ConfigError("C_T needs positive K, p and T");
    const double sk = std::sqrt(static_cast<double>(k));
    const double base = sk / std::sqrt(static_cast<double>(p)) * t_len;
    const double st = std::sqrt(static_cast<double>(t_len));
    const bool third = method == KernelMethod::tm || method == KernelMethod::ensemble;
    return multiplier * (base + (third ? sk * st : st));
}

void write_kernel(const std::filesystem::path& dir, const KernelEstimate& kernel,
                  const std::optional<DimensionSelection>& selection) {
    std::filesystem::create_directories(dir);
    write_matrix_csv(dir / "kernel.csv", kernel.matrix);
    write_matrix_csv(dir / "kernel_eigenvalues.csv", kernel.eigenvalues, {"eigenvalue"});

    nlohmann::ordered_json j;
    j["method"] = to_string(kernel.method);
    j["slices"] = kernel.slice_count;
    j["variance_mode"] = to_string(kernel.variance_mode);
    j["num_factors"] = kernel.num_factors();
    j["eigenvalues"] = std::vector<double>(kernel.eigenvalues.data(), kernel.eigenvalues.data() + kernel.eigenvalues.size());
    if (kernel.directions.size() > 0) j["num_directions"] = kernel.directions.cols();
    if (selection) {
        j["l_hat"] = selection->l_hat;
        j["k_c"] = selection->k_c;
        j["tau"] = selection->tau;
        j["c_t"] = selection->c_t;
        j["objective"] = std::vector<double>(selection->objective.data(),
                                             selection->objective.data() + selection->objective.size());
    }
    std::ofstream(dir / "kernel.json") << j.dump(2) << '\n';
}

}  // namespace sufcast
