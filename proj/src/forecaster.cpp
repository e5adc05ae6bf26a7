#include "sufcast/forecaster.hpp"

#include <algorithm>
#include <cmath>

#include "sufcast/error.hpp"
#include "sufcast/smoother.hpp"

namespace sufcast {

ForecastMethod parse_forecast_method(const std::string& name) {
    if (name == "sir") return ForecastMethod::sir;
    if (name == "dr") return ForecastMethod::dr;
    if (name == "tm") return ForecastMethod::tm;
    if (name == "ens" || name == "dr+tm") return ForecastMethod::ens;
    if (name == "pc") return ForecastMethod::pc;
    if (name == "nlpc" || name == "nl-pc") return ForecastMethod::nlpc;
    throw ConfigError("unknown method '" + name + "' (expected sir, dr, tm, ens, pc or nlpc)");
}

std::string to_string(ForecastMethod method) {
    switch (method) {
        case ForecastMethod::sir: return "SIR";
        case ForecastMethod::dr: return "DR";
        case ForecastMethod::tm: return "TM";
        case ForecastMethod::ens: return "ENS";
        case ForecastMethod::pc: return "PC";
        case ForecastMethod::nlpc: return "NL-PC";
    }
    return "DR";
}

bool is_sdr(ForecastMethod method) { return method != ForecastMethod::pc && method != ForecastMethod::nlpc; }

KernelMethod kernel_method(ForecastMethod method) {
    switch (method) {
        case ForecastMethod::sir: return KernelMethod::sir;
        case ForecastMethod::dr: return KernelMethod::dr;
        case ForecastMethod::tm: return KernelMethod::tm;
        case ForecastMethod::ens: return KernelMethod::ensemble;
        default: break;
    }
    throw ConfigError(to_string(method) + " does not use an SDR kernel");
}

std::string ForecastModel::tag() const {
    if (!is_sdr(method)) return to_string(method);
    return to_string(method) + "(" + std::to_string(num_indices()) + ")";
}

ForecastModel fit_additive(const Eigen::MatrixXd& indices, const Eigen::VectorXd& targets,
                           const AdditiveOptions& options) {
    const Eigen::Index n = indices.rows();
    const Eigen::Index L = indices.cols();
    const Eigen::Index min_n = options.bandwidths ? 2 : 5;
    if (n < min_n) {
        throw ConfigError("additive fit needs at least " + std::to_string(min_n) + " observations, found " +
                          std::to_string(n));
    }
    if (L < 1) throw ConfigError("additive fit needs at least one index");
    if (targets.size() != n) throw ConfigError("indices and targets differ in length");
    if (!indices.allFinite() || !targets.allFinite()) throw DataError("additive fit inputs contain non-finite values");
    if (options.bandwidths && static_cast<Eigen::Index>(options.bandwidths->size()) != L)
        throw ConfigError("need one bandwidth per index");

    ForecastModel model;
    model.kind = ForecastModel::Kind::additive;
    model.directions = Eigen::MatrixXd::Identity(L, L);
    model.intercept = targets.mean();
    const Eigen::VectorXd centered = targets.array() - model.intercept;

    std::vector<Eigen::MatrixXd> smoothers(static_cast<std::size_t>(L));
    model.components.resize(static_cast<std::size_t>(L));
    for (Eigen::Index j = 0; j < L; ++j) {
        auto& comp = model.components[static_cast<std::size_t>(j)];
        comp.index_values = indices.col(j);
        comp.partial_residual = Eigen::VectorXd::Zero(n);
        double h = options.bandwidths ? (*options.bandwidths)[static_cast<std::size_t>(j)]
                                      : normal_reference_bandwidth(comp.index_values);
        if (options.bandwidths && !(h > 0.0 && std::isfinite(h))) throw ConfigError("bandwidths must be positive");
        if (comp.index_values.maxCoeff() == comp.index_values.minCoeff()) {
            comp.active = false;
            comp.bandwidth = 1.0;
            model.warnings.push_back("index " + std::to_string(j + 1) + " has zero variance; its component is fixed at 0");
            continue;
        }
        comp.bandwidth = h;
        smoothers[static_cast<std::size_t>(j)] = nw_weights(comp.index_values, comp.index_values, h, options.exec);
    }

    const auto active = std::count_if(model.components.begin(), model.components.end(),
                                      [](const AdditiveComponent& c) { return c.active; });
    std::vector<Eigen::VectorXd> fitted(static_cast<std::size_t>(L), Eigen::VectorXd::Zero(n));
    Eigen::VectorXd total = Eigen::VectorXd::Zero(n);
    model.converged = false;
    for (int sweep = 1; sweep <= options.max_sweeps; ++sweep) {
        double change = 0.0;
        for (Eigen::Index j = 0; j < L; ++j) {
            const auto js = static_cast<std::size_t>(j);
            auto& comp = model.components[js];
            if (!comp.active) continue;
            comp.partial_residual = centered - (total - fitted[js]);
            Eigen::VectorXd next = smoothers[js] * comp.partial_residual;
            if (active > 1) {
                comp.offset = next.mean();
                next.array() -= comp.offset;
            }
            change = std::max(change, (next - fitted[js]).cwiseAbs().maxCoeff());
            total += next - fitted[js];
            fitted[js] = std::move(next);
        }
        model.sweeps = sweep;
        if (change < options.tolerance) {
            model.converged = true;
            break;
        }
    }
    if (!model.converged) {
        model.warnings.push_back("backfitting stopped after " + std::to_string(model.sweeps) + " sweeps");
    }
    return model;
}

ForecastModel fit_index_model(const Eigen::MatrixXd& factors, const Eigen::VectorXd& targets,
                              const Eigen::MatrixXd& directions, ForecastMethod method,
                              const AdditiveOptions& options) {
    if (directions.rows() != factors.cols()) throw ConfigError("directions do not match the number of factors");
    ForecastModel model = fit_additive(factors * directions, targets, options);
    model.directions = directions;
    model.method = method;
    return model;
}

ForecastModel fit_pc_baseline(const Eigen::MatrixXd& factors, const Eigen::VectorXd& targets, PcMode mode,
                              const AdditiveOptions& options) {
    const Eigen::Index T = factors.rows();
    const Eigen::Index K = factors.cols();
    if (targets.size() != T) throw ConfigError("factors and targets differ in length");
    if (mode == PcMode::additive) {
        return fit_index_model(factors, targets, Eigen::MatrixXd::Identity(K, K), ForecastMethod::nlpc, options);
    }
    if (T <= K) {
        throw ConfigError("linear PC regression needs more observations (" + std::to_string(T) + ") than factors (" +
                          std::to_string(K) + ")");
    }
    if (!factors.allFinite() || !targets.allFinite()) throw DataError("regression inputs contain non-finite values");
    Eigen::MatrixXd design(T, K + 1);
    design.col(0).setOnes();
    design.rightCols(K) = factors;
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
    if (qr.rank() < K + 1) throw NumericalError("linear PC regression design is rank deficient");
    const Eigen::VectorXd beta = qr.solve(targets);

    ForecastModel model;
    model.kind = ForecastModel::Kind::linear;
    model.method = ForecastMethod::pc;
    model.directions = Eigen::MatrixXd::Identity(K, K);
    model.intercept = beta(0);
    model.coefficients = beta.tail(K);
    return model;
}

double predict(const ForecastModel& model, const Eigen::VectorXd& f_new) {
    if (f_new.size() != model.directions.rows()) throw ConfigError("factor vector has the wrong length");
    if (!f_new.allFinite()) throw DataError("factor vector contains non-finite values");
    if (model.kind == ForecastModel::Kind::linear) return model.intercept + model.coefficients.dot(f_new);

    const Eigen::VectorXd idx = model.directions.transpose() * f_new;
    double y = model.intercept;
    for (std::size_t j = 0; j < model.components.size(); ++j) {
        const auto& comp = model.components[j];
        if (!comp.active) continue;
        y += nw_evaluate(idx(static_cast<Eigen::Index>(j)), comp.index_values, comp.partial_residual, comp.bandwidth) -
             comp.offset;
    }
    return y;
}

Eigen::VectorXd predict_rows(const ForecastModel& model, const Eigen::MatrixXd& factor_rows) {
    Eigen::VectorXd out(factor_rows.rows());
    for (Eigen::Index t = 0; t < factor_rows.rows(); ++t) out(t) = predict(model, factor_rows.row(t).transpose());
    return out;
}

}  // namespace sufcast
