#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "sufcast/factors.hpp"
#include "sufcast/forecaster.hpp"
#include "sufcast/sdr.hpp"
#include "sufcast/simulation.hpp"

namespace sufcast {

inline constexpr const char* kVersion = "0.1.0";

struct StudyMetrics {
    bool directions = true;  // R^2 of the two leading estimated directions
    bool forecast = false;   // out-of-sample R^2 on held-out periods
    bool order = false;      // selected K and L
};

struct StudyConfig {
    DgpSpec dgp;
    std::vector<ForecastMethod> methods{ForecastMethod::sir, ForecastMethod::dr};
    int n_reps = 200;
    StudyMetrics metrics;
    int slices = kDefaultSlices;
    int num_directions = 2;
    VarianceMode variance_mode = VarianceMode::identity;
    int n_test = 100;
    int k_max = 8;
    FactorPenalty penalty = FactorPenalty::ic1;
    double c_censor = kDefaultCensoring;
    double ct_multiplier = 1.0;

    void validate() const;
};

struct MethodOutcome {
    ForecastMethod method = ForecastMethod::dr;
    double r2_phi1 = 0.0;  // fractions in [0, 1]
    double r2_phi2 = 0.0;
    double oos_r2 = 0.0;
    int l_hat = 0;
    std::string error;  // empty on success
};

struct ReplicationRecord {
    int replicate = 0;
    int k_hat = 0;
    std::vector<MethodOutcome> outcomes;  // one per configured method
    std::string error;                    // failure shared by every method
};

/// Median and sample standard deviation of one table cell. Rate cells
/// ("k_hat_rate", "DR_l_hat_rate") hold 0/100 indicators and report their mean.
struct CellSummary {
    std::string column;  // e.g. "DR_r2_phi1"
    double median = 0.0;
    double mean = 0.0;
    double sd = 0.0;
    int count = 0;
    bool rate = false;
};

struct StudyResult {
    StudyConfig config;
    std::vector<ReplicationRecord> records;
    std::vector<CellSummary> cells;
    int failures = 0;
    double runtime_seconds = 0.0;

    const CellSummary& cell(const std::string& column) const;
};

/// Median (mean of the middle pair for even counts); throws on empty input.
double median(std::vector<double> v);
/// Sample standard deviation, 0 for fewer than two values.
double sample_sd(const std::vector<double>& v);

/// One replication of the study: draw, estimate factors, then every method.
ReplicationRecord run_replication(const StudyConfig& config, const DgpParameters& params, int replicate);

/// Runs every replication (concurrently when OpenMP is available) and
/// summarizes. R^2 cells are in percent.
StudyResult monte_carlo_study(const StudyConfig& config);

/// table.csv (one summary row), replications.csv, metadata.json.
void write_study(const std::filesystem::path& dir, const StudyResult& result);
void write_study_table(const std::filesystem::path& path, const StudyResult& result);

}  // namespace sufcast
