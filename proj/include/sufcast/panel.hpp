#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace sufcast {

/// Observed predictor panel and target series.
///
/// `x` holds one series per row and one time point per column. `y` is the raw
/// target observed at the same time labels; `make_h_step_target` performs the
/// shift that pairs column t of `x` with the target one or more periods ahead.
struct PanelData {
    Eigen::MatrixXd x;
    std::vector<std::string> series_names;
    std::vector<std::string> time_labels;
    Eigen::VectorXd y;
    std::string target_name;
    std::string label_header = "date";

    Eigen::Index num_series() const { return x.rows(); }
    Eigen::Index num_periods() const { return x.cols(); }

    /// Throws DataError when a structural invariant is violated.
    void validate() const;
};

/// Half-open column range [begin, end).
struct IndexRange {
    Eigen::Index begin = 0;
    Eigen::Index end = 0;

    Eigen::Index size() const { return end - begin; }
};

/// Per-series statistics used to standardize a panel.
struct StandardizationRecord {
    Eigen::VectorXd mean;
    Eigen::VectorXd sd;
    IndexRange window;
};

struct CsvOptions {
    char delimiter = ',';
    /// When true a non-numeric cell that is not a recognized missing token is
    /// an error instead of a dropped row.
    bool strict = false;
};

struct CsvLoad {
    PanelData panel;
    std::size_t rows_dropped = 0;
};

/// Reads a panel CSV: header row, first column time label, remaining columns
/// numeric. Rows with a missing or non-numeric value in any column are dropped.
CsvLoad load_csv(const std::filesystem::path& path, const std::string& target_column,
                 const CsvOptions& options = {});

/// Writes the panel in the same layout `load_csv` reads (series columns first,
/// target column last) using shortest round-trip number formatting.
void write_csv(const PanelData& panel, const std::filesystem::path& path, char delimiter = ',');

/// Standardizes every series to mean 0 and sample standard deviation 1 over
/// `window`; columns outside the window reuse the window statistics.
std::pair<PanelData, StandardizationRecord> standardize(const PanelData& panel, IndexRange window);

/// Same as `standardize` on a bare matrix (rows are series).
std::pair<Eigen::MatrixXd, StandardizationRecord> standardize_rows(const Eigen::MatrixXd& x,
                                                                   IndexRange window,
                                                                   const std::vector<std::string>* names = nullptr);

Eigen::MatrixXd invert_standardization(const Eigen::MatrixXd& z, const StandardizationRecord& record);

/// Entry t is the mean of y[t+1], ..., y[t+h]; the result has length T - h and
/// is paired with column t of the predictor panel.
Eigen::VectorXd make_h_step_target(const Eigen::VectorXd& y, int h);

}  // namespace sufcast
