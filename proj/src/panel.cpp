#include "sufcast/panel.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <optional>
#include <sstream>

#include "sufcast/error.hpp"
#include "sufcast/matrix_io.hpp"

namespace sufcast {

namespace {

std::string trim(std::string_view s) {
    auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    auto last = s.find_last_not_of(" \t\r");
    return std::string(s.substr(first, last - first + 1));
}

std::vector<std::string> split_fields(const std::string& line, char delimiter) {
    std::vector<std::string> out;
    std::string field;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        char c = line[i];
        if (quoted) {
            if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
                field.push_back('"');
                ++i;
            } else if (c == '"') {
                quoted = false;
            } else {
                field.push_back(c);
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == delimiter) {
            out.push_back(trim(field));
            field.clear();
        } else {
            field.push_back(c);
        }
    }
    out.push_back(trim(field));
    return out;
}

bool is_missing_token(const std::string& s) {
    static const char* tokens[] = {"", "NA", "N/A", "NaN", "nan", "NAN", ".", "null", "NULL"};
    return std::any_of(std::begin(tokens), std::end(tokens), [&](const char* t) { return s == t; });
}

std::optional<double> parse_number(const std::string& s) {
    double value = 0.0;
    const char* first = s.data();
    const char* last = s.data() + s.size();
    if (first != last && *first == '+') ++first;
    auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc() || ptr != last || !std::isfinite(value)) return std::nullopt;
    return value;
}

// Numeric labels compare numerically, everything else (ISO dates included)
// lexicographically.
bool label_less(const std::string& a, const std::string& b) {
    auto na = parse_number(a);
    auto nb = parse_number(b);
    if (na && nb) return *na < *nb;
    return a < b;
}

}  // namespace

void PanelData::validate() const {
    if (x.rows() < 1) throw DataError("panel has no predictor series");
    if (x.cols() < 2) throw DataError("panel needs at least 2 time points, found " + std::to_string(x.cols()));
    if (y.size() != x.cols()) throw DataError("target length does not match the number of time points");
    if (static_cast<Eigen::Index>(series_names.size()) != x.rows())
        throw DataError("series name count does not match the number of series");
    if (static_cast<Eigen::Index>(time_labels.size()) != x.cols())
        throw DataError("time label count does not match the number of time points");
    if (!x.allFinite() || !y.allFinite()) throw DataError("panel contains missing or non-finite values");
    for (std::size_t t = 1; t < time_labels.size(); ++t) {
        if (!label_less(time_labels[t - 1], time_labels[t]))
            throw DataError("time labels are not strictly increasing at '" + time_labels[t] + "'");
    }
}

CsvLoad load_csv(const std::filesystem::path& path, const std::string& target_column, const CsvOptions& options) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open file: " + path.string());

    std::string line;
    if (!std::getline(in, line)) throw DataError("empty file: " + path.string());
    auto header = split_fields(line, options.delimiter);
    if (header.size() < 2) throw DataError("header must contain a time label column and at least one series");

    auto target_it = std::find(header.begin() + 1, header.end(), target_column);
    if (target_it == header.end()) throw DataError("target column not found: " + target_column);
    const std::size_t target_col = static_cast<std::size_t>(target_it - header.begin());

    std::vector<std::string> labels;
    std::vector<std::vector<double>> rows;
    std::size_t dropped = 0;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        auto fields = split_fields(line, options.delimiter);
        if (fields.size() != header.size()) {
            throw DataError("row " + std::to_string(line_no) + ": expected " + std::to_string(header.size()) +
                            " fields, found " + std::to_string(fields.size()));
        }
        std::vector<double> values(header.size() - 1);
        bool usable = true;
        for (std::size_t c = 1; c < fields.size(); ++c) {
            auto v = parse_number(fields[c]);
            if (!v) {
                if (options.strict && !is_missing_token(fields[c])) {
                    throw DataError("row " + std::to_string(line_no) + ", column '" + header[c] +
                                    "': cannot parse '" + fields[c] + "'");
                }
                usable = false;
                break;
            }
            values[c - 1] = *v;
        }
        if (!usable) {
            ++dropped;
            continue;
        }
        labels.push_back(fields[0]);
        rows.push_back(std::move(values));
    }

    if (rows.size() < 2) {
        throw DataError("fewer than 2 usable time points in " + path.string() + " (" + std::to_string(dropped) +
                        " rows dropped)");
    }

    const auto T = static_cast<Eigen::Index>(rows.size());
    const auto p = static_cast<Eigen::Index>(header.size()) - 2;
    if (p < 1) throw DataError("no predictor series besides the target column");

    CsvLoad result;
    PanelData& panel = result.panel;
    panel.label_header = header[0];
    panel.target_name = target_column;
    panel.time_labels = std::move(labels);
    panel.x.resize(p, T);
    panel.y.resize(T);
    for (std::size_t c = 1; c < header.size(); ++c) {
        if (c != target_col) panel.series_names.push_back(header[c]);
    }
    for (Eigen::Index t = 0; t < T; ++t) {
        Eigen::Index row = 0;
        for (std::size_t c = 1; c < header.size(); ++c) {
            double v = rows[static_cast<std::size_t>(t)][c - 1];
            if (c == target_col) {
                panel.y(t) = v;
            } else {
                panel.x(row++, t) = v;
            }
        }
    }
    panel.validate();
    result.rows_dropped = dropped;
    return result;
}

void write_csv(const PanelData& panel, const std::filesystem::path& path, char delimiter) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write file: " + path.string());
    out << panel.label_header;
    for (const auto& name : panel.series_names) out << delimiter << name;
    out << delimiter << panel.target_name << '\n';
    for (Eigen::Index t = 0; t < panel.num_periods(); ++t) {
        out << panel.time_labels[static_cast<std::size_t>(t)];
        for (Eigen::Index i = 0; i < panel.num_series(); ++i) out << delimiter << format_double(panel.x(i, t));
        out << delimiter << format_double(panel.y(t)) << '\n';
    }
}

std::pair<Eigen::MatrixXd, StandardizationRecord> standardize_rows(const Eigen::MatrixXd& x, IndexRange window,
                                                                   const std::vector<std::string>* names) {
    if (window.begin < 0 || window.end > x.cols() || window.size() < 1)
        throw ConfigError("standardization window is empty or out of range");
    if (window.size() < 2) throw ConfigError("standardization window needs at least 2 time points");

    StandardizationRecord record;
    record.window = window;
    const auto block = x.middleCols(window.begin, window.size());
    record.mean = block.rowwise().mean();
    record.sd.resize(x.rows());
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
        double ss = (block.row(i).array() - record.mean(i)).square().sum();
        double sd = std::sqrt(ss / static_cast<double>(window.size() - 1));
        if (!(sd > 0.0)) {
            std::string name = names ? (*names)[static_cast<std::size_t>(i)] : "#" + std::to_string(i);
            throw DataError("zero variance over the standardization window in series '" + name + "'");
        }
        record.sd(i) = sd;
    }
    Eigen::MatrixXd z = (x.colwise() - record.mean).array().colwise() / record.sd.array();
    return {std::move(z), std::move(record)};
}

std::pair<PanelData, StandardizationRecord> standardize(const PanelData& panel, IndexRange window) {
    auto [z, record] = standardize_rows(panel.x, window, &panel.series_names);
    PanelData out = panel;
    out.x = std::move(z);
    return {std::move(out), std::move(record)};
}

Eigen::MatrixXd invert_standardization(const Eigen::MatrixXd& z, const StandardizationRecord& record) {
    if (z.rows() != record.mean.size()) throw ConfigError("standardization record does not match the panel");
    Eigen::MatrixXd x = (z.array().colwise() * record.sd.array()).matrix();
    x.colwise() += record.mean;
    return x;
}

Eigen::VectorXd make_h_step_target(const Eigen::VectorXd& y, int h) {
    if (h < 1) throw ConfigError("forecast horizon must be positive");
    if (h >= y.size()) {
        throw ConfigError("forecast horizon " + std::to_string(h) + " needs more than " + std::to_string(h) +
                          " observations, found " + std::to_string(y.size()));
    }
    const Eigen::Index n = y.size() - h;
    Eigen::VectorXd out(n);
    for (Eigen::Index t = 0; t < n; ++t) out(t) = y.segment(t + 1, h).sum() / static_cast<double>(h);
    return out;
}

}  // namespace sufcast
