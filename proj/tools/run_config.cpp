#include "run_config.hpp"

#include <cstdlib>
#include <fstream>
#include <limits>
#include <sstream>

#include "sufcast/error.hpp"

namespace sufcast::cli {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

// Integer keys that also take the value "auto".
bool auto_capable(const std::string& key) { return key == "K" || key == "L"; }

}  // namespace

RunConfig::RunConfig(ordered_json defaults) : defaults_(std::move(defaults)), values_(defaults_) {}

std::vector<std::string> RunConfig::keys() const {
    std::vector<std::string> out;
    for (auto it = defaults_.begin(); it != defaults_.end(); ++it) out.push_back(it.key());
    return out;
}

void RunConfig::merge_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path.string());
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError("config file " + path.string() + " is not valid JSON: " + e.what());
    }
    merge_json(j, path.string());
}

void RunConfig::merge_json(const json& j, const std::string& origin) {
    if (!j.is_object()) throw ConfigError(origin + ": config must be a JSON object");
    for (auto it = j.begin(); it != j.end(); ++it) assign(it.key(), it.value(), origin);
}

void RunConfig::assign(const std::string& key, const json& value, const std::string& origin) {
    if (!defaults_.contains(key)) throw ConfigError(origin + ": unknown config key '" + key + "'");
    const auto& def = defaults_[key];
    const bool ok = (def.is_number_integer() && (value.is_number_integer() || (auto_capable(key) && value == "auto"))) ||
                    (def.is_number_float() && value.is_number()) || (def.is_boolean() && value.is_boolean()) ||
                    (def.is_string() && value.is_string()) || (auto_capable(key) && value.is_number_integer());
    if (!ok) throw ConfigError(origin + ": wrong type for '" + key + "'");
    values_[key] = value;
}

void RunConfig::set_from_string(const std::string& key, const std::string& raw) {
    if (!defaults_.contains(key)) throw ConfigError("unknown option '" + key + "'");
    const auto& def = defaults_[key];
    const std::string origin = "--" + key;
    if (auto_capable(key) && raw == "auto") {
        assign(key, "auto", origin);
        return;
    }
    try {
        std::size_t used = 0;
        if (def.is_number_integer() || (auto_capable(key) && def.is_string())) {
            const long long v = std::stoll(raw, &used);
            if (used != raw.size()) throw std::invalid_argument(raw);
            assign(key, v, origin);
        } else if (def.is_number_float()) {
            const double v = std::stod(raw, &used);
            if (used != raw.size()) throw std::invalid_argument(raw);
            assign(key, v, origin);
        } else if (def.is_boolean()) {
            if (raw == "true" || raw == "1") assign(key, true, origin);
            else if (raw == "false" || raw == "0") assign(key, false, origin);
            else throw std::invalid_argument(raw);
        } else {
            assign(key, raw, origin);
        }
    } catch (const std::invalid_argument&) {
        throw ConfigError(origin + ": cannot parse '" + raw + "'");
    } catch (const std::out_of_range&) {
        throw ConfigError(origin + ": value out of range '" + raw + "'");
    }
}

const ordered_json& RunConfig::at(const std::string& key) const {
    if (!values_.contains(key)) throw ConfigError("unknown config key '" + key + "'");
    return values_[key];
}

bool RunConfig::is_auto(const std::string& key) const { return at(key) == "auto"; }

int RunConfig::get_int(const std::string& key) const {
    const auto& v = at(key);
    if (!v.is_number_integer()) throw ConfigError("'" + key + "' must be an integer");
    const auto n = v.get<long long>();
    if (n < std::numeric_limits<int>::min() || n > std::numeric_limits<int>::max())
        throw ConfigError("'" + key + "' is out of range");
    return static_cast<int>(n);
}

double RunConfig::get_double(const std::string& key) const { return at(key).get<double>(); }
bool RunConfig::get_bool(const std::string& key) const { return at(key).get<bool>(); }
std::string RunConfig::get_string(const std::string& key) const { return at(key).get<std::string>(); }

std::vector<std::string> RunConfig::get_list(const std::string& key) const {
    std::vector<std::string> out;
    std::stringstream ss(get_string(key));
    std::string item;
    while (std::getline(ss, item, ',')) {
        const auto b = item.find_first_not_of(" \t");
        if (b == std::string::npos) continue;
        out.push_back(item.substr(b, item.find_last_not_of(" \t") - b + 1));
    }
    return out;
}

void RunConfig::write(const std::filesystem::path& path) const {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write " + path.string());
    out << values_.dump(2) << '\n';
}

std::string default_output_dir() {
    const char* env = std::getenv("SUFCAST_OUTPUT_DIR");
    return env && *env ? env : "sufcast-output";
}

}  // namespace sufcast::cli
