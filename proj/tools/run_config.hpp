#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace sufcast::cli {

/// Flat key/value configuration. Keys are fixed by the defaults; a config file
/// may only set known keys and command-line flags override the file.
class RunConfig {
public:
    explicit RunConfig(nlohmann::ordered_json defaults);

    const nlohmann::ordered_json& values() const { return values_; }
    std::vector<std::string> keys() const;

    void merge_file(const std::filesystem::path& path);
    void merge_json(const nlohmann::json& j, const std::string& origin);
    /// Parses `raw` according to the type of the key's default value. Integer
    /// keys listed in `auto_keys` also accept "auto".
    void set_from_string(const std::string& key, const std::string& raw);

    bool is_auto(const std::string& key) const;
    int get_int(const std::string& key) const;
    double get_double(const std::string& key) const;
    bool get_bool(const std::string& key) const;
    std::string get_string(const std::string& key) const;
    std::vector<std::string> get_list(const std::string& key) const;

    void write(const std::filesystem::path& path) const;

private:
    void assign(const std::string& key, const nlohmann::json& value, const std::string& origin);
    const nlohmann::ordered_json& at(const std::string& key) const;

    nlohmann::ordered_json defaults_;
    nlohmann::ordered_json values_;
};

/// Default output directory: $SUFCAST_OUTPUT_DIR, else "sufcast-output".
std::string default_output_dir();

/// Entry point shared by the executable and the tests. Returns the exit code.
int run(int argc, const char* const* argv);

}  // namespace sufcast::cli
