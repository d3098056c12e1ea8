#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace whlab {

inline constexpr const char* version_string = "0.1.0";

// Invalid or missing user configuration; the message names the field.
class ConfigError : public std::invalid_argument {
  public:
    using std::invalid_argument::invalid_argument;
};

struct ConfigValue {
    enum class Kind { boolean, integer, real, text, numbers, pairs };
    Kind kind = Kind::integer;
    bool b = false;
    long long i = 0;
    double d = 0;
    std::string s;
    std::vector<double> numbers;
    std::vector<std::array<double, 2>> pairs;
};

using ConfigMap = std::map<std::string, ConfigValue>;

// Flat TOML subset: `key = value` lines with # comments; values are strings,
// booleans, numbers, number arrays, or arrays of two-number pairs.
ConfigMap parse_config_text(const std::string& text);
ConfigMap load_config_file(const std::string& path);

// Canonical serialization: sorted keys, 17 significant digits. Hashing this
// text names the run directory, so identical resolved configs share it.
std::string serialize_config(const ConfigMap& cfg);
uint64_t config_hash(const std::string& canonical_text);

struct ExperimentInfo {
    std::string name;
    std::string what;             // one line on the series the experiment produces
    std::string reference_scale;  // parameters of the full-size study this scales down
    std::vector<std::pair<std::string, ConfigValue>> defaults;  // applied to missing keys
};

const std::vector<ExperimentInfo>& experiment_registry();
const ExperimentInfo* find_experiment(const std::string& name);

// Registry defaults fill missing keys, the seed override lands in "seed", and
// every field is validated. "N" is always required; unknown keys are errors.
ConfigMap resolve_config(const std::string& experiment, ConfigMap user,
                         std::optional<uint64_t> seed_override = std::nullopt);

struct ResultTable {
    using Cell = std::variant<long long, double, std::string>;
    std::vector<std::string> columns;
    std::vector<std::vector<Cell>> rows;
};

struct RunOptions {
    std::string out_dir = "out";
    std::optional<uint64_t> seed;  // overrides the config's seed
    int threads = 0;               // <= 0 means hardware concurrency
};

struct RunPaths {
    std::string dir;
    std::string series_csv;
    std::string summary_json;
    std::string resolved_toml;
};

// Resolves the config, runs the experiment, and writes series.csv,
// summary.json, and config.resolved.toml under <out>/<experiment>/<hash>/.
// Outputs are byte-identical for identical resolved configs; on failure the
// run directory is removed before the exception escapes.
RunPaths run_experiment(const std::string& experiment, const ConfigMap& user_config,
                        const RunOptions& opt = {});
RunPaths run_experiment_file(const std::string& experiment, const std::string& config_path,
                             const RunOptions& opt = {});

}  // namespace whlab
