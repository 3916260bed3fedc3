#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "socnav/evaluator.hpp"
#include "socnav/trainer.hpp"
#include "socnav/uncertainty.hpp"

namespace socnav {

struct ConfigKey {
    std::string section;
    std::string key;
    std::string default_value;
    std::string description;

    std::string dotted() const { return section + "." + key; }
};

/// Every recognized key with its default.
const std::vector<ConfigKey>& config_registry();

/// Environment variable overriding section.key: SOCNAV_<SECTION>__<KEY>.
std::string config_env_name(const ConfigKey& key);

/// Flat sectioned configuration. Precedence: defaults < file < environment < overrides.
class Config {
public:
    /// Registry defaults.
    Config();

    /// INI-style file with [section] headers and key = value lines.
    /// Throws ConfigError on unknown sections/keys or unreadable files.
    void merge_file(const std::filesystem::path& path);
    void merge_stream(std::istream& in, const std::string& origin = "<stream>");
    void merge_environment();
    /// "section.key=value"; throws ConfigError when malformed or unknown.
    void apply_override(const std::string& assignment);
    void set(const std::string& dotted, const std::string& value);

    const std::string& get(const std::string& dotted) const;
    double get_double(const std::string& dotted) const;
    int get_int(const std::string& dotted) const;
    std::uint64_t get_u64(const std::string& dotted) const;
    bool get_bool(const std::string& dotted) const;
    std::vector<double> get_doubles(const std::string& dotted) const;
    std::vector<int> get_ints(const std::string& dotted) const;

    /// Fully resolved config in file syntax, sections and keys in registry order.
    void write(std::ostream& out) const;

    /// defaults, then the file (if any), then the environment, then overrides.
    static Config resolve(const std::optional<std::filesystem::path>& file, const std::vector<std::string>& overrides);

private:
    std::map<std::string, std::string> values_;
};

SimConfig sim_config(const Config& c);
CrowdSpec crowd_spec(const Config& c);
RewardParams reward_params(const Config& c);
TrainerConfig trainer_config(const Config& c);
UncertaintyDataConfig uncertainty_data_config(const Config& c);
UncertaintyTrainConfig uncertainty_train_config(const Config& c);
EstimatorConfig estimator_config(const Config& c);
BenchmarkConfig benchmark_config(const Config& c);

}  // namespace socnav
