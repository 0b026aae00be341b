#pragma once

#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "photon_lattice/disorder.hpp"
#include "photon_lattice/ensemble.hpp"
#include "photon_lattice/integrator.hpp"
#include "photon_lattice/model.hpp"
#include "photon_lattice/scaling.hpp"
#include "photon_lattice/stability.hpp"

namespace photon_lattice {

/// Raised for unknown keys and malformed values; the CLI maps it to exit 1.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct ConfigKey {
    const char* name;           // canonical key, underscores
    const char* default_value;  // textual default, "" when unset
    const char* help;
};

/// Every key accepted in config files and as --flags (hyphenated).
const std::vector<ConfigKey>& config_keys();

/// Maps hyphens to underscores and checks the key exists.
std::string canonical_key(const std::string& key);

/// Flat `key = value` settings. Later layers override earlier ones:
/// defaults, then a config file, then command-line flags.
class Settings {
public:
    static Settings defaults();

    void set(const std::string& key, const std::string& value);
    const std::string& get(const std::string& key) const;
    bool has_value(const std::string& key) const { return !get(key).empty(); }

    double get_double(const std::string& key) const;
    int get_int(const std::string& key) const;
    std::uint64_t get_u64(const std::string& key) const;
    bool get_bool(const std::string& key) const;
    std::vector<double> get_doubles(const std::string& key) const;
    std::vector<int> get_ints(const std::string& key) const;

    const std::map<std::string, std::string>& values() const { return values_; }

private:
    std::map<std::string, std::string> values_;
};

/// Reads `key = value` lines. Blank lines and lines starting with '#' are
/// ignored. Throws ConfigError naming the offending key or line.
std::map<std::string, std::string> load_config(const std::string& path);

/// `start:stop:step` (inclusive) or a comma-separated list.
std::vector<double> parse_real_grid(const std::string& text);
std::vector<int> parse_int_grid(const std::string& text);

ChainParams chain_params(const Settings& s);
IntegratorConfig integrator_config(const Settings& s);
EnsembleConfig ensemble_config(const Settings& s);
ThresholdConfig threshold_config(const Settings& s);
DisorderConfig disorder_config(const Settings& s);
ClassifyConfig classify_config(const Settings& s);

}  // namespace photon_lattice
