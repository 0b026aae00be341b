#include "photon_lattice/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace photon_lattice {

namespace {

std::string trim(const std::string& s) {
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string::npos) return "";
    const auto last = s.find_last_not_of(" \t\r\n");
    return s.substr(first, last - first + 1);
}

double parse_double(const std::string& key, const std::string& text) {
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(text, &used);
    } catch (const std::exception&) {
        throw ConfigError("malformed value for '" + key + "': '" + text + "'");
    }
    if (used != text.size() || !std::isfinite(v)) throw ConfigError("malformed value for '" + key + "': '" + text + "'");
    return v;
}

long long parse_integer(const std::string& key, const std::string& text) {
    std::size_t used = 0;
    long long v = 0;
    try {
        v = std::stoll(text, &used);
    } catch (const std::exception&) {
        throw ConfigError("malformed integer for '" + key + "': '" + text + "'");
    }
    if (used != text.size()) throw ConfigError("malformed integer for '" + key + "': '" + text + "'");
    return v;
}

std::vector<std::string> split(const std::string& text, char sep) {
    std::vector<std::string> parts;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, sep)) parts.push_back(trim(item));
    return parts;
}

}  // namespace

const std::vector<ConfigKey>& config_keys() {
    static const std::vector<ConfigKey> keys = {
        {"sites", "20", "chain length N, or a grid start:stop:step / a,b,c"},
        {"u", "1", "on-site nonlinearity U (units of J)"},
        {"p", "10", "drive amplitude p (units of J)"},
        {"kappa", "1", "boundary loss rate kappa (units of J)"},
        {"kappa_bulk", "0", "bulk loss rate (units of J)"},
        {"delta", "0", "drive detuning (units of J)"},
        {"t_end", "2000", "integration horizon for simulate (1/J)"},
        {"rel_tol", "1e-8", "integrator relative tolerance"},
        {"abs_tol", "1e-10", "integrator absolute tolerance"},
        {"initial_step", "1e-3", "first trial step (1/J)"},
        {"max_step", "0.1", "largest step (1/J)"},
        {"sample_interval", "0.1", "output sampling interval (1/J)"},
        {"ic", "random", "initial condition: zero|random"},
        {"ic_radius", "1", "radius of the random initial-condition disc"},
        {"realizations", "16", "initial conditions per ensemble"},
        {"seed", "0", "master seed"},
        {"transient", "500", "transient discarded before averaging (1/J)"},
        {"window", "1500", "averaging window (1/J)"},
        {"sigma_star", "0.05", "variance threshold defining N_t"},
        {"refine", "false", "bisect the threshold to +-1 site"},
        {"sustained", "2", "sub-threshold points needed for a collapse"},
        {"axis", "", "threshold scaling axis: u|p|kappa_bulk"},
        {"values", "", "axis values for threshold scaling"},
        {"w", "0", "disorder half-width W (units of J)"},
        {"configs", "128", "disorder configurations"},
        {"u_values", "", "U grid for the phase diagram"},
        {"w_values", "", "W grid for the phase diagram"},
        {"bins", "40", "histogram bins per axis (simulate)"},
        {"full_field", "false", "also write every site at every sample (simulate)"},
        {"stop_on_failure", "true", "stop the stability scan at the first Newton failure"},
        {"ballistic_exponent", "0.05", "|b| below this classifies as ballistic"},
        {"min_r2", "0.9", "minimum r^2 for a decay classification"},
        {"r2_margin", "0.05", "r^2 margin between power and exponential fits"},
        {"out", ".", "output directory"},
    };
    return keys;
}

std::string canonical_key(const std::string& key) {
    std::string k = trim(key);
    std::replace(k.begin(), k.end(), '-', '_');
    const auto& keys = config_keys();
    const bool known = std::any_of(keys.begin(), keys.end(), [&](const ConfigKey& c) { return k == c.name; });
    if (!known) throw ConfigError("unknown configuration key '" + trim(key) + "'");
    return k;
}

Settings Settings::defaults() {
    Settings s;
    for (const auto& k : config_keys()) s.values_[k.name] = k.default_value;
    return s;
}

void Settings::set(const std::string& key, const std::string& value) { values_[canonical_key(key)] = trim(value); }

const std::string& Settings::get(const std::string& key) const {
    const auto it = values_.find(canonical_key(key));
    if (it == values_.end()) throw ConfigError("configuration key '" + key + "' has no value");
    return it->second;
}

double Settings::get_double(const std::string& key) const { return parse_double(key, get(key)); }

int Settings::get_int(const std::string& key) const {
    const long long v = parse_integer(key, get(key));
    if (v < -2147483647LL || v > 2147483647LL) throw ConfigError("value out of range for '" + key + "'");
    return static_cast<int>(v);
}

std::uint64_t Settings::get_u64(const std::string& key) const {
    const std::string& text = get(key);
    if (text.empty() || text.front() == '-') throw ConfigError("malformed unsigned value for '" + key + "'");
    std::size_t used = 0;
    unsigned long long v = 0;
    try {
        v = std::stoull(text, &used);
    } catch (const std::exception&) {
        throw ConfigError("malformed unsigned value for '" + key + "': '" + text + "'");
    }
    if (used != text.size()) throw ConfigError("malformed unsigned value for '" + key + "': '" + text + "'");
    return v;
}

bool Settings::get_bool(const std::string& key) const {
    const std::string& v = get(key);
    if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
    if (v == "false" || v == "0" || v == "no" || v == "off") return false;
    throw ConfigError("malformed boolean for '" + key + "': '" + v + "'");
}

std::vector<double> Settings::get_doubles(const std::string& key) const {
    try {
        return parse_real_grid(get(key));
    } catch (const ConfigError& e) {
        throw ConfigError(std::string(e.what()) + " (key '" + key + "')");
    }
}

std::vector<int> Settings::get_ints(const std::string& key) const {
    try {
        return parse_int_grid(get(key));
    } catch (const ConfigError& e) {
        throw ConfigError(std::string(e.what()) + " (key '" + key + "')");
    }
}

std::map<std::string, std::string> load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config file '" + path + "'");
    std::map<std::string, std::string> out;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string t = trim(line);
        if (t.empty() || t.front() == '#') continue;
        const auto eq = t.find('=');
        if (eq == std::string::npos) {
            throw ConfigError(path + ":" + std::to_string(lineno) + ": expected 'key = value'");
        }
        const std::string key = canonical_key(t.substr(0, eq));
        const std::string value = trim(t.substr(eq + 1));
        if (value.empty()) throw ConfigError(path + ":" + std::to_string(lineno) + ": empty value for '" + key + "'");
        out[key] = value;
    }
    return out;
}

std::vector<double> parse_real_grid(const std::string& text) {
    const std::string t = trim(text);
    if (t.empty()) throw ConfigError("empty grid");
    std::vector<double> out;
    if (t.find(':') != std::string::npos) {
        const auto parts = split(t, ':');
        if (parts.size() != 3) throw ConfigError("range must be start:stop:step, got '" + t + "'");
        const double start = parse_double("grid", parts[0]);
        const double stop = parse_double("grid", parts[1]);
        const double step = parse_double("grid", parts[2]);
        if (!(step > 0.0) || stop < start) throw ConfigError("range '" + t + "' needs step > 0 and stop >= start");
        const auto count = static_cast<long long>(std::floor((stop - start) / step + 1e-9));
        if (count > 1000000) throw ConfigError("range '" + t + "' has too many points");
        for (long long k = 0; k <= count; ++k) out.push_back(start + static_cast<double>(k) * step);
        return out;
    }
    for (const auto& part : split(t, ',')) out.push_back(parse_double("grid", part));
    return out;
}

std::vector<int> parse_int_grid(const std::string& text) {
    std::vector<int> out;
    for (double v : parse_real_grid(text)) {
        if (v != std::floor(v) || std::abs(v) > 1e9) throw ConfigError("expected integers in '" + text + "'");
        out.push_back(static_cast<int>(v));
    }
    return out;
}

ChainParams chain_params(const Settings& s) {
    ChainParams p;
    const auto sites = s.get_ints("sites");
    p.n_sites = sites.front();
    p.hopping = 1.0;
    p.nonlinearity = s.get_double("u");
    p.drive_amplitude = s.get_double("p");
    p.detuning = s.get_double("delta");
    p.kappa_boundary = s.get_double("kappa");
    p.kappa_bulk = s.get_double("kappa_bulk");
    try {
        p.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    return p;
}

IntegratorConfig integrator_config(const Settings& s) {
    IntegratorConfig c;
    c.rel_tol = s.get_double("rel_tol");
    c.abs_tol = s.get_double("abs_tol");
    c.initial_step = s.get_double("initial_step");
    c.max_step = s.get_double("max_step");
    c.sample_interval = s.get_double("sample_interval");
    c.t_end = s.get_double("t_end");
    c.record_full_field = s.get_bool("full_field");
    try {
        c.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    return c;
}

EnsembleConfig ensemble_config(const Settings& s) {
    EnsembleConfig e;
    e.n_realizations = s.get_int("realizations");
    e.master_seed = s.get_u64("seed");
    try {
        e.ic_mode = parse_ic_mode(s.get("ic"));
    } catch (const std::invalid_argument& err) {
        throw ConfigError(err.what());
    }
    e.ic_radius = s.get_double("ic_radius");
    e.transient_time = s.get_double("transient");
    e.window_time = s.get_double("window");
    try {
        e.validate();
    } catch (const std::invalid_argument& err) {
        throw ConfigError(err.what());
    }
    return e;
}

ThresholdConfig threshold_config(const Settings& s) {
    ThresholdConfig t;
    t.sigma_star = s.get_double("sigma_star");
    t.refine = s.get_bool("refine");
    t.sustained_points = s.get_int("sustained");
    if (!(t.sigma_star > 0.0)) throw ConfigError("sigma_star must be > 0");
    if (t.sustained_points < 1) throw ConfigError("sustained must be >= 1");
    return t;
}

DisorderConfig disorder_config(const Settings& s) {
    DisorderConfig d;
    d.width = s.get_double("w");
    d.n_configs = s.get_int("configs");
    d.master_seed = s.get_u64("seed");
    try {
        d.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    return d;
}

ClassifyConfig classify_config(const Settings& s) {
    ClassifyConfig c;
    c.ballistic_exponent = s.get_double("ballistic_exponent");
    c.min_r_squared = s.get_double("min_r2");
    c.margin = s.get_double("r2_margin");
    return c;
}

}  // namespace photon_lattice
