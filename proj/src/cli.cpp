#include "photon_lattice/cli.hpp"

#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "photon_lattice/config.hpp"
#include "photon_lattice/disorder.hpp"
#include "photon_lattice/ensemble.hpp"
#include "photon_lattice/integrator.hpp"
#include "photon_lattice/io.hpp"
#include "photon_lattice/scaling.hpp"
#include "photon_lattice/stability.hpp"

#ifndef PHOTON_LATTICE_VERSION
#define PHOTON_LATTICE_VERSION "0.0.0"
#endif

namespace photon_lattice::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

/// A run finished and wrote its outputs, but part of it failed numerically.
class PartialFailure : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

std::string utc_now() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    std::tm tm{};
    gmtime_r(&t, &tm);
    std::ostringstream os;
    os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
    return os.str();
}

struct RunContext {
    std::string command;
    Settings settings;
    fs::path out_dir;
    std::vector<std::string> outputs;
    long long failed_realizations = 0;
    long long nonconverged_newton = 0;
    std::ostream& log;

    io::CsvWriter csv(const std::string& name, std::string_view header) {
        outputs.push_back(name);
        return io::CsvWriter(out_dir / name, header);
    }
};

std::string hyphenate(std::string key) {
    for (auto& c : key) {
        if (c == '_') c = '-';
    }
    return key;
}

int single_length(const Settings& s) {
    const auto sites = s.get_ints("sites");
    if (sites.size() != 1) throw ConfigError("this command needs a single chain length in 'sites'");
    return sites.front();
}

std::vector<int> length_grid(const Settings& s) {
    auto grid = s.get_ints("sites");
    for (std::size_t i = 1; i < grid.size(); ++i) {
        if (grid[i] <= grid[i - 1]) throw ConfigError("'sites' must be strictly increasing");
    }
    if (grid.front() < 1) throw ConfigError("'sites' entries must be >= 1");
    return grid;
}

std::vector<double> required_values(const Settings& s, const std::string& key) {
    if (!s.has_value(key)) throw ConfigError("missing required '" + key + "'");
    return s.get_doubles(key);
}

void write_realizations(RunContext& ctx, const std::string& name, const LengthSweepResult& sweep) {
    auto w = ctx.csv(name, io::kRealizationHeader);
    for (const auto& e : sweep.entries) {
        if (!e.stats) continue;
        for (const auto& r : e.stats->per_realization) {
            w.cell(e.n_sites).cell(r.index, true).cell(r.seed, true).cell(r.time_mean).cell(r.time_variance);
            w.cell(r.n_samples).end_row();
        }
    }
    w.close();
}

void write_fit(RunContext& ctx, const std::string& name, const DecayClassification& cls, std::optional<int> n_min) {
    auto w = ctx.csv(name, io::kFitHeader);
    for (const auto* fit : {&cls.power, &cls.exponential}) {
        if (!*fit) continue;
        const ScalingFit& f = **fit;
        w.cell(to_string(f.model)).cell(f.exponent_or_rate).cell(f.prefactor).cell(f.r_squared).cell(f.n_points);
        w.cell(n_min ? std::to_string(*n_min) : std::string()).cell(to_string(cls.decay)).end_row();
    }
    w.close();
}

int cmd_simulate(RunContext& ctx) {
    const Settings& s = ctx.settings;
    ChainParams params = chain_params(s).with_sites(single_length(s));
    params.validate();
    const IntegratorConfig integ = integrator_config(s);
    const EnsembleConfig ens = ensemble_config(s);
    const int bins = s.get_int("bins");
    if (bins < 2) throw ConfigError("'bins' must be >= 2");

    const FieldState ic = draw_initial_condition(ens.ic_mode, ens.master_seed, 0, params.n_sites, ens.ic_radius);
    std::string descriptor = to_string(ens.ic_mode);
    if (ens.ic_mode == IcMode::Random) {
        descriptor += "(seed=" + std::to_string(ens.master_seed) + ",radius=" + io::format_number(ens.ic_radius) + ")";
    }
    const Trajectory traj = integrate(params, ic, integ, descriptor);

    auto tw = ctx.csv("trajectory.csv", io::kTrajectoryHeader);
    for (std::size_t k = 0; k < traj.sample_times.size(); ++k) {
        const Complex a = traj.alpha_last[k];
        tw.cell(traj.sample_times[k]).cell(a.real()).cell(a.imag()).cell(std::abs(a)).end_row();
    }
    tw.close();

    if (integ.record_full_field) {
        auto fw = ctx.csv("field.csv", io::kFieldHeader);
        for (std::size_t k = 0; k < traj.full_field.size(); ++k) {
            for (std::size_t j = 0; j < traj.full_field[k].size(); ++j) {
                const Complex a = traj.full_field[k][j];
                fw.cell(traj.sample_times[k]).cell(static_cast<int>(j + 1)).cell(a.real()).cell(a.imag()).end_row();
            }
        }
        fw.close();
    }

    // Late window: the ensemble transient when it fits, else the second half.
    const double t_start = ens.transient_time < integ.t_end ? ens.transient_time : 0.5 * integ.t_end;
    const WindowStats ws = window_stats(traj, t_start, integ.t_end - t_start);
    auto sw = ctx.csv("summary.csv", io::kSummaryHeader);
    sw.cell(t_start).cell(integ.t_end).cell(ws.mean).cell(std::sqrt(ws.variance)).cell(ws.n_samples).end_row();
    sw.close();

    const QuadratureHistogram h = quadrature_histogram(traj, bins, t_start);
    auto hw = ctx.csv("histogram.csv", io::kHistogramHeader);
    const double dx = (h.x_max - h.x_min) / bins;
    const double dp = (h.p_max - h.p_min) / bins;
    for (int ix = 0; ix < bins; ++ix) {
        for (int ip = 0; ip < bins; ++ip) {
            hw.cell(ix).cell(ip).cell(h.x_min + (ix + 0.5) * dx).cell(h.p_min + (ip + 0.5) * dp);
            hw.cell(h.at(ix, ip)).end_row();
        }
    }
    hw.close();

    ctx.log << "N=" << params.n_sites << " window (" << io::format_number(t_start) << ", "
            << io::format_number(integ.t_end) << "]: <|alpha_N|>=" << io::format_number(ws.mean)
            << " sigma=" << io::format_number(std::sqrt(ws.variance)) << '\n';
    return kExitOk;
}

int cmd_sweep(RunContext& ctx) {
    const Settings& s = ctx.settings;
    const auto grid = length_grid(s);
    const ChainParams base = chain_params(s);
    const EnsembleConfig ens = ensemble_config(s);
    const IntegratorConfig integ = integrator_config(s);
    const ThresholdConfig tcfg = threshold_config(s);

    const LengthSweepResult sweep = length_sweep(base, grid, ens, integ);

    int failed_lengths = 0;
    auto w = ctx.csv("sweep.csv", io::kSweepHeader);
    for (const auto& e : sweep.entries) {
        w.cell(e.n_sites);
        if (e.stats) {
            w.cell(e.stats->mean_abs).cell(e.stats->sigma).cell(ens.n_realizations).cell(e.stats->n_failed);
            ctx.failed_realizations += e.stats->n_failed;
        } else {
            w.cell(std::string_view()).cell(std::string_view()).cell(ens.n_realizations).cell(ens.n_realizations);
            ctx.failed_realizations += ens.n_realizations;
            ++failed_lengths;
        }
        w.end_row();
    }
    w.close();
    write_realizations(ctx, "realizations.csv", sweep);

    const ThresholdReport thr = threshold_from_sweep(sweep, tcfg);
    const auto pts = mean_abs_points(sweep, thr.n_t);
    write_fit(ctx, "sweep_fit.csv", classify_decay(pts, classify_config(s)), thr.n_t);

    ctx.log << "threshold: " << (thr.n_t ? std::to_string(*thr.n_t) : std::string("none in range")) << '\n';
    if (failed_lengths > 0) {
        throw PartialFailure(std::to_string(failed_lengths) + " chain length(s) had every realization fail");
    }
    return kExitOk;
}

void write_threshold_rows(io::CsvWriter& summary, io::CsvWriter& scan, const std::string& axis,
                          const std::string& value, const ThresholdReport& r) {
    summary.cell(axis).cell(value);
    summary.cell(r.n_t ? std::to_string(*r.n_t) : std::string());
    summary.cell(r.n_t_end ? std::to_string(*r.n_t_end) : std::string());
    summary.cell(r.sigma_star).end_row();
    for (const auto& [n, sigma] : r.sigma_by_n) scan.cell(axis).cell(value).cell(n).cell(sigma).end_row();
}

int cmd_threshold(RunContext& ctx, bool require_axis) {
    const Settings& s = ctx.settings;
    const auto grid = length_grid(s);
    const ChainParams base = chain_params(s);
    const EnsembleConfig ens = ensemble_config(s);
    const IntegratorConfig integ = integrator_config(s);
    const ThresholdConfig tcfg = threshold_config(s);

    if (require_axis && !s.has_value("axis")) throw ConfigError("missing required 'axis'");

    auto summary = ctx.csv("threshold.csv", io::kThresholdHeader);
    auto scan = ctx.csv("threshold_scan.csv", io::kThresholdScanHeader);
    if (!s.has_value("axis")) {
        const ThresholdReport r = detect_threshold(base, grid, ens, integ, tcfg);
        write_threshold_rows(summary, scan, "none", "", r);
        summary.close();
        scan.close();
        ctx.log << "N_t: " << (r.n_t ? std::to_string(*r.n_t) : std::string("none in range"));
        if (r.n_t_end) ctx.log << ", N_t_end: " << *r.n_t_end;
        ctx.log << '\n';
        return kExitOk;
    }

    ScanAxis axis{};
    try {
        axis = parse_axis(s.get("axis"));
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    const auto values = required_values(s, "values");
    const ThresholdScalingResult res = threshold_scaling(base, axis, values, grid, ens, integ, tcfg);
    for (const auto& [v, r] : res.reports) {
        write_threshold_rows(summary, scan, to_string(axis), io::format_number(v), r);
        ctx.log << to_string(axis) << "=" << io::format_number(v) << " N_t: "
                << (r.n_t ? std::to_string(*r.n_t) : std::string("none in range")) << '\n';
    }
    summary.close();
    scan.close();

    auto fw = ctx.csv("threshold_fit.csv", io::kThresholdFitHeader);
    if (res.fit) {
        fw.cell(to_string(axis)).cell(res.fit->exponent_or_rate).cell(res.fit->prefactor).cell(res.fit->r_squared);
        fw.cell(res.fit->n_points).end_row();
        ctx.log << "fit N_t ~ " << to_string(axis) << "^" << io::format_number(res.fit->exponent_or_rate)
                << " r2=" << io::format_number(res.fit->r_squared) << '\n';
    }
    fw.close();
    return kExitOk;
}

int cmd_stability(RunContext& ctx) {
    const Settings& s = ctx.settings;
    const auto grid = length_grid(s);
    const ChainParams base = chain_params(s);
    StabilityScanOptions opts;
    opts.stop_on_failure = s.get_bool("stop_on_failure");

    const auto scan = stability_scan(base, grid, opts);
    auto w = ctx.csv("stability.csv", io::kStabilityHeader);
    auto ew = ctx.csv("spectrum.csv", io::kSpectrumHeader);
    int converged = 0;
    for (const auto& e : scan) {
        w.cell(e.n_sites).cell(e.steady.converged ? 1 : 0).cell(e.steady.residual_norm);
        w.cell(e.steady.newton_iterations);
        w.cell(e.spectrum ? std::optional<double>(e.spectrum->max_im) : std::nullopt).end_row();
        if (e.steady.converged) {
            ++converged;
        } else {
            ++ctx.nonconverged_newton;
        }
        if (!e.spectrum) continue;
        for (std::size_t k = 0; k < e.spectrum->eigenvalues.size(); ++k) {
            const Complex ev = e.spectrum->eigenvalues[k];
            ew.cell(e.n_sites).cell(static_cast<int>(k)).cell(ev.real()).cell(ev.imag()).end_row();
        }
    }
    w.close();
    ew.close();
    ctx.log << converged << " of " << grid.size() << " lengths converged\n";
    if (converged == 0) throw StabilityError("Newton failed at every chain length");
    return kExitOk;
}

int cmd_disorder(RunContext& ctx) {
    const Settings& s = ctx.settings;
    const auto grid = length_grid(s);
    const ChainParams base = chain_params(s);
    const EnsembleConfig ens = ensemble_config(s);
    const IntegratorConfig integ = integrator_config(s);
    const DisorderConfig dis = disorder_config(s);

    const DisorderedSweepResult res = disordered_sweep(base, grid, dis, ens, integ);
    int failed_lengths = 0;
    auto w = ctx.csv("disorder.csv", io::kDisorderHeader);
    auto cw = ctx.csv("disorder_configs.csv", io::kDisorderConfigHeader);
    for (const auto& e : res.entries) {
        w.cell(e.n_sites);
        if (e.stats) {
            w.cell(e.stats->mean_abs).cell(e.stats->sigma).cell(ens.n_realizations).cell(e.stats->n_failed);
            ctx.failed_realizations += e.stats->n_failed;
        } else {
            w.cell(std::string_view()).cell(std::string_view()).cell(ens.n_realizations).cell(std::string_view());
            ++failed_lengths;
        }
        w.cell(res.n_configs).cell(e.n_failed_configs);
        if (e.stats) {
            w.cell(e.median).cell(e.log_mean).cell(e.log_mean_std_error);
        } else {
            w.cell(std::string_view()).cell(std::string_view()).cell(std::string_view());
        }
        w.end_row();
        for (std::size_t c = 0; c < e.per_config_mean.size(); ++c) {
            cw.cell(e.n_sites).cell(static_cast<int>(c)).cell(e.per_config_mean[c]).end_row();
        }
    }
    w.close();
    cw.close();

    const PhaseCell cell = classify_sweep(base.nonlinearity, dis.width, res, classify_config(s));
    write_fit(ctx, "disorder_fit.csv", cell.decay, std::nullopt);
    ctx.log << "W=" << io::format_number(dis.width) << ": " << to_string(cell.decay.decay) << " ("
            << to_string(cell.classification) << ")\n";
    if (failed_lengths > 0) {
        throw PartialFailure(std::to_string(failed_lengths) + " chain length(s) had every configuration fail");
    }
    return kExitOk;
}

int cmd_phase_diagram(RunContext& ctx) {
    const Settings& s = ctx.settings;
    const auto grid = length_grid(s);
    const ChainParams base = chain_params(s);
    const EnsembleConfig ens = ensemble_config(s);
    const IntegratorConfig integ = integrator_config(s);
    const DisorderConfig dis = disorder_config(s);
    const auto us = required_values(s, "u_values");
    const auto ws = required_values(s, "w_values");

    const auto cells = phase_scan(base, us, ws, grid, dis, ens, integ, classify_config(s));
    auto w = ctx.csv("phase.csv", io::kPhaseHeader);
    for (const auto& c : cells) {
        w.cell(c.u).cell(c.w).cell(to_string(c.classification));
        const auto& pw = c.decay.power;
        const auto& ex = c.decay.exponential;
        w.cell(pw ? std::optional<double>(pw->exponent_or_rate) : std::nullopt);
        w.cell(pw ? std::optional<double>(pw->r_squared) : std::nullopt);
        w.cell(ex ? std::optional<double>(ex->exponent_or_rate) : std::nullopt);
        w.cell(ex ? std::optional<double>(ex->r_squared) : std::nullopt);
        w.cell(c.n_points).end_row();
    }
    w.close();
    ctx.log << cells.size() << " cells classified\n";
    return kExitOk;
}

void write_manifest(const RunContext& ctx, const std::string& started, int exit_code, const std::string& error) {
    json manifest;
    manifest["command"] = ctx.command;
    manifest["tool_version"] = version();
    manifest["master_seed"] = ctx.settings.get_u64("seed");
    json params = json::object();
    for (const auto& [k, v] : ctx.settings.values()) params[k] = v;
    manifest["parameters"] = params;
    manifest["started_at"] = started;
    manifest["finished_at"] = utc_now();
    manifest["outputs"] = ctx.outputs;
    manifest["warnings"] = {{"failed_realizations", ctx.failed_realizations},
                            {"nonconverged_newton", ctx.nonconverged_newton}};
    manifest["exit_code"] = exit_code;
    if (!error.empty()) manifest["error"] = error;
    std::ofstream out(ctx.out_dir / "manifest.json", std::ios::binary | std::ios::trunc);
    out << manifest.dump(2) << '\n';
    if (!out) throw std::runtime_error("cannot write manifest.json");
}

}  // namespace

const char* version() { return PHOTON_LATTICE_VERSION; }

std::map<std::string, std::string> load_manifest_parameters(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read manifest '" + path + "'");
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::exception& e) {
        throw ConfigError("malformed manifest '" + path + "': " + e.what());
    }
    if (!doc.contains("parameters") || !doc["parameters"].is_object()) {
        throw ConfigError("manifest '" + path + "' has no parameters object");
    }
    std::map<std::string, std::string> out;
    for (const auto& [k, v] : doc["parameters"].items()) {
        if (!v.is_string()) throw ConfigError("manifest parameter '" + k + "' is not a string");
        out[canonical_key(k)] = v.get<std::string>();
    }
    return out;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Mean-field dynamics of a boundary-driven dissipative photon chain"};
    app.name("photon-lattice");
    app.fallthrough();
    app.require_subcommand(1);

    std::string config_path;
    app.add_option("--config", config_path, "key = value file, or a manifest.json to replay");

    std::map<std::string, std::string> flag_values;
    std::map<std::string, CLI::Option*> flag_options;
    for (const auto& key : config_keys()) {
        std::string help = key.help;
        if (*key.default_value) help += " [default: " + std::string(key.default_value) + "]";
        auto* opt = app.add_option("--" + hyphenate(key.name), flag_values[key.name], help);
        flag_options[key.name] = opt;
    }

    const std::vector<std::pair<const char*, const char*>> commands = {
        {"simulate", "integrate one chain and write its trajectory"},
        {"sweep", "ensemble statistics over a grid of chain lengths"},
        {"threshold", "locate the chaotic threshold N_t (optionally along an axis)"},
        {"threshold-scaling", "N_t along --axis over --values, with a power-law fit"},
        {"stability", "steady states and Bogoliubov spectra along a length grid"},
        {"disorder", "configuration-averaged length sweep with on-site disorder"},
        {"phase-diagram", "classify transport over a (U, W) grid"},
    };
    for (const auto& [name, help] : commands) app.add_subcommand(name, help);

    std::vector<const char*> argv{"photon-lattice"};
    for (const auto& a : args) argv.push_back(a.c_str());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n\n" << app.help();
        return kExitUsage;
    }

    const std::string command = app.get_subcommands().front()->get_name();
    Settings settings = Settings::defaults();
    try {
        if (!config_path.empty()) {
            const auto file = fs::path(config_path).extension() == ".json" ? load_manifest_parameters(config_path)
                                                                             : load_config(config_path);
            for (const auto& [k, v] : file) settings.set(k, v);
        }
        for (const auto& [k, opt] : flag_options) {
            if (opt->count() > 0) settings.set(k, flag_values[k]);
        }
        settings.get_u64("seed");
    } catch (const ConfigError& e) {
        err << "error: " << e.what() << "\n\n" << app.help();
        return kExitUsage;
    }

    RunContext ctx{command, settings, fs::path(settings.get("out")), {}, 0, 0, out};
    try {
        fs::create_directories(ctx.out_dir);
    } catch (const fs::filesystem_error& e) {
        err << "error: " << e.what() << '\n';
        return kExitIo;
    }

    const std::string started = utc_now();
    int code = kExitOk;
    std::string error;
    try {
        if (command == "simulate") {
            code = cmd_simulate(ctx);
        } else if (command == "sweep") {
            code = cmd_sweep(ctx);
        } else if (command == "threshold") {
            code = cmd_threshold(ctx, false);
        } else if (command == "threshold-scaling") {
            code = cmd_threshold(ctx, true);
        } else if (command == "stability") {
            code = cmd_stability(ctx);
        } else if (command == "disorder") {
            code = cmd_disorder(ctx);
        } else {
            code = cmd_phase_diagram(ctx);
        }
    } catch (const ConfigError& e) {
        err << "error: " << e.what() << "\n\n" << app.help();
        return kExitUsage;
    } catch (const std::invalid_argument& e) {
        err << "error: " << e.what() << "\n\n" << app.help();
        return kExitUsage;
    } catch (const PartialFailure& e) {
        code = kExitNumerical;
        error = e.what();
    } catch (const EnsembleError& e) {
        code = kExitNumerical;
        error = e.what();
    } catch (const IntegrationError& e) {
        code = kExitNumerical;
        error = e.what();
    } catch (const StabilityError& e) {
        code = kExitNumerical;
        error = e.what();
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitIo;
    }
    if (!error.empty()) err << "numerical failure: " << error << '\n';

    try {
        write_manifest(ctx, started, code, error);
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitIo;
    }
    return code;
}

}  // namespace photon_lattice::cli
