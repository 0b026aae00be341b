#include "photon_lattice/ensemble.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "photon_lattice/parallel.hpp"
#include "photon_lattice/seeding.hpp"

namespace photon_lattice {

IcMode parse_ic_mode(const std::string& text) {
    if (text == "zero") return IcMode::Zero;
    if (text == "random") return IcMode::Random;
    throw std::invalid_argument("unknown initial-condition mode '" + text + "' (expected zero|random)");
}

std::string to_string(IcMode mode) { return mode == IcMode::Zero ? "zero" : "random"; }

void EnsembleConfig::validate() const {
    if (n_realizations < 1) throw std::invalid_argument("n_realizations must be >= 1");
    if (!(window_time > 0.0)) throw std::invalid_argument("window_time must be > 0");
    if (!(transient_time >= 0.0)) throw std::invalid_argument("transient_time must be >= 0");
    if (!(ic_radius >= 0.0)) throw std::invalid_argument("ic_radius must be >= 0");
}

FieldState draw_initial_condition(IcMode mode, std::uint64_t master_seed, std::uint64_t realization, int n_sites,
                                  double radius) {
    FieldState state = FieldState::zeros(n_sites);
    if (mode == IcMode::Zero) return state;
    const CounterStream stream(derive_key(master_seed, "real", realization));
    for (int i = 0; i < n_sites; ++i) {
        const auto site = static_cast<std::uint64_t>(i);
        const double r = radius * std::sqrt(stream.uniform(2 * site));
        const double theta = 2.0 * std::numbers::pi * stream.uniform(2 * site + 1);
        state.amplitudes[site] = std::polar(r, theta);
    }
    return state;
}

WindowStats window_stats(const Trajectory& traj, double transient_time, double window_time) {
    const double end = transient_time + window_time;
    constexpr double eps = 1e-9;
    if (traj.sample_times.empty() || traj.sample_times.back() < end - eps) {
        throw EnsembleError("window too short: trajectory ends before t = " + std::to_string(end));
    }
    WindowStats out;
    double sum = 0.0;
    for (std::size_t k = 0; k < traj.sample_times.size(); ++k) {
        const double t = traj.sample_times[k];
        if (t > transient_time + eps && t <= end + eps) {
            sum += std::abs(traj.alpha_last[k]);
            ++out.n_samples;
        }
    }
    if (out.n_samples == 0) throw EnsembleError("window too short: no samples inside the averaging window");
    out.mean = sum / static_cast<double>(out.n_samples);
    double ss = 0.0;
    for (std::size_t k = 0; k < traj.sample_times.size(); ++k) {
        const double t = traj.sample_times[k];
        if (t > transient_time + eps && t <= end + eps) {
            const double d = std::abs(traj.alpha_last[k]) - out.mean;
            ss += d * d;
        }
    }
    out.variance = ss / static_cast<double>(out.n_samples);
    return out;
}

IntegratorConfig window_config(const EnsembleConfig& ens, IntegratorConfig integ) {
    integ.t_end = ens.horizon();
    // Keep the sample just before the window open; window_stats excludes it.
    integ.record_from = std::max(0.0, ens.transient_time - integ.sample_interval);
    return integ;
}

RealizationOutcome run_realization(const ChainParams& params, const EnsembleConfig& ens,
                                   const IntegratorConfig& integ, std::uint64_t index) {
    RealizationOutcome out;
    out.index = index;
    out.seed = derive_key(ens.master_seed, "real", index);
    const FieldState ic = draw_initial_condition(ens.ic_mode, ens.master_seed, index, params.n_sites, ens.ic_radius);
    try {
        const Trajectory traj = integrate(params, ic, window_config(ens, integ),
                                          to_string(ens.ic_mode) + ":" + std::to_string(index));
        const WindowStats w = window_stats(traj, ens.transient_time, ens.window_time);
        out.stats = RealizationStats{index, out.seed, w.mean, w.variance, w.n_samples};
    } catch (const IntegrationError& e) {
        out.failure = e.what();
    }
    return out;
}

EnsembleStats aggregate(const std::vector<RealizationOutcome>& outcomes) {
    EnsembleStats stats;
    for (const auto& o : outcomes) {
        if (o.stats) {
            stats.per_realization.push_back(*o.stats);
        } else {
            ++stats.n_failed;
        }
    }
    stats.n_effective = static_cast<int>(stats.per_realization.size());
    if (stats.n_effective == 0) {
        throw EnsembleError("all " + std::to_string(outcomes.size()) + " realizations failed");
    }
    // Pooled moments via the law of total variance; avoids the cancellation
    // in <x^2> - <x>^2 when the spread is tiny.
    double weight = 0.0;
    double mean = 0.0;
    for (const auto& r : stats.per_realization) {
        weight += static_cast<double>(r.n_samples);
        mean += static_cast<double>(r.n_samples) * r.time_mean;
    }
    mean /= weight;
    double var = 0.0;
    for (const auto& r : stats.per_realization) {
        const double d = r.time_mean - mean;
        var += static_cast<double>(r.n_samples) * (r.time_variance + d * d);
    }
    var /= weight;
    stats.mean_abs = mean;
    stats.sigma = std::sqrt(std::max(0.0, var));
    return stats;
}

EnsembleStats ensemble_stats(const ChainParams& params, const EnsembleConfig& ens, const IntegratorConfig& integ) {
    params.validate();
    ens.validate();
    auto outcomes = parallel_map(static_cast<std::size_t>(ens.n_realizations),
                                 [&](std::size_t i) { return run_realization(params, ens, integ, i); });
    return aggregate(outcomes);
}

QuadratureSeries quadrature_series(const Trajectory& traj) {
    QuadratureSeries q;
    q.times = traj.sample_times;
    q.x.reserve(traj.alpha_last.size());
    q.p.reserve(traj.alpha_last.size());
    for (const auto& a : traj.alpha_last) {
        q.x.push_back(2.0 * a.real());
        q.p.push_back(2.0 * a.imag());
    }
    return q;
}

std::size_t QuadratureHistogram::occupied_bins() const {
    return static_cast<std::size_t>(std::count_if(counts.begin(), counts.end(), [](std::size_t c) { return c > 0; }));
}

QuadratureHistogram quadrature_histogram(const Trajectory& traj, int bins, double transient_time) {
    if (bins < 2) throw std::invalid_argument("histogram needs at least 2 bins per axis");
    const QuadratureSeries q = quadrature_series(traj);
    std::vector<std::size_t> picked;
    for (std::size_t k = 0; k < q.times.size(); ++k) {
        if (q.times[k] > transient_time) picked.push_back(k);
    }

    QuadratureHistogram h;
    h.bins = bins;
    h.counts.assign(static_cast<std::size_t>(bins) * static_cast<std::size_t>(bins), 0);
    if (picked.empty()) return h;

    h.x_min = h.x_max = q.x[picked.front()];
    h.p_min = h.p_max = q.p[picked.front()];
    for (std::size_t k : picked) {
        h.x_min = std::min(h.x_min, q.x[k]);
        h.x_max = std::max(h.x_max, q.x[k]);
        h.p_min = std::min(h.p_min, q.p[k]);
        h.p_max = std::max(h.p_max, q.p[k]);
    }
    // Resolution floor: spans narrower than this are centred and widened,
    // so a settled trajectory lands in one bin instead of spreading its
    // rounding noise over the whole grid.
    auto widen = [](double& lo, double& hi) {
        const double centre = 0.5 * (lo + hi);
        const double floor_span = 1e-3 * std::max(1.0, std::abs(centre));
        if (hi - lo < floor_span) {
            lo = centre - 0.5 * floor_span;
            hi = centre + 0.5 * floor_span;
        }
    };
    widen(h.x_min, h.x_max);
    widen(h.p_min, h.p_max);

    auto index = [bins](double v, double lo, double hi) {
        const int i = static_cast<int>(std::floor((v - lo) / (hi - lo) * bins));
        return std::clamp(i, 0, bins - 1);
    };
    for (std::size_t k : picked) {
        const int ix = index(q.x[k], h.x_min, h.x_max);
        const int ip = index(q.p[k], h.p_min, h.p_max);
        ++h.counts[static_cast<std::size_t>(ix * bins + ip)];
    }
    h.total = picked.size();
    return h;
}

}  // namespace photon_lattice
