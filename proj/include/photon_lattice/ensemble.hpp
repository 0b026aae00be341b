#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "photon_lattice/integrator.hpp"
#include "photon_lattice/model.hpp"

namespace photon_lattice {

enum class IcMode { Zero, Random };

IcMode parse_ic_mode(const std::string& text);
std::string to_string(IcMode mode);

struct EnsembleConfig {
    int n_realizations = 16;
    std::uint64_t master_seed = 0;
    IcMode ic_mode = IcMode::Random;
    double ic_radius = 1.0;
    double transient_time = 500.0;
    double window_time = 1500.0;

    void validate() const;
    double horizon() const { return transient_time + window_time; }
};

struct RealizationStats {
    std::uint64_t index = 0;
    std::uint64_t seed = 0;
    double time_mean = 0.0;
    double time_variance = 0.0;
    std::size_t n_samples = 0;
};

/// Outcome of one realization; `stats` is empty when integration failed.
struct RealizationOutcome {
    std::uint64_t index = 0;
    std::uint64_t seed = 0;
    std::optional<RealizationStats> stats;
    std::string failure;
};

struct EnsembleStats {
    double mean_abs = 0.0;  // <|alpha_N|>, pooled over window and ensemble
    double sigma = 0.0;     // sqrt(<|alpha_N|^2> - <|alpha_N|>^2), same pool
    std::vector<RealizationStats> per_realization;
    int n_effective = 0;
    int n_failed = 0;
};

class EnsembleError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Zero mode gives all zeros. Random mode draws every site independently
/// and uniformly from the complex disc of the given radius; the draw for
/// (master_seed, realization, site) is fixed.
FieldState draw_initial_condition(IcMode mode, std::uint64_t master_seed, std::uint64_t realization, int n_sites,
                                  double radius);

struct WindowStats {
    double mean = 0.0;
    double variance = 0.0;
    std::size_t n_samples = 0;
};

/// Mean and variance of |alpha_N| over samples with t in (t_tr, t_tr + t_w].
/// Throws EnsembleError ("window too short") when the trajectory does not
/// reach t_tr + t_w.
WindowStats window_stats(const Trajectory& traj, double transient_time, double window_time);

RealizationOutcome run_realization(const ChainParams& params, const EnsembleConfig& ens,
                                   const IntegratorConfig& integ, std::uint64_t index);

/// Pools per-realization window statistics. Failed realizations are
/// counted and skipped; throws EnsembleError when none succeeded.
EnsembleStats aggregate(const std::vector<RealizationOutcome>& outcomes);

/// Runs all realizations on the worker pool. `integ.t_end` and
/// `integ.record_from` are replaced by the ensemble window.
EnsembleStats ensemble_stats(const ChainParams& params, const EnsembleConfig& ens, const IntegratorConfig& integ);

/// Integrator settings used for one realization of the ensemble.
IntegratorConfig window_config(const EnsembleConfig& ens, IntegratorConfig integ);

/// X = 2 Re alpha_N, P = 2 Im alpha_N.
struct QuadratureSeries {
    std::vector<double> times;
    std::vector<double> x;
    std::vector<double> p;
};

QuadratureSeries quadrature_series(const Trajectory& traj);

struct QuadratureHistogram {
    int bins = 0;
    double x_min = 0.0, x_max = 0.0;
    double p_min = 0.0, p_max = 0.0;
    std::vector<std::size_t> counts;  // bins * bins, index ix * bins + ip
    std::size_t total = 0;

    std::size_t at(int ix, int ip) const { return counts[static_cast<std::size_t>(ix * bins + ip)]; }
    std::size_t occupied_bins() const;
};

/// 2-D histogram of (X, P) over samples with t > transient_time. The grid
/// spans the observed range, but never less than 1e-3 * max(1, |centre|)
/// per axis; narrower ranges are widened symmetrically.
QuadratureHistogram quadrature_histogram(const Trajectory& traj, int bins, double transient_time = 0.0);

}  // namespace photon_lattice
