#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "photon_lattice/ensemble.hpp"
#include "photon_lattice/scaling.hpp"

namespace photon_lattice {

struct DisorderConfig {
    double width = 0.0;  // W: shifts uniform in [-W, W]
    int n_configs = 128;
    std::uint64_t master_seed = 0;

    void validate() const;
};

/// N independent shifts uniform in [-W, W]. The shift of a given site
/// depends only on (master_seed, config_index, site), so longer chains
/// extend shorter ones of the same configuration.
std::vector<double> sample_disorder(double width, std::uint64_t master_seed, std::uint64_t config_index,
                                    int n_sites);

struct DisorderedEntry {
    int n_sites = 0;
    /// Configuration-averaged stats: mean_abs is the arithmetic mean over
    /// configurations, sigma is pooled over configurations, realizations
    /// and the time window.
    std::optional<EnsembleStats> stats;
    std::vector<double> per_config_mean;  // <|alpha_N|> of each configuration
    double median = 0.0;
    double log_mean = 0.0;                // exp(mean(log <|alpha_N|>_config))
    double log_mean_std_error = 0.0;      // standard error of log(mean_abs)
    int n_failed_configs = 0;
    std::string error;
};

struct DisorderedSweepResult {
    LengthSweepResult averaged;  // same shape as a clean sweep
    std::vector<DisorderedEntry> entries;
    double width = 0.0;
    int n_configs = 0;
};

/// Configuration-averaged length sweep. With W = 0 every configuration is
/// the clean chain, so a single configuration is evaluated and the result
/// coincides with length_sweep.
DisorderedSweepResult disordered_sweep(const ChainParams& base, const std::vector<int>& n_grid,
                                       const DisorderConfig& dis, const EnsembleConfig& ens,
                                       const IntegratorConfig& integ);

enum class PhaseClass { Diffusive, Insulating, Inconclusive };
std::string to_string(PhaseClass c);

/// Power-law and ballistic decay both count as conducting (diffusive).
PhaseClass phase_from_decay(DecayClass decay);

struct PhaseCell {
    double u = 0.0;
    double w = 0.0;
    PhaseClass classification = PhaseClass::Inconclusive;
    DecayClassification decay;
    int n_points = 0;
};

PhaseCell classify_sweep(double u, double w, const DisorderedSweepResult& sweep, const ClassifyConfig& cfg = {});

/// Share of insulating cells among those with W in [edges[k], edges[k+1]).
/// Empty bins give NaN. Edges must be strictly increasing.
std::vector<double> insulating_fraction(std::span<const PhaseCell> cells, std::span<const double> w_edges);

/// Row-major over (U, W): for each U every W in turn.
std::vector<PhaseCell> phase_scan(const ChainParams& base, const std::vector<double>& u_grid,
                                  const std::vector<double>& w_grid, const std::vector<int>& n_grid,
                                  const DisorderConfig& dis, const EnsembleConfig& ens, const IntegratorConfig& integ,
                                  const ClassifyConfig& cfg = {});

}  // namespace photon_lattice
