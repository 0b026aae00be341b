#include "photon_lattice/disorder.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "photon_lattice/parallel.hpp"
#include "photon_lattice/seeding.hpp"

namespace photon_lattice {

void DisorderConfig::validate() const {
    if (!(width >= 0.0) || !std::isfinite(width)) throw std::invalid_argument("disorder width must be >= 0");
    if (n_configs < 1) throw std::invalid_argument("n_configs must be >= 1");
}

std::vector<double> sample_disorder(double width, std::uint64_t master_seed, std::uint64_t config_index,
                                    int n_sites) {
    if (!(width >= 0.0)) throw std::invalid_argument("disorder width must be >= 0");
    std::vector<double> xi(static_cast<std::size_t>(n_sites), 0.0);
    if (width == 0.0) return xi;
    const CounterStream stream(derive_key(master_seed, "dis", config_index));
    for (std::size_t i = 0; i < xi.size(); ++i) xi[i] = width * (2.0 * stream.uniform(i) - 1.0);
    return xi;
}

DisorderedSweepResult disordered_sweep(const ChainParams& base, const std::vector<int>& n_grid,
                                       const DisorderConfig& dis, const EnsembleConfig& ens,
                                       const IntegratorConfig& integ) {
    dis.validate();
    ens.validate();
    if (n_grid.empty()) throw std::invalid_argument("length grid must not be empty");
    for (std::size_t i = 1; i < n_grid.size(); ++i) {
        if (n_grid[i] <= n_grid[i - 1]) throw std::invalid_argument("length grid must be strictly increasing");
    }

    DisorderedSweepResult result;
    result.width = dis.width;
    result.n_configs = dis.n_configs;
    if (dis.width == 0.0) {
        ChainParams clean = base;
        clean.site_detuning_shifts.clear();
        result.averaged = length_sweep(clean, n_grid, ens, integ);
        for (const auto& e : result.averaged.entries) {
            DisorderedEntry d;
            d.n_sites = e.n_sites;
            d.stats = e.stats;
            d.error = e.error;
            if (e.stats) {
                d.per_config_mean.push_back(e.stats->mean_abs);
                d.median = e.stats->mean_abs;
                d.log_mean = e.stats->mean_abs;
            } else {
                d.n_failed_configs = 1;
            }
            result.entries.push_back(std::move(d));
        }
        return result;
    }

    const auto n_cfg = static_cast<std::size_t>(dis.n_configs);
    const auto n_real = static_cast<std::size_t>(ens.n_realizations);
    const std::size_t per_n = n_cfg * n_real;

    std::vector<ChainParams> cells;
    cells.reserve(n_grid.size() * n_cfg);
    for (int n : n_grid) {
        for (std::size_t c = 0; c < n_cfg; ++c) {
            ChainParams p = base.with_sites(n);
            p.site_detuning_shifts = sample_disorder(dis.width, dis.master_seed, c, n);
            p.validate();
            cells.push_back(std::move(p));
        }
    }
    auto outcomes = parallel_map(n_grid.size() * per_n, [&](std::size_t task) {
        return run_realization(cells[task / n_real], ens, integ, task % n_real);
    });

    result.averaged.params = base;
    result.averaged.grid = n_grid;
    for (std::size_t g = 0; g < n_grid.size(); ++g) {
        DisorderedEntry d;
        d.n_sites = n_grid[g];
        std::vector<RealizationOutcome> pooled;
        for (std::size_t c = 0; c < n_cfg; ++c) {
            const auto first = outcomes.begin() + static_cast<std::ptrdiff_t>(g * per_n + c * n_real);
            std::vector<RealizationOutcome> slice(first, first + static_cast<std::ptrdiff_t>(n_real));
            try {
                d.per_config_mean.push_back(aggregate(slice).mean_abs);
                pooled.insert(pooled.end(), slice.begin(), slice.end());
            } catch (const EnsembleError&) {
                ++d.n_failed_configs;
            }
        }
        SweepEntry e;
        e.n_sites = d.n_sites;
        if (d.per_config_mean.empty()) {
            d.error = "all disorder configurations failed";
            e.error = d.error;
        } else {
            EnsembleStats st = aggregate(pooled);
            // Arithmetic mean over configurations (equal weight per config).
            double sum = 0.0, log_sum = 0.0;
            for (double m : d.per_config_mean) {
                sum += m;
                log_sum += std::log(std::max(m, 1e-300));
            }
            const auto k = static_cast<double>(d.per_config_mean.size());
            st.mean_abs = sum / k;
            d.log_mean = std::exp(log_sum / k);
            std::vector<double> sorted = d.per_config_mean;
            std::sort(sorted.begin(), sorted.end());
            const std::size_t mid = sorted.size() / 2;
            d.median = sorted.size() % 2 ? sorted[mid] : 0.5 * (sorted[mid - 1] + sorted[mid]);
            if (d.per_config_mean.size() > 1) {
                double ss = 0.0;
                for (double m : d.per_config_mean) ss += (m - st.mean_abs) * (m - st.mean_abs);
                const double sd = std::sqrt(ss / (k - 1.0));
                d.log_mean_std_error = sd / std::sqrt(k) / st.mean_abs;
            }
            d.stats = st;
            e.stats = st;
        }
        result.averaged.entries.push_back(std::move(e));
        result.entries.push_back(std::move(d));
    }
    return result;
}

std::string to_string(PhaseClass c) {
    switch (c) {
        case PhaseClass::Diffusive: return "diffusive";
        case PhaseClass::Insulating: return "insulating";
        case PhaseClass::Inconclusive: return "inconclusive";
    }
    return "inconclusive";
}

PhaseClass phase_from_decay(DecayClass decay) {
    switch (decay) {
        case DecayClass::Ballistic:
        case DecayClass::PowerLaw: return PhaseClass::Diffusive;
        case DecayClass::Exponential: return PhaseClass::Insulating;
        case DecayClass::Inconclusive: return PhaseClass::Inconclusive;
    }
    return PhaseClass::Inconclusive;
}

PhaseCell classify_sweep(double u, double w, const DisorderedSweepResult& sweep, const ClassifyConfig& cfg) {
    PhaseCell cell;
    cell.u = u;
    cell.w = w;
    const auto points = mean_abs_points(sweep.averaged);
    cell.n_points = static_cast<int>(points.size());
    cell.decay = classify_decay(points, cfg);
    cell.classification = phase_from_decay(cell.decay.decay);
    return cell;
}

std::vector<double> insulating_fraction(std::span<const PhaseCell> cells, std::span<const double> w_edges) {
    if (w_edges.size() < 2) throw std::invalid_argument("need at least two bin edges");
    for (std::size_t k = 1; k < w_edges.size(); ++k) {
        if (!(w_edges[k] > w_edges[k - 1])) throw std::invalid_argument("bin edges must be strictly increasing");
    }
    const std::size_t bins = w_edges.size() - 1;
    std::vector<int> total(bins, 0), insulating(bins, 0);
    for (const auto& c : cells) {
        const auto it = std::upper_bound(w_edges.begin(), w_edges.end(), c.w);
        if (it == w_edges.begin() || it == w_edges.end()) continue;
        const auto k = static_cast<std::size_t>(it - w_edges.begin() - 1);
        ++total[k];
        if (c.classification == PhaseClass::Insulating) ++insulating[k];
    }
    std::vector<double> out(bins, std::numeric_limits<double>::quiet_NaN());
    for (std::size_t k = 0; k < bins; ++k) {
        if (total[k] > 0) out[k] = static_cast<double>(insulating[k]) / total[k];
    }
    return out;
}

std::vector<PhaseCell> phase_scan(const ChainParams& base, const std::vector<double>& u_grid,
                                  const std::vector<double>& w_grid, const std::vector<int>& n_grid,
                                  const DisorderConfig& dis, const EnsembleConfig& ens, const IntegratorConfig& integ,
                                  const ClassifyConfig& cfg) {
    if (u_grid.empty() || w_grid.empty()) throw std::invalid_argument("phase grids must not be empty");
    std::vector<PhaseCell> cells;
    for (double u : u_grid) {
        for (double w : w_grid) {
            ChainParams p = base;
            p.nonlinearity = u;
            DisorderConfig d = dis;
            d.width = w;
            cells.push_back(classify_sweep(u, w, disordered_sweep(p, n_grid, d, ens, integ), cfg));
        }
    }
    return cells;
}

}  // namespace photon_lattice
