#include "photon_lattice/scaling.hpp"

#include <algorithm>
#include <cmath>

#include "photon_lattice/parallel.hpp"

namespace photon_lattice {

namespace {

void require_increasing(const std::vector<int>& grid, const char* what) {
    if (grid.empty()) throw std::invalid_argument(std::string(what) + " must not be empty");
    for (std::size_t i = 1; i < grid.size(); ++i) {
        if (grid[i] <= grid[i - 1]) throw std::invalid_argument(std::string(what) + " must be strictly increasing");
    }
    if (grid.front() < 1) throw std::invalid_argument(std::string(what) + " entries must be >= 1");
}

struct LineFit {
    double slope;
    double intercept;
    double r_squared;
};

LineFit least_squares(const std::vector<double>& x, const std::vector<double>& y) {
    const auto n = static_cast<double>(x.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
        syy += (y[i] - my) * (y[i] - my);
    }
    if (!(sxx > 1e-300)) throw FitError("degenerate data: regressor has zero variance");
    LineFit fit;
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    double ss_res = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double r = y[i] - (fit.intercept + fit.slope * x[i]);
        ss_res += r * r;
    }
    // Constant response: every line through the mean is exact, so r^2 = 1.
    const double scale = std::max(1.0, my * my) * n;
    if (syy <= 1e-24 * scale) {
        fit.r_squared = 1.0;
    } else {
        fit.r_squared = std::clamp(1.0 - ss_res / syy, 0.0, 1.0);
    }
    return fit;
}

EnsembleStats run_ensemble_at(const ChainParams& base, int n, const EnsembleConfig& ens,
                              const IntegratorConfig& integ) {
    return ensemble_stats(base.with_sites(n), ens, integ);
}

}  // namespace

LengthSweepResult length_sweep(const ChainParams& base, const std::vector<int>& n_grid, const EnsembleConfig& ens,
                               const IntegratorConfig& integ) {
    require_increasing(n_grid, "length grid");
    ens.validate();
    const auto n_real = static_cast<std::size_t>(ens.n_realizations);
    std::vector<ChainParams> per_n;
    per_n.reserve(n_grid.size());
    for (int n : n_grid) {
        per_n.push_back(base.with_sites(n));
        per_n.back().validate();
    }

    auto outcomes = parallel_map(n_grid.size() * n_real, [&](std::size_t task) {
        return run_realization(per_n[task / n_real], ens, integ, task % n_real);
    });

    LengthSweepResult result;
    result.params = base;
    result.grid = n_grid;
    for (std::size_t g = 0; g < n_grid.size(); ++g) {
        SweepEntry entry;
        entry.n_sites = n_grid[g];
        std::vector<RealizationOutcome> slice(outcomes.begin() + static_cast<std::ptrdiff_t>(g * n_real),
                                              outcomes.begin() + static_cast<std::ptrdiff_t>((g + 1) * n_real));
        try {
            entry.stats = aggregate(slice);
        } catch (const EnsembleError& e) {
            entry.error = e.what();
        }
        result.entries.push_back(std::move(entry));
    }
    return result;
}

std::string to_string(DecayModel model) { return model == DecayModel::Power ? "power" : "exponential"; }

ScalingFit fit_decay(std::span<const Point> points, DecayModel model) {
    if (points.size() < 3) throw FitError("fit needs at least 3 points");
    std::vector<double> x, y;
    x.reserve(points.size());
    y.reserve(points.size());
    for (const auto& [n, v] : points) {
        if (!(v > 0.0) || !std::isfinite(v)) throw FitError("fit needs strictly positive finite y values");
        if (model == DecayModel::Power) {
            if (!(n > 0.0)) throw FitError("power-law fit needs N > 0");
            x.push_back(std::log(n));
        } else {
            x.push_back(n);
        }
        y.push_back(std::log(v));
    }
    const LineFit line = least_squares(x, y);
    ScalingFit fit;
    fit.model = model;
    fit.exponent_or_rate = model == DecayModel::Power ? line.slope : -line.slope;
    fit.prefactor = std::exp(line.intercept);
    fit.r_squared = line.r_squared;
    fit.n_points = static_cast<int>(points.size());
    return fit;
}

std::string to_string(DecayClass c) {
    switch (c) {
        case DecayClass::Ballistic: return "ballistic";
        case DecayClass::PowerLaw: return "power_law";
        case DecayClass::Exponential: return "exponential";
        case DecayClass::Inconclusive: return "inconclusive";
    }
    return "inconclusive";
}

DecayClassification classify_decay(std::span<const Point> points, const ClassifyConfig& cfg) {
    DecayClassification out;
    if (points.size() < 4) return out;
    double n_min = points.front().first, n_max = points.front().first;
    for (const auto& p : points) {
        n_min = std::min(n_min, p.first);
        n_max = std::max(n_max, p.first);
    }
    if (!(n_min > 0.0) || n_max < 2.0 * n_min) return out;
    try {
        out.power = fit_decay(points, DecayModel::Power);
        out.exponential = fit_decay(points, DecayModel::Exponential);
    } catch (const FitError&) {
        return out;
    }
    if (std::abs(out.power->exponent_or_rate) < cfg.ballistic_exponent) {
        out.decay = DecayClass::Ballistic;
        return out;
    }
    const double rp = out.power->r_squared;
    const double re = out.exponential->r_squared;
    if (rp >= re + cfg.margin && rp >= cfg.min_r_squared) {
        out.decay = DecayClass::PowerLaw;
    } else if (re >= rp + cfg.margin && re >= cfg.min_r_squared) {
        out.decay = DecayClass::Exponential;
    }
    return out;
}

ThresholdReport threshold_from_sweep(const LengthSweepResult& sweep, const ThresholdConfig& cfg) {
    ThresholdReport report;
    report.sigma_star = cfg.sigma_star;
    report.grid = sweep.grid;
    for (const auto& e : sweep.entries) {
        if (e.stats) report.sigma_by_n.emplace_back(e.n_sites, e.stats->sigma);
    }
    const auto& s = report.sigma_by_n;
    std::size_t k = 0;
    for (; k < s.size(); ++k) {
        if (s[k].second > cfg.sigma_star) break;
    }
    if (k == s.size()) return report;
    report.n_t = s[k].first;

    if (sweep.params.kappa_bulk > 0.0) {
        const auto need = static_cast<std::size_t>(std::max(1, cfg.sustained_points));
        for (std::size_t j = k + 1; j + need <= s.size(); ++j) {
            bool run = true;
            for (std::size_t q = j; q < j + need; ++q) run = run && s[q].second <= cfg.sigma_star;
            if (run) {
                report.n_t_end = s[j].first;
                break;
            }
        }
    }
    return report;
}

ThresholdReport detect_threshold(const ChainParams& base, const std::vector<int>& n_scan, const EnsembleConfig& ens,
                                 const IntegratorConfig& integ, const ThresholdConfig& cfg) {
    require_increasing(n_scan, "threshold scan");
    LengthSweepResult sweep;
    if (base.kappa_bulk > 0.0) {
        // A collapse can only be seen on the full scan.
        sweep = length_sweep(base, n_scan, ens, integ);
    } else {
        // Without bulk loss nothing past the first crossing is needed; scan
        // in blocks that keep every worker busy.
        sweep.params = base;
        sweep.grid = n_scan;
        const std::size_t block =
            std::max<std::size_t>(1, (worker_count() + static_cast<std::size_t>(ens.n_realizations) - 1) /
                                         static_cast<std::size_t>(ens.n_realizations));
        for (std::size_t start = 0; start < n_scan.size(); start += block) {
            const std::vector<int> chunk(n_scan.begin() + static_cast<std::ptrdiff_t>(start),
                                         n_scan.begin() + static_cast<std::ptrdiff_t>(std::min(start + block, n_scan.size())));
            LengthSweepResult part = length_sweep(base, chunk, ens, integ);
            bool crossed = false;
            for (auto& e : part.entries) {
                crossed = crossed || (e.stats && e.stats->sigma > cfg.sigma_star);
                sweep.entries.push_back(std::move(e));
            }
            if (crossed) break;
        }
    }
    ThresholdReport report = threshold_from_sweep(sweep, cfg);
    if (!cfg.refine || !report.n_t) return report;

    auto it = std::find_if(report.sigma_by_n.begin(), report.sigma_by_n.end(),
                           [&](const auto& e) { return e.first == *report.n_t; });
    if (it == report.sigma_by_n.begin()) return report;
    int lo = std::prev(it)->first;
    int hi = *report.n_t;
    while (hi - lo > 1) {
        const int mid = lo + (hi - lo) / 2;
        const EnsembleStats st = run_ensemble_at(base, mid, ens, integ);
        report.sigma_by_n.emplace_back(mid, st.sigma);
        if (st.sigma > cfg.sigma_star) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    report.n_t = hi;
    std::sort(report.sigma_by_n.begin(), report.sigma_by_n.end());
    return report;
}

std::vector<Point> mean_abs_points(const LengthSweepResult& sweep, std::optional<int> n_min) {
    std::vector<Point> pts;
    for (const auto& e : sweep.entries) {
        if (!e.stats) continue;
        if (n_min && e.n_sites <= *n_min) continue;
        pts.emplace_back(static_cast<double>(e.n_sites), e.stats->mean_abs);
    }
    return pts;
}

ScanAxis parse_axis(const std::string& text) {
    if (text == "u" || text == "U") return ScanAxis::Nonlinearity;
    if (text == "p") return ScanAxis::Drive;
    if (text == "kappa_bulk" || text == "kappa-bulk") return ScanAxis::KappaBulk;
    throw std::invalid_argument("unknown axis '" + text + "' (expected u|p|kappa_bulk)");
}

std::string to_string(ScanAxis axis) {
    switch (axis) {
        case ScanAxis::Nonlinearity: return "u";
        case ScanAxis::Drive: return "p";
        case ScanAxis::KappaBulk: return "kappa_bulk";
    }
    return "u";
}

ChainParams with_axis_value(const ChainParams& base, ScanAxis axis, double value) {
    ChainParams p = base;
    switch (axis) {
        case ScanAxis::Nonlinearity: p.nonlinearity = value; break;
        case ScanAxis::Drive: p.drive_amplitude = value; break;
        case ScanAxis::KappaBulk: p.kappa_bulk = value; break;
    }
    return p;
}

ThresholdScalingResult threshold_scaling(const ChainParams& base, ScanAxis axis, const std::vector<double>& values,
                                         const std::vector<int>& n_scan, const EnsembleConfig& ens,
                                         const IntegratorConfig& integ, const ThresholdConfig& cfg) {
    for (std::size_t i = 1; i < values.size(); ++i) {
        if (values[i] <= values[i - 1]) throw std::invalid_argument("axis values must be strictly increasing");
    }
    ThresholdScalingResult result;
    result.axis = axis;
    std::vector<Point> found;
    for (double v : values) {
        ThresholdReport r = detect_threshold(with_axis_value(base, axis, v), n_scan, ens, integ, cfg);
        if (r.n_t && v > 0.0) found.emplace_back(v, static_cast<double>(*r.n_t));
        result.reports.emplace_back(v, std::move(r));
    }
    if (axis != ScanAxis::KappaBulk && found.size() >= 3) {
        try {
            result.fit = fit_decay(found, DecayModel::Power);
        } catch (const FitError&) {
        }
    }
    return result;
}

}  // namespace photon_lattice
