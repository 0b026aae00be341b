#pragma once

#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "photon_lattice/ensemble.hpp"
#include "photon_lattice/model.hpp"

namespace photon_lattice {

struct SweepEntry {
    int n_sites = 0;
    std::optional<EnsembleStats> stats;  // empty when every realization failed
    std::string error;
};

struct LengthSweepResult {
    std::vector<SweepEntry> entries;
    ChainParams params;
    std::vector<int> grid;
};

/// Ensemble statistics for every length in `n_grid` (strictly increasing).
/// All (length, realization) pairs share one worker pool. A length whose
/// realizations all failed is recorded with its error; the sweep continues.
LengthSweepResult length_sweep(const ChainParams& base, const std::vector<int>& n_grid, const EnsembleConfig& ens,
                               const IntegratorConfig& integ);

enum class DecayModel { Power, Exponential };
std::string to_string(DecayModel model);

/// Power: y = A * N^b (exponent_or_rate = b).
/// Exponential: y = A * exp(-c N) (exponent_or_rate = c).
/// r_squared is measured in the linearized coordinates of the fit.
struct ScalingFit {
    DecayModel model = DecayModel::Power;
    double exponent_or_rate = 0.0;
    double prefactor = 0.0;
    double r_squared = 0.0;
    int n_points = 0;
};

class FitError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

using Point = std::pair<double, double>;

/// Least squares of log y against log N (power) or N (exponential).
/// Needs >= 3 points with y > 0 (and N > 0 for the power model); throws
/// FitError otherwise or when the regressor has zero spread.
ScalingFit fit_decay(std::span<const Point> points, DecayModel model);

enum class DecayClass { Ballistic, PowerLaw, Exponential, Inconclusive };
std::string to_string(DecayClass c);

struct ClassifyConfig {
    double ballistic_exponent = 0.05;
    double min_r_squared = 0.9;
    double margin = 0.05;
};

struct DecayClassification {
    DecayClass decay = DecayClass::Inconclusive;
    std::optional<ScalingFit> power;
    std::optional<ScalingFit> exponential;
};

/// Ballistic if |b| < ballistic_exponent; otherwise the model with the
/// larger r^2 wins when it beats the other by `margin` and itself reaches
/// `min_r_squared`. Fewer than 4 points, or N spanning less than a factor
/// of 2, is inconclusive.
DecayClassification classify_decay(std::span<const Point> points, const ClassifyConfig& cfg = {});

struct ThresholdConfig {
    double sigma_star = 0.05;
    /// Bisect between the last stable grid point and the first crossing.
    bool refine = false;
    /// Consecutive sub-threshold points needed to declare a collapse.
    int sustained_points = 2;
};

struct ThresholdReport {
    std::optional<int> n_t;
    std::optional<int> n_t_end;
    double sigma_star = 0.05;
    std::vector<int> grid;
    /// (N, sigma) for every length evaluated, in increasing N.
    std::vector<std::pair<int, double>> sigma_by_n;

    bool no_threshold_in_range() const { return !n_t.has_value(); }
};

/// First N with sigma > sigma_star; when kappa_bulk > 0 also the first
/// later N that starts a run of `sustained_points` sub-threshold lengths.
ThresholdReport threshold_from_sweep(const LengthSweepResult& sweep, const ThresholdConfig& cfg = {});

/// Scans n_scan for the first crossing. Without bulk loss the scan stops
/// at the first crossing; with bulk loss it runs to the end to locate the
/// collapse. With cfg.refine the crossing is bisected to +-1 site.
ThresholdReport detect_threshold(const ChainParams& base, const std::vector<int>& n_scan, const EnsembleConfig& ens,
                                 const IntegratorConfig& integ, const ThresholdConfig& cfg = {});

/// (N, <|alpha_N|>) pairs from the sweep, optionally restricted to N > n_min.
std::vector<Point> mean_abs_points(const LengthSweepResult& sweep, std::optional<int> n_min = std::nullopt);

enum class ScanAxis { Nonlinearity, Drive, KappaBulk };
ScanAxis parse_axis(const std::string& text);
std::string to_string(ScanAxis axis);
ChainParams with_axis_value(const ChainParams& base, ScanAxis axis, double value);

struct ThresholdScalingResult {
    ScanAxis axis = ScanAxis::Nonlinearity;
    std::vector<std::pair<double, ThresholdReport>> reports;
    /// Power-law fit of N_t against the axis (U and p axes, >= 3 thresholds).
    std::optional<ScalingFit> fit;
};

ThresholdScalingResult threshold_scaling(const ChainParams& base, ScanAxis axis, const std::vector<double>& values,
                                         const std::vector<int>& n_scan, const EnsembleConfig& ens,
                                         const IntegratorConfig& integ, const ThresholdConfig& cfg = {});

}  // namespace photon_lattice
