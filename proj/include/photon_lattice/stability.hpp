#pragma once

#include <optional>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "photon_lattice/model.hpp"

namespace photon_lattice {

struct NewtonOptions {
    int max_iterations = 200;
    /// Convergence: max-norm of rhs <= residual_tol * max(1, p/J).
    double residual_tol = 1e-10;
    /// Drive ramp 0 -> p used when no guess is supplied.
    int drive_ramp_steps = 10;
    /// A failed ramp stage is split in halves up to this depth.
    int max_ramp_subdivisions = 4;
    /// When continuation fails, relax the dynamics for this long (units of
    /// 1/J) and restart Newton from the end state. 0 disables.
    double relax_time = 2000.0;
};

struct SteadyState {
    Field alpha_s;
    double residual_norm = 0.0;
    ChainParams params;
    bool converged = false;
    int newton_iterations = 0;

    /// n_j = |alpha_j|^2
    std::vector<double> occupations() const;
};

struct BdgSpectrum {
    std::vector<Complex> eigenvalues;
    double max_im = 0.0;
    int matrix_dim = 0;
};

class StabilityError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Real 2N x 2N Jacobian of the flow, variables ordered
/// (Re a_1, Im a_1, Re a_2, Im a_2, ...).
Eigen::MatrixXd flow_jacobian(const FieldState& state, const ChainParams& params);

/// Largest real part among the eigenvalues of a real square matrix.
double spectral_abscissa(const Eigen::MatrixXd& m);

/// Damped Newton from `guess` with backtracking on the residual max-norm.
SteadyState newton_solve(const ChainParams& params, const Field& guess, const NewtonOptions& opts = {});

/// Fixed point of the flow. Without a guess the drive is ramped from zero
/// in opts.drive_ramp_steps stages; a guess is used directly. Either way a
/// failed solve falls back to time relaxation (opts.relax_time). Failure to
/// converge is reported through the `converged` flag with the best
/// iterate; it does not throw.
SteadyState solve_steady_state(const ChainParams& params, const std::optional<FieldState>& guess = std::nullopt,
                               const NewtonOptions& opts = {});

/// Exact steady state of the U = 0 chain by the Thomas algorithm. Throws
/// std::invalid_argument when U != 0.
Field linear_steady_state(const ChainParams& params);

/// Linearization around the fixed point in the Bogoliubov basis
/// (U_1, V_1, U_2, V_2, ...), with perturbations e^{-iEt} U + e^{iE*t} V*.
/// Throws StabilityError for a non-converged input.
Eigen::MatrixXcd assemble_bdg(const ChainParams& params, const SteadyState& ss);

BdgSpectrum growth_rate(const Eigen::MatrixXcd& matrix);

struct StabilityScanEntry {
    int n_sites = 0;
    SteadyState steady;
    std::optional<BdgSpectrum> spectrum;  // empty when Newton failed
};

struct StabilityScanOptions {
    NewtonOptions newton;
    bool stop_on_failure = true;
};

/// Continuation in chain length: each length starts from the previous
/// solution extended by one zero site, growing one site at a time.
std::vector<StabilityScanEntry> stability_scan(const ChainParams& base, const std::vector<int>& n_grid,
                                               const StabilityScanOptions& opts = {});

}  // namespace photon_lattice
