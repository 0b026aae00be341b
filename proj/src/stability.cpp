#include "photon_lattice/stability.hpp"

#include "photon_lattice/integrator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace photon_lattice {

namespace {

double max_norm(const Field& f) {
    double m = 0.0;
    for (const auto& z : f) m = std::max({m, std::abs(z.real()), std::abs(z.imag())});
    return m;
}

double l2_norm(const Field& f) {
    double s = 0.0;
    for (const auto& z : f) s += std::norm(z);
    return std::sqrt(s);
}

double tolerance(const ChainParams& params, const NewtonOptions& opts) {
    return opts.residual_tol * std::max(1.0, params.drive_amplitude / params.hopping);
}

double site_loss(const ChainParams& params, int i) {
    const bool boundary = (i == 0 || i == params.n_sites - 1);
    return 0.5 * (boundary ? params.kappa_boundary : params.kappa_bulk);
}

}  // namespace

std::vector<double> SteadyState::occupations() const {
    std::vector<double> n;
    n.reserve(alpha_s.size());
    for (const auto& a : alpha_s) n.push_back(std::norm(a));
    return n;
}

Eigen::MatrixXd flow_jacobian(const FieldState& state, const ChainParams& params) {
    const int n = params.n_sites;
    const double J = params.hopping;
    const double U = params.nonlinearity;
    Eigen::MatrixXd jac = Eigen::MatrixXd::Zero(2 * n, 2 * n);
    for (int i = 0; i < n; ++i) {
        const double x = state.amplitudes[static_cast<std::size_t>(i)].real();
        const double y = state.amplitudes[static_cast<std::size_t>(i)].imag();
        const double g = site_loss(params, i);
        const double w = params.detuning + params.shift(i);
        const int r = 2 * i;
        // f_re = -g x + w y + J Im(nb) + 2U (x^2+y^2) y
        // f_im = -g y - w x - J Re(nb) - 2U (x^2+y^2) x
        jac(r, r) = -g + 4.0 * U * x * y;
        jac(r, r + 1) = w + 2.0 * U * (x * x + 3.0 * y * y);
        jac(r + 1, r) = -w - 2.0 * U * (3.0 * x * x + y * y);
        jac(r + 1, r + 1) = -g - 4.0 * U * x * y;
        for (int nb : {i - 1, i + 1}) {
            if (nb < 0 || nb >= n) continue;
            jac(r, 2 * nb + 1) = J;
            jac(r + 1, 2 * nb) = -J;
        }
    }
    return jac;
}

double spectral_abscissa(const Eigen::MatrixXd& m) {
    Eigen::EigenSolver<Eigen::MatrixXd> solver(m, false);
    if (solver.info() != Eigen::Success) throw StabilityError("real eigenvalue solver failed");
    return solver.eigenvalues().real().maxCoeff();
}

SteadyState newton_solve(const ChainParams& params, const Field& guess, const NewtonOptions& opts) {
    params.validate();
    if (guess.size() != static_cast<std::size_t>(params.n_sites)) {
        throw std::invalid_argument("guess length does not match n_sites");
    }
    const int n = params.n_sites;
    const double tol = tolerance(params, opts);

    SteadyState ss;
    ss.params = params;
    FieldState x{guess, 0.0};
    Field f = rhs(x, params);
    double norm = max_norm(f);
    double merit = l2_norm(f);
    int it = 0;
    while (norm > tol && it < opts.max_iterations && std::isfinite(norm)) {
        ++it;
        const Eigen::MatrixXd jac = flow_jacobian(x, params);
        Eigen::VectorXd b(2 * n);
        for (int i = 0; i < n; ++i) {
            b(2 * i) = -f[static_cast<std::size_t>(i)].real();
            b(2 * i + 1) = -f[static_cast<std::size_t>(i)].imag();
        }
        const Eigen::VectorXd dx = jac.partialPivLu().solve(b);
        if (!dx.allFinite()) break;

        // Backtracking (Armijo) on the Euclidean residual norm.
        double lambda = 1.0;
        FieldState trial = x;
        Field f_trial;
        double trial_merit = 0.0;
        bool improved = false;
        for (int k = 0; k < 40; ++k) {
            for (int i = 0; i < n; ++i) {
                trial.amplitudes[static_cast<std::size_t>(i)] =
                    x.amplitudes[static_cast<std::size_t>(i)] + lambda * Complex(dx(2 * i), dx(2 * i + 1));
            }
            f_trial = rhs(trial, params);
            trial_merit = l2_norm(f_trial);
            if (std::isfinite(trial_merit) && trial_merit < (1.0 - 1e-4 * lambda) * merit) {
                improved = true;
                break;
            }
            lambda *= 0.5;
        }
        if (!improved) break;
        x = std::move(trial);
        f = std::move(f_trial);
        merit = trial_merit;
        norm = max_norm(f);
    }
    ss.alpha_s = std::move(x.amplitudes);
    ss.residual_norm = norm;
    ss.newton_iterations = it;
    ss.converged = std::isfinite(norm) && norm <= tol;
    return ss;
}

namespace {

// Natural continuation in the drive amplitude from p_from (solution `start`)
// to p_to; stages that fail are bisected.
SteadyState ramp_drive(const ChainParams& params, Field start, double p_from, double p_to, int depth,
                       const NewtonOptions& opts, int& iterations) {
    ChainParams staged = params;
    staged.drive_amplitude = p_to;
    SteadyState ss = newton_solve(staged, start, opts);
    iterations += ss.newton_iterations;
    if (ss.converged || depth <= 0) return ss;
    const double p_mid = 0.5 * (p_from + p_to);
    SteadyState half = ramp_drive(params, std::move(start), p_from, p_mid, depth - 1, opts, iterations);
    if (!half.converged) return half;
    return ramp_drive(params, half.alpha_s, p_mid, p_to, depth - 1, opts, iterations);
}

SteadyState relax_then_newton(const ChainParams& params, const Field& start, const NewtonOptions& opts) {
    IntegratorConfig cfg;
    cfg.t_end = opts.relax_time;
    cfg.sample_interval = opts.relax_time;
    cfg.record_from = opts.relax_time;
    try {
        const Trajectory traj = integrate(params, FieldState{start, 0.0}, cfg, "relax");
        return newton_solve(params, traj.final_state.amplitudes, opts);
    } catch (const IntegrationError&) {
        SteadyState failed;
        failed.params = params;
        failed.alpha_s = start;
        failed.residual_norm = std::numeric_limits<double>::infinity();
        return failed;
    }
}

}  // namespace

SteadyState solve_steady_state(const ChainParams& params, const std::optional<FieldState>& guess,
                               const NewtonOptions& opts) {
    params.validate();
    SteadyState ss;
    int iterations = 0;
    if (guess) {
        ss = newton_solve(params, guess->amplitudes, opts);
        iterations = ss.newton_iterations;
    } else {
        const int stages = std::max(1, opts.drive_ramp_steps);
        Field current(static_cast<std::size_t>(params.n_sites));
        double p_prev = 0.0;
        for (int k = 1; k <= stages; ++k) {
            const double p_next = params.drive_amplitude * static_cast<double>(k) / static_cast<double>(stages);
            ss = ramp_drive(params, current, p_prev, p_next, opts.max_ramp_subdivisions, opts, iterations);
            if (!ss.converged) break;
            current = ss.alpha_s;
            p_prev = p_next;
        }
    }
    if (!ss.converged && opts.relax_time > 0.0) {
        const Field start = guess ? guess->amplitudes : Field(static_cast<std::size_t>(params.n_sites));
        SteadyState relaxed = relax_then_newton(params, start, opts);
        iterations += relaxed.newton_iterations;
        if (relaxed.converged || relaxed.residual_norm < ss.residual_norm) ss = std::move(relaxed);
    }
    ss.params = params;
    ss.newton_iterations = iterations;
    return ss;
}

Field linear_steady_state(const ChainParams& params) {
    params.validate();
    if (params.nonlinearity != 0.0) throw std::invalid_argument("linear_steady_state requires U = 0");
    // 0 = -(g_i + i w_i) a_i - iJ (a_{i-1} + a_{i+1}) - ip delta_{i,1}
    const auto n = static_cast<std::size_t>(params.n_sites);
    const Complex off(0.0, -params.hopping);
    std::vector<Complex> diag(n), rhs_vec(n, Complex(0.0, 0.0));
    for (std::size_t i = 0; i < n; ++i) {
        const int site = static_cast<int>(i);
        diag[i] = Complex(-site_loss(params, site), -(params.detuning + params.shift(site)));
    }
    rhs_vec[0] = Complex(0.0, params.drive_amplitude);

    std::vector<Complex> c_prime(n), d_prime(n);
    c_prime[0] = off / diag[0];
    d_prime[0] = rhs_vec[0] / diag[0];
    for (std::size_t i = 1; i < n; ++i) {
        const Complex denom = diag[i] - off * c_prime[i - 1];
        if (std::abs(denom) == 0.0) throw std::runtime_error("singular linear chain (zero pivot)");
        c_prime[i] = off / denom;
        d_prime[i] = (rhs_vec[i] - off * d_prime[i - 1]) / denom;
    }
    Field x(n);
    x[n - 1] = d_prime[n - 1];
    for (std::size_t i = n - 1; i-- > 0;) x[i] = d_prime[i] - c_prime[i] * x[i + 1];
    return x;
}

Eigen::MatrixXcd assemble_bdg(const ChainParams& params, const SteadyState& ss) {
    if (!ss.converged) throw StabilityError("assemble_bdg requires a converged steady state");
    const int n = params.n_sites;
    const double J = params.hopping;
    const double U = params.nonlinearity;
    const Complex I(0.0, 1.0);
    Eigen::MatrixXcd a = Eigen::MatrixXcd::Zero(2 * n, 2 * n);
    for (int j = 0; j < n; ++j) {
        const Complex alpha = ss.alpha_s[static_cast<std::size_t>(j)];
        const double occ = std::norm(alpha);
        const double g = site_loss(params, j);
        const double w = params.detuning + params.shift(j);
        const int u = 2 * j;
        const int v = 2 * j + 1;
        // Linearized flow: d(da)/dt = M da + K conj(da) with
        // M_jj = -g - i(w + 4U n_j), M_j,j+-1 = -iJ, K_jj = -2iU alpha_j^2.
        // Then E U = i(M U + K V) and E V = i(conj(K) U + conj(M) V).
        a(u, u) = -I * g + w + 4.0 * U * occ;
        a(u, v) = 2.0 * U * alpha * alpha;
        a(v, u) = -2.0 * U * std::conj(alpha) * std::conj(alpha);
        a(v, v) = -I * g - w - 4.0 * U * occ;
        for (int nb : {j - 1, j + 1}) {
            if (nb < 0 || nb >= n) continue;
            a(u, 2 * nb) = J;
            a(v, 2 * nb + 1) = -J;
        }
    }
    return a;
}

BdgSpectrum growth_rate(const Eigen::MatrixXcd& matrix) {
    if (matrix.rows() != matrix.cols() || matrix.rows() == 0 || matrix.rows() % 2 != 0) {
        throw std::invalid_argument("growth_rate expects a non-empty square matrix of even dimension");
    }
    Eigen::ComplexEigenSolver<Eigen::MatrixXcd> solver(matrix, false);
    if (solver.info() != Eigen::Success) throw StabilityError("complex eigenvalue solver failed");
    BdgSpectrum spec;
    spec.matrix_dim = static_cast<int>(matrix.rows());
    spec.eigenvalues.assign(solver.eigenvalues().data(), solver.eigenvalues().data() + solver.eigenvalues().size());
    spec.max_im = -std::numeric_limits<double>::infinity();
    for (const auto& e : spec.eigenvalues) spec.max_im = std::max(spec.max_im, e.imag());
    return spec;
}

std::vector<StabilityScanEntry> stability_scan(const ChainParams& base, const std::vector<int>& n_grid,
                                               const StabilityScanOptions& opts) {
    if (!std::is_sorted(n_grid.begin(), n_grid.end()) ||
        std::adjacent_find(n_grid.begin(), n_grid.end()) != n_grid.end()) {
        throw std::invalid_argument("stability_scan grid must be strictly increasing");
    }
    std::vector<StabilityScanEntry> out;
    if (n_grid.empty()) return out;

    ChainParams params = base.with_sites(n_grid.front());
    SteadyState current;
    int n_now = 0;
    bool chain_ok = false;

    for (int target : n_grid) {
        if (!chain_ok) {
            // fresh drive ramp: first point, or continuation broke earlier
            params = base.with_sites(target);
            current = solve_steady_state(params, std::nullopt, opts.newton);
            n_now = target;
        }
        while (n_now < target) {
            ++n_now;
            params = base.with_sites(n_now);
            Field guess = current.alpha_s;
            guess.emplace_back(0.0, 0.0);
            current = solve_steady_state(params, FieldState{std::move(guess), 0.0}, opts.newton);
            if (!current.converged) break;
        }
        chain_ok = current.converged && n_now == target;

        StabilityScanEntry e;
        e.n_sites = target;
        e.steady = current;
        if (chain_ok) e.spectrum = growth_rate(assemble_bdg(params, current));
        out.push_back(std::move(e));
        if (!chain_ok && opts.stop_on_failure) break;
    }
    return out;
}

}  // namespace photon_lattice
