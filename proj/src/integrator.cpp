#include "photon_lattice/integrator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace photon_lattice {

namespace {

// Dormand-Prince 5(4) tableau.
constexpr double a21 = 1.0 / 5.0;
constexpr double a31 = 3.0 / 40.0, a32 = 9.0 / 40.0;
constexpr double a41 = 44.0 / 45.0, a42 = -56.0 / 15.0, a43 = 32.0 / 9.0;
constexpr double a51 = 19372.0 / 6561.0, a52 = -25360.0 / 2187.0, a53 = 64448.0 / 6561.0, a54 = -212.0 / 729.0;
constexpr double a61 = 9017.0 / 3168.0, a62 = -355.0 / 33.0, a63 = 46732.0 / 5247.0, a64 = 49.0 / 176.0,
                 a65 = -5103.0 / 18656.0;
constexpr double a71 = 35.0 / 384.0, a73 = 500.0 / 1113.0, a74 = 125.0 / 192.0, a75 = -2187.0 / 6784.0,
                 a76 = 11.0 / 84.0;
constexpr double e1 = 71.0 / 57600.0, e3 = -71.0 / 16695.0, e4 = 71.0 / 1920.0, e5 = -17253.0 / 339200.0,
                 e6 = 22.0 / 525.0, e7 = -1.0 / 40.0;

// PI controller constants (Hairer & Wanner, DOPRI5).
constexpr double kBeta = 0.04;
constexpr double kExpo1 = 0.2 - kBeta * 0.75;
constexpr double kSafety = 0.9;
constexpr double kMaxShrink = 5.0;  // h_new >= h / 5
constexpr double kMaxGrow = 10.0;   // h_new <= 10 h

bool finite(const Field& f) {
    for (const auto& a : f) {
        if (!std::isfinite(a.real()) || !std::isfinite(a.imag())) return false;
    }
    return true;
}

Complex hermite(const Complex& y0, const Complex& f0, const Complex& y1, const Complex& f1, double h, double s) {
    const double s2 = s * s;
    const double s3 = s2 * s;
    const double h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
    const double h10 = s3 - 2.0 * s2 + s;
    const double h01 = -2.0 * s3 + 3.0 * s2;
    const double h11 = s3 - s2;
    return h00 * y0 + (h10 * h) * f0 + h01 * y1 + (h11 * h) * f1;
}

}  // namespace

void IntegratorConfig::validate() const {
    if (!(rel_tol > 0.0) || !(abs_tol > 0.0)) throw std::invalid_argument("tolerances must be > 0");
    if (rel_tol < 1e-14) throw std::invalid_argument("rel_tol below 1e-14 is not attainable in double precision");
    if (!(initial_step > 0.0) || !(max_step > 0.0)) throw std::invalid_argument("step sizes must be > 0");
    if (!(sample_interval > 0.0)) throw std::invalid_argument("sample_interval must be > 0");
    if (!(t_end >= sample_interval)) throw std::invalid_argument("t_end must be >= sample_interval");
    if (!(record_from >= 0.0) || record_from > t_end) throw std::invalid_argument("record_from must lie in [0, t_end]");
}

DormandPrince::DormandPrince(const ChainParams& params, const IntegratorConfig& cfg)
    : params_(params), cfg_(cfg), k_(7, Field(static_cast<std::size_t>(params.n_sites))),
      stage_(static_cast<std::size_t>(params.n_sites)) {}

StepResult DormandPrince::attempt(const FieldState& state, const Field& deriv, double h, Field& next_deriv) {
    const std::size_t n = state.amplitudes.size();
    const Field& y = state.amplitudes;
    auto& k1 = deriv;
    auto& k2 = k_[1];
    auto& k3 = k_[2];
    auto& k4 = k_[3];
    auto& k5 = k_[4];
    auto& k6 = k_[5];

    for (std::size_t i = 0; i < n; ++i) stage_[i] = y[i] + h * (a21 * k1[i]);
    rhs_into(stage_, params_, k2);
    for (std::size_t i = 0; i < n; ++i) stage_[i] = y[i] + h * (a31 * k1[i] + a32 * k2[i]);
    rhs_into(stage_, params_, k3);
    for (std::size_t i = 0; i < n; ++i) stage_[i] = y[i] + h * (a41 * k1[i] + a42 * k2[i] + a43 * k3[i]);
    rhs_into(stage_, params_, k4);
    for (std::size_t i = 0; i < n; ++i)
        stage_[i] = y[i] + h * (a51 * k1[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i]);
    rhs_into(stage_, params_, k5);
    for (std::size_t i = 0; i < n; ++i)
        stage_[i] = y[i] + h * (a61 * k1[i] + a62 * k2[i] + a63 * k3[i] + a64 * k4[i] + a65 * k5[i]);
    rhs_into(stage_, params_, k6);

    StepResult result;
    Field y_new(n);
    for (std::size_t i = 0; i < n; ++i)
        y_new[i] = y[i] + h * (a71 * k1[i] + a73 * k3[i] + a74 * k4[i] + a75 * k5[i] + a76 * k6[i]);
    next_deriv.resize(n);
    rhs_into(y_new, params_, next_deriv);

    // Mixed absolute/relative norm, RMS over real and imaginary parts; each
    // site is scaled by its own modulus.
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const Complex e = h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] + e7 * next_deriv[i]);
        const double scale = cfg_.abs_tol + cfg_.rel_tol * std::max(std::abs(y[i]), std::abs(y_new[i]));
        const double er = e.real() / scale;
        const double ei = e.imag() / scale;
        sum += er * er + ei * ei;
    }
    double err = std::sqrt(sum / static_cast<double>(2 * n));
    if (!std::isfinite(err) || !finite(y_new)) err = std::numeric_limits<double>::infinity();
    result.error = err;

    const double fac11 = std::isfinite(err) ? std::pow(err, kExpo1) : kMaxShrink * kSafety;
    if (err <= 1.0) {
        double fac = fac11 / std::pow(err_prev_, kBeta);
        fac = std::clamp(fac / kSafety, 1.0 / kMaxGrow, kMaxShrink);
        double h_new = std::min(h / fac, cfg_.max_step);
        if (last_rejected_) h_new = std::min(h_new, h);
        err_prev_ = std::max(err, 1e-4);
        last_rejected_ = false;
        result.accepted = true;
        result.h_next = h_new;
        result.state.amplitudes = std::move(y_new);
        result.state.time = state.time + h;
    } else {
        result.accepted = false;
        result.h_next = h / std::min(kMaxShrink, fac11 / kSafety);
        last_rejected_ = true;
        result.state = state;
    }
    return result;
}

StepResult step(const ChainParams& params, const FieldState& state, double h, const IntegratorConfig& cfg) {
    if (!(h > 0.0)) throw std::invalid_argument("step size must be > 0");
    DormandPrince stepper(params, cfg);
    Field next_deriv;
    return stepper.attempt(state, rhs(state, params), h, next_deriv);
}

Trajectory integrate(const ChainParams& params, const FieldState& ic, const IntegratorConfig& cfg,
                     std::string ic_descriptor, const StepObserver& observer) {
    params.validate();
    cfg.validate();
    if (ic.amplitudes.size() != static_cast<std::size_t>(params.n_sites)) {
        throw std::invalid_argument("initial condition length does not match n_sites");
    }
    if (!ic.is_finite()) throw IntegrationError(IntegrationErrorKind::NonFinite, ic.time, "non-finite initial condition");

    Trajectory traj;
    traj.params = params;
    traj.ic_descriptor = std::move(ic_descriptor);

    const double dt_s = cfg.sample_interval;
    const auto first_k = static_cast<long long>(std::ceil(std::max(ic.time, cfg.record_from) / dt_s - 1e-9));
    const auto last_k = static_cast<long long>(std::floor(cfg.t_end / dt_s + 1e-9));
    const std::size_t n_samples = last_k >= first_k ? static_cast<std::size_t>(last_k - first_k + 1) : 0;
    traj.sample_times.reserve(n_samples);
    traj.alpha_last.reserve(n_samples);
    if (cfg.record_full_field) traj.full_field.reserve(n_samples);

    const std::size_t last = static_cast<std::size_t>(params.n_sites - 1);
    long long next_k = first_k;
    auto record = [&](double t, const Field& f) {
        traj.sample_times.push_back(t);
        traj.alpha_last.push_back(f[last]);
        if (cfg.record_full_field) traj.full_field.push_back(f);
    };

    FieldState state = ic;
    Field deriv = rhs(state, params);
    Field next_deriv;
    if (next_k <= last_k && std::abs(static_cast<double>(next_k) * dt_s - state.time) < 1e-12) {
        record(static_cast<double>(next_k) * dt_s, state.amplitudes);
        ++next_k;
    }

    DormandPrince stepper(params, cfg);
    double h = std::min(cfg.initial_step, cfg.max_step);
    Field interp(static_cast<std::size_t>(params.n_sites));

    while (state.time < cfg.t_end) {
        const double remaining = cfg.t_end - state.time;
        bool clipped = false;
        if (h >= remaining) {
            h = remaining;
            clipped = true;
        }
        if (h < kMinStep) {
            if (clipped) break;
            std::ostringstream msg;
            msg << "step size underflow (h=" << h << ") at t=" << state.time;
            throw IntegrationError(IntegrationErrorKind::StepUnderflow, state.time, msg.str());
        }
        StepResult res = stepper.attempt(state, deriv, h, next_deriv);
        if (!res.accepted) {
            ++traj.rejected_steps;
            if (!std::isfinite(res.error) && res.h_next < kMinStep) {
                std::ostringstream msg;
                msg << "non-finite field at t=" << state.time;
                throw IntegrationError(IntegrationErrorKind::NonFinite, state.time, msg.str());
            }
            h = res.h_next;
            continue;
        }
        ++traj.accepted_steps;
        const double t0 = state.time;
        const double t1 = clipped ? cfg.t_end : res.state.time;
        res.state.time = t1;
        const double hs = t1 - t0;

        while (next_k <= last_k) {
            const double tk = static_cast<double>(next_k) * dt_s;
            if (tk > t1 + 1e-12) break;
            if (std::abs(tk - t1) <= 1e-12) {
                record(tk, res.state.amplitudes);
            } else {
                const double s = (tk - t0) / hs;
                for (std::size_t i = 0; i < interp.size(); ++i) {
                    interp[i] = hermite(state.amplitudes[i], deriv[i], res.state.amplitudes[i], next_deriv[i], hs, s);
                }
                record(tk, interp);
            }
            ++next_k;
        }

        if (observer) observer(state, deriv, res.state, next_deriv);
        state = std::move(res.state);
        std::swap(deriv, next_deriv);
        if (!clipped) h = res.h_next;
    }

    traj.final_state = std::move(state);
    return traj;
}

}  // namespace photon_lattice
