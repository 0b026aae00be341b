#include "photon_lattice/model.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace photon_lattice {

namespace {

bool finite_non_negative(double x) { return std::isfinite(x) && x >= 0.0; }

}  // namespace

void ChainParams::validate() const {
    if (n_sites < 1) throw std::invalid_argument("n_sites must be >= 1");
    if (!(std::isfinite(hopping) && hopping > 0.0)) throw std::invalid_argument("hopping must be finite and > 0");
    if (!finite_non_negative(nonlinearity)) throw std::invalid_argument("nonlinearity must be finite and >= 0");
    if (!finite_non_negative(drive_amplitude)) throw std::invalid_argument("drive_amplitude must be finite and >= 0");
    if (!std::isfinite(detuning)) throw std::invalid_argument("detuning must be finite");
    if (!finite_non_negative(kappa_boundary)) throw std::invalid_argument("kappa_boundary must be finite and >= 0");
    if (!finite_non_negative(kappa_bulk)) throw std::invalid_argument("kappa_bulk must be finite and >= 0");
    if (!site_detuning_shifts.empty() && site_detuning_shifts.size() != static_cast<std::size_t>(n_sites)) {
        throw std::invalid_argument("site_detuning_shifts has length " + std::to_string(site_detuning_shifts.size()) +
                                    ", expected " + std::to_string(n_sites));
    }
    for (double xi : site_detuning_shifts) {
        if (!std::isfinite(xi)) throw std::invalid_argument("site_detuning_shifts must be finite");
    }
}

ChainParams ChainParams::with_sites(int n) const {
    ChainParams out = *this;
    out.n_sites = n;
    if (!out.site_detuning_shifts.empty()) out.site_detuning_shifts.resize(static_cast<std::size_t>(n), 0.0);
    return out;
}

bool FieldState::is_finite() const {
    if (!std::isfinite(time)) return false;
    for (const auto& a : amplitudes) {
        if (!std::isfinite(a.real()) || !std::isfinite(a.imag())) return false;
    }
    return true;
}

// Written in real arithmetic: std::complex multiplication without
// -ffast-math goes through the Annex G slow path and dominates the runtime.
void rhs_into(std::span<const Complex> alpha, const ChainParams& params, std::span<Complex> out) {
    const int n = params.n_sites;
    const double J = params.hopping;
    const double two_u = 2.0 * params.nonlinearity;
    const bool has_shifts = !params.site_detuning_shifts.empty();

    for (int i = 0; i < n; ++i) {
        const double re = alpha[i].real();
        const double im = alpha[i].imag();
        const bool boundary = (i == 0 || i == n - 1);
        const double loss = 0.5 * (boundary ? params.kappa_boundary : params.kappa_bulk);
        const double freq = params.detuning + (has_shifts ? params.site_detuning_shifts[i] : 0.0) +
                            two_u * (re * re + im * im);

        double nb_re = 0.0;
        double nb_im = 0.0;
        if (i > 0) {
            nb_re += alpha[i - 1].real();
            nb_im += alpha[i - 1].imag();
        }
        if (i < n - 1) {
            nb_re += alpha[i + 1].real();
            nb_im += alpha[i + 1].imag();
        }

        // -(loss + i*freq) a - iJ nb ; -i(x + iy) = y - ix
        double d_re = -loss * re + freq * im + J * nb_im;
        double d_im = -loss * im - freq * re - J * nb_re;
        if (i == 0) d_im -= params.drive_amplitude;
        out[i] = Complex(d_re, d_im);
    }
}

Field rhs(const FieldState& state, const ChainParams& params) {
    Field out(state.amplitudes.size());
    rhs_into(state.amplitudes, params, out);
    return out;
}

double total_intensity(const FieldState& state) {
    double sum = 0.0;
    for (const auto& a : state.amplitudes) sum += std::norm(a);
    return sum;
}

double intensity_source(const FieldState& state, const ChainParams& params) {
    const auto& a = state.amplitudes;
    const int n = params.n_sites;
    double boundary = std::norm(a.front());
    if (n > 1) boundary += std::norm(a.back());
    double interior = 0.0;
    for (int i = 1; i < n - 1; ++i) interior += std::norm(a[i]);
    return -params.kappa_boundary * boundary - params.kappa_bulk * interior -
           2.0 * params.drive_amplitude * a.front().imag();
}

double intensity_balance_residual(const FieldState& state, const ChainParams& params) {
    const Field d = rhs(state, params);
    double flow = 0.0;
    for (std::size_t i = 0; i < d.size(); ++i) {
        flow += state.amplitudes[i].real() * d[i].real() + state.amplitudes[i].imag() * d[i].imag();
    }
    return 2.0 * flow - intensity_source(state, params);
}

double photon_current(const FieldState& state, const ChainParams& params, int bond) {
    if (bond < 1 || bond > params.n_sites - 1) {
        throw std::out_of_range("bond index " + std::to_string(bond) + " outside [1, " +
                                std::to_string(params.n_sites - 1) + "]");
    }
    const Complex a = state.amplitudes[static_cast<std::size_t>(bond - 1)];
    const Complex b = state.amplitudes[static_cast<std::size_t>(bond)];
    return 2.0 * params.hopping * (a.real() * b.imag() - a.imag() * b.real());
}

}  // namespace photon_lattice
