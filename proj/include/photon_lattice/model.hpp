#pragma once

#include <complex>
#include <span>
#include <vector>

namespace photon_lattice {

using Complex = std::complex<double>;
using Field = std::vector<Complex>;

/// Parameters of one boundary-driven Bose-Hubbard chain in the mean-field
/// limit. Every rate and amplitude is expressed in units of the hopping J.
struct ChainParams {
    int n_sites = 1;
    double hopping = 1.0;
    double nonlinearity = 0.0;
    double drive_amplitude = 0.0;
    double detuning = 0.0;
    double kappa_boundary = 1.0;
    double kappa_bulk = 0.0;
    /// Per-site frequency shifts; empty is shorthand for all zeros.
    std::vector<double> site_detuning_shifts;

    /// Throws std::invalid_argument when an invariant is violated.
    void validate() const;

    double shift(int site) const {
        return site_detuning_shifts.empty() ? 0.0 : site_detuning_shifts[static_cast<std::size_t>(site)];
    }

    /// Copy with a new length; shifts are truncated or zero-padded.
    ChainParams with_sites(int n) const;
};

struct FieldState {
    Field amplitudes;
    double time = 0.0;

    static FieldState zeros(int n_sites) { return {Field(static_cast<std::size_t>(n_sites)), 0.0}; }
    bool is_finite() const;
};

/// Writes d(alpha)/dt into `out`. `alpha` and `out` must both hold n_sites
/// entries and must not alias.
///
/// Site 1:   -(kappa/2 + i(delta+xi_1)) a_1 - iJ a_2 - 2iU|a_1|^2 a_1 - ip
/// Interior: -(kappa_bulk/2 + i(delta+xi_i)) a_i - iJ(a_{i+1}+a_{i-1}) - 2iU|a_i|^2 a_i
/// Site N:   -(kappa/2 + i(delta+xi_N)) a_N - iJ a_{N-1} - 2iU|a_N|^2 a_N
///
/// A single-site chain carries the drive and one boundary loss kappa/2.
void rhs_into(std::span<const Complex> alpha, const ChainParams& params, std::span<Complex> out);

Field rhs(const FieldState& state, const ChainParams& params);

double total_intensity(const FieldState& state);

/// Net intensity injected by drive and removed by losses:
/// -kappa(|a_1|^2+|a_N|^2) - kappa_bulk * sum_interior |a_i|^2 - 2p Im(a_1).
double intensity_source(const FieldState& state, const ChainParams& params);

/// 2 Re<alpha, rhs(alpha)> minus intensity_source. Hopping and Kerr terms
/// conserve total intensity, so this vanishes up to rounding.
double intensity_balance_residual(const FieldState& state, const ChainParams& params);

/// Current 2J Im(conj(a_i) a_{i+1}) across bond i (1-based, 1 <= i <= N-1).
double photon_current(const FieldState& state, const ChainParams& params, int bond);

}  // namespace photon_lattice
