#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "photon_lattice/model.hpp"

namespace testsupport {

using photon_lattice::ChainParams;
using photon_lattice::Complex;
using photon_lattice::Field;

// Reference equations of motion written directly in complex arithmetic,
// independent of the optimized library kernel.
inline Field reference_rhs(const Field& a, const ChainParams& p) {
    const std::size_t n = a.size();
    const Complex i1(0.0, 1.0);
    Field d(n);
    for (std::size_t j = 0; j < n; ++j) {
        const bool boundary = j == 0 || j + 1 == n;
        double loss = boundary ? p.kappa_boundary / 2.0 : p.kappa_bulk / 2.0;
        if (n == 1) loss = p.kappa_boundary / 2.0;
        const double xi = p.site_detuning_shifts.empty() ? 0.0 : p.site_detuning_shifts[j];
        Complex hop = 0.0;
        if (j > 0) hop += a[j - 1];
        if (j + 1 < n) hop += a[j + 1];
        d[j] = -(loss + i1 * (p.detuning + xi)) * a[j] - i1 * p.hopping * hop -
               2.0 * i1 * p.nonlinearity * std::norm(a[j]) * a[j];
        if (j == 0) d[j] -= i1 * p.drive_amplitude;
    }
    return d;
}

inline Field random_field(std::mt19937_64& rng, int n, double scale) {
    std::normal_distribution<double> g(0.0, scale);
    Field f(static_cast<std::size_t>(n));
    for (auto& z : f) z = Complex(g(rng), g(rng));
    return f;
}

inline ChainParams random_params(std::mt19937_64& rng, int n) {
    std::uniform_real_distribution<double> u(0.0, 2.0);
    ChainParams p;
    p.n_sites = n;
    p.hopping = 1.0;
    p.nonlinearity = u(rng);
    p.drive_amplitude = 5.0 * u(rng);
    p.detuning = u(rng) - 1.0;
    p.kappa_boundary = 0.2 + u(rng);
    p.kappa_bulk = 0.1 * u(rng);
    return p;
}

inline double max_abs_diff(const Field& a, const Field& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

}  // namespace testsupport

#include <Eigen/Dense>

namespace testsupport {

// Fixed point of a U = 0 chain by a dense complex solve of the affine
// reference flow f(a) = M a + f(0).
inline Field dense_linear_fixed_point(const ChainParams& p) {
    const int n = p.n_sites;
    const Field zero(static_cast<std::size_t>(n));
    const Field f0 = reference_rhs(zero, p);
    Eigen::MatrixXcd m(n, n);
    for (int j = 0; j < n; ++j) {
        Field e = zero;
        e[static_cast<std::size_t>(j)] = 1.0;
        const Field col = reference_rhs(e, p);
        for (int i = 0; i < n; ++i) m(i, j) = col[static_cast<std::size_t>(i)] - f0[static_cast<std::size_t>(i)];
    }
    Eigen::VectorXcd b(n);
    for (int i = 0; i < n; ++i) b(i) = -f0[static_cast<std::size_t>(i)];
    const Eigen::VectorXcd x = m.fullPivLu().solve(b);
    Field out(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) out[static_cast<std::size_t>(i)] = x(i);
    return out;
}

// Central differences of the reference flow in (Re, Im) coordinates.
inline Eigen::MatrixXd fd_jacobian(const Field& a, const ChainParams& p) {
    const int n = static_cast<int>(a.size());
    Eigen::MatrixXd jac(2 * n, 2 * n);
    for (int col = 0; col < 2 * n; ++col) {
        const auto site = static_cast<std::size_t>(col / 2);
        const double h = 1e-6 * std::max(1.0, std::abs(a[site]));
        const Complex dz = col % 2 == 0 ? Complex(h, 0.0) : Complex(0.0, h);
        Field plus = a, minus = a;
        plus[site] += dz;
        minus[site] -= dz;
        const Field fp = reference_rhs(plus, p);
        const Field fm = reference_rhs(minus, p);
        for (int row = 0; row < n; ++row) {
            const Complex d = (fp[static_cast<std::size_t>(row)] - fm[static_cast<std::size_t>(row)]) / (2.0 * h);
            jac(2 * row, col) = d.real();
            jac(2 * row + 1, col) = d.imag();
        }
    }
    return jac;
}

// Largest real part of the eigenvalues, computed with a different Eigen
// routine than the library uses.
inline double abscissa_oracle(const Eigen::MatrixXd& m) {
    const Eigen::MatrixXcd c = m.cast<Complex>();
    Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(c, false);
    double best = -1e300;
    for (int i = 0; i < es.eigenvalues().size(); ++i) best = std::max(best, es.eigenvalues()(i).real());
    return best;
}

// Smallest distance from -conj(e) to any eigenvalue in the list.
inline double pairing_gap(const std::vector<Complex>& eig) {
    double worst = 0.0;
    for (const auto& e : eig) {
        double best = 1e300;
        for (const auto& f : eig) best = std::min(best, std::abs(f + std::conj(e)));
        worst = std::max(worst, best);
    }
    return worst;
}

}  // namespace testsupport
