// oscillator.hpp: central oscillator bilinearly coupled to a zero-temperature bath
//
// H = Omega a^dag a + sum_l w_l b_l^dag b_l + sum_l g_l (a b_l^dag + a^dag b_l).
// Products of coherent states stay products; their labels follow the linear
// classical flow
//   i dz/dt      = Omega z + sum_l g_l beta_l
//   i dbeta_l/dt = w_l beta_l + g_l z,
// so a cat state evolves into two Gaussian branches and the central coherence
// is the overlap of the two bath states.

#pragma once

#include <cmath>
#include <complex>
#include <numbers>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "loschmidt/errors.hpp"
#include "loschmidt/linalg.hpp"

namespace loschmidt {

class OscillatorBathModel {
public:
    OscillatorBathModel(double omega_central, std::vector<double> bath_frequencies, std::vector<double> couplings,
                        int fock_cutoff = 20)
        : omega_(omega_central), w_(std::move(bath_frequencies)), g_(std::move(couplings)), cutoff_(fock_cutoff) {
        if (w_.empty())
            throw DomainError("bath needs at least one mode");
        if (w_.size() != g_.size())
            throw DimensionError("bath frequencies and couplings differ in length");
        if (!std::isfinite(omega_))
            throw DomainError("central frequency must be finite");
        for (std::size_t l = 0; l < w_.size(); ++l)
            if (!std::isfinite(w_[l]) || !std::isfinite(g_[l]))
                throw DomainError("bath frequencies and couplings must be finite");
        if (cutoff_ < 1)
            throw DomainError("Fock cutoff must be positive");
    }

    double omega_central() const { return omega_; }
    const std::vector<double>& bath_frequencies() const { return w_; }
    const std::vector<double>& couplings() const { return g_; }
    Index modes() const { return static_cast<Index>(w_.size()); }
    int fock_cutoff() const { return cutoff_; }

    // Gershgorin bound on the normal-mode frequencies of the classical flow.
    double frequency_bound() const {
        double g_sum = 0.0;
        double bound = 0.0;
        for (std::size_t l = 0; l < w_.size(); ++l) {
            g_sum += std::abs(g_[l]);
            bound = std::max(bound, std::abs(w_[l]) + std::abs(g_[l]));
        }
        return std::max(bound, std::abs(omega_) + g_sum);
    }

private:
    double omega_;
    std::vector<double> w_;
    std::vector<double> g_;
    int cutoff_;
};

struct GaussianBranch {
    double time = 0.0;
    Complex z;
    std::vector<Complex> beta;
    // Phase of the driven-bath picture: the Schroedinger solution under the
    // driven bath Hamiltonian is exp(i phi) |B(t)>.
    double phi = 0.0;

    double excitation() const {
        double n = std::norm(z);
        for (const Complex& b : beta) n += std::norm(b);
        return n;
    }
};

// dt = min(1e-3 * 2 pi / w_max, t / 1000).
inline double default_time_step(const OscillatorBathModel& model, double t) {
    const double w_max = model.frequency_bound();
    double dt = w_max > 0.0 ? 1e-3 * 2.0 * std::numbers::pi / w_max : t / 1000.0;
    if (t > 0.0) dt = std::min(dt, t / 1000.0);
    return dt;
}

namespace detail {

struct FlowState {
    Vector y;  // (z, beta_1..beta_L)
    double phi;
};

inline FlowState flow_derivative(const OscillatorBathModel& model, const Vector& y) {
    const auto& w = model.bath_frequencies();
    const auto& g = model.couplings();
    const Index modes = model.modes();
    const Complex z = y(0);
    Vector dy(modes + 1);
    Complex drive = model.omega_central() * z;
    Complex coupled_beta = 0.0;
    for (Index l = 0; l < modes; ++l) {
        const auto i = static_cast<std::size_t>(l);
        const Complex b = y(l + 1);
        coupled_beta += g[i] * b;
        dy(l + 1) = -kI * (w[i] * b + g[i] * z);
    }
    dy(0) = -kI * (drive + coupled_beta);
    // phi_dot = -sum_l g_l Re(conj(z) beta_l)
    const double dphi = -std::real(std::conj(z) * coupled_beta);
    return {std::move(dy), dphi};
}

inline GaussianBranch to_branch(double t, const Vector& y, double phi) {
    GaussianBranch b;
    b.time = t;
    b.z = y(0);
    b.beta.assign(y.data() + 1, y.data() + y.size());
    b.phi = phi;
    return b;
}

} // namespace detail

// Fixed-step RK4 from (z0, beta = 0, phi = 0) to time t with n = ceil(t/dt)
// equal steps; returns all n + 1 samples. The phase rides along as an extra
// component of the same RK4 system.
inline std::vector<GaussianBranch> classical_trajectory(const OscillatorBathModel& model, Complex z0, double t,
                                                        double dt) {
    if (!(t >= 0.0) || !std::isfinite(t))
        throw DomainError("evolution time must be finite and non-negative");
    Vector y = Vector::Zero(model.modes() + 1);
    y(0) = z0;
    std::vector<GaussianBranch> out;
    if (t == 0.0) {
        out.push_back(detail::to_branch(0.0, y, 0.0));
        return out;
    }
    if (!(dt > 0.0) || dt > t)
        throw DomainError("time step must satisfy 0 < dt <= t");
    const auto steps = static_cast<Index>(std::ceil(t / dt - 1e-9));
    const double h = t / static_cast<double>(steps);
    out.reserve(static_cast<std::size_t>(steps) + 1);
    double phi = 0.0;
    out.push_back(detail::to_branch(0.0, y, phi));
    for (Index n = 0; n < steps; ++n) {
        const auto k1 = detail::flow_derivative(model, y);
        const auto k2 = detail::flow_derivative(model, y + (0.5 * h) * k1.y);
        const auto k3 = detail::flow_derivative(model, y + (0.5 * h) * k2.y);
        const auto k4 = detail::flow_derivative(model, y + h * k3.y);
        y += (h / 6.0) * (k1.y + 2.0 * k2.y + 2.0 * k3.y + k4.y);
        phi += (h / 6.0) * (k1.phi + 2.0 * k2.phi + 2.0 * k3.phi + k4.phi);
        out.push_back(detail::to_branch(h * static_cast<double>(n + 1), y, phi));
    }
    const double n0 = std::norm(z0);
    const double drift = std::abs(out.back().excitation() - n0);
    if (drift > 1e-6 * std::max(1.0, n0))
        throw NumericalError("classical flow excitation drift " + std::to_string(drift) +
                             " exceeds 1e-6; reduce the time step");
    return out;
}

inline GaussianBranch classical_flow(const OscillatorBathModel& model, Complex z0, double t, double dt) {
    return classical_trajectory(model, z0, t, dt).back();
}

// <bra|ket> for normalized single-mode coherent states.
inline Complex coherent_overlap(Complex bra, Complex ket) {
    return std::exp(-0.5 * std::norm(bra) - 0.5 * std::norm(ket) + std::conj(bra) * ket);
}

// <B2|B1> = prod_l <beta_l^(2)|beta_l^(1)>.
inline Complex branch_overlap(const GaussianBranch& b1, const GaussianBranch& b2) {
    if (b1.beta.size() != b2.beta.size())
        throw DimensionError("branches have different bath sizes");
    Complex exponent = 0.0;
    for (std::size_t l = 0; l < b1.beta.size(); ++l)
        exponent += -0.5 * std::norm(b1.beta[l]) - 0.5 * std::norm(b2.beta[l]) + std::conj(b2.beta[l]) * b1.beta[l];
    return std::exp(exponent);
}

struct CatStateSpec {
    Complex z1;
    Complex z2;

    double separation() const { return std::abs(z1 - z2); }
    // <z1|z2> of the central coherent states at t = 0.
    Complex initial_overlap() const { return coherent_overlap(z1, z2); }
    // N^2 for N (|z1> + |z2>) |0>; equals 1/2 when the states are orthogonal.
    double normalization_squared() const { return 1.0 / (2.0 + 2.0 * std::real(initial_overlap())); }
};

struct CatBranches {
    GaussianBranch first;
    GaussianBranch second;

    // Bath fidelity amplitude <B2|B1>.
    Complex fidelity() const { return branch_overlap(first, second); }
};

inline CatBranches cat_branches(const OscillatorBathModel& model, const CatStateSpec& spec, double t, double dt) {
    return {classical_flow(model, spec.z1, t, dt), classical_flow(model, spec.z2, t, dt)};
}

// Coefficient of |z1(t)><z2(t)| with the 1/sqrt(2) normalization that treats
// the two coherent states as orthogonal: 1/2 <B2|B1>.
inline Complex cat_coherence(const OscillatorBathModel& model, const CatStateSpec& spec, double t, double dt) {
    return 0.5 * cat_branches(model, spec, t, dt).fidelity();
}

// Same coefficient with the exact normalization N^2 = 1/(2 + 2 Re<z1|z2>).
inline Complex cat_coherence_normalized(const OscillatorBathModel& model, const CatStateSpec& spec, double t,
                                        double dt) {
    return spec.normalization_squared() * cat_branches(model, spec, t, dt).fidelity();
}

// alpha(tau) = sum_l |g_l|^2 exp(-i w_l tau).
inline Complex memory_kernel(std::span<const double> frequencies, std::span<const Complex> couplings, double tau) {
    if (frequencies.size() != couplings.size())
        throw DimensionError("bath frequencies and couplings differ in length");
    Complex sum = 0.0;
    for (std::size_t l = 0; l < frequencies.size(); ++l)
        sum += std::norm(couplings[l]) * std::exp(-kI * (frequencies[l] * tau));
    return sum;
}

inline Complex memory_kernel(const OscillatorBathModel& model, double tau) {
    Complex sum = 0.0;
    const auto& w = model.bath_frequencies();
    const auto& g = model.couplings();
    for (std::size_t l = 0; l < w.size(); ++l) sum += g[l] * g[l] * std::exp(-kI * (w[l] * tau));
    return sum;
}

// Markov damped amplitude z0 exp(-i Omega t - gamma t / 2).
inline Complex markov_amplitude(double gamma, double omega_central, Complex z0, double t) {
    return z0 * std::exp(-kI * (omega_central * t) - 0.5 * gamma * t);
}

namespace detail {
// -|dz|^2 / 2 + i Im(conj(z2) z1): exponent of <B2|B1> per unit of
// transferred fraction (1 - |z(t)|^2 / |z0|^2).
inline Complex markov_exponent(const CatStateSpec& spec) {
    return -0.5 * std::norm(spec.z1 - spec.z2) + kI * std::imag(std::conj(spec.z2) * spec.z1);
}
} // namespace detail

// Short-time Markov law for the normalized coherence rho_12(t) / rho_12(0):
// |.|^2 = exp(-gamma t |z1 - z2|^2).
inline Complex markov_reference(double gamma, const CatStateSpec& spec, double t) {
    if (!(gamma >= 0.0))
        throw DomainError("damping rate must be non-negative");
    return std::exp(gamma * t * detail::markov_exponent(spec));
}

// Markov kernel without the gamma t << 1 expansion:
// |.|^2 = exp(-|z1 - z2|^2 (1 - exp(-gamma t))).
inline Complex markov_exact(double gamma, const CatStateSpec& spec, double t) {
    if (!(gamma >= 0.0))
        throw DomainError("damping rate must be non-negative");
    return std::exp(-std::expm1(-gamma * t) * detail::markov_exponent(spec));
}

// Equally spaced modes at the cell midpoints of [omega_min, omega_max] with
// |g|^2 = gamma dw / (2 pi): the kernel approximates gamma delta(tau) up to
// the recurrence time 2 pi / dw.
inline OscillatorBathModel ohmic_flat_bath(double omega_central, Index modes, double omega_min, double omega_max,
                                           double gamma, int fock_cutoff = 20) {
    if (modes < 1)
        throw DomainError("flat bath needs at least one mode");
    if (!(omega_max > omega_min))
        throw DomainError("flat bath band must have omega_max > omega_min");
    if (!(gamma >= 0.0))
        throw DomainError("damping rate must be non-negative");
    if (omega_central < omega_min || omega_central > omega_max)
        throw DomainError("central frequency lies outside the bath band (no resonant damping)");
    const double dw = (omega_max - omega_min) / static_cast<double>(modes);
    const double g = std::sqrt(gamma * dw / (2.0 * std::numbers::pi));
    std::vector<double> w(static_cast<std::size_t>(modes));
    for (Index l = 0; l < modes; ++l) w[static_cast<std::size_t>(l)] = omega_min + (static_cast<double>(l) + 0.5) * dw;
    return OscillatorBathModel(omega_central, std::move(w), std::vector<double>(static_cast<std::size_t>(modes), g),
                               fock_cutoff);
}

inline double flat_bath_recurrence_time(double omega_min, double omega_max, Index modes) {
    return 2.0 * std::numbers::pi * static_cast<double>(modes) / (omega_max - omega_min);
}

} // namespace loschmidt
