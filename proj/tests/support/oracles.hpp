// Brute-force reference computations used only by the tests.
//
// Each routine deliberately avoids the library code path it is compared
// against (explicit loops, sequential application, finite differences).

#pragma once

#include <cmath>
#include <complex>
#include <numeric>
#include <vector>

#include <unsupported/Eigen/MatrixFunctions>

#include "loschmidt/dephasing.hpp"
#include "loschmidt/linalg.hpp"
#include "loschmidt/oscillator.hpp"

namespace loschmidt::oracle {

inline Matrix kron_by_index(const Matrix& a, const Matrix& b) {
    const Index m = a.rows();
    const Index n = b.rows();
    Matrix out(m * n, m * n);
    for (Index i = 0; i < m; ++i)
        for (Index j = 0; j < m; ++j)
            for (Index k = 0; k < n; ++k)
                for (Index l = 0; l < n; ++l) out(i * n + k, j * n + l) = a(i, j) * b(k, l);
    return out;
}

inline Matrix partial_trace_by_loops(const Vector& psi, Index dc, Index de) {
    Matrix rho = Matrix::Zero(dc, dc);
    for (Index j = 0; j < dc; ++j)
        for (Index k = 0; k < dc; ++k)
            for (Index m = 0; m < de; ++m) rho(j, k) += psi(j * de + m) * std::conj(psi(k * de + m));
    return rho;
}

// exp(-iHt) by Pade scaling-and-squaring (Eigen MatrixFunctions).
inline Matrix pade_propagator(const Matrix& h, double t) {
    const Matrix generator = Complex(0.0, -t) * h;
    return generator.exp();
}

// U2^dag U1^dag U2 U1 applied to chi0 one factor at a time.
inline Complex four_step_pi_pulse(const DephasingModel& model, const StateVector& chi0, double t) {
    const Matrix u1 = pade_propagator(model.branch_hamiltonian(0).matrix(), t / 2);
    const Matrix u2 = pade_propagator(model.branch_hamiltonian(1).matrix(), t / 2);
    Vector v = chi0.amplitudes();
    v = u1 * v;
    v = u2 * v;
    v = u1.adjoint() * v;
    v = u2.adjoint() * v;
    return chi0.amplitudes().dot(v);
}

// Truncated-Fock coherent state on one mode.
inline Vector fock_coherent(Complex beta, int cutoff) {
    Vector v(cutoff + 1);
    double log_fact = 0.0;
    for (int n = 0; n <= cutoff; ++n) {
        if (n > 0) log_fact += std::log(static_cast<double>(n));
        v(n) = std::exp(-0.5 * std::norm(beta) - 0.5 * log_fact) * std::pow(beta, n);
    }
    return v;
}

inline Vector kron_vectors(const Vector& a, const Vector& b) {
    Vector out(a.size() * b.size());
    for (Index i = 0; i < a.size(); ++i)
        for (Index k = 0; k < b.size(); ++k) out(i * b.size() + k) = a(i) * b(k);
    return out;
}

// Tensor product of per-mode truncated coherent states.
inline Vector fock_product(const std::vector<Complex>& labels, int cutoff) {
    Vector v = Vector::Ones(1);
    for (const Complex& b : labels) v = kron_vectors(v, fock_coherent(b, cutoff));
    return v;
}

// Max over the trajectory of |z' + i Omega z + int_0^t alpha(t - s) z(s) ds|,
// with z' from central differences and the integral by the trapezoid rule.
inline double kernel_residual(const OscillatorBathModel& model, const std::vector<GaussianBranch>& traj) {
    const std::size_t n = traj.size();
    const double h = traj[1].time - traj[0].time;
    std::vector<Complex> kernel(n);
    for (std::size_t i = 0; i < n; ++i) kernel[i] = memory_kernel(model, h * static_cast<double>(i));
    double worst = 0.0;
    for (std::size_t i = 1; i + 1 < n; ++i) {
        const Complex dz = (traj[i + 1].z - traj[i - 1].z) / (2.0 * h);
        Complex integral = 0.5 * (kernel[i] * traj[0].z + kernel[0] * traj[i].z);
        for (std::size_t k = 1; k < i; ++k) integral += kernel[i - k] * traj[k].z;
        integral *= h;
        worst = std::max(worst, std::abs(dz + kI * model.omega_central() * traj[i].z + integral));
    }
    return worst;
}

inline double least_squares_slope(const std::vector<double>& x, const std::vector<double>& y) {
    const double n = static_cast<double>(x.size());
    const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
    const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
    double sxy = 0.0;
    double sxx = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
    }
    return sxy / sxx;
}

} // namespace loschmidt::oracle
