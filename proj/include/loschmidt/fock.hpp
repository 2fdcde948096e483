// fock.hpp: truncated Fock-space routes for the oscillator bath
//
// FockOracle evolves the cat state of the central oscillator exactly in a
// number-truncated Fock basis and extracts the bath fidelity from the reduced
// state, without reference to the classical label flow. The driven echo
// propagates each bath mode under the two driven Hamiltonians
// H_j(t) = w b^dag b + g (z_j(t) b^dag + conj(z_j(t)) b).

#pragma once

#include <cmath>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "loschmidt/linalg.hpp"
#include "loschmidt/oscillator.hpp"

namespace loschmidt {

namespace detail {

// P(n > cutoff) for a Poisson distribution with mean mu.
inline double poisson_tail(double mu, int cutoff) {
    if (mu <= 0.0) return 0.0;
    double term = std::exp(-mu);
    for (int n = 1; n <= cutoff; ++n) term *= mu / n;
    double tail = 0.0;
    for (int n = cutoff + 1; n < cutoff + 2000; ++n) {
        term *= mu / n;
        tail += term;
        if (term < 1e-300 || (n > mu && term < 1e-18 * tail)) break;
    }
    return tail;
}

// Truncated coherent-state amplitudes e^{-|z|^2/2} z^n / sqrt(n!), n <= cutoff.
inline Vector coherent_amplitudes(Complex z, int cutoff) {
    Vector c(cutoff + 1);
    c(0) = std::exp(-0.5 * std::norm(z));
    for (int n = 1; n <= cutoff; ++n) c(n) = c(n - 1) * z / std::sqrt(static_cast<double>(n));
    return c;
}

} // namespace detail

struct FockCoherence {
    Complex fidelity;     // <B2|B1>
    Complex coefficient;  // 1/2 <B2|B1>, comparable to cat_coherence
    Complex normalized;   // N^2 <B2|B1>
};

// Exact evolution of H in the basis {n_0 + n_1 + ... + n_L <= cutoff}, with
// n_0 the central occupation. H conserves total excitation number, so the
// truncation only touches the initial state and each sector is diagonalized
// independently.
class FockOracle {
public:
    FockOracle(const OscillatorBathModel& model, const CatStateSpec& spec, Index max_states = kMaxJointDim)
        : spec_(spec), modes_(model.modes() + 1), cutoff_(model.fock_cutoff()) {
        enumerate_basis(max_states);
        for (const Complex z : {spec.z1, spec.z2}) {
            const double deficit = detail::poisson_tail(std::norm(z), cutoff_);
            if (deficit > 1e-8)
                throw DomainError("Fock cutoff " + std::to_string(cutoff_) + " truncates the coherent state |z| = " +
                                  std::to_string(std::abs(z)) + " (norm deficit " + std::to_string(deficit) +
                                  " > 1e-8); raise fock_cutoff");
        }
        build_sectors(model);
        initial_[0] = initial_branch(spec.z1);
        initial_[1] = initial_branch(spec.z2);
    }

    Index dim() const { return static_cast<Index>(basis_.size()); }
    int cutoff() const { return cutoff_; }
    const std::vector<std::vector<int>>& basis() const { return basis_; }

    // Joint state exp(-iHt) |z_i> (x) |0>, i = 0 for z1 and 1 for z2.
    Vector branch_state(int i, double t) const {
        const Vector& psi0 = initial_[i];
        Vector out(psi0.size());
        for (const Sector& s : sectors_) {
            const Index n = s.propagator.dim();
            out.segment(s.offset, n) = s.propagator.apply(t, Vector(psi0.segment(s.offset, n)));
        }
        return out;
    }

    // Fidelity from the reduced-state cross term X = Tr_e |psi1><psi2|: for
    // product branches X_00 = <0|z1(t)><z2(t)|0> <B2|B1>, and the vacuum
    // populations of each branch fix the coherent-state normalizations.
    FockCoherence at(double t) const {
        const Vector psi1 = branch_state(0, t);
        const Vector psi2 = branch_state(1, t);
        Complex cross = 0.0;
        double pop1 = 0.0;
        double pop2 = 0.0;
        for (Index a = 0; a < dim(); ++a) {
            if (basis_[static_cast<std::size_t>(a)][0] != 0) continue;
            cross += psi1(a) * std::conj(psi2(a));
            pop1 += std::norm(psi1(a));
            pop2 += std::norm(psi2(a));
        }
        const Complex fidelity = cross / std::sqrt(pop1 * pop2);
        return {fidelity, 0.5 * fidelity, spec_.normalization_squared() * fidelity};
    }

    // <psi| sum_m n_m |psi> / <psi|psi>.
    double excitation_expectation(const Vector& psi) const {
        double num = 0.0;
        for (Index a = 0; a < dim(); ++a) {
            int n = 0;
            for (int k : basis_[static_cast<std::size_t>(a)]) n += k;
            num += n * std::norm(psi(a));
        }
        return num / psi.squaredNorm();
    }

    // Reduced central state of N (|z1> + |z2>) |0> at time t, on occupations
    // 0..cutoff.
    DensityMatrix cat_reduced_state(double t) const {
        const Vector psi = std::sqrt(spec_.normalization_squared()) * (branch_state(0, t) + branch_state(1, t));
        Matrix rho = Matrix::Zero(cutoff_ + 1, cutoff_ + 1);
        for (const auto& [env, members] : env_groups_)
            for (Index a : members)
                for (Index b : members) {
                    const int n = basis_[static_cast<std::size_t>(a)][0];
                    const int m = basis_[static_cast<std::size_t>(b)][0];
                    rho(n, m) += psi(a) * std::conj(psi(b));
                }
        // Truncation leaves a trace deficit below the oracle's 1e-8 bound.
        rho /= rho.trace().real();
        return DensityMatrix(0.5 * (rho + rho.adjoint()));
    }

private:
    struct Sector {
        Index offset;
        SpectralPropagator propagator;
    };

    void enumerate_basis(Index max_states) {
        std::vector<int> occ(static_cast<std::size_t>(modes_), 0);
        for (int total = 0; total <= cutoff_; ++total) {
            sector_offsets_.push_back(static_cast<Index>(basis_.size()));
            append_compositions(occ, 0, total, max_states);
        }
        sector_offsets_.push_back(static_cast<Index>(basis_.size()));
        for (std::size_t a = 0; a < basis_.size(); ++a) {
            index_[basis_[a]] = static_cast<Index>(a);
            env_groups_[std::vector<int>(basis_[a].begin() + 1, basis_[a].end())].push_back(static_cast<Index>(a));
        }
    }

    void append_compositions(std::vector<int>& occ, Index mode, int remaining, Index max_states) {
        if (mode == modes_ - 1) {
            occ[static_cast<std::size_t>(mode)] = remaining;
            if (static_cast<Index>(basis_.size()) >= max_states)
                throw DimensionError("Fock basis exceeds " + std::to_string(max_states) +
                                     " states; lower fock_cutoff or the number of modes");
            basis_.push_back(occ);
            return;
        }
        for (int n = remaining; n >= 0; --n) {
            occ[static_cast<std::size_t>(mode)] = n;
            append_compositions(occ, mode + 1, remaining - n, max_states);
        }
    }

    void build_sectors(const OscillatorBathModel& model) {
        const auto& w = model.bath_frequencies();
        const auto& g = model.couplings();
        for (std::size_t s = 0; s + 1 < sector_offsets_.size(); ++s) {
            const Index begin = sector_offsets_[s];
            const Index n = sector_offsets_[s + 1] - begin;
            Matrix h = Matrix::Zero(n, n);
            for (Index a = 0; a < n; ++a) {
                const std::vector<int>& occ = basis_[static_cast<std::size_t>(begin + a)];
                double diag = model.omega_central() * occ[0];
                for (std::size_t l = 0; l < w.size(); ++l) diag += w[l] * occ[l + 1];
                h(a, a) = diag;
                // g a^dag b_l moves one quantum from bath mode l into the centre.
                for (std::size_t l = 0; l < w.size(); ++l) {
                    if (occ[l + 1] == 0) continue;
                    std::vector<int> target = occ;
                    target[0] += 1;
                    target[l + 1] -= 1;
                    const Index b = index_.at(target) - begin;
                    const double amp = g[l] * std::sqrt(static_cast<double>(occ[0] + 1) * occ[l + 1]);
                    h(b, a) += amp;
                    h(a, b) += amp;
                }
            }
            sectors_.push_back({begin, SpectralPropagator(HermitianOperator(std::move(h)))});
        }
    }

    Vector initial_branch(Complex z) const {
        const Vector c = detail::coherent_amplitudes(z, cutoff_);
        Vector psi = Vector::Zero(dim());
        std::vector<int> occ(static_cast<std::size_t>(modes_), 0);
        for (int n = 0; n <= cutoff_; ++n) {
            occ[0] = n;
            psi(index_.at(occ)) = c(n);
        }
        return psi;
    }

    CatStateSpec spec_;
    Index modes_;
    int cutoff_;
    std::vector<std::vector<int>> basis_;
    std::vector<Index> sector_offsets_;
    std::map<std::vector<int>, Index> index_;
    std::map<std::vector<int>, std::vector<Index>> env_groups_;
    std::vector<Sector> sectors_;
    Vector initial_[2];
};

inline FockCoherence fock_oracle(const OscillatorBathModel& model, const CatStateSpec& spec, double t) {
    return FockOracle(model, spec).at(t);
}

namespace detail {

// exp(-i H h) psi by a Taylor series, split into substeps with ||H h||_1 <= 1/2.
inline void apply_short_exponential(const Matrix& h_matrix, double h, Vector& psi) {
    const double norm1 = h_matrix.cwiseAbs().colwise().sum().maxCoeff() * std::abs(h);
    const int pieces = std::max(1, static_cast<int>(std::ceil(norm1 / 0.5)));
    const double dt = h / pieces;
    for (int p = 0; p < pieces; ++p) {
        Vector term = psi;
        Vector sum = psi;
        for (int k = 1; k < 40; ++k) {
            term = (-kI * dt / static_cast<double>(k)) * (h_matrix * term);
            sum += term;
            if (term.norm() <= 1e-17 * sum.norm()) break;
        }
        psi = std::move(sum);
    }
}

inline Matrix driven_mode_hamiltonian(double w, double g, Complex z, int cutoff) {
    Matrix h = Matrix::Zero(cutoff + 1, cutoff + 1);
    for (int n = 0; n <= cutoff; ++n) h(n, n) = w * n;
    for (int n = 0; n < cutoff; ++n) {
        const double s = std::sqrt(static_cast<double>(n + 1));
        h(n + 1, n) = g * z * s;             // b^dag
        h(n, n + 1) = g * std::conj(z) * s;  // b
    }
    return h;
}

// Smallest per-mode cutoff whose Poisson tail at the largest label is below 1e-16.
inline int driven_mode_cutoff(double max_label_norm, int cap) {
    for (int k = 1; k <= cap; ++k)
        if (poisson_tail(max_label_norm, k) < 1e-16) return k;
    throw DomainError("Fock cutoff " + std::to_string(cap) +
                      " is too small for the driven bath amplitudes; raise fock_cutoff");
}

// One pass of the exponential midpoint rule with `substeps` steps per grid
// interval. Returns exp(-i (phi1 - phi2)) <0|U0^dag U|0> at every grid time,
// where U0 is generated by the z2-driven bath and U by the z1-driven bath.
inline std::vector<Complex> driven_echo_pass(const OscillatorBathModel& model, const CatStateSpec& spec,
                                             double t_max, Index intervals, Index substeps) {
    const Index steps = intervals * substeps;
    const double h = t_max / static_cast<double>(steps);
    std::vector<GaussianBranch> traj[2];
    traj[0] = classical_trajectory(model, spec.z1, t_max, h / 2);
    traj[1] = classical_trajectory(model, spec.z2, t_max, h / 2);
    if (static_cast<Index>(traj[0].size()) != 2 * steps + 1 || static_cast<Index>(traj[1].size()) != 2 * steps + 1)
        throw NumericalError("driven echo: trajectory grid does not align with the Fock steps");

    const auto& w = model.bath_frequencies();
    const auto& g = model.couplings();
    std::vector<Complex> amplitudes(static_cast<std::size_t>(intervals) + 1, Complex(1.0));
    std::vector<Complex> mode_product(static_cast<std::size_t>(intervals) + 1, Complex(1.0));
    for (std::size_t l = 0; l < w.size(); ++l) {
        double max_label = 0.0;
        for (const auto& branch : traj)
            for (const GaussianBranch& b : branch) max_label = std::max(max_label, std::norm(b.beta[l]));
        const int cutoff = driven_mode_cutoff(max_label, model.fock_cutoff());
        Vector psi[2];
        for (Vector& p : psi) {
            p = Vector::Zero(cutoff + 1);
            p(0) = 1.0;
        }
        for (Index n = 0; n < steps; ++n) {
            for (int j = 0; j < 2; ++j) {
                const Complex z_mid = traj[j][static_cast<std::size_t>(2 * n + 1)].z;
                apply_short_exponential(driven_mode_hamiltonian(w[l], g[l], z_mid, cutoff), h, psi[j]);
            }
            if ((n + 1) % substeps == 0)
                mode_product[static_cast<std::size_t>((n + 1) / substeps)] *= psi[1].dot(psi[0]);
        }
    }
    for (Index i = 0; i <= intervals; ++i) {
        const auto& b1 = traj[0][static_cast<std::size_t>(2 * i * substeps)];
        const auto& b2 = traj[1][static_cast<std::size_t>(2 * i * substeps)];
        amplitudes[static_cast<std::size_t>(i)] = std::exp(-kI * (b1.phi - b2.phi)) * mode_product[static_cast<std::size_t>(i)];
    }
    return amplitudes;
}

} // namespace detail

struct DrivenEchoSeries {
    std::vector<double> times;
    std::vector<Complex> amplitudes;
    double step_error;  // max |fine - coarse| from the step-halving comparison
};

// Driven-bath echo on the uniform grid t_i = i t_max / intervals. The step is
// at most dt; the comparison against a doubled step must stay below
// `tolerance` or a NumericalError is raised.
inline DrivenEchoSeries driven_echo_series(const OscillatorBathModel& model, const CatStateSpec& spec, double t_max,
                                           Index intervals, double dt, double tolerance = tolerance::truncation) {
    if (intervals < 1 || !(t_max > 0.0))
        throw DomainError("driven echo grid needs t_max > 0 and at least one interval");
    if (!(dt > 0.0))
        throw DomainError("driven echo step must be positive");
    const double interval = t_max / static_cast<double>(intervals);
    const auto substeps = std::max<Index>(2, static_cast<Index>(std::ceil(interval / dt - 1e-9)));
    const Index fine = substeps % 2 == 0 ? substeps : substeps + 1;
    const std::vector<Complex> coarse_amp = detail::driven_echo_pass(model, spec, t_max, intervals, fine / 2);
    std::vector<Complex> fine_amp = detail::driven_echo_pass(model, spec, t_max, intervals, fine);
    double err = 0.0;
    for (std::size_t i = 0; i < fine_amp.size(); ++i) err = std::max(err, std::abs(fine_amp[i] - coarse_amp[i]));
    if (err > tolerance)
        throw NumericalError("driven echo time-ordering error estimate " + std::to_string(err) + " exceeds " +
                             std::to_string(tolerance) + "; reduce the step");
    std::vector<double> times(fine_amp.size());
    for (std::size_t i = 0; i < times.size(); ++i) times[i] = interval * static_cast<double>(i);
    return {std::move(times), std::move(fine_amp), err};
}

inline Complex driven_echo_amplitude(const OscillatorBathModel& model, const CatStateSpec& spec, double t,
                                     double dt) {
    if (t == 0.0) return 1.0;
    return driven_echo_series(model, spec, t, 1, dt).amplitudes.back();
}

} // namespace loschmidt
