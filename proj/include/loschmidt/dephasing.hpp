// dephasing.hpp: energy-conserving (dephasing) coupling
//
// H = sum_j |phi_j><phi_j| (x) [eps_j + H_env + V_j], written in the
// eigenbasis of the central Hamiltonian. Each central level j drives its own
// environment branch chi_j(t) = exp(-i (H_env + V_j) t) chi0, and central
// coherences are branch overlaps, i.e. Loschmidt echo amplitudes.

#pragma once

#include <cmath>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "loschmidt/echo.hpp"
#include "loschmidt/linalg.hpp"

namespace loschmidt {

class InitialProduct {
public:
    InitialProduct(std::vector<Complex> coefficients, StateVector chi0)
        : a_(std::move(coefficients)), chi0_(std::move(chi0)) {
        if (a_.empty())
            throw DimensionError("initial central state needs at least one coefficient");
        double norm2 = 0.0;
        for (const Complex& c : a_) norm2 += std::norm(c);
        if (std::abs(norm2 - 1.0) > tolerance::construction)
            throw DomainError("central coefficients are not normalized");
    }

    Index n_central() const { return static_cast<Index>(a_.size()); }
    const std::vector<Complex>& coefficients() const { return a_; }
    Complex coefficient(Index j) const { return a_.at(static_cast<std::size_t>(j)); }
    const StateVector& chi0() const { return chi0_; }

    // rho_jk(0) = a_j conj(a_k).
    Complex initial_coherence(Index j, Index k) const {
        return coefficient(j) * std::conj(coefficient(k));
    }

    StateVector central_state() const {
        Vector v(n_central());
        for (Index j = 0; j < n_central(); ++j) v(j) = coefficient(j);
        return StateVector(std::move(v));
    }

    StateVector joint_state() const { return kron(central_state(), chi0_); }

private:
    std::vector<Complex> a_;
    StateVector chi0_;
};

class DephasingModel {
public:
    DephasingModel(std::vector<double> levels, HermitianOperator h_env,
                   std::vector<HermitianOperator> couplings)
        : DephasingModel(std::move(levels), std::move(h_env), std::move(couplings), std::nullopt) {}

    // V_j = f_j H_env.
    static DephasingModel proportional(std::vector<double> levels, const HermitianOperator& h_env,
                                       std::vector<double> factors) {
        std::vector<HermitianOperator> couplings;
        couplings.reserve(factors.size());
        for (double f : factors) couplings.push_back(f * h_env);
        return DephasingModel(std::move(levels), h_env, std::move(couplings), std::move(factors));
    }

    Index n_central() const { return space_.dim_central(); }
    Index dim_env() const { return space_.dim_env(); }
    const CompositeSpace& space() const { return space_; }

    double level(Index j) const { return state_->levels[checked(j)]; }
    const HermitianOperator& h_env() const { return state_->h_env; }
    const HermitianOperator& coupling(Index j) const { return state_->couplings[checked(j)]; }
    HermitianOperator branch_hamiltonian(Index j) const { return h_env() + coupling(j); }
    const SpectralPropagator& branch_propagator(Index j) const { return state_->branches[checked(j)]; }
    const SpectralPropagator& env_propagator() const { return state_->env; }
    const std::optional<std::vector<double>>& proportional_factors() const { return state_->factors; }

    void check_index(Index j) const { (void)checked(j); }

private:
    struct State {
        std::vector<double> levels;
        HermitianOperator h_env;
        std::vector<HermitianOperator> couplings;
        std::optional<std::vector<double>> factors;
        SpectralPropagator env;
        std::vector<SpectralPropagator> branches;
    };

    DephasingModel(std::vector<double> levels, HermitianOperator h_env,
                   std::vector<HermitianOperator> couplings, std::optional<std::vector<double>> factors)
        : space_(static_cast<Index>(levels.size()), h_env.dim()) {
        if (couplings.size() != levels.size())
            throw DimensionError("need one coupling operator per central level (" +
                                 std::to_string(levels.size()) + " levels, " +
                                 std::to_string(couplings.size()) + " couplings)");
        for (const auto& v : couplings)
            if (v.dim() != h_env.dim())
                throw DimensionError("coupling operator dimension differs from the environment");
        for (double e : levels)
            if (!std::isfinite(e))
                throw DomainError("central level energies must be finite");
        std::vector<SpectralPropagator> branches;
        branches.reserve(couplings.size());
        for (const auto& v : couplings) branches.emplace_back(h_env + v);
        SpectralPropagator env(h_env);
        state_ = std::make_shared<const State>(State{std::move(levels), std::move(h_env), std::move(couplings),
                                                     std::move(factors), std::move(env), std::move(branches)});
    }

    std::size_t checked(Index j) const {
        if (j < 0 || j >= n_central())
            throw DomainError("central level index " + std::to_string(j) + " out of range [0, " +
                              std::to_string(n_central()) + ")");
        return static_cast<std::size_t>(j);
    }

    CompositeSpace space_;
    std::shared_ptr<const State> state_;
};

// Block-diagonal joint Hamiltonian; block j is eps_j + H_env + V_j.
inline HermitianOperator build_joint(const DephasingModel& model) {
    const CompositeSpace& space = model.space();
    const Index de = space.dim_env();
    Matrix h = Matrix::Zero(space.joint_dim(), space.joint_dim());
    for (Index j = 0; j < space.dim_central(); ++j) {
        h.block(j * de, j * de, de, de) =
            model.branch_hamiltonian(j).matrix() + Matrix::Identity(de, de) * model.level(j);
    }
    return HermitianOperator(std::move(h));
}

// H^c (x) 1 in the same layout; used to check energy conservation.
inline HermitianOperator central_energy_operator(const DephasingModel& model) {
    RealVector eps(model.n_central());
    for (Index j = 0; j < model.n_central(); ++j) eps(j) = model.level(j);
    return kron(HermitianOperator::diagonal(eps), HermitianOperator::identity(model.dim_env()));
}

inline StateVector evolve_branch(const DephasingModel& model, const StateVector& chi0, Index j, double t) {
    if (chi0.dim() != model.dim_env())
        throw DimensionError("chi0 dimension does not match the environment");
    return model.branch_propagator(j).apply(t, chi0);
}

// rho_jk(t) = exp(-i (eps_j - eps_k) t) <chi_k(t)|chi_j(t)> a_j conj(a_k).
inline Complex coherence_factorized(const DephasingModel& model, const InitialProduct& init, Index j,
                                    Index k, double t) {
    if (init.n_central() != model.n_central())
        throw DimensionError("initial state and model have different central dimensions");
    const StateVector chi_j = evolve_branch(model, init.chi0(), j, t);
    const StateVector chi_k = evolve_branch(model, init.chi0(), k, t);
    const Complex phase = std::exp(-kI * ((model.level(j) - model.level(k)) * t));
    return phase * overlap(chi_k, chi_j) * init.initial_coherence(j, k);
}

// H0 = H_env + V_k, H = H0 + (V_j - V_k).
inline EchoPair echo_pair(const DephasingModel& model, Index j, Index k) {
    return EchoPair(model.branch_hamiltonian(k), model.coupling(j) - model.coupling(k));
}

inline Complex echo_amplitude(const DephasingModel& model, const StateVector& chi0, Index j, Index k,
                              double t) {
    if (chi0.dim() != model.dim_env())
        throw DimensionError("chi0 dimension does not match the environment");
    return echo_pair(model, j, k).amplitude(chi0, t);
}

// For V_j = f_j H_env the echo collapses to an autocorrelation of chi0 under
// H_env with rescaled time: <chi0| exp(-i t (f_j - f_k) H_env) |chi0>.
inline Complex rescaled_autocorrelation(const DephasingModel& model, const StateVector& chi0, Index j,
                                        Index k, double t) {
    const auto& factors = model.proportional_factors();
    if (!factors)
        throw DomainError("rescaled autocorrelation needs a model built with proportional couplings");
    model.check_index(j);
    model.check_index(k);
    if (chi0.dim() != model.dim_env())
        throw DimensionError("chi0 dimension does not match the environment");
    const double df = (*factors)[static_cast<std::size_t>(j)] - (*factors)[static_cast<std::size_t>(k)];
    return chi0.amplitudes().dot(model.env_propagator().apply(t * df, chi0.amplitudes()));
}

// Two-level echo with a central pi pulse at t/2: each branch spends t/2 under
// each potential in opposite order, the central phases cancel, and
// rho_12(t) = <chi0| U_2^dag U_1^dag U_2 U_1 |chi0> rho_12(0) with U_i over t/2.
// Levels "1" and "2" are indices 0 and 1.
inline UnitaryPropagator pi_pulse_echo_operator(const DephasingModel& model, double t) {
    if (model.n_central() != 2)
        throw DomainError("pi-pulse protocol needs exactly two central levels");
    const UnitaryPropagator u1 = model.branch_propagator(0).at(t / 2);
    const UnitaryPropagator u2 = model.branch_propagator(1).at(t / 2);
    return u2.adjoint() * u1.adjoint() * u2 * u1;
}

inline Complex pi_pulse_coherence(const DephasingModel& model, const InitialProduct& init, double t) {
    if (init.n_central() != 2)
        throw DomainError("pi-pulse protocol needs exactly two central levels");
    return pi_pulse_echo_operator(model, t).expectation(init.chi0()) * init.initial_coherence(0, 1);
}

// Brute-force route: exact evolution of the joint state under the assembled
// joint Hamiltonian followed by the partial trace.
class JointDephasingEvolution {
public:
    explicit JointDephasingEvolution(const DephasingModel& model)
        : space_(model.space()), joint_(build_joint(model)) {}

    StateVector evolve(const StateVector& psi, double t) const { return joint_.apply(t, psi); }

    DensityMatrix reduced_state(const InitialProduct& init, double t) const {
        return partial_trace_env(evolve(init.joint_state(), t), space_);
    }

    // Evolve t/2, swap the two central levels (pi pulse), evolve t/2. The
    // branch that started in level 1 ends in level 2, so the rho_12
    // coherence is the (1, 0) entry afterwards.
    Complex pi_pulse_coherence(const InitialProduct& init, double t) const {
        if (space_.dim_central() != 2)
            throw DomainError("pi-pulse protocol needs exactly two central levels");
        const Index de = space_.dim_env();
        Vector psi = joint_.apply(t / 2, init.joint_state().amplitudes());
        Vector swapped(psi.size());
        swapped.head(de) = psi.tail(de);
        swapped.tail(de) = psi.head(de);
        psi = joint_.apply(t / 2, swapped);
        return partial_trace_env(StateVector(std::move(psi)), space_)(1, 0);
    }

    const CompositeSpace& space() const { return space_; }

private:
    CompositeSpace space_;
    SpectralPropagator joint_;
};

} // namespace loschmidt
