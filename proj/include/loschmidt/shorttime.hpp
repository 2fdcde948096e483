// shorttime.hpp: S (x) V coupling in the short-time approximation
//
// Dropping H_c leaves H ~ S (x) V + 1 (x) H_env, which conserves the
// eigenstates |s> of S: each one drives the environment with H_env + s V.
// The coherence between |s> and |s'> is then the echo amplitude of the pair
// H0 = H_env + s' V, H = H0 + (s - s') V. ShortTimeExact keeps H_c and
// measures how far the approximation is off.

#pragma once

#include <cmath>
#include <memory>
#include <string>

#include "loschmidt/echo.hpp"
#include "loschmidt/linalg.hpp"

namespace loschmidt {

// Position of an eigenpair of S in ascending eigenvalue order.
struct Branch {
    Index index;
};

class ShortTimeModel {
public:
    ShortTimeModel(HermitianOperator h_c, HermitianOperator s, HermitianOperator h_env, HermitianOperator v_env)
        : space_(h_c.dim(), h_env.dim()) {
        if (s.dim() != h_c.dim())
            throw DimensionError("coupling operator S and H_c act on different spaces");
        if (v_env.dim() != h_env.dim())
            throw DimensionError("coupling operator V and H_env act on different spaces");
        SpectralPropagator s_spectrum(s);
        state_ = std::make_shared<const State>(
            State{std::move(h_c), std::move(s), std::move(h_env), std::move(v_env), std::move(s_spectrum)});
    }

    const CompositeSpace& space() const { return space_; }
    const HermitianOperator& h_c() const { return state_->h_c; }
    const HermitianOperator& s() const { return state_->s; }
    const HermitianOperator& h_env() const { return state_->h_env; }
    const HermitianOperator& v_env() const { return state_->v_env; }

    const RealVector& s_eigenvalues() const { return state_->s_spectrum.eigenvalues(); }
    double s_eigenvalue(Branch b) const { return s_eigenvalues()(checked(b)); }
    StateVector s_eigenvector(Branch b) const {
        return StateVector::normalized(state_->s_spectrum.eigenvectors().col(checked(b)));
    }

    // First eigenpair whose eigenvalue is within 1e-10 of s.
    Branch branch_of(double s) const {
        const RealVector& ev = s_eigenvalues();
        for (Index i = 0; i < ev.size(); ++i)
            if (std::abs(ev(i) - s) <= tolerance::dynamical) return Branch{i};
        throw DomainError("value " + std::to_string(s) + " is not an eigenvalue of S");
    }

private:
    struct State {
        HermitianOperator h_c;
        HermitianOperator s;
        HermitianOperator h_env;
        HermitianOperator v_env;
        SpectralPropagator s_spectrum;
    };

    Index checked(Branch b) const {
        if (b.index < 0 || b.index >= space_.dim_central())
            throw DomainError("S eigenpair index " + std::to_string(b.index) + " out of range");
        return b.index;
    }

    CompositeSpace space_;
    std::shared_ptr<const State> state_;
};

// H_env + s V; s must be in the spectrum of S.
inline HermitianOperator branch_hamiltonian(const ShortTimeModel& model, double s) {
    const double exact = model.s_eigenvalue(model.branch_of(s));
    return model.h_env() + exact * model.v_env();
}

namespace detail {

inline void require_env_state(const ShortTimeModel& model, const StateVector& b0) {
    if (b0.dim() != model.space().dim_env())
        throw DimensionError("environment state dimension does not match the model");
}

} // namespace detail

// rho_ss'(t) for the initial state (|s> + |s'>)/sqrt(2) (x) B0, in the
// approximation H_c = 0. Both forms, branch overlap <B_s'(t)|B_s(t)> / 2 and
// echo amplitude <B0|U0^dag U|B0> / 2, are computed; a disagreement above
// 1e-12 raises NumericalError.
inline Complex shorttime_coherence(const ShortTimeModel& model, double s, double s_prime, const StateVector& b0,
                                   double t) {
    detail::require_env_state(model, b0);
    const double sv = model.s_eigenvalue(model.branch_of(s));
    const double spv = model.s_eigenvalue(model.branch_of(s_prime));
    const SpectralPropagator branch_s(model.h_env() + sv * model.v_env());
    const SpectralPropagator branch_sp(model.h_env() + spv * model.v_env());
    const Complex by_overlap = overlap(branch_sp.apply(t, b0), branch_s.apply(t, b0));
    const EchoPair echo(model.h_env() + spv * model.v_env(), (sv - spv) * model.v_env());
    const Complex by_echo = echo.amplitude(b0, t);
    if (std::abs(by_overlap - by_echo) > tolerance::construction)
        throw NumericalError("branch-overlap and echo forms of the short-time coherence disagree");
    return 0.5 * by_echo;
}

inline Complex shorttime_coherence(const ShortTimeModel& model, Branch s, Branch s_prime, const StateVector& b0,
                                   double t) {
    return shorttime_coherence(model, model.s_eigenvalue(s), model.s_eigenvalue(s_prime), b0, t);
}

// Full joint dynamics H = H_c (x) 1 + S (x) V + 1 (x) H_env, one
// eigendecomposition reused across times.
class ShortTimeExact {
public:
    explicit ShortTimeExact(const ShortTimeModel& model)
        : model_(model), joint_(joint_hamiltonian(model)) {}

    static HermitianOperator joint_hamiltonian(const ShortTimeModel& model) {
        const Index dc = model.space().dim_central();
        const Index de = model.space().dim_env();
        return kron(model.h_c(), HermitianOperator::identity(de)) + kron(model.s(), model.v_env()) +
               kron(HermitianOperator::identity(dc), model.h_env());
    }

    // <s| Tr_e |Psi(t)><Psi(t)| |s'> for Psi(0) = (|s> + |s'>)/sqrt(2) (x) B0.
    Complex coherence(Branch s, Branch s_prime, const StateVector& b0, double t) const {
        detail::require_env_state(model_, b0);
        if (s.index == s_prime.index)
            throw DomainError("exact coherence needs two distinct S eigenpairs");
        const StateVector us = model_.s_eigenvector(s);
        const StateVector usp = model_.s_eigenvector(s_prime);
        const StateVector central = StateVector::normalized(us.amplitudes() + usp.amplitudes());
        const StateVector psi = joint_.apply(t, kron(central, b0));
        const DensityMatrix rho = partial_trace_env(psi, model_.space());
        return us.amplitudes().dot(rho.matrix() * usp.amplitudes());
    }

private:
    ShortTimeModel model_;
    SpectralPropagator joint_;
};

// |shorttime_coherence - exact coherence|.
inline double shorttime_error(const ShortTimeModel& model, Branch s, Branch s_prime, const StateVector& b0,
                              double t) {
    return std::abs(shorttime_coherence(model, s, s_prime, b0, t) - ShortTimeExact(model).coherence(s, s_prime, b0, t));
}

inline double shorttime_error(const ShortTimeExact& exact, const ShortTimeModel& model, Branch s, Branch s_prime,
                              const StateVector& b0, double t) {
    return std::abs(shorttime_coherence(model, s, s_prime, b0, t) - exact.coherence(s, s_prime, b0, t));
}

} // namespace loschmidt
