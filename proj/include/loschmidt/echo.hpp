// echo.hpp: Loschmidt echo for a Hamiltonian pair H0, H = H0 + perturbation

#pragma once

#include "loschmidt/linalg.hpp"

namespace loschmidt {

// Holds one eigendecomposition per Hamiltonian so that the echo operator
// M(t) = U0(-t) U(t) can be evaluated on a whole time grid.
class EchoPair {
public:
    EchoPair(const HermitianOperator& unperturbed, const HermitianOperator& perturbation)
        : unperturbed_(unperturbed), perturbed_(unperturbed + perturbation) {}

    Index dim() const { return unperturbed_.dim(); }

    UnitaryPropagator echo_operator(double t) const {
        return unperturbed_.at(-t) * perturbed_.at(t);
    }

    // Fidelity amplitude <psi|M(t)|psi>.
    Complex amplitude(const StateVector& psi, double t) const {
        return echo_operator(t).expectation(psi);
    }

    const SpectralPropagator& unperturbed() const { return unperturbed_; }
    const SpectralPropagator& perturbed() const { return perturbed_; }

private:
    SpectralPropagator unperturbed_;
    SpectralPropagator perturbed_;
};

} // namespace loschmidt
