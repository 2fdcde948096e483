#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "loschmidt/dephasing.hpp"
#include "loschmidt/random.hpp"
#include "support/oracles.hpp"

using namespace loschmidt;

namespace {

DephasingModel random_model(Index n_c, Index dim_env, std::uint64_t seed, double coupling = 0.3) {
    Rng rng(seed);
    std::uniform_real_distribution<double> level(-1.0, 1.0);
    std::vector<double> eps;
    std::vector<HermitianOperator> v;
    const HermitianOperator h_env = gue(dim_env, 1.0, rng);
    for (Index j = 0; j < n_c; ++j) {
        eps.push_back(level(rng));
        v.push_back(gue(dim_env, coupling, rng));
    }
    return DephasingModel(std::move(eps), h_env, std::move(v));
}

InitialProduct random_init(Index n_c, Index dim_env, std::uint64_t seed) {
    Rng rng(seed);
    const StateVector a = random_state(n_c, rng);
    return InitialProduct(std::vector<Complex>(a.amplitudes().data(), a.amplitudes().data() + n_c),
                          random_state(dim_env, rng));
}

// Reduced central state by exact joint evolution with a Pade exponential of
// the assembled joint Hamiltonian.
Matrix joint_oracle(const DephasingModel& model, const InitialProduct& init, double t) {
    const Matrix u = oracle::pade_propagator(build_joint(model).matrix(), t);
    const Vector psi = u * init.joint_state().amplitudes();
    return oracle::partial_trace_by_loops(psi, model.n_central(), model.dim_env());
}

} // namespace

TEST(BuildJoint, SingleLevelIsEnvironment) {
    Rng rng(1);
    const HermitianOperator h_env = gue(5, 1.0, rng);
    const DephasingModel model({0.0}, h_env, {HermitianOperator::zero(5)});
    EXPECT_EQ(max_abs(build_joint(model).matrix() - h_env.matrix()), 0.0);
}

TEST(BuildJoint, UncoupledIsSeparable) {
    Rng rng(2);
    const HermitianOperator h_env = gue(4, 1.0, rng);
    const DephasingModel model({0.5, -1.25, 2.0}, h_env, std::vector<HermitianOperator>(3, HermitianOperator::zero(4)));
    const Matrix separable = central_energy_operator(model).matrix() +
                             kron(Matrix::Identity(3, 3), h_env.matrix());
    EXPECT_LE(max_abs(build_joint(model).matrix() - separable), 1e-15);
}

TEST(BuildJoint, BlockStructureAndEnergyConservation) {
    const DephasingModel model = random_model(2, 8, 3);
    const Matrix h = build_joint(model).matrix();
    EXPECT_EQ(max_abs(h.block(0, 8, 8, 8)), 0.0);
    EXPECT_EQ(max_abs(h.block(8, 0, 8, 8)), 0.0);
    for (Index j = 0; j < 2; ++j) {
        const Matrix expected = model.h_env().matrix() + model.coupling(j).matrix() +
                                model.level(j) * Matrix::Identity(8, 8);
        EXPECT_LE(max_abs(h.block(j * 8, j * 8, 8, 8) - expected), 1e-15);
    }
    const Matrix hc = central_energy_operator(model).matrix();
    EXPECT_LE(max_abs(h * hc - hc * h), 1e-10);
}

TEST(DephasingModel, RejectsMismatchedInputs) {
    Rng rng(4);
    const HermitianOperator h_env = gue(4, 1.0, rng);
    EXPECT_THROW(DephasingModel({0.0, 1.0}, h_env, {HermitianOperator::zero(4)}), DimensionError);
    EXPECT_THROW(DephasingModel({0.0}, h_env, {HermitianOperator::zero(5)}), DimensionError);
    const DephasingModel model = random_model(2, 4, 5);
    EXPECT_THROW(evolve_branch(model, random_state(4, rng), 2, 1.0), DomainError);
    EXPECT_THROW(evolve_branch(model, random_state(4, rng), -1, 1.0), DomainError);
    EXPECT_THROW(evolve_branch(model, random_state(3, rng), 0, 1.0), DimensionError);
}

TEST(InitialProduct, RequiresNormalizedCoefficients) {
    Rng rng(6);
    EXPECT_THROW(InitialProduct({1.0, 1.0}, random_state(3, rng)), DomainError);
    EXPECT_NO_THROW(InitialProduct({Complex(0.6, 0.0), Complex(0.0, 0.8)}, random_state(3, rng)));
}

TEST(EvolveBranch, ZeroTimeAndNorm) {
    const DephasingModel model = random_model(3, 16, 7);
    Rng rng(8);
    const StateVector chi0 = random_state(16, rng);
    EXPECT_LE((evolve_branch(model, chi0, 1, 0.0).amplitudes() - chi0.amplitudes()).norm(), 1e-14);
    for (Index j = 0; j < 3; ++j)
        for (double t : {0.5, 7.0, 60.0})
            EXPECT_NEAR(evolve_branch(model, chi0, j, t).amplitudes().norm(), 1.0, 1e-12);
}

TEST(EvolveBranch, DiagonalEnvironmentPhases) {
    RealVector w(4);
    w << 0.3, -1.1, 2.0, 0.7;
    const DephasingModel model({0.0}, HermitianOperator::diagonal(w), {HermitianOperator::zero(4)});
    Rng rng(9);
    const StateVector chi0 = random_state(4, rng);
    const double t = 2.3;
    const StateVector out = evolve_branch(model, chi0, 0, t);
    for (Index m = 0; m < 4; ++m)
        EXPECT_LE(std::abs(out[m] - std::exp(Complex(0, -w(m) * t)) * chi0[m]), 1e-14);
}

TEST(CoherenceFactorized, PopulationsConstant) {
    const DephasingModel model = random_model(3, 12, 10);
    const InitialProduct init = random_init(3, 12, 11);
    for (Index j = 0; j < 3; ++j)
        for (double t : {0.0, 1.0, 9.0})
            EXPECT_NEAR(std::abs(coherence_factorized(model, init, j, j, t) - std::norm(init.coefficient(j))), 0.0,
                        1e-12);
}

TEST(CoherenceFactorized, IdenticalBranchesOnlyRotatePhase) {
    Rng rng(12);
    const HermitianOperator h_env = gue(10, 1.0, rng);
    const HermitianOperator v = gue(10, 0.5, rng);
    const DephasingModel model({0.0, 1.3}, h_env, {v, v});
    const InitialProduct init = random_init(2, 10, 13);
    const double rho0 = std::abs(init.initial_coherence(0, 1));
    for (double t : {0.4, 3.0, 25.0}) EXPECT_NEAR(std::abs(coherence_factorized(model, init, 0, 1, t)), rho0, 1e-12);
}

TEST(CoherenceFactorized, MatchesJointEvolutionOracle) {
    const DephasingModel model = random_model(2, 64, 14);
    const InitialProduct init = random_init(2, 64, 15);
    double worst = 0.0;
    for (double t : {0.0, 0.37, 1.5, 4.0, 11.0}) {
        const Matrix rho = joint_oracle(model, init, t);
        for (Index j = 0; j < 2; ++j)
            for (Index k = 0; k < 2; ++k)
                worst = std::max(worst, std::abs(coherence_factorized(model, init, j, k, t) - rho(j, k)));
    }
    EXPECT_LE(worst, 1e-10);
}

// Property: for random instances (n_c <= 4, dim_env <= 128) and 50 grid
// times the factorized coherences reproduce the partial trace of the joint
// evolution, populations stay fixed, |rho_jk| <= |a_j a_k| and the
// reconstructed matrix is Hermitian.
TEST(CoherenceFactorized, CentralIdentityProperty) {
    struct Case {
        Index n_c;
        Index dim_env;
    };
    std::uint64_t seed = 100;
    for (const Case c : {Case{2, 128}, Case{3, 40}, Case{4, 24}}) {
        const DephasingModel model = random_model(c.n_c, c.dim_env, ++seed);
        const InitialProduct init = random_init(c.n_c, c.dim_env, ++seed);
        const JointDephasingEvolution joint(model);
        double identity = 0.0;
        double population = 0.0;
        double hermitian = 0.0;
        for (int i = 0; i < 50; ++i) {
            const double t = 0.4 * i;
            const DensityMatrix rho = joint.reduced_state(init, t);
            Matrix rebuilt(c.n_c, c.n_c);
            for (Index j = 0; j < c.n_c; ++j)
                for (Index k = 0; k < c.n_c; ++k) {
                    rebuilt(j, k) = coherence_factorized(model, init, j, k, t);
                    identity = std::max(identity, std::abs(rebuilt(j, k) - rho(j, k)));
                    EXPECT_LE(std::abs(rebuilt(j, k)), std::abs(init.coefficient(j) * init.coefficient(k)) + 1e-12);
                }
            for (Index j = 0; j < c.n_c; ++j)
                population = std::max(population, std::abs(rho(j, j) - std::norm(init.coefficient(j))));
            hermitian = std::max(hermitian, hermiticity_defect(rebuilt));
        }
        EXPECT_LE(identity, 1e-10) << c.n_c << "x" << c.dim_env;
        EXPECT_LE(population, 1e-10);
        EXPECT_LE(hermitian, 1e-12);
    }
}

TEST(EchoAmplitude, TrivialPairIsOne) {
    const DephasingModel model = random_model(2, 16, 20);
    Rng rng(21);
    const StateVector chi0 = random_state(16, rng);
    EXPECT_LE(std::abs(echo_amplitude(model, chi0, 1, 1, 3.0) - 1.0), 1e-13);
}

TEST(EchoAmplitude, EqualsBranchOverlap) {
    std::uint64_t seed = 30;
    for (Index dim_env : {8, 33, 64}) {
        const DephasingModel model = random_model(3, dim_env, ++seed);
        Rng rng(++seed);
        const StateVector chi0 = random_state(dim_env, rng);
        double worst = 0.0;
        for (Index j = 0; j < 3; ++j)
            for (Index k = 0; k < 3; ++k)
                for (double t : {0.2, 1.9, 8.5}) {
                    const Complex branch =
                        overlap(evolve_branch(model, chi0, k, t), evolve_branch(model, chi0, j, t));
                    worst = std::max(worst, std::abs(echo_amplitude(model, chi0, j, k, t) - branch));
                }
        EXPECT_LE(worst, 1e-12) << dim_env;
    }
}

// 1 - F(t) is linear in the perturbation strength at small strength.
TEST(EchoAmplitude, PerturbativeScaling) {
    Rng rng(40);
    const HermitianOperator h_env = gue(24, 1.0, rng);
    const HermitianOperator w = gue(24, 1.0, rng);
    const StateVector chi0 = random_state(24, rng);
    const double t = 2.0;
    std::vector<double> deviation;
    for (double strength : {1e-2, 1e-3, 1e-4}) {
        const DephasingModel model({0.0, 0.0}, h_env, {strength * w, HermitianOperator::zero(24)});
        deviation.push_back(std::abs(echo_amplitude(model, chi0, 0, 1, t) - 1.0));
    }
    EXPECT_GT(deviation[0], deviation[1]);
    EXPECT_GT(deviation[1], deviation[2]);
    EXPECT_NEAR(deviation[0] / deviation[1], 10.0, 1.0);
    EXPECT_NEAR(deviation[1] / deviation[2], 10.0, 0.1);
}

TEST(RescaledAutocorrelation, EqualFactorsGiveOne) {
    Rng rng(50);
    const DephasingModel model = DephasingModel::proportional({0.0, 1.0}, gue(8, 1.0, rng), {0.2, 0.2});
    EXPECT_LE(std::abs(rescaled_autocorrelation(model, random_state(8, rng), 0, 1, 4.0) - 1.0), 1e-14);
}

TEST(RescaledAutocorrelation, EigenstateIsPurePhase) {
    RealVector w(3);
    w << -0.4, 0.9, 1.7;
    const std::vector<double> f{0.0, 0.1};
    const DephasingModel model = DephasingModel::proportional({0.0, 0.0}, HermitianOperator::diagonal(w), f);
    const StateVector chi0 = StateVector::basis(3, 1);
    const double t = 3.3;
    const Complex value = rescaled_autocorrelation(model, chi0, 0, 1, t);
    EXPECT_NEAR(std::abs(value), 1.0, 1e-14);
    EXPECT_LE(std::abs(value - std::exp(Complex(0, -t * (f[0] - f[1]) * w(1)))), 1e-14);
    EXPECT_LE(std::abs(value - echo_amplitude(model, chi0, 0, 1, t)), 1e-12);
}

TEST(RescaledAutocorrelation, MatchesEchoAmplitude) {
    Rng rng(51);
    const DephasingModel model = DephasingModel::proportional({0.0, 0.5}, gue(32, 1.0, rng), {0.0, 0.1});
    const StateVector chi0 = random_state(32, rng);
    double worst = 0.0;
    for (int i = 0; i < 50; ++i) {
        const double t = 0.5 * i;
        worst = std::max(worst, std::abs(rescaled_autocorrelation(model, chi0, 0, 1, t) -
                                         echo_amplitude(model, chi0, 0, 1, t)));
        worst = std::max(worst, std::abs(rescaled_autocorrelation(model, chi0, 1, 0, t) -
                                         echo_amplitude(model, chi0, 1, 0, t)));
    }
    EXPECT_LE(worst, 1e-10);
}

TEST(RescaledAutocorrelation, RejectsGeneralModel) {
    const DephasingModel model = random_model(2, 6, 52);
    Rng rng(53);
    EXPECT_THROW(rescaled_autocorrelation(model, random_state(6, rng), 0, 1, 1.0), DomainError);
}

TEST(PiPulse, IdenticalPotentialsKeepCoherence) {
    Rng rng(60);
    const HermitianOperator v = gue(12, 0.4, rng);
    const DephasingModel model({0.0, 2.0}, gue(12, 1.0, rng), {v, v});
    const InitialProduct init = random_init(2, 12, 61);
    for (double t : {1.0, 6.0})
        EXPECT_NEAR(std::abs(pi_pulse_coherence(model, init, t)), std::abs(init.initial_coherence(0, 1)), 1e-13);
}

TEST(PiPulse, CommutingPairGivesUnitEcho) {
    Rng rng(62);
    std::normal_distribution<double> normal;
    RealVector w(16), v1(16), v2(16);
    for (Index m = 0; m < 16; ++m) {
        w(m) = normal(rng);
        v1(m) = 0.5 * normal(rng);
        v2(m) = 0.5 * normal(rng);
    }
    // Simultaneously diagonal in a random basis.
    const Eigen::HouseholderQR<Matrix> qr(random_matrix(16, 16, rng));
    const Matrix q = qr.householderQ();
    auto rotate = [&](const RealVector& d) {
        const Matrix m = q * d.cast<Complex>().asDiagonal() * q.adjoint();
        return HermitianOperator(0.5 * (m + m.adjoint()));
    };
    const DephasingModel model({0.0, 1.0}, rotate(w), {rotate(v1), rotate(v2)});
    const StateVector chi0 = random_state(16, rng);
    const InitialProduct init({1.0 / std::sqrt(2.0), 1.0 / std::sqrt(2.0)}, chi0);
    for (double t : {0.5, 3.0, 20.0})
        EXPECT_LE(std::abs(pi_pulse_coherence(model, init, t) / init.initial_coherence(0, 1) - 1.0), 1e-12) << t;
}

TEST(PiPulse, MatchesFourStepOracleAndJointProtocol) {
    const DephasingModel model = random_model(2, 32, 63, 0.5);
    const InitialProduct init = random_init(2, 32, 64);
    const JointDephasingEvolution joint(model);
    for (double t : {0.3, 2.0, 7.5}) {
        const Complex value = pi_pulse_coherence(model, init, t);
        const Complex four_step = oracle::four_step_pi_pulse(model, init.chi0(), t) * init.initial_coherence(0, 1);
        EXPECT_LE(std::abs(value - four_step), 1e-12) << t;
        EXPECT_LE(std::abs(value - joint.pi_pulse_coherence(init, t)), 1e-10) << t;
    }
}

TEST(PiPulse, RequiresTwoLevels) {
    const DephasingModel model = random_model(3, 4, 65);
    EXPECT_THROW(pi_pulse_coherence(model, random_init(3, 4, 66), 1.0), DomainError);
}
