// linalg.hpp: dense complex linear algebra for composite quantum systems
//
// States, Hermitian operators, spectral propagators exp(-iHt) (hbar = 1),
// Kronecker products in central-index-major layout, and the partial trace
// over the environment factor.

#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <memory>
#include <string>

#include <Eigen/Dense>

#include "loschmidt/errors.hpp"

namespace loschmidt {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;
using Index = Eigen::Index;

inline constexpr Complex kI{0.0, 1.0};

// Largest joint Hilbert-space dimension any builder will assemble.
inline constexpr Index kMaxJointDim = 4096;

namespace tolerance {
inline constexpr double construction = 1e-12;  // floating-point noise
inline constexpr double dynamical = 1e-10;     // identities after propagation
inline constexpr double truncation = 1e-6;     // step- or cutoff-limited checks
} // namespace tolerance

inline double max_abs(const Matrix& m) {
    return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

inline double hermiticity_defect(const Matrix& m) {
    return max_abs(m - m.adjoint());
}

// Max entrywise deviation of U^dagger U from the identity.
inline double unitarity_defect(const Matrix& u) {
    return max_abs(u.adjoint() * u - Matrix::Identity(u.rows(), u.cols()));
}

class StateVector {
public:
    // Rejects vectors whose Euclidean norm differs from 1 by more than 1e-12.
    explicit StateVector(Vector amplitudes) : amps_(std::move(amplitudes)) {
        if (amps_.size() == 0)
            throw DimensionError("state vector must have positive dimension");
        const double n = amps_.norm();
        if (!std::isfinite(n) || std::abs(n - 1.0) > tolerance::construction)
            throw DomainError("state vector is not normalized (norm = " + std::to_string(n) + ")");
    }

    static StateVector normalized(Vector v) {
        const double n = v.norm();
        if (!(n > 0.0) || !std::isfinite(n))
            throw DomainError("cannot normalize a zero or non-finite vector");
        return StateVector(v / n);
    }

    static StateVector basis(Index dim, Index i) {
        if (dim <= 0 || i < 0 || i >= dim)
            throw DomainError("basis index out of range");
        Vector v = Vector::Zero(dim);
        v(i) = 1.0;
        return StateVector(std::move(v));
    }

    Index dim() const { return amps_.size(); }
    const Vector& amplitudes() const { return amps_; }
    Complex operator[](Index i) const { return amps_(i); }

private:
    Vector amps_;
};

class HermitianOperator {
public:
    // The check is relative to the largest entry so that large spectra are
    // not rejected for rounding in their off-diagonal parts.
    explicit HermitianOperator(Matrix entries) : m_(std::move(entries)) {
        if (m_.rows() != m_.cols() || m_.rows() == 0)
            throw DimensionError("Hermitian operator must be a non-empty square matrix");
        const double scale = std::max(1.0, max_abs(m_));
        if (!m_.allFinite() || hermiticity_defect(m_) > tolerance::construction * scale)
            throw DomainError("operator is not Hermitian");
    }

    static HermitianOperator zero(Index dim) { return HermitianOperator(Matrix::Zero(dim, dim)); }
    static HermitianOperator identity(Index dim) { return HermitianOperator(Matrix::Identity(dim, dim)); }
    static HermitianOperator diagonal(const RealVector& d) {
        return HermitianOperator(d.cast<Complex>().asDiagonal().toDenseMatrix());
    }

    Index dim() const { return m_.rows(); }
    const Matrix& matrix() const { return m_; }
    Complex operator()(Index i, Index j) const { return m_(i, j); }

    friend HermitianOperator operator+(const HermitianOperator& a, const HermitianOperator& b) {
        require_same_dim(a, b);
        return HermitianOperator(a.m_ + b.m_);
    }
    friend HermitianOperator operator-(const HermitianOperator& a, const HermitianOperator& b) {
        require_same_dim(a, b);
        return HermitianOperator(a.m_ - b.m_);
    }
    friend HermitianOperator operator*(double s, const HermitianOperator& a) {
        return HermitianOperator(s * a.m_);
    }

private:
    static void require_same_dim(const HermitianOperator& a, const HermitianOperator& b) {
        if (a.dim() != b.dim())
            throw DimensionError("operator dimensions differ: " + std::to_string(a.dim()) + " vs " +
                                 std::to_string(b.dim()));
    }

    Matrix m_;
};

class UnitaryPropagator {
public:
    UnitaryPropagator(Matrix entries, double duration) : u_(std::move(entries)), duration_(duration) {
        if (u_.rows() != u_.cols())
            throw DimensionError("propagator must be square");
        if (unitarity_defect(u_) > tolerance::dynamical)
            throw NumericalError("propagator is not unitary within 1e-10");
    }

    static UnitaryPropagator identity(Index dim) {
        return UnitaryPropagator(Matrix::Identity(dim, dim), 0.0);
    }

    Index dim() const { return u_.rows(); }
    const Matrix& matrix() const { return u_; }
    // Net evolution time; compositions add, adjoints negate.
    double duration() const { return duration_; }

    UnitaryPropagator adjoint() const { return UnitaryPropagator(u_.adjoint(), -duration_); }

    StateVector apply(const StateVector& psi) const {
        if (psi.dim() != dim())
            throw DimensionError("state and propagator dimensions differ");
        return StateVector(u_ * psi.amplitudes());
    }

    // Operator product: (a * b) applies b first.
    friend UnitaryPropagator operator*(const UnitaryPropagator& a, const UnitaryPropagator& b) {
        if (a.dim() != b.dim())
            throw DimensionError("propagator dimensions differ");
        return UnitaryPropagator(a.u_ * b.u_, a.duration_ + b.duration_);
    }

    Complex expectation(const StateVector& psi) const {
        if (psi.dim() != dim())
            throw DimensionError("state and propagator dimensions differ");
        return psi.amplitudes().dot(u_ * psi.amplitudes());
    }

private:
    Matrix u_;
    double duration_;
};

// Eigendecomposition H = Q diag(lambda) Q^dagger computed once and reused for
// any number of evolution times. Copies share the decomposition.
class SpectralPropagator {
public:
    explicit SpectralPropagator(const HermitianOperator& h) {
        Eigen::SelfAdjointEigenSolver<Matrix> solver(h.matrix());
        if (solver.info() != Eigen::Success)
            throw NumericalError("Hermitian eigensolver did not converge");
        data_ = std::make_shared<const Data>(Data{solver.eigenvalues(), solver.eigenvectors()});
    }

    Index dim() const { return data_->values.size(); }
    const RealVector& eigenvalues() const { return data_->values; }
    const Matrix& eigenvectors() const { return data_->vectors; }

    UnitaryPropagator at(double t) const {
        if (!std::isfinite(t))
            throw DomainError("evolution time must be finite");
        const Vector phases = phase_factors(t);
        const Matrix& q = data_->vectors;
        return UnitaryPropagator(q * phases.asDiagonal() * q.adjoint(), t);
    }

    // exp(-iHt) psi in O(dim^2).
    Vector apply(double t, const Vector& psi) const {
        if (psi.size() != dim())
            throw DimensionError("state and Hamiltonian dimensions differ");
        const Matrix& q = data_->vectors;
        Vector coeffs = q.adjoint() * psi;
        coeffs = coeffs.cwiseProduct(phase_factors(t));
        return q * coeffs;
    }

    StateVector apply(double t, const StateVector& psi) const {
        return StateVector(apply(t, psi.amplitudes()));
    }

private:
    struct Data {
        RealVector values;
        Matrix vectors;
    };

    Vector phase_factors(double t) const {
        const RealVector& w = data_->values;
        Vector phases(w.size());
        for (Index i = 0; i < w.size(); ++i)
            phases(i) = std::exp(-kI * (w(i) * t));
        return phases;
    }

    std::shared_ptr<const Data> data_;
};

// U = exp(-iHt); negative t gives the backward propagator.
inline UnitaryPropagator propagator(const HermitianOperator& h, double t) {
    return SpectralPropagator(h).at(t);
}

// Entry [(i*n + k), (j*n + l)] = a(i, j) * b(k, l).
inline Matrix kron(const Matrix& a, const Matrix& b, Index max_dim = kMaxJointDim) {
    const Index rows = a.rows() * b.rows();
    const Index cols = a.cols() * b.cols();
    if (rows > max_dim || cols > max_dim)
        throw DimensionError("Kronecker product dimension " + std::to_string(std::max(rows, cols)) +
                             " exceeds cap " + std::to_string(max_dim));
    Matrix out(rows, cols);
    for (Index i = 0; i < a.rows(); ++i)
        for (Index j = 0; j < a.cols(); ++j)
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    return out;
}

inline HermitianOperator kron(const HermitianOperator& a, const HermitianOperator& b,
                              Index max_dim = kMaxJointDim) {
    return HermitianOperator(kron(a.matrix(), b.matrix(), max_dim));
}

inline StateVector kron(const StateVector& a, const StateVector& b, Index max_dim = kMaxJointDim) {
    return StateVector(kron(Matrix(a.amplitudes()), Matrix(b.amplitudes()), max_dim).col(0));
}

class CompositeSpace {
public:
    CompositeSpace(Index dim_central, Index dim_env, Index max_dim = kMaxJointDim)
        : dim_central_(dim_central), dim_env_(dim_env) {
        if (dim_central <= 0 || dim_env <= 0)
            throw DimensionError("subsystem dimensions must be positive");
        if (dim_central > max_dim / dim_env)
            throw DimensionError("joint dimension " + std::to_string(dim_central * dim_env) +
                                 " exceeds cap " + std::to_string(max_dim));
    }

    Index dim_central() const { return dim_central_; }
    Index dim_env() const { return dim_env_; }
    Index joint_dim() const { return dim_central_ * dim_env_; }
    // Central index major: (j, m) -> j * dim_env + m.
    Index index(Index j, Index m) const { return j * dim_env_ + m; }

    friend bool operator==(const CompositeSpace&, const CompositeSpace&) = default;

private:
    Index dim_central_;
    Index dim_env_;
};

class DensityMatrix {
public:
    explicit DensityMatrix(Matrix entries) : rho_(std::move(entries)) {
        if (rho_.rows() != rho_.cols() || rho_.rows() == 0)
            throw DimensionError("density matrix must be a non-empty square matrix");
        if (hermiticity_defect(rho_) > tolerance::construction)
            throw DomainError("density matrix is not Hermitian");
        if (std::abs(rho_.trace() - 1.0) > tolerance::dynamical)
            throw DomainError("density matrix trace differs from 1");
        if (min_eigenvalue() < -tolerance::dynamical)
            throw DomainError("density matrix has a negative eigenvalue");
    }

    Index dim() const { return rho_.rows(); }
    const Matrix& matrix() const { return rho_; }
    Complex operator()(Index j, Index k) const { return rho_(j, k); }

    double min_eigenvalue() const {
        Eigen::SelfAdjointEigenSolver<Matrix> solver(rho_, Eigen::EigenvaluesOnly);
        return solver.eigenvalues().minCoeff();
    }

    double purity() const { return (rho_ * rho_).trace().real(); }

private:
    Matrix rho_;
};

// rho[j][k] = sum_m psi[(j, m)] conj(psi[(k, m)]).
inline DensityMatrix partial_trace_env(const StateVector& psi, const CompositeSpace& space) {
    if (psi.dim() != space.joint_dim())
        throw DimensionError("state dimension " + std::to_string(psi.dim()) +
                             " does not match composite space " + std::to_string(space.joint_dim()));
    // Column j of the view is the contiguous environment block of central level j.
    Eigen::Map<const Matrix> blocks(psi.amplitudes().data(), space.dim_env(), space.dim_central());
    return DensityMatrix(blocks.transpose() * blocks.conjugate());
}

// <phi|psi>, antilinear in the first argument.
inline Complex overlap(const StateVector& phi, const StateVector& psi) {
    if (phi.dim() != psi.dim())
        throw DimensionError("overlap of states with different dimensions");
    return phi.amplitudes().dot(psi.amplitudes());
}

} // namespace loschmidt
