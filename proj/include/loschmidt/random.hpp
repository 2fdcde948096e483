// random.hpp: seeded random Hermitian matrices and states

#pragma once

#include <cmath>
#include <cstdint>
#include <random>

#include "loschmidt/linalg.hpp"

namespace loschmidt {

using Rng = std::mt19937_64;

// GUE sample: diagonal entries N(0, scale^2); off-diagonal real and imaginary
// parts N(0, scale^2 / 2), so E|H_ij|^2 = scale^2 for every entry.
inline HermitianOperator gue(Index dim, double scale, Rng& rng) {
    if (dim <= 0)
        throw DimensionError("GUE dimension must be positive");
    std::normal_distribution<double> normal(0.0, 1.0);
    const double off = scale / std::sqrt(2.0);
    Matrix h(dim, dim);
    for (Index i = 0; i < dim; ++i) {
        h(i, i) = scale * normal(rng);
        for (Index j = i + 1; j < dim; ++j) {
            const double re = off * normal(rng);
            const double im = off * normal(rng);
            h(i, j) = Complex(re, im);
            h(j, i) = Complex(re, -im);
        }
    }
    return HermitianOperator(std::move(h));
}

// Haar-random pure state (normalized complex Gaussian vector).
inline StateVector random_state(Index dim, Rng& rng) {
    std::normal_distribution<double> normal(0.0, 1.0);
    Vector v(dim);
    for (Index i = 0; i < dim; ++i) {
        const double re = normal(rng);
        const double im = normal(rng);
        v(i) = Complex(re, im);
    }
    return StateVector::normalized(std::move(v));
}

inline Matrix random_matrix(Index rows, Index cols, Rng& rng) {
    std::normal_distribution<double> normal(0.0, 1.0);
    Matrix m(rows, cols);
    for (Index j = 0; j < cols; ++j)
        for (Index i = 0; i < rows; ++i) {
            const double re = normal(rng);
            const double im = normal(rng);
            m(i, j) = Complex(re, im);
        }
    return m;
}

} // namespace loschmidt
