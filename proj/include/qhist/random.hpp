// random.hpp
// Seeded generators for random states, unitaries and bases. Used by the
// randomized checks and the sampling demonstrations.

#pragma once

#include <cstdint>
#include <random>

#include "qhist/tensor.hpp"

namespace qhist::random {

using Engine = std::mt19937_64;

inline StateVector gaussian_vector(std::size_t dim, Engine& rng) {
    std::normal_distribution<double> normal(0.0, 1.0);
    StateVector v(static_cast<Eigen::Index>(dim));
    for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = Complex(normal(rng), normal(rng));
    return v;
}

inline StateVector state(std::size_t dim, Engine& rng) {
    StateVector v = gaussian_vector(dim, rng);
    return v / v.norm();
}

// Haar-distributed unitary: QR of a Ginibre matrix with the phases of R's
// diagonal folded back into Q.
inline Operator unitary(std::size_t dim, Engine& rng) {
    const auto d = static_cast<Eigen::Index>(dim);
    Eigen::MatrixXcd g(d, d);
    for (Eigen::Index j = 0; j < d; ++j) g.col(j) = gaussian_vector(dim, rng);
    Eigen::HouseholderQR<Eigen::MatrixXcd> qr(g);
    Eigen::MatrixXcd q = qr.householderQ();
    const Eigen::MatrixXcd r = qr.matrixQR().triangularView<Eigen::Upper>();
    for (Eigen::Index j = 0; j < d; ++j) {
        const Complex rjj = r(j, j);
        q.col(j) *= std::abs(rjj) > 0 ? rjj / std::abs(rjj) : Complex(1);
    }
    return Operator(q);
}

inline Operator hermitian(std::size_t dim, Engine& rng) {
    const auto d = static_cast<Eigen::Index>(dim);
    Operator g(d, d);
    for (Eigen::Index j = 0; j < d; ++j) g.col(j) = gaussian_vector(dim, rng);
    return (g + Operator(g.adjoint())) / 2.0;
}

// Unitary that maps every basis vector onto a basis vector up to a phase:
// a random permutation times random phases.
inline Operator monomial_unitary(std::size_t dim, Engine& rng) {
    std::vector<std::size_t> perm(dim);
    for (std::size_t i = 0; i < dim; ++i) perm[i] = i;
    std::shuffle(perm.begin(), perm.end(), rng);
    std::uniform_real_distribution<double> phase(0.0, 2 * std::numbers::pi);
    Operator u = Operator::Zero(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
    for (std::size_t i = 0; i < dim; ++i) u(static_cast<Eigen::Index>(perm[i]), static_cast<Eigen::Index>(i)) = std::polar(1.0, phase(rng));
    return u;
}

}  // namespace qhist::random
