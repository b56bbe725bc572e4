#pragma once

// Density operators, orthonormal basis families and fidelity.

#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "reversal_lab/tensor.hpp"

namespace rlab {

namespace tol {
inline constexpr double trace = 1e-10;
inline constexpr double negative_clip = 1e-12;
inline constexpr double hint = 1e-10;
inline constexpr double distribution = 1e-10;
inline constexpr double basis = 1e-10;
}  // namespace tol

/// Eigenvalues of a density operator with the small-negative clip applied.
/// Values in [-1e-12, 0) become 0; anything lower is a broken state.
inline std::vector<double> clipped_spectrum(const ComplexOperator &rho) {
    auto values = hermitian_eigensystem(rho).values;
    for (auto &v : values) {
        if (v < -tol::negative_clip) {
            throw InvariantViolation("density operator has eigenvalue " + std::to_string(v));
        }
        v = std::max(v, 0.0);
    }
    return values;
}

class QuantumState {
   public:
    /// Validates Hermiticity, positivity (up to the clip) and unit trace.
    explicit QuantumState(ComplexOperator rho, std::optional<Vector> amplitudes = std::nullopt)
        : rho_(std::move(rho)), amplitudes_(std::move(amplitudes)) {
        const double defect = hermiticity_defect(rho_);
        if (defect > tol::hermitian) {
            throw NotHermitian("density operator deviates from Hermitian by " + std::to_string(defect));
        }
        const Complex tr = rho_.trace();
        if (std::abs(tr - Complex(1.0)) > tol::trace) {
            throw InvariantViolation("density operator trace is " + std::to_string(tr.real()));
        }
        (void)clipped_spectrum(rho_);
        if (amplitudes_) {
            if (static_cast<std::size_t>(amplitudes_->size()) != rho_.dimension()) {
                throw SpaceMismatch("amplitude hint length does not match joint dimension");
            }
            double diff = (rho_.matrix() - (*amplitudes_) * amplitudes_->adjoint()).cwiseAbs().maxCoeff();
            if (diff > tol::hint) {
                throw InvariantViolation("amplitude hint disagrees with density operator");
            }
        }
    }

    const LabeledSpace &space() const noexcept {
        return rho_.space();
    }
    const ComplexOperator &rho() const noexcept {
        return rho_;
    }
    const std::optional<Vector> &amplitudes() const noexcept {
        return amplitudes_;
    }
    std::size_t dimension() const noexcept {
        return rho_.dimension();
    }
    double purity() const {
        return hilbert_schmidt_inner(rho_, rho_).real();
    }

   private:
    ComplexOperator rho_;
    std::optional<Vector> amplitudes_;
};

inline QuantumState pure_from_amplitudes(const LabeledSpace &space, const Vector &amplitudes) {
    if (static_cast<std::size_t>(amplitudes.size()) != space.dimension()) {
        throw SpaceMismatch("expected " + std::to_string(space.dimension()) + " amplitudes, got " +
                            std::to_string(amplitudes.size()));
    }
    const double norm = amplitudes.norm();
    if (!(norm > 0.0) || !std::isfinite(norm)) {
        throw DegenerateInput("amplitude vector has zero norm");
    }
    Vector psi = amplitudes / norm;
    return QuantumState(ComplexOperator::outer(space, psi), psi);
}

inline QuantumState pure_from_amplitudes(const LabeledSpace &space, std::span<const Complex> amplitudes) {
    Vector v(amplitudes.size());
    for (std::size_t i = 0; i < amplitudes.size(); ++i) {
        v(i) = amplitudes[i];
    }
    return pure_from_amplitudes(space, v);
}

inline QuantumState basis_state(const LabeledSpace &space, std::size_t index) {
    Vector v = Vector::Zero(space.dimension());
    v(index) = 1.0;
    return pure_from_amplitudes(space, v);
}

inline QuantumState maximally_mixed(const LabeledSpace &space) {
    const double d = static_cast<double>(space.dimension());
    return QuantumState(ComplexOperator::identity(space) * Complex(1.0 / d));
}

inline void check_distribution(std::span<const double> weights) {
    double sum = 0.0;
    for (double w : weights) {
        if (!(w >= 0.0)) {
            throw InvalidDistribution("negative weight " + std::to_string(w));
        }
        sum += w;
    }
    if (std::abs(sum - 1.0) > tol::distribution) {
        throw InvalidDistribution("weights sum to " + std::to_string(sum));
    }
}

inline QuantumState mix(std::span<const QuantumState> states, std::span<const double> weights) {
    if (states.empty() || states.size() != weights.size()) {
        throw InvalidDistribution("need one weight per state and at least one state");
    }
    check_distribution(weights);
    ComplexOperator acc = ComplexOperator::zero(states.front().space());
    for (std::size_t k = 0; k < states.size(); ++k) {
        acc = acc + states[k].rho() * Complex(weights[k]);
    }
    if (states.size() == 1) {
        return states.front();
    }
    return QuantumState(std::move(acc));
}

inline QuantumState tensor_product(const QuantumState &a, const QuantumState &b) {
    ComplexOperator rho = tensor_product(a.rho(), b.rho());
    if (a.amplitudes() && b.amplitudes()) {
        return QuantumState(std::move(rho), kron(*a.amplitudes(), *b.amplitudes()));
    }
    return QuantumState(std::move(rho));
}

inline QuantumState reduce(const QuantumState &state, const std::set<std::string> &keep) {
    return QuantumState(partial_trace(state.rho(), keep));
}

/// U rho U^dagger, keeping the amplitude hint when there is one.
inline QuantumState evolve(const QuantumState &state, const ComplexOperator &unitary) {
    state.rho().require_same_space(unitary);
    const Matrix &u = unitary.matrix();
    ComplexOperator rho(state.space(), u * state.rho().matrix() * u.adjoint());
    if (state.amplitudes()) {
        Vector psi = u * (*state.amplitudes());
        return QuantumState(std::move(rho), std::move(psi));
    }
    return QuantumState(std::move(rho));
}

namespace detail {

// Dominant eigenvector when the operator is numerically rank one.
inline std::optional<Vector> pure_vector(const QuantumState &state) {
    if (state.amplitudes()) {
        return state.amplitudes();
    }
    if (state.purity() < 1.0 - 1e-12) {
        return std::nullopt;
    }
    auto eig = hermitian_eigensystem(state.rho());
    return Vector(eig.vectors.matrix().col(0));
}

}  // namespace detail

/// Uhlmann fidelity (Tr sqrt(sqrt(a) b sqrt(a)))^2, with the pure-state shortcut
/// <psi|b|psi> whenever either argument is pure.
inline double fidelity(const QuantumState &a, const QuantumState &b) {
    a.rho().require_same_space(b.rho());
    auto clamp = [](double f) { return std::clamp(f, 0.0, 1.0); };
    auto pa = detail::pure_vector(a);
    auto pb = detail::pure_vector(b);
    if (pa && pb) {
        return clamp(std::norm(pa->dot(*pb)));
    }
    if (pa) {
        return clamp((pa->adjoint() * b.rho().matrix() * (*pa))(0, 0).real());
    }
    if (pb) {
        return clamp((pb->adjoint() * a.rho().matrix() * (*pb))(0, 0).real());
    }
    ComplexOperator sqrt_a = hermitian_function(a.rho(), [](double x) { return std::sqrt(std::max(x, 0.0)); });
    ComplexOperator inner = sqrt_a * b.rho() * sqrt_a;
    inner = ComplexOperator(inner.space(), 0.5 * (inner.matrix() + inner.matrix().adjoint()));
    double root_sum = 0.0;
    for (double v : hermitian_eigensystem(inner).values) {
        root_sum += std::sqrt(std::max(v, 0.0));
    }
    return clamp(root_sum * root_sum);
}

/// Haar-random pure state from a normalized complex-Gaussian vector.
inline QuantumState random_pure(const LabeledSpace &space, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    Vector v(space.dimension());
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        const double re = gauss(rng);
        const double im = gauss(rng);
        v(i) = Complex(re, im);
    }
    return pure_from_amplitudes(space, v);
}

/// Random full-rank mixed state G G^dagger / Tr(G G^dagger) with a complex-Gaussian G
/// (Hilbert-Schmidt ensemble).
inline QuantumState random_mixed(const LabeledSpace &space, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    const auto n = static_cast<Eigen::Index>(space.dimension());
    Matrix g(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) {
            const double re = gauss(rng);
            const double im = gauss(rng);
            g(i, j) = Complex(re, im);
        }
    }
    Matrix rho = g * g.adjoint();
    rho /= rho.trace();
    rho = 0.5 * (rho + rho.adjoint());
    return QuantumState(ComplexOperator(space, std::move(rho)));
}

/// An orthonormal basis of one subsystem, optionally grouped into record blocks.
class BasisFamily {
   public:
    /// `vectors` holds one basis vector per column. Empty `blocks` means one block per vector.
    BasisFamily(std::string label, Matrix vectors, std::vector<std::vector<std::size_t>> blocks = {})
        : label_(std::move(label)), vectors_(std::move(vectors)), blocks_(std::move(blocks)) {
        const auto n = vectors_.rows();
        if (vectors_.cols() != n || n == 0) {
            throw InvalidDimensions("basis for '" + label_ + "' must be a square, non-empty set of vectors");
        }
        const double defect = (vectors_.adjoint() * vectors_ - Matrix::Identity(n, n)).cwiseAbs().maxCoeff();
        if (defect > tol::basis) {
            throw InvalidDimensions("basis for '" + label_ + "' is not orthonormal (defect " +
                                    std::to_string(defect) + ")");
        }
        if (blocks_.empty()) {
            for (Eigen::Index i = 0; i < n; ++i) {
                blocks_.push_back({static_cast<std::size_t>(i)});
            }
        }
        std::vector<int> hits(n, 0);
        for (const auto &block : blocks_) {
            if (block.empty()) {
                throw InvalidDimensions("empty record block");
            }
            for (auto i : block) {
                if (i >= static_cast<std::size_t>(n)) {
                    throw InvalidDimensions("block index out of range");
                }
                ++hits[i];
            }
        }
        if (std::any_of(hits.begin(), hits.end(), [](int h) { return h != 1; })) {
            throw InvalidDimensions("blocks must partition the basis indices");
        }
    }

    static BasisFamily standard(const std::string &label, std::size_t dim,
                                std::vector<std::vector<std::size_t>> blocks = {}) {
        const auto n = static_cast<Eigen::Index>(dim);
        return {label, Matrix::Identity(n, n), std::move(blocks)};
    }

    /// Discrete Fourier basis; for dimension 2 this is the Hadamard (|+>, |->) basis.
    static BasisFamily fourier(const std::string &label, std::size_t dim) {
        const auto n = static_cast<Eigen::Index>(dim);
        Matrix f(n, n);
        const double pi = std::acos(-1.0);
        for (Eigen::Index j = 0; j < n; ++j) {
            for (Eigen::Index k = 0; k < n; ++k) {
                f(j, k) = std::polar(1.0 / std::sqrt(static_cast<double>(dim)),
                                     2.0 * pi * static_cast<double>(j * k) / static_cast<double>(dim));
            }
        }
        return {label, std::move(f)};
    }

    const std::string &label() const noexcept {
        return label_;
    }
    std::size_t dimension() const noexcept {
        return static_cast<std::size_t>(vectors_.rows());
    }
    const Matrix &vectors() const noexcept {
        return vectors_;
    }
    const std::vector<std::vector<std::size_t>> &blocks() const noexcept {
        return blocks_;
    }

    /// Projector onto block k, as an operator on the single subsystem.
    ComplexOperator block_projector(std::size_t k) const {
        LabeledSpace space{{label_, dimension()}};
        Matrix p = Matrix::Zero(vectors_.rows(), vectors_.rows());
        for (auto i : blocks_.at(k)) {
            p += vectors_.col(static_cast<Eigen::Index>(i)) * vectors_.col(static_cast<Eigen::Index>(i)).adjoint();
        }
        return {std::move(space), std::move(p)};
    }

   private:
    std::string label_;
    Matrix vectors_;
    std::vector<std::vector<std::size_t>> blocks_;
};

/// sum_k P_k rho P_k over the blocks of `basis`, with P_k extended to the whole space.
inline QuantumState dephase(const QuantumState &state, const BasisFamily &basis) {
    ComplexOperator acc = ComplexOperator::zero(state.space());
    for (std::size_t k = 0; k < basis.blocks().size(); ++k) {
        ComplexOperator p = embed(basis.block_projector(k), state.space());
        acc = acc + p * state.rho() * p;
    }
    return QuantumState(std::move(acc));
}

}  // namespace rlab
