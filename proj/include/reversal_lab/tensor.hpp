#pragma once

// Dense complex operators over labeled tensor-product spaces.
//
// Basis-index convention (used by every module in this library): a joint basis
// index is the mixed-radix encoding of the per-subsystem indices, taken in the
// order the subsystems appear in the LabeledSpace, with the LEFTMOST subsystem
// as the most significant digit. For a space [S:2, A:3] the joint index of
// |s>|a> is s * 3 + a. Kronecker products follow the same convention, so the
// space of a (x) b is a's subsystems followed by b's.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <initializer_list>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "reversal_lab/errors.hpp"

namespace rlab {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;

namespace tol {
inline constexpr double hermitian = 1e-10;
inline constexpr double eigen = 1e-9;
inline constexpr double unitary = 1e-10;
}  // namespace tol

struct Subsystem {
    std::string label;
    std::size_t dimension;

    bool operator==(const Subsystem &) const = default;
};

class LabeledSpace {
   public:
    LabeledSpace() = default;

    explicit LabeledSpace(std::vector<Subsystem> subsystems) : subsystems_(std::move(subsystems)) {
        std::set<std::string> seen;
        for (const auto &sub : subsystems_) {
            if (sub.label.empty()) {
                throw InvalidDimensions("subsystem label must be non-empty");
            }
            if (!seen.insert(sub.label).second) {
                throw LabelCollision("label '" + sub.label + "' appears twice");
            }
            // Dimension 1 is admitted for trivial record devices (a device with no room for a copy).
            if (sub.dimension < 1) {
                throw InvalidDimensions("subsystem '" + sub.label + "' has dimension 0");
            }
        }
    }

    LabeledSpace(std::initializer_list<Subsystem> subsystems)
        : LabeledSpace(std::vector<Subsystem>(subsystems)) {
    }

    const std::vector<Subsystem> &subsystems() const noexcept {
        return subsystems_;
    }
    std::size_t size() const noexcept {
        return subsystems_.size();
    }
    bool empty() const noexcept {
        return subsystems_.empty();
    }

    std::size_t dimension() const noexcept {
        std::size_t d = 1;
        for (const auto &sub : subsystems_) {
            d *= sub.dimension;
        }
        return d;
    }

    bool contains(const std::string &label) const noexcept {
        return std::any_of(subsystems_.begin(), subsystems_.end(), [&](const Subsystem &s) {
            return s.label == label;
        });
    }

    std::size_t position(const std::string &label) const {
        for (std::size_t k = 0; k < subsystems_.size(); ++k) {
            if (subsystems_[k].label == label) {
                return k;
            }
        }
        throw LabelNotFound("no subsystem labeled '" + label + "'");
    }

    std::size_t dimension_of(const std::string &label) const {
        return subsystems_[position(label)].dimension;
    }

    std::vector<std::string> labels() const {
        std::vector<std::string> out;
        out.reserve(subsystems_.size());
        for (const auto &sub : subsystems_) {
            out.push_back(sub.label);
        }
        return out;
    }

    /// Per-subsystem digits of a joint index (leftmost subsystem most significant).
    std::vector<std::size_t> digits(std::size_t index) const {
        std::vector<std::size_t> out(subsystems_.size());
        for (std::size_t k = subsystems_.size(); k-- > 0;) {
            out[k] = index % subsystems_[k].dimension;
            index /= subsystems_[k].dimension;
        }
        return out;
    }

    std::size_t index(std::span<const std::size_t> digits) const {
        std::size_t out = 0;
        for (std::size_t k = 0; k < subsystems_.size(); ++k) {
            out = out * subsystems_[k].dimension + digits[k];
        }
        return out;
    }

    /// Subspace over the given labels, kept in this space's order.
    LabeledSpace restricted_to(const std::set<std::string> &keep) const {
        for (const auto &label : keep) {
            (void)position(label);
        }
        std::vector<Subsystem> out;
        for (const auto &sub : subsystems_) {
            if (keep.contains(sub.label)) {
                out.push_back(sub);
            }
        }
        return LabeledSpace(std::move(out));
    }

    std::set<std::string> label_set() const {
        std::set<std::string> out;
        for (const auto &sub : subsystems_) {
            out.insert(sub.label);
        }
        return out;
    }

    bool operator==(const LabeledSpace &) const = default;

   private:
    std::vector<Subsystem> subsystems_;
};

inline LabeledSpace concat(const LabeledSpace &a, const LabeledSpace &b) {
    std::vector<Subsystem> subs = a.subsystems();
    subs.insert(subs.end(), b.subsystems().begin(), b.subsystems().end());
    return LabeledSpace(std::move(subs));
}

/// Splits a space into a selected group of labels (in the caller's order) and the
/// rest (in space order). table[k * rest + t] is the joint index whose selected
/// digits encode k and whose remaining digits encode t.
struct IndexSplit {
    std::size_t selected = 1;
    std::size_t rest = 1;
    std::vector<std::size_t> table;

    std::size_t at(std::size_t k, std::size_t t) const {
        return table[k * rest + t];
    }
};

inline IndexSplit split_indices(const LabeledSpace &space, const std::vector<std::string> &selected) {
    std::vector<std::size_t> sel_pos;
    std::set<std::string> seen;
    for (const auto &label : selected) {
        if (!seen.insert(label).second) {
            throw LabelCollision("label '" + label + "' selected twice");
        }
        sel_pos.push_back(space.position(label));
    }
    std::vector<std::size_t> rest_pos;
    for (std::size_t k = 0; k < space.size(); ++k) {
        if (!seen.contains(space.subsystems()[k].label)) {
            rest_pos.push_back(k);
        }
    }
    const auto &subs = space.subsystems();
    IndexSplit split;
    for (auto p : sel_pos) {
        split.selected *= subs[p].dimension;
    }
    for (auto p : rest_pos) {
        split.rest *= subs[p].dimension;
    }
    const std::size_t n = space.dimension();
    split.table.assign(n, 0);
    for (std::size_t i = 0; i < n; ++i) {
        auto d = space.digits(i);
        std::size_t k = 0;
        for (auto p : sel_pos) {
            k = k * subs[p].dimension + d[p];
        }
        std::size_t t = 0;
        for (auto p : rest_pos) {
            t = t * subs[p].dimension + d[p];
        }
        split.table[k * split.rest + t] = i;
    }
    return split;
}

class ComplexOperator {
   public:
    ComplexOperator(LabeledSpace space, Matrix entries) : space_(std::move(space)), m_(std::move(entries)) {
        const auto n = static_cast<Eigen::Index>(space_.dimension());
        if (m_.rows() != n || m_.cols() != n) {
            throw SpaceMismatch("operator of shape " + std::to_string(m_.rows()) + "x" +
                                std::to_string(m_.cols()) + " does not match joint dimension " +
                                std::to_string(n));
        }
    }

    static ComplexOperator identity(const LabeledSpace &space) {
        const auto n = static_cast<Eigen::Index>(space.dimension());
        return {space, Matrix::Identity(n, n)};
    }
    static ComplexOperator zero(const LabeledSpace &space) {
        const auto n = static_cast<Eigen::Index>(space.dimension());
        return {space, Matrix::Zero(n, n)};
    }
    /// |v><v| for a (not necessarily normalized) vector.
    static ComplexOperator outer(const LabeledSpace &space, const Vector &v) {
        return {space, v * v.adjoint()};
    }
    static ComplexOperator diagonal(const LabeledSpace &space, std::span<const double> values) {
        if (values.size() != space.dimension()) {
            throw SpaceMismatch("diagonal length does not match joint dimension");
        }
        Matrix m = Matrix::Zero(values.size(), values.size());
        for (std::size_t i = 0; i < values.size(); ++i) {
            m(i, i) = values[i];
        }
        return {space, std::move(m)};
    }

    const LabeledSpace &space() const noexcept {
        return space_;
    }
    const Matrix &matrix() const noexcept {
        return m_;
    }
    std::size_t dimension() const noexcept {
        return static_cast<std::size_t>(m_.rows());
    }
    Complex operator()(std::size_t i, std::size_t j) const {
        return m_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
    }
    Complex trace() const {
        return m_.trace();
    }
    double frobenius_norm() const {
        return m_.norm();
    }

    ComplexOperator operator*(const ComplexOperator &rhs) const {
        require_same_space(rhs);
        return {space_, m_ * rhs.m_};
    }
    ComplexOperator operator+(const ComplexOperator &rhs) const {
        require_same_space(rhs);
        return {space_, m_ + rhs.m_};
    }
    ComplexOperator operator-(const ComplexOperator &rhs) const {
        require_same_space(rhs);
        return {space_, m_ - rhs.m_};
    }
    ComplexOperator operator*(Complex scale) const {
        return {space_, m_ * scale};
    }
    friend ComplexOperator operator*(Complex scale, const ComplexOperator &op) {
        return op * scale;
    }

    void require_same_space(const ComplexOperator &other) const {
        if (!(space_ == other.space_)) {
            throw SpaceMismatch("operators live on different labeled spaces");
        }
    }

   private:
    LabeledSpace space_;
    Matrix m_;
};

/// Largest entry-wise modulus of a - b.
inline double max_abs_diff(const ComplexOperator &a, const ComplexOperator &b) {
    a.require_same_space(b);
    return (a.matrix() - b.matrix()).cwiseAbs().maxCoeff();
}

inline double frobenius_distance(const ComplexOperator &a, const ComplexOperator &b) {
    a.require_same_space(b);
    return (a.matrix() - b.matrix()).norm();
}

inline ComplexOperator tensor_product(const ComplexOperator &a, const ComplexOperator &b) {
    LabeledSpace space = concat(a.space(), b.space());
    const auto da = static_cast<Eigen::Index>(a.dimension());
    const auto db = static_cast<Eigen::Index>(b.dimension());
    Matrix m(da * db, da * db);
    for (Eigen::Index i = 0; i < da; ++i) {
        for (Eigen::Index j = 0; j < da; ++j) {
            m.block(i * db, j * db, db, db) = a.matrix()(i, j) * b.matrix();
        }
    }
    return {std::move(space), std::move(m)};
}

inline Vector kron(const Vector &a, const Vector &b) {
    Vector out(a.size() * b.size());
    for (Eigen::Index i = 0; i < a.size(); ++i) {
        out.segment(i * b.size(), b.size()) = a(i) * b;
    }
    return out;
}

inline ComplexOperator partial_trace(const ComplexOperator &op, const std::set<std::string> &keep) {
    LabeledSpace kept = op.space().restricted_to(keep);
    IndexSplit split = split_indices(op.space(), kept.labels());
    Matrix out = Matrix::Zero(split.selected, split.selected);
    for (std::size_t r = 0; r < split.selected; ++r) {
        for (std::size_t c = 0; c < split.selected; ++c) {
            Complex acc = 0.0;
            for (std::size_t t = 0; t < split.rest; ++t) {
                acc += op(split.at(r, t), split.at(c, t));
            }
            out(r, c) = acc;
        }
    }
    return {std::move(kept), std::move(out)};
}

/// Extends an operator on a subset of `full`'s labels by the identity on the rest.
/// The operator's own subsystem order may differ from the order in `full`.
inline ComplexOperator embed(const ComplexOperator &op, const LabeledSpace &full) {
    for (const auto &sub : op.space().subsystems()) {
        if (full.dimension_of(sub.label) != sub.dimension) {
            throw SpaceMismatch("subsystem '" + sub.label + "' has a different dimension in the target space");
        }
    }
    if (op.space() == full) {
        return op;
    }
    IndexSplit split = split_indices(full, op.space().labels());
    Matrix out = Matrix::Zero(full.dimension(), full.dimension());
    for (std::size_t r = 0; r < split.selected; ++r) {
        for (std::size_t c = 0; c < split.selected; ++c) {
            const Complex v = op(r, c);
            if (v == Complex(0.0)) {
                continue;
            }
            for (std::size_t t = 0; t < split.rest; ++t) {
                out(split.at(r, t), split.at(c, t)) = v;
            }
        }
    }
    return {full, std::move(out)};
}

inline ComplexOperator adjoint(const ComplexOperator &op) {
    return {op.space(), op.matrix().adjoint()};
}

inline double hermiticity_defect(const ComplexOperator &op) {
    return (op.matrix() - op.matrix().adjoint()).cwiseAbs().maxCoeff();
}

inline bool is_unitary(const ComplexOperator &op, double tolerance = tol::unitary) {
    const auto n = static_cast<Eigen::Index>(op.dimension());
    Matrix defect = op.matrix().adjoint() * op.matrix() - Matrix::Identity(n, n);
    return defect.cwiseAbs().maxCoeff() <= tolerance;
}

/// Tr(a^dagger b).
inline Complex hilbert_schmidt_inner(const ComplexOperator &a, const ComplexOperator &b) {
    a.require_same_space(b);
    return a.matrix().conjugate().cwiseProduct(b.matrix()).sum();
}

inline ComplexOperator commutator(const ComplexOperator &a, const ComplexOperator &b) {
    return a * b - b * a;
}

struct EigenSystem {
    std::vector<double> values;  // descending
    ComplexOperator vectors;     // column j pairs with values[j]
};

inline EigenSystem hermitian_eigensystem(const ComplexOperator &op) {
    const double defect = hermiticity_defect(op);
    if (defect > tol::hermitian) {
        throw NotHermitian("max |A - A^dagger| = " + std::to_string(defect));
    }
    Matrix symmetric = 0.5 * (op.matrix() + op.matrix().adjoint());
    Eigen::SelfAdjointEigenSolver<Matrix> solver(symmetric);
    if (solver.info() != Eigen::Success) {
        throw InvariantViolation("Hermitian eigensolver did not converge");
    }
    const auto n = symmetric.rows();
    std::vector<double> values(n);
    Matrix vectors(n, n);
    for (Eigen::Index j = 0; j < n; ++j) {
        values[j] = solver.eigenvalues()(n - 1 - j);
        vectors.col(j) = solver.eigenvectors().col(n - 1 - j);
    }
    return {std::move(values), ComplexOperator(op.space(), std::move(vectors))};
}

/// f(A) = V f(Lambda) V^dagger for Hermitian A.
template <typename Fn>
ComplexOperator hermitian_function(const ComplexOperator &op, Fn &&fn) {
    EigenSystem eig = hermitian_eigensystem(op);
    const Matrix &v = eig.vectors.matrix();
    Eigen::VectorXd f(eig.values.size());
    for (std::size_t j = 0; j < eig.values.size(); ++j) {
        f(j) = fn(eig.values[j]);
    }
    return {op.space(), v * f.asDiagonal() * v.adjoint()};
}

}  // namespace rlab
