#pragma once

// Measurement and copy unitaries, their application, reversal attempts, and the
// staged transcript of a protocol run.

#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "reversal_lab/states.hpp"

namespace rlab {

/// Subsystem labels playing the system, apparatus and memory-device roles.
struct Roles {
    std::string system = "S";
    std::string apparatus = "A";
    std::string device = "D";
};

/// Cyclic shift |k> -> |k + steps mod d> on a single subsystem.
inline ComplexOperator shift_operator(const std::string &label, std::size_t dim, std::size_t steps) {
    const auto n = static_cast<Eigen::Index>(dim);
    Matrix m = Matrix::Zero(n, n);
    for (std::size_t k = 0; k < dim; ++k) {
        m(static_cast<Eigen::Index>((k + steps) % dim), static_cast<Eigen::Index>(k)) = 1.0;
    }
    return {LabeledSpace{{label, dim}}, std::move(m)};
}

/// sum_k P_k (x) V_k where P_k are the block projectors of `control` and V_k act on `target`.
/// Identity on every other subsystem of `space`.
inline ComplexOperator build_controlled_unitary(const LabeledSpace &space, const BasisFamily &control,
                                                const std::string &target,
                                                const std::vector<ComplexOperator> &target_unitaries) {
    if (control.label() == target) {
        throw LabelCollision("control and target must be different subsystems");
    }
    if (space.dimension_of(control.label()) != control.dimension()) {
        throw SpaceMismatch("control basis dimension differs from subsystem '" + control.label() + "'");
    }
    if (target_unitaries.size() != control.blocks().size()) {
        throw InvalidDimensions("need one target unitary per control block");
    }
    LabeledSpace pair{{control.label(), control.dimension()}, {target, space.dimension_of(target)}};
    ComplexOperator acc = ComplexOperator::zero(pair);
    for (std::size_t k = 0; k < target_unitaries.size(); ++k) {
        if (!is_unitary(target_unitaries[k])) {
            throw NotUnitary("target unitary for block " + std::to_string(k) + " is not unitary");
        }
        acc = acc + tensor_product(control.block_projector(k), target_unitaries[k]);
    }
    return embed(acc, space);
}

/// sum_{s,k} |s><s| (x) |P_{k+s}><P_k| with indices mod the pointer dimension:
/// the controlled cyclic shift that writes the source's basis index into the pointer.
inline ComplexOperator build_measurement_unitary(const LabeledSpace &space, const std::string &source,
                                                 const std::string &pointer) {
    const std::size_t ds = space.dimension_of(source);
    const std::size_t dp = space.dimension_of(pointer);
    if (source == pointer) {
        throw LabelCollision("source and pointer must be different subsystems");
    }
    if (dp < ds) {
        throw RecordCapacityError("pointer '" + pointer + "' has dimension " + std::to_string(dp) +
                                  " but must hold " + std::to_string(ds) + " outcomes of '" + source + "'");
    }
    const std::size_t ps = space.position(source);
    const std::size_t pp = space.position(pointer);
    const std::size_t n = space.dimension();
    Matrix m = Matrix::Zero(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        auto d = space.digits(i);
        d[pp] = (d[pp] + d[ps]) % dp;
        m(static_cast<Eigen::Index>(space.index(d)), static_cast<Eigen::Index>(i)) = 1.0;
    }
    return {space, std::move(m)};
}

/// Shift of the pointer conditioned on which record block of `source` is occupied:
/// block k advances the pointer by k. With singleton blocks in the standard basis
/// this equals build_measurement_unitary.
inline ComplexOperator build_block_shift_unitary(const LabeledSpace &space, const BasisFamily &source,
                                                 const std::string &pointer) {
    const std::size_t dp = space.dimension_of(pointer);
    if (dp < source.blocks().size()) {
        throw RecordCapacityError("pointer '" + pointer + "' has dimension " + std::to_string(dp) +
                                  " but must hold " + std::to_string(source.blocks().size()) + " records");
    }
    std::vector<ComplexOperator> shifts;
    for (std::size_t k = 0; k < source.blocks().size(); ++k) {
        shifts.push_back(shift_operator(pointer, dp, k));
    }
    return build_controlled_unitary(space, source, pointer, shifts);
}

inline QuantumState measure(const QuantumState &state, const ComplexOperator &unitary) {
    ComplexOperator u = embed(unitary, state.space());
    if (!is_unitary(u)) {
        throw NotUnitary("measurement operator is not unitary");
    }
    return evolve(state, u);
}

/// Residual of the best factorization op = I_rest (x) op_support, in max-abs norm.
inline double locality_defect(const ComplexOperator &op, const std::set<std::string> &support) {
    const LabeledSpace &space = op.space();
    LabeledSpace sub = space.restricted_to(support);
    const double rest = static_cast<double>(space.dimension() / sub.dimension());
    ComplexOperator factor = partial_trace(op, support) * Complex(1.0 / rest);
    return max_abs_diff(embed(factor, space), op);
}

/// Applies a copy unitary that may act only on the pointer and device subsystems.
/// `copy` may be given on the full space (checked structurally) or on any subspace
/// of {pointer, device}.
inline QuantumState copy_record(const QuantumState &state, const ComplexOperator &copy, const std::string &pointer,
                                const std::string &device) {
    const std::set<std::string> support{pointer, device};
    (void)state.space().position(pointer);
    (void)state.space().position(device);
    if (copy.space() == state.space()) {
        const double defect = locality_defect(copy, support);
        if (defect > tol::unitary) {
            throw LocalityViolation("copy operator does not factor as identity outside {" + pointer + ", " +
                                    device + "} (defect " + std::to_string(defect) + ")");
        }
    } else {
        for (const auto &label : copy.space().labels()) {
            if (!support.contains(label)) {
                throw LocalityViolation("copy operator acts on '" + label + "', outside {" + pointer + ", " +
                                        device + "}");
            }
        }
    }
    ComplexOperator u = embed(copy, state.space());
    if (!is_unitary(u)) {
        throw NotUnitary("copy operator is not unitary");
    }
    return evolve(state, u);
}

/// Applies the adjoint of the measurement unitary, extended by identity to the full space.
inline QuantumState attempt_reversal(const QuantumState &state, const ComplexOperator &measurement_unitary) {
    ComplexOperator u = embed(measurement_unitary, state.space());
    if (!is_unitary(u)) {
        throw NotUnitary("reversal operator is not unitary");
    }
    return evolve(state, adjoint(u));
}

struct ProtocolStep {
    std::string name;
    std::vector<std::string> acting_labels;
    std::string operation_id;
    std::optional<ComplexOperator> unitary;  // full-space operator, for unitary steps
    QuantumState state;
};

class ProtocolTranscript {
   public:
    std::map<std::string, std::string> metadata;

    explicit ProtocolTranscript(QuantumState initial, std::string name = "initial") {
        steps_.push_back({std::move(name), initial.space().labels(), "prepare", std::nullopt, std::move(initial)});
    }

    const std::vector<ProtocolStep> &steps() const noexcept {
        return steps_;
    }
    const QuantumState &initial() const {
        return steps_.front().state;
    }
    const QuantumState &current() const {
        return steps_.back().state;
    }
    const ProtocolStep &step(const std::string &name) const {
        for (const auto &s : steps_) {
            if (s.name == name) {
                return s;
            }
        }
        throw LabelNotFound("no transcript step named '" + name + "'");
    }

    /// Applies `unitary` (extended to the full space) to the current state and records the result.
    const QuantumState &apply(std::string name, std::vector<std::string> acting, std::string id,
                              const ComplexOperator &unitary) {
        ComplexOperator u = embed(unitary, current().space());
        QuantumState next = measure(current(), u);
        steps_.push_back({std::move(name), std::move(acting), std::move(id), std::move(u), std::move(next)});
        return current();
    }

    /// Records a state produced elsewhere: either by a non-unitary step (projection,
    /// mixing; no unitary) or by a checked unitary step such as copy_record.
    const QuantumState &record(std::string name, std::vector<std::string> acting, std::string id, QuantumState state,
                               std::optional<ComplexOperator> unitary = std::nullopt) {
        if (unitary) {
            unitary = embed(*unitary, current().space());
        }
        steps_.push_back({std::move(name), std::move(acting), std::move(id), std::move(unitary), std::move(state)});
        return current();
    }

    /// Re-applies every recorded unitary to its predecessor and returns the worst
    /// max-abs deviation from the recorded successor.
    double replay_defect() const {
        double worst = 0.0;
        for (std::size_t k = 1; k < steps_.size(); ++k) {
            if (!steps_[k].unitary) {
                continue;
            }
            QuantumState again = evolve(steps_[k - 1].state, *steps_[k].unitary);
            worst = std::max(worst, max_abs_diff(again.rho(), steps_[k].state.rho()));
        }
        return worst;
    }

   private:
    std::vector<ProtocolStep> steps_;
};

}  // namespace rlab
