#pragma once

// When can a record held by the apparatus be copied into a memory device without
// disturbing the system-apparatus state? Checks for the copy preserving the joint
// state, the Hilbert-Schmidt norm bookkeeping of a unitary copy, record orthogonality
// and commutation of the copy with the pre-copy state.

#include <cmath>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "reversal_lab/measurement.hpp"
#include "reversal_lab/states.hpp"

namespace rlab {

namespace tol {
inline constexpr double orthogonal = 1e-10;        // at or below: passes
inline constexpr double definitely_overlap = 1e-6;  // above: fails; in between: inconclusive
inline constexpr double preserves = 1e-10;
inline constexpr double commutes = 1e-10;
inline constexpr double support = 1e-10;
}  // namespace tol

enum class CheckVerdict { Pass, Fail, Inconclusive };

inline const char *to_string(CheckVerdict v) {
    switch (v) {
        case CheckVerdict::Pass:
            return "PASS";
        case CheckVerdict::Fail:
            return "FAIL";
        case CheckVerdict::Inconclusive:
            return "INCONCLUSIVE";
    }
    return "?";
}

/// A unitary on one subsystem whose first column is `target` (so it maps |0> to `target`).
inline ComplexOperator unitary_from_first_column(const std::string &label, const Vector &target) {
    const auto n = target.size();
    if (std::abs(target.norm() - 1.0) > tol::basis) {
        throw DegenerateInput("device state is not normalized");
    }
    Matrix q = Matrix::Zero(n, n);
    q.col(0) = target;
    Eigen::Index filled = 1;
    for (Eigen::Index e = 0; e < n && filled < n; ++e) {
        Vector v = Vector::Unit(n, e);
        for (Eigen::Index j = 0; j < filled; ++j) {
            v -= q.col(j) * q.col(j).dot(v);
        }
        const double norm = v.norm();
        if (norm > 1e-6) {
            q.col(filled++) = v / norm;
        }
    }
    return {LabeledSpace{{label, static_cast<std::size_t>(n)}}, std::move(q)};
}

struct RecordComponent {
    double weight;
    QuantumState state;  // on the system-apparatus space
};

/// Weighted component states rho_s on S(x)A, the apparatus record block that stores
/// outcome s, and the device state |D_s> the copy should leave behind. The device's
/// ready state is its basis vector |0>.
class RecordEnsembleSpec {
   public:
    RecordEnsembleSpec(std::vector<RecordComponent> components, BasisFamily records, std::vector<Vector> device_states,
                       std::string device_label = "D")
        : components_(std::move(components)),
          records_(std::move(records)),
          device_states_(std::move(device_states)),
          device_label_(std::move(device_label)) {
        if (components_.empty()) {
            throw InvalidDistribution("record ensemble needs at least one component");
        }
        std::vector<double> w;
        for (const auto &c : components_) {
            w.push_back(c.weight);
            c.state.rho().require_same_space(components_.front().state.rho());
        }
        check_distribution(w);
        const LabeledSpace &sa = components_.front().state.space();
        if (sa.dimension_of(records_.label()) != records_.dimension()) {
            throw SpaceMismatch("record basis does not span '" + records_.label() + "'");
        }
        if (sa.contains(device_label_)) {
            throw LabelCollision("device label '" + device_label_ + "' already used by the components");
        }
        if (records_.blocks().size() != components_.size() || device_states_.size() != components_.size()) {
            throw InvalidDimensions("need one record block and one device state per component");
        }
        for (const auto &d : device_states_) {
            if (d.size() != device_states_.front().size()) {
                throw InvalidDimensions("device states have different dimensions");
            }
            if (std::abs(d.norm() - 1.0) > tol::basis) {
                throw DegenerateInput("device state is not normalized");
            }
        }
    }

    const std::vector<RecordComponent> &components() const noexcept {
        return components_;
    }
    const BasisFamily &records() const noexcept {
        return records_;
    }
    const std::vector<Vector> &device_states() const noexcept {
        return device_states_;
    }
    const std::string &apparatus_label() const noexcept {
        return records_.label();
    }
    const std::string &device_label() const noexcept {
        return device_label_;
    }
    const LabeledSpace &pair_space() const {
        return components_.front().state.space();
    }
    LabeledSpace device_space() const {
        return LabeledSpace{{device_label_, static_cast<std::size_t>(device_states_.front().size())}};
    }
    LabeledSpace full_space() const {
        return concat(pair_space(), device_space());
    }

    /// rho^{SA} = sum_s p_s rho_s.
    QuantumState joint_state() const {
        std::vector<QuantumState> states;
        std::vector<double> weights;
        for (const auto &c : components_) {
            states.push_back(c.state);
            weights.push_back(c.weight);
        }
        return mix(states, weights);
    }

    /// Copy unitary on {apparatus, device}: record block s drives |0>_D to |D_s>.
    ComplexOperator copy_unitary() const {
        LabeledSpace ad{{apparatus_label(), records_.dimension()}, {device_label_, device_space().dimension()}};
        std::vector<ComplexOperator> drives;
        for (const auto &d : device_states_) {
            drives.push_back(unitary_from_first_column(device_label_, d));
        }
        return build_controlled_unitary(ad, records_, device_label_, drives);
    }

    QuantumState ready_device() const {
        return basis_state(device_space(), 0);
    }

    /// The state the copy is supposed to produce: sum_s p_s rho_s (x) |D_s><D_s|.
    QuantumState intended_copy() const {
        ComplexOperator acc = ComplexOperator::zero(full_space());
        for (std::size_t s = 0; s < components_.size(); ++s) {
            acc = acc + tensor_product(components_[s].state.rho(),
                                       ComplexOperator::outer(device_space(), device_states_[s])) *
                            Complex(components_[s].weight);
        }
        return QuantumState(std::move(acc));
    }

    /// What the copy unitary actually does to rho^{SA} (x) |0><0|_D.
    QuantumState actual_copy() const {
        return copy_record(tensor_product(joint_state(), ready_device()), copy_unitary(), apparatus_label(),
                           device_label_);
    }

    /// Largest ||rho_s - P_s rho_s P_s||_F: how far each component strays outside its record block.
    double support_residual() const {
        double worst = 0.0;
        for (std::size_t s = 0; s < components_.size(); ++s) {
            ComplexOperator p = embed(records_.block_projector(s), pair_space());
            const auto &rho = components_[s].state.rho();
            worst = std::max(worst, frobenius_distance(rho, p * rho * p));
        }
        return worst;
    }

   private:
    std::vector<RecordComponent> components_;
    BasisFamily records_;
    std::vector<Vector> device_states_;
    std::string device_label_;
};

struct CheckResult {
    bool holds = false;
    double residual = 0.0;
};

/// Applies the copy and compares Tr_D of the result with the pre-copy rho^{SA}.
inline CheckResult check_copy_preserves_joint(const RecordEnsembleSpec &spec) {
    QuantumState after = reduce(spec.actual_copy(), spec.pair_space().label_set());
    const double residual = frobenius_distance(after.rho(), spec.joint_state().rho());
    return {residual <= tol::preserves, residual};
}

/// |sum p_r p_s Tr(rho_r rho_s) - sum p_r p_s Tr(rho_r rho_s) |<D_r|D_s>|^2|: zero for any
/// copy a unitary can actually implement.
inline double hs_identity_residual(const RecordEnsembleSpec &spec) {
    const auto &comps = spec.components();
    const auto &dev = spec.device_states();
    double before = 0.0;
    double after = 0.0;
    for (std::size_t r = 0; r < comps.size(); ++r) {
        for (std::size_t s = 0; s < comps.size(); ++s) {
            const double w = comps[r].weight * comps[s].weight;
            const double overlap = hilbert_schmidt_inner(comps[r].state.rho(), comps[s].state.rho()).real();
            before += w * overlap;
            after += w * overlap * std::norm(dev[r].dot(dev[s]));
        }
    }
    return std::abs(before - after);
}

enum class OrthogonalityScope { Joint, Apparatus };

struct OrthogonalityReport {
    Eigen::MatrixXd overlaps;  // Tr(rho_r^X rho_s^X)
    CheckVerdict verdict = CheckVerdict::Pass;
    double worst_off_diagonal = 0.0;
};

/// Pairwise Tr(rho_r rho_s) on S(x)A (Joint) or on the apparatus reductions (Apparatus).
/// Pairs where p_r p_s = 0 are trivially copyable and do not count against the verdict.
inline OrthogonalityReport pairwise_orthogonality(const RecordEnsembleSpec &spec, OrthogonalityScope scope) {
    const auto &comps = spec.components();
    std::vector<ComplexOperator> reduced;
    for (const auto &c : comps) {
        reduced.push_back(scope == OrthogonalityScope::Joint ? c.state.rho()
                                                             : partial_trace(c.state.rho(), {spec.apparatus_label()}));
    }
    const auto n = static_cast<Eigen::Index>(comps.size());
    OrthogonalityReport out;
    out.overlaps = Eigen::MatrixXd::Zero(n, n);
    for (Eigen::Index r = 0; r < n; ++r) {
        for (Eigen::Index s = 0; s < n; ++s) {
            out.overlaps(r, s) = hilbert_schmidt_inner(reduced[r], reduced[s]).real();
            if (r != s && comps[r].weight * comps[s].weight > 0.0) {
                out.worst_off_diagonal = std::max(out.worst_off_diagonal, std::abs(out.overlaps(r, s)));
            }
        }
    }
    if (out.worst_off_diagonal <= tol::orthogonal) {
        out.verdict = CheckVerdict::Pass;
    } else if (out.worst_off_diagonal > tol::definitely_overlap) {
        out.verdict = CheckVerdict::Fail;
    } else {
        out.verdict = CheckVerdict::Inconclusive;
    }
    return out;
}

struct CommutationResult {
    bool commutes = false;
    double residual = 0.0;            // ||[U, rho (x) I_D]||_F
    double preserves_residual = 0.0;  // ||Tr_D U (rho (x) |0><0|) U^dagger - rho||_F
};

/// Does the copy commute with the pre-copy state? `copy` acts on {apparatus, device}
/// (or on the full pair-plus-device space, checked structurally); `pre_copy` lives on
/// the pair space. The device's ready state is |0>.
inline CommutationResult pointer_commutation_check(const ComplexOperator &copy, const QuantumState &pre_copy,
                                                   const std::string &apparatus, const std::string &device) {
    const LabeledSpace &pair = pre_copy.space();
    (void)pair.position(apparatus);
    if (!copy.space().contains(device)) {
        throw LabelNotFound("copy operator must act on device '" + device + "'");
    }
    LabeledSpace device_space{{device, copy.space().dimension_of(device)}};
    LabeledSpace full = concat(pair, device_space);
    for (const auto &label : copy.space().labels()) {
        if (!full.contains(label)) {
            throw LabelNotFound("copy operator acts on unknown subsystem '" + label + "'");
        }
    }
    ComplexOperator u = embed(copy, full);
    const double defect = locality_defect(u, {apparatus, device});
    if (defect > tol::unitary) {
        throw LocalityViolation("copy operator touches subsystems other than '" + apparatus + "' and '" + device +
                                "'");
    }
    ComplexOperator rho_ext = tensor_product(pre_copy.rho(), ComplexOperator::identity(device_space));
    CommutationResult out;
    out.residual = commutator(u, rho_ext).frobenius_norm();
    out.commutes = out.residual <= tol::commutes;

    QuantumState copied = copy_record(tensor_product(pre_copy, basis_state(device_space, 0)), u, apparatus, device);
    QuantumState back = reduce(copied, pair.label_set());
    out.preserves_residual = frobenius_distance(back.rho(), pre_copy.rho());
    return out;
}

}  // namespace rlab
