#pragma once

// A friend who checks the system-apparatus pair for a valid record. Record-check
// operators (correlated in the measured basis or not), the two-qubit Bell check,
// Luders-rule projective measurement, and reversal after verification.
//
// Post-measurement states follow the Luders rule: a degenerate outcome projects
// with the whole eigenspace projector, keeping coherence inside that eigenspace.
// The claim that a consensus check leaves the measurement reversible depends on it.

#include <algorithm>
#include <cmath>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "reversal_lab/info.hpp"
#include "reversal_lab/measurement.hpp"
#include "reversal_lab/states.hpp"

namespace rlab {

namespace tol {
inline constexpr double projector = 1e-10;
}

struct ConsensusOutcome {
    std::string tag;
    double eigenvalue;
    ComplexOperator projector;
};

/// Hermitian observable on S(x)A together with its eigenspace decomposition.
/// Outcomes that share an eigenvalue are merged into one (degenerate) projector.
class ConsensusOperator {
   public:
    struct Eigenvector {
        std::string tag;
        std::string family;
        double eigenvalue;
        Vector vector;
    };

    ConsensusOperator(const LabeledSpace &space, const std::vector<Eigenvector> &eigenvectors)
        : op_(ComplexOperator::zero(space)) {
        std::map<std::string, std::size_t> family_sizes;
        for (const auto &e : eigenvectors) {
            ++family_sizes[e.family];
        }
        std::vector<bool> used(eigenvectors.size(), false);
        for (std::size_t i = 0; i < eigenvectors.size(); ++i) {
            if (used[i]) {
                continue;
            }
            std::vector<std::size_t> group;
            for (std::size_t j = i; j < eigenvectors.size(); ++j) {
                if (!used[j] && eigenvectors[j].eigenvalue == eigenvectors[i].eigenvalue) {
                    group.push_back(j);
                    used[j] = true;
                }
            }
            ComplexOperator p = ComplexOperator::zero(space);
            for (auto j : group) {
                Vector v = eigenvectors[j].vector.normalized();
                p = p + ComplexOperator::outer(space, v);
            }
            outcomes_.push_back({group_tag(eigenvectors, group, family_sizes), eigenvectors[i].eigenvalue, p});
            op_ = op_ + p * Complex(eigenvectors[i].eigenvalue);
        }
        validate();
    }

    const ComplexOperator &op() const noexcept {
        return op_;
    }
    const LabeledSpace &space() const noexcept {
        return op_.space();
    }
    const std::vector<ConsensusOutcome> &outcomes() const noexcept {
        return outcomes_;
    }
    const ConsensusOutcome &outcome(const std::string &tag) const {
        for (const auto &o : outcomes_) {
            if (o.tag == tag) {
                return o;
            }
        }
        throw LabelNotFound("no outcome tagged '" + tag + "'");
    }

   private:
    static std::string group_tag(const std::vector<Eigenvector> &all, const std::vector<std::size_t> &group,
                                 const std::map<std::string, std::size_t> &family_sizes) {
        if (group.size() == 1) {
            return all[group.front()].tag;
        }
        const std::string &family = all[group.front()].family;
        const bool one_family = std::all_of(group.begin(), group.end(), [&](auto j) { return all[j].family == family; });
        if (one_family && family_sizes.at(family) == group.size()) {
            return family;
        }
        std::string tag;
        for (auto j : group) {
            tag += (tag.empty() ? "" : "|") + all[j].tag;
        }
        return tag;
    }

    void validate() const {
        if (hermiticity_defect(op_) > tol::hermitian) {
            throw NotHermitian("consensus operator is not Hermitian");
        }
        ComplexOperator total = ComplexOperator::zero(op_.space());
        for (std::size_t i = 0; i < outcomes_.size(); ++i) {
            const auto &p = outcomes_[i].projector;
            if (max_abs_diff(p * p, p) > tol::projector) {
                throw InvariantViolation("eigenvectors of outcome '" + outcomes_[i].tag + "' are not orthonormal");
            }
            for (std::size_t j = i + 1; j < outcomes_.size(); ++j) {
                if ((p * outcomes_[j].projector).matrix().cwiseAbs().maxCoeff() > tol::projector) {
                    throw InvariantViolation("outcome projectors are not mutually orthogonal");
                }
            }
            total = total + p;
        }
        if (max_abs_diff(total, ComplexOperator::identity(op_.space())) > tol::projector) {
            throw InvariantViolation("outcome projectors do not resolve the identity");
        }
    }

    ComplexOperator op_;
    std::vector<ConsensusOutcome> outcomes_;
};

inline LabeledSpace pair_space(std::size_t d, const Roles &roles = {}) {
    return LabeledSpace{{roles.system, d}, {roles.apparatus, d}};
}

/// sum_s y_s |s A_s><s A_s| + sum_{r != s} n_rs |r A_s><r A_s|.
/// `n` holds either one value for every mismatch or d(d-1) values ordered by (r, s)
/// lexicographically with r != s; for qubits that is (n, n') in the order |0 A_1>, |1 A_0>.
inline ConsensusOperator build_record_check(std::size_t d, const std::vector<double> &y, const std::vector<double> &n,
                                            const Roles &roles = {}) {
    if (d < 2) {
        throw InvalidDimensions("record check needs d >= 2");
    }
    if (y.size() != d) {
        throw InvalidDimensions("need one y eigenvalue per outcome");
    }
    if (n.size() != 1 && n.size() != d * (d - 1)) {
        throw InvalidDimensions("n must have 1 or d(d-1) entries");
    }
    LabeledSpace space = pair_space(d, roles);
    std::vector<ConsensusOperator::Eigenvector> eig;
    for (std::size_t s = 0; s < d; ++s) {
        eig.push_back({"y_" + std::to_string(s), "y", y[s], Vector::Unit(d * d, s * d + s)});
    }
    std::size_t k = 0;
    for (std::size_t r = 0; r < d; ++r) {
        for (std::size_t s = 0; s < d; ++s) {
            if (r == s) {
                continue;
            }
            const double value = n.size() == 1 ? n.front() : n[k];
            eig.push_back({"n_" + std::to_string(r) + std::to_string(s), "n", value, Vector::Unit(d * d, r * d + s)});
            ++k;
        }
    }
    return {space, eig};
}

/// Degenerate record check (all y equal, all n equal): confirms agreement without the outcome.
inline ConsensusOperator consensus_check(std::size_t d, double y = 1.0, double n = 0.0, const Roles &roles = {}) {
    return build_record_check(d, std::vector<double>(d, y), {n}, roles);
}

struct BellValues {
    double parallel_plus = 3.0;
    double parallel_minus = 1.0;
    double antiparallel_plus = -1.0;
    double antiparallel_minus = -3.0;
};

inline std::vector<Vector> bell_vectors() {
    const double h = 1.0 / std::sqrt(2.0);
    std::vector<Vector> out(4, Vector::Zero(4));
    // index = s * 2 + a
    out[0](0) = h;
    out[0](3) = h;  // (|0 A_0> + |1 A_1>)/sqrt2
    out[1](0) = h;
    out[1](3) = -h;
    out[2](1) = h;
    out[2](2) = h;  // (|0 A_1> + |1 A_0>)/sqrt2
    out[3](1) = h;
    out[3](2) = -h;
    return out;
}

/// Two-qubit Bell check with eigenvectors (|0 A_0> +- |1 A_1>)/sqrt2 ("parallel")
/// and (|0 A_1> +- |1 A_0>)/sqrt2 ("antiparallel").
inline ConsensusOperator build_bell_check(const BellValues &b = {}, const Roles &roles = {}) {
    auto v = bell_vectors();
    return {pair_space(2, roles),
            {{"b+=", "b=", b.parallel_plus, v[0]},
             {"b-=", "b=", b.parallel_minus, v[1]},
             {"b+!=", "b!=", b.antiparallel_plus, v[2]},
             {"b-!=", "b!=", b.antiparallel_minus, v[3]}}};
}

struct VerificationBranch {
    std::string tag;
    double eigenvalue;
    double probability;
    QuantumState state;
};

/// Luders-rule measurement of `op` (extended by identity to the state's space).
/// Outcomes with probability below 1e-14 are omitted.
inline std::vector<VerificationBranch> projective_measure(const QuantumState &state, const ConsensusOperator &op) {
    std::vector<VerificationBranch> out;
    for (const auto &o : op.outcomes()) {
        ComplexOperator p = embed(o.projector, state.space());
        ComplexOperator sandwiched = p * state.rho() * p;
        const double prob = sandwiched.trace().real();
        if (prob < tol::outcome_probability) {
            continue;
        }
        ComplexOperator post = sandwiched * Complex(1.0 / prob);
        post = ComplexOperator(post.space(), 0.5 * (post.matrix() + post.matrix().adjoint()));
        if (state.amplitudes()) {
            Vector psi = p.matrix() * (*state.amplitudes()) / std::sqrt(prob);
            out.push_back({o.tag, o.eigenvalue, prob, QuantumState(std::move(post), std::move(psi))});
        } else {
            out.push_back({o.tag, o.eigenvalue, prob, QuantumState(std::move(post))});
        }
    }
    return out;
}

struct BranchRecovery {
    std::string tag;
    double probability;
    double fidelity;  // recovered system state vs. the initial superposition
};

struct VerificationReport {
    std::vector<BranchRecovery> branches;
    ProtocolTranscript transcript;  // initial, measured, verified (outcome-averaged), reversed
    double system_fidelity = 0.0;   // outcome-averaged recovered system state vs. initial
    double pair_fidelity = 0.0;     // outcome-averaged recovered pair vs. initial pair
};

/// Measure (controlled shift S -> A), let the friend measure `verifier`, then undo the
/// measurement. Reports per-outcome and outcome-averaged recovery of the system.
inline VerificationReport reversal_after_verification(const Vector &initial_amplitudes,
                                                      const ConsensusOperator &verifier, const Roles &roles = {}) {
    const LabeledSpace &pair = verifier.space();
    const std::size_t d = pair.dimension_of(roles.system);
    LabeledSpace system_space{{roles.system, d}};
    QuantumState system = pure_from_amplitudes(system_space, initial_amplitudes);
    QuantumState ready = basis_state(LabeledSpace{{roles.apparatus, pair.dimension_of(roles.apparatus)}}, 0);
    QuantumState initial = tensor_product(system, ready);
    if (!(initial.space() == pair)) {
        throw SpaceMismatch("verifier must act on the (system, apparatus) pair in that order");
    }
    ComplexOperator u = build_measurement_unitary(pair, roles.system, roles.apparatus);

    ProtocolTranscript transcript(initial);
    const QuantumState measured = transcript.apply("measure", {roles.system, roles.apparatus}, "U_SA", u);

    auto branches = projective_measure(measured, verifier);
    VerificationReport report{{}, transcript};
    std::vector<QuantumState> posts;
    std::vector<double> weights;
    for (const auto &b : branches) {
        QuantumState recovered = reduce(attempt_reversal(b.state, u), {roles.system});
        report.branches.push_back({b.tag, b.probability, fidelity(recovered, system)});
        posts.push_back(b.state);
        weights.push_back(b.probability);
    }
    double total = 0.0;
    for (double w : weights) {
        total += w;
    }
    for (double &w : weights) {
        w /= total;
    }
    report.transcript.record("verify", {roles.system, roles.apparatus}, "luders", mix(posts, weights));
    const QuantumState &reversed = report.transcript.apply("reverse", {roles.system, roles.apparatus}, "U_SA^dagger",
                                                           adjoint(u));
    report.system_fidelity = fidelity(reduce(reversed, {roles.system}), system);
    report.pair_fidelity = fidelity(reversed, initial);
    return report;
}

}  // namespace rlab
