#pragma once

// Entropies (in bits), mutual informations and the thermal discord (one-way deficit)
// with respect to an explicit measurement basis on one subsystem.

#include <cmath>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "reversal_lab/states.hpp"

namespace rlab {

namespace tol {
inline constexpr double outcome_probability = 1e-14;
inline constexpr double discord_clip = 1e-10;
}  // namespace tol

/// Measurement of `basis.label()` in `basis`, possibly with degenerate record blocks.
struct MeasurementContext {
    BasisFamily basis;

    const std::string &target() const noexcept {
        return basis.label();
    }
};

inline MeasurementContext pointer_context(const std::string &label, std::size_t dim) {
    return {BasisFamily::standard(label, dim)};
}

/// -sum p lg p with 0 lg 0 = 0.
inline double shannon_entropy(std::span<const double> probabilities) {
    double h = 0.0;
    for (double p : probabilities) {
        if (p > 0.0) {
            h -= p * std::log2(p);
        }
    }
    return h;
}

inline double von_neumann_entropy(const QuantumState &state) {
    if (state.amplitudes()) {
        return 0.0;
    }
    auto spectrum = clipped_spectrum(state.rho());
    return std::max(0.0, shannon_entropy(spectrum));
}

inline double mutual_information(const QuantumState &state, const std::string &a, const std::string &b) {
    QuantumState joint = state.space().size() == 2 ? state : reduce(state, {a, b});
    if (!joint.space().contains(a) || !joint.space().contains(b) || a == b) {
        throw LabelNotFound("mutual information needs two distinct labels of the state");
    }
    return von_neumann_entropy(reduce(joint, {a})) + von_neumann_entropy(reduce(joint, {b})) -
           von_neumann_entropy(joint);
}

struct MeasuredEntropies {
    double conditional = 0.0;  // sum_k p_k H(rest | outcome k)
    double outcomes = 0.0;     // Shannon entropy of the outcome distribution
};

struct LudersBranch {
    std::size_t block = 0;
    double probability = 0.0;
    QuantumState state;
};

/// p_k = Tr(P_k rho), post-outcome states P_k rho P_k / p_k. Outcomes below 1e-14 are dropped.
inline std::vector<LudersBranch> luders_branches(const QuantumState &state, const BasisFamily &basis) {
    if (state.space().dimension_of(basis.label()) != basis.dimension()) {
        throw SpaceMismatch("basis does not span subsystem '" + basis.label() + "'");
    }
    std::vector<LudersBranch> out;
    for (std::size_t k = 0; k < basis.blocks().size(); ++k) {
        ComplexOperator p = embed(basis.block_projector(k), state.space());
        ComplexOperator sandwiched = p * state.rho() * p;
        const double prob = sandwiched.trace().real();
        if (prob < tol::outcome_probability) {
            continue;
        }
        ComplexOperator post = sandwiched * Complex(1.0 / prob);
        post = ComplexOperator(post.space(), 0.5 * (post.matrix() + post.matrix().adjoint()));
        out.push_back({k, prob, QuantumState(std::move(post))});
    }
    return out;
}

inline std::set<std::string> labels_except(const LabeledSpace &space, const std::string &excluded) {
    std::set<std::string> out;
    for (const auto &label : space.labels()) {
        if (label != excluded) {
            out.insert(label);
        }
    }
    return out;
}

inline MeasuredEntropies conditional_entropy_after_measurement(const QuantumState &state,
                                                                const MeasurementContext &context) {
    (void)state.space().position(context.target());
    const auto rest = labels_except(state.space(), context.target());
    MeasuredEntropies out;
    std::vector<double> probs;
    for (const auto &branch : luders_branches(state, context.basis)) {
        probs.push_back(branch.probability);
        out.conditional += branch.probability * von_neumann_entropy(reduce(branch.state, rest));
    }
    out.outcomes = shannon_entropy(probs);
    return out;
}

struct DiscordBreakdown {
    double joint = 0.0;       // H of the whole state
    double measured = 0.0;    // H of the measured subsystem
    double rest = 0.0;        // H of everything else
    MeasuredEntropies after;  // conditional and outcome entropies
    double symmetric = 0.0;   // I
    double asymmetric = 0.0;  // J
    double discord = 0.0;     // delta = (H_cond + H_outcomes) - H_joint
};

inline DiscordBreakdown discord_breakdown(const QuantumState &state, const MeasurementContext &context) {
    DiscordBreakdown b;
    b.after = conditional_entropy_after_measurement(state, context);
    b.joint = von_neumann_entropy(state);
    b.measured = von_neumann_entropy(reduce(state, {context.target()}));
    b.rest = von_neumann_entropy(reduce(state, labels_except(state.space(), context.target())));
    b.symmetric = b.rest + b.measured - b.joint;
    b.asymmetric = b.rest + b.measured - (b.after.conditional + b.after.outcomes);
    b.discord = (b.after.conditional + b.after.outcomes) - b.joint;
    if (b.discord < 0.0 && b.discord >= -tol::discord_clip) {
        b.discord = 0.0;
    }
    return b;
}

inline double asymmetric_mutual_information(const QuantumState &state, const MeasurementContext &context) {
    return discord_breakdown(state, context).asymmetric;
}

inline double discord(const QuantumState &state, const MeasurementContext &context) {
    return discord_breakdown(state, context).discord;
}

/// H(post) - H(pre).
inline double entropy_gap(const QuantumState &pre, const QuantumState &post) {
    pre.rho().require_same_space(post.rho());
    return von_neumann_entropy(post) - von_neumann_entropy(pre);
}

/// Mutual information of the joint outcome distribution when both subsystems are
/// read out in their standard bases.
inline double classical_mutual_information(const QuantumState &state, const std::string &a, const std::string &b) {
    QuantumState joint = reduce(state, {a, b});
    const std::size_t n = joint.dimension();
    const std::size_t da = joint.space().dimension_of(a);
    const std::size_t db = joint.space().dimension_of(b);
    const bool a_first = joint.space().position(a) == 0;
    std::vector<double> pj(n), pa(da, 0.0), pb(db, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        pj[i] = std::max(0.0, joint.rho()(i, i).real());
        auto d = joint.space().digits(i);
        pa[a_first ? d[0] : d[1]] += pj[i];
        pb[a_first ? d[1] : d[0]] += pj[i];
    }
    return shannon_entropy(pa) + shannon_entropy(pb) - shannon_entropy(pj);
}

}  // namespace rlab
