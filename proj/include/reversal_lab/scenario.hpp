#pragma once

// Registered scenarios: configuration, execution and reports.
//
// Verdict thresholds (every report carries the numbers needed to recompute them):
//   REVERSED      pair fidelity >= 1 - reversal            (default reversal = 1e-9)
//   INCONCLUSIVE  1 - gray_zone <= pair fidelity < 1 - reversal   (default gray_zone = 1e-6)
//   PARTIAL       otherwise, if system fidelity >= 1 - reversal
//   NOT_REVERSED  otherwise
// "pair" is the system-apparatus state after the reversal compared with the state
// before the measurement; "system" compares the system's reduced state alone.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <exception>
#include <iomanip>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include <json.hpp>

#include "reversal_lab/classical.hpp"
#include "reversal_lab/friend.hpp"
#include "reversal_lab/info.hpp"
#include "reversal_lab/measurement.hpp"
#include "reversal_lab/repeatability.hpp"
#include "reversal_lab/states.hpp"

namespace rlab {

inline constexpr int kSchemaVersion = 1;

struct ScenarioInfo {
    std::string name;
    std::string description;
    std::string chain;  // the state transformation the scenario walks through
};

/// Alphabetized registry.
inline const std::vector<ScenarioInfo> &scenario_registry() {
    static const std::vector<ScenarioInfo> registry = {
        {"classical-baseline", "classical measure, copy, reverse on a probability ensemble",
         "(sum w_s s) A0 D0 -> sum w_s s A_s D0 -> sum w_s s A_s D_s -> (sum w_s s D_s) A0"},
        {"friend-bell", "friend checks the pair with the two-qubit Bell operator, then reversal",
         "sum a_s |s A_s> -> Bell-basis Luders update -> U_SA^dagger"},
        {"friend-consensus", "friend checks agreement with a degenerate consensus operator, then reversal",
         "sum a_s |s A_s> -> agreement-projector Luders update (outcome hidden) -> U_SA^dagger"},
        {"friend-nondegenerate", "friend checks the record with outcome-resolving eigenvalues, then reversal",
         "sum a_s |s A_s> -> collapse onto |s A_s> with p = |a_s|^2 -> U_SA^dagger"},
        {"mixture-no-copy", "mixed system state measured and reversed without a copy",
         "rho^S |A0><A0| -> sum w_rs |r A_r><s A_s| -> rho^S |A0><A0|"},
        {"mixture-with-copy", "mixed system state measured, copied, then reversal attempted",
         "sum w_rs |r A_r D_r><s A_s D_s| -> |A0><A0| sum w_rs |r D_r><s D_s|; Tr_D -> sum w_ss |s><s|"},
        {"pure-no-copy", "pure superposition measured and reversed without a copy",
         "(sum a_s |s>)|A0> -> sum a_s |s>|A_s> -> (sum a_s |s>)|A0>"},
        {"pure-with-copy", "pure superposition measured, copied, then reversal attempted",
         "sum a_s |s>|A_s>|D_s> -> |A0> sum a_s |s>|D_s>; system left as sum |a_s|^2 |s><s|"},
        {"quasiclassical-with-copy", "system diagonal in the measured basis: copy does not block reversal",
         "|s>|A0>|D0> -> |s>|A_s>|D0> -> |s>|A_s>|D_s> -> |s>|A0>|D_s>"},
    };
    return registry;
}

inline bool is_registered(const std::string &name) {
    for (const auto &s : scenario_registry()) {
        if (s.name == name) {
            return true;
        }
    }
    return false;
}

struct Dimensions {
    std::size_t system = 2;
    std::size_t apparatus = 2;
    std::size_t device = 2;
};

struct Tolerances {
    double reversal = 1e-9;
    double gray_zone = 1e-6;
    double normalization = 1e-9;
};

struct VerifierSpec {
    std::optional<std::vector<double>> y;
    std::optional<std::vector<double>> n;
    std::optional<BellValues> bell;
};

struct ScenarioConfig {
    std::string scenario;
    Dimensions dimensions;
    std::optional<std::vector<Complex>> amplitudes;
    std::optional<std::vector<std::vector<Complex>>> density_matrix;
    std::optional<std::vector<double>> classical_weights;
    std::optional<VerifierSpec> verifier;
    std::uint64_t seed = 0;
    Tolerances tolerances;
};

enum class Verdict { Reversed, Partial, NotReversed, Inconclusive };

inline const char *to_string(Verdict v) {
    switch (v) {
        case Verdict::Reversed:
            return "REVERSED";
        case Verdict::Partial:
            return "PARTIAL";
        case Verdict::NotReversed:
            return "NOT_REVERSED";
        case Verdict::Inconclusive:
            return "INCONCLUSIVE";
    }
    return "?";
}

inline Verdict decide_verdict(double pair_fidelity, double system_fidelity, const Tolerances &t) {
    if (pair_fidelity >= 1.0 - t.reversal) {
        return Verdict::Reversed;
    }
    if (pair_fidelity >= 1.0 - t.gray_zone) {
        return Verdict::Inconclusive;
    }
    if (system_fidelity >= 1.0 - t.reversal) {
        return Verdict::Partial;
    }
    return Verdict::NotReversed;
}

struct StepSummary {
    std::string name;
    std::vector<std::string> acting;
    std::string operation;
    double purity = 1.0;
    double entropy = 0.0;
};

struct InfoReadouts {
    double mutual_information = 0.0;  // I(S:A) after the measurement
    double asymmetric = 0.0;          // J(S;A) with A read in its pointer basis
    double discord = 0.0;             // I - J
    double entropy_gap = 0.0;         // H(final system) - H(initial system)
};

struct ScenarioReport {
    ScenarioConfig config;
    std::vector<StepSummary> steps;
    Verdict verdict = Verdict::NotReversed;
    double pair_fidelity = 0.0;
    double system_fidelity = 0.0;
    double apparatus_fidelity = 0.0;
    bool apparatus_restored = false;
    InfoReadouts info;
    std::map<std::string, double> checks;
    std::vector<BranchRecovery> branches;
    double duration_seconds = 0.0;
};

struct ScenarioRun {
    std::optional<ProtocolTranscript> transcript;  // absent for the classical scenario
    ScenarioReport report;
};

// ---------------------------------------------------------------------------
// Validation and input construction

namespace detail {

inline void require_dims(const ScenarioConfig &c, bool needs_device) {
    const auto &d = c.dimensions;
    if (d.system < 2 || d.apparatus < 2 || (needs_device && d.device < 2)) {
        throw InvalidDimensions("every dimension must be at least 2");
    }
    if (d.apparatus < d.system) {
        throw RecordCapacityError("apparatus dimension " + std::to_string(d.apparatus) +
                                  " cannot record " + std::to_string(d.system) + " system outcomes");
    }
    if (needs_device && d.device < d.apparatus) {
        throw RecordCapacityError("device dimension " + std::to_string(d.device) + " cannot copy " +
                                  std::to_string(d.apparatus) + " apparatus records");
    }
}

inline Vector amplitude_vector(const ScenarioConfig &c) {
    const auto &a = *c.amplitudes;
    if (a.size() != c.dimensions.system) {
        throw InvalidDimensions("expected " + std::to_string(c.dimensions.system) + " amplitudes, got " +
                                std::to_string(a.size()));
    }
    Vector v(a.size());
    double norm2 = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        v(i) = a[i];
        norm2 += std::norm(a[i]);
    }
    if (std::abs(norm2 - 1.0) > c.tolerances.normalization) {
        throw ConfigError("amplitudes are not normalized (sum |a|^2 = " + std::to_string(norm2) + ")");
    }
    return v;
}

inline QuantumState density_state(const ScenarioConfig &c, const LabeledSpace &space) {
    const auto &rows = *c.density_matrix;
    const auto n = c.dimensions.system;
    if (rows.size() != n) {
        throw InvalidDimensions("density matrix must be " + std::to_string(n) + "x" + std::to_string(n));
    }
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        if (rows[i].size() != n) {
            throw InvalidDimensions("density matrix must be square");
        }
        for (std::size_t j = 0; j < n; ++j) {
            m(i, j) = rows[i][j];
        }
    }
    if (std::abs(m.trace() - Complex(1.0)) > c.tolerances.normalization) {
        throw ConfigError("density matrix trace is not 1");
    }
    m /= m.trace();
    if ((m - m.adjoint()).cwiseAbs().maxCoeff() > tol::hermitian) {
        throw ConfigError("density matrix is not Hermitian");
    }
    try {
        return QuantumState(ComplexOperator(space, m));
    } catch (const InvariantViolation &e) {
        throw ConfigError(std::string("density matrix is not a valid state: ") + e.what());
    }
}

inline std::vector<double> weights_from_seed(std::size_t n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::exponential_distribution<double> expo(1.0);
    std::vector<double> w(n);
    double sum = 0.0;
    for (auto &x : w) {
        x = expo(rng);
        sum += x;
    }
    for (auto &x : w) {
        x /= sum;
    }
    return w;
}

inline std::vector<double> classical_weights(const ScenarioConfig &c) {
    if (!c.classical_weights) {
        return weights_from_seed(c.dimensions.system, c.seed);
    }
    const auto &w = *c.classical_weights;
    if (w.size() != c.dimensions.system) {
        throw InvalidDimensions("expected " + std::to_string(c.dimensions.system) + " classical weights");
    }
    double sum = 0.0;
    for (double x : w) {
        if (!(x >= 0.0)) {
            throw ConfigError("classical weights must be nonnegative");
        }
        sum += x;
    }
    if (std::abs(sum - 1.0) > c.tolerances.normalization) {
        throw ConfigError("classical weights do not sum to 1");
    }
    std::vector<double> out = w;
    for (auto &x : out) {
        x /= sum;
    }
    return out;
}

enum class InputKind { Pure, Mixed, Diagonal };

inline QuantumState system_input(const ScenarioConfig &c, InputKind kind) {
    LabeledSpace space{{"S", c.dimensions.system}};
    const int given = (c.amplitudes ? 1 : 0) + (c.density_matrix ? 1 : 0) + (c.classical_weights ? 1 : 0);
    if (given > 1) {
        throw ConfigError("give at most one of amplitudes, density_matrix, classical_weights");
    }
    if (kind == InputKind::Pure) {
        if (c.density_matrix || c.classical_weights) {
            throw ConfigError("scenario '" + c.scenario + "' takes amplitudes");
        }
        return c.amplitudes ? pure_from_amplitudes(space, amplitude_vector(c)) : random_pure(space, c.seed);
    }
    if (kind == InputKind::Mixed) {
        if (c.classical_weights) {
            throw ConfigError("scenario '" + c.scenario + "' takes amplitudes or a density matrix");
        }
        if (c.amplitudes) {
            return pure_from_amplitudes(space, amplitude_vector(c));
        }
        return c.density_matrix ? density_state(c, space) : random_mixed(space, c.seed);
    }
    // Diagonal in the measured basis.
    if (c.amplitudes) {
        Vector v = amplitude_vector(c);
        int nonzero = 0;
        for (Eigen::Index i = 0; i < v.size(); ++i) {
            nonzero += std::abs(v(i)) > 0.0 ? 1 : 0;
        }
        if (nonzero != 1) {
            throw ConfigError("quasiclassical input must be a single measured-basis state");
        }
        return pure_from_amplitudes(space, v);
    }
    if (c.density_matrix) {
        QuantumState s = density_state(c, space);
        for (std::size_t i = 0; i < s.dimension(); ++i) {
            for (std::size_t j = 0; j < s.dimension(); ++j) {
                if (i != j && std::abs(s.rho()(i, j)) > 1e-12) {
                    throw ConfigError("quasiclassical density matrix must be diagonal in the measured basis");
                }
            }
        }
        return s;
    }
    return QuantumState(ComplexOperator::diagonal(space, classical_weights(c)));
}

inline StepSummary summarize(const ProtocolStep &step) {
    return {step.name, step.acting_labels, step.operation_id, step.state.purity(), von_neumann_entropy(step.state)};
}

inline QuantumState ready_state(const std::string &label, std::size_t dim) {
    return basis_state(LabeledSpace{{label, dim}}, 0);
}

inline void fill_fidelities(ScenarioReport &r, const QuantumState &initial, const QuantumState &final_state) {
    QuantumState pair_initial = reduce(initial, {"S", "A"});
    QuantumState pair_final = reduce(final_state, {"S", "A"});
    r.pair_fidelity = fidelity(pair_final, pair_initial);
    r.system_fidelity = fidelity(reduce(final_state, {"S"}), reduce(initial, {"S"}));
    r.apparatus_fidelity = fidelity(reduce(final_state, {"A"}), ready_state("A", initial.space().dimension_of("A")));
    r.apparatus_restored = r.apparatus_fidelity >= 1.0 - r.config.tolerances.reversal;
    r.verdict = decide_verdict(r.pair_fidelity, r.system_fidelity, r.config.tolerances);
    r.info.entropy_gap = entropy_gap(reduce(initial, {"S"}), reduce(final_state, {"S"}));
}

inline void fill_info(ScenarioReport &r, const QuantumState &measured) {
    QuantumState pair = reduce(measured, {"S", "A"});
    auto b = discord_breakdown(pair, pointer_context("A", pair.space().dimension_of("A")));
    r.info.mutual_information = b.symmetric;
    r.info.asymmetric = b.asymmetric;
    r.info.discord = b.discord;
}

inline void fill_steps(ScenarioReport &r, const ProtocolTranscript &t) {
    for (const auto &s : t.steps()) {
        r.steps.push_back(summarize(s));
    }
    r.checks["transcript_replay_defect"] = t.replay_defect();
}

inline ScenarioRun run_quantum(const ScenarioConfig &c, InputKind kind, bool with_copy) {
    require_dims(c, with_copy);
    QuantumState system = system_input(c, kind);
    QuantumState initial = tensor_product(system, ready_state("A", c.dimensions.apparatus));
    if (with_copy) {
        initial = tensor_product(initial, ready_state("D", c.dimensions.device));
    }
    LabeledSpace pair{{"S", c.dimensions.system}, {"A", c.dimensions.apparatus}};
    ComplexOperator u_sa = build_measurement_unitary(pair, "S", "A");

    ProtocolTranscript t(initial);
    t.metadata["scenario"] = c.scenario;
    t.metadata["seed"] = std::to_string(c.seed);
    const QuantumState measured = t.apply("measure", {"S", "A"}, "U_SA", u_sa);

    ScenarioRun run{std::nullopt, {}};
    ScenarioReport &r = run.report;
    r.config = c;

    if (with_copy) {
        LabeledSpace ad{{"A", c.dimensions.apparatus}, {"D", c.dimensions.device}};
        ComplexOperator u_ad = build_measurement_unitary(ad, "A", "D");
        t.record("copy", {"A", "D"}, "U_AD", copy_record(t.current(), u_ad, "A", "D"), u_ad);
        auto comm = pointer_commutation_check(u_ad, reduce(measured, {"S", "A"}), "A", "D");
        r.checks["copy_commutation_residual"] = comm.residual;
        r.checks["copy_preserves_residual"] = comm.preserves_residual;
    }
    const QuantumState reversed = t.record("reverse", {"S", "A"}, "U_SA^dagger", attempt_reversal(t.current(), u_sa),
                                           adjoint(u_sa));
    if (with_copy) {
        r.checks["record_mutual_information_SD"] = classical_mutual_information(reversed, "S", "D");
        r.checks["quantum_mutual_information_SD"] = mutual_information(reversed, "S", "D");
    }
    fill_info(r, measured);
    fill_fidelities(r, initial, reversed);
    fill_steps(r, t);
    run.transcript = std::move(t);
    return run;
}

inline ConsensusOperator make_verifier(const ScenarioConfig &c) {
    const std::size_t d = c.dimensions.system;
    const auto &v = c.verifier;
    if (c.scenario == "friend-bell") {
        if (d != 2) {
            throw InvalidDimensions("the Bell check is defined for a qubit pair only");
        }
        if (v && (v->y || v->n)) {
            throw ConfigError("friend-bell takes a 'bell' verifier, not y/n");
        }
        return build_bell_check(v && v->bell ? *v->bell : BellValues{});
    }
    if (v && v->bell) {
        throw ConfigError("scenario '" + c.scenario + "' takes y/n eigenvalues, not 'bell'");
    }
    std::vector<double> y(d, 1.0);
    if (c.scenario == "friend-nondegenerate") {
        for (std::size_t s = 0; s < d; ++s) {
            y[s] = static_cast<double>(s + 1);
        }
    }
    std::vector<double> n{0.0};
    if (v && v->y) {
        y = *v->y;
    }
    if (v && v->n) {
        n = *v->n;
    }
    return build_record_check(d, y, n);
}

inline ScenarioRun run_friend(const ScenarioConfig &c) {
    require_dims(c, false);
    if (c.dimensions.apparatus != c.dimensions.system) {
        throw InvalidDimensions("friend scenarios need equal system and apparatus dimensions");
    }
    ConsensusOperator verifier = make_verifier(c);
    QuantumState system = system_input(c, InputKind::Pure);
    VerificationReport v = reversal_after_verification(*system.amplitudes(), verifier);

    ScenarioRun run{std::nullopt, {}};
    ScenarioReport &r = run.report;
    r.config = c;
    r.branches = v.branches;
    v.transcript.metadata["scenario"] = c.scenario;
    v.transcript.metadata["seed"] = std::to_string(c.seed);
    fill_info(r, v.transcript.step("measure").state);
    fill_fidelities(r, v.transcript.initial(), v.transcript.current());
    fill_steps(r, v.transcript);
    r.checks["verifier_outcomes"] = static_cast<double>(verifier.outcomes().size());
    run.transcript = std::move(v.transcript);
    return run;
}

inline StepSummary summarize(const std::string &name, std::vector<std::string> acting, const std::string &op,
                             const ClassicalEnsemble &e) {
    double purity = 0.0;
    for (double p : e.probabilities()) {
        purity += p * p;
    }
    return {name, std::move(acting), op, purity, shannon_entropy(e)};
}

inline ScenarioRun run_classical(const ScenarioConfig &c) {
    require_dims(c, true);
    if (c.amplitudes || c.density_matrix) {
        throw ConfigError("classical-baseline takes classical_weights");
    }
    LabeledSpace space{{"S", c.dimensions.system}, {"A", c.dimensions.apparatus}, {"D", c.dimensions.device}};
    auto point = [](std::size_t n) {
        std::vector<double> p(n, 0.0);
        p[0] = 1.0;
        return p;
    };
    const auto w = classical_weights(c);
    ClassicalEnsemble initial = ClassicalEnsemble::product(space, {w, point(c.dimensions.apparatus), point(c.dimensions.device)});
    ClassicalEnsemble measured = classical_measure(initial);
    ClassicalEnsemble copied = classical_copy(measured);
    ClassicalEnsemble reversed = classical_reverse(copied);

    ScenarioRun run{std::nullopt, {}};
    ScenarioReport &r = run.report;
    r.config = c;
    r.steps = {summarize("initial", space.labels(), "prepare", initial),
               summarize("measure", {"S", "A"}, "E_SA", measured), summarize("copy", {"A", "D"}, "E_AD", copied),
               summarize("reverse", {"S", "A"}, "E_SA^-1", reversed)};
    r.pair_fidelity = fidelity(marginal(reversed, {"S", "A"}), marginal(initial, {"S", "A"}));
    r.system_fidelity = fidelity(marginal(reversed, {"S"}), marginal(initial, {"S"}));
    r.apparatus_fidelity = fidelity(marginal(reversed, {"A"}), marginal(initial, {"A"}));
    r.apparatus_restored = r.apparatus_fidelity >= 1.0 - c.tolerances.reversal;
    r.verdict = decide_verdict(r.pair_fidelity, r.system_fidelity, c.tolerances);
    r.info.mutual_information = mutual_information(measured, "S", "A");
    r.info.asymmetric = r.info.mutual_information;
    r.info.discord = 0.0;
    r.info.entropy_gap = shannon_entropy(marginal(reversed, {"S"})) - shannon_entropy(marginal(initial, {"S"}));
    r.checks["record_mutual_information_SD"] = mutual_information(reversed, "S", "D");
    r.checks["pair_marginal_max_abs_diff"] = max_abs_diff(marginal(reversed, {"S", "A"}), marginal(initial, {"S", "A"}));
    return run;
}

inline void require_finite(const ScenarioReport &r) {
    auto check = [](const std::string &name, double v) {
        if (!std::isfinite(v)) {
            throw InvariantViolation("readout '" + name + "' is not finite");
        }
    };
    check("pair_fidelity", r.pair_fidelity);
    check("system_fidelity", r.system_fidelity);
    check("apparatus_fidelity", r.apparatus_fidelity);
    check("I", r.info.mutual_information);
    check("J", r.info.asymmetric);
    check("delta", r.info.discord);
    check("delta_H", r.info.entropy_gap);
    for (const auto &[k, v] : r.checks) {
        check(k, v);
    }
    for (const auto &s : r.steps) {
        check(s.name + ".purity", s.purity);
        check(s.name + ".entropy", s.entropy);
    }
}

}  // namespace detail

/// Checks everything about a configuration that can be checked without running it.
inline void validate_config(const ScenarioConfig &c) {
    if (!is_registered(c.scenario)) {
        throw UnknownScenario("'" + c.scenario + "' is not a registered scenario");
    }
    const bool device = c.scenario == "classical-baseline" || c.scenario.ends_with("with-copy");
    detail::require_dims(c, device);
    if (c.scenario.starts_with("friend-") && c.dimensions.apparatus != c.dimensions.system) {
        throw InvalidDimensions("friend scenarios need equal system and apparatus dimensions");
    }
    if (c.scenario == "friend-bell" && c.dimensions.system != 2) {
        throw InvalidDimensions("the Bell check is defined for a qubit pair only");
    }
    const auto &t = c.tolerances;
    if (!(t.reversal > 0.0 && t.reversal < 1.0 && t.gray_zone >= t.reversal && t.gray_zone < 1.0 &&
          t.normalization > 0.0)) {
        throw ConfigError("tolerances must satisfy 0 < reversal <= gray_zone < 1 and normalization > 0");
    }
}

inline ScenarioRun run_scenario(const ScenarioConfig &config) {
    validate_config(config);
    const auto start = std::chrono::steady_clock::now();
    ScenarioRun run = [&] {
        const auto &name = config.scenario;
        if (name == "classical-baseline") {
            return detail::run_classical(config);
        }
        if (name == "pure-no-copy") {
            return detail::run_quantum(config, detail::InputKind::Pure, false);
        }
        if (name == "pure-with-copy") {
            return detail::run_quantum(config, detail::InputKind::Pure, true);
        }
        if (name == "quasiclassical-with-copy") {
            return detail::run_quantum(config, detail::InputKind::Diagonal, true);
        }
        if (name == "mixture-no-copy") {
            return detail::run_quantum(config, detail::InputKind::Mixed, false);
        }
        if (name == "mixture-with-copy") {
            return detail::run_quantum(config, detail::InputKind::Mixed, true);
        }
        return detail::run_friend(config);
    }();
    if (run.transcript && run.transcript->replay_defect() > 1e-10) {
        throw InvariantViolation("transcript does not replay within 1e-10");
    }
    detail::require_finite(run.report);
    run.report.duration_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return run;
}

// ---------------------------------------------------------------------------
// JSON (config schema and machine report)

namespace detail {

inline Complex parse_complex(const nlohmann::json &j) {
    if (j.is_number()) {
        return {j.get<double>(), 0.0};
    }
    if (j.is_array() && j.size() == 2 && j[0].is_number() && j[1].is_number()) {
        return {j[0].get<double>(), j[1].get<double>()};
    }
    throw ConfigError("complex numbers are written as a number or [re, im]");
}

inline nlohmann::json complex_json(Complex z) {
    if (z.imag() == 0.0) {
        return z.real();
    }
    return nlohmann::json::array({z.real(), z.imag()});
}

inline std::size_t parse_dim(const nlohmann::json &j, const char *key) {
    if (!j.is_number_integer() || j.get<long long>() < 0) {
        throw ConfigError(std::string("dimension '") + key + "' must be a nonnegative integer");
    }
    return j.get<std::size_t>();
}

inline std::vector<double> parse_reals(const nlohmann::json &j, const char *what) {
    if (!j.is_array()) {
        throw ConfigError(std::string(what) + " must be an array of numbers");
    }
    std::vector<double> out;
    for (const auto &x : j) {
        if (!x.is_number()) {
            throw ConfigError(std::string(what) + " must be an array of numbers");
        }
        out.push_back(x.get<double>());
    }
    return out;
}

inline void reject_unknown_keys(const nlohmann::json &obj, const std::set<std::string> &allowed, const char *where) {
    for (const auto &[key, _] : obj.items()) {
        if (!allowed.contains(key)) {
            throw ConfigError(std::string("unknown key '") + key + "' in " + where);
        }
    }
}

}  // namespace detail

/// Parses a schema-version-1 configuration document. `default_seed` applies when the
/// document has no "seed".
inline ScenarioConfig config_from_json(const nlohmann::json &j, std::uint64_t default_seed = 0) {
    using detail::parse_dim;
    using detail::parse_reals;
    if (!j.is_object()) {
        throw ConfigError("configuration must be a JSON object");
    }
    detail::reject_unknown_keys(j, {"schema_version", "scenario", "dimensions", "input", "verifier", "seed",
                                    "tolerances", "comment"},
                                "configuration");
    if (!j.contains("schema_version") || !j["schema_version"].is_number_integer() ||
        j["schema_version"].get<int>() != kSchemaVersion) {
        throw ConfigError("schema_version must be " + std::to_string(kSchemaVersion));
    }
    if (!j.contains("scenario") || !j["scenario"].is_string()) {
        throw ConfigError("missing string field 'scenario'");
    }
    ScenarioConfig c;
    c.scenario = j["scenario"].get<std::string>();
    if (!is_registered(c.scenario)) {
        throw UnknownScenario("'" + c.scenario + "' is not a registered scenario");
    }
    c.seed = default_seed;
    if (j.contains("seed")) {
        if (!j["seed"].is_number_unsigned()) {
            throw ConfigError("seed must be a nonnegative integer");
        }
        c.seed = j["seed"].get<std::uint64_t>();
    }

    if (j.contains("input")) {
        const auto &in = j["input"];
        if (!in.is_object() || in.size() != 1) {
            throw ConfigError("input must be an object with exactly one of amplitudes, density_matrix, classical_weights");
        }
        detail::reject_unknown_keys(in, {"amplitudes", "density_matrix", "classical_weights"}, "input");
        if (in.contains("amplitudes")) {
            if (!in["amplitudes"].is_array()) {
                throw ConfigError("amplitudes must be an array");
            }
            std::vector<Complex> a;
            for (const auto &x : in["amplitudes"]) {
                a.push_back(detail::parse_complex(x));
            }
            c.amplitudes = std::move(a);
        } else if (in.contains("density_matrix")) {
            if (!in["density_matrix"].is_array()) {
                throw ConfigError("density_matrix must be an array of rows");
            }
            std::vector<std::vector<Complex>> rows;
            for (const auto &row : in["density_matrix"]) {
                if (!row.is_array()) {
                    throw ConfigError("density_matrix must be an array of rows");
                }
                std::vector<Complex> r;
                for (const auto &x : row) {
                    r.push_back(detail::parse_complex(x));
                }
                rows.push_back(std::move(r));
            }
            c.density_matrix = std::move(rows);
        } else {
            c.classical_weights = parse_reals(in["classical_weights"], "classical_weights");
        }
    }

    std::size_t input_len = 0;
    if (c.amplitudes) {
        input_len = c.amplitudes->size();
    } else if (c.density_matrix) {
        input_len = c.density_matrix->size();
    } else if (c.classical_weights) {
        input_len = c.classical_weights->size();
    }
    c.dimensions.system = input_len > 0 ? input_len : 2;
    if (j.contains("dimensions")) {
        const auto &d = j["dimensions"];
        if (!d.is_object()) {
            throw ConfigError("dimensions must be an object with keys S, A, D");
        }
        detail::reject_unknown_keys(d, {"S", "A", "D"}, "dimensions");
        if (d.contains("S")) {
            c.dimensions.system = parse_dim(d["S"], "S");
        }
        c.dimensions.apparatus = d.contains("A") ? parse_dim(d["A"], "A") : c.dimensions.system;
        c.dimensions.device = d.contains("D") ? parse_dim(d["D"], "D") : c.dimensions.apparatus;
    } else {
        c.dimensions.apparatus = c.dimensions.system;
        c.dimensions.device = c.dimensions.system;
    }

    if (j.contains("verifier")) {
        const auto &v = j["verifier"];
        if (!v.is_object()) {
            throw ConfigError("verifier must be an object");
        }
        detail::reject_unknown_keys(v, {"y", "n", "bell"}, "verifier");
        VerifierSpec spec;
        if (v.contains("y")) {
            spec.y = parse_reals(v["y"], "verifier.y");
        }
        if (v.contains("n")) {
            spec.n = parse_reals(v["n"], "verifier.n");
        }
        if (v.contains("bell")) {
            auto b = parse_reals(v["bell"], "verifier.bell");
            if (b.size() != 4) {
                throw ConfigError("verifier.bell takes [b+=, b-=, b+!=, b-!=]");
            }
            spec.bell = BellValues{b[0], b[1], b[2], b[3]};
        }
        c.verifier = spec;
    }

    if (j.contains("tolerances")) {
        const auto &t = j["tolerances"];
        if (!t.is_object()) {
            throw ConfigError("tolerances must be an object");
        }
        detail::reject_unknown_keys(t, {"reversal", "gray_zone", "normalization"}, "tolerances");
        auto get = [&](const char *key, double &slot) {
            if (t.contains(key)) {
                if (!t[key].is_number()) {
                    throw ConfigError(std::string("tolerance '") + key + "' must be a number");
                }
                slot = t[key].get<double>();
            }
        };
        get("reversal", c.tolerances.reversal);
        get("gray_zone", c.tolerances.gray_zone);
        get("normalization", c.tolerances.normalization);
    }
    validate_config(c);
    return c;
}

inline ScenarioConfig parse_config(const std::string &text, std::uint64_t default_seed = 0) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error &e) {
        throw ConfigError(std::string("not valid JSON: ") + e.what());
    }
    return config_from_json(j, default_seed);
}

inline nlohmann::json config_to_json(const ScenarioConfig &c) {
    nlohmann::json j;
    j["schema_version"] = kSchemaVersion;
    j["scenario"] = c.scenario;
    j["dimensions"] = {{"S", c.dimensions.system}, {"A", c.dimensions.apparatus}, {"D", c.dimensions.device}};
    j["seed"] = c.seed;
    if (c.amplitudes) {
        auto arr = nlohmann::json::array();
        for (auto z : *c.amplitudes) {
            arr.push_back(detail::complex_json(z));
        }
        j["input"]["amplitudes"] = arr;
    } else if (c.density_matrix) {
        auto rows = nlohmann::json::array();
        for (const auto &row : *c.density_matrix) {
            auto r = nlohmann::json::array();
            for (auto z : row) {
                r.push_back(detail::complex_json(z));
            }
            rows.push_back(r);
        }
        j["input"]["density_matrix"] = rows;
    } else if (c.classical_weights) {
        j["input"]["classical_weights"] = *c.classical_weights;
    }
    if (c.verifier) {
        nlohmann::json v = nlohmann::json::object();
        if (c.verifier->y) {
            v["y"] = *c.verifier->y;
        }
        if (c.verifier->n) {
            v["n"] = *c.verifier->n;
        }
        if (c.verifier->bell) {
            const auto &b = *c.verifier->bell;
            v["bell"] = {b.parallel_plus, b.parallel_minus, b.antiparallel_plus, b.antiparallel_minus};
        }
        j["verifier"] = v;
    }
    j["tolerances"] = {{"reversal", c.tolerances.reversal},
                       {"gray_zone", c.tolerances.gray_zone},
                       {"normalization", c.tolerances.normalization}};
    return j;
}

inline nlohmann::json report_to_json(const ScenarioReport &r) {
    nlohmann::json j;
    j["schema_version"] = kSchemaVersion;
    j["config"] = config_to_json(r.config);
    auto steps = nlohmann::json::array();
    for (const auto &s : r.steps) {
        steps.push_back({{"name", s.name}, {"acting", s.acting}, {"operation", s.operation}, {"purity", s.purity},
                         {"entropy_bits", s.entropy}});
    }
    j["steps"] = steps;
    j["verdict"] = to_string(r.verdict);
    j["fidelity"] = {{"pair", r.pair_fidelity}, {"system", r.system_fidelity}, {"apparatus", r.apparatus_fidelity}};
    j["apparatus_restored"] = r.apparatus_restored;
    j["info_bits"] = {{"I", r.info.mutual_information},
                      {"J", r.info.asymmetric},
                      {"delta", r.info.discord},
                      {"delta_H", r.info.entropy_gap}};
    j["checks"] = r.checks;
    auto branches = nlohmann::json::array();
    for (const auto &b : r.branches) {
        branches.push_back({{"tag", b.tag}, {"probability", b.probability}, {"fidelity", b.fidelity}});
    }
    j["branches"] = branches;
    j["duration_seconds"] = r.duration_seconds;
    return j;
}

// ---------------------------------------------------------------------------
// Sweeps

inline const std::vector<std::string> &sweep_parameters() {
    static const std::vector<std::string> params = {"alpha_up_sq", "coherence", "seed", "weight_up"};
    return params;
}

/// Returns `base` with one sweepable field set to `value`.
///   alpha_up_sq  amplitudes (sqrt(x), sqrt((1-x)/(d-1)), ...)
///   coherence    density matrix with 1/d on the diagonal and x on every off-diagonal entry
///   seed         the seed (x must be a nonnegative integer)
///   weight_up    classical weights (x, (1-x)/(d-1), ...)
inline ScenarioConfig with_parameter(ScenarioConfig base, const std::string &param, double value) {
    const std::size_t d = base.dimensions.system;
    const double rest = d > 1 ? (1.0 - value) / static_cast<double>(d - 1) : 0.0;
    if (param == "alpha_up_sq") {
        if (value < 0.0 || value > 1.0) {
            throw ConfigError("alpha_up_sq must lie in [0, 1]");
        }
        std::vector<Complex> a(d, std::sqrt(rest));
        a[0] = std::sqrt(value);
        base.amplitudes = a;
        base.density_matrix.reset();
        base.classical_weights.reset();
    } else if (param == "coherence") {
        std::vector<std::vector<Complex>> m(d, std::vector<Complex>(d, value));
        for (std::size_t i = 0; i < d; ++i) {
            m[i][i] = 1.0 / static_cast<double>(d);
        }
        base.density_matrix = m;
        base.amplitudes.reset();
        base.classical_weights.reset();
    } else if (param == "seed") {
        if (value < 0.0 || value != std::floor(value)) {
            throw ConfigError("seed values must be nonnegative integers");
        }
        base.seed = static_cast<std::uint64_t>(value);
    } else if (param == "weight_up") {
        if (value < 0.0 || value > 1.0) {
            throw ConfigError("weight_up must lie in [0, 1]");
        }
        std::vector<double> w(d, rest);
        w[0] = value;
        base.classical_weights = w;
        base.amplitudes.reset();
        base.density_matrix.reset();
    } else {
        throw UnknownParameter("'" + param + "' is not sweepable (choose alpha_up_sq, coherence, seed, weight_up)");
    }
    return base;
}

struct SweepRow {
    double value = 0.0;
    ScenarioReport report;
};

/// Runs one scenario per grid value on up to `jobs` threads. Rows come back in grid order.
/// The first failing point (in grid order) rethrows its exception.
inline std::vector<SweepRow> run_sweep(const ScenarioConfig &base, const std::string &param,
                                       const std::vector<double> &grid, std::size_t jobs = 1) {
    std::vector<ScenarioConfig> configs;
    for (double v : grid) {
        configs.push_back(with_parameter(base, param, v));
    }
    std::vector<SweepRow> rows(grid.size());
    std::vector<std::exception_ptr> errors(grid.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < configs.size(); i = next++) {
            try {
                rows[i] = {grid[i], run_scenario(configs[i]).report};
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    const std::size_t n = std::max<std::size_t>(1, std::min(jobs, configs.size()));
    std::vector<std::thread> pool;
    for (std::size_t t = 1; t < n; ++t) {
        pool.emplace_back(worker);
    }
    worker();
    for (auto &t : pool) {
        t.join();
    }
    for (const auto &e : errors) {
        if (e) {
            std::rethrow_exception(e);
        }
    }
    return rows;
}

inline const std::vector<std::string> &sweep_columns() {
    static const std::vector<std::string> cols = {"value",  "verdict", "pair_fidelity", "system_fidelity",
                                                  "I",      "J",       "delta",         "delta_H"};
    return cols;
}

inline nlohmann::json sweep_to_json(const ScenarioConfig &base, const std::string &param,
                                    const std::vector<SweepRow> &rows) {
    nlohmann::json j;
    j["schema_version"] = kSchemaVersion;
    j["config"] = config_to_json(base);
    j["parameter"] = param;
    j["columns"] = sweep_columns();
    auto arr = nlohmann::json::array();
    for (const auto &r : rows) {
        const auto &rep = r.report;
        arr.push_back(nlohmann::json::array({r.value, to_string(rep.verdict), rep.pair_fidelity, rep.system_fidelity,
                                             rep.info.mutual_information, rep.info.asymmetric, rep.info.discord,
                                             rep.info.entropy_gap}));
    }
    j["rows"] = arr;
    return j;
}

// ---------------------------------------------------------------------------
// Human-readable tables

namespace detail {

inline std::string fixed(double v, int precision = 10) {
    if (std::abs(v) < 0.5 * std::pow(10.0, -precision)) {
        v = 0.0;  // no "-0.0000000000"
    }
    std::ostringstream out;
    out << std::fixed << std::setprecision(precision) << v;
    return out.str();
}

inline std::string table(const std::vector<std::string> &header, const std::vector<std::vector<std::string>> &rows) {
    std::vector<std::size_t> width(header.size());
    for (std::size_t c = 0; c < header.size(); ++c) {
        width[c] = header[c].size();
        for (const auto &r : rows) {
            width[c] = std::max(width[c], r[c].size());
        }
    }
    std::ostringstream out;
    auto line = [&](const std::vector<std::string> &cells) {
        for (std::size_t c = 0; c < cells.size(); ++c) {
            if (c + 1 == cells.size()) {
                out << (c ? "  " : "") << cells[c];
            } else {
                out << (c ? "  " : "") << std::left << std::setw(static_cast<int>(width[c])) << cells[c];
            }
        }
        out << "\n";
    };
    line(header);
    std::vector<std::string> rule;
    for (auto w : width) {
        rule.emplace_back(w, '-');
    }
    line(rule);
    for (const auto &r : rows) {
        line(r);
    }
    return out.str();
}

inline std::string join(const std::vector<std::string> &parts, const std::string &sep) {
    std::string out;
    for (const auto &p : parts) {
        out += (out.empty() ? "" : sep) + p;
    }
    return out;
}

}  // namespace detail

inline std::string format_report(const ScenarioReport &r) {
    using detail::fixed;
    std::ostringstream out;
    const auto &d = r.config.dimensions;
    out << "scenario  " << r.config.scenario << "\n";
    out << "dims      S=" << d.system << " A=" << d.apparatus << " D=" << d.device << "\n";
    out << "seed      " << r.config.seed << "\n\n";
    std::vector<std::vector<std::string>> steps;
    for (const auto &s : r.steps) {
        steps.push_back({s.name, detail::join(s.acting, ","), s.operation, fixed(s.purity), fixed(s.entropy)});
    }
    out << detail::table({"step", "acting", "operation", "purity", "entropy_bits"}, steps) << "\n";
    std::vector<std::vector<std::string>> readouts = {
        {"verdict", to_string(r.verdict)},
        {"fidelity.pair", fixed(r.pair_fidelity)},
        {"fidelity.system", fixed(r.system_fidelity)},
        {"fidelity.apparatus", fixed(r.apparatus_fidelity)},
        {"apparatus_restored", r.apparatus_restored ? "yes" : "no"},
        {"I_bits", fixed(r.info.mutual_information)},
        {"J_bits", fixed(r.info.asymmetric)},
        {"delta_bits", fixed(r.info.discord)},
        {"delta_H_bits", fixed(r.info.entropy_gap)},
    };
    for (const auto &[k, v] : r.checks) {
        readouts.push_back({"check." + k, fixed(v)});
    }
    out << detail::table({"readout", "value"}, readouts);
    if (!r.branches.empty()) {
        std::vector<std::vector<std::string>> rows;
        for (const auto &b : r.branches) {
            rows.push_back({b.tag, fixed(b.probability), fixed(b.fidelity)});
        }
        out << "\n" << detail::table({"outcome", "probability", "system_fidelity"}, rows);
    }
    return out.str();
}

inline std::string format_listing() {
    std::vector<std::vector<std::string>> rows;
    for (const auto &s : scenario_registry()) {
        rows.push_back({s.name, s.description, s.chain});
    }
    return detail::table({"scenario", "description", "state chain"}, rows);
}

inline std::string format_sweep(const std::string &param, const std::vector<SweepRow> &rows) {
    using detail::fixed;
    std::vector<std::vector<std::string>> cells;
    for (const auto &r : rows) {
        const auto &rep = r.report;
        cells.push_back({fixed(r.value, 6), to_string(rep.verdict), fixed(rep.pair_fidelity), fixed(rep.system_fidelity),
                         fixed(rep.info.mutual_information), fixed(rep.info.asymmetric), fixed(rep.info.discord),
                         fixed(rep.info.entropy_gap)});
    }
    auto header = sweep_columns();
    header[0] = param;
    return detail::table(header, cells);
}

}  // namespace rlab
