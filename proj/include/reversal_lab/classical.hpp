#pragma once

// Classical counterpart: probability vectors over joint discrete configurations and
// reversible (permutation) dynamics acting on them.
//
// Configurations use the same mixed-radix indexing as the quantum spaces.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <random>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "reversal_lab/info.hpp"
#include "reversal_lab/measurement.hpp"
#include "reversal_lab/tensor.hpp"

namespace rlab {

namespace tol {
inline constexpr double classical_normalization = 1e-12;
}

class ClassicalEnsemble {
   public:
    ClassicalEnsemble(LabeledSpace space, std::vector<double> probabilities)
        : space_(std::move(space)), p_(std::move(probabilities)) {
        if (p_.size() != space_.dimension()) {
            throw InvalidDistribution("expected " + std::to_string(space_.dimension()) + " probabilities, got " +
                                      std::to_string(p_.size()));
        }
        double sum = 0.0;
        for (double v : p_) {
            if (!(v >= 0.0)) {
                throw InvalidDistribution("negative or NaN probability");
            }
            sum += v;
        }
        if (std::abs(sum - 1.0) > tol::classical_normalization) {
            throw InvalidDistribution("probabilities sum to " + std::to_string(sum));
        }
    }

    static ClassicalEnsemble point_mass(const LabeledSpace &space, const std::vector<std::size_t> &digits) {
        std::vector<double> p(space.dimension(), 0.0);
        p[space.index(digits)] = 1.0;
        return {space, std::move(p)};
    }

    /// Independent subsystems with the given marginals, one per subsystem in space order.
    static ClassicalEnsemble product(const LabeledSpace &space, const std::vector<std::vector<double>> &marginals) {
        if (marginals.size() != space.size()) {
            throw InvalidDistribution("need one marginal per subsystem");
        }
        std::vector<double> p(space.dimension(), 1.0);
        for (std::size_t i = 0; i < p.size(); ++i) {
            auto d = space.digits(i);
            for (std::size_t k = 0; k < d.size(); ++k) {
                if (marginals[k].size() != space.subsystems()[k].dimension) {
                    throw InvalidDistribution("marginal for '" + space.subsystems()[k].label +
                                              "' has the wrong length");
                }
                p[i] *= marginals[k][d[k]];
            }
        }
        return {space, std::move(p)};
    }

    const LabeledSpace &space() const noexcept {
        return space_;
    }
    const std::vector<double> &probabilities() const noexcept {
        return p_;
    }
    double operator[](std::size_t config) const {
        return p_.at(config);
    }

    bool operator==(const ClassicalEnsemble &) const = default;

   private:
    LabeledSpace space_;
    std::vector<double> p_;
};

/// A bijection of the joint configuration set that leaves every subsystem outside
/// `support` untouched.
class ReversibleMap {
   public:
    ReversibleMap(LabeledSpace space, std::vector<std::size_t> image, std::set<std::string> support)
        : space_(std::move(space)), image_(std::move(image)), support_(std::move(support)) {
        const std::size_t n = space_.dimension();
        if (image_.size() != n) {
            throw InvalidDimensions("permutation length does not match configuration count");
        }
        std::vector<bool> hit(n, false);
        for (auto j : image_) {
            if (j >= n || hit[j]) {
                throw InvalidDimensions("map is not a bijection");
            }
            hit[j] = true;
        }
        for (const auto &label : support_) {
            (void)space_.position(label);
        }
        for (std::size_t i = 0; i < n; ++i) {
            auto before = space_.digits(i);
            auto after = space_.digits(image_[i]);
            for (std::size_t k = 0; k < before.size(); ++k) {
                if (!support_.contains(space_.subsystems()[k].label) && before[k] != after[k]) {
                    throw LocalityViolation("map changes '" + space_.subsystems()[k].label +
                                            "', which is outside its declared support");
                }
            }
        }
    }

    const LabeledSpace &space() const noexcept {
        return space_;
    }
    const std::vector<std::size_t> &image() const noexcept {
        return image_;
    }
    const std::set<std::string> &support() const noexcept {
        return support_;
    }

    ClassicalEnsemble apply(const ClassicalEnsemble &ensemble) const {
        if (!(ensemble.space() == space_)) {
            throw SpaceMismatch("ensemble and map live on different configuration spaces");
        }
        std::vector<double> out(image_.size(), 0.0);
        for (std::size_t i = 0; i < image_.size(); ++i) {
            out[image_[i]] = ensemble[i];
        }
        return {space_, std::move(out)};
    }

    ReversibleMap inverse() const {
        std::vector<std::size_t> inv(image_.size());
        for (std::size_t i = 0; i < image_.size(); ++i) {
            inv[image_[i]] = i;
        }
        return {space_, std::move(inv), support_};
    }

   private:
    LabeledSpace space_;
    std::vector<std::size_t> image_;
    std::set<std::string> support_;
};

/// pointer <- pointer + source (mod |pointer|).
inline ReversibleMap addition_map(const LabeledSpace &space, const std::string &source, const std::string &pointer) {
    const std::size_t ds = space.dimension_of(source);
    const std::size_t dp = space.dimension_of(pointer);
    if (source == pointer) {
        throw LabelCollision("source and pointer must differ");
    }
    if (dp < ds) {
        throw RecordCapacityError("register '" + pointer + "' has " + std::to_string(dp) +
                                  " states but must record " + std::to_string(ds));
    }
    const std::size_t ps = space.position(source);
    const std::size_t pp = space.position(pointer);
    std::vector<std::size_t> image(space.dimension());
    for (std::size_t i = 0; i < image.size(); ++i) {
        auto d = space.digits(i);
        d[pp] = (d[pp] + d[ps]) % dp;
        image[i] = space.index(d);
    }
    return {space, std::move(image), {source, pointer}};
}

/// Uniformly random bijection on the configurations of `support`, identity elsewhere.
inline ReversibleMap random_reversible_map(const LabeledSpace &space, const std::set<std::string> &support,
                                           std::uint64_t seed) {
    std::vector<std::string> sel(support.begin(), support.end());
    IndexSplit split = split_indices(space, sel);
    std::vector<std::size_t> perm(split.selected);
    std::iota(perm.begin(), perm.end(), 0);
    std::mt19937_64 rng(seed);
    std::shuffle(perm.begin(), perm.end(), rng);
    std::vector<std::size_t> image(space.dimension());
    for (std::size_t k = 0; k < split.selected; ++k) {
        for (std::size_t t = 0; t < split.rest; ++t) {
            image[split.at(k, t)] = split.at(perm[k], t);
        }
    }
    return {space, std::move(image), support};
}

inline ClassicalEnsemble marginal(const ClassicalEnsemble &ensemble, const std::set<std::string> &keep) {
    LabeledSpace kept = ensemble.space().restricted_to(keep);
    IndexSplit split = split_indices(ensemble.space(), kept.labels());
    std::vector<double> out(split.selected, 0.0);
    for (std::size_t k = 0; k < split.selected; ++k) {
        for (std::size_t t = 0; t < split.rest; ++t) {
            out[k] += ensemble[split.at(k, t)];
        }
    }
    return {std::move(kept), std::move(out)};
}

/// True when `label` sits in its ready configuration (index 0) with probability exactly 1.
inline bool is_ready(const ClassicalEnsemble &ensemble, const std::string &label) {
    const std::size_t pos = ensemble.space().position(label);
    for (std::size_t i = 0; i < ensemble.probabilities().size(); ++i) {
        if (ensemble[i] != 0.0 && ensemble.space().digits(i)[pos] != 0) {
            return false;
        }
    }
    return true;
}

inline ClassicalEnsemble classical_measure(const ClassicalEnsemble &ensemble, const Roles &roles = {}) {
    if (!is_ready(ensemble, roles.apparatus)) {
        throw ProtocolOrderError("apparatus '" + roles.apparatus + "' is not in its ready state");
    }
    return addition_map(ensemble.space(), roles.system, roles.apparatus).apply(ensemble);
}

inline ClassicalEnsemble classical_copy(const ClassicalEnsemble &ensemble, const Roles &roles = {}) {
    if (!is_ready(ensemble, roles.device)) {
        throw ProtocolOrderError("device '" + roles.device + "' is not in its ready state");
    }
    return addition_map(ensemble.space(), roles.apparatus, roles.device).apply(ensemble);
}

inline ClassicalEnsemble classical_reverse(const ClassicalEnsemble &ensemble, const Roles &roles = {}) {
    return addition_map(ensemble.space(), roles.system, roles.apparatus).inverse().apply(ensemble);
}

inline double shannon_entropy(const ClassicalEnsemble &ensemble) {
    return shannon_entropy(ensemble.probabilities());
}

inline double mutual_information(const ClassicalEnsemble &ensemble, const std::string &a, const std::string &b) {
    return shannon_entropy(marginal(ensemble, {a})) + shannon_entropy(marginal(ensemble, {b})) -
           shannon_entropy(marginal(ensemble, {a, b}));
}

/// Largest |p - q| over configurations.
inline double max_abs_diff(const ClassicalEnsemble &a, const ClassicalEnsemble &b) {
    if (!(a.space() == b.space())) {
        throw SpaceMismatch("ensembles live on different configuration spaces");
    }
    double worst = 0.0;
    for (std::size_t i = 0; i < a.probabilities().size(); ++i) {
        worst = std::max(worst, std::abs(a[i] - b[i]));
    }
    return worst;
}

/// Classical fidelity (sum_i sqrt(p_i q_i))^2.
inline double fidelity(const ClassicalEnsemble &a, const ClassicalEnsemble &b) {
    if (!(a.space() == b.space())) {
        throw SpaceMismatch("ensembles live on different configuration spaces");
    }
    double acc = 0.0;
    for (std::size_t i = 0; i < a.probabilities().size(); ++i) {
        acc += std::sqrt(a[i] * b[i]);
    }
    return std::min(1.0, acc * acc);
}

}  // namespace rlab
