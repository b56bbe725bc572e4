#include <gtest/gtest.h>

#include "oracles.hpp"
#include "reversal_lab/info.hpp"
#include "reversal_lab/measurement.hpp"

using namespace rlab;

namespace {
QuantumState measured_pair(const QuantumState &system, std::size_t da) {
    LabeledSpace pair{{"S", system.dimension()}, {"A", da}};
    QuantumState in = tensor_product(system, basis_state(LabeledSpace{{"A", da}}, 0));
    return measure(in, build_measurement_unitary(pair, "S", "A"));
}
}  // namespace

TEST(Entropy, FrozenValues) {
    const std::vector<double> p{0.25, 0.75};
    EXPECT_NEAR(shannon_entropy(p), 0.811278, 1e-6);
    QuantumState s(ComplexOperator::diagonal(LabeledSpace{{"S", 2}}, p));
    EXPECT_NEAR(von_neumann_entropy(s), 0.8112781244591328, 1e-12);
    EXPECT_NEAR(von_neumann_entropy(maximally_mixed(LabeledSpace{{"S", 4}})), 2.0, 1e-12);
    EXPECT_EQ(von_neumann_entropy(basis_state(LabeledSpace{{"S", 3}}, 1)), 0.0);
}

TEST(Entropy, MatchesGeneralEigensolverOnRandomStates) {
    for (std::size_t d : {2, 3, 4}) {
        for (unsigned seed = 0; seed < 10; ++seed) {
            QuantumState s = random_mixed(LabeledSpace{{"S", d}}, seed);
            EXPECT_NEAR(von_neumann_entropy(s), oracle::entropy_bits(s.rho().matrix()), 1e-10);
        }
    }
}

TEST(MutualInformation, BellPairHasTwoBits) {
    Vector v = Vector::Zero(4);
    v(0) = v(3) = 1.0 / std::sqrt(2.0);
    QuantumState bell = pure_from_amplitudes(LabeledSpace{{"S", 2}, {"A", 2}}, v);
    EXPECT_NEAR(mutual_information(bell, "S", "A"), 2.0, 1e-12);
    EXPECT_NEAR(classical_mutual_information(bell, "S", "A"), 1.0, 1e-12);
}

TEST(Luders, DropsImpossibleOutcomes) {
    QuantumState s = tensor_product(basis_state(LabeledSpace{{"S", 2}}, 1), basis_state(LabeledSpace{{"A", 3}}, 2));
    auto branches = luders_branches(s, BasisFamily::standard("A", 3));
    ASSERT_EQ(branches.size(), 1u);
    EXPECT_EQ(branches[0].block, 2u);
    EXPECT_NEAR(branches[0].probability, 1.0, 1e-15);
}

TEST(Luders, DegenerateBlockKeepsInternalCoherence) {
    Vector v = Vector::Constant(4, 0.5);
    QuantumState s = pure_from_amplitudes(LabeledSpace{{"A", 4}}, v);
    auto branches = luders_branches(s, BasisFamily::standard("A", 4, {{0, 1}, {2, 3}}));
    ASSERT_EQ(branches.size(), 2u);
    EXPECT_NEAR(branches[0].probability, 0.5, 1e-15);
    EXPECT_NEAR(branches[0].state.rho()(0, 1).real(), 0.5, 1e-15);
    EXPECT_NEAR(branches[0].state.purity(), 1.0, 1e-14);
}

TEST(Discord, PureRecordOfSuperpositionEqualsBinaryEntropy) {
    for (double p : {0.1, 0.25, 0.5, 0.9}) {
        Vector a(2);
        a << std::sqrt(p), std::sqrt(1 - p);
        QuantumState sa = measured_pair(pure_from_amplitudes(LabeledSpace{{"S", 2}}, a), 2);
        auto b = discord_breakdown(sa, pointer_context("A", 2));
        const double h = oracle::binary_entropy(p);
        EXPECT_NEAR(b.symmetric, 2 * h, 1e-10);
        EXPECT_NEAR(b.asymmetric, h, 1e-10);
        EXPECT_NEAR(b.discord, h, 1e-10);
        EXPECT_NEAR(b.symmetric - b.asymmetric, b.discord, 1e-12);
    }
}

TEST(Discord, ClassicalQuantumStateHasNone) {
    // sum_k p_k rho_k (x) |k><k|_A: reading A in its standard basis costs nothing.
    LabeledSpace s{{"S", 2}};
    LabeledSpace a{{"A", 2}};
    std::vector<QuantumState> parts{tensor_product(random_mixed(s, 1), basis_state(a, 0)),
                                    tensor_product(random_mixed(s, 2), basis_state(a, 1))};
    std::vector<double> w{0.4, 0.6};
    QuantumState cq = mix(parts, w);
    EXPECT_NEAR(discord(cq, pointer_context("A", 2)), 0.0, 1e-10);
    EXPECT_GT(discord(cq, MeasurementContext{BasisFamily::fourier("A", 2)}), 1e-3);
}

TEST(Discord, RandomMeasuredMixturesAreNonnegativeAndBoundedByI) {
    for (unsigned seed = 0; seed < 20; ++seed) {
        QuantumState sa = measured_pair(random_mixed(LabeledSpace{{"S", 3}}, seed), 3);
        auto b = discord_breakdown(sa, pointer_context("A", 3));
        EXPECT_GE(b.discord, 0.0);
        EXPECT_LE(b.asymmetric, b.symmetric + 1e-10);
        EXPECT_GE(b.asymmetric, -1e-10);
    }
}

TEST(EntropyGap, SignConvention) {
    QuantumState pure = basis_state(LabeledSpace{{"S", 2}}, 0);
    QuantumState mixed = maximally_mixed(LabeledSpace{{"S", 2}});
    EXPECT_NEAR(entropy_gap(pure, mixed), 1.0, 1e-12);
    EXPECT_NEAR(entropy_gap(mixed, pure), -1.0, 1e-12);
}
