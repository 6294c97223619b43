#include <gtest/gtest.h>

#include "oracle.hpp"

using namespace qhist;

namespace {

const double s2 = oracle::inv_sqrt2();

HistorySpec xz_spec(const ObservableSpec& o) { return {make_state({s2, s2}), {identity(2), identity(2)}, {o, o}}; }

}  // namespace

TEST(Amplitude, ZMeasurementsOnPlusState) {
    const auto spec = xz_spec(pauli_z_observable());
    EXPECT_NEAR(std::abs(amplitude(spec, {0, 0}) - s2), 0, 1e-12);
    EXPECT_NEAR(std::abs(amplitude(spec, {0, 1})), 0, 1e-12);
    EXPECT_NEAR(std::abs(amplitude(spec, {1, 0})), 0, 1e-12);
    EXPECT_NEAR(std::abs(amplitude(spec, {1, 1}) - s2), 0, 1e-12);
}

TEST(Amplitude, XMeasurementsOnPlusState) {
    const auto spec = xz_spec(pauli_x_observable());
    EXPECT_NEAR(std::abs(amplitude(spec, {0, 0}) - 1.0), 0, 1e-12);
    for (const OutcomeSequence& a : {OutcomeSequence{0, 1}, {1, 0}, {1, 1}}) EXPECT_NEAR(std::abs(amplitude(spec, a)), 0, 1e-12);
}

TEST(Amplitude, MatchesFullMatrixOracle) {
    random::Engine rng(101);
    for (int trial = 0; trial < 30; ++trial) {
        const std::size_t d = 2 + trial % 3, n = 1 + trial % 4;
        const auto spec = oracle::random_spec(d, n, rng);
        const auto sched = oracle::from_spec(spec);
        for (const auto& a : oracle::all_sequences(spec.outcome_counts())) {
            EXPECT_LE(std::abs(amplitude(spec, a) - oracle::amplitude(sched, a)), 1e-12);
            EXPECT_NEAR(sequence_probability(spec, a), oracle::sequential_probability(sched, a), 1e-12);
        }
    }
}

TEST(Amplitude, RankOneProbabilityEqualsChainNorm) {
    random::Engine rng(5);
    const auto spec = oracle::random_spec(3, 3, rng);
    for (const auto& a : oracle::all_sequences(spec.outcome_counts()))
        EXPECT_NEAR(std::norm(amplitude(spec, a)), chain_operator(spec, a).squaredNorm(), 1e-12);
}

TEST(Amplitude, RejectsBadSequences) {
    const auto spec = xz_spec(pauli_z_observable());
    EXPECT_THROW(amplitude(spec, {0}), ValidationError);
    EXPECT_THROW(amplitude(spec, {0, 2}), ValidationError);
}

TEST(Amplitude, ProjectorSetNeedsChainForm) {
    const auto o = computational_observable(3);
    const HistorySpec spec{basis_state(3, 0), {identity(3)}, {ProjectorSet{"coarse", {o.projector(0) + o.projector(1), o.projector(2)}, {0, 1}}}};
    EXPECT_THROW(amplitude(spec, {0}), ValidationError);
    EXPECT_NEAR(sequence_probability(spec, {0}), 1.0, 1e-14);
}

TEST(DecoherenceFunctional, DiagonalIsProbability) {
    random::Engine rng(17);
    const auto spec = oracle::random_spec(2, 3, rng);
    for (const auto& a : oracle::all_sequences(spec.outcome_counts())) {
        const Complex d = decoherence_functional(spec, a, a);
        EXPECT_NEAR(d.real(), sequence_probability(spec, a), 1e-12);
        EXPECT_NEAR(d.imag(), 0, 1e-14);
    }
}

TEST(DecoherenceFunctional, HermitianInArguments) {
    random::Engine rng(18);
    const auto spec = oracle::random_spec(2, 3, rng);
    const Complex ab = decoherence_functional(spec, {0, 1, 0}, {1, 1, 0});
    const Complex ba = decoherence_functional(spec, {1, 1, 0}, {0, 1, 0});
    EXPECT_LE(std::abs(ab - std::conj(ba)), 1e-14);
}

TEST(Consistency, ZHistoriesOfPlusStateAreConsistent) {
    const auto rep = is_consistent_set(xz_spec(pauli_z_observable()));
    EXPECT_TRUE(rep.consistent);
    EXPECT_LE(rep.max_interference, 1e-12);
}

TEST(Consistency, PrecessionIsNotConsistent) {
    const HistorySpec spec{basis_state(2, 0), {identity(2), gates::ry(M_PI / 3), gates::ry(M_PI / 3)}, {pauli_z_observable(), pauli_z_observable(), pauli_z_observable()}};
    const auto rep = is_consistent_set(spec);
    EXPECT_FALSE(rep.consistent);
    ASSERT_TRUE(rep.witness.has_value());
    EXPECT_NEAR(rep.max_interference, 0.375, 1e-12);
}

TEST(Consistency, SingleSlotSetsAreAlwaysConsistent) {
    random::Engine rng(23);
    for (int k = 0; k < 20; ++k) EXPECT_TRUE(is_consistent_set(oracle::random_spec(2 + k % 2, 1, rng), 1e-12).consistent);
}

TEST(Consistency, DistinctFinalOutcomesNeverInterfere) {
    random::Engine rng(24);
    const auto spec = oracle::random_spec(3, 3, rng);
    for (const auto& a : oracle::all_sequences(spec.outcome_counts()))
        for (const auto& b : oracle::all_sequences(spec.outcome_counts()))
            if (a.back() != b.back()) {
                EXPECT_LE(std::abs(decoherence_functional(spec, a, b)), 1e-14);
            }
}

TEST(Consistency, SquaredCountMustFitCap) {
    random::Engine rng(2);
    EXPECT_THROW(is_consistent_set(oracle::random_spec(2, 4, rng), 1e-10, 200), CapExceeded);
}

TEST(Enumeration, LexicographicOrder) {
    std::vector<OutcomeSequence> seen;
    for_each_sequence({2, 3}, [&](const OutcomeSequence& a) { seen.push_back(a); });
    const std::vector<OutcomeSequence> expected{{0, 0}, {0, 1}, {0, 2}, {1, 0}, {1, 1}, {1, 2}};
    EXPECT_EQ(seen, expected);
    for (std::uint64_t i = 0; i < 6; ++i) EXPECT_EQ(sequence_index(sequence_at(i, {2, 3}), {2, 3}), i);
    EXPECT_EQ(format_sequence({1, 0, 2}), "(1,0,2)");
}

TEST(Enumeration, CapExceeded) {
    EXPECT_THROW(sequence_count({2, 2, 2}, 7), CapExceeded);
    EXPECT_EQ(sequence_count({2, 2, 2}, 8), 8u);
    EXPECT_THROW(sequence_count(std::vector<std::size_t>(70, 2)), CapExceeded);
}

TEST(HistoryVectorTest, ContentOfZExample) {
    const auto hv = build_history_vector(xz_spec(pauli_z_observable()));
    const auto content = hv.content();
    ASSERT_EQ(content.size(), 2u);
    EXPECT_EQ(content[0].outcomes, (OutcomeSequence{0, 0}));
    EXPECT_EQ(content[1].outcomes, (OutcomeSequence{1, 1}));
    EXPECT_NEAR(std::abs(content[0].amplitude - s2), 0, 1e-12);
    EXPECT_NEAR(std::abs(content[1].amplitude - s2), 0, 1e-12);
}

TEST(HistoryVectorTest, ContentOfXExample) {
    const auto hv = build_history_vector(xz_spec(pauli_x_observable()));
    const auto content = hv.content();
    ASSERT_EQ(content.size(), 1u);
    EXPECT_EQ(content[0].outcomes, (OutcomeSequence{0, 0}));
    EXPECT_NEAR(std::abs(content[0].amplitude - 1.0), 0, 1e-12);
}

TEST(HistoryVectorTest, AgreesWithAmplitudeAndIsNormalized) {
    random::Engine rng(31);
    for (int trial = 0; trial < 20; ++trial) {
        const auto spec = oracle::random_spec(2 + trial % 2, 1 + trial % 4, rng);
        const auto hv = build_history_vector(spec);
        EXPECT_NEAR(hv.norm(), 1.0, 1e-12);
        for (const auto& a : oracle::all_sequences(spec.outcome_counts())) EXPECT_LE(std::abs(hv.amplitude(a) - amplitude(spec, a)), 1e-12);
    }
}

TEST(HistoryVectorTest, EmbedUsesSlotEigenbases) {
    const auto hv = build_history_vector(xz_spec(pauli_x_observable()));
    const StateVector plus = make_state({s2, s2});
    EXPECT_LE((hv.embed() - oracle::kron(plus, plus)).norm(), 1e-12);
    EXPECT_EQ(hv.space().labels(), (std::vector<std::string>{"t1", "t2"}));
}

TEST(HistoryVectorTest, ConstructorValidates) {
    const auto z = pauli_z_observable();
    EXPECT_THROW(HistoryVector({z}, {1.0}), ValidationError);
    EXPECT_THROW(HistoryVector({z}, {1.0, 1.0}), ValidationError);
    EXPECT_NO_THROW(HistoryVector({z}, {0.6, Complex(0, 0.8)}));
    EXPECT_THROW(build_history_vector(xz_spec(z), 3), CapExceeded);
}

TEST(SpecValidation, ErrorsNameTheProblem) {
    auto spec = xz_spec(pauli_z_observable());
    auto bad_u = spec;
    bad_u.evolutions[1] = make_operator({{1, 0}, {0, 2}});
    try {
        bad_u.validate();
        FAIL();
    } catch (const ValidationError& e) {
        EXPECT_NE(std::string(e.what()).find("evolution 2"), std::string::npos);
        EXPECT_NE(std::string(e.what()).find("not unitary"), std::string::npos);
    }
    auto mismatch = spec;
    mismatch.evolutions.push_back(identity(2));
    EXPECT_THROW(mismatch.validate(), ValidationError);
    auto unnormalized = spec;
    unnormalized.initial_state = make_state({1, 1});
    EXPECT_THROW(unnormalized.validate(), ValidationError);
    auto skew = spec;
    skew.measurements[0] = ObservableSpec{"skew", {1, -1}, {make_state({1, 0}), make_state({s2, s2})}};
    EXPECT_THROW(skew.validate(), ValidationError);
    EXPECT_THROW(spec.check_slot(0), ValidationError);
    EXPECT_THROW(spec.check_slot(3), ValidationError);
}

TEST(ProjectorSets, ValidationAndMerging) {
    const ObservableSpec degenerate{"D", {1, 1, -1}, {basis_state(3, 0), basis_state(3, 1), basis_state(3, 2)}};
    const auto merged = ProjectorSet::by_eigenvalue(degenerate);
    EXPECT_EQ(merged.outcome_count(), 2u);
    EXPECT_NO_THROW(merged.validate());
    ProjectorSet incomplete{"I", {degenerate.projector(0)}, {1}};
    EXPECT_THROW(incomplete.validate(), ValidationError);
    ProjectorSet overlapping{"O", {degenerate.projector(0), identity(3) - degenerate.projector(1)}, {1, 2}};
    EXPECT_THROW(overlapping.validate(), ValidationError);
}

TEST(ReduceSchedule, ComposesSkippedUnitaries) {
    random::Engine rng(41);
    const auto spec = oracle::random_spec(2, 3, rng);
    const auto reduced = reduce_schedule(spec, {1, 3});
    ASSERT_EQ(reduced.slot_count(), 2u);
    EXPECT_LE(max_abs_diff(reduced.evolution(2), spec.evolution(3) * spec.evolution(2)), 1e-14);
    EXPECT_THROW(reduce_schedule(spec, {2, 1}), ValidationError);
    EXPECT_THROW(reduce_schedule(spec, {}), ValidationError);
}

TEST(SumRules, HoldOnRandomSpecs) {
    random::Engine rng(77);
    for (int trial = 0; trial < 25; ++trial) {
        const auto spec = oracle::random_spec(2 + trial % 2, 2 + trial % 3, rng);
        const auto rep = marginal_checks(spec);
        EXPECT_NEAR(rep.total_probability, 1.0, 1e-10);
        EXPECT_LE(rep.max_amplitude_residual, 1e-12);
        EXPECT_LE(rep.last_slot_probability_residual, 1e-12);
        EXPECT_EQ(rep.amplitude_residuals.size(), spec.slot_count());
    }
}

TEST(SumRules, IntermediateProbabilityMarginalFailsWithoutConsistency) {
    const HistorySpec spec{basis_state(2, 0), {identity(2), gates::ry(M_PI / 3), gates::ry(M_PI / 3)}, {pauli_z_observable(), pauli_z_observable(), pauli_z_observable()}};
    const auto rep = marginal_checks(spec);
    EXPECT_GT(rep.intermediate_probability_residuals[1], 0.1);
    EXPECT_LE(rep.max_amplitude_residual, 1e-12);
}
