#include <gtest/gtest.h>

#include "oracle.hpp"

using namespace qhist;

TEST(CloneGate, QubitComputationalBasisIsCnot) {
    const auto v = clone_gate(pauli_z_observable());
    EXPECT_EQ(v.matrix, gates::cnot());
}

TEST(CloneGate, UnitaryPermutationForAllDims) {
    random::Engine rng(2);
    for (std::size_t d = 2; d <= 8; ++d) {
        EXPECT_LE(unitarity_defect(clone_gate(computational_observable(d)).matrix), 1e-12) << "d=" << d;
        const auto v = clone_gate(oracle::random_observable(d, rng));
        EXPECT_LE(unitarity_defect(v.matrix), 1e-12) << "d=" << d;
        std::vector<std::size_t> sorted = v.permutation;
        std::sort(sorted.begin(), sorted.end());
        for (std::size_t k = 0; k < d * d; ++k) EXPECT_EQ(sorted[k], k);
    }
}

TEST(CloneGate, ClonesEveryBasisState) {
    random::Engine rng(3);
    for (std::size_t d = 2; d <= 4; ++d) {
        const auto obs = oracle::random_observable(d, rng);
        const auto v = clone_gate(obs);
        for (std::size_t i = 0; i < d; ++i) {
            const StateVector in = oracle::kron(obs.eigenvectors[i], obs.eigenvectors[0]);
            const StateVector want = oracle::kron(obs.eigenvectors[i], obs.eigenvectors[i]);
            EXPECT_LE((v.matrix * in - want).norm(), 1e-12);
        }
    }
}

TEST(CloneGate, ImageRule) {
    EXPECT_EQ(clone_image(3, 2, 0), 2u * 3 + 2);
    EXPECT_EQ(clone_image(3, 2, 2), 2u * 3);
    EXPECT_EQ(clone_image(3, 2, 1), 2u * 3 + 1);
    EXPECT_EQ(clone_image(3, 0, 0), 0u);
}

TEST(Protocol, ReproducesHistoryAmplitudes) {
    random::Engine rng(44);
    for (int trial = 0; trial < 24; ++trial) {
        const auto spec = oracle::random_spec(2 + trial % 2, 2 + (trial / 2) % 2, rng);
        const auto rep = verify_protocol_equivalence(spec);
        EXPECT_TRUE(rep.pass);
        EXPECT_LE(rep.max_residual, 1e-10);
        EXPECT_LE(rep.max_step_norm_defect, 1e-10);
    }
}

TEST(Protocol, ZExampleFinalState) {
    const double s = oracle::inv_sqrt2();
    const HistorySpec spec{make_state({s, s}), {identity(2), identity(2)}, {pauli_z_observable(), pauli_z_observable()}};
    const auto out = run_protocol(spec);
    EXPECT_LE((out.final_state - make_state({s, 0, 0, s})).norm(), 1e-12);
    // evolve, then adjoin / clone / evolve per earlier slot.
    ASSERT_EQ(out.trace.steps.size(), 4u);
    EXPECT_EQ(out.trace.steps.back().registers, 2u);
}

TEST(Protocol, SingleSlotIsJustEvolution) {
    random::Engine rng(5);
    const auto spec = oracle::random_spec(3, 1, rng);
    const auto out = run_protocol(spec);
    EXPECT_LE((out.final_state - spec.evolution(1) * spec.initial_state).norm(), 1e-14);
    EXPECT_TRUE(verify_protocol_equivalence(spec).pass);
}

TEST(Protocol, Errors) {
    const auto o = computational_observable(3);
    const HistorySpec coarse{basis_state(3, 0), {identity(3)}, {ProjectorSet{"c", {o.projector(0) + o.projector(1), o.projector(2)}, {0, 1}}}};
    EXPECT_THROW(run_protocol(coarse), ValidationError);
    random::Engine rng(6);
    EXPECT_THROW(run_protocol(oracle::random_spec(2, 4, rng), 8), CapExceeded);
}
