#include <gtest/gtest.h>

#include "oracle.hpp"

using namespace qhist;

namespace {

const double s2 = oracle::inv_sqrt2();

ObservableSpec rotated(std::string name, double angle) {
    // eigenvectors (cos a, -sin a) for +1 and (sin a, cos a) for -1
    return {std::move(name), {1, -1}, {make_state({std::cos(angle), -std::sin(angle)}), make_state({std::sin(angle), std::cos(angle)})}};
}

ChshSetup bell2_setup() {
    return {make_state({-s2, s2}), identity(2), gates::pauli_x(), pauli_x_observable(), pauli_z_observable(),
            rotated("-(Z+X)/sqrt2", 3 * M_PI / 8), rotated("(Z-X)/sqrt2", M_PI / 8), std::nullopt};
}

}  // namespace

TEST(LeggettGarg, PrecessionCorrelatorsAreAnalytic) {
    for (double theta : {0.0, 0.3, M_PI / 3, 1.2, M_PI / 2, 2.5}) {
        const auto sched = precession_schedule(theta);
        EXPECT_NEAR(two_time_correlator(sched, 1, 2), std::cos(theta), 1e-12);
        EXPECT_NEAR(two_time_correlator(sched, 2, 3), std::cos(theta), 1e-12);
        EXPECT_NEAR(two_time_correlator(sched, 1, 3), std::cos(2 * theta), 1e-12);
        EXPECT_NEAR(lg_evaluate(sched).k, 2 * std::cos(theta) - std::cos(2 * theta), 1e-10);
    }
}

TEST(LeggettGarg, PrecessionAtPiOverThreeViolates) {
    const auto r = lg_evaluate(precession_schedule(M_PI / 3));
    EXPECT_NEAR(r.k, 1.5, 1e-10);
    EXPECT_TRUE(r.violated);
    EXPECT_FALSE(r.consistent);
}

TEST(LeggettGarg, CorrelatorFromSequentialOracle) {
    random::Engine rng(7);
    const DichotomicSchedule sched{random::state(2, rng), random::unitary(2, rng), random::unitary(2, rng), random::unitary(2, rng), pauli_z_observable()};
    // Q at t1 and t3 only, t2 unmeasured: compose U23 U12.
    oracle::Schedule two{sched.initial_state, {{sched.u01, sched.q.eigenvectors, {}}, {sched.u23 * sched.u12, sched.q.eigenvectors, {}}}};
    double c13 = 0;
    for (const auto& a : oracle::all_sequences({2, 2})) c13 += sched.q.eigenvalues[a[0]] * sched.q.eigenvalues[a[1]] * oracle::sequential_probability(two, a);
    EXPECT_NEAR(two_time_correlator(sched, 1, 3), c13, 1e-12);
    EXPECT_THROW(two_time_correlator(sched, 2, 2), ValidationError);
    EXPECT_THROW(two_time_correlator(sched, 1, 4), ValidationError);
}

TEST(LeggettGarg, DecompositionIdentityOnRandomSchedules) {
    random::Engine rng(8);
    for (int k = 0; k < 100; ++k) {
        const DichotomicSchedule sched{random::state(2, rng), random::unitary(2, rng), random::unitary(2, rng), random::unitary(2, rng), pauli_z_observable()};
        const auto d = lg_interference_decomposition(sched);
        EXPECT_LE(d.residual, 1e-9);
        EXPECT_LE(d.max_last_interference, 1e-12);
    }
}

TEST(LeggettGarg, ConsistentFamiliesRespectBound) {
    random::Engine rng(9);
    for (int k = 0; k < 100; ++k) {
        // Monomial unitaries keep every branch in the Q eigenbasis.
        const DichotomicSchedule sched{random::state(2, rng), random::unitary(2, rng), random::monomial_unitary(2, rng), random::monomial_unitary(2, rng), pauli_z_observable()};
        const auto r = lg_evaluate(sched);
        EXPECT_TRUE(r.consistent);
        EXPECT_GE(r.k, -3 - 1e-9);
        EXPECT_LE(r.k, 1 + 1e-9);
    }
}

TEST(LeggettGarg, QutritDichotomicVariable) {
    random::Engine rng(10);
    const ObservableSpec q{"Q", {1, -1, -1}, {basis_state(3, 0), basis_state(3, 1), basis_state(3, 2)}};
    const DichotomicSchedule sched{random::state(3, rng), random::unitary(3, rng), random::unitary(3, rng), random::unitary(3, rng), q};
    EXPECT_LE(lg_interference_decomposition(sched).residual, 1e-9);
}

TEST(LeggettGarg, RejectsNonDichotomic) {
    auto sched = precession_schedule(0.4);
    sched.q = computational_observable(2);
    EXPECT_THROW(lg_evaluate(sched), ValidationError);
}

TEST(Chsh, FixedBasisValues) {
    const auto r = chsh_evaluate(bell2_setup(), ChshMode::FixedBasis);
    EXPECT_NEAR(r.e[0], s2, 1e-12);
    EXPECT_NEAR(r.e[1], s2, 1e-12);
    EXPECT_NEAR(r.e[2], s2, 1e-12);
    EXPECT_NEAR(r.e[3], -s2, 1e-12);
    EXPECT_NEAR(r.s, 2 * std::sqrt(2.0), 1e-12);
    EXPECT_TRUE(r.violated);
    EXPECT_TRUE(r.tables.empty());
}

TEST(Chsh, FixedBasisMatchesDenseExpectation) {
    // <Psi| O1 (x) O2 |Psi> with Psi = (|10> - |01>)/sqrt2.
    const StateVector psi = make_state({0, -s2, s2, 0});
    const auto setup = bell2_setup();
    const std::array<std::pair<const ObservableSpec*, const ObservableSpec*>, 4> pairs{
        {{&setup.a1, &setup.a2}, {&setup.a1, &setup.b2}, {&setup.b1, &setup.a2}, {&setup.b1, &setup.b2}}};
    const auto r = chsh_evaluate(setup, ChshMode::FixedBasis);
    for (std::size_t k = 0; k < 4; ++k) {
        const Operator m = oracle::kron(pairs[k].first->as_operator(), pairs[k].second->as_operator());
        EXPECT_NEAR(r.e[k], psi.dot(m * psi).real(), 1e-12);
    }
}

TEST(Chsh, PerPairValuesAndTables) {
    const auto setup = bell2_setup();
    const auto r = chsh_evaluate(setup, ChshMode::PerPair);
    EXPECT_NEAR(r.e[0], -s2, 1e-12);  // A1A2
    EXPECT_NEAR(r.e[1], -s2, 1e-12);  // A1B2
    EXPECT_NEAR(r.e[2], s2, 1e-12);   // B1A2
    EXPECT_NEAR(r.e[3], -s2, 1e-12);  // B1B2
    ASSERT_EQ(r.tables.size(), 4u);
    for (std::size_t k = 0; k < 4; ++k) {
        EXPECT_NEAR(r.tables[k].sum(), 1.0, 1e-10);
        EXPECT_NEAR(r.tables[k].average(), r.e[k], 1e-12);
    }
    EXPECT_NEAR(r.tables[0].p[2], (2 + std::sqrt(2.0)) / 4, 1e-12);
    EXPECT_NEAR(r.tables[2].p[0], (2 + std::sqrt(2.0)) / 8, 1e-12);

    auto flipped = setup;
    flipped.a1 = setup.a1.negated();
    const auto f = chsh_evaluate(flipped, ChshMode::PerPair);
    EXPECT_NEAR(f.s, 2 * std::sqrt(2.0), 1e-12);
}

TEST(Chsh, PerPairTablesMatchSequentialOracle) {
    const auto setup = bell2_setup();
    const auto r = chsh_evaluate(setup, ChshMode::PerPair);
    const oracle::Schedule s{setup.initial_state, {{setup.u1, setup.b1.eigenvectors, {}}, {setup.u2, setup.a2.eigenvectors, {}}}};
    EXPECT_NEAR(r.tables[2].p[0], oracle::sequential_probability(s, {0, 0}), 1e-12);
    EXPECT_NEAR(r.tables[2].p[3], oracle::sequential_probability(s, {1, 1}), 1e-12);
}

TEST(Chsh, RejectsNonDichotomic) {
    auto setup = bell2_setup();
    setup.b2 = computational_observable(2);
    EXPECT_THROW(chsh_evaluate(setup, ChshMode::PerPair), ValidationError);
}
