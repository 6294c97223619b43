#include <gtest/gtest.h>

#include "oracle.hpp"

using namespace qhist;

namespace {

random::Engine rng_for(std::uint64_t seed) { return random::Engine(seed); }

}  // namespace

TEST(Tensor, KroneckerMatchesLoopOracle) {
    auto rng = rng_for(11);
    for (std::size_t da : {1, 2, 3})
        for (std::size_t db : {2, 3}) {
            const Operator a = random::unitary(da, rng), b = random::hermitian(db, rng);
            EXPECT_LE(max_abs_diff(tensor_product(a, b), oracle::kron(a, b)), 1e-14);
            const StateVector x = random::state(da, rng), y = random::state(db, rng);
            EXPECT_LE((tensor_product(x, y) - oracle::kron(x, y)).norm(), 1e-14);
        }
}

TEST(Tensor, FirstFactorIsOutermost) {
    const StateVector v = tensor_product(basis_state(2, 1), basis_state(3, 2));
    EXPECT_EQ(v.size(), 6);
    EXPECT_EQ(v(1 * 3 + 2), Complex(1));
    EXPECT_EQ(tensor_product(std::vector<StateVector>{basis_state(2, 0), basis_state(2, 1), basis_state(2, 1)})(3), Complex(1));
}

TEST(Tensor, SpaceProductConcatenatesAxes) {
    const auto s = tensor_product(LabeledSpace::slots(1, 2), LabeledSpace({{2, "", 3}}));
    EXPECT_EQ(s.labels(), (std::vector<std::string>{"t1", "t2"}));
    EXPECT_EQ(s.dim(), 6u);
    EXPECT_THROW(tensor_product(LabeledSpace::slots(1, 2), LabeledSpace::slots(1, 2)), ValidationError);
}

TEST(Tensor, EmptyFactorListIsAnError) { EXPECT_THROW(tensor_product(std::vector<StateVector>{}), ValidationError); }

TEST(LabeledSpace, LabelsAndLookups) {
    const LabeledSpace s({{1, "A", 2}, {1, "B", 3}, {2, "A", 2}, {2, "B", 3}});
    EXPECT_EQ(s.labels(), (std::vector<std::string>{"t1.A", "t1.B", "t2.A", "t2.B"}));
    EXPECT_EQ(s.dim(), 36u);
    EXPECT_EQ(s.index_of("t2.A"), 2u);
    EXPECT_EQ(s.slot_dim(1), 6u);
    EXPECT_EQ(s.slot_numbers(), (std::vector<std::size_t>{1, 2}));
    EXPECT_EQ(s.without({"t1.B", "t2.B"}).labels(), (std::vector<std::string>{"t1.A", "t2.A"}));
    EXPECT_THROW(s.index_of("t3"), ValidationError);
    EXPECT_THROW(LabeledSpace({{1, "", 2}, {1, "", 2}}), ValidationError);
    EXPECT_THROW(LabeledSpace({{1, "", 0}}), ValidationError);
}

TEST(PartialTrace, MatchesIndexSumOracle) {
    auto rng = rng_for(7);
    const LabeledSpace s({{1, "", 2}, {2, "", 3}, {3, "", 2}});
    const std::vector<std::size_t> dims{2, 3, 2};
    const StateVector psi = random::state(12, rng);
    const Operator rho = projector(psi);
    const std::vector<std::pair<std::set<std::string>, std::vector<bool>>> cuts{
        {{"t1"}, {true, false, false}}, {{"t2"}, {false, true, false}}, {{"t3"}, {false, false, true}}, {{"t1", "t3"}, {true, false, true}}};
    for (const auto& [labels, mask] : cuts) {
        const Operator got = partial_trace(rho, s, labels);
        EXPECT_LE(max_abs_diff(got, oracle::partial_trace(rho, dims, mask)), 1e-14);
        EXPECT_NEAR(trace_real(got), 1.0, 1e-12);
    }
}

TEST(PartialTrace, ProductStateReducesToFactor) {
    auto rng = rng_for(3);
    const StateVector a = random::state(2, rng), b = random::state(3, rng);
    const LabeledSpace s({{1, "", 2}, {2, "", 3}});
    EXPECT_LE(max_abs_diff(partial_trace(projector(tensor_product(a, b)), s, {"t2"}), projector(a)), 1e-14);
    EXPECT_LE(max_abs_diff(partial_trace(projector(tensor_product(a, b)), s, {"t1"}), projector(b)), 1e-14);
}

TEST(PartialTrace, EmptyTraceIsIdentityMap) {
    auto rng = rng_for(5);
    const Operator rho = projector(random::state(4, rng));
    EXPECT_LE(max_abs_diff(partial_trace(rho, LabeledSpace::slots(2, 2), {}), rho), 0.0);
}

TEST(PartialTrace, Errors) {
    const Operator rho = identity(4) / 4.0;
    EXPECT_THROW(partial_trace(rho, LabeledSpace::slots(2, 2), {"t9"}), ValidationError);
    EXPECT_THROW(partial_trace(rho, LabeledSpace::slots(3, 2), {"t1"}), ValidationError);
}

TEST(ApplyLocal, MatchesEmbeddedOperator) {
    auto rng = rng_for(9);
    const LabeledSpace s({{1, "", 2}, {2, "", 3}, {3, "", 2}});
    const StateVector psi = random::state(12, rng);
    const Operator u = random::unitary(3, rng);
    const Operator full = oracle::kron(oracle::kron(oracle::eye(2), u), oracle::eye(2));
    EXPECT_LE((apply_on_slot(psi, s, 2, u) - full * psi).norm(), 1e-13);
    const Operator v = random::unitary(6, rng);
    EXPECT_LE((apply_local(psi, s, 1, 2, v) - oracle::kron(oracle::eye(2), v) * psi).norm(), 1e-13);
    EXPECT_THROW(apply_on_slot(psi, s, 2, identity(2)), ValidationError);
    EXPECT_THROW(apply_on_slot(psi, s, 4, identity(2)), ValidationError);
}

TEST(Unitarity, Checks) {
    EXPECT_TRUE(check_unitary(gates::hadamard(), 1e-12));
    EXPECT_TRUE(check_unitary(gates::cnot(), 0));
    EXPECT_FALSE(check_unitary(make_operator({{1, 0}, {0, 2}})));
    auto rng = rng_for(1);
    for (std::size_t d = 1; d <= 6; ++d) EXPECT_TRUE(check_unitary(random::unitary(d, rng), 1e-12));
    EXPECT_TRUE(check_unitary(random::monomial_unitary(5, rng), 1e-14));
}

TEST(HermitianEig, ReconstructsAndSorts) {
    auto rng = rng_for(21);
    const Operator h = random::hermitian(4, rng);
    const auto es = hermitian_eig(h);
    for (std::size_t k = 1; k < es.values.size(); ++k) EXPECT_LE(es.values[k - 1], es.values[k]);
    Operator rebuilt = Operator::Zero(4, 4);
    for (Eigen::Index k = 0; k < 4; ++k) rebuilt += es.values[static_cast<std::size_t>(k)] * projector(es.vectors[static_cast<std::size_t>(k)]);
    EXPECT_LE(max_abs_diff(rebuilt, h), 1e-12);
    EXPECT_THROW(hermitian_eig(make_operator({{0, 1}, {0, 0}})), ValidationError);
}

TEST(Gates, RyAndPaulis) {
    EXPECT_LE(max_abs_diff(gates::ry(M_PI), make_operator({{0, -1}, {1, 0}})), 1e-15);
    EXPECT_LE(max_abs_diff(gates::pauli_x() * gates::pauli_y(), Complex(0, 1) * gates::pauli_z()), 0.0);
    EXPECT_LE(max_abs_diff(gates::hadamard() * gates::pauli_z() * gates::hadamard(), gates::pauli_x()), 1e-15);
}

TEST(Finite, RejectsNaN) {
    EXPECT_TRUE(all_finite(identity(2)));
    Operator m = identity(2);
    m(0, 1) = Complex(std::nan(""), 0);
    EXPECT_FALSE(all_finite(m));
}
