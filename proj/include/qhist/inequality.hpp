// inequality.hpp
// Leggett-Garg and temporal CHSH evaluations on history schedules.
//
// LG: K = C12 + C23 - C13 with genuinely two-time correlators (the skipped
// time is left unmeasured and its unitaries composed). Under the classical
// marginal rules -3 <= K <= 1. The three-time chain operators give the
// interference terms
//   I(*,q2,q3) = 2 Re Tr[C(+1,q2,q3) C(-1,q2,q3)^dag]
//   I(q1,*,q3) = 2 Re Tr[C(q1,+1,q3) C(q1,-1,q3)^dag]
// and K = 1 - sum_q [4p(q,-q,q) - I(*,q,q) + I(*,q,-q) + I(q,*,q) - I(q,*,-q)].
//
// Temporal CHSH: S = E(A1,A2) + E(A1,B2) + E(B1,A2) - E(B1,B2), bounded by 2
// for sequential measurements with predetermined outcomes.

#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "qhist/history.hpp"
#include "qhist/observables.hpp"

namespace qhist {

namespace detail {
inline void require_dichotomic(const ObservableSpec& o, double tolerance = tol::arithmetic) {
    o.validate();
    for (const double v : o.eigenvalues)
        if (std::abs(v - 1.0) > tolerance && std::abs(v + 1.0) > tolerance)
            throw ValidationError("observable '" + o.name + "' is not dichotomic: eigenvalue " + std::to_string(v) + " is not +1 or -1");
}
inline int sign_of(double v) { return v > 0 ? 1 : -1; }
// (+,+), (+,-), (-,+), (-,-)
inline std::size_t sign_pair_index(int a, int b) { return (a > 0 ? 0 : 2) + (b > 0 ? 0 : 1); }
}  // namespace detail

// ---------------------------------------------------------------------------
// Leggett-Garg
// ---------------------------------------------------------------------------

struct DichotomicSchedule {
    StateVector initial_state;
    Operator u01;  // t0 -> t1
    Operator u12;
    Operator u23;
    ObservableSpec q;

    void validate() const {
        detail::require_dichotomic(q);
        three_time_spec().validate();
    }

    // Q measured at t1, t2, t3; outcome 0 is q=+1, outcome 1 is q=-1.
    HistorySpec three_time_spec() const {
        const auto d = static_cast<Eigen::Index>(q.dim());
        ProjectorSet coarse{q.name, {Operator::Zero(d, d), Operator::Zero(d, d)}, {1.0, -1.0}};
        for (std::size_t k = 0; k < q.outcome_count(); ++k) coarse.projectors[q.eigenvalues[k] > 0 ? 0 : 1] += q.projector(k);
        return {initial_state, {u01, u12, u23}, {coarse, coarse, coarse}};
    }
};

// psi = |0>, no evolution before t1, rotation by theta about y between
// consecutive slots, Z measured: C12 = C23 = cos(theta), C13 = cos(2 theta).
inline DichotomicSchedule precession_schedule(double theta) {
    return {basis_state(2, 0), identity(2), gates::ry(theta), gates::ry(theta), pauli_z_observable()};
}

inline std::size_t sign_outcome(int q) { return q > 0 ? 0 : 1; }

inline double two_time_correlator(const DichotomicSchedule& sched, std::size_t i, std::size_t j) {
    if (i >= j || i < 1 || j > 3) throw ValidationError("two_time_correlator: need 1 <= i < j <= 3, got i=" + std::to_string(i) + " j=" + std::to_string(j));
    const HistorySpec two = reduce_schedule(sched.three_time_spec(), {i, j});
    double c = 0;
    for (int qi : {1, -1})
        for (int qj : {1, -1}) c += qi * qj * sequence_probability(two, {sign_outcome(qi), sign_outcome(qj)});
    return c;
}

// 2 Re Tr[C_alpha C_beta^dag] on the three-time schedule.
inline double interference_term(const HistorySpec& three, const OutcomeSequence& alpha, const OutcomeSequence& beta) {
    return 2.0 * decoherence_functional(three, alpha, beta).real();
}

// Summed slot given as 0 (q1), 1 (q2) or 2 (q3); qa, qb are the two fixed
// signs in slot order.
inline double lg_interference(const HistorySpec& three, std::size_t summed, int qa, int qb) {
    OutcomeSequence plus(3), minus(3);
    std::size_t fixed = 0;
    const int signs[2] = {qa, qb};
    for (std::size_t s = 0; s < 3; ++s) {
        if (s == summed) {
            plus[s] = sign_outcome(1);
            minus[s] = sign_outcome(-1);
        } else {
            plus[s] = minus[s] = sign_outcome(signs[fixed++]);
        }
    }
    return interference_term(three, plus, minus);
}

struct LGReport {
    double c12 = 0, c13 = 0, c23 = 0;
    double k = 0;
    // Indexed (+,+), (+,-), (-,+), (-,-) over the two fixed signs.
    std::array<double, 4> interference_first{};   // I(*, q2, q3)
    std::array<double, 4> interference_middle{};  // I(q1, *, q3)
    double max_interference = 0;
    bool consistent = false;
    bool violated = false;
};

inline LGReport lg_evaluate(const DichotomicSchedule& sched, double tolerance = tol::structural) {
    sched.validate();
    const HistorySpec three = sched.three_time_spec();
    LGReport r;
    r.c12 = two_time_correlator(sched, 1, 2);
    r.c13 = two_time_correlator(sched, 1, 3);
    r.c23 = two_time_correlator(sched, 2, 3);
    r.k = r.c12 + r.c23 - r.c13;
    for (int a : {1, -1})
        for (int b : {1, -1}) {
            const auto idx = detail::sign_pair_index(a, b);
            r.interference_first[idx] = lg_interference(three, 0, a, b);
            r.interference_middle[idx] = lg_interference(three, 1, a, b);
            r.max_interference = std::max({r.max_interference, std::abs(r.interference_first[idx]), std::abs(r.interference_middle[idx])});
        }
    r.consistent = r.max_interference <= tolerance;
    r.violated = r.k > 1 + tolerance || r.k < -3 - tolerance;
    return r;
}

struct LGDecomposition {
    double k_direct = 0;
    double k_decomposed = 0;
    double residual = 0;
    double max_last_interference = 0;  // max |I(q1,q2,*)|, vanishes identically
};

inline LGDecomposition lg_interference_decomposition(const DichotomicSchedule& sched) {
    sched.validate();
    const HistorySpec three = sched.three_time_spec();
    LGDecomposition d;
    d.k_direct = two_time_correlator(sched, 1, 2) + two_time_correlator(sched, 2, 3) - two_time_correlator(sched, 1, 3);
    double bracket = 0;
    for (int q : {1, -1}) {
        const double p = sequence_probability(three, {sign_outcome(q), sign_outcome(-q), sign_outcome(q)});
        bracket += 4 * p - lg_interference(three, 0, q, q) + lg_interference(three, 0, q, -q) + lg_interference(three, 1, q, q) -
                   lg_interference(three, 1, q, -q);
    }
    d.k_decomposed = 1 - bracket;
    d.residual = std::abs(d.k_direct - d.k_decomposed);
    for (int a : {1, -1})
        for (int b : {1, -1}) d.max_last_interference = std::max(d.max_last_interference, std::abs(lg_interference(three, 2, a, b)));
    return d;
}

// ---------------------------------------------------------------------------
// Temporal CHSH
// ---------------------------------------------------------------------------

enum class ChshMode { FixedBasis, PerPair };

inline std::string to_string(ChshMode m) { return m == ChshMode::FixedBasis ? "fixed-basis" : "per-pair"; }

struct ChshSetup {
    StateVector initial_state;
    Operator u1;  // U(t1, t0)
    Operator u2;  // U(t2, t1)
    ObservableSpec a1, b1, a2, b2;
    // Schedule defining the single history vector in fixed-basis mode;
    // computational basis at both slots when empty.
    std::optional<std::array<ObservableSpec, 2>> reference;
};

struct JointTable {
    std::string first, second;
    std::array<double, 4> p{};  // (+,+), (+,-), (-,+), (-,-)

    double sum() const { return p[0] + p[1] + p[2] + p[3]; }
    double average() const { return p[0] - p[1] - p[2] + p[3]; }
};

struct CHSHReport {
    ChshMode mode = ChshMode::FixedBasis;
    // E(A1,A2), E(A1,B2), E(B1,A2), E(B1,B2)
    std::array<double, 4> e{};
    double s = 0;
    std::vector<JointTable> tables;  // per-pair mode only, same order as e
    bool violated = false;
};

inline double chsh_combination(const std::array<double, 4>& e) { return e[0] + e[1] + e[2] - e[3]; }

inline CHSHReport chsh_evaluate(const ChshSetup& setup, ChshMode mode, double tolerance = tol::structural) {
    for (const auto* o : {&setup.a1, &setup.b1, &setup.a2, &setup.b2}) detail::require_dichotomic(*o);
    const std::size_t d = static_cast<std::size_t>(setup.initial_state.size());
    const std::array<std::pair<const ObservableSpec*, const ObservableSpec*>, 4> pairs{
        {{&setup.a1, &setup.a2}, {&setup.a1, &setup.b2}, {&setup.b1, &setup.a2}, {&setup.b1, &setup.b2}}};

    CHSHReport r;
    r.mode = mode;
    if (mode == ChshMode::FixedBasis) {
        std::array<ObservableSpec, 2> ref;
        if (setup.reference) ref = *setup.reference;
        else ref = {d == 2 ? pauli_z_observable() : computational_observable(d), d == 2 ? pauli_z_observable() : computational_observable(d)};
        HistorySpec spec{setup.initial_state, {setup.u1, setup.u2}, {ref[0], ref[1]}};
        spec.validate();
        const HistoryVector hv = build_history_vector(spec);
        for (std::size_t k = 0; k < 4; ++k)
            r.e[k] = history_expectation(hv, HistoryOperator::product({pairs[k].first->as_operator(), pairs[k].second->as_operator()})).value;
    } else {
        for (std::size_t k = 0; k < 4; ++k) {
            const auto& [o1, o2] = pairs[k];
            HistorySpec spec{setup.initial_state, {setup.u1, setup.u2}, {*o1, *o2}};
            spec.validate();
            const HistoryVector hv = build_history_vector(spec);
            r.e[k] = multitime_average(hv, std::vector<std::size_t>{1, 2});
            JointTable t{o1->name, o2->name, {}};
            for_each_sequence(hv.outcome_counts(), [&](const OutcomeSequence& a) {
                t.p[detail::sign_pair_index(detail::sign_of(o1->eigenvalues[a[0]]), detail::sign_of(o2->eigenvalues[a[1]]))] += hv.probability(a);
            });
            r.tables.push_back(t);
        }
    }
    r.s = chsh_combination(r.e);
    r.violated = std::abs(r.s) > 2 + tolerance;
    return r;
}

}  // namespace qhist
