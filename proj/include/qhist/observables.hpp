// observables.hpp
// Observables on history space: multitime projectors and their Born
// probabilities, multitime averages, general history operators, single-slot
// observables outside the measured basis, and the two-time intermediate
// state obtained by pre- and post-selection.

#pragma once

#include <map>
#include <random>
#include <string>
#include <vector>

#include "qhist/history.hpp"
#include "qhist/random.hpp"

namespace qhist {

// Rank-1 projector |ket><ket| placed at `slot`.
struct Placement {
    std::size_t slot = 1;
    StateVector ket;
};

// Product of placed rank-1 projectors, identity on slots without placement.
struct MultitimeProjector {
    std::vector<Placement> placements;

    void validate(const LabeledSpace& space, double tolerance = tol::arithmetic) const {
        std::vector<std::size_t> seen;
        for (const auto& p : placements) {
            if (std::ranges::find(seen, p.slot) != seen.end()) throw ValidationError("multitime projector: slot t" + std::to_string(p.slot) + " placed twice");
            seen.push_back(p.slot);
            const std::size_t d = space.slot_dim(p.slot);
            if (static_cast<std::size_t>(p.ket.size()) != d)
                throw ValidationError("multitime projector: ket at slot t" + std::to_string(p.slot) + " has dimension " + std::to_string(p.ket.size()) + ", expected " + std::to_string(d));
            if (std::abs(p.ket.norm() - 1.0) > tolerance) throw ValidationError("multitime projector: ket at slot t" + std::to_string(p.slot) + " is not normalized");
        }
    }

    // Fixes the outcomes of hv's own observables at the listed slots.
    static MultitimeProjector from_outcomes(const HistoryVector& hv, const std::vector<std::pair<std::size_t, std::size_t>>& slot_outcomes) {
        MultitimeProjector proj;
        for (const auto& [slot, k] : slot_outcomes) proj.placements.push_back({slot, hv.observable(slot).eigenvectors.at(k)});
        return proj;
    }
};

// ||P Psi||^2 on a dense state.
inline double born_probability(const StateVector& psi, const LabeledSpace& space, const MultitimeProjector& proj) {
    proj.validate(space);
    StateVector v = psi;
    for (const auto& p : proj.placements) v = apply_on_slot(v, space, p.slot, projector(p.ket));
    return v.squaredNorm();
}

inline double multitime_probability(const HistoryVector& hv, const MultitimeProjector& proj) {
    return born_probability(hv.embed(), hv.space(), proj);
}

// sum_alpha p(alpha) * prod_{slot in slots} eigenvalue(alpha_slot), using
// hv's own observables.
inline double multitime_average(const HistoryVector& hv, const std::vector<std::size_t>& slots) {
    for (const auto s : slots) hv.observable(s);
    const auto counts = hv.outcome_counts();
    double avg = 0;
    for (std::uint64_t i = 0; i < hv.amplitudes().size(); ++i) {
        const double p = std::norm(hv.amplitudes()[i]);
        if (p == 0) continue;
        const auto alpha = sequence_at(i, counts);
        double product = 1;
        for (const auto s : slots) product *= hv.observable(s).eigenvalues[alpha[s - 1]];
        avg += p * product;
    }
    return avg;
}

struct SlotObservable {
    std::size_t slot = 1;
    ObservableSpec observable;
};

// As above, but the caller names the observable placed at each slot; it must
// be the slot's own measured observable (same eigenpairs up to phases).
inline double multitime_average(const HistoryVector& hv, const std::vector<SlotObservable>& placed, double tolerance = tol::structural) {
    std::vector<std::size_t> slots;
    for (const auto& [slot, obs] : placed) {
        const auto& own = hv.observable(slot);
        bool same = obs.outcome_count() == own.outcome_count() && obs.dim() == own.dim();
        for (std::size_t k = 0; same && k < own.outcome_count(); ++k)
            same = std::abs(obs.eigenvalues[k] - own.eigenvalues[k]) <= tolerance &&
                   std::abs(std::abs(own.eigenvectors[k].dot(obs.eigenvectors[k])) - 1.0) <= tolerance;
        if (!same) throw ValidationError("multitime_average: observable '" + obs.name + "' at slot t" + std::to_string(slot) + " is not the slot's measured observable '" + own.name + "'");
        slots.push_back(slot);
    }
    return multitime_average(hv, slots);
}

// Sum of weighted products of local operators; unplaced slots are identity.
struct HistoryOperator {
    struct Term {
        Complex weight = 1.0;
        std::map<std::size_t, Operator> placements;
    };
    std::vector<Term> terms;

    // O_1 (.) O_2 (.) ... placed at slots 1..k.
    static HistoryOperator product(const std::vector<Operator>& ops) {
        Term t;
        for (std::size_t i = 0; i < ops.size(); ++i) t.placements.emplace(i + 1, ops[i]);
        return {{t}};
    }

    Operator dense(const LabeledSpace& space) const {
        const auto slots = space.slot_numbers();
        const auto d = static_cast<Eigen::Index>(space.dim());
        Operator out = Operator::Zero(d, d);
        for (const auto& t : terms) {
            for (const auto& [slot, op] : t.placements) {
                if (std::ranges::find(slots, slot) == slots.end()) throw ValidationError("history operator: slot t" + std::to_string(slot) + " not in space");
                if (static_cast<std::size_t>(op.rows()) != space.slot_dim(slot) || op.rows() != op.cols())
                    throw ValidationError("history operator: operator at slot t" + std::to_string(slot) + " has wrong dimension");
            }
            std::vector<Operator> factors;
            for (const auto s : slots) {
                const auto it = t.placements.find(s);
                factors.push_back(it != t.placements.end() ? it->second : identity(space.slot_dim(s)));
            }
            out += t.weight * tensor_product(factors);
        }
        return out;
    }
};

struct Expectation {
    double value = 0.0;
    double imaginary = 0.0;  // diagnostic; ~0 for Hermitian operators
};

inline Expectation expectation(const StateVector& psi, const LabeledSpace& space, const HistoryOperator& op, double tolerance = tol::structural) {
    const Operator m = op.dense(space);
    if (!is_hermitian(m, tolerance)) throw ValidationError("history_expectation: operator is not Hermitian on the history space");
    const Complex e = psi.dot(m * psi);
    return {e.real(), e.imag()};
}

inline Expectation history_expectation(const HistoryVector& hv, const HistoryOperator& op, double tolerance = tol::structural) {
    return expectation(hv.embed(), hv.space(), op, tolerance);
}

// Probability of outcome `beta` of `b` measured at `slot`, the spec's own
// observables having been measured at the earlier slots:
// sum_{a_1..a_{i-1}} p(a_1, .., a_{i-1}, beta).
inline double local_nonbasis_probability(const HistorySpec& spec, std::size_t slot, const ObservableSpec& b, std::size_t beta) {
    spec.check_slot(slot);
    b.validate();
    if (b.dim() != spec.dim()) throw ValidationError("local_nonbasis_probability: observable dimension does not match the schedule");
    if (beta >= b.outcome_count()) throw ValidationError("local_nonbasis_probability: outcome index out of range");
    std::vector<std::size_t> keep;
    for (std::size_t s = 1; s <= slot; ++s) keep.push_back(s);
    const HistorySpec prefix = with_measurement(reduce_schedule(spec, keep), slot, b);
    auto counts = prefix.outcome_counts();
    counts.pop_back();
    double total = 0;
    auto add = [&](const OutcomeSequence& head) {
        OutcomeSequence alpha = head;
        alpha.push_back(beta);
        total += sequence_probability(prefix, alpha);
    };
    if (counts.empty()) add({});
    else for_each_sequence(counts, add);
    return total;
}

struct IntermediateState {
    StateVector state;                   // psi_1, unit norm
    double normalization = 0.0;          // N = sum_{a_1} p(psi, a_1, beta_2)
    std::vector<double> abl_probabilities;  // |A(psi, a_1, beta_2)|^2 / N
};

inline constexpr double postselection_floor = 1e-14;

// Pre-selected on psi, post-selected on outcome beta_2 of b2 at t_2:
// psi_1 ~ sum_{a_1} A(psi, a_1, beta_2) |a_1>.
inline IntermediateState two_time_intermediate_state(const HistorySpec& spec, const ObservableSpec& b2, std::size_t beta2) {
    if (spec.slot_count() != 2) throw ValidationError("two_time_intermediate_state: schedule must have exactly two slots");
    if (beta2 >= b2.outcome_count()) throw ValidationError("two_time_intermediate_state: outcome index out of range");
    const HistorySpec post = with_measurement(spec, 2, b2);
    post.validate();
    const auto& first = post.observable(1);

    IntermediateState out;
    StateVector psi1 = StateVector::Zero(static_cast<Eigen::Index>(spec.dim()));
    std::vector<double> weights;
    for (std::size_t a = 0; a < first.outcome_count(); ++a) {
        const Complex amp = amplitude(post, {a, beta2});
        psi1 += amp * first.eigenvectors[a];
        weights.push_back(std::norm(amp));
        out.normalization += std::norm(amp);
    }
    if (out.normalization <= postselection_floor)
        throw PostselectionError("two_time_intermediate_state: postselection on outcome " + std::to_string(beta2) + " of '" + b2.name + "' has zero probability");
    out.state = psi1 / std::sqrt(out.normalization);
    for (const auto w : weights) out.abl_probabilities.push_back(w / out.normalization);
    return out;
}

// ---------------------------------------------------------------------------
// Sampling (demonstration output only; exact enumeration is authoritative)
// ---------------------------------------------------------------------------

// Draws `shots` outcome sequences from |A|^2; returns counts per sequence in
// lexicographic order.
inline std::vector<std::uint64_t> sample_histories(const HistoryVector& hv, std::uint64_t shots, std::uint64_t seed) {
    std::vector<double> weights;
    for (const auto& a : hv.amplitudes()) weights.push_back(std::norm(a));
    std::discrete_distribution<std::size_t> pick(weights.begin(), weights.end());
    random::Engine rng(seed);
    std::vector<std::uint64_t> counts(weights.size(), 0);
    for (std::uint64_t s = 0; s < shots; ++s) ++counts[pick(rng)];
    return counts;
}

}  // namespace qhist
