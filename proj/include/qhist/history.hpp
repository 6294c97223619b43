// history.hpp
// History engine: chain operators, history amplitudes, sequence
// probabilities, decoherence functionals, consistency of a history set and
// the history vector itself.
//
// Slots are numbered from 1 (time t_1 .. t_n) wherever a function takes a
// slot argument; outcome indices are 0-based positions in the slot's
// eigenbasis or projector list, never eigenvalues.

#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "qhist/tensor.hpp"

namespace qhist {

// ---------------------------------------------------------------------------
// Measurements
// ---------------------------------------------------------------------------

// A complete orthonormal eigenbasis with real eigenvalue labels. Outcomes are
// addressed by index, so repeated eigenvalues stay distinct outcomes.
struct ObservableSpec {
    std::string name;
    std::vector<double> eigenvalues;
    std::vector<StateVector> eigenvectors;

    std::size_t dim() const { return eigenvectors.empty() ? 0 : static_cast<std::size_t>(eigenvectors.front().size()); }
    std::size_t outcome_count() const { return eigenvectors.size(); }

    void validate(double tolerance = tol::structural) const {
        const std::string who = "observable '" + name + "'";
        if (eigenvectors.empty()) throw ValidationError(who + ": no eigenvectors");
        if (eigenvalues.size() != eigenvectors.size())
            throw ValidationError(who + ": " + std::to_string(eigenvalues.size()) + " eigenvalues for " + std::to_string(eigenvectors.size()) + " eigenvectors");
        const std::size_t d = dim();
        if (eigenvectors.size() != d) throw ValidationError(who + ": basis has " + std::to_string(eigenvectors.size()) + " vectors but dimension " + std::to_string(d));
        for (std::size_t k = 0; k < d; ++k) {
            if (static_cast<std::size_t>(eigenvectors[k].size()) != d) throw ValidationError(who + ": eigenvector " + std::to_string(k) + " has wrong dimension");
            if (!all_finite(eigenvectors[k]) || !std::isfinite(eigenvalues[k])) throw ValidationError(who + ": non-finite entry in eigenpair " + std::to_string(k));
        }
        for (std::size_t k = 0; k < d; ++k)
            for (std::size_t l = k; l < d; ++l) {
                const Complex overlap = eigenvectors[k].dot(eigenvectors[l]);
                const double expected = k == l ? 1.0 : 0.0;
                if (std::abs(overlap - expected) > tolerance)
                    throw ValidationError(who + ": eigenvectors " + std::to_string(k) + " and " + std::to_string(l) + " are not orthonormal (overlap " + std::to_string(std::abs(overlap)) + ")");
            }
    }

    Operator projector(std::size_t k) const { return qhist::projector(eigenvectors.at(k)); }

    // Columns are the eigenvectors.
    Operator basis() const {
        const auto d = static_cast<Eigen::Index>(dim());
        Operator b(d, d);
        for (Eigen::Index k = 0; k < d; ++k) b.col(k) = eigenvectors[static_cast<std::size_t>(k)];
        return b;
    }

    // sum_k lambda_k |v_k><v_k|
    Operator as_operator() const {
        Operator m = Operator::Zero(static_cast<Eigen::Index>(dim()), static_cast<Eigen::Index>(dim()));
        for (std::size_t k = 0; k < eigenvectors.size(); ++k) m += eigenvalues[k] * projector(k);
        return m;
    }

    ObservableSpec negated() const {
        ObservableSpec out = *this;
        out.name = "-" + name;
        for (auto& v : out.eigenvalues) v = -v;
        return out;
    }
};

// Observable with eigenvalue labels 0..d-1 on the computational basis.
inline ObservableSpec computational_observable(std::size_t d, std::string name = "computational") {
    ObservableSpec o{std::move(name), {}, {}};
    for (std::size_t k = 0; k < d; ++k) {
        o.eigenvalues.push_back(static_cast<double>(k));
        o.eigenvectors.push_back(basis_state(d, k));
    }
    return o;
}

inline ObservableSpec pauli_z_observable() {
    return {"Z", {1.0, -1.0}, {basis_state(2, 0), basis_state(2, 1)}};
}

// Spin observable n.sigma along a Bloch direction. Outcome 0 is +1 with
// eigenvector (cos t/2, e^{ip} sin t/2); outcome 1 is -1 with
// (-e^{-ip} sin t/2, cos t/2), where (t, p) are the polar angles of n.
inline ObservableSpec bloch_observable(std::string name, double nx, double ny, double nz) {
    const double r = std::sqrt(nx * nx + ny * ny + nz * nz);
    if (!(r > 0) || !std::isfinite(r)) throw ValidationError("bloch_observable: direction must be a finite nonzero vector");
    const double theta = std::acos(std::clamp(nz / r, -1.0, 1.0));
    const double phi = (nx == 0 && ny == 0) ? 0.0 : std::atan2(ny, nx);
    const double c = std::cos(theta / 2), s = std::sin(theta / 2);
    const Complex e = std::polar(1.0, phi);
    return {std::move(name), {1.0, -1.0}, {make_state({c, e * s}), make_state({-std::conj(e) * s, c})}};
}

inline ObservableSpec pauli_x_observable() {
    const double s = 1.0 / std::numbers::sqrt2;
    return {"X", {1.0, -1.0}, {make_state({s, s}), make_state({-s, s})}};
}

// Orthogonal projectors resolving the identity; rank > 1 allowed. `labels`
// carries one real value per projector (eigenvalue of the coarse outcome).
struct ProjectorSet {
    std::string name;
    std::vector<Operator> projectors;
    std::vector<double> labels;

    std::size_t dim() const { return projectors.empty() ? 0 : static_cast<std::size_t>(projectors.front().rows()); }
    std::size_t outcome_count() const { return projectors.size(); }

    void validate(double tolerance = tol::structural) const {
        const std::string who = "projector set '" + name + "'";
        if (projectors.empty()) throw ValidationError(who + ": empty");
        if (labels.size() != projectors.size()) throw ValidationError(who + ": label count does not match projector count");
        const auto d = static_cast<Eigen::Index>(dim());
        Operator sum = Operator::Zero(d, d);
        for (std::size_t k = 0; k < projectors.size(); ++k) {
            const auto& p = projectors[k];
            if (p.rows() != d || p.cols() != d) throw ValidationError(who + ": projector " + std::to_string(k) + " has wrong shape");
            if (!all_finite(p)) throw ValidationError(who + ": projector " + std::to_string(k) + " has non-finite entries");
            if (!is_hermitian(p, tolerance)) throw ValidationError(who + ": projector " + std::to_string(k) + " is not Hermitian");
            for (std::size_t l = 0; l < projectors.size(); ++l) {
                const Operator expected = k == l ? p : Operator::Zero(d, d);
                if (max_abs_diff(p * projectors[l], expected) > tolerance)
                    throw ValidationError(who + ": projectors " + std::to_string(k) + " and " + std::to_string(l) + " violate P_k P_l = delta_kl P_k");
            }
            sum += p;
        }
        if (max_abs_diff(sum, identity(static_cast<std::size_t>(d))) > tolerance) throw ValidationError(who + ": projectors do not sum to the identity");
    }

    static ProjectorSet from_observable(const ObservableSpec& obs) {
        ProjectorSet s{obs.name, {}, obs.eigenvalues};
        for (std::size_t k = 0; k < obs.outcome_count(); ++k) s.projectors.push_back(obs.projector(k));
        return s;
    }

    // Merges eigenvectors sharing an eigenvalue (within tolerance) into one
    // projector per distinct eigenvalue, in order of first appearance.
    static ProjectorSet by_eigenvalue(const ObservableSpec& obs, double tolerance = tol::arithmetic) {
        ProjectorSet s{obs.name, {}, {}};
        for (std::size_t k = 0; k < obs.outcome_count(); ++k) {
            const double lambda = obs.eigenvalues[k];
            auto it = std::ranges::find_if(s.labels, [&](double l) { return std::abs(l - lambda) <= tolerance; });
            if (it == s.labels.end()) {
                s.labels.push_back(lambda);
                s.projectors.push_back(obs.projector(k));
            } else {
                s.projectors[static_cast<std::size_t>(it - s.labels.begin())] += obs.projector(k);
            }
        }
        return s;
    }
};

using Measurement = std::variant<ObservableSpec, ProjectorSet>;

inline std::size_t measurement_dim(const Measurement& m) {
    return std::visit([](const auto& x) { return x.dim(); }, m);
}
inline std::size_t outcome_count(const Measurement& m) {
    return std::visit([](const auto& x) { return x.outcome_count(); }, m);
}
inline const std::string& measurement_name(const Measurement& m) {
    return std::visit([](const auto& x) -> const std::string& { return x.name; }, m);
}
inline Operator measurement_projector(const Measurement& m, std::size_t k) {
    if (const auto* o = std::get_if<ObservableSpec>(&m)) return o->projector(k);
    return std::get<ProjectorSet>(m).projectors.at(k);
}
inline double outcome_value(const Measurement& m, std::size_t k) {
    if (const auto* o = std::get_if<ObservableSpec>(&m)) return o->eigenvalues.at(k);
    return std::get<ProjectorSet>(m).labels.at(k);
}

// ---------------------------------------------------------------------------
// History specifications
// ---------------------------------------------------------------------------

using OutcomeSequence = std::vector<std::size_t>;

// Initial state at t_0, evolutions U(t_1,t_0) .. U(t_n,t_{n-1}) and one
// measurement per slot.
struct HistorySpec {
    StateVector initial_state;
    std::vector<Operator> evolutions;
    std::vector<Measurement> measurements;

    std::size_t dim() const { return static_cast<std::size_t>(initial_state.size()); }
    std::size_t slot_count() const { return measurements.size(); }

    const Measurement& measurement(std::size_t slot) const {
        check_slot(slot);
        return measurements[slot - 1];
    }
    const Operator& evolution(std::size_t slot) const {
        check_slot(slot);
        return evolutions[slot - 1];
    }

    std::vector<std::size_t> outcome_counts() const {
        std::vector<std::size_t> counts;
        for (const auto& m : measurements) counts.push_back(outcome_count(m));
        return counts;
    }

    bool rank_one() const {
        return std::ranges::all_of(measurements, [](const Measurement& m) { return std::holds_alternative<ObservableSpec>(m); });
    }

    const ObservableSpec& observable(std::size_t slot) const {
        const auto* o = std::get_if<ObservableSpec>(&measurement(slot));
        if (!o) throw ValidationError("slot t" + std::to_string(slot) + " carries a projector set; a complete rank-1 eigenbasis is required");
        return *o;
    }

    void check_slot(std::size_t slot) const {
        if (slot == 0 || slot > measurements.size())
            throw ValidationError("slot t" + std::to_string(slot) + " out of range 1.." + std::to_string(measurements.size()));
    }

    void check_sequence(const OutcomeSequence& alpha) const {
        if (alpha.size() != measurements.size())
            throw ValidationError("outcome sequence has " + std::to_string(alpha.size()) + " entries for " + std::to_string(measurements.size()) + " slots");
        for (std::size_t i = 0; i < alpha.size(); ++i)
            if (alpha[i] >= outcome_count(measurements[i]))
                throw ValidationError("outcome index " + std::to_string(alpha[i]) + " out of range at slot t" + std::to_string(i + 1));
    }

    void validate(double tolerance = tol::structural) const {
        const std::size_t d = dim();
        if (d == 0) throw ValidationError("initial state is empty");
        if (!all_finite(initial_state)) throw ValidationError("initial state has non-finite entries");
        if (std::abs(initial_state.norm() - 1.0) > tolerance)
            throw ValidationError("initial state is not normalized (norm " + std::to_string(initial_state.norm()) + ")");
        if (measurements.empty()) throw ValidationError("no measured time slots");
        if (evolutions.size() != measurements.size())
            throw ValidationError("length mismatch: " + std::to_string(evolutions.size()) + " evolutions but " + std::to_string(measurements.size()) + " measurements");
        for (std::size_t i = 0; i < evolutions.size(); ++i) {
            const auto& u = evolutions[i];
            const std::string who = "evolution " + std::to_string(i + 1) + " (U(t" + std::to_string(i + 1) + ",t" + std::to_string(i) + "))";
            if (static_cast<std::size_t>(u.rows()) != d || static_cast<std::size_t>(u.cols()) != d)
                throw ValidationError(who + " has shape " + std::to_string(u.rows()) + "x" + std::to_string(u.cols()) + ", expected " + std::to_string(d) + "x" + std::to_string(d));
            if (!all_finite(u)) throw ValidationError(who + " has non-finite entries");
            if (!check_unitary(u, tolerance)) throw ValidationError(who + " is not unitary (max |U^dag U - I| = " + std::to_string(unitarity_defect(u)) + ")");
        }
        for (std::size_t i = 0; i < measurements.size(); ++i) {
            if (measurement_dim(measurements[i]) != d)
                throw ValidationError("measurement at slot t" + std::to_string(i + 1) + " has dimension " + std::to_string(measurement_dim(measurements[i])) + ", expected " + std::to_string(d));
            std::visit([&](const auto& m) { m.validate(tolerance); }, measurements[i]);
        }
    }
};

// Copy of `spec` with the measurement at `slot` replaced.
inline HistorySpec with_measurement(HistorySpec spec, std::size_t slot, Measurement m) {
    spec.check_slot(slot);
    spec.measurements[slot - 1] = std::move(m);
    return spec;
}

// ---------------------------------------------------------------------------
// Outcome enumeration
// ---------------------------------------------------------------------------

inline constexpr std::uint64_t default_enumeration_cap = std::uint64_t{1} << 20;

// Number of outcome sequences; throws CapExceeded beyond `cap`.
inline std::uint64_t sequence_count(const std::vector<std::size_t>& counts, std::uint64_t cap = default_enumeration_cap) {
    std::uint64_t total = 1;
    for (const auto c : counts) {
        if (c == 0) return 0;
        if (total > cap / c) throw CapExceeded("outcome enumeration exceeds cap of " + std::to_string(cap) + " sequences");
        total *= c;
    }
    if (total > cap) throw CapExceeded("outcome enumeration exceeds cap of " + std::to_string(cap) + " sequences");
    return total;
}

// Lexicographic (slot 1 outermost) position of a sequence.
inline std::uint64_t sequence_index(const OutcomeSequence& alpha, const std::vector<std::size_t>& counts) {
    std::uint64_t idx = 0;
    for (std::size_t i = 0; i < alpha.size(); ++i) idx = idx * counts[i] + alpha[i];
    return idx;
}

inline OutcomeSequence sequence_at(std::uint64_t index, const std::vector<std::size_t>& counts) {
    OutcomeSequence alpha(counts.size());
    for (std::size_t i = counts.size(); i-- > 0;) {
        alpha[i] = static_cast<std::size_t>(index % counts[i]);
        index /= counts[i];
    }
    return alpha;
}

// Visits every sequence in lexicographic order.
inline void for_each_sequence(const std::vector<std::size_t>& counts, const std::function<void(const OutcomeSequence&)>& fn,
                              std::uint64_t cap = default_enumeration_cap) {
    const std::uint64_t total = sequence_count(counts, cap);
    OutcomeSequence alpha(counts.size(), 0);
    for (std::uint64_t n = 0; n < total; ++n) {
        fn(alpha);
        for (std::size_t i = counts.size(); i-- > 0;) {
            if (++alpha[i] < counts[i]) break;
            alpha[i] = 0;
        }
    }
}

inline std::string format_sequence(const OutcomeSequence& alpha) {
    std::string s = "(";
    for (std::size_t i = 0; i < alpha.size(); ++i) s += (i ? "," : "") + std::to_string(alpha[i]);
    return s + ")";
}

// ---------------------------------------------------------------------------
// Chain operators, amplitudes, probabilities
// ---------------------------------------------------------------------------

// P_{a_n} U_n ... P_{a_1} U_1 P_psi
inline Operator chain_operator(const HistorySpec& spec, const OutcomeSequence& alpha) {
    spec.check_sequence(alpha);
    Operator c = projector(spec.initial_state);
    for (std::size_t i = 0; i < alpha.size(); ++i) c = measurement_projector(spec.measurements[i], alpha[i]) * (spec.evolutions[i] * c);
    return c;
}

// <a_n| U_n P_{a_{n-1}} ... P_{a_1} U_1 |psi>
inline Complex amplitude(const HistorySpec& spec, const OutcomeSequence& alpha) {
    if (!spec.rank_one()) throw ValidationError("amplitude: every slot needs a complete rank-1 eigenbasis, got a projector set");
    spec.check_sequence(alpha);
    StateVector v = spec.initial_state;
    const std::size_t n = alpha.size();
    for (std::size_t i = 0; i + 1 < n; ++i) {
        v = spec.evolutions[i] * v;
        v = spec.observable(i + 1).projector(alpha[i]) * v;
    }
    v = spec.evolutions[n - 1] * v;
    return spec.observable(n).eigenvectors[alpha[n - 1]].dot(v);
}

// |A|^2 for rank-1 specs, Tr(C C^dag) otherwise.
inline double sequence_probability(const HistorySpec& spec, const OutcomeSequence& alpha) {
    if (spec.rank_one()) return std::norm(amplitude(spec, alpha));
    return chain_operator(spec, alpha).squaredNorm();
}

// Tr(C_alpha C_beta^dag)
inline Complex decoherence_functional(const HistorySpec& spec, const OutcomeSequence& alpha, const OutcomeSequence& beta) {
    const Operator ca = chain_operator(spec, alpha);
    const Operator cb = chain_operator(spec, beta);
    return (ca * cb.adjoint()).trace();
}

// Probabilities of all sequences, lexicographic.
inline std::vector<double> all_probabilities(const HistorySpec& spec, std::uint64_t cap = default_enumeration_cap) {
    std::vector<double> out;
    for_each_sequence(spec.outcome_counts(), [&](const OutcomeSequence& a) { out.push_back(sequence_probability(spec, a)); }, cap);
    return out;
}

struct ConsistencyReport {
    bool consistent = true;
    double max_interference = 0.0;  // max over alpha != beta of |2 Re D|
    std::optional<std::pair<OutcomeSequence, OutcomeSequence>> witness;
};

// Decoherence condition: |2 Re D(alpha, beta)| <= tol for all alpha != beta.
// Visits all ordered pairs, so (number of sequences)^2 must fit in `cap`.
inline ConsistencyReport is_consistent_set(const HistorySpec& spec, double tolerance = tol::structural, std::uint64_t cap = default_enumeration_cap) {
    const auto counts = spec.outcome_counts();
    const std::uint64_t total = sequence_count(counts, cap);
    if (total > 0 && total > cap / total) throw CapExceeded("consistency check needs " + std::to_string(total) + "^2 pairs, above cap " + std::to_string(cap));
    std::vector<OutcomeSequence> seqs;
    std::vector<Operator> chains;
    for_each_sequence(counts, [&](const OutcomeSequence& a) {
        seqs.push_back(a);
        chains.push_back(chain_operator(spec, a));
    }, cap);

    ConsistencyReport report;
    for (std::size_t a = 0; a < chains.size(); ++a)
        for (std::size_t b = a + 1; b < chains.size(); ++b) {
            const double interference = std::abs(2.0 * (chains[a] * chains[b].adjoint()).trace().real());
            if (interference > report.max_interference) report.max_interference = interference;
            if (interference > tolerance && report.consistent) {
                report.consistent = false;
                report.witness = {seqs[a], seqs[b]};
            }
        }
    return report;
}

// ---------------------------------------------------------------------------
// History vectors
// ---------------------------------------------------------------------------

struct HistoryEntry {
    OutcomeSequence outcomes;
    Complex amplitude;
};

inline constexpr double default_prune = 1e-12;

// Amplitudes A(psi, alpha) over every outcome sequence of a rank-1 schedule,
// together with the eigenbasis of each slot. Dense lexicographic storage;
// `content()` gives the sparse view of nonvanishing histories.
class HistoryVector {
public:
    HistoryVector(std::vector<ObservableSpec> slots, std::vector<Complex> amplitudes, double tolerance = tol::structural)
        : slots_(std::move(slots)), amplitudes_(std::move(amplitudes)) {
        if (slots_.empty()) throw ValidationError("history vector: no slots");
        for (const auto& s : slots_) s.validate();
        const auto total = sequence_count(outcome_counts(), std::numeric_limits<std::uint64_t>::max());
        if (amplitudes_.size() != total)
            throw ValidationError("history vector: " + std::to_string(amplitudes_.size()) + " amplitudes for " + std::to_string(total) + " sequences");
        if (std::abs(norm() - 1.0) > tolerance) throw ValidationError("history vector: not normalized (norm " + std::to_string(norm()) + ")");
    }

    std::size_t slot_count() const { return slots_.size(); }
    const ObservableSpec& observable(std::size_t slot) const {
        if (slot == 0 || slot > slots_.size()) throw ValidationError("history vector: slot t" + std::to_string(slot) + " out of range");
        return slots_[slot - 1];
    }
    const std::vector<ObservableSpec>& observables() const { return slots_; }

    std::vector<std::size_t> outcome_counts() const {
        std::vector<std::size_t> counts;
        for (const auto& s : slots_) counts.push_back(s.outcome_count());
        return counts;
    }

    const std::vector<Complex>& amplitudes() const { return amplitudes_; }

    Complex amplitude(const OutcomeSequence& alpha) const {
        const auto counts = outcome_counts();
        if (alpha.size() != counts.size()) throw ValidationError("history vector: sequence length mismatch");
        for (std::size_t i = 0; i < alpha.size(); ++i)
            if (alpha[i] >= counts[i]) throw ValidationError("history vector: outcome index out of range at slot t" + std::to_string(i + 1));
        return amplitudes_[sequence_index(alpha, counts)];
    }

    double probability(const OutcomeSequence& alpha) const { return std::norm(amplitude(alpha)); }

    double norm() const {
        double s = 0;
        for (const auto& a : amplitudes_) s += std::norm(a);
        return std::sqrt(s);
    }

    // Histories with |A| > prune, lexicographic.
    std::vector<HistoryEntry> content(double prune = default_prune) const {
        std::vector<HistoryEntry> out;
        const auto counts = outcome_counts();
        for (std::uint64_t i = 0; i < amplitudes_.size(); ++i)
            if (std::abs(amplitudes_[i]) > prune) out.push_back({sequence_at(i, counts), amplitudes_[i]});
        return out;
    }

    LabeledSpace space() const {
        std::vector<Axis> axes;
        for (std::size_t i = 0; i < slots_.size(); ++i) axes.push_back({i + 1, "", slots_[i].dim()});
        return LabeledSpace(std::move(axes));
    }

    // sum_alpha A(alpha) |a_1> (x) ... (x) |a_n> in the computational basis.
    StateVector embed() const {
        StateVector coeffs(static_cast<Eigen::Index>(amplitudes_.size()));
        for (std::size_t i = 0; i < amplitudes_.size(); ++i) coeffs(static_cast<Eigen::Index>(i)) = amplitudes_[i];
        // Change basis slot by slot: coefficient index k at slot i -> eigenvector k.
        const LabeledSpace sp = space();
        StateVector out = coeffs;
        for (std::size_t i = 0; i < slots_.size(); ++i) out = apply_on_slot(out, sp, i + 1, slots_[i].basis());
        return out;
    }

private:
    std::vector<ObservableSpec> slots_;
    std::vector<Complex> amplitudes_;
};

// Enumerates amplitudes by branching: the post-measurement branch state is
// propagated once per prefix instead of re-multiplying the whole chain.
inline HistoryVector build_history_vector(const HistorySpec& spec, std::uint64_t cap = default_enumeration_cap) {
    if (!spec.rank_one()) throw ValidationError("build_history_vector: every slot needs a complete rank-1 eigenbasis");
    spec.validate();
    const auto counts = spec.outcome_counts();
    const std::uint64_t total = sequence_count(counts, cap);
    std::vector<Complex> amps(total);
    const std::size_t n = spec.slot_count();

    // branch: state just before the measurement at slot `level` (0-based).
    std::function<void(std::size_t, const StateVector&, std::uint64_t)> descend = [&](std::size_t level, const StateVector& branch, std::uint64_t prefix) {
        const auto& obs = spec.observable(level + 1);
        for (std::size_t k = 0; k < obs.outcome_count(); ++k) {
            const Complex a = obs.eigenvectors[k].dot(branch);
            const std::uint64_t idx = prefix * counts[level] + k;
            if (level + 1 == n) {
                amps[idx] = a;
            } else {
                const StateVector next = spec.evolutions[level + 1] * (a * obs.eigenvectors[k]);
                descend(level + 1, next, idx);
            }
        }
    };
    descend(0, spec.evolutions[0] * spec.initial_state, 0);

    std::vector<ObservableSpec> slots;
    for (std::size_t i = 1; i <= n; ++i) slots.push_back(spec.observable(i));
    return HistoryVector(std::move(slots), std::move(amps));
}

// ---------------------------------------------------------------------------
// Schedules with unmeasured slots
// ---------------------------------------------------------------------------

// Keeps the listed slots (1-based, ascending). Unitaries across dropped slots
// are composed; dropped slots are unmeasured. Trailing dropped slots vanish.
inline HistorySpec reduce_schedule(const HistorySpec& spec, const std::vector<std::size_t>& keep) {
    if (keep.empty()) throw ValidationError("reduce_schedule: keep must be nonempty");
    for (std::size_t k = 0; k < keep.size(); ++k) {
        spec.check_slot(keep[k]);
        if (k > 0 && keep[k] <= keep[k - 1]) throw ValidationError("reduce_schedule: keep must be strictly ascending");
    }
    HistorySpec out;
    out.initial_state = spec.initial_state;
    std::size_t previous = 0;
    for (const auto slot : keep) {
        Operator u = identity(spec.dim());
        for (std::size_t s = previous + 1; s <= slot; ++s) u = spec.evolution(s) * u;
        out.evolutions.push_back(std::move(u));
        out.measurements.push_back(spec.measurement(slot));
        previous = slot;
    }
    return out;
}

inline std::vector<std::size_t> all_slots_except(std::size_t n, std::size_t dropped) {
    std::vector<std::size_t> keep;
    for (std::size_t s = 1; s <= n; ++s)
        if (s != dropped) keep.push_back(s);
    return keep;
}

// ---------------------------------------------------------------------------
// Sum rules
// ---------------------------------------------------------------------------

struct MarginalReport {
    double total_probability = 0.0;
    // Per slot: |sum_{a_i} A(..a_i..) - A(slot i unmeasured)|, maximized over
    // the remaining outcomes. The last slot is checked in vector form,
    // sum_{a_n} A(a)|a_n> = A(a_1..a_{n-1}) U_n |a_{n-1}>.
    std::vector<double> amplitude_residuals;
    double max_amplitude_residual = 0.0;
    // The last slot checked literally as a scalar sum; generally nonzero.
    double last_slot_scalar_amplitude_residual = 0.0;
    // |sum_{a_n} p(a) - p(a_1..a_{n-1})|, maximized.
    double last_slot_probability_residual = 0.0;
    // Per slot i < n: |sum_{a_i} p(a) - p(slot i unmeasured)|. Nonzero values
    // are expected for inconsistent sets; diagnostics only.
    std::vector<double> intermediate_probability_residuals;
};

inline MarginalReport marginal_checks(const HistorySpec& spec, std::uint64_t cap = default_enumeration_cap) {
    if (!spec.rank_one()) throw ValidationError("marginal_checks: every slot needs a complete rank-1 eigenbasis");
    const std::size_t n = spec.slot_count();
    const auto counts = spec.outcome_counts();
    const HistoryVector hv = build_history_vector(spec, cap);
    MarginalReport report;
    for (const auto& a : hv.amplitudes()) report.total_probability += std::norm(a);

    report.amplitude_residuals.assign(n, 0.0);
    report.intermediate_probability_residuals.assign(n > 0 ? n - 1 : 0, 0.0);

    // Intermediate slots: compare against the schedule without slot i.
    for (std::size_t slot = 1; slot < n; ++slot) {
        const HistorySpec reduced = reduce_schedule(spec, all_slots_except(n, slot));
        auto reduced_counts = counts;
        reduced_counts.erase(reduced_counts.begin() + static_cast<std::ptrdiff_t>(slot - 1));
        double amp_res = 0, prob_res = 0;
        for_each_sequence(reduced_counts, [&](const OutcomeSequence& rest) {
            Complex amp_sum = 0;
            double prob_sum = 0;
            OutcomeSequence full = rest;
            full.insert(full.begin() + static_cast<std::ptrdiff_t>(slot - 1), 0);
            for (std::size_t k = 0; k < counts[slot - 1]; ++k) {
                full[slot - 1] = k;
                amp_sum += hv.amplitude(full);
                prob_sum += hv.probability(full);
            }
            const Complex target = amplitude(reduced, rest);
            amp_res = std::max(amp_res, std::abs(amp_sum - target));
            prob_res = std::max(prob_res, std::abs(prob_sum - std::norm(target)));
        }, cap);
        report.amplitude_residuals[slot - 1] = amp_res;
        report.intermediate_probability_residuals[slot - 1] = prob_res;
    }

    // Last slot.
    {
        const auto& last_obs = spec.observable(n);
        const Operator& last_u = spec.evolution(n);
        std::vector<std::size_t> prefix_counts(counts.begin(), counts.end() - 1);
        std::optional<HistorySpec> truncated;
        if (n > 1) {
            std::vector<std::size_t> keep;
            for (std::size_t s = 1; s < n; ++s) keep.push_back(s);
            truncated = reduce_schedule(spec, keep);
        }
        double vec_res = 0, scalar_res = 0, prob_res = 0;
        auto check_prefix = [&](const OutcomeSequence& prefix) {
            StateVector summed = StateVector::Zero(static_cast<Eigen::Index>(spec.dim()));
            Complex scalar_sum = 0;
            double prob_sum = 0;
            OutcomeSequence full = prefix;
            full.push_back(0);
            for (std::size_t k = 0; k < counts[n - 1]; ++k) {
                full.back() = k;
                const Complex a = hv.amplitude(full);
                summed += a * last_obs.eigenvectors[k];
                scalar_sum += a;
                prob_sum += std::norm(a);
            }
            StateVector expected;
            Complex prefix_amp = 1.0;
            double prefix_prob = 1.0;
            if (truncated) {
                prefix_amp = amplitude(*truncated, prefix);
                prefix_prob = std::norm(prefix_amp);
                expected = prefix_amp * (last_u * spec.observable(n - 1).eigenvectors[prefix.back()]);
            } else {
                expected = last_u * spec.initial_state;
            }
            vec_res = std::max(vec_res, max_abs_diff(summed, expected));
            scalar_res = std::max(scalar_res, std::abs(scalar_sum - prefix_amp));
            prob_res = std::max(prob_res, std::abs(prob_sum - prefix_prob));
        };
        if (n > 1) for_each_sequence(prefix_counts, check_prefix, cap);
        else check_prefix({});
        report.amplitude_residuals[n - 1] = vec_res;
        report.last_slot_scalar_amplitude_residual = scalar_res;
        report.last_slot_probability_residual = prob_res;
    }

    for (const auto r : report.amplitude_residuals) report.max_amplitude_residual = std::max(report.max_amplitude_residual, r);
    return report;
}

}  // namespace qhist
