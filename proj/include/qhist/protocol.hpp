// protocol.hpp
// Maps an evolving system onto a static composite one. Each slot's outcome
// basis is copied into a fresh register with a clone gate V, the newest
// register is evolved to the next time, and the cycle repeats until one
// register per slot exists. The final state carries exactly the history
// amplitudes on the ordinary tensor product.

#pragma once

#include <string>
#include <vector>

#include "qhist/history.hpp"

namespace qhist {

struct CloneGate {
    std::size_t dim = 0;
    Operator matrix;                   // on C^d (x) C^d, computational representation
    std::vector<std::size_t> permutation;  // pair index i*d+j -> image pair index, in the eigenbasis
};

// Image of basis pair (i, j) under V, reference ket index 0:
//   (i, 0) -> (i, i);  (i, i) -> (i, 0) for i != 0;  otherwise unchanged.
inline std::size_t clone_image(std::size_t d, std::size_t i, std::size_t j) {
    if (j == 0) return i * d + i;
    if (i == j) return i * d;
    return i * d + j;
}

inline CloneGate clone_gate(const ObservableSpec& basis) {
    basis.validate();
    const std::size_t d = basis.dim();
    CloneGate gate{d, Operator::Zero(static_cast<Eigen::Index>(d * d), static_cast<Eigen::Index>(d * d)), {}};
    std::vector<StateVector> pairs;
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = 0; j < d; ++j) pairs.push_back(tensor_product(basis.eigenvectors[i], basis.eigenvectors[j]));
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = 0; j < d; ++j) {
            const std::size_t image = clone_image(d, i, j);
            gate.permutation.push_back(image);
            gate.matrix += pairs[image] * pairs[i * d + j].adjoint();
        }
    return gate;
}

struct ProtocolStep {
    std::string label;
    std::size_t registers = 0;
    StateVector state;
};

struct ProtocolTrace {
    std::vector<ProtocolStep> steps;
};

struct ProtocolResult {
    StateVector final_state;  // on (C^d)^{(x) n}, computational basis
    ProtocolTrace trace;
};

namespace detail {
// Applies a d^2 x d^2 gate on the last two of `registers` factors.
inline StateVector apply_on_last_two(const StateVector& psi, std::size_t d, std::size_t registers, const Operator& gate) {
    const auto space = LabeledSpace::slots(registers, d);
    return apply_local(psi, space, registers - 2, 2, gate);
}
inline StateVector apply_on_last(const StateVector& psi, std::size_t d, std::size_t registers, const Operator& u) {
    const auto space = LabeledSpace::slots(registers, d);
    return apply_local(psi, space, registers - 1, 1, u);
}
}  // namespace detail

inline ProtocolResult run_protocol(const HistorySpec& spec, std::uint64_t cap = default_enumeration_cap) {
    if (!spec.rank_one()) throw ValidationError("run_protocol: every slot needs a complete rank-1 eigenbasis");
    spec.validate();
    const std::size_t d = spec.dim();
    const std::size_t n = spec.slot_count();
    std::vector<std::size_t> dims(n, d);
    sequence_count(dims, cap);

    ProtocolResult out;
    auto record = [&](std::string label, std::size_t registers, const StateVector& s) { out.trace.steps.push_back({std::move(label), registers, s}); };

    StateVector state = spec.evolution(1) * spec.initial_state;
    std::size_t registers = 1;
    record("evolve to t1", registers, state);
    for (std::size_t slot = 1; slot < n; ++slot) {
        const auto& obs = spec.observable(slot);
        state = tensor_product(state, obs.eigenvectors.front());
        ++registers;
        record("adjoin reference ket of t" + std::to_string(slot), registers, state);
        state = detail::apply_on_last_two(state, d, registers, clone_gate(obs).matrix);
        record("clone t" + std::to_string(slot) + " basis", registers, state);
        state = detail::apply_on_last(state, d, registers, spec.evolution(slot + 1));
        record("evolve newest register to t" + std::to_string(slot + 1), registers, state);
    }
    out.final_state = state;
    return out;
}

// Outcome-basis coefficients of a protocol output: <a_1| (x) ... <a_n| final.
inline std::vector<Complex> protocol_amplitudes(const HistorySpec& spec, const StateVector& final_state) {
    const std::size_t n = spec.slot_count();
    const auto space = LabeledSpace::slots(n, spec.dim());
    StateVector coeffs = final_state;
    for (std::size_t s = 1; s <= n; ++s) coeffs = apply_on_slot(coeffs, space, s, spec.observable(s).basis().adjoint());
    return {coeffs.data(), coeffs.data() + coeffs.size()};
}

struct ProtocolEquivalence {
    bool pass = false;
    double max_residual = 0.0;
    OutcomeSequence worst;
    double max_step_norm_defect = 0.0;
};

inline ProtocolEquivalence verify_protocol_equivalence(const HistorySpec& spec, double tolerance = tol::structural, std::uint64_t cap = default_enumeration_cap) {
    const auto result = run_protocol(spec, cap);
    const HistoryVector hv = build_history_vector(spec, cap);
    const auto from_protocol = protocol_amplitudes(spec, result.final_state);
    const auto counts = hv.outcome_counts();

    ProtocolEquivalence report;
    report.worst = sequence_at(0, counts);
    for (std::uint64_t i = 0; i < from_protocol.size(); ++i) {
        const double r = std::abs(from_protocol[i] - hv.amplitudes()[i]);
        if (r > report.max_residual) {
            report.max_residual = r;
            report.worst = sequence_at(i, counts);
        }
    }
    for (const auto& step : result.trace.steps) report.max_step_norm_defect = std::max(report.max_step_norm_defect, std::abs(step.state.norm() - 1.0));
    report.pass = report.max_residual <= tolerance && report.max_step_norm_defect <= tol::structural;
    return report;
}

}  // namespace qhist
