// density.hpp
// History density matrices: pure and mixed history states, reduction over
// spatial subsystems or over time slots, von Neumann entropy and the Schmidt
// test for product versus entangled history states.

#pragma once

#include <cmath>
#include <set>
#include <string>
#include <vector>

#include "qhist/history.hpp"
#include "qhist/observables.hpp"

namespace qhist {

struct HistoryDensityMatrix {
    LabeledSpace space;
    Operator matrix;

    void validate(double tolerance = tol::structural) const {
        if (static_cast<std::size_t>(matrix.rows()) != space.dim() || matrix.rows() != matrix.cols())
            throw ValidationError("density matrix: shape does not match its labeled space");
        if (!is_hermitian(matrix, tolerance)) throw NumericalError("density matrix: not Hermitian");
        if (std::abs(trace_real(matrix) - 1.0) > tolerance) throw NumericalError("density matrix: trace is " + std::to_string(trace_real(matrix)));
        const auto spectrum = hermitian_eig(matrix, tolerance);
        if (spectrum.values.front() < -1e-9) throw NumericalError("density matrix: negative eigenvalue " + std::to_string(spectrum.values.front()));
    }

    double purity() const { return (matrix * matrix).trace().real(); }
};

struct PureHistoryState {
    LabeledSpace space;
    StateVector psi;
};

inline HistoryDensityMatrix pure_density(const PureHistoryState& state) { return {state.space, projector(state.psi)}; }

inline HistoryDensityMatrix pure_density(const HistoryVector& hv) { return {hv.space(), projector(hv.embed())}; }

struct HistoryEnsemble {
    struct Member {
        double weight = 0.0;
        HistoryVector history;
    };
    std::vector<Member> members;
};

inline HistoryDensityMatrix density_from_ensemble(const HistoryEnsemble& ens) {
    if (ens.members.empty()) throw ValidationError("density_from_ensemble: empty ensemble");
    double total = 0;
    for (const auto& m : ens.members) {
        if (!(m.weight >= 0)) throw ValidationError("density_from_ensemble: negative weight");
        total += m.weight;
    }
    if (std::abs(total - 1.0) > tol::arithmetic) throw ValidationError("density_from_ensemble: weights sum to " + std::to_string(total) + ", not 1");
    const LabeledSpace space = ens.members.front().history.space();
    const auto d = static_cast<Eigen::Index>(space.dim());
    Operator rho = Operator::Zero(d, d);
    for (const auto& m : ens.members) {
        if (!(m.history.space() == space)) throw ValidationError("density_from_ensemble: members live on different history spaces");
        rho += m.weight * projector(m.history.embed());
    }
    HistoryDensityMatrix out{space, rho};
    out.validate();
    return out;
}

// Tr(rho P_alpha) for a projector fixing every slot of rho's space.
inline double probability_from_density(const HistoryDensityMatrix& rho, const MultitimeProjector& proj) {
    proj.validate(rho.space);
    const auto slots = rho.space.slot_numbers();
    std::vector<StateVector> kets;
    for (const auto s : slots) {
        const auto it = std::ranges::find_if(proj.placements, [&](const Placement& p) { return p.slot == s; });
        if (it == proj.placements.end()) throw ValidationError("probability_from_density: projector leaves slot t" + std::to_string(s) + " unfixed");
        kets.push_back(it->ket);
    }
    if (proj.placements.size() != slots.size()) throw ValidationError("probability_from_density: projector has placements outside the space");
    const StateVector gamma = tensor_product(kets);
    return gamma.dot(rho.matrix * gamma).real();
}

// ---------------------------------------------------------------------------
// Composite (A,B) schedules
// ---------------------------------------------------------------------------

enum class Subsystem { A, B };

inline std::string to_string(Subsystem s) { return s == Subsystem::A ? "A" : "B"; }

// Joint schedule of an A,B system with local observables A_i (x) I and
// I (x) B_i measured at every slot. Joint outcome index is a * d_B + b.
struct CompositeHistorySpec {
    std::size_t dim_a = 0;
    std::size_t dim_b = 0;
    StateVector initial_state;
    std::vector<Operator> evolutions;
    std::vector<ObservableSpec> measurements_a;
    std::vector<ObservableSpec> measurements_b;

    std::size_t slot_count() const { return measurements_a.size(); }

    HistorySpec joint() const {
        if (measurements_a.size() != measurements_b.size())
            throw ValidationError("composite schedule: " + std::to_string(measurements_a.size()) + " A measurements but " + std::to_string(measurements_b.size()) + " B measurements");
        HistorySpec spec{initial_state, evolutions, {}};
        for (std::size_t i = 0; i < measurements_a.size(); ++i) {
            const auto& a = measurements_a[i];
            const auto& b = measurements_b[i];
            if (a.dim() != dim_a || b.dim() != dim_b) throw ValidationError("composite schedule: local observable dimension mismatch at slot t" + std::to_string(i + 1));
            a.validate();
            b.validate();
            ObservableSpec joint_obs{a.name + "(x)" + b.name, {}, {}};
            for (std::size_t ka = 0; ka < a.outcome_count(); ++ka)
                for (std::size_t kb = 0; kb < b.outcome_count(); ++kb) {
                    joint_obs.eigenvalues.push_back(static_cast<double>(ka * dim_b + kb));
                    joint_obs.eigenvectors.push_back(tensor_product(a.eigenvectors[ka], b.eigenvectors[kb]));
                }
            spec.measurements.emplace_back(std::move(joint_obs));
        }
        spec.validate();
        return spec;
    }

    LabeledSpace space() const {
        std::vector<Axis> axes;
        for (std::size_t i = 1; i <= slot_count(); ++i) {
            axes.push_back({i, "A", dim_a});
            axes.push_back({i, "B", dim_b});
        }
        return LabeledSpace(std::move(axes));
    }

    std::vector<ObservableSpec> local_observables(Subsystem s) const { return s == Subsystem::A ? measurements_a : measurements_b; }
};

// |Psi^{AB}> on axes t1.A, t1.B, t2.A, ...
inline PureHistoryState composite_history_state(const CompositeHistorySpec& spec, std::uint64_t cap = default_enumeration_cap) {
    const HistoryVector hv = build_history_vector(spec.joint(), cap);
    return {spec.space(), hv.embed()};
}

// Labels of every axis of `space` that belongs to subsystem `s`.
inline std::set<std::string> factor_labels(const LabeledSpace& space, Subsystem s) {
    std::set<std::string> out;
    for (const auto& a : space.axes())
        if (a.factor == to_string(s)) out.insert(a.label());
    return out;
}

inline HistoryDensityMatrix trace_factor(const HistoryDensityMatrix& rho, Subsystem traced) {
    const auto labels = factor_labels(rho.space, traced);
    if (labels.empty()) throw ValidationError("space reduction: no " + to_string(traced) + " axes in the space");
    return {rho.space.without(labels), partial_trace(rho.matrix, rho.space, labels)};
}

// rho^A = Tr_B |Psi^AB><Psi^AB| (or rho^B).
inline HistoryDensityMatrix space_reduce(const CompositeHistorySpec& spec, Subsystem keep, std::uint64_t cap = default_enumeration_cap) {
    const auto rho = pure_density(composite_history_state(spec, cap));
    return trace_factor(rho, keep == Subsystem::A ? Subsystem::B : Subsystem::A);
}

// Partial trace over every axis of the slots not in `keep`.
inline HistoryDensityMatrix time_reduce(const HistoryDensityMatrix& rho, const std::vector<std::size_t>& keep) {
    if (keep.empty()) throw ValidationError("time_reduce: keep must be nonempty");
    const auto slots = rho.space.slot_numbers();
    for (const auto s : keep)
        if (std::ranges::find(slots, s) == slots.end()) throw ValidationError("time_reduce: slot t" + std::to_string(s) + " not in space");
    std::set<std::string> traced;
    for (const auto s : slots)
        if (std::ranges::find(keep, s) == keep.end())
            for (const auto& l : rho.space.slot_labels(s)) traced.insert(l);
    return {rho.space.without(traced), partial_trace(rho.matrix, rho.space, traced)};
}

// ---------------------------------------------------------------------------
// Entropy and Schmidt spectra
// ---------------------------------------------------------------------------

enum class LogBase { E, Two };

inline double von_neumann_entropy(const HistoryDensityMatrix& rho, LogBase base = LogBase::E) {
    const auto spectrum = hermitian_eig(rho.matrix);
    double s = 0;
    for (double lambda : spectrum.values) {
        if (lambda < -1e-9) throw NumericalError("von_neumann_entropy: eigenvalue " + std::to_string(lambda) + " is negative; not a density matrix");
        if (lambda <= 0) continue;
        s -= lambda * std::log(lambda);
    }
    if (base == LogBase::Two) s /= std::log(2.0);
    return s == 0 ? 0.0 : s;
}

struct SchmidtResult {
    bool product = false;
    std::vector<double> singular_values;  // descending
};

// Reshapes psi into a matrix (axes in `side`) x (remaining axes) and returns
// its singular values; product iff the second one is <= tolerance.
inline SchmidtResult is_product_history(const StateVector& psi, const LabeledSpace& space, const std::set<std::string>& side, double tolerance = tol::structural) {
    if (static_cast<std::size_t>(psi.size()) != space.dim()) throw ValidationError("is_product_history: state does not match space");
    if (std::abs(psi.norm() - 1.0) > tol::structural) throw ValidationError("is_product_history: state is not normalized");
    for (const auto& l : side)
        if (!space.contains(l)) throw ValidationError("is_product_history: unknown label " + l);
    if (side.empty() || side.size() == space.rank()) throw ValidationError("is_product_history: trivial cut");

    std::vector<bool> other;
    for (const auto& a : space.axes()) other.push_back(!side.contains(a.label()));
    const auto split = detail::split_indices(space, other);
    Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(split.kept_dim), static_cast<Eigen::Index>(split.traced_dim));
    for (std::size_t flat = 0; flat < space.dim(); ++flat)
        m(static_cast<Eigen::Index>(split.kept[flat]), static_cast<Eigen::Index>(split.traced[flat])) = psi(static_cast<Eigen::Index>(flat));

    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(m);
    SchmidtResult out;
    for (Eigen::Index k = 0; k < svd.singularValues().size(); ++k) out.singular_values.push_back(svd.singularValues()(k));
    out.product = out.singular_values.size() < 2 || out.singular_values[1] <= tolerance;
    return out;
}

// Cut between the slots in `side_slots` and the remaining slots.
inline SchmidtResult is_product_history(const HistoryVector& hv, const std::vector<std::size_t>& side_slots, double tolerance = tol::structural) {
    const auto space = hv.space();
    std::set<std::string> side;
    for (const auto s : side_slots)
        for (const auto& l : space.slot_labels(s)) side.insert(l);
    return is_product_history(hv.embed(), space, side, tolerance);
}

}  // namespace qhist
