// tensor.hpp
// Dense complex linear algebra shared by every history module: labeled
// tensor-product spaces, Kronecker products, partial traces and the
// structural checks (unitarity, hermiticity) the other modules rely on.
//
// Storage is row-major. In a LabeledSpace the axis order is the flattening
// order: slot t1 is the outermost axis and, within a slot, factor A comes
// before factor B. The temporal product and the spatial product share the
// same Kronecker implementation; only the axis labels tell them apart.

#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "qhist/errors.hpp"

namespace qhist {

using Complex = std::complex<double>;
using StateVector = Eigen::Matrix<Complex, Eigen::Dynamic, 1>;
using Operator = Eigen::Matrix<Complex, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

namespace tol {
inline constexpr double structural = 1e-10;
inline constexpr double arithmetic = 1e-12;
}  // namespace tol

// ---------------------------------------------------------------------------
// Finiteness and small constructors
// ---------------------------------------------------------------------------

inline bool is_finite(const Complex& z) { return std::isfinite(z.real()) && std::isfinite(z.imag()); }

template <class Derived>
bool all_finite(const Eigen::MatrixBase<Derived>& m) {
    for (Eigen::Index i = 0; i < m.rows(); ++i)
        for (Eigen::Index j = 0; j < m.cols(); ++j)
            if (!is_finite(m(i, j))) return false;
    return true;
}

inline StateVector basis_state(std::size_t dim, std::size_t index) {
    if (index >= dim) throw ValidationError("basis_state: index " + std::to_string(index) + " out of range for dimension " + std::to_string(dim));
    StateVector v = StateVector::Zero(static_cast<Eigen::Index>(dim));
    v(static_cast<Eigen::Index>(index)) = 1.0;
    return v;
}

inline StateVector make_state(std::initializer_list<Complex> entries) {
    StateVector v(static_cast<Eigen::Index>(entries.size()));
    Eigen::Index i = 0;
    for (const auto& e : entries) v(i++) = e;
    return v;
}

inline Operator make_operator(std::initializer_list<std::initializer_list<Complex>> rows) {
    const auto n = static_cast<Eigen::Index>(rows.size());
    Operator m(n, n);
    Eigen::Index i = 0;
    for (const auto& row : rows) {
        if (static_cast<Eigen::Index>(row.size()) != n) throw ValidationError("make_operator: matrix is not square");
        Eigen::Index j = 0;
        for (const auto& e : row) m(i, j++) = e;
        ++i;
    }
    return m;
}

// |v><v|
inline Operator projector(const StateVector& v) { return v * v.adjoint(); }

inline Operator identity(std::size_t dim) {
    return Operator::Identity(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
}

template <class A, class B>
double max_abs_diff(const Eigen::MatrixBase<A>& a, const Eigen::MatrixBase<B>& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) throw ValidationError("max_abs_diff: shape mismatch");
    if (a.size() == 0) return 0.0;
    return (a - b).cwiseAbs().maxCoeff();
}

// Common qubit gates and Pauli operators in the computational basis.
namespace gates {
inline Operator pauli_x() { return make_operator({{0, 1}, {1, 0}}); }
inline Operator pauli_y() { return make_operator({{0, Complex(0, -1)}, {Complex(0, 1), 0}}); }
inline Operator pauli_z() { return make_operator({{1, 0}, {0, -1}}); }
inline Operator hadamard() {
    const double s = 1.0 / std::numbers::sqrt2;
    return make_operator({{s, s}, {s, -s}});
}
inline Operator cnot() {
    return make_operator({{1, 0, 0, 0}, {0, 1, 0, 0}, {0, 0, 0, 1}, {0, 0, 1, 0}});
}
// exp(-i theta Y / 2): rotates the Bloch vector by theta about the y axis.
inline Operator ry(double theta) {
    const double c = std::cos(theta / 2), s = std::sin(theta / 2);
    return make_operator({{c, -s}, {s, c}});
}
}  // namespace gates

// ---------------------------------------------------------------------------
// Labeled spaces
// ---------------------------------------------------------------------------

// One tensor factor. `slot` is the 1-based time slot; `factor` optionally
// names a spatial subsystem inside the slot ("A", "B"), empty otherwise.
struct Axis {
    std::size_t slot = 1;
    std::string factor;
    std::size_t dim = 1;

    std::string label() const { return "t" + std::to_string(slot) + (factor.empty() ? "" : "." + factor); }
    bool operator==(const Axis&) const = default;
};

class LabeledSpace {
public:
    LabeledSpace() = default;
    explicit LabeledSpace(std::vector<Axis> axes) : axes_(std::move(axes)) {
        std::set<std::string> seen;
        for (const auto& a : axes_) {
            if (a.dim == 0) throw ValidationError("LabeledSpace: axis " + a.label() + " has zero dimension");
            if (!seen.insert(a.label()).second) throw ValidationError("LabeledSpace: duplicate axis label " + a.label());
        }
    }

    // n time slots of dimension d each, labels t1..tn.
    static LabeledSpace slots(std::size_t n, std::size_t d) {
        std::vector<Axis> axes;
        for (std::size_t i = 1; i <= n; ++i) axes.push_back({i, "", d});
        return LabeledSpace(std::move(axes));
    }

    const std::vector<Axis>& axes() const { return axes_; }
    std::size_t rank() const { return axes_.size(); }

    std::size_t dim() const {
        std::size_t total = 1;
        for (const auto& a : axes_) total *= a.dim;
        return total;
    }

    std::vector<std::string> labels() const {
        std::vector<std::string> out;
        for (const auto& a : axes_) out.push_back(a.label());
        return out;
    }

    std::size_t index_of(const std::string& label) const {
        for (std::size_t i = 0; i < axes_.size(); ++i)
            if (axes_[i].label() == label) return i;
        throw ValidationError("LabeledSpace: unknown axis label " + label);
    }

    bool contains(const std::string& label) const {
        return std::ranges::any_of(axes_, [&](const Axis& a) { return a.label() == label; });
    }

    // Distinct slot numbers in axis order.
    std::vector<std::size_t> slot_numbers() const {
        std::vector<std::size_t> out;
        for (const auto& a : axes_)
            if (std::ranges::find(out, a.slot) == out.end()) out.push_back(a.slot);
        return out;
    }

    // Labels of every axis belonging to a slot.
    std::vector<std::string> slot_labels(std::size_t slot) const {
        std::vector<std::string> out;
        for (const auto& a : axes_)
            if (a.slot == slot) out.push_back(a.label());
        return out;
    }

    // Combined dimension of the axes of one slot.
    std::size_t slot_dim(std::size_t slot) const {
        std::size_t d = 1;
        bool found = false;
        for (const auto& a : axes_)
            if (a.slot == slot) {
                d *= a.dim;
                found = true;
            }
        if (!found) throw ValidationError("LabeledSpace: no axis for slot t" + std::to_string(slot));
        return d;
    }

    LabeledSpace without(const std::set<std::string>& removed) const {
        std::vector<Axis> kept;
        for (const auto& a : axes_)
            if (!removed.contains(a.label())) kept.push_back(a);
        return LabeledSpace(std::move(kept));
    }

    bool operator==(const LabeledSpace&) const = default;

private:
    std::vector<Axis> axes_;
};

// ---------------------------------------------------------------------------
// Kronecker products
// ---------------------------------------------------------------------------

// x's axes before y's axes.
inline StateVector tensor_product(const StateVector& x, const StateVector& y) {
    if (x.size() == 0 || y.size() == 0) throw ValidationError("tensor_product: empty operand");
    StateVector out(x.size() * y.size());
    for (Eigen::Index i = 0; i < x.size(); ++i)
        for (Eigen::Index j = 0; j < y.size(); ++j) out(i * y.size() + j) = x(i) * y(j);
    return out;
}

inline Operator tensor_product(const Operator& x, const Operator& y) {
    if (x.rows() != x.cols() || y.rows() != y.cols()) throw ValidationError("tensor_product: operators must be square");
    if (x.size() == 0 || y.size() == 0) throw ValidationError("tensor_product: empty operand");
    const Eigen::Index dy = y.rows();
    Operator out(x.rows() * dy, x.cols() * dy);
    for (Eigen::Index i = 0; i < x.rows(); ++i)
        for (Eigen::Index j = 0; j < x.cols(); ++j) out.block(i * dy, j * dy, dy, dy) = x(i, j) * y;
    return out;
}

inline LabeledSpace tensor_product(const LabeledSpace& x, const LabeledSpace& y) {
    std::vector<Axis> axes = x.axes();
    axes.insert(axes.end(), y.axes().begin(), y.axes().end());
    return LabeledSpace(std::move(axes));
}

template <class T>
T tensor_product(std::span<const T> factors) {
    if (factors.empty()) throw ValidationError("tensor_product: no factors");
    T out = factors.front();
    for (std::size_t k = 1; k < factors.size(); ++k) out = tensor_product(out, factors[k]);
    return out;
}

template <class T>
T tensor_product(const std::vector<T>& factors) {
    return tensor_product(std::span<const T>(factors));
}

// ---------------------------------------------------------------------------
// Partial trace and local application
// ---------------------------------------------------------------------------

namespace detail {

// Splits flat indices of `space` into (kept index, traced index) pairs.
struct IndexSplit {
    std::vector<std::size_t> kept;
    std::vector<std::size_t> traced;
    std::size_t kept_dim = 1;
    std::size_t traced_dim = 1;
};

inline IndexSplit split_indices(const LabeledSpace& space, const std::vector<bool>& is_traced) {
    IndexSplit s;
    const auto& axes = space.axes();
    for (std::size_t a = 0; a < axes.size(); ++a) (is_traced[a] ? s.traced_dim : s.kept_dim) *= axes[a].dim;
    const std::size_t total = space.dim();
    s.kept.resize(total);
    s.traced.resize(total);
    std::vector<std::size_t> digits(axes.size(), 0);
    for (std::size_t flat = 0; flat < total; ++flat) {
        std::size_t k = 0, t = 0;
        for (std::size_t a = 0; a < axes.size(); ++a) {
            if (is_traced[a]) t = t * axes[a].dim + digits[a];
            else k = k * axes[a].dim + digits[a];
        }
        s.kept[flat] = k;
        s.traced[flat] = t;
        for (std::size_t a = axes.size(); a-- > 0;) {
            if (++digits[a] < axes[a].dim) break;
            digits[a] = 0;
        }
    }
    return s;
}

}  // namespace detail

// Traces out the axes named in `traced`. The result lives on the remaining
// axes in their original order; tracing every axis yields the 1x1 Tr(rho).
inline Operator partial_trace(const Operator& rho, const LabeledSpace& space, const std::set<std::string>& traced) {
    if (rho.rows() != rho.cols()) throw ValidationError("partial_trace: operator is not square");
    if (static_cast<std::size_t>(rho.rows()) != space.dim())
        throw ValidationError("partial_trace: operator dimension " + std::to_string(rho.rows()) + " does not match space dimension " + std::to_string(space.dim()));
    for (const auto& label : traced)
        if (!space.contains(label)) throw ValidationError("partial_trace: unknown label " + label);

    std::vector<bool> is_traced;
    for (const auto& a : space.axes()) is_traced.push_back(traced.contains(a.label()));
    const auto split = detail::split_indices(space, is_traced);

    const auto kd = static_cast<Eigen::Index>(split.kept_dim);
    Operator out = Operator::Zero(kd, kd);
    const std::size_t total = space.dim();
    for (std::size_t i = 0; i < total; ++i)
        for (std::size_t j = 0; j < total; ++j)
            if (split.traced[i] == split.traced[j])
                out(static_cast<Eigen::Index>(split.kept[i]), static_cast<Eigen::Index>(split.kept[j])) +=
                    rho(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
    return out;
}

// Applies `op` to the contiguous block of axes [first, first + count) of a
// state on `space`, identity elsewhere.
inline StateVector apply_local(const StateVector& psi, const LabeledSpace& space, std::size_t first, std::size_t count, const Operator& op) {
    const auto& axes = space.axes();
    if (first + count > axes.size() || count == 0) throw ValidationError("apply_local: axis range out of bounds");
    if (static_cast<std::size_t>(psi.size()) != space.dim()) throw ValidationError("apply_local: state dimension does not match space");
    std::size_t outer = 1, local = 1, inner = 1;
    for (std::size_t a = 0; a < first; ++a) outer *= axes[a].dim;
    for (std::size_t a = first; a < first + count; ++a) local *= axes[a].dim;
    for (std::size_t a = first + count; a < axes.size(); ++a) inner *= axes[a].dim;
    if (static_cast<std::size_t>(op.rows()) != local || op.rows() != op.cols())
        throw ValidationError("apply_local: operator dimension " + std::to_string(op.rows()) + " does not match local dimension " + std::to_string(local));

    StateVector out = StateVector::Zero(psi.size());
    for (std::size_t o = 0; o < outer; ++o)
        for (std::size_t r = 0; r < local; ++r)
            for (std::size_t c = 0; c < local; ++c) {
                const Complex w = op(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c));
                if (w == Complex(0)) continue;
                const std::size_t base_out = (o * local + r) * inner;
                const std::size_t base_in = (o * local + c) * inner;
                for (std::size_t i = 0; i < inner; ++i)
                    out(static_cast<Eigen::Index>(base_out + i)) += w * psi(static_cast<Eigen::Index>(base_in + i));
            }
    return out;
}

// Applies `op` to all axes of one slot (they are contiguous by convention).
inline StateVector apply_on_slot(const StateVector& psi, const LabeledSpace& space, std::size_t slot, const Operator& op) {
    const auto& axes = space.axes();
    std::size_t first = axes.size(), count = 0;
    for (std::size_t a = 0; a < axes.size(); ++a)
        if (axes[a].slot == slot) {
            if (count == 0) first = a;
            else if (a != first + count) throw ValidationError("apply_on_slot: axes of slot t" + std::to_string(slot) + " are not contiguous");
            ++count;
        }
    if (count == 0) throw ValidationError("apply_on_slot: no axis for slot t" + std::to_string(slot));
    return apply_local(psi, space, first, count, op);
}

// ---------------------------------------------------------------------------
// Structural checks and spectra
// ---------------------------------------------------------------------------

inline double unitarity_defect(const Operator& u) {
    if (u.rows() != u.cols()) throw ValidationError("unitarity check: operator is not square");
    return max_abs_diff(u.adjoint() * u, Operator::Identity(u.rows(), u.cols()));
}

inline bool check_unitary(const Operator& u, double tolerance = tol::structural) { return unitarity_defect(u) <= tolerance; }

inline double hermiticity_defect(const Operator& m) {
    if (m.rows() != m.cols()) throw ValidationError("hermiticity check: operator is not square");
    return max_abs_diff(m, Operator(m.adjoint()));
}

inline bool is_hermitian(const Operator& m, double tolerance = tol::structural) { return hermiticity_defect(m) <= tolerance; }

struct EigenSystem {
    std::vector<double> values;  // ascending
    std::vector<StateVector> vectors;
};

inline EigenSystem hermitian_eig(const Operator& m, double tolerance = tol::structural) {
    if (!is_hermitian(m, tolerance)) throw ValidationError("hermitian_eig: operator is not Hermitian within tolerance");
    using ColMajor = Eigen::MatrixXcd;
    ColMajor sym = (ColMajor(m) + ColMajor(m.adjoint())) / 2.0;
    Eigen::SelfAdjointEigenSolver<ColMajor> solver(sym);
    if (solver.info() != Eigen::Success) throw NumericalError("hermitian_eig: eigensolver did not converge");
    EigenSystem out;
    for (Eigen::Index k = 0; k < sym.rows(); ++k) {
        out.values.push_back(solver.eigenvalues()(k));
        out.vectors.emplace_back(solver.eigenvectors().col(k));
    }
    return out;
}

inline double trace_real(const Operator& m) { return m.trace().real(); }

}  // namespace qhist
