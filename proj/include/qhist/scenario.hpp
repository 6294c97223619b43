// scenario.hpp
// On-disk scenario format (UTF-8 JSON) and its validated in-memory form.
//
// Complex numbers are [re, im] (a bare real is accepted on input), vectors
// are arrays of complex, matrices row-major arrays of rows. Fields:
//   dimension, initial_state, evolutions[n], measurements[n]
//   composite? {dim_a, dim_b, measurements_a[n], measurements_b[n]}
//   lg?        {theta | unitaries[3], q_observable?}
//   chsh?      {a1, b1, a2, b2, mode?, flip_a1?, reference?[2]}
// An observable is {name, eigenvalues, eigenvectors}. With a composite block
// the joint measurements are derived and top-level `measurements` must be
// omitted.

#pragma once

#include <array>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "qhist/density.hpp"
#include "qhist/history.hpp"
#include "qhist/inequality.hpp"

namespace qhist {

using nlohmann::json;

struct CompositeBlock {
    std::size_t dim_a = 0;
    std::size_t dim_b = 0;
    std::vector<ObservableSpec> measurements_a;
    std::vector<ObservableSpec> measurements_b;
};

struct LgBlock {
    std::optional<double> theta;
    std::optional<std::array<Operator, 3>> unitaries;
    ObservableSpec q;
};

struct ChshBlock {
    ObservableSpec a1, b1, a2, b2;
    ChshMode mode = ChshMode::FixedBasis;
    bool flip_a1 = false;  // A1 -> -A1 in per-pair mode
    std::optional<std::array<ObservableSpec, 2>> reference;
};

struct ScenarioFile {
    std::size_t dimension = 0;
    StateVector initial_state;
    std::vector<Operator> evolutions;
    std::vector<ObservableSpec> measurements;  // empty when composite is set
    std::optional<CompositeBlock> composite;
    std::optional<LgBlock> lg;
    std::optional<ChshBlock> chsh;

    std::size_t slot_count() const { return evolutions.size(); }

    CompositeHistorySpec composite_spec() const {
        if (!composite) throw ValidationError("scenario has no composite block");
        return {composite->dim_a, composite->dim_b, initial_state, evolutions, composite->measurements_a, composite->measurements_b};
    }

    HistorySpec history_spec() const {
        if (composite) return composite_spec().joint();
        HistorySpec spec{initial_state, evolutions, {}};
        for (const auto& m : measurements) spec.measurements.emplace_back(m);
        spec.validate();
        return spec;
    }

    DichotomicSchedule lg_schedule() const {
        if (!lg) throw ValidationError("scenario has no lg block");
        DichotomicSchedule s{initial_state, identity(dimension), {}, {}, lg->q};
        if (lg->theta) {
            if (dimension != 2) throw ValidationError("lg.theta requires dimension 2");
            s.u12 = s.u23 = gates::ry(*lg->theta);
        } else {
            s.u01 = (*lg->unitaries)[0];
            s.u12 = (*lg->unitaries)[1];
            s.u23 = (*lg->unitaries)[2];
        }
        s.validate();
        return s;
    }

    ChshSetup chsh_setup() const {
        if (!chsh) throw ValidationError("scenario has no chsh block");
        if (evolutions.size() != 2) throw ValidationError("chsh needs a two-slot scenario, got " + std::to_string(evolutions.size()) + " evolutions");
        return {initial_state, evolutions[0], evolutions[1], chsh->a1, chsh->b1, chsh->a2, chsh->b2, chsh->reference};
    }
};

// ---------------------------------------------------------------------------
// Parsing
// ---------------------------------------------------------------------------

namespace scenario_detail {

[[noreturn]] inline void fail(const std::string& where, const std::string& what) { throw ValidationError(where + ": " + what); }

inline const json& field(const json& obj, const std::string& key, const std::string& where) {
    if (!obj.is_object()) fail(where, "expected an object");
    const auto it = obj.find(key);
    if (it == obj.end()) fail(where, "missing field '" + key + "'");
    return *it;
}

inline double real_number(const json& j, const std::string& where) {
    if (!j.is_number()) fail(where, "expected a number");
    const double v = j.get<double>();
    if (!std::isfinite(v)) fail(where, "non-finite number");
    return v;
}

inline Complex complex_number(const json& j, const std::string& where) {
    if (j.is_number()) return real_number(j, where);
    if (!j.is_array() || j.size() != 2) fail(where, "expected a complex number [re, im]");
    return {real_number(j[0], where + "[0]"), real_number(j[1], where + "[1]")};
}

inline StateVector vector(const json& j, const std::string& where, std::size_t dim) {
    if (!j.is_array()) fail(where, "expected an array of complex numbers");
    if (j.size() != dim) fail(where, "expected " + std::to_string(dim) + " entries, got " + std::to_string(j.size()));
    StateVector v(static_cast<Eigen::Index>(dim));
    for (std::size_t i = 0; i < dim; ++i) v(static_cast<Eigen::Index>(i)) = complex_number(j[i], where + "[" + std::to_string(i) + "]");
    return v;
}

inline Operator matrix(const json& j, const std::string& where, std::size_t dim) {
    if (!j.is_array() || j.size() != dim) fail(where, "expected " + std::to_string(dim) + " rows");
    Operator m(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
    for (std::size_t r = 0; r < dim; ++r) m.row(static_cast<Eigen::Index>(r)) = vector(j[r], where + "[" + std::to_string(r) + "]", dim).transpose();
    return m;
}

inline Operator unitary(const json& j, const std::string& where, std::size_t dim) {
    Operator u = matrix(j, where, dim);
    if (!check_unitary(u, tol::structural)) fail(where, "matrix is not unitary (max |U^dag U - I| = " + std::to_string(unitarity_defect(u)) + ")");
    return u;
}

inline ObservableSpec observable(const json& j, const std::string& where, std::size_t dim) {
    ObservableSpec o;
    o.name = j.contains("name") ? j.at("name").get<std::string>() : where;
    const auto& vals = field(j, "eigenvalues", where);
    if (!vals.is_array() || vals.size() != dim) fail(where + ".eigenvalues", "expected " + std::to_string(dim) + " real eigenvalues");
    for (std::size_t k = 0; k < dim; ++k) o.eigenvalues.push_back(real_number(vals[k], where + ".eigenvalues[" + std::to_string(k) + "]"));
    const auto& vecs = field(j, "eigenvectors", where);
    if (!vecs.is_array() || vecs.size() != dim) fail(where + ".eigenvectors", "expected " + std::to_string(dim) + " eigenvectors");
    for (std::size_t k = 0; k < dim; ++k) o.eigenvectors.push_back(vector(vecs[k], where + ".eigenvectors[" + std::to_string(k) + "]", dim));
    try {
        o.validate();
    } catch (const ValidationError& e) {
        fail(where, e.what());
    }
    return o;
}

inline std::vector<ObservableSpec> observables(const json& j, const std::string& where, std::size_t dim) {
    if (!j.is_array()) fail(where, "expected an array of observables");
    std::vector<ObservableSpec> out;
    for (std::size_t i = 0; i < j.size(); ++i) out.push_back(observable(j[i], where + "[" + std::to_string(i) + "]", dim));
    return out;
}

inline std::size_t positive_int(const json& j, const std::string& where) {
    if (!j.is_number_integer() || j.get<long long>() <= 0) fail(where, "expected a positive integer");
    return j.get<std::size_t>();
}

inline json to_json(const Complex& z) { return json::array({z.real(), z.imag()}); }
inline json to_json(const StateVector& v) {
    json a = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(to_json(v(i)));
    return a;
}
inline json to_json(const Operator& m) {
    json a = json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) a.push_back(to_json(StateVector(m.row(r).transpose())));
    return a;
}
inline json to_json(const ObservableSpec& o) {
    json vecs = json::array();
    for (const auto& v : o.eigenvectors) vecs.push_back(to_json(v));
    return {{"name", o.name}, {"eigenvalues", o.eigenvalues}, {"eigenvectors", vecs}};
}
inline json to_json(const std::vector<ObservableSpec>& os) {
    json a = json::array();
    for (const auto& o : os) a.push_back(to_json(o));
    return a;
}

}  // namespace scenario_detail

inline ChshMode parse_chsh_mode(const std::string& s) {
    if (s == "fixed-basis") return ChshMode::FixedBasis;
    if (s == "per-pair") return ChshMode::PerPair;
    throw ValidationError("unknown chsh mode '" + s + "' (expected fixed-basis or per-pair)");
}

inline ScenarioFile parse_scenario(const json& j) {
    namespace sd = scenario_detail;
    if (!j.is_object()) sd::fail("scenario", "top level must be a JSON object");
    ScenarioFile sc;
    sc.dimension = sd::positive_int(sd::field(j, "dimension", "scenario"), "dimension");
    const std::size_t d = sc.dimension;

    sc.initial_state = sd::vector(sd::field(j, "initial_state", "scenario"), "initial_state", d);
    if (std::abs(sc.initial_state.norm() - 1.0) > tol::structural)
        sd::fail("initial_state", "not normalized (norm " + std::to_string(sc.initial_state.norm()) + ")");

    const auto& evs = sd::field(j, "evolutions", "scenario");
    if (!evs.is_array() || evs.empty()) sd::fail("evolutions", "expected a nonempty array of matrices");
    for (std::size_t i = 0; i < evs.size(); ++i) sc.evolutions.push_back(sd::unitary(evs[i], "evolutions[" + std::to_string(i) + "]", d));

    if (j.contains("composite")) {
        const auto& c = j.at("composite");
        CompositeBlock block;
        block.dim_a = sd::positive_int(sd::field(c, "dim_a", "composite"), "composite.dim_a");
        block.dim_b = sd::positive_int(sd::field(c, "dim_b", "composite"), "composite.dim_b");
        if (block.dim_a * block.dim_b != d) sd::fail("composite", "dim_a * dim_b must equal dimension " + std::to_string(d));
        block.measurements_a = sd::observables(sd::field(c, "measurements_a", "composite"), "composite.measurements_a", block.dim_a);
        block.measurements_b = sd::observables(sd::field(c, "measurements_b", "composite"), "composite.measurements_b", block.dim_b);
        if (j.contains("measurements")) sd::fail("measurements", "must be omitted when a composite block is present");
        if (block.measurements_a.size() != sc.evolutions.size() || block.measurements_b.size() != sc.evolutions.size())
            sd::fail("composite", "length mismatch: " + std::to_string(sc.evolutions.size()) + " evolutions but " + std::to_string(block.measurements_a.size()) + " A and " +
                                      std::to_string(block.measurements_b.size()) + " B measurements");
        sc.composite = std::move(block);
    } else {
        sc.measurements = sd::observables(sd::field(j, "measurements", "scenario"), "measurements", d);
        if (sc.measurements.size() != sc.evolutions.size())
            sd::fail("scenario", "length mismatch: " + std::to_string(sc.evolutions.size()) + " evolutions but " + std::to_string(sc.measurements.size()) + " measurements");
    }

    if (j.contains("lg")) {
        const auto& l = j.at("lg");
        LgBlock block;
        if (l.contains("theta") == l.contains("unitaries")) sd::fail("lg", "give exactly one of 'theta' or 'unitaries'");
        if (l.contains("theta")) {
            block.theta = sd::real_number(l.at("theta"), "lg.theta");
            if (d != 2) sd::fail("lg.theta", "precession by angle requires dimension 2");
        } else {
            const auto& us = l.at("unitaries");
            if (!us.is_array() || us.size() != 3) sd::fail("lg.unitaries", "expected three unitaries U01, U12, U23");
            block.unitaries = std::array<Operator, 3>{sd::unitary(us[0], "lg.unitaries[0]", d), sd::unitary(us[1], "lg.unitaries[1]", d), sd::unitary(us[2], "lg.unitaries[2]", d)};
        }
        if (l.contains("q_observable")) block.q = sd::observable(l.at("q_observable"), "lg.q_observable", d);
        else if (d == 2) block.q = pauli_z_observable();
        else sd::fail("lg", "missing field 'q_observable'");
        try {
            detail::require_dichotomic(block.q);
        } catch (const ValidationError& e) {
            sd::fail("lg.q_observable", e.what());
        }
        sc.lg = std::move(block);
    }

    if (j.contains("chsh")) {
        const auto& c = j.at("chsh");
        ChshBlock block{sd::observable(sd::field(c, "a1", "chsh"), "chsh.a1", d), sd::observable(sd::field(c, "b1", "chsh"), "chsh.b1", d),
                        sd::observable(sd::field(c, "a2", "chsh"), "chsh.a2", d), sd::observable(sd::field(c, "b2", "chsh"), "chsh.b2", d), ChshMode::FixedBasis, false, std::nullopt};
        for (const auto& [name, o] : {std::pair{"chsh.a1", &block.a1}, {"chsh.b1", &block.b1}, {"chsh.a2", &block.a2}, {"chsh.b2", &block.b2}}) {
            try {
                detail::require_dichotomic(*o);
            } catch (const ValidationError& e) {
                sd::fail(name, e.what());
            }
        }
        if (c.contains("mode")) block.mode = parse_chsh_mode(c.at("mode").get<std::string>());
        if (c.contains("flip_a1")) {
            if (!c.at("flip_a1").is_boolean()) sd::fail("chsh.flip_a1", "expected a boolean");
            block.flip_a1 = c.at("flip_a1").get<bool>();
        }
        if (c.contains("reference")) {
            const auto refs = sd::observables(c.at("reference"), "chsh.reference", d);
            if (refs.size() != 2) sd::fail("chsh.reference", "expected two observables");
            block.reference = std::array<ObservableSpec, 2>{refs[0], refs[1]};
        }
        if (sc.evolutions.size() != 2) sd::fail("chsh", "requires a two-slot scenario");
        sc.chsh = std::move(block);
    }

    // Whole-schedule check (dimensions, lengths) with the joint basis derived.
    sc.history_spec();
    return sc;
}

inline ScenarioFile parse_scenario_text(const std::string& text, const std::string& source = "scenario") {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ValidationError(source + ": JSON parse error: " + e.what());
    }
    return parse_scenario(j);
}

inline ScenarioFile load_scenario(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open scenario file '" + path + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_scenario_text(buf.str(), path);
}

inline json scenario_to_json(const ScenarioFile& sc) {
    namespace sd = scenario_detail;
    json j;
    j["dimension"] = sc.dimension;
    j["initial_state"] = sd::to_json(sc.initial_state);
    json evs = json::array();
    for (const auto& u : sc.evolutions) evs.push_back(sd::to_json(u));
    j["evolutions"] = evs;
    if (sc.composite) {
        j["composite"] = {{"dim_a", sc.composite->dim_a},
                          {"dim_b", sc.composite->dim_b},
                          {"measurements_a", sd::to_json(sc.composite->measurements_a)},
                          {"measurements_b", sd::to_json(sc.composite->measurements_b)}};
    } else {
        j["measurements"] = sd::to_json(sc.measurements);
    }
    if (sc.lg) {
        json l;
        if (sc.lg->theta) l["theta"] = *sc.lg->theta;
        else l["unitaries"] = json::array({sd::to_json((*sc.lg->unitaries)[0]), sd::to_json((*sc.lg->unitaries)[1]), sd::to_json((*sc.lg->unitaries)[2])});
        l["q_observable"] = sd::to_json(sc.lg->q);
        j["lg"] = l;
    }
    if (sc.chsh) {
        json c{{"a1", sd::to_json(sc.chsh->a1)}, {"b1", sd::to_json(sc.chsh->b1)}, {"a2", sd::to_json(sc.chsh->a2)}, {"b2", sd::to_json(sc.chsh->b2)},
               {"mode", to_string(sc.chsh->mode)}, {"flip_a1", sc.chsh->flip_a1}};
        if (sc.chsh->reference) c["reference"] = json::array({sd::to_json((*sc.chsh->reference)[0]), sd::to_json((*sc.chsh->reference)[1])});
        j["chsh"] = c;
    }
    return j;
}

}  // namespace qhist
