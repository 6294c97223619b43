// cli.hpp
// Command dispatch behind the `qhist` tool: each command turns a validated
// scenario into a RunResult (titled sections of key/value fields and
// tables) that renders deterministically as an aligned table, JSON or CSV.
//
// Exit codes: 0 success, 2 validation error, 3 numerical contract violation.

#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "qhist/density.hpp"
#include "qhist/history.hpp"
#include "qhist/inequality.hpp"
#include "qhist/observables.hpp"
#include "qhist/protocol.hpp"
#include "qhist/scenario.hpp"

namespace qhist::cli {

enum ExitCode : int { kSuccess = 0, kValidation = 2, kNumerical = 3 };

enum class Format { Table, Json, Csv };

using Value = std::variant<std::string, double, std::int64_t, bool>;

struct Table {
    std::string name;
    std::vector<std::string> columns;
    std::vector<std::vector<Value>> rows;
};

struct Section {
    std::string title;
    std::vector<std::pair<std::string, Value>> fields;
    std::vector<Table> tables;
    bool csv_fields = true;  // false: CSV carries only the tables

    void add(std::string key, Value v) { fields.emplace_back(std::move(key), std::move(v)); }
};

struct RunResult {
    std::string command;
    std::vector<Section> sections;
    int exit_code = kSuccess;
    std::string error;
};

struct CommandRequest {
    std::string command;
    std::uint64_t cap = default_enumeration_cap;
    double tol = tol::structural;
    std::vector<std::size_t> trace_out;
    std::optional<Subsystem> subsystem;
    LogBase base = LogBase::E;
    std::optional<ChshMode> mode;
    std::size_t beta2 = 0;
    std::uint64_t samples = 0;
    std::uint64_t seed = 0;
};

// ---------------------------------------------------------------------------
// Rendering
// ---------------------------------------------------------------------------

// Table mode: 7 digits after the decimal point, scientific notation with 7
// significant digits for magnitudes outside [1e-4, 1e7).
inline std::string format_number(double x) {
    if (x == 0) return "0";
    const double a = std::abs(x);
    if (a < 1e-4 || a >= 1e7) return fmt::format("{:.6e}", x);
    return fmt::format("{:.7f}", x);
}

inline std::string render_value(const Value& v, Format f) {
    return std::visit(
        [&](const auto& x) -> std::string {
            using T = std::decay_t<decltype(x)>;
            if constexpr (std::is_same_v<T, std::string>) return x;
            else if constexpr (std::is_same_v<T, bool>) return x ? "true" : "false";
            else if constexpr (std::is_same_v<T, std::int64_t>) return std::to_string(x);
            else return f == Format::Table ? format_number(x) : fmt::format("{}", x);
        },
        v);
}

inline nlohmann::ordered_json to_json_value(const Value& v) {
    return std::visit([](const auto& x) { return nlohmann::ordered_json(x); }, v);
}

inline std::string csv_escape(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) out += c == '"' ? std::string("\"\"") : std::string(1, c);
    return out + "\"";
}

inline std::string render(const RunResult& r, Format f) {
    std::string out;
    if (f == Format::Json) {
        nlohmann::ordered_json j;
        j["command"] = r.command;
        j["exit_code"] = r.exit_code;
        if (!r.error.empty()) j["error"] = r.error;
        j["sections"] = nlohmann::ordered_json::array();
        for (const auto& s : r.sections) {
            nlohmann::ordered_json sj;
            sj["title"] = s.title;
            nlohmann::ordered_json fields = nlohmann::ordered_json::object();
            for (const auto& [k, v] : s.fields) fields[k] = to_json_value(v);
            sj["fields"] = fields;
            nlohmann::ordered_json tables = nlohmann::ordered_json::object();
            for (const auto& t : s.tables) {
                auto rows = nlohmann::ordered_json::array();
                for (const auto& row : t.rows) {
                    nlohmann::ordered_json rj;
                    for (std::size_t c = 0; c < t.columns.size(); ++c) rj[t.columns[c]] = to_json_value(row[c]);
                    rows.push_back(rj);
                }
                tables[t.name] = rows;
            }
            sj["tables"] = tables;
            j["sections"].push_back(sj);
        }
        return j.dump(2) + "\n";
    }

    if (f == Format::Csv) {
        bool first_block = true;
        auto block = [&](const std::vector<std::string>& header, const std::vector<std::vector<std::string>>& rows) {
            if (!first_block) out += "\n";
            first_block = false;
            for (std::size_t c = 0; c < header.size(); ++c) out += (c ? "," : "") + csv_escape(header[c]);
            out += "\n";
            for (const auto& row : rows) {
                for (std::size_t c = 0; c < row.size(); ++c) out += (c ? "," : "") + csv_escape(row[c]);
                out += "\n";
            }
        };
        if (!r.error.empty()) block({"error"}, {{r.error}});
        for (const auto& s : r.sections) {
            if (s.csv_fields && !s.fields.empty()) {
                std::vector<std::vector<std::string>> rows;
                for (const auto& [k, v] : s.fields) rows.push_back({k, render_value(v, f)});
                block({"key", "value"}, rows);
            }
            for (const auto& t : s.tables) {
                std::vector<std::vector<std::string>> rows;
                for (const auto& row : t.rows) {
                    std::vector<std::string> cells;
                    for (const auto& v : row) cells.push_back(render_value(v, f));
                    rows.push_back(cells);
                }
                block(t.columns, rows);
            }
        }
        return out;
    }

    if (!r.error.empty()) out += "error: " + r.error + "\n";
    for (std::size_t si = 0; si < r.sections.size(); ++si) {
        const auto& s = r.sections[si];
        if (si) out += "\n";
        out += "== " + s.title + " ==\n";
        std::size_t width = 0;
        for (const auto& [k, v] : s.fields) width = std::max(width, k.size());
        for (const auto& [k, v] : s.fields) out += fmt::format("{:<{}}  {}\n", k, width, render_value(v, f));
        for (const auto& t : s.tables) {
            out += "\n" + t.name + "\n";
            std::vector<std::size_t> widths;
            for (const auto& c : t.columns) widths.push_back(c.size());
            std::vector<std::vector<std::string>> cells;
            for (const auto& row : t.rows) {
                std::vector<std::string> line;
                for (std::size_t c = 0; c < row.size(); ++c) {
                    line.push_back(render_value(row[c], f));
                    widths[c] = std::max(widths[c], line.back().size());
                }
                cells.push_back(line);
            }
            auto emit = [&](const std::vector<std::string>& line) {
                std::string l;
                for (std::size_t c = 0; c < line.size(); ++c) l += fmt::format("{}{:>{}}", c ? "  " : "  ", line[c], widths[c]);
                out += l + "\n";
            };
            emit(t.columns);
            for (const auto& line : cells) emit(line);
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Commands
// ---------------------------------------------------------------------------

namespace detail {

inline std::vector<Value> sequence_cells(const OutcomeSequence& alpha) {
    std::vector<Value> cells;
    for (const auto a : alpha) cells.emplace_back(static_cast<std::int64_t>(a));
    return cells;
}

inline std::vector<std::string> sequence_columns(std::size_t n) {
    std::vector<std::string> cols;
    for (std::size_t i = 1; i <= n; ++i) cols.push_back("slot_" + std::to_string(i));
    return cols;
}

inline Table history_table(const std::string& name, const HistoryVector& hv, const std::vector<HistoryEntry>& entries,
                           const std::vector<std::uint64_t>* sample_counts = nullptr, std::uint64_t shots = 0) {
    Table t{name, sequence_columns(hv.slot_count()), {}};
    t.columns.insert(t.columns.end(), {"probability", "amplitude_re", "amplitude_im"});
    if (sample_counts) t.columns.push_back("sampled_frequency");
    const auto counts = hv.outcome_counts();
    for (const auto& e : entries) {
        auto row = sequence_cells(e.outcomes);
        row.emplace_back(std::norm(e.amplitude));
        row.emplace_back(e.amplitude.real());
        row.emplace_back(e.amplitude.imag());
        if (sample_counts) row.emplace_back(static_cast<double>((*sample_counts)[sequence_index(e.outcomes, counts)]) / static_cast<double>(shots));
        t.rows.push_back(std::move(row));
    }
    return t;
}

inline std::string join_labels(const LabeledSpace& s) {
    std::string out;
    for (const auto& l : s.labels()) out += (out.empty() ? "" : ",") + l;
    return out;
}

inline std::string describe(const OutcomeSequence& a) { return format_sequence(a); }

inline Section vector_section(const ScenarioFile& sc, const CommandRequest& req, const std::string& title, int& exit_code) {
    const HistoryVector hv = build_history_vector(sc.history_spec(), req.cap);
    const auto content = hv.content();
    Section s{title, {}, {}, false};
    s.add("slots", static_cast<std::int64_t>(hv.slot_count()));
    s.add("dimension", static_cast<std::int64_t>(sc.dimension));
    s.add("history_content_size", static_cast<std::int64_t>(content.size()));
    s.add("norm", hv.norm());
    s.tables.push_back(history_table("history content", hv, content));
    if (std::abs(hv.norm() - 1.0) > tol::structural) exit_code = kNumerical;
    return s;
}

inline Section chsh_section(const ScenarioFile& sc, ChshMode mode) {
    const auto setup = sc.chsh_setup();
    const bool flip = mode == ChshMode::PerPair && sc.chsh->flip_a1;
    Section s{"chsh " + to_string(mode), {}, {}, true};
    auto put = [&](const std::string& prefix, const CHSHReport& r) {
        s.add(prefix + "E(A1,A2)", r.e[0]);
        s.add(prefix + "E(A1,B2)", r.e[1]);
        s.add(prefix + "E(B1,A2)", r.e[2]);
        s.add(prefix + "E(B1,B2)", r.e[3]);
        s.add(prefix + "S", r.s);
    };
    s.add("mode", to_string(mode));
    s.add("a1_flipped", flip);
    CHSHReport report = chsh_evaluate(setup, mode);
    if (flip) {
        put("unflipped_", report);
        auto flipped = setup;
        flipped.a1 = setup.a1.negated();
        report = chsh_evaluate(flipped, mode);
    }
    put("", report);
    s.add("violated", report.violated);
    if (!report.tables.empty()) {
        Table t{"joint probabilities", {"pair", "p(+1,+1)", "p(+1,-1)", "p(-1,+1)", "p(-1,-1)", "sum", "average"}, {}};
        for (const auto& jt : report.tables) t.rows.push_back({jt.first + "," + jt.second, jt.p[0], jt.p[1], jt.p[2], jt.p[3], jt.sum(), jt.average()});
        s.tables.push_back(std::move(t));
    }
    return s;
}

inline Section lg_section(const ScenarioFile& sc, const CommandRequest& req, int& exit_code) {
    const auto sched = sc.lg_schedule();
    const auto r = lg_evaluate(sched, req.tol);
    const auto dec = lg_interference_decomposition(sched);
    Section s{"leggett-garg", {}, {}, true};
    s.add("C12", r.c12);
    s.add("C13", r.c13);
    s.add("C23", r.c23);
    s.add("K", r.k);
    s.add("K_decomposed", dec.k_decomposed);
    s.add("decomposition_residual", dec.residual);
    s.add("max_interference", r.max_interference);
    s.add("consistent", r.consistent);
    s.add("violated", r.violated);
    Table t{"interference terms", {"term", "(+1,+1)", "(+1,-1)", "(-1,+1)", "(-1,-1)"}, {}};
    t.rows.push_back({std::string("I(*,q2,q3)"), r.interference_first[0], r.interference_first[1], r.interference_first[2], r.interference_first[3]});
    t.rows.push_back({std::string("I(q1,*,q3)"), r.interference_middle[0], r.interference_middle[1], r.interference_middle[2], r.interference_middle[3]});
    s.tables.push_back(std::move(t));
    if (dec.residual > 1e-9 || dec.max_last_interference > tol::arithmetic) exit_code = kNumerical;
    return s;
}

}  // namespace detail

inline RunResult run_command(const ScenarioFile& sc, const CommandRequest& req) {
    RunResult r{req.command, {}, kSuccess, {}};
    try {
        const auto& cmd = req.command;
        if (cmd == "vector") {
            r.sections.push_back(detail::vector_section(sc, req, "history vector", r.exit_code));
        } else if (cmd == "probs") {
            const HistoryVector hv = build_history_vector(sc.history_spec(), req.cap);
            std::vector<HistoryEntry> all;
            const auto counts = hv.outcome_counts();
            for (std::uint64_t i = 0; i < hv.amplitudes().size(); ++i) all.push_back({sequence_at(i, counts), hv.amplitudes()[i]});
            double total = 0;
            for (const auto& e : all) total += std::norm(e.amplitude);
            Section s{"sequence probabilities", {}, {}, false};
            s.add("total_probability", total);
            std::vector<std::uint64_t> sampled;
            if (req.samples > 0) {
                sampled = sample_histories(hv, req.samples, req.seed);
                s.add("samples", static_cast<std::int64_t>(req.samples));
                s.add("seed", static_cast<std::int64_t>(req.seed));
            }
            s.tables.push_back(detail::history_table("probabilities", hv, all, req.samples > 0 ? &sampled : nullptr, req.samples));
            r.sections.push_back(std::move(s));
            if (std::abs(total - 1.0) > tol::structural) r.exit_code = kNumerical;
        } else if (cmd == "consistency") {
            const auto rep = is_consistent_set(sc.history_spec(), req.tol, req.cap);
            Section s{"consistency", {}, {}, true};
            s.add("consistent", rep.consistent);
            s.add("tolerance", req.tol);
            s.add("max_interference", rep.max_interference);
            if (rep.witness) {
                s.add("witness_alpha", detail::describe(rep.witness->first));
                s.add("witness_beta", detail::describe(rep.witness->second));
            }
            r.sections.push_back(std::move(s));
        } else if (cmd == "marginals") {
            const auto rep = marginal_checks(sc.history_spec(), req.cap);
            Section s{"sum rules", {}, {}, true};
            s.add("total_probability", rep.total_probability);
            s.add("max_amplitude_residual", rep.max_amplitude_residual);
            s.add("last_slot_probability_residual", rep.last_slot_probability_residual);
            s.add("last_slot_scalar_amplitude_residual", rep.last_slot_scalar_amplitude_residual);
            Table t{"per slot", {"slot", "amplitude_residual", "probability_residual"}, {}};
            for (std::size_t i = 0; i < rep.amplitude_residuals.size(); ++i) {
                const double pr = i < rep.intermediate_probability_residuals.size() ? rep.intermediate_probability_residuals[i] : rep.last_slot_probability_residual;
                t.rows.push_back({static_cast<std::int64_t>(i + 1), rep.amplitude_residuals[i], pr});
            }
            s.tables.push_back(std::move(t));
            r.sections.push_back(std::move(s));
            if (std::abs(rep.total_probability - 1.0) > tol::structural || rep.max_amplitude_residual > tol::structural ||
                rep.last_slot_probability_residual > tol::structural)
                r.exit_code = kNumerical;
        } else if (cmd == "entropy") {
            if (req.trace_out.empty() && !req.subsystem) throw ValidationError("entropy needs --trace-out SLOTS or --subsystem A|B");
            HistoryDensityMatrix rho = sc.composite ? pure_density(composite_history_state(sc.composite_spec(), req.cap))
                                                    : pure_density(build_history_vector(sc.history_spec(), req.cap));
            if (req.subsystem) {
                if (!sc.composite) throw ValidationError("--subsystem requires a composite block in the scenario");
                rho = trace_factor(rho, *req.subsystem == Subsystem::A ? Subsystem::B : Subsystem::A);
            }
            if (!req.trace_out.empty()) {
                std::vector<std::size_t> keep;
                for (const auto s : rho.space.slot_numbers())
                    if (std::ranges::find(req.trace_out, s) == req.trace_out.end()) keep.push_back(s);
                for (const auto s : req.trace_out)
                    if (s == 0 || s > sc.slot_count()) throw ValidationError("--trace-out: slot " + std::to_string(s) + " out of range");
                if (keep.empty()) throw ValidationError("--trace-out would trace every slot");
                rho = time_reduce(rho, keep);
            }
            rho.validate();
            Section s{"entropy", {}, {}, true};
            s.add("remaining_axes", detail::join_labels(rho.space));
            s.add("base", std::string(req.base == LogBase::E ? "e" : "2"));
            s.add("entropy", von_neumann_entropy(rho, req.base));
            s.add("purity", rho.purity());
            Table t{"spectrum", {"index", "eigenvalue"}, {}};
            const auto spec = hermitian_eig(rho.matrix);
            for (std::size_t k = spec.values.size(); k-- > 0;) t.rows.push_back({static_cast<std::int64_t>(spec.values.size() - 1 - k), spec.values[k]});
            s.tables.push_back(std::move(t));
            r.sections.push_back(std::move(s));
        } else if (cmd == "protocol-check") {
            const auto spec = sc.history_spec();
            const auto rep = verify_protocol_equivalence(spec, req.tol, req.cap);
            const auto run = run_protocol(spec, req.cap);
            Section s{"protocol equivalence", {}, {}, true};
            s.add("pass", rep.pass);
            s.add("tolerance", req.tol);
            s.add("max_residual", rep.max_residual);
            s.add("worst_sequence", detail::describe(rep.worst));
            s.add("max_step_norm_defect", rep.max_step_norm_defect);
            Table t{"trace", {"step", "registers", "norm"}, {}};
            for (const auto& st : run.trace.steps) t.rows.push_back({st.label, static_cast<std::int64_t>(st.registers), st.state.norm()});
            s.tables.push_back(std::move(t));
            r.sections.push_back(std::move(s));
            if (!rep.pass) r.exit_code = kNumerical;
        } else if (cmd == "lg") {
            r.sections.push_back(detail::lg_section(sc, req, r.exit_code));
        } else if (cmd == "chsh") {
            if (!sc.chsh) throw ValidationError("chsh requires a chsh block in the scenario");
            const ChshMode mode = req.mode.value_or(sc.chsh->mode);
            auto s = detail::chsh_section(sc, mode);
            r.sections.push_back(std::move(s));
            const auto rep = chsh_evaluate(sc.chsh_setup(), mode);
            for (const auto& t : rep.tables)
                if (std::abs(t.sum() - 1.0) > tol::structural) r.exit_code = kNumerical;
        } else if (cmd == "intermediate") {
            const auto spec = sc.history_spec();
            if (spec.slot_count() != 2) throw ValidationError("intermediate needs a two-slot scenario");
            const auto& b2 = spec.observable(2);
            const auto st = two_time_intermediate_state(spec, b2, req.beta2);
            Section s{"intermediate state", {}, {}, true};
            s.add("beta2", static_cast<std::int64_t>(req.beta2));
            s.add("final_observable", b2.name);
            s.add("normalization", st.normalization);
            Table amp{"state", {"index", "re", "im"}, {}};
            for (Eigen::Index k = 0; k < st.state.size(); ++k) amp.rows.push_back({static_cast<std::int64_t>(k), st.state(k).real(), st.state(k).imag()});
            Table abl{"abl probabilities", {"alpha_1", "probability"}, {}};
            for (std::size_t k = 0; k < st.abl_probabilities.size(); ++k) abl.rows.push_back({static_cast<std::int64_t>(k), st.abl_probabilities[k]});
            s.tables.push_back(std::move(amp));
            s.tables.push_back(std::move(abl));
            r.sections.push_back(std::move(s));
        } else {
            throw ValidationError("unknown command '" + cmd + "'");
        }
    } catch (const NumericalError& e) {
        r.exit_code = kNumerical;
        r.error = e.what();
    } catch (const ValidationError& e) {
        r.exit_code = kValidation;
        r.error = e.what();
    }
    return r;
}

// Built-in demonstrations. `builtins` maps scenario names to JSON text.
inline RunResult run_demo(const std::string& name, const std::map<std::string, std::string>& builtins, const CommandRequest& req) {
    RunResult r{"demo " + name, {}, kSuccess, {}};
    auto scenario = [&](const std::string& n) {
        const auto it = builtins.find(n);
        if (it == builtins.end()) throw ValidationError("no built-in scenario '" + n + "'");
        return parse_scenario_text(it->second, n);
    };
    try {
        if (name == "xz-example") {
            r.sections.push_back(detail::vector_section(scenario("xz-example"), req, "Z measured at t1 and t2", r.exit_code));
            r.sections.push_back(detail::vector_section(scenario("xz-example-x"), req, "X measured at t1 and t2", r.exit_code));
        } else if (name == "bell2-chsh") {
            const auto sc = scenario("bell2-chsh");
            r.sections.push_back(detail::vector_section(sc, req, "history vector (Z at t1 and t2)", r.exit_code));
            r.sections.push_back(detail::chsh_section(sc, ChshMode::FixedBasis));
            r.sections.push_back(detail::chsh_section(sc, ChshMode::PerPair));
        } else if (name == "precession-lg") {
            r.sections.push_back(detail::lg_section(scenario("precession-lg"), req, r.exit_code));
        } else {
            throw ValidationError("unknown demo '" + name + "' (available: xz-example, bell2-chsh, precession-lg)");
        }
    } catch (const NumericalError& e) {
        r.exit_code = kNumerical;
        r.error = e.what();
    } catch (const ValidationError& e) {
        r.exit_code = kValidation;
        r.error = e.what();
    }
    return r;
}

}  // namespace qhist::cli
