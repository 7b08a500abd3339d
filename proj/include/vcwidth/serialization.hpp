#pragma once

#include <charconv>
#include <cstddef>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <system_error>
#include <variant>
#include <vector>

#include <json.hpp>

#include "box_analysis.hpp"
#include "convex_geometry.hpp"
#include "crush.hpp"
#include "random_families.hpp"
#include "vc_combinatorics.hpp"

namespace vcwidth {

using Json = nlohmann::ordered_json;

class InputError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

namespace detail {

inline const Json& require(const Json& j, const char* key, const char* what) {
    if (!j.is_object() || !j.contains(key))
        throw InputError(std::string(what) + ": missing field \"" + key + "\"");
    return j.at(key);
}

inline std::vector<std::string> read_ids(const Json& j, const char* what) {
    if (!j.is_array()) throw InputError(std::string(what) + ": ids must be an array");
    std::vector<std::string> out;
    for (const auto& id : j) {
        if (id.is_string()) out.push_back(id.get<std::string>());
        else if (id.is_number_integer()) out.push_back(id.dump());
        else throw InputError(std::string(what) + ": ids must be strings or integers");
    }
    return out;
}

inline std::vector<double> read_numbers(const Json& j, const std::string& what) {
    if (!j.is_array()) throw InputError(what + ": expected an array of numbers");
    std::vector<double> out;
    out.reserve(j.size());
    for (const auto& x : j) {
        if (!x.is_number()) throw InputError(what + ": expected a number, found " + x.dump());
        out.push_back(x.get<double>());
    }
    return out;
}

inline std::string format_number(double x) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, res.ptr);
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') cur += '"', ++i;
            else if (c == '"') quoted = false;
            else cur += c;
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            cells.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur += c;
        }
    }
    cells.push_back(cur);
    for (auto& cell : cells) {
        const auto b = cell.find_first_not_of(" \t");
        const auto e = cell.find_last_not_of(" \t");
        cell = b == std::string::npos ? std::string() : cell.substr(b, e - b + 1);
    }
    return cells;
}

inline std::string csv_cell(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

}  // namespace detail

// --- PointSet -------------------------------------------------------------

inline Json to_json(const PointSet& p) {
    Json points = Json::array();
    for (std::size_t i = 0; i < p.size(); ++i) points.push_back(std::vector<double>(p.point(i).begin(), p.point(i).end()));
    return Json{{"dim", p.dim()}, {"points", std::move(points)}};
}

inline PointSet point_set_from_json(const Json& j) {
    const auto& dim = detail::require(j, "dim", "PointSet");
    if (!dim.is_number_unsigned() || dim.get<std::size_t>() == 0) throw InputError("PointSet: dim must be a positive integer");
    const auto& points = detail::require(j, "points", "PointSet");
    if (!points.is_array() || points.empty()) throw InputError("PointSet: points must be a nonempty array");
    std::vector<double> coords;
    for (std::size_t i = 0; i < points.size(); ++i) {
        const auto row = detail::read_numbers(points[i], "PointSet point " + std::to_string(i));
        if (row.size() != dim.get<std::size_t>())
            throw InputError("PointSet: point " + std::to_string(i) + " has length " + std::to_string(row.size()) +
                             ", expected " + std::to_string(dim.get<std::size_t>()));
        coords.insert(coords.end(), row.begin(), row.end());
    }
    return PointSet(dim.get<std::size_t>(), std::move(coords));
}

// --- Families -------------------------------------------------------------

inline Json to_json(const FunctionFamily& q) {
    Json values = Json::array();
    for (std::size_t r = 0; r < q.row_count(); ++r) values.push_back(std::vector<double>(q.row(r).begin(), q.row(r).end()));
    return Json{{"rows", q.row_ids()}, {"cols", q.col_ids()}, {"values", std::move(values)}};
}

inline FunctionFamily function_family_from_json(const Json& j) {
    auto rows = detail::read_ids(detail::require(j, "rows", "FunctionFamily"), "FunctionFamily rows");
    auto cols = detail::read_ids(detail::require(j, "cols", "FunctionFamily"), "FunctionFamily cols");
    const auto& values = detail::require(j, "values", "FunctionFamily");
    if (!values.is_array() || values.size() != rows.size())
        throw InputError("FunctionFamily: values must hold one array per row (" + std::to_string(rows.size()) + ")");
    std::vector<double> flat;
    for (std::size_t r = 0; r < values.size(); ++r) {
        const auto row = detail::read_numbers(values[r], "FunctionFamily row '" + rows[r] + "'");
        if (row.size() != cols.size())
            throw InputError("FunctionFamily: row '" + rows[r] + "' has " + std::to_string(row.size()) +
                             " values, expected " + std::to_string(cols.size()));
        flat.insert(flat.end(), row.begin(), row.end());
    }
    try {
        return FunctionFamily(std::move(rows), std::move(cols), std::move(flat));
    } catch (const std::exception& e) {
        throw InputError(e.what());
    }
}

inline char membership_char(Membership m) { return m == Membership::In ? '1' : m == Membership::Out ? '0' : '?'; }

inline Json to_json(const FuzzyFamily& f) {
    Json states = Json::array();
    for (std::size_t r = 0; r < f.row_count(); ++r) {
        std::string s;
        for (std::size_t c = 0; c < f.col_count(); ++c) s += membership_char(f(r, c));
        states.push_back(s);
    }
    return Json{{"rows", f.row_ids()}, {"cols", f.col_ids()}, {"states", std::move(states)}};
}

inline FuzzyFamily fuzzy_family_from_json(const Json& j) {
    auto rows = detail::read_ids(detail::require(j, "rows", "FuzzyFamily"), "FuzzyFamily rows");
    auto cols = detail::read_ids(detail::require(j, "cols", "FuzzyFamily"), "FuzzyFamily cols");
    const auto& states = detail::require(j, "states", "FuzzyFamily");
    if (!states.is_array() || states.size() != rows.size())
        throw InputError("FuzzyFamily: states must hold one string per row");
    std::vector<Membership> flat;
    for (std::size_t r = 0; r < states.size(); ++r) {
        if (!states[r].is_string()) throw InputError("FuzzyFamily: row '" + rows[r] + "' state is not a string");
        const auto s = states[r].get<std::string>();
        if (s.size() != cols.size()) throw InputError("FuzzyFamily: row '" + rows[r] + "' has the wrong number of states");
        for (std::size_t c = 0; c < s.size(); ++c) {
            switch (s[c]) {
                case '1': flat.push_back(Membership::In); break;
                case '0': flat.push_back(Membership::Out); break;
                case '?': flat.push_back(Membership::Unknown); break;
                default:
                    throw InputError("FuzzyFamily: invalid state '" + std::string(1, s[c]) + "' at row '" + rows[r] +
                                     "', column '" + cols[c] + "'");
            }
        }
    }
    try {
        return FuzzyFamily(std::move(rows), std::move(cols), std::move(flat));
    } catch (const std::exception& e) {
        throw InputError(e.what());
    }
}

inline Json to_json(const RandomFamily& rf) {
    Json atoms = Json::array();
    for (const auto& a : rf.atoms()) atoms.push_back(Json{{"weight", a.weight}, {"family", to_json(a.family)}});
    return Json{{"atoms", std::move(atoms)}};
}

inline RandomFamily random_family_from_json(const Json& j) {
    const auto& atoms = detail::require(j, "atoms", "RandomFamily");
    if (!atoms.is_array()) throw InputError("RandomFamily: atoms must be an array");
    std::vector<RandomAtom> out;
    for (const auto& a : atoms) {
        const auto& w = detail::require(a, "weight", "RandomFamily atom");
        if (!w.is_number()) throw InputError("RandomFamily: weight must be a number");
        out.push_back({w.get<double>(), function_family_from_json(detail::require(a, "family", "RandomFamily atom"))});
    }
    try {
        return RandomFamily(std::move(out));
    } catch (const std::exception& e) {
        throw InputError(e.what());
    }
}

/// CSV layout: header row holds a corner cell followed by the column ids;
/// each following row is a row id followed by its values.
inline FunctionFamily function_family_from_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    std::vector<std::string> cols;
    std::vector<std::string> rows;
    std::vector<double> values;
    bool header = true;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        auto cells = detail::split_csv_line(line);
        if (header) {
            if (cells.size() < 2) throw InputError("CSV: header needs a corner cell and at least one column id");
            cols.assign(cells.begin() + 1, cells.end());
            header = false;
            continue;
        }
        if (cells.size() != cols.size() + 1)
            throw InputError("CSV line " + std::to_string(line_no) + ": expected " + std::to_string(cols.size() + 1) +
                             " cells, found " + std::to_string(cells.size()));
        rows.push_back(cells[0]);
        for (std::size_t c = 1; c < cells.size(); ++c) {
            double v = 0.0;
            const auto& s = cells[c];
            const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
            if (res.ec != std::errc() || res.ptr != s.data() + s.size())
                throw InputError("CSV line " + std::to_string(line_no) + ": '" + s + "' is not a number (row '" +
                                 cells[0] + "', column '" + cols[c - 1] + "')");
            values.push_back(v);
        }
    }
    if (header) throw InputError("CSV: empty input");
    try {
        return FunctionFamily(std::move(rows), std::move(cols), std::move(values));
    } catch (const std::exception& e) {
        throw InputError(e.what());
    }
}

inline std::string to_csv(const FunctionFamily& q) {
    std::string out = "id";
    for (const auto& c : q.col_ids()) out += "," + detail::csv_cell(c);
    out += "\n";
    for (std::size_t r = 0; r < q.row_count(); ++r) {
        out += detail::csv_cell(q.row_ids()[r]);
        for (double v : q.row(r)) out += "," + detail::format_number(v);
        out += "\n";
    }
    return out;
}

// --- Results --------------------------------------------------------------

inline Json to_json(const Estimate& e) {
    return Json{{"value", e.value}, {"std_error", e.std_error}, {"samples", e.samples}, {"seed", e.seed}};
}

inline Json to_json(const VcReport& r) {
    Json j{{"index", r.index}, {"at_least", r.at_least}, {"cap", r.cap}};
    j["witness"] = r.witness ? Json(*r.witness) : Json(nullptr);
    return j;
}

inline Json to_json(const VcProfile& p) {
    Json points = Json::array();
    for (const auto& pt : p.points)
        points.push_back(Json{{"r", pt.r}, {"s", std::min(1.0, pt.r + p.eps)}, {"index", pt.report.index},
                              {"at_least", pt.report.at_least}});
    return Json{{"eps", p.eps},
                {"grid", p.grid},
                {"points", std::move(points)},
                {"max_index", p.max_index},
                {"max_at_least", p.max_at_least},
                {"note", "maximum over a grid of r; a lower bound for the supremum over r"}};
}

inline Json to_json(const BoxWitness& b) {
    Json selectors = Json::array();
    for (std::size_t w = 0; w < b.selectors.size(); ++w) selectors.push_back(Json{{"subset", w}, {"point", b.selectors[w]}});
    return Json{{"coords", b.coords}, {"thresholds", b.thresholds}, {"eps", b.eps}, {"selectors", std::move(selectors)}};
}

inline Json to_json(const CrushResult& c) {
    Json crossings = Json::array();
    for (const auto& [a, b] : c.crossings) crossings.push_back(Json::array({a, b}));
    return Json{{"body", to_json(c.body)}, {"kept", c.kept}, {"projected", c.projected}, {"crossings", std::move(crossings)}};
}

inline Json to_json(const CrushSupportReport& r) {
    return Json{{"directions", r.directions},
                {"upper_checked", r.upper_checked},
                {"lower_checked", r.lower_checked},
                {"violations", r.violations},
                {"max_equality_error", r.max_equality_error},
                {"gap", Json{{"min", r.min_gap}, {"mean", r.mean_gap}, {"max", r.max_gap}}}};
}

inline std::vector<std::string> tuple_labels(const FunctionFamily& q, const std::vector<std::size_t>& tuple) {
    std::vector<std::string> out;
    for (auto c : tuple) out.push_back(q.col_ids()[c]);
    return out;
}

inline Json to_json(const GrowthPoint& g, const FunctionFamily& q) {
    return Json{{"n", g.n},
                {"value", g.estimate.value},
                {"std_error", g.estimate.std_error},
                {"mode", to_string(g.mode)},
                {"tuple", tuple_labels(q, g.tuple)},
                {"evaluations", g.evaluations}};
}

inline Json to_json(const DichotomyReport& rep, const FunctionFamily& q) {
    Json curve = Json::array();
    Json series = Json::array();
    for (std::size_t i = 0; i < rep.curve.size(); ++i) {
        curve.push_back(to_json(rep.curve[i], q));
        const double n = static_cast<double>(rep.curve[i].n);
        series.push_back(Json{{"x", rep.curve[i].n}, {"y", rep.ratio(i)}, {"err", rep.curve[i].estimate.std_error / n}});
    }
    Json boxes = Json::array();
    for (const auto& b : rep.boxes)
        boxes.push_back(Json{{"d", b.d}, {"eps", b.eps}, {"found", b.found}, {"tuple", tuple_labels(q, b.tuple)}});
    Json vc = Json::array();
    if (rep.vc_at_eps_star)
        for (const auto& pt : rep.vc_at_eps_star->points)
            vc.push_back(Json{{"r", pt.r}, {"index", pt.report.index}, {"at_least", pt.report.at_least}});
    return Json{{"curve", std::move(curve)},
                {"C", rep.C},
                {"eps_star", rep.eps_star},
                {"vc_at_eps_star", std::move(vc)},
                {"boxes", std::move(boxes)},
                {"tail_slope", rep.tail_slope},
                {"verdict", to_string(rep.verdict)},
                {"heuristic", true},
                {"series", std::move(series)}};
}

// --- Loading --------------------------------------------------------------

/// Several named families sharing one shape, for connective expressions:
/// {"families": {"phi": <FunctionFamily>, ...}}.
using NamedFamilies = std::map<std::string, FunctionFamily>;

using LoadedInput = std::variant<PointSet, FunctionFamily, FuzzyFamily, RandomFamily, NamedFamilies>;

inline LoadedInput parse_input(const std::string& text, const std::string& format) {
    if (format == "csv") return function_family_from_csv(text);
    if (format != "json") throw InputError("unknown input format '" + format + "' (expected json or csv)");
    Json j;
    try {
        j = Json::parse(text);
    } catch (const Json::parse_error& e) {
        throw InputError(std::string("JSON parse error: ") + e.what());
    }
    if (!j.is_object()) throw InputError("input must be a JSON object");
    try {
        if (j.contains("dim")) return point_set_from_json(j);
        if (j.contains("atoms")) return random_family_from_json(j);
        if (j.contains("states")) return fuzzy_family_from_json(j);
        if (j.contains("values")) return function_family_from_json(j);
        if (j.contains("families")) {
            NamedFamilies out;
            if (!j["families"].is_object()) throw InputError("families must be an object");
            for (const auto& [name, fam] : j["families"].items()) out.emplace(name, function_family_from_json(fam));
            if (out.empty()) throw InputError("families is empty");
            return out;
        }
    } catch (const InputError&) {
        throw;
    } catch (const std::exception& e) {
        throw InputError(e.what());
    }
    throw InputError("unrecognized input: expected a PointSet, FunctionFamily, FuzzyFamily, RandomFamily or families object");
}

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline LoadedInput load_input(const std::string& path, const std::string& format) {
    return parse_input(read_file(path), format);
}

}  // namespace vcwidth
