#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "box_analysis.hpp"
#include "convex_geometry.hpp"
#include "crush.hpp"
#include "random_families.hpp"
#include "serialization.hpp"
#include "vc_combinatorics.hpp"
#include "version.hpp"

namespace vcwidth {

struct RunConfig {
    std::string command;
    std::string input;
    std::string format = "json";
    std::string output;
    std::uint64_t seed = 0;
    std::uint64_t samples = 100000;
    double eps = 0.1;
    std::size_t d = 1;
    std::size_t nmax = 6;
    std::uint64_t budget = 100000;
    bool strict = false;
    unsigned threads = 0;
    double c = 0.5;
    double r = 0.0;
    double s = 1.0;
    std::size_t n = 0;
    std::size_t cap = 0;
    std::size_t grid = 20;
    std::size_t tuples = 20;
    bool prune = false;
    std::vector<double> direction;
    std::string expr;

    GaussianSamplerConfig sampler() const { return {seed, samples, true}; }
};

inline const std::vector<std::string>& command_names() {
    static const std::vector<std::string> names{"width",    "vc-index",    "vc-profile",    "shatter",
                                                "box-find", "inflate",     "bound-check",   "crush",
                                                "positive-part", "connective", "expect", "analyze"};
    return names;
}

inline Json config_json(const RunConfig& cfg) {
    return Json{{"input", cfg.input},       {"format", cfg.format},   {"seed", cfg.seed},
                {"samples", cfg.samples},   {"eps", cfg.eps},         {"d", cfg.d},
                {"nmax", cfg.nmax},         {"budget", cfg.budget},   {"strict", cfg.strict},
                {"threads", cfg.threads},   {"c", cfg.c},             {"r", cfg.r},
                {"s", cfg.s},               {"n", cfg.n},             {"cap", cfg.cap},
                {"grid", cfg.grid},         {"tuples", cfg.tuples},   {"prune", cfg.prune},
                {"direction", cfg.direction}, {"expr", cfg.expr},     {"output", cfg.output}};
}

struct CommandOutcome {
    Json result;
    int exit_code = 0;  // 0 success, 2 a mathematical check failed
};

/// Raised for bad flags or inputs of the wrong kind; maps to exit code 1.
class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

namespace detail {

template <typename T>
const T& expect_input(const LoadedInput& in, const char* command, const char* kind) {
    if (const auto* p = std::get_if<T>(&in)) return *p;
    throw UsageError(std::string(command) + ": input must be a " + kind);
}

inline FuzzyFamily fuzzy_input(const LoadedInput& in, const RunConfig& cfg, Json& slice) {
    if (const auto* f = std::get_if<FuzzyFamily>(&in)) {
        slice = nullptr;
        return *f;
    }
    if (const auto* q = std::get_if<FunctionFamily>(&in)) {
        slice = Json{{"r", cfg.r}, {"s", cfg.s}};
        return slice_family(*q, cfg.r, cfg.s);
    }
    throw UsageError(cfg.command + ": input must be a FunctionFamily or FuzzyFamily");
}

inline std::size_t distinct_points(const PointSet& p) {
    std::set<std::vector<double>> seen;
    for (std::size_t i = 0; i < p.size(); ++i) seen.emplace(p.point(i).begin(), p.point(i).end());
    return seen.size();
}

inline Json check(const std::string& name, bool holds, double lhs, double rhs) {
    return Json{{"name", name}, {"holds", holds}, {"lhs", lhs}, {"rhs", rhs}};
}

inline std::vector<double> resolved_direction(const RunConfig& cfg, std::size_t dim) {
    if (cfg.direction.empty()) {
        std::vector<double> e(dim, 0.0);
        e[0] = 1.0;
        return e;
    }
    if (cfg.direction.size() != dim)
        throw UsageError("--direction has " + std::to_string(cfg.direction.size()) + " entries, expected " + std::to_string(dim));
    const double norm = std::sqrt(dot(cfg.direction, cfg.direction));
    if (!(norm > 0.0)) throw UsageError("--direction must be nonzero");
    std::vector<double> u = cfg.direction;
    for (double& x : u) x /= norm;
    return u;
}

}  // namespace detail

inline CommandOutcome run_command(const RunConfig& cfg, const LoadedInput& in) {
    const auto& name = cfg.command;
    const auto sampler = cfg.sampler();
    CommandOutcome out;

    if (name == "width") {
        const auto& p = detail::expect_input<PointSet>(in, "width", "PointSet");
        out.result = Json{{"dim", p.dim()}, {"points", p.size()}, {"estimate", to_json(gaussian_mean_width(p, sampler))}};
    } else if (name == "vc-index") {
        Json slice;
        const auto f = detail::fuzzy_input(in, cfg, slice);
        out.result = Json{{"slice", slice}, {"report", to_json(vc_index(f, cfg.cap))}};
    } else if (name == "vc-profile") {
        const auto& q = detail::expect_input<FunctionFamily>(in, "vc-profile", "FunctionFamily");
        const auto profile = vc_profile(q, cfg.eps, cfg.grid, cfg.cap);
        out.result = to_json(profile);
        Json series = Json::array();
        for (const auto& pt : profile.points) series.push_back(Json{{"x", pt.r}, {"y", pt.report.index}, {"err", 0.0}});
        out.result["series"] = std::move(series);
    } else if (name == "shatter") {
        Json slice;
        const auto f = detail::fuzzy_input(in, cfg, slice);
        const auto vc = vc_index(f);
        Json values = Json::array();
        Json series = Json::array();
        const std::size_t lo = cfg.n ? cfg.n : 0;
        const std::size_t hi = cfg.n ? cfg.n : f.col_count();
        if (hi > f.col_count()) throw UsageError("shatter: --n exceeds the number of columns");
        bool sauer_ok = true;
        for (std::size_t k = lo; k <= hi; ++k) {
            const auto res = shatter_function(f, k);
            Json row{{"n", k}, {"count", res.count}, {"witness", detail::mask_labels(f, [&] {
                                                          std::uint64_t m = 0;
                                                          for (auto c : res.witness) m |= std::uint64_t{1} << c;
                                                          return m;
                                                      }())}};
            if (!vc.at_least) {
                const auto bound = sauer_polynomial(vc.index, k);
                row["sauer_bound"] = bound;
                sauer_ok = sauer_ok && res.count <= bound;
            }
            values.push_back(std::move(row));
            series.push_back(Json{{"x", k}, {"y", res.count}, {"err", 0.0}});
        }
        out.result = Json{{"slice", slice}, {"vc_index", to_json(vc)}, {"values", std::move(values)},
                          {"sauer_holds", sauer_ok}, {"series", std::move(series)}};
        if (!sauer_ok) out.exit_code = 2;
    } else if (name == "box-find") {
        const auto& p = detail::expect_input<PointSet>(in, "box-find", "PointSet");
        const auto box = find_box(p, cfg.d, cfg.eps, cfg.strict);
        out.result = Json{{"found", box.has_value()}, {"witness", box ? to_json(*box) : Json(nullptr)}};
        if (box) out.result["verified"] = verify_box(p, *box);
    } else if (name == "inflate") {
        const auto& p = detail::expect_input<PointSet>(in, "inflate", "PointSet");
        const double vol = inflated_volume(p, cfg.c);
        const double n = static_cast<double>(p.dim());
        out.result = Json{{"c", cfg.c}, {"volume", vol}, {"cube_volume", std::pow(cfg.c, n)},
                          {"measure_width_bound", measure_width_bound(p, cfg.c)}};
        if (cfg.d <= p.dim()) {
            const double thr = vcsbox_threshold(p.dim(), cfg.d, cfg.c, cfg.eps);
            out.result["vcsbox"] = Json{{"d", cfg.d}, {"eps", cfg.eps}, {"threshold", thr}, {"exceeds", vol > thr}};
        }
    } else if (name == "bound-check") {
        const auto& p = detail::expect_input<PointSet>(in, "bound-check", "PointSet");
        const auto est = gaussian_mean_width(p, sampler);
        const double slack = 4.0 * est.std_error;
        const std::size_t n = p.dim();
        Json checks = Json::array();
        if (n <= inflated_volume_max_dim) {
            const double b = measure_width_bound(p, cfg.c);
            checks.push_back(detail::check("width <= measure bound", est.value <= b + slack, est.value, b));
        }
        const double card = cardinality_width_bound(n, detail::distinct_points(p));
        checks.push_back(detail::check("width <= cardinality bound", est.value <= card + slack, est.value, card));
        if (const auto box = find_box(p, n, cfg.eps)) {
            const double lower = box->eps * static_cast<double>(n) * std::sqrt(2.0 / std::numbers::pi);
            checks.push_back(detail::check("full box implies width", est.value >= lower - slack, est.value, lower));
        }
        if (n <= inflated_volume_max_dim && cfg.d <= n) {
            const double vol = inflated_volume(p, cfg.c);
            const double thr = vcsbox_threshold(n, cfg.d, cfg.c, cfg.eps);
            if (vol > thr) {
                const bool found = find_box(p, cfg.d, cfg.eps, true).has_value();
                checks.push_back(detail::check("volume implies strict box", found, vol, thr));
            }
        }
        bool all = true;
        for (const auto& c : checks) all = all && c["holds"].get<bool>();
        out.result = Json{{"estimate", to_json(est)}, {"checks", std::move(checks)}, {"all_hold", all}};
        if (!all) out.exit_code = 2;
    } else if (name == "crush") {
        const auto& p = detail::expect_input<PointSet>(in, "crush", "PointSet");
        const auto u = detail::resolved_direction(cfg, p.dim());
        const auto res = crush_direction(p, u);
        const auto before = summarize(symmetrized_width_samples(p, u, sampler), sampler.seed);
        const auto after = summarize(symmetrized_width_samples(res.body, u, sampler), sampler.seed);
        out.result = Json{{"direction", u}, {"crush", to_json(res)}, {"width_before", to_json(before)},
                          {"width_after", to_json(after)}};
        bool ok = after.value <= before.value + 1e-9;
        std::vector<double> neg(u);
        for (double& x : neg) x = -x;
        if (support(p, neg) >= 0.0) {
            const auto rep = check_crush_support(p, u, res, sampler);
            out.result["support_check"] = to_json(rep);
            ok = ok && rep.ok();
        }
        out.result["all_hold"] = ok;
        if (!ok) out.exit_code = 2;
    } else if (name == "positive-part") {
        const auto& p = detail::expect_input<PointSet>(in, "positive-part", "PointSet");
        const auto body = positive_part(p, cfg.prune);
        const auto a = width_samples(p, sampler);
        const auto b = width_samples(body, sampler);
        std::vector<double> diff(a.size());
        for (std::size_t i = 0; i < a.size(); ++i) diff[i] = a[i] - b[i];
        const auto d = summarize(diff, sampler.seed);
        const bool ok = d.value >= -4.0 * d.std_error;
        out.result = Json{{"body", to_json(body)},
                          {"width_before", to_json(summarize(a, sampler.seed))},
                          {"width_after", to_json(summarize(b, sampler.seed))},
                          {"difference", to_json(d)},
                          {"all_hold", ok}};
        if (!ok) out.exit_code = 2;
    } else if (name == "connective") {
        const auto& fams = detail::expect_input<NamedFamilies>(in, "connective", "families object");
        if (cfg.expr.empty()) throw UsageError("connective: --expr is required");
        const auto expr = ConnectiveExpr::parse(cfg.expr);
        out.result = Json{{"expr", expr.to_string()}, {"family", to_json(apply_connective(expr, fams))}};
    } else if (name == "expect") {
        const auto& rf = detail::expect_input<RandomFamily>(in, "expect", "RandomFamily");
        const auto& shape = rf.shape();
        bool crisp = true;
        for (const auto& a : rf.atoms()) crisp = crisp && a.family.is_crisp();
        const auto mean = crisp ? probability_of_relation(rf) : expectation(rf);
        const std::size_t n = cfg.n ? cfg.n : std::min<std::size_t>(3, shape.col_count());
        SplitMix64 rng(mix64(cfg.seed) ^ 0x243f6a8885a308d3ULL);
        std::vector<std::vector<std::size_t>> tuples(cfg.tuples, std::vector<std::size_t>(n));
        for (auto& t : tuples)
            for (auto& x : t) x = static_cast<std::size_t>(rng.below(shape.col_count()));
        const auto rep = expectation_width_check(rf, tuples, sampler);
        Json checks = Json::array();
        for (const auto& t : rep.tuples)
            checks.push_back(Json{{"tuple", tuple_labels(shape, t.tuple)}, {"lhs", t.lhs}, {"rhs", t.rhs},
                                  {"min_slack", t.min_slack}, {"violations", t.violations}});
        out.result = Json{{"expectation", to_json(mean)},
                          {"probability_map", crisp},
                          {"width_check", Json{{"tuple_length", n}, {"tuples", std::move(checks)}, {"min_slack", rep.min_slack},
                                               {"max_slack", rep.max_slack}, {"violations", rep.violations}}},
                          {"all_hold", rep.ok()}};
        if (!rep.ok()) out.exit_code = 2;
    } else if (name == "analyze") {
        const auto& q = detail::expect_input<FunctionFamily>(in, "analyze", "FunctionFamily");
        const auto rep = classify_family(q, cfg.nmax, sampler, cfg.budget);
        out.result = to_json(rep, q);
    } else {
        throw UsageError("unknown command '" + name + "'");
    }
    return out;
}

/// Report envelope with stable key order; wall_clock_seconds comes last and is
/// the only field that varies between identical runs.
inline Json make_report(const RunConfig& cfg, const CommandOutcome& outcome, double wall_clock_seconds) {
    return Json{{"command", cfg.command},
                {"version", version},
                {"config", config_json(cfg)},
                {"exit_code", outcome.exit_code},
                {"result", outcome.result},
                {"wall_clock_seconds", wall_clock_seconds}};
}

}  // namespace vcwidth
