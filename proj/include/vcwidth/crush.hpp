#pragma once

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstddef>
#include <limits>
#include <map>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "box_analysis.hpp"
#include "convex_geometry.hpp"
#include "parallel.hpp"
#include "random.hpp"
#include "vc_combinatorics.hpp"

namespace vcwidth {

/// Vertex description of K_u = Conv((K cap H+) u P(K cap H-)), where H+ is
/// <x,u> >= 0 and P projects onto u-perp. Body points are listed as kept
/// originals, then projections, then segment crossings.
struct CrushResult {
    PointSet body;
    std::vector<std::size_t> kept;
    std::vector<std::size_t> projected;
    std::vector<std::pair<std::size_t, std::size_t>> crossings;  // (index in H+, index in H-)
};

namespace detail {

inline std::vector<double> unit_direction(std::span<const double> u, std::size_t dim, const char* what) {
    if (u.size() != dim)
        throw std::invalid_argument(std::string(what) + ": direction has length " + std::to_string(u.size()) +
                                    ", expected " + std::to_string(dim));
    const double norm = std::sqrt(dot(u, u));
    if (!(std::abs(norm - 1.0) <= 1e-9)) throw std::invalid_argument(std::string(what) + ": direction is not a unit vector");
    std::vector<double> out(u.begin(), u.end());
    for (double& x : out) x /= norm;
    return out;
}

inline void project_out(std::span<const double> x, std::span<const double> u, double along, double* dst) {
    for (std::size_t j = 0; j < x.size(); ++j) dst[j] = x[j] - along * u[j];
}

}  // namespace detail

/// Crushes P along the unit vector u. Using every (H+, H-) vertex pair
/// rather than true edges keeps the hull exact: each vertex of the slice
/// K cap u-perp lies on some such segment, and every such crossing lies in K.
/// Throws std::length_error before allocating if the body would exceed max_points.
inline CrushResult crush_direction(const PointSet& p, std::span<const double> u_in,
                                   std::size_t max_points = std::numeric_limits<std::size_t>::max()) {
    const auto u = detail::unit_direction(u_in, p.dim(), "crush_direction");
    const std::size_t n = p.dim();
    std::vector<double> heights(p.size());
    for (std::size_t i = 0; i < p.size(); ++i) heights[i] = dot(p.point(i), u);

    CrushResult out{p, {}, {}, {}};
    const bool trivial = std::all_of(heights.begin(), heights.end(), [](double h) { return h >= 0.0; });
    if (trivial) {
        for (std::size_t i = 0; i < p.size(); ++i) out.kept.push_back(i);
        return out;
    }

    const auto upper = static_cast<std::size_t>(std::count_if(heights.begin(), heights.end(), [](double h) { return h > 0.0; }));
    const std::size_t lower = p.size() - static_cast<std::size_t>(std::count_if(heights.begin(), heights.end(), [](double h) { return h >= 0.0; }));
    if (upper != 0 && lower > (max_points - p.size()) / upper)
        throw std::length_error("crush_direction: body would exceed " + std::to_string(max_points) + " points");

    std::vector<double> coords;
    for (std::size_t i = 0; i < p.size(); ++i)
        if (heights[i] >= 0.0) {
            out.kept.push_back(i);
            coords.insert(coords.end(), p.point(i).begin(), p.point(i).end());
        }
    for (std::size_t i = 0; i < p.size(); ++i)
        if (heights[i] < 0.0) {
            out.projected.push_back(i);
            coords.resize(coords.size() + n);
            detail::project_out(p.point(i), u, heights[i], coords.data() + coords.size() - n);
        }
    for (auto v : out.kept) {
        if (heights[v] == 0.0) continue;  // already on the hyperplane
        for (auto w : out.projected) {
            const double t = heights[v] / (heights[v] - heights[w]);
            const auto a = p.point(v);
            const auto b = p.point(w);
            coords.resize(coords.size() + n);
            double* dst = coords.data() + coords.size() - n;
            for (std::size_t j = 0; j < n; ++j) dst[j] = a[j] + t * (b[j] - a[j]);
            // remove the rounding residue along u so the point sits on u-perp
            detail::project_out(std::span<const double>(dst, n), u, dot(std::span<const double>(dst, n), u), dst);
            out.crossings.emplace_back(v, w);
        }
    }
    out.body = PointSet(n, std::move(coords));
    return out;
}

namespace detail {

inline PointSet dedupe(const PointSet& p) {
    auto rows = p.rows();
    std::sort(rows.begin(), rows.end());
    rows.erase(std::unique(rows.begin(), rows.end()), rows.end());
    return PointSet::from_rows(rows);
}

// Phase-one simplex with Bland's rule: is b a nonnegative combination of the
// columns of a (rows x cols, row-major)?
inline bool in_cone(std::vector<double> a, std::size_t rows, std::size_t cols, std::vector<double> b, double tol) {
    const std::size_t width = cols + rows + 1;
    std::vector<double> t(rows * width, 0.0);
    std::vector<std::size_t> basis(rows);
    for (std::size_t i = 0; i < rows; ++i) {
        const double sign = b[i] < 0 ? -1.0 : 1.0;
        for (std::size_t j = 0; j < cols; ++j) t[i * width + j] = sign * a[i * cols + j];
        t[i * width + cols + i] = 1.0;
        t[i * width + width - 1] = sign * b[i];
        basis[i] = cols + i;
    }
    std::vector<double> cost(width, 0.0);  // reduced costs of min sum(artificials); last entry is -objective
    for (std::size_t i = 0; i < rows; ++i)
        for (std::size_t j = 0; j < width; ++j)
            if (j < cols || j == width - 1) cost[j] -= t[i * width + j];

    const std::size_t max_iter = 50 * (rows + cols) + 100;
    for (std::size_t iter = 0; iter < max_iter; ++iter) {
        std::size_t enter = width;
        for (std::size_t j = 0; j + 1 < width; ++j)
            if (cost[j] < -tol) {
                enter = j;
                break;
            }
        if (enter == width) return -cost[width - 1] <= tol * static_cast<double>(rows);

        std::size_t leave = rows;
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < rows; ++i) {
            const double coef = t[i * width + enter];
            if (coef <= tol) continue;
            const double ratio = t[i * width + width - 1] / coef;
            if (ratio < best - tol || (ratio <= best + tol && leave < rows && basis[i] < basis[leave])) {
                best = ratio;
                leave = i;
            }
        }
        if (leave == rows) return false;  // unbounded direction cannot occur here; be conservative

        const double pivot = t[leave * width + enter];
        for (std::size_t j = 0; j < width; ++j) t[leave * width + j] /= pivot;
        for (std::size_t i = 0; i < rows; ++i) {
            if (i == leave) continue;
            const double f = t[i * width + enter];
            if (f == 0.0) continue;
            for (std::size_t j = 0; j < width; ++j) t[i * width + j] -= f * t[leave * width + j];
        }
        const double f = cost[enter];
        for (std::size_t j = 0; j < width; ++j) cost[j] -= f * t[leave * width + j];
        basis[leave] = enter;
    }
    return false;
}

}  // namespace detail

/// Drops points lying in the convex hull of the remaining ones (LP
/// feasibility per point). The hull is unchanged; duplicates are merged first.
inline PointSet prune_interior(const PointSet& p, double tol = 1e-9) {
    PointSet current = detail::dedupe(p);
    const std::size_t n = current.dim();
    std::vector<bool> alive(current.size(), true);
    for (std::size_t k = 0; k < current.size(); ++k) {
        std::vector<std::size_t> others;
        for (std::size_t i = 0; i < current.size(); ++i)
            if (i != k && alive[i]) others.push_back(i);
        if (others.empty()) continue;
        const std::size_t rows = n + 1;
        std::vector<double> a(rows * others.size());
        for (std::size_t c = 0; c < others.size(); ++c) {
            const auto x = current.point(others[c]);
            for (std::size_t j = 0; j < n; ++j) a[j * others.size() + c] = x[j];
            a[n * others.size() + c] = 1.0;
        }
        std::vector<double> b(current.point(k).begin(), current.point(k).end());
        b.push_back(1.0);
        if (detail::in_cone(std::move(a), rows, others.size(), std::move(b), tol)) alive[k] = false;
    }
    std::vector<double> coords;
    for (std::size_t i = 0; i < current.size(); ++i)
        if (alive[i]) coords.insert(coords.end(), current.point(i).begin(), current.point(i).end());
    return PointSet(n, std::move(coords));
}

inline constexpr std::size_t positive_part_max_points = std::size_t{1} << 20;

/// K+ = (...(K_{e_0})_{e_1}...)_{e_{n-1}}, which lies in the nonnegative orthant.
inline PointSet positive_part(const PointSet& p, bool prune = false) {
    PointSet current = detail::dedupe(p);
    std::vector<double> e(p.dim(), 0.0);
    for (std::size_t i = 0; i < p.dim(); ++i) {
        std::fill(e.begin(), e.end(), 0.0);
        e[i] = 1.0;
        try {
            current = detail::dedupe(crush_direction(current, e, positive_part_max_points).body);
        } catch (const std::length_error&) {
            throw std::length_error("positive_part: vertex list would grow beyond " +
                                    std::to_string(positive_part_max_points) + " points at axis " + std::to_string(i) +
                                    "; use pruning");
        }
        if (prune) current = prune_interior(current);
    }
    return current;
}

struct CrushSupportReport {
    std::size_t directions = 0;
    std::size_t upper_checked = 0;  // <y,u> >= 0: equality case
    std::size_t lower_checked = 0;  // <y,u> < 0: inequality case
    std::vector<std::size_t> violations;
    double max_equality_error = 0.0;
    // rhs - lhs over the inequality case; how far the bound is from equality
    double min_gap = 0.0;
    double mean_gap = 0.0;
    double max_gap = 0.0;

    bool ok() const { return violations.empty(); }
};

inline constexpr std::size_t crush_segment_points = 16;

/// Checks the support-function relations between K and K_u on the given
/// directions (row-major, one per row). For <y,u> >= 0 the identity
/// h_{K_u}(y) = max(h_K(y), h_K(P y)) must hold to 1e-9; otherwise
/// h_{K_u}(y) may not exceed h_K(z) for z on the segment [y, P y], tested at
/// the two endpoints and 16 interior points. Each such z bounds the minimum
/// from above, so a violation found here is a true violation.
inline CrushSupportReport check_crush_support(const PointSet& p, std::span<const double> u_in, const CrushResult& result,
                                              std::span<const double> directions, double tol = 1e-9) {
    const auto u = detail::unit_direction(u_in, p.dim(), "check_crush_support");
    const std::size_t n = p.dim();
    if (directions.size() % n != 0) throw std::invalid_argument("check_crush_support: ragged direction list");
    const auto [top, bottom] = detail::support_range(p, u);
    (void)top;
    if (bottom > 0.0) throw std::invalid_argument("check_crush_support: needs h_P(-u) >= 0 (a nontrivial crush)");

    CrushSupportReport rep;
    rep.directions = directions.size() / n;
    std::vector<double> gaps(rep.directions, std::numeric_limits<double>::quiet_NaN());
    std::vector<double> eq_err(rep.directions, 0.0);
    std::vector<char> bad(rep.directions, 0);
    parallel_chunks(rep.directions, 64, [&](std::size_t begin, std::size_t end) {
        std::vector<double> proj(n), z(n);
        for (std::size_t k = begin; k < end; ++k) {
            const std::span<const double> y(directions.data() + k * n, n);
            const double lambda = dot(y, u);
            detail::project_out(y, u, lambda, proj.data());
            const double lhs = support(result.body, y);
            if (lambda >= 0.0) {
                const double rhs = std::max(support(p, y), support(p, proj));
                eq_err[k] = std::abs(lhs - rhs);
                bad[k] = eq_err[k] > tol;
            } else {
                double rhs = std::numeric_limits<double>::infinity();
                for (std::size_t s = 0; s <= crush_segment_points + 1; ++s) {
                    const double t = static_cast<double>(s) / static_cast<double>(crush_segment_points + 1);
                    for (std::size_t j = 0; j < n; ++j) z[j] = y[j] + t * (proj[j] - y[j]);
                    rhs = std::min(rhs, support(p, z));
                }
                gaps[k] = rhs - lhs;
                bad[k] = lhs > rhs + tol;
            }
        }
    });

    double sum = 0.0;
    bool first = true;
    for (std::size_t k = 0; k < rep.directions; ++k) {
        if (bad[k]) rep.violations.push_back(k);
        if (std::isnan(gaps[k])) {
            ++rep.upper_checked;
            rep.max_equality_error = std::max(rep.max_equality_error, eq_err[k]);
            continue;
        }
        ++rep.lower_checked;
        sum += gaps[k];
        rep.min_gap = first ? gaps[k] : std::min(rep.min_gap, gaps[k]);
        rep.max_gap = first ? gaps[k] : std::max(rep.max_gap, gaps[k]);
        first = false;
    }
    if (rep.lower_checked) rep.mean_gap = sum / static_cast<double>(rep.lower_checked);
    return rep;
}

/// Same check on Gaussian directions drawn as in gaussian_mean_width.
inline CrushSupportReport check_crush_support(const PointSet& p, std::span<const double> u, const CrushResult& result,
                                              const GaussianSamplerConfig& cfg, double tol = 1e-9) {
    cfg.validate();
    std::vector<double> dirs(cfg.samples * p.dim());
    for (std::size_t s = 0; s < cfg.samples; ++s)
        gaussian_direction(cfg.seed, s, std::span<double>(dirs.data() + s * p.dim(), p.dim()));
    return check_crush_support(p, u, result, dirs, tol);
}

/// Per-sample symmetrized widths: (w(K, g) + w(K, g~)) / 2 where g~ reflects g
/// across u-perp. The reflection is again standard Gaussian, so the mean still
/// estimates w_G(K); under common directions the K_u values never exceed the K
/// values sample by sample.
inline std::vector<double> symmetrized_width_samples(const PointSet& p, std::span<const double> u_in,
                                                     const GaussianSamplerConfig& cfg) {
    const auto u = detail::unit_direction(u_in, p.dim(), "symmetrized_width_samples");
    return sample_directions(p.dim(), cfg, [&](std::span<const double> g) {
        std::vector<double> reflected(g.begin(), g.end());
        const double lambda = dot(g, u);
        for (std::size_t j = 0; j < reflected.size(); ++j) reflected[j] -= 2.0 * lambda * u[j];
        const auto [hi1, lo1] = detail::support_range(p, g);
        const auto [hi2, lo2] = detail::support_range(p, reflected);
        return 0.5 * ((hi1 - lo1) + (hi2 - lo2));
    });
}

struct PairedInequalityReport {
    std::size_t directions = 0;
    double min_slack = std::numeric_limits<double>::infinity();  // rhs - lhs
    std::size_t violations = 0;
};

/// h_{K_u}(y' + l u) + h_{K_u}(y' - l u) <= h_K(y' + l u) + h_K(y' - l u) for each
/// direction y = y' + l u; a violation is slack below -tol.
inline PairedInequalityReport check_paired_inequality(const PointSet& p, std::span<const double> u_in,
                                                      const PointSet& crushed, const GaussianSamplerConfig& cfg,
                                                      double tol = 1e-9) {
    const auto u = detail::unit_direction(u_in, p.dim(), "check_paired_inequality");
    const auto slack = sample_directions(p.dim(), cfg, [&](std::span<const double> g) {
        std::vector<double> reflected(g.begin(), g.end());
        const double lambda = dot(g, u);
        for (std::size_t j = 0; j < reflected.size(); ++j) reflected[j] -= 2.0 * lambda * u[j];
        const double lhs = support(crushed, g) + support(crushed, reflected);
        const double rhs = support(p, g) + support(p, reflected);
        return rhs - lhs;
    });
    PairedInequalityReport rep;
    rep.directions = slack.size();
    for (double s : slack) {
        rep.min_slack = std::min(rep.min_slack, s);
        if (s < -tol) ++rep.violations;
    }
    return rep;
}

// ---------------------------------------------------------------------------
// Continuous connectives on families: neg x = 1 - x, half x = x / 2,
// monus(x, y) = max(x - y, 0).

class ConnectiveExpr {
public:
    enum class Kind { Leaf, Half, Neg, Monus };

    static ConnectiveExpr leaf(std::string name) { return ConnectiveExpr(Kind::Leaf, std::move(name), {}); }
    static ConnectiveExpr half(ConnectiveExpr e) { return ConnectiveExpr(Kind::Half, {}, {std::move(e)}); }
    static ConnectiveExpr neg(ConnectiveExpr e) { return ConnectiveExpr(Kind::Neg, {}, {std::move(e)}); }
    static ConnectiveExpr monus(ConnectiveExpr a, ConnectiveExpr b) {
        return ConnectiveExpr(Kind::Monus, {}, {std::move(a), std::move(b)});
    }

    /// Parses expressions such as "monus(phi, half(neg(psi)))".
    static ConnectiveExpr parse(const std::string& text) {
        std::size_t pos = 0;
        auto e = parse_at(text, pos);
        skip_space(text, pos);
        if (pos != text.size()) throw std::invalid_argument("connective: trailing input at offset " + std::to_string(pos));
        return e;
    }

    Kind kind() const { return kind_; }
    const std::string& name() const { return name_; }
    const std::vector<ConnectiveExpr>& children() const { return children_; }

    std::string to_string() const {
        switch (kind_) {
            case Kind::Leaf: return name_;
            case Kind::Half: return "half(" + children_[0].to_string() + ")";
            case Kind::Neg: return "neg(" + children_[0].to_string() + ")";
            default: return "monus(" + children_[0].to_string() + "," + children_[1].to_string() + ")";
        }
    }

    void collect_leaves(std::vector<std::string>& out) const {
        if (kind_ == Kind::Leaf) {
            if (std::find(out.begin(), out.end(), name_) == out.end()) out.push_back(name_);
            return;
        }
        for (const auto& c : children_) c.collect_leaves(out);
    }

private:
    ConnectiveExpr(Kind k, std::string name, std::vector<ConnectiveExpr> children)
        : kind_(k), name_(std::move(name)), children_(std::move(children)) {}

    static void skip_space(const std::string& s, std::size_t& pos) {
        while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos]))) ++pos;
    }

    static void expect(const std::string& s, std::size_t& pos, char c) {
        skip_space(s, pos);
        if (pos >= s.size() || s[pos] != c)
            throw std::invalid_argument(std::string("connective: expected '") + c + "' at offset " + std::to_string(pos));
        ++pos;
    }

    static ConnectiveExpr parse_at(const std::string& s, std::size_t& pos) {
        skip_space(s, pos);
        const std::size_t start = pos;
        while (pos < s.size() && (std::isalnum(static_cast<unsigned char>(s[pos])) || s[pos] == '_' || s[pos] == '-' ||
                                  s[pos] == '.'))
            ++pos;
        if (pos == start) throw std::invalid_argument("connective: expected a name at offset " + std::to_string(start));
        const std::string word = s.substr(start, pos - start);
        skip_space(s, pos);
        if (pos >= s.size() || s[pos] != '(') return leaf(word);
        ++pos;
        if (word == "half" || word == "neg") {
            auto inner = parse_at(s, pos);
            expect(s, pos, ')');
            return word == "half" ? half(std::move(inner)) : neg(std::move(inner));
        }
        if (word == "monus") {
            auto a = parse_at(s, pos);
            expect(s, pos, ',');
            auto b = parse_at(s, pos);
            expect(s, pos, ')');
            return monus(std::move(a), std::move(b));
        }
        throw std::invalid_argument("connective: unknown operation '" + word + "'");
    }

    Kind kind_;
    std::string name_;
    std::vector<ConnectiveExpr> children_;
};

/// Entrywise evaluation. Leaves must share row and column ids exactly: rows
/// are paired by id (the Y variable), never silently realigned.
inline FunctionFamily apply_connective(const ConnectiveExpr& expr, const std::map<std::string, FunctionFamily>& leaves) {
    std::vector<std::string> names;
    expr.collect_leaves(names);
    const FunctionFamily* shape = nullptr;
    for (const auto& name : names) {
        auto it = leaves.find(name);
        if (it == leaves.end()) throw std::invalid_argument("connective: unknown family '" + name + "'");
        if (!shape) shape = &it->second;
        else if (it->second.row_ids() != shape->row_ids() || it->second.col_ids() != shape->col_ids())
            throw std::invalid_argument("connective: family '" + name + "' does not match the shape of '" + names[0] + "'");
    }

    auto eval = [&](auto&& self, const ConnectiveExpr& e) -> std::vector<double> {
        switch (e.kind()) {
            case ConnectiveExpr::Kind::Leaf: return leaves.at(e.name()).values();
            case ConnectiveExpr::Kind::Half: {
                auto v = self(self, e.children()[0]);
                for (double& x : v) x *= 0.5;
                return v;
            }
            case ConnectiveExpr::Kind::Neg: {
                auto v = self(self, e.children()[0]);
                for (double& x : v) x = 1.0 - x;
                return v;
            }
            default: {
                auto a = self(self, e.children()[0]);
                const auto b = self(self, e.children()[1]);
                for (std::size_t i = 0; i < a.size(); ++i) a[i] = std::max(a[i] - b[i], 0.0);
                return a;
            }
        }
    };
    return FunctionFamily(shape->row_ids(), shape->col_ids(), eval(eval, expr));
}

struct ConnectiveTupleCheck {
    std::vector<std::size_t> tuple;
    double combined;     // w_G((phi monus psi)(x))
    double phi;          // w_G(phi(x))
    double psi;          // w_G(psi(x))
    double std_error;    // of the per-sample difference phi + psi - combined
    bool ok = true;
};

/// Per-tuple sub-additivity of width under monus, with common directions for
/// all three sets. The inequality holds for the means, not per direction, so
/// the tolerance is `sigmas` standard errors of the paired difference plus
/// rounding headroom.
inline std::vector<ConnectiveTupleCheck> check_monus_subadditivity(const FunctionFamily& phi, const FunctionFamily& psi,
                                                                   const std::vector<std::vector<std::size_t>>& tuples,
                                                                   const GaussianSamplerConfig& cfg,
                                                                   double sigmas = 4.0) {
    std::map<std::string, FunctionFamily> env{{"phi", phi}, {"psi", psi}};
    const auto combined =
        apply_connective(ConnectiveExpr::monus(ConnectiveExpr::leaf("phi"), ConnectiveExpr::leaf("psi")), env);
    std::vector<ConnectiveTupleCheck> out;
    for (const auto& t : tuples) {
        const auto a = width_samples(evaluate_tuple(combined, t), cfg);
        const auto b = width_samples(evaluate_tuple(phi, t), cfg);
        const auto c = width_samples(evaluate_tuple(psi, t), cfg);
        std::vector<double> diff(a.size());
        for (std::size_t s = 0; s < a.size(); ++s) diff[s] = b[s] + c[s] - a[s];
        const auto d = summarize(diff, cfg.seed);
        ConnectiveTupleCheck rec{t, summarize(a, cfg.seed).value, summarize(b, cfg.seed).value,
                                 summarize(c, cfg.seed).value, d.std_error, true};
        // 1e-9 covers rounding when the bound is tight and the paired spread vanishes
        rec.ok = rec.combined <= rec.phi + rec.psi + sigmas * rec.std_error + 1e-9;
        out.push_back(std::move(rec));
    }
    return out;
}

}  // namespace vcwidth
