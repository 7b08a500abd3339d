#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <string>
#include <vector>

#include "support/generators.hpp"
#include "vcwidth/crush.hpp"

using namespace vcwidth;

namespace {

const std::vector<double> e0{1.0, 0.0};

std::vector<double> gaussian_dirs(gen::Gen& g, std::size_t dim, std::size_t count) {
    std::vector<double> out(dim * count);
    for (double& x : out) x = g.normal();
    return out;
}

// Support of the slice of Conv(p) on the side <x,u> >= 0 (or <= 0). A linear
// objective under the simplex plus one height constraint attains its max at a
// basic solution with at most two nonzero weights.
double half_support(const PointSet& p, std::span<const double> u, std::span<const double> y, bool upper) {
    double best = -std::numeric_limits<double>::infinity();
    std::vector<double> h(p.size());
    for (std::size_t i = 0; i < p.size(); ++i) h[i] = (upper ? 1.0 : -1.0) * dot(p.point(i), u);
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (h[i] >= 0.0) best = std::max(best, dot(p.point(i), y));
        for (std::size_t j = 0; j < p.size(); ++j) {
            if (!(h[i] > 0.0 && h[j] < 0.0)) continue;
            const double t = h[i] / (h[i] - h[j]);
            best = std::max(best, (1 - t) * dot(p.point(i), y) + t * dot(p.point(j), y));
        }
    }
    return best;
}

// h_{K_u}(y) = max(h_{K cap H+}(y), h_{K cap H-}(P y)).
double crushed_support_oracle(const PointSet& p, std::span<const double> u, std::span<const double> y) {
    std::vector<double> py(y.begin(), y.end());
    const double along = dot(y, u);
    for (std::size_t j = 0; j < py.size(); ++j) py[j] -= along * u[j];
    return std::max(half_support(p, u, y, true), half_support(p, u, py, false));
}

void expect_same_support(const PointSet& a, const PointSet& b, std::span<const double> dirs, double tol) {
    const std::size_t n = a.dim();
    for (std::size_t k = 0; k * n < dirs.size(); ++k) {
        const std::span<const double> y(dirs.data() + k * n, n);
        EXPECT_NEAR(support(a, y), support(b, y), tol) << "direction " << k;
    }
}

}  // namespace

TEST(Crush, BodyFullyAboveIsUnchanged) {
    const PointSet p(2, {0.0, 1.0, 2.0, -3.0, 0.5, 0.5});
    const auto r = crush_direction(p, e0);
    EXPECT_EQ(r.body, p);
    EXPECT_TRUE(r.projected.empty());
    EXPECT_TRUE(r.crossings.empty());
}

TEST(Crush, SegmentBecomesTriangle) {
    const PointSet p(2, {-1.0, -1.0, 1.0, 1.0});
    const auto r = crush_direction(p, e0);
    gen::Gen g(1);
    const auto dirs = gaussian_dirs(g, 2, 500);
    expect_same_support(r.body, PointSet(2, {0.0, -1.0, 0.0, 0.0, 1.0, 1.0}), dirs, 1e-12);
}

TEST(Crush, BodyFullyBelowIsProjected) {
    const PointSet p(2, {-1.0, 2.0, -3.0, -1.0});
    const auto r = crush_direction(p, e0);
    EXPECT_EQ(r.body, PointSet(2, {0.0, 2.0, 0.0, -1.0}));
}

TEST(Crush, RejectsNonUnitDirections) {
    const PointSet p(2, {-1.0, 0.0, 1.0, 0.0});
    const std::vector<double> longer{2.0, 0.0};
    const std::vector<double> wrong_dim{1.0, 0.0, 0.0};
    EXPECT_THROW(crush_direction(p, longer), std::invalid_argument);
    EXPECT_THROW(crush_direction(p, wrong_dim), std::invalid_argument);
}

TEST(Crush, MatchesBasicSolutionOracle) {
    gen::Gen g(2);
    for (int trial = 0; trial < 60; ++trial) {
        const std::size_t n = g.between(2, 5);
        const auto p = gen::points(g, n, g.between(1, 20), -1.0, 1.0);
        const auto u = gen::unit_vector(g, n);
        const auto r = crush_direction(p, u);
        const auto dirs = gaussian_dirs(g, n, 100);
        for (std::size_t k = 0; k < 100; ++k) {
            const std::span<const double> y(dirs.data() + k * n, n);
            EXPECT_NEAR(support(r.body, y), crushed_support_oracle(p, u, y), 1e-9) << "trial " << trial;
        }
    }
}

TEST(Crush, ContainsTheImageOfRandomPoints) {
    gen::Gen g(3);
    for (int trial = 0; trial < 30; ++trial) {
        const std::size_t n = g.between(2, 4);
        const auto p = gen::points(g, n, g.between(2, 12), -1.0, 1.0);
        const auto u = gen::unit_vector(g, n);
        const auto body = crush_direction(p, u).body;
        const auto dirs = gaussian_dirs(g, n, 50);
        for (int s = 0; s < 200; ++s) {
            // random convex combination, then S(x)
            std::vector<double> w(p.size()), x(n, 0.0);
            double total = 0.0;
            for (double& v : w) total += v = -std::log(g.uniform(1e-12, 1.0));
            for (std::size_t i = 0; i < p.size(); ++i)
                for (std::size_t j = 0; j < n; ++j) x[j] += w[i] / total * p.point(i)[j];
            const double h = dot(x, u);
            if (h < 0)
                for (std::size_t j = 0; j < n; ++j) x[j] -= h * u[j];
            for (std::size_t k = 0; k < 50; ++k) {
                const std::span<const double> y(dirs.data() + k * n, n);
                EXPECT_LE(dot(x, y), support(body, y) + 1e-9);
            }
        }
    }
}

TEST(Crush, IsIdempotent) {
    gen::Gen g(4);
    for (int trial = 0; trial < 30; ++trial) {
        const std::size_t n = g.between(2, 4);
        const auto p = gen::points(g, n, g.between(2, 10), -1.0, 1.0);
        const auto u = gen::unit_vector(g, n);
        const auto once = crush_direction(p, u).body;
        const auto twice = crush_direction(once, u).body;
        expect_same_support(once, twice, gaussian_dirs(g, n, 200), 1e-9);
    }
}

TEST(PositivePart, Examples) {
    gen::Gen g(5);
    const auto dirs = gaussian_dirs(g, 2, 500);

    const PointSet inside(2, {0.0, 1.0, 2.0, 0.5, 0.3, 0.0});
    expect_same_support(positive_part(inside), inside, dirs, 1e-12);

    EXPECT_EQ(positive_part(PointSet(2, {-1.0, -1.0})), PointSet(2, {0.0, 0.0}));

    const PointSet tri(2, {-1.0, 0.0, 0.0, -1.0, 1.0, 1.0});
    const PointSet expected(2, {0.0, 0.0, 0.0, 0.5, 0.5, 0.0, 1.0, 1.0});
    expect_same_support(positive_part(tri), expected, dirs, 1e-12);
    expect_same_support(positive_part(tri, true), expected, dirs, 1e-12);
}

TEST(PositivePart, LiesInTheOrthantAndContainsClippedPoints) {
    gen::Gen g(6);
    for (int trial = 0; trial < 30; ++trial) {
        const std::size_t n = g.between(1, 4);
        const auto p = gen::points(g, n, g.between(1, 8), -1.0, 1.0);
        // unpruned crossings square the vertex count per axis
        const auto pos = positive_part(p, n > 2);
        for (std::size_t i = 0; i < pos.size(); ++i)
            for (double x : pos.point(i)) EXPECT_GE(x, -1e-12);
        // every vertex clipped at zero lies in K+
        const auto dirs = gaussian_dirs(g, n, 50);
        for (std::size_t i = 0; i < p.size(); ++i) {
            std::vector<double> clipped(p.point(i).begin(), p.point(i).end());
            for (double& x : clipped) x = std::max(x, 0.0);
            for (std::size_t k = 0; k < 50; ++k) {
                const std::span<const double> y(dirs.data() + k * n, n);
                EXPECT_LE(dot(clipped, y), support(pos, y) + 1e-9);
            }
        }
    }
}

TEST(PositivePart, PruningPreservesTheBody) {
    gen::Gen g(16);
    for (int trial = 0; trial < 10; ++trial) {
        const std::size_t n = g.between(2, 3);
        const auto p = gen::points(g, n, g.between(2, 6), -1.0, 1.0);
        const auto full = positive_part(p);
        const auto pruned = positive_part(p, true);
        EXPECT_LE(pruned.size(), full.size());
        expect_same_support(full, pruned, gaussian_dirs(g, n, 200), 1e-9);
    }
    std::vector<double> many;
    for (int i = 0; i < 64; ++i)
        for (int j = 0; j < 4; ++j) many.push_back(std::sin(1.7 * i + 2.3 * j));
    EXPECT_THROW(positive_part(PointSet(4, many)), std::length_error);
}

TEST(PruneInterior, KeepsOnlyHullVertices) {
    std::vector<double> coords;
    for (int k = 0; k < 8; ++k)
        for (int i = 0; i < 3; ++i) coords.push_back(static_cast<double>(k >> i & 1));
    const std::vector<double> extra{0.5, 0.5, 0.5, 0.2, 0.9, 0.1, 1.0, 0.5, 0.5, 0.5, 0.0, 0.0};
    coords.insert(coords.end(), extra.begin(), extra.end());
    const auto pruned = prune_interior(PointSet(3, coords));
    EXPECT_EQ(pruned.size(), 8u);

    gen::Gen g(7);
    for (int trial = 0; trial < 20; ++trial) {
        const std::size_t n = g.between(2, 4);
        const auto p = gen::points(g, n, g.between(3, 25));
        const auto q = prune_interior(p);
        EXPECT_LE(q.size(), p.size());
        expect_same_support(p, q, gaussian_dirs(g, n, 200), 1e-12);
    }
}

TEST(CrushSupport, Examples) {
    const PointSet tri(2, {-1.0, 0.0, 0.0, -1.0, 1.0, 1.0});
    const auto r = crush_direction(tri, e0);
    // y in u-perp, y = u, and a spread of lower directions
    std::vector<double> dirs{0.0, 1.0, 0.0, -1.0, 1.0, 0.0};
    gen::Gen g(8);
    for (int k = 0; k < 200; ++k) {
        dirs.push_back(-std::abs(g.normal()));
        dirs.push_back(g.normal());
    }
    const auto rep = check_crush_support(tri, e0, r, dirs);
    EXPECT_TRUE(rep.ok());
    EXPECT_EQ(rep.upper_checked, 3u);
    EXPECT_EQ(rep.lower_checked, 200u);
    EXPECT_NEAR(support(r.body, std::vector<double>{1.0, 0.0}), support(tri, std::vector<double>{1.0, 0.0}), 1e-15);
    EXPECT_GE(rep.min_gap, -1e-9);

    const PointSet above(2, {1.0, 0.0, 2.0, 1.0});
    EXPECT_THROW(check_crush_support(above, e0, crush_direction(above, e0), dirs), std::invalid_argument);
}

TEST(CrushSupport, DetectsAWrongBody) {
    const PointSet tri(2, {-1.0, 0.0, 0.0, -1.0, 1.0, 1.0});
    auto r = crush_direction(tri, e0);
    r.body = tri;  // the uncrushed body is too large below u-perp
    const std::vector<double> dirs{0.0, 1.0, 0.3, -1.0, -1.0, 0.0};
    const auto rep = check_crush_support(tri, e0, r, dirs);
    EXPECT_FALSE(rep.ok());
}

TEST(CrushSupport, HoldsOnRandomPolytopes) {
    gen::Gen g(9);
    for (int trial = 0; trial < 40; ++trial) {
        const std::size_t n = g.between(2, 5);
        const auto p = gen::points(g, n, g.between(2, 20), -1.0, 1.0);
        const auto u = gen::unit_vector(g, n);
        std::vector<double> neg(u);
        for (double& x : neg) x = -x;
        if (support(p, neg) < 0) continue;
        const auto rep = check_crush_support(p, u, crush_direction(p, u), GaussianSamplerConfig{1, 2000, true});
        EXPECT_TRUE(rep.ok()) << "trial " << trial;
        EXPECT_EQ(rep.upper_checked + rep.lower_checked, 2000u);
    }
}

TEST(CrushWidth, SymmetrizedEstimateNeverGrows) {
    gen::Gen g(10);
    for (int trial = 0; trial < 40; ++trial) {
        const std::size_t n = g.between(3, 5);
        const auto p = gen::points(g, n, g.between(2, 30), -1.0, 1.0);
        const auto u = gen::unit_vector(g, n);
        const auto crushed = crush_direction(p, u).body;
        const GaussianSamplerConfig cfg{static_cast<std::uint64_t>(trial), 3000, true};
        const auto before = symmetrized_width_samples(p, u, cfg);
        const auto after = symmetrized_width_samples(crushed, u, cfg);
        for (std::size_t s = 0; s < before.size(); ++s) ASSERT_LE(after[s], before[s] + 1e-9) << "trial " << trial;
        EXPECT_LE(summarize(after, cfg.seed).value, summarize(before, cfg.seed).value + 1e-9);

        const auto paired = check_paired_inequality(p, u, crushed, cfg);
        EXPECT_EQ(paired.violations, 0u);
        EXPECT_GE(paired.min_slack, -1e-9);
    }
}

TEST(CrushWidth, SymmetrizedEstimateIsUnbiased) {
    gen::Gen g(11);
    const auto p = gen::points(g, 3, 12, -1.0, 1.0);
    const auto u = gen::unit_vector(g, 3);
    const GaussianSamplerConfig cfg{5, 40000, true};
    const auto sym = summarize(symmetrized_width_samples(p, u, cfg), cfg.seed);
    const auto plain = gaussian_mean_width(p, {6, 40000, true});
    EXPECT_NEAR(sym.value, plain.value, 4 * std::hypot(sym.std_error, plain.std_error));
}

TEST(CrushWidth, PositivePartNeverGrows) {
    gen::Gen g(12);
    for (int trial = 0; trial < 15; ++trial) {
        const std::size_t n = g.between(2, 4);
        const auto p = gen::points(g, n, g.between(2, 8), -1.0, 1.0);
        const GaussianSamplerConfig cfg{static_cast<std::uint64_t>(trial), 2000, true};
        // chain the per-crush symmetrized comparison along e_0, e_1, ...
        PointSet current = p;
        std::vector<double> e(n, 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            std::fill(e.begin(), e.end(), 0.0);
            e[i] = 1.0;
            const auto next = prune_interior(crush_direction(current, e).body);
            const auto a = summarize(symmetrized_width_samples(current, e, cfg), cfg.seed).value;
            const auto b = summarize(symmetrized_width_samples(next, e, cfg), cfg.seed).value;
            EXPECT_LE(b, a + 1e-9);
            current = next;
        }
        expect_same_support(current, positive_part(p, true), gaussian_dirs(g, n, 100), 1e-9);
    }
}

TEST(Connective, ParseAndPrint) {
    const auto e = ConnectiveExpr::parse(" monus( neg(phi), half(psi) ) ");
    EXPECT_EQ(ConnectiveExpr::parse(e.to_string()).to_string(), e.to_string());
    std::vector<std::string> leaves;
    e.collect_leaves(leaves);
    EXPECT_EQ(leaves, (std::vector<std::string>{"phi", "psi"}));
    EXPECT_THROW(ConnectiveExpr::parse("monus(phi)"), std::invalid_argument);
    EXPECT_THROW(ConnectiveExpr::parse("sqrt(phi)"), std::invalid_argument);
    EXPECT_THROW(ConnectiveExpr::parse("neg(phi"), std::invalid_argument);
    EXPECT_THROW(ConnectiveExpr::parse("phi psi"), std::invalid_argument);
}

TEST(Connective, Examples) {
    gen::Gen g(13);
    const auto q = gen::function_family(g, 4, 5);
    const std::map<std::string, FunctionFamily> env{{"q", q}, {"ones", FunctionFamily({"a", "b"}, {"x"}, {1.0, 1.0})}};
    EXPECT_EQ(apply_connective(ConnectiveExpr::parse("neg(neg(q))"), env).values(), q.values());
    const auto zero = apply_connective(ConnectiveExpr::parse("monus(q, q)"), env);
    for (double v : zero.values()) EXPECT_EQ(v, 0.0);
    EXPECT_EQ(apply_connective(ConnectiveExpr::parse("half(ones)"), env).values(), (std::vector<double>{0.5, 0.5}));
    EXPECT_THROW(apply_connective(ConnectiveExpr::parse("monus(q, ones)"), env), std::invalid_argument);
    EXPECT_THROW(apply_connective(ConnectiveExpr::parse("missing"), env), std::invalid_argument);

    const FunctionFamily a({"y0", "y1"}, {"x"}, {0.2, 0.9});
    const FunctionFamily b({"y1", "y0"}, {"x"}, {0.1, 0.1});
    EXPECT_THROW(apply_connective(ConnectiveExpr::parse("monus(a, b)"), {{"a", a}, {"b", b}}), std::invalid_argument);
}

TEST(Connective, NegationAndHalfWidthIdentities) {
    gen::Gen g(14);
    for (int trial = 0; trial < 20; ++trial) {
        const auto q = gen::function_family(g, g.between(1, 12), 6);
        const std::map<std::string, FunctionFamily> env{{"q", q}};
        const auto neg = apply_connective(ConnectiveExpr::parse("neg(q)"), env);
        const auto half = apply_connective(ConnectiveExpr::parse("half(q)"), env);
        const auto t = gen::tuple(g, g.between(1, 4), 6);
        const GaussianSamplerConfig cfg{static_cast<std::uint64_t>(trial), 2000, true};
        const auto base = gaussian_mean_width(evaluate_tuple(q, t), cfg).value;
        EXPECT_NEAR(gaussian_mean_width(evaluate_tuple(neg, t), cfg).value, base, 1e-12);
        EXPECT_EQ(gaussian_mean_width(evaluate_tuple(half, t), cfg).value, 0.5 * base);
    }
}

TEST(Connective, MonusIsSubadditivePerTuple) {
    gen::Gen g(15);
    int checked = 0;
    for (int trial = 0; trial < 30; ++trial) {
        const std::size_t rows = g.between(1, 10), cols = g.between(1, 6);
        const auto phi = gen::function_family(g, rows, cols);
        const auto psi = gen::function_family(g, rows, cols);
        std::vector<std::vector<std::size_t>> tuples;
        for (int k = 0; k < 4; ++k) tuples.push_back(gen::tuple(g, g.between(1, 4), cols));
        for (const auto& rec : check_monus_subadditivity(phi, psi, tuples, {static_cast<std::uint64_t>(trial), 2000, true})) {
            EXPECT_TRUE(rec.ok) << "trial " << trial;
            ++checked;
        }
    }
    EXPECT_EQ(checked, 120);
}
