#pragma once

// Slow, independent reference implementations used only by the tests.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <set>
#include <string>
#include <vector>

#include "vcwidth/convex_geometry.hpp"
#include "vcwidth/vc_combinatorics.hpp"

namespace oracle {

using vcwidth::FuzzyFamily;
using vcwidth::Membership;
using vcwidth::PointSet;

/// Traces as strings over the chosen columns, skipping rows with unknowns.
inline std::set<std::string> trace_strings(const FuzzyFamily& f, const std::vector<std::size_t>& cols) {
    std::set<std::string> out;
    for (std::size_t r = 0; r < f.row_count(); ++r) {
        std::string s;
        bool ok = true;
        for (auto c : cols) {
            const auto m = f(r, c);
            if (m == Membership::Unknown) ok = false;
            s += m == Membership::In ? '1' : '0';
        }
        if (ok) out.insert(s);
    }
    return out;
}

inline std::vector<std::vector<std::size_t>> subsets_of_size(std::size_t m, std::size_t k) {
    std::vector<std::vector<std::size_t>> out;
    for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << m); ++mask) {
        if (static_cast<std::size_t>(__builtin_popcountll(mask)) != k) continue;
        std::vector<std::size_t> s;
        for (std::size_t c = 0; c < m; ++c)
            if (mask >> c & 1) s.push_back(c);
        out.push_back(s);
    }
    return out;
}

inline std::uint64_t shatter(const FuzzyFamily& f, std::size_t n) {
    std::uint64_t best = 0;
    for (const auto& s : subsets_of_size(f.col_count(), n)) best = std::max<std::uint64_t>(best, trace_strings(f, s).size());
    return best;
}

/// Least n such that no n-subset is shattered; m + 1 when everything is.
inline std::size_t vc_index(const FuzzyFamily& f) {
    for (std::size_t n = 0; n <= f.col_count(); ++n)
        if (shatter(f, n) < (std::uint64_t{1} << n)) return n;
    return f.col_count() + 1;
}

/// C(n, k) from Pascal's triangle in doubles (exact below 2^53).
inline double binomial(std::size_t n, std::size_t k) {
    std::vector<double> row{1.0};
    for (std::size_t i = 1; i <= n; ++i) {
        std::vector<double> next(i + 1, 1.0);
        for (std::size_t j = 1; j < i; ++j) next[j] = row[j - 1] + row[j];
        row = std::move(next);
    }
    return k <= n ? row[k] : 0.0;
}

inline double sauer(std::size_t d, std::size_t n) {
    double s = 0.0;
    for (std::size_t k = 0; k < d; ++k) s += binomial(n, k);
    return s;
}

/// Full arrangement grid: every cell of the product of per-axis breakpoint
/// lists, kept iff its midpoint is inside some cube.
inline double grid_volume(const PointSet& a, double c) {
    const std::size_t n = a.dim();
    std::vector<std::vector<double>> breaks(n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t p = 0; p < a.size(); ++p) {
            breaks[i].push_back(a.point(p)[i]);
            breaks[i].push_back(a.point(p)[i] + c);
        }
        std::sort(breaks[i].begin(), breaks[i].end());
        breaks[i].erase(std::unique(breaks[i].begin(), breaks[i].end()), breaks[i].end());
    }
    std::vector<std::size_t> cell(n, 0);
    double total = 0.0;
    for (;;) {
        double vol = 1.0;
        std::vector<double> mid(n);
        for (std::size_t i = 0; i < n; ++i) {
            vol *= breaks[i][cell[i] + 1] - breaks[i][cell[i]];
            mid[i] = 0.5 * (breaks[i][cell[i] + 1] + breaks[i][cell[i]]);
        }
        bool inside = false;
        for (std::size_t p = 0; p < a.size() && !inside; ++p) {
            bool in = true;
            for (std::size_t i = 0; i < n && in; ++i) in = a.point(p)[i] <= mid[i] && mid[i] <= a.point(p)[i] + c;
            inside = in;
        }
        if (inside) total += vol;
        std::size_t i = 0;
        while (i < n && ++cell[i] + 1 >= breaks[i].size()) cell[i++] = 0;
        if (i == n) break;
    }
    return total;
}

/// Box search on lattice data: points and thresholds are multiples of
/// 1/steps and eps = gap/steps, tried over every threshold on the lattice.
inline bool lattice_has_box(const PointSet& a, std::size_t d, std::size_t gap, std::size_t steps) {
    const std::size_t n = a.dim();
    auto level = [&](std::size_t p, std::size_t axis) {
        return static_cast<long>(std::llround(a.point(p)[axis] * static_cast<double>(steps)));
    };
    for (const auto& coords : subsets_of_size(n, d)) {
        const std::size_t choices = steps - gap + 1;
        std::vector<std::size_t> thr(d, 0);
        for (;;) {
            bool all = true;
            for (std::uint64_t w = 0; w < (std::uint64_t{1} << d) && all; ++w) {
                bool found = false;
                for (std::size_t p = 0; p < a.size() && !found; ++p) {
                    bool ok = true;
                    for (std::size_t j = 0; j < d && ok; ++j) {
                        const long x = level(p, coords[j]);
                        const long r = static_cast<long>(thr[j]);
                        ok = (w >> j & 1) ? x >= r + static_cast<long>(gap) : x <= r;
                    }
                    found = ok;
                }
                all = found;
            }
            if (all) return true;
            std::size_t j = 0;
            while (j < d && ++thr[j] >= choices) thr[j++] = 0;
            if (j == d) break;
        }
    }
    return false;
}

/// Exact w_G of the staircase {0, e_1, e_1 + e_2, ...} in R^n: the expected
/// range of an n-step Gaussian walk, sqrt(2/pi) * sum_{k<=n} k^{-1/2}.
inline double staircase_width(std::size_t n) {
    double s = 0.0;
    for (std::size_t k = 1; k <= n; ++k) s += 1.0 / std::sqrt(static_cast<double>(k));
    return std::sqrt(2.0 / std::numbers::pi) * s;
}

/// gamma_1 = sqrt(2/pi) and gamma_n gamma_{n+1} = n.
inline double gamma_recursive(std::size_t n) {
    double g = std::sqrt(2.0 / std::numbers::pi);
    for (std::size_t k = 1; k < n; ++k) g = static_cast<double>(k) / g;
    return g;
}

}  // namespace oracle
