#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <numbers>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "convex_geometry.hpp"
#include "parallel.hpp"
#include "random.hpp"
#include "vc_combinatorics.hpp"

namespace vcwidth {

/// Certificate that a point set determines a d-dimensional eps-box: for every
/// subset w of {0..d-1} the point selectors[w] is high (x - eps >= r) on the
/// axes in w and low (x <= r) on the others. Bit j of w refers to coords[j].
struct BoxWitness {
    std::vector<std::size_t> coords;
    std::vector<double> thresholds;
    double eps = 0.0;
    std::vector<std::size_t> selectors;
};

/// Checks every constraint of the witness against the point set.
inline bool verify_box(const PointSet& a, const BoxWitness& box) {
    const std::size_t d = box.coords.size();
    if (d == 0 || d >= 64 || box.thresholds.size() != d || box.selectors.size() != (std::size_t{1} << d))
        return false;
    if (!(box.eps > 0.0)) return false;
    for (std::size_t j = 0; j < d; ++j) {
        if (box.coords[j] >= a.dim() || (j > 0 && box.coords[j] <= box.coords[j - 1])) return false;
        if (!(box.thresholds[j] >= 0.0 && box.thresholds[j] <= 1.0 - box.eps)) return false;
    }
    for (std::size_t w = 0; w < box.selectors.size(); ++w) {
        if (box.selectors[w] >= a.size()) return false;
        const auto p = a.point(box.selectors[w]);
        for (std::size_t j = 0; j < d; ++j) {
            const double x = p[box.coords[j]];
            const bool ok = (w >> j & 1) ? x - box.eps >= box.thresholds[j] : x <= box.thresholds[j];
            if (!ok) return false;
        }
    }
    return true;
}

/// Q(x) for a tuple of column indices: one point per row, repetition allowed.
inline PointSet evaluate_tuple(const FunctionFamily& q, std::span<const std::size_t> cols) {
    if (cols.empty()) throw std::invalid_argument("evaluate_tuple: empty tuple");
    if (q.row_count() == 0) throw std::invalid_argument("evaluate_tuple: family has no rows");
    std::vector<double> coords;
    coords.reserve(q.row_count() * cols.size());
    for (std::size_t r = 0; r < q.row_count(); ++r)
        for (auto c : cols) {
            if (c >= q.col_count()) throw std::out_of_range("evaluate_tuple: column index out of range");
            coords.push_back(q(r, c));
        }
    return PointSet(cols.size(), std::move(coords));
}

inline PointSet evaluate_tuple(const FunctionFamily& q, std::span<const std::string> labels) {
    std::vector<std::size_t> cols;
    cols.reserve(labels.size());
    for (const auto& l : labels) cols.push_back(q.col_index(l));
    return evaluate_tuple(q, std::span<const std::size_t>(cols));
}

namespace detail {

class Bitset {
public:
    explicit Bitset(std::size_t bits = 0) : words_((bits + 63) / 64, 0) {}
    void set(std::size_t i) { words_[i / 64] |= std::uint64_t{1} << (i % 64); }
    bool any() const {
        return std::any_of(words_.begin(), words_.end(), [](std::uint64_t w) { return w != 0; });
    }
    std::size_t first() const {
        for (std::size_t k = 0; k < words_.size(); ++k)
            if (words_[k]) return k * 64 + static_cast<std::size_t>(std::countr_zero(words_[k]));
        return std::numeric_limits<std::size_t>::max();
    }
    Bitset& operator&=(const Bitset& o) {
        for (std::size_t k = 0; k < words_.size(); ++k) words_[k] &= o.words_[k];
        return *this;
    }
    friend Bitset operator&(Bitset a, const Bitset& b) { return a &= b; }
    friend bool operator==(const Bitset&, const Bitset&) = default;

private:
    std::vector<std::uint64_t> words_;
};

struct AxisCandidate {
    double r;
    Bitset low;   // x <= r
    Bitset high;  // x - eps >= r
};

// The classification of a point on one axis changes only when r crosses x or
// x - eps. Between two consecutive such values (or the ends 0 and 1 - eps)
// moving r to the upper end of its cell keeps every "x <= r" and every
// "x - eps >= r" that held before, so these finitely many thresholds are
// enough for an exact search.
inline std::vector<AxisCandidate> axis_candidates(const PointSet& a, std::size_t axis, double eps) {
    const double top = 1.0 - eps;
    std::vector<double> values{0.0, top};
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double x = a.point(i)[axis];
        for (double r : {x, x - eps})
            if (r >= 0.0 && r <= top) values.push_back(r);
    }
    std::sort(values.begin(), values.end());
    values.erase(std::unique(values.begin(), values.end()), values.end());

    std::vector<AxisCandidate> out;
    for (double r : values) {
        AxisCandidate cand{r, Bitset(a.size()), Bitset(a.size())};
        for (std::size_t i = 0; i < a.size(); ++i) {
            const double x = a.point(i)[axis];
            if (x <= r) cand.low.set(i);
            if (x - eps >= r) cand.high.set(i);
        }
        if (!cand.low.any() || !cand.high.any()) continue;
        const bool duplicate = std::any_of(out.begin(), out.end(), [&](const AxisCandidate& c) {
            return c.low == cand.low && c.high == cand.high;
        });
        if (!duplicate) out.push_back(std::move(cand));
    }
    return out;
}

// Depth-first over axes; cells[w] holds the points that realize the partial
// pattern w on the axes fixed so far. A branch dies as soon as one cell is
// empty, which is where most failures show up.
inline bool search_thresholds(const std::vector<std::vector<AxisCandidate>>& axes, std::size_t depth,
                              const std::vector<Bitset>& cells, std::vector<double>& chosen,
                              std::vector<Bitset>& result) {
    if (depth == axes.size()) {
        result = cells;
        return true;
    }
    std::vector<Bitset> next(cells.size() * 2);
    for (const auto& cand : axes[depth]) {
        bool alive = true;
        for (std::size_t w = 0; w < cells.size() && alive; ++w) {
            next[w] = cells[w] & cand.low;
            next[w | cells.size()] = cells[w] & cand.high;
            alive = next[w].any() && next[w | cells.size()].any();
        }
        if (!alive) continue;
        chosen[depth] = cand.r;
        if (search_thresholds(axes, depth + 1, next, chosen, result)) return true;
    }
    return false;
}

inline std::optional<BoxWitness> find_box_at(const PointSet& a, std::size_t d, double eps) {
    const std::size_t n = a.dim();
    std::vector<std::vector<AxisCandidate>> per_axis(n);
    for (std::size_t i = 0; i < n; ++i) per_axis[i] = axis_candidates(a, i, eps);

    Bitset everyone(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) everyone.set(i);

    std::vector<std::size_t> combo(d);
    for (std::size_t i = 0; i < d; ++i) combo[i] = i;
    for (;;) {
        std::vector<std::vector<AxisCandidate>> axes;
        bool viable = true;
        for (auto c : combo) {
            viable = viable && !per_axis[c].empty();
            axes.push_back(per_axis[c]);
        }
        if (viable) {
            std::vector<double> chosen(d);
            std::vector<Bitset> cells;
            if (search_thresholds(axes, 0, {everyone}, chosen, cells)) {
                BoxWitness box{combo, chosen, eps, {}};
                for (const auto& cell : cells) box.selectors.push_back(cell.first());
                return box;
            }
        }
        std::size_t i = d;
        while (i > 0 && combo[i - 1] == n - d + i - 1) --i;
        if (i == 0) return std::nullopt;
        ++combo[i - 1];
        for (std::size_t j = i; j < d; ++j) combo[j] = combo[j - 1] + 1;
    }
}

}  // namespace detail

/// Exhaustive search for a d-dimensional eps-box determined by A.
///
/// In strict mode the answer is whether some eps' > eps works. The largest
/// feasible gap is always one of the values x - y, x, 1 - y, 1 taken over
/// coordinates on a common axis, and feasibility is monotone in the gap, so
/// a strict box exists exactly when a box exists at the midpoint between eps
/// and the next such value above it. The returned witness carries that gap.
inline std::optional<BoxWitness> find_box(const PointSet& a, std::size_t d, double eps, bool strict = false) {
    if (d == 0 || d > a.dim()) throw std::invalid_argument("find_box: need 1 <= d <= dim");
    if (d >= 20) throw std::length_error("find_box: d too large for exhaustive search");
    if (strict ? !(eps >= 0.0 && eps <= 1.0) : !(eps > 0.0 && eps <= 1.0))
        throw std::invalid_argument("find_box: eps out of range");
    if (!strict) return detail::find_box_at(a, d, eps);

    double next_gap = std::numeric_limits<double>::infinity();
    auto consider = [&](double gap) {
        if (gap > eps && gap < next_gap) next_gap = gap;
    };
    consider(1.0);
    for (std::size_t axis = 0; axis < a.dim(); ++axis) {
        std::vector<double> xs;
        for (std::size_t i = 0; i < a.size(); ++i) xs.push_back(a.point(i)[axis]);
        std::sort(xs.begin(), xs.end());
        xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
        for (double x : xs) {
            consider(x);
            consider(1.0 - x);
        }
        for (std::size_t i = 0; i < xs.size(); ++i)
            for (std::size_t j = 0; j < i; ++j) consider(xs[i] - xs[j]);
    }
    if (!(next_gap <= 1.0)) return std::nullopt;
    return detail::find_box_at(a, d, 0.5 * (eps + next_gap));
}

struct UniformizedBox {
    std::vector<std::size_t> indices;
    double common_r = 0.0;
    double new_eps = 0.0;
};

/// Pigeonhole step: among d thresholds in [0, 1-eps] some window of width
/// eps/2 holds at least ceil(d eps / 2) of them. With r the largest threshold
/// in the window, the selected axes form a box with common threshold r and
/// gap eps/2 (low points stay <= r, high points are >= r + eps/2).
inline UniformizedBox uniformize_witness(std::span<const double> thresholds, double eps) {
    if (!(eps > 0.0 && eps <= 1.0)) throw std::invalid_argument("uniformize_witness: eps must lie in (0,1]");
    if (thresholds.empty()) throw std::invalid_argument("uniformize_witness: no thresholds");
    for (double t : thresholds)
        if (!(t >= 0.0 && t <= 1.0 - eps))
            throw std::invalid_argument("uniformize_witness: threshold outside [0, 1-eps]");

    std::vector<std::size_t> order(thresholds.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t x, std::size_t y) { return thresholds[x] < thresholds[y]; });

    std::size_t best_lo = 0, best_hi = 0;  // window [lo, hi)
    std::size_t hi = 0;
    for (std::size_t lo = 0; lo < order.size(); ++lo) {
        hi = std::max(hi, lo);
        while (hi < order.size() && thresholds[order[hi]] - thresholds[order[lo]] <= eps / 2) ++hi;
        if (hi - lo > best_hi - best_lo) best_lo = lo, best_hi = hi;
    }

    UniformizedBox out;
    out.indices.assign(order.begin() + static_cast<std::ptrdiff_t>(best_lo),
                       order.begin() + static_cast<std::ptrdiff_t>(best_hi));
    std::sort(out.indices.begin(), out.indices.end());
    out.common_r = thresholds[order[best_hi - 1]];
    out.new_eps = eps / 2;
    const auto needed = static_cast<std::size_t>(std::ceil(static_cast<double>(thresholds.size()) * eps / 2 - 1e-12));
    if (out.indices.size() < needed) throw std::logic_error("uniformize_witness: pigeonhole bound violated");
    return out;
}

namespace detail {

// Volume of the union of cubes p + [0,c]^k over the axes [axis, n). Sweeps the
// current axis between consecutive breakpoints {p_axis, p_axis + c}; a cube is
// active on a slab iff it contains the slab midpoint.
inline double union_volume(const std::vector<const double*>& pts, std::size_t axis, std::size_t n, double c) {
    if (pts.empty()) return 0.0;
    if (axis + 1 == n) {
        std::vector<double> starts;
        starts.reserve(pts.size());
        for (const double* p : pts) starts.push_back(p[axis]);
        std::sort(starts.begin(), starts.end());
        double total = 0.0;
        double lo = starts.front(), hi = starts.front() + c;
        for (double s : starts) {
            if (s > hi) {
                total += hi - lo;
                lo = s;
            }
            hi = s + c;
        }
        return total + (hi - lo);
    }

    std::vector<double> breaks;
    breaks.reserve(2 * pts.size());
    for (const double* p : pts) {
        breaks.push_back(p[axis]);
        breaks.push_back(p[axis] + c);
    }
    std::sort(breaks.begin(), breaks.end());
    breaks.erase(std::unique(breaks.begin(), breaks.end()), breaks.end());

    double total = 0.0;
    std::vector<const double*> active;
    for (std::size_t k = 0; k + 1 < breaks.size(); ++k) {
        const double mid = 0.5 * (breaks[k] + breaks[k + 1]);
        active.clear();
        for (const double* p : pts)
            if (p[axis] <= mid && mid < p[axis] + c) active.push_back(p);
        if (!active.empty()) total += (breaks[k + 1] - breaks[k]) * union_volume(active, axis + 1, n, c);
    }
    return total;
}

// Same sweep for at most 64 cubes, memoized on (axis, active set): slabs of
// the outer axes keep handing the inner axes identical subproblems.
class MaskedUnionVolume {
public:
    MaskedUnionVolume(const PointSet& a, double c) : a_(a), c_(c), memo_(a.dim()) {}

    double solve(std::uint64_t mask, std::size_t axis) {
        if (mask == 0) return 0.0;
        auto& table = memo_[axis];
        if (auto it = table.find(mask); it != table.end()) return it->second;
        const double v = compute(mask, axis);
        table.emplace(mask, v);
        return v;
    }

private:
    double compute(std::uint64_t mask, std::size_t axis) {
        std::vector<const double*> pts;
        for (std::uint64_t m = mask; m; m &= m - 1) pts.push_back(a_.point(static_cast<std::size_t>(std::countr_zero(m))).data());
        if (axis + 1 == a_.dim()) return union_volume(pts, axis, a_.dim(), c_);

        std::vector<double> breaks;
        breaks.reserve(2 * pts.size());
        for (const double* p : pts) {
            breaks.push_back(p[axis]);
            breaks.push_back(p[axis] + c_);
        }
        std::sort(breaks.begin(), breaks.end());
        breaks.erase(std::unique(breaks.begin(), breaks.end()), breaks.end());

        double total = 0.0;
        for (std::size_t k = 0; k + 1 < breaks.size(); ++k) {
            const double mid = 0.5 * (breaks[k] + breaks[k + 1]);
            std::uint64_t active = 0;
            for (std::uint64_t m = mask; m; m &= m - 1) {
                const auto i = static_cast<std::size_t>(std::countr_zero(m));
                const double x = a_.point(i)[axis];
                if (x <= mid && mid < x + c_) active |= std::uint64_t{1} << i;
            }
            if (active) total += (breaks[k + 1] - breaks[k]) * solve(active, axis + 1);
        }
        return total;
    }

    const PointSet& a_;
    double c_;
    std::vector<std::unordered_map<std::uint64_t, double>> memo_;
};

}  // namespace detail

inline constexpr std::size_t inflated_volume_max_dim = 8;

/// Exact Lebesgue measure of A + [0,c]^n (union of axis-aligned cubes).
inline double inflated_volume(const PointSet& a, double c) {
    if (a.dim() > inflated_volume_max_dim)
        throw std::invalid_argument("inflated_volume: dimension above " + std::to_string(inflated_volume_max_dim));
    if (!(c > 0.0)) throw std::invalid_argument("inflated_volume: c must be positive");
    if (a.size() <= 64) return detail::MaskedUnionVolume(a, c).solve(a.size() == 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << a.size()) - 1, 0);
    std::vector<const double*> pts;
    for (std::size_t i = 0; i < a.size(); ++i) pts.push_back(a.point(i).data());
    return detail::union_volume(pts, 0, a.dim(), c);
}

/// (c+eps)^(n-d) (1-eps)^d p_d(n): inflated volumes above this force a strict d-box.
inline double vcsbox_threshold(std::size_t n, std::size_t d, double c, double eps) {
    if (d > n) throw std::invalid_argument("vcsbox_threshold: d exceeds n");
    const std::uint64_t p = sauer_polynomial(d, n);
    const double pd = p == std::numeric_limits<std::uint64_t>::max() ? std::exp(log_sauer_polynomial(d, n))
                                                                     : static_cast<double>(p);
    return std::pow(c + eps, static_cast<double>(n - d)) * std::pow(1.0 - eps, static_cast<double>(d)) * pd;
}

/// (1+c) sqrt(2n log(vol(A + [0,c]^n) / c^n)), an upper bound for w_G(A).
inline double measure_width_bound(const PointSet& a, double c) {
    const double vol = inflated_volume(a, c);
    const double n = static_cast<double>(a.dim());
    const double ratio_log = std::log(vol) - n * std::log(c);
    return (1.0 + c) * std::sqrt(2.0 * n * std::max(0.0, ratio_log));
}

/// sqrt(2n log N), an upper bound for w_G of any N points in [0,1]^n.
inline double cardinality_width_bound(std::size_t n, std::uint64_t count) {
    if (n == 0 || count == 0) throw std::invalid_argument("cardinality_width_bound: need n >= 1 and N >= 1");
    return std::sqrt(2.0 * static_cast<double>(n) * std::log(static_cast<double>(count)));
}

// ---------------------------------------------------------------------------
// Growth of the Gaussian width of evaluation sets: g_Q(n).

enum class SearchMode { Exhaustive, RandomRestart };

inline const char* to_string(SearchMode m) { return m == SearchMode::Exhaustive ? "EXHAUSTIVE" : "RANDOM_RESTART"; }

struct GrowthPoint {
    std::size_t n = 0;
    Estimate estimate;
    std::vector<std::size_t> tuple;
    SearchMode mode = SearchMode::Exhaustive;
    std::uint64_t evaluations = 0;
};

/// Widths of Q(x) for many tuples x, all under one shared sample of Gaussian
/// directions (the same directions gaussian_mean_width draws for dim n).
class TupleWidthEvaluator {
public:
    TupleWidthEvaluator(const FunctionFamily& q, std::size_t n, const GaussianSamplerConfig& cfg)
        : q_(q), n_(n), cfg_(cfg), directions_(cfg.samples * n) {
        cfg.validate();
        if (n == 0) throw std::invalid_argument("TupleWidthEvaluator: n must be positive");
        if (q.row_count() == 0 || q.col_count() == 0)
            throw std::invalid_argument("TupleWidthEvaluator: empty family");
        parallel_chunks(cfg.samples, 4096, [&](std::size_t begin, std::size_t end) {
            for (std::size_t s = begin; s < end; ++s)
                gaussian_direction(cfg.seed, s, std::span<double>(directions_.data() + s * n, n));
        });
    }

    std::size_t samples() const { return cfg_.samples; }
    std::span<const double> direction(std::size_t s) const { return {directions_.data() + s * n_, n_}; }

    std::vector<double> width_samples(std::span<const std::size_t> tuple) const {
        const PointSet pts = evaluate_tuple(q_, tuple);
        std::vector<double> out(cfg_.samples);
        for (std::size_t s = 0; s < cfg_.samples; ++s) out[s] = sample_width(pts, s);
        return out;
    }

    double mean(std::span<const std::size_t> tuple) const {
        const PointSet pts = evaluate_tuple(q_, tuple);
        double sum = 0.0;
        for (std::size_t s = 0; s < cfg_.samples; ++s) sum += sample_width(pts, s);
        return sum / static_cast<double>(cfg_.samples);
    }

    Estimate estimate(std::span<const std::size_t> tuple) const {
        const auto values = width_samples(tuple);
        return summarize(values, cfg_.seed);
    }

private:
    double sample_width(const PointSet& pts, std::size_t s) const {
        const auto [hi, lo] = detail::support_range(pts, direction(s));
        return cfg_.antithetic ? hi - lo : 2.0 * hi;
    }

    const FunctionFamily& q_;
    std::size_t n_;
    GaussianSamplerConfig cfg_;
    std::vector<double> directions_;
};

namespace detail {

// Hill climbing state: dots[s * rows + r] = <q_r(x), g_s> for the current tuple.
class ClimbState {
public:
    ClimbState(const FunctionFamily& q, const TupleWidthEvaluator& eval, bool antithetic)
        : q_(q), eval_(eval), antithetic_(antithetic) {}

    void reset(const std::vector<std::size_t>& tuple) {
        tuple_ = tuple;
        const std::size_t rows = q_.row_count();
        dots_.assign(eval_.samples() * rows, 0.0);
        for (std::size_t s = 0; s < eval_.samples(); ++s) {
            const auto g = eval_.direction(s);
            for (std::size_t r = 0; r < rows; ++r) {
                double acc = 0.0;
                for (std::size_t i = 0; i < tuple_.size(); ++i) acc += q_(r, tuple_[i]) * g[i];
                dots_[s * rows + r] = acc;
            }
        }
    }

    double mean_with(std::size_t coord, std::size_t label) const {
        const std::size_t rows = q_.row_count();
        const std::size_t old = tuple_[coord];
        double sum = 0.0;
        for (std::size_t s = 0; s < eval_.samples(); ++s) {
            const double gi = eval_.direction(s)[coord];
            double hi = -std::numeric_limits<double>::infinity();
            double lo = std::numeric_limits<double>::infinity();
            const double* row = dots_.data() + s * rows;
            for (std::size_t r = 0; r < rows; ++r) {
                const double v = row[r] + (q_(r, label) - q_(r, old)) * gi;
                hi = std::max(hi, v);
                lo = std::min(lo, v);
            }
            sum += antithetic_ ? hi - lo : 2.0 * hi;
        }
        return sum / static_cast<double>(eval_.samples());
    }

    const std::vector<std::size_t>& tuple() const { return tuple_; }

private:
    const FunctionFamily& q_;
    const TupleWidthEvaluator& eval_;
    bool antithetic_;
    std::vector<std::size_t> tuple_;
    std::vector<double> dots_;
};

}  // namespace detail

/// Estimate of g_Q(n) = sup over n-tuples x (repetition allowed) of w_G(Q(x)).
///
/// Exhaustive when |X|^n <= budget, giving the true maximum of the estimates
/// under one shared direction sample. Otherwise random-restart hill climbing
/// over single-coordinate label changes until `budget` tuple evaluations are
/// spent; the result is then a lower bound. Reported values are always
/// recomputed from scratch so the two modes are directly comparable.
inline GrowthPoint estimate_g(const FunctionFamily& q, std::size_t n, const GaussianSamplerConfig& cfg,
                              std::uint64_t budget) {
    if (n == 0) throw std::invalid_argument("estimate_g: n must be positive");
    if (budget == 0) throw std::invalid_argument("estimate_g: budget must be positive");
    const TupleWidthEvaluator eval(q, n, cfg);
    const std::size_t labels = q.col_count();

    std::uint64_t space = 1;
    bool fits = true;
    for (std::size_t i = 0; i < n && fits; ++i) {
        if (space > budget / labels) fits = false;
        else space *= labels;
    }

    GrowthPoint out;
    out.n = n;
    if (fits && space <= budget) {
        auto decode = [&](std::uint64_t code) {
            std::vector<std::size_t> t(n);
            for (std::size_t i = n; i-- > 0;) {
                t[i] = static_cast<std::size_t>(code % labels);
                code /= labels;
            }
            return t;
        };
        std::vector<double> means(space);
        parallel_for(space, [&](std::size_t code) { means[code] = eval.mean(decode(code)); }, 16);
        const auto best = static_cast<std::uint64_t>(std::max_element(means.begin(), means.end()) - means.begin());
        out.tuple = decode(best);
        out.mode = SearchMode::Exhaustive;
        out.evaluations = space;
        out.estimate = eval.estimate(out.tuple);
        return out;
    }

    out.mode = SearchMode::RandomRestart;
    SplitMix64 rng(mix64(cfg.seed ^ 0x5851f42d4c957f2dULL) + n);
    detail::ClimbState state(q, eval, cfg.antithetic);
    double best = -std::numeric_limits<double>::infinity();
    std::uint64_t evals = 0;
    while (evals < budget) {
        std::vector<std::size_t> t(n);
        for (auto& x : t) x = static_cast<std::size_t>(rng.below(labels));
        double current = eval.mean(t);
        ++evals;
        state.reset(t);
        bool improved = true;
        while (improved && evals < budget) {
            improved = false;
            for (std::size_t i = 0; i < n && evals < budget; ++i)
                for (std::size_t b = 0; b < labels && evals < budget; ++b) {
                    if (b == state.tuple()[i]) continue;
                    const double cand = state.mean_with(i, b);
                    ++evals;
                    if (cand > current) {
                        t = state.tuple();
                        t[i] = b;
                        state.reset(t);
                        current = eval.mean(t);
                        improved = true;
                    }
                }
        }
        const double final_mean = eval.mean(state.tuple());
        if (final_mean > best) {
            best = final_mean;
            out.tuple = state.tuple();
        }
    }
    out.evaluations = evals;
    out.estimate = eval.estimate(out.tuple);
    return out;
}

/// Smallest n <= n_limit with g(n) < eps n sqrt(2/pi). For any family whose
/// g_Q stays below g this bounds the VC index of every slice Q_{r,r+eps}.
inline std::optional<std::size_t> vc_bound_from_growth(const std::function<double(std::size_t)>& g, double eps,
                                                       std::size_t n_limit) {
    const double slope = eps * std::sqrt(2.0 / std::numbers::pi);
    for (std::size_t n = 1; n <= n_limit; ++n)
        if (g(n) < slope * static_cast<double>(n)) return n;
    return std::nullopt;
}

// ---------------------------------------------------------------------------
// Dichotomy diagnostic.

enum class Verdict { Dependent, IndependentAtScale, Inconclusive };

inline const char* to_string(Verdict v) {
    switch (v) {
        case Verdict::Dependent: return "DEPENDENT";
        case Verdict::IndependentAtScale: return "INDEPENDENT-AT-SCALE";
        default: return "INCONCLUSIVE";
    }
}

struct BoxProbe {
    std::size_t d = 0;
    double eps = 0.0;
    bool found = false;
    std::vector<std::size_t> tuple;
};

/// Heuristic view of the three equivalent characterizations on finite data:
/// growth of g_Q(n)/n, slice VC indices at eps* = C^2/8, and box searches on
/// the widest tuples found. Finite data cannot decide a limit, so the raw
/// curve is always reported alongside the verdict.
struct DichotomyReport {
    std::vector<GrowthPoint> curve;  // n = 1..n_max
    double C = 0.0;                  // max of g(n)/n over the tail half
    double eps_star = 0.0;
    std::optional<VcProfile> vc_at_eps_star;
    std::vector<BoxProbe> boxes;
    double tail_slope = 0.0;  // least-squares slope of log(g(n)/n) against log n
    Verdict verdict = Verdict::Inconclusive;

    double ratio(std::size_t i) const { return curve[i].estimate.value / static_cast<double>(curve[i].n); }
};

struct ClassifyOptions {
    double dependent_slope = -0.2;    // at or below: decaying like a power of n
    double independent_slope = -0.08;  // at or above: flat
    std::vector<double> box_eps{0.1, 0.25, 0.5};
    std::size_t max_box_dim = 6;
    std::size_t profile_grid = 20;
};

inline DichotomyReport classify_family(const FunctionFamily& q, std::size_t n_max, const GaussianSamplerConfig& cfg,
                                       std::uint64_t budget, const ClassifyOptions& opts = {}) {
    if (n_max < 2) throw std::invalid_argument("classify_family: n_max must be at least 2");
    DichotomyReport rep;
    for (std::size_t n = 1; n <= n_max; ++n) rep.curve.push_back(estimate_g(q, n, cfg, budget));

    const std::size_t tail_start = std::max<std::size_t>(1, n_max / 2);
    double max_ratio = 0.0;
    std::vector<double> xs, ys;
    for (std::size_t i = 0; i < rep.curve.size(); ++i) {
        const double ratio = rep.ratio(i);
        max_ratio = std::max(max_ratio, ratio);
        if (rep.curve[i].n >= tail_start) {
            rep.C = std::max(rep.C, ratio);
            if (ratio > 0.0) {
                xs.push_back(std::log(static_cast<double>(rep.curve[i].n)));
                ys.push_back(std::log(ratio));
            }
        }
    }
    rep.eps_star = std::min(1.0, rep.C * rep.C / 8.0);
    if (rep.eps_star > 0.0) rep.vc_at_eps_star = vc_profile(q, rep.eps_star, opts.profile_grid);

    for (std::size_t d = 1; d <= std::min(n_max, opts.max_box_dim); ++d) {
        const auto& tuple = rep.curve[d - 1].tuple;
        const PointSet a = evaluate_tuple(q, tuple);
        for (double eps : opts.box_eps) rep.boxes.push_back({d, eps, find_box(a, d, eps).has_value(), tuple});
    }

    if (max_ratio <= 1e-12) {
        rep.verdict = Verdict::Dependent;
        return rep;
    }
    if (xs.size() >= 2) {
        double mx = 0, my = 0;
        for (std::size_t i = 0; i < xs.size(); ++i) mx += xs[i], my += ys[i];
        mx /= static_cast<double>(xs.size());
        my /= static_cast<double>(xs.size());
        double sxy = 0, sxx = 0;
        for (std::size_t i = 0; i < xs.size(); ++i) {
            sxy += (xs[i] - mx) * (ys[i] - my);
            sxx += (xs[i] - mx) * (xs[i] - mx);
        }
        rep.tail_slope = sxy / sxx;
        if (rep.tail_slope <= opts.dependent_slope) rep.verdict = Verdict::Dependent;
        else if (rep.tail_slope >= opts.independent_slope) rep.verdict = Verdict::IndependentAtScale;
    } else if (xs.empty()) {
        rep.verdict = Verdict::Dependent;  // the tail collapsed to zero width
    }
    return rep;
}

}  // namespace vcwidth
