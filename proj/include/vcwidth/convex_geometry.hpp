#pragma once

// Convex compacts given by finite point sets. Hulls are never built: every
// width goes through the support function of the raw point list, which equals
// the support function of its convex hull.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "parallel.hpp"
#include "random.hpp"

namespace vcwidth {

/// A nonempty finite list of points in R^dim, stored row-major.
class PointSet {
public:
    PointSet(std::size_t dim, std::vector<double> coords) : dim_(dim), coords_(std::move(coords)) {
        if (dim_ == 0) throw std::invalid_argument("PointSet: dimension must be positive");
        if (coords_.empty() || coords_.size() % dim_ != 0)
            throw std::invalid_argument("PointSet: need a nonempty list of points of length " +
                                        std::to_string(dim_));
        for (double x : coords_)
            if (!std::isfinite(x)) throw std::invalid_argument("PointSet: non-finite coordinate");
    }

    static PointSet from_rows(const std::vector<std::vector<double>>& rows) {
        if (rows.empty()) throw std::invalid_argument("PointSet: no points");
        const std::size_t dim = rows.front().size();
        std::vector<double> coords;
        coords.reserve(dim * rows.size());
        for (const auto& row : rows) {
            if (row.size() != dim)
                throw std::invalid_argument("PointSet: all points must have length " + std::to_string(dim));
            coords.insert(coords.end(), row.begin(), row.end());
        }
        return PointSet(dim, std::move(coords));
    }

    std::size_t dim() const { return dim_; }
    std::size_t size() const { return coords_.size() / dim_; }
    std::span<const double> point(std::size_t i) const { return {coords_.data() + i * dim_, dim_}; }
    const std::vector<double>& coords() const { return coords_; }

    std::vector<std::vector<double>> rows() const {
        std::vector<std::vector<double>> out;
        out.reserve(size());
        for (std::size_t i = 0; i < size(); ++i) out.emplace_back(point(i).begin(), point(i).end());
        return out;
    }

    friend bool operator==(const PointSet&, const PointSet&) = default;

private:
    std::size_t dim_;
    std::vector<double> coords_;
};

/// Monte Carlo estimate; std_error is the sample standard deviation over sqrt(samples).
struct Estimate {
    double value = 0.0;
    double std_error = 0.0;
    std::uint64_t samples = 0;
    std::uint64_t seed = 0;
};

struct GaussianSamplerConfig {
    std::uint64_t seed = 0;
    std::uint64_t samples = 100000;
    /// One sample is w(K, g) = h(g) + h(-g) rather than 2 h(g).
    bool antithetic = true;

    void validate() const {
        if (samples < 2) throw std::invalid_argument("GaussianSamplerConfig: samples must be at least 2");
    }
};

inline double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

namespace detail {
inline void require_dim(const PointSet& p, std::size_t n, const char* what) {
    if (p.dim() != n)
        throw std::invalid_argument(std::string(what) + ": dimension mismatch (" + std::to_string(n) +
                                    " vs " + std::to_string(p.dim()) + ")");
}

/// max and min of <x, y> over the points.
inline std::pair<double, double> support_range(const PointSet& p, std::span<const double> y) {
    double hi = -std::numeric_limits<double>::infinity();
    double lo = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < p.size(); ++i) {
        const double v = dot(p.point(i), y);
        hi = std::max(hi, v);
        lo = std::min(lo, v);
    }
    return {hi, lo};
}
}  // namespace detail

/// h_P(y) = max over points of <x, y>.
inline double support(const PointSet& p, std::span<const double> y) {
    detail::require_dim(p, y.size(), "support");
    double hi = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < p.size(); ++i) hi = std::max(hi, dot(p.point(i), y));
    return hi;
}

/// w(P, u) = h_P(u) + h_P(-u).
inline double width_in_direction(const PointSet& p, std::span<const double> u) {
    detail::require_dim(p, u.size(), "width_in_direction");
    bool nonzero = false;
    for (double x : u) nonzero = nonzero || x != 0.0;
    if (!nonzero) throw std::invalid_argument("width_in_direction: zero direction");
    const auto [hi, lo] = detail::support_range(p, u);
    return hi - lo;
}

/// Evaluates f(g) for every Gaussian direction g of the run described by cfg
/// and returns the per-sample values in sample order.
template <typename F>
std::vector<double> sample_directions(std::size_t dim, const GaussianSamplerConfig& cfg, F&& f) {
    cfg.validate();
    std::vector<double> values(cfg.samples);
    parallel_chunks(cfg.samples, 4096, [&](std::size_t begin, std::size_t end) {
        std::vector<double> g(dim);
        for (std::size_t i = begin; i < end; ++i) {
            gaussian_direction(cfg.seed, i, g);
            values[i] = f(std::span<const double>(g));
        }
    });
    return values;
}

/// Mean and standard error of per-sample values, summed in sample order.
inline Estimate summarize(std::span<const double> values, std::uint64_t seed) {
    const std::size_t n = values.size();
    if (n == 0) throw std::invalid_argument("summarize: no samples");
    double sum = 0.0;
    for (double v : values) sum += v;
    const double mean = sum / static_cast<double>(n);
    double ss = 0.0;
    for (double v : values) ss += (v - mean) * (v - mean);
    const double sd = n > 1 ? std::sqrt(ss / static_cast<double>(n - 1)) : 0.0;
    return {mean, sd / std::sqrt(static_cast<double>(n)), n, seed};
}

/// Per-sample draws of the Gaussian width of P: w(P, g) when antithetic,
/// 2 h_P(g) otherwise.
inline std::vector<double> width_samples(const PointSet& p, const GaussianSamplerConfig& cfg) {
    return sample_directions(p.dim(), cfg, [&](std::span<const double> g) {
        const auto [hi, lo] = detail::support_range(p, g);
        return cfg.antithetic ? hi - lo : 2.0 * hi;
    });
}

/// Monte Carlo estimate of w_G(Conv P) = 2 E[h_P(G_n)].
inline Estimate gaussian_mean_width(const PointSet& p, const GaussianSamplerConfig& cfg) {
    const auto values = width_samples(p, cfg);
    return summarize(values, cfg.seed);
}

/// Exact w_G of the box prod [0, side_i]: sqrt(2/pi) * sum of sides.
inline double box_mean_width_exact(std::span<const double> sides) {
    double total = 0.0;
    for (double s : sides) {
        if (!(s >= 0.0)) throw std::invalid_argument("box_mean_width_exact: negative side");
        total += s;
    }
    return std::sqrt(2.0 / std::numbers::pi) * total;
}

/// gamma_n = E ||G_n||_2 = sqrt(2) Gamma((n+1)/2) / Gamma(n/2), via log-Gamma.
inline double gamma_n(std::size_t n) {
    if (n == 0) throw std::invalid_argument("gamma_n: n must be positive");
    const double half = static_cast<double>(n) / 2.0;
    return std::numbers::sqrt2 * std::exp(std::lgamma(half + 0.5) - std::lgamma(half));
}

/// Point list whose hull is sum_k weights[k] * Conv(bodies[k]): every cross
/// combination of one point per body.
inline PointSet minkowski_combine(std::span<const PointSet> bodies, std::span<const double> weights) {
    if (bodies.empty()) throw std::invalid_argument("minkowski_combine: no bodies");
    if (weights.size() != bodies.size())
        throw std::invalid_argument("minkowski_combine: weights and bodies differ in length");
    const std::size_t dim = bodies.front().dim();
    std::size_t total = 1;
    for (std::size_t k = 0; k < bodies.size(); ++k) {
        detail::require_dim(bodies[k], dim, "minkowski_combine");
        if (!(weights[k] >= 0.0)) throw std::invalid_argument("minkowski_combine: negative weight");
        if (total > (std::size_t{1} << 26) / bodies[k].size())
            throw std::length_error("minkowski_combine: too many cross combinations");
        total *= bodies[k].size();
    }

    std::vector<double> coords(total * dim, 0.0);
    // Mixed-radix walk over one index per body.
    std::vector<std::size_t> pick(bodies.size(), 0);
    for (std::size_t out = 0; out < total; ++out) {
        double* dst = coords.data() + out * dim;
        for (std::size_t k = 0; k < bodies.size(); ++k) {
            const auto pt = bodies[k].point(pick[k]);
            for (std::size_t j = 0; j < dim; ++j) dst[j] += weights[k] * pt[j];
        }
        for (std::size_t k = bodies.size(); k-- > 0;) {
            if (++pick[k] < bodies[k].size()) break;
            pick[k] = 0;
        }
    }
    return PointSet(dim, std::move(coords));
}

}  // namespace vcwidth
