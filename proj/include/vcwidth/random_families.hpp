#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "box_analysis.hpp"
#include "convex_geometry.hpp"
#include "vc_combinatorics.hpp"

namespace vcwidth {

struct RandomAtom {
    double weight;
    FunctionFamily family;
};

/// A finitely supported random family phi: Omega -> [0,1]^{X x Y}. Every atom
/// has the same row and column ids; weights are positive and sum to one.
class RandomFamily {
public:
    explicit RandomFamily(std::vector<RandomAtom> atoms) : atoms_(std::move(atoms)) {
        if (atoms_.empty()) throw std::invalid_argument("RandomFamily: no atoms");
        double total = 0.0;
        for (std::size_t k = 0; k < atoms_.size(); ++k) {
            if (!(atoms_[k].weight > 0.0)) throw std::invalid_argument("RandomFamily: atom " + std::to_string(k) + " has non-positive weight");
            total += atoms_[k].weight;
            if (atoms_[k].family.row_ids() != atoms_[0].family.row_ids() ||
                atoms_[k].family.col_ids() != atoms_[0].family.col_ids())
                throw std::invalid_argument("RandomFamily: atom " + std::to_string(k) + " differs in shape from atom 0");
        }
        if (!(std::abs(total - 1.0) <= 1e-12))
            throw std::invalid_argument("RandomFamily: weights sum to " + std::to_string(total) + ", not 1");
    }

    const std::vector<RandomAtom>& atoms() const { return atoms_; }
    std::size_t size() const { return atoms_.size(); }
    const FunctionFamily& shape() const { return atoms_.front().family; }

private:
    std::vector<RandomAtom> atoms_;
};

/// E[phi](x, y) = sum_k w_k phi_k(x, y).
inline FunctionFamily expectation(const RandomFamily& rf) {
    const auto& shape = rf.shape();
    std::vector<double> values(shape.values().size(), 0.0);
    for (const auto& atom : rf.atoms())
        for (std::size_t i = 0; i < values.size(); ++i) values[i] += atom.weight * atom.family.values()[i];
    for (double& v : values) v = std::clamp(v, 0.0, 1.0);  // rounding can step past 1
    return FunctionFamily(shape.row_ids(), shape.col_ids(), std::move(values));
}

/// P[S](x, y) for a random relation given by crisp atoms; equals E[chi_S].
inline FunctionFamily probability_of_relation(const RandomFamily& rf) {
    for (std::size_t k = 0; k < rf.size(); ++k)
        if (!rf.atoms()[k].family.is_crisp())
            throw std::invalid_argument("probability_of_relation: atom " + std::to_string(k) + " is not a crisp relation");
    return expectation(rf);
}

/// Vertex list of the integral body sum_k w_k Conv(phi_k(x)).
inline PointSet integral_of_bodies(const RandomFamily& rf, std::span<const std::size_t> tuple) {
    std::vector<PointSet> bodies;
    std::vector<double> weights;
    for (const auto& atom : rf.atoms()) {
        bodies.push_back(evaluate_tuple(atom.family, tuple));
        weights.push_back(atom.weight);
    }
    return minkowski_combine(bodies, weights);
}

struct ExpectationTupleCheck {
    std::vector<std::size_t> tuple;
    double lhs = 0.0;  // estimate of w_G(E[phi](x))
    double rhs = 0.0;  // sum_k w_k estimate of w_G(phi_k(x))
    double min_slack = 0.0;
    double max_slack = 0.0;
    std::size_t violations = 0;  // samples with rhs - lhs below -tol
};

struct ExpectationWidthReport {
    std::vector<ExpectationTupleCheck> tuples;
    double min_slack = std::numeric_limits<double>::infinity();
    double max_slack = -std::numeric_limits<double>::infinity();
    std::size_t violations = 0;

    bool ok() const { return violations == 0; }
};

/// w(E[phi](x), g) <= sum_k w_k w(phi_k(x), g) for every direction g, because
/// each point of E[phi](x) lies in the integral body whose support function is
/// the weighted sum. All atoms use the same directions, so the check is per
/// sample and needs only rounding headroom.
inline ExpectationWidthReport expectation_width_check(const RandomFamily& rf,
                                                      const std::vector<std::vector<std::size_t>>& tuples,
                                                      const GaussianSamplerConfig& cfg, double tol = 1e-9) {
    const auto mean = expectation(rf);
    ExpectationWidthReport rep;
    for (const auto& t : tuples) {
        const auto left = width_samples(evaluate_tuple(mean, t), cfg);
        std::vector<double> right(left.size(), 0.0);
        for (const auto& atom : rf.atoms()) {
            const auto w = width_samples(evaluate_tuple(atom.family, t), cfg);
            for (std::size_t s = 0; s < w.size(); ++s) right[s] += atom.weight * w[s];
        }
        ExpectationTupleCheck rec;
        rec.tuple = t;
        rec.lhs = summarize(left, cfg.seed).value;
        rec.rhs = summarize(right, cfg.seed).value;
        rec.min_slack = std::numeric_limits<double>::infinity();
        rec.max_slack = -std::numeric_limits<double>::infinity();
        for (std::size_t s = 0; s < left.size(); ++s) {
            const double slack = right[s] - left[s];
            rec.min_slack = std::min(rec.min_slack, slack);
            rec.max_slack = std::max(rec.max_slack, slack);
            if (slack < -tol) ++rec.violations;
        }
        rep.min_slack = std::min(rep.min_slack, rec.min_slack);
        rep.max_slack = std::max(rep.max_slack, rec.max_slack);
        rep.violations += rec.violations;
        rep.tuples.push_back(std::move(rec));
    }
    return rep;
}

struct EnvelopeValue {
    double value = 0.0;
    double best_eps = 0.0;
    std::vector<double> skipped;  // grid points whose radicand was negative
};

/// min over the grid of 2n sqrt(2e + (d(e)/n) log((1-e)/(1+e)) + log p_{d(e)}(n) / n),
/// a growth envelope shared by every member of a uniformly dependent family.
inline EnvelopeValue uniform_dependence_envelope(const std::function<std::size_t(double)>& d_of_eps, std::size_t n,
                                                 std::span<const double> eps_grid) {
    if (eps_grid.empty()) throw std::invalid_argument("uniform_dependence_envelope: empty grid");
    if (n == 0) throw std::invalid_argument("uniform_dependence_envelope: n must be positive");
    EnvelopeValue out;
    out.value = std::numeric_limits<double>::infinity();
    const double nn = static_cast<double>(n);
    for (double eps : eps_grid) {
        if (!(eps > 0.0 && eps < 1.0)) throw std::invalid_argument("uniform_dependence_envelope: grid point outside (0,1)");
        const std::size_t d = d_of_eps(eps);
        if (d == 0) throw std::invalid_argument("uniform_dependence_envelope: d(eps) must be positive");
        const double radicand = 2.0 * eps + static_cast<double>(d) / nn * std::log((1.0 - eps) / (1.0 + eps)) +
                                log_sauer_polynomial(d, n) / nn;
        if (radicand < 0.0) {
            out.skipped.push_back(eps);
            continue;
        }
        const double v = 2.0 * nn * std::sqrt(radicand);
        if (v < out.value) {
            out.value = v;
            out.best_eps = eps;
        }
    }
    if (out.skipped.size() == eps_grid.size())
        throw std::domain_error("uniform_dependence_envelope: every grid point has a negative radicand");
    return out;
}

}  // namespace vcwidth
