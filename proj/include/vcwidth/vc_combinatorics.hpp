#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

namespace vcwidth {

namespace detail {
inline std::unordered_map<std::string, std::size_t> index_labels(const std::vector<std::string>& ids,
                                                                 const char* what) {
    std::unordered_map<std::string, std::size_t> index;
    index.reserve(ids.size());
    for (std::size_t i = 0; i < ids.size(); ++i)
        if (!index.emplace(ids[i], i).second)
            throw std::invalid_argument(std::string("duplicate ") + what + " id '" + ids[i] + "'");
    return index;
}

inline std::size_t lookup_label(const std::unordered_map<std::string, std::size_t>& index,
                                const std::string& label) {
    auto it = index.find(label);
    if (it == index.end()) throw std::out_of_range("unknown column label '" + label + "'");
    return it->second;
}
}  // namespace detail

/// A finite family of [0,1]-valued functions: rows are functions q, columns
/// are points x, values(r, c) = q_r(x_c). Also the row family phi^Y of a
/// two-variable phi: X x Y -> [0,1].
class FunctionFamily {
public:
    FunctionFamily(std::vector<std::string> row_ids, std::vector<std::string> col_ids, std::vector<double> values)
        : row_ids_(std::move(row_ids)), col_ids_(std::move(col_ids)), values_(std::move(values)) {
        detail::index_labels(row_ids_, "row");
        col_index_ = detail::index_labels(col_ids_, "column");
        if (values_.size() != row_ids_.size() * col_ids_.size())
            throw std::invalid_argument("FunctionFamily: value matrix does not match id sequences");
        for (std::size_t r = 0; r < row_ids_.size(); ++r)
            for (std::size_t c = 0; c < col_ids_.size(); ++c) {
                const double v = (*this)(r, c);
                if (!(v >= 0.0 && v <= 1.0))
                    throw std::domain_error("FunctionFamily: value " + std::to_string(v) + " outside [0,1] at row '" +
                                            row_ids_[r] + "', column '" + col_ids_[c] + "'");
            }
    }

    static FunctionFamily from_matrix(std::vector<std::string> row_ids, std::vector<std::string> col_ids,
                                      const std::vector<std::vector<double>>& matrix) {
        std::vector<double> flat;
        for (std::size_t r = 0; r < matrix.size(); ++r) {
            if (matrix[r].size() != col_ids.size())
                throw std::invalid_argument("FunctionFamily: row " + std::to_string(r) + " has " +
                                            std::to_string(matrix[r].size()) + " values, expected " +
                                            std::to_string(col_ids.size()));
            flat.insert(flat.end(), matrix[r].begin(), matrix[r].end());
        }
        if (matrix.size() != row_ids.size())
            throw std::invalid_argument("FunctionFamily: matrix has " + std::to_string(matrix.size()) +
                                        " rows, expected " + std::to_string(row_ids.size()));
        return FunctionFamily(std::move(row_ids), std::move(col_ids), std::move(flat));
    }

    std::size_t row_count() const { return row_ids_.size(); }
    std::size_t col_count() const { return col_ids_.size(); }
    double operator()(std::size_t r, std::size_t c) const { return values_[r * col_ids_.size() + c]; }
    std::span<const double> row(std::size_t r) const { return {values_.data() + r * col_ids_.size(), col_ids_.size()}; }

    const std::vector<std::string>& row_ids() const { return row_ids_; }
    const std::vector<std::string>& col_ids() const { return col_ids_; }
    const std::vector<double>& values() const { return values_; }
    std::size_t col_index(const std::string& label) const { return detail::lookup_label(col_index_, label); }

    bool is_crisp() const {
        return std::all_of(values_.begin(), values_.end(), [](double v) { return v == 0.0 || v == 1.0; });
    }

    friend bool operator==(const FunctionFamily& a, const FunctionFamily& b) {
        return a.row_ids_ == b.row_ids_ && a.col_ids_ == b.col_ids_ && a.values_ == b.values_;
    }

private:
    std::vector<std::string> row_ids_;
    std::vector<std::string> col_ids_;
    std::vector<double> values_;
    std::unordered_map<std::string, std::size_t> col_index_;
};

enum class Membership : std::uint8_t { Out, In, Unknown };

/// Rows are fuzzy subsets of the columns: each entry is in, out, or unknown.
class FuzzyFamily {
public:
    FuzzyFamily(std::vector<std::string> row_ids, std::vector<std::string> col_ids, std::vector<Membership> states)
        : row_ids_(std::move(row_ids)), col_ids_(std::move(col_ids)), states_(std::move(states)) {
        detail::index_labels(row_ids_, "row");
        col_index_ = detail::index_labels(col_ids_, "column");
        if (states_.size() != row_ids_.size() * col_ids_.size())
            throw std::invalid_argument("FuzzyFamily: state matrix does not match id sequences");
    }

    std::size_t row_count() const { return row_ids_.size(); }
    std::size_t col_count() const { return col_ids_.size(); }
    Membership operator()(std::size_t r, std::size_t c) const { return states_[r * col_ids_.size() + c]; }

    const std::vector<std::string>& row_ids() const { return row_ids_; }
    const std::vector<std::string>& col_ids() const { return col_ids_; }
    const std::vector<Membership>& states() const { return states_; }
    std::size_t col_index(const std::string& label) const { return detail::lookup_label(col_index_, label); }

    friend bool operator==(const FuzzyFamily& a, const FuzzyFamily& b) {
        return a.row_ids_ == b.row_ids_ && a.col_ids_ == b.col_ids_ && a.states_ == b.states_;
    }

private:
    std::vector<std::string> row_ids_;
    std::vector<std::string> col_ids_;
    std::vector<Membership> states_;
    std::unordered_map<std::string, std::size_t> col_index_;
};

/// VC index of a fuzzy family. When at_least is set the search ran out at
/// `cap` and the true index is only known to be >= index.
struct VcReport {
    std::size_t index = 0;
    bool at_least = false;
    std::size_t cap = 0;
    /// Lexicographically first column set of size index - 1 that is shattered.
    std::optional<std::vector<std::string>> witness;
};

struct ShatterResult {
    std::uint64_t count = 0;
    /// Column indices of the lexicographically first maximizing subset.
    std::vector<std::size_t> witness;
};

struct VcProfilePoint {
    double r = 0.0;
    VcReport report;
};

/// Slice VC indices of Q_{r, r+eps} over a uniform grid of r. The maximum is
/// the empirical d(eps); sampling r on a grid makes it a lower bound for the
/// supremum over all r.
struct VcProfile {
    double eps = 0.0;
    std::size_t grid = 0;
    std::vector<VcProfilePoint> points;
    std::size_t max_index = 0;
    bool max_at_least = false;
};

// ---------------------------------------------------------------------------

/// p_d(n) = sum_{k<d} C(n, k), saturating at UINT64_MAX.
inline std::uint64_t sauer_polynomial(std::uint64_t d, std::uint64_t n) {
    constexpr std::uint64_t top = std::numeric_limits<std::uint64_t>::max();
    const std::uint64_t terms = std::min<std::uint64_t>(d, n + 1);
    std::uint64_t sum = 0;
    unsigned __int128 binom = 1;
    for (std::uint64_t k = 0; k < terms; ++k) {
        if (binom > top || sum > top - static_cast<std::uint64_t>(binom)) return top;
        sum += static_cast<std::uint64_t>(binom);
        if (k + 1 < terms) {
            // C(n,k+1) = C(n,k) (n-k) / (k+1); binom <= 2^64 so the product fits.
            binom = binom * (n - k) / (k + 1);
        }
    }
    return sum;
}

/// log p_d(n) in floating point, usable far beyond the 64-bit range.
inline double log_sauer_polynomial(std::uint64_t d, std::uint64_t n) {
    const std::uint64_t terms = std::min<std::uint64_t>(d, n + 1);
    if (terms == 0) return -std::numeric_limits<double>::infinity();
    const double nn = static_cast<double>(n);
    std::vector<double> logs(terms);
    for (std::uint64_t k = 0; k < terms; ++k) {
        const double kk = static_cast<double>(k);
        logs[k] = std::lgamma(nn + 1) - std::lgamma(kk + 1) - std::lgamma(nn - kk + 1);
    }
    const double top = *std::max_element(logs.begin(), logs.end());
    double acc = 0.0;
    for (double l : logs) acc += std::exp(l - top);
    return top + std::log(acc);
}

/// Q_{r,s}: value >= s is in, value <= r is out, anything strictly between is unknown.
inline FuzzyFamily slice_family(const FunctionFamily& q, double r, double s) {
    if (!(r >= 0.0 && s <= 1.0)) throw std::invalid_argument("slice_family: thresholds must lie in [0,1]");
    if (!(r < s)) throw std::invalid_argument("slice_family: need r < s");
    std::vector<Membership> states;
    states.reserve(q.values().size());
    for (double v : q.values())
        states.push_back(v >= s ? Membership::In : v <= r ? Membership::Out : Membership::Unknown);
    return FuzzyFamily(q.row_ids(), q.col_ids(), std::move(states));
}

/// Transpose: the family S_X obtained from S^Y.
inline FuzzyFamily dual_relation(const FuzzyFamily& f) {
    std::vector<Membership> states(f.states().size());
    for (std::size_t r = 0; r < f.row_count(); ++r)
        for (std::size_t c = 0; c < f.col_count(); ++c) states[c * f.row_count() + r] = f(r, c);
    return FuzzyFamily(f.col_ids(), f.row_ids(), std::move(states));
}

/// Transpose of a function family (phi_X from phi^Y).
inline FunctionFamily dual_family(const FunctionFamily& q) {
    std::vector<double> values(q.values().size());
    for (std::size_t r = 0; r < q.row_count(); ++r)
        for (std::size_t c = 0; c < q.col_count(); ++c) values[c * q.row_count() + r] = q(r, c);
    return FunctionFamily(q.col_ids(), q.row_ids(), std::move(values));
}

namespace detail {

/// Per-row bit masks over at most 64 columns.
struct PackedRows {
    std::vector<std::uint64_t> in;
    std::vector<std::uint64_t> known;
};

inline PackedRows pack_rows(const FuzzyFamily& f) {
    if (f.col_count() > 64) throw std::length_error("exhaustive subset search supports at most 64 columns");
    PackedRows packed;
    packed.in.resize(f.row_count(), 0);
    packed.known.resize(f.row_count(), 0);
    for (std::size_t r = 0; r < f.row_count(); ++r)
        for (std::size_t c = 0; c < f.col_count(); ++c) {
            const auto s = f(r, c);
            if (s != Membership::Unknown) packed.known[r] |= std::uint64_t{1} << c;
            if (s == Membership::In) packed.in[r] |= std::uint64_t{1} << c;
        }
    return packed;
}

/// Distinct traces on the column mask; (in & mask) identifies the pattern.
inline std::size_t trace_count(const PackedRows& rows, std::uint64_t mask, std::vector<std::uint64_t>& scratch) {
    scratch.clear();
    for (std::size_t r = 0; r < rows.in.size(); ++r)
        if ((rows.known[r] & mask) == mask) scratch.push_back(rows.in[r] & mask);
    std::sort(scratch.begin(), scratch.end());
    return static_cast<std::size_t>(std::unique(scratch.begin(), scratch.end()) - scratch.begin());
}

inline bool is_shattered(const PackedRows& rows, std::uint64_t mask, std::vector<std::uint64_t>& scratch) {
    const int size = std::popcount(mask);
    if (size >= 63 || rows.in.size() < (std::size_t{1} << size)) return false;
    return trace_count(rows, mask, scratch) == (std::size_t{1} << size);
}

inline std::vector<std::string> mask_labels(const FuzzyFamily& f, std::uint64_t mask) {
    std::vector<std::string> out;
    for (std::size_t c = 0; c < f.col_count(); ++c)
        if (mask >> c & 1) out.push_back(f.col_ids()[c]);
    return out;
}

}  // namespace detail

/// Patterns realized on `cols` by rows that determine every listed column.
/// Bit j of a pattern is the membership of cols[j].
inline std::vector<std::uint64_t> trace(const FuzzyFamily& f, std::span<const std::string> cols) {
    if (cols.size() > 64) throw std::length_error("trace: at most 64 columns");
    std::vector<std::size_t> idx;
    idx.reserve(cols.size());
    for (const auto& c : cols) idx.push_back(f.col_index(c));
    std::vector<std::uint64_t> patterns;
    for (std::size_t r = 0; r < f.row_count(); ++r) {
        std::uint64_t pattern = 0;
        bool determined = true;
        for (std::size_t j = 0; j < idx.size() && determined; ++j) {
            const auto s = f(r, idx[j]);
            determined = s != Membership::Unknown;
            if (s == Membership::In) pattern |= std::uint64_t{1} << j;
        }
        if (determined) patterns.push_back(pattern);
    }
    std::sort(patterns.begin(), patterns.end());
    patterns.erase(std::unique(patterns.begin(), patterns.end()), patterns.end());
    return patterns;
}

/// f(n): maximum number of traces over all n-subsets of columns, by exhaustive search.
inline ShatterResult shatter_function(const FuzzyFamily& f, std::size_t n) {
    const std::size_t m = f.col_count();
    if (n > m) throw std::invalid_argument("shatter_function: n exceeds the number of columns");
    const auto rows = detail::pack_rows(f);
    const std::uint64_t ceiling =
        std::min<std::uint64_t>(n >= 64 ? std::numeric_limits<std::uint64_t>::max() : std::uint64_t{1} << n,
                                f.row_count());

    ShatterResult best;
    std::vector<std::size_t> combo(n);
    for (std::size_t i = 0; i < n; ++i) combo[i] = i;
    std::vector<std::uint64_t> scratch;
    bool first = true;
    for (;;) {
        std::uint64_t mask = 0;
        for (auto c : combo) mask |= std::uint64_t{1} << c;
        const std::uint64_t count = detail::trace_count(rows, mask, scratch);
        if (first || count > best.count) {
            best = {count, combo};
            first = false;
            if (count == ceiling) break;  // nothing later can beat it
        }
        // next combination in lexicographic order
        std::size_t i = n;
        while (i > 0 && combo[i - 1] == m - n + i - 1) --i;
        if (i == 0) break;
        ++combo[i - 1];
        for (std::size_t j = i; j < n; ++j) combo[j] = combo[j - 1] + 1;
    }
    return best;
}

/// Least d <= min(cap, |cols|) with f(d) < 2^d; AT_LEAST(cap) when no such d
/// is found. Shattered sets are closed under subsets, so each level is grown
/// only from shattered sets of the previous level.
inline VcReport vc_index(const FuzzyFamily& f, std::size_t cap = 0) {
    const std::size_t m = f.col_count();
    if (cap == 0) cap = m + 1;
    if (cap > m + 1) throw std::invalid_argument("vc_index: cap exceeds number of columns + 1");

    VcReport report;
    report.cap = cap;
    if (f.row_count() == 0) return report;  // f(0) = 0 < 1

    const auto rows = detail::pack_rows(f);
    std::vector<std::uint64_t> scratch;
    std::vector<std::uint64_t> level{0};  // shattered sets of the current size, lexicographic
    std::vector<std::uint64_t> first_shattered{0};
    const std::size_t last = std::min(cap, m);
    for (std::size_t d = 1; d <= last; ++d) {
        std::unordered_set<std::uint64_t> previous(level.begin(), level.end());
        std::vector<std::uint64_t> next;
        for (std::uint64_t s : level) {
            const std::size_t start = s == 0 ? 0 : 64 - static_cast<std::size_t>(std::countl_zero(s));
            for (std::size_t j = start; j < m; ++j) {
                const std::uint64_t t = s | (std::uint64_t{1} << j);
                bool closed = true;
                for (std::uint64_t rest = s; rest && closed; rest &= rest - 1)
                    closed = previous.count(t & ~(rest & -rest)) > 0;
                if (closed && detail::is_shattered(rows, t, scratch)) next.push_back(t);
            }
        }
        if (next.empty()) {
            report.index = d;
            report.witness = detail::mask_labels(f, level.front());
            return report;
        }
        first_shattered.push_back(next.front());
        level = std::move(next);
    }
    report.index = cap;
    report.at_least = true;
    report.witness = detail::mask_labels(f, first_shattered[cap - 1]);
    return report;
}

/// Slice VC indices of Q_{r, r+eps} at r = k (1 - eps) / grid, k = 0..grid.
inline VcProfile vc_profile(const FunctionFamily& q, double eps, std::size_t grid = 20, std::size_t cap = 0) {
    if (!(eps > 0.0 && eps <= 1.0)) throw std::invalid_argument("vc_profile: eps must lie in (0,1]");
    if (grid == 0) throw std::invalid_argument("vc_profile: grid must be positive");
    VcProfile profile{eps, grid, {}, 0, false};
    const std::size_t steps = eps == 1.0 ? 0 : grid;
    for (std::size_t k = 0; k <= steps; ++k) {
        const double r = static_cast<double>(k) * (1.0 - eps) / static_cast<double>(grid);
        const double s = std::min(1.0, r + eps);
        auto report = vc_index(slice_family(q, r, s), cap);
        if (report.index > profile.max_index || (report.index == profile.max_index && report.at_least)) {
            profile.max_index = report.index;
            profile.max_at_least = report.at_least;
        }
        profile.points.push_back({r, std::move(report)});
    }
    return profile;
}

}  // namespace vcwidth
