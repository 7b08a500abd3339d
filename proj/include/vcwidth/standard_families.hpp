#pragma once

// Small reference families with known combinatorics.

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "vc_combinatorics.hpp"

namespace vcwidth {

inline std::vector<std::string> numbered_ids(const std::string& prefix, std::size_t count) {
    std::vector<std::string> ids;
    ids.reserve(count);
    for (std::size_t i = 0; i < count; ++i) ids.push_back(prefix + std::to_string(i));
    return ids;
}

/// All 2^m crisp patterns on m columns; row k is the binary expansion of k.
inline FunctionFamily full_pattern_family(std::size_t m) {
    if (m == 0 || m > 20) throw std::invalid_argument("full_pattern_family: need 1 <= m <= 20");
    const std::size_t rows = std::size_t{1} << m;
    std::vector<double> values(rows * m);
    for (std::size_t k = 0; k < rows; ++k)
        for (std::size_t c = 0; c < m; ++c) values[k * m + c] = static_cast<double>(k >> c & 1);
    return FunctionFamily(numbered_ids("p", rows), numbered_ids("x", m), std::move(values));
}

/// Thresholds on m points of a line: row k is the indicator of {x_c : c >= k},
/// for k = 0..m (row m is empty). No pair is shattered, so the VC index is 2.
inline FunctionFamily threshold_family(std::size_t m) {
    if (m == 0) throw std::invalid_argument("threshold_family: need m >= 1");
    std::vector<double> values((m + 1) * m);
    for (std::size_t k = 0; k <= m; ++k)
        for (std::size_t c = 0; c < m; ++c) values[k * m + c] = c >= k ? 1.0 : 0.0;
    return FunctionFamily(numbered_ids("t", m + 1), numbered_ids("x", m), std::move(values));
}

}  // namespace vcwidth
