#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include "errors.hpp"

namespace cbo {

inline double mean(std::span<const double> v) {
    if (v.empty()) throw ArgumentError("mean: empty input");
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

// Population variance (divide by n).
inline double population_variance(std::span<const double> v) {
    const double m = mean(v);
    double s = 0.0;
    for (double x : v) s += (x - m) * (x - m);
    return s / static_cast<double>(v.size());
}

inline double population_std(std::span<const double> v) {
    return std::sqrt(population_variance(v));
}

// Quantile with linear interpolation between order statistics:
// rank = q * (n - 1), interpolated between the two neighbouring values.
// q in [0, 1].  Percentiles and quartiles everywhere use this definition.
inline double quantile(std::span<const double> v, double q) {
    if (v.empty()) throw ArgumentError("quantile: empty input");
    if (!(q >= 0.0 && q <= 1.0)) throw ArgumentError("quantile: q outside [0, 1]");
    std::vector<double> s(v.begin(), v.end());
    std::sort(s.begin(), s.end());
    const double rank = q * static_cast<double>(s.size() - 1);
    const auto lo = static_cast<std::size_t>(rank);
    if (lo + 1 >= s.size()) return s.back();
    const double frac = rank - static_cast<double>(lo);
    return s[lo] + (s[lo + 1] - s[lo]) * frac;
}

inline double median(std::span<const double> v) { return quantile(v, 0.5); }

}  // namespace cbo
