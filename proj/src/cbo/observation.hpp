#pragma once

#include <cmath>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "errors.hpp"

namespace cbo {

// One possibly right-censored measurement.  Invariants:
//   censored  => y == cutoff (the bound is what was observed),
//   !censored => y <= cutoff.
// x and y are always finite; cutoff may be +infinity for uncapped rows.
struct Observation {
    std::vector<double> x;
    double y = 0.0;
    bool censored = false;
    double cutoff = std::numeric_limits<double>::infinity();
};

inline void validate_observation(const Observation& o) {
    if (o.x.empty()) throw ArgumentError("observation: empty input vector");
    for (double v : o.x)
        if (!std::isfinite(v)) throw ArgumentError("observation: non-finite input coordinate");
    if (!std::isfinite(o.y)) throw ArgumentError("observation: non-finite target");
    if (std::isnan(o.cutoff)) throw ArgumentError("observation: NaN cutoff");
    if (o.censored) {
        if (o.y != o.cutoff) throw ArgumentError("observation: censored row must record y == cutoff");
    } else if (!(o.y <= o.cutoff)) {
        throw ArgumentError("observation: uncensored row exceeds its cutoff");
    }
}

inline void validate_observations(std::span<const Observation> data) {
    if (data.empty()) throw ArgumentError("observations: empty data set");
    const std::size_t dim = data.front().x.size();
    for (const Observation& o : data) {
        validate_observation(o);
        if (o.x.size() != dim) throw ArgumentError("observations: inconsistent input dimension");
    }
}

inline std::size_t censored_count(std::span<const Observation> data) {
    std::size_t n = 0;
    for (const Observation& o : data) n += o.censored ? 1 : 0;
    return n;
}

}  // namespace cbo
