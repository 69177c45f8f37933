#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "observation.hpp"

namespace cbo {

// One of the standard continuous test functions, with its literature domain.
struct SyntheticFn {
    std::string name;
    std::vector<double> lo, hi;

    int dim() const { return static_cast<int>(lo.size()); }
    // Evaluation outside the domain box is a domain error.
    double operator()(std::span<const double> x) const;
};

// Accepts branin, camelback, hartmann3, hartmann6 (aliases hart3, hart6).
SyntheticFn synthetic_fn(const std::string& name);
const std::vector<std::string>& synthetic_fn_names();

// One sampled location with its exact value and one noisy replicate.
struct DatasetRow {
    std::vector<double> x;
    double true_y = 0.0;
    double noisy_y = 0.0;
};

// The sampling protocol behind every benchmark table: 100 * dim uniform
// locations, 10 noisy copies each, iid Gaussian noise with sigma equal to
// 0.1 times the empirical spread of the exact values.  Rows are grouped by
// location (copies adjacent).
std::vector<DatasetRow> generate_dataset(const SyntheticFn& fn, std::uint64_t seed);
inline constexpr int kLocationsPerDim = 100;
inline constexpr int kCopiesPerLocation = 10;

struct CensoringScheme {
    enum class Kind { random_ramp, fixed };
    Kind kind = Kind::random_ramp;
    double percentile = 80.0;  // random_ramp: threshold percentile of the noisy values
    double cutoff = 0.0;       // fixed: hard cap
    std::uint64_t seed = 0;    // random_ramp coin flips
};

// random_ramp: values above the percentile threshold gamma are censored with
// probability (v - gamma) / (v_max - gamma); a censored row records a bound
// drawn uniformly from [gamma, v].  Rows use per-row substreams, so raising
// the percentile can only shrink the censored set on a fixed seed.
// fixed: values above the cutoff are clipped to it and flagged.
std::vector<Observation> apply_censoring(std::span<const DatasetRow> rows,
                                         const CensoringScheme& scheme);

// Stochastic runtime stand-in built on a synthetic function: the median cost
// is an affine rescale of the function onto [t_min, t_max], observed costs
// are that median times e^eps with eps ~ N(0, log_noise_sd^2), and runs are
// right-censored at the given cutoff.
class SimulatedTarget {
  public:
    SimulatedTarget(SyntheticFn fn, double t_min = 1.0, double t_max = 100.0,
                    double log_noise_sd = 0.3);

    const SyntheticFn& fn() const { return fn_; }
    int dim() const { return fn_.dim(); }
    double t_min() const { return t_min_; }
    double t_max() const { return t_max_; }
    double log_noise_sd() const { return log_noise_sd_; }

    // Noise-free median cost at x, always in [t_min, t_max].
    double median_cost(std::span<const double> x) const;

    // One noisy run, deterministic per (x, seed).  cutoff > 0 (may be +inf);
    // a run exceeding it comes back censored at the cutoff.
    Observation run(std::span<const double> x, double cutoff, std::uint64_t seed) const;

  private:
    SyntheticFn fn_;
    double t_min_, t_max_, log_noise_sd_;
    double f_lo_, f_hi_;  // deterministic scan of the function's range
};

}  // namespace cbo
