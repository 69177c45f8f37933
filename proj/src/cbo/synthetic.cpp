#include "synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "rng.hpp"
#include "stats.hpp"

namespace cbo {

namespace {

constexpr double kPi = 3.141592653589793238462643383280;

constexpr std::uint64_t kLocationSalt = 0x11c9dc5b2b9f85edULL;
constexpr std::uint64_t kNoiseSalt = 0x6a09e667f3bcc909ULL;
constexpr std::uint64_t kCensorRowSalt = 0xbb67ae8584caa73bULL;
constexpr std::uint64_t kCensorBoundSalt = 0x3c6ef372fe94f82bULL;
constexpr std::uint64_t kRangeScanSalt = 0xa54ff53a5f1d36f1ULL;
constexpr std::uint64_t kRunNoiseSalt = 0x510e527fade682d1ULL;

double branin(std::span<const double> x) {
    const double a = 1.0;
    const double b = 5.1 / (4.0 * kPi * kPi);
    const double c = 5.0 / kPi;
    const double r = 6.0;
    const double s = 10.0;
    const double t = 1.0 / (8.0 * kPi);
    const double u = x[1] - b * x[0] * x[0] + c * x[0] - r;
    return a * u * u + s * (1.0 - t) * std::cos(x[0]) + s;
}

double camelback(std::span<const double> x) {
    const double x1 = x[0], x2 = x[1];
    return (4.0 - 2.1 * x1 * x1 + x1 * x1 * x1 * x1 / 3.0) * x1 * x1 + x1 * x2 +
           (-4.0 + 4.0 * x2 * x2) * x2 * x2;
}

template <int D>
double hartmann(std::span<const double> x, const double (&A)[4][D], const double (&P)[4][D]) {
    static constexpr double alpha[4] = {1.0, 1.2, 3.0, 3.2};
    double f = 0.0;
    for (int i = 0; i < 4; ++i) {
        double inner = 0.0;
        for (int j = 0; j < D; ++j) {
            const double d = x[j] - P[i][j];
            inner += A[i][j] * d * d;
        }
        f -= alpha[i] * std::exp(-inner);
    }
    return f;
}

double hartmann3(std::span<const double> x) {
    static constexpr double A[4][3] = {
        {3.0, 10.0, 30.0}, {0.1, 10.0, 35.0}, {3.0, 10.0, 30.0}, {0.1, 10.0, 35.0}};
    static constexpr double P[4][3] = {{0.3689, 0.1170, 0.2673},
                                       {0.4699, 0.4387, 0.7470},
                                       {0.1091, 0.8732, 0.5547},
                                       {0.0381, 0.5743, 0.8828}};
    return hartmann<3>(x, A, P);
}

double hartmann6(std::span<const double> x) {
    static constexpr double A[4][6] = {{10.0, 3.0, 17.0, 3.5, 1.7, 8.0},
                                       {0.05, 10.0, 17.0, 0.1, 8.0, 14.0},
                                       {3.0, 3.5, 1.7, 10.0, 17.0, 8.0},
                                       {17.0, 8.0, 0.05, 10.0, 0.1, 14.0}};
    static constexpr double P[4][6] = {{0.1312, 0.1696, 0.5569, 0.0124, 0.8283, 0.5886},
                                       {0.2329, 0.4135, 0.8307, 0.3736, 0.1004, 0.9991},
                                       {0.2348, 0.1451, 0.3522, 0.2883, 0.3047, 0.6650},
                                       {0.4047, 0.8828, 0.8732, 0.5743, 0.1091, 0.0381}};
    return hartmann<6>(x, A, P);
}

}  // namespace

double SyntheticFn::operator()(std::span<const double> x) const {
    if (static_cast<int>(x.size()) != dim())
        throw ArgumentError("synthetic_fn: input dimension mismatch");
    for (int i = 0; i < dim(); ++i) {
        if (!std::isfinite(x[i]) || x[i] < lo[i] || x[i] > hi[i])
            throw ArgumentError("synthetic_fn: input outside the domain box");
    }
    if (name == "branin") return branin(x);
    if (name == "camelback") return camelback(x);
    if (name == "hartmann3") return hartmann3(x);
    return hartmann6(x);
}

SyntheticFn synthetic_fn(const std::string& name) {
    if (name == "branin") return {"branin", {-5.0, 0.0}, {10.0, 15.0}};
    if (name == "camelback" || name == "camel") return {"camelback", {-3.0, -2.0}, {3.0, 2.0}};
    if (name == "hartmann3" || name == "hart3")
        return {"hartmann3", {0.0, 0.0, 0.0}, {1.0, 1.0, 1.0}};
    if (name == "hartmann6" || name == "hart6")
        return {"hartmann6", {0.0, 0.0, 0.0, 0.0, 0.0, 0.0}, {1.0, 1.0, 1.0, 1.0, 1.0, 1.0}};
    throw ArgumentError("synthetic_fn: unknown function '" + name + "'");
}

const std::vector<std::string>& synthetic_fn_names() {
    static const std::vector<std::string> names = {"branin", "camelback", "hartmann3", "hartmann6"};
    return names;
}

std::vector<DatasetRow> generate_dataset(const SyntheticFn& fn, std::uint64_t seed) {
    const int d = fn.dim();
    const int locations = kLocationsPerDim * d;
    Rng loc_rng(mix_seed(seed, kLocationSalt));
    std::vector<std::vector<double>> xs(locations);
    std::vector<double> truth(locations);
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (int i = 0; i < locations; ++i) {
        xs[i].resize(d);
        for (int j = 0; j < d; ++j) xs[i][j] = loc_rng.uniform(fn.lo[j], fn.hi[j]);
        truth[i] = fn(xs[i]);
        lo = std::min(lo, truth[i]);
        hi = std::max(hi, truth[i]);
    }
    const double noise_sd = 0.1 * (hi - lo);
    Rng noise_rng(mix_seed(seed, kNoiseSalt));
    std::vector<DatasetRow> rows;
    rows.reserve(static_cast<std::size_t>(locations) * kCopiesPerLocation);
    for (int i = 0; i < locations; ++i) {
        for (int c = 0; c < kCopiesPerLocation; ++c) {
            rows.push_back({xs[i], truth[i], truth[i] + noise_sd * noise_rng.normal()});
        }
    }
    return rows;
}

std::vector<Observation> apply_censoring(std::span<const DatasetRow> rows,
                                         const CensoringScheme& scheme) {
    if (rows.empty()) throw ArgumentError("apply_censoring: empty data");
    std::vector<Observation> out;
    out.reserve(rows.size());

    if (scheme.kind == CensoringScheme::Kind::fixed) {
        if (!std::isfinite(scheme.cutoff)) throw ArgumentError("apply_censoring: non-finite cutoff");
        for (const DatasetRow& r : rows) {
            if (r.noisy_y > scheme.cutoff) {
                out.push_back({r.x, scheme.cutoff, true, scheme.cutoff});
            } else {
                out.push_back({r.x, r.noisy_y, false, scheme.cutoff});
            }
        }
        return out;
    }

    if (!(scheme.percentile >= 0.0 && scheme.percentile <= 100.0))
        throw ArgumentError("apply_censoring: percentile outside [0, 100]");
    std::vector<double> noisy(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) noisy[i] = rows[i].noisy_y;
    const double gamma = quantile(noisy, scheme.percentile / 100.0);
    const double v_max = *std::max_element(noisy.begin(), noisy.end());
    const double span_width = v_max - gamma;

    for (std::size_t i = 0; i < rows.size(); ++i) {
        const DatasetRow& r = rows[i];
        bool censor = false;
        if (r.noisy_y > gamma && span_width > 0.0) {
            const double p = std::min(1.0, (r.noisy_y - gamma) / span_width);
            // Per-row substream: a higher percentile can only uncensor rows.
            Rng coin(mix_seed(mix_seed(scheme.seed, kCensorRowSalt), static_cast<std::uint64_t>(i)));
            censor = coin.uniform() < p;
        }
        if (censor) {
            Rng bound(mix_seed(mix_seed(scheme.seed, kCensorBoundSalt), static_cast<std::uint64_t>(i)));
            const double c = bound.uniform(gamma, r.noisy_y);
            out.push_back({r.x, c, true, c});
        } else {
            out.push_back({r.x, r.noisy_y, false, std::numeric_limits<double>::infinity()});
        }
    }
    return out;
}

SimulatedTarget::SimulatedTarget(SyntheticFn fn, double t_min, double t_max, double log_noise_sd)
    : fn_(std::move(fn)), t_min_(t_min), t_max_(t_max), log_noise_sd_(log_noise_sd) {
    if (!(t_min > 0.0) || !(t_max > t_min)) throw ArgumentError("simulator: requires 0 < t_min < t_max");
    if (!(log_noise_sd >= 0.0)) throw ArgumentError("simulator: negative noise level");
    // Deterministic range scan; median_cost clamps, so the estimate only has
    // to be representative, not exact.
    Rng rng(mix_seed(kRangeScanSalt, hash_point(fn_.lo)));
    const int n = 4096 * fn_.dim();
    std::vector<double> x(fn_.dim());
    f_lo_ = std::numeric_limits<double>::infinity();
    f_hi_ = -f_lo_;
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < fn_.dim(); ++j) x[j] = rng.uniform(fn_.lo[j], fn_.hi[j]);
        const double f = fn_(x);
        f_lo_ = std::min(f_lo_, f);
        f_hi_ = std::max(f_hi_, f);
    }
    if (!(f_hi_ > f_lo_)) f_hi_ = f_lo_ + 1.0;
}

double SimulatedTarget::median_cost(std::span<const double> x) const {
    const double f = fn_(x);
    const double m = t_min_ + (f - f_lo_) / (f_hi_ - f_lo_) * (t_max_ - t_min_);
    return std::clamp(m, t_min_, t_max_);
}

Observation SimulatedTarget::run(std::span<const double> x, double cutoff,
                                 std::uint64_t seed) const {
    if (!(cutoff > 0.0)) throw ArgumentError("simulator: cutoff must be positive");
    const double m = median_cost(x);
    Rng rng(mix_seed(mix_seed(seed, kRunNoiseSalt), hash_point(x)));
    const double cost = std::exp(std::log(m) + log_noise_sd_ * rng.normal());
    std::vector<double> xv(x.begin(), x.end());
    if (cost > cutoff) return {std::move(xv), cutoff, true, cutoff};
    return {std::move(xv), cost, false, cutoff};
}

}  // namespace cbo
