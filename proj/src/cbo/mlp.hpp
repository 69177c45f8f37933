#pragma once

#include <atomic>
#include <cstdint>
#include <span>
#include <vector>

#include "losses.hpp"
#include "observation.hpp"

namespace cbo {

// Input/target rescaling shared by every network of an ensemble.  Inputs map
// to [0, 1] per dimension (out-of-box points are clamped), targets are
// z-scored with the population standard deviation.
struct Normalizer {
    std::vector<double> lo, hi;  // per-dimension box, hi > lo
    double y_mean = 0.0;
    double y_std = 1.0;

    int dim() const { return static_cast<int>(lo.size()); }
    void apply_x(std::span<const double> x, std::span<double> out) const;
    std::vector<double> apply_x(std::span<const double> x) const;
    std::vector<double> invert_x(std::span<const double> xn) const;
    double apply_y(double y) const { return (y - y_mean) / y_std; }
    double invert_y(double yn) const { return yn * y_std + y_mean; }
};

// Bounds and target statistics from the data itself.  Censored targets enter
// the statistics at their observed bounds.  Degenerate spreads fall back to
// width 1 so the maps stay invertible.
Normalizer fit_normalizer(std::span<const Observation> data);

// Same target statistics, but an explicit input box (used when the true
// search domain is known rather than estimated from samples).
Normalizer fit_normalizer(std::span<const Observation> data, std::span<const double> lo,
                          std::span<const double> hi);

struct TrainConfig {
    int epochs = 2000;
    int batch_size = 16;
    double peak_lr = 1e-2;
    double momentum = 0.9;
    double weight_decay = 1e-4;
    double grad_clip = 0.1;
    std::uint64_t seed = 0;
};

// Piecewise-linear one-cycle schedule over [0, total):
// peak/10 -> peak over the first 45% of steps, back to peak/10 over the next
// 45%, then down to peak/100 over the final 10%.
double one_cycle_lr(long long step, long long total_steps, double peak_lr);

struct PredictiveHead {
    double mu = 0.0;      // normalized target units
    double sigma2 = 0.0;  // strictly positive
};

// Fixed 3x50 tanh regressor with a linear mean head and a softplus variance
// head.  Parameters live in one flat vector (layer-major, weights before
// biases) so snapshots, momentum buffers and finite-difference checks all
// share the same layout.
struct Mlp {
    static constexpr int kHidden = 50;
    static constexpr int kOut = 2;
    static constexpr double kVarFloor = 1e-12;  // keeps sigma2 > 0 through underflow

    int input_dim = 0;
    std::uint64_t seed = 0;
    std::vector<double> params;

    std::size_t w1() const { return 0; }
    std::size_t b1() const { return w1() + static_cast<std::size_t>(kHidden) * input_dim; }
    std::size_t w2() const { return b1() + kHidden; }
    std::size_t b2() const { return w2() + static_cast<std::size_t>(kHidden) * kHidden; }
    std::size_t w3() const { return b2() + kHidden; }
    std::size_t b3() const { return w3() + static_cast<std::size_t>(kHidden) * kHidden; }
    std::size_t w4() const { return b3() + kHidden; }
    std::size_t b4() const { return w4() + static_cast<std::size_t>(kOut) * kHidden; }
    std::size_t param_count() const { return b4() + kOut; }

    // Forward pass on one already-normalized input.
    PredictiveHead forward(std::span<const double> xn) const;
};

// Uniform(-1/sqrt(fan_in), +1/sqrt(fan_in)) weights, zero biases, drawn from
// the given seed.  Same (dim, seed) always yields the same parameters.
Mlp init_mlp(int input_dim, std::uint64_t seed);

// Mean loss and flat parameter gradient for one normalized batch.  Rows of
// xn are batch-major; censored entries are 0/1 bytes.  Used by both SGD and
// the gradient property tests.
double loss_and_gradient(const Mlp& net, std::span<const double> xn, std::span<const double> yn,
                         std::span<const unsigned char> censored, LossKind loss,
                         std::span<double> grad);

struct TrainResult {
    Mlp net;
    std::vector<double> epoch_loss;  // mean per-sample loss, one entry per epoch
};

// SGD with momentum under the one-cycle schedule.  Deterministic: the data is
// brought into a canonical order first, so the result is a pure function of
// the observation multiset, the normalizer, cfg and the network's init state.
// Aborts with TrainingError (carrying the step index) on any NaN/Inf.
TrainResult train(Mlp net, std::span<const Observation> data, LossKind loss,
                  const Normalizer& norm, const TrainConfig& cfg);

// Process-wide count of completed train() entries; lets tests assert how many
// model fits a procedure performed.
std::uint64_t train_invocation_count();

}  // namespace cbo
