#pragma once

#include <functional>
#include <span>
#include <vector>

#include "ensemble.hpp"

namespace cbo {

// Fits a model on the given rows, which always arrive flagged uncensored;
// implementations are expected to train with the exact Gaussian likelihood.
using ShTrainer = std::function<Ensemble(const std::vector<Observation>&)>;

// Called after each iteration with the model fitted in that iteration.
using ShObserver = std::function<void(int iteration, const Ensemble& model)>;

struct ImputationTrace {
    // One full target vector per iteration, aligned with the input rows.
    std::vector<std::vector<double>> targets;
};

struct ShResult {
    // Censored rows carry their final imputed targets and are flagged
    // uncensored; uncensored rows are copied through bit for bit.
    std::vector<Observation> data;
    Ensemble model;  // the model fitted in the last iteration
    ImputationTrace trace;
};

// Iterative restoration of right-censored targets: each iteration fits the
// trainer on the previous targets, then replaces every censored target with
// the mean of the predictive normal truncated below at the observed bound.
// Exactly `iterations` trainer calls; imputed values never fall below their
// bounds.  Data with no censored rows short-circuits to a single fit.
ShResult schmee_hahn(std::span<const Observation> data, int iterations, const ShTrainer& trainer,
                     const ShObserver& observer = {});

}  // namespace cbo
