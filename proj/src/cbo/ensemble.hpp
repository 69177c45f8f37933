#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "mlp.hpp"

namespace cbo {

// Deep ensemble over one shared normalizer.  Member m is initialized and
// shuffled from base_seed + m; every member sees the full data set.
struct Ensemble {
    std::vector<Mlp> members;
    Normalizer norm;
    LossKind loss = LossKind::gaussian;

    int size() const { return static_cast<int>(members.size()); }
    int input_dim() const { return members.empty() ? 0 : members.front().input_dim; }

    // Combined prediction in original target units: mean of the member means
    // and their population variance (divide by M).  Aleatoric heads do not
    // enter the combined variance.
    PredictiveHead predict(std::span<const double> x) const;

    // One member's mean and aleatoric variance, denormalized.
    PredictiveHead predict_member(int member, std::span<const double> x) const;
};

// Trains M members sequentially in seed space (base_seed + m) but possibly in
// parallel in time; results are identical either way.  When `norm` is absent
// the normalizer is fitted from the data.
Ensemble train_ensemble(std::span<const Observation> data, int ensemble_size,
                        const TrainConfig& cfg, std::uint64_t base_seed, LossKind loss,
                        int jobs = 1, std::optional<Normalizer> norm = std::nullopt);

}  // namespace cbo
