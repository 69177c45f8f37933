#include "imputation.hpp"

#include <cmath>
#include <limits>

#include "mathfns.hpp"

namespace cbo {

namespace {

// Predictive spread used for truncation: a single network exposes only its
// aleatoric head, an ensemble adds disagreement to the mean aleatoric term.
double predictive_sd(const Ensemble& model, std::span<const double> x) {
    if (model.size() == 1) return std::sqrt(model.predict_member(0, x).sigma2);
    double aleatoric = 0.0;
    for (int m = 0; m < model.size(); ++m) aleatoric += model.predict_member(m, x).sigma2;
    aleatoric /= static_cast<double>(model.size());
    return std::sqrt(model.predict(x).sigma2 + aleatoric);
}

}  // namespace

ShResult schmee_hahn(std::span<const Observation> data, int iterations, const ShTrainer& trainer,
                     const ShObserver& observer) {
    validate_observations(data);
    if (iterations < 1) throw ArgumentError("schmee_hahn: iterations must be >= 1");
    if (!trainer) throw ArgumentError("schmee_hahn: trainer is empty");
    if (censored_count(data) == data.size())
        throw ArgumentError("schmee_hahn: no uncensored observations");

    const std::size_t n = data.size();
    ShResult result;

    if (censored_count(data) == 0) {
        result.data.assign(data.begin(), data.end());
        result.model = trainer(result.data);
        if (observer) observer(1, result.model);
        return result;
    }

    // Working rows are always presented to the trainer as uncensored.
    std::vector<Observation> working(data.begin(), data.end());
    for (Observation& o : working) {
        o.censored = false;
        o.cutoff = std::numeric_limits<double>::infinity();
    }

    for (int k = 1; k <= iterations; ++k) {
        result.model = trainer(working);
        std::vector<double> targets(n);
        for (std::size_t i = 0; i < n; ++i) {
            if (data[i].censored) {
                const PredictiveHead h = result.model.predict(data[i].x);
                const double mu = h.mu;  // combined mean in original units
                const double sd = predictive_sd(result.model, data[i].x);
                working[i].y = truncated_normal_mean(mu, sd, data[i].y);
            }
            targets[i] = working[i].y;
        }
        result.trace.targets.push_back(std::move(targets));
        if (observer) observer(k, result.model);
    }

    result.data.assign(data.begin(), data.end());
    for (std::size_t i = 0; i < n; ++i) {
        if (data[i].censored) {
            result.data[i].y = working[i].y;
            result.data[i].censored = false;
            result.data[i].cutoff = std::numeric_limits<double>::infinity();
        }
    }
    return result;
}

}  // namespace cbo
