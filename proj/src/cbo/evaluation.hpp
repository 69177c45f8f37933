#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ensemble.hpp"
#include "synthetic.hpp"

namespace cbo {

double rmse(std::span<const double> predictions, std::span<const double> truths);

// Spearman rank correlation with average ranks on ties.  Undefined (either
// vector constant) yields an empty optional rather than a number.
std::optional<double> spearman_cc(std::span<const double> a, std::span<const double> b);

// Maximum-likelihood normal fit under right censoring: coordinate
// golden-section over (mu, log sigma) on the exact censored likelihood,
// converged to 1e-8 in both parameters.
struct CensoredNormalFit {
    double mu = 0.0;
    double sigma = 1.0;
};
CensoredNormalFit fit_censored_normal(std::span<const double> values,
                                      std::span<const unsigned char> censored);

// How censored rows are handled when fitting the evaluation ensemble.
enum class Strategy { ignore, drop, schmee_hahn, tobit };

Strategy strategy_from_string(const std::string& s);  // I | D | SH | T
std::string strategy_name(Strategy s);

struct StudyConfig {
    int folds = 5;
    int ensemble_size = 5;
    int sh_iterations = 5;
    TrainConfig train;
    int jobs = 1;
};

// Location-grouped k-fold cross-validation on one generated benchmark: all
// noisy copies of a location stay in the same fold, every strategy sees
// identical folds and identical censoring.  Returns the mean RMSE against the
// noise-free function per strategy, averaged over folds and seeds; a strategy
// that cannot run on some split (e.g. drop with no uncensored rows) comes
// back empty.
std::map<Strategy, std::optional<double>> kfold_table1(const SyntheticFn& fn,
                                                       const CensoringScheme& scheme,
                                                       std::span<const Strategy> strategies,
                                                       std::span<const std::uint64_t> seeds,
                                                       const StudyConfig& cfg);

// Per-iteration quality of the iterative restoration: for each fold, runs
// schmee_hahn with an ensemble trainer and records the held-out RMSE of each
// iteration's model, plus a reference ensemble trained directly on the
// censored data with the censoring-aware loss.
struct ShTraceResult {
    std::vector<double> iteration_rmse_mean;  // length K
    std::vector<double> iteration_rmse_std;
    double tobit_rmse_mean = 0.0;
    double tobit_rmse_std = 0.0;
};
ShTraceResult sh_trace_study(const SyntheticFn& fn, const CensoringScheme& scheme,
                             std::uint64_t seed, const StudyConfig& cfg);

}  // namespace cbo
