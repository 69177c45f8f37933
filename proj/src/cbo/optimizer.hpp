#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "synthetic.hpp"

namespace cbo {

// One target run as seen by the optimizer.  cost is the capped value actually
// paid, cutoff the cap in force for that run.  incumbent marks runs whose
// config holds the incumbent slot once the run's iteration has finished, so
// the final incumbent is recoverable as the config of the last flagged row.
struct RunRecord {
    std::vector<double> x;
    double cost = 0.0;
    bool censored = false;
    double cutoff = 0.0;
    int iteration = 0;
    bool incumbent = false;
};

// Incumbent trace: wallclock is the cumulative capped cost paid so far,
// incumbent_cost the mean capped cost of the incumbent's runs.
struct TrajectoryPoint {
    int iteration = 0;
    double wallclock = 0.0;
    double incumbent_cost = 0.0;
};

enum class Method { nn, random };

Method method_from_string(const std::string& s);
std::string method_name(Method m);

struct OptimizerConfig {
    int iterations = 30;       // races after the cold start
    double kappa_max = std::numeric_limits<double>::infinity();
    int cold_start = 8;        // initial uniform configs, one run each
    int max_runs = 8;          // per-config run budget R
    double slack = 1.2;        // adaptive-capping multiplier
    int pool_size = 512;       // candidate pool per model proposal
    int inner_epochs = 500;    // epochs for each proposal net
    std::uint64_t seed = 0;
    std::function<void(const std::string&)> log;  // optional event sink
};

struct OptimizeResult {
    std::vector<double> incumbent;
    double incumbent_cost = 0.0;  // mean capped cost over the incumbent's runs
    std::vector<RunRecord> history;
    std::vector<TrajectoryPoint> trajectory;
    int fallback_count = 0;        // model proposals that fell back to uniform
    long long model_trainings = 0; // proposal nets actually fitted
};

// Minimizes the simulated target with racing + adaptive capping.  Method::nn
// proposes challengers with a censoring-aware net fit to log cost; random
// proposes uniformly.  Zero iterations leaves the cold-start incumbent.
OptimizeResult optimize(const SimulatedTarget& sim, Method method, const OptimizerConfig& cfg);

struct ValidationSummary {
    double mean = 0.0;
    double q25 = 0.0;
    double median = 0.0;
    double q75 = 0.0;
    std::vector<double> costs;
};

// Re-runs a config n times without any cap to score it on the true objective.
ValidationSummary validate_incumbent(const SimulatedTarget& sim, std::span<const double> x, int n,
                                     std::uint64_t seed);

}  // namespace cbo
