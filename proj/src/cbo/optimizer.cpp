#include "optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "ensemble.hpp"
#include "errors.hpp"
#include "rng.hpp"
#include "stats.hpp"

namespace cbo {

namespace {

constexpr std::uint64_t kRunSeedSalt = 0xe9b5dba58189dbbcULL;
constexpr std::uint64_t kProposeRngSalt = 0x3956c25bf348b538ULL;
constexpr std::uint64_t kProposeNetSalt = 0x59f111f1b605d019ULL;
constexpr std::uint64_t kValidateSalt = 0x923f82a4af194f9bULL;

// Runs already paid for one config, on the shared per-position seed ladder.
struct ConfigState {
    std::vector<double> x;
    std::vector<double> costs;  // capped
    double sum = 0.0;

    int runs() const { return static_cast<int>(costs.size()); }
    double mean_cost() const { return sum / static_cast<double>(costs.size()); }
    double prefix_sum(int m) const {
        double s = 0.0;
        for (int j = 0; j < m; ++j) s += costs[j];
        return s;
    }
};

struct Driver {
    const SimulatedTarget& sim;
    Method method;
    const OptimizerConfig& cfg;

    std::vector<ConfigState> configs;
    int incumbent = -1;
    double wallclock = 0.0;
    OptimizeResult result;
    std::vector<int> record_config;  // config index per history row
    Rng propose_rng;

    Driver(const SimulatedTarget& s, Method m, const OptimizerConfig& c)
        : sim(s), method(m), cfg(c), propose_rng(mix_seed(c.seed, kProposeRngSalt)) {}

    void log(const std::string& msg) const {
        if (cfg.log) cfg.log(msg);
    }

    std::uint64_t run_seed(int position) const {
        return mix_seed(mix_seed(cfg.seed, kRunSeedSalt), static_cast<std::uint64_t>(position));
    }

    // Pays for one run of config ci at cap kappa and records it.
    void pay_run(int ci, double kappa, int iteration) {
        ConfigState& st = configs[ci];
        const Observation obs = sim.run(st.x, kappa, run_seed(st.runs()));
        st.costs.push_back(obs.y);
        st.sum += obs.y;
        wallclock += obs.y;
        result.history.push_back({st.x, obs.y, obs.censored, kappa, iteration, false});
        record_config.push_back(ci);
    }

    std::vector<double> uniform_point() {
        const SyntheticFn& fn = sim.fn();
        std::vector<double> x(fn.dim());
        for (std::size_t d = 0; d < x.size(); ++d) x[d] = propose_rng.uniform(fn.lo[d], fn.hi[d]);
        return x;
    }

    std::vector<double> propose(int iteration) {
        if (method == Method::random) return uniform_point();

        bool any_uncensored = false;
        for (const RunRecord& r : result.history) any_uncensored |= !r.censored;
        if (!any_uncensored) {
            ++result.fallback_count;
            log("proposal fallback: no uncensored runs yet");
            return uniform_point();
        }

        // One fresh censoring-aware net per iteration, fit to log cost.
        std::vector<Observation> data;
        data.reserve(result.history.size());
        for (const RunRecord& r : result.history) {
            Observation o;
            o.x = r.x;
            o.y = std::log(r.cost);
            o.censored = r.censored;
            o.cutoff = std::log(r.cutoff);
            data.push_back(std::move(o));
        }
        const SyntheticFn& fn = sim.fn();
        TrainConfig tc;
        tc.epochs = cfg.inner_epochs;
        tc.seed = mix_seed(mix_seed(cfg.seed, kProposeNetSalt), static_cast<std::uint64_t>(iteration));
        Ensemble net;
        try {
            net = train_ensemble(data, 1, tc, tc.seed, LossKind::tobit, 1,
                                 fit_normalizer(data, fn.lo, fn.hi));
        } catch (const TrainingError& e) {
            ++result.fallback_count;
            log(std::string("proposal fallback: training failed: ") + e.what());
            return uniform_point();
        }
        ++result.model_trainings;

        // Uniform candidate pool; the incumbent is deliberately excluded so
        // the challenger is always a distinct config (a same-point race is a
        // guaranteed no-op under the shared per-position run seeds).
        std::vector<std::vector<double>> pool;
        pool.reserve(static_cast<std::size_t>(cfg.pool_size));
        for (int q = 0; q < cfg.pool_size; ++q) pool.push_back(uniform_point());
        std::size_t best = 0;
        double best_mu = net.predict(pool[0]).mu;
        for (std::size_t c = 1; c < pool.size(); ++c) {
            const double mu = net.predict(pool[c]).mu;
            if (mu < best_mu) {
                best_mu = mu;
                best = c;
            }
        }
        return pool[best];
    }

    // Stamps incumbent flags on this iteration's rows and logs the trajectory.
    void close_iteration(int iteration, std::size_t first_row) {
        for (std::size_t r = first_row; r < result.history.size(); ++r)
            result.history[r].incumbent = record_config[r] == incumbent;
        result.trajectory.push_back({iteration, wallclock, configs[incumbent].mean_cost()});
    }

    void cold_start() {
        for (int i = 0; i < cfg.cold_start; ++i) {
            configs.push_back({uniform_point(), {}, 0.0});
            pay_run(i, cfg.kappa_max, 0);
        }
        incumbent = 0;
        for (int i = 1; i < cfg.cold_start; ++i)
            if (configs[i].mean_cost() < configs[incumbent].mean_cost()) incumbent = i;
        close_iteration(0, 0);
    }

    // One race: intensify the incumbent, then run the challenger in doubling
    // rounds under an adaptive cap until it is dominated or fully evaluated.
    void race(int iteration) {
        const std::size_t first_row = result.history.size();
        const std::vector<double> challenger_x = propose(iteration);

        if (configs[incumbent].runs() < cfg.max_runs)
            pay_run(incumbent, cfg.kappa_max, iteration);

        const int full = std::min(cfg.max_runs, configs[incumbent].runs());
        configs.push_back({challenger_x, {}, 0.0});
        const int ci = static_cast<int>(configs.size()) - 1;

        bool rejected = false;
        int target = 1;
        while (!rejected) {
            target = std::min(target, full);
            while (configs[ci].runs() < target) {
                const int m = configs[ci].runs() + 1;
                const double kappa =
                    std::min(cfg.kappa_max,
                             cfg.slack * (configs[incumbent].prefix_sum(m) - configs[ci].sum));
                if (!(kappa > 0.0)) {
                    rejected = true;
                    break;
                }
                pay_run(ci, kappa, iteration);
            }
            if (rejected) break;
            const int n = configs[ci].runs();
            if (configs[ci].mean_cost() > configs[incumbent].prefix_sum(n) / n) {
                rejected = true;
                break;
            }
            if (n == full) break;
            target = 2 * target + 1;
        }

        // Full-budget comparison: strict improvement promotes, a tie keeps
        // the incumbent.
        if (!rejected && configs[ci].runs() == full &&
            configs[ci].mean_cost() < configs[incumbent].prefix_sum(full) / full)
            incumbent = ci;
        close_iteration(iteration, first_row);
    }
};

}  // namespace

Method method_from_string(const std::string& s) {
    if (s == "nn") return Method::nn;
    if (s == "random") return Method::random;
    throw ArgumentError("method: expected nn or random, got '" + s + "'");
}

std::string method_name(Method m) {
    return m == Method::nn ? "nn" : "random";
}

OptimizeResult optimize(const SimulatedTarget& sim, Method method, const OptimizerConfig& cfg) {
    if (cfg.iterations < 0) throw ArgumentError("optimize: iterations must be >= 0");
    if (cfg.cold_start < 1) throw ArgumentError("optimize: cold_start must be >= 1");
    if (cfg.max_runs < 1) throw ArgumentError("optimize: max_runs must be >= 1");
    if (!(cfg.kappa_max > 0.0)) throw ArgumentError("optimize: kappa_max must be > 0");
    if (!(cfg.slack >= 1.0)) throw ArgumentError("optimize: slack must be >= 1");
    if (cfg.pool_size < 1) throw ArgumentError("optimize: pool_size must be >= 1");
    if (cfg.inner_epochs < 1) throw ArgumentError("optimize: inner_epochs must be >= 1");

    Driver drv(sim, method, cfg);
    drv.cold_start();
    for (int k = 1; k <= cfg.iterations; ++k) drv.race(k);

    drv.result.incumbent = drv.configs[drv.incumbent].x;
    drv.result.incumbent_cost = drv.configs[drv.incumbent].mean_cost();
    return drv.result;
}

ValidationSummary validate_incumbent(const SimulatedTarget& sim, std::span<const double> x, int n,
                                     std::uint64_t seed) {
    if (n < 1) throw ArgumentError("validate: needs at least one run");
    ValidationSummary out;
    out.costs.resize(n);
    const double inf = std::numeric_limits<double>::infinity();
    for (int j = 0; j < n; ++j)
        out.costs[j] =
            sim.run(x, inf, mix_seed(mix_seed(seed, kValidateSalt), static_cast<std::uint64_t>(j))).y;
    out.mean = mean(out.costs);
    out.q25 = quantile(out.costs, 0.25);
    out.median = quantile(out.costs, 0.5);
    out.q75 = quantile(out.costs, 0.75);
    return out;
}

}  // namespace cbo
