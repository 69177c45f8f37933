#include "censorbo.h"

#include <cmath>
#include <cstring>
#include <limits>
#include <memory>
#include <string>
#include <vector>

#include "cbo/ensemble.hpp"
#include "cbo/errors.hpp"
#include "cbo/evaluation.hpp"
#include "cbo/imputation.hpp"
#include "cbo/jsonl.hpp"
#include "cbo/optimizer.hpp"
#include "cbo/stats.hpp"
#include "cbo/synthetic.hpp"

struct cbo_dataset {
    std::vector<cbo::Observation> rows;
};

struct cbo_model {
    cbo::Ensemble ens;
};

struct cbo_simulator {
    cbo::SimulatedTarget sim;
};

struct cbo_runhistory {
    cbo::OptimizeResult res;
};

namespace {

thread_local std::string g_last_error;

cbo_status fail(cbo_status code, const std::string& msg) {
    g_last_error = msg;
    return code;
}

// Runs the body and maps exceptions onto status codes.
template <typename F>
cbo_status guarded(F&& body) noexcept {
    try {
        return body();
    } catch (const cbo::ArgumentError& e) {
        return fail(CBO_ERR_ARGUMENT, e.what());
    } catch (const cbo::TrainingError& e) {
        return fail(CBO_ERR_TRAINING, e.what());
    } catch (const cbo::ParseError& e) {
        return fail(CBO_ERR_PARSE, e.what());
    } catch (const cbo::IoError& e) {
        return fail(CBO_ERR_IO, e.what());
    } catch (const std::exception& e) {
        return fail(CBO_ERR_INTERNAL, e.what());
    } catch (...) {
        return fail(CBO_ERR_INTERNAL, "unknown error");
    }
}

cbo_status require(bool ok, const char* msg) {
    return ok ? CBO_OK : fail(CBO_ERR_ARGUMENT, msg);
}

#define CBO_REQUIRE(cond, msg)                                    \
    if (cbo_status s_ = require((cond), (msg)); s_ != CBO_OK) {   \
        return s_;                                                \
    }

cbo::TrainConfig to_train_config(const cbo_train_options& o) {
    cbo::TrainConfig tc;
    tc.epochs = o.epochs;
    tc.batch_size = o.batch_size;
    tc.peak_lr = o.peak_lr;
    tc.momentum = o.momentum;
    tc.weight_decay = o.weight_decay;
    tc.grad_clip = o.grad_clip;
    tc.seed = o.seed;
    return tc;
}

cbo::LossKind to_loss(const char* s) {
    if (s && std::strcmp(s, "gaussian") == 0) return cbo::LossKind::gaussian;
    if (s && std::strcmp(s, "tobit") == 0) return cbo::LossKind::tobit;
    throw cbo::ArgumentError("loss must be \"gaussian\" or \"tobit\"");
}

cbo::CensoringScheme to_scheme(const char* mode, double percentile, double cutoff,
                               std::uint64_t seed) {
    cbo::CensoringScheme scheme;
    if (mode && std::strcmp(mode, "random") == 0)
        scheme.kind = cbo::CensoringScheme::Kind::random_ramp;
    else if (mode && std::strcmp(mode, "fixed") == 0)
        scheme.kind = cbo::CensoringScheme::Kind::fixed;
    else
        throw cbo::ArgumentError("censor mode must be \"random\" or \"fixed\"");
    scheme.percentile = percentile;
    scheme.cutoff = cutoff;
    scheme.seed = seed;
    return scheme;
}

}  // namespace

extern "C" {

const char* cbo_version(void) {
    return "0.1.0";
}

const char* cbo_last_error(void) {
    return g_last_error.c_str();
}

/* ------------------------------- datasets ------------------------------- */

cbo_status cbo_dataset_generate(const char* function, uint64_t seed, cbo_dataset** out) {
    CBO_REQUIRE(function && out, "null argument");
    return guarded([&] {
        const cbo::SyntheticFn fn = cbo::synthetic_fn(function);
        const std::vector<cbo::DatasetRow> rows = cbo::generate_dataset(fn, seed);
        auto ds = std::make_unique<cbo_dataset>();
        ds->rows.reserve(rows.size());
        for (const cbo::DatasetRow& r : rows)
            ds->rows.push_back(
                {r.x, r.noisy_y, false, std::numeric_limits<double>::infinity()});
        *out = ds.release();
        return CBO_OK;
    });
}

cbo_status cbo_dataset_censor(const cbo_dataset* data, const char* mode, double percentile,
                              double cutoff, uint64_t seed, cbo_dataset** out) {
    CBO_REQUIRE(data && mode && out, "null argument");
    return guarded([&] {
        if (cbo::censored_count(data->rows) != 0)
            throw cbo::ArgumentError("dataset is already censored");
        std::vector<cbo::DatasetRow> rows;
        rows.reserve(data->rows.size());
        for (const cbo::Observation& o : data->rows) rows.push_back({o.x, 0.0, o.y});
        auto ds = std::make_unique<cbo_dataset>();
        ds->rows = cbo::apply_censoring(rows, to_scheme(mode, percentile, cutoff, seed));
        *out = ds.release();
        return CBO_OK;
    });
}

cbo_status cbo_dataset_from_arrays(const double* xs, const double* ys, const int* censored,
                                   const double* cutoffs, size_t n, size_t dim,
                                   cbo_dataset** out) {
    CBO_REQUIRE(xs && ys && out, "null argument");
    CBO_REQUIRE(n > 0 && dim > 0, "n and dim must be positive");
    return guarded([&] {
        auto ds = std::make_unique<cbo_dataset>();
        ds->rows.resize(n);
        for (size_t i = 0; i < n; ++i) {
            cbo::Observation& o = ds->rows[i];
            o.x.assign(xs + i * dim, xs + (i + 1) * dim);
            o.y = ys[i];
            o.censored = censored ? censored[i] != 0 : false;
            o.cutoff = cutoffs ? cutoffs[i] : std::numeric_limits<double>::infinity();
        }
        cbo::validate_observations(ds->rows);
        *out = ds.release();
        return CBO_OK;
    });
}

cbo_status cbo_dataset_load(const char* path, cbo_dataset** out) {
    CBO_REQUIRE(path && out, "null argument");
    return guarded([&] {
        auto ds = std::make_unique<cbo_dataset>();
        ds->rows = cbo::load_observations(path);
        *out = ds.release();
        return CBO_OK;
    });
}

cbo_status cbo_dataset_save(const cbo_dataset* data, const char* path) {
    CBO_REQUIRE(data && path, "null argument");
    return guarded([&] {
        cbo::save_observations(path, data->rows);
        return CBO_OK;
    });
}

cbo_status cbo_dataset_size(const cbo_dataset* data, size_t* out) {
    CBO_REQUIRE(data && out, "null argument");
    *out = data->rows.size();
    return CBO_OK;
}

cbo_status cbo_dataset_dim(const cbo_dataset* data, size_t* out) {
    CBO_REQUIRE(data && out, "null argument");
    CBO_REQUIRE(!data->rows.empty(), "empty dataset");
    *out = data->rows.front().x.size();
    return CBO_OK;
}

cbo_status cbo_dataset_censored_count(const cbo_dataset* data, size_t* out) {
    CBO_REQUIRE(data && out, "null argument");
    *out = cbo::censored_count(data->rows);
    return CBO_OK;
}

cbo_status cbo_dataset_row(const cbo_dataset* data, size_t i, double* x, double* y, int* censored,
                           double* cutoff) {
    CBO_REQUIRE(data, "null argument");
    CBO_REQUIRE(i < data->rows.size(), "row index out of range");
    const cbo::Observation& o = data->rows[i];
    if (x) std::memcpy(x, o.x.data(), o.x.size() * sizeof(double));
    if (y) *y = o.y;
    if (censored) *censored = o.censored ? 1 : 0;
    if (cutoff) *cutoff = o.cutoff;
    return CBO_OK;
}

void cbo_dataset_free(cbo_dataset* data) {
    delete data;
}

/* -------------------------------- models -------------------------------- */

void cbo_train_options_init(cbo_train_options* opts) {
    if (!opts) return;
    opts->epochs = 2000;
    opts->batch_size = 16;
    opts->peak_lr = 1e-2;
    opts->momentum = 0.9;
    opts->weight_decay = 1e-4;
    opts->grad_clip = 0.1;
    opts->seed = 0;
    opts->ensemble_size = 1;
    opts->loss = "gaussian";
    opts->jobs = 1;
}

cbo_status cbo_fit(const cbo_dataset* data, const cbo_train_options* opts, cbo_model** out) {
    CBO_REQUIRE(data && opts && out, "null argument");
    return guarded([&] {
        auto model = std::make_unique<cbo_model>();
        model->ens = cbo::train_ensemble(data->rows, opts->ensemble_size, to_train_config(*opts),
                                         opts->seed, to_loss(opts->loss), opts->jobs);
        *out = model.release();
        return CBO_OK;
    });
}

cbo_status cbo_impute(const cbo_dataset* data, int iterations, const cbo_train_options* opts,
                      cbo_dataset** imputed_out, cbo_model** model_out) {
    CBO_REQUIRE(data && opts, "null argument");
    CBO_REQUIRE(imputed_out || model_out, "both out pointers are null");
    return guarded([&] {
        if (to_loss(opts->loss) != cbo::LossKind::gaussian)
            throw cbo::ArgumentError("imputation uses the gaussian loss");
        const cbo::TrainConfig tc = to_train_config(*opts);
        const cbo::ShTrainer trainer = [&](const std::vector<cbo::Observation>& d) {
            return cbo::train_ensemble(d, opts->ensemble_size, tc, opts->seed,
                                       cbo::LossKind::gaussian, opts->jobs);
        };
        cbo::ShResult res = cbo::schmee_hahn(data->rows, iterations, trainer);
        if (imputed_out) {
            auto ds = std::make_unique<cbo_dataset>();
            ds->rows = std::move(res.data);
            *imputed_out = ds.release();
        }
        if (model_out) {
            auto model = std::make_unique<cbo_model>();
            model->ens = std::move(res.model);
            *model_out = model.release();
        }
        return CBO_OK;
    });
}

cbo_status cbo_model_input_dim(const cbo_model* model, size_t* out) {
    CBO_REQUIRE(model && out, "null argument");
    *out = static_cast<size_t>(model->ens.input_dim());
    return CBO_OK;
}

cbo_status cbo_model_members(const cbo_model* model, size_t* out) {
    CBO_REQUIRE(model && out, "null argument");
    *out = model->ens.size();
    return CBO_OK;
}

cbo_status cbo_predict(const cbo_model* model, const double* x, size_t dim, double* mu,
                       double* var) {
    CBO_REQUIRE(model && x && mu, "null argument");
    return guarded([&] {
        const cbo::PredictiveHead h = model->ens.predict(std::span<const double>(x, dim));
        *mu = h.mu;
        if (var) *var = h.sigma2;
        return CBO_OK;
    });
}

cbo_status cbo_predict_member(const cbo_model* model, size_t member, const double* x, size_t dim,
                              double* mu, double* var) {
    CBO_REQUIRE(model && x && mu, "null argument");
    CBO_REQUIRE(member < static_cast<size_t>(model->ens.size()), "member index out of range");
    return guarded([&] {
        const cbo::PredictiveHead h =
            model->ens.predict_member(member, std::span<const double>(x, dim));
        *mu = h.mu;
        if (var) *var = h.sigma2;
        return CBO_OK;
    });
}

cbo_status cbo_model_save(const cbo_model* model, const char* path) {
    CBO_REQUIRE(model && path, "null argument");
    return guarded([&] {
        cbo::save_ensemble(path, model->ens);
        return CBO_OK;
    });
}

cbo_status cbo_model_load(const char* path, cbo_model** out) {
    CBO_REQUIRE(path && out, "null argument");
    return guarded([&] {
        auto model = std::make_unique<cbo_model>();
        model->ens = cbo::load_ensemble(path);
        *out = model.release();
        return CBO_OK;
    });
}

void cbo_model_free(cbo_model* model) {
    delete model;
}

/* ------------------------------- metrics -------------------------------- */

cbo_status cbo_metric_rmse(const double* predictions, const double* truths, size_t n,
                           double* out) {
    CBO_REQUIRE(predictions && truths && out, "null argument");
    return guarded([&] {
        *out = cbo::rmse(std::span<const double>(predictions, n),
                         std::span<const double>(truths, n));
        return CBO_OK;
    });
}

cbo_status cbo_metric_spearman(const double* a, const double* b, size_t n, double* out,
                               int* defined) {
    CBO_REQUIRE(a && b && out && defined, "null argument");
    return guarded([&] {
        const std::optional<double> r =
            cbo::spearman_cc(std::span<const double>(a, n), std::span<const double>(b, n));
        *defined = r.has_value() ? 1 : 0;
        *out = r.value_or(std::numeric_limits<double>::quiet_NaN());
        return CBO_OK;
    });
}

cbo_status cbo_fit_censored_normal(const double* values, const int* censored, size_t n,
                                   double* mu, double* sigma) {
    CBO_REQUIRE(values && censored && mu && sigma, "null argument");
    return guarded([&] {
        std::vector<unsigned char> flags(n);
        for (size_t i = 0; i < n; ++i) flags[i] = censored[i] ? 1 : 0;
        const cbo::CensoredNormalFit fit =
            cbo::fit_censored_normal(std::span<const double>(values, n), flags);
        *mu = fit.mu;
        *sigma = fit.sigma;
        return CBO_OK;
    });
}

cbo_status cbo_stats_quantile(const double* values, size_t n, double q, double* out) {
    CBO_REQUIRE(values && out, "null argument");
    return guarded([&] {
        *out = cbo::quantile(std::span<const double>(values, n), q);
        return CBO_OK;
    });
}

/* ------------------------------- studies -------------------------------- */

cbo_status cbo_table1_cell(const char* function, const char* censor_mode, double percentile,
                           double cutoff, const char* strategy, const uint64_t* seeds,
                           size_t n_seeds, int folds, int sh_iterations,
                           const cbo_train_options* opts, double* rmse, int* failed) {
    CBO_REQUIRE(function && censor_mode && strategy && seeds && opts && rmse && failed,
                "null argument");
    CBO_REQUIRE(n_seeds > 0, "needs at least one seed");
    return guarded([&] {
        const cbo::SyntheticFn fn = cbo::synthetic_fn(function);
        const cbo::CensoringScheme scheme = to_scheme(censor_mode, percentile, cutoff, 0);
        const cbo::Strategy strat = cbo::strategy_from_string(strategy);
        cbo::StudyConfig cfg;
        cfg.folds = folds;
        cfg.ensemble_size = opts->ensemble_size;
        cfg.sh_iterations = sh_iterations;
        cfg.train = to_train_config(*opts);
        cfg.jobs = opts->jobs;
        const auto table = cbo::kfold_table1(fn, scheme, std::span<const cbo::Strategy>(&strat, 1),
                                             std::span<const uint64_t>(seeds, n_seeds), cfg);
        const std::optional<double> cell = table.at(strat);
        *failed = cell.has_value() ? 0 : 1;
        *rmse = cell.value_or(std::numeric_limits<double>::quiet_NaN());
        return CBO_OK;
    });
}

cbo_status cbo_sh_trace(const char* function, const char* censor_mode, double percentile,
                        double cutoff, uint64_t seed, int folds, int sh_iterations,
                        const cbo_train_options* opts, double* iter_mean, double* iter_std,
                        double* tobit_mean, double* tobit_std) {
    CBO_REQUIRE(function && censor_mode && opts && iter_mean && iter_std && tobit_mean &&
                    tobit_std,
                "null argument");
    return guarded([&] {
        const cbo::SyntheticFn fn = cbo::synthetic_fn(function);
        const cbo::CensoringScheme scheme = to_scheme(censor_mode, percentile, cutoff, 0);
        cbo::StudyConfig cfg;
        cfg.folds = folds;
        cfg.ensemble_size = opts->ensemble_size;
        cfg.sh_iterations = sh_iterations;
        cfg.train = to_train_config(*opts);
        cfg.jobs = opts->jobs;
        const cbo::ShTraceResult res = cbo::sh_trace_study(fn, scheme, seed, cfg);
        for (int k = 0; k < sh_iterations; ++k) {
            iter_mean[k] = res.iteration_rmse_mean[k];
            iter_std[k] = res.iteration_rmse_std[k];
        }
        *tobit_mean = res.tobit_rmse_mean;
        *tobit_std = res.tobit_rmse_std;
        return CBO_OK;
    });
}

/* ------------------------- simulator and optimizer ----------------------- */

cbo_status cbo_simulator_create(const char* function, double t_min, double t_max,
                                double log_noise_sd, cbo_simulator** out) {
    CBO_REQUIRE(function && out, "null argument");
    return guarded([&] {
        *out = new cbo_simulator{
            cbo::SimulatedTarget(cbo::synthetic_fn(function), t_min, t_max, log_noise_sd)};
        return CBO_OK;
    });
}

cbo_status cbo_simulator_dim(const cbo_simulator* sim, size_t* out) {
    CBO_REQUIRE(sim && out, "null argument");
    *out = static_cast<size_t>(sim->sim.dim());
    return CBO_OK;
}

cbo_status cbo_simulator_bounds(const cbo_simulator* sim, double* lo, double* hi) {
    CBO_REQUIRE(sim && lo && hi, "null argument");
    const cbo::SyntheticFn& fn = sim->sim.fn();
    std::memcpy(lo, fn.lo.data(), fn.lo.size() * sizeof(double));
    std::memcpy(hi, fn.hi.data(), fn.hi.size() * sizeof(double));
    return CBO_OK;
}

cbo_status cbo_simulator_median(const cbo_simulator* sim, const double* x, size_t dim,
                                double* out) {
    CBO_REQUIRE(sim && x && out, "null argument");
    return guarded([&] {
        *out = sim->sim.median_cost(std::span<const double>(x, dim));
        return CBO_OK;
    });
}

cbo_status cbo_simulator_run(const cbo_simulator* sim, const double* x, size_t dim, double cutoff,
                             uint64_t seed, double* cost, int* censored) {
    CBO_REQUIRE(sim && x && cost, "null argument");
    return guarded([&] {
        const cbo::Observation o = sim->sim.run(std::span<const double>(x, dim), cutoff, seed);
        *cost = o.y;
        if (censored) *censored = o.censored ? 1 : 0;
        return CBO_OK;
    });
}

void cbo_simulator_free(cbo_simulator* sim) {
    delete sim;
}

void cbo_optimizer_options_init(cbo_optimizer_options* opts) {
    if (!opts) return;
    opts->iterations = 30;
    opts->kappa_max = std::numeric_limits<double>::infinity();
    opts->cold_start = 8;
    opts->max_runs = 8;
    opts->slack = 1.2;
    opts->pool_size = 512;
    opts->inner_epochs = 500;
    opts->seed = 0;
}

cbo_status cbo_optimize(const cbo_simulator* sim, const char* method,
                        const cbo_optimizer_options* opts, cbo_runhistory** out) {
    CBO_REQUIRE(sim && method && opts && out, "null argument");
    return guarded([&] {
        cbo::OptimizerConfig cfg;
        cfg.iterations = opts->iterations;
        cfg.kappa_max = opts->kappa_max;
        cfg.cold_start = opts->cold_start;
        cfg.max_runs = opts->max_runs;
        cfg.slack = opts->slack;
        cfg.pool_size = opts->pool_size;
        cfg.inner_epochs = opts->inner_epochs;
        cfg.seed = opts->seed;
        auto hist = std::make_unique<cbo_runhistory>();
        hist->res = cbo::optimize(sim->sim, cbo::method_from_string(method), cfg);
        *out = hist.release();
        return CBO_OK;
    });
}

cbo_status cbo_runhistory_size(const cbo_runhistory* hist, size_t* out) {
    CBO_REQUIRE(hist && out, "null argument");
    *out = hist->res.history.size();
    return CBO_OK;
}

cbo_status cbo_runhistory_dim(const cbo_runhistory* hist, size_t* out) {
    CBO_REQUIRE(hist && out, "null argument");
    CBO_REQUIRE(!hist->res.history.empty(), "empty run history");
    *out = hist->res.history.front().x.size();
    return CBO_OK;
}

cbo_status cbo_runhistory_row(const cbo_runhistory* hist, size_t i, double* x, double* cost,
                              int* censored, double* cutoff, int* iteration, int* incumbent) {
    CBO_REQUIRE(hist, "null argument");
    CBO_REQUIRE(i < hist->res.history.size(), "row index out of range");
    const cbo::RunRecord& r = hist->res.history[i];
    if (x) std::memcpy(x, r.x.data(), r.x.size() * sizeof(double));
    if (cost) *cost = r.cost;
    if (censored) *censored = r.censored ? 1 : 0;
    if (cutoff) *cutoff = r.cutoff;
    if (iteration) *iteration = r.iteration;
    if (incumbent) *incumbent = r.incumbent ? 1 : 0;
    return CBO_OK;
}

cbo_status cbo_runhistory_incumbent(const cbo_runhistory* hist, double* x, double* mean_cost) {
    CBO_REQUIRE(hist, "null argument");
    CBO_REQUIRE(!hist->res.incumbent.empty(), "no incumbent recorded");
    if (x) std::memcpy(x, hist->res.incumbent.data(), hist->res.incumbent.size() * sizeof(double));
    if (mean_cost) *mean_cost = hist->res.incumbent_cost;
    return CBO_OK;
}

cbo_status cbo_runhistory_trajectory_size(const cbo_runhistory* hist, size_t* out) {
    CBO_REQUIRE(hist && out, "null argument");
    *out = hist->res.trajectory.size();
    return CBO_OK;
}

cbo_status cbo_runhistory_trajectory_row(const cbo_runhistory* hist, size_t i, int* iteration,
                                         double* wallclock, double* incumbent_cost) {
    CBO_REQUIRE(hist, "null argument");
    CBO_REQUIRE(i < hist->res.trajectory.size(), "trajectory index out of range");
    const cbo::TrajectoryPoint& p = hist->res.trajectory[i];
    if (iteration) *iteration = p.iteration;
    if (wallclock) *wallclock = p.wallclock;
    if (incumbent_cost) *incumbent_cost = p.incumbent_cost;
    return CBO_OK;
}

cbo_status cbo_runhistory_stats(const cbo_runhistory* hist, long long* model_trainings,
                                int* fallbacks) {
    CBO_REQUIRE(hist, "null argument");
    if (model_trainings) *model_trainings = hist->res.model_trainings;
    if (fallbacks) *fallbacks = hist->res.fallback_count;
    return CBO_OK;
}

cbo_status cbo_runhistory_save(const cbo_runhistory* hist, const char* path) {
    CBO_REQUIRE(hist && path, "null argument");
    return guarded([&] {
        cbo::save_run_history(path, hist->res.history);
        return CBO_OK;
    });
}

cbo_status cbo_runhistory_load(const char* path, cbo_runhistory** out) {
    CBO_REQUIRE(path && out, "null argument");
    return guarded([&] {
        auto hist = std::make_unique<cbo_runhistory>();
        hist->res.history = cbo::load_run_history(path);
        // Recover the final incumbent from the stored flags: the config of
        // the last flagged row, scored over all of that config's runs.
        const std::vector<cbo::RunRecord>& rows = hist->res.history;
        for (auto it = rows.rbegin(); it != rows.rend(); ++it) {
            if (!it->incumbent) continue;
            hist->res.incumbent = it->x;
            double sum = 0.0;
            int n = 0;
            for (const cbo::RunRecord& r : rows)
                if (r.x == it->x) {
                    sum += r.cost;
                    ++n;
                }
            hist->res.incumbent_cost = sum / n;
            break;
        }
        *out = hist.release();
        return CBO_OK;
    });
}

void cbo_runhistory_free(cbo_runhistory* hist) {
    delete hist;
}

cbo_status cbo_validate(const cbo_simulator* sim, const double* x, size_t dim, int n,
                        uint64_t seed, double* mean, double* q25, double* median, double* q75) {
    CBO_REQUIRE(sim && x, "null argument");
    return guarded([&] {
        const cbo::ValidationSummary v =
            cbo::validate_incumbent(sim->sim, std::span<const double>(x, dim), n, seed);
        if (mean) *mean = v.mean;
        if (q25) *q25 = v.q25;
        if (median) *median = v.median;
        if (q75) *q75 = v.q75;
        return CBO_OK;
    });
}

} /* extern "C" */
