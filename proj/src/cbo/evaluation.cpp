#include "evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "imputation.hpp"
#include "losses.hpp"
#include "parallel.hpp"
#include "rng.hpp"
#include "stats.hpp"

namespace cbo {

namespace {

constexpr std::uint64_t kCensorDeriveSalt = 0x428a2f98d728ae22ULL;
constexpr std::uint64_t kFoldSalt = 0x7137449123ef65cdULL;
constexpr std::uint64_t kMemberSalt = 0xb5c0fbcfec4d3b2fULL;

void check_metric_args(std::span<const double> a, std::span<const double> b) {
    if (a.empty() || a.size() != b.size())
        throw ArgumentError("metric: empty or mismatched inputs");
    for (std::size_t i = 0; i < a.size(); ++i)
        if (!std::isfinite(a[i]) || !std::isfinite(b[i]))
            throw ArgumentError("metric: non-finite input");
}

std::vector<double> average_ranks(std::span<const double> v) {
    const std::size_t n = v.size();
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
    std::vector<double> ranks(n);
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j + 1 < n && v[idx[j + 1]] == v[idx[i]]) ++j;
        const double r = 0.5 * (static_cast<double>(i) + static_cast<double>(j)) + 1.0;
        for (std::size_t k = i; k <= j; ++k) ranks[idx[k]] = r;
        i = j + 1;
    }
    return ranks;
}

}  // namespace

double rmse(std::span<const double> predictions, std::span<const double> truths) {
    check_metric_args(predictions, truths);
    double s = 0.0;
    for (std::size_t i = 0; i < predictions.size(); ++i) {
        const double d = predictions[i] - truths[i];
        s += d * d;
    }
    return std::sqrt(s / static_cast<double>(predictions.size()));
}

std::optional<double> spearman_cc(std::span<const double> a, std::span<const double> b) {
    check_metric_args(a, b);
    const std::vector<double> ra = average_ranks(a);
    const std::vector<double> rb = average_ranks(b);
    const double va = population_variance(ra);
    const double vb = population_variance(rb);
    if (!(va > 0.0) || !(vb > 0.0)) return std::nullopt;
    const double ma = mean(ra), mb = mean(rb);
    double cov = 0.0;
    for (std::size_t i = 0; i < ra.size(); ++i) cov += (ra[i] - ma) * (rb[i] - mb);
    cov /= static_cast<double>(ra.size());
    return cov / std::sqrt(va * vb);
}

namespace {

double censored_normal_nll(std::span<const double> v, std::span<const unsigned char> c, double mu,
                           double log_sigma) {
    const double sigma = std::exp(log_sigma);
    const double sigma2 = sigma * sigma;
    double nll = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i)
        nll += tobit_nll(v[i], mu, sigma2, c[i] != 0);
    return nll;
}

// Golden-section minimum of f on [a, b] down to an interval of width tol.
template <typename F>
double golden_min(F&& f, double a, double b, double tol) {
    constexpr double phi = 0.6180339887498948482;
    double x1 = b - phi * (b - a);
    double x2 = a + phi * (b - a);
    double f1 = f(x1), f2 = f(x2);
    while (b - a > tol) {
        if (f1 <= f2) {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - phi * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + phi * (b - a);
            f2 = f(x2);
        }
    }
    return 0.5 * (a + b);
}

}  // namespace

CensoredNormalFit fit_censored_normal(std::span<const double> values,
                                      std::span<const unsigned char> censored) {
    if (values.empty() || values.size() != censored.size())
        throw ArgumentError("fit_censored_normal: empty or mismatched inputs");
    for (double v : values)
        if (!std::isfinite(v)) throw ArgumentError("fit_censored_normal: non-finite value");
    std::size_t uncensored = 0;
    for (unsigned char c : censored) uncensored += c ? 0 : 1;
    if (uncensored == 0) throw ArgumentError("fit_censored_normal: no uncensored values");

    const auto [mn, mx] = std::minmax_element(values.begin(), values.end());
    double spread = *mx - *mn;
    if (!(spread > 0.0)) spread = std::max(1e-6, std::fabs(*mx) * 1e-6);

    const double mu_lo = *mn - 10.0 * spread;
    const double mu_hi = *mx + 10.0 * spread;
    const double ls_lo = std::log(spread) - 14.0;
    const double ls_hi = std::log(spread) + 4.0;

    double m = 0.0;
    for (double v : values) m += v;
    double mu = m / static_cast<double>(values.size());
    double var = 0.0;
    for (double v : values) var += (v - mu) * (v - mu);
    var /= static_cast<double>(values.size());
    double ls = 0.5 * std::log(std::max(var, spread * spread * 1e-12));

    for (int sweep = 0; sweep < 300; ++sweep) {
        const double mu_next = golden_min(
            [&](double x) { return censored_normal_nll(values, censored, x, ls); }, mu_lo, mu_hi,
            1e-11 * (1.0 + spread));
        const double ls_next = golden_min(
            [&](double x) { return censored_normal_nll(values, censored, mu_next, x); }, ls_lo,
            ls_hi, 1e-11);
        const bool done = std::fabs(mu_next - mu) < 1e-9 && std::fabs(ls_next - ls) < 1e-9;
        mu = mu_next;
        ls = ls_next;
        if (done) break;
    }
    return {mu, std::exp(ls)};
}

Strategy strategy_from_string(const std::string& s) {
    std::string u;
    for (char ch : s) u.push_back(static_cast<char>(std::toupper(static_cast<unsigned char>(ch))));
    if (u == "I") return Strategy::ignore;
    if (u == "D") return Strategy::drop;
    if (u == "SH") return Strategy::schmee_hahn;
    if (u == "T") return Strategy::tobit;
    throw ArgumentError("strategy: expected one of I, D, SH, T, got '" + s + "'");
}

std::string strategy_name(Strategy s) {
    switch (s) {
        case Strategy::ignore: return "I";
        case Strategy::drop: return "D";
        case Strategy::schmee_hahn: return "SH";
        case Strategy::tobit: return "T";
    }
    throw ArgumentError("strategy: invalid enum value");
}

namespace {

struct FoldData {
    std::vector<Observation> train;
    std::vector<std::vector<double>> test_x;
    std::vector<double> test_truth;
};

struct SeedData {
    std::vector<FoldData> folds;
};

// Generates, censors and splits one benchmark draw.  Splitting is by
// location: all noisy copies of a location land in the same fold.
SeedData make_seed_data(const SyntheticFn& fn, const CensoringScheme& scheme, std::uint64_t seed,
                        int folds) {
    if (folds < 2) throw ArgumentError("kfold: needs at least 2 folds");
    const std::vector<DatasetRow> rows = generate_dataset(fn, seed);
    CensoringScheme run_scheme = scheme;
    run_scheme.seed = mix_seed(scheme.seed, mix_seed(seed, kCensorDeriveSalt));
    const std::vector<Observation> obs = apply_censoring(rows, run_scheme);

    const int locations = static_cast<int>(rows.size()) / kCopiesPerLocation;
    std::vector<int> perm(locations);
    std::iota(perm.begin(), perm.end(), 0);
    Rng fold_rng(mix_seed(seed, kFoldSalt));
    fold_rng.shuffle(perm);
    std::vector<int> fold_of(locations);
    for (int i = 0; i < locations; ++i) fold_of[perm[i]] = i % folds;

    SeedData out;
    out.folds.resize(folds);
    for (int f = 0; f < folds; ++f) {
        FoldData& fd = out.folds[f];
        for (int loc = 0; loc < locations; ++loc) {
            const std::size_t base = static_cast<std::size_t>(loc) * kCopiesPerLocation;
            if (fold_of[loc] == f) {
                fd.test_x.push_back(rows[base].x);
                fd.test_truth.push_back(rows[base].true_y);
            } else {
                for (int c = 0; c < kCopiesPerLocation; ++c) fd.train.push_back(obs[base + c]);
            }
        }
    }
    return out;
}

double fold_rmse(const Ensemble& ens, const FoldData& fd) {
    std::vector<double> preds(fd.test_x.size());
    for (std::size_t i = 0; i < fd.test_x.size(); ++i) preds[i] = ens.predict(fd.test_x[i]).mu;
    return rmse(preds, fd.test_truth);
}

// Trains the strategy's evaluation ensemble for one fold, or returns empty
// when the strategy cannot run on this split.
std::optional<double> run_strategy(Strategy strategy, const SyntheticFn& fn, const FoldData& fd,
                                   const StudyConfig& cfg, std::uint64_t member_base) {
    const auto box_norm = [&](std::span<const Observation> data) {
        return fit_normalizer(data, fn.lo, fn.hi);
    };
    try {
        switch (strategy) {
            case Strategy::ignore: {
                const Ensemble ens = train_ensemble(fd.train, cfg.ensemble_size, cfg.train,
                                                    member_base, LossKind::gaussian, 1,
                                                    box_norm(fd.train));
                return fold_rmse(ens, fd);
            }
            case Strategy::drop: {
                std::vector<Observation> kept;
                for (const Observation& o : fd.train)
                    if (!o.censored) kept.push_back(o);
                if (kept.empty()) return std::nullopt;
                const Ensemble ens = train_ensemble(kept, cfg.ensemble_size, cfg.train,
                                                    member_base, LossKind::gaussian, 1,
                                                    box_norm(kept));
                return fold_rmse(ens, fd);
            }
            case Strategy::schmee_hahn: {
                if (censored_count(fd.train) == fd.train.size()) return std::nullopt;
                const ShTrainer trainer = [&](const std::vector<Observation>& data) {
                    return train_ensemble(data, cfg.ensemble_size, cfg.train, member_base,
                                          LossKind::gaussian, 1, box_norm(data));
                };
                const ShResult sh = schmee_hahn(fd.train, cfg.sh_iterations, trainer);
                return fold_rmse(sh.model, fd);
            }
            case Strategy::tobit: {
                const Ensemble ens = train_ensemble(fd.train, cfg.ensemble_size, cfg.train,
                                                    member_base, LossKind::tobit, 1,
                                                    box_norm(fd.train));
                return fold_rmse(ens, fd);
            }
        }
    } catch (const TrainingError&) {
        return std::nullopt;  // numeric failure counts as a failed split
    }
    throw ArgumentError("strategy: invalid enum value");
}

}  // namespace

std::map<Strategy, std::optional<double>> kfold_table1(const SyntheticFn& fn,
                                                       const CensoringScheme& scheme,
                                                       std::span<const Strategy> strategies,
                                                       std::span<const std::uint64_t> seeds,
                                                       const StudyConfig& cfg) {
    if (strategies.empty() || seeds.empty())
        throw ArgumentError("kfold: needs at least one strategy and one seed");

    std::vector<SeedData> data;
    data.reserve(seeds.size());
    for (std::uint64_t seed : seeds) data.push_back(make_seed_data(fn, scheme, seed, cfg.folds));

    struct Task {
        int seed_idx, fold, strat_idx;
    };
    std::vector<Task> tasks;
    for (int s = 0; s < static_cast<int>(seeds.size()); ++s)
        for (int f = 0; f < cfg.folds; ++f)
            for (int st = 0; st < static_cast<int>(strategies.size()); ++st)
                tasks.push_back({s, f, st});

    std::vector<std::optional<double>> results(tasks.size());
    parallel_for(static_cast<int>(tasks.size()), cfg.jobs, [&](int t) {
        const Task& task = tasks[t];
        const std::uint64_t member_base =
            mix_seed(mix_seed(seeds[task.seed_idx], kMemberSalt), static_cast<std::uint64_t>(task.fold));
        results[t] = run_strategy(strategies[task.strat_idx], fn, data[task.seed_idx].folds[task.fold],
                                  cfg, member_base);
    });

    std::map<Strategy, std::optional<double>> out;
    for (int st = 0; st < static_cast<int>(strategies.size()); ++st) {
        double sum = 0.0;
        int count = 0;
        bool failed = false;
        for (std::size_t t = 0; t < tasks.size(); ++t) {
            if (tasks[t].strat_idx != st) continue;
            if (!results[t]) {
                failed = true;
                break;
            }
            sum += *results[t];
            ++count;
        }
        out[strategies[st]] = failed ? std::nullopt : std::optional<double>(sum / count);
    }
    return out;
}

ShTraceResult sh_trace_study(const SyntheticFn& fn, const CensoringScheme& scheme,
                             std::uint64_t seed, const StudyConfig& cfg) {
    const SeedData data = make_seed_data(fn, scheme, seed, cfg.folds);
    const int K = cfg.sh_iterations;

    std::vector<std::vector<double>> iter_rmse(cfg.folds, std::vector<double>(K, 0.0));
    std::vector<double> tobit_rmse(cfg.folds, 0.0);

    parallel_for(cfg.folds, cfg.jobs, [&](int f) {
        const FoldData& fd = data.folds[f];
        const std::uint64_t member_base =
            mix_seed(mix_seed(seed, kMemberSalt), static_cast<std::uint64_t>(f));
        const auto box_norm = [&](std::span<const Observation> d) {
            return fit_normalizer(d, fn.lo, fn.hi);
        };
        const ShTrainer trainer = [&](const std::vector<Observation>& d) {
            return train_ensemble(d, cfg.ensemble_size, cfg.train, member_base, LossKind::gaussian,
                                  1, box_norm(d));
        };
        const ShObserver observer = [&](int k, const Ensemble& model) {
            if (k >= 1 && k <= K) iter_rmse[f][k - 1] = fold_rmse(model, fd);
        };
        schmee_hahn(fd.train, K, trainer, observer);
        const Ensemble ref = train_ensemble(fd.train, cfg.ensemble_size, cfg.train, member_base,
                                            LossKind::tobit, 1, box_norm(fd.train));
        tobit_rmse[f] = fold_rmse(ref, fd);
    });

    ShTraceResult out;
    out.iteration_rmse_mean.resize(K);
    out.iteration_rmse_std.resize(K);
    for (int k = 0; k < K; ++k) {
        std::vector<double> vals(cfg.folds);
        for (int f = 0; f < cfg.folds; ++f) vals[f] = iter_rmse[f][k];
        out.iteration_rmse_mean[k] = mean(vals);
        out.iteration_rmse_std[k] = population_std(vals);
    }
    out.tobit_rmse_mean = mean(tobit_rmse);
    out.tobit_rmse_std = population_std(tobit_rmse);
    return out;
}

}  // namespace cbo
