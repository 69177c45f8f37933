#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>
#include <vector>

#include "cbo/errors.hpp"
#include "cbo/evaluation.hpp"
#include "cbo/mathfns.hpp"
#include "cbo/rng.hpp"
#include "cbo/stats.hpp"

using namespace cbo;

namespace {

// Exact censored-normal log-likelihood maximum for data with all censored
// values at a single bound c: the optimizer should land on the same optimum
// that a fine grid search finds.
double grid_nll(std::span<const double> v, std::span<const unsigned char> cens, double mu,
                double sigma) {
    double nll = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) {
        const double z = (v[i] - mu) / sigma;
        if (cens[i]) {
            nll -= std_normal_log_survival(z);
        } else {
            nll += 0.5 * std::log(2.0 * 3.141592653589793) + std::log(sigma) + 0.5 * z * z;
        }
    }
    return nll;
}

}  // namespace

TEST_CASE("rmse on simple vectors") {
    const std::vector<double> p{0.0, 0.0}, t{3.0, 4.0};
    CHECK(rmse(p, t) == doctest::Approx(std::sqrt(12.5)).epsilon(1e-12));
    const std::vector<double> same{1.0, 2.0, 3.0};
    CHECK(rmse(same, same) == 0.0);
    const std::vector<double> short_v{1.0};
    CHECK_THROWS_AS(rmse(p, short_v), ArgumentError);
    const std::vector<double> empty;
    CHECK_THROWS_AS(rmse(empty, empty), ArgumentError);
}

TEST_CASE("spearman handles monotone, reversed and tied data") {
    const std::vector<double> a{1.0, 2.0, 3.0, 4.0};
    const std::vector<double> up{10.0, 20.0, 30.0, 40.0};
    const std::vector<double> down{4.0, 3.0, 2.0, 1.0};
    CHECK(spearman_cc(a, up).value() == doctest::Approx(1.0));
    CHECK(spearman_cc(a, down).value() == doctest::Approx(-1.0));

    // nonlinear but monotone still gives 1: rank correlation, not Pearson
    const std::vector<double> exp_a{std::exp(1.0), std::exp(2.0), std::exp(3.0), std::exp(4.0)};
    CHECK(spearman_cc(a, exp_a).value() == doctest::Approx(1.0));

    const std::vector<double> x{1.0, 2.0, 3.0};
    const std::vector<double> y{1.0, 3.0, 2.0};
    CHECK(spearman_cc(x, y).value() == doctest::Approx(0.5).epsilon(1e-12));

    // average ranks on ties: {1, 2, 2, 4} ranks as {1, 2.5, 2.5, 4}
    const std::vector<double> tied{1.0, 2.0, 2.0, 4.0};
    const std::vector<double> ref{1.0, 2.0, 3.0, 4.0};
    const double r = spearman_cc(tied, ref).value();
    // Pearson of {1, 2.5, 2.5, 4} vs {1, 2, 3, 4}
    CHECK(r == doctest::Approx(4.5 / std::sqrt(4.5 * 5.0)).epsilon(1e-12));

    const std::vector<double> constant{2.0, 2.0, 2.0};
    CHECK(!spearman_cc(constant, x).has_value());
    CHECK(!spearman_cc(x, constant).has_value());
    const std::vector<double> mismatched{1.0};
    CHECK_THROWS_AS(spearman_cc(x, mismatched), ArgumentError);
}

TEST_CASE("censored normal fit recovers the uncensored MLE") {
    // without censoring the MLE is the sample mean and population sd
    Rng rng(5);
    std::vector<double> v;
    for (int i = 0; i < 200; ++i) v.push_back(2.0 + 0.5 * rng.normal());
    const std::vector<unsigned char> cens(v.size(), 0);
    const CensoredNormalFit fit = fit_censored_normal(v, cens);
    CHECK(fit.mu == doctest::Approx(mean(v)).epsilon(1e-6));
    CHECK(fit.sigma == doctest::Approx(population_std(v)).epsilon(1e-5));
}

TEST_CASE("censored normal fit beats a local grid around its optimum") {
    Rng rng(9);
    std::vector<double> v;
    std::vector<unsigned char> cens;
    for (int i = 0; i < 300; ++i) {
        const double y = 1.0 + 0.8 * rng.normal();
        if (y > 1.9) {
            v.push_back(1.9);
            cens.push_back(1);
        } else {
            v.push_back(y);
            cens.push_back(0);
        }
    }
    const CensoredNormalFit fit = fit_censored_normal(v, cens);
    // parameter recovery despite ~13% censoring
    CHECK(fit.mu == doctest::Approx(1.0).epsilon(0.15));
    CHECK(fit.sigma == doctest::Approx(0.8).epsilon(0.15));
    // local optimality of the returned point on the exact likelihood
    const double best = grid_nll(v, cens, fit.mu, fit.sigma);
    for (double dmu : {-1e-3, 1e-3})
        for (double ds : {-1e-3, 1e-3})
            CHECK(grid_nll(v, cens, fit.mu + dmu, fit.sigma * (1.0 + ds)) >= best - 1e-9);
}

TEST_CASE("censored normal fit validates its inputs") {
    const std::vector<double> v{1.0, 2.0};
    const std::vector<unsigned char> all_cens{1, 1};
    CHECK_THROWS_AS(fit_censored_normal(v, all_cens), ArgumentError);
    const std::vector<unsigned char> short_flags{0};
    CHECK_THROWS_AS(fit_censored_normal(v, short_flags), ArgumentError);
    const std::vector<double> empty;
    const std::vector<unsigned char> none;
    CHECK_THROWS_AS(fit_censored_normal(empty, none), ArgumentError);
}

TEST_CASE("strategy names round trip") {
    CHECK(strategy_from_string("I") == Strategy::ignore);
    CHECK(strategy_from_string("D") == Strategy::drop);
    CHECK(strategy_from_string("SH") == Strategy::schmee_hahn);
    CHECK(strategy_from_string("T") == Strategy::tobit);
    CHECK(strategy_from_string("sh") == Strategy::schmee_hahn);  // case insensitive
    CHECK_THROWS_AS(strategy_from_string("X"), ArgumentError);
    for (Strategy s : {Strategy::ignore, Strategy::drop, Strategy::schmee_hahn, Strategy::tobit})
        CHECK(strategy_from_string(strategy_name(s)) == s);
}

TEST_CASE("kfold study produces aligned cells at smoke scale") {
    const SyntheticFn fn = synthetic_fn("branin");
    CensoringScheme scheme{CensoringScheme::Kind::random_ramp, 45.0, 0.0, 1};
    const std::vector<Strategy> strategies{Strategy::ignore, Strategy::drop,
                                           Strategy::schmee_hahn, Strategy::tobit};
    const std::vector<std::uint64_t> seeds{0, 1};
    StudyConfig cfg;
    cfg.folds = 3;
    cfg.ensemble_size = 1;
    cfg.sh_iterations = 2;
    cfg.train.epochs = 30;  // smoke scale: wiring, not model quality
    const auto table = kfold_table1(fn, scheme, strategies, seeds, cfg);
    REQUIRE(table.size() == 4);
    for (const auto& [s, cell] : table) {
        REQUIRE(cell.has_value());
        CHECK(std::isfinite(*cell));
        CHECK(*cell > 0.0);
    }
    // deterministic end to end
    const auto again = kfold_table1(fn, scheme, strategies, seeds, cfg);
    for (const auto& [s, cell] : table) CHECK(again.at(s).value() == cell.value());
    // parallel workers must not change the numbers
    StudyConfig par = cfg;
    par.jobs = 4;
    const auto parallel = kfold_table1(fn, scheme, strategies, seeds, par);
    for (const auto& [s, cell] : table) CHECK(parallel.at(s).value() == cell.value());
}

TEST_CASE("strategies coincide when nothing is censored") {
    // with no censored rows, ignore / drop / tobit-free data paths feed the
    // same rows and member seeds to the same trainer
    const SyntheticFn fn = synthetic_fn("branin");
    CensoringScheme scheme{CensoringScheme::Kind::fixed, 0.0,
                           std::numeric_limits<double>::max(), 1};
    const std::vector<Strategy> strategies{Strategy::ignore, Strategy::drop,
                                           Strategy::schmee_hahn};
    const std::vector<std::uint64_t> seeds{3};
    StudyConfig cfg;
    cfg.folds = 2;
    cfg.ensemble_size = 1;
    cfg.sh_iterations = 3;
    cfg.train.epochs = 20;
    const auto table = kfold_table1(fn, scheme, strategies, seeds, cfg);
    const double i = table.at(Strategy::ignore).value();
    CHECK(table.at(Strategy::drop).value() == i);
    CHECK(table.at(Strategy::schmee_hahn).value() == i);
}

TEST_CASE("kfold validates its arguments") {
    const SyntheticFn fn = synthetic_fn("branin");
    CensoringScheme scheme{CensoringScheme::Kind::random_ramp, 45.0, 0.0, 1};
    const std::vector<Strategy> strategies{Strategy::ignore};
    const std::vector<std::uint64_t> seeds{0};
    StudyConfig cfg;
    cfg.folds = 1;  // needs at least two folds
    CHECK_THROWS_AS(kfold_table1(fn, scheme, strategies, seeds, cfg), ArgumentError);
    cfg.folds = 2;
    const std::vector<std::uint64_t> no_seeds;
    CHECK_THROWS_AS(kfold_table1(fn, scheme, strategies, no_seeds, cfg), ArgumentError);
    const std::vector<Strategy> no_strategies;
    CHECK_THROWS_AS(kfold_table1(fn, scheme, no_strategies, seeds, cfg), ArgumentError);
}

TEST_CASE("iterative restoration trace has one entry per iteration") {
    const SyntheticFn fn = synthetic_fn("branin");
    CensoringScheme scheme{CensoringScheme::Kind::random_ramp, 45.0, 0.0, 2};
    StudyConfig cfg;
    cfg.folds = 2;
    cfg.ensemble_size = 1;
    cfg.sh_iterations = 3;
    cfg.train.epochs = 25;
    const ShTraceResult res = sh_trace_study(fn, scheme, 7, cfg);
    REQUIRE(res.iteration_rmse_mean.size() == 3);
    REQUIRE(res.iteration_rmse_std.size() == 3);
    for (double v : res.iteration_rmse_mean) {
        CHECK(std::isfinite(v));
        CHECK(v > 0.0);
    }
    for (double v : res.iteration_rmse_std) CHECK(v >= 0.0);
    CHECK(std::isfinite(res.tobit_rmse_mean));
    CHECK(res.tobit_rmse_mean > 0.0);
    // deterministic
    const ShTraceResult again = sh_trace_study(fn, scheme, 7, cfg);
    CHECK(again.iteration_rmse_mean == res.iteration_rmse_mean);
    CHECK(again.tobit_rmse_mean == res.tobit_rmse_mean);
}
