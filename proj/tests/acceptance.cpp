// End-to-end acceptance gate.  Each criterion prints exactly one line to
// stdout:
//
//   criterion N: PASS <measurements>
//   criterion N: FAIL <what broke>
//
// and the exit code is the number of failed criteria.  Progress notes for the
// long-running studies go to stderr.  --only runs a subset while iterating;
// the registered ctest invocation always runs all nine.
//
// Tolerances are pinned here, not configurable: loosening a bound is a code
// change that shows up in review.

#include "cbo/ensemble.hpp"
#include "cbo/evaluation.hpp"
#include "cbo/imputation.hpp"
#include "cbo/losses.hpp"
#include "cbo/mathfns.hpp"
#include "cbo/mlp.hpp"
#include "cbo/optimizer.hpp"
#include "cbo/rng.hpp"
#include "cbo/stats.hpp"
#include "cbo/synthetic.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

namespace fs = std::filesystem;
using namespace cbo;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::string g_cli;   // path to the cbo binary, needed by criterion 8
int g_jobs = 1;      // worker threads for the heavy studies

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.4g", v);
    return buf;
}

void note(const std::string& msg) {
    std::fprintf(stderr, "  [%s]\n", msg.c_str());
    std::fflush(stderr);
}

struct Verdict {
    bool ok = true;
    std::string detail;

    void require(bool cond, const std::string& why) {
        if (!cond && ok) {
            ok = false;
            detail = why;
        }
    }
};

// ---------------------------------------------------------------------
// Criterion 1: analytic batch gradients match central finite differences
// for both losses, across random networks and batches, including batches
// where every row is censored.
// ---------------------------------------------------------------------

Verdict criterion1() {
    Verdict v;
    constexpr int kReps = 120;
    constexpr double kH = 1e-5;
    constexpr double kRelTol = 1e-4;
    double worst = 0.0;
    long long coords_checked = 0;
    int all_censored_batches = 0;

    for (int rep = 0; rep < kReps; ++rep) {
        Rng rng(mix_seed(0xACCE5501, static_cast<std::uint64_t>(rep)));
        const int dim = 1 + rep % 3;
        Mlp net = init_mlp(dim, static_cast<std::uint64_t>(rep));
        // Break the symmetric zero-bias init so head gradients are generic.
        for (double& p : net.params) p += 0.01 * rng.uniform(-1.0, 1.0);

        const int n = 1 + rep % 6;
        const int n_cens = static_cast<int>(std::lround(n * (rep % 5) / 4.0));
        if (n_cens == n) ++all_censored_batches;
        std::vector<double> xn(static_cast<std::size_t>(n) * dim);
        std::vector<double> yn(n);
        std::vector<unsigned char> cens(n, 0);
        for (double& x : xn) x = rng.uniform();
        for (int i = 0; i < n; ++i) {
            yn[i] = rng.normal();
            cens[i] = i < n_cens ? 1 : 0;
        }

        // A few fixed head/bias coordinates plus a random sample of the rest.
        std::set<std::size_t> coords = {net.b4(),      net.b4() + 1, net.w4(),
                                        net.w4() + 1,  net.b3(),     net.w1()};
        for (int k = 0; k < 60; ++k)
            coords.insert(static_cast<std::size_t>(rng.uniform_int(net.param_count())));

        std::vector<double> grad(net.param_count());
        std::vector<double> scratch(net.param_count());
        for (LossKind loss : {LossKind::gaussian, LossKind::tobit}) {
            const double base = loss_and_gradient(net, xn, yn, cens, loss, grad);
            v.require(std::isfinite(base), "non-finite loss in rep " + std::to_string(rep));
            for (std::size_t j : coords) {
                const double keep = net.params[j];
                net.params[j] = keep + kH;
                const double up = loss_and_gradient(net, xn, yn, cens, loss, scratch);
                net.params[j] = keep - kH;
                const double dn = loss_and_gradient(net, xn, yn, cens, loss, scratch);
                net.params[j] = keep;
                const double fd = (up - dn) / (2.0 * kH);
                const double rel =
                    std::fabs(fd - grad[j]) /
                    std::max({std::fabs(fd), std::fabs(grad[j]), 1e-6});
                worst = std::max(worst, rel);
                ++coords_checked;
                if (rel >= kRelTol)
                    v.require(false, "rep " + std::to_string(rep) + " param " +
                                         std::to_string(j) + " rel err " + fmt(rel));
            }
        }
    }
    if (v.ok)
        v.detail = std::to_string(kReps) + " nets, " + std::to_string(coords_checked) +
                   " coordinates, " + std::to_string(all_censored_batches) +
                   " fully censored batches, max rel err " + fmt(worst);
    return v;
}

// ---------------------------------------------------------------------
// Criterion 2: cross-validated strategy study at full scale.  On
// branin p10, branin p80 and hartmann3 p10 the censoring-aware loss must
// beat ignoring censoring by a wide margin and stay within 25% of the
// iterative-imputation baseline.
// ---------------------------------------------------------------------

Verdict criterion2() {
    Verdict v;
    struct Cell {
        const char* fn;
        double percentile;
    };
    const Cell cells[] = {{"branin", 10.0}, {"branin", 80.0}, {"hartmann3", 10.0}};
    const Strategy strategies[] = {Strategy::ignore, Strategy::schmee_hahn, Strategy::tobit};
    const std::uint64_t seeds[] = {0};

    StudyConfig cfg;
    cfg.folds = 5;
    cfg.ensemble_size = 5;
    cfg.sh_iterations = 5;
    cfg.train = TrainConfig{};  // 2000 epochs, batch 16, one-cycle peak 1e-2
    cfg.jobs = g_jobs;

    std::string summary;
    for (const Cell& cell : cells) {
        const SyntheticFn fn = synthetic_fn(cell.fn);
        CensoringScheme scheme;
        scheme.kind = CensoringScheme::Kind::random_ramp;
        scheme.percentile = cell.percentile;
        scheme.seed = 0;
        note("criterion 2: running " + std::string(cell.fn) + " p" + fmt(cell.percentile));
        const auto table = kfold_table1(fn, scheme, strategies, seeds, cfg);
        const auto cell_name = std::string(cell.fn) + " p" + fmt(cell.percentile);
        const auto I = table.at(Strategy::ignore);
        const auto SH = table.at(Strategy::schmee_hahn);
        const auto T = table.at(Strategy::tobit);
        if (!I || !SH || !T) {
            v.require(false, cell_name + ": a strategy produced no result");
            continue;
        }
        summary += cell_name + ": I=" + fmt(*I) + " SH=" + fmt(*SH) + " T=" + fmt(*T) + "  ";
        note("criterion 2: " + cell_name + " I=" + fmt(*I) + " SH=" + fmt(*SH) +
             " T=" + fmt(*T));
        v.require(*T < 0.7 * *I,
                  cell_name + ": tobit " + fmt(*T) + " not < 0.7 * ignore " + fmt(*I));
        v.require(*T <= 1.25 * *SH,
                  cell_name + ": tobit " + fmt(*T) + " not <= 1.25 * imputation " + fmt(*SH));
    }
    if (v.ok) v.detail = summary + "(tobit < 0.7*ignore and <= 1.25*imputation everywhere)";
    return v;
}

// ---------------------------------------------------------------------
// Criterion 3: on a 1-d problem with randomly censored upper tail, the
// censoring-aware fit places at least 80% of the censored training points
// above their observed bounds; training the same net on the bounds as if
// they were exact stays at least 0.15 below that fraction.
// ---------------------------------------------------------------------

// Smooth 1-d target used only by the acceptance demo.
double demo_fn(double x) { return std::sin(6.283185307179586 * x) + 2.0 * x; }

std::vector<DatasetRow> demo_rows(std::uint64_t seed) {
    // Mirrors the benchmark sampling protocol at reduced size: uniform
    // locations, two noisy copies each, noise sd = 0.1 * value spread.
    constexpr int kLocations = 200;
    constexpr int kCopies = 2;
    Rng rng(mix_seed(0xF1D0'0003, seed));
    std::vector<double> xs(kLocations);
    for (double& x : xs) x = rng.uniform();
    double lo = kInf, hi = -kInf;
    for (double x : xs) {
        lo = std::min(lo, demo_fn(x));
        hi = std::max(hi, demo_fn(x));
    }
    const double noise_sd = 0.1 * (hi - lo);
    std::vector<DatasetRow> rows;
    rows.reserve(kLocations * kCopies);
    for (double x : xs)
        for (int c = 0; c < kCopies; ++c) {
            DatasetRow r;
            r.x = {x};
            r.true_y = demo_fn(x);
            r.noisy_y = r.true_y + noise_sd * rng.normal();
            rows.push_back(std::move(r));
        }
    return rows;
}

std::vector<Observation> demo_censored(std::uint64_t seed) {
    CensoringScheme scheme;
    scheme.kind = CensoringScheme::Kind::random_ramp;
    scheme.percentile = 35.0;
    scheme.seed = mix_seed(0xF1D0'0004, seed);
    return apply_censoring(demo_rows(seed), scheme);
}

Verdict criterion3() {
    Verdict v;
    TrainConfig tc;
    tc.epochs = 1000;
    long long above_tobit = 0, above_ignore = 0, total = 0;
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        const std::vector<Observation> data = demo_censored(seed);
        const Ensemble tob = train_ensemble(data, 1, tc, mix_seed(31, seed), LossKind::tobit);
        const Ensemble ign = train_ensemble(data, 1, tc, mix_seed(31, seed), LossKind::gaussian);
        long long cens = 0;
        for (const Observation& o : data) {
            if (!o.censored) continue;
            ++cens;
            if (tob.predict(o.x).mu > o.cutoff) ++above_tobit;
            if (ign.predict(o.x).mu > o.cutoff) ++above_ignore;
        }
        v.require(cens > 20, "seed " + std::to_string(seed) + ": too few censored rows");
        total += cens;
    }
    const double frac_t = static_cast<double>(above_tobit) / static_cast<double>(total);
    const double frac_i = static_cast<double>(above_ignore) / static_cast<double>(total);
    v.require(frac_t >= 0.80, "tobit fraction " + fmt(frac_t) + " below 0.80");
    v.require(frac_i < frac_t, "ignore fraction " + fmt(frac_i) + " not below tobit");
    v.require(frac_t - frac_i >= 0.15,
              "gap " + fmt(frac_t - frac_i) + " below 0.15 (tobit " + fmt(frac_t) +
                  ", ignore " + fmt(frac_i) + ")");
    if (v.ok)
        v.detail = std::to_string(total) + " censored points over 5 seeds: tobit above bound " +
                   fmt(frac_t) + ", ignore " + fmt(frac_i);
    return v;
}

// ---------------------------------------------------------------------
// Criterion 4: iterative-imputation invariants with a real trainer.
// Imputed targets never fall below their bounds in any iteration, the
// trainer runs exactly K times, and uncensored rows pass through bitwise.
// ---------------------------------------------------------------------

Verdict criterion4() {
    Verdict v;
    const std::vector<Observation> data = demo_censored(0);
    TrainConfig tc;
    tc.epochs = 200;
    const ShTrainer trainer = [&](const std::vector<Observation>& rows) {
        return train_ensemble(rows, 1, tc, 77, LossKind::gaussian);
    };

    constexpr int kIters = 5;
    const std::uint64_t before = train_invocation_count();
    const ShResult res = schmee_hahn(data, kIters, trainer);
    const std::uint64_t fits = train_invocation_count() - before;
    v.require(fits == kIters,
              "expected " + std::to_string(kIters) + " fits, saw " + std::to_string(fits));
    v.require(res.trace.targets.size() == kIters, "trace length != K");

    long long cens = 0;
    for (std::size_t k = 0; k < res.trace.targets.size(); ++k) {
        const std::vector<double>& t = res.trace.targets[k];
        v.require(t.size() == data.size(), "trace row count mismatch");
        for (std::size_t i = 0; i < data.size(); ++i) {
            if (data[i].censored) {
                if (k == 0) ++cens;
                v.require(t[i] >= data[i].cutoff, "iteration " + std::to_string(k) +
                                                      ": imputed value below its bound");
            } else {
                v.require(t[i] == data[i].y, "uncensored target moved in the trace");
            }
        }
    }
    for (std::size_t i = 0; i < data.size(); ++i) {
        if (data[i].censored) {
            v.require(!res.data[i].censored, "censored flag not cleared");
            v.require(res.data[i].y >= data[i].cutoff, "final imputation below its bound");
        } else {
            v.require(res.data[i].y == data[i].y && res.data[i].x == data[i].x &&
                          res.data[i].cutoff == data[i].cutoff &&
                          !res.data[i].censored,
                      "uncensored row not copied through bitwise");
        }
    }

    // No censoring short-circuits to one fit and an empty trace.
    std::vector<Observation> clean;
    for (const DatasetRow& r : demo_rows(1))
        clean.push_back({r.x, r.noisy_y, false, kInf});
    const std::uint64_t before2 = train_invocation_count();
    const ShResult res2 = schmee_hahn(clean, kIters, trainer);
    v.require(train_invocation_count() - before2 == 1, "clean data should use a single fit");
    v.require(res2.trace.targets.empty(), "clean data should leave an empty trace");

    if (v.ok)
        v.detail = std::to_string(kIters) + " fits over " + std::to_string(cens) +
                   " censored rows, imputations >= bounds in every iteration, " +
                   "uncensored rows bitwise intact, clean data = 1 fit";
    return v;
}

// ---------------------------------------------------------------------
// Criterion 5: ensemble aggregation is exact on hand-built members, and a
// singleton ensemble reports zero epistemic variance.
// ---------------------------------------------------------------------

Verdict criterion5() {
    Verdict v;
    Ensemble ens;
    ens.norm.lo = {0.0};
    ens.norm.hi = {1.0};
    for (double mu : {1.0, 2.0, 3.0}) {
        Mlp net = init_mlp(1, 0);
        std::fill(net.params.begin(), net.params.end(), 0.0);
        net.params[net.b4()] = mu;  // constant mean head
        ens.members.push_back(std::move(net));
    }
    const PredictiveHead h = ens.predict(std::vector<double>{0.5});
    v.require(std::fabs(h.mu - 2.0) <= 1e-12, "mean " + fmt(h.mu) + " != 2 within 1e-12");
    v.require(std::fabs(h.sigma2 - 2.0 / 3.0) <= 1e-12,
              "variance " + fmt(h.sigma2) + " != 2/3 within 1e-12");

    Ensemble solo;
    solo.norm = ens.norm;
    solo.members.push_back(ens.members[0]);
    const PredictiveHead hs = solo.predict(std::vector<double>{0.25});
    v.require(hs.sigma2 == 0.0, "singleton variance " + fmt(hs.sigma2) + " != 0");
    if (v.ok) v.detail = "members {1,2,3} -> (2, 2/3) within 1e-12; single member -> variance 0";
    return v;
}

// ---------------------------------------------------------------------
// Criterion 6: on the simulated branin runtime target, the model-guided
// optimizer matches or beats random search under equal racing budgets:
// median validated cost no worse, strictly better on >= 10 of 16 seeds.
// ---------------------------------------------------------------------

Verdict criterion6() {
    Verdict v;
    const SimulatedTarget sim(synthetic_fn("branin"), 1.0, 100.0, 0.3);
    constexpr int kSeeds = 16;
    constexpr int kValidationRuns = 50;

    std::vector<double> score_nn(kSeeds), score_rand(kSeeds);
    std::atomic<int> next{0};
    std::atomic<int> done{0};
    const auto worker = [&] {
        for (;;) {
            const int task = next.fetch_add(1);
            if (task >= kSeeds * 2) return;
            const int i = task / 2;
            const Method method = task % 2 == 0 ? Method::nn : Method::random;
            // Equal budgets for both methods: identical config and a shared
            // cold start per seed. The cold start is sized so the first model
            // fit has global anchors (24 points in 2-D), and races are long
            // and forgiving enough (16 runs, slack 2) that a genuinely better
            // challenger survives the incumbent's selection-biased early
            // prefix instead of dying on its first capped run.
            OptimizerConfig cfg;
            cfg.iterations = 50;
            cfg.cold_start = 24;
            cfg.max_runs = 16;
            cfg.slack = 2.0;
            cfg.pool_size = 512;
            cfg.inner_epochs = 500;
            cfg.seed = mix_seed(0x0B7A'11CE, static_cast<std::uint64_t>(i));
            const OptimizeResult res = optimize(sim, method, cfg);
            const ValidationSummary val = validate_incumbent(
                sim, res.incumbent, kValidationRuns,
                mix_seed(0x5C04'E5EED, static_cast<std::uint64_t>(i)));
            (method == Method::nn ? score_nn : score_rand)[i] = val.mean;
            note("criterion 6: " + std::to_string(done.fetch_add(1) + 1) + "/32 " +
                 method_name(method) + " seed " + std::to_string(i) + " -> " + fmt(val.mean));
        }
    };
    if (g_jobs <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int t = 0; t < g_jobs; ++t) pool.emplace_back(worker);
        for (std::thread& t : pool) t.join();
    }

    int wins = 0;
    for (int i = 0; i < kSeeds; ++i)
        if (score_nn[i] < score_rand[i]) ++wins;
    const double med_nn = median(score_nn);
    const double med_rand = median(score_rand);
    v.require(med_nn <= med_rand, "median nn " + fmt(med_nn) + " worse than random " +
                                      fmt(med_rand));
    v.require(wins >= 10, "nn strictly better on only " + std::to_string(wins) + "/16 seeds");
    if (v.ok)
        v.detail = "validated cost median nn " + fmt(med_nn) + " vs random " + fmt(med_rand) +
                   ", nn strictly better on " + std::to_string(wins) + "/16 seeds";
    return v;
}

// ---------------------------------------------------------------------
// Criterion 7: censored-normal maximum likelihood recovers N(2, 1) from
// 10^4 draws right-censored at 2.5, both parameters within 0.05.
// ---------------------------------------------------------------------

Verdict criterion7() {
    Verdict v;
    Rng rng(0xCE7501);
    constexpr int kN = 10000;
    constexpr double kCut = 2.5;
    std::vector<double> values(kN);
    std::vector<unsigned char> cens(kN);
    int n_cens = 0;
    for (int i = 0; i < kN; ++i) {
        const double y = 2.0 + rng.normal();
        const bool c = y > kCut;
        values[i] = c ? kCut : y;
        cens[i] = c ? 1 : 0;
        n_cens += c;
    }
    const CensoredNormalFit fit = fit_censored_normal(values, cens);
    v.require(std::fabs(fit.mu - 2.0) <= 0.05, "mu " + fmt(fit.mu) + " off by more than 0.05");
    v.require(std::fabs(fit.sigma - 1.0) <= 0.05,
              "sigma " + fmt(fit.sigma) + " off by more than 0.05");
    if (v.ok)
        v.detail = std::to_string(n_cens) + "/10000 censored at 2.5: mu " + fmt(fit.mu) +
                   ", sigma " + fmt(fit.sigma);
    return v;
}

// ---------------------------------------------------------------------
// Criterion 8: every CLI subcommand, run twice with the same flags and
// seeds, writes byte-identical output files.  Also checks that an INI
// config reproduces the equivalent flag invocation.
// ---------------------------------------------------------------------

std::string slurp(const fs::path& p) {
    std::ifstream is(p, std::ios::binary);
    std::ostringstream os;
    os << is.rdbuf();
    return os.str();
}

Verdict criterion8() {
    Verdict v;
    if (g_cli.empty()) {
        v.require(false, "no --cli path given");
        return v;
    }
    const fs::path root = fs::temp_directory_path() / "cbo_acceptance";
    std::error_code ec;
    fs::remove_all(root, ec);
    fs::create_directories(root / "a");
    fs::create_directories(root / "b");

    // Relative output names double as the comparison manifest.
    const std::vector<std::string> outputs = {
        "data.jsonl", "model.bin",   "model_ini.bin", "pred.csv", "table.csv",
        "shtrace.csv", "opt.csv",    "traj.csv",      "hist.jsonl", "val.csv",
        "valh.csv"};

    int commands = 0;
    const auto run_all = [&](const fs::path& dir) {
        const std::string d = dir.string();
        const std::string ini = d + "/fit.ini";
        {
            std::ofstream os(ini);
            os << "[fit]\ndata = data.jsonl\nloss = tobit\nmembers = 2\nepochs = 5\n"
                  "seed = 9\nout = model_ini.bin\n";
        }
        const std::vector<std::string> cmds = {
            " datagen --function camelback --seed 3 --censor random --percentile 60"
            " --censor-seed 5 --out " + d + "/data.jsonl",
            " fit --data " + d + "/data.jsonl --loss tobit --members 2 --epochs 5 --seed 9"
            " --out " + d + "/model.bin",
            " fit --config " + ini,
            " predict --model " + d + "/model.bin --data " + d + "/data.jsonl --out " + d +
                "/pred.csv",
            " table1 --functions branin --percentiles 80 --strategies I,T --seeds 1 --folds 2"
            " --epochs 5 --members 1 --sh-iterations 2 --out " + d + "/table.csv",
            " shtrace --function branin --percentile 80 --iterations 2 --folds 2 --epochs 5"
            " --out " + d + "/shtrace.csv",
            " optimize --function branin --method both --iterations 2 --cold-start 4"
            " --max-runs 2 --pool 16 --inner-epochs 10 --seeds 2 --validation-runs 5"
            " --seed 11 --out " + d + "/opt.csv",
            " optimize --function branin --method nn --iterations 2 --cold-start 4"
            " --max-runs 2 --pool 16 --inner-epochs 10 --seeds 1 --validation-runs 5"
            " --seed 11 --out /dev/null --trajectory " + d + "/traj.csv --history " + d +
                "/hist.jsonl",
            " validate --function branin --point=-3,12 --runs 8 --seed 2 --out " + d +
                "/val.csv",
            " validate --function branin --history " + d + "/hist.jsonl --runs 5 --seed 3"
            " --out " + d + "/valh.csv",
        };
        for (std::size_t k = 0; k < cmds.size(); ++k) {
            const std::string log = d + "/cmd" + std::to_string(k);
            const std::string full =
                g_cli + cmds[k] + " > " + log + ".out 2> " + log + ".err";
            if (std::system(full.c_str()) != 0) {
                v.require(false, "command failed: cbo" + cmds[k].substr(0, 40) + "... (see " +
                                     log + ".err)");
                return;
            }
            ++commands;
        }
    };
    run_all(root / "a");
    if (v.ok) run_all(root / "b");

    int identical = 0;
    if (v.ok) {
        for (const std::string& name : outputs) {
            const std::string a = slurp(root / "a" / name);
            const std::string b = slurp(root / "b" / name);
            v.require(!a.empty(), name + " is empty or missing");
            v.require(a == b, name + " differs between identical runs");
            identical += a == b && !a.empty();
        }
        // The config-file fit must match the flag fit byte for byte.
        v.require(slurp(root / "a" / "model.bin") == slurp(root / "a" / "model_ini.bin"),
                  "INI config fit differs from the flag invocation");
    }
    if (v.ok)
        v.detail = std::to_string(commands / 2) + " commands x2, " +
                   std::to_string(identical) + " output files byte-identical, INI == flags";
    return v;
}

// ---------------------------------------------------------------------
// Criterion 9: the log survival function is finite and strictly decreasing
// across |z| <= 38, and the censored loss and gradients stay finite six
// standard deviations out.
// ---------------------------------------------------------------------

Verdict criterion9() {
    Verdict v;
    double prev = kInf;
    long long points = 0;
    for (int i = -3800; i <= 3800; ++i) {
        const double z = i / 100.0;
        const double s = std_normal_log_survival(z);
        v.require(std::isfinite(s), "log survival not finite at z=" + fmt(z));
        v.require(s < prev, "log survival not strictly decreasing at z=" + fmt(z));
        prev = s;
        ++points;
    }
    for (double z : {-6.0, 6.0}) {
        for (double sigma2 : {1.0, 0.25}) {
            const double y = z * std::sqrt(sigma2);
            for (bool cens : {true, false}) {
                const double loss = tobit_nll(y, 0.0, sigma2, cens);
                const LossGrad g = tobit_grad(y, 0.0, sigma2, cens);
                v.require(std::isfinite(loss) && std::isfinite(g.d_mu) &&
                              std::isfinite(g.d_sigma2),
                          "loss or gradient not finite at z=" + fmt(z) +
                              " sigma2=" + fmt(sigma2));
            }
        }
    }
    if (v.ok)
        v.detail = std::to_string(points) +
                   " grid points finite and strictly decreasing; loss and gradients finite "
                   "at |z|=6";
    return v;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"acceptance gate"};
    std::string only;
    app.add_option("--cli", g_cli, "path to the cbo binary (criterion 8)");
    app.add_option("--jobs", g_jobs, "worker threads for the heavy studies");
    app.add_option("--only", only, "comma list of criteria to run (default: all)");
    CLI11_PARSE(app, argc, argv);

    std::set<int> wanted;
    if (!only.empty()) {
        std::istringstream is(only);
        std::string tok;
        while (std::getline(is, tok, ',')) wanted.insert(std::stoi(tok));
    }

    using Criterion = Verdict (*)();
    const std::pair<int, Criterion> criteria[] = {
        {1, criterion1}, {2, criterion2}, {3, criterion3},
        {4, criterion4}, {5, criterion5}, {6, criterion6},
        {7, criterion7}, {8, criterion8}, {9, criterion9},
    };

    int failures = 0;
    int ran = 0;
    for (const auto& [id, fn] : criteria) {
        if (!wanted.empty() && !wanted.count(id)) continue;
        Verdict v;
        try {
            v = fn();
        } catch (const std::exception& e) {
            v.ok = false;
            v.detail = std::string("exception: ") + e.what();
        }
        std::printf("criterion %d: %s  %s\n", id, v.ok ? "PASS" : "FAIL", v.detail.c_str());
        std::fflush(stdout);
        failures += !v.ok;
        ++ran;
    }
    std::printf("acceptance: %d/%d criteria passed\n", ran - failures, ran);
    return failures;
}
