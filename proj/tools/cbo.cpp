// cbo: command line front end for the censorbo library.
//
// Every run is deterministic given its flags: seeds are explicit, outputs
// carry no timestamps, and floating point values are written in shortest
// round-trip form.  Exit codes: 0 success, 1 failed --assert check,
// 2 usage/config/input error.

#include <censorbo.h>

#include <CLI11.hpp>

#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <limits>
#include <map>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

namespace {

[[noreturn]] void die(int code, const std::string& msg) {
    std::cerr << "cbo: " << msg << "\n";
    std::exit(code);
}

void check(cbo_status s) {
    if (s != CBO_OK) die(2, cbo_last_error());
}

std::string fmt(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : s) {
        if (c == sep) {
            out.push_back(cur);
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    out.push_back(cur);
    return out;
}

std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    std::size_t e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

std::vector<double> parse_point(const std::string& s) {
    std::vector<double> out;
    for (const std::string& tok : split(s, ',')) {
        const std::string t = trim(tok);
        double v = 0;
        const auto res = std::from_chars(t.data(), t.data() + t.size(), v);
        if (res.ec != std::errc{} || res.ptr != t.data() + t.size())
            die(2, "bad number in point: '" + t + "'");
        out.push_back(v);
    }
    return out;
}

std::ofstream open_out(const std::string& path) {
    std::ofstream os(path);
    if (!os) die(2, "cannot open '" + path + "' for writing");
    return os;
}

// ---------------------------------------------------------------------
// Config file: INI sections named after subcommands, keys named after the
// long flags.  Strict: unknown sections or keys are errors.  Relative paths
// are resolved against the config file's directory.  Command line flags
// override config values because the config is applied first, as defaults.
// ---------------------------------------------------------------------

struct ConfigEntry {
    const char* key;
    std::function<void(const std::string&)> set;
    bool is_path = false;
};

using ConfigSection = std::vector<ConfigEntry>;

void set_int(int& target, const std::string& key, const std::string& v) {
    const auto res = std::from_chars(v.data(), v.data() + v.size(), target);
    if (res.ec != std::errc{} || res.ptr != v.data() + v.size())
        die(2, "config: key '" + key + "': bad integer '" + v + "'");
}

void set_u64(std::uint64_t& target, const std::string& key, const std::string& v) {
    const auto res = std::from_chars(v.data(), v.data() + v.size(), target);
    if (res.ec != std::errc{} || res.ptr != v.data() + v.size())
        die(2, "config: key '" + key + "': bad integer '" + v + "'");
}

void set_double(double& target, const std::string& key, const std::string& v) {
    std::string t = v;
    if (t == "inf") {
        target = std::numeric_limits<double>::infinity();
        return;
    }
    const auto res = std::from_chars(t.data(), t.data() + t.size(), target);
    if (res.ec != std::errc{} || res.ptr != t.data() + t.size())
        die(2, "config: key '" + key + "': bad number '" + v + "'");
}

void set_bool(bool& target, const std::string& key, const std::string& v) {
    if (v == "true" || v == "1")
        target = true;
    else if (v == "false" || v == "0")
        target = false;
    else
        die(2, "config: key '" + key + "': bad boolean '" + v + "'");
}

#define CFG_INT(field) [&o](const std::string& v) { set_int(o.field, #field, v); }
#define CFG_U64(field) [&o](const std::string& v) { set_u64(o.field, #field, v); }
#define CFG_DBL(field) [&o](const std::string& v) { set_double(o.field, #field, v); }
#define CFG_STR(field) [&o](const std::string& v) { o.field = v; }
#define CFG_BOOL(field) [&o](const std::string& v) { set_bool(o.field, #field, v); }

void apply_config(const std::string& path, std::map<std::string, ConfigSection>& sections) {
    std::ifstream is(path);
    if (!is) die(2, "cannot open config '" + path + "'");
    const std::filesystem::path dir = std::filesystem::path(path).parent_path();

    std::string line;
    std::string section;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        const std::string t = trim(line);
        if (t.empty() || t[0] == '#' || t[0] == ';') continue;
        const std::string where = path + ":" + std::to_string(lineno);
        if (t.front() == '[') {
            if (t.back() != ']') die(2, where + ": malformed section header");
            section = trim(t.substr(1, t.size() - 2));
            if (!sections.count(section)) die(2, where + ": unknown section '" + section + "'");
            continue;
        }
        const std::size_t eq = t.find('=');
        if (eq == std::string::npos) die(2, where + ": expected key = value");
        if (section.empty()) die(2, where + ": key outside any section");
        const std::string key = trim(t.substr(0, eq));
        std::string value = trim(t.substr(eq + 1));
        const ConfigSection& entries = sections.at(section);
        const ConfigEntry* entry = nullptr;
        for (const ConfigEntry& e : entries)
            if (key == e.key) entry = &e;
        if (!entry) die(2, where + ": unknown key '" + key + "' in section [" + section + "]");
        if (entry->is_path && !value.empty() && !std::filesystem::path(value).is_absolute())
            value = (dir / value).string();
        entry->set(value);
    }
}

// ---------------------------------------------------------------------
// Option structs, one per subcommand.
// ---------------------------------------------------------------------

struct DatagenOpts {
    std::string function = "branin";
    std::uint64_t seed = 0;
    std::string censor = "none";  // none | random | fixed
    double percentile = 80.0;
    double cutoff = 0.0;
    std::uint64_t censor_seed = 0;
    std::string out;
};

struct TrainKnobs {
    int epochs = 2000;
    int batch = 16;
    double lr = 1e-2;
    double momentum = 0.9;
    double weight_decay = 1e-4;
    double clip = 0.1;
    int members = 1;
    int jobs = 1;
};

struct FitOpts : TrainKnobs {
    std::string data;
    std::string loss = "gaussian";
    std::uint64_t seed = 0;
    std::string out;
};

struct PredictOpts {
    std::string model;
    std::string data;
    std::string out;  // empty = stdout
};

struct Table1Opts : TrainKnobs {
    std::string functions = "branin,camelback,hartmann3,hartmann6";
    std::string percentiles = "10,45,80";
    std::string strategies = "I,D,SH,T";
    int seeds = 3;
    std::uint64_t seed = 0;
    int folds = 5;
    int sh_iterations = 5;
    std::string out;
    bool assert_ordering = false;
};

struct ShTraceOpts : TrainKnobs {
    std::string function = "branin";
    double percentile = 80.0;
    std::uint64_t seed = 0;
    int folds = 5;
    int iterations = 5;
    std::string out;
};

struct SimKnobs {
    double t_min = 1.0;
    double t_max = 100.0;
    double noise = 0.3;
};

struct OptimizeOpts : SimKnobs {
    std::string function = "branin";
    std::string method = "both";  // nn | random | both
    int iterations = 30;
    double kappa_max = std::numeric_limits<double>::infinity();
    int cold_start = 8;
    int max_runs = 8;
    double slack = 1.2;
    int pool = 512;
    int inner_epochs = 500;
    int seeds = 16;
    std::uint64_t seed = 0;
    int validation_runs = 50;
    int jobs = 1;
    std::string out;         // summary csv
    std::string trajectory;  // per-iteration csv, single seed+method only
    std::string history;     // run history jsonl, single seed+method only
    bool assert_better = false;
};

struct ValidateOpts : SimKnobs {
    std::string function = "branin";
    std::string point;
    std::string history;  // alternative: incumbent of a stored run history
    int runs = 50;
    std::uint64_t seed = 0;
    std::string out;  // empty = stdout
};

// ---------------------------------------------------------------------
// Subcommand bodies.
// ---------------------------------------------------------------------

int run_datagen(const DatagenOpts& o) {
    if (o.out.empty()) die(2, "datagen: --out is required");
    cbo_dataset* raw = nullptr;
    check(cbo_dataset_generate(o.function.c_str(), o.seed, &raw));
    cbo_dataset* final_ds = raw;
    if (o.censor != "none") {
        cbo_dataset* censored = nullptr;
        check(cbo_dataset_censor(raw, o.censor.c_str(), o.percentile, o.cutoff, o.censor_seed,
                                 &censored));
        cbo_dataset_free(raw);
        final_ds = censored;
    }
    check(cbo_dataset_save(final_ds, o.out.c_str()));
    size_t n = 0, nc = 0;
    check(cbo_dataset_size(final_ds, &n));
    check(cbo_dataset_censored_count(final_ds, &nc));
    std::cout << "wrote " << o.out << ": " << n << " rows, " << nc << " censored\n";
    cbo_dataset_free(final_ds);
    return 0;
}

cbo_train_options to_c_train(const TrainKnobs& k, std::uint64_t seed, const char* loss) {
    cbo_train_options t;
    cbo_train_options_init(&t);
    t.epochs = k.epochs;
    t.batch_size = k.batch;
    t.peak_lr = k.lr;
    t.momentum = k.momentum;
    t.weight_decay = k.weight_decay;
    t.grad_clip = k.clip;
    t.ensemble_size = k.members;
    t.jobs = k.jobs;
    t.seed = seed;
    t.loss = loss;
    return t;
}

int run_fit(const FitOpts& o) {
    if (o.data.empty() || o.out.empty()) die(2, "fit: --data and --out are required");
    cbo_dataset* ds = nullptr;
    check(cbo_dataset_load(o.data.c_str(), &ds));
    const cbo_train_options t = to_c_train(o, o.seed, o.loss.c_str());
    cbo_model* model = nullptr;
    check(cbo_fit(ds, &t, &model));
    check(cbo_model_save(model, o.out.c_str()));
    size_t members = 0;
    check(cbo_model_members(model, &members));
    std::cout << "wrote " << o.out << ": " << members << " member(s), loss " << o.loss << "\n";
    cbo_model_free(model);
    cbo_dataset_free(ds);
    return 0;
}

int run_predict(const PredictOpts& o) {
    if (o.model.empty() || o.data.empty()) die(2, "predict: --model and --data are required");
    cbo_model* model = nullptr;
    check(cbo_model_load(o.model.c_str(), &model));
    cbo_dataset* ds = nullptr;
    check(cbo_dataset_load(o.data.c_str(), &ds));
    size_t n = 0, dim = 0, mdim = 0;
    check(cbo_dataset_size(ds, &n));
    check(cbo_dataset_dim(ds, &dim));
    check(cbo_model_input_dim(model, &mdim));
    if (dim != mdim) die(2, "predict: model expects dimension " + std::to_string(mdim));

    std::ofstream file;
    if (!o.out.empty()) file = open_out(o.out);
    std::ostream& os = o.out.empty() ? std::cout : file;
    for (size_t d = 0; d < dim; ++d) os << "x" << d << ",";
    os << "mu,var\n";
    std::vector<double> x(dim);
    for (size_t i = 0; i < n; ++i) {
        check(cbo_dataset_row(ds, i, x.data(), nullptr, nullptr, nullptr));
        double mu = 0, var = 0;
        check(cbo_predict(model, x.data(), dim, &mu, &var));
        for (double v : x) os << fmt(v) << ",";
        os << fmt(mu) << "," << fmt(var) << "\n";
    }
    cbo_dataset_free(ds);
    cbo_model_free(model);
    return 0;
}

std::string percentile_label(double p) {
    if (p == std::floor(p) && std::fabs(p) < 1e6)
        return std::to_string(static_cast<long long>(p));
    return fmt(p);
}

int run_table1(const Table1Opts& o) {
    if (o.out.empty()) die(2, "table1: --out is required");
    const std::vector<std::string> functions = split(o.functions, ',');
    const std::vector<std::string> strategies = split(o.strategies, ',');
    std::vector<double> percentiles;
    for (const std::string& p : split(o.percentiles, ',')) {
        double v = 0;
        set_double(v, "percentiles", trim(p));
        percentiles.push_back(v);
    }
    if (o.seeds < 1) die(2, "table1: --seeds must be >= 1");
    std::vector<std::uint64_t> seeds(o.seeds);
    for (int i = 0; i < o.seeds; ++i) seeds[i] = o.seed + static_cast<std::uint64_t>(i);

    const cbo_train_options t = to_c_train(o, o.seed, "gaussian");

    // cell key: function|percentile|strategy
    std::map<std::string, std::optional<double>> cells;
    for (const std::string& fn : functions)
        for (double p : percentiles)
            for (const std::string& strat : strategies) {
                double value = 0;
                int failed = 0;
                check(cbo_table1_cell(fn.c_str(), "random", p, 0.0, strat.c_str(), seeds.data(),
                                      seeds.size(), o.folds, o.sh_iterations, &t, &value,
                                      &failed));
                const std::string key = fn + "|" + percentile_label(p) + "|" + strat;
                cells[key] = failed ? std::nullopt : std::optional<double>(value);
            }

    auto os = open_out(o.out);
    os << "function";
    for (double p : percentiles)
        for (const std::string& strat : strategies)
            os << ",p" << percentile_label(p) << "_" << strat;
    os << "\n";
    for (const std::string& fn : functions) {
        os << fn;
        for (double p : percentiles)
            for (const std::string& strat : strategies) {
                const auto& cell = cells.at(fn + "|" + percentile_label(p) + "|" + strat);
                os << ",";
                if (cell) os << fmt(*cell);
            }
        os << "\n";
    }
    if (!os.good()) die(2, "write failed for '" + o.out + "'");
    std::cout << "wrote " << o.out << "\n";

    if (!o.assert_ordering) return 0;
    // The censoring-aware loss should clearly beat ignoring censoring and at
    // least match iterative imputation. T < 0.7*I and T <= 1.25*SH per cell.
    bool ok = true;
    for (const std::string& fn : functions)
        for (double p : percentiles) {
            const std::string base = fn + "|" + percentile_label(p) + "|";
            const auto get = [&](const char* s) -> std::optional<double> {
                const auto it = cells.find(base + s);
                return it == cells.end() ? std::nullopt : it->second;
            };
            const auto ti = get("T"), ii = get("I"), sh = get("SH");
            const std::string cell = fn + " p" + percentile_label(p);
            if (ti && ii) {
                const bool pass = *ti < 0.7 * *ii;
                std::cout << "assert " << cell << ": T=" << fmt(*ti) << " vs 0.7*I="
                          << fmt(0.7 * *ii) << (pass ? " ok" : " FAILED") << "\n";
                ok = ok && pass;
            } else if (ii || ti) {
                std::cout << "assert " << cell << ": missing T or I cell FAILED\n";
                ok = false;
            }
            if (ti && sh) {
                const bool pass = *ti <= 1.25 * *sh;
                std::cout << "assert " << cell << ": T=" << fmt(*ti) << " vs 1.25*SH="
                          << fmt(1.25 * *sh) << (pass ? " ok" : " FAILED") << "\n";
                ok = ok && pass;
            } else if (ti && !sh) {
                std::cout << "assert " << cell << ": missing SH cell FAILED\n";
                ok = false;
            }
        }
    return ok ? 0 : 1;
}

int run_shtrace(const ShTraceOpts& o) {
    if (o.out.empty()) die(2, "shtrace: --out is required");
    const cbo_train_options t = to_c_train(o, o.seed, "gaussian");
    std::vector<double> iter_mean(o.iterations), iter_std(o.iterations);
    double tobit_mean = 0, tobit_std = 0;
    check(cbo_sh_trace(o.function.c_str(), "random", o.percentile, 0.0, o.seed, o.folds,
                       o.iterations, &t, iter_mean.data(), iter_std.data(), &tobit_mean,
                       &tobit_std));
    auto os = open_out(o.out);
    os << "iteration,rmse_mean,rmse_std\n";
    for (int k = 0; k < o.iterations; ++k)
        os << (k + 1) << "," << fmt(iter_mean[k]) << "," << fmt(iter_std[k]) << "\n";
    os << "tobit," << fmt(tobit_mean) << "," << fmt(tobit_std) << "\n";
    if (!os.good()) die(2, "write failed for '" + o.out + "'");
    std::cout << "wrote " << o.out << "\n";
    return 0;
}

cbo_simulator* make_simulator(const std::string& function, const SimKnobs& k) {
    cbo_simulator* sim = nullptr;
    check(cbo_simulator_create(function.c_str(), k.t_min, k.t_max, k.noise, &sim));
    return sim;
}

int run_optimize(const OptimizeOpts& o) {
    std::vector<std::string> methods;
    if (o.method == "both")
        methods = {"nn", "random"};
    else if (o.method == "nn" || o.method == "random")
        methods = {o.method};
    else
        die(2, "optimize: --method must be nn, random or both");
    if (o.seeds < 1) die(2, "optimize: --seeds must be >= 1");
    const bool single = o.seeds == 1 && methods.size() == 1;
    if ((!o.trajectory.empty() || !o.history.empty()) && !single)
        die(2, "optimize: --trajectory/--history need a single seed and method");

    cbo_simulator* sim = make_simulator(o.function, o);
    cbo_optimizer_options c;
    cbo_optimizer_options_init(&c);
    c.iterations = o.iterations;
    c.kappa_max = o.kappa_max;
    c.cold_start = o.cold_start;
    c.max_runs = o.max_runs;
    c.slack = o.slack;
    c.pool_size = o.pool;
    c.inner_epochs = o.inner_epochs;

    struct Task {
        std::string method;
        std::uint64_t seed;
        double score = 0.0;
        cbo_runhistory* hist = nullptr;
    };
    std::vector<Task> tasks;
    for (const std::string& m : methods)
        for (int s = 0; s < o.seeds; ++s)
            tasks.push_back({m, o.seed + static_cast<std::uint64_t>(s)});

    // Independent master seeds; safe to fan out.  Each task's validation uses
    // the same seed for both methods, pairing the comparison.
    std::atomic<size_t> next{0};
    std::atomic<bool> failed{false};
    std::string fail_msg;
    std::mutex fail_mu;
    const int workers = std::max(1, std::min<int>(o.jobs, static_cast<int>(tasks.size())));
    auto worker = [&] {
        for (;;) {
            const size_t i = next.fetch_add(1);
            if (i >= tasks.size() || failed.load()) return;
            Task& task = tasks[i];
            cbo_optimizer_options oc = c;
            oc.seed = task.seed;
            cbo_status st = cbo_optimize(sim, task.method.c_str(), &oc, &task.hist);
            if (st == CBO_OK) {
                size_t dim = 0;
                cbo_simulator_dim(sim, &dim);
                std::vector<double> inc(dim);
                st = cbo_runhistory_incumbent(task.hist, inc.data(), nullptr);
                if (st == CBO_OK)
                    st = cbo_validate(sim, inc.data(), dim, o.validation_runs, task.seed,
                                      &task.score, nullptr, nullptr, nullptr);
            }
            if (st != CBO_OK) {
                std::lock_guard<std::mutex> lock(fail_mu);
                failed = true;
                fail_msg = cbo_last_error();
                return;
            }
        }
    };
    if (workers == 1) {
        worker();
    } else {
        std::vector<std::thread> threads;
        for (int w = 0; w < workers; ++w) threads.emplace_back(worker);
        for (std::thread& th : threads) th.join();
    }
    if (failed) die(2, fail_msg);

    std::map<std::string, std::vector<double>> scores;
    for (const Task& task : tasks) scores[task.method].push_back(task.score);

    std::ostringstream summary;
    summary << "method,seeds,q25,median,q75\n";
    for (const std::string& m : methods) {
        const std::vector<double>& v = scores[m];
        double q25 = 0, q50 = 0, q75 = 0;
        check(cbo_stats_quantile(v.data(), v.size(), 0.25, &q25));
        check(cbo_stats_quantile(v.data(), v.size(), 0.5, &q50));
        check(cbo_stats_quantile(v.data(), v.size(), 0.75, &q75));
        summary << m << "," << v.size() << "," << fmt(q25) << "," << fmt(q50) << "," << fmt(q75)
                << "\n";
    }
    std::cout << summary.str();
    if (!o.out.empty()) {
        auto os = open_out(o.out);
        os << summary.str();
        if (!os.good()) die(2, "write failed for '" + o.out + "'");
    }

    if (!o.trajectory.empty()) {
        auto os = open_out(o.trajectory);
        os << "iteration,wallclock,incumbent_cost\n";
        size_t tn = 0;
        check(cbo_runhistory_trajectory_size(tasks[0].hist, &tn));
        for (size_t i = 0; i < tn; ++i) {
            int iter = 0;
            double wall = 0, cost = 0;
            check(cbo_runhistory_trajectory_row(tasks[0].hist, i, &iter, &wall, &cost));
            os << iter << "," << fmt(wall) << "," << fmt(cost) << "\n";
        }
        if (!os.good()) die(2, "write failed for '" + o.trajectory + "'");
        std::cout << "wrote " << o.trajectory << "\n";
    }
    if (!o.history.empty()) {
        check(cbo_runhistory_save(tasks[0].hist, o.history.c_str()));
        std::cout << "wrote " << o.history << "\n";
    }

    int rc = 0;
    if (o.assert_better) {
        if (scores.size() != 2) die(2, "optimize: --assert needs --method both");
        const std::vector<double>& nn = scores["nn"];
        const std::vector<double>& rnd = scores["random"];
        double mnn = 0, mrnd = 0;
        check(cbo_stats_quantile(nn.data(), nn.size(), 0.5, &mnn));
        check(cbo_stats_quantile(rnd.data(), rnd.size(), 0.5, &mrnd));
        int wins = 0;
        for (size_t i = 0; i < nn.size(); ++i) wins += nn[i] < rnd[i] ? 1 : 0;
        const int needed = (5 * o.seeds + 7) / 8;  // ceil(0.625 * seeds)
        const bool median_ok = mnn <= mrnd;
        const bool wins_ok = wins >= needed;
        std::cout << "assert median: nn=" << fmt(mnn) << " random=" << fmt(mrnd)
                  << (median_ok ? " ok" : " FAILED") << "\n";
        std::cout << "assert wins: " << wins << "/" << o.seeds << " needed " << needed
                  << (wins_ok ? " ok" : " FAILED") << "\n";
        rc = median_ok && wins_ok ? 0 : 1;
    }

    for (Task& task : tasks) cbo_runhistory_free(task.hist);
    cbo_simulator_free(sim);
    return rc;
}

int run_validate(const ValidateOpts& o) {
    if (o.point.empty() == o.history.empty())
        die(2, "validate: exactly one of --point or --history is required");
    cbo_simulator* sim = make_simulator(o.function, o);
    size_t dim = 0;
    check(cbo_simulator_dim(sim, &dim));

    std::vector<double> x;
    if (!o.point.empty()) {
        x = parse_point(o.point);
    } else {
        cbo_runhistory* hist = nullptr;
        check(cbo_runhistory_load(o.history.c_str(), &hist));
        size_t hdim = 0;
        check(cbo_runhistory_dim(hist, &hdim));
        x.resize(hdim);
        check(cbo_runhistory_incumbent(hist, x.data(), nullptr));
        cbo_runhistory_free(hist);
    }
    if (x.size() != dim) die(2, "validate: point dimension must be " + std::to_string(dim));

    double mean = 0, q25 = 0, median = 0, q75 = 0;
    check(cbo_validate(sim, x.data(), dim, o.runs, o.seed, &mean, &q25, &median, &q75));

    std::ofstream file;
    if (!o.out.empty()) file = open_out(o.out);
    std::ostream& os = o.out.empty() ? std::cout : file;
    os << "mean,q25,median,q75\n"
       << fmt(mean) << "," << fmt(q25) << "," << fmt(median) << "," << fmt(q75) << "\n";
    cbo_simulator_free(sim);
    return 0;
}

// ---------------------------------------------------------------------

std::string find_config(int argc, char** argv) {
    for (int i = 1; i < argc; ++i) {
        const std::string a = argv[i];
        if (a == "--config" && i + 1 < argc) return argv[i + 1];
        if (a.rfind("--config=", 0) == 0) return a.substr(9);
    }
    return "";
}

}  // namespace

int main(int argc, char** argv) {
    DatagenOpts datagen;
    FitOpts fit;
    PredictOpts predict;
    Table1Opts table1;
    ShTraceOpts shtrace;
    OptimizeOpts optimize;
    ValidateOpts validate;

    // Config sections mirror the subcommands; keys mirror the long flags.
    std::map<std::string, ConfigSection> sections;
    {
        auto& o = datagen;
        sections["datagen"] = {{"function", CFG_STR(function)},
                               {"seed", CFG_U64(seed)},
                               {"censor", CFG_STR(censor)},
                               {"percentile", CFG_DBL(percentile)},
                               {"cutoff", CFG_DBL(cutoff)},
                               {"censor-seed", CFG_U64(censor_seed)},
                               {"out", CFG_STR(out), true}};
    }
    const auto train_entries = [](auto& o) {
        return ConfigSection{{"epochs", CFG_INT(epochs)},
                             {"batch", CFG_INT(batch)},
                             {"lr", CFG_DBL(lr)},
                             {"momentum", CFG_DBL(momentum)},
                             {"weight-decay", CFG_DBL(weight_decay)},
                             {"clip", CFG_DBL(clip)},
                             {"members", CFG_INT(members)},
                             {"jobs", CFG_INT(jobs)}};
    };
    {
        auto& o = fit;
        sections["fit"] = train_entries(o);
        sections["fit"].push_back({"data", CFG_STR(data), true});
        sections["fit"].push_back({"loss", CFG_STR(loss)});
        sections["fit"].push_back({"seed", CFG_U64(seed)});
        sections["fit"].push_back({"out", CFG_STR(out), true});
    }
    {
        auto& o = predict;
        sections["predict"] = {{"model", CFG_STR(model), true},
                               {"data", CFG_STR(data), true},
                               {"out", CFG_STR(out), true}};
    }
    {
        auto& o = table1;
        sections["table1"] = train_entries(o);
        sections["table1"].push_back({"functions", CFG_STR(functions)});
        sections["table1"].push_back({"percentiles", CFG_STR(percentiles)});
        sections["table1"].push_back({"strategies", CFG_STR(strategies)});
        sections["table1"].push_back({"seeds", CFG_INT(seeds)});
        sections["table1"].push_back({"seed", CFG_U64(seed)});
        sections["table1"].push_back({"folds", CFG_INT(folds)});
        sections["table1"].push_back({"sh-iterations", CFG_INT(sh_iterations)});
        sections["table1"].push_back({"out", CFG_STR(out), true});
        sections["table1"].push_back({"assert", CFG_BOOL(assert_ordering)});
    }
    {
        auto& o = shtrace;
        sections["shtrace"] = train_entries(o);
        sections["shtrace"].push_back({"function", CFG_STR(function)});
        sections["shtrace"].push_back({"percentile", CFG_DBL(percentile)});
        sections["shtrace"].push_back({"seed", CFG_U64(seed)});
        sections["shtrace"].push_back({"folds", CFG_INT(folds)});
        sections["shtrace"].push_back({"iterations", CFG_INT(iterations)});
        sections["shtrace"].push_back({"out", CFG_STR(out), true});
    }
    {
        auto& o = optimize;
        sections["optimize"] = {{"function", CFG_STR(function)},
                                {"method", CFG_STR(method)},
                                {"iterations", CFG_INT(iterations)},
                                {"kappa-max", CFG_DBL(kappa_max)},
                                {"cold-start", CFG_INT(cold_start)},
                                {"max-runs", CFG_INT(max_runs)},
                                {"slack", CFG_DBL(slack)},
                                {"pool", CFG_INT(pool)},
                                {"inner-epochs", CFG_INT(inner_epochs)},
                                {"seeds", CFG_INT(seeds)},
                                {"seed", CFG_U64(seed)},
                                {"validation-runs", CFG_INT(validation_runs)},
                                {"t-min", CFG_DBL(t_min)},
                                {"t-max", CFG_DBL(t_max)},
                                {"noise", CFG_DBL(noise)},
                                {"jobs", CFG_INT(jobs)},
                                {"out", CFG_STR(out), true},
                                {"trajectory", CFG_STR(trajectory), true},
                                {"history", CFG_STR(history), true},
                                {"assert", CFG_BOOL(assert_better)}};
    }
    {
        auto& o = validate;
        sections["validate"] = {{"function", CFG_STR(function)},
                                {"point", CFG_STR(point)},
                                {"history", CFG_STR(history), true},
                                {"runs", CFG_INT(runs)},
                                {"seed", CFG_U64(seed)},
                                {"t-min", CFG_DBL(t_min)},
                                {"t-max", CFG_DBL(t_max)},
                                {"noise", CFG_DBL(noise)},
                                {"out", CFG_STR(out), true}};
    }

    const std::string config_path = find_config(argc, argv);
    if (!config_path.empty()) apply_config(config_path, sections);

    CLI::App app{"censoring-aware regression and racing optimization"};
    app.require_subcommand(1);
    std::string config_opt;

    auto add_train = [&](CLI::App* cmd, TrainKnobs& k) {
        cmd->add_option("--epochs", k.epochs, "training epochs");
        cmd->add_option("--batch", k.batch, "minibatch size");
        cmd->add_option("--lr", k.lr, "peak learning rate");
        cmd->add_option("--momentum", k.momentum, "SGD momentum");
        cmd->add_option("--weight-decay", k.weight_decay, "L2 coefficient");
        cmd->add_option("--clip", k.clip, "elementwise gradient clip");
        cmd->add_option("--members", k.members, "ensemble size");
        cmd->add_option("--jobs", k.jobs, "worker threads (0 = all cores)");
    };
    auto add_config = [&](CLI::App* cmd) {
        cmd->add_option("--config", config_opt, "INI config file (flags override)");
    };
    auto add_sim = [&](CLI::App* cmd, SimKnobs& k) {
        cmd->add_option("--t-min", k.t_min, "fastest median cost");
        cmd->add_option("--t-max", k.t_max, "slowest median cost");
        cmd->add_option("--noise", k.noise, "lognormal noise level");
    };

    {
        CLI::App* cmd = app.add_subcommand("datagen", "generate a noisy benchmark dataset");
        add_config(cmd);
        cmd->add_option("--function", datagen.function, "branin|camelback|hartmann3|hartmann6");
        cmd->add_option("--seed", datagen.seed, "dataset seed");
        cmd->add_option("--censor", datagen.censor, "none|random|fixed");
        cmd->add_option("--percentile", datagen.percentile, "random censoring start percentile");
        cmd->add_option("--cutoff", datagen.cutoff, "fixed censoring cutoff");
        cmd->add_option("--censor-seed", datagen.censor_seed, "censoring seed");
        cmd->add_option("--out", datagen.out, "output JSONL path");
    }
    {
        CLI::App* cmd = app.add_subcommand("fit", "train an ensemble on a dataset");
        add_config(cmd);
        cmd->add_option("--data", fit.data, "input JSONL dataset");
        cmd->add_option("--loss", fit.loss, "gaussian|tobit");
        cmd->add_option("--seed", fit.seed, "base seed (member m uses seed+m)");
        cmd->add_option("--out", fit.out, "output model path");
        add_train(cmd, fit);
    }
    {
        CLI::App* cmd = app.add_subcommand("predict", "predict with a stored model");
        add_config(cmd);
        cmd->add_option("--model", predict.model, "model path");
        cmd->add_option("--data", predict.data, "JSONL rows to predict at");
        cmd->add_option("--out", predict.out, "output CSV (default stdout)");
    }
    {
        CLI::App* cmd =
            app.add_subcommand("table1", "cross-validated strategy comparison on benchmarks");
        add_config(cmd);
        cmd->add_option("--functions", table1.functions, "comma list of benchmark functions");
        cmd->add_option("--percentiles", table1.percentiles, "comma list of censoring levels");
        cmd->add_option("--strategies", table1.strategies, "comma list from I,D,SH,T");
        cmd->add_option("--seeds", table1.seeds, "number of benchmark draws");
        cmd->add_option("--seed", table1.seed, "base seed");
        cmd->add_option("--folds", table1.folds, "cross-validation folds");
        cmd->add_option("--sh-iterations", table1.sh_iterations, "imputation iterations");
        cmd->add_option("--out", table1.out, "output CSV path");
        cmd->add_flag("--assert", table1.assert_ordering,
                      "fail (exit 1) unless T < 0.7*I and T <= 1.25*SH per cell");
        add_train(cmd, table1);
    }
    {
        CLI::App* cmd =
            app.add_subcommand("shtrace", "held-out error of each imputation iteration");
        add_config(cmd);
        cmd->add_option("--function", shtrace.function, "benchmark function");
        cmd->add_option("--percentile", shtrace.percentile, "censoring level");
        cmd->add_option("--seed", shtrace.seed, "benchmark draw seed");
        cmd->add_option("--folds", shtrace.folds, "cross-validation folds");
        cmd->add_option("--iterations", shtrace.iterations, "imputation iterations");
        cmd->add_option("--out", shtrace.out, "output CSV path");
        add_train(cmd, shtrace);
    }
    {
        CLI::App* cmd = app.add_subcommand("optimize", "race configurations on a simulated target");
        add_config(cmd);
        cmd->add_option("--function", optimize.function, "benchmark function");
        cmd->add_option("--method", optimize.method, "nn|random|both");
        cmd->add_option("--iterations", optimize.iterations, "races after the cold start");
        cmd->add_option("--kappa-max", optimize.kappa_max, "hard cap per run");
        cmd->add_option("--cold-start", optimize.cold_start, "initial uniform configs");
        cmd->add_option("--max-runs", optimize.max_runs, "per-config run budget");
        cmd->add_option("--slack", optimize.slack, "adaptive capping multiplier");
        cmd->add_option("--pool", optimize.pool, "candidates per model proposal");
        cmd->add_option("--inner-epochs", optimize.inner_epochs, "proposal net epochs");
        cmd->add_option("--seeds", optimize.seeds, "independent repetitions");
        cmd->add_option("--seed", optimize.seed, "base seed");
        cmd->add_option("--validation-runs", optimize.validation_runs, "uncapped scoring runs");
        cmd->add_option("--jobs", optimize.jobs, "parallel repetitions");
        cmd->add_option("--out", optimize.out, "summary CSV path");
        cmd->add_option("--trajectory", optimize.trajectory,
                        "incumbent trace CSV (single seed and method)");
        cmd->add_option("--history", optimize.history,
                        "run history JSONL (single seed and method)");
        cmd->add_flag("--assert", optimize.assert_better,
                      "fail (exit 1) unless nn beats random (median and >= 62.5% of seeds)");
        add_sim(cmd, optimize);
    }
    {
        CLI::App* cmd = app.add_subcommand("validate", "score a configuration with uncapped runs");
        add_config(cmd);
        cmd->add_option("--function", validate.function, "benchmark function");
        cmd->add_option("--point", validate.point, "comma separated configuration");
        cmd->add_option("--history", validate.history, "run history JSONL; uses its incumbent");
        cmd->add_option("--runs", validate.runs, "number of uncapped runs");
        cmd->add_option("--seed", validate.seed, "validation seed");
        cmd->add_option("--out", validate.out, "output CSV (default stdout)");
        add_sim(cmd, validate);
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    if (app.got_subcommand("datagen")) return run_datagen(datagen);
    if (app.got_subcommand("fit")) return run_fit(fit);
    if (app.got_subcommand("predict")) return run_predict(predict);
    if (app.got_subcommand("table1")) return run_table1(table1);
    if (app.got_subcommand("shtrace")) return run_shtrace(shtrace);
    if (app.got_subcommand("optimize")) return run_optimize(optimize);
    if (app.got_subcommand("validate")) return run_validate(validate);
    die(2, "no subcommand");
}
