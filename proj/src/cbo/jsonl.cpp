#include "jsonl.hpp"

#include <bit>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "errors.hpp"

namespace cbo {

static_assert(std::endian::native == std::endian::little,
              "snapshot format assumes a little-endian host");

std::string format_double(double v) {
    if (!std::isfinite(v)) throw ArgumentError("format_double: non-finite value");
    if (v == 0.0) return "0";  // negative zero has no stable JSON round trip
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

namespace {

using nlohmann::json;

void write_row_core(std::ostream& os, std::span<const double> x, double y, bool censored,
                    double cutoff) {
    os << "{\"x\":[";
    for (std::size_t d = 0; d < x.size(); ++d) {
        if (d) os << ',';
        os << format_double(x[d]);
    }
    os << "],\"y\":" << format_double(y) << ",\"censored\":" << (censored ? "true" : "false")
       << ",\"cutoff\":";
    if (std::isinf(cutoff))
        os << "null";
    else
        os << format_double(cutoff);
}

bool blank(const std::string& line) {
    for (char c : line)
        if (!std::isspace(static_cast<unsigned char>(c))) return false;
    return true;
}

[[noreturn]] void fail(long long line, const std::string& what) {
    throw ParseError("line " + std::to_string(line) + ": " + what, line);
}

json parse_row(const std::string& line, long long lineno,
               std::initializer_list<const char*> keys) {
    json j;
    try {
        j = json::parse(line);
    } catch (const json::parse_error& e) {
        fail(lineno, e.what());
    }
    if (!j.is_object()) fail(lineno, "expected a JSON object");
    for (const auto& item : j.items()) {
        bool known = false;
        for (const char* k : keys) known |= item.key() == k;
        if (!known) fail(lineno, "unknown key '" + item.key() + "'");
    }
    for (const char* k : keys)
        if (!j.contains(k)) fail(lineno, std::string("missing key '") + k + "'");
    return j;
}

Observation row_to_observation(const json& j, long long lineno) {
    Observation o;
    if (!j["x"].is_array()) fail(lineno, "'x' must be an array");
    for (const auto& v : j["x"]) {
        if (!v.is_number()) fail(lineno, "'x' entries must be numbers");
        o.x.push_back(v.get<double>());
    }
    if (!j["y"].is_number()) fail(lineno, "'y' must be a number");
    o.y = j["y"].get<double>();
    if (!j["censored"].is_boolean()) fail(lineno, "'censored' must be a boolean");
    o.censored = j["censored"].get<bool>();
    if (j["cutoff"].is_null())
        o.cutoff = std::numeric_limits<double>::infinity();
    else if (j["cutoff"].is_number())
        o.cutoff = j["cutoff"].get<double>();
    else
        fail(lineno, "'cutoff' must be a number or null");
    try {
        validate_observation(o);
    } catch (const ArgumentError& e) {
        fail(lineno, e.what());
    }
    return o;
}

void check_dim(const Observation& o, std::size_t dim, long long lineno) {
    if (o.x.size() != dim)
        fail(lineno, "inconsistent input dimension (" + std::to_string(o.x.size()) + " vs " +
                         std::to_string(dim) + ")");
}

std::ofstream open_out(const std::string& path, std::ios::openmode mode = {}) {
    std::ofstream os(path, mode);
    if (!os) throw IoError("cannot open '" + path + "' for writing");
    return os;
}

std::ifstream open_in(const std::string& path, std::ios::openmode mode = {}) {
    std::ifstream is(path, mode);
    if (!is) throw IoError("cannot open '" + path + "' for reading");
    return is;
}

}  // namespace

void write_observations(std::ostream& os, std::span<const Observation> data) {
    for (const Observation& o : data) {
        write_row_core(os, o.x, o.y, o.censored, o.cutoff);
        os << "}\n";
    }
}

std::vector<Observation> read_observations(std::istream& is) {
    std::vector<Observation> out;
    std::string line;
    long long lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        if (blank(line)) continue;
        const json j = parse_row(line, lineno, {"x", "y", "censored", "cutoff"});
        Observation o = row_to_observation(j, lineno);
        if (!out.empty()) check_dim(o, out.front().x.size(), lineno);
        out.push_back(std::move(o));
    }
    if (out.empty()) throw ParseError("no data rows", 0);
    return out;
}

void save_observations(const std::string& path, std::span<const Observation> data) {
    auto os = open_out(path);
    write_observations(os, data);
    if (!os.good()) throw IoError("write failed for '" + path + "'");
}

std::vector<Observation> load_observations(const std::string& path) {
    auto is = open_in(path);
    return read_observations(is);
}

void write_run_history(std::ostream& os, std::span<const RunRecord> history) {
    for (const RunRecord& r : history) {
        write_row_core(os, r.x, r.cost, r.censored, r.cutoff);
        os << ",\"iteration\":" << r.iteration
           << ",\"incumbent\":" << (r.incumbent ? "true" : "false") << "}\n";
    }
}

std::vector<RunRecord> read_run_history(std::istream& is) {
    std::vector<RunRecord> out;
    std::string line;
    long long lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        if (blank(line)) continue;
        const json j =
            parse_row(line, lineno, {"x", "y", "censored", "cutoff", "iteration", "incumbent"});
        const Observation o = row_to_observation(j, lineno);
        if (!out.empty()) check_dim(o, out.front().x.size(), lineno);
        RunRecord r;
        r.x = o.x;
        r.cost = o.y;
        r.censored = o.censored;
        r.cutoff = o.cutoff;
        if (!j["iteration"].is_number_integer() || j["iteration"].get<long long>() < 0)
            fail(lineno, "'iteration' must be a non-negative integer");
        r.iteration = j["iteration"].get<int>();
        if (!j["incumbent"].is_boolean()) fail(lineno, "'incumbent' must be a boolean");
        r.incumbent = j["incumbent"].get<bool>();
        out.push_back(std::move(r));
    }
    if (out.empty()) throw ParseError("no data rows", 0);
    return out;
}

void save_run_history(const std::string& path, std::span<const RunRecord> history) {
    auto os = open_out(path);
    write_run_history(os, history);
    if (!os.good()) throw IoError("write failed for '" + path + "'");
}

std::vector<RunRecord> load_run_history(const std::string& path) {
    auto is = open_in(path);
    return read_run_history(is);
}

namespace {

const char* loss_tag(LossKind k) {
    return k == LossKind::tobit ? "tobit" : "gaussian";
}

LossKind loss_from_tag(const std::string& s) {
    if (s == "tobit") return LossKind::tobit;
    if (s == "gaussian") return LossKind::gaussian;
    throw ParseError("unknown loss '" + s + "'", 1);
}

}  // namespace

void save_ensemble(const std::string& path, const Ensemble& ens) {
    if (ens.members.empty()) throw ArgumentError("save_ensemble: empty ensemble");
    json header;
    header["format"] = "censorbo-ensemble";
    header["version"] = 1;
    header["input_dim"] = ens.input_dim();
    header["members"] = ens.size();
    header["loss"] = loss_tag(ens.loss);
    header["hidden"] = Mlp::kHidden;
    header["param_count"] = ens.members.front().param_count();
    std::vector<std::uint64_t> seeds;
    for (const Mlp& m : ens.members) seeds.push_back(m.seed);
    header["seeds"] = seeds;
    header["normalizer"] = {{"lo", ens.norm.lo},
                            {"hi", ens.norm.hi},
                            {"y_mean", ens.norm.y_mean},
                            {"y_std", ens.norm.y_std}};

    auto os = open_out(path, std::ios::binary);
    os << header.dump() << '\n';
    for (const Mlp& m : ens.members)
        os.write(reinterpret_cast<const char*>(m.params.data()),
                 static_cast<std::streamsize>(m.params.size() * sizeof(double)));
    if (!os.good()) throw IoError("write failed for '" + path + "'");
}

Ensemble load_ensemble(const std::string& path) {
    auto is = open_in(path, std::ios::binary);
    std::string line;
    if (!std::getline(is, line)) throw ParseError("missing snapshot header", 1);
    json header;
    try {
        header = json::parse(line);
    } catch (const json::parse_error& e) {
        throw ParseError(std::string("snapshot header: ") + e.what(), 1);
    }
    try {
        if (header.at("format").get<std::string>() != "censorbo-ensemble")
            throw ParseError("not an ensemble snapshot", 1);
        if (header.at("version").get<int>() != 1)
            throw ParseError("unsupported snapshot version", 1);
        const int dim = header.at("input_dim").get<int>();
        const int members = header.at("members").get<int>();
        if (dim < 1 || members < 1) throw ParseError("invalid snapshot dimensions", 1);
        if (header.at("hidden").get<int>() != Mlp::kHidden)
            throw ParseError("snapshot hidden width mismatch", 1);
        const auto seeds = header.at("seeds").get<std::vector<std::uint64_t>>();
        if (static_cast<int>(seeds.size()) != members)
            throw ParseError("snapshot seed count mismatch", 1);

        Ensemble ens;
        ens.loss = loss_from_tag(header.at("loss").get<std::string>());
        const json& nj = header.at("normalizer");
        ens.norm.lo = nj.at("lo").get<std::vector<double>>();
        ens.norm.hi = nj.at("hi").get<std::vector<double>>();
        ens.norm.y_mean = nj.at("y_mean").get<double>();
        ens.norm.y_std = nj.at("y_std").get<double>();
        if (ens.norm.lo.size() != static_cast<std::size_t>(dim) ||
            ens.norm.hi.size() != static_cast<std::size_t>(dim) || !(ens.norm.y_std > 0.0))
            throw ParseError("invalid snapshot normalizer", 1);

        const std::size_t param_count = header.at("param_count").get<std::size_t>();
        for (int m = 0; m < members; ++m) {
            Mlp net = init_mlp(dim, seeds[m]);
            if (net.param_count() != param_count)
                throw ParseError("snapshot parameter count mismatch", 1);
            is.read(reinterpret_cast<char*>(net.params.data()),
                    static_cast<std::streamsize>(param_count * sizeof(double)));
            if (is.gcount() != static_cast<std::streamsize>(param_count * sizeof(double)))
                throw IoError("snapshot truncated: '" + path + "'");
            ens.members.push_back(std::move(net));
        }
        if (is.peek() != std::ifstream::traits_type::eof())
            throw IoError("trailing bytes in snapshot: '" + path + "'");
        return ens;
    } catch (const json::exception& e) {
        throw ParseError(std::string("snapshot header: ") + e.what(), 1);
    }
}

}  // namespace cbo
