#include "zeroone/cli.hpp"

#include "zeroone/certify.hpp"
#include "zeroone/data.hpp"
#include "zeroone/models.hpp"
#include "zeroone/prox01.hpp"
#include "zeroone/rng.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>
#include <thread>

namespace zeroone {

namespace {

using nlohmann::ordered_json;

/// Bad flags, files or specs; maps to exit code 1.
class UsageError : public Error {
public:
    using Error::Error;
};

std::string trim(std::string_view s)
{
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split(const std::string& s, char sep)
{
    std::vector<std::string> out;
    std::string item;
    std::istringstream in(s);
    while (std::getline(in, item, sep)) out.push_back(trim(item));
    return out;
}

double to_double(const std::string& key, const std::string& text)
{
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc() || ptr != text.data() + text.size() || !std::isfinite(v)) {
        throw UsageError("'" + key + "': expected a number, got '" + text + "'");
    }
    return v;
}

long long to_integer(const std::string& key, const std::string& text)
{
    long long v = 0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc() || ptr != text.data() + text.size()) {
        throw UsageError("'" + key + "': expected an integer, got '" + text + "'");
    }
    return v;
}

bool to_bool(const std::string& key, const std::string& text)
{
    if (text == "1" || text == "true" || text == "yes" || text == "on") return true;
    if (text == "0" || text == "false" || text == "no" || text == "off") return false;
    throw UsageError("'" + key + "': expected a boolean, got '" + text + "'");
}

void require_keys(const KeyValues& kv, const std::set<std::string>& allowed, const std::string& what)
{
    for (const auto& [key, value] : kv) {
        if (!allowed.count(key)) throw UsageError(what + ": unknown key '" + key + "'");
    }
}

double get_double(const KeyValues& kv, const std::string& key, std::optional<double> fallback)
{
    const auto it = kv.find(key);
    if (it != kv.end()) return to_double(key, it->second);
    if (!fallback) throw UsageError("missing required key '" + key + "'");
    return *fallback;
}

Index get_index(const KeyValues& kv, const std::string& key, std::optional<Index> fallback)
{
    const auto it = kv.find(key);
    if (it != kv.end()) return static_cast<Index>(to_integer(key, it->second));
    if (!fallback) throw UsageError("missing required key '" + key + "'");
    return *fallback;
}

std::string format(const char* fmt, double v)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, fmt, v);
    return buf;
}

std::vector<double> to_std(const Vector& v)
{
    return std::vector<double>(v.begin(), v.end());
}

Vector to_vector(const ordered_json& j, const std::string& what)
{
    if (!j.is_array()) throw UsageError(what + ": expected an array");
    Vector v(static_cast<Index>(j.size()));
    for (std::size_t i = 0; i < j.size(); ++i) {
        if (!j[i].is_number()) throw UsageError(what + ": expected numbers");
        v[static_cast<Index>(i)] = j[i].get<double>();
    }
    return v;
}

Matrix to_matrix(const ordered_json& j, const std::string& what)
{
    if (!j.is_array() || j.empty()) throw UsageError(what + ": expected a non-empty array of rows");
    const Index rows = static_cast<Index>(j.size());
    const Index cols = static_cast<Index>(j[0].size());
    Matrix m(rows, cols);
    for (Index i = 0; i < rows; ++i) {
        const Vector row = to_vector(j[static_cast<std::size_t>(i)], what);
        if (row.size() != cols) throw UsageError(what + ": ragged rows");
        m.row(i) = row.transpose();
    }
    return m;
}

ordered_json read_json_file(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw UsageError("cannot open '" + path + "'");
    try {
        return ordered_json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw UsageError("'" + path + "': " + e.what());
    }
}

std::ofstream open_output(const std::string& path)
{
    std::ofstream out(path);
    if (!out) throw UsageError("cannot write '" + path + "'");
    out.precision(17);
    return out;
}

// ---------------------------------------------------------------------------
// Problem instances shared by solve, verify and gen.

struct ProblemFlags {
    std::optional<std::string> model;
    std::string data;
    std::string test;
    std::string gen;
    std::string normalize;
    std::optional<double> lambda;
    std::optional<double> theta;
};

struct SolverFlags {
    double rho = 1.0;
    double mu = 1e-2;
    bool safe_mode = false;
    int max_outer = 1000;
    double tol = 1e-3;
};

struct Instance {
    std::string model;
    std::shared_ptr<const CompositeProblem> problem;
    std::optional<SvmDataset> svm_train;
    std::optional<SvmDataset> svm_test;
    std::optional<MlcDataset> mlc_train;
    std::optional<MlcDataset> mlc_test;
    double lambda = 1.0;
    double theta = 1.0;
};

double default_theta(const std::string& model)
{
    return model == "mlc" ? 1e-3 : 1.0;
}

/// m_tr = m_te = m: 2m samples generated, halves split after the shuffle.
std::pair<SvmDataset, SvmDataset> generated_svm(const KeyValues& kv)
{
    require_keys(kv, {"m", "n", "r", "seed"}, "svm --gen");
    const Index m = get_index(kv, "m", std::nullopt);
    const Index n = get_index(kv, "n", std::nullopt);
    const double r = get_double(kv, "r", 0.0);
    const auto seed = static_cast<std::uint64_t>(get_index(kv, "seed", 0));
    if (m < 1) throw UsageError("svm --gen: m must be positive");
    SyntheticSvm g = gen_svm_synthetic(2 * m, n, r, seed);
    return {subset(g.data, index_range(0, m)), subset(g.data, index_range(m, 2 * m))};
}

/// 90/10 train/test split of m generated samples.
std::pair<MlcDataset, MlcDataset> generated_mlc(const KeyValues& kv)
{
    require_keys(kv, {"m", "n", "ell", "seed"}, "mlc --gen");
    const Index m = get_index(kv, "m", std::nullopt);
    const Index n = get_index(kv, "n", std::nullopt);
    const Index ell = get_index(kv, "ell", 3);
    const auto seed = static_cast<std::uint64_t>(get_index(kv, "seed", 0));
    if (m < 2) throw UsageError("mlc --gen: m must be at least 2");
    SyntheticMlc g = gen_mlc_synthetic(m, n, ell, seed);
    const Index m_tr = std::max<Index>(1, m * 9 / 10);
    return {subset(g.data, index_range(0, m_tr)), subset(g.data, index_range(m_tr, m))};
}

/// f = 1/2 x^T Q x + c^T x with Q = M^T M / n + I/2, entries of M, c, A, b
/// standard normal (A scaled by 1/sqrt(n)).
ordered_json random_quadratic_json(const KeyValues& kv)
{
    require_keys(kv, {"m", "n", "seed"}, "custom-quadratic --gen");
    const Index m = get_index(kv, "m", std::nullopt);
    const Index n = get_index(kv, "n", std::nullopt);
    const auto seed = static_cast<std::uint64_t>(get_index(kv, "seed", 0));
    if (m < 1 || n < 1) throw UsageError("custom-quadratic --gen: m and n must be positive");
    Philox4x32 rng(seed, 0);
    auto randn = [&](Index r, Index c) {
        Matrix out(r, c);
        for (Index i = 0; i < r; ++i)
            for (Index j = 0; j < c; ++j) out(i, j) = rng.normal();
        return out;
    };
    const Matrix mm = randn(n, n);
    const Matrix q = mm.transpose() * mm / static_cast<double>(n) + 0.5 * Matrix::Identity(n, n);
    const Matrix c = randn(n, 1);
    const Matrix a = randn(m, n) / std::sqrt(static_cast<double>(n));
    const Matrix b = randn(m, 1);
    ordered_json j;
    auto rows = [](const Matrix& x) {
        std::vector<std::vector<double>> out;
        for (Index i = 0; i < x.rows(); ++i) out.push_back(to_std(x.row(i).transpose()));
        return out;
    };
    j["Q"] = rows(q);
    j["c"] = to_std(c.col(0));
    j["A"] = rows(a);
    j["b"] = to_std(b.col(0));
    return j;
}

std::shared_ptr<const CompositeProblem> quadratic_from_json(const ordered_json& j, double lambda)
{
    for (const char* key : {"Q", "c", "A", "b"}) {
        if (!j.contains(key)) throw UsageError(std::string("custom-quadratic: missing '") + key + "'");
    }
    auto f = std::make_shared<QuadraticObjective>(to_matrix(j["Q"], "Q"), to_vector(j["c"], "c"));
    auto a = std::make_shared<LinearMap>(LinearMap::dense(to_matrix(j["A"], "A")));
    return std::make_shared<CompositeProblem>(std::move(f), std::move(a), to_vector(j["b"], "b"), lambda);
}

Instance build_instance(const ProblemFlags& flags)
{
    Instance inst;
    inst.model = flags.model.value_or("svm");
    if (inst.model != "svm" && inst.model != "mlc" && inst.model != "custom-quadratic") {
        throw UsageError("--model must be svm, mlc or custom-quadratic");
    }
    if (flags.data.empty() == flags.gen.empty()) throw UsageError("exactly one of --data and --gen is required");
    inst.lambda = flags.lambda.value_or(1.0);
    inst.theta = flags.theta.value_or(default_theta(inst.model));
    if (!(inst.lambda > 0.0)) throw UsageError("--lambda must be positive");
    if (!(inst.theta > 0.0)) throw UsageError("--theta must be positive");
    const bool rescale = !flags.normalize.empty();
    const NormalizeMode mode = rescale ? parse_normalize_mode(flags.normalize) : NormalizeMode::unit_row;

    if (inst.model == "custom-quadratic") {
        const ordered_json j = flags.gen.empty() ? read_json_file(flags.data)
                                                 : random_quadratic_json(parse_inline_spec(flags.gen));
        inst.problem = quadratic_from_json(j, inst.lambda);
        return inst;
    }

    const bool multilabel = inst.model == "mlc";
    std::optional<RawDataset> raw_train;
    std::optional<RawDataset> raw_test;
    if (!flags.data.empty()) {
        raw_train = read_libsvm_file(flags.data, std::nullopt, multilabel);
        if (!flags.test.empty()) {
            raw_test = read_libsvm_file(flags.test, std::nullopt, multilabel);
            const Index n = std::max(raw_train->n, raw_test->n);
            raw_train->n = raw_test->n = n;
        }
    }

    if (inst.model == "svm") {
        if (raw_train) {
            inst.svm_train = to_svm_dataset(*raw_train);
            if (raw_test) inst.svm_test = to_svm_dataset(*raw_test);
        } else {
            auto [tr, te] = generated_svm(parse_inline_spec(flags.gen));
            inst.svm_train = std::move(tr);
            inst.svm_test = std::move(te);
        }
        if (rescale) {
            inst.svm_train = normalize(*inst.svm_train, mode);
            if (inst.svm_test) inst.svm_test = normalize(*inst.svm_test, mode);
        }
        inst.problem = build_svm(*inst.svm_train, inst.theta, inst.lambda);
        return inst;
    }

    if (raw_train) {
        Index ell = 1;
        for (const RawDataset* raw : {&*raw_train, raw_test ? &*raw_test : nullptr}) {
            if (!raw) continue;
            for (const RawRow& row : raw->rows)
                for (double l : row.labels) ell = std::max(ell, static_cast<Index>(l) + 1);
        }
        inst.mlc_train = to_mlc_dataset(*raw_train, ell);
        if (raw_test) inst.mlc_test = to_mlc_dataset(*raw_test, ell);
    } else {
        auto [tr, te] = generated_mlc(parse_inline_spec(flags.gen));
        inst.mlc_train = std::move(tr);
        inst.mlc_test = std::move(te);
    }
    if (rescale) {
        inst.mlc_train = normalize(*inst.mlc_train, mode);
        if (inst.mlc_test) inst.mlc_test = normalize(*inst.mlc_test, mode);
    }
    inst.problem = build_mlc(*inst.mlc_train, inst.theta,
                             mlc_default_weights(inst.mlc_train->n(), inst.mlc_train->ell()), inst.lambda);
    return inst;
}

SolverConfig solver_config(const SolverFlags& flags)
{
    if (!(flags.rho > 0.0)) throw UsageError("--rho must be positive");
    if (!(flags.mu > 0.0)) throw UsageError("--mu must be positive");
    if (flags.max_outer < 1) throw UsageError("--max-outer must be positive");
    if (!(flags.tol > 0.0)) throw UsageError("--tol must be positive");
    SolverConfig cfg;
    cfg.rho = flags.rho;
    cfg.mu = flags.mu;
    cfg.safe_mode = flags.safe_mode;
    cfg.max_outer = flags.max_outer;
    cfg.outer_tol = flags.tol;
    return cfg;
}

void add_problem_flags(CLI::App* app, ProblemFlags& p)
{
    app->add_option("--model", p.model, "svm, mlc or custom-quadratic (default svm)")
        ->check(CLI::IsMember({"svm", "mlc", "custom-quadratic"}));
    app->add_option("--data", p.data, "training data: libsvm file, or JSON {Q, c, A, b} for custom-quadratic");
    app->add_option("--test", p.test, "test data in libsvm format");
    app->add_option("--gen", p.gen,
                    "synthetic instance: svm m=,n=,r=,seed= (m train + m test); mlc m=,n=,ell=,seed= (90/10 split);"
                    " custom-quadratic m=,n=,seed=");
    app->add_option("--normalize", p.normalize, "sample-then-feature, scale-to-range or unit-row");
    app->add_option("--lambda", p.lambda, "0/1-loss weight (default 1)");
    app->add_option("--theta", p.theta, "svm bias weight (default 1) or mlc smoothing theta0 (default 1e-3)");
}

void add_solver_flags(CLI::App* app, SolverFlags& s)
{
    app->add_option("--rho", s.rho, "penalty parameter")->capture_default_str();
    app->add_option("--mu", s.mu, "proximal weight")->capture_default_str();
    app->add_flag("--safe-mode", s.safe_mode, "theoretical gamma and rho >= rho_min");
    app->add_option("--max-outer", s.max_outer, "outer iteration cap")->capture_default_str();
    app->add_option("--tol", s.tol, "outer stopping tolerance")->capture_default_str();
}

// ---------------------------------------------------------------------------
// Commands

struct SolveFlags {
    ProblemFlags problem;
    SolverFlags solver;
    std::string out;
    std::string trace;
    std::string plot;
};

int cmd_solve(const SolveFlags& f, std::ostream& out, std::ostream& err)
{
    Instance inst;
    SolverConfig cfg;
    try {
        inst = build_instance(f.problem);
        cfg = solver_config(f.solver);
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    }

    SolveResult res;
    const auto t0 = std::chrono::steady_clock::now();
    try {
        res = solve(inst.problem, cfg);
    } catch (const Error& e) {
        err << "solver error: " << e.what() << '\n';
        return 2;
    }
    const double wall_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const IterateTriple& s = res.solution;

    ordered_json metrics;
    std::string summary = to_string(res.status);
    if (inst.svm_train) {
        const bool on_test = inst.svm_test && inst.svm_test->m() > 0;
        const SvmMetrics met = svm_metrics(on_test ? *inst.svm_test : *inst.svm_train, s.x, s.u);
        metrics["acc"] = met.acc;
        metrics["acc_on"] = on_test ? "test" : "train";
        metrics["acc_train"] = svm_accuracy(*inst.svm_train, s.x);
        metrics["n_sv"] = met.n_sv;
        summary += " acc=" + format("%.4f", met.acc) + (on_test ? "" : "(train)") + " nsv=" + std::to_string(met.n_sv);
    } else if (inst.mlc_train) {
        const bool on_test = inst.mlc_test && inst.mlc_test->m() > 0;
        const MlcMetrics met = mlc_metrics(on_test ? *inst.mlc_test : *inst.mlc_train, s.x);
        metrics["hl"] = met.hl;
        metrics["rl"] = met.rl;
        metrics["ap"] = met.ap;
        metrics["skipped"] = met.skipped;
        metrics["on"] = on_test ? "test" : "train";
        summary += " hl=" + format("%.4f", met.hl) + " rl=" + format("%.4f", met.rl) + " ap=" + format("%.4f", met.ap) +
                   (on_test ? "" : "(train)");
    } else {
        const double objective = inst.problem->composite_value(s.x);
        const Index positives = h_eval(inst.problem->affine(s.x));
        metrics["objective"] = objective;
        metrics["positives"] = positives;
        summary += " objective=" + format("%.6g", objective) + " positives=" + std::to_string(positives);
    }
    summary += " foc=" + format("%.3e", res.foc) + " iters=" + std::to_string(res.outer_iterations) +
               " time=" + format("%.3f", wall_s) + "s";

    try {
        if (!f.out.empty()) {
            ordered_json j;
            j["model"] = inst.model;
            j["status"] = to_string(res.status);
            j["lambda"] = inst.lambda;
            j["theta"] = inst.theta;
            j["rho"] = res.params.rho;
            j["mu"] = res.params.mu;
            j["alpha"] = res.params.alpha();
            j["outer_iterations"] = res.outer_iterations;
            j["foc"] = res.foc;
            j["wall_s"] = wall_s;
            j["metrics"] = metrics;
            j["x"] = to_std(s.x);
            j["u"] = to_std(s.u);
            j["y"] = to_std(s.y);
            open_output(f.out) << j.dump() << '\n';
        }
        if (!f.trace.empty()) {
            std::ofstream trace = open_output(f.trace);
            write_trace_jsonl(trace, res.trace);
        }
        if (!f.plot.empty()) {
            std::ofstream plot = open_output(f.plot);
            write_plot_csv(plot, res.trace);
        }
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    }
    out << summary << '\n';
    return 0;
}

struct BenchFlags {
    std::string spec;
    std::string out;
    int threads = 0;
};

int cmd_bench(const BenchFlags& f, std::ostream& out, std::ostream& err)
{
    BenchSpec spec;
    try {
        std::ifstream in(f.spec);
        if (!in) throw UsageError("cannot open '" + f.spec + "'");
        spec = parse_bench_spec(parse_key_values(in));
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    }
    std::vector<BenchRow> rows;
    try {
        rows = run_bench(spec, f.threads > 0 ? f.threads : default_thread_count());
    } catch (const UsageError& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    } catch (const Error& e) {
        err << "solver error: " << e.what() << '\n';
        return 2;
    }
    try {
        if (f.out.empty()) {
            write_bench_csv(out, rows);
        } else {
            std::ofstream csv = open_output(f.out);
            write_bench_csv(csv, rows);
        }
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}

struct GenFlags {
    std::string model = "svm";
    std::string gen;
    std::string out;
};

int cmd_gen(const GenFlags& f, std::ostream& out, std::ostream& err)
{
    try {
        const KeyValues kv = parse_inline_spec(f.gen);
        std::vector<std::string> written;
        if (f.model == "custom-quadratic") {
            const std::string path = f.out + ".json";
            open_output(path) << random_quadratic_json(kv).dump() << '\n';
            written.push_back(path);
        } else {
            RawDataset train;
            RawDataset test;
            if (f.model == "svm") {
                auto [tr, te] = generated_svm(kv);
                train = to_raw(tr);
                test = to_raw(te);
            } else {
                auto [tr, te] = generated_mlc(kv);
                train = to_raw(tr);
                test = to_raw(te);
            }
            for (const auto& [suffix, raw] : {std::pair{".train.libsvm", &train}, std::pair{".test.libsvm", &test}}) {
                const std::string path = f.out + suffix;
                std::ofstream file = open_output(path);
                write_libsvm(file, *raw);
                written.push_back(path);
            }
        }
        for (const std::string& path : written) out << "wrote " << path << '\n';
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}

struct VerifyFlags {
    ProblemFlags problem;
    std::string solution;
    std::optional<double> alpha;
    double tol = 1e-6;
    int samples = 512;
};

int cmd_verify(VerifyFlags f, std::ostream& out, std::ostream& err)
{
    Instance inst;
    Vector x;
    Vector u;
    Vector y;
    double alpha = 0.0;
    try {
        const ordered_json sol = read_json_file(f.solution);
        for (const char* key : {"x", "u", "y"}) {
            if (!sol.contains(key)) throw UsageError(std::string("solution: missing '") + key + "'");
        }
        x = to_vector(sol["x"], "x");
        u = to_vector(sol["u"], "u");
        y = to_vector(sol["y"], "y");
        // Flags and config override what the solution recorded.
        if (!f.problem.model && sol.contains("model")) f.problem.model = sol["model"].get<std::string>();
        if (!f.problem.lambda && sol.contains("lambda")) f.problem.lambda = sol["lambda"].get<double>();
        if (!f.problem.theta && sol.contains("theta")) f.problem.theta = sol["theta"].get<double>();
        if (!f.alpha && sol.contains("alpha")) f.alpha = sol["alpha"].get<double>();
        if (!f.alpha) throw UsageError("no alpha: pass --alpha or include it in the solution");
        alpha = *f.alpha;
        if (!(alpha > 0.0)) throw UsageError("alpha must be positive");
        inst = build_instance(f.problem);
        if (x.size() != inst.problem->n() || u.size() != inst.problem->m() || y.size() != inst.problem->m()) {
            throw UsageError("solution dimensions do not match the problem");
        }
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    } catch (const nlohmann::json::exception& e) {
        err << "error: solution: " << e.what() << '\n';
        return 1;
    }

    const CompositeProblem& prob = *inst.problem;
    const PStationarity ps = check_p_stationary(prob, x, u, y, alpha, f.tol);
    out << "p-stationarity: " << (ps.stationary ? "yes" : "no") << " violation=" << format("%.3e", ps.max_violation)
        << " (stationarity=" << format("%.3e", ps.stationarity) << " prox=" << format("%.3e", ps.prox_gap)
        << " feasibility=" << format("%.3e", ps.feasibility) << ") alpha=" << format("%.6g", alpha)
        << " tol=" << format("%.1e", f.tol) << '\n';

    const AlphaStar as = alpha_star(u, y, prob.lambda);
    std::string kkt = "yes";
    try {
        kkt_to_alpha_interval(prob, x, u, y, f.tol);
    } catch (const DomainError& e) {
        kkt = std::string("no: ") + e.what();
    }
    out << "alpha*: " << format("%.6g", as.alpha) << " (alpha_u=" << format("%.6g", as.alpha_u)
        << " alpha_y=" << format("%.6g", as.alpha_y) << ") kkt: " << kkt << '\n';

    const ActiveClassification cls = classify_active(u, y);
    out << "classification: I-=" << cls.i_minus.size() << " I0=" << cls.i_zero.size() << " I+=" << cls.i_plus.size()
        << " violating=" << cls.violating.size() << " tol=" << format("%.3e", cls.tolerance) << '\n';

    try {
        ConeOptions opts;
        opts.samples = f.samples;
        out << "sosc: " << to_json(sosc_verdict(prob, x, u, y, opts)) << '\n';
    } catch (const DomainError& e) {
        out << "sosc: skipped (" << e.what() << ")\n";
    }
    return 0;
}

/// Replaces "--config <path>" by "--key value" pairs for every key not
/// already given on the command line, so flags beat the file and the file
/// beats defaults. Keys may use '_' for '-'; boolean flags take true/false.
void expand_config(std::vector<std::string>& args)
{
    std::string path;
    for (std::size_t i = 0; i < args.size(); ++i) {
        if (args[i] == "--config" && i + 1 < args.size()) {
            path = args[i + 1];
            args.erase(args.begin() + static_cast<std::ptrdiff_t>(i), args.begin() + static_cast<std::ptrdiff_t>(i) + 2);
            break;
        }
        if (args[i].rfind("--config=", 0) == 0) {
            path = args[i].substr(9);
            args.erase(args.begin() + static_cast<std::ptrdiff_t>(i));
            break;
        }
    }
    if (path.empty()) return;
    std::ifstream in(path);
    if (!in) throw UsageError("cannot open '" + path + "'");
    const KeyValues kv = parse_key_values(in);

    const std::set<std::string> boolean_flags{"--safe-mode"};
    std::vector<std::string> extra;
    for (const auto& [raw_key, raw_value] : kv) {
        std::string key = raw_key;
        std::string value = raw_value;
        std::replace(key.begin(), key.end(), '_', '-');
        const std::string flag = "--" + key;
        const bool given = std::any_of(args.begin(), args.end(), [&](const std::string& a) {
            return a == flag || a.rfind(flag + "=", 0) == 0;
        });
        if (given) continue;
        if (value.size() >= 2 && value.front() == '"' && value.back() == '"') value = value.substr(1, value.size() - 2);
        if (boolean_flags.count(flag)) {
            if (to_bool(key, value)) extra.push_back(flag);
            continue;
        }
        extra.push_back(flag);
        extra.push_back(value);
    }
    args.insert(args.end(), extra.begin(), extra.end());
}

}  // namespace

KeyValues parse_key_values(std::istream& in)
{
    KeyValues kv;
    std::string line;
    std::size_t number = 0;
    while (std::getline(in, line)) {
        ++number;
        const std::string body = trim(line.substr(0, line.find('#')));
        if (body.empty()) continue;
        const auto eq = body.find('=');
        if (eq == std::string::npos) throw ParseError("expected key=value", number, 1);
        const std::string key = trim(body.substr(0, eq));
        if (key.empty()) throw ParseError("empty key", number, 1);
        kv[key] = trim(body.substr(eq + 1));
    }
    return kv;
}

KeyValues parse_inline_spec(const std::string& spec)
{
    KeyValues kv;
    for (const std::string& item : split(spec, ',')) {
        if (item.empty()) continue;
        const auto eq = item.find('=');
        if (eq == std::string::npos || eq == 0) throw UsageError("spec item '" + item + "' is not key=value");
        kv[trim(item.substr(0, eq))] = trim(item.substr(eq + 1));
    }
    return kv;
}

BenchSpec parse_bench_spec(const KeyValues& kv)
{
    require_keys(kv, {"m", "n", "r", "seeds", "lambda", "theta", "rho", "mu", "safe_mode", "max_outer", "outer_tol"},
                 "bench spec");
    BenchSpec spec;
    auto list = [&](const std::string& key) {
        const auto it = kv.find(key);
        return it == kv.end() ? std::vector<std::string>{} : split(it->second, ',');
    };
    for (const auto& s : list("m")) spec.m.push_back(static_cast<Index>(to_integer("m", s)));
    for (const auto& s : list("n")) spec.n.push_back(static_cast<Index>(to_integer("n", s)));
    if (kv.count("r")) {
        spec.r.clear();
        for (const auto& s : list("r")) spec.r.push_back(to_double("r", s));
    }
    if (kv.count("seeds")) {
        spec.seeds.clear();
        for (const auto& s : list("seeds")) spec.seeds.push_back(static_cast<std::uint64_t>(to_integer("seeds", s)));
    }
    if (spec.m.empty() || spec.n.empty() || spec.r.empty() || spec.seeds.empty()) {
        throw UsageError("bench spec: m, n, r and seeds need at least one value");
    }
    spec.lambda = get_double(kv, "lambda", spec.lambda);
    spec.theta = get_double(kv, "theta", spec.theta);
    spec.rho = get_double(kv, "rho", spec.rho);
    spec.mu = get_double(kv, "mu", spec.mu);
    if (kv.count("safe_mode")) spec.safe_mode = to_bool("safe_mode", kv.at("safe_mode"));
    spec.max_outer = static_cast<int>(get_index(kv, "max_outer", spec.max_outer));
    spec.outer_tol = get_double(kv, "outer_tol", spec.outer_tol);
    return spec;
}

std::vector<BenchRow> run_bench(const BenchSpec& spec, int threads)
{
    struct Task {
        Index m;
        Index n;
        double r;
        std::uint64_t seed;
    };
    std::vector<Task> tasks;
    for (Index m : spec.m)
        for (Index n : spec.n)
            for (double r : spec.r)
                for (std::uint64_t seed : spec.seeds) tasks.push_back({m, n, r, seed});

    SolverFlags sf;
    sf.rho = spec.rho;
    sf.mu = spec.mu;
    sf.safe_mode = spec.safe_mode;
    sf.max_outer = spec.max_outer;
    sf.tol = spec.outer_tol;
    const SolverConfig cfg = solver_config(sf);

    std::vector<BenchRow> rows(tasks.size());
    std::vector<std::exception_ptr> errors(tasks.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < tasks.size(); i = next++) {
            const Task& t = tasks[i];
            try {
                SyntheticSvm g = gen_svm_synthetic(2 * t.m, t.n, t.r, t.seed);
                const SvmDataset train = subset(g.data, index_range(0, t.m));
                const SvmDataset test = subset(g.data, index_range(t.m, 2 * t.m));
                const auto t0 = std::chrono::steady_clock::now();
                const SolveResult res = solve(build_svm(train, spec.theta, spec.lambda), cfg);
                BenchRow& row = rows[i];
                row.time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
                const SvmMetrics met = svm_metrics(test, res.solution.x, res.solution.u);
                row.m_tr = t.m;
                row.m_te = t.m;
                row.n = t.n;
                row.r = t.r;
                row.seed = t.seed;
                row.acc = met.acc;
                row.n_sv = met.n_sv;
                row.foc = res.foc;
                row.outer_iters = res.outer_iterations;
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    const int pool = std::max(1, std::min<int>(threads, static_cast<int>(tasks.size())));
    std::vector<std::thread> workers;
    for (int w = 1; w < pool; ++w) workers.emplace_back(worker);
    worker();
    for (std::thread& t : workers) t.join();
    for (const std::exception_ptr& e : errors) {
        if (e) std::rethrow_exception(e);
    }
    return rows;
}

void write_bench_csv(std::ostream& out, const std::vector<BenchRow>& rows)
{
    out << "m_tr,m_te,n,r,seed,acc,n_sv,time_s,foc,outer_iters\n";
    for (const BenchRow& r : rows) {
        out << r.m_tr << ',' << r.m_te << ',' << r.n << ',' << format("%.6g", r.r) << ',' << r.seed << ','
            << format("%.6f", r.acc) << ',' << r.n_sv << ',' << format("%.6f", r.time_s) << ','
            << format("%.10e", r.foc) << ',' << r.outer_iters << '\n';
    }
}

int default_thread_count()
{
    if (const char* env = std::getenv("ZEROONE_THREADS")) {
        const int v = std::atoi(env);
        if (v > 0) return v;
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

void write_plot_csv(std::ostream& out, const std::vector<TraceRecord>& trace)
{
    out << "k,lyapunov,foc,wall_ms,nsv\n";
    for (const TraceRecord& r : trace) {
        out << r.k << ',' << format("%.17g", r.lyapunov) << ',' << format("%.17g", r.foc) << ','
            << format("%.3f", r.wall_ms) << ',' << r.active_size << '\n';
    }
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err)
{
    std::vector<std::string> args(argv + 1, argv + argc);
    try {
        expand_config(args);
    } catch (const Error& e) {
        err << "error: config: " << e.what() << '\n';
        return 1;
    }
    std::reverse(args.begin(), args.end());  // CLI11 consumes from the back

    std::string config_path;  // consumed by expand_config
    CLI::App app{"Zero-one composite optimization: solve, benchmark, generate and verify"};
    app.name("zeroone");
    app.require_subcommand(1);

    SolveFlags solve_flags;
    CLI::App* solve_cmd = app.add_subcommand("solve", "solve one instance");
    add_problem_flags(solve_cmd, solve_flags.problem);
    add_solver_flags(solve_cmd, solve_flags.solver);
    solve_cmd->add_option("--out", solve_flags.out, "solution and metrics JSON");
    solve_cmd->add_option("--trace", solve_flags.trace, "per-iteration JSONL trace");
    solve_cmd->add_option("--plot", solve_flags.plot, "plot CSV: k,lyapunov,foc,wall_ms,nsv");
    solve_cmd->add_option("--config", config_path, "flat key=value file; flags take precedence");

    BenchFlags bench_flags;
    CLI::App* bench_cmd = app.add_subcommand("bench", "run a synthetic SVM sweep");
    bench_cmd->add_option("--spec", bench_flags.spec, "key=value sweep spec: m, n, r, seeds (lists) and solver params")
        ->required();
    bench_cmd->add_option("--out", bench_flags.out, "CSV path (default stdout)");
    bench_cmd->add_option("--threads", bench_flags.threads, "worker count (default ZEROONE_THREADS or core count)");
    bench_cmd->add_option("--config", config_path, "flat key=value file; flags take precedence");

    GenFlags gen_flags;
    CLI::App* gen_cmd = app.add_subcommand("gen", "write a synthetic instance");
    gen_cmd->add_option("--model", gen_flags.model, "svm, mlc or custom-quadratic")
        ->check(CLI::IsMember({"svm", "mlc", "custom-quadratic"}))
        ->capture_default_str();
    gen_cmd->add_option("--gen", gen_flags.gen, "generator spec, as for solve")->required();
    gen_cmd->add_option("--out", gen_flags.out, "output prefix: <prefix>.train.libsvm/.test.libsvm or <prefix>.json")
        ->required();
    gen_cmd->add_option("--config", config_path, "flat key=value file; flags take precedence");

    VerifyFlags verify_flags;
    CLI::App* verify_cmd = app.add_subcommand("verify", "certify a solution");
    add_problem_flags(verify_cmd, verify_flags.problem);
    verify_cmd->add_option("--solution", verify_flags.solution, "solution JSON written by solve --out")->required();
    verify_cmd->add_option("--alpha", verify_flags.alpha, "step size for the prox condition (default: from solution)");
    verify_cmd->add_option("--tol", verify_flags.tol, "P-stationarity tolerance")->capture_default_str();
    verify_cmd->add_option("--samples", verify_flags.samples, "cone samples for the SOSC check")->capture_default_str();
    verify_cmd->add_option("--config", config_path, "flat key=value file; flags take precedence");

    try {
        app.parse(args);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? 0 : 1;
    }

    if (solve_cmd->parsed()) {
        if (solve_flags.problem.data.empty() && solve_flags.problem.gen.empty()) {
            err << "error: one of --data or --gen is required\n" << solve_cmd->help();
            return 1;
        }
        return cmd_solve(solve_flags, out, err);
    }
    if (bench_cmd->parsed()) return cmd_bench(bench_flags, out, err);
    if (gen_cmd->parsed()) return cmd_gen(gen_flags, out, err);
    return cmd_verify(verify_flags, out, err);
}

}  // namespace zeroone
