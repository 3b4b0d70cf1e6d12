#pragma once

#include "zeroone/alm.hpp"
#include "zeroone/types.hpp"

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

namespace zeroone {

/// Exit codes: 0 success, 1 configuration or usage error, 2 solver failure.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

using KeyValues = std::map<std::string, std::string>;

/// Flat "key=value" lines; blank lines and text after '#' are ignored.
/// Throws ParseError on a line without '='.
KeyValues parse_key_values(std::istream& in);

/// "m=1000,n=100,r=0.05,seed=7".
KeyValues parse_inline_spec(const std::string& spec);

/// Sweep over the synthetic two-class SVM generator: every (m, n, r) cell is
/// run once per seed with m_tr = m_te = m.
struct BenchSpec {
    std::vector<Index> m;
    std::vector<Index> n;
    std::vector<double> r{0.0};
    std::vector<std::uint64_t> seeds{0};
    double lambda = 1.0;
    double theta = 1.0;
    double rho = 1.0;
    double mu = 1e-2;
    bool safe_mode = false;
    int max_outer = 1000;
    double outer_tol = 1e-3;
};

/// Lists are comma-separated. Unknown keys throw Error.
BenchSpec parse_bench_spec(const KeyValues& kv);

struct BenchRow {
    Index m_tr = 0;
    Index m_te = 0;
    Index n = 0;
    double r = 0.0;
    std::uint64_t seed = 0;
    double acc = 0.0;
    Index n_sv = 0;
    double time_s = 0.0;
    double foc = 0.0;
    int outer_iters = 0;
};

/// Rows in cell-major, seed-minor order regardless of the worker count.
std::vector<BenchRow> run_bench(const BenchSpec& spec, int threads);

/// Header m_tr,m_te,n,r,seed,acc,n_sv,time_s,foc,outer_iters.
void write_bench_csv(std::ostream& out, const std::vector<BenchRow>& rows);

/// ZEROONE_THREADS when set to a positive integer, else the core count.
int default_thread_count();

/// Header k,lyapunov,foc,wall_ms,nsv; nsv is the active-set size.
void write_plot_csv(std::ostream& out, const std::vector<TraceRecord>& trace);

}  // namespace zeroone
