#pragma once

#include "zeroone/gsnewton.hpp"
#include "zeroone/problem.hpp"

#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace zeroone {

enum class GammaMode { experimental, theoretical };

struct ResolvedParameters;

struct SolverConfig {
    double rho = 1.0;
    double mu = 1e-2;
    double c1 = 0.1;
    double c2 = 0.1;
    /// k -> eps_k; defaults to 10 lambda alpha / (k + 1).
    std::function<double(int k, const ResolvedParameters&)> epsilon_schedule;
    std::optional<double> alpha;
    std::optional<double> t;
    StepPolicy step_policy = StepPolicy::blockwise;
    GammaMode gamma_mode = GammaMode::experimental;
    int max_outer = 1000;
    int max_inner = 2000;
    double outer_tol = 1e-3;
    /// Use gamma = lambda_min(A A^T)^{1/2} and raise rho to the level that
    /// guarantees Lyapunov descent.
    bool safe_mode = false;
    GsNewtonOptions inner;
};

struct ResolvedParameters {
    double lambda = 0.0;
    double gamma = 0.0;
    double c3 = 0.0;
    double c4 = 0.0;
    double rho = 0.0;
    double rho_min = 0.0;  ///< max{8 (c3^2 + c4^2) / mu, 4 ell_f / gamma^2}
    double beta = 0.0;     ///< 4 c4^2 / rho
    double mu = 0.0;
    double c1 = 0.0;
    double c2 = 0.0;
    double spectral_norm = 0.0;
    StepSizes steps;

    double alpha() const { return steps.alpha; }
};

ResolvedParameters derive_parameters(const CompositeProblem& problem, const SolverConfig& config);

double epsilon_k(const SolverConfig& config, const ResolvedParameters& params, int k);

struct IterateTriple {
    Vector x;
    Vector u;
    Vector y;
    IndexSet gamma;
};

/// f(x) + <y, Ax + b - u> + rho/2 |Ax + b - u|^2 + lambda h(u).
double augmented_lagrangian(const CompositeProblem& problem, const Vector& x, const Vector& u, const Vector& y,
                            double rho);

/// augmented_lagrangian + beta/2 |x - anchor|^2.
double lyapunov(const CompositeProblem& problem, const Vector& x, const Vector& u, const Vector& y,
                const Vector& anchor, double rho, double beta);

enum class PrimalOutcome { accepted, degenerate_accepted, candidate_enumerated, degenerate_failed };

struct PrimalStepResult {
    Vector x;
    Vector u;
    IndexSet gamma;
    ResidualTriple residuals;
    PrimalOutcome outcome = PrimalOutcome::accepted;
    InnerResult inner;
};

/// Inexact minimization of the k-th subproblem (p = y^k, q = x^k) until
/// r1 <= c1 |x - x^k|, r2 <= c2 |x - x^k|^2, r3 <= eps_k and the subproblem
/// objective has not increased.
PrimalStepResult primal_step(const std::shared_ptr<const CompositeProblem>& problem, const IterateTriple& state, int k,
                             const ResolvedParameters& params, const SolverConfig& config);

/// y + rho (A x + b - u).
Vector multiplier_step(const CompositeProblem& problem, const Vector& x, const Vector& u, const Vector& y, double rho);

/// (|dx| + |du| + |dy|) / (|x| + |u| + |y| + 1) < tol, norms of cur.
bool outer_stop(const IterateTriple& prev, const IterateTriple& cur, double tol);

struct TraceRecord {
    int k = 0;
    double lyapunov = 0.0;
    double auglag = 0.0;
    double foc = 0.0;
    double step_norm = 0.0;
    ResidualTriple residuals;
    int inner_iters = 0;
    int newton_steps = 0;
    Index active_size = 0;
    double wall_ms = 0.0;
};

enum class SolveStatus { converged, max_outer_reached, degenerate_fallback };

std::string to_string(SolveStatus status);

struct SolveResult {
    IterateTriple solution;
    std::vector<TraceRecord> trace;
    SolveStatus status = SolveStatus::max_outer_reached;
    double foc = 0.0;
    int outer_iterations = 0;
    ResolvedParameters params;
};

SolveResult solve(const std::shared_ptr<const CompositeProblem>& problem, const SolverConfig& config,
                  const std::optional<IterateTriple>& start = std::nullopt);

/// One JSON object per line with keys k, lyapunov, auglag, foc, step_norm,
/// r1, r2, r3, inner_iters, newton_steps, active_size, wall_ms.
void write_trace_jsonl(std::ostream& out, const std::vector<TraceRecord>& trace);

}  // namespace zeroone
