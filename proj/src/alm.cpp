#include "zeroone/alm.hpp"

#include <json.hpp>

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ostream>

namespace zeroone {

namespace {

double experimental_gamma(const LinearMap& a)
{
    // Zero rows carry no information about A^T y; skip them.
    const Vector norms = a.row_squared_norms();
    double smallest = kInf;
    for (Index i = 0; i < norms.size(); ++i) {
        if (norms[i] > 0.0) smallest = std::min(smallest, norms[i]);
    }
    if (!std::isfinite(smallest)) throw DomainError("derive_parameters: A has no nonzero row");
    return 0.1 * smallest;
}

double theoretical_gamma(const LinearMap& a)
{
    if (a.rows() > a.cols()) {
        throw DomainError("derive_parameters: A must have full row rank (m = " + std::to_string(a.rows()) +
                          " exceeds n = " + std::to_string(a.cols()) + ")");
    }
    if (a.rows() > 4000) throw DomainError("derive_parameters: theoretical gamma needs m <= 4000");
    const Matrix ad = a.to_dense();
    const Matrix gram = ad * ad.transpose();
    const Vector eig = Eigen::SelfAdjointEigenSolver<Matrix>(gram, Eigen::EigenvaluesOnly).eigenvalues();
    const double lo = eig.minCoeff();
    const double hi = eig.maxCoeff();
    if (!(hi > 0.0) || lo <= 1e-12 * hi) throw DomainError("derive_parameters: A must have full row rank");
    return std::sqrt(lo);
}

}  // namespace

ResolvedParameters derive_parameters(const CompositeProblem& problem, const SolverConfig& config)
{
    const SmoothObjective& f = *problem.objective;
    if (!(config.mu > f.sigma_f())) throw DomainError("subproblem not strongly convex: mu must exceed sigma_f");
    if (!(config.rho > 0.0) || !(config.c1 > 0.0) || !(config.c2 > 0.0)) {
        throw DomainError("derive_parameters: rho, c1 and c2 must be positive");
    }
    if (!(config.outer_tol > 0.0) || config.max_outer < 1 || config.max_inner < 1) {
        throw DomainError("derive_parameters: invalid tolerance or iteration cap");
    }

    ResolvedParameters p;
    p.lambda = problem.lambda;
    p.mu = config.mu;
    p.c1 = config.c1;
    p.c2 = config.c2;
    const bool theoretical = config.safe_mode || config.gamma_mode == GammaMode::theoretical;
    p.gamma = theoretical ? theoretical_gamma(*problem.a_map) : experimental_gamma(*problem.a_map);
    p.c3 = (p.mu + f.ell_f() + p.c1) / p.gamma;
    p.c4 = (p.mu + p.c1) / p.gamma;
    p.rho_min = std::max(8.0 * (p.c3 * p.c3 + p.c4 * p.c4) / p.mu, 4.0 * f.ell_f() / (p.gamma * p.gamma));
    p.rho = config.rho;
    if (config.safe_mode && p.rho <= p.rho_min) p.rho = 1.01 * p.rho_min;
    p.beta = 4.0 * p.c4 * p.c4 / p.rho;

    p.spectral_norm = spectral_norm_estimate(*problem.a_map);
    // Step sizes depend only on (f, A, rho, mu), not on the anchors.
    auto shared = std::make_shared<const CompositeProblem>(problem);
    const Subproblem probe(shared, Vector::Zero(problem.m()), Vector::Zero(problem.n()), p.rho, p.mu);
    const std::optional<double> alpha = config.alpha ? config.alpha : config.inner.alpha;
    const std::optional<double> t = config.t ? config.t : config.inner.t;
    p.steps = resolve_step_sizes(probe, config.step_policy, alpha, t, p.spectral_norm);
    return p;
}

double epsilon_k(const SolverConfig& config, const ResolvedParameters& params, int k)
{
    if (config.epsilon_schedule) {
        const double eps = config.epsilon_schedule(k, params);
        if (!(eps > 0.0)) throw DomainError("epsilon schedule must be positive");
        return eps;
    }
    // k + 1 keeps the first subproblem (k = 0) finite.
    return 10.0 * params.lambda * params.alpha() / static_cast<double>(k + 1);
}

double augmented_lagrangian(const CompositeProblem& problem, const Vector& x, const Vector& u, const Vector& y,
                            double rho)
{
    require_same_size(u.size(), problem.m(), "augmented_lagrangian u");
    require_same_size(y.size(), problem.m(), "augmented_lagrangian y");
    const Vector r = problem.affine(x) - u;
    return problem.objective->value(x) + y.dot(r) + 0.5 * rho * r.squaredNorm() +
           problem.lambda * static_cast<double>(h_eval(u));
}

double lyapunov(const CompositeProblem& problem, const Vector& x, const Vector& u, const Vector& y,
                const Vector& anchor, double rho, double beta)
{
    if (!(beta >= 0.0)) throw DomainError("lyapunov: beta must be nonnegative");
    require_same_size(x.size(), anchor.size(), "lyapunov anchor");
    return augmented_lagrangian(problem, x, u, y, rho) + 0.5 * beta * (x - anchor).squaredNorm();
}

namespace {

/// Candidate enumeration for the case x^k = x_hat^{k+1}: every admissible u
/// keeps x = x^k, and the u-coordinates are fixed except those whose shifted
/// value lies in the two-valued band.
bool enumerate_candidates(const GsNewton& solver, const Subproblem& sub, const IterateTriple& state, double G0,
                          PrimalStepResult& out)
{
    const CompositeProblem& prob = *sub.base;
    const Index m = prob.m();
    if (m > 64) return false;
    const double alpha = solver.steps().alpha;
    const double lo = std::sqrt(2.0 * prob.lambda * alpha);
    const double hi = std::sqrt(2.0 * prob.lambda / (alpha * sub.rho * sub.rho));
    const Vector w = prob.affine(state.x) + state.y / sub.rho;

    Vector base(m);
    IndexSet ambiguous;
    for (Index i = 0; i < m; ++i) {
        if (w[i] >= 0.0 && w[i] < lo) {
            base[i] = 0.0;
        } else if (w[i] >= lo && w[i] <= hi) {
            base[i] = 0.0;
            ambiguous.push_back(i);
        } else {
            base[i] = w[i];
        }
    }
    if (ambiguous.size() > 20) return false;

    const std::uint64_t count = std::uint64_t{1} << ambiguous.size();
    bool found = false;
    double best_G = kInf;
    for (std::uint64_t mask = 0; mask < count; ++mask) {
        Vector u = base;
        for (std::size_t b = 0; b < ambiguous.size(); ++b) {
            if ((mask >> b) & 1U) u[ambiguous[b]] = w[ambiguous[b]];
        }
        const SubproblemPoint pt = evaluate(sub, state.x, u);
        if (pt.grad_x.norm() > 1e-10 * (1.0 + pt.coupling.norm())) continue;
        if (pt.G > G0 + 1e-12 * std::max(1.0, std::abs(G0))) continue;
        if (pt.G < best_G) {
            best_G = pt.G;
            found = true;
            out.x = pt.x;
            out.u = pt.u;
            out.gamma = solver.identify_active_set(pt);
            out.residuals = solver.residuals_at(pt, out.gamma);
        }
    }
    return found;
}

}  // namespace

PrimalStepResult primal_step(const std::shared_ptr<const CompositeProblem>& problem, const IterateTriple& state, int k,
                             const ResolvedParameters& params, const SolverConfig& config)
{
    GsNewtonOptions inner = config.inner;
    inner.alpha = params.steps.alpha;
    inner.t = params.steps.t;
    Subproblem sub(problem, state.y, state.x, params.rho, params.mu);
    const GsNewton solver(std::move(sub), inner, params.spectral_norm);

    const double eps = epsilon_k(config, params, k);
    const double G0 = evaluate(solver.subproblem(), state.x, state.u).G;
    const double G_slack = 1e-12 * std::max(1.0, std::abs(G0));
    const Vector& anchor = state.x;

    StopRule rule;
    rule.max_iterations = config.max_inner;
    rule.predicate = [&](const StopContext& ctx) {
        const double drift = (ctx.point->x - anchor).norm();
        return ctx.residuals.r1 <= params.c1 * drift && ctx.residuals.r2 <= params.c2 * drift * drift &&
               ctx.residuals.r3 <= eps && ctx.point->G <= G0 + G_slack;
    };

    PrimalStepResult out;
    out.inner = solver.solve(state.x, state.u, rule);
    const InnerResult& run = out.inner;
    if (run.status == InnerStatus::rule_met) {
        out.x = run.x;
        out.u = run.u;
        out.gamma = run.gamma;
        out.residuals = run.residuals;
        out.outcome = PrimalOutcome::accepted;
        return out;
    }

    if (run.residuals.r1 <= 1e-10 && run.residuals.r2 <= 1e-10 && run.residuals.r3 <= eps && run.G <= G0 + G_slack) {
        out.x = run.x;
        out.u = run.u;
        out.gamma = run.gamma;
        out.residuals = run.residuals;
        out.outcome = PrimalOutcome::degenerate_accepted;
        return out;
    }

    if (run.max_x_drift < 1e-12) {
        out.outcome = enumerate_candidates(solver, solver.subproblem(), state, G0, out)
                          ? PrimalOutcome::candidate_enumerated
                          : PrimalOutcome::degenerate_failed;
        return out;
    }

    throw SolverError("primal step " + std::to_string(k) + ": inner solver reached " +
                      std::to_string(config.max_inner) + " iterations without meeting the stopping rule");
}

Vector multiplier_step(const CompositeProblem& problem, const Vector& x, const Vector& u, const Vector& y, double rho)
{
    require_same_size(y.size(), problem.m(), "multiplier_step y");
    require_same_size(u.size(), problem.m(), "multiplier_step u");
    return y + rho * (problem.affine(x) - u);
}

bool outer_stop(const IterateTriple& prev, const IterateTriple& cur, double tol)
{
    if (!(tol > 0.0)) throw DomainError("outer_stop: tol must be positive");
    const double change = (cur.x - prev.x).norm() + (cur.u - prev.u).norm() + (cur.y - prev.y).norm();
    const double scale = cur.x.norm() + cur.u.norm() + cur.y.norm() + 1.0;
    return change / scale < tol;
}

std::string to_string(SolveStatus status)
{
    switch (status) {
    case SolveStatus::converged:
        return "Converged";
    case SolveStatus::max_outer_reached:
        return "MaxOuterReached";
    case SolveStatus::degenerate_fallback:
        return "DegenerateFallback";
    }
    return "Unknown";
}

SolveResult solve(const std::shared_ptr<const CompositeProblem>& problem, const SolverConfig& config,
                  const std::optional<IterateTriple>& start)
{
    if (!problem) throw DomainError("solve: null problem");
    using Clock = std::chrono::steady_clock;
    const auto t0 = Clock::now();
    auto elapsed_ms = [&] { return std::chrono::duration<double, std::milli>(Clock::now() - t0).count(); };

    SolveResult result;
    result.params = derive_parameters(*problem, config);
    const ResolvedParameters& params = result.params;
    const double alpha = params.alpha();

    IterateTriple cur;
    cur.x = (start && start->x.size() > 0) ? start->x : Vector::Zero(problem->n());
    cur.u = (start && start->u.size() > 0) ? start->u : problem->affine(cur.x);
    cur.y = (start && start->y.size() > 0) ? start->y : Vector::Zero(problem->m());
    require_same_size(cur.x.size(), problem->n(), "solve start x");
    require_same_size(cur.u.size(), problem->m(), "solve start u");
    require_same_size(cur.y.size(), problem->m(), "solve start y");
    require_finite(cur.x, "solve start x");
    require_finite(cur.u, "solve start u");
    require_finite(cur.y, "solve start y");

    auto record = [&](int k, const IterateTriple& it, const Vector& prev_x) {
        TraceRecord rec;
        rec.k = k;
        rec.auglag = augmented_lagrangian(*problem, it.x, it.u, it.y, params.rho);
        rec.lyapunov = rec.auglag + 0.5 * params.beta * (it.x - prev_x).squaredNorm();
        rec.foc = foc_metric(*problem, it.x, it.u, it.y, alpha);
        rec.step_norm = (it.x - prev_x).norm();
        rec.active_size = static_cast<Index>(it.gamma.size());
        if (!std::isfinite(rec.lyapunov) || !std::isfinite(rec.foc)) {
            throw NonFiniteError("solve: non-finite Lyapunov value at outer iteration " + std::to_string(k));
        }
        return rec;
    };

    {
        TraceRecord rec = record(0, cur, cur.x);
        rec.wall_ms = elapsed_ms();
        result.trace.push_back(rec);
    }

    result.status = SolveStatus::max_outer_reached;
    for (int k = 0; k < config.max_outer; ++k) {
        PrimalStepResult primal = primal_step(problem, cur, k, params, config);
        if (primal.outcome == PrimalOutcome::degenerate_failed) {
            result.status = SolveStatus::degenerate_fallback;
            break;
        }
        IterateTriple next;
        next.y = multiplier_step(*problem, primal.x, primal.u, cur.y, params.rho);
        next.x = std::move(primal.x);
        next.u = std::move(primal.u);
        next.gamma = std::move(primal.gamma);
        if (!next.x.allFinite() || !next.u.allFinite() || !next.y.allFinite()) {
            throw NonFiniteError("solve: non-finite iterate at outer iteration " + std::to_string(k + 1));
        }

        TraceRecord rec = record(k + 1, next, cur.x);
        rec.residuals = primal.residuals;
        rec.inner_iters = primal.inner.iterations;
        rec.newton_steps = primal.inner.newton_steps;
        rec.wall_ms = elapsed_ms();
        result.trace.push_back(rec);
        result.outer_iterations = k + 1;

        const bool stop = outer_stop(cur, next, config.outer_tol);
        cur = std::move(next);
        if (stop) {
            result.status = SolveStatus::converged;
            break;
        }
    }

    result.foc = result.trace.back().foc;
    result.solution = std::move(cur);
    return result;
}

void write_trace_jsonl(std::ostream& out, const std::vector<TraceRecord>& trace)
{
    for (const TraceRecord& r : trace) {
        nlohmann::ordered_json j;
        j["k"] = r.k;
        j["lyapunov"] = r.lyapunov;
        j["auglag"] = r.auglag;
        j["foc"] = r.foc;
        j["step_norm"] = r.step_norm;
        j["r1"] = r.residuals.r1;
        j["r2"] = r.residuals.r2;
        j["r3"] = r.residuals.r3;
        j["inner_iters"] = r.inner_iters;
        j["newton_steps"] = r.newton_steps;
        j["active_size"] = r.active_size;
        j["wall_ms"] = r.wall_ms;
        out << j.dump() << '\n';
    }
}

}  // namespace zeroone
