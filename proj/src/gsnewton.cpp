#include "zeroone/gsnewton.hpp"

#include <Eigen/Cholesky>

#include <algorithm>
#include <cmath>
#include <string>

namespace zeroone {

Subproblem::Subproblem(std::shared_ptr<const CompositeProblem> base_, Vector p_, Vector q_, double rho_, double mu_)
    : base(std::move(base_)), p(std::move(p_)), q(std::move(q_)), rho(rho_), mu(mu_)
{
    if (!base) throw DomainError("Subproblem: null problem");
    require_same_size(p.size(), base->m(), "Subproblem p");
    require_same_size(q.size(), base->n(), "Subproblem q");
    require_finite(p, "Subproblem p");
    require_finite(q, "Subproblem q");
    if (!(rho > 0.0) || !std::isfinite(rho)) throw DomainError("Subproblem: rho must be positive");
    if (!(mu > 0.0) || !std::isfinite(mu)) throw DomainError("Subproblem: mu must be positive");
    if (!(sigma_g() > 0.0)) throw DomainError("Subproblem: mu must exceed sigma_f");
}

SubproblemPoint evaluate(const Subproblem& sub, Vector x, Vector u)
{
    Vector ax = sub.base->a_map->apply(x);
    return evaluate(sub, std::move(x), std::move(ax), std::move(u));
}

SubproblemPoint evaluate(const Subproblem& sub, Vector x, Vector ax, Vector u, bool with_gradient)
{
    const CompositeProblem& prob = *sub.base;
    SubproblemPoint pt;
    const Vector r = ax + prob.b - u;
    const Vector dx = x - sub.q;
    pt.coupling = sub.p + sub.rho * r;
    pt.g = prob.objective->value(x) + sub.p.dot(r) + 0.5 * sub.rho * r.squaredNorm() + 0.5 * sub.mu * dx.squaredNorm();
    pt.G = pt.g + prob.lambda * static_cast<double>(h_eval(u));
    pt.x = std::move(x);
    pt.u = std::move(u);
    pt.ax = std::move(ax);
    if (!std::isfinite(pt.G)) throw NonFiniteError("subproblem evaluation: non-finite value");
    if (with_gradient) complete_gradient(sub, pt);
    return pt;
}

void complete_gradient(const Subproblem& sub, SubproblemPoint& point)
{
    if (point.has_gradient) return;
    const CompositeProblem& prob = *sub.base;
    point.grad_x =
        prob.objective->gradient(point.x) + prob.a_map->apply_transpose(point.coupling) + sub.mu * (point.x - sub.q);
    if (!point.grad_x.allFinite()) throw NonFiniteError("subproblem evaluation: non-finite gradient");
    point.has_gradient = true;
}

double estimate_ell_g(const Subproblem& sub, std::optional<double> spectral_norm)
{
    const double sigma = spectral_norm ? *spectral_norm : spectral_norm_estimate(*sub.base->a_map);
    return sub.base->objective->ell_f() + sub.mu + sub.rho * (sigma + 1.0) * (sigma + 1.0);
}

StepSizes resolve_step_sizes(const Subproblem& sub, StepPolicy policy, std::optional<double> alpha,
                             std::optional<double> t, std::optional<double> spectral_norm)
{
    const double sigma = spectral_norm ? *spectral_norm : spectral_norm_estimate(*sub.base->a_map);
    StepSizes s;
    s.ell_g = estimate_ell_g(sub, sigma);
    s.ell_x = sub.base->objective->ell_f() + sub.mu + sub.rho * sigma * sigma;
    s.ell_u = sub.rho;
    s.sigma_g = sub.sigma_g();
    const bool joint = policy == StepPolicy::joint;
    s.alpha = alpha ? *alpha : 0.9 / (joint ? s.ell_g : s.ell_u);
    s.t = t ? *t : 1.0 / (joint ? s.ell_g : s.ell_x);
    if (!(s.alpha > 0.0) || !(s.t > 0.0)) throw DomainError("step sizes must be positive");
    const double lu = joint ? s.ell_g : s.ell_u;
    const double lx = joint ? s.ell_g : s.ell_x;
    s.tau = std::min(1.0 / (2.0 * s.alpha) - 0.5 * lu, 1.0 / s.t - 0.5 * lx);
    if (!(s.tau > 0.0)) throw DomainError("step sizes too large for guaranteed descent");
    return s;
}

StopRule StopRule::tolerance(double tol, int max_iterations)
{
    StopRule rule;
    rule.max_iterations = max_iterations;
    rule.predicate = [tol](const StopContext& ctx) {
        return std::max({ctx.residuals.r1, ctx.residuals.r2, ctx.residuals.r3}) <= tol;
    };
    return rule;
}

GsNewton::GsNewton(Subproblem sub, GsNewtonOptions options, std::optional<double> spectral_norm)
    : sub_(std::move(sub)), options_(options)
{
    steps_ = resolve_step_sizes(sub_, options_.step_policy, options_.alpha, options_.t, spectral_norm);
}

IndexSet GsNewton::identify_active_set(const SubproblemPoint& point) const
{
    const double threshold = std::sqrt(2.0 * steps_.alpha * sub_.base->lambda);
    IndexSet gamma;
    for (Index i = 0; i < point.u.size(); ++i) {
        const double w = point.u[i] + steps_.alpha * point.coupling[i];
        if (w >= 0.0 && w < threshold) gamma.push_back(i);
    }
    return gamma;
}

SubproblemPoint GsNewton::gradient_half_step(const SubproblemPoint& point, const IndexSet& gamma) const
{
    const CompositeProblem& prob = *sub_.base;
    Vector u_half = zero_on(point.u + steps_.alpha * point.coupling, gamma);

    // grad_x g(x, u_half) reusing A x.
    const Vector coupling = sub_.p + sub_.rho * (point.ax + prob.b - u_half);
    const Vector grad_x =
        prob.objective->gradient(point.x) + prob.a_map->apply_transpose(coupling) + sub_.mu * (point.x - sub_.q);
    Vector x_half = point.x - steps_.t * grad_x;
    return evaluate(sub_, std::move(x_half), std::move(u_half));
}

Vector GsNewton::solve_reduced(const Vector& x_half, const IndexSet& gamma, const Vector& rhs, LinearSolvePath& path,
                               bool& ok) const
{
    const SmoothObjective& f = *sub_.base->objective;
    const Index n = rhs.size();
    const double rho = sub_.rho;
    const double mu = sub_.mu;
    ok = false;

    if (f.is_diagonal_hessian() &&
        static_cast<double>(gamma.size()) < options_.woodbury_ratio * static_cast<double>(n)) {
        // (D + rho A_G^T A_G)^{-1} = D^{-1} - D^{-1} A_G^T (I/rho + A_G D^{-1} A_G^T)^{-1} A_G D^{-1}
        path = LinearSolvePath::woodbury;
        const Vector d = f.hessian_diag(x_half).array() + mu;
        if (d.minCoeff() <= 0.0) return Vector::Zero(n);
        const Vector dinv = d.cwiseInverse();
        const Vector z = dinv.cwiseProduct(rhs);
        if (gamma.empty()) {
            ok = true;
            return z;
        }
        const Matrix ag = sub_.base->a_map->row_submatrix(gamma).to_dense();
        const Matrix ag_dinv = ag * dinv.asDiagonal();
        Matrix m = ag_dinv * ag.transpose();
        m.diagonal().array() += 1.0 / rho;
        Eigen::LLT<Matrix> llt(m);
        if (llt.info() != Eigen::Success) return Vector::Zero(n);
        const Vector w = llt.solve(ag * z);
        ok = true;
        return z - ag_dinv.transpose() * w;
    }

    if (n <= options_.dense_max_n) {
        path = LinearSolvePath::dense_cholesky;
        Matrix k = f.hessian_dense(x_half);
        k.diagonal().array() += mu;
        if (!gamma.empty()) {
            const Matrix ag = sub_.base->a_map->row_submatrix(gamma).to_dense();
            k.noalias() += rho * ag.transpose() * ag;
        }
        Eigen::LLT<Matrix> llt(k);
        if (llt.info() != Eigen::Success) return Vector::Zero(n);
        const Vector ldiag = llt.matrixLLT().diagonal();
        const double ratio = ldiag.maxCoeff() / ldiag.minCoeff();
        if (!(ratio * ratio <= options_.max_condition)) return Vector::Zero(n);
        ok = true;
        return llt.solve(rhs);
    }

    // Preconditioned conjugate gradients with a Jacobi preconditioner.
    path = LinearSolvePath::conjugate_gradient;
    const LinearMap ag = sub_.base->a_map->row_submatrix(gamma);
    Vector diag = f.is_diagonal_hessian() ? f.hessian_diag(x_half) : Vector(f.hessian_dense(x_half).diagonal());
    diag.array() += mu;
    if (!gamma.empty()) diag += rho * ag.col_squared_norms();
    if (diag.minCoeff() <= 0.0) return Vector::Zero(n);
    const Vector pinv = diag.cwiseInverse();
    auto apply_k = [&](const Vector& v) {
        Vector out = f.hessian_matvec(x_half, v) + mu * v;
        if (!gamma.empty()) out += rho * ag.apply_transpose(ag.apply(v));
        return out;
    };

    Vector x = Vector::Zero(n);
    Vector r = rhs;
    const double target = options_.cg_tolerance * std::max(rhs.norm(), 1e-300);
    if (r.norm() <= target) {
        ok = true;
        return x;
    }
    Vector z = pinv.cwiseProduct(r);
    Vector p = z;
    double rz = r.dot(z);
    const Index cap = 10 * n;
    for (Index it = 0; it < cap; ++it) {
        const Vector kp = apply_k(p);
        const double pkp = p.dot(kp);
        if (!(pkp > 0.0)) return x;
        const double step = rz / pkp;
        x += step * p;
        r -= step * kp;
        if (r.norm() <= target) {
            ok = true;
            return x;
        }
        z = pinv.cwiseProduct(r);
        const double rz_next = r.dot(z);
        p = z + (rz_next / rz) * p;
        rz = rz_next;
    }
    return x;
}

NewtonResult GsNewton::newton_step(const SubproblemPoint& half, const IndexSet& gamma) const
{
    const CompositeProblem& prob = *sub_.base;
    const LinearMap& a = *prob.a_map;
    const double rho = sub_.rho;

    // Reduced system in d_x after eliminating d_u on the complement of gamma:
    //   (H_f + mu I + rho A_G^T A_G) d_x = -grad_x - A_Gc^T (grad_u)_Gc
    //   (d_u)_Gc = -(grad_u)_Gc / rho + (A d_x)_Gc,   u_G stays 0.
    const Vector coupling_free = zero_on(half.coupling, gamma);  // -(grad_u)_Gc padded
    const Vector rhs = -half.grad_x + a.apply_transpose(coupling_free);

    NewtonResult out;
    bool ok = false;
    const Vector dx = solve_reduced(half.x, gamma, rhs, out.path, ok);
    if (!ok || !dx.allFinite()) {
        out.solve_ok = false;
        return out;
    }

    const Vector a_dx = a.apply(dx);
    const Vector du = zero_on(coupling_free / rho + a_dx, gamma);

    // Residual of the unreduced system on (d_x, (d_u)_Gc).
    const Vector eq1 = prob.objective->hessian_matvec(half.x, dx) + sub_.mu * dx + rho * a.apply_transpose(a_dx) -
                       rho * a.apply_transpose(du) + half.grad_x;
    const Vector eq2 = zero_on(rho * (du - a_dx) - coupling_free, gamma);
    const double full_rhs = std::sqrt(half.grad_x.squaredNorm() + coupling_free.squaredNorm());
    out.system_residual = std::sqrt(eq1.squaredNorm() + eq2.squaredNorm());
    if (!(out.system_residual <= options_.newton_residual_tolerance * (1.0 + full_rhs))) {
        out.solve_ok = false;
        return out;
    }

    Vector u_new = zero_on(half.u + du, gamma);
    out.point = evaluate(sub_, half.x + dx, half.ax + a_dx, std::move(u_new), false);
    out.solve_ok = true;
    return out;
}

SubproblemPoint GsNewton::damp(const SubproblemPoint& half, const SubproblemPoint& newton, double theta) const
{
    Vector x = half.x + theta * (newton.x - half.x);
    Vector ax = half.ax + theta * (newton.ax - half.ax);
    Vector u = half.u + theta * (newton.u - half.u);
    return evaluate(sub_, std::move(x), std::move(ax), std::move(u), false);
}

std::optional<SubproblemPoint> GsNewton::prox_cleanup(const SubproblemPoint& candidate, const IndexSet& gamma) const
{
    // Off gamma the Newton point has grad_u g = 0, so u + alpha y = u there and
    // the proximal map zeroes exactly the entries in [0, sqrt(2 alpha lambda)).
    const double threshold = std::sqrt(2.0 * steps_.alpha * sub_.base->lambda);
    Vector u = candidate.u;
    bool changed = false;
    auto it = gamma.begin();
    for (Index i = 0; i < u.size(); ++i) {
        if (it != gamma.end() && *it == i) {
            ++it;
            continue;
        }
        if (u[i] > 0.0 && u[i] < threshold) {
            u[i] = 0.0;
            changed = true;
        }
    }
    if (!changed) return std::nullopt;
    return evaluate(sub_, candidate.x, candidate.ax, std::move(u), false);
}

bool GsNewton::accept_newton(const SubproblemPoint& half, const SubproblemPoint& candidate) const
{
    const double step_sq = (candidate.x - half.x).squaredNorm() + (candidate.u - half.u).squaredNorm();
    const double slack = 1e-12 * std::max(1.0, std::abs(half.G));
    return half.G - candidate.G >= 0.25 * steps_.sigma_g * step_sq - slack;
}

ResidualTriple GsNewton::residuals_at(const SubproblemPoint& point, const IndexSet& gamma) const
{
    return residuals(point.grad_x, point.grad_u(), point.u, gamma, steps_.alpha, sub_.base->lambda);
}

InnerResult GsNewton::solve(Vector x0, Vector u0, const StopRule& stop) const
{
    require_same_size(x0.size(), sub_.base->n(), "GsNewton::solve x0");
    require_same_size(u0.size(), sub_.base->m(), "GsNewton::solve u0");
    require_finite(x0, "GsNewton::solve x0");
    require_finite(u0, "GsNewton::solve u0");

    InnerResult result;
    const Vector x_start = x0;
    SubproblemPoint current = evaluate(sub_, std::move(x0), std::move(u0));

    for (int j = 0;; ++j) {
        const IndexSet gamma = identify_active_set(current);
        const ResidualTriple res = residuals_at(current, gamma);
        result.max_x_drift = std::max(result.max_x_drift, (current.x - x_start).norm());
        if (options_.record_iterates) result.iterates.emplace_back(current.x, current.u);

        const StopContext ctx{j, &current, &gamma, res};
        InnerStatus status = InnerStatus::capped;
        bool done = false;
        if (stop.predicate && stop.predicate(ctx)) {
            status = InnerStatus::rule_met;
            done = true;
        } else if (std::max({res.r1, res.r2, res.r3}) <= stop.absolute_tolerance) {
            status = InnerStatus::tolerance_met;
            done = true;
        } else if (j >= stop.max_iterations) {
            done = true;
        }
        if (done) {
            result.status = status;
            result.iterations = j;
            result.gamma = gamma;
            result.residuals = res;
            result.G = current.G;
            result.y = current.coupling;
            result.x = std::move(current.x);
            result.u = std::move(current.u);
            return result;
        }

        InnerRecord rec;
        rec.j = j;
        rec.G_start = current.G;
        rec.gamma_size = static_cast<Index>(gamma.size());
        rec.residuals = res;

        SubproblemPoint half = gradient_half_step(current, gamma);
        rec.half_step_sq = (half.x - current.x).squaredNorm() + (half.u - current.u).squaredNorm();

        NewtonResult newton = newton_step(half, gamma);
        rec.newton_solve_ok = newton.solve_ok;
        std::optional<SubproblemPoint> taken;
        if (newton.solve_ok) {
            double theta = 1.0;
            for (int trial = 0; trial <= options_.newton_backtracks && !taken; ++trial, theta *= 0.5) {
                SubproblemPoint trial_point = trial == 0 ? newton.point : damp(half, newton.point, theta);
                if (accept_newton(half, trial_point)) {
                    taken = std::move(trial_point);
                } else if (auto cleaned = prox_cleanup(trial_point, gamma); cleaned && accept_newton(half, *cleaned)) {
                    taken = std::move(cleaned);
                    rec.cleaned = true;
                }
                if (taken) rec.damping = theta;
            }
        }
        if (taken) {
            rec.newton_taken = true;
            rec.newton_step_sq = (taken->x - half.x).squaredNorm() + (taken->u - half.u).squaredNorm();
            current = std::move(*taken);
            complete_gradient(sub_, current);
            ++result.newton_steps;
        } else {
            current = std::move(half);
        }
        rec.G_end = current.G;
        result.trace.push_back(rec);
    }
}

}  // namespace zeroone
