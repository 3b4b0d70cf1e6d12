#pragma once

#include "zeroone/problem.hpp"
#include "zeroone/prox01.hpp"

#include <functional>
#include <memory>
#include <optional>
#include <vector>

namespace zeroone {

/// Smooth part of the regularized subproblem
///   g(x, u) = f(x) + <p, Ax - u + b> + rho/2 |Ax - u + b|^2 + mu/2 |x - q|^2,
/// minimized together with lambda * h(u). Strongly convex when mu > sigma_f.
struct Subproblem {
    std::shared_ptr<const CompositeProblem> base;
    Vector p;
    Vector q;
    double rho = 1.0;
    double mu = 1.0;

    Subproblem(std::shared_ptr<const CompositeProblem> base_, Vector p_, Vector q_, double rho_, double mu_);

    double sigma_g() const { return mu - base->objective->sigma_f(); }
};

/// A subproblem point with everything the solver reuses between steps.
struct SubproblemPoint {
    Vector x;
    Vector u;
    Vector ax;        ///< A x
    Vector coupling;  ///< p + rho (A x + b - u), equal to -grad_u g
    Vector grad_x;
    double g = 0.0;   ///< smooth part
    double G = 0.0;   ///< g + lambda * h(u)
    bool has_gradient = false;  ///< grad_x filled in

    Vector grad_u() const { return -coupling; }
};

SubproblemPoint evaluate(const Subproblem& sub, Vector x, Vector u);
/// With a known A x; skipping the gradient saves the A^T product.
SubproblemPoint evaluate(const Subproblem& sub, Vector x, Vector ax, Vector u, bool with_gradient = true);

/// Fills grad_x when it was skipped.
void complete_gradient(const Subproblem& sub, SubproblemPoint& point);

/// How the proximal step alpha and gradient step t are derived from the
/// curvature of g.
///
/// joint: alpha = 0.9 / ell_g, t = 1 / ell_g with one bound
///   ell_g = ell_f + mu + rho (|A| + 1)^2 for the whole gradient.
/// blockwise: the descent argument only needs the Lipschitz modulus of
///   grad_u g in u (exactly rho) for the proximal step and that of grad_x g
///   in x (ell_f + mu + rho |A|^2) for the gradient step, so
///   alpha = 0.9 / rho and t = 1 / (ell_f + mu + rho |A|^2).
enum class StepPolicy { blockwise, joint };

struct StepSizes {
    double alpha = 0.0;
    double t = 0.0;
    double ell_g = 0.0;  ///< joint bound
    double ell_x = 0.0;  ///< x-block bound
    double ell_u = 0.0;  ///< u-block bound (rho)
    double sigma_g = 0.0;
    /// Sufficient-decrease constant of the half step:
    /// min{1/(2 alpha) - ell_u/2, 1/t - ell_x/2} (blockwise) or the same with
    /// ell_g in both places (joint).
    double tau = 0.0;
};

/// ell_f + mu + rho (sigma_A + 1)^2 where sigma_A estimates |A|.
double estimate_ell_g(const Subproblem& sub, std::optional<double> spectral_norm = std::nullopt);

StepSizes resolve_step_sizes(const Subproblem& sub, StepPolicy policy, std::optional<double> alpha,
                             std::optional<double> t, std::optional<double> spectral_norm = std::nullopt);

struct StopContext {
    int iteration = 0;
    const SubproblemPoint* point = nullptr;
    const IndexSet* gamma = nullptr;  ///< identification set at *point
    ResidualTriple residuals;
};

/// Termination predicate plus iteration cap and absolute-tolerance fallback.
struct StopRule {
    std::function<bool(const StopContext&)> predicate;
    int max_iterations = 1000;
    /// Stop when max(r1, r2, r3) falls to this level even if the predicate
    /// has not fired.
    double absolute_tolerance = 1e-13;

    /// max(r1, r2, r3) <= tol.
    static StopRule tolerance(double tol, int max_iterations = 1000);
};

enum class LinearSolvePath { none, woodbury, dense_cholesky, conjugate_gradient };

struct NewtonResult {
    SubproblemPoint point;
    bool solve_ok = false;
    LinearSolvePath path = LinearSolvePath::none;
    double system_residual = 0.0;
};

struct InnerRecord {
    int j = 0;
    double G_start = 0.0;
    double G_end = 0.0;
    double half_step_sq = 0.0;    ///< |zeta^{j+1/2} - zeta^j|^2
    double newton_step_sq = 0.0;  ///< |zeta^{j+1} - zeta^{j+1/2}|^2
    bool newton_taken = false;
    bool newton_solve_ok = false;
    bool cleaned = false;  ///< the accepted Newton point went through prox_cleanup
    double damping = 0.0;  ///< fraction of the Newton step taken, 0 when rejected
    Index gamma_size = 0;
    ResidualTriple residuals;  ///< at zeta^j
};

enum class InnerStatus { rule_met, tolerance_met, capped };

struct InnerResult {
    Vector x;
    Vector u;
    Vector y;  ///< -grad_u g at the returned point
    IndexSet gamma;
    ResidualTriple residuals;
    double G = 0.0;
    int iterations = 0;
    int newton_steps = 0;
    InnerStatus status = InnerStatus::capped;
    /// max_j |x^j - x^0| over the run.
    double max_x_drift = 0.0;
    std::vector<InnerRecord> trace;
    /// (x, u) at every check, including the returned point; filled only when
    /// GsNewtonOptions::record_iterates is set.
    std::vector<std::pair<Vector, Vector>> iterates;
};

struct GsNewtonOptions {
    StepPolicy step_policy = StepPolicy::blockwise;
    std::optional<double> alpha;
    std::optional<double> t;
    /// Woodbury is used for diagonal Hessians when |Gamma| < ratio * n.
    double woodbury_ratio = 0.25;
    /// Dense Cholesky on the reduced system up to this n, CG above it.
    Index dense_max_n = 200;
    double cg_tolerance = 1e-10;
    double max_condition = 1e12;
    double newton_residual_tolerance = 1e-8;
    /// Halvings of the Newton step tried after the full step fails.
    int newton_backtracks = 10;
    bool record_iterates = false;
};

/// Gradient-subspace-Newton method for min g(x, u) + lambda h(u).
///
/// Each iteration identifies the active set Gamma from the proximal
/// gradient of u, takes a proximal half step (u on Gamma set to zero), then
/// tries a Newton step on the subspace {u_Gamma = 0} and keeps it only if it
/// decreases G by at least sigma_g/4 times its squared length. A Newton point
/// that fails only because some u entries crossed into the prox dead zone is
/// retried with those entries zeroed, under the same test.
class GsNewton {
public:
    GsNewton(Subproblem sub, GsNewtonOptions options = {}, std::optional<double> spectral_norm = std::nullopt);

    const Subproblem& subproblem() const { return sub_; }
    const StepSizes& steps() const { return steps_; }

    /// {i : [u + alpha y]_i in [0, sqrt(2 alpha lambda))} with y = -grad_u g.
    IndexSet identify_active_set(const SubproblemPoint& point) const;

    SubproblemPoint gradient_half_step(const SubproblemPoint& point, const IndexSet& gamma) const;

    NewtonResult newton_step(const SubproblemPoint& half, const IndexSet& gamma) const;

    /// True when the Newton candidate passes the sufficient-decrease test.
    bool accept_newton(const SubproblemPoint& half, const SubproblemPoint& candidate) const;

    /// The Newton point with u zeroed wherever it landed in
    /// [0, sqrt(2 alpha lambda)) off gamma; nullopt when nothing changes.
    /// Tried when the plain Newton point fails the decrease test: each zeroed
    /// entry changes g by rho/2 u_i^2 < lambda because alpha < 1/rho.
    std::optional<SubproblemPoint> prox_cleanup(const SubproblemPoint& candidate, const IndexSet& gamma) const;

    InnerResult solve(Vector x0, Vector u0, const StopRule& stop) const;

    ResidualTriple residuals_at(const SubproblemPoint& point, const IndexSet& gamma) const;

private:
    SubproblemPoint damp(const SubproblemPoint& half, const SubproblemPoint& newton, double theta) const;

    Vector solve_reduced(const Vector& x_half, const IndexSet& gamma, const Vector& rhs, LinearSolvePath& path,
                         bool& ok) const;

    Subproblem sub_;
    GsNewtonOptions options_;
    StepSizes steps_;
};

}  // namespace zeroone
