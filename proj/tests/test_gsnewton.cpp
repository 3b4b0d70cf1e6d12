#include "test_support.hpp"

#include "zeroone/gsnewton.hpp"
#include "zeroone/prox01.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <doctest.h>

#include <cmath>
#include <memory>

using namespace zeroone;
using zeroone::testing::randn;
using zeroone::testing::random_quadratic;

namespace {

Vector vec(std::initializer_list<double> xs)
{
    Vector v(static_cast<Index>(xs.size()));
    Index i = 0;
    for (double x : xs) v[i++] = x;
    return v;
}

std::shared_ptr<const CompositeProblem> make_problem(const Matrix& q, const Vector& c, const Matrix& a, const Vector& b,
                                                     double lambda)
{
    return std::make_shared<CompositeProblem>(std::make_shared<QuadraticObjective>(q, c),
                                              std::make_shared<LinearMap>(LinearMap::dense(a)), b, lambda);
}

Subproblem random_subproblem(Index n, Index m, std::uint64_t seed, double lambda, double rho = 1.0, double mu = 0.1)
{
    auto base = random_quadratic(n, m, seed, lambda);
    Philox4x32 rng(seed, 12);
    return Subproblem(base, 0.3 * randn(rng, m), 0.3 * randn(rng, n), rho, mu);
}

// Exact Hessian of g in (x, u).
Matrix full_hessian(const Subproblem& sub, const Vector& x)
{
    const Index n = sub.base->n(), m = sub.base->m();
    const Matrix a = sub.base->a_map->to_dense();
    Matrix h = Matrix::Zero(n + m, n + m);
    h.topLeftCorner(n, n) = sub.base->objective->hessian_dense(x) + sub.mu * Matrix::Identity(n, n) +
                            sub.rho * a.transpose() * a;
    h.topRightCorner(n, m) = -sub.rho * a.transpose();
    h.bottomLeftCorner(m, n) = -sub.rho * a;
    h.bottomRightCorner(m, m) = sub.rho * Matrix::Identity(m, m);
    return h;
}

// Dense Newton step on (d_x, (d_u)_free) with u_gamma pinned.
std::pair<Vector, Vector> dense_newton_oracle(const Subproblem& sub, const SubproblemPoint& half, const IndexSet& gamma)
{
    const Index n = sub.base->n(), m = sub.base->m();
    const IndexSet free = complement(gamma, m);
    const Index k = static_cast<Index>(free.size());
    const Matrix h = full_hessian(sub, half.x);
    std::vector<Index> keep;
    for (Index i = 0; i < n; ++i) keep.push_back(i);
    for (Index i : free) keep.push_back(n + i);
    Matrix hr(n + k, n + k);
    for (Index r = 0; r < n + k; ++r)
        for (Index c = 0; c < n + k; ++c) hr(r, c) = h(keep[r], keep[c]);
    Vector rhs(n + k);
    rhs.head(n) = -half.grad_x;
    rhs.tail(k) = -gather(half.grad_u(), free);
    const Vector d = hr.ldlt().solve(rhs);
    Vector x = half.x + d.head(n);
    Vector u = half.u;
    for (Index j = 0; j < k; ++j) u[free[j]] += d[n + j];
    for (Index i : gamma) u[i] = 0.0;
    return {x, u};
}

}  // namespace

TEST_CASE("ell_g bound for f = |x|^2/2, A = I, rho = mu = 1")
{
    auto base = make_problem(Matrix::Identity(3, 3), Vector::Zero(3), Matrix::Identity(3, 3), Vector::Zero(3), 1.0);
    const Subproblem sub(base, Vector::Zero(3), Vector::Zero(3), 1.0, 1.0);
    const double ell = estimate_ell_g(sub);
    CHECK(ell == doctest::Approx(6.0).epsilon(1e-10));
    const Eigen::SelfAdjointEigenSolver<Matrix> eig(full_hessian(sub, Vector::Zero(3)));
    CHECK(eig.eigenvalues().maxCoeff() <= ell + 1e-12);
}

TEST_CASE("ell_g limits")
{
    auto base = make_problem(Matrix::Identity(2, 2), Vector::Zero(2), Matrix::Identity(2, 2), Vector::Zero(2), 1.0);
    const Subproblem small_rho(base, Vector::Zero(2), Vector::Zero(2), 1e-12, 1.0);
    CHECK(estimate_ell_g(small_rho) == doctest::Approx(2.0).epsilon(1e-10));

    auto zero_a = make_problem(Matrix::Identity(2, 2), Vector::Zero(2), Matrix::Zero(3, 2), Vector::Zero(3), 1.0);
    const Subproblem sub(zero_a, Vector::Zero(3), Vector::Zero(2), 2.5, 1.0);
    CHECK(estimate_ell_g(sub) == doctest::Approx(1.0 + 1.0 + 2.5));
}

TEST_CASE("ell_g bounds the Hessian spectrum on random instances")
{
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const Subproblem sub = random_subproblem(6, 9, seed, 1.0, 0.5 + static_cast<double>(seed), 0.2);
        const Eigen::SelfAdjointEigenSolver<Matrix> eig(full_hessian(sub, Vector::Zero(6)));
        CHECK(eig.eigenvalues().maxCoeff() <= estimate_ell_g(sub) * (1.0 + 1e-12));
    }
}

TEST_CASE("subproblem rejects mu <= sigma_f")
{
    Matrix q = Matrix::Identity(2, 2);
    q(0, 0) = -0.5;
    auto base = make_problem(q, Vector::Zero(2), Matrix::Identity(2, 2), Vector::Zero(2), 1.0);
    CHECK_THROWS_AS(Subproblem(base, Vector::Zero(2), Vector::Zero(2), 1.0, 0.5), DomainError);
    CHECK_NOTHROW(Subproblem(base, Vector::Zero(2), Vector::Zero(2), 1.0, 0.6));
}

TEST_CASE("active set examples")
{
    // With A = 0, b = 0 and p = rho u, the coupling vanishes at x = 0 and
    // u + alpha y = u. alpha = 0.5 and lambda = 1 give sqrt(2 alpha lambda) = 1.
    const Vector w = vec({-0.5, 0, 0.3, 1.2});
    auto base = make_problem(Matrix::Identity(2, 2), Vector::Zero(2), Matrix::Zero(4, 2), Vector::Zero(4), 1.0);
    GsNewtonOptions opts;
    opts.alpha = 0.5;
    const GsNewton solver(Subproblem(base, w, Vector::Zero(2), 1.0, 1.0), opts);
    const SubproblemPoint pt = evaluate(solver.subproblem(), Vector::Zero(2), w);
    REQUIRE(pt.coupling.norm() == 0.0);
    const IndexSet gamma = solver.identify_active_set(pt);
    CHECK(gamma == IndexSet{1, 2});
    const SubproblemPoint half = solver.gradient_half_step(pt, gamma);
    CHECK(half.u == prox_vector(w, 0.5).point);

    const GsNewton neg(Subproblem(base, -w.cwiseAbs() - Vector::Constant(4, 0.1), Vector::Zero(2), 1.0, 1.0), opts);
    const Vector wn = -w.cwiseAbs() - Vector::Constant(4, 0.1);
    CHECK(neg.identify_active_set(evaluate(neg.subproblem(), Vector::Zero(2), wn)).empty());

    const Vector edge = vec({1.0, 0.999999});
    auto base2 = make_problem(Matrix::Identity(2, 2), Vector::Zero(2), Matrix::Zero(2, 2), Vector::Zero(2), 1.0);
    const GsNewton at_edge(Subproblem(base2, edge, Vector::Zero(2), 1.0, 1.0), opts);
    CHECK(at_edge.identify_active_set(evaluate(at_edge.subproblem(), Vector::Zero(2), edge)) == IndexSet{1});
}

TEST_CASE("one hand-computed half step")
{
    // f = x^2/2, A = 1, b = 0, p = q = 0, rho = mu = 1 from (x, u) = (1, 3).
    // alpha = 0.9 and t = 1/3; y = -2 so u_half = 3 - 1.8 = 1.2 and
    // grad_x g(1, 1.2) = 1 + (1 - 1.2) + 1 = 1.8, x_half = 1 - 0.6 = 0.4.
    auto base = make_problem(Matrix::Identity(1, 1), Vector::Zero(1), Matrix::Identity(1, 1), Vector::Zero(1), 1e-6);
    const GsNewton solver(Subproblem(base, Vector::Zero(1), Vector::Zero(1), 1.0, 1.0));
    CHECK(solver.steps().alpha == doctest::Approx(0.9));
    CHECK(solver.steps().t == doctest::Approx(1.0 / 3.0));
    const SubproblemPoint pt = evaluate(solver.subproblem(), vec({1}), vec({3}));
    const IndexSet gamma = solver.identify_active_set(pt);
    CHECK(gamma.empty());
    const SubproblemPoint half = solver.gradient_half_step(pt, gamma);
    CHECK(half.u[0] == doctest::Approx(1.2).epsilon(1e-14));
    CHECK(half.x[0] == doctest::Approx(0.4).epsilon(1e-14));
}

TEST_CASE("half step with everything active zeroes u")
{
    // Large lambda puts every entry in the dead zone.
    const Subproblem sub = random_subproblem(4, 5, 3, 1e6);
    const GsNewton solver(sub);
    const SubproblemPoint pt = evaluate(sub, Vector::Zero(4), Vector::Zero(5));
    const IndexSet all = complement({}, 5);
    CHECK(solver.gradient_half_step(pt, all).u == Vector::Zero(5));
}

TEST_CASE("Newton step matches the dense full-system solve")
{
    for (std::uint64_t seed = 0; seed < 8; ++seed) {
        const Index n = seed < 4 ? 2 : 5;
        const Index m = seed < 4 ? 2 : 7;
        const Subproblem sub = random_subproblem(n, m, 40 + seed, 0.05);
        const GsNewton solver(sub);
        Philox4x32 rng(seed, 5);
        const SubproblemPoint pt = evaluate(sub, randn(rng, n), randn(rng, m));
        const IndexSet gamma = solver.identify_active_set(pt);
        const SubproblemPoint half = solver.gradient_half_step(pt, gamma);
        const NewtonResult nr = solver.newton_step(half, gamma);
        REQUIRE(nr.solve_ok);
        const auto [x_ref, u_ref] = dense_newton_oracle(sub, half, gamma);
        CHECK((nr.point.x - x_ref).norm() <= 1e-10 * (1.0 + x_ref.norm()));
        CHECK((nr.point.u - u_ref).norm() <= 1e-10 * (1.0 + u_ref.norm()));
        for (Index i : gamma) CHECK(nr.point.u[i] == 0.0);
    }
}

TEST_CASE("Newton step with an empty active set solves the unreduced system")
{
    const Subproblem sub = random_subproblem(3, 4, 77, 1e-10);
    const GsNewton solver(sub);
    Philox4x32 rng(77, 1);
    const SubproblemPoint half = evaluate(sub, randn(rng, 3), randn(rng, 4));
    const NewtonResult nr = solver.newton_step(half, {});
    REQUIRE(nr.solve_ok);
    const auto [x_ref, u_ref] = dense_newton_oracle(sub, half, {});
    CHECK((nr.point.x - x_ref).norm() <= 1e-10 * (1.0 + x_ref.norm()));
    CHECK((nr.point.u - u_ref).norm() <= 1e-10 * (1.0 + u_ref.norm()));
}

TEST_CASE("Newton step on a quadratic lands on the subspace minimizer")
{
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const Subproblem sub = random_subproblem(6, 10, 100 + seed, 0.5);
        const GsNewton solver(sub);
        Philox4x32 rng(seed, 9);
        const SubproblemPoint pt = evaluate(sub, randn(rng, 6), randn(rng, 10));
        const IndexSet gamma = solver.identify_active_set(pt);
        const SubproblemPoint half = solver.gradient_half_step(pt, gamma);
        NewtonResult nr = solver.newton_step(half, gamma);
        REQUIRE(nr.solve_ok);
        complete_gradient(sub, nr.point);
        const ResidualTriple r = solver.residuals_at(nr.point, gamma);
        CHECK(r.r1 <= 1e-9);
        CHECK(r.r2 <= 1e-9);
    }
}

TEST_CASE("Woodbury, dense Cholesky and CG paths agree")
{
    // Diagonal Hessian so that the Woodbury path applies.
    Philox4x32 rng(31);
    const Index n = 40, m = 30;
    Vector d(n);
    for (Index i = 0; i < n; ++i) d[i] = rng.uniform(0.5, 2.0);
    auto base = make_problem(Matrix(d.asDiagonal()), randn(rng, n), randn(rng, m, n) / std::sqrt(40.0), randn(rng, m),
                             0.5);
    const Subproblem sub(base, 0.2 * randn(rng, m), Vector::Zero(n), 1.0, 0.1);
    const SubproblemPoint pt = evaluate(sub, randn(rng, n), randn(rng, m));

    GsNewtonOptions w_opts, d_opts, c_opts;
    d_opts.woodbury_ratio = 0.0;
    c_opts.woodbury_ratio = 0.0;
    c_opts.dense_max_n = 0;
    const GsNewton w(sub, w_opts), dn(sub, d_opts), cg(sub, c_opts);
    const IndexSet gamma{1, 4, 9, 20, 29};  // |Gamma| = 5 < n/4
    const SubproblemPoint half = w.gradient_half_step(pt, gamma);

    const NewtonResult rw = w.newton_step(half, gamma);
    const NewtonResult rd = dn.newton_step(half, gamma);
    const NewtonResult rc = cg.newton_step(half, gamma);
    REQUIRE(rw.solve_ok);
    REQUIRE(rd.solve_ok);
    REQUIRE(rc.solve_ok);
    CHECK(rw.path == LinearSolvePath::woodbury);
    CHECK(rd.path == LinearSolvePath::dense_cholesky);
    CHECK(rc.path == LinearSolvePath::conjugate_gradient);
    CHECK((rw.point.x - rd.point.x).norm() <= 1e-10 * (1.0 + rd.point.x.norm()));
    CHECK((rc.point.x - rd.point.x).norm() <= 1e-8 * (1.0 + rd.point.x.norm()));
    CHECK((rw.point.u - rd.point.u).norm() <= 1e-10 * (1.0 + rd.point.u.norm()));
    const auto [x_ref, u_ref] = dense_newton_oracle(sub, half, gamma);
    CHECK((rd.point.x - x_ref).norm() <= 1e-10 * (1.0 + x_ref.norm()));
}

TEST_CASE("Newton acceptance examples")
{
    const Subproblem sub = random_subproblem(5, 8, 9, 1e-9);
    const GsNewton solver(sub);
    Philox4x32 rng(9, 2);
    const SubproblemPoint pt = evaluate(sub, randn(rng, 5), randn(rng, 8));
    const IndexSet gamma = solver.identify_active_set(pt);
    const SubproblemPoint half = solver.gradient_half_step(pt, gamma);

    CHECK(solver.accept_newton(half, half));

    const NewtonResult nr = solver.newton_step(half, gamma);
    REQUIRE(nr.solve_ok);
    CHECK(solver.accept_newton(half, nr.point));
    // Quadratic identity: the exact minimizer decreases g by sigma_g/2 |step|^2 at least.
    const double step_sq = (nr.point.x - half.x).squaredNorm() + (nr.point.u - half.u).squaredNorm();
    CHECK(half.g - nr.point.g >= 0.5 * sub.sigma_g() * step_sq - 1e-12);

    // Tripled step, as from a Hessian underestimated by a factor of three: G goes up.
    const Vector x3 = half.x + 3.0 * (nr.point.x - half.x);
    const Vector u3 = half.u + 3.0 * (nr.point.u - half.u);
    const SubproblemPoint bad = evaluate(sub, x3, u3);
    CHECK(bad.G > half.G);
    CHECK_FALSE(solver.accept_newton(half, bad));
}

TEST_CASE("starting at a P-stationary point terminates immediately")
{
    // Tiny lambda: the minimizer is the smooth one, x from the normal
    // equations and u = A x + b + p / rho with no entry in the dead zone.
    const Subproblem sub = random_subproblem(5, 7, 12, 1e-14);
    const auto* f = dynamic_cast<const QuadraticObjective*>(sub.base->objective.get());
    const Matrix k = f->q() + sub.mu * Matrix::Identity(5, 5);
    const Vector x = k.ldlt().solve(-f->c() + sub.mu * sub.q);
    const Vector u = sub.base->affine(x) + sub.p / sub.rho;
    const GsNewton solver(sub);
    const InnerResult res = solver.solve(x, u, StopRule::tolerance(1e-10));
    CHECK(res.iterations == 0);
    CHECK(res.residuals.r1 <= 1e-10);
    CHECK(res.residuals.r2 <= 1e-10);
    CHECK(res.residuals.r3 <= 1e-10);

    // The half step leaves the point unchanged.
    const SubproblemPoint pt = evaluate(sub, x, u);
    const SubproblemPoint half = solver.gradient_half_step(pt, solver.identify_active_set(pt));
    CHECK((half.x - x).norm() <= 1e-12);
    CHECK((half.u - u).norm() <= 1e-12);
}

TEST_CASE("vanishing lambda reduces to the smooth strongly convex minimizer")
{
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        const Subproblem sub = random_subproblem(6, 9, 200 + seed, 1e-14);
        const auto* f = dynamic_cast<const QuadraticObjective*>(sub.base->objective.get());
        const Matrix k = f->q() + sub.mu * Matrix::Identity(6, 6);
        const Vector x_ref = k.ldlt().solve(-f->c() + sub.mu * sub.q);
        const GsNewton solver(sub);
        const InnerResult res = solver.solve(Vector::Zero(6), Vector::Zero(9), StopRule::tolerance(1e-12));
        CHECK(res.status != InnerStatus::capped);
        CHECK((res.x - x_ref).norm() <= 1e-8);
        CHECK((res.u - (sub.base->affine(x_ref) + sub.p / sub.rho)).norm() <= 1e-8);
        // y = -grad_u g at the returned point.
        CHECK((res.y - evaluate(sub, res.x, res.u).coupling).norm() <= 1e-12);
    }
}

TEST_CASE("G decreases by the guaranteed amount every iteration")
{
    int checked = 0;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const Subproblem sub = random_subproblem(8, 12, 300 + seed, 0.3 + 0.1 * static_cast<double>(seed % 5));
        const GsNewton solver(sub);
        const double tau = solver.steps().tau;
        const double sg = solver.steps().sigma_g;
        const InnerResult res = solver.solve(Vector::Zero(8), Vector::Ones(12), StopRule::tolerance(1e-10, 500));
        for (const InnerRecord& r : res.trace) {
            const double bound = tau * r.half_step_sq + 0.25 * sg * r.newton_step_sq;
            CHECK(r.G_start - r.G_end >= bound - 1e-9);
            ++checked;
        }
    }
    CHECK(checked > 20);
}

TEST_CASE("half step equals the canonical proximal selection along a run")
{
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const Subproblem sub = random_subproblem(5, 10, 400 + seed, 0.5);
        GsNewtonOptions opts;
        opts.record_iterates = true;
        const GsNewton solver(sub, opts);
        const InnerResult res = solver.solve(Vector::Zero(5), Vector::Ones(10), StopRule::tolerance(1e-10, 200));
        const double kappa = solver.steps().alpha * sub.base->lambda;
        for (const auto& [x, u] : res.iterates) {
            const SubproblemPoint pt = evaluate(sub, x, u);
            const SubproblemPoint half = solver.gradient_half_step(pt, solver.identify_active_set(pt));
            CHECK(half.u == prox_vector(u + solver.steps().alpha * pt.coupling, kappa).point);
        }
    }
}

TEST_CASE("finite termination of Newton on quadratics")
{
    // Newton is exact on a quadratic g: once the active set is right, the
    // next iterate is the minimizer.
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const Subproblem sub = random_subproblem(6, 12, 500 + seed, 0.4);
        const GsNewton solver(sub);
        const InnerResult res = solver.solve(Vector::Zero(6), Vector::Ones(12), StopRule::tolerance(1e-12, 500));
        REQUIRE(res.status != InnerStatus::capped);
        CHECK(res.iterations <= 10);
        CHECK(res.newton_steps == res.iterations);
    }
}

TEST_CASE("strict complementarity: fixed active set and quadratic tail")
{
    int qualifying = 0;
    for (std::uint64_t seed = 0; seed < 30; ++seed) {
        auto base = zeroone::testing::random_softplus(6, 12, 600 + seed, 0.4, 4.0);
        Philox4x32 rng(seed, 14);
        const Subproblem sub(base, 0.3 * randn(rng, 12), 0.3 * randn(rng, 6), 1.0, 0.1);
        GsNewtonOptions opts;
        opts.record_iterates = true;
        const GsNewton solver(sub, opts);
        const InnerResult res = solver.solve(Vector::Zero(6), Vector::Ones(12), StopRule::tolerance(1e-12, 500));
        REQUIRE(res.status != InnerStatus::capped);

        // Strict complementarity at the limit: u + alpha y stays away from 0
        // and from the threshold.
        const double alpha = solver.steps().alpha;
        const double s = std::sqrt(2.0 * alpha * sub.base->lambda);
        const Vector w = res.u + alpha * res.y;
        bool strict = true;
        for (Index i = 0; i < w.size(); ++i) strict = strict && std::abs(w[i]) > 1e-6 && std::abs(w[i] - s) > 1e-6;
        if (!strict) continue;

        // Window over which the active set already equals the final one.
        std::vector<IndexSet> gammas;
        for (const auto& [x, u] : res.iterates) gammas.push_back(solver.identify_active_set(evaluate(sub, x, u)));
        std::size_t first = gammas.size() - 1;
        while (first > 0 && gammas[first - 1] == res.gamma) --first;
        if (gammas.size() - first < 5) continue;
        ++qualifying;
        for (std::size_t j = gammas.size() - 5; j < gammas.size(); ++j) CHECK(gammas[j] == res.gamma);

        // Errors against the final iterate: the last two nonzero ratios are below 0.1.
        std::vector<double> err;
        for (std::size_t j = first; j < res.iterates.size(); ++j) {
            const auto& [x, u] = res.iterates[j];
            err.push_back(std::sqrt((x - res.x).squaredNorm() + (u - res.u).squaredNorm()));
        }
        const double floor = 1e-13 * (1.0 + std::sqrt(res.x.squaredNorm() + res.u.squaredNorm()));
        while (!err.empty() && err.back() <= floor) err.pop_back();
        REQUIRE(err.size() >= 3);
        const std::size_t k = err.size();
        CHECK(err[k - 1] / err[k - 2] < 0.1);
        CHECK(err[k - 2] / err[k - 3] < 0.1);
    }
    CHECK(qualifying >= 5);
}

TEST_CASE("resolved step sizes keep tau positive")
{
    const Subproblem sub = random_subproblem(4, 6, 1, 1.0, 2.0, 0.3);
    for (StepPolicy policy : {StepPolicy::blockwise, StepPolicy::joint}) {
        const StepSizes s = resolve_step_sizes(sub, policy, std::nullopt, std::nullopt);
        CHECK(s.tau > 0.0);
        CHECK(s.alpha > 0.0);
        CHECK(s.t > 0.0);
    }
    const StepSizes joint = resolve_step_sizes(sub, StepPolicy::joint, std::nullopt, std::nullopt);
    CHECK(joint.alpha == doctest::Approx(0.9 / joint.ell_g));
    CHECK(joint.t == doctest::Approx(1.0 / joint.ell_g));
    CHECK(joint.alpha < 1.0 / joint.ell_g);
    CHECK_THROWS_AS(resolve_step_sizes(sub, StepPolicy::joint, 10.0, std::nullopt), DomainError);
}

TEST_CASE("non-finite start is rejected")
{
    const Subproblem sub = random_subproblem(3, 4, 2, 1.0);
    const GsNewton solver(sub);
    Vector x = Vector::Zero(3);
    x[0] = std::nan("");
    CHECK_THROWS_AS(solver.solve(x, Vector::Zero(4), StopRule::tolerance(1e-8)), NonFiniteError);
    CHECK_THROWS_AS(solver.solve(Vector::Zero(2), Vector::Zero(4), StopRule::tolerance(1e-8)), DimensionError);
}

TEST_CASE("iteration cap is reported")
{
    const Subproblem sub = random_subproblem(6, 10, 8, 0.5);
    const GsNewton solver(sub);
    StopRule rule = StopRule::tolerance(0.0, 1);
    rule.absolute_tolerance = 0.0;
    const InnerResult res = solver.solve(Vector::Zero(6), Vector::Ones(10), rule);
    CHECK(res.status == InnerStatus::capped);
    CHECK(res.iterations == 1);
}
