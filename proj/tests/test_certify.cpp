#include "test_support.hpp"

#include "zeroone/alm.hpp"
#include "zeroone/certify.hpp"

#include <doctest.h>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <memory>

using namespace zeroone;
using zeroone::testing::randn;
using zeroone::testing::Built;
using zeroone::testing::build_kkt;
using zeroone::testing::random_symmetric;

namespace {

Vector vec(std::initializer_list<double> xs)
{
    Vector v(static_cast<Index>(xs.size()));
    Index i = 0;
    for (double x : xs) v[i++] = x;
    return v;
}

std::shared_ptr<const CompositeProblem> quad(const Matrix& q, const Vector& c, const Matrix& a, const Vector& b,
                                             double lambda)
{
    return std::make_shared<CompositeProblem>(std::make_shared<QuadraticObjective>(q, c),
                                              std::make_shared<LinearMap>(LinearMap::dense(a)), b, lambda);
}

}  // namespace

TEST_CASE("P-stationarity of a hand-built triple")
{
    // f = x^2/2, A = 1, b = -1 at x = 0, u = -1, y = 0.
    auto p = quad(Matrix::Identity(1, 1), Vector::Zero(1), Matrix::Identity(1, 1), vec({-1}), 1.0);
    for (double alpha : {1e-3, 0.5, 1.0, 10.0, 1e3}) {
        const PStationarity s = check_p_stationary(*p, vec({0}), vec({-1}), vec({0}), alpha, 1e-12);
        CHECK(s.stationary);
        CHECK(s.max_violation == 0.0);
    }
    const PStationarity bad_y = check_p_stationary(*p, vec({0}), vec({-1}), vec({0.5}), 0.5, 1e-6);
    CHECK_FALSE(bad_y.stationary);
    CHECK(bad_y.stationarity == doctest::Approx(0.5));

    const PStationarity bad_u = check_p_stationary(*p, vec({0}), vec({-1 + 1e-2}), vec({0}), 0.5, 1e-6);
    CHECK_FALSE(bad_u.stationary);
    CHECK(bad_u.feasibility == doctest::Approx(1e-2));
    CHECK_THROWS_AS(check_p_stationary(*p, vec({0}), vec({-1}), vec({0}), 0.0, 1e-6), DomainError);
}

TEST_CASE("active set classification examples")
{
    const ActiveClassification a = classify_active(vec({-1, 0, 0}), vec({0, 0, 2}));
    CHECK(a.i_minus == IndexSet{0, 1, 2});
    CHECK(a.i_zero == IndexSet{1});
    CHECK(a.i_plus == IndexSet{2});
    CHECK(a.violating.empty());

    const ActiveClassification b = classify_active(vec({-1, -2, -0.5}), vec({0, 3, 0}));
    CHECK(b.i_zero.empty());
    CHECK(b.i_plus.empty());

    const ActiveClassification c = classify_active(vec({0}), vec({-1}));
    CHECK(c.i_zero.empty());
    CHECK(c.i_plus.empty());
    CHECK(c.violating == IndexSet{0});

    CHECK(default_zero_tolerance(vec({-3, 2})) == doctest::Approx(4e-8));
    const ActiveClassification d = classify_active(vec({1e-9, 5}), vec({1, 0}));
    CHECK(d.i_plus == IndexSet{0});
}

TEST_CASE("classification partitions the near-zero entries")
{
    Philox4x32 rng(17);
    for (int t = 0; t < 500; ++t) {
        Vector u(6), y(6);
        for (Index i = 0; i < 6; ++i) {
            u[i] = rng.uniform() < 0.5 ? 0.0 : rng.normal();
            y[i] = rng.uniform() < 0.3 ? 0.0 : rng.normal();
        }
        const ActiveClassification c = classify_active(u, y);
        IndexSet zero_u;
        for (Index i = 0; i < 6; ++i)
            if (std::abs(u[i]) <= c.tolerance) zero_u.push_back(i);
        IndexSet all;
        for (const IndexSet* s : {&c.i_zero, &c.i_plus, &c.violating}) all.insert(all.end(), s->begin(), s->end());
        std::sort(all.begin(), all.end());
        CHECK(all == zero_u);
        CHECK(std::adjacent_find(all.begin(), all.end()) == all.end());
    }
}

TEST_CASE("strict complementarity examples")
{
    CHECK(strict_complementarity(vec({0, 1}), vec({2, 0}), 1e-12));
    CHECK_FALSE(strict_complementarity(vec({0, 1}), vec({0, 0}), 1e-12));
    CHECK(strict_complementarity(vec({-1, 3, 2}), vec({0, 0, 0}), 1e-12));
}

TEST_CASE("SOSC with an identity Hessian is certified for any classification")
{
    Matrix a(3, 2);
    a << 1, 0, 0, 1, 1, 1;
    auto p = quad(Matrix::Identity(2, 2), Vector::Zero(2), a, Vector::Zero(3), 1.0);
    const std::vector<std::pair<Vector, Vector>> cases{
        {vec({-1, -1, -1}), vec({0, 0, 0})},  // cone = R^2
        {vec({0, -1, -1}), vec({1, 0, 0})},   // I+ = {0}
        {vec({0, -1, 0}), vec({0, 0, 0})},    // I0 = {0, 2}
        {vec({0, 0, -1}), vec({1, 0, 0})},    // I+ = {0}, I0 = {1}
    };
    for (const auto& [u, y] : cases) {
        const Verdict v = sosc_verdict(*p, Vector::Zero(2), u, y);
        CHECK(v.status == VerdictStatus::certified);
        CHECK_FALSE(v.witness);
    }
}

TEST_CASE("SOSC on diag(1, -1)")
{
    Matrix h = Matrix::Zero(2, 2);
    h(0, 0) = 1.0;
    h(1, 1) = -1.0;

    // I+ = {0} with row (0, 1): the cone is span e1.
    Matrix a(1, 2);
    a << 0, 1;
    auto p = quad(h, Vector::Zero(2), a, Vector::Zero(1), 1.0);
    const Verdict v = sosc_verdict(*p, Vector::Zero(2), vec({0}), vec({1}));
    CHECK(v.status == VerdictStatus::certified);
    REQUIRE(v.min_rayleigh);
    CHECK(*v.min_rayleigh == doctest::Approx(1.0));

    // Nothing active: the cone is R^2.
    const Verdict r = sosc_verdict(*p, Vector::Zero(2), vec({-1}), vec({0}));
    CHECK(r.status == VerdictStatus::refuted);
    REQUIRE(r.witness);
    CHECK(std::abs(std::abs((*r.witness)[1]) - 1.0) <= 1e-12);
    CHECK(std::abs((*r.witness)[0]) <= 1e-12);
    CHECK(to_string(r.status) == "Refuted");
}

TEST_CASE("SONC examples")
{
    Philox4x32 rng(3);
    const Matrix mm = randn(rng, 3, 3);
    const Matrix pd = mm * mm.transpose() + 0.5 * Matrix::Identity(3, 3);
    const Matrix a = randn(rng, 2, 3);
    auto p = quad(pd, Vector::Zero(3), a, Vector::Zero(2), 1.0);
    const SoncResult ok = sonc_check(*p, Vector::Zero(3), vec({-1, -1}), vec({0, 0}));
    CHECK(ok.holds);
    const double lmin = Eigen::SelfAdjointEigenSolver<Matrix>(pd).eigenvalues().minCoeff();
    CHECK(ok.min_quadratic >= lmin - 1e-10);

    Matrix ind = Matrix::Identity(3, 3);
    ind(2, 2) = -2.0;
    auto q = quad(ind, Vector::Zero(3), a, Vector::Zero(2), 1.0);
    const SoncResult bad = sonc_check(*q, Vector::Zero(3), vec({-1, -1}), vec({0, 0}));
    CHECK_FALSE(bad.holds);
    CHECK(bad.min_quadratic < 0.0);
    REQUIRE(bad.witness);
    CHECK(bad.witness->dot(ind * *bad.witness) < 0.0);

    // I+ = every row of an invertible A: the cone is {0}.
    auto e = quad(ind.topLeftCorner(2, 2), Vector::Zero(2), Matrix::Identity(2, 2), Vector::Zero(2), 1.0);
    const SoncResult empty = sonc_check(*e, Vector::Zero(2), vec({0, 0}), vec({1, 1}));
    CHECK(empty.holds);
    CHECK(empty.min_quadratic == kInf);
    const Verdict trivial = sosc_verdict(*e, Vector::Zero(2), vec({0, 0}), vec({1, 1}));
    CHECK(trivial.status == VerdictStatus::certified);
}

TEST_CASE("certifier refuses large instances")
{
    const Index n = 2001;
    auto f = std::make_shared<QuadraticObjective>(Matrix::Identity(n, n), Vector::Zero(n));
    auto p = std::make_shared<CompositeProblem>(f, std::make_shared<LinearMap>(LinearMap::dense(Matrix::Ones(1, n))),
                                                Vector::Zero(1), 1.0);
    try {
        sosc_verdict(*p, Vector::Zero(n), vec({-1}), vec({0}));
        FAIL("expected an error");
    } catch (const DomainError& e) {
        CHECK(std::string(e.what()) == "certifier is desk-scale only");
    }
}

TEST_CASE("refuting witnesses lie in the critical cone")
{
    Philox4x32 rng(2718);
    int refuted = 0;
    for (int t = 0; t < 200; ++t) {
        const Index n = 4, m = 5;
        std::vector<int> pattern(m);
        for (int& s : pattern) s = static_cast<int>(rng.below(4));
        const Matrix q = random_symmetric(rng, n, 0.3);
        const Built k = build_kkt(rng, n, m, q, 1.0, pattern);
        ConeOptions opts;
        opts.samples = 128;
        const Verdict v = sosc_verdict(*k.problem, k.x, k.u, k.y, opts);
        if (v.status != VerdictStatus::refuted) continue;
        ++refuted;
        REQUIRE(v.witness);
        const Vector& d = *v.witness;
        CHECK(d.norm() == doctest::Approx(1.0));
        CHECK(d.dot(q * d) <= 0.0);
        const ActiveClassification c = classify_active(k.u, k.y);
        const Matrix a = k.problem->a_map->to_dense();
        for (Index i : c.i_plus) CHECK(std::abs(a.row(i).dot(d)) <= 1e-10);
        for (Index i : c.i_zero) CHECK(a.row(i).dot(d) <= 1e-10);
    }
    CHECK(refuted > 10);
}

TEST_CASE("certified points are local minima on a fine grid")
{
    Philox4x32 rng(31415);
    int certified = 0;
    for (int t = 0; t < 500 && certified < 25; ++t) {
        const Index n = 3, m = 3;
        std::vector<int> pattern(m);
        for (int& s : pattern) s = static_cast<int>(rng.below(4));
        const Matrix q = random_symmetric(rng, n, 0.5);
        const Built k = build_kkt(rng, n, m, q, 1.0, pattern);
        const Verdict v = sosc_verdict(*k.problem, k.x, k.u, k.y);
        if (v.status != VerdictStatus::certified) continue;
        ++certified;
        CHECK(brute_force_local_min(*k.problem, k.x, k.u, 1e-3, 7));
    }
    CHECK(certified >= 20);
}

TEST_CASE("brute-force oracle examples")
{
    // f = (x - 1)^2 = x^2 - 2x + 1, written as Q = 2, c = -2 up to a constant;
    // u = x - 10 stays negative near x = 1.
    auto p = quad(2.0 * Matrix::Identity(1, 1), vec({-2}), Matrix::Identity(1, 1), vec({-10}), 1e-3);
    CHECK(brute_force_local_min(*p, vec({1}), vec({-9}), 0.1, 7));
    CHECK_FALSE(brute_force_local_min(*p, vec({1.05}), vec({-8.95}), 0.1, 7));
    CHECK(brute_force_local_min(*p, vec({3}), vec({-7}), 0.0, 7));

    auto big = quad(Matrix::Identity(4, 4), Vector::Zero(4), Matrix::Ones(3, 4), Vector::Zero(3), 1.0);
    CHECK_THROWS_AS(brute_force_local_min(*big, Vector::Zero(4), Vector::Zero(3), 0.1, 3), DomainError);
    CHECK_THROWS_AS(brute_force_local_min(*p, vec({1}), vec({-9}), 0.1, 8), DomainError);
    CHECK_THROWS_AS(brute_force_local_min(*p, vec({1}), vec({0}), 0.1, 3), DomainError);
}

TEST_CASE("alpha* of KKT triples")
{
    // The hand-built triple above: u = -1 < 0 and y = 0, so neither branch is
    // finite and every alpha works.
    auto p = quad(Matrix::Identity(1, 1), Vector::Zero(1), Matrix::Identity(1, 1), vec({-1}), 1.0);
    CHECK(kkt_to_alpha_interval(*p, vec({0}), vec({-1}), vec({0})) == kInf);
    CHECK(check_p_stationary(*p, vec({0}), vec({-1}), vec({0}), 1e6, 1e-12).stationary);

    // u = 0 with y = 2 > 0, lambda = 1: alpha* = 2 lambda / y^2 = 0.5.
    auto q = quad(Matrix::Identity(1, 1), vec({-2}), Matrix::Identity(1, 1), vec({0}), 1.0);
    CHECK(kkt_to_alpha_interval(*q, vec({0}), vec({0}), vec({2})) == doctest::Approx(0.5));

    // u <= 0, y = 0 in every coordinate.
    Matrix a(2, 1);
    a << 1, 2;
    auto r = quad(Matrix::Identity(1, 1), Vector::Zero(1), a, vec({-1, -2}), 1.0);
    CHECK(kkt_to_alpha_interval(*r, vec({0}), vec({-1, -2}), vec({0, 0})) == kInf);
}

TEST_CASE("non-KKT triples are rejected with the violated condition")
{
    auto p = quad(Matrix::Identity(1, 1), Vector::Zero(1), Matrix::Identity(1, 1), vec({-1}), 1.0);
    auto message = [&](const Vector& x, const Vector& u, const Vector& y) {
        try {
            kkt_to_alpha_interval(*p, x, u, y);
        } catch (const DomainError& e) {
            return std::string(e.what());
        }
        return std::string();
    };
    CHECK(message(vec({0}), vec({-1}), vec({0.5})).find("stationarity") != std::string::npos);
    CHECK(message(vec({0}), vec({-0.5}), vec({0})).find("feasibility") != std::string::npos);
    // x = 1 gives u = 0 with y = -1: stationary and feasible, but y < 0 at u = 0.
    CHECK(message(vec({1}), vec({0}), vec({-1})).find("subdifferential") != std::string::npos);
}

TEST_CASE("the alpha* interval is exact on random KKT triples")
{
    Philox4x32 rng(99);
    int finite = 0;
    for (int t = 0; t < 300; ++t) {
        const Index n = 3, m = 4;
        std::vector<int> pattern(m);
        for (int& s : pattern) s = static_cast<int>(rng.below(4));
        const double lambda = std::exp(rng.uniform(-1.0, 1.0));
        const Built k = build_kkt(rng, n, m, random_symmetric(rng, n, 2.0), lambda, pattern);
        const double a_star = kkt_to_alpha_interval(*k.problem, k.x, k.u, k.y);
        const double inside = std::isfinite(a_star) ? 0.5 * a_star : 1e3;
        CHECK(check_p_stationary(*k.problem, k.x, k.u, k.y, inside, 1e-9).stationary);
        if (std::isfinite(a_star)) {
            ++finite;
            const PStationarity out = check_p_stationary(*k.problem, k.x, k.u, k.y, 2.0 * a_star, 1e-9);
            CHECK_FALSE(out.stationary);
            CHECK(out.prox_gap > 1e-9);
        }
    }
    CHECK(finite > 100);
}

TEST_CASE("converged solves pass the P-stationarity check at ten times their FOC")
{
    int converged = 0;
    for (std::uint64_t seed = 0; seed < 8; ++seed) {
        auto p = zeroone::testing::random_softplus(10, 6, 900 + seed, 0.5);
        SolverConfig cfg;
        cfg.mu = 0.1;
        const SolveResult res = solve(p, cfg);
        if (res.status != SolveStatus::converged) continue;
        ++converged;
        const auto& s = res.solution;
        CHECK(check_p_stationary(*p, s.x, s.u, s.y, res.params.alpha(), 10.0 * res.foc).stationary);
    }
    CHECK(converged >= 4);
}

TEST_CASE("verdict JSON")
{
    Verdict v;
    v.status = VerdictStatus::refuted;
    v.witness = vec({0.6, -0.8});
    v.min_rayleigh = -1.0;
    v.evidence = "sampled";
    const auto j = nlohmann::ordered_json::parse(to_json(v));
    CHECK(j["status"] == "Refuted");
    CHECK(j["witness"].size() == 2);
    CHECK(j["min_rayleigh"].get<double>() == -1.0);
    CHECK(j["evidence"] == "sampled");

    Verdict c;
    c.status = VerdictStatus::inconclusive;
    c.evidence = "x";
    const auto k = nlohmann::ordered_json::parse(to_json(c));
    CHECK(k["status"] == "Inconclusive");
    CHECK_FALSE(k.contains("witness"));
    CHECK_FALSE(k.contains("min_rayleigh"));
    CHECK(to_string(VerdictStatus::certified) == "Certified");
}
