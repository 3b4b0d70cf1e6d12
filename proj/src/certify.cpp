#include "zeroone/certify.hpp"

#include "zeroone/prox01.hpp"
#include "zeroone/rng.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/QR>
#include <Eigen/SVD>
#include <json.hpp>

#include <algorithm>
#include <cmath>

namespace zeroone {

namespace {

constexpr Index kMaxCertifyDim = 2000;

void require_triple(const CompositeProblem& problem, const Vector& x, const Vector& u, const Vector& y,
                    const char* what)
{
    require_same_size(x.size(), problem.n(), what);
    require_same_size(u.size(), problem.m(), what);
    require_same_size(y.size(), problem.m(), what);
}

IndexSet merge(const IndexSet& a, const IndexSet& b)
{
    IndexSet out;
    std::merge(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
    return out;
}

/// Orthonormal basis of null(M) from a column-pivoted QR of M^T; columns of
/// R with |R_ii| <= 1e-10 sigma_max(M) count as rank deficient.
Matrix null_basis(const Matrix& m, Index n)
{
    if (m.rows() == 0) return Matrix::Identity(n, n);
    const double sigma_max = Eigen::BDCSVD<Matrix>(m).singularValues()(0);
    if (sigma_max == 0.0) return Matrix::Identity(n, n);
    Eigen::ColPivHouseholderQR<Matrix> qr(m.transpose());
    const Matrix& r = qr.matrixR();
    Index rank = 0;
    const Index diag = std::min(r.rows(), r.cols());
    while (rank < diag && std::abs(r(rank, rank)) > 1e-10 * sigma_max) ++rank;
    const Matrix q = qr.householderQ() * Matrix::Identity(n, n);
    return q.rightCols(n - rank);
}

double rayleigh(const Matrix& h, const Vector& d)
{
    return d.dot(h * d) / d.squaredNorm();
}

bool in_cone(const Matrix& a_zero, const Vector& d)
{
    return a_zero.rows() == 0 || (a_zero * d).maxCoeff() <= 0.0;
}

/// Everything sosc_verdict and sonc_check need to know about the cone.
struct ConeProbe {
    bool trivial = false;      ///< cone is {0}
    bool exact = false;        ///< I0 empty: cone is a subspace
    double min_q = kInf;       ///< smallest Rayleigh quotient seen
    Vector min_dir;            ///< its (unit) direction
    double lineality_min = kInf;
    Index lineality_dim = 0;
    int accepted = 0;
    int attempts = 0;
    ActiveClassification cls;
};

void offer(ConeProbe& probe, const Vector& d, double q)
{
    if (q < probe.min_q) {
        probe.min_q = q;
        probe.min_dir = d.normalized();
    }
}

ConeProbe probe_cone(const CompositeProblem& problem, const Vector& x, const Vector& u, const Vector& y,
                     const ConeOptions& options)
{
    require_triple(problem, x, u, y, "certifier");
    if (problem.n() > kMaxCertifyDim) throw DomainError("certifier is desk-scale only");
    if (options.samples < 0) throw DomainError("certifier: samples must be nonnegative");

    ConeProbe probe;
    probe.cls = classify_active(u, y, options.zero_tol);
    const Index n = problem.n();
    const Matrix a = problem.a_map->to_dense();
    const Matrix a_plus = a(probe.cls.i_plus, Eigen::all);
    const Matrix a_zero = a(probe.cls.i_zero, Eigen::all);
    Matrix h = problem.objective->hessian_dense(x);
    h = 0.5 * (h + h.transpose()).eval();

    const Matrix z = null_basis(a_plus, n);
    if (z.cols() == 0) {
        probe.trivial = true;
        return probe;
    }

    // Exact eigen-check on range(Z); its minimizer is a cone direction
    // whenever it or its negation satisfies A_{I0} d <= 0.
    Eigen::SelfAdjointEigenSolver<Matrix> reduced(z.transpose() * h * z);
    const Vector v_min = z * reduced.eigenvectors().col(0);
    probe.exact = probe.cls.i_zero.empty();
    if (probe.exact) {
        offer(probe, v_min, reduced.eigenvalues()(0));
        return probe;
    }
    if (in_cone(a_zero, v_min)) offer(probe, v_min, rayleigh(h, v_min));
    else if (in_cone(a_zero, -v_min)) offer(probe, -v_min, rayleigh(h, -v_min));

    const Matrix lin = null_basis(a(merge(probe.cls.i_plus, probe.cls.i_zero), Eigen::all), n);
    probe.lineality_dim = lin.cols();
    if (lin.cols() > 0) {
        Eigen::SelfAdjointEigenSolver<Matrix> lineality(lin.transpose() * h * lin);
        probe.lineality_min = lineality.eigenvalues()(0);
        offer(probe, lin * lineality.eigenvectors().col(0), probe.lineality_min);
    }

    // Isotropic directions in null(A_{I+}), sign-flipped or rejected until
    // A_{I0} d <= 0.
    Philox4x32 rng(options.seed, 0);
    const int max_attempts = 64 * std::max(options.samples, 1);
    Vector c(z.cols());
    while (probe.accepted < options.samples && probe.attempts < max_attempts) {
        ++probe.attempts;
        for (Index i = 0; i < c.size(); ++i) c[i] = rng.normal();
        Vector d = z * c;
        if (!in_cone(a_zero, d)) {
            d = -d;
            if (!in_cone(a_zero, d)) continue;
        }
        ++probe.accepted;
        offer(probe, d, rayleigh(h, d));
    }
    return probe;
}

std::string describe(const ConeProbe& p)
{
    std::string s = "|I+|=" + std::to_string(p.cls.i_plus.size()) + ", |I0|=" + std::to_string(p.cls.i_zero.size());
    if (p.trivial) return s + "; null(A_I+) is {0}, cone is {0}";
    if (p.exact) return s + "; cone is the subspace null(A_I+), exact eigen-check";
    s += "; lineality dim " + std::to_string(p.lineality_dim);
    s += "; sampled " + std::to_string(p.accepted) + " cone directions in " + std::to_string(p.attempts) + " draws";
    return s;
}

}  // namespace

PStationarity check_p_stationary(const CompositeProblem& problem, const Vector& x, const Vector& u, const Vector& y,
                                 double alpha, double tol)
{
    require_triple(problem, x, u, y, "check_p_stationary");
    if (!(alpha > 0.0)) throw DomainError("check_p_stationary: alpha must be positive");
    PStationarity out;
    out.stationarity = (problem.objective->gradient(x) + problem.a_map->apply_transpose(y)).norm();
    out.prox_gap = prox_set_distance(u, u + alpha * y, alpha * problem.lambda);
    out.feasibility = (problem.affine(x) - u).norm();
    out.max_violation = std::max({out.stationarity, out.prox_gap, out.feasibility});
    out.stationary = out.max_violation <= tol;
    return out;
}

double default_zero_tolerance(const Vector& u)
{
    return 1e-8 * (1.0 + (u.size() > 0 ? u.lpNorm<Eigen::Infinity>() : 0.0));
}

ActiveClassification classify_active(const Vector& u, const Vector& y, std::optional<double> tol)
{
    require_same_size(u.size(), y.size(), "classify_active");
    ActiveClassification out;
    out.tolerance = tol.value_or(default_zero_tolerance(u));
    if (!(out.tolerance >= 0.0)) throw DomainError("classify_active: tolerance must be nonnegative");
    const double t = out.tolerance;
    for (Index i = 0; i < u.size(); ++i) {
        if (u[i] <= t) out.i_minus.push_back(i);
        if (std::abs(u[i]) > t) continue;
        if (y[i] > t) out.i_plus.push_back(i);
        else if (y[i] < -t) out.violating.push_back(i);
        else out.i_zero.push_back(i);
    }
    return out;
}

bool strict_complementarity(const Vector& u, const Vector& y, double tol)
{
    require_same_size(u.size(), y.size(), "strict_complementarity");
    for (Index i = 0; i < u.size(); ++i) {
        if (!(std::abs(u[i]) + std::abs(y[i]) > tol)) return false;
    }
    return true;
}

std::string to_string(VerdictStatus status)
{
    switch (status) {
    case VerdictStatus::certified: return "Certified";
    case VerdictStatus::refuted: return "Refuted";
    case VerdictStatus::inconclusive: return "Inconclusive";
    }
    return "Inconclusive";
}

std::string to_json(const Verdict& verdict)
{
    nlohmann::ordered_json j;
    j["status"] = to_string(verdict.status);
    if (verdict.witness) j["witness"] = std::vector<double>(verdict.witness->begin(), verdict.witness->end());
    if (verdict.min_rayleigh && std::isfinite(*verdict.min_rayleigh)) j["min_rayleigh"] = *verdict.min_rayleigh;
    j["evidence"] = verdict.evidence;
    return j.dump();
}

Verdict sosc_verdict(const CompositeProblem& problem, const Vector& x, const Vector& u, const Vector& y,
                     const ConeOptions& options)
{
    const ConeProbe p = probe_cone(problem, x, u, y, options);
    Verdict v;
    v.evidence = describe(p);
    if (p.trivial) {
        v.status = VerdictStatus::certified;
        return v;
    }
    if (std::isfinite(p.min_q)) v.min_rayleigh = p.min_q;
    if (p.min_q <= 0.0) {
        v.status = VerdictStatus::refuted;
        v.witness = p.min_dir;
        return v;
    }
    if (p.exact) {
        // (0, tol] is positive but too close to call.
        v.status = p.min_q > options.tol ? VerdictStatus::certified : VerdictStatus::inconclusive;
        return v;
    }
    const bool lineality_ok = p.lineality_dim == 0 || p.lineality_min > options.tol;
    v.status = lineality_ok && p.accepted > 0 && p.min_q > options.tol ? VerdictStatus::certified
                                                                         : VerdictStatus::inconclusive;
    if (v.status == VerdictStatus::certified) v.evidence += "; positive on the lineality space and every sample";
    return v;
}

SoncResult sonc_check(const CompositeProblem& problem, const Vector& x, const Vector& u, const Vector& y,
                      const ConeOptions& options)
{
    const ConeProbe p = probe_cone(problem, x, u, y, options);
    SoncResult out;
    if (p.trivial) return out;
    out.min_quadratic = p.min_q;
    out.holds = !(p.min_q < -options.tol);
    if (!out.holds) out.witness = p.min_dir;
    return out;
}

bool brute_force_local_min(const CompositeProblem& problem, const Vector& x, const Vector& u, double radius, int grid)
{
    require_same_size(x.size(), problem.n(), "brute_force_local_min");
    require_same_size(u.size(), problem.m(), "brute_force_local_min");
    if (problem.n() + problem.m() > 6) throw DomainError("brute_force_local_min: requires n + m <= 6");
    if (grid < 1 || grid > 7) throw DomainError("brute_force_local_min: grid must be in [1, 7]");
    if (!(radius >= 0.0) || !std::isfinite(radius)) throw DomainError("brute_force_local_min: radius must be >= 0");
    if ((problem.affine(x) - u).norm() > 1e-8 * (1.0 + u.norm())) {
        throw DomainError("brute_force_local_min: u differs from A x + b");
    }

    const double center = problem.composite_value(x);
    const double slack = 1e-12 * (1.0 + std::abs(center));
    if (radius == 0.0 || grid == 1) return true;

    const Index n = problem.n();
    std::vector<int> digit(static_cast<std::size_t>(n), 0);
    Vector xp(n);
    while (true) {
        for (Index i = 0; i < n; ++i) {
            xp[i] = x[i] + radius * (-1.0 + 2.0 * digit[static_cast<std::size_t>(i)] / (grid - 1));
        }
        if (problem.composite_value(xp) < center - slack) return false;
        Index k = 0;
        while (k < n && ++digit[static_cast<std::size_t>(k)] == grid) digit[static_cast<std::size_t>(k++)] = 0;
        if (k == n) break;
    }
    return true;
}

double kkt_to_alpha_interval(const CompositeProblem& problem, const Vector& x, const Vector& u, const Vector& y,
                             double tol)
{
    require_triple(problem, x, u, y, "kkt_to_alpha_interval");
    if ((problem.objective->gradient(x) + problem.a_map->apply_transpose(y)).norm() > tol) {
        throw DomainError("kkt_to_alpha_interval: not a KKT point (stationarity grad f + A^T y = 0 violated)");
    }
    if ((problem.affine(x) - u).norm() > tol) {
        throw DomainError("kkt_to_alpha_interval: not a KKT point (feasibility A x + b = u violated)");
    }
    // The subdifferential is a cone, so y in lambda dh(u) iff y in dh(u).
    if (!subdiff_contains(u, y, tol)) {
        throw DomainError("kkt_to_alpha_interval: not a KKT point (y outside the subdifferential of lambda h at u)");
    }
    return alpha_star(u, y, problem.lambda).alpha;
}

}  // namespace zeroone
