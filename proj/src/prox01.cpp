#include "zeroone/prox01.hpp"

#include <algorithm>
#include <cmath>

namespace zeroone {

namespace {

void require_kappa(double kappa)
{
    if (!(kappa > 0.0) || !std::isfinite(kappa)) throw DomainError("prox: kappa must be positive and finite");
}

}  // namespace

Index h_eval(const Vector& u)
{
    return (u.array() > 0.0).count();
}

ScalarProx prox_scalar(double v, double kappa)
{
    require_kappa(kappa);
    const double threshold = std::sqrt(2.0 * kappa);
    if (v < 0.0) return {v, false};
    // Near the threshold the two branch values agree to rounding, so both
    // selections are flagged; the canonical one still follows [0, s).
    const bool tie = std::abs(0.5 * v * v - kappa) <= kTieTolerance * kappa;
    return {v < threshold ? 0.0 : v, tie};
}

ProxResult prox_vector(const Vector& v, double kappa)
{
    require_kappa(kappa);
    ProxResult out{Vector(v.size()), {}};
    for (Index i = 0; i < v.size(); ++i) {
        const auto [value, tie] = prox_scalar(v[i], kappa);
        out.point[i] = value;
        if (tie) out.tie_indices.push_back(i);
    }
    return out;
}

double moreau_scalar(double v, double kappa)
{
    require_kappa(kappa);
    if (v <= 0.0) return 0.0;
    if (v <= std::sqrt(2.0 * kappa)) return 0.5 * v * v;
    return kappa;
}

double moreau_vector(const Vector& v, double kappa)
{
    double total = 0.0;
    for (Index i = 0; i < v.size(); ++i) total += moreau_scalar(v[i], kappa);
    return total;
}

bool subdiff_contains(const Vector& u, const Vector& v, double tol)
{
    require_same_size(u.size(), v.size(), "subdiff_contains");
    for (Index i = 0; i < u.size(); ++i) {
        const bool on_kink = std::abs(u[i]) <= tol;
        if (on_kink ? (v[i] < -tol) : (std::abs(v[i]) > tol)) return false;
    }
    return true;
}

AlphaStar alpha_star(const Vector& u, const Vector& y, double lambda)
{
    require_same_size(u.size(), y.size(), "alpha_star");
    if (!(lambda > 0.0)) throw DomainError("alpha_star: lambda must be positive");
    AlphaStar out{kInf, kInf, kInf};
    for (Index i = 0; i < u.size(); ++i) {
        if (u[i] > 0.0) out.alpha_u = std::min(out.alpha_u, u[i] * u[i] / (2.0 * lambda));
        if (y[i] > 0.0) out.alpha_y = std::min(out.alpha_y, 2.0 * lambda / (y[i] * y[i]));
    }
    out.alpha = std::min(out.alpha_u, out.alpha_y);
    return out;
}

ResidualTriple residuals(const Vector& grad_x, const Vector& grad_u, const Vector& u, const IndexSet& gamma,
                         double alpha, double lambda)
{
    require_same_size(grad_u.size(), u.size(), "residuals");
    if (!is_valid_index_set(gamma, u.size())) throw DimensionError("residuals: active set out of range");
    if (!(alpha > 0.0)) throw DomainError("residuals: alpha must be positive");

    ResidualTriple r;
    r.r1 = grad_x.norm();

    double r2_sq = 0.0;
    auto it = gamma.begin();
    for (Index i = 0; i < u.size(); ++i) {
        if (it != gamma.end() && *it == i) {
            r2_sq += u[i] * u[i];
            ++it;
        } else {
            const double scaled = alpha * grad_u[i];
            r2_sq += scaled * scaled;
        }
    }
    r.r2 = std::sqrt(r2_sq);

    const double kappa = alpha * lambda;
    const double r3 = 0.5 * alpha * alpha * grad_u.squaredNorm() + kappa * static_cast<double>(h_eval(u)) -
                      moreau_vector(u - alpha * grad_u, kappa);
    if (r3 < -1e-8) throw Error("residuals: negative envelope gap " + std::to_string(r3));
    r.r3 = std::max(r3, 0.0);
    return r;
}

double prox_set_distance(const Vector& u, const Vector& w, double kappa)
{
    require_same_size(u.size(), w.size(), "prox_set_distance");
    const ProxResult prox = prox_vector(w, kappa);
    Vector diff = u - prox.point;
    for (Index i : prox.tie_indices) {
        // Two-valued coordinate: distance to the nearer of {0, w_i}.
        diff[i] = std::min(std::abs(u[i]), std::abs(u[i] - w[i]));
    }
    return diff.norm();
}

double foc_metric(const CompositeProblem& problem, const Vector& x, const Vector& u, const Vector& y, double alpha)
{
    if (!(alpha > 0.0)) throw DomainError("foc_metric: alpha must be positive");
    const double stationarity = (problem.objective->gradient(x) + problem.a_map->apply_transpose(y)).norm();
    const double prox_gap = prox_set_distance(u, u + alpha * y, alpha * problem.lambda);
    const double feasibility = (problem.affine(x) - u).norm();
    return std::max({stationarity, prox_gap, feasibility});
}

}  // namespace zeroone
