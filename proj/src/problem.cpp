#include "zeroone/problem.hpp"

#include "zeroone/prox01.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>

namespace zeroone {

Vector SmoothObjective::hessian_diag(const Vector&) const
{
    throw DomainError("hessian_diag: objective Hessian is not diagonal");
}

Vector SmoothObjective::hessian_matvec(const Vector& x, const Vector& v) const
{
    return hessian_diag(x).cwiseProduct(v);
}

Matrix SmoothObjective::hessian_dense(const Vector& x) const
{
    const Index n = dim();
    if (is_diagonal_hessian()) return hessian_diag(x).asDiagonal();
    Matrix h(n, n);
    Vector e = Vector::Zero(n);
    for (Index j = 0; j < n; ++j) {
        e[j] = 1.0;
        h.col(j) = hessian_matvec(x, e);
        e[j] = 0.0;
    }
    return 0.5 * (h + h.transpose());
}

QuadraticObjective::QuadraticObjective(Matrix q, Vector c) : q_(std::move(q)), c_(std::move(c))
{
    require_same_size(q_.rows(), c_.size(), "QuadraticObjective");
    require_same_size(q_.cols(), c_.size(), "QuadraticObjective");
    if (!q_.allFinite() || !c_.allFinite()) throw NonFiniteError("QuadraticObjective: non-finite data");
    if ((q_ - q_.transpose()).cwiseAbs().maxCoeff() > 1e-12 * (1.0 + q_.cwiseAbs().maxCoeff())) {
        throw DomainError("QuadraticObjective: Q must be symmetric");
    }
    diagonal_ = (q_ - Matrix(q_.diagonal().asDiagonal())).cwiseAbs().maxCoeff() == 0.0;
    Vector eig;
    if (diagonal_) {
        eig = q_.diagonal();
    } else {
        eig = Eigen::SelfAdjointEigenSolver<Matrix>(q_, Eigen::EigenvaluesOnly).eigenvalues();
    }
    sigma_f_ = std::max(0.0, -eig.minCoeff());
    ell_f_ = eig.cwiseAbs().maxCoeff();
}

double QuadraticObjective::value(const Vector& x) const
{
    require_same_size(x.size(), dim(), "QuadraticObjective::value");
    return 0.5 * x.dot(q_ * x) + c_.dot(x);
}

Vector QuadraticObjective::gradient(const Vector& x) const
{
    require_same_size(x.size(), dim(), "QuadraticObjective::gradient");
    return q_ * x + c_;
}

Vector QuadraticObjective::hessian_diag(const Vector& x) const
{
    if (!diagonal_) return SmoothObjective::hessian_diag(x);
    return q_.diagonal();
}

Vector QuadraticObjective::hessian_matvec(const Vector&, const Vector& v) const
{
    return q_ * v;
}

CompositeProblem::CompositeProblem(std::shared_ptr<const SmoothObjective> f, std::shared_ptr<const LinearMap> a,
                                   Vector b_, double lambda_)
    : objective(std::move(f)), a_map(std::move(a)), b(std::move(b_)), lambda(lambda_)
{
    if (!objective || !a_map) throw DomainError("CompositeProblem: null objective or map");
    require_same_size(objective->dim(), a_map->cols(), "CompositeProblem objective vs A columns");
    require_same_size(b.size(), a_map->rows(), "CompositeProblem b vs A rows");
    require_finite(b, "CompositeProblem b");
    if (!(lambda > 0.0) || !std::isfinite(lambda)) throw DomainError("CompositeProblem: lambda must be > 0");
}

Vector CompositeProblem::affine(const Vector& x) const
{
    return a_map->apply(x) + b;
}

double CompositeProblem::composite_value(const Vector& x) const
{
    return objective->value(x) + lambda * static_cast<double>(h_eval(affine(x)));
}

}  // namespace zeroone
