#pragma once

#include "zeroone/linear_map.hpp"
#include "zeroone/types.hpp"

#include <memory>

namespace zeroone {

/// Twice differentiable f: R^n -> R together with the curvature constants
/// the solvers need: weak-convexity modulus sigma_f (f + sigma_f/2 |x|^2 is
/// convex), gradient Lipschitz modulus ell_f and Hessian Lipschitz modulus L_f.
class SmoothObjective {
public:
    virtual ~SmoothObjective() = default;

    virtual Index dim() const = 0;
    virtual double value(const Vector& x) const = 0;
    virtual Vector gradient(const Vector& x) const = 0;

    virtual bool is_diagonal_hessian() const = 0;

    /// Only valid when is_diagonal_hessian(); throws otherwise.
    virtual Vector hessian_diag(const Vector& x) const;

    /// Hessian-vector product; the default uses hessian_diag.
    virtual Vector hessian_matvec(const Vector& x, const Vector& v) const;

    /// Dense Hessian assembled from hessian_diag or n Hessian-vector products.
    virtual Matrix hessian_dense(const Vector& x) const;

    virtual double sigma_f() const = 0;
    virtual double ell_f() const = 0;
    virtual double big_l_f() const = 0;
};

/// f(x) = 1/2 x^T Q x + c^T x with symmetric Q. The constants come from the
/// spectrum of Q: sigma_f = max(0, -lambda_min), ell_f = max |lambda|, L_f = 0.
class QuadraticObjective final : public SmoothObjective {
public:
    QuadraticObjective(Matrix q, Vector c);

    Index dim() const override { return c_.size(); }
    double value(const Vector& x) const override;
    Vector gradient(const Vector& x) const override;
    bool is_diagonal_hessian() const override { return diagonal_; }
    Vector hessian_diag(const Vector& x) const override;
    Vector hessian_matvec(const Vector& x, const Vector& v) const override;
    Matrix hessian_dense(const Vector&) const override { return q_; }
    double sigma_f() const override { return sigma_f_; }
    double ell_f() const override { return ell_f_; }
    double big_l_f() const override { return 0.0; }

    const Matrix& q() const { return q_; }
    const Vector& c() const { return c_; }

private:
    Matrix q_;
    Vector c_;
    bool diagonal_ = false;
    double sigma_f_ = 0.0;
    double ell_f_ = 0.0;
};

/// min_x f(x) + lambda * |(A x + b)_+|_0, stored with the splitting u = A x + b.
/// Immutable; share through shared_ptr<const CompositeProblem>.
struct CompositeProblem {
    std::shared_ptr<const SmoothObjective> objective;
    std::shared_ptr<const LinearMap> a_map;
    Vector b;
    double lambda = 1.0;

    CompositeProblem(std::shared_ptr<const SmoothObjective> f, std::shared_ptr<const LinearMap> a, Vector b_,
                     double lambda_);

    Index n() const { return a_map->cols(); }
    Index m() const { return a_map->rows(); }

    /// A x + b.
    Vector affine(const Vector& x) const;

    /// f(x) + lambda * h(A x + b).
    double composite_value(const Vector& x) const;
};

}  // namespace zeroone
