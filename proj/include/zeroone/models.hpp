#pragma once

#include "zeroone/problem.hpp"

#include <memory>

namespace zeroone {

/// Binary classification data. The last feature column is the constant 1.
struct SvmDataset {
    std::shared_ptr<const LinearMap> features;  ///< m x n
    Vector labels;                              ///< entries in {-1, +1}

    Index m() const { return features->rows(); }
    Index n() const { return features->cols(); }
};

/// Multi-label data: one +-1 column of Z per label, last feature column 1.
struct MlcDataset {
    std::shared_ptr<const LinearMap> features;  ///< m x n
    Matrix labels;                              ///< m x ell

    Index m() const { return features->rows(); }
    Index n() const { return features->cols(); }
    Index ell() const { return labels.cols(); }
};

/// Throws DomainError unless labels are +-1 and the last column is all ones.
void validate(const SvmDataset& data);
void validate(const MlcDataset& data);

/// f(x) = 1/2 (sum_{i<n} x_i^2 + theta x_n^2).
class SvmObjective final : public SmoothObjective {
public:
    SvmObjective(Index n, double theta);

    Index dim() const override { return n_; }
    double value(const Vector& x) const override;
    Vector gradient(const Vector& x) const override;
    bool is_diagonal_hessian() const override { return true; }
    Vector hessian_diag(const Vector& x) const override;
    double sigma_f() const override { return 0.0; }
    double ell_f() const override { return std::max(1.0, theta_); }
    double big_l_f() const override { return 0.0; }

private:
    Index n_;
    double theta_;
};

/// f(x) = sum_i w_i sqrt(x_i^2 + theta0), a smoothed weighted l1 norm.
///
/// Per coordinate, with s = x^2 + theta0:
///   f'   = w x / sqrt(s)
///   f''  = w theta0 s^{-3/2}            in (0, w / sqrt(theta0)]
///   f''' = -3 w theta0 x s^{-5/2}
/// |f'''| peaks at x^2 = theta0/4 with value (48 / (25 sqrt 5)) w / theta0,
/// which is the Hessian Lipschitz modulus.
class MlcObjective final : public SmoothObjective {
public:
    MlcObjective(Vector weights, double theta0);

    Index dim() const override { return weights_.size(); }
    double value(const Vector& x) const override;
    Vector gradient(const Vector& x) const override;
    bool is_diagonal_hessian() const override { return true; }
    Vector hessian_diag(const Vector& x) const override;
    double sigma_f() const override { return 0.0; }
    double ell_f() const override;
    double big_l_f() const override;

private:
    Vector weights_;
    double theta0_;
};

/// A = -diag(z) X, b = 1, so u_i = 1 - z_i <x_i, w>.
std::shared_ptr<const CompositeProblem> build_svm(const SvmDataset& data, double theta, double lambda);

/// Variables are the stacked label weight vectors (w^(1); ...; w^(ell)).
/// A is block diagonal with blocks -diag(z^(j)) X sharing X; b = 1.
std::shared_ptr<const CompositeProblem> build_mlc(const MlcDataset& data, double theta0, const Vector& weights,
                                                  double lambda);

/// Per-coordinate weights of length n * ell: 1e-2 on each block's last
/// (bias) coordinate, 1 elsewhere.
Vector mlc_default_weights(Index n, Index ell);

struct SvmMetrics {
    double acc = 0.0;
    Index n_sv = 0;
};

/// Accuracy 1 - |sgn(X x) - z|_0 / m on the given data with sgn(0) = +1.
double svm_accuracy(const SvmDataset& data, const Vector& x);

/// acc on `test`; n_sv counts |u_i| <= 1e-8 in the training solution u.
SvmMetrics svm_metrics(const SvmDataset& test, const Vector& x, const Vector& u_train);

struct MlcMetrics {
    double hl = 0.0;
    double rl = 0.0;
    double ap = 0.0;
    Index skipped = 0;  ///< samples without both a relevant and an irrelevant label
};

/// Label scores s_ij = <w^(j), x_i>, m x ell.
Matrix mlc_scores(const MlcDataset& data, const Vector& x);

/// Hamming loss from signs (sgn(0) = +1); ranking loss and average precision
/// from the scores. Label j outranks label k when s_j > s_k, or s_j = s_k and
/// j < k.
MlcMetrics mlc_metrics_from_scores(const Matrix& scores, const Matrix& labels);

MlcMetrics mlc_metrics(const MlcDataset& test, const Vector& x);

}  // namespace zeroone
