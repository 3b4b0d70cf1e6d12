#include "zeroone/models.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace zeroone {

namespace {

void require_pm_one(const Eigen::Ref<const Matrix>& z, const char* what)
{
    for (Index j = 0; j < z.cols(); ++j) {
        for (Index i = 0; i < z.rows(); ++i) {
            if (z(i, j) != 1.0 && z(i, j) != -1.0) throw DomainError(std::string(what) + ": labels must be +1 or -1");
        }
    }
}

void require_bias_column(const LinearMap& x, const char* what)
{
    if (x.rows() == 0 || x.cols() == 0) throw DimensionError(std::string(what) + ": empty feature matrix");
    Vector e = Vector::Zero(x.cols());
    e[x.cols() - 1] = 1.0;
    const Vector last = x.apply(e);
    if ((last.array() != 1.0).any()) throw DomainError(std::string(what) + ": last feature column must be all ones");
}

double sign_pos(double v)
{
    return v >= 0.0 ? 1.0 : -1.0;
}

}  // namespace

void validate(const SvmDataset& data)
{
    if (!data.features) throw DomainError("SvmDataset: no features");
    require_same_size(data.labels.size(), data.m(), "SvmDataset labels");
    require_pm_one(data.labels, "SvmDataset");
    require_bias_column(*data.features, "SvmDataset");
}

void validate(const MlcDataset& data)
{
    if (!data.features) throw DomainError("MlcDataset: no features");
    require_same_size(data.labels.rows(), data.m(), "MlcDataset labels");
    if (data.labels.cols() < 1) throw DimensionError("MlcDataset: at least one label required");
    require_pm_one(data.labels, "MlcDataset");
    require_bias_column(*data.features, "MlcDataset");
}

SvmObjective::SvmObjective(Index n, double theta) : n_(n), theta_(theta)
{
    if (n < 1) throw DimensionError("SvmObjective: n must be positive");
    if (!(theta > 0.0) || !std::isfinite(theta)) throw DomainError("SvmObjective: theta must be positive");
}

double SvmObjective::value(const Vector& x) const
{
    require_same_size(x.size(), n_, "SvmObjective::value");
    const double last = x[n_ - 1];
    return 0.5 * (x.head(n_ - 1).squaredNorm() + theta_ * last * last);
}

Vector SvmObjective::gradient(const Vector& x) const
{
    require_same_size(x.size(), n_, "SvmObjective::gradient");
    Vector g = x;
    g[n_ - 1] *= theta_;
    return g;
}

Vector SvmObjective::hessian_diag(const Vector& x) const
{
    require_same_size(x.size(), n_, "SvmObjective::hessian_diag");
    Vector d = Vector::Ones(n_);
    d[n_ - 1] = theta_;
    return d;
}

MlcObjective::MlcObjective(Vector weights, double theta0) : weights_(std::move(weights)), theta0_(theta0)
{
    if (weights_.size() < 1) throw DimensionError("MlcObjective: empty weights");
    if (!(theta0_ > 0.0) || !std::isfinite(theta0_)) throw DomainError("MlcObjective: theta0 must be positive");
    if (!weights_.allFinite() || (weights_.array() <= 0.0).any()) {
        throw DomainError("MlcObjective: weights must be positive");
    }
}

double MlcObjective::value(const Vector& x) const
{
    require_same_size(x.size(), dim(), "MlcObjective::value");
    return weights_.dot((x.array().square() + theta0_).sqrt().matrix());
}

Vector MlcObjective::gradient(const Vector& x) const
{
    require_same_size(x.size(), dim(), "MlcObjective::gradient");
    return (weights_.array() * x.array() / (x.array().square() + theta0_).sqrt()).matrix();
}

Vector MlcObjective::hessian_diag(const Vector& x) const
{
    require_same_size(x.size(), dim(), "MlcObjective::hessian_diag");
    const Eigen::ArrayXd s = x.array().square() + theta0_;
    return (weights_.array() * theta0_ / (s * s.sqrt())).matrix();
}

double MlcObjective::ell_f() const
{
    return weights_.maxCoeff() / std::sqrt(theta0_);
}

double MlcObjective::big_l_f() const
{
    return 48.0 / (25.0 * std::sqrt(5.0)) * weights_.maxCoeff() / theta0_;
}

std::shared_ptr<const CompositeProblem> build_svm(const SvmDataset& data, double theta, double lambda)
{
    validate(data);
    auto f = std::make_shared<SvmObjective>(data.n(), theta);
    auto a = std::make_shared<LinearMap>(data.features->scale_rows(-data.labels));
    return std::make_shared<CompositeProblem>(std::move(f), std::move(a), Vector::Ones(data.m()), lambda);
}

std::shared_ptr<const CompositeProblem> build_mlc(const MlcDataset& data, double theta0, const Vector& weights,
                                                  double lambda)
{
    validate(data);
    require_same_size(weights.size(), data.n() * data.ell(), "build_mlc weights");
    auto f = std::make_shared<MlcObjective>(weights, theta0);
    auto a = std::make_shared<LinearMap>(LinearMap::block_diagonal(data.features, -data.labels));
    return std::make_shared<CompositeProblem>(std::move(f), std::move(a), Vector::Ones(data.m() * data.ell()),
                                              lambda);
}

Vector mlc_default_weights(Index n, Index ell)
{
    if (n < 1 || ell < 1) throw DimensionError("mlc_default_weights: n and ell must be positive");
    Vector w = Vector::Ones(n * ell);
    for (Index j = 0; j < ell; ++j) w[(j + 1) * n - 1] = 1e-2;
    return w;
}

double svm_accuracy(const SvmDataset& data, const Vector& x)
{
    require_same_size(x.size(), data.n(), "svm_accuracy");
    const Vector scores = data.features->apply(x);
    Index wrong = 0;
    for (Index i = 0; i < scores.size(); ++i) {
        if (sign_pos(scores[i]) != data.labels[i]) ++wrong;
    }
    return 1.0 - static_cast<double>(wrong) / static_cast<double>(data.m());
}

SvmMetrics svm_metrics(const SvmDataset& test, const Vector& x, const Vector& u_train)
{
    SvmMetrics out;
    out.acc = svm_accuracy(test, x);
    out.n_sv = (u_train.array().abs() <= 1e-8).count();
    return out;
}

Matrix mlc_scores(const MlcDataset& data, const Vector& x)
{
    require_same_size(x.size(), data.n() * data.ell(), "mlc_scores");
    Matrix scores(data.m(), data.ell());
    for (Index j = 0; j < data.ell(); ++j) scores.col(j) = data.features->apply(x.segment(j * data.n(), data.n()));
    return scores;
}

MlcMetrics mlc_metrics_from_scores(const Matrix& scores, const Matrix& labels)
{
    require_same_size(scores.rows(), labels.rows(), "mlc_metrics rows");
    require_same_size(scores.cols(), labels.cols(), "mlc_metrics cols");
    const Index m = scores.rows();
    const Index ell = scores.cols();
    if (m == 0 || ell == 0) throw DimensionError("mlc_metrics: empty score matrix");

    MlcMetrics out;
    Index mismatches = 0;
    double rl_sum = 0.0;
    double ap_sum = 0.0;
    Index counted = 0;
    std::vector<Index> order(static_cast<std::size_t>(ell));
    for (Index i = 0; i < m; ++i) {
        for (Index j = 0; j < ell; ++j) {
            if (sign_pos(scores(i, j)) != labels(i, j)) ++mismatches;
        }
        std::iota(order.begin(), order.end(), Index{0});
        std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) { return scores(i, a) > scores(i, b); });

        Index relevant = 0;
        for (Index j = 0; j < ell; ++j) relevant += labels(i, j) > 0.0 ? 1 : 0;
        const Index irrelevant = ell - relevant;
        if (relevant == 0 || irrelevant == 0) {
            ++out.skipped;
            continue;
        }

        // Walk the ranking once: each relevant label is misordered against
        // every irrelevant label ranked above it.
        Index irrelevant_above = 0;
        Index relevant_seen = 0;
        Index bad_pairs = 0;
        double precision_sum = 0.0;
        for (Index pos = 0; pos < ell; ++pos) {
            if (labels(i, order[static_cast<std::size_t>(pos)]) > 0.0) {
                ++relevant_seen;
                bad_pairs += irrelevant_above;
                precision_sum += static_cast<double>(relevant_seen) / static_cast<double>(pos + 1);
            } else {
                ++irrelevant_above;
            }
        }
        rl_sum += static_cast<double>(bad_pairs) / static_cast<double>(relevant * irrelevant);
        ap_sum += precision_sum / static_cast<double>(relevant);
        ++counted;
    }
    out.hl = static_cast<double>(mismatches) / static_cast<double>(m * ell);
    if (counted > 0) {
        out.rl = rl_sum / static_cast<double>(counted);
        out.ap = ap_sum / static_cast<double>(counted);
    } else {
        out.ap = 1.0;
    }
    return out;
}

MlcMetrics mlc_metrics(const MlcDataset& test, const Vector& x)
{
    return mlc_metrics_from_scores(mlc_scores(test, x), test.labels);
}

}  // namespace zeroone
