#include "zeroone/linear_map.hpp"

#include "zeroone/rng.hpp"

#include <algorithm>
#include <cmath>

namespace zeroone {

IndexSet complement(const IndexSet& set, Index size)
{
    IndexSet out;
    out.reserve(static_cast<std::size_t>(size) - std::min<std::size_t>(set.size(), size));
    auto it = set.begin();
    for (Index i = 0; i < size; ++i) {
        if (it != set.end() && *it == i) {
            ++it;
        } else {
            out.push_back(i);
        }
    }
    return out;
}

bool is_valid_index_set(const IndexSet& set, Index size)
{
    for (std::size_t k = 0; k < set.size(); ++k) {
        if (set[k] < 0 || set[k] >= size) return false;
        if (k > 0 && set[k] <= set[k - 1]) return false;
    }
    return true;
}

Vector zero_on(const Vector& v, const IndexSet& set)
{
    Vector out = v;
    for (Index i : set) out[i] = 0.0;
    return out;
}

Vector gather(const Vector& v, const IndexSet& set)
{
    Vector out(static_cast<Index>(set.size()));
    for (std::size_t k = 0; k < set.size(); ++k) out[static_cast<Index>(k)] = v[set[k]];
    return out;
}

LinearMap LinearMap::dense(Matrix m)
{
    const Index r = m.rows(), c = m.cols();
    return LinearMap(DenseRep{std::move(m)}, r, c);
}

LinearMap LinearMap::csr(CsrMatrix m)
{
    m.makeCompressed();
    const Index r = m.rows(), c = m.cols();
    return LinearMap(CsrRep{std::move(m)}, r, c);
}

LinearMap LinearMap::identity(Index n)
{
    CsrMatrix eye(n, n);
    eye.setIdentity();
    return csr(std::move(eye));
}

LinearMap LinearMap::block_diagonal(std::shared_ptr<const LinearMap> base, Matrix row_scales)
{
    if (!base) throw DomainError("block_diagonal: null base");
    if (base->kind() == Kind::block_diagonal) throw DomainError("block_diagonal: nested block base");
    require_same_size(row_scales.rows(), base->rows(), "block_diagonal row scales");
    if (row_scales.cols() < 1) throw DomainError("block_diagonal: need at least one block");
    const Index r = base->rows() * row_scales.cols();
    const Index c = base->cols() * row_scales.cols();
    return LinearMap(BlockRep{std::move(base), std::move(row_scales)}, r, c);
}

LinearMap::Kind LinearMap::kind() const noexcept
{
    switch (rep_.index()) {
    case 0: return Kind::dense;
    case 1: return Kind::csr;
    default: return Kind::block_diagonal;
    }
}

const Matrix* LinearMap::dense_matrix() const noexcept
{
    const auto* rep = std::get_if<DenseRep>(&rep_);
    return rep ? &rep->m : nullptr;
}

const CsrMatrix* LinearMap::csr_matrix() const noexcept
{
    const auto* rep = std::get_if<CsrRep>(&rep_);
    return rep ? &rep->m : nullptr;
}

Vector LinearMap::apply(const Vector& x) const
{
    require_same_size(x.size(), cols_, "LinearMap::apply");
    if (const auto* d = std::get_if<DenseRep>(&rep_)) return d->m * x;
    if (const auto* s = std::get_if<CsrRep>(&rep_)) return s->m * x;
    const auto& blk = std::get<BlockRep>(rep_);
    const Index p = blk.base->rows(), q = blk.base->cols();
    Vector out(rows_);
    for (Index j = 0; j < blk.scales.cols(); ++j) {
        out.segment(j * p, p) = blk.scales.col(j).cwiseProduct(blk.base->apply(x.segment(j * q, q)));
    }
    return out;
}

Vector LinearMap::apply_transpose(const Vector& v) const
{
    require_same_size(v.size(), rows_, "LinearMap::apply_transpose");
    if (const auto* d = std::get_if<DenseRep>(&rep_)) return d->m.transpose() * v;
    if (const auto* s = std::get_if<CsrRep>(&rep_)) return s->m.transpose() * v;
    const auto& blk = std::get<BlockRep>(rep_);
    const Index p = blk.base->rows(), q = blk.base->cols();
    Vector out(cols_);
    for (Index j = 0; j < blk.scales.cols(); ++j) {
        const Vector scaled = blk.scales.col(j).cwiseProduct(v.segment(j * p, p));
        out.segment(j * q, q) = blk.base->apply_transpose(scaled);
    }
    return out;
}

LinearMap LinearMap::row_submatrix(const IndexSet& rows) const
{
    if (!is_valid_index_set(rows, rows_)) throw DomainError("row_submatrix: invalid row set");
    const auto count = static_cast<Index>(rows.size());
    if (const auto* d = std::get_if<DenseRep>(&rep_)) {
        return dense(d->m(rows, Eigen::all));
    }
    using Triplet = Eigen::Triplet<double, Index>;
    std::vector<Triplet> entries;
    if (const auto* s = std::get_if<CsrRep>(&rep_)) {
        for (Index k = 0; k < count; ++k) {
            for (CsrMatrix::InnerIterator it(s->m, rows[static_cast<std::size_t>(k)]); it; ++it) {
                entries.emplace_back(k, it.col(), it.value());
            }
        }
    } else {
        const auto& blk = std::get<BlockRep>(rep_);
        const Index p = blk.base->rows(), q = blk.base->cols();
        for (Index k = 0; k < count; ++k) {
            const Index global = rows[static_cast<std::size_t>(k)];
            const Index j = global / p, local = global % p;
            const double scale = blk.scales(local, j);
            if (const Matrix* bd = blk.base->dense_matrix()) {
                for (Index c = 0; c < q; ++c) {
                    const double value = (*bd)(local, c);
                    if (value != 0.0) entries.emplace_back(k, j * q + c, scale * value);
                }
            } else {
                for (CsrMatrix::InnerIterator it(*blk.base->csr_matrix(), local); it; ++it) {
                    entries.emplace_back(k, j * q + it.col(), scale * it.value());
                }
            }
        }
    }
    CsrMatrix sub(count, cols_);
    sub.setFromTriplets(entries.begin(), entries.end());
    return csr(std::move(sub));
}

LinearMap LinearMap::scale_rows(const Vector& scale) const
{
    require_same_size(scale.size(), rows_, "LinearMap::scale_rows");
    if (const auto* d = std::get_if<DenseRep>(&rep_)) return dense(scale.asDiagonal() * d->m);
    if (const auto* s = std::get_if<CsrRep>(&rep_)) {
        CsrMatrix scaled = scale.asDiagonal() * s->m;
        return csr(std::move(scaled));
    }
    const auto& blk = std::get<BlockRep>(rep_);
    Matrix scales = blk.scales;
    const Index p = blk.base->rows();
    for (Index j = 0; j < scales.cols(); ++j) scales.col(j).array() *= scale.segment(j * p, p).array();
    return block_diagonal(blk.base, std::move(scales));
}

Vector LinearMap::row_squared_norms() const
{
    if (const auto* d = std::get_if<DenseRep>(&rep_)) return d->m.rowwise().squaredNorm();
    if (const auto* s = std::get_if<CsrRep>(&rep_)) {
        Vector out = Vector::Zero(rows_);
        for (Index r = 0; r < rows_; ++r) {
            for (CsrMatrix::InnerIterator it(s->m, r); it; ++it) out[r] += it.value() * it.value();
        }
        return out;
    }
    const auto& blk = std::get<BlockRep>(rep_);
    const Vector base_norms = blk.base->row_squared_norms();
    const Index p = blk.base->rows();
    Vector out(rows_);
    for (Index j = 0; j < blk.scales.cols(); ++j) {
        out.segment(j * p, p) = blk.scales.col(j).array().square() * base_norms.array();
    }
    return out;
}

Vector LinearMap::col_squared_norms() const
{
    if (const auto* d = std::get_if<DenseRep>(&rep_)) return d->m.colwise().squaredNorm().transpose();
    if (const auto* s = std::get_if<CsrRep>(&rep_)) {
        Vector out = Vector::Zero(cols_);
        for (Index r = 0; r < rows_; ++r) {
            for (CsrMatrix::InnerIterator it(s->m, r); it; ++it) out[it.col()] += it.value() * it.value();
        }
        return out;
    }
    const auto& blk = std::get<BlockRep>(rep_);
    const Index q = blk.base->cols();
    Vector out(cols_);
    for (Index j = 0; j < blk.scales.cols(); ++j) {
        const LinearMap scaled = blk.base->scale_rows(blk.scales.col(j));
        out.segment(j * q, q) = scaled.col_squared_norms();
    }
    return out;
}

Matrix LinearMap::to_dense() const
{
    if (const auto* d = std::get_if<DenseRep>(&rep_)) return d->m;
    if (const auto* s = std::get_if<CsrRep>(&rep_)) return Matrix(s->m);
    const auto& blk = std::get<BlockRep>(rep_);
    const Index p = blk.base->rows(), q = blk.base->cols();
    const Matrix base = blk.base->to_dense();
    Matrix out = Matrix::Zero(rows_, cols_);
    for (Index j = 0; j < blk.scales.cols(); ++j) {
        out.block(j * p, j * q, p, q) = blk.scales.col(j).asDiagonal() * base;
    }
    return out;
}

double spectral_norm_estimate(const LinearMap& a, int iters, std::uint64_t seed)
{
    if (iters < 1) throw DomainError("spectral_norm_estimate: iters must be >= 1");
    if (a.rows() == 0 || a.cols() == 0) throw DomainError("spectral_norm_estimate: zero-dimension map");
    Philox4x32 rng(seed);
    Vector v(a.cols());
    for (Index i = 0; i < v.size(); ++i) v[i] = rng.normal();
    v.normalize();
    for (int it = 0; it < iters; ++it) {
        const Vector w = a.apply_transpose(a.apply(v));
        const double norm = w.norm();
        if (norm == 0.0) return 0.0;
        v = w / norm;
    }
    return a.apply(v).norm();
}

double adjoint_consistency_probe(const LinearMap& a, int trials, std::uint64_t seed)
{
    if (trials < 1) throw DomainError("adjoint_consistency_probe: trials must be >= 1");
    Philox4x32 rng(seed, 1);
    double worst = 0.0;
    for (int t = 0; t < trials; ++t) {
        Vector x(a.cols()), v(a.rows());
        for (Index i = 0; i < x.size(); ++i) x[i] = rng.normal();
        for (Index i = 0; i < v.size(); ++i) v[i] = rng.normal();
        const double lhs = a.apply(x).dot(v);
        const double rhs = x.dot(a.apply_transpose(v));
        worst = std::max(worst, std::abs(lhs - rhs) / (1.0 + std::abs(lhs)));
    }
    return worst;
}

}  // namespace zeroone
