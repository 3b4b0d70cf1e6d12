#pragma once

#include "zeroone/types.hpp"

#include <cstdint>
#include <memory>
#include <variant>

namespace zeroone {

/// A real m x n linear operator with one of three storage layouts.
///
/// * dense: column-major Eigen matrix.
/// * csr: compressed sparse rows with sorted column indices.
/// * block-diagonal: `blocks` copies of a shared dense/csr base B (p x q) on
///   the diagonal, block j having its rows scaled by column j of a p x blocks
///   scale matrix. Rows of block j occupy [j*p, (j+1)*p), columns [j*q, (j+1)*q).
///
/// Instances are immutable once built.
class LinearMap {
public:
    enum class Kind { dense, csr, block_diagonal };

    static LinearMap dense(Matrix m);
    static LinearMap csr(CsrMatrix m);
    static LinearMap identity(Index n);
    static LinearMap block_diagonal(std::shared_ptr<const LinearMap> base, Matrix row_scales);

    Kind kind() const noexcept;
    Index rows() const noexcept { return rows_; }
    Index cols() const noexcept { return cols_; }

    Vector apply(const Vector& x) const;
    Vector apply_transpose(const Vector& v) const;

    /// Rows `rows` of the operator as a standalone dense or csr map.
    LinearMap row_submatrix(const IndexSet& rows) const;

    /// diag(scale) * this, same layout as *this.
    LinearMap scale_rows(const Vector& scale) const;

    Vector row_squared_norms() const;
    Vector col_squared_norms() const;

    Matrix to_dense() const;

    /// Direct access for the layouts that carry a matrix; null otherwise.
    const Matrix* dense_matrix() const noexcept;
    const CsrMatrix* csr_matrix() const noexcept;

private:
    struct DenseRep {
        Matrix m;
    };
    struct CsrRep {
        CsrMatrix m;
    };
    struct BlockRep {
        std::shared_ptr<const LinearMap> base;
        Matrix scales;
    };
    using Rep = std::variant<DenseRep, CsrRep, BlockRep>;

    LinearMap(Rep rep, Index rows, Index cols) : rep_(std::move(rep)), rows_(rows), cols_(cols) {}

    Rep rep_;
    Index rows_ = 0;
    Index cols_ = 0;
};

/// Power iteration on A^T A from a seeded random start. The returned value
/// ||A v|| / ||v|| never exceeds the largest singular value.
double spectral_norm_estimate(const LinearMap& a, int iters = 100, std::uint64_t seed = 0);

/// max over random (x, v) of |<Ax, v> - <x, A^T v>| / (1 + |<Ax, v>|).
double adjoint_consistency_probe(const LinearMap& a, int trials, std::uint64_t seed = 0);

}  // namespace zeroone
