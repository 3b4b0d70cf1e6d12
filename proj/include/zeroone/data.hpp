#pragma once

#include "zeroone/models.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace zeroone {

/// Malformed libsvm input; line and column are 1-based.
class ParseError : public Error {
public:
    ParseError(const std::string& message, std::size_t line, std::size_t column);

    std::size_t line() const noexcept { return line_; }
    std::size_t column() const noexcept { return column_; }

private:
    std::size_t line_;
    std::size_t column_;
};

struct RawRow {
    /// One label for binary data; the relevant label ids for multi-label data.
    std::vector<double> labels;
    /// 0-based feature index and value, indices strictly increasing.
    std::vector<std::pair<Index, double>> features;

    bool operator==(const RawRow&) const = default;
};

struct RawDataset {
    std::vector<RawRow> rows;
    Index n = 0;
    bool multilabel = false;

    bool operator==(const RawDataset&) const = default;
};

/// Reads "label idx:val idx:val ..." lines with 1-based ascending indices.
/// In multi-label mode the label field is a comma-separated list of label
/// ids (possibly absent). Blank lines and text after '#' are ignored.
/// n is the largest index seen, or n_hint when that is larger.
RawDataset parse_libsvm(std::istream& in, std::optional<Index> n_hint = std::nullopt, bool multilabel = false);

RawDataset read_libsvm_file(const std::string& path, std::optional<Index> n_hint = std::nullopt,
                            bool multilabel = false);

/// Inverse of parse_libsvm; values are written with round-trip precision.
void write_libsvm(std::ostream& out, const RawDataset& data);

/// Feature matrix with a constant-1 column appended; labels > 0 map to +1,
/// all others to -1.
SvmDataset to_svm_dataset(const RawDataset& raw);

/// Z(i, j) = +1 when j is listed for row i. ell defaults to 1 + max label id.
MlcDataset to_mlc_dataset(const RawDataset& raw, std::optional<Index> ell = std::nullopt);

/// Drop the constant column and write back to libsvm form.
RawDataset to_raw(const SvmDataset& data);
RawDataset to_raw(const MlcDataset& data);

struct SyntheticSvm {
    SvmDataset data;
    Vector clean_labels;  ///< labels before noise
    IndexSet flipped;     ///< rows whose label was flipped
};

/// Two Gaussian classes N(mu_1, Sigma_1), N(mu_2, Sigma_2) in n - 1 feature
/// dimensions plus the constant column, m/2 samples each. Means are standard
/// normal and Sigma_c = diag(|g|) for standard normal g. floor(r m) labels are
/// flipped, then rows are shuffled.
SyntheticSvm gen_svm_synthetic(Index m, Index n, double r, std::uint64_t seed);

struct SyntheticMlc {
    MlcDataset data;
    Matrix w;  ///< n x ell generating weights, Z = sgn(X W)
};

/// X = [randn(m, n-1), 1], W uniform on [-1, 1]^{n x ell}, Z = sgn(X W) with
/// sgn(0) = +1, rows of X and Z shuffled together.
SyntheticMlc gen_mlc_synthetic(Index m, Index n, Index ell, std::uint64_t seed);

enum class NormalizeMode { sample_then_feature, scale_to_range, unit_row };

struct NormalizeReport {
    Index zero_rows = 0;      ///< rows left untouched for having zero norm
    Index zero_features = 0;  ///< feature columns left untouched (zero norm or constant)
};

/// Applies the transform to every column except the last (constant) one.
///   unit_row: each row scaled to unit Euclidean norm.
///   sample_then_feature: unit_row, then each column scaled to unit norm.
///   scale_to_range: each column mapped affinely onto [-1, 1].
/// Multiplicative modes keep the storage layout; scale_to_range densifies.
LinearMap normalize(const LinearMap& features, NormalizeMode mode, NormalizeReport* report = nullptr);

SvmDataset normalize(const SvmDataset& data, NormalizeMode mode, NormalizeReport* report = nullptr);
MlcDataset normalize(const MlcDataset& data, NormalizeMode mode, NormalizeReport* report = nullptr);

NormalizeMode parse_normalize_mode(const std::string& name);

struct Fold {
    IndexSet train;
    IndexSet test;
};

/// Shuffled partition of [0, m) into k test folds whose sizes differ by at
/// most one; train is the complement of test.
std::vector<Fold> split_kfold(Index m, int k, std::uint64_t seed);

SvmDataset subset(const SvmDataset& data, const IndexSet& rows);
MlcDataset subset(const MlcDataset& data, const IndexSet& rows);

/// [begin, end) as an IndexSet.
IndexSet index_range(Index begin, Index end);

}  // namespace zeroone
