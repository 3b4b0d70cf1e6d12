#include "zeroone/data.hpp"

#include "zeroone/rng.hpp"

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>

namespace zeroone {

ParseError::ParseError(const std::string& message, std::size_t line, std::size_t column)
    : Error("line " + std::to_string(line) + ", column " + std::to_string(column) + ": " + message),
      line_(line),
      column_(column)
{
}

namespace {

struct Token {
    std::string_view text;
    std::size_t column;  // 1-based
};

std::vector<Token> tokenize(std::string_view line)
{
    std::vector<Token> out;
    std::size_t i = 0;
    while (i < line.size()) {
        while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
        if (i >= line.size()) break;
        const std::size_t start = i;
        while (i < line.size() && line[i] != ' ' && line[i] != '\t' && line[i] != '\r') ++i;
        out.push_back({line.substr(start, i - start), start + 1});
    }
    return out;
}

bool parse_double(std::string_view text, double& value)
{
    if (text.empty()) return false;
    const std::string buf(text);
    char* end = nullptr;
    errno = 0;
    value = std::strtod(buf.c_str(), &end);
    return end == buf.c_str() + buf.size() && errno != ERANGE && std::isfinite(value);
}

bool parse_index(std::string_view text, long long& value)
{
    if (text.empty()) return false;
    const std::string buf(text);
    char* end = nullptr;
    errno = 0;
    value = std::strtoll(buf.c_str(), &end, 10);
    return end == buf.c_str() + buf.size() && errno != ERANGE;
}

std::string format_double(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace

RawDataset parse_libsvm(std::istream& in, std::optional<Index> n_hint, bool multilabel)
{
    RawDataset data;
    data.multilabel = multilabel;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::string_view view(line);
        if (const auto hash = view.find('#'); hash != std::string_view::npos) view = view.substr(0, hash);
        const std::vector<Token> tokens = tokenize(view);
        if (tokens.empty()) continue;

        RawRow row;
        std::size_t first_feature = 0;
        const Token& head = tokens.front();
        if (head.text.find(':') == std::string_view::npos) {
            first_feature = 1;
            if (multilabel) {
                std::size_t pos = 0;
                while (pos <= head.text.size()) {
                    const std::size_t comma = std::min(head.text.find(',', pos), head.text.size());
                    double label = 0.0;
                    if (!parse_double(head.text.substr(pos, comma - pos), label)) {
                        throw ParseError("malformed label list", line_no, head.column + pos);
                    }
                    row.labels.push_back(label);
                    pos = comma + 1;
                }
            } else {
                double label = 0.0;
                if (!parse_double(head.text, label)) throw ParseError("non-numeric label", line_no, head.column);
                row.labels.push_back(label);
            }
        } else if (!multilabel) {
            throw ParseError("missing label", line_no, head.column);
        }

        long long previous = 0;
        for (std::size_t t = first_feature; t < tokens.size(); ++t) {
            const Token& tok = tokens[t];
            const auto colon = tok.text.find(':');
            if (colon == std::string_view::npos) throw ParseError("expected index:value", line_no, tok.column);
            long long index = 0;
            if (!parse_index(tok.text.substr(0, colon), index) || index < 1) {
                throw ParseError("feature index must be a positive integer", line_no, tok.column);
            }
            if (index == previous) throw ParseError("duplicate feature index", line_no, tok.column);
            if (index < previous) throw ParseError("feature indices must be ascending", line_no, tok.column);
            double value = 0.0;
            if (!parse_double(tok.text.substr(colon + 1), value)) {
                throw ParseError("non-numeric feature value", line_no, tok.column);
            }
            row.features.emplace_back(static_cast<Index>(index - 1), value);
            previous = index;
        }
        data.n = std::max<Index>(data.n, static_cast<Index>(previous));
        data.rows.push_back(std::move(row));
    }
    if (n_hint) {
        if (*n_hint < data.n) {
            throw DomainError("parse_libsvm: feature index " + std::to_string(data.n) + " exceeds declared n " +
                              std::to_string(*n_hint));
        }
        data.n = *n_hint;
    }
    return data;
}

RawDataset read_libsvm_file(const std::string& path, std::optional<Index> n_hint, bool multilabel)
{
    std::ifstream in(path);
    if (!in) throw Error("cannot open " + path);
    return parse_libsvm(in, n_hint, multilabel);
}

void write_libsvm(std::ostream& out, const RawDataset& data)
{
    for (const RawRow& row : data.rows) {
        std::string line;
        for (std::size_t k = 0; k < row.labels.size(); ++k) {
            if (k > 0) line += ',';
            line += format_double(row.labels[k]);
        }
        if (!data.multilabel && row.labels.size() != 1) throw DomainError("write_libsvm: binary row needs one label");
        for (const auto& [index, value] : row.features) {
            if (!line.empty()) line += ' ';
            line += std::to_string(index + 1);
            line += ':';
            line += format_double(value);
        }
        out << line << '\n';
    }
}

namespace {

CsrMatrix features_with_bias(const RawDataset& raw)
{
    const Index m = static_cast<Index>(raw.rows.size());
    const Index n = raw.n + 1;
    std::vector<Eigen::Triplet<double, Index>> entries;
    for (Index i = 0; i < m; ++i) {
        for (const auto& [index, value] : raw.rows[static_cast<std::size_t>(i)].features) {
            if (index >= raw.n) throw DimensionError("feature index beyond n");
            if (value != 0.0) entries.emplace_back(i, index, value);
        }
        entries.emplace_back(i, n - 1, 1.0);
    }
    CsrMatrix x(m, n);
    x.setFromTriplets(entries.begin(), entries.end());
    return x;
}

RawRow raw_features(const Matrix& dense_row_source, Index i, Index n_features)
{
    RawRow row;
    for (Index j = 0; j < n_features; ++j) {
        const double v = dense_row_source(i, j);
        if (v != 0.0) row.features.emplace_back(j, v);
    }
    return row;
}

}  // namespace

SvmDataset to_svm_dataset(const RawDataset& raw)
{
    if (raw.multilabel) throw DomainError("to_svm_dataset: multi-label data");
    if (raw.rows.empty()) throw DimensionError("to_svm_dataset: no rows");
    SvmDataset out;
    out.features = std::make_shared<LinearMap>(LinearMap::csr(features_with_bias(raw)));
    out.labels.resize(static_cast<Index>(raw.rows.size()));
    for (std::size_t i = 0; i < raw.rows.size(); ++i) {
        out.labels[static_cast<Index>(i)] = raw.rows[i].labels.front() > 0.0 ? 1.0 : -1.0;
    }
    return out;
}

MlcDataset to_mlc_dataset(const RawDataset& raw, std::optional<Index> ell)
{
    if (raw.rows.empty()) throw DimensionError("to_mlc_dataset: no rows");
    Index max_label = -1;
    for (const RawRow& row : raw.rows) {
        for (double label : row.labels) {
            if (label < 0.0 || label != std::floor(label)) {
                throw DomainError("to_mlc_dataset: label ids must be nonnegative integers");
            }
            max_label = std::max(max_label, static_cast<Index>(label));
        }
    }
    const Index count = ell ? *ell : max_label + 1;
    if (count < 1 || max_label >= count) throw DomainError("to_mlc_dataset: label id out of range");

    MlcDataset out;
    out.features = std::make_shared<LinearMap>(LinearMap::csr(features_with_bias(raw)));
    out.labels = Matrix::Constant(static_cast<Index>(raw.rows.size()), count, -1.0);
    for (std::size_t i = 0; i < raw.rows.size(); ++i) {
        for (double label : raw.rows[i].labels) out.labels(static_cast<Index>(i), static_cast<Index>(label)) = 1.0;
    }
    return out;
}

RawDataset to_raw(const SvmDataset& data)
{
    RawDataset raw;
    raw.n = data.n() - 1;
    const Matrix x = data.features->to_dense();
    for (Index i = 0; i < data.m(); ++i) {
        RawRow row = raw_features(x, i, raw.n);
        row.labels.push_back(data.labels[i]);
        raw.rows.push_back(std::move(row));
    }
    return raw;
}

RawDataset to_raw(const MlcDataset& data)
{
    RawDataset raw;
    raw.multilabel = true;
    raw.n = data.n() - 1;
    const Matrix x = data.features->to_dense();
    for (Index i = 0; i < data.m(); ++i) {
        RawRow row = raw_features(x, i, raw.n);
        for (Index j = 0; j < data.ell(); ++j) {
            if (data.labels(i, j) > 0.0) row.labels.push_back(static_cast<double>(j));
        }
        raw.rows.push_back(std::move(row));
    }
    return raw;
}

namespace {

// Stream ids keep each random ingredient independent of the others, so
// changing e.g. the noise ratio does not perturb the samples.
enum : std::uint64_t { kParamStream = 0, kSampleStream = 1, kFlipStream = 2, kPermStream = 3 };

std::vector<Index> random_permutation(Index m, Philox4x32& rng)
{
    std::vector<Index> perm(static_cast<std::size_t>(m));
    std::iota(perm.begin(), perm.end(), Index{0});
    for (Index i = m - 1; i > 0; --i) {
        const auto j = static_cast<Index>(rng.below(static_cast<std::uint64_t>(i + 1)));
        std::swap(perm[static_cast<std::size_t>(i)], perm[static_cast<std::size_t>(j)]);
    }
    return perm;
}

}  // namespace

SyntheticSvm gen_svm_synthetic(Index m, Index n, double r, std::uint64_t seed)
{
    if (m < 2 || m % 2 != 0) throw DomainError("gen_svm_synthetic: m must be even and positive");
    if (n < 2) throw DomainError("gen_svm_synthetic: n must be at least 2");
    if (!(r >= 0.0) || !(r < 0.5)) throw DomainError("gen_svm_synthetic: noise ratio must lie in [0, 0.5)");

    const Index d = n - 1;
    Philox4x32 params(seed, kParamStream);
    Vector mean[2] = {Vector(d), Vector(d)};
    Vector stddev[2] = {Vector(d), Vector(d)};
    for (int c = 0; c < 2; ++c) {
        for (Index j = 0; j < d; ++j) mean[c][j] = params.normal();
    }
    for (int c = 0; c < 2; ++c) {
        for (Index j = 0; j < d; ++j) stddev[c][j] = std::sqrt(std::abs(params.normal()));
    }

    Philox4x32 samples(seed, kSampleStream);
    Matrix x(m, n);
    Vector clean(m);
    for (Index i = 0; i < m; ++i) {
        const int c = i < m / 2 ? 0 : 1;
        for (Index j = 0; j < d; ++j) x(i, j) = mean[c][j] + stddev[c][j] * samples.normal();
        x(i, d) = 1.0;
        clean[i] = c == 0 ? 1.0 : -1.0;
    }

    Philox4x32 flips(seed, kFlipStream);
    const auto n_flip = static_cast<Index>(std::floor(r * static_cast<double>(m) + 1e-9));
    const std::vector<Index> chosen = random_permutation(m, flips);
    Vector noisy = clean;
    std::vector<bool> is_flipped(static_cast<std::size_t>(m), false);
    for (Index k = 0; k < n_flip; ++k) {
        const Index i = chosen[static_cast<std::size_t>(k)];
        noisy[i] = -noisy[i];
        is_flipped[static_cast<std::size_t>(i)] = true;
    }

    Philox4x32 perm_rng(seed, kPermStream);
    const std::vector<Index> perm = random_permutation(m, perm_rng);
    Matrix xp(m, n);
    SyntheticSvm out;
    out.data.labels.resize(m);
    out.clean_labels.resize(m);
    for (Index i = 0; i < m; ++i) {
        const Index src = perm[static_cast<std::size_t>(i)];
        xp.row(i) = x.row(src);
        out.data.labels[i] = noisy[src];
        out.clean_labels[i] = clean[src];
        if (is_flipped[static_cast<std::size_t>(src)]) out.flipped.push_back(i);
    }
    out.data.features = std::make_shared<LinearMap>(LinearMap::dense(std::move(xp)));
    return out;
}

SyntheticMlc gen_mlc_synthetic(Index m, Index n, Index ell, std::uint64_t seed)
{
    if (m < 1 || n < 1 || ell < 1) throw DomainError("gen_mlc_synthetic: m, n and ell must be positive");
    Philox4x32 samples(seed, kSampleStream);
    Matrix x(m, n);
    for (Index i = 0; i < m; ++i) {
        for (Index j = 0; j + 1 < n; ++j) x(i, j) = samples.normal();
        x(i, n - 1) = 1.0;
    }
    Philox4x32 params(seed, kParamStream);
    SyntheticMlc out;
    out.w.resize(n, ell);
    for (Index j = 0; j < ell; ++j) {
        for (Index i = 0; i < n; ++i) out.w(i, j) = params.uniform(-1.0, 1.0);
    }
    const Matrix scores = x * out.w;
    const Matrix z = scores.unaryExpr([](double v) { return v >= 0.0 ? 1.0 : -1.0; });

    Philox4x32 perm_rng(seed, kPermStream);
    const std::vector<Index> perm = random_permutation(m, perm_rng);
    Matrix xp(m, n);
    out.data.labels.resize(m, ell);
    for (Index i = 0; i < m; ++i) {
        xp.row(i) = x.row(perm[static_cast<std::size_t>(i)]);
        out.data.labels.row(i) = z.row(perm[static_cast<std::size_t>(i)]);
    }
    out.data.features = std::make_shared<LinearMap>(LinearMap::dense(std::move(xp)));
    return out;
}

namespace {

/// Multiplies row i by row_scale[i] and column j by col_scale[j].
LinearMap rescale(const LinearMap& x, const Vector& row_scale, const Vector& col_scale)
{
    if (const Matrix* d = x.dense_matrix()) return LinearMap::dense(row_scale.asDiagonal() * (*d) * col_scale.asDiagonal());
    if (const CsrMatrix* s = x.csr_matrix()) {
        CsrMatrix out = *s;
        for (Index r = 0; r < out.outerSize(); ++r) {
            for (CsrMatrix::InnerIterator it(out, r); it; ++it) it.valueRef() *= row_scale[r] * col_scale[it.col()];
        }
        return LinearMap::csr(std::move(out));
    }
    throw DomainError("normalize: block-diagonal maps are not feature matrices");
}

LinearMap unit_rows(const LinearMap& x, NormalizeReport& report)
{
    const Index bias = x.cols() - 1;
    Vector norms = x.row_squared_norms();
    // Exclude the constant column from the row norm.
    const Vector last = x.apply(Vector::Unit(x.cols(), bias));
    norms -= last.cwiseProduct(last);
    Vector row_scale(x.rows());
    for (Index i = 0; i < x.rows(); ++i) {
        if (norms[i] > 0.0) {
            row_scale[i] = 1.0 / std::sqrt(norms[i]);
        } else {
            row_scale[i] = 1.0;
            ++report.zero_rows;
        }
    }
    // Rescale the bias column back to its original value.
    Vector col_scale = Vector::Ones(x.cols());
    LinearMap scaled = rescale(x, row_scale, col_scale);
    if (const Matrix* d = scaled.dense_matrix()) {
        Matrix m = *d;
        m.col(bias) = last;
        return LinearMap::dense(std::move(m));
    }
    CsrMatrix s = *scaled.csr_matrix();
    for (Index r = 0; r < s.outerSize(); ++r) {
        for (CsrMatrix::InnerIterator it(s, r); it; ++it) {
            if (it.col() == bias) it.valueRef() = last[r];
        }
    }
    return LinearMap::csr(std::move(s));
}

LinearMap unit_features(const LinearMap& x, NormalizeReport& report)
{
    const Vector norms = x.col_squared_norms();
    Vector col_scale = Vector::Ones(x.cols());
    for (Index j = 0; j + 1 < x.cols(); ++j) {
        if (norms[j] > 0.0) {
            col_scale[j] = 1.0 / std::sqrt(norms[j]);
        } else {
            ++report.zero_features;
        }
    }
    return rescale(x, Vector::Ones(x.rows()), col_scale);
}

LinearMap range_features(const LinearMap& x, NormalizeReport& report)
{
    Matrix d = x.to_dense();
    for (Index j = 0; j + 1 < d.cols(); ++j) {
        const double lo = d.col(j).minCoeff();
        const double hi = d.col(j).maxCoeff();
        if (!(hi > lo)) {
            ++report.zero_features;
            continue;
        }
        d.col(j) = ((d.col(j).array() - lo) * (2.0 / (hi - lo)) - 1.0).matrix();
    }
    return LinearMap::dense(std::move(d));
}

}  // namespace

LinearMap normalize(const LinearMap& features, NormalizeMode mode, NormalizeReport* report)
{
    if (features.cols() < 2) throw DimensionError("normalize: need at least one feature besides the constant");
    NormalizeReport local;
    NormalizeReport& rep = report ? *report : local;
    rep = {};
    switch (mode) {
    case NormalizeMode::unit_row:
        return unit_rows(features, rep);
    case NormalizeMode::sample_then_feature:
        return unit_features(unit_rows(features, rep), rep);
    case NormalizeMode::scale_to_range:
        return range_features(features, rep);
    }
    throw DomainError("normalize: unknown mode");
}

SvmDataset normalize(const SvmDataset& data, NormalizeMode mode, NormalizeReport* report)
{
    return {std::make_shared<LinearMap>(normalize(*data.features, mode, report)), data.labels};
}

MlcDataset normalize(const MlcDataset& data, NormalizeMode mode, NormalizeReport* report)
{
    return {std::make_shared<LinearMap>(normalize(*data.features, mode, report)), data.labels};
}

NormalizeMode parse_normalize_mode(const std::string& name)
{
    if (name == "sample-then-feature") return NormalizeMode::sample_then_feature;
    if (name == "scale-to-range") return NormalizeMode::scale_to_range;
    if (name == "unit-row") return NormalizeMode::unit_row;
    throw DomainError("unknown normalization mode '" + name + "'");
}

std::vector<Fold> split_kfold(Index m, int k, std::uint64_t seed)
{
    if (k < 2) throw DomainError("split_kfold: k must be at least 2");
    if (m < k) throw DomainError("split_kfold: fewer samples than folds");
    Philox4x32 rng(seed, kPermStream);
    const std::vector<Index> perm = random_permutation(m, rng);
    std::vector<Fold> folds(static_cast<std::size_t>(k));
    const Index base = m / k;
    const Index extra = m % k;
    Index start = 0;
    for (Index f = 0; f < k; ++f) {
        const Index size = base + (f < extra ? 1 : 0);
        Fold& fold = folds[static_cast<std::size_t>(f)];
        fold.test.assign(perm.begin() + start, perm.begin() + start + size);
        std::sort(fold.test.begin(), fold.test.end());
        fold.train = complement(fold.test, m);
        start += size;
    }
    return folds;
}

SvmDataset subset(const SvmDataset& data, const IndexSet& rows)
{
    if (!is_valid_index_set(rows, data.m()) || rows.empty()) throw DimensionError("subset: invalid row set");
    return {std::make_shared<LinearMap>(data.features->row_submatrix(rows)), gather(data.labels, rows)};
}

MlcDataset subset(const MlcDataset& data, const IndexSet& rows)
{
    if (!is_valid_index_set(rows, data.m()) || rows.empty()) throw DimensionError("subset: invalid row set");
    Matrix labels(static_cast<Index>(rows.size()), data.ell());
    for (std::size_t k = 0; k < rows.size(); ++k) labels.row(static_cast<Index>(k)) = data.labels.row(rows[k]);
    return {std::make_shared<LinearMap>(data.features->row_submatrix(rows)), std::move(labels)};
}

IndexSet index_range(Index begin, Index end)
{
    IndexSet out;
    for (Index i = begin; i < end; ++i) out.push_back(i);
    return out;
}

}  // namespace zeroone
