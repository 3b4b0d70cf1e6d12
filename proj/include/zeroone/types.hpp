#pragma once

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace zeroone {

using Index = Eigen::Index;
using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using CsrMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor, Index>;

/// Sorted, duplicate-free indices into a vector of known length.
using IndexSet = std::vector<Index>;

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Operand shapes do not agree.
class DimensionError : public Error {
public:
    using Error::Error;
};

/// A NaN or infinity appeared where only finite values are allowed.
class NonFiniteError : public Error {
public:
    using Error::Error;
};

/// Caller supplied an argument outside the operation's domain.
class DomainError : public Error {
public:
    using Error::Error;
};

/// An iterative method could not produce an acceptable iterate.
class SolverError : public Error {
public:
    using Error::Error;
};

inline void require_same_size(Index a, Index b, const char* what)
{
    if (a != b) {
        throw DimensionError(std::string(what) + ": size mismatch (" + std::to_string(a) + " vs " +
                             std::to_string(b) + ")");
    }
}

inline void require_finite(const Vector& v, const char* what)
{
    if (!v.allFinite()) {
        throw NonFiniteError(std::string(what) + ": non-finite entry");
    }
}

/// Complement of a sorted index set within [0, size).
IndexSet complement(const IndexSet& set, Index size);

/// Checks sortedness, uniqueness and bounds.
bool is_valid_index_set(const IndexSet& set, Index size);

/// Copy of v with the entries listed in set replaced by zero.
Vector zero_on(const Vector& v, const IndexSet& set);

/// Entries of v at the given indices, in order.
Vector gather(const Vector& v, const IndexSet& set);

}  // namespace zeroone
