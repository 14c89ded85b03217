#pragma once
#include <stdexcept>
#include <string>
#include <Eigen/Core>
#include <Eigen/SparseCore>

namespace sbcpn {

using Index = Eigen::Index;
using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
// Row i holds feature i across all samples; column j is sample j.
using SparseRowMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor, Index>;

// Largest block for which a restricted operator may be materialized densely.
inline constexpr Index kMaxDenseBlock = 512;

/// Raised when a caller breaks a documented precondition.
class ContractViolation : public std::logic_error
{
public:
    using std::logic_error::logic_error;
};

/// Raised on malformed input files or configuration documents.
class ParseError : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

inline void require(bool condition, const std::string& message)
{
    if (!condition) throw ContractViolation(message);
}

} // namespace sbcpn
