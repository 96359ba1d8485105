#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace berm {

// Base for every error raised by the library. Callers that only care about
// "something in berm failed" catch this.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
public:
    using Error::Error;
};

class DimensionMismatch : public Error {
public:
    using Error::Error;
};

class NonFiniteValue : public Error {
public:
    using Error::Error;
};

// Column `column` has zero population variance and cannot be standardized.
class ConstantColumn : public Error {
public:
    explicit ConstantColumn(std::size_t column)
        : Error("column " + std::to_string(column) + " has zero variance"), column_(column) {}
    std::size_t column() const noexcept { return column_; }

private:
    std::size_t column_;
};

class ConstantResponse : public Error {
public:
    ConstantResponse() : Error("response is constant; R^2 undefined") {}
};

// Coordinate descent ran out of sweeps. Carries the last iterate so callers
// can inspect how far from convergence the solver was.
class NoConvergence : public Error {
public:
    NoConvergence(int max_iter, Eigen::VectorXd last_beta, double max_change)
        : Error("coordinate descent did not converge in " + std::to_string(max_iter) +
                " sweeps (max coordinate change " + std::to_string(max_change) + ")"),
          max_iter_(max_iter),
          beta_(std::move(last_beta)),
          max_change_(max_change) {}
    int max_iter() const noexcept { return max_iter_; }
    const Eigen::VectorXd& last_beta() const noexcept { return beta_; }
    double max_change() const noexcept { return max_change_; }

private:
    int max_iter_;
    Eigen::VectorXd beta_;
    double max_change_;
};

class AllWeightsInfinite : public Error {
public:
    AllWeightsInfinite() : Error("every penalty weight is infinite; lambda grid undefined") {}
};

class AlphaZero : public Error {
public:
    AlphaZero() : Error("alpha == 0: lambda_max undefined, supply an explicit grid") {}
};

class DegenerateResample : public Error {
public:
    explicit DegenerateResample(int replicate)
        : Error("bootstrap replicate " + std::to_string(replicate) +
                " kept producing constant columns"),
          replicate_(replicate) {}
    int replicate() const noexcept { return replicate_; }

private:
    int replicate_;
};

class SingularCovariance : public Error {
public:
    SingularCovariance() : Error("sample covariance is singular") {}
};

class ZeroVariance : public Error {
public:
    ZeroVariance() : Error("sample has zero variance") {}
};

// Balanced accuracy needs both a positive and a negative class.
class UndefinedClass : public Error {
public:
    UndefinedClass() : Error("balanced accuracy undefined: one truth class is empty") {}
};

class TransformFitFailure : public Error {
public:
    using Error::Error;
};

class SchemaViolation : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

class MissingColumn : public Error {
public:
    explicit MissingColumn(const std::string& name) : Error("missing column '" + name + "'") {}
};

class TooFewRows : public Error {
public:
    TooFewRows(std::size_t have, std::size_t need)
        : Error("too few rows: have " + std::to_string(have) + ", need " + std::to_string(need)) {}
};

class UnparseableCell : public Error {
public:
    UnparseableCell(std::size_t row, std::string column, const std::string& text)
        : Error("row " + std::to_string(row) + ", column '" + column + "': cannot parse '" +
                text + "' as a number"),
          row_(row),
          column_(std::move(column)) {}
    std::size_t row() const noexcept { return row_; }
    const std::string& column() const noexcept { return column_; }

private:
    std::size_t row_;
    std::string column_;
};

}  // namespace berm
