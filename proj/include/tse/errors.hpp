#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace tse {

// Error categories map onto the CLI exit codes: 1 usage, 2 data, 3 numerical.
enum class ErrorKind { usage = 1, data = 2, numerical = 3 };

class Error : public std::runtime_error {
public:
  Error(ErrorKind kind, const std::string& msg)
      : std::runtime_error(msg), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

private:
  ErrorKind kind_;
};

struct UsageError : Error {
  explicit UsageError(const std::string& m) : Error(ErrorKind::usage, m) {}
};
struct DataError : Error {
  explicit DataError(const std::string& m) : Error(ErrorKind::data, m) {}
};
struct NumericalError : Error {
  explicit NumericalError(const std::string& m) : Error(ErrorKind::numerical, m) {}
};

// series
struct FileNotFound : DataError {
  explicit FileNotFound(const std::string& path)
      : DataError("file not found: " + path) {}
};
struct ParseError : DataError {
  ParseError(std::size_t row, std::size_t column, const std::string& what)
      : DataError("parse error at row " + std::to_string(row) + ", column " +
                  std::to_string(column) + ": " + what),
        row(row), column(column) {}
  std::size_t row;
  std::size_t column;
};
struct EmptySeries : DataError {
  explicit EmptySeries(const std::string& m = "series has fewer than 2 samples")
      : DataError(m) {}
};
struct InvalidFactor : UsageError {
  explicit InvalidFactor(double f)
      : UsageError("rescale factor must be positive and finite, got " +
                   std::to_string(f)) {}
};
struct SeriesTooShort : DataError {
  explicit SeriesTooShort(const std::string& m) : DataError(m) {}
};
struct NegativeEta : UsageError {
  explicit NegativeEta(double eta)
      : UsageError("noise amplitude must be >= 0, got " + std::to_string(eta)) {}
};

// corrsum
struct TooFewPoints : DataError {
  explicit TooFewPoints(const std::string& m) : DataError(m) {}
};
struct EmptyGrid : UsageError {
  explicit EmptyGrid() : UsageError("epsilon grid is empty") {}
};
struct MissingOrder : UsageError {
  explicit MissingOrder(int m)
      : UsageError("curve family lacks required order m=" + std::to_string(m)) {}
};
struct GridTooSmall : UsageError {
  explicit GridTooSmall(const std::string& m) : UsageError(m) {}
};

// ksg
struct MisalignedClouds : UsageError {
  explicit MisalignedClouds(const std::string& m) : UsageError(m) {}
};

// scalefit
struct CurveTooShort : DataError {
  explicit CurveTooShort(const std::string& m) : DataError(m) {}
};
struct TooFewFits : DataError {
  explicit TooFewFits(std::size_t n)
      : DataError("quality threshold needs >= 4 candidate fits, got " +
                  std::to_string(n)) {}
};

// decomp
struct WindowTooSmall : UsageError {
  explicit WindowTooSmall(const std::string& m) : UsageError(m) {}
};
struct NoPlateau : DataError {
  explicit NoPlateau(const std::string& m) : DataError(m) {}
};
struct NoUnitSlopeRange : DataError {
  explicit NoUnitSlopeRange(const std::string& m) : DataError(m) {}
};

// models
struct InvalidParams : UsageError {
  explicit InvalidParams(const std::string& m) : UsageError(m) {}
};
struct NumericalBlowup : NumericalError {
  explicit NumericalBlowup(const std::string& m) : NumericalError(m) {}
};
struct NonStationaryParams : UsageError {
  explicit NonStationaryParams(const std::string& m) : UsageError(m) {}
};
struct NotPositiveDefinite : NumericalError {
  explicit NotPositiveDefinite(const std::string& m) : NumericalError(m) {}
};

}  // namespace tse
