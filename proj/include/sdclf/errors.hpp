#pragma once

#include <stdexcept>
#include <string>

namespace sdclf {

struct Error : std::runtime_error {
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

struct SingularMatrix : Error {
  explicit SingularMatrix(const std::string& msg) : Error(msg) {}
};

struct NotSymmetric : Error {
  explicit NotSymmetric(const std::string& msg) : Error(msg) {}
};

struct NotPositiveDefinite : Error {
  explicit NotPositiveDefinite(const std::string& msg) : Error(msg) {}
};

struct DomainViolation : Error {
  explicit DomainViolation(const std::string& msg) : Error(msg) {}
};

struct NotHurwitz : Error {
  explicit NotHurwitz(const std::string& msg) : Error(msg) {}
};

struct BadParameter : Error {
  explicit BadParameter(const std::string& msg) : Error(msg) {}
};

struct CertificateFailed : Error {
  explicit CertificateFailed(const std::string& msg) : Error(msg) {}
};

struct InconsistentLinearization : Error {
  explicit InconsistentLinearization(const std::string& msg) : Error(msg) {}
};

struct IterationLimit : Error {
  explicit IterationLimit(const std::string& msg) : Error(msg) {}
};

struct DegenerateData : Error {
  explicit DegenerateData(const std::string& msg) : Error(msg) {}
};

struct IoError : Error {
  explicit IoError(const std::string& msg) : Error(msg) {}
};

}  // namespace sdclf
