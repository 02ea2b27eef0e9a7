#pragma once

#include <stdexcept>
#include <string>

namespace bayesio
{

enum class ErrorKind
{
  ZeroVector,
  AntipodalPoint,
  DomainError,
  Infeasible,
  Unbounded,
  NotPositiveDefinite,
  InteriorPoint,
  ZeroCone,
  OffBoundary,
  DegenerateChains,
  ZeroResultant,
  TooFewSamples,
  InvalidArgument,
  Io,
};

const char* to_string(ErrorKind kind) noexcept;

/// Single exception type for the library; callers branch on kind().
class Error : public std::runtime_error
{
public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind)
  {
  }

  ErrorKind kind() const noexcept { return kind_; }

private:
  ErrorKind kind_;
};

inline const char* to_string(ErrorKind kind) noexcept
{
  switch (kind) {
    case ErrorKind::ZeroVector: return "ZeroVector";
    case ErrorKind::AntipodalPoint: return "AntipodalPoint";
    case ErrorKind::DomainError: return "DomainError";
    case ErrorKind::Infeasible: return "Infeasible";
    case ErrorKind::Unbounded: return "Unbounded";
    case ErrorKind::NotPositiveDefinite: return "NotPositiveDefinite";
    case ErrorKind::InteriorPoint: return "InteriorPoint";
    case ErrorKind::ZeroCone: return "ZeroCone";
    case ErrorKind::OffBoundary: return "OffBoundary";
    case ErrorKind::DegenerateChains: return "DegenerateChains";
    case ErrorKind::ZeroResultant: return "ZeroResultant";
    case ErrorKind::TooFewSamples: return "TooFewSamples";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::Io: return "Io";
  }
  return "Unknown";
}

}  // namespace bayesio
