#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace localest {

enum class Errc {
  InvalidArgument,
  DomainTooSmall,
  NonConvergence,
  MomentConditionViolated,
  NonPositiveDiffusivity,
  ZeroPivot,
  ProbeOutsideDomain,
  TruncationInsufficient,
  AnalyticUnavailable,
  DegenerateInformation,
  ZeroModeDivergence,
  InternalInconsistency,
  DegeneratePsi,
  RouteDisagreement,
  OrderingViolated,
  InvalidLevel,
  UnknownPreset,
  ConfigError,
  IoError,
};

std::string_view to_string(Errc code) noexcept;

/// Library-wide exception; `code()` identifies the failure class.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace localest
