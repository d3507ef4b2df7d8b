#include "localest/rng.hpp"

#include "localest/error.hpp"

namespace localest {

std::uint64_t seed_derivation(std::uint64_t master_seed, std::uint64_t replicate_id,
                              std::uint16_t stream_tag) {
  if (replicate_id >= (std::uint64_t{1} << 48)) {
    throw Error(Errc::InvalidArgument, "replicate id must be below 2^48");
  }
  const std::uint64_t key = (replicate_id << 16) | stream_tag;
  return mix64(mix64(key) ^ mix64(master_seed + 0xd1b54a32d192ed03ULL));
}

std::string_view to_string(Errc code) noexcept {
  switch (code) {
    case Errc::InvalidArgument: return "InvalidArgument";
    case Errc::DomainTooSmall: return "DomainTooSmall";
    case Errc::NonConvergence: return "NonConvergence";
    case Errc::MomentConditionViolated: return "MomentConditionViolated";
    case Errc::NonPositiveDiffusivity: return "NonPositiveDiffusivity";
    case Errc::ZeroPivot: return "ZeroPivot";
    case Errc::ProbeOutsideDomain: return "ProbeOutsideDomain";
    case Errc::TruncationInsufficient: return "TruncationInsufficient";
    case Errc::AnalyticUnavailable: return "AnalyticUnavailable";
    case Errc::DegenerateInformation: return "DegenerateInformation";
    case Errc::ZeroModeDivergence: return "ZeroModeDivergence";
    case Errc::InternalInconsistency: return "InternalInconsistency";
    case Errc::DegeneratePsi: return "DegeneratePsi";
    case Errc::RouteDisagreement: return "RouteDisagreement";
    case Errc::OrderingViolated: return "OrderingViolated";
    case Errc::InvalidLevel: return "InvalidLevel";
    case Errc::UnknownPreset: return "UnknownPreset";
    case Errc::ConfigError: return "ConfigError";
    case Errc::IoError: return "IoError";
  }
  return "Unknown";
}

}  // namespace localest
