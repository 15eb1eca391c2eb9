#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace efe {

enum class Errc {
  InvalidArgument,
  AllZeroLikelihood,
  UnknownHypothesis,
  QuadratureFailure,
  FactorizationFailure,
  NonFiniteIntegrand,
  InvalidGeometry,
  OffGridQuery,
  OutOfDomain,
  EmptyCandidateSet,
  NoInformativeAction,
  MissingThreshold,
  NewtonDivergence,
  DegenerateMass,
  NonpositiveDiscriminability,
  ConfigValidation,
  MixedConfigs,
};

constexpr std::string_view to_string(Errc code) noexcept {
  switch (code) {
    case Errc::InvalidArgument: return "InvalidArgument";
    case Errc::AllZeroLikelihood: return "AllZeroLikelihood";
    case Errc::UnknownHypothesis: return "UnknownHypothesis";
    case Errc::QuadratureFailure: return "QuadratureFailure";
    case Errc::FactorizationFailure: return "FactorizationFailure";
    case Errc::NonFiniteIntegrand: return "NonFiniteIntegrand";
    case Errc::InvalidGeometry: return "InvalidGeometry";
    case Errc::OffGridQuery: return "OffGridQuery";
    case Errc::OutOfDomain: return "OutOfDomain";
    case Errc::EmptyCandidateSet: return "EmptyCandidateSet";
    case Errc::NoInformativeAction: return "NoInformativeAction";
    case Errc::MissingThreshold: return "MissingThreshold";
    case Errc::NewtonDivergence: return "NewtonDivergence";
    case Errc::DegenerateMass: return "DegenerateMass";
    case Errc::NonpositiveDiscriminability: return "NonpositiveDiscriminability";
    case Errc::ConfigValidation: return "ConfigValidation";
    case Errc::MixedConfigs: return "MixedConfigs";
  }
  return "Unknown";
}

/// Library-wide exception. Every failure path throws this with a code so
/// callers (and tests) can branch on the kind without parsing messages.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

inline void require(bool cond, Errc code, const std::string& what) {
  if (!cond) throw Error(code, what);
}

}  // namespace efe
