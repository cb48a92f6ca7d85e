#pragma once

#include <stdexcept>
#include <string>

namespace buckdr {

enum class Errc {
  PoleHit,
  DegenerateDenominator,
  AlgebraicLoop,
  ImproperTF,
  DimensionMismatch,
  InvalidRatio,
  InvalidParameter,
  Unrealizable,
  Infeasible,
  PlacementFailed,
  TooManyCoincident,
  IllPosed,
  SampledInstability,
  NumericalBlowup,
  HypothesisViolated,
  Validation,
  Io,
};

const char* errc_name(Errc code);

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace buckdr
