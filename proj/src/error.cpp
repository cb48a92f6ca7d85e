#include "buckdr/error.hpp"

namespace buckdr {

const char* errc_name(Errc code) {
  switch (code) {
    case Errc::PoleHit: return "PoleHit";
    case Errc::DegenerateDenominator: return "DegenerateDenominator";
    case Errc::AlgebraicLoop: return "AlgebraicLoop";
    case Errc::ImproperTF: return "ImproperTF";
    case Errc::DimensionMismatch: return "DimensionMismatch";
    case Errc::InvalidRatio: return "InvalidRatio";
    case Errc::InvalidParameter: return "InvalidParameter";
    case Errc::Unrealizable: return "Unrealizable";
    case Errc::Infeasible: return "Infeasible";
    case Errc::PlacementFailed: return "PlacementFailed";
    case Errc::TooManyCoincident: return "TooManyCoincident";
    case Errc::IllPosed: return "IllPosed";
    case Errc::SampledInstability: return "SampledInstability";
    case Errc::NumericalBlowup: return "NumericalBlowup";
    case Errc::HypothesisViolated: return "HypothesisViolated";
    case Errc::Validation: return "Validation";
    case Errc::Io: return "Io";
  }
  return "Unknown";
}

}  // namespace buckdr
