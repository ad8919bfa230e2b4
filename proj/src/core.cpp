#include "dgrf/core.hpp"

namespace dgrf {

const char* to_string(ErrorCode code)
{
  switch (code) {
    case ErrorCode::domain: return "DomainError";
    case ErrorCode::config: return "ConfigError";
    case ErrorCode::not_positive_definite: return "NotPositiveDefinite";
    case ErrorCode::cap_exceeded: return "CapExceeded";
    case ErrorCode::embedding_failure: return "EmbeddingFailure";
    case ErrorCode::out_of_grid: return "OutOfGrid";
    case ErrorCode::support_clipped: return "SupportClipped";
    case ErrorCode::degenerate_ellipse: return "DegenerateEllipse";
    case ErrorCode::degenerate_field: return "DegenerateField";
    case ErrorCode::no_convergence: return "NoConvergence";
    case ErrorCode::aliasing: return "Aliasing";
    case ErrorCode::riemann_map_inaccurate: return "RiemannMapInaccurate";
    case ErrorCode::inversion_failure: return "InversionFailure";
    case ErrorCode::geometry: return "GeometryError";
    case ErrorCode::too_many_masked: return "TooManyMasked";
    case ErrorCode::numerical: return "NumericalError";
    case ErrorCode::io: return "IoError";
  }
  return "Error";
}

} // namespace dgrf
