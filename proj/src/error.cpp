#include <foothold/error.h>

namespace foothold
{

const char * toString(ErrorCode code)
{
  switch(code)
  {
    case ErrorCode::EmptyPointSet: return "EmptyPointSet";
    case ErrorCode::EmptyFoothold: return "EmptyFoothold";
    case ErrorCode::DegenerateFit: return "DegenerateFit";
    case ErrorCode::ParallelPlanes: return "ParallelPlanes";
    case ErrorCode::UnloadedFoot: return "UnloadedFoot";
    case ErrorCode::NoFootsteps: return "NoFootsteps";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::Infeasible: return "Infeasible";
    case ErrorCode::MaxIterations: return "MaxIterations";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string & message)
: std::runtime_error(std::string(toString(code)) + ": " + message), code_(code)
{
}

} // namespace foothold
