#pragma once

#include <stdexcept>
#include <string>

namespace foothold
{

enum class ErrorCode
{
  EmptyPointSet,
  EmptyFoothold,
  DegenerateFit,
  ParallelPlanes,
  UnloadedFoot,
  NoFootsteps,
  DimensionMismatch,
  Infeasible,
  MaxIterations,
  InvalidConfig,
  InvalidArgument,
};

const char * toString(ErrorCode code);

/// Exception carrying a machine-readable code; what() is "<Code>: <message>".
class Error : public std::runtime_error
{
public:
  Error(ErrorCode code, const std::string & message);

  ErrorCode code() const noexcept { return code_; }

private:
  ErrorCode code_;
};

} // namespace foothold
