#pragma once

#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <foothold/metrics.h>
#include <foothold/scenario.h>

namespace foothold
{

enum class SweepParameter
{
  SwingTime,
  PushImpulse,
  /// Scales every sigma of the base scenario's noise profile.
  NoiseSigma,
};

const char * toString(SweepParameter p);
SweepParameter sweepParameterFromString(const std::string & s);

struct SweepSpec
{
  SweepParameter parameter = SweepParameter::SwingTime;
  std::vector<double> values;
  std::size_t repetitions = 1;
  std::filesystem::path baseScenario;
  /// Seed of repetition r is baseSeed + r; defaults to the scenario's seed.
  std::optional<std::uint64_t> baseSeed;
  std::vector<ScenarioOverride> overrides;

  void validate() const;
};

/// Relative scenario paths resolve against the sweep file's directory.
SweepSpec loadSweep(const std::filesystem::path & path);
SweepSpec parseSweep(const std::string & toml, const std::filesystem::path & baseDir = {});

/// Returns a copy of `config` with the swept parameter set to `value`.
ScenarioConfig applySweepValue(const ScenarioConfig & config, SweepParameter parameter, double value);

struct SweepRun
{
  double value = 0.;
  std::size_t repetition = 0;
  std::uint64_t seed = 0;
  MetricsSummary metrics;
};

struct SweepSummaryRow
{
  double value = 0.;
  std::size_t runs = 0;
  std::size_t successes = 0;
  double successRate = 0.;
  double meanIcpError = 0.;
  double maxIcpError = 0.;
  double maxCmpCop = 0.;
  double meanExplorationDuration = 0.;
};

struct SweepResult
{
  SweepParameter parameter = SweepParameter::SwingTime;
  /// Sorted by (value index, repetition).
  std::vector<SweepRun> runs;

  std::vector<SweepSummaryRow> summary() const;
};

/// Runs every (value, repetition) pair on `jobs` threads; the result does not depend on `jobs`.
SweepResult runSweep(const SweepSpec & spec, const ScenarioConfig & base, std::size_t jobs = 1);
SweepResult runSweep(const SweepSpec & spec, std::size_t jobs = 1);

void writeSummaryCsv(std::ostream & out, const SweepResult & result);
void writeRunsCsv(std::ostream & out, const SweepResult & result);

} // namespace foothold
