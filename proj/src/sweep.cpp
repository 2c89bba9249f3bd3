#include <foothold/sweep.h>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>
#include <thread>

#include <tomlplusplus/toml.hpp>

#include <foothold/error.h>

namespace foothold
{

namespace
{

[[noreturn]] void fail(const std::string & field, const std::string & what)
{
  throw Error(ErrorCode::InvalidConfig, field + ": " + what);
}

void flatten(const toml::table & t, const std::string & prefix, std::vector<ScenarioOverride> & out)
{
  for(const auto & [k, v] : t)
  {
    const std::string key = prefix.empty() ? std::string(k.str()) : prefix + "." + std::string(k.str());
    if(const auto * sub = v.as_table())
    {
      flatten(*sub, key, out);
    }
    else if(auto d = v.value<double>())
    {
      out.emplace_back(key, *d);
    }
    else if(auto b = v.value<bool>())
    {
      out.emplace_back(key, *b ? 1. : 0.);
    }
    else
    {
      fail("overrides." + key, "expected a number or boolean");
    }
  }
}

} // namespace

const char * toString(SweepParameter p)
{
  switch(p)
  {
    case SweepParameter::SwingTime:
      return "swing_time";
    case SweepParameter::PushImpulse:
      return "push_impulse";
    case SweepParameter::NoiseSigma:
      return "noise_sigma";
  }
  return "?";
}

SweepParameter sweepParameterFromString(const std::string & s)
{
  if(s == "swing_time")
  {
    return SweepParameter::SwingTime;
  }
  if(s == "push_impulse")
  {
    return SweepParameter::PushImpulse;
  }
  if(s == "noise_sigma")
  {
    return SweepParameter::NoiseSigma;
  }
  fail("parameter", "expected swing_time, push_impulse or noise_sigma");
}

void SweepSpec::validate() const
{
  if(values.empty())
  {
    fail("values", "must not be empty");
  }
  if(repetitions < 1)
  {
    fail("repetitions", "must be at least 1");
  }
  for(double v : values)
  {
    if(!std::isfinite(v))
    {
      fail("values", "must be finite");
    }
    if(parameter != SweepParameter::PushImpulse && !(v >= 0.))
    {
      fail("values", "must be non-negative");
    }
  }
}

SweepSpec parseSweep(const std::string & text, const std::filesystem::path & baseDir)
{
  toml::table root;
  try
  {
    root = toml::parse(text);
  }
  catch(const toml::parse_error & e)
  {
    std::ostringstream msg;
    msg << "TOML parse error at line " << e.source().begin.line << ": " << e.description();
    throw Error(ErrorCode::InvalidConfig, msg.str());
  }
  const std::set<std::string_view> allowed{"scenario", "parameter", "values", "repetitions", "base_seed", "overrides"};
  for(const auto & [k, v] : root)
  {
    if(!allowed.count(k.str()))
    {
      fail(std::string(k.str()), "unknown key");
    }
  }
  SweepSpec spec;
  const auto scenario = root["scenario"].value<std::string>();
  if(!scenario)
  {
    fail("scenario", "required path to the base scenario");
  }
  spec.baseScenario = std::filesystem::path(*scenario);
  if(spec.baseScenario.is_relative() && !baseDir.empty())
  {
    spec.baseScenario = baseDir / spec.baseScenario;
  }
  const auto parameter = root["parameter"].value<std::string>();
  if(!parameter)
  {
    fail("parameter", "required");
  }
  spec.parameter = sweepParameterFromString(*parameter);
  const toml::array * values = root["values"].as_array();
  if(!values)
  {
    fail("values", "expected an array of numbers");
  }
  for(const auto & e : *values)
  {
    const auto v = e.value<double>();
    if(!v)
    {
      fail("values", "expected an array of numbers");
    }
    spec.values.push_back(*v);
  }
  if(const toml::node * r = root.get("repetitions"))
  {
    const auto n = r->value<std::int64_t>();
    if(!n || *n < 1)
    {
      fail("repetitions", "expected a positive integer");
    }
    spec.repetitions = static_cast<std::size_t>(*n);
  }
  if(const toml::node * s = root.get("base_seed"))
  {
    const auto n = s->value<std::int64_t>();
    if(!n || *n < 0)
    {
      fail("base_seed", "expected a non-negative integer");
    }
    spec.baseSeed = static_cast<std::uint64_t>(*n);
  }
  if(const toml::node * o = root.get("overrides"))
  {
    if(!o->is_table())
    {
      fail("overrides", "expected a table");
    }
    flatten(*o->as_table(), "", spec.overrides);
  }
  spec.validate();
  return spec;
}

SweepSpec loadSweep(const std::filesystem::path & path)
{
  std::ifstream in(path);
  if(!in)
  {
    throw Error(ErrorCode::InvalidConfig, "cannot read sweep file '" + path.string() + "'");
  }
  std::ostringstream ss;
  ss << in.rdbuf();
  return parseSweep(ss.str(), path.parent_path());
}

ScenarioConfig applySweepValue(const ScenarioConfig & config, SweepParameter parameter, double value)
{
  ScenarioConfig c = config;
  switch(parameter)
  {
    case SweepParameter::SwingTime:
      c.swingTime = value;
      break;
    case SweepParameter::PushImpulse:
      if(c.pushes.empty())
      {
        fail("pushes", "a push_impulse sweep needs at least one push in the scenario");
      }
      for(auto & p : c.pushes)
      {
        const double n = p.impulse.norm();
        if(!(n > 0.))
        {
          fail("pushes", "a push_impulse sweep needs pushes with a direction");
        }
        p.impulse *= value / n;
      }
      break;
    case SweepParameter::NoiseSigma:
      c.noise = c.noise.scaled(value);
      break;
  }
  c.validate();
  return c;
}

std::vector<SweepSummaryRow> SweepResult::summary() const
{
  std::vector<SweepSummaryRow> rows;
  for(const auto & r : runs)
  {
    if(rows.empty() || rows.back().value != r.value)
    {
      rows.push_back({});
      rows.back().value = r.value;
    }
    SweepSummaryRow & s = rows.back();
    ++s.runs;
    s.successes += r.metrics.completed() ? 1 : 0;
    s.meanIcpError += r.metrics.meanIcpError;
    s.maxIcpError = std::max(s.maxIcpError, r.metrics.maxIcpError);
    s.maxCmpCop = std::max(s.maxCmpCop, r.metrics.maxCmpCopDistance);
    for(const auto & e : r.metrics.explorations)
    {
      s.meanExplorationDuration += e.duration;
    }
  }
  std::size_t k = 0;
  for(auto & s : rows)
  {
    std::size_t explorations = 0;
    for(std::size_t i = 0; i < s.runs; ++i)
    {
      explorations += runs[k + i].metrics.explorations.size();
    }
    k += s.runs;
    s.successRate = static_cast<double>(s.successes) / static_cast<double>(s.runs);
    s.meanIcpError /= static_cast<double>(s.runs);
    s.meanExplorationDuration = explorations ? s.meanExplorationDuration / static_cast<double>(explorations) : 0.;
  }
  return rows;
}

SweepResult runSweep(const SweepSpec & spec, const ScenarioConfig & base, std::size_t jobs)
{
  spec.validate();
  const std::uint64_t seed0 = spec.baseSeed.value_or(base.seed);
  std::vector<ScenarioConfig> configs;
  SweepResult result;
  result.parameter = spec.parameter;
  for(double v : spec.values)
  {
    const ScenarioConfig c = applySweepValue(base, spec.parameter, v);
    for(std::size_t r = 0; r < spec.repetitions; ++r)
    {
      ScenarioConfig cr = c;
      cr.seed = seed0 + r;
      configs.push_back(std::move(cr));
      SweepRun run;
      run.value = v;
      run.repetition = r;
      run.seed = seed0 + r;
      result.runs.push_back(run);
    }
  }

  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(configs.size());
  const auto worker = [&] {
    for(std::size_t i = next++; i < configs.size(); i = next++)
    {
      try
      {
        result.runs[i].metrics = computeMetrics(runScenario(configs[i]));
      }
      catch(...)
      {
        errors[i] = std::current_exception();
      }
    }
  };
  const std::size_t n = std::max<std::size_t>(1, std::min(jobs, configs.size()));
  std::vector<std::thread> threads;
  for(std::size_t t = 1; t < n; ++t)
  {
    threads.emplace_back(worker);
  }
  worker();
  for(auto & t : threads)
  {
    t.join();
  }
  for(const auto & e : errors)
  {
    if(e)
    {
      std::rethrow_exception(e);
    }
  }
  return result;
}

SweepResult runSweep(const SweepSpec & spec, std::size_t jobs)
{
  return runSweep(spec, loadScenario(spec.baseScenario, spec.overrides), jobs);
}

void writeSummaryCsv(std::ostream & out, const SweepResult & result)
{
  out << "value,runs,successes,success_rate,icp_error_mean,icp_error_max,cmp_cop_max,exploration_duration_mean\n";
  char line[256];
  for(const auto & s : result.summary())
  {
    std::snprintf(line, sizeof(line), "%.6g,%zu,%zu,%.6f,%.9f,%.9f,%.9f,%.6f\n", s.value, s.runs, s.successes,
                  s.successRate, s.meanIcpError, s.maxIcpError, s.maxCmpCop, s.meanExplorationDuration);
    out << line;
  }
}

void writeRunsCsv(std::ostream & out, const SweepResult & result)
{
  out << "value,repetition,seed,outcome,outcome_t,steps_completed,icp_error_mean,icp_error_max,cmp_cop_max\n";
  char line[256];
  for(const auto & r : result.runs)
  {
    std::snprintf(line, sizeof(line), "%.6g,%zu,%llu,%s,%.4f,%zu,%.9f,%.9f,%.9f\n", r.value, r.repetition,
                  static_cast<unsigned long long>(r.seed), toString(r.metrics.outcome.kind), r.metrics.outcome.t,
                  r.metrics.stepsCompleted, r.metrics.meanIcpError, r.metrics.maxIcpError,
                  r.metrics.maxCmpCopDistance);
    out << line;
  }
}

} // namespace foothold
