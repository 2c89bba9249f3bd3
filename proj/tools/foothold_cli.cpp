#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include <foothold/error.h>
#include <foothold/metrics.h>
#include <foothold/runner.h>
#include <foothold/scenario.h>
#include <foothold/sweep.h>

namespace fs = std::filesystem;
using namespace foothold;

namespace
{

enum class Verbosity
{
  Quiet,
  Info,
  Debug,
};

Verbosity verbosity()
{
  const char * v = std::getenv("FOOTHOLD_LOG");
  if(!v)
  {
    return Verbosity::Info;
  }
  const std::string s(v);
  if(s == "quiet" || s == "0" || s == "error")
  {
    return Verbosity::Quiet;
  }
  if(s == "debug" || s == "2")
  {
    return Verbosity::Debug;
  }
  return Verbosity::Info;
}

void info(const std::string & msg)
{
  if(verbosity() >= Verbosity::Info)
  {
    std::cerr << "[foothold] " << msg << "\n";
  }
}

void debug(const std::string & msg)
{
  if(verbosity() >= Verbosity::Debug)
  {
    std::cerr << "[foothold:debug] " << msg << "\n";
  }
}

std::ofstream openOut(const fs::path & p)
{
  std::ofstream out(p, std::ios::binary);
  if(!out)
  {
    throw Error(ErrorCode::InvalidConfig, "cannot write '" + p.string() + "'");
  }
  return out;
}

int exitCode(const RunResult & r)
{
  return r.outcome.kind == OutcomeKind::Completed ? 0 : 2;
}

void writeRunFiles(const RunResult & r, const fs::path & dir)
{
  fs::create_directories(dir);
  const fs::path csv = dir / (r.name + ".csv");
  const fs::path json = dir / (r.name + ".json");
  {
    auto out = openOut(csv);
    r.log.writeCsv(out);
  }
  {
    auto out = openOut(json);
    out << r.sidecar().dump(2) << "\n";
  }
  info("wrote " + csv.string() + " and " + json.string());
  if(!r.qpDumps.empty())
  {
    const fs::path qp = dir / (r.name + ".qp.jsonl");
    auto out = openOut(qp);
    for(const auto & j : r.qpDumps)
    {
      out << j.dump() << "\n";
    }
    info("wrote " + std::to_string(r.qpDumps.size()) + " QP snapshots to " + qp.string());
  }
}

int cmdRun(const std::string & path, const std::string & outDir, std::optional<std::uint64_t> seed, bool qpDump)
{
  ScenarioConfig cfg = loadScenario(path);
  if(seed)
  {
    cfg.seed = *seed;
  }
  cfg.validate();
  debug("running '" + cfg.name + "' with seed " + std::to_string(cfg.seed));
  RunOptions opts;
  opts.qpDumpEvery = qpDump ? 1 : 0;
  const RunResult r = runScenario(cfg, opts);
  writeRunFiles(r, outDir);
  std::cout << toJson(computeMetrics(r)).dump(2) << std::endl;
  info(std::string(toString(r.outcome.kind)) +
       (r.outcome.reason.empty() ? std::string{} : " (" + r.outcome.reason + ")"));
  return exitCode(r);
}

int cmdSweep(const std::string & path, const std::string & outDir, std::size_t jobs)
{
  const SweepSpec spec = loadSweep(path);
  info("sweeping " + std::string(toString(spec.parameter)) + " over " + std::to_string(spec.values.size()) +
       " values x " + std::to_string(spec.repetitions) + " repetitions");
  const SweepResult result = runSweep(spec, jobs);
  fs::create_directories(outDir);
  const fs::path stem = fs::path(path).stem();
  const fs::path summary = fs::path(outDir) / (stem.string() + "_summary.csv");
  const fs::path runs = fs::path(outDir) / (stem.string() + "_runs.csv");
  {
    auto out = openOut(summary);
    writeSummaryCsv(out, result);
  }
  {
    auto out = openOut(runs);
    writeRunsCsv(out, result);
  }
  writeSummaryCsv(std::cout, result);
  info("wrote " + summary.string() + " and " + runs.string());
  return 0;
}

int cmdExplore(const std::string & path, const std::string & outDir)
{
  ScenarioConfig cfg = loadScenario(path);
  if(!cfg.explorationEnabled)
  {
    throw Error(ErrorCode::InvalidConfig, "exploration.enabled: explore needs a scenario with exploration on");
  }
  const RunResult r = runScenario(cfg);
  const MetricsSummary m = computeMetrics(r);
  nlohmann::json out;
  out["schema"] = "foothold.explore/1";
  out["name"] = r.name;
  out["outcome"] = toString(r.outcome.kind);
  out["reason"] = r.outcome.reason;
  out["explorations"] = nlohmann::json::array();
  for(std::size_t i = 0; i < r.explorations.size(); ++i)
  {
    const auto & e = r.explorations[i];
    nlohmann::json x;
    x["step"] = e.step;
    x["finished"] = e.finished;
    x["duration"] = e.trace.duration;
    x["final_foothold"] = polygonJson(e.trace.finalFoothold);
    x["true_contact"] = polygonJson(e.trueContact);
    if(m.explorations[i].lineError)
    {
      x["angle_error_deg"] = m.explorations[i].lineError->angleDeg;
      x["offset_error"] = m.explorations[i].lineError->offset;
    }
    if(m.explorations[i].pointError)
    {
      x["point_error"] = *m.explorations[i].pointError;
    }
    out["explorations"].push_back(x);
  }
  std::cout << out.dump(2) << std::endl;
  fs::create_directories(outDir);
  const fs::path trace = fs::path(outDir) / (r.name + ".exploration.json");
  {
    auto f = openOut(trace);
    nlohmann::json j = nlohmann::json::array();
    for(const auto & e : r.explorations)
    {
      j.push_back(toJson(e));
    }
    f << j.dump(2) << "\n";
  }
  info("wrote " + trace.string());
  return exitCode(r);
}

} // namespace

int main(int argc, char ** argv)
{
  CLI::App app{"Partial foothold walking harness"};
  app.require_subcommand(1);

  std::string scenario;
  std::string out = ".";
  std::optional<std::uint64_t> seed;
  bool qpDump = false;
  auto * run = app.add_subcommand("run", "Run one scenario and write its CSV and JSON logs");
  run->add_option("scenario", scenario, "Scenario TOML file")->required();
  run->add_option("--out", out, "Output directory");
  run->add_option("--seed", seed, "Override the scenario seed");
  run->add_flag("--qp-dump", qpDump, "Write the assembled QP of every tick");

  std::string sweepPath;
  std::string sweepOut = ".";
  std::size_t jobs = 1;
  auto * sweep = app.add_subcommand("sweep", "Run a parameter sweep and write summary CSVs");
  sweep->add_option("sweep", sweepPath, "Sweep TOML file")->required();
  sweep->add_option("--out", sweepOut, "Output directory");
  sweep->add_option("--jobs", jobs, "Worker threads")->check(CLI::PositiveNumber);

  std::string exploreScenario;
  std::string exploreOut = ".";
  auto * explore = app.add_subcommand("explore", "Run an exploration scenario and report the estimate");
  explore->add_option("scenario", exploreScenario, "Scenario TOML file")->required();
  explore->add_option("--out", exploreOut, "Output directory for the trace");

  try
  {
    app.parse(argc, argv);
  }
  catch(const CLI::ParseError & e)
  {
    return app.exit(e) == 0 ? 0 : 1;
  }

  try
  {
    if(*run)
    {
      return cmdRun(scenario, out, seed, qpDump);
    }
    if(*sweep)
    {
      return cmdSweep(sweepPath, sweepOut, jobs);
    }
    return cmdExplore(exploreScenario, exploreOut);
  }
  catch(const std::exception & e)
  {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
