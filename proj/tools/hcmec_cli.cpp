// hcmec: run experiment sweeps and audit saved solutions.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "hcmec/experiment.hpp"
#include "hcmec/serialization.hpp"

namespace fs = std::filesystem;
using namespace hcmec;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitInfeasible = 3;

std::string
cell_name (const CellRecord &cell, SweepAxis axis)
{
  char buf[128];
  std::snprintf (buf, sizeof buf, "%s_%g_seed%llu_%s", to_string (axis), cell.axis,
                 static_cast<unsigned long long> (cell.seed), to_string (cell.result.protocol));
  return buf;
}

int
run_command (const std::string &config_path, const std::string &out_dir, const std::string &preset,
             const std::string &protocols, int jobs, bool save_states)
{
  ExperimentConfig cfg;
  try
    {
      Json doc = read_json_file (config_path);
      if (!doc.is_object ())
        throw ConfigError ("config: top level must be a JSON object");
      if (!preset.empty ())
        doc["preset"] = preset;
      if (!protocols.empty ())
        {
          Json list = Json::array ();
          std::stringstream ss (protocols);
          std::string item;
          while (std::getline (ss, item, ','))
            list.push_back (item);
          doc["protocols"] = list;
        }
      if (jobs > 0)
        doc["jobs"] = jobs;
      if (save_states)
        doc["save_states"] = true;
      if (!out_dir.empty ())
        doc["output_dir"] = out_dir;
      cfg = config_from_json (doc);
    }
  catch (const Json::exception &e)
    {
      std::cerr << "config error: " << e.what () << '\n';
      return kExitConfig;
    }
  catch (const std::exception &e)
    {
      std::cerr << "config error: " << e.what () << '\n';
      return kExitConfig;
    }

  const fs::path dir (cfg.output_dir);
  fs::create_directories (dir / "traces");
  if (cfg.save_states)
    fs::create_directories (dir / "states");
  write_json_file ((dir / "resolved_config.json").string (), config_to_json (cfg));

  bool any_infeasible = false;
  const SweepTable table = run_sweep (cfg, [&] (const CellRecord &cell) {
    const std::string name = cell_name (cell, cfg.axis);
    if (cell.infeasible)
      {
        any_infeasible = true;
        std::cerr << name << ": infeasible instance\n";
        return;
      }
    std::ofstream trace (dir / "traces" / (name + ".csv"));
    write_objective_csv (cell.result, trace);
    if (cfg.save_states)
      write_json_file ((dir / "states" / (name + ".json")).string (), solution_document (cell.scenario, cell.result));
  });
  emit_csv (table, (dir / "sweep.csv").string ());
  std::cout << "wrote " << table.rows.size () << " rows and " << table.aggregates.size () << " aggregate rows to "
            << (dir / "sweep.csv").string () << '\n';
  return any_infeasible ? kExitInfeasible : 0;
}

int
audit_command (const std::string &state_path, double eps)
{
  NetworkScenario sc;
  VariableState state;
  try
    {
      const Json doc = read_json_file (state_path);
      sc = doc.at ("scenario").get<NetworkScenario> ();
      state = doc.at ("state").get<VariableState> ();
      state.check_dimensions (sc);
    }
  catch (const std::exception &e)
    {
      std::cerr << "cannot read solution: " << e.what () << '\n';
      return kExitConfig;
    }
  const FeasibilityReport report = audit (state, sc, eps);
  const MetricsReport metrics = evaluate_metrics (state, sc, default_activity_threshold (sc));
  std::printf ("objective %.6g bit/s, average rate %.6g bit/s, worst delay %.6g s\n", metrics.objective,
               metrics.average_rate (), metrics.worst_delay ());
  for (const auto &v : report.violations ())
    std::printf ("violated: %s\n", v.c_str ());
  std::printf ("%s (%zu constraints, tolerance %g)\n", report.pass () ? "feasible" : "infeasible",
               report.entries.size (), eps);
  return report.pass () ? 0 : kExitInfeasible;
}

}  // namespace

int
main (int argc, char **argv)
{
  CLI::App app{"Joint communication/computation resource allocation for hybrid cloud/edge networks"};
  app.require_subcommand (1);

  std::string config_path, out_dir, preset, protocols;
  int jobs = 0;
  bool save_states = false;
  auto *run = app.add_subcommand ("run", "Run a configured sweep");
  run->add_option ("--config", config_path, "JSON experiment configuration")->required ();
  run->add_option ("--out", out_dir, "Output directory (overrides the config)");
  run->add_option ("--preset", preset, "Base preset")->check (CLI::IsMember ({"paper", "desk"}));
  run->add_option ("--protocols", protocols, "Comma-separated subset of fcp,pdp,fdp");
  run->add_option ("--jobs", jobs, "Concurrent sweep cells")->check (CLI::PositiveNumber);
  run->add_flag ("--save-states", save_states, "Write every final state for later auditing");

  std::string state_path;
  double eps = 1e-6;
  auto *aud = app.add_subcommand ("audit", "Re-check a saved solution against the original constraints");
  aud->add_option ("--state", state_path, "Solution JSON written by run --save-states")->required ();
  aud->add_option ("--eps", eps, "Relative slack tolerance");

  try
    {
      app.parse (argc, argv);
    }
  catch (const CLI::ParseError &e)
    {
      const int code = app.exit (e);
      return code == 0 ? 0 : kExitConfig;
    }

  if (*run)
    return run_command (config_path, out_dir, preset, protocols, jobs, save_states);
  return audit_command (state_path, eps);
}
