#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ascertain/config.hpp"
#include "ascertain/errors.hpp"
#include "ascertain/mc_oracle.hpp"
#include "ascertain/sensitivity.hpp"
#include "ascertain/svg.hpp"

namespace {

using namespace ascertain;

std::string pct(double fraction, int decimals = 1) {
  char buffer[48];
  std::snprintf(buffer, sizeof(buffer), "%.*f%%", decimals, fraction * 100.0);
  return buffer;
}

std::string num(double value, int decimals) {
  char buffer[48];
  std::snprintf(buffer, sizeof(buffer), "%.*f", decimals, value);
  return buffer;
}

std::string interval(const IntervalEstimate& e, int decimals) {
  return num(e.estimate, decimals) + "  (" + num(e.lower, decimals) + ", " +
         num(e.upper, decimals) + ")";
}

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out)
    throw std::runtime_error("cannot write output file '" + path.string() + "'");
  out << content;
}

CategoryCounts require_counts(const ProjectConfig& config) {
  if (!config.counts)
    throw config_error("config section 'counts' is required for this operation");
  return *config.counts;
}

void print_bias_report(const BiasEstimate& bias, const CategoryCounts& counts) {
  const double ci = bias.ci_level * 100.0;
  std::cout << "Ascertainment bias estimate (" << num(ci, 0) << "% CI)\n"
            << "  control category-2 share of confirmable events (rho_C):      "
            << num(bias.rho_control, 4) << "   ["
            << counts.control_cat2_total << "/"
            << counts.control_cat2_total + counts.control_cat3_total << "]\n"
            << "  intervention category-2 share of confirmable events (rho_I): "
            << num(bias.rho_intervention, 4) << "   ["
            << counts.intervention_cat2_total << "/"
            << counts.intervention_cat2_total + counts.intervention_cat3_total
            << "]\n"
            << "  bias ratio B = rho_I / rho_C:                 "
            << interval(bias.bias_ratio, 4) << "\n"
            << "  confirmation-dependent outcome fraction P:    "
            << interval(bias.category2_fraction, 4) << "\n"
            << "  event-count inflation k = 1 + P(B-1):         "
            << interval(bias.inflation, 4) << "\n"
            << "Note: B compares ascertainment-category composition between "
               "arms and carries\n"
            << "no information about the treatment effect, so it can be "
               "monitored blinded.\n";
}

int run_estimate_bias(const std::string& config_path,
                      std::optional<double> ci_level) {
  const ProjectConfig config = load_project_config(config_path);
  const CategoryCounts counts = require_counts(config);
  const double level = ci_level.value_or(config.ci_level);
  const BiasEstimate bias = estimate_bias(counts, level);
  print_bias_report(bias, counts);
  return 0;
}

void print_projection_report(const PowerProjection& p, const StudyDesign& design) {
  std::cout << "Power projection under ascertainment bias\n"
            << "  design: T = " << num(design.total_duration_months, 0)
            << " months, enrollment over first "
            << pct(design.recruitment_fraction, 0) << ", two-sided alpha = "
            << num(design.alpha, 3) << ", hypothesized hazard ratio "
            << num(design.hypothesized_hazard_ratio, 2) << "\n\n"
            << "Attrition and analysis sample sizes\n"
            << "  expected withdrawal by study end (W):  "
            << pct(p.sizes.loss_fraction, 2) << "\n"
            << "  protocol definition N*: control " << num(p.sizes.control_protocol, 1)
            << ", intervention " << num(p.sizes.intervention_protocol, 1) << "\n"
            << "  revised definition  N*: control " << num(p.sizes.control_revised, 1)
            << ", intervention " << num(p.sizes.intervention_revised, 1) << "\n\n"
            << "Monthly hazards\n"
            << "  protocol: outcome " << num(p.hazards_protocol.outcome, 6)
            << ", competing " << num(p.hazards_protocol.competing, 6) << "\n"
            << "  revised:  outcome " << num(p.hazards_revised.outcome, 6)
            << ", competing " << num(p.hazards_revised.competing, 6) << "\n\n"
            << "Expected events at study end (adjudication-scaled)\n"
            << "  protocol control:                 " << num(p.control_events, 1) << "\n"
            << "  protocol intervention (true):     "
            << num(p.intervention_true_events, 1) << "\n"
            << "  protocol intervention (observed): "
            << num(p.intervention_observed_events, 1) << "   [excess "
            << num(p.excess_events, 1) << "]\n"
            << "  revised control:                  "
            << num(p.control_events_revised, 1) << "\n"
            << "  revised intervention:             "
            << num(p.intervention_events_revised, 1) << "\n\n"
            << "Effective hazard ratio under bias: " << num(p.h_eff, 4)
            << "  (hypothesized " << num(design.hypothesized_hazard_ratio, 2)
            << ")\n";
  if (p.direction_reversed)
    std::cout << "  WARNING: bias is strong enough to push the apparent effect "
                 "to the other side of 1.\n";
  std::cout << "\nProjected power\n"
            << "  protocol definition: " << pct(p.power_protocol) << "\n"
            << "  revised definition:  " << pct(p.power_revised) << "\n";
  if (p.power_revised > p.power_protocol)
    std::cout << "The revised outcome definition yields the higher projected power ("
              << pct(p.power_revised) << " vs " << pct(p.power_protocol) << ").\n";
  else if (p.power_protocol > p.power_revised)
    std::cout << "The protocol outcome definition yields the higher projected power ("
              << pct(p.power_protocol) << " vs " << pct(p.power_revised) << ").\n";
  else
    std::cout << "Both outcome definitions project the same power ("
              << pct(p.power_protocol) << ").\n";
}

int run_project(const std::string& config_path, const std::string& out_dir) {
  const ProjectConfig config = load_project_config(config_path);
  const StrideBaseline baseline = stride_baseline_from(config);
  const PowerProjection projection =
      project(baseline.sample, baseline.rates_protocol, baseline.rates_revised,
              baseline.bias, baseline.adjudication_protocol,
              baseline.adjudication_revised, baseline.design, baseline.solver);
  print_projection_report(projection, baseline.design);
  if (!out_dir.empty()) {
    std::filesystem::create_directories(out_dir);
    const auto path = std::filesystem::path(out_dir) / "projection.json";
    write_file(path, projection_to_json(projection).dump(2) + "\n");
    std::cout << "\nwrote " << path.string() << "\n";
  }
  return 0;
}

SweepSpec resolve_sweep(const ProjectConfig& config, const std::string& name) {
  SweepSpec spec;
  const auto custom = config.custom_sweeps.find(name);
  if (custom != config.custom_sweeps.end()) {
    spec.mode = custom->second.mode;
    spec.axis = custom->second.axis;
    spec.outer = custom->second.outer;
  } else if (!named_sweep_definition(name, spec.mode, spec.axis, spec.outer)) {
    std::string what = "unknown sweep '" + name + "'; valid names:";
    for (const auto& valid : named_sweeps()) what += " " + valid;
    what += ", plus any sweep defined in the config 'sweeps' section";
    throw config_error(what);
  }
  if (spec.mode == SweepMode::stride_pipeline)
    spec.stride = stride_baseline_from(config);
  else
    spec.simplified = simplified_baseline_from(config);
  return spec;
}

void write_sweep_plot(const std::filesystem::path& path, const SweepSpec& spec,
                      const std::vector<SweepRow>& rows,
                      const std::string& name) {
  const int n_inner = spec.axis.count();
  std::vector<double> x;
  for (int i = 0; i < n_inner; ++i) x.push_back(spec.axis.value_at(i));

  std::vector<PlotSeries> series;
  if (!spec.outer) {
    PlotSeries protocol{"protocol", {}};
    PlotSeries revised{"revised", {}};
    for (const SweepRow& row : rows) {
      protocol.y.push_back(row.power_protocol);
      revised.y.push_back(row.power_revised);
    }
    series = {protocol, revised};
  } else {
    const int n_outer = spec.outer->count();
    for (int o = 0; o < n_outer; ++o) {
      PlotSeries s;
      s.label = std::string("protocol ") +
                sweep_parameter_name(spec.outer->parameter) + "=" +
                num(spec.outer->value_at(o), 2);
      for (int i = 0; i < n_inner; ++i)
        s.y.push_back(rows[o * n_inner + i].power_protocol);
      series.push_back(std::move(s));
    }
    PlotSeries revised{"revised", {}};
    for (int i = 0; i < n_inner; ++i)
      revised.y.push_back(rows[i].power_revised);
    series.push_back(std::move(revised));
  }
  write_file(path, line_plot_svg(name, sweep_parameter_name(spec.axis.parameter),
                                 "power", x, series));
}

int run_sweep(const std::string& config_path, const std::string& name,
              const std::string& out_dir, bool plots, int threads) {
  const ProjectConfig config = load_project_config(config_path);
  const SweepSpec spec = resolve_sweep(config, name);
  const std::vector<SweepRow> rows = run_sweep(spec, threads);

  std::filesystem::create_directories(out_dir.empty() ? "." : out_dir);
  const std::filesystem::path dir(out_dir.empty() ? "." : out_dir);
  const auto csv_path = dir / (name + ".csv");
  write_file(csv_path, sweep_to_table(spec, rows));
  std::cout << "wrote " << csv_path.string() << " (" << rows.size()
            << " rows)\n";
  if (plots) {
    const auto svg_path = dir / (name + ".svg");
    write_sweep_plot(svg_path, spec, rows, name);
    std::cout << "wrote " << svg_path.string() << "\n";
  }

  long failures = 0;
  for (const SweepRow& row : rows)
    if (!row.error.empty()) ++failures;
  if (failures > 0)
    std::cout << failures << " grid point(s) failed; see the error column.\n";
  return 0;
}

std::string mean_se(const MeanSe& value, int decimals) {
  return num(value.mean, decimals) + " (se " + num(value.se, decimals) + ")";
}

int run_simulate(const std::string& config_path, const std::string& out_dir,
                 std::optional<std::uint64_t> seed, int threads) {
  const ProjectConfig config = load_project_config(config_path);
  if (!config.simulation)
    throw config_error("config section 'simulation' is required for this operation");
  SimulationConfig sim = *config.simulation;
  if (seed) sim.seed = *seed;

  std::ofstream dump_stream;
  std::filesystem::path dump_path;
  std::string dump_dir = out_dir;
  if (dump_dir.empty() && config.dump_replications) dump_dir = ".";
  const bool want_dump = !dump_dir.empty();
  if (want_dump) {
    std::filesystem::create_directories(dump_dir);
    dump_path = std::filesystem::path(dump_dir) / "replications.csv";
    dump_stream.open(dump_path, std::ios::binary);
    if (!dump_stream)
      throw std::runtime_error("cannot write output file '" +
                               dump_path.string() + "'");
  }

  const SimulationSummary summary =
      simulate(sim, threads, want_dump ? &dump_stream : nullptr);

  std::cout << "Simulated " << summary.replications << " replication(s), "
            << sim.n_per_arm << " participants per arm, seed " << sim.seed
            << "\n"
            << "  control first outcome events (cat 1+2):       "
            << mean_se(summary.control_outcome_first, 2) << "\n"
            << "  intervention first outcome events (true):     "
            << mean_se(summary.intervention_outcome_first_true, 2) << "\n"
            << "  intervention first outcome events (observed): "
            << mean_se(summary.intervention_outcome_first_observed, 2) << "\n"
            << "  control first events, revised definition:     "
            << mean_se(summary.control_revised_first, 2) << "\n"
            << "  intervention first events, revised definition: "
            << mean_se(summary.intervention_revised_first, 2) << "\n"
            << "  empirical bias ratio B:  " << mean_se(summary.bias_ratio_hat, 4)
            << "\n"
            << "  empirical inflation k:   " << mean_se(summary.inflation_hat, 4)
            << "\n"
            << "  log-rank rejection, protocol definition: "
            << pct(summary.reject_protocol.mean) << " (se "
            << pct(summary.reject_protocol.se) << ")\n"
            << "  log-rank rejection, revised definition:  "
            << pct(summary.reject_revised.mean) << " (se "
            << pct(summary.reject_revised.se) << ")\n"
            << "  relabeling conservation violations: "
            << summary.conservation_violations << " of " << summary.replications
            << "; category-1 violations: " << summary.category1_violations
            << " of " << summary.replications << "\n";
  if (want_dump)
    std::cout << "wrote " << dump_path.string() << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Estimates ascertainment bias from interim event counts in a two-arm "
      "time-to-event trial and projects its impact on the effective hazard "
      "ratio and study power."};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  std::string sweep_name;
  double ci_level = 0.0;
  std::uint64_t seed = 0;
  int threads = 0;
  bool plots = false;

  CLI::App* cmd_bias = app.add_subcommand(
      "estimate-bias", "Estimate the bias ratio B, fraction P, and inflation k");
  cmd_bias->add_option("--config", config_path, "config file (JSON)")->required();
  CLI::Option* ci_option =
      cmd_bias->add_option("--ci-level", ci_level, "confidence level (default 0.95)");

  CLI::App* cmd_project = app.add_subcommand(
      "project", "Project expected events, effective hazard ratio, and power");
  cmd_project->add_option("--config", config_path, "config file (JSON)")->required();
  cmd_project->add_option("--out", out_dir,
                          "directory for machine-readable projection.json");

  CLI::App* cmd_sweep =
      app.add_subcommand("sweep", "Evaluate the projection over a parameter grid");
  cmd_sweep->add_option("name", sweep_name, "sweep name (built in or from config)")
      ->required();
  cmd_sweep->add_option("--config", config_path, "config file (JSON)")->required();
  cmd_sweep->add_option("--out", out_dir, "output directory (default .)");
  cmd_sweep->add_flag("--plots", plots, "also write an SVG chart");
  cmd_sweep->add_option("--threads", threads, "worker threads (0 = hardware)");

  CLI::App* cmd_simulate = app.add_subcommand(
      "simulate", "Run the synthetic-trial oracle defined in the config");
  cmd_simulate->add_option("--config", config_path, "config file (JSON)")->required();
  cmd_simulate->add_option("--out", out_dir,
                           "directory for the per-replication dump");
  CLI::Option* seed_option =
      cmd_simulate->add_option("--seed", seed, "override the config seed");
  cmd_simulate->add_option("--threads", threads, "worker threads (0 = hardware)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (cmd_bias->parsed()) {
      std::optional<double> level;
      if (ci_option->count() > 0) level = ci_level;
      return run_estimate_bias(config_path, level);
    }
    if (cmd_project->parsed()) return run_project(config_path, out_dir);
    if (cmd_sweep->parsed())
      return run_sweep(config_path, sweep_name, out_dir, plots, threads);
    if (cmd_simulate->parsed()) {
      std::optional<std::uint64_t> seed_override;
      if (seed_option->count() > 0) seed_override = seed;
      return run_simulate(config_path, out_dir, seed_override, threads);
    }
  } catch (const config_error& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const degenerate_counts_error& e) {
    std::cerr << "degenerate data: " << e.what() << "\n";
    return 3;
  } catch (const solver_error& e) {
    std::cerr << "solver failure: " << e.what() << "\n";
    return 4;
  } catch (const std::domain_error& e) {
    std::cerr << "degenerate data: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
