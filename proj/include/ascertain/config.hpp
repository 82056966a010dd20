#pragma once

#include <map>
#include <optional>
#include <string>

#include <json.hpp>

#include "ascertain/bias.hpp"
#include "ascertain/event_model.hpp"
#include "ascertain/mc_oracle.hpp"
#include "ascertain/power.hpp"
#include "ascertain/sensitivity.hpp"

namespace ascertain {

// Sweep grid declared in a config file; baselines are attached when the
// sweep is run.
struct CustomSweep {
  SweepMode mode = SweepMode::stride_pipeline;
  SweepAxis axis;
  std::optional<SweepAxis> outer;
};

// Everything a study config file can declare. Sections are optional at parse
// time; each command checks for the sections it needs. The revised outcome
// definition comes either from its own cause-specific rates or, with
// revised_from_category2_fraction, from the protocol expectation scaled by
// (1 - P); the two are mutually exclusive.
struct ProjectConfig {
  StudyDesign design;
  std::optional<SampleSizeInputs> sample;
  std::optional<CauseSpecificRates> rates_protocol;
  std::optional<CauseSpecificRates> rates_revised;
  bool revised_from_category2_fraction = false;
  std::optional<CategoryCounts> counts;
  std::optional<AdjudicationProfile> adjudication_protocol;
  std::optional<AdjudicationProfile> adjudication_revised;
  SolverSettings solver;
  double ci_level = 0.95;

  // Baseline for simplified-mode sweeps.
  double simplified_n_per_arm = 1611.0;
  double simplified_category2_fraction = 0.432;

  std::optional<SimulationConfig> simulation;
  bool dump_replications = false;
  std::map<std::string, CustomSweep> custom_sweeps;
};

// Parses and validates a config document. Unknown keys are rejected with
// their JSON path; "description" keys are allowed anywhere and ignored.
// Throws config_error with file/line diagnostics on parse failure and with
// the offending field path on schema or invariant violations.
ProjectConfig load_project_config(const std::string& path);
ProjectConfig parse_project_config(const std::string& text,
                                   const std::string& origin);

// Assembles sweep baselines from a config; throws config_error naming any
// missing section. The stride baseline estimates bias from the counts.
StrideBaseline stride_baseline_from(const ProjectConfig& config);
SimplifiedBaseline simplified_baseline_from(const ProjectConfig& config);

// Machine-readable projection: serialization round-trips every field
// bit-for-bit.
nlohmann::json projection_to_json(const PowerProjection& projection);
PowerProjection projection_from_json(const nlohmann::json& document);

}  // namespace ascertain
