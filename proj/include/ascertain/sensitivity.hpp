#pragma once

#include <optional>
#include <string>
#include <vector>

#include "ascertain/power.hpp"

namespace ascertain {

// Quantity varied along a sweep axis.
enum class SweepParameter {
  hypothesized_hazard_ratio,  // "h_hyp"
  bias_ratio,                 // "b"
  variance_inflation,         // "v"  (stride-pipeline mode only)
  confirmation,               // "a"  (stride-pipeline mode only)
  category2_fraction,         // "p"  (simplified mode only)
  event_rate,                 // "r"  (simplified mode only)
  duration,                   // "t"  (simplified mode only)
};

const char* sweep_parameter_name(SweepParameter p);

enum class SweepMode { stride_pipeline, simplified };

struct SweepAxis {
  SweepParameter parameter = SweepParameter::bias_ratio;
  double start = 0.0;
  double stop = 0.0;
  double step = 0.0;  // > 0, start <= stop

  void validate() const;
  int count() const;             // floor((stop-start)/step + 1e-9) + 1
  double value_at(int i) const;  // start + i*step
};

// Full projection input set for stride-pipeline sweeps.
struct StrideBaseline {
  StudyDesign design;
  SampleSizeInputs sample;
  CauseSpecificRates rates_protocol;
  std::optional<CauseSpecificRates> rates_revised;
  BiasEstimate bias;
  std::optional<AdjudicationProfile> adjudication_protocol;
  std::optional<AdjudicationProfile> adjudication_revised;
  SolverSettings solver;
};

// Reduced input set for simplified sweeps: equal arms, no withdrawal, no
// variance inflation, no adjudication; the revised definition is the
// (1-P)-scaled subset of the protocol one. The enrollment window
// mu*T (months) stays fixed when duration is swept.
struct SimplifiedBaseline {
  double n_per_arm = 0.0;
  StudyDesign design;
  CauseSpecificRates rates;
  double category2_fraction = 0.0;  // P
  double bias_ratio = 1.0;          // B when not swept
  SolverSettings solver;
};

struct SweepSpec {
  SweepMode mode = SweepMode::stride_pipeline;
  SweepAxis axis;                  // inner (fast) axis
  std::optional<SweepAxis> outer;  // optional outer axis
  std::optional<StrideBaseline> stride;          // required in stride mode
  std::optional<SimplifiedBaseline> simplified;  // required in simplified mode

  void validate() const;  // mode/baseline/parameter compatibility
};

struct SweepRow {
  double outer_value = 0.0;  // NaN when the sweep has no outer axis
  double value = 0.0;
  double h_eff = 0.0;
  double power_protocol = 0.0;
  double power_revised = 0.0;
  bool direction_reversed = false;
  std::string error;  // empty on success; failed points carry NaN numerics
};

// Evaluates the projection at every grid point, outer axis major. Per-point
// solver or domain failures are recorded in the row rather than thrown.
// threads is a concurrency hint (0 = hardware); results are identical
// regardless of thread count.
std::vector<SweepRow> run_sweep(const SweepSpec& spec, int threads = 0);

// Comma-separated table of the sweep grid: axis column(s), h_eff,
// power_protocol, power_revised, direction_reversed, error. Numbers are
// rendered to 6 significant digits; the column order is fixed.
std::string sweep_to_table(const SweepSpec& spec,
                           const std::vector<SweepRow>& rows);

// Names of the built-in sweeps reproducing the reference analyses.
std::vector<std::string> named_sweeps();

// Grid definition of a built-in sweep without a baseline attached; returns
// false for unknown names.
bool named_sweep_definition(const std::string& name, SweepMode& mode,
                            SweepAxis& axis, std::optional<SweepAxis>& outer);

// Built-in sweep specs by name; baselines supply everything not swept.
// Throws std::invalid_argument for unknown names.
SweepSpec make_named_sweep(const std::string& name,
                           const StrideBaseline& stride,
                           const SimplifiedBaseline& simplified);

}  // namespace ascertain
