#include "ascertain/sensitivity.hpp"

#include <atomic>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "ascertain/errors.hpp"

namespace ascertain {

namespace {

bool parameter_allowed(SweepMode mode, SweepParameter p) {
  switch (p) {
    case SweepParameter::hypothesized_hazard_ratio:
    case SweepParameter::bias_ratio:
      return true;
    case SweepParameter::variance_inflation:
    case SweepParameter::confirmation:
      return mode == SweepMode::stride_pipeline;
    case SweepParameter::category2_fraction:
    case SweepParameter::event_rate:
    case SweepParameter::duration:
      return mode == SweepMode::simplified;
  }
  return false;
}

void apply_stride_parameter(StrideBaseline& base, SweepParameter parameter,
                            double value) {
  switch (parameter) {
    case SweepParameter::hypothesized_hazard_ratio:
      base.design.hypothesized_hazard_ratio = value;
      break;
    case SweepParameter::bias_ratio:
      base.bias = bias_from_parameters(
          value, base.bias.category2_fraction.estimate, base.bias.ci_level);
      break;
    case SweepParameter::variance_inflation:
      base.sample.variance_inflation_protocol = value;
      base.sample.variance_inflation_revised = value;
      break;
    case SweepParameter::confirmation: {
      AdjudicationProfile uniform;
      uniform.type_proportions = {{"all", 1.0}};
      uniform.confirm_fractions = {{"all", value}};
      base.adjudication_protocol = uniform;
      base.adjudication_revised = uniform;
      break;
    }
    default:
      throw config_error("sweep parameter not valid in stride-pipeline mode");
  }
}

void apply_simplified_parameter(SimplifiedBaseline& base,
                                SweepParameter parameter, double value,
                                double enrollment_months) {
  switch (parameter) {
    case SweepParameter::hypothesized_hazard_ratio:
      base.design.hypothesized_hazard_ratio = value;
      break;
    case SweepParameter::bias_ratio:
      base.bias_ratio = value;
      break;
    case SweepParameter::category2_fraction:
      base.category2_fraction = value;
      break;
    case SweepParameter::event_rate:
      base.rates.outcome_12mo = value;
      break;
    case SweepParameter::duration:
      // the enrollment window in months stays fixed as the horizon moves
      base.design.total_duration_months = value;
      base.design.recruitment_fraction = enrollment_months / value;
      break;
    default:
      throw config_error("sweep parameter not valid in simplified mode");
  }
}

PowerProjection evaluate_stride(const SweepSpec& spec, double outer_value,
                                double inner_value) {
  StrideBaseline base = *spec.stride;
  if (spec.outer)
    apply_stride_parameter(base, spec.outer->parameter, outer_value);
  apply_stride_parameter(base, spec.axis.parameter, inner_value);
  return project(base.sample, base.rates_protocol, base.rates_revised,
                 base.bias, base.adjudication_protocol,
                 base.adjudication_revised, base.design, base.solver);
}

PowerProjection evaluate_simplified(const SweepSpec& spec, double outer_value,
                                    double inner_value) {
  SimplifiedBaseline base = *spec.simplified;
  const double enrollment_months = base.design.recruitment_fraction *
                                   base.design.total_duration_months;
  if (spec.outer)
    apply_simplified_parameter(base, spec.outer->parameter, outer_value,
                               enrollment_months);
  apply_simplified_parameter(base, spec.axis.parameter, inner_value,
                             enrollment_months);

  SampleSizeInputs sample;
  sample.n_control = base.n_per_arm;
  sample.n_intervention = base.n_per_arm;
  const BiasEstimate bias =
      bias_from_parameters(base.bias_ratio, base.category2_fraction);
  return project(sample, base.rates, std::nullopt, bias, std::nullopt,
                 std::nullopt, base.design, base.solver);
}

SweepRow evaluate_point(const SweepSpec& spec, int outer_index,
                        int inner_index) {
  SweepRow row;
  row.outer_value = spec.outer ? spec.outer->value_at(outer_index)
                               : std::numeric_limits<double>::quiet_NaN();
  row.value = spec.axis.value_at(inner_index);
  try {
    const PowerProjection projection =
        spec.mode == SweepMode::stride_pipeline
            ? evaluate_stride(spec, row.outer_value, row.value)
            : evaluate_simplified(spec, row.outer_value, row.value);
    row.h_eff = projection.h_eff;
    row.power_protocol = projection.power_protocol;
    row.power_revised = projection.power_revised;
    row.direction_reversed = projection.direction_reversed;
  } catch (const std::exception& e) {
    row.h_eff = std::numeric_limits<double>::quiet_NaN();
    row.power_protocol = std::numeric_limits<double>::quiet_NaN();
    row.power_revised = std::numeric_limits<double>::quiet_NaN();
    row.direction_reversed = false;
    row.error = e.what();
  }
  return row;
}

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  char buffer[64];
  std::snprintf(buffer, sizeof(buffer), "%.6g", v);
  return buffer;
}

std::string csv_escape(const std::string& text) {
  if (text.find_first_of(",\"\n") == std::string::npos) return text;
  std::string quoted = "\"";
  for (char c : text) {
    if (c == '"') quoted += '"';
    quoted += c;
  }
  quoted += '"';
  return quoted;
}

}  // namespace

const char* sweep_parameter_name(SweepParameter p) {
  switch (p) {
    case SweepParameter::hypothesized_hazard_ratio: return "h_hyp";
    case SweepParameter::bias_ratio: return "b";
    case SweepParameter::variance_inflation: return "v";
    case SweepParameter::confirmation: return "a";
    case SweepParameter::category2_fraction: return "p";
    case SweepParameter::event_rate: return "r";
    case SweepParameter::duration: return "t";
  }
  return "?";
}

void SweepAxis::validate() const {
  if (!std::isfinite(start) || !std::isfinite(stop) || !std::isfinite(step))
    throw config_error("sweep axis: start, stop, and step must be finite");
  if (!(step > 0.0)) throw config_error("sweep axis: step must be positive");
  if (stop < start) throw config_error("sweep axis: stop must be >= start");
}

int SweepAxis::count() const {
  return static_cast<int>(std::floor((stop - start) / step + 1e-9)) + 1;
}

double SweepAxis::value_at(int i) const { return start + i * step; }

void SweepSpec::validate() const {
  axis.validate();
  if (outer) outer->validate();
  if (mode == SweepMode::stride_pipeline && !stride)
    throw config_error("sweep: stride-pipeline mode requires a stride baseline");
  if (mode == SweepMode::simplified && !simplified)
    throw config_error("sweep: simplified mode requires a simplified baseline");
  if (!parameter_allowed(mode, axis.parameter))
    throw config_error(std::string("sweep: parameter '") +
                       sweep_parameter_name(axis.parameter) +
                       "' is not valid in this mode");
  if (outer && !parameter_allowed(mode, outer->parameter))
    throw config_error(std::string("sweep: outer parameter '") +
                       sweep_parameter_name(outer->parameter) +
                       "' is not valid in this mode");
}

std::vector<SweepRow> run_sweep(const SweepSpec& spec, int threads) {
  spec.validate();
  const int n_outer = spec.outer ? spec.outer->count() : 1;
  const int n_inner = spec.axis.count();
  const int total = n_outer * n_inner;
  std::vector<SweepRow> rows(total);

  int worker_count = threads > 0
                         ? threads
                         : static_cast<int>(std::thread::hardware_concurrency());
  if (worker_count < 1) worker_count = 1;
  if (worker_count > total) worker_count = total;

  auto work = [&](std::atomic<int>& cursor) {
    for (;;) {
      const int index = cursor.fetch_add(1);
      if (index >= total) return;
      rows[index] = evaluate_point(spec, index / n_inner, index % n_inner);
    }
  };

  if (worker_count <= 1) {
    std::atomic<int> cursor{0};
    work(cursor);
  } else {
    std::atomic<int> cursor{0};
    std::vector<std::thread> pool;
    pool.reserve(worker_count);
    for (int i = 0; i < worker_count; ++i)
      pool.emplace_back([&] { work(cursor); });
    for (auto& t : pool) t.join();
  }
  return rows;
}

std::string sweep_to_table(const SweepSpec& spec,
                           const std::vector<SweepRow>& rows) {
  std::ostringstream table;
  if (spec.outer) table << sweep_parameter_name(spec.outer->parameter) << ',';
  table << sweep_parameter_name(spec.axis.parameter)
        << ",h_eff,power_protocol,power_revised,direction_reversed,error\n";
  for (const SweepRow& row : rows) {
    if (spec.outer) table << format_number(row.outer_value) << ',';
    table << format_number(row.value) << ',' << format_number(row.h_eff) << ','
          << format_number(row.power_protocol) << ','
          << format_number(row.power_revised) << ','
          << (row.direction_reversed ? 1 : 0) << ',' << csv_escape(row.error)
          << '\n';
  }
  return table.str();
}

std::vector<std::string> named_sweeps() {
  return {"fig2-hhyp", "fig3-b", "fig4-v", "fig5-a",
          "s12-pb",    "s34-rb", "s56-tb"};
}

bool named_sweep_definition(const std::string& name, SweepMode& mode,
                            SweepAxis& axis, std::optional<SweepAxis>& outer) {
  outer.reset();
  if (name == "fig2-hhyp") {
    mode = SweepMode::stride_pipeline;
    axis = {SweepParameter::hypothesized_hazard_ratio, 0.70, 0.90, 0.002};
  } else if (name == "fig3-b") {
    mode = SweepMode::stride_pipeline;
    axis = {SweepParameter::bias_ratio, 1.00, 1.25, 0.01};
  } else if (name == "fig4-v") {
    mode = SweepMode::stride_pipeline;
    axis = {SweepParameter::variance_inflation, 1.00, 1.50, 0.01};
  } else if (name == "fig5-a") {
    mode = SweepMode::stride_pipeline;
    axis = {SweepParameter::confirmation, 0.50, 1.00, 0.01};
  } else if (name == "s12-pb") {
    mode = SweepMode::simplified;
    axis = {SweepParameter::category2_fraction, 0.0, 1.0, 0.05};
    outer = SweepAxis{SweepParameter::bias_ratio, 0.85, 1.25, 0.05};
  } else if (name == "s34-rb") {
    mode = SweepMode::simplified;
    axis = {SweepParameter::event_rate, 0.025, 0.70, 0.025};
    outer = SweepAxis{SweepParameter::bias_ratio, 0.85, 1.25, 0.05};
  } else if (name == "s56-tb") {
    mode = SweepMode::simplified;
    axis = {SweepParameter::duration, 20.0, 160.0, 5.0};
    outer = SweepAxis{SweepParameter::bias_ratio, 0.85, 1.25, 0.05};
  } else {
    return false;
  }
  return true;
}

SweepSpec make_named_sweep(const std::string& name,
                           const StrideBaseline& stride,
                           const SimplifiedBaseline& simplified) {
  SweepSpec spec;
  if (!named_sweep_definition(name, spec.mode, spec.axis, spec.outer)) {
    std::ostringstream what;
    what << "unknown sweep name '" << name << "'; valid names:";
    for (const auto& valid : named_sweeps()) what << ' ' << valid;
    throw std::invalid_argument(what.str());
  }
  if (spec.mode == SweepMode::stride_pipeline)
    spec.stride = stride;
  else
    spec.simplified = simplified;
  return spec;
}

}  // namespace ascertain
