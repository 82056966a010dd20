#include "ascertain/config.hpp"

#include <cstdint>
#include <fstream>
#include <set>
#include <sstream>
#include <string>

#include "ascertain/errors.hpp"

namespace ascertain {

namespace {

using nlohmann::json;

// Tracks which keys of one JSON object were consumed so leftovers can be
// rejected by name. "description" keys are documentation and always allowed.
class ObjectReader {
 public:
  ObjectReader(const json& node, std::string path)
      : node_(node), path_(std::move(path)) {
    if (!node_.is_object())
      throw config_error(path_ + ": expected an object");
  }

  const std::string& path() const { return path_; }

  bool has(const char* key) const { return node_.contains(key); }

  const json& require(const char* key) {
    seen_.insert(key);
    if (!node_.contains(key))
      throw config_error(path_ + ": missing required field '" + key + "'");
    return node_.at(key);
  }

  const json* optional(const char* key) {
    seen_.insert(key);
    return node_.contains(key) ? &node_.at(key) : nullptr;
  }

  double number(const char* key) { return as_number(require(key), key); }

  double number_or(const char* key, double fallback) {
    const json* v = optional(key);
    return v ? as_number(*v, key) : fallback;
  }

  std::int64_t integer(const char* key) {
    const json& v = require(key);
    if (!v.is_number_integer())
      throw config_error(path_ + "." + key + ": expected an integer");
    return v.get<std::int64_t>();
  }

  bool boolean_or(const char* key, bool fallback) {
    const json* v = optional(key);
    if (!v) return fallback;
    if (!v->is_boolean())
      throw config_error(path_ + "." + key + ": expected a boolean");
    return v->get<bool>();
  }

  std::string text(const char* key) {
    const json& v = require(key);
    if (!v.is_string())
      throw config_error(path_ + "." + key + ": expected a string");
    return v.get<std::string>();
  }

  void finish() const {
    for (const auto& item : node_.items())
      if (!seen_.count(item.key()) && item.key() != "description")
        throw config_error(path_ + ": unknown field '" + item.key() + "'");
  }

 private:
  double as_number(const json& v, const char* key) const {
    if (!v.is_number())
      throw config_error(path_ + "." + key + ": expected a number");
    return v.get<double>();
  }

  const json& node_;
  std::string path_;
  std::set<std::string> seen_;
};

// Domain-invariant violations inside a config become config errors with the
// section path attached.
template <typename F>
void check(const std::string& path, F&& validate) {
  try {
    validate();
  } catch (const std::exception& e) {
    throw config_error(path + ": " + e.what());
  }
}

StudyDesign read_design(const json& node, const std::string& path) {
  ObjectReader reader(node, path);
  StudyDesign design;
  design.total_duration_months = reader.number("total_duration_months");
  design.recruitment_fraction = reader.number("recruitment_fraction");
  design.alpha = reader.number_or("alpha", 0.05);
  design.hypothesized_hazard_ratio = reader.number("hypothesized_hazard_ratio");
  reader.finish();
  check(path, [&] { design.validate(); });
  return design;
}

SampleSizeInputs read_sample(const json& node, const std::string& path) {
  ObjectReader reader(node, path);
  SampleSizeInputs sample;
  sample.n_control = reader.number("n_control");
  sample.n_intervention = reader.number("n_intervention");
  sample.withdrawal_rate_per_year =
      reader.number_or("withdrawal_rate_per_year", 0.0);
  sample.variance_inflation_protocol =
      reader.number_or("variance_inflation_protocol", 1.0);
  sample.variance_inflation_revised =
      reader.number_or("variance_inflation_revised", 1.0);
  sample.size_adjustment = reader.number_or("size_adjustment", 1.0);
  reader.finish();
  check(path, [&] { sample.validate(); });
  return sample;
}

CauseSpecificRates read_rates_pair(const json& node, const std::string& path) {
  ObjectReader reader(node, path);
  CauseSpecificRates rates;
  rates.outcome_12mo = reader.number("outcome");
  rates.death_12mo = reader.number("death");
  reader.finish();
  check(path, [&] { rates.validate(); });
  return rates;
}

CategoryCounts read_counts(const json& node, const std::string& path) {
  ObjectReader reader(node, path);
  CategoryCounts counts;
  counts.control_cat1_first = reader.integer("control_cat1_first");
  counts.control_cat2_first = reader.integer("control_cat2_first");
  counts.control_cat2_total = reader.integer("control_cat2_total");
  counts.control_cat3_total = reader.integer("control_cat3_total");
  counts.intervention_cat2_total = reader.integer("intervention_cat2_total");
  counts.intervention_cat3_total = reader.integer("intervention_cat3_total");
  reader.finish();
  check(path, [&] { counts.validate(); });
  return counts;
}

AdjudicationProfile read_adjudication_list(const json& node,
                                           const std::string& path) {
  if (!node.is_array() || node.empty())
    throw config_error(path + ": expected a non-empty array");
  AdjudicationProfile profile;
  for (std::size_t i = 0; i < node.size(); ++i) {
    const std::string entry_path = path + "[" + std::to_string(i) + "]";
    ObjectReader reader(node.at(i), entry_path);
    const std::string label = reader.text("type");
    const double proportion = reader.number("proportion");
    const double confirmation = reader.number("confirmation");
    reader.finish();
    profile.type_proportions.emplace_back(label, proportion);
    profile.confirm_fractions.emplace_back(label, confirmation);
  }
  check(path, [&] { overall_confirmation(profile); });
  return profile;
}

SolverSettings read_solver(const json& node, const std::string& path) {
  ObjectReader reader(node, path);
  SolverSettings settings;
  settings.rel_tolerance = reader.number_or("rel_tolerance", settings.rel_tolerance);
  settings.max_iterations = static_cast<int>(
      reader.number_or("max_iterations", settings.max_iterations));
  settings.bracket_expansion =
      reader.number_or("bracket_expansion", settings.bracket_expansion);
  reader.finish();
  check(path, [&] { settings.validate(); });
  return settings;
}

SweepParameter read_sweep_parameter(const std::string& token,
                                    const std::string& path) {
  if (token == "h_hyp") return SweepParameter::hypothesized_hazard_ratio;
  if (token == "b") return SweepParameter::bias_ratio;
  if (token == "v") return SweepParameter::variance_inflation;
  if (token == "a") return SweepParameter::confirmation;
  if (token == "p") return SweepParameter::category2_fraction;
  if (token == "r") return SweepParameter::event_rate;
  if (token == "t") return SweepParameter::duration;
  throw config_error(path + ": unknown sweep parameter '" + token +
                     "' (expected h_hyp, b, v, a, p, r, or t)");
}

SweepAxis read_axis(ObjectReader& reader, const std::string& path) {
  SweepAxis axis;
  axis.parameter = read_sweep_parameter(reader.text("parameter"), path);
  axis.start = reader.number("start");
  axis.stop = reader.number("stop");
  axis.step = reader.number("step");
  check(path, [&] { axis.validate(); });
  return axis;
}

CustomSweep read_custom_sweep(const json& node, const std::string& path) {
  ObjectReader reader(node, path);
  CustomSweep sweep;
  const std::string mode = reader.text("mode");
  if (mode == "stride-pipeline")
    sweep.mode = SweepMode::stride_pipeline;
  else if (mode == "simplified")
    sweep.mode = SweepMode::simplified;
  else
    throw config_error(path + ".mode: expected 'stride-pipeline' or 'simplified'");
  sweep.axis = read_axis(reader, path);
  if (const json* outer = reader.optional("outer")) {
    ObjectReader outer_reader(*outer, path + ".outer");
    sweep.outer = read_axis(outer_reader, path + ".outer");
    outer_reader.finish();
  }
  reader.finish();
  return sweep;
}

SimulationConfig read_simulation(const json& node, const std::string& path,
                                 const StudyDesign& default_design,
                                 bool& dump_replications) {
  ObjectReader reader(node, path);
  SimulationConfig sim;
  sim.n_per_arm = static_cast<int>(reader.integer("n_per_arm"));
  const json& hazards = reader.require("category_hazards");
  if (!hazards.is_array() || hazards.size() != 3)
    throw config_error(path + ".category_hazards: expected an array of 3 numbers");
  for (int i = 0; i < 3; ++i) {
    if (!hazards.at(i).is_number())
      throw config_error(path + ".category_hazards: expected an array of 3 numbers");
    sim.category_hazards[i] = hazards.at(i).get<double>();
  }
  sim.death_hazard = reader.number("death_hazard");
  sim.true_hazard_ratio = reader.number("true_hazard_ratio");
  sim.relabel_cat3_to_cat2 = reader.number_or("relabel_cat3_to_cat2", 0.0);
  sim.relabel_cat2_to_cat3 = reader.number_or("relabel_cat2_to_cat3", 0.0);
  sim.withdrawal_rate_per_year =
      reader.number_or("withdrawal_rate_per_year", 0.0);
  sim.recurrent_events = reader.boolean_or("recurrent_events", true);
  sim.replications = static_cast<int>(reader.integer("replications"));
  const json& seed = reader.require("seed");
  if (!seed.is_number_unsigned() && !seed.is_number_integer())
    throw config_error(path + ".seed: expected a nonnegative integer");
  if (seed.is_number_integer() && seed.get<std::int64_t>() < 0)
    throw config_error(path + ".seed: expected a nonnegative integer");
  sim.seed = seed.get<std::uint64_t>();
  dump_replications = reader.boolean_or("dump_replications", false);
  sim.design = default_design;
  if (const json* design_node = reader.optional("design"))
    sim.design = read_design(*design_node, path + ".design");
  reader.finish();
  check(path, [&] { sim.validate(); });
  return sim;
}

}  // namespace

ProjectConfig parse_project_config(const std::string& text,
                                   const std::string& origin) {
  json document;
  try {
    document = json::parse(text);
  } catch (const json::parse_error& e) {
    std::size_t line = 1;
    const std::size_t limit = std::min<std::size_t>(e.byte, text.size());
    for (std::size_t i = 0; i < limit; ++i)
      if (text[i] == '\n') ++line;
    std::ostringstream what;
    what << origin << ":" << line << ": " << e.what();
    throw config_error(what.str());
  }

  ObjectReader root(document, origin);
  ProjectConfig config;
  config.design = read_design(root.require("design"), origin + ":design");

  if (const json* sample = root.optional("sample"))
    config.sample = read_sample(*sample, origin + ":sample");

  if (const json* rates = root.optional("rates")) {
    ObjectReader reader(*rates, origin + ":rates");
    config.rates_protocol =
        read_rates_pair(reader.require("protocol"), origin + ":rates.protocol");
    const json* revised = reader.optional("revised");
    config.revised_from_category2_fraction =
        reader.boolean_or("revised_from_category2_fraction", false);
    if (revised && config.revised_from_category2_fraction)
      throw config_error(origin +
                         ":rates: 'revised' and 'revised_from_category2_fraction' "
                         "are mutually exclusive");
    if (revised)
      config.rates_revised =
          read_rates_pair(*revised, origin + ":rates.revised");
    reader.finish();
  }

  if (const json* counts = root.optional("counts"))
    config.counts = read_counts(*counts, origin + ":counts");

  if (const json* adjudication = root.optional("adjudication")) {
    ObjectReader reader(*adjudication, origin + ":adjudication");
    if (const json* protocol = reader.optional("protocol"))
      config.adjudication_protocol = read_adjudication_list(
          *protocol, origin + ":adjudication.protocol");
    if (const json* revised = reader.optional("revised"))
      config.adjudication_revised =
          read_adjudication_list(*revised, origin + ":adjudication.revised");
    reader.finish();
  }

  if (const json* solver = root.optional("solver"))
    config.solver = read_solver(*solver, origin + ":solver");

  const json* ci = root.optional("ci_level");
  if (ci) {
    if (!ci->is_number())
      throw config_error(origin + ":ci_level: expected a number");
    config.ci_level = ci->get<double>();
    if (!(config.ci_level > 0.0 && config.ci_level < 1.0))
      throw config_error(origin + ":ci_level: must lie strictly in (0,1)");
  }

  if (const json* simplified = root.optional("simplified")) {
    ObjectReader reader(*simplified, origin + ":simplified");
    config.simplified_n_per_arm =
        reader.number_or("n_per_arm", config.simplified_n_per_arm);
    config.simplified_category2_fraction = reader.number_or(
        "category2_fraction", config.simplified_category2_fraction);
    reader.finish();
    if (!(config.simplified_n_per_arm > 0.0))
      throw config_error(origin + ":simplified.n_per_arm: must be positive");
    if (!(config.simplified_category2_fraction >= 0.0 &&
          config.simplified_category2_fraction <= 1.0))
      throw config_error(origin +
                         ":simplified.category2_fraction: must lie in [0,1]");
  }

  if (const json* simulation = root.optional("simulation"))
    config.simulation = read_simulation(*simulation, origin + ":simulation",
                                        config.design,
                                        config.dump_replications);

  if (const json* sweeps = root.optional("sweeps")) {
    if (!sweeps->is_object())
      throw config_error(origin + ":sweeps: expected an object");
    for (const auto& item : sweeps->items()) {
      if (item.key() == "description") continue;
      config.custom_sweeps[item.key()] = read_custom_sweep(
          item.value(), origin + ":sweeps." + item.key());
    }
  }

  root.finish();
  return config;
}

ProjectConfig load_project_config(const std::string& path) {
  std::ifstream input(path, std::ios::binary);
  if (!input)
    throw config_error("cannot open config file '" + path + "'");
  std::ostringstream buffer;
  buffer << input.rdbuf();
  return parse_project_config(buffer.str(), path);
}

StrideBaseline stride_baseline_from(const ProjectConfig& config) {
  if (!config.sample)
    throw config_error("config section 'sample' is required for this operation");
  if (!config.rates_protocol)
    throw config_error("config section 'rates' is required for this operation");
  if (!config.rates_revised && !config.revised_from_category2_fraction)
    throw config_error(
        "config section 'rates' must provide 'revised' rates or set "
        "'revised_from_category2_fraction'");
  if (!config.counts)
    throw config_error("config section 'counts' is required for this operation");

  StrideBaseline baseline;
  baseline.design = config.design;
  baseline.sample = *config.sample;
  baseline.rates_protocol = *config.rates_protocol;
  baseline.rates_revised = config.rates_revised;
  baseline.bias = estimate_bias(*config.counts, config.ci_level);
  baseline.adjudication_protocol = config.adjudication_protocol;
  baseline.adjudication_revised = config.adjudication_revised;
  baseline.solver = config.solver;
  return baseline;
}

SimplifiedBaseline simplified_baseline_from(const ProjectConfig& config) {
  if (!config.rates_protocol)
    throw config_error("config section 'rates' is required for this operation");
  SimplifiedBaseline baseline;
  baseline.n_per_arm = config.simplified_n_per_arm;
  baseline.design = config.design;
  baseline.rates = *config.rates_protocol;
  baseline.category2_fraction = config.simplified_category2_fraction;
  baseline.bias_ratio = 1.0;
  baseline.solver = config.solver;
  return baseline;
}

nlohmann::json projection_to_json(const PowerProjection& projection) {
  json sizes = {
      {"loss_fraction", projection.sizes.loss_fraction},
      {"control_protocol", projection.sizes.control_protocol},
      {"intervention_protocol", projection.sizes.intervention_protocol},
      {"control_revised", projection.sizes.control_revised},
      {"intervention_revised", projection.sizes.intervention_revised},
  };
  json solver = {
      {"h_eff", projection.solver.h_eff},
      {"residual", projection.solver.residual},
      {"iterations", projection.solver.iterations},
      {"used_bisection", projection.solver.used_bisection},
      {"first_order", projection.solver.first_order},
  };
  switch (projection.solver.seed_used) {
    case HeffSeed::second_order: solver["seed"] = "second_order"; break;
    case HeffSeed::theta_bound: solver["seed"] = "theta_bound"; break;
    case HeffSeed::first_order: solver["seed"] = "first_order"; break;
    case HeffSeed::scaled_hypothesis: solver["seed"] = "scaled_hypothesis"; break;
  }
  if (projection.solver.second_order)
    solver["second_order"] = *projection.solver.second_order;
  else
    solver["second_order"] = nullptr;

  return json{
      {"sizes", sizes},
      {"hazards_protocol",
       {{"outcome", projection.hazards_protocol.outcome},
        {"competing", projection.hazards_protocol.competing}}},
      {"hazards_revised",
       {{"outcome", projection.hazards_revised.outcome},
        {"competing", projection.hazards_revised.competing}}},
      {"confirmation_protocol", projection.confirmation_protocol},
      {"confirmation_revised", projection.confirmation_revised},
      {"self_reported",
       {{"control_events", projection.control_events_self_reported},
        {"intervention_true_events",
         projection.intervention_true_events_self_reported},
        {"intervention_observed_events",
         projection.intervention_observed_events_self_reported},
        {"control_events_revised",
         projection.control_events_revised_self_reported},
        {"intervention_events_revised",
         projection.intervention_events_revised_self_reported}}},
      {"control_events", projection.control_events},
      {"intervention_true_events", projection.intervention_true_events},
      {"intervention_observed_events", projection.intervention_observed_events},
      {"excess_events", projection.excess_events},
      {"control_events_revised", projection.control_events_revised},
      {"intervention_events_revised", projection.intervention_events_revised},
      {"solver", solver},
      {"h_eff", projection.h_eff},
      {"direction_reversed", projection.direction_reversed},
      {"power_protocol", projection.power_protocol},
      {"power_revised", projection.power_revised},
  };
}

PowerProjection projection_from_json(const nlohmann::json& document) {
  PowerProjection projection;
  const json& sizes = document.at("sizes");
  projection.sizes.loss_fraction = sizes.at("loss_fraction").get<double>();
  projection.sizes.control_protocol =
      sizes.at("control_protocol").get<double>();
  projection.sizes.intervention_protocol =
      sizes.at("intervention_protocol").get<double>();
  projection.sizes.control_revised = sizes.at("control_revised").get<double>();
  projection.sizes.intervention_revised =
      sizes.at("intervention_revised").get<double>();

  projection.hazards_protocol.outcome =
      document.at("hazards_protocol").at("outcome").get<double>();
  projection.hazards_protocol.competing =
      document.at("hazards_protocol").at("competing").get<double>();
  projection.hazards_revised.outcome =
      document.at("hazards_revised").at("outcome").get<double>();
  projection.hazards_revised.competing =
      document.at("hazards_revised").at("competing").get<double>();

  projection.confirmation_protocol =
      document.at("confirmation_protocol").get<double>();
  projection.confirmation_revised =
      document.at("confirmation_revised").get<double>();

  const json& self_reported = document.at("self_reported");
  projection.control_events_self_reported =
      self_reported.at("control_events").get<double>();
  projection.intervention_true_events_self_reported =
      self_reported.at("intervention_true_events").get<double>();
  projection.intervention_observed_events_self_reported =
      self_reported.at("intervention_observed_events").get<double>();
  projection.control_events_revised_self_reported =
      self_reported.at("control_events_revised").get<double>();
  projection.intervention_events_revised_self_reported =
      self_reported.at("intervention_events_revised").get<double>();

  projection.control_events = document.at("control_events").get<double>();
  projection.intervention_true_events =
      document.at("intervention_true_events").get<double>();
  projection.intervention_observed_events =
      document.at("intervention_observed_events").get<double>();
  projection.excess_events = document.at("excess_events").get<double>();
  projection.control_events_revised =
      document.at("control_events_revised").get<double>();
  projection.intervention_events_revised =
      document.at("intervention_events_revised").get<double>();

  const json& solver = document.at("solver");
  projection.solver.h_eff = solver.at("h_eff").get<double>();
  projection.solver.residual = solver.at("residual").get<double>();
  projection.solver.iterations = solver.at("iterations").get<int>();
  projection.solver.used_bisection = solver.at("used_bisection").get<bool>();
  projection.solver.first_order = solver.at("first_order").get<double>();
  const std::string seed = solver.at("seed").get<std::string>();
  if (seed == "second_order")
    projection.solver.seed_used = HeffSeed::second_order;
  else if (seed == "theta_bound")
    projection.solver.seed_used = HeffSeed::theta_bound;
  else if (seed == "first_order")
    projection.solver.seed_used = HeffSeed::first_order;
  else
    projection.solver.seed_used = HeffSeed::scaled_hypothesis;
  if (!solver.at("second_order").is_null())
    projection.solver.second_order = solver.at("second_order").get<double>();

  projection.h_eff = document.at("h_eff").get<double>();
  projection.direction_reversed = document.at("direction_reversed").get<bool>();
  projection.power_protocol = document.at("power_protocol").get<double>();
  projection.power_revised = document.at("power_revised").get<double>();
  return projection;
}

}  // namespace ascertain
