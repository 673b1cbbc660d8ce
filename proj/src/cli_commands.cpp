#include "ecot/cli.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <set>

#include <json.hpp>

#include "ecot/checks.hpp"
#include "ecot/io.hpp"
#include "ecot/methods.hpp"
#include "ecot/rng.hpp"
#include "ecot/sim.hpp"

namespace ecot::cli {

namespace {

using nlohmann::json;

void check_keys(const json& obj, const std::string& where,
                const std::set<std::string>& allowed) {
  if (!obj.is_object()) {
    throw std::runtime_error("config: " + where + " must be an object");
  }
  for (const auto& [key, value] : obj.items()) {
    if (!allowed.count(key)) {
      throw std::runtime_error("config: unknown key '" + key + "' in " + where);
    }
  }
}

json load_config(const std::string& path) {
  json config;
  try {
    config = json::parse(io::read_text(path));
  } catch (const json::parse_error& e) {
    throw std::runtime_error("config parse error in " + path + ": " + e.what());
  }
  if (!config.is_object()) {
    throw std::runtime_error("config root must be an object: " + path);
  }
  return config;
}

LearnerConfig parse_learner(const json& obj, const std::string& where) {
  if (!obj.is_object()) {
    throw std::runtime_error("config: " + where + " must be an object");
  }
  LearnerConfig learner;
  learner.params.clear();
  bool have_name = false;
  for (const auto& [key, value] : obj.items()) {
    if (key == "name") {
      learner.name = value.get<std::string>();
      have_name = true;
    } else if (value.is_number()) {
      learner.params[key] = value.get<double>();
    } else {
      throw std::runtime_error("config: " + where + "." + key +
                               " must be numeric");
    }
  }
  if (!have_name) {
    throw std::runtime_error("config: " + where + " needs a 'name'");
  }
  return learner;
}

json learner_to_json(const LearnerConfig& learner) {
  json obj;
  obj["name"] = learner.name;
  for (const auto& [key, value] : learner.params) obj[key] = value;
  return obj;
}

MethodSpec parse_method(const json& obj, const std::string& where) {
  check_keys(obj, where,
             {"name", "binary_learner", "one_class_learner", "split_fraction",
              "null_prop", "storey_lambda", "conditional_calibration"});
  MethodSpec spec;
  spec.name = obj.at("name").get<std::string>();
  if (!is_known_method(spec.name)) {
    throw std::runtime_error("config: unknown method '" + spec.name + "'");
  }
  if (obj.contains("binary_learner")) {
    spec.binary_learner = parse_learner(obj["binary_learner"], where + ".binary_learner");
  }
  if (obj.contains("one_class_learner")) {
    spec.one_class_learner =
        parse_learner(obj["one_class_learner"], where + ".one_class_learner");
  }
  if (obj.contains("split_fraction")) {
    spec.split_fraction = obj["split_fraction"].get<double>();
  }
  if (obj.contains("null_prop")) {
    spec.null_prop = obj["null_prop"].get<std::string>();
  }
  if (obj.contains("storey_lambda")) {
    spec.storey_lambda = obj["storey_lambda"].get<double>();
  }
  if (obj.contains("conditional_calibration")) {
    spec.use_conditional_calibration = obj["conditional_calibration"].get<bool>();
  }
  return spec;
}

json method_to_json(const MethodSpec& spec) {
  json obj;
  obj["name"] = spec.name;
  obj["binary_learner"] = learner_to_json(spec.binary_learner);
  obj["one_class_learner"] = learner_to_json(spec.one_class_learner);
  obj["split_fraction"] = spec.split_fraction;
  obj["null_prop"] = spec.null_prop;
  obj["storey_lambda"] = spec.storey_lambda;
  obj["conditional_calibration"] = spec.use_conditional_calibration;
  return obj;
}

sim::ScenarioConfig parse_scenario(const json& obj) {
  check_keys(obj, "scenario", {"name", "d", "a", "pi", "n0", "n1", "m"});
  sim::ScenarioConfig config;
  config.scenario = obj.at("name").get<std::string>();
  config.d = obj.at("d").get<std::size_t>();
  config.a = obj.at("a").get<double>();
  config.pi = obj.at("pi").get<double>();
  config.n0 = obj.at("n0").get<std::size_t>();
  config.n1 = obj.at("n1").get<std::size_t>();
  config.m = obj.at("m").get<std::size_t>();
  config.validate();
  return config;
}

json scenario_to_json(const sim::ScenarioConfig& config) {
  json obj;
  obj["name"] = config.scenario;
  obj["d"] = config.d;
  obj["a"] = config.a;
  obj["pi"] = config.pi;
  obj["n0"] = config.n0;
  obj["n1"] = config.n1;
  obj["m"] = config.m;
  return obj;
}

struct OutputSpec {
  std::string dir = ".";
  std::string format = "both";  // json | csv | both

  bool wants_json() const { return format == "json" || format == "both"; }
  bool wants_csv() const { return format == "csv" || format == "both"; }
};

OutputSpec parse_output(const json& config, const CommonOverrides& overrides) {
  OutputSpec out;
  if (config.contains("output")) {
    check_keys(config["output"], "output", {"dir", "format"});
    if (config["output"].contains("dir")) {
      out.dir = config["output"]["dir"].get<std::string>();
    }
    if (config["output"].contains("format")) {
      out.format = config["output"]["format"].get<std::string>();
    }
  }
  if (overrides.out_dir) out.dir = *overrides.out_dir;
  if (overrides.format) out.format = *overrides.format;
  if (out.format != "json" && out.format != "csv" && out.format != "both") {
    throw std::runtime_error("config: format must be json, csv or both");
  }
  return out;
}

json tool_stamp() {
  json obj;
  obj["name"] = "ecot";
  obj["version"] = kToolVersion;
  return obj;
}

// Applies one grid value to a scenario. Key "n" splits a total labeled size
// as n0 = round(f n), n1 = n - n0.
sim::ScenarioConfig apply_grid_point(const sim::ScenarioConfig& base,
                                     const std::string& key, double value,
                                     double n0_fraction) {
  sim::ScenarioConfig config = base;
  if (key == "n") {
    auto n = static_cast<std::size_t>(std::llround(value));
    config.n0 = static_cast<std::size_t>(
        std::llround(n0_fraction * static_cast<double>(n)));
    config.n1 = n - config.n0;
  } else if (key == "n0") {
    config.n0 = static_cast<std::size_t>(std::llround(value));
  } else if (key == "n1") {
    config.n1 = static_cast<std::size_t>(std::llround(value));
  } else if (key == "m") {
    config.m = static_cast<std::size_t>(std::llround(value));
  } else if (key == "a") {
    config.a = value;
  } else if (key == "pi") {
    config.pi = value;
  } else if (key == "d") {
    config.d = static_cast<std::size_t>(std::llround(value));
  } else {
    throw std::runtime_error("config: unknown grid key '" + key + "'");
  }
  config.validate();
  return config;
}

std::string csv_header() {
  return "method,param,value,fdr,fdr_se,power,power_se\n";
}

}  // namespace

int cmd_simulate(const std::string& config_path, const CommonOverrides& overrides) {
  json config = load_config(config_path);
  check_keys(config, "root",
             {"alpha", "seed", "replicates", "threads", "scenario", "grid",
              "methods", "output"});

  double alpha = overrides.alpha.value_or(config.value("alpha", 0.1));
  std::uint64_t seed = overrides.seed.value_or(
      config.value("seed", static_cast<std::uint64_t>(0)));
  int replicates = config.value("replicates", 100);
  int threads = overrides.threads.value_or(config.value("threads", 1));
  if (replicates < 1) throw std::runtime_error("config: replicates must be >= 1");

  sim::ScenarioConfig base_scenario = parse_scenario(config.at("scenario"));

  std::string grid_key;
  std::vector<double> grid_values;
  double n0_fraction = 0.8;
  if (config.contains("grid")) {
    check_keys(config["grid"], "grid", {"key", "values", "n0_fraction"});
    grid_key = config["grid"].at("key").get<std::string>();
    grid_values = config["grid"].at("values").get<std::vector<double>>();
    n0_fraction = config["grid"].value("n0_fraction", 0.8);
    if (grid_values.empty()) {
      throw std::runtime_error("config: grid.values must be non-empty");
    }
  }

  if (!config.contains("methods") || !config["methods"].is_array() ||
      config["methods"].empty()) {
    throw std::runtime_error("config: methods must be a non-empty array");
  }
  std::vector<MethodSpec> methods;
  for (std::size_t i = 0; i < config["methods"].size(); ++i) {
    MethodSpec spec = parse_method(config["methods"][i],
                                   "methods[" + std::to_string(i) + "]");
    spec.alpha = alpha;
    methods.push_back(std::move(spec));
  }

  OutputSpec output = parse_output(config, overrides);

  // Validate every cell before running anything.
  std::vector<sim::ScenarioConfig> points;
  if (grid_values.empty()) {
    points.push_back(base_scenario);
  } else {
    for (double v : grid_values) {
      points.push_back(apply_grid_point(base_scenario, grid_key, v, n0_fraction));
    }
  }
  for (const auto& method : methods) {
    for (const auto& point : points) {
      if (point.n1 < method_min_nonnulls(method)) {
        throw std::runtime_error("config: method " + method.name +
                                 " needs n1 >= " +
                                 std::to_string(method_min_nonnulls(method)));
      }
    }
  }

  json effective;
  effective["alpha"] = alpha;
  effective["seed"] = seed;
  effective["replicates"] = replicates;
  effective["threads"] = threads;
  effective["scenario"] = scenario_to_json(base_scenario);
  if (!grid_values.empty()) {
    effective["grid"] = {{"key", grid_key},
                         {"values", grid_values},
                         {"n0_fraction", n0_fraction}};
  }
  effective["methods"] = json::array();
  for (const auto& method : methods) {
    effective["methods"].push_back(method_to_json(method));
  }
  effective["output"] = {{"dir", output.dir}, {"format", output.format}};

  json results = json::array();
  std::string csv = csv_header();
  for (const auto& method : methods) {
    for (std::size_t gi = 0; gi < points.size(); ++gi) {
      std::uint64_t cell_seed = rng::derive(seed, "grid", gi);
      MonteCarloReport report =
          sim::monte_carlo(method, points[gi], replicates, cell_seed, threads);
      double param_value =
          grid_values.empty() ? 0.0 : grid_values[gi];
      std::string param_key = grid_values.empty() ? "" : grid_key;

      json row;
      row["method"] = method.name;
      row["param"] = param_key;
      row["value"] = param_value;
      row["replicates"] = report.replicates;
      row["fdr_mean"] = report.fdr_mean;
      row["fdr_se"] = report.fdr_se;
      row["power_mean"] = report.power_mean;
      row["power_se"] = report.power_se;
      row["seed"] = cell_seed;
      results.push_back(row);

      csv += method.name + "," + param_key + "," +
             io::format_double(param_value) + "," +
             io::format_double(report.fdr_mean) + "," +
             io::format_double(report.fdr_se) + "," +
             io::format_double(report.power_mean) + "," +
             io::format_double(report.power_se) + "\n";
    }
  }

  json report;
  report["schema_version"] = kSchemaVersion;
  report["tool"] = tool_stamp();
  report["config"] = effective;
  report["results"] = results;

  std::filesystem::create_directories(output.dir);
  if (output.wants_json()) {
    io::write_text_atomic(output.dir + "/report.json", report.dump(2) + "\n");
  }
  if (output.wants_csv()) {
    io::write_text_atomic(output.dir + "/results.csv", csv);
  }
  return kExitOk;
}

int cmd_test(const std::string& config_path, const CommonOverrides& overrides,
             const TestPathOverrides& paths) {
  json config = load_config(config_path);
  check_keys(config, "root", {"alpha", "seed", "method", "data", "output"});

  double alpha = overrides.alpha.value_or(config.value("alpha", 0.1));
  std::uint64_t seed = overrides.seed.value_or(
      config.value("seed", static_cast<std::uint64_t>(0)));

  MethodSpec spec = parse_method(config.at("method"), "method");
  spec.alpha = alpha;
  spec.seed = seed;

  std::string d0_path, d1_path, du_path;
  if (config.contains("data")) {
    check_keys(config["data"], "data", {"d0", "d1", "du"});
    d0_path = config["data"].value("d0", "");
    d1_path = config["data"].value("d1", "");
    du_path = config["data"].value("du", "");
  }
  if (paths.d0) d0_path = *paths.d0;
  if (paths.d1) d1_path = *paths.d1;
  if (paths.du) du_path = *paths.du;
  if (d0_path.empty() || du_path.empty()) {
    throw std::runtime_error("config: need d0 and du dataset paths");
  }

  io::Dataset d0 = io::read_dataset_csv(d0_path);
  if (d0.labels) {
    for (int y : *d0.labels) {
      if (y != 0) throw std::runtime_error(d0_path + ": null dataset has label 1");
    }
  }
  Matrix d1_features;
  if (!d1_path.empty()) {
    io::Dataset d1 = io::read_dataset_csv(d1_path);
    if (d1.labels) {
      for (int y : *d1.labels) {
        if (y != 1) throw std::runtime_error(d1_path + ": non-null dataset has label 0");
      }
    }
    d1_features = std::move(d1.features);
  }
  io::Dataset du = io::read_dataset_csv(du_path);
  if (du.labels) {
    throw std::runtime_error(du_path + ": test dataset must not carry labels");
  }

  TestingProblem problem(std::move(d0.features), std::move(d1_features),
                         std::move(du.features));
  validate_method(problem, spec);

  OutputSpec output = parse_output(config, overrides);

  MethodOutput result = run_method_detailed(problem, spec);
  std::set<int> rejected(result.report.rejected.begin(),
                         result.report.rejected.end());

  std::string csv = "index,score,p_value,rejected\n";
  for (std::size_t j = 0; j < problem.m(); ++j) {
    bool has_detail = j < result.pvalues.size();
    csv += std::to_string(j) + "," +
           (has_detail ? io::format_double(result.test_scores[j]) : "") + "," +
           (has_detail ? io::format_double(result.pvalues[j]) : "") + "," +
           std::to_string(rejected.count(problem.test_index(j)) ? 1 : 0) + "\n";
  }

  json effective;
  effective["alpha"] = alpha;
  effective["seed"] = seed;
  effective["method"] = method_to_json(spec);
  effective["data"] = {{"d0", d0_path}, {"du", du_path}};
  if (!d1_path.empty()) effective["data"]["d1"] = d1_path;
  effective["output"] = {{"dir", output.dir}, {"format", output.format}};

  json summary;
  summary["schema_version"] = kSchemaVersion;
  summary["tool"] = tool_stamp();
  summary["config"] = effective;
  summary["alpha"] = alpha;
  summary["method"] = spec.name;
  summary["m"] = problem.m();
  summary["rejections"] = result.report.rejected.size();
  summary["pruned"] = result.report.pruned;
  if (result.report.null_prop_estimate) {
    summary["null_prop_estimate"] = *result.report.null_prop_estimate;
  }

  std::filesystem::create_directories(output.dir);
  if (output.wants_csv()) {
    io::write_text_atomic(output.dir + "/results.csv", csv);
  }
  if (output.wants_json()) {
    io::write_text_atomic(output.dir + "/summary.json", summary.dump(2) + "\n");
  }
  return kExitOk;
}

int cmd_oracle_check(const std::string& config_path,
                     const CommonOverrides& overrides,
                     bool inject_broken_scorer) {
  OracleBudget budget;
  int reduction_instances = 100;
  int collapse_instances = 200;
  int jackknife_instances = 50;
  std::uint64_t seed = 20240901;

  if (!config_path.empty()) {
    json config = load_config(config_path);
    check_keys(config, "root", {"seed", "budget", "instances"});
    seed = config.value("seed", seed);
    if (config.contains("budget")) {
      check_keys(config["budget"], "budget",
                 {"max_free_indices", "max_test_points"});
      budget.max_free_indices =
          config["budget"].value("max_free_indices", budget.max_free_indices);
      budget.max_test_points =
          config["budget"].value("max_test_points", budget.max_test_points);
    }
    if (config.contains("instances")) {
      check_keys(config["instances"], "instances",
                 {"reduction", "bh_collapse", "jackknife"});
      reduction_instances = config["instances"].value("reduction", reduction_instances);
      collapse_instances = config["instances"].value("bh_collapse", collapse_instances);
      jackknife_instances = config["instances"].value("jackknife", jackknife_instances);
    }
  }
  if (overrides.seed) seed = *overrides.seed;

  std::vector<checks::EquivalenceResult> results;
  results.push_back(checks::reduction_equivalence(reduction_instances, seed,
                                                  budget, inject_broken_scorer));
  results.push_back(checks::bh_collapse(collapse_instances, seed, budget));
  results.push_back(checks::jackknife_equivalence(jackknife_instances, seed, budget));

  std::printf("%-40s %10s %16s %8s\n", "check", "instances", "max discrepancy",
              "status");
  bool all_ok = true;
  for (const auto& result : results) {
    const char* status = result.skipped ? "skipped"
                         : result.passed() ? "pass"
                                           : "FAIL";
    std::printf("%-40s %10d %16.3e %8s\n", result.name.c_str(),
                result.instances, result.max_discrepancy, status);
    if (!result.passed()) all_ok = false;
  }
  // The broken-scorer injection must make the reduction suite disagree;
  // either way the injected run never exits clean.
  if (inject_broken_scorer) {
    if (results.front().passed() && !results.front().skipped) {
      std::fprintf(stderr, "warning: broken scorer was not flagged\n");
    }
    return kExitCheckFailure;
  }
  return all_ok ? kExitOk : kExitCheckFailure;
}

}  // namespace ecot::cli
