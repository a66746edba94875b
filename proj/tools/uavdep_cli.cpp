#include <CLI11.hpp>
#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "uavdep/artifacts.hpp"
#include "uavdep/config.hpp"
#include "uavdep/simulator.hpp"

namespace fs = std::filesystem;
using uavdep::json;

namespace {

fs::path output_root() {
  if (const char* env = std::getenv("UAVDEP_OUT_ROOT")) return env;
  return "runs";
}

json load_config_document(const std::string& config_path,
                          const std::string& preset,
                          const std::vector<std::string>& overrides) {
  json root = json::object();
  if (!config_path.empty()) {
    try {
      root = json::parse(uavdep::read_text_file(config_path));
    } catch (const json::parse_error& e) {
      throw uavdep::ConfigError(std::string("config parse error: ") + e.what());
    }
  }
  if (!preset.empty()) root["preset"] = preset;
  for (const std::string& ov : overrides) uavdep::apply_override(root, ov);
  return root;
}

struct RunArgs {
  std::string config_path;
  std::string preset;
  std::vector<std::uint64_t> seeds;
  std::string out;
  std::vector<std::string> overrides;
};

void add_common_flags(CLI::App* cmd, RunArgs& args) {
  cmd->add_option("--config", args.config_path, "config file (JSON)");
  cmd->add_option("--preset", args.preset, "named experiment preset");
  cmd->add_option("--seed", args.seeds, "seed(s), repeatable");
  cmd->add_option("--out", args.out, "output directory");
  cmd->add_option("--override", args.overrides,
                  "dotted-path override, e.g. scenario.num_uavs=12");
}

int cmd_run(const RunArgs& args, int verbosity_override) {
  const json doc = load_config_document(args.config_path, args.preset,
                                        args.overrides);
  uavdep::RunConfig cfg = uavdep::parse_run_config(doc);
  if (verbosity_override >= 0) cfg.verbosity = verbosity_override;

  std::vector<std::uint64_t> seeds = args.seeds;
  if (seeds.empty()) seeds = cfg.seeds;
  if (seeds.empty()) seeds = {cfg.scenario.seed};

  fs::path out = !args.out.empty() ? fs::path(args.out)
                 : !cfg.output_dir.empty()
                     ? fs::path(cfg.output_dir)
                     : output_root() /
                           (cfg.preset.empty() ? "run" : cfg.preset);

  for (const std::uint64_t seed : seeds) {
    uavdep::Scenario sc = cfg.scenario;
    sc.seed = seed;
    const uavdep::ExperimentResult result = uavdep::run_experiment(sc);
    uavdep::RunConfig resolved = cfg;
    resolved.scenario = sc;
    const fs::path dir =
        seeds.size() == 1 ? out : out / ("seed-" + std::to_string(seed));
    uavdep::write_run_artifacts(dir, result,
                                uavdep::run_config_to_json(resolved), seed);
    if (cfg.verbosity >= 1)
      std::cout << "seed " << seed << ": coverage "
                << uavdep::fmt(result.log.front().true_coverage) << " -> "
                << uavdep::fmt(result.log.back().true_coverage) << "  ["
                << dir.string() << "]\n";
  }
  return 0;
}

struct SweepArgs {
  RunArgs base;
  std::string parameter;
  std::vector<std::string> values;
  std::vector<std::uint64_t> seeds;
};

double sweep_gain(const std::string& parameter,
                  const uavdep::ExperimentResult& r) {
  const double first = r.log.front().true_coverage;
  const double last = r.log.back().true_coverage;
  if (parameter == "r_gs") return last - first;  // absolute coverage gain
  return first > 0.0 ? last / first : 0.0;       // ratio to initial
}

int cmd_sweep(const SweepArgs& args) {
  if (args.values.empty())
    throw CLI::ValidationError("--values", "sweep needs at least one value");
  const std::string& parameter = args.parameter;
  if (parameter != "theta_db" && parameter != "r_gs" &&
      parameter != "environment")
    throw CLI::ValidationError(
        "--parameter", "sweepable parameters: theta_db, r_gs, environment");

  const json doc = load_config_document(args.base.config_path,
                                        args.base.preset, args.base.overrides);
  const uavdep::RunConfig cfg = uavdep::parse_run_config(doc);

  std::vector<std::uint64_t> seeds = args.seeds;
  if (seeds.empty()) seeds = cfg.seeds;
  if (seeds.empty()) seeds = {1, 2, 3, 4, 5};

  std::vector<std::string> values = args.values;
  // the r_GS ratio column is normalized by the full-sensing mean gain
  if (parameter == "r_gs" &&
      std::find(values.begin(), values.end(), "1.0") == values.end() &&
      std::find(values.begin(), values.end(), "1") == values.end())
    values.push_back("1.0");
  std::sort(values.begin(), values.end(),
            [&](const std::string& a, const std::string& b) {
              if (parameter == "environment") return a < b;
              return std::stod(a) < std::stod(b);
            });
  values.erase(std::unique(values.begin(), values.end()), values.end());

  std::map<std::string, std::vector<double>> gains;
  std::ostringstream runs_csv;
  runs_csv << "parameter,value,seed,gain\n";
  for (const std::string& value : values) {
    for (const std::uint64_t seed : seeds) {
      uavdep::Scenario sc = cfg.scenario;
      sc.seed = seed;
      if (parameter == "theta_db")
        sc.env.theta_threshold = uavdep::db_to_linear(std::stod(value));
      else if (parameter == "r_gs") {
        sc.use_true_intensity = false;
        sc.sensor_ratio = std::stod(value);
      } else {
        sc.environment = value;
        const double theta = sc.env.theta_threshold;
        sc.env = uavdep::channel_preset(value);
        sc.env.theta_threshold = theta;  // the threshold is not preset-specific
      }
      const double gain = sweep_gain(parameter, uavdep::run_experiment(sc));
      gains[value].push_back(gain);
      runs_csv << parameter << ',' << value << ',' << seed << ','
               << uavdep::fmt(gain) << "\n";
      if (cfg.verbosity >= 2)
        std::cout << parameter << "=" << value << " seed " << seed
                  << " gain " << uavdep::fmt(gain) << "\n";
    }
  }

  double baseline_mean = 1.0;
  if (parameter == "r_gs") {
    const auto it = gains.count("1.0") ? gains.find("1.0") : gains.find("1");
    baseline_mean = uavdep::sweep_stats(it->second).mean;
  }

  std::ostringstream agg_csv;
  agg_csv << "parameter,value,n,mean_gain,ci_low,ci_high";
  if (parameter == "r_gs") agg_csv << ",ratio_to_baseline";
  agg_csv << "\n";
  for (const auto& [value, samples] : gains) {
    const uavdep::SweepStats st = uavdep::sweep_stats(samples);
    agg_csv << parameter << ',' << value << ',' << samples.size() << ','
            << uavdep::fmt(st.mean) << ',' << uavdep::fmt(st.ci_low) << ','
            << uavdep::fmt(st.ci_high);
    if (parameter == "r_gs") agg_csv << ',' << uavdep::fmt(st.mean / baseline_mean);
    agg_csv << "\n";
  }

  const fs::path out =
      !args.base.out.empty()
          ? fs::path(args.base.out)
          : output_root() / ("sweep-" + parameter);
  uavdep::write_text_file(out / "sweep.csv", agg_csv.str());
  uavdep::write_text_file(out / "sweep_runs.csv", runs_csv.str());
  if (cfg.verbosity >= 1) std::cout << agg_csv.str();
  return 0;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    fields.push_back(line.substr(start, comma - start));
    if (comma == std::string::npos) return fields;
    start = comma + 1;
  }
}

int cmd_export(const std::string& run_dir, const std::string& kind,
               const std::string& out_arg) {
  const std::vector<std::string> kinds = {"deployment-map",
                                          "coverage-timeseries", "cell-map"};
  if (std::find(kinds.begin(), kinds.end(), kind) == kinds.end()) {
    std::string list;
    for (const std::string& k : kinds) list += (list.empty() ? "" : ", ") + k;
    throw CLI::ValidationError("--kind", "unknown kind '" + kind +
                                             "'; valid kinds: " + list);
  }
  const fs::path dir(run_dir);
  std::ostringstream out;

  if (kind == "coverage-timeseries") {
    std::istringstream metrics(uavdep::read_text_file(dir / "metrics.csv"));
    std::string line;
    std::getline(metrics, line);  // header
    out << "t,estimated,true\n";
    while (std::getline(metrics, line)) {
      if (line.empty()) continue;
      const auto fields = split_csv_line(line);
      out << fields.at(0) << ',' << fields.at(1) << ',' << fields.at(2) << "\n";
    }
  } else {
    const json snapshots =
        json::parse(uavdep::read_text_file(dir / "snapshots.json"));
    if (snapshots.empty())
      throw std::runtime_error("no snapshots in " + (dir / "snapshots.json").string());
    const json& snap = snapshots.back();
    const json manifest =
        json::parse(uavdep::read_text_file(dir / "manifest.json"));
    const json& scenario = manifest.at("config").at("scenario");
    const uavdep::GroundGrid grid = uavdep::make_square_grid(
        scenario.at("area_length").get<double>(), scenario.at("grid_n").get<int>());

    const int nx = snap.at("cells").at("nx").get<int>();
    const auto& labels = snap.at("cells").at("labels");
    if (kind == "cell-map") {
      out << "row,col,label\n";
      for (int row = 0; row < grid.ny; ++row)
        for (int col = 0; col < grid.nx; ++col)
          out << row << ',' << col << ','
              << labels.at(row * nx + col).get<int>() << "\n";
    } else {
      out << "kind,id,row,col,x,y,altitude,label,intensity_true,"
             "intensity_estimated\n";
      const auto& tru = snap.at("intensity_true");
      const auto& est = snap.at("intensity_estimated");
      for (int row = 0; row < grid.ny; ++row)
        for (int col = 0; col < grid.nx; ++col) {
          const uavdep::GroundPoint c = grid.center(row, col);
          const int i = row * nx + col;
          out << "cell," << i << ',' << row << ',' << col << ','
              << uavdep::fmt(c.x) << ',' << uavdep::fmt(c.y) << ",,"
              << labels.at(i).get<int>() << ','
              << uavdep::fmt(tru.at(i).get<double>()) << ','
              << uavdep::fmt(est.at(i).get<double>()) << "\n";
        }
      const json& deployment = snap.at("deployment");
      for (std::size_t u = 0; u < deployment.size(); ++u)
        out << "uav," << u << ",,," << uavdep::fmt(deployment[u].at(0).get<double>())
            << ',' << uavdep::fmt(deployment[u].at(1).get<double>()) << ','
            << uavdep::fmt(deployment[u].at(2).get<double>()) << ',' << u
            << ",,\n";
    }
  }

  const fs::path out_path = !out_arg.empty()
                                ? fs::path(out_arg)
                                : dir / "plot" / (kind + ".csv");
  uavdep::write_text_file(out_path, out.str());
  std::cout << out_path.string() << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"distributed 3D UAV base-station deployment simulator"};
  app.require_subcommand(1);

  RunArgs run_args;
  int verbosity = -1;
  CLI::App* run = app.add_subcommand("run", "run one experiment, write artifacts");
  add_common_flags(run, run_args);
  run->add_option("--verbosity", verbosity, "0 quiet, 1 summary, 2 chatty");

  SweepArgs sweep_args;
  CLI::App* sweep =
      app.add_subcommand("sweep", "run a parameter sweep with aggregation");
  add_common_flags(sweep, sweep_args.base);
  sweep->add_option("--parameter", sweep_args.parameter,
                    "theta_db | r_gs | environment")
      ->required();
  sweep->add_option("--values", sweep_args.values, "sweep values")->required();
  sweep->add_option("--seeds", sweep_args.seeds, "seeds per value");

  std::string export_run, export_kind, export_out;
  CLI::App* exp = app.add_subcommand("export-plotdata",
                                     "emit plot-ready series from a run dir");
  exp->add_option("--run", export_run, "completed run directory")->required();
  exp->add_option("--kind", export_kind,
                  "deployment-map | coverage-timeseries | cell-map")
      ->required();
  exp->add_option("--out", export_out, "output file path");

  RunArgs validate_args;
  CLI::App* validate =
      app.add_subcommand("validate-config", "parse a config and print it resolved");
  add_common_flags(validate, validate_args);

  CLI::App* list = app.add_subcommand("list-presets", "list named presets");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) return cmd_run(run_args, verbosity);
    if (sweep->parsed()) return cmd_sweep(sweep_args);
    if (exp->parsed()) return cmd_export(export_run, export_kind, export_out);
    if (validate->parsed()) {
      const json doc = load_config_document(
          validate_args.config_path, validate_args.preset, validate_args.overrides);
      const uavdep::RunConfig cfg = uavdep::parse_run_config(doc);
      std::cout << uavdep::run_config_to_json(cfg).dump(2) << "\n";
      return 0;
    }
    if (list->parsed()) {
      for (const std::string& name : uavdep::preset_names())
        std::cout << name << "\n";
      return 0;
    }
  } catch (const uavdep::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const CLI::ValidationError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
