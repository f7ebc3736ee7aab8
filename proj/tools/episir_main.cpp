#include <cstdlib>
#include <fstream>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "episir/experiment.hpp"
#include "episir/validation.hpp"
#include "json.hpp"

namespace {

nlohmann::json load_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open " + path);
  return nlohmann::json::parse(in);
}

episir::ExperimentConfig load_config(const std::string& path,
                                     const std::string& output_override) {
  auto config = episir::ExperimentConfig::from_json(load_json(path));
  if (!output_override.empty()) config.output_dir = output_override;
  if (config.output_dir.empty())
    if (const char* env = std::getenv("EPISIR_OUTPUT_DIR")) config.output_dir = env;
  return config;
}

// analytic commands reuse the experiment plumbing with an empty ensemble
episir::ExperimentResult analytic_only(episir::ExperimentConfig config) {
  config.replicates = 0;
  config.saved_trajectories = 0;
  return episir::run_experiment(config);
}

nlohmann::json params_json(const episir::AsymptoticParams& p) {
  return {{"alpha_s", p.alpha_s}, {"alpha_i", p.alpha_i}, {"alpha_r", p.alpha_r},
          {"lambda", p.lambda},   {"mu", p.mu},           {"mu_i", p.mu_i},
          {"mu_r", p.mu_r},       {"beta", p.beta},       {"rho", p.rho},
          {"r0", episir::limit::basic_reproduction_number(p)}};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"event-driven SIR on configuration-model graphs, with its fluid "
               "limits, outbreak odds, and vaccination thresholds"};
  app.set_version_flag("--version", "0.1.0");
  app.require_subcommand(1);

  std::string config_path, output_dir;
  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--config", config_path, "experiment description (json)")
        ->required()
        ->check(CLI::ExistingFile);
    cmd->add_option("--output", output_dir,
                    "output directory (overrides the config and "
                    "EPISIR_OUTPUT_DIR)");
  };

  auto* simulate =
      app.add_subcommand("simulate", "run the ensemble and write its tables");
  add_common(simulate);
  auto* compare = app.add_subcommand(
      "compare", "run the ensemble and report the gap to the fluid curves");
  add_common(compare);
  auto* limit_cmd =
      app.add_subcommand("limit", "solve the fluid curves without simulating");
  add_common(limit_cmd);
  auto* outbreak_cmd = app.add_subcommand(
      "outbreak", "odds that the seeds ignite a large outbreak");
  add_common(outbreak_cmd);
  auto* vaccinate_cmd = app.add_subcommand(
      "vaccinate", "coverage thresholds and post-vaccination behaviour");
  add_common(vaccinate_cmd);
  app.add_subcommand("demo", "run the built-in correctness battery");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;  // --help and --version exit cleanly
  }

  try {
    if (app.got_subcommand("demo")) {
      const auto results = episir::run_acceptance(std::cout);
      return episir::all_pass(results) ? 0 : 3;
    }

    auto config = load_config(config_path, output_dir);

    if (app.got_subcommand("simulate") || app.got_subcommand("compare")) {
      if (app.got_subcommand("compare") && config.aligned_grid <= 1)
        config.aligned_grid = 201;
      const auto result = episir::run_experiment(config);
      std::cout << result.summary().dump(2) << "\n";
      return 0;
    }

    if (app.got_subcommand("limit")) {
      const auto result = analytic_only(config);
      nlohmann::json out = {{"params", params_json(result.params)},
                            {"regime", result.regime == episir::limit::Regime::bulk
                                           ? "bulk"
                                           : "shifted"}};
      out["limit"] = result.has_limit
                         ? episir::limit::limit_summary(result.limit)
                         : nlohmann::json(nullptr);
      std::cout << out.dump(2) << "\n";
      return 0;
    }

    if (app.got_subcommand("outbreak")) {
      const auto result = analytic_only(config);
      nlohmann::json out = {{"params", params_json(result.params)}};
      if (result.has_outbreak_calc)
        out["outbreak"] = {{"q", result.outbreak.q},
                           {"probability", result.outbreak.probability},
                           {"mean_offspring", result.outbreak.mean_offspring},
                           {"r0", result.outbreak.r0},
                           {"truncation_k", result.outbreak.truncation_k},
                           {"tail_mass", result.outbreak.tail_mass}};
      else
        out["outbreak"] = nullptr;  // macroscopic seeding: no early branching phase
      std::cout << out.dump(2) << "\n";
      return 0;
    }

    // vaccinate
    auto plain = config;
    plain.vaccination.reset();
    const auto base_result = analytic_only(plain);
    nlohmann::json out = {{"params", params_json(base_result.params)}};
    out["critical_coverage"] = {
        {"uniform", episir::critical_coverage(
                        base_result.params, episir::VaccinationPolicy::Kind::uniform)},
        {"edgewise",
         episir::critical_coverage(base_result.params,
                                   episir::VaccinationPolicy::Kind::edgewise)}};
    if (config.vaccination) {
      const auto vac_result = analytic_only(config);
      nlohmann::json vac = {{"params", params_json(vac_result.params)}};
      vac["theta_inf"] =
          vac_result.has_limit
              ? nlohmann::json(vac_result.limit.theta_inf.value)
              : nlohmann::json(nullptr);
      if (vac_result.has_outbreak_calc)
        vac["outbreak"] = {{"q", vac_result.outbreak.q},
                           {"probability", vac_result.outbreak.probability}};
      out["vaccinated"] = vac;
    }
    std::cout << out.dump(2) << "\n";
    return 0;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
