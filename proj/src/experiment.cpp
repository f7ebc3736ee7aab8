#include "episir/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "episir/stats.hpp"

namespace episir {

namespace {

nlohmann::json distribution_to_json(const DegreeDistribution& dist) {
  // serialise the realised table; family shorthands collapse on round-trip
  nlohmann::json pmf = nlohmann::json::array();
  for (auto& [k, w] : dist.pmf) pmf.push_back({k, w});
  return {{"family", "table"}, {"pmf", pmf}};
}

DegreeDistribution distribution_from_json(const nlohmann::json& j) {
  const std::string family = j.at("family").get<std::string>();
  if (family == "regular") return DegreeDistribution::regular(j.at("degree").get<int>());
  if (family == "poisson")
    return DegreeDistribution::poisson(j.at("mean").get<double>(),
                                       j.value("tail_eps", 1e-12));
  if (family == "power_law")
    return DegreeDistribution::power_law(j.at("exponent").get<double>(),
                                         j.value("k_min", 1), j.value("k_max", 0),
                                         j.value("tail_eps", 1e-12));
  if (family == "table") {
    std::vector<std::pair<int, double>> pmf;
    for (auto& entry : j.at("pmf"))
      pmf.emplace_back(entry.at(0).get<int>(), entry.at(1).get<double>());
    return DegreeDistribution::table(std::move(pmf));
  }
  throw std::invalid_argument("unknown degree family: " + family);
}

VaccinationPolicy vaccination_from_json(const nlohmann::json& j) {
  const std::string strategy = j.at("strategy").get<std::string>();
  if (strategy == "uniform")
    return VaccinationPolicy::uniform(j.at("level").get<double>());
  if (strategy == "edgewise")
    return VaccinationPolicy::edgewise(j.at("level").get<double>());
  if (strategy == "by_degree") {
    std::map<int, double> table;
    for (auto& entry : j.at("table"))
      table[entry.at(0).get<int>()] = entry.at(1).get<double>();
    return VaccinationPolicy::by_degree(std::move(table));
  }
  throw std::invalid_argument("unknown vaccination strategy: " + strategy);
}

nlohmann::json vaccination_to_json(const VaccinationPolicy& policy) {
  switch (policy.kind) {
    case VaccinationPolicy::Kind::uniform:
      return {{"strategy", "uniform"}, {"level", policy.level}};
    case VaccinationPolicy::Kind::edgewise:
      return {{"strategy", "edgewise"}, {"level", policy.level}};
    case VaccinationPolicy::Kind::by_degree: {
      nlohmann::json table = nlohmann::json::array();
      for (auto& [k, pi] : policy.table) table.push_back({k, pi});
      return {{"strategy", "by_degree"}, {"table", table}};
    }
  }
  return {};
}

double finite_or(const nlohmann::json& j, const char* key, double fallback) {
  if (!j.contains(key) || j.at(key).is_null()) return fallback;
  return j.at(key).get<double>();
}

nlohmann::json null_if_nan(double v) {
  if (std::isnan(v) || std::isinf(v)) return nullptr;
  return v;
}

Trajectory subsample_events(const Trajectory& traj, int stride) {
  if (stride <= 1 || traj.events() == 0) return traj;
  Trajectory out = traj;
  out.time.clear();
  out.kind.clear();
  out.s.clear();
  out.i.clear();
  out.r.clear();
  out.x_s.clear();
  out.x_i.clear();
  out.x_r.clear();
  out.original_time.clear();
  out.z.clear();
  const std::size_t last = traj.events() - 1;
  for (std::size_t j = 0; j < traj.events(); j += std::size_t(stride)) {
    const std::size_t idx = std::min(j, last);
    out.time.push_back(traj.time[idx]);
    out.kind.push_back(traj.kind[idx]);
    out.s.push_back(traj.s[idx]);
    out.i.push_back(traj.i[idx]);
    out.r.push_back(traj.r[idx]);
    out.x_s.push_back(traj.x_s[idx]);
    out.x_i.push_back(traj.x_i[idx]);
    out.x_r.push_back(traj.x_r[idx]);
    if (!traj.original_time.empty()) out.original_time.push_back(traj.original_time[idx]);
    if (!traj.z.empty()) out.z.push_back(traj.z[idx]);
  }
  if (out.time.back() != traj.time[last]) {
    out.time.push_back(traj.time[last]);
    out.kind.push_back(traj.kind[last]);
    out.s.push_back(traj.s[last]);
    out.i.push_back(traj.i[last]);
    out.r.push_back(traj.r[last]);
    out.x_s.push_back(traj.x_s[last]);
    out.x_i.push_back(traj.x_i[last]);
    out.x_r.push_back(traj.x_r[last]);
    if (!traj.original_time.empty()) out.original_time.push_back(traj.original_time[last]);
    if (!traj.z.empty()) out.z.push_back(traj.z[last]);
  }
  return out;
}

void write_atomic(const std::filesystem::path& path, const std::string& content) {
  const auto tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open " + tmp);
    out << content;
  }
  std::filesystem::rename(tmp, path);
}

double median_finite(std::vector<double> v) {
  v.erase(std::remove_if(v.begin(), v.end(),
                         [](double x) { return std::isnan(x); }),
          v.end());
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  return stats::quantile(std::move(v), 0.5);
}

}  // namespace

ExperimentConfig ExperimentConfig::from_json(const nlohmann::json& j) {
  ExperimentConfig c;
  c.name = j.value("name", c.name);

  const auto& pop = j.at("population");
  c.n = pop.at("n").get<std::int64_t>();
  c.distribution = distribution_from_json(pop.at("distribution"));
  if (pop.contains("seeds")) {
    c.use_seeds = true;
    for (auto& entry : pop.at("seeds"))
      c.seeds[entry.at(0).get<int>()] = entry.at(1).get<std::int64_t>();
    c.recovered_fraction = pop.value("recovered_fraction", 0.0);
  } else {
    const auto& fr = pop.at("fractions");
    c.alpha_s = fr.at("susceptible").get<double>();
    c.alpha_i = fr.at("infective").get<double>();
    c.alpha_r = fr.value("recovered", 0.0);
  }

  const auto& rates = j.at("rates");
  c.beta = rates.at("beta").get<double>();
  c.rho = rates.at("rho").get<double>();

  if (j.contains("ensemble")) {
    const auto& ens = j.at("ensemble");
    c.replicates = ens.value("replicates", c.replicates);
    c.base_seed = ens.value("base_seed", c.base_seed);
  }

  if (j.contains("engine")) {
    const auto& eng = j.at("engine");
    const std::string clock = eng.value("clock", "original");
    if (clock == "original") c.clock = ClockKind::original;
    else if (clock == "transformed") c.clock = ClockKind::transformed;
    else throw std::invalid_argument("unknown clock: " + clock);
    c.pregenerated = eng.value("pregenerated", false);
    c.engine_horizon =
        finite_or(eng, "horizon", std::numeric_limits<double>::infinity());
    c.stop_below_fraction = eng.value("stop_below_fraction", 0.0);
  }

  if (j.contains("vaccination") && !j.at("vaccination").is_null())
    c.vaccination = vaccination_from_json(j.at("vaccination"));

  if (j.contains("analysis")) {
    const auto& an = j.at("analysis");
    const std::string regime = an.value("regime", "auto");
    if (regime == "auto") c.regime_auto = true;
    else if (regime == "bulk") { c.regime_auto = false; c.regime = limit::Regime::bulk; }
    else if (regime == "shifted") { c.regime_auto = false; c.regime = limit::Regime::shifted; }
    else throw std::invalid_argument("unknown regime: " + regime);
    c.regime_cut = an.value("regime_cut", c.regime_cut);
    c.limit_options.s0 =
        finite_or(an, "s0", std::numeric_limits<double>::quiet_NaN());
    c.limit_options.tau_nodes = an.value("tau_nodes", c.limit_options.tau_nodes);
    c.limit_options.end_fraction =
        an.value("end_fraction", c.limit_options.end_fraction);
    c.aligned_grid = an.value("aligned_grid", c.aligned_grid);
    c.compare_horizon = finite_or(an, "compare_horizon",
                                  std::numeric_limits<double>::quiet_NaN());
  }

  if (j.contains("output")) {
    const auto& out = j.at("output");
    c.output_dir = out.value("directory", std::string());
    c.saved_trajectories = out.value("trajectories", c.saved_trajectories);
    c.subsample = out.value("subsample", c.subsample);
  }
  return c;
}

nlohmann::json ExperimentConfig::to_json() const {
  nlohmann::json pop = {{"n", n}, {"distribution", distribution_to_json(distribution)}};
  if (use_seeds) {
    nlohmann::json seeds_json = nlohmann::json::array();
    for (auto& [k, count] : seeds) seeds_json.push_back({k, count});
    pop["seeds"] = seeds_json;
    pop["recovered_fraction"] = recovered_fraction;
  } else {
    pop["fractions"] = {{"susceptible", alpha_s},
                        {"infective", alpha_i},
                        {"recovered", alpha_r}};
  }
  nlohmann::json j = {
      {"name", name},
      {"population", pop},
      {"rates", {{"beta", beta}, {"rho", rho}}},
      {"ensemble", {{"replicates", replicates}, {"base_seed", base_seed}}},
      {"engine",
       {{"clock", clock == ClockKind::original ? "original" : "transformed"},
        {"pregenerated", pregenerated},
        {"horizon", null_if_nan(engine_horizon)},
        {"stop_below_fraction", stop_below_fraction}}},
      {"analysis",
       {{"regime", regime_auto ? "auto"
                               : regime == limit::Regime::bulk ? "bulk" : "shifted"},
        {"regime_cut", regime_cut},
        {"s0", null_if_nan(limit_options.s0)},
        {"tau_nodes", limit_options.tau_nodes},
        {"end_fraction", limit_options.end_fraction},
        {"aligned_grid", aligned_grid},
        {"compare_horizon", null_if_nan(compare_horizon)}}},
      {"output",
       {{"directory", output_dir},
        {"trajectories", saved_trajectories},
        {"subsample", subsample}}}};
  if (vaccination) j["vaccination"] = vaccination_to_json(*vaccination);
  return j;
}

double alignment_shift(const Trajectory& traj, double level) {
  const auto threshold = std::int64_t(std::ceil(level * double(traj.n)));
  return traj.first_time_susceptible_below(threshold);
}

AlignedDistance compare_to_limit(const Trajectory& traj, double shift,
                                 const limit::LimitSolution& sol, double t_end,
                                 int grid_points) {
  AlignedDistance d;
  // holding the final state past the end is only valid after absorption; a
  // truncated run carries no information beyond its stopping time
  if (traj.stop != StopReason::absorbed) {
    const double run_end = traj.clock == ClockKind::transformed
                               ? traj.end_time
                               : traj.end_time - shift;
    t_end = std::min(t_end, run_end);
  }
  if (!(t_end > 0)) {
    d.sup_s = d.sup_i = d.sup_r = std::numeric_limits<double>::quiet_NaN();
    return d;
  }
  const double n = double(traj.n);
  for (int g = 0; g < grid_points; ++g) {
    const double t = t_end * double(g) / double(grid_points - 1);
    limit::LimitSolution::State ref;
    double t_run = t;
    if (traj.clock == ClockKind::transformed) {
      // the run clock is tau; map the grid through t(tau) for the reference
      ref = sol.state_at(sol.time_at(t));
    } else {
      ref = sol.state_at(t);
      t_run = shift + t;
    }
    d.sup_s = std::max(d.sup_s, std::abs(double(traj.s_at(t_run)) / n - ref.v_s));
    d.sup_i = std::max(d.sup_i, std::abs(double(traj.i_at(t_run)) / n - ref.v_i));
    d.sup_r = std::max(d.sup_r, std::abs(double(traj.r_at(t_run)) / n - ref.v_r));
  }
  return d;
}

ExperimentResult run_experiment(const ExperimentConfig& config) {
  ExperimentResult result;
  result.config = config;

  result.profile =
      config.use_seeds
          ? build_profile_with_seeds(config.n, config.distribution, config.seeds,
                                     config.recovered_fraction)
          : build_profile(config.n, config.distribution, config.alpha_s,
                          config.alpha_i, config.alpha_r);
  const auto base = HalfEdgeSystem::from_profile(result.profile);

  const auto finite_params = extract_params(result.profile, config.beta, config.rho);
  if (config.regime_auto)
    result.regime = finite_params.mu_i > config.regime_cut * finite_params.mu
                        ? limit::Regime::bulk
                        : limit::Regime::shifted;
  else
    result.regime = config.regime;

  result.params = result.regime == limit::Regime::bulk
                      ? finite_params
                      : extract_params_seedless(result.profile, config.beta, config.rho);
  if (config.vaccination)
    result.params = vaccinated_params(result.params, *config.vaccination);

  const auto theta = limit::solve_theta_inf(result.params);
  const bool solvable = result.regime == limit::Regime::bulk ||
                        theta.status == limit::ThetaStatus::interior;
  if (solvable) {
    result.limit = limit::solve_limit(result.params, result.regime, config.limit_options);
    result.has_limit = true;
  }

  if (result.regime == limit::Regime::shifted) {
    std::map<int, std::int64_t> seed_counts;
    for (auto& [k, c] : result.profile.counts)
      if (c.ni > 0) seed_counts[k] = c.ni;
    result.outbreak = outbreak_probability(result.params, seed_counts);
    result.has_outbreak_calc = true;
  }

  result.classify_fraction = !std::isnan(config.limit_options.s0)
                                 ? config.limit_options.s0
                                 : limit::default_s0(result.params);

  const double compare_end =
      result.has_limit
          ? (!std::isnan(config.compare_horizon)
                 ? config.compare_horizon
                 : (config.clock == ClockKind::transformed ? result.limit.tau.back()
                                                           : result.limit.t.back()))
          : 0.0;
  const bool compare = result.has_limit && config.aligned_grid > 1 &&
                       !(config.clock == ClockKind::transformed &&
                         result.regime == limit::Regime::shifted);

  SirEngine engine(base, config.beta, config.rho);
  EngineOptions opts;
  opts.clock = config.clock;
  opts.pregenerated = config.pregenerated;
  opts.horizon = config.engine_horizon;
  opts.stop_below_fraction = config.stop_below_fraction;
  opts.track_original_time = config.clock == ClockKind::transformed;

  const bool saving = !config.output_dir.empty() && config.saved_trajectories > 0;
  std::filesystem::path out_dir(config.output_dir);
  if (!config.output_dir.empty()) std::filesystem::create_directories(out_dir);

  result.replicates.reserve(std::size_t(config.replicates));
  std::int64_t outbreaks = 0;
  double final_s_sum = 0;
  std::vector<double> sup_s, sup_i, sup_r;

  for (int r = 0; r < config.replicates; ++r) {
    ReplicateSummary rep;
    rep.seed = config.base_seed + std::uint64_t(r);
    Rng rng(rep.seed);

    const bool keep_counts = compare || (saving && r < config.saved_trajectories);
    opts.record = keep_counts ? EngineOptions::Record::counts
                              : EngineOptions::Record::finals;

    Trajectory traj;
    if (config.vaccination) {
      const auto status = vaccinate_statuses(base, *config.vaccination, rng);
      for (std::int64_t v = 0; v < base.n; ++v)
        if (status[v] != base.status[v]) ++rep.vaccinated;
      traj = engine.run(rng, opts, status);
    } else {
      traj = engine.run(rng, opts);
    }

    rep.final_s = traj.final_susceptible;
    rep.final_i = traj.final_infective;
    rep.final_r = traj.final_recovered;
    rep.ever_infected = traj.ever_infected;
    rep.end_time = traj.end_time;
    rep.tau_star = traj.tau_star;
    rep.outbreak = double(rep.final_s) < result.classify_fraction * double(traj.n);
    if (rep.outbreak) {
      ++outbreaks;
      final_s_sum += double(rep.final_s) / double(traj.n);
    }

    if (keep_counts) {
      rep.align_shift = result.regime == limit::Regime::bulk
                            ? 0.0
                            : alignment_shift(traj, result.classify_fraction);
      if (compare && !std::isnan(rep.align_shift)) {
        const auto d = compare_to_limit(traj, rep.align_shift, result.limit,
                                        compare_end, config.aligned_grid);
        rep.sup_s = d.sup_s;
        rep.sup_i = d.sup_i;
        rep.sup_r = d.sup_r;
        sup_s.push_back(d.sup_s);
        sup_i.push_back(d.sup_i);
        sup_r.push_back(d.sup_r);
      }
      if (saving && r < config.saved_trajectories) {
        std::ostringstream csv;
        write_trajectory_csv(subsample_events(traj, config.subsample), csv);
        write_atomic(out_dir / ("trajectory_" + std::to_string(r) + ".csv"),
                     csv.str());
      }
    }
    result.replicates.push_back(rep);
  }

  result.outbreak_frequency =
      config.replicates > 0 ? double(outbreaks) / config.replicates : 0.0;
  if (outbreaks > 0) result.mean_final_s_given_outbreak = final_s_sum / outbreaks;
  result.median_sup_s = median_finite(sup_s);
  result.median_sup_i = median_finite(sup_i);
  result.median_sup_r = median_finite(sup_r);

  if (!config.output_dir.empty()) write_experiment_outputs(result);
  return result;
}

nlohmann::json ExperimentResult::summary() const {
  nlohmann::json j;
  j["config"] = config.to_json();
  j["regime"] = regime == limit::Regime::bulk ? "bulk" : "shifted";
  j["params"] = {{"alpha_s", params.alpha_s}, {"alpha_i", params.alpha_i},
                 {"alpha_r", params.alpha_r}, {"lambda", params.lambda},
                 {"mu", params.mu},           {"mu_s", params.mu_s},
                 {"mu_i", params.mu_i},       {"mu_r", params.mu_r},
                 {"beta", params.beta},       {"rho", params.rho},
                 {"r0", limit::basic_reproduction_number(params)}};
  j["limit"] = has_limit ? limit::limit_summary(limit) : nlohmann::json(nullptr);
  if (has_outbreak_calc)
    j["outbreak"] = {{"q", outbreak.q},
                     {"probability", outbreak.probability},
                     {"mean_offspring", outbreak.mean_offspring},
                     {"r0", outbreak.r0},
                     {"truncation_k", outbreak.truncation_k},
                     {"tail_mass", outbreak.tail_mass}};
  else
    j["outbreak"] = nullptr;
  j["ensemble"] = {
      {"replicates", int(replicates.size())},
      {"classify_fraction", classify_fraction},
      {"outbreak_frequency", outbreak_frequency},
      {"mean_final_s_given_outbreak", null_if_nan(mean_final_s_given_outbreak)},
      {"median_sup_s", null_if_nan(median_sup_s)},
      {"median_sup_i", null_if_nan(median_sup_i)},
      {"median_sup_r", null_if_nan(median_sup_r)}};
  return j;
}

void write_experiment_outputs(const ExperimentResult& result) {
  const std::filesystem::path dir(result.config.output_dir);
  std::filesystem::create_directories(dir);

  std::ostringstream rows;
  rows << "replicate,seed,vaccinated,final_s,final_i,final_r,ever_infected,"
          "end_time,tau_star,outbreak,align_shift,sup_s,sup_i,sup_r\n";
  char buf[360];
  for (std::size_t r = 0; r < result.replicates.size(); ++r) {
    const auto& rep = result.replicates[r];
    std::snprintf(buf, sizeof buf,
                  "%zu,%llu,%lld,%lld,%lld,%lld,%lld,%.12g,%.12g,%d,%.12g,%.12g,"
                  "%.12g,%.12g\n",
                  r, static_cast<unsigned long long>(rep.seed),
                  static_cast<long long>(rep.vaccinated),
                  static_cast<long long>(rep.final_s),
                  static_cast<long long>(rep.final_i),
                  static_cast<long long>(rep.final_r),
                  static_cast<long long>(rep.ever_infected), rep.end_time,
                  rep.tau_star, rep.outbreak ? 1 : 0, rep.align_shift, rep.sup_s,
                  rep.sup_i, rep.sup_r);
    rows << buf;
  }
  write_atomic(dir / "replicates.csv", rows.str());

  if (result.has_limit) {
    std::ostringstream csv;
    limit::write_limit_csv(result.limit, csv);
    write_atomic(dir / "limit.csv", csv.str());
  }

  write_atomic(dir / "summary.json", result.summary().dump(2) + "\n");

  std::ostringstream gp;
  gp << "set datafile separator ','\n"
     << "set key outside\n"
     << "set xlabel 'time'\n"
     << "set ylabel 'fraction of the population'\n"
     << "n = " << result.profile.n() << ".0\n";
  double shift0 = 0;
  if (!result.replicates.empty() && !std::isnan(result.replicates[0].align_shift))
    shift0 = result.replicates[0].align_shift;
  gp << "shift = " << shift0 << "\n";
  const bool traj0 = result.config.saved_trajectories > 0 &&
                     !result.config.output_dir.empty();
  gp << "plot ";
  if (result.has_limit)
    gp << "'limit.csv' using 1:3 with lines lw 2 title 'S limit', \\\n"
       << "     'limit.csv' using 1:4 with lines lw 2 title 'I limit', \\\n"
       << "     'limit.csv' using 1:5 with lines lw 2 title 'R limit'";
  if (traj0) {
    if (result.has_limit) gp << ", \\\n     ";
    gp << "'trajectory_0.csv' using ($1-shift):($3/n) with lines title 'S run', \\\n"
       << "     'trajectory_0.csv' using ($1-shift):($4/n) with lines title 'I run', \\\n"
       << "     'trajectory_0.csv' using ($1-shift):($5/n) with lines title 'R run'";
  }
  gp << "\n";
  write_atomic(dir / "plot.gp", gp.str());
}

}  // namespace episir
