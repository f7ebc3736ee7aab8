#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cstdint>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <tuple>
#include <vector>

#include "episir/config_graph.hpp"
#include "episir/degree_profile.hpp"
#include "episir/experiment.hpp"
#include "episir/limit_system.hpp"
#include "episir/outbreak.hpp"
#include "episir/rng.hpp"
#include "episir/sir_engine.hpp"
#include "episir/vaccination.hpp"
#include "json.hpp"

namespace py = pybind11;
using namespace episir;

namespace {

py::object json_to_py(const nlohmann::json& j) {
  switch (j.type()) {
    case nlohmann::json::value_t::boolean: return py::bool_(j.get<bool>());
    case nlohmann::json::value_t::number_integer:
      return py::int_(j.get<std::int64_t>());
    case nlohmann::json::value_t::number_unsigned:
      return py::int_(j.get<std::uint64_t>());
    case nlohmann::json::value_t::number_float:
      return py::float_(j.get<double>());
    case nlohmann::json::value_t::string: return py::str(j.get<std::string>());
    case nlohmann::json::value_t::array: {
      py::list out;
      for (const auto& item : j) out.append(json_to_py(item));
      return out;
    }
    case nlohmann::json::value_t::object: {
      py::dict out;
      for (const auto& [key, value] : j.items())
        out[py::str(key)] = json_to_py(value);
      return out;
    }
    default: return py::none();
  }
}

nlohmann::json py_to_json(const py::handle& obj) {
  if (obj.is_none()) return nullptr;
  if (py::isinstance<py::bool_>(obj)) return obj.cast<bool>();
  if (py::isinstance<py::int_>(obj)) return obj.cast<std::int64_t>();
  if (py::isinstance<py::float_>(obj)) return obj.cast<double>();
  if (py::isinstance<py::str>(obj)) return obj.cast<std::string>();
  if (py::isinstance<py::dict>(obj)) {
    auto j = nlohmann::json::object();
    for (auto item : obj.cast<py::dict>())
      j[item.first.cast<std::string>()] = py_to_json(item.second);
    return j;
  }
  if (py::isinstance<py::list>(obj) || py::isinstance<py::tuple>(obj)) {
    auto j = nlohmann::json::array();
    for (auto item : obj.cast<py::sequence>()) j.push_back(py_to_json(item));
    return j;
  }
  throw std::invalid_argument("unsupported value type in config");
}

ClockKind clock_from_string(const std::string& name) {
  if (name == "original") return ClockKind::original;
  if (name == "transformed") return ClockKind::transformed;
  throw std::invalid_argument("unknown clock: " + name);
}

const char* clock_name(ClockKind c) {
  return c == ClockKind::original ? "original" : "transformed";
}

const char* stop_name(StopReason s) {
  switch (s) {
    case StopReason::absorbed: return "absorbed";
    case StopReason::horizon: return "horizon";
    case StopReason::threshold: return "threshold";
    case StopReason::max_events: return "max_events";
  }
  return "absorbed";
}

limit::Regime regime_from_string(const std::string& name) {
  if (name == "bulk") return limit::Regime::bulk;
  if (name == "shifted") return limit::Regime::shifted;
  throw std::invalid_argument("unknown regime: " + name);
}

const char* theta_status_name(limit::ThetaStatus s) {
  switch (s) {
    case limit::ThetaStatus::interior: return "interior";
    case limit::ThetaStatus::subcritical: return "subcritical";
    case limit::ThetaStatus::degenerate: return "degenerate";
  }
  return "interior";
}

VaccinationPolicy::Kind vaccination_kind_from_string(const std::string& name) {
  if (name == "uniform") return VaccinationPolicy::Kind::uniform;
  if (name == "edgewise") return VaccinationPolicy::Kind::edgewise;
  if (name == "by_degree") return VaccinationPolicy::Kind::by_degree;
  throw std::invalid_argument("unknown vaccination strategy: " + name);
}

std::map<int, DegreeCounts> counts_from_tuples(
    const std::map<int, std::tuple<std::int64_t, std::int64_t, std::int64_t>>& counts) {
  std::map<int, DegreeCounts> out;
  for (const auto& [k, c] : counts)
    out[k] = DegreeCounts{std::get<0>(c), std::get<1>(c), std::get<2>(c)};
  return out;
}

EngineOptions make_options(const std::string& clock, const std::string& record,
                           bool pregenerated, bool track_original_time,
                           double horizon, double stop_below_fraction,
                           std::int64_t max_events) {
  EngineOptions opts;
  opts.clock = clock_from_string(clock);
  if (record == "counts") opts.record = EngineOptions::Record::counts;
  else if (record == "finals") opts.record = EngineOptions::Record::finals;
  else throw std::invalid_argument("unknown record mode: " + record);
  opts.pregenerated = pregenerated;
  opts.track_original_time = track_original_time;
  opts.horizon = horizon;
  opts.stop_below_fraction = stop_below_fraction;
  opts.max_events = max_events;
  return opts;
}

constexpr double kInf = std::numeric_limits<double>::infinity();

}  // namespace

PYBIND11_MODULE(_episir, m) {
  m.doc() = "event-driven SIR on configuration-model graphs, with fluid "
            "limits, outbreak odds, and vaccination thresholds";
  m.attr("__version__") = EPISIR_VERSION;

  py::class_<Rng>(m, "Rng", "deterministic generator; every draw depends only on the seed")
      .def(py::init<std::uint64_t>(), py::arg("seed"));

  py::enum_<Status>(m, "Status")
      .value("susceptible", Status::susceptible)
      .value("infective", Status::infective)
      .value("recovered", Status::recovered);

  py::class_<DegreeDistribution>(m, "DegreeDistribution")
      .def_static("table", &DegreeDistribution::table, py::arg("weights"))
      .def_static("regular", &DegreeDistribution::regular, py::arg("k"))
      .def_static("poisson", &DegreeDistribution::poisson, py::arg("mean"),
                  py::arg("tail_eps") = 1e-12)
      .def_static("power_law", &DegreeDistribution::power_law, py::arg("exponent"),
                  py::arg("k_min"), py::arg("k_max") = 0, py::arg("tail_eps") = 1e-12)
      .def_readonly("pmf", &DegreeDistribution::pmf)
      .def_readonly("truncation_k", &DegreeDistribution::truncation_k)
      .def_readonly("tail_mass", &DegreeDistribution::tail_mass)
      .def("mean_degree", &DegreeDistribution::mean_degree);

  py::class_<DegreeProfile>(m, "DegreeProfile")
      .def_property_readonly("counts",
                             [](const DegreeProfile& p) {
                               std::map<int, std::tuple<std::int64_t, std::int64_t,
                                                        std::int64_t>> out;
                               for (const auto& [k, c] : p.counts)
                                 out[k] = {c.ns, c.ni, c.nr};
                               return out;
                             },
                             "degree -> (susceptible, infective, recovered)")
      .def_property_readonly("n", [](const DegreeProfile& p) { return p.n(); })
      .def_property_readonly(
          "half_edges", [](const DegreeProfile& p) { return p.half_edges(); })
      .def_property_readonly(
          "max_degree", [](const DegreeProfile& p) { return p.max_degree(); })
      .def("validate", &DegreeProfile::validate);

  m.def("build_profile",
        [](const std::map<int, std::tuple<std::int64_t, std::int64_t, std::int64_t>>&
               counts) { return build_profile(counts_from_tuples(counts)); },
        py::arg("counts"), "explicit degree -> (ns, ni, nr) counts");
  m.def("build_profile",
        [](std::int64_t n, const DegreeDistribution& dist, double alpha_s,
           double alpha_i, double alpha_r) {
          return build_profile(n, dist, alpha_s, alpha_i, alpha_r);
        },
        py::arg("n"), py::arg("distribution"), py::arg("alpha_s"), py::arg("alpha_i"),
        py::arg("alpha_r") = 0.0);
  m.def("build_profile_with_seeds", &build_profile_with_seeds, py::arg("n"),
        py::arg("distribution"), py::arg("infective"),
        py::arg("recovered_fraction") = 0.0);

  py::class_<AsymptoticParams>(m, "AsymptoticParams")
      .def_readonly("alpha_s", &AsymptoticParams::alpha_s)
      .def_readonly("alpha_i", &AsymptoticParams::alpha_i)
      .def_readonly("alpha_r", &AsymptoticParams::alpha_r)
      .def_readonly("p", &AsymptoticParams::p, "susceptible degree pmf")
      .def_readonly("lambda_", &AsymptoticParams::lambda)
      .def_readonly("mu", &AsymptoticParams::mu)
      .def_readonly("mu_s", &AsymptoticParams::mu_s)
      .def_readonly("mu_i", &AsymptoticParams::mu_i)
      .def_readonly("mu_r", &AsymptoticParams::mu_r)
      .def_readonly("beta", &AsymptoticParams::beta)
      .def_readonly("rho", &AsymptoticParams::rho)
      .def("p_at", &AsymptoticParams::p_at, py::arg("k"))
      .def("validate", &AsymptoticParams::validate);

  m.def("extract_params", &extract_params, py::arg("profile"), py::arg("beta"),
        py::arg("rho"));
  m.def("extract_params_seedless", &extract_params_seedless, py::arg("profile"),
        py::arg("beta"), py::arg("rho"),
        "seeds removed and the rest renormalised, as the branching "
        "calculations require");
  m.def("params_from_distribution", &params_from_distribution,
        py::arg("distribution"), py::arg("alpha_s"), py::arg("alpha_i"),
        py::arg("alpha_r"), py::arg("beta"), py::arg("rho"));

  // ---- analytic limit ----------------------------------------------------
  m.def("basic_reproduction_number", &limit::basic_reproduction_number,
        py::arg("params"));
  m.def("susceptible_fraction", &limit::susceptible_fraction, py::arg("params"),
        py::arg("theta"));
  m.def("edge_deficit", &limit::edge_deficit, py::arg("params"), py::arg("theta"));
  m.def("solve_theta_inf",
        [](const AsymptoticParams& params) {
          const auto th = limit::solve_theta_inf(params);
          py::dict out;
          out["status"] = theta_status_name(th.status);
          out["value"] = th.value;
          return out;
        },
        py::arg("params"));
  m.def("default_s0", &limit::default_s0, py::arg("params"));

  py::class_<limit::LimitSolution>(m, "LimitSolution")
      .def_property_readonly(
          "regime",
          [](const limit::LimitSolution& s) {
            return s.regime == limit::Regime::bulk ? "bulk" : "shifted";
          })
      .def_readonly("params", &limit::LimitSolution::params)
      .def_property_readonly("theta_inf",
                             [](const limit::LimitSolution& s) {
                               py::dict out;
                               out["status"] = theta_status_name(s.theta_inf.status);
                               out["value"] = s.theta_inf.value;
                               return out;
                             })
      .def_readonly("r0", &limit::LimitSolution::r0)
      .def_readonly("s0", &limit::LimitSolution::s0)
      .def_readonly("tau0", &limit::LimitSolution::tau0)
      .def_readonly("tau_star", &limit::LimitSolution::tau_star)
      .def_readonly("cross_check_error", &limit::LimitSolution::cross_check_error)
      .def_readonly("t", &limit::LimitSolution::t)
      .def_readonly("tau", &limit::LimitSolution::tau)
      .def_readonly("theta", &limit::LimitSolution::theta)
      .def_readonly("v_s", &limit::LimitSolution::v_s)
      .def_readonly("v_i", &limit::LimitSolution::v_i)
      .def_readonly("v_r", &limit::LimitSolution::v_r)
      .def_readonly("h_s", &limit::LimitSolution::h_s)
      .def_readonly("h_i", &limit::LimitSolution::h_i)
      .def_readonly("h_r", &limit::LimitSolution::h_r)
      .def_readonly("h_x", &limit::LimitSolution::h_x)
      .def_readonly("p_i", &limit::LimitSolution::p_i)
      .def("time_at", &limit::LimitSolution::time_at, py::arg("tau"))
      .def("tau_at", &limit::LimitSolution::tau_at, py::arg("t"))
      .def("theta_at", &limit::LimitSolution::theta_at, py::arg("t"))
      .def("state_at",
           [](const limit::LimitSolution& s, double t) {
             const auto st = s.state_at(t);
             py::dict out;
             out["theta"] = st.theta;
             out["v_s"] = st.v_s;
             out["v_i"] = st.v_i;
             out["v_r"] = st.v_r;
             return out;
           },
           py::arg("t"))
      .def("summary",
           [](const limit::LimitSolution& s) { return json_to_py(limit::limit_summary(s)); })
      .def("csv", [](const limit::LimitSolution& s) {
        std::ostringstream out;
        limit::write_limit_csv(s, out);
        return out.str();
      });

  m.def("solve_limit",
        [](const AsymptoticParams& params, const std::string& regime, int tau_nodes,
           double s0, double end_fraction, double horizon) {
          limit::LimitOptions opts;
          opts.tau_nodes = tau_nodes;
          opts.s0 = s0;
          opts.end_fraction = end_fraction;
          opts.horizon = horizon;
          return limit::solve_limit(params, regime_from_string(regime), opts);
        },
        py::arg("params"), py::arg("regime") = "bulk", py::arg("tau_nodes") = 2001,
        py::arg("s0") = std::numeric_limits<double>::quiet_NaN(),
        py::arg("end_fraction") = 1e-9, py::arg("horizon") = kInf);
  m.def("volz_residual", &limit::volz_residual, py::arg("params"), py::arg("t"),
        py::arg("theta"));

  // ---- graph construction ------------------------------------------------
  py::class_<HalfEdgeSystem>(m, "HalfEdgeSystem")
      .def_static("from_profile", &HalfEdgeSystem::from_profile, py::arg("profile"))
      .def_readonly("n", &HalfEdgeSystem::n)
      .def_readonly("degree", &HalfEdgeSystem::degree)
      .def_readonly("status", &HalfEdgeSystem::status)
      .def_readonly("owner", &HalfEdgeSystem::owner)
      .def_readonly("partner", &HalfEdgeSystem::partner)
      .def_property_readonly("total_half_edges", &HalfEdgeSystem::total_half_edges);

  m.def("pair_configuration", &pair_configuration, py::arg("system"), py::arg("rng"));

  py::class_<DefectCount>(m, "DefectCount")
      .def_readonly("loops", &DefectCount::loops)
      .def_readonly("parallel_pairs", &DefectCount::parallel_pairs)
      .def_property_readonly("total", &DefectCount::total)
      .def_property_readonly("simple", &DefectCount::simple);

  m.def("count_defects", &count_defects, py::arg("system"));
  m.def("sample_simple",
        [](const DegreeProfile& profile, Rng& rng, int max_attempts) {
          auto res = sample_simple(profile, rng, max_attempts);
          return py::make_tuple(std::move(res.system), res.attempts);
        },
        py::arg("profile"), py::arg("rng"), py::arg("max_attempts") = 1000,
        "uniform simple graph by rejection; returns (system, attempts)");
  m.def("edge_list", [](const HalfEdgeSystem& sys) {
    std::ostringstream out;
    write_edge_list(sys, out);
    return out.str();
  });

  // ---- simulation --------------------------------------------------------
  py::class_<Trajectory>(m, "Trajectory")
      .def_property_readonly(
          "clock", [](const Trajectory& t) { return clock_name(t.clock); })
      .def_property_readonly(
          "stop", [](const Trajectory& t) { return stop_name(t.stop); })
      .def_readonly("n", &Trajectory::n)
      .def_readonly("s0", &Trajectory::s0)
      .def_readonly("i0", &Trajectory::i0)
      .def_readonly("r0", &Trajectory::r0)
      .def_readonly("x_s0", &Trajectory::x_s0)
      .def_readonly("x_i0", &Trajectory::x_i0)
      .def_readonly("x_r0", &Trajectory::x_r0)
      .def_readonly("time", &Trajectory::time)
      .def_property_readonly("kind",
                             [](const Trajectory& t) {
                               std::vector<std::string> out;
                               out.reserve(t.kind.size());
                               for (auto k : t.kind) out.emplace_back(event_kind_name(k));
                               return out;
                             })
      .def_readonly("s", &Trajectory::s)
      .def_readonly("i", &Trajectory::i)
      .def_readonly("r", &Trajectory::r)
      .def_readonly("x_s", &Trajectory::x_s)
      .def_readonly("x_i", &Trajectory::x_i)
      .def_readonly("x_r", &Trajectory::x_r)
      .def_readonly("original_time", &Trajectory::original_time)
      .def_readonly("z", &Trajectory::z)
      .def_readonly("z0", &Trajectory::z0)
      .def_readonly("end_time", &Trajectory::end_time)
      .def_readonly("tau_star", &Trajectory::tau_star)
      .def_readonly("final_susceptible", &Trajectory::final_susceptible)
      .def_readonly("final_infective", &Trajectory::final_infective)
      .def_readonly("final_recovered", &Trajectory::final_recovered)
      .def_readonly("ever_infected", &Trajectory::ever_infected)
      .def("events", &Trajectory::events)
      .def("s_at", &Trajectory::s_at, py::arg("t"))
      .def("i_at", &Trajectory::i_at, py::arg("t"))
      .def("r_at", &Trajectory::r_at, py::arg("t"))
      .def("first_time_susceptible_below", &Trajectory::first_time_susceptible_below,
           py::arg("threshold"))
      .def("csv", [](const Trajectory& t) {
        std::ostringstream out;
        write_trajectory_csv(t, out);
        return out.str();
      });

  m.def("transformed_times", &transformed_times, py::arg("trajectory"),
        py::arg("beta"));

  py::class_<SirEngine>(m, "SirEngine")
      .def(py::init<const HalfEdgeSystem&, double, double>(), py::arg("base"),
           py::arg("beta"), py::arg("rho"))
      .def_property_readonly("beta", &SirEngine::beta)
      .def_property_readonly("rho", &SirEngine::rho)
      .def("statuses", &SirEngine::statuses)
      .def("run",
           [](SirEngine& self, Rng& rng, const std::string& clock,
              const std::string& record, bool pregenerated, bool track_original_time,
              double horizon, double stop_below_fraction, std::int64_t max_events,
              const std::optional<std::vector<Status>>& initial_status) {
             const auto opts =
                 make_options(clock, record, pregenerated, track_original_time,
                              horizon, stop_below_fraction, max_events);
             return initial_status ? self.run(rng, opts, *initial_status)
                                   : self.run(rng, opts);
           },
           py::arg("rng"), py::arg("clock") = "original",
           py::arg("record") = "counts", py::arg("pregenerated") = false,
           py::arg("track_original_time") = false, py::arg("horizon") = kInf,
           py::arg("stop_below_fraction") = 0.0, py::arg("max_events") = -1,
           py::arg("initial_status") = py::none());

  m.def("run_timed_sir",
        [](const HalfEdgeSystem& base, double beta, double rho, Rng& rng,
           bool pregenerated, double horizon) {
          TimedOptions opts;
          opts.pregenerated = pregenerated;
          opts.horizon = horizon;
          return run_timed_sir(base, beta, rho, rng, opts);
        },
        py::arg("base"), py::arg("beta"), py::arg("rho"), py::arg("rng"),
        py::arg("pregenerated") = false, py::arg("horizon") = kInf,
        "timer variant tracking the red contact-line count Z");

  // ---- early-phase branching ---------------------------------------------
  m.def("transmission_pmf", &transmission_pmf, py::arg("l"), py::arg("beta"),
        py::arg("rho"));
  m.def("transmission_pgf", &transmission_pgf, py::arg("l"), py::arg("beta"),
        py::arg("rho"), py::arg("x"));

  py::class_<OffspringModel>(m, "OffspringModel")
      .def_readonly("pmf", &OffspringModel::pmf)
      .def_readonly("mean", &OffspringModel::mean)
      .def_readonly("truncation_k", &OffspringModel::truncation_k)
      .def_readonly("tail_mass", &OffspringModel::tail_mass)
      .def("pgf", &OffspringModel::pgf, py::arg("x"))
      .def("pgf_derivative", &OffspringModel::pgf_derivative, py::arg("x"));

  m.def("offspring_model", &offspring_model, py::arg("params"),
        py::arg("truncation_k") = 0);
  m.def("extinction_probability", &extinction_probability, py::arg("model"));

  py::class_<OutbreakResult>(m, "OutbreakResult")
      .def_readonly("q", &OutbreakResult::q)
      .def_readonly("probability", &OutbreakResult::probability)
      .def_readonly("mean_offspring", &OutbreakResult::mean_offspring)
      .def_readonly("r0", &OutbreakResult::r0)
      .def_readonly("truncation_k", &OutbreakResult::truncation_k)
      .def_readonly("tail_mass", &OutbreakResult::tail_mass);

  m.def("outbreak_probability", &outbreak_probability, py::arg("params"),
        py::arg("infective_counts"));
  m.def("simulate_branching",
        [](const OffspringModel& model,
           const std::map<int, std::int64_t>& infective_counts, Rng& rng,
           std::int64_t cap) {
          const auto run = simulate_branching(model, infective_counts, rng, cap);
          return py::make_tuple(run.extinct, run.progeny);
        },
        py::arg("model"), py::arg("infective_counts"), py::arg("rng"),
        py::arg("cap") = 1000000, "returns (extinct, progeny)");

  // ---- vaccination ---------------------------------------------------------
  py::class_<VaccinationPolicy>(m, "VaccinationPolicy")
      .def_static("uniform", &VaccinationPolicy::uniform, py::arg("v"))
      .def_static("edgewise", &VaccinationPolicy::edgewise, py::arg("u"))
      .def_static("by_degree", &VaccinationPolicy::by_degree, py::arg("pi"))
      .def_property_readonly("kind",
                             [](const VaccinationPolicy& p) {
                               switch (p.kind) {
                                 case VaccinationPolicy::Kind::uniform: return "uniform";
                                 case VaccinationPolicy::Kind::edgewise: return "edgewise";
                                 case VaccinationPolicy::Kind::by_degree: return "by_degree";
                               }
                               return "uniform";
                             })
      .def_readonly("level", &VaccinationPolicy::level)
      .def("at", &VaccinationPolicy::at, py::arg("k"))
      .def("validate", &VaccinationPolicy::validate);

  m.def("vaccinated_params", &vaccinated_params, py::arg("params"), py::arg("policy"));
  m.def("vaccinated_reproduction_number", &vaccinated_reproduction_number,
        py::arg("params"), py::arg("policy"));
  m.def("critical_coverage",
        [](const AsymptoticParams& params, const std::string& kind) {
          return critical_coverage(params, vaccination_kind_from_string(kind));
        },
        py::arg("params"), py::arg("kind") = "uniform");
  m.def("vaccinate_profile",
        [](const DegreeProfile& base, const VaccinationPolicy& policy, Rng& rng) {
          auto draw = vaccinate_profile(base, policy, rng);
          return py::make_tuple(std::move(draw.profile), draw.moved_by_degree,
                                draw.moved);
        },
        py::arg("profile"), py::arg("policy"), py::arg("rng"),
        "returns (profile, moved_by_degree, moved)");
  m.def("vaccinate_statuses", &vaccinate_statuses, py::arg("base"), py::arg("policy"),
        py::arg("rng"));

  // ---- experiment driver ---------------------------------------------------
  m.def("run_experiment",
        [](const py::dict& config) {
          const auto cfg = ExperimentConfig::from_json(py_to_json(config));
          const auto result = ::episir::run_experiment(cfg);
          return json_to_py(result.summary());
        },
        py::arg("config"),
        "config uses the same schema as the command-line json files; returns "
        "the summary and writes any configured outputs");
}
