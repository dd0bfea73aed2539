#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <string>

#include "fbcoord/chanmodel.hpp"
#include "fbcoord/coord.hpp"
#include "fbcoord/errors.hpp"
#include "fbcoord/experiment.hpp"
#include "fbcoord/matrixkit.hpp"
#include "fbcoord/netmodel.hpp"
#include "fbcoord/solvers.hpp"

namespace py = pybind11;
using namespace fbc;

namespace {

AlgorithmId algorithm(const std::string& name) {
  if (auto a = parse_algorithm(name)) return *a;
  throw py::value_error("unknown algorithm: " + name);
}

InitPolicy init_policy(const std::string& name) {
  if (auto p = parse_init_policy(name)) return *p;
  throw py::value_error("unknown init policy: " + name);
}

py::dict trace_entry(const TraceEntry& e) {
  py::dict d;
  d["sum_rate"] = e.sum_rate;
  d["dlt_fwd"] = e.dlt_fwd;
  d["filter_norm_dev"] = e.filter_norm_dev;
  d["active_ranks"] = e.active_ranks;
  d["rx_ranks"] = e.rx_ranks;
  d["wall_time"] = e.wall_time;
  return d;
}

py::dict result_row(const ResultRow& r) {
  py::dict d;
  d["algo"] = std::string(to_string(r.algo));
  d["L"] = r.L;
  d["K"] = r.K;
  d["M"] = r.M;
  d["N"] = r.N;
  d["d"] = r.d;
  d["T"] = r.T;
  d["snr_db"] = r.snr_db;
  d["realization"] = r.realization;
  d["sum_rate_bits"] = r.sum_rate_bits;
  d["dlt_objective"] = r.dlt_objective;
  d["overhead"] = r.overhead;
  d["wall_time_s"] = r.wall_time_s;
  return d;
}

}  // namespace

PYBIND11_MODULE(_fbcoord, m) {
  m.doc() = "Forward-backward transceiver coordination for MIMO interfering networks";

  auto base = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<InvalidInput>(m, "InvalidInput", base.ptr());
  py::register_exception<DimensionMismatch>(m, "DimensionMismatch", base.ptr());
  py::register_exception<NotPositiveDefinite>(m, "NotPositiveDefinite", base.ptr());
  py::register_exception<ConvergenceFailure>(m, "ConvergenceFailure", base.ptr());
  py::register_exception<SingularProjection>(m, "SingularProjection", base.ptr());
  py::register_exception<InfeasibleAllocation>(m, "InfeasibleAllocation", base.ptr());
  py::register_exception<ParseError>(m, "ParseError", base.ptr());

  m.def("cholesky", [](const CMat& q) { return cholesky(q).lower; }, py::arg("q"));
  m.def(
      "herm_eig",
      [](const CMat& a) {
        EigenPair e = herm_eig(a);
        return py::make_tuple(e.values, e.vectors);
      },
      py::arg("m"));
  m.def("whiten", [](const CMat& r, const CMat& q) { return whiten(r, q).matrix; }, py::arg("r"), py::arg("q"));

  m.def("gmrq_max", &gmrq_max, py::arg("r"), py::arg("q"), py::arg("rank"));
  m.def("rank_adapt", &rank_adapt, py::arg("r"), py::arg("q"), py::arg("max_rank"));

  py::class_<PowerAllocation>(m, "PowerAllocation")
      .def_readonly("x", &PowerAllocation::x)
      .def_readonly("mu", &PowerAllocation::mu)
      .def_readonly("alpha", &PowerAllocation::alpha)
      .def_readonly("beta", &PowerAllocation::beta)
      .def_readonly("zeta", &PowerAllocation::zeta);
  m.def("power_alloc", &power_alloc, py::arg("alpha"), py::arg("beta"), py::arg("zeta"));

  py::class_<SolverOutput>(m, "SolverOutput")
      .def_readonly("filter", &SolverOutput::filter)
      .def_readonly("allocation", &SolverOutput::allocation)
      .def_readonly("active_streams", &SolverOutput::active_streams);
  m.def("nh_waterfill", &nh_waterfill, py::arg("r"), py::arg("q"), py::arg("rank"), py::arg("zeta"));
  m.def("logtrace_cost", &logtrace_cost, py::arg("x"), py::arg("r"), py::arg("q"));

  py::class_<NetworkConfig>(m, "NetworkConfig")
      .def_static("uniform", &NetworkConfig::uniform, py::arg("cells"), py::arg("users_per_cell"),
                  py::arg("tx_antennas"), py::arg("rx_antennas"), py::arg("streams"), py::arg("noise"),
                  py::arg("noise_reverse") = py::none(), py::arg("tx_power") = 1.0,
                  py::arg("rx_filter_power") = 1.0)
      .def_readwrite("cells", &NetworkConfig::cells)
      .def_readwrite("users_per_cell", &NetworkConfig::users_per_cell)
      .def_readwrite("tx_antennas", &NetworkConfig::tx_antennas)
      .def_readwrite("rx_antennas", &NetworkConfig::rx_antennas)
      .def_readwrite("streams", &NetworkConfig::streams)
      .def_readwrite("tx_power", &NetworkConfig::tx_power)
      .def_readwrite("rx_filter_power", &NetworkConfig::rx_filter_power)
      .def_readwrite("noise_fwd", &NetworkConfig::noise_fwd)
      .def_readwrite("noise_rev", &NetworkConfig::noise_rev)
      .def_property_readonly("num_users", &NetworkConfig::num_users)
      .def("validate", &NetworkConfig::validate);

  py::class_<ChannelSet>(m, "ChannelSet")
      .def_readonly("cells", &ChannelSet::cells)
      .def_readonly("users", &ChannelSet::users)
      .def("at", py::overload_cast<int, int>(&ChannelSet::at, py::const_), py::arg("bs"), py::arg("user"));
  m.def("iid_channels", &iid_channels, py::arg("cfg"), py::arg("seed"));

  py::class_<FilterBank>(m, "FilterBank")
      .def(py::init<>())
      .def_readwrite("rx", &FilterBank::rx)
      .def_readwrite("tx", &FilterBank::tx);
  m.def("sum_rate", &sum_rate, py::arg("cfg"), py::arg("channels"), py::arg("filters"));
  m.def(
      "dlt_objective",
      [](const NetworkConfig& cfg, const ChannelSet& ch, const FilterBank& fb, bool reverse) {
        return dlt_objective(cfg, ch, fb, reverse ? Side::kReverse : Side::kForward);
      },
      py::arg("cfg"), py::arg("channels"), py::arg("filters"), py::arg("reverse") = false);

  m.def("algorithms", [] {
    std::vector<std::string> names;
    for (AlgorithmId a : all_algorithms()) names.emplace_back(to_string(a));
    return names;
  });
  m.def(
      "run",
      [](const std::string& algo, const NetworkConfig& cfg, const ChannelSet& ch, int iterations,
         std::uint64_t seed, const std::string& init, bool ra_last_iteration_only) {
        RunOptions opts;
        opts.init = init_policy(init);
        opts.ra_last_iteration_only = ra_last_iteration_only;
        RunResult res;
        {
          py::gil_scoped_release release;
          res = run(algorithm(algo), cfg, ch, iterations, seed, opts);
        }
        py::list trace;
        for (const TraceEntry& e : res.trace.entries) trace.append(trace_entry(e));
        return py::make_tuple(res.filters, trace);
      },
      py::arg("algo"), py::arg("cfg"), py::arg("channels"), py::arg("iterations"), py::arg("seed") = 0,
      py::arg("init") = "eigen", py::arg("ra_last_iteration_only") = false);

  m.def(
      "overhead",
      [](const std::string& family, std::int64_t t, std::int64_t k, std::int64_t l, std::int64_t mm,
         std::int64_t n, std::int64_t d, std::int64_t turbo) {
        auto f = parse_overhead_family(family);
        if (!f) throw py::value_error("unknown overhead family: " + family);
        return overhead(*f, t, k, l, mm, n, d, turbo);
      },
      py::arg("family"), py::arg("iterations"), py::arg("users_per_cell"), py::arg("cells"),
      py::arg("tx_antennas"), py::arg("rx_antennas"), py::arg("streams"), py::arg("turbo_iterations") = 0);

  py::class_<ExperimentSpec>(m, "ExperimentSpec")
      .def_readwrite("network", &ExperimentSpec::network)
      .def_readwrite("iterations", &ExperimentSpec::iteration_list)
      .def_readwrite("realizations", &ExperimentSpec::realizations)
      .def_readwrite("seed", &ExperimentSpec::master_seed)
      .def_readwrite("workers", &ExperimentSpec::workers)
      .def_readwrite("output_path", &ExperimentSpec::output_path)
      .def_property(
          "algos",
          [](const ExperimentSpec& s) {
            std::vector<std::string> names;
            for (AlgorithmId a : s.algos) names.emplace_back(to_string(a));
            return names;
          },
          [](ExperimentSpec& s, const std::vector<std::string>& names) {
            s.algos.clear();
            for (const std::string& n : names) s.algos.push_back(algorithm(n));
          })
      .def("snr_points", &ExperimentSpec::snr_points)
      .def("validate", &ExperimentSpec::validate)
      .def("serialize", &serialize_experiment);
  m.def("parse_experiment", &parse_experiment, py::arg("text"));
  m.def("load_experiment", &load_experiment, py::arg("path"));
  m.def(
      "run_experiment",
      [](const ExperimentSpec& spec, int workers) {
        ExperimentResult res;
        {
          py::gil_scoped_release release;
          res = run_experiment(spec, workers);
        }
        py::list rows;
        for (const ResultRow& r : res.rows) rows.append(result_row(r));
        py::list failures;
        for (const RowFailure& f : res.failures) {
          failures.append(py::make_tuple(std::string(to_string(f.algo)), f.snr_db, f.realization, f.message));
        }
        return py::make_tuple(rows, failures);
      },
      py::arg("spec"), py::arg("workers") = 0);
}
