// SPDX-License-Identifier: Apache-2.0
#include <sstream>
#include <string>

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "entconc/bounds.hpp"
#include "entconc/cli.hpp"
#include "entconc/coding.hpp"
#include "entconc/mgf.hpp"
#include "entconc/montecarlo.hpp"

namespace py = pybind11;
using namespace entconc;

namespace {

LogBase base_of(const std::string& s) {
  if (s == "nat") return LogBase::natural;
  if (s == "bit") return LogBase::bits;
  throw InvalidArgument("base must be 'nat' or 'bit'");
}

Side side_of(const std::string& s) {
  if (s == "left") return Side::left;
  if (s == "right") return Side::right;
  if (s == "two-sided") return Side::two_sided;
  throw InvalidArgument("side must be 'left', 'right' or 'two-sided'");
}

py::dict bound_dict(const BoundReport& b) {
  py::dict d;
  d["family"] = std::string(to_string(b.family));
  d["side"] = std::string(to_string(b.side));
  d["value"] = b.value;
  d["regime"] = std::string(to_string(b.regime));
  d["valid"] = b.valid;
  d["applicable"] = b.applicable;
  d["effective_K"] = b.effective_K;
  d["note"] = b.note;
  return d;
}

py::int_ big(const BigInt& v) { return py::int_(py::str(v.str())); }

TailQuery query(std::size_t n, std::size_t K, double eps, const std::string& side,
                const std::string& base) {
  return TailQuery{n, K, eps, side_of(side), base_of(base)};
}

py::dict trace_dict(const OptimizationTrace& t) {
  py::dict d;
  d["oracle_value"] = t.oracle_value;
  d["max_value"] = t.max_value;
  d["gap"] = t.gap;
  d["maximizer"] = t.maximizer;
  d["closed_form_applies"] = t.closed_form_applies;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Concentration bounds for discrete-entropy log-likelihoods";
  m.attr("__version__") = std::string(kVersion);

  static py::exception<Error> error(m, "Error");
  static py::exception<InvalidArgument> invalid(m, "InvalidArgument", error.ptr());
  static py::exception<DomainError> domain(m, "DomainError", error.ptr());
  static py::exception<Infeasible> infeasible(m, "Infeasible", error.ptr());
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const InvalidArgument& e) {
      PyErr_SetString(invalid.ptr(), e.what());
    } catch (const DomainError& e) {
      PyErr_SetString(domain.ptr(), e.what());
    } catch (const Infeasible& e) {
      PyErr_SetString(infeasible.ptr(), e.what());
    } catch (const Error& e) {
      PyErr_SetString(error.ptr(), e.what());
    }
  });

  // bounds
  m.def("bstar", &bstar, py::arg("K"));
  m.def("main_bound", [](std::size_t n, std::size_t K, double eps, const std::string& base) {
    return bound_dict(main_bound(query(n, K, eps, "two-sided", base)));
  }, py::arg("n"), py::arg("K"), py::arg("epsilon"), py::arg("base") = "nat");
  m.def("right_tail_uniform", [](std::size_t n, std::size_t K, double eps) {
    return bound_dict(right_tail_uniform(query(n, K, eps, "right", "nat")));
  }, py::arg("n"), py::arg("K"), py::arg("epsilon"));
  m.def("left_tail_uniform", [](std::size_t n, std::size_t K, double eps) {
    return bound_dict(left_tail_uniform(query(n, K, eps, "left", "nat")));
  }, py::arg("n"), py::arg("K"), py::arg("epsilon"));
  m.def("zhao2020_bound", [](std::size_t n, std::size_t K, double eps) {
    return bound_dict(zhao2020_bound(query(n, K, eps, "two-sided", "nat")));
  }, py::arg("n"), py::arg("K"), py::arg("epsilon"));
  m.def("compare_bounds", [](std::size_t n, std::size_t K, double eps, const std::string& base) {
    py::list rows;
    for (const auto& b : compare_bounds(query(n, K, eps, "two-sided", base), nullptr)) {
      rows.append(bound_dict(b));
    }
    return rows;
  }, py::arg("n"), py::arg("K"), py::arg("epsilon"), py::arg("base") = "nat");

  // mgf-lab
  m.def("mgf_exact", [](double lam, std::vector<double> p) {
    return mgf_exact(lam, ProbVector(std::move(p))).value;
  }, py::arg("lam"), py::arg("p"));
  m.def("mgf_upper", &mgf_upper, py::arg("lam"), py::arg("K"));
  m.def("lambda_domain", [](std::size_t K) {
    const auto d = lambda_domain(K);
    return py::make_tuple(d.lower, d.upper);
  }, py::arg("K"));
  m.def("f_closed_form", &f_closed_form, py::arg("lam"), py::arg("K"));
  m.def("variance_max_oracle", [](std::size_t K) { return trace_dict(variance_max_oracle(K)); },
        py::arg("K"));
  m.def("f_max_oracle", [](double lam, std::size_t K) { return trace_dict(f_max_oracle(lam, K)); },
        py::arg("lam"), py::arg("K"));
  m.def("appendix_g_check", [](std::size_t K, std::size_t points) {
    const auto r = appendix_g_check(K, GridSpec{points});
    py::dict d;
    d["min_g"] = r.min_g;
    d["g_at_zero"] = r.g_at_zero;
    d["dg_at_zero"] = r.dg_at_zero;
    d["passed"] = r.passed();
    return d;
  }, py::arg("K"), py::arg("points") = 10000);

  // montecarlo
  m.def("estimate_tail", [](const std::string& gen, std::size_t K, std::size_t n,
                            std::vector<double> eps, std::size_t reps, std::uint64_t seed,
                            std::size_t workers) {
    ExperimentConfig cfg{generate_params(parse_generator(gen), K, n, seed),
                         {reps, std::move(eps), seed, workers}};
    py::list out;
    for (const auto& e : estimate_tail(cfg)) {
      py::dict d;
      d["epsilon"] = e.epsilon;
      d["freq_left"] = e.freq_left;
      d["freq_right"] = e.freq_right;
      d["freq_two_sided"] = e.freq_two_sided;
      d["ci_two_sided"] = e.ci_two_sided;
      d["violations"] = dominance_violations(e).size();
      out.append(d);
    }
    return out;
  }, py::arg("gen"), py::arg("K"), py::arg("n"), py::arg("epsilons"), py::arg("replicates"),
     py::arg("seed") = 0, py::arg("workers") = 1);
  m.def("counterexample_exact_tail", [](std::size_t K, std::size_t n, double eps) {
    const auto r = counterexample_exact_tail(K, n, eps);
    py::dict d;
    d["exact_tail"] = r.exact_tail;
    d["exact_left"] = r.exact_left;
    d["exact_right"] = r.exact_right;
    d["variance"] = r.variance;
    d["normal_floor"] = r.normal_floor;
    return d;
  }, py::arg("K"), py::arg("n"), py::arg("epsilon"));

  // coding
  m.def("essential_bit_content", [](std::vector<double> p, std::size_t n, double delta) {
    const auto e = essential_bit_content(SourceModel{ProbVector(std::move(p)), n}, delta);
    py::dict d;
    d["set_size"] = big(e.set_size);
    d["h_delta"] = e.h_delta;
    d["mass"] = e.mass;
    return d;
  }, py::arg("p"), py::arg("n"), py::arg("delta"));
  m.def("source_coding_thresholds", [](std::size_t K, double delta, double eps) {
    const auto t = source_coding_thresholds(K, delta, eps);
    return py::make_tuple(t.n_upper, t.n_lower);
  }, py::arg("K"), py::arg("delta"), py::arg("epsilon"));
  m.def("error_exponent", [](std::vector<double> p, double eps) {
    const auto r = error_exponent(ProbVector(std::move(p)), eps);
    py::dict d;
    d["feasible"] = r.feasible;
    d["divergence"] = r.divergence;
    d["tilt"] = r.tilt;
    if (r.q_opt) d["q_opt"] = std::vector<double>(r.q_opt->begin(), r.q_opt->end());
    return d;
  }, py::arg("p"), py::arg("epsilon"));

  py::class_<BlockCode>(m, "BlockCode")
      .def(py::init([](std::vector<double> p, std::size_t n, double eps) {
             return BlockCode(SourceModel{ProbVector(std::move(p)), n}, eps);
           }), py::arg("p"), py::arg("n"), py::arg("epsilon"))
      .def_property_readonly("codeword_bits", &BlockCode::codeword_bits)
      .def_property_readonly("typical_count", [](const BlockCode& c) { return big(c.typical_count()); })
      .def_property_readonly("typical_mass", &BlockCode::typical_mass)
      .def("typical", [](const BlockCode& c, const Sequence& x) { return c.typical(x); })
      .def("encode", [](const BlockCode& c, const Sequence& x) {
        const auto bytes = c.encode(x);
        return py::bytes(reinterpret_cast<const char*>(bytes.data()), bytes.size());
      })
      .def("decode", [](const BlockCode& c, const py::bytes& b) {
        const std::string s = b;
        return c.decode(std::span(reinterpret_cast<const std::uint8_t*>(s.data()), s.size()));
      });

  // runner
  m.def("run", [](std::map<std::string, std::string> values) {
    std::ostringstream out;
    std::ostringstream diag;
    int status = kExitConfig;
    try {
      status = entconc::run(make_run_config(values), out, diag);
    } catch (const ConfigError& e) {
      diag << "configuration error: " << e.what() << '\n';
    }
    return py::make_tuple(status, out.str(), diag.str());
  }, py::arg("config"),
     "Runs a command described by a flat key/value map; returns (status, table, diagnostics).");
}
