#include <filesystem>
#include <sstream>
#include <string>
#include <variant>

#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "udw/channel.hpp"
#include "udw/commands.hpp"
#include "udw/config.hpp"
#include "udw/constraints.hpp"
#include "udw/edge_maps.hpp"
#include "udw/field.hpp"
#include "udw/lattice.hpp"
#include "udw/spectra.hpp"

namespace py = pybind11;
using namespace udw;

namespace {

py::dict bands_dict(const RibbonBands& b) {
  py::dict d;
  d["k"] = b.k;
  d["energies"] = b.energies;
  d["spin_z"] = b.spin_z;
  d["width"] = b.width;
  d["hybridization_warning"] = b.hybridization_warning;
  return d;
}

py::dict run(std::string_view sub, const std::filesystem::path& config,
             const std::filesystem::path& out_dir, std::optional<std::uint64_t> seed, int threads) {
  std::ostringstream out, err;
  RunOptions o;
  o.out_dir = out_dir;
  o.seed = seed;
  o.threads = threads;
  o.out = &out;
  o.err = &err;
  int code = 0;
  {
    py::gil_scoped_release release;
    code = run_command(sub, config, o);
  }
  py::dict d;
  d["exit_code"] = code;
  d["stdout"] = out.str();
  d["stderr"] = err.str();
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Edge-state lattice solver and detector channel engine";

  py::register_exception<PreconditionError>(m, "PreconditionError", PyExc_ValueError);
  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<UnsupportedError>(m, "UnsupportedError", PyExc_ValueError);
  py::register_exception<NumericalError>(m, "NumericalError", PyExc_RuntimeError);

  py::class_<BhzParams>(m, "BhzParams")
      .def(py::init<>())
      .def(py::init([](double e, double mass, double lambda, double a) {
             BhzParams p{e, mass, lambda, a};
             p.validate();
             return p;
           }),
           py::arg("epsilon"), py::arg("mass"), py::arg("lam"), py::arg("lattice_constant"))
      .def_readwrite("epsilon", &BhzParams::epsilon)
      .def_readwrite("mass", &BhzParams::mass)
      .def_readwrite("lam", &BhzParams::lambda)
      .def_readwrite("lattice_constant", &BhzParams::lattice_constant)
      .def("__eq__", [](const BhzParams& a, const BhzParams& b) { return a == b; })
      .def("__repr__", [](const BhzParams& p) {
        std::ostringstream s;
        s << "BhzParams(epsilon=" << p.epsilon << ", mass=" << p.mass << ", lam=" << p.lambda
          << ", lattice_constant=" << p.lattice_constant << ")";
        return s.str();
      });

  m.def("hgte_params", &hgte_params);
  m.def("continuum_map", &continuum_map, py::arg("A"), py::arg("B"), py::arg("M"),
        py::arg("lattice_constant"));
  m.def("analytic_dispersion", &analytic_dispersion, py::arg("params"), py::arg("kx"),
        py::arg("ky"));
  m.def("bloch_hamiltonian",
        [](const BhzParams& p, double kx, double ky) -> Eigen::Matrix4cd {
          return bloch_hamiltonian(p, kx, ky);
        },
        py::arg("params"), py::arg("kx"), py::arg("ky"));

  m.def(
      "torus_eigenvalues",
      [](const BhzParams& p, int nx, int ny) {
        return dense_eigenvalues(assemble(p, {nx, ny, Boundary::periodic, Boundary::periodic}));
      },
      py::arg("params"), py::arg("nx"), py::arg("ny"),
      "Dense spectrum of the periodic lattice, ascending.");

  m.def(
      "ribbon_bands",
      [](const BhzParams& p, int width, int k_count, double k_min, double k_max) {
        return bands_dict(ribbon_bands(p, width, k_count, {k_min, k_max, Boundary::open}));
      },
      py::arg("params"), py::arg("width"), py::arg("k_count") = 65, py::arg("k_min") = -0.1,
      py::arg("k_max") = 0.1);
  m.def(
      "edge_velocity",
      [](const BhzParams& p, int width, int k_count, double k_min, double k_max) {
        return edge_velocity(ribbon_bands(p, width, k_count, {k_min, k_max, Boundary::open}));
      },
      py::arg("params"), py::arg("width"), py::arg("k_count") = 65, py::arg("k_min") = -0.1,
      py::arg("k_max") = 0.1, "Edge velocity in nm/ns.");

  m.def("thermal_polarization", &thermal_polarization, py::arg("temperature"), py::arg("field"));
  m.def("esr_frequency", &esr_frequency, py::arg("field"));
  m.def("switching_time", &switching_time, py::arg("smearing"), py::arg("velocity"));
  m.def("moire_velocity", &moire_velocity, py::arg("bandwidth"), py::arg("moire_constant"));
  m.def("q_loc", &q_loc, py::arg("t_sw"), py::arg("velocity"), py::arg("smearing"));
  m.def("max_link_distance", &max_link_distance, py::arg("velocity"),
        py::arg("scrambling_time"));

  m.def("coherent_information", &coherent_information, py::arg("rho_cb"));
  m.def("von_neumann_entropy", [](const Eigen::MatrixXcd& r) { return von_neumann_entropy(r); },
        py::arg("rho"));

  m.def(
      "pi_correlator",
      [](double x1, double s1, double t1, double x2, double s2, double t2, double v) {
        FieldObservable a, b;
        a.smearing = {x1, s1};
        a.event_time = t1;
        a.velocity = v;
        b.smearing = {x2, s2};
        b.event_time = t2;
        b.velocity = v;
        return correlator(a, b);
      },
      py::arg("x1"), py::arg("sigma1"), py::arg("t1"), py::arg("x2"), py::arg("sigma2"),
      py::arg("t2"), py::arg("velocity") = 1.0, "<0|Pi(f1) Pi(f2)|0> for Gaussian smearings.");

  m.def(
      "capacity_sweep",
      [](const std::filesystem::path& config, std::optional<std::vector<double>> j_values,
         std::optional<std::vector<double>> sigma_values, int threads) {
        const auto cfg = std::get<ChannelConfig>(load_config(config));
        const auto& js = j_values ? *j_values : cfg.j_values;
        const auto& ss = sigma_values ? *sigma_values : cfg.sigma_values;
        std::vector<SweepRow> rows;
        {
          py::gil_scoped_release release;
          rows = capacity_sweep(cfg.channel, js, ss, threads);
        }
        py::list out;
        for (const auto& r : rows) out.append(py::make_tuple(r.j, r.sigma, r.coherent_info));
        return out;
      },
      py::arg("config"), py::arg("j_values") = py::none(), py::arg("sigma_values") = py::none(),
      py::arg("threads") = 1, "(J, sigma, I_c) rows for a channel configuration file.");

  m.def(
      "channel_state",
      [](const std::filesystem::path& config, double j, double sigma) -> Eigen::Matrix4cd {
        const auto cfg = std::get<ChannelConfig>(load_config(config));
        return output_state(instantiate(cfg.channel, j, sigma));
      },
      py::arg("config"), py::arg("j"), py::arg("sigma"));

  m.def("run", &run, py::arg("subcommand"), py::arg("config") = std::filesystem::path(),
        py::arg("out_dir") = std::filesystem::path("."), py::arg("seed") = py::none(),
        py::arg("threads") = 1,
        "Runs a command-line subcommand and returns its exit code and output.");
}
