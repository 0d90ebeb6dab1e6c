#include "udw/commands.hpp"

#include <cstdio>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "udw/constraints.hpp"
#include "udw/edge_maps.hpp"
#include "udw/io.hpp"

namespace udw {

namespace {

using Files = std::map<std::string, std::string>;

std::ostream& out_of(const RunOptions& o) { return o.out ? *o.out : std::cout; }
std::ostream& err_of(const RunOptions& o) { return o.err ? *o.err : std::cerr; }

void write_all(const RunOptions& o, const Files& files) {
  for (const auto& [name, content] : files) atomic_write(o.out_dir / name, content);
}

std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

std::string pad(std::string s, std::size_t width) {
  if (s.size() < width) s.insert(0, width - s.size(), ' ');
  return s;
}

// Runs `body`, mapping library exceptions onto exit codes.
template <class F>
int guarded(const RunOptions& o, F&& body) {
  try {
    return body();
  } catch (const ConfigError& e) {
    err_of(o) << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const PreconditionError& e) {
    err_of(o) << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const UnsupportedError& e) {
    err_of(o) << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    err_of(o) << "error: " << e.what() << "\n";
    return kExitNumerical;
  }
}

// Name and classification of the first non-Gaussian gate, if any.
std::optional<std::string> non_gaussian_gate(const ChannelSetup& s) {
  for (auto [label, g] : {std::pair{"encoder", &s.encoder}, std::pair{"decoder", &s.decoder}}) {
    if (classify(*g) == GateClass::gaussian_computable) continue;
    std::string kinds;
    for (const auto& f : g->factors)
      if (!is_linear(f.observable.kind))
        kinds += (kinds.empty() ? "" : ", ") + std::string(to_string(f.observable.kind));
    return std::string(label) + " is " + std::string(to_string(classify(*g))) + " (" + kinds +
           ")";
  }
  return std::nullopt;
}

nlohmann::ordered_json matrix_json(const Eigen::Matrix4cd& m) {
  auto rows = nlohmann::ordered_json::array();
  for (int r = 0; r < 4; ++r) {
    auto row = nlohmann::ordered_json::array();
    for (int c = 0; c < 4; ++c) row.push_back({m(r, c).real(), m(r, c).imag()});
    rows.push_back(row);
  }
  return rows;
}

}  // namespace

int run_simulate(const DeviceConfig& c, const RunOptions& o) {
  return guarded(o, [&] {
    const auto h = assemble(c.params, c.geometry, c.gates, c.fields, {c.max_dimension});
    SolverOptions s = c.solver;
    if (o.seed) s.seed = *o.seed;
    s.threads = o.threads;
    SpectrumResult res;
    try {
      res = interior_eigs(h, c.window, s);
    } catch (const ConvergenceError& e) {
      const auto& part = e.partial();
      write_all(o, {{"eigenvalues_partial.csv", eigenvalues_csv(part.pairs)},
                    {"solver_report.json", report_json(part.report, part.pairs)}});
      err_of(o) << "error: " << e.what() << "\n"
                << "partial results: " << part.pairs.size()
                << " pairs in eigenvalues_partial.csv\n";
      return static_cast<int>(kExitNumerical);
    }
    const auto density = density_map(res.pairs, c.geometry, c.window);
    const auto spin = spin_map(res.pairs, c.geometry, c.window);
    write_all(o, {{"eigenvalues.csv", eigenvalues_csv(res.pairs)},
                  {"density.csv", grid_csv(density)},
                  {"density.pgm", grid_p5(density.nx, density.ny, density.cells, false)},
                  {"spin.csv", grid_csv(spin)},
                  {"spin.pgm", grid_p5(spin.nx, spin.ny, spin.cells, true)},
                  {"solver_report.json", report_json(res.report, res.pairs)}});
    out_of(o) << c.name << ": " << res.pairs.size() << " eigenpairs in ["
              << format_double(c.window.e_min) << ", " << format_double(c.window.e_max)
              << "] eV, max residual " << format_double(res.report.max_residual) << " eV\n";
    return static_cast<int>(kExitOk);
  });
}

int run_bands(const DeviceConfig& c, const RunOptions& o) {
  return guarded(o, [&] {
    const int width = c.bands.width > 0 ? c.bands.width : c.geometry.ny;
    const auto bands = ribbon_bands(c.params, width, c.bands.k_count,
                                    {c.bands.k_min, c.bands.k_max, c.bands.transverse});

    std::string spin = "k";
    for (std::size_t j = 0; j < bands.spin_z.front().size(); ++j)
      spin += ",S" + std::to_string(j + 1);
    spin += '\n';
    for (std::size_t i = 0; i < bands.k.size(); ++i) {
      spin += format_double(bands.k[i]);
      for (double v : bands.spin_z[i]) spin += "," + format_double(v);
      spin += '\n';
    }

    nlohmann::ordered_json rep;
    rep["width"] = width;
    rep["hybridization_warning"] = bands.hybridization_warning;
    rep["expected_decay_sites"] = expected_decay_sites(c.params);
    auto branches = nlohmann::ordered_json::array();
    for (Edge e : {Edge::top, Edge::bottom})
      for (const auto& b : branch_velocities(bands, e))
        branches.push_back({{"edge", e == Edge::top ? "top" : "bottom"},
                            {"spin", b.spin},
                            {"k_cross", b.k_cross},
                            {"velocity_nm_per_ns", b.velocity}});
    rep["branches"] = branches;
    try {
      rep["edge_velocity_nm_per_ns"] = edge_velocity(bands);
    } catch (const PreconditionError&) {
      rep["edge_velocity_nm_per_ns"] = nullptr;
    }
    // decay length of the lowest |E| edge state halfway out along +k
    rep["decay_length_nm"] = nullptr;
    if (c.bands.k_max > 0.0) {
      const double k = 0.5 * c.bands.k_max;
      auto states = ribbon_states(c.params, width, k, c.bands.transverse);
      std::sort(states.begin(), states.end(), [](const auto& a, const auto& b) {
        return std::abs(a.energy) < std::abs(b.energy);
      });
      for (const auto& st : states) {
        try {
          rep["decay_length_nm"] = decay_length(st.profile, c.params.lattice_constant);
          rep["decay_probe_k"] = k;
          break;
        } catch (const NotEdgeStateError&) {
        }
      }
    }
    write_all(o, {{"bands.csv", bands_csv(bands)},
                  {"bands_spin.csv", spin},
                  {"bands_report.json", rep.dump(2) + "\n"}});
    out_of(o) << c.name << ": " << bands.k.size() << " k-points, width " << width << "\n";
    if (bands.hybridization_warning)
      out_of(o) << "warning: edge states hybridize across this ribbon width\n";
    if (!rep["edge_velocity_nm_per_ns"].is_null())
      out_of(o) << "edge velocity " << format_double(rep["edge_velocity_nm_per_ns"].get<double>())
                << " nm/ns\n";
    return static_cast<int>(kExitOk);
  });
}

int run_channel(const ChannelConfig& c, const RunOptions& o) {
  return guarded(o, [&] {
    const auto probe = instantiate(c.channel, c.j_values.front(), c.sigma_values.front());
    const auto refusal = non_gaussian_gate(probe);
    if (refusal && !c.oracle_only) {
      err_of(o) << "refused: " << *refusal
                << "; the channel engine evaluates GaussianComputable gates only. Set "
                   "oracle_only: true to run the truncated Fock oracle instead.\n";
      return static_cast<int>(kExitConfig);
    }

    Files files;
    if (c.oracle_only) {
      const auto modes = c.oracle.modes();
      std::string csv = "J,sigma,I_c,top_population,reliable\n";
      for (double s : c.sigma_values)
        for (double j : c.j_values) {
          const auto r = fock_oracle(instantiate(c.channel, j, s), modes, c.oracle.n_max);
          csv += format_double(j) + "," + format_double(s) + "," + format_double(r.coherent_info) +
                 "," + format_double(r.top_population) + "," + (r.reliable ? "1" : "0") + "\n";
        }
      files["oracle_sweep.csv"] = csv;
    } else {
      const auto rows = capacity_sweep(c.channel, c.j_values, c.sigma_values, o.threads);
      files["sweep.csv"] = sweep_csv(rows);
      if (c.oracle.enabled) {
        const auto setup = instantiate(c.channel, c.oracle.j, c.oracle.sigma);
        const auto modes = c.oracle.modes();
        const auto engine = evaluate_channel(setup, &modes);
        const auto oracle = fock_oracle(setup, modes, c.oracle.n_max);
        nlohmann::ordered_json rep;
        rep["J"] = c.oracle.j;
        rep["sigma"] = c.oracle.sigma;
        rep["modes"] = modes.k;
        rep["weights"] = modes.weight;
        rep["n_max"] = c.oracle.n_max;
        rep["trace_distance"] = trace_distance(engine.rho_cb, oracle.rho_cb);
        rep["engine_coherent_info"] = engine.coherent_info;
        rep["oracle_coherent_info"] = oracle.coherent_info;
        rep["top_population"] = oracle.top_population;
        rep["reliable"] = oracle.reliable;
        rep["fock_dimension"] = oracle.fock_dimension;
        files["oracle_report.json"] = rep.dump(2) + "\n";
      }
    }
    write_all(o, files);
    out_of(o) << c.name << ": " << c.j_values.size() * c.sigma_values.size()
              << " sweep points written to " << (o.out_dir / files.begin()->first).string()
              << "\n";
    return static_cast<int>(kExitOk);
  });
}

int run_oracle(const ChannelConfig& c, const RunOptions& o) {
  return guarded(o, [&] {
    if (c.oracle.k.empty()) {
      err_of(o) << "error: oracle.k: the oracle subcommand needs mode momenta\n";
      return static_cast<int>(kExitConfig);
    }
    const auto setup = instantiate(c.channel, c.oracle.j, c.oracle.sigma);
    const auto modes = c.oracle.modes();
    const auto oracle = fock_oracle(setup, modes, c.oracle.n_max);
    nlohmann::ordered_json rep;
    rep["J"] = c.oracle.j;
    rep["sigma"] = c.oracle.sigma;
    rep["modes"] = modes.k;
    rep["weights"] = modes.weight;
    rep["n_max"] = c.oracle.n_max;
    rep["oracle_coherent_info"] = oracle.coherent_info;
    rep["top_population"] = oracle.top_population;
    rep["reliable"] = oracle.reliable;
    rep["fock_dimension"] = oracle.fock_dimension;
    rep["rho_cb"] = matrix_json(oracle.rho_cb);
    if (!non_gaussian_gate(setup)) {
      const auto engine = evaluate_channel(setup, &modes);
      rep["engine_coherent_info"] = engine.coherent_info;
      rep["trace_distance"] = trace_distance(engine.rho_cb, oracle.rho_cb);
    }
    write_all(o, {{"oracle_report.json", rep.dump(2) + "\n"}});
    out_of(o) << c.name << ": oracle I_c " << format_double(oracle.coherent_info)
              << ", top-level population " << format_double(oracle.top_population)
              << (oracle.reliable ? "" : " (truncation not converged)") << "\n";
    return static_cast<int>(kExitOk);
  });
}

int run_constraints(const RunOptions& o) {
  return guarded(o, [&] {
    const auto table = polarization_table();
    std::string csv = "temperature_K,field_T,esr_GHz,polarization\n";
    auto& out = out_of(o);
    out << "ESR operating points\n"
        << pad("T [K]", 7) << pad("B0 [T]", 8) << pad("f [GHz]", 10) << pad("P", 8) << "\n";
    for (const auto& r : table) {
      out << pad(fixed(r.temperature, 1), 7) << pad(fixed(r.field, 1), 8)
          << pad(fixed(r.esr_ghz, 1), 10) << pad(fixed(r.polarization, 3), 8) << "\n";
      csv += format_double(r.temperature) + "," + format_double(r.field) + "," +
             format_double(r.esr_ghz) + "," + format_double(r.polarization) + "\n";
    }

    std::string sc = "scenario,velocity_nm_per_ns,smearing_nm,switching_time_fs,moire_velocity_nm_per_ns\n";
    out << "\nSwitching-time scenarios\n"
        << pad("scenario", 10) << pad("v [nm/ns]", 12) << pad("l_s [nm]", 10)
        << pad("t_sw [fs]", 12) << pad("v_M [nm/ns]", 13) << "\n";
    for (const auto& s : material_scenarios()) {
      const double t_fs = switching_time(s.smearing, s.velocity) / kNsPerFs;
      std::string vm_text = "-";
      std::string vm_csv;
      if (s.bandwidth && s.moire_constant) {
        const double vm = moire_velocity(*s.bandwidth, *s.moire_constant);
        vm_text = fixed(vm, 0);
        vm_csv = format_double(vm);
      }
      out << pad(s.name, 10) << pad(fixed(s.velocity, 0), 12) << pad(fixed(s.smearing, 1), 10)
          << pad(fixed(t_fs, 1), 12) << pad(vm_text, 13) << "\n";
      sc += s.name + "," + format_double(s.velocity) + "," + format_double(s.smearing) + "," +
            format_double(t_fs) + "," + vm_csv + "\n";
    }
    write_all(o, {{"polarization_table.csv", csv}, {"scenarios.csv", sc}});
    return static_cast<int>(kExitOk);
  });
}

int run_command(std::string_view sub, const std::filesystem::path& path, const RunOptions& o) {
  if (sub == "constraints") return run_constraints(o);
  if (sub != "simulate" && sub != "bands" && sub != "channel" && sub != "oracle") {
    err_of(o) << "error: unknown subcommand '" << sub << "'\n";
    return kExitConfig;
  }
  Config cfg;
  try {
    cfg = load_config(path);
  } catch (const ConfigError& e) {
    err_of(o) << path.string() << ": " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    err_of(o) << path.string() << ": " << e.what() << "\n";
    return kExitConfig;
  }
  const bool device_cmd = sub == "simulate" || sub == "bands";
  if (device_cmd != std::holds_alternative<DeviceConfig>(cfg)) {
    err_of(o) << "error: '" << sub << "' needs a " << (device_cmd ? "device" : "channel")
              << " configuration\n";
    return kExitConfig;
  }
  if (sub == "simulate") return run_simulate(std::get<DeviceConfig>(cfg), o);
  if (sub == "bands") return run_bands(std::get<DeviceConfig>(cfg), o);
  if (sub == "channel") return run_channel(std::get<ChannelConfig>(cfg), o);
  return run_oracle(std::get<ChannelConfig>(cfg), o);
}

}  // namespace udw
