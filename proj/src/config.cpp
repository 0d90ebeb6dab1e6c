#include "udw/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <initializer_list>
#include <sstream>

#include <yaml-cpp/yaml.h>

#include "udw/io.hpp"

namespace udw {

ConfigError::ConfigError(std::vector<FieldError> errors)
    : Error([&] {
        std::string s = "configuration has " + std::to_string(errors.size()) + " error(s)";
        for (const auto& e : errors) {
          s += "\n  ";
          if (e.line > 0) s += "line " + std::to_string(e.line) + ": ";
          if (!e.field.empty()) s += e.field + ": ";
          s += e.message;
        }
        return s;
      }()),
      errors_(std::move(errors)) {}

DiscreteModes OracleConfig::modes() const {
  if (weight.empty()) return uniform_modes(k);
  DiscreteModes m{k, weight};
  m.validate();
  return m;
}

namespace {

int line_of(const YAML::Node& n) {
  if (!n.IsDefined()) return 0;
  const auto m = n.Mark();
  return m.line >= 0 ? m.line + 1 : 0;
}

std::string join(const std::string& path, std::string_view key) {
  return path.empty() ? std::string(key) : path + "." + std::string(key);
}

std::string indexed(const std::string& path, std::size_t i) {
  return path + "[" + std::to_string(i) + "]";
}

bool valid_name(const std::string& s) {
  return !s.empty() && std::all_of(s.begin(), s.end(), [](unsigned char c) {
    return std::isalnum(c) || c == '_' || c == '-' || c == '.';
  });
}

class Reader {
 public:
  std::vector<FieldError> errors;

  void fail(const YAML::Node& n, std::string field, std::string message) {
    errors.push_back({line_of(n), std::move(field), std::move(message)});
  }

  // A mapping whose keys all appear in `allowed`.
  bool mapping(const YAML::Node& n, const std::string& path,
               std::initializer_list<std::string_view> allowed) {
    if (!n.IsMap()) {
      fail(n, path, "expected a section of key: value entries");
      return false;
    }
    for (const auto& kv : n) {
      const std::string key = kv.first.Scalar();
      if (std::find(allowed.begin(), allowed.end(), key) == allowed.end())
        fail(kv.first, join(path, key), "unknown key");
    }
    return true;
  }

  bool number(const YAML::Node& n, const std::string& field, double& out) {
    if (!n.IsScalar()) {
      fail(n, field, "expected a number");
      return false;
    }
    std::string_view s = n.Scalar();
    if (!s.empty() && s.front() == '+') s.remove_prefix(1);
    double v = 0.0;
    const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
    if (r.ec != std::errc() || r.ptr != s.data() + s.size() || !std::isfinite(v)) {
      fail(n, field, "expected a finite number, got '" + n.Scalar() + "'");
      return false;
    }
    out = v;
    return true;
  }

  template <class Int>
  bool integer(const YAML::Node& n, const std::string& field, Int& out) {
    if (!n.IsScalar()) {
      fail(n, field, "expected an integer");
      return false;
    }
    std::string_view s = n.Scalar();
    if (!s.empty() && s.front() == '+') s.remove_prefix(1);
    Int v{};
    const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
    if (r.ec != std::errc() || r.ptr != s.data() + s.size()) {
      fail(n, field, "expected an integer, got '" + n.Scalar() + "'");
      return false;
    }
    out = v;
    return true;
  }

  bool boolean(const YAML::Node& n, const std::string& field, bool& out) {
    if (n.IsScalar()) {
      if (n.Scalar() == "true") return out = true, true;
      if (n.Scalar() == "false") return out = false, true;
    }
    fail(n, field, "expected true or false");
    return false;
  }

  bool text(const YAML::Node& n, const std::string& field, std::string& out) {
    if (!n.IsScalar()) {
      fail(n, field, "expected a string");
      return false;
    }
    out = n.Scalar();
    return true;
  }

  bool numbers(const YAML::Node& n, const std::string& field, std::vector<double>& out) {
    if (!n.IsSequence()) {
      fail(n, field, "expected a list of numbers");
      return false;
    }
    out.clear();
    bool ok = true;
    for (std::size_t i = 0; i < n.size(); ++i) {
      double v = 0.0;
      ok = number(n[i], indexed(field, i), v) && ok;
      out.push_back(v);
    }
    return ok;
  }

  bool pair(const YAML::Node& n, const std::string& field, double& a, double& b) {
    std::vector<double> v;
    if (!numbers(n, field, v)) return false;
    if (v.size() != 2) {
      fail(n, field, "expected two numbers");
      return false;
    }
    a = v[0];
    b = v[1];
    return true;
  }

  // Reads `key` of `m` with `read` when present; reports it when required.
  template <class F>
  bool field(const YAML::Node& m, std::string_view key, const std::string& path, bool required,
             F&& read) {
    const YAML::Node n = m[std::string(key)];
    if (!n.IsDefined() || n.IsNull()) {
      if (required) fail(m, join(path, key), "required key is missing");
      return false;
    }
    return read(n, join(path, key));
  }

  bool num(const YAML::Node& m, std::string_view key, const std::string& path, double& out,
           bool required = true) {
    return field(m, key, path, required,
                 [&](const YAML::Node& n, const std::string& f) { return number(n, f, out); });
  }
};

template <class E>
struct EnumName {
  E value;
  std::string_view name;
};

constexpr EnumName<Boundary> kBoundaries[] = {{Boundary::open, "open"},
                                              {Boundary::periodic, "periodic"}};
constexpr EnumName<RegionShape> kShapes[] = {{RegionShape::rectangle, "rectangle"},
                                             {RegionShape::disk, "disk"},
                                             {RegionShape::half_disk, "half_disk"}};
constexpr EnumName<FieldProfile> kProfiles[] = {{FieldProfile::disk, "disk"},
                                                {FieldProfile::gaussian, "gaussian"}};
constexpr EnumName<InteriorStrategy> kStrategies[] = {
    {InteriorStrategy::folded_spectrum, "folded_spectrum"},
    {InteriorStrategy::shift_invert, "shift_invert"}};

template <class E, std::size_t N>
std::string_view name_of(const EnumName<E> (&table)[N], E v) {
  for (const auto& e : table)
    if (e.value == v) return e.name;
  return "?";
}

template <class E, std::size_t N>
bool enum_from(Reader& r, const YAML::Node& n, const std::string& field,
               const EnumName<E> (&table)[N], E& out) {
  std::string s;
  if (!r.text(n, field, s)) return false;
  std::string choices;
  for (const auto& e : table) {
    if (e.name == s) {
      out = e.value;
      return true;
    }
    choices += (choices.empty() ? "" : ", ") + std::string(e.name);
  }
  r.fail(n, field, "expected one of " + choices + ", got '" + s + "'");
  return false;
}

bool kind_from(Reader& r, const YAML::Node& n, const std::string& field, ObservableKind& out) {
  std::string s;
  if (!r.text(n, field, s)) return false;
  try {
    out = observable_kind_from(s);
    return true;
  } catch (const PreconditionError& e) {
    r.fail(n, field, e.what());
    return false;
  }
}

bool sector_from(Reader& r, const YAML::Node& n, const std::string& field, FieldSector& out) {
  std::string s;
  if (!r.text(n, field, s)) return false;
  try {
    out = field_sector_from(s);
    return true;
  } catch (const PreconditionError& e) {
    r.fail(n, field, e.what());
    return false;
  }
}

void read_name(Reader& r, const YAML::Node& root, std::string& name) {
  r.field(root, "name", "", false, [&](const YAML::Node& n, const std::string& f) {
    if (!r.text(n, f, name)) return false;
    if (!valid_name(name)) {
      r.fail(n, f, "names use letters, digits, '_', '-' and '.' only");
      return false;
    }
    return true;
  });
}

// ---- device ---------------------------------------------------------------

void read_material(Reader& r, const YAML::Node& root, DeviceConfig& d) {
  const bool has_lattice = root["lattice"].IsDefined();
  const bool has_continuum = root["continuum"].IsDefined();
  if (has_lattice == has_continuum) {
    r.fail(root, "lattice|continuum",
           has_lattice ? "give either 'lattice' or 'continuum', not both"
                       : "one of 'lattice' or 'continuum' is required");
    return;
  }
  if (has_lattice) {
    const YAML::Node n = root["lattice"];
    if (!r.mapping(n, "lattice", {"epsilon", "mass", "lambda", "lattice_constant"})) return;
    r.num(n, "epsilon", "lattice", d.params.epsilon);
    r.num(n, "mass", "lattice", d.params.mass);
    r.num(n, "lambda", "lattice", d.params.lambda);
    if (r.num(n, "lattice_constant", "lattice", d.params.lattice_constant) &&
        !(d.params.lattice_constant > 0.0))
      r.fail(n["lattice_constant"], "lattice.lattice_constant", "must be positive");
    return;
  }
  const YAML::Node n = root["continuum"];
  if (!r.mapping(n, "continuum", {"A", "B", "M", "lattice_constant"})) return;
  ContinuumParams c;
  bool ok = r.num(n, "A", "continuum", c.A);
  ok = r.num(n, "B", "continuum", c.B) && ok;
  ok = r.num(n, "M", "continuum", c.M_cont) && ok;
  ok = r.num(n, "lattice_constant", "continuum", c.lattice_constant) && ok;
  if (!ok) return;
  if (c.B == 0.0) {
    r.fail(n["B"], "continuum.B", "must be nonzero");
    return;
  }
  if (!(c.lattice_constant > 0.0)) {
    r.fail(n["lattice_constant"], "continuum.lattice_constant", "must be positive");
    return;
  }
  d.params = continuum_map(c.A, c.B, c.M_cont, c.lattice_constant);
  d.continuum = c;
}

void read_geometry(Reader& r, const YAML::Node& root, DeviceConfig& d) {
  const YAML::Node n = root["geometry"];
  if (!n.IsDefined()) {
    r.fail(root, "geometry", "required section is missing");
    return;
  }
  if (!r.mapping(n, "geometry", {"nx", "ny", "boundary_x", "boundary_y"})) return;
  for (auto [key, target] : {std::pair{"nx", &d.geometry.nx}, std::pair{"ny", &d.geometry.ny}}) {
    r.field(n, key, "geometry", true, [&](const YAML::Node& v, const std::string& f) {
      if (!r.integer(v, f, *target)) return false;
      if (*target < 2) r.fail(v, f, "must be at least 2");
      return true;
    });
  }
  r.field(n, "boundary_x", "geometry", false, [&](const YAML::Node& v, const std::string& f) {
    return enum_from(r, v, f, kBoundaries, d.geometry.boundary_x);
  });
  r.field(n, "boundary_y", "geometry", false, [&](const YAML::Node& v, const std::string& f) {
    return enum_from(r, v, f, kBoundaries, d.geometry.boundary_y);
  });
}

void read_gates(Reader& r, const YAML::Node& root, DeviceConfig& d) {
  const YAML::Node n = root["gates"];
  if (!n.IsDefined() || n.IsNull()) return;
  if (!n.IsSequence()) {
    r.fail(n, "gates", "expected a list of gate regions");
    return;
  }
  for (std::size_t i = 0; i < n.size(); ++i) {
    const YAML::Node g = n[i];
    const std::string path = indexed("gates", i);
    GateRegion region;
    if (!g.IsMap()) {
      r.fail(g, path, "expected a gate region");
      continue;
    }
    if (!r.field(g, "shape", path, true, [&](const YAML::Node& v, const std::string& f) {
          return enum_from(r, v, f, kShapes, region.shape);
        }))
      continue;
    if (region.shape == RegionShape::rectangle) {
      r.mapping(g, path, {"shape", "center", "half_extent", "potential"});
      r.field(g, "half_extent", path, true, [&](const YAML::Node& v, const std::string& f) {
        if (!r.pair(v, f, region.rx, region.ry)) return false;
        if (region.rx < 0.0 || region.ry < 0.0) r.fail(v, f, "must be non-negative");
        return true;
      });
    } else {
      if (region.shape == RegionShape::disk)
        r.mapping(g, path, {"shape", "center", "radius", "potential"});
      else
        r.mapping(g, path, {"shape", "center", "radius", "direction", "potential"});
      if (r.num(g, "radius", path, region.rx) && !(region.rx > 0.0))
        r.fail(g["radius"], join(path, "radius"), "must be positive");
      if (region.shape == RegionShape::half_disk)
        r.num(g, "direction", path, region.direction, false);
    }
    r.field(g, "center", path, true, [&](const YAML::Node& v, const std::string& f) {
      return r.pair(v, f, region.cx, region.cy);
    });
    r.num(g, "potential", path, region.potential);
    d.gates.push_back(region);
  }
}

void read_fields(Reader& r, const YAML::Node& root, DeviceConfig& d) {
  const YAML::Node n = root["fields"];
  if (!n.IsDefined() || n.IsNull()) return;
  if (!n.IsSequence()) {
    r.fail(n, "fields", "expected a list of local fields");
    return;
  }
  for (std::size_t i = 0; i < n.size(); ++i) {
    const YAML::Node g = n[i];
    const std::string path = indexed("fields", i);
    if (!r.mapping(g, path, {"center", "profile", "width", "b"})) continue;
    LocalField f;
    r.field(g, "center", path, true, [&](const YAML::Node& v, const std::string& p) {
      return r.pair(v, p, f.cx, f.cy);
    });
    r.field(g, "profile", path, false, [&](const YAML::Node& v, const std::string& p) {
      return enum_from(r, v, p, kProfiles, f.profile);
    });
    f.width = 3.0 * d.params.lattice_constant;
    if (r.num(g, "width", path, f.width, false) && !(f.width > 0.0))
      r.fail(g["width"], join(path, "width"), "must be positive");
    r.field(g, "b", path, true, [&](const YAML::Node& v, const std::string& p) {
      std::vector<double> b;
      if (!r.numbers(v, p, b)) return false;
      if (b.size() != 3) {
        r.fail(v, p, "expected three components [bx, by, bz]");
        return false;
      }
      std::copy(b.begin(), b.end(), f.b.begin());
      return true;
    });
    d.fields.push_back(f);
  }
}

void read_window(Reader& r, const YAML::Node& root, DeviceConfig& d) {
  const YAML::Node n = root["window"];
  if (!n.IsDefined()) {
    r.fail(root, "window", "required section is missing");
    return;
  }
  if (!r.mapping(n, "window", {"e_min", "e_max", "max_pairs"})) return;
  const bool ok = r.num(n, "e_min", "window", d.window.e_min) &
                  r.num(n, "e_max", "window", d.window.e_max);
  if (ok && !(d.window.e_min < d.window.e_max))
    r.fail(n, "window.e_max", "must exceed window.e_min");
  r.field(n, "max_pairs", "window", false, [&](const YAML::Node& v, const std::string& f) {
    if (!r.integer(v, f, d.window.max_pairs)) return false;
    if (d.window.max_pairs < 1) r.fail(v, f, "must be at least 1");
    return true;
  });
}

void read_solver(Reader& r, const YAML::Node& root, DeviceConfig& d) {
  const YAML::Node n = root["solver"];
  if (!n.IsDefined() || n.IsNull()) return;
  if (!r.mapping(n, "solver", {"strategy", "tolerance", "krylov_dim", "max_restarts", "seed",
                               "max_dimension"}))
    return;
  auto& s = d.solver;
  r.field(n, "strategy", "solver", false, [&](const YAML::Node& v, const std::string& f) {
    return enum_from(r, v, f, kStrategies, s.strategy);
  });
  if (r.num(n, "tolerance", "solver", s.tolerance, false) && !(s.tolerance > 0.0))
    r.fail(n["tolerance"], "solver.tolerance", "must be positive");
  r.field(n, "krylov_dim", "solver", false, [&](const YAML::Node& v, const std::string& f) {
    if (!r.integer(v, f, s.krylov_dim)) return false;
    if (s.krylov_dim < 0) r.fail(v, f, "must be non-negative (0 picks a default)");
    return true;
  });
  r.field(n, "max_restarts", "solver", false, [&](const YAML::Node& v, const std::string& f) {
    if (!r.integer(v, f, s.max_restarts)) return false;
    if (s.max_restarts < 1) r.fail(v, f, "must be at least 1");
    return true;
  });
  r.field(n, "seed", "solver", false,
          [&](const YAML::Node& v, const std::string& f) { return r.integer(v, f, s.seed); });
  r.field(n, "max_dimension", "solver", false, [&](const YAML::Node& v, const std::string& f) {
    if (!r.integer(v, f, d.max_dimension)) return false;
    if (d.max_dimension < 8) r.fail(v, f, "must be at least 8");
    return true;
  });
}

void read_bands(Reader& r, const YAML::Node& root, DeviceConfig& d) {
  const YAML::Node n = root["bands"];
  if (!n.IsDefined() || n.IsNull()) return;
  if (!r.mapping(n, "bands", {"width", "k_count", "k_min", "k_max", "transverse"})) return;
  auto& b = d.bands;
  r.field(n, "width", "bands", false, [&](const YAML::Node& v, const std::string& f) {
    if (!r.integer(v, f, b.width)) return false;
    if (b.width != 0 && b.width < 2) r.fail(v, f, "must be 0 (device ny) or at least 2");
    return true;
  });
  r.field(n, "k_count", "bands", false, [&](const YAML::Node& v, const std::string& f) {
    if (!r.integer(v, f, b.k_count)) return false;
    if (b.k_count < 16) r.fail(v, f, "must be at least 16");
    return true;
  });
  r.num(n, "k_min", "bands", b.k_min, false);
  r.num(n, "k_max", "bands", b.k_max, false);
  if (!(b.k_min < b.k_max)) r.fail(n, "bands.k_max", "must exceed bands.k_min");
  r.field(n, "transverse", "bands", false, [&](const YAML::Node& v, const std::string& f) {
    return enum_from(r, v, f, kBoundaries, b.transverse);
  });
}

DeviceConfig parse_device(Reader& r, const YAML::Node& root) {
  DeviceConfig d;
  r.mapping(root, "", {"kind", "name", "lattice", "continuum", "geometry", "gates", "fields",
                       "window", "solver", "bands"});
  read_name(r, root, d.name);
  read_material(r, root, d);
  read_geometry(r, root, d);
  read_gates(r, root, d);
  read_fields(r, root, d);
  read_window(r, root, d);
  read_solver(r, root, d);
  read_bands(r, root, d);
  if (!r.errors.empty()) return d;

  if (d.geometry.dimension() > d.max_dimension)
    r.fail(root["geometry"], "geometry",
           "dimension " + std::to_string(d.geometry.dimension()) + " exceeds solver.max_dimension " +
               std::to_string(d.max_dimension));
  const double a = d.params.lattice_constant;
  for (std::size_t i = 0; i < d.gates.size(); ++i) {
    bool hit = false;
    for (int y = 0; y < d.geometry.ny && !hit; ++y)
      for (int x = 0; x < d.geometry.nx && !hit; ++x)
        hit = region_contains(d.gates[i], d.geometry, a, x, y);
    if (!hit) r.fail(root["gates"][i], indexed("gates", i), "region covers no lattice site");
  }
  try {
    d.params.validate();
    d.geometry.validate();
    d.window.validate();
  } catch (const PreconditionError& e) {
    r.fail(root, "", e.what());
  }
  return d;
}

// ---- channel --------------------------------------------------------------

void read_factor(Reader& r, const YAML::Node& n, const std::string& path, FactorTemplate& f) {
  if (!r.mapping(n, path, {"coupling", "scale", "axis", "gap", "observable", "sector", "dx",
                           "dx_sigma", "dt", "dt_sigma"}))
    return;
  r.field(n, "coupling", path, true, [&](const YAML::Node& v, const std::string& p) {
    if (v.IsScalar() && v.Scalar() == "sweep") {
      f.rule = CouplingRule::sweep;
      return true;
    }
    if (v.IsScalar() && v.Scalar() == "conjugate") {
      f.rule = CouplingRule::conjugate;
      return true;
    }
    f.rule = CouplingRule::fixed;
    if (!r.number(v, p, f.value)) {
      r.errors.back().message = "expected a number, 'sweep' or 'conjugate'";
      return false;
    }
    return true;
  });
  if (n["scale"].IsDefined()) {
    if (f.rule == CouplingRule::fixed)
      r.fail(n["scale"], join(path, "scale"), "only applies to 'sweep' or 'conjugate' couplings");
    else
      r.num(n, "scale", path, f.value);
  } else if (f.rule != CouplingRule::fixed) {
    f.value = 1.0;
  }
  r.num(n, "axis", path, f.detector.axis, false);
  r.num(n, "gap", path, f.detector.gap, false);
  r.field(n, "observable", path, true, [&](const YAML::Node& v, const std::string& p) {
    return kind_from(r, v, p, f.kind);
  });
  r.field(n, "sector", path, false, [&](const YAML::Node& v, const std::string& p) {
    return sector_from(r, v, p, f.sector);
  });
  r.num(n, "dx", path, f.dx, false);
  r.num(n, "dx_sigma", path, f.dx_sigma, false);
  r.num(n, "dt", path, f.dt, false);
  r.num(n, "dt_sigma", path, f.dt_sigma, false);
}

void read_gate(Reader& r, const YAML::Node& root, const char* key, GateTemplate& g) {
  const YAML::Node n = root[key];
  if (!n.IsDefined()) {
    r.fail(root, key, "required section is missing");
    return;
  }
  if (!r.mapping(n, key, {"x", "t", "factors"})) return;
  r.num(n, "x", key, g.x, false);
  r.num(n, "t", key, g.t, false);
  const YAML::Node fs = n["factors"];
  const std::string path = join(key, "factors");
  if (!fs.IsDefined()) {
    r.fail(n, path, "required key is missing");
    return;
  }
  if (!fs.IsSequence() || fs.size() == 0) {
    r.fail(fs, path, "expected a non-empty list of factors");
    return;
  }
  for (std::size_t i = 0; i < fs.size(); ++i) {
    FactorTemplate f;
    read_factor(r, fs[i], indexed(path, i), f);
    g.factors.push_back(f);
  }
  const auto conj = std::count_if(g.factors.begin(), g.factors.end(),
                                  [](const auto& f) { return f.rule == CouplingRule::conjugate; });
  if (conj > 0 && (g.factors.size() != 2 || conj != 1))
    r.fail(fs, path, "a 'conjugate' coupling needs exactly one non-conjugate partner factor");
}

void read_sweep(Reader& r, const YAML::Node& root, ChannelConfig& c) {
  const YAML::Node n = root["sweep"];
  if (!n.IsDefined()) {
    r.fail(root, "sweep", "required section is missing");
    return;
  }
  if (!r.mapping(n, "sweep", {"J", "sigma"})) return;
  r.field(n, "J", "sweep", true, [&](const YAML::Node& v, const std::string& f) {
    if (!r.numbers(v, f, c.j_values)) return false;
    if (c.j_values.empty()) r.fail(v, f, "needs at least one value");
    return true;
  });
  r.field(n, "sigma", "sweep", true, [&](const YAML::Node& v, const std::string& f) {
    if (!r.numbers(v, f, c.sigma_values)) return false;
    if (c.sigma_values.empty()) r.fail(v, f, "needs at least one value");
    for (std::size_t i = 0; i < c.sigma_values.size(); ++i)
      if (!(c.sigma_values[i] > 0.0))
        r.fail(v[i], indexed(f, i),
               "smearing width must be positive, got " + format_double(c.sigma_values[i]) + " nm");
    return true;
  });
}

void read_oracle(Reader& r, const YAML::Node& root, ChannelConfig& c) {
  const YAML::Node n = root["oracle"];
  if (!n.IsDefined() || n.IsNull()) return;
  if (!r.mapping(n, "oracle", {"enabled", "k", "weight", "n_max", "J", "sigma"})) return;
  auto& o = c.oracle;
  r.field(n, "enabled", "oracle", false,
          [&](const YAML::Node& v, const std::string& f) { return r.boolean(v, f, o.enabled); });
  r.field(n, "k", "oracle", false, [&](const YAML::Node& v, const std::string& f) {
    if (!r.numbers(v, f, o.k)) return false;
    for (std::size_t i = 0; i < o.k.size(); ++i)
      if (o.k[i] == 0.0) r.fail(v[i], indexed(f, i), "mode momentum must be nonzero");
    if (o.k.size() > 3) r.fail(v, f, "the Fock oracle takes at most 3 modes");
    return true;
  });
  r.field(n, "weight", "oracle", false, [&](const YAML::Node& v, const std::string& f) {
    if (!r.numbers(v, f, o.weight)) return false;
    for (std::size_t i = 0; i < o.weight.size(); ++i)
      if (!(o.weight[i] > 0.0)) r.fail(v[i], indexed(f, i), "mode weight must be positive");
    return true;
  });
  r.field(n, "n_max", "oracle", false, [&](const YAML::Node& v, const std::string& f) {
    if (!r.integer(v, f, o.n_max)) return false;
    if (o.n_max < 1 || o.n_max > 12) r.fail(v, f, "must lie in 1..12");
    return true;
  });
  r.num(n, "J", "oracle", o.j, false);
  if (r.num(n, "sigma", "oracle", o.sigma, false) && !(o.sigma > 0.0))
    r.fail(n["sigma"], "oracle.sigma",
           "smearing width must be positive, got " + format_double(o.sigma) + " nm");
}

ChannelConfig parse_channel(Reader& r, const YAML::Node& root) {
  ChannelConfig c;
  r.mapping(root, "", {"kind", "name", "velocity", "encoder", "decoder", "sweep", "oracle_only",
                       "oracle"});
  read_name(r, root, c.name);
  if (r.num(root, "velocity", "", c.channel.velocity, false) && !(c.channel.velocity > 0.0))
    r.fail(root["velocity"], "velocity", "must be positive");
  read_gate(r, root, "encoder", c.channel.encoder);
  read_gate(r, root, "decoder", c.channel.decoder);
  read_sweep(r, root, c);
  r.field(root, "oracle_only", "", false,
          [&](const YAML::Node& v, const std::string& f) { return r.boolean(v, f, c.oracle_only); });
  read_oracle(r, root, c);
  if (!r.errors.empty()) return c;

  if (c.channel.decoder.t < c.channel.encoder.t)
    r.fail(root["decoder"]["t"], "decoder.t", "decoder time precedes encoder time");
  if (c.oracle.enabled || c.oracle_only) {
    if (c.oracle.k.empty())
      r.fail(root["oracle"], "oracle.k", "oracle runs need at least one mode momentum");
    else if (!c.oracle.weight.empty() && c.oracle.weight.size() != c.oracle.k.size())
      r.fail(root["oracle"]["weight"], "oracle.weight", "needs one weight per momentum");
    for (const auto* g : {&c.channel.encoder, &c.channel.decoder})
      for (const auto& f : g->factors)
        if (f.sector != FieldSector::single)
          r.fail(root["oracle"], "oracle", "the Fock oracle models the 'single' sector only");
  }
  return c;
}

// ---- serialization --------------------------------------------------------

std::string num(double v) { return format_double(v); }

std::string list(std::span<const double> v) {
  std::string s = "[";
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + num(v[i]);
  return s + "]";
}

}  // namespace

Config parse_config(std::string_view text) {
  YAML::Node root;
  try {
    root = YAML::Load(std::string(text));
  } catch (const YAML::Exception& e) {
    throw ConfigError({{e.mark.line >= 0 ? e.mark.line + 1 : 0, "", e.msg}});
  }
  Reader r;
  if (!root.IsDefined() || root.IsNull()) {
    r.errors.push_back({1, "kind", "document is empty; required: kind (device or channel)"});
    r.errors.push_back({1, "device", "requires sections lattice or continuum, geometry, window"});
    r.errors.push_back({1, "channel", "requires sections encoder, decoder, sweep"});
    throw ConfigError(std::move(r.errors));
  }
  if (!root.IsMap()) throw ConfigError({{line_of(root), "", "expected a document of sections"}});
  std::string kind;
  if (!r.field(root, "kind", "", true,
               [&](const YAML::Node& v, const std::string& f) { return r.text(v, f, kind); }))
    throw ConfigError(std::move(r.errors));
  Config out;
  if (kind == "device")
    out = parse_device(r, root);
  else if (kind == "channel")
    out = parse_channel(r, root);
  else
    r.fail(root["kind"], "kind", "expected 'device' or 'channel', got '" + kind + "'");
  if (!r.errors.empty()) throw ConfigError(std::move(r.errors));
  return out;
}

Config load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError({{0, "", "cannot read " + path.string()}});
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string serialize(const DeviceConfig& c) {
  std::ostringstream o;
  o << "kind: device\nname: " << c.name << "\n";
  if (c.continuum) {
    o << "continuum:\n  A: " << num(c.continuum->A) << "\n  B: " << num(c.continuum->B)
      << "\n  M: " << num(c.continuum->M_cont)
      << "\n  lattice_constant: " << num(c.continuum->lattice_constant) << "\n";
  } else {
    o << "lattice:\n  epsilon: " << num(c.params.epsilon) << "\n  mass: " << num(c.params.mass)
      << "\n  lambda: " << num(c.params.lambda)
      << "\n  lattice_constant: " << num(c.params.lattice_constant) << "\n";
  }
  o << "geometry:\n  nx: " << c.geometry.nx << "\n  ny: " << c.geometry.ny
    << "\n  boundary_x: " << name_of(kBoundaries, c.geometry.boundary_x)
    << "\n  boundary_y: " << name_of(kBoundaries, c.geometry.boundary_y) << "\n";
  o << "gates:" << (c.gates.empty() ? " []" : "") << "\n";
  for (const auto& g : c.gates) {
    o << "  - shape: " << name_of(kShapes, g.shape) << "\n    center: [" << num(g.cx) << ", "
      << num(g.cy) << "]\n";
    if (g.shape == RegionShape::rectangle)
      o << "    half_extent: [" << num(g.rx) << ", " << num(g.ry) << "]\n";
    else
      o << "    radius: " << num(g.rx) << "\n";
    if (g.shape == RegionShape::half_disk) o << "    direction: " << num(g.direction) << "\n";
    o << "    potential: " << num(g.potential) << "\n";
  }
  o << "fields:" << (c.fields.empty() ? " []" : "") << "\n";
  for (const auto& f : c.fields)
    o << "  - center: [" << num(f.cx) << ", " << num(f.cy) << "]\n    profile: "
      << name_of(kProfiles, f.profile) << "\n    width: " << num(f.width) << "\n    b: "
      << list(f.b) << "\n";
  o << "window:\n  e_min: " << num(c.window.e_min) << "\n  e_max: " << num(c.window.e_max)
    << "\n  max_pairs: " << c.window.max_pairs << "\n";
  o << "solver:\n  strategy: " << name_of(kStrategies, c.solver.strategy)
    << "\n  tolerance: " << num(c.solver.tolerance) << "\n  krylov_dim: " << c.solver.krylov_dim
    << "\n  max_restarts: " << c.solver.max_restarts << "\n  seed: " << c.solver.seed
    << "\n  max_dimension: " << c.max_dimension << "\n";
  o << "bands:\n  width: " << c.bands.width << "\n  k_count: " << c.bands.k_count
    << "\n  k_min: " << num(c.bands.k_min) << "\n  k_max: " << num(c.bands.k_max)
    << "\n  transverse: " << name_of(kBoundaries, c.bands.transverse) << "\n";
  return o.str();
}

std::string serialize(const ChannelConfig& c) {
  std::ostringstream o;
  o << "kind: channel\nname: " << c.name << "\nvelocity: " << num(c.channel.velocity) << "\n";
  for (auto [key, g] : {std::pair{"encoder", &c.channel.encoder},
                        std::pair{"decoder", &c.channel.decoder}}) {
    o << key << ":\n  x: " << num(g->x) << "\n  t: " << num(g->t) << "\n  factors:\n";
    for (const auto& f : g->factors) {
      o << "    - coupling: ";
      if (f.rule == CouplingRule::fixed)
        o << num(f.value) << "\n";
      else
        o << (f.rule == CouplingRule::sweep ? "sweep" : "conjugate") << "\n      scale: "
          << num(f.value) << "\n";
      o << "      axis: " << num(f.detector.axis) << "\n      gap: " << num(f.detector.gap)
        << "\n      observable: " << to_string(f.kind) << "\n      sector: " << to_string(f.sector)
        << "\n      dx: " << num(f.dx) << "\n      dx_sigma: " << num(f.dx_sigma)
        << "\n      dt: " << num(f.dt) << "\n      dt_sigma: " << num(f.dt_sigma) << "\n";
    }
  }
  o << "sweep:\n  J: " << list(c.j_values) << "\n  sigma: " << list(c.sigma_values) << "\n";
  o << "oracle_only: " << (c.oracle_only ? "true" : "false") << "\n";
  o << "oracle:\n  enabled: " << (c.oracle.enabled ? "true" : "false") << "\n  k: "
    << list(c.oracle.k) << "\n  weight: " << list(c.oracle.weight) << "\n  n_max: "
    << c.oracle.n_max << "\n  J: " << num(c.oracle.j) << "\n  sigma: " << num(c.oracle.sigma)
    << "\n";
  return o.str();
}

std::string serialize(const Config& c) {
  return std::visit([](const auto& v) { return serialize(v); }, c);
}

}  // namespace udw
