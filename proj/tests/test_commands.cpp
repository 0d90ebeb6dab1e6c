#include <doctest.h>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include <unistd.h>

#include "udw/commands.hpp"
#include "udw/spectra.hpp"

using namespace udw;
namespace fs = std::filesystem;

namespace {

const fs::path kPresets = UDW_PRESET_DIR;

class TempDir {
 public:
  TempDir() {
    static std::atomic<int> counter{0};
    path_ = fs::temp_directory_path() /
            ("udw_cmd_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  const fs::path& path() const { return path_; }

 private:
  fs::path path_;
};

struct Run {
  int code = -1;
  std::string out, err;
};

Run run(std::string_view sub, const fs::path& cfg, const fs::path& dir, int threads = 1) {
  std::ostringstream out, err;
  RunOptions o;
  o.out_dir = dir;
  o.out = &out;
  o.err = &err;
  o.threads = threads;
  Run r;
  r.code = run_command(sub, cfg, o);
  r.out = out.str();
  r.err = err.str();
  return r;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

// Column `col` of a CSV file with one header line.
std::vector<double> column(const fs::path& p, int col) {
  std::istringstream in(slurp(p));
  std::string line;
  std::getline(in, line);
  std::vector<double> v;
  while (std::getline(in, line)) {
    std::istringstream ls(line);
    std::string cell;
    for (int i = 0; i <= col; ++i) std::getline(ls, cell, ',');
    v.push_back(std::stod(cell));
  }
  return v;
}

std::size_t file_count(const fs::path& dir) {
  return static_cast<std::size_t>(std::distance(fs::directory_iterator(dir), fs::directory_iterator{}));
}

fs::path write_config(const fs::path& dir, const std::string& name, const std::string& text) {
  const auto p = dir / name;
  std::ofstream(p) << text;
  return p;
}

}  // namespace

TEST_CASE("constraints tables") {
  TempDir d;
  const auto r = run("constraints", {}, d.path());
  CHECK(r.code == kExitOk);
  CHECK(r.out.find("126.0") != std::string::npos);
  CHECK(r.out.find("graphene") != std::string::npos);
  const auto esr = column(d.path() / "polarization_table.csv", 2);
  const auto pol = column(d.path() / "polarization_table.csv", 3);
  REQUIRE(esr.size() == 4);
  CHECK(std::abs(esr[1] - 126.0) <= 0.5);
  CHECK(std::abs(pol[1] - 0.62) <= 0.005);
  const auto tsw = column(d.path() / "scenarios.csv", 3);
  REQUIRE(tsw.size() == 3);
  CHECK(tsw[0] == doctest::Approx(30.0));
  CHECK(tsw[2] == doctest::Approx(2000.0));
}

TEST_CASE("malformed configuration exits with 2 and writes nothing") {
  TempDir d;
  const auto r = run("simulate", kPresets / ".." / "tests" / "data" / "malformed.cfg", d.path());
  CHECK(r.code == kExitConfig);
  CHECK(r.err.find("lattice.mass") != std::string::npos);
  CHECK(file_count(d.path()) == 0);

  CHECK(run("simulate", d.path() / "missing.cfg", d.path()).code == kExitConfig);
  CHECK(run("frobnicate", kPresets / "ribbon_12x60.cfg", d.path()).code == kExitConfig);
  CHECK(run("channel", kPresets / "ribbon_12x60.cfg", d.path()).code == kExitConfig);
  CHECK(run("simulate", kPresets / "two_rank_one.cfg", d.path()).code == kExitConfig);
  CHECK(file_count(d.path()) == 0);
}

TEST_CASE("ribbon preset finds the dense mid-gap states") {
  TempDir d;
  const auto r = run("simulate", kPresets / "ribbon_12x60.cfg", d.path(), 2);
  REQUIRE(r.code == kExitOk);
  for (const char* f : {"eigenvalues.csv", "density.csv", "density.pgm", "spin.csv", "spin.pgm",
                        "solver_report.json"})
    CHECK(fs::exists(d.path() / f));
  const auto e = column(d.path() / "eigenvalues.csv", 1);
  CHECK(!e.empty());

  const auto cfg = std::get<DeviceConfig>(load_config(kPresets / "ribbon_12x60.cfg"));
  const auto dense = dense_eigenvalues(assemble(cfg.params, cfg.geometry));
  std::vector<double> want;
  for (double x : dense)
    if (cfg.window.contains(x)) want.push_back(x);
  auto got = e;
  std::sort(got.begin(), got.end());
  REQUIRE(got.size() == std::min<std::size_t>(want.size(), cfg.window.max_pairs));
  for (std::size_t i = 0; i < got.size(); ++i) CHECK(std::abs(got[i] - want[i]) < 1e-8);

  const std::string pgm = slurp(d.path() / "density.pgm");
  CHECK(pgm.rfind("P5\n12 60\n65535\n", 0) == 0);
  CHECK(pgm.size() == std::string("P5\n12 60\n65535\n").size() + 2 * 12 * 60);
}

TEST_CASE("gapped torus preset returns an empty list") {
  TempDir d;
  const auto r = run("simulate", kPresets / "periodic_gapless.cfg", d.path());
  CHECK(r.code == kExitOk);
  CHECK(column(d.path() / "eigenvalues.csv", 1).empty());
  CHECK(slurp(d.path() / "eigenvalues.csv") == "index,energy_ev,residual_ev\n");
}

TEST_CASE("outputs are byte identical across runs and thread counts") {
  TempDir a, b, c;
  REQUIRE(run("simulate", kPresets / "ribbon_12x60.cfg", a.path(), 1).code == kExitOk);
  REQUIRE(run("simulate", kPresets / "ribbon_12x60.cfg", b.path(), 1).code == kExitOk);
  REQUIRE(run("simulate", kPresets / "ribbon_12x60.cfg", c.path(), 3).code == kExitOk);
  for (const char* f : {"eigenvalues.csv", "density.csv", "density.pgm", "spin.csv", "spin.pgm"}) {
    CAPTURE(f);
    CHECK(slurp(a.path() / f) == slurp(b.path() / f));
    CHECK(slurp(a.path() / f) == slurp(c.path() / f));
  }

  TempDir s1, s2;
  REQUIRE(run("channel", kPresets / "two_rank_one.cfg", s1.path(), 1).code == kExitOk);
  REQUIRE(run("channel", kPresets / "two_rank_one.cfg", s2.path(), 4).code == kExitOk);
  CHECK(slurp(s1.path() / "sweep.csv") == slurp(s2.path() / "sweep.csv"));
  CHECK(slurp(s1.path() / "oracle_report.json") == slurp(s2.path() / "oracle_report.json"));
}

TEST_CASE("two rank-one sweep crosses zero and beats the trivial channel") {
  TempDir d;
  const auto r = run("channel", kPresets / "two_rank_one.cfg", d.path(), 4);
  REQUIRE(r.code == kExitOk);
  const auto j = column(d.path() / "sweep.csv", 0);
  const auto ic = column(d.path() / "sweep.csv", 2);
  REQUIRE(ic.size() == 100);
  bool below = false, above = false;
  for (std::size_t i = 0; i < ic.size(); ++i) {
    if (j[i] == 0.0) {
      CHECK(ic[i] == doctest::Approx(-1.0).epsilon(1e-12));
      continue;
    }
    CHECK(ic[i] > -1.0);
    below = below || ic[i] < 0.0;
    above = above || ic[i] > 0.0;
  }
  CHECK(below);
  CHECK(above);

  const std::string rep = slurp(d.path() / "oracle_report.json");
  const auto pos = rep.find("\"trace_distance\": ");
  REQUIRE(pos != std::string::npos);
  CHECK(std::stod(rep.substr(pos + 18)) < 1e-6);
}

TEST_CASE("single rank-one sweep never transmits") {
  TempDir d;
  REQUIRE(run("channel", kPresets / "single_rank_one.cfg", d.path(), 4).code == kExitOk);
  for (double v : column(d.path() / "sweep.csv", 2)) CHECK(v <= 1e-9);
}

TEST_CASE("cosine gate is refused with its classification") {
  TempDir d;
  const auto r = run("channel", kPresets / "cosine_gate.cfg", d.path());
  CHECK(r.code == kExitConfig);
  CHECK(r.err.find("NonGaussian") != std::string::npos);
  CHECK(r.err.find("cosine_phi") != std::string::npos);
  CHECK(file_count(d.path()) == 0);

  // the oracle subcommand still evaluates it
  const auto o = run("oracle", kPresets / "cosine_gate.cfg", d.path());
  CHECK(o.code == kExitOk);
  CHECK(fs::exists(d.path() / "oracle_report.json"));
}

TEST_CASE("bands on the ribbon preset") {
  TempDir d;
  const auto r = run("bands", kPresets / "ribbon_12x60.cfg", d.path());
  CHECK(r.code == kExitOk);
  for (const char* f : {"bands.csv", "bands_spin.csv", "bands_report.json"})
    CHECK(fs::exists(d.path() / f));
  CHECK(column(d.path() / "bands.csv", 0).size() == 65);
}

TEST_CASE("scaled-down bar runs end to end") {
  TempDir d;
  std::string text = slurp(kPresets / "hgte_bar.cfg");
  text.replace(text.find("nx: 200"), 7, "nx: 16");
  text.replace(text.find("ny: 400"), 7, "ny: 32");
  text.replace(text.find("width: 120"), 10, "width: 40");
  const auto cfg = write_config(d.path(), "bar.cfg", text);
  const auto out = d.path() / "out";
  fs::create_directories(out);
  const auto r = run("simulate", cfg, out, 2);
  REQUIRE(r.code == kExitOk);
  const auto e = column(out / "eigenvalues.csv", 1);
  const auto parsed = std::get<DeviceConfig>(load_config(cfg));
  const auto dense = dense_eigenvalues(assemble(parsed.params, parsed.geometry));
  std::size_t want = 0;
  for (double x : dense) want += parsed.window.contains(x);
  CHECK(e.size() == std::min<std::size_t>(want, parsed.window.max_pairs));
  CHECK(slurp(out / "solver_report.json").find("\"window_count\": " + std::to_string(want)) !=
        std::string::npos);
}
