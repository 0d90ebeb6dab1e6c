#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <random>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Eigenvalues>

#include "udw/channel.hpp"
#include "udw/config.hpp"

using namespace udw;

namespace {

ChannelTemplate preset(const std::string& name) {
  const auto cfg = load_config(std::filesystem::path(UDW_PRESET_DIR) / (name + ".cfg"));
  return std::get<ChannelConfig>(cfg).channel;
}

GateSpec rank_one(double j, double axis, double x, double t, double sigma = 1.0,
                  ObservableKind kind = ObservableKind::pi) {
  GateSpec g = gates::simple_rank_one(j, DetectorOp{axis, 0.0}, SmearingProfile{x, sigma}, t, 1.0);
  g.factors[0].observable.kind = kind;
  return g;
}

ChannelSetup setup_of(GateSpec enc, double xa, double ta, GateSpec dec, double xb, double tb) {
  ChannelSetup s;
  s.encoder = std::move(enc);
  s.decoder = std::move(dec);
  s.x_a = xa;
  s.t_a = ta;
  s.x_b = xb;
  s.t_b = tb;
  return s;
}

double min_eigenvalue(const Eigen::MatrixXcd& m) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(m, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

Eigen::Matrix4cd bell_cb() {
  Eigen::Matrix4cd r = Eigen::Matrix4cd::Zero();
  r(0, 0) = r(0, 3) = r(3, 0) = r(3, 3) = 0.5;
  return r;
}

}  // namespace

TEST_CASE("entropy and coherent information of reference states") {
  Eigen::Matrix4cd prod = Eigen::Matrix4cd::Zero();
  prod(0, 0) = prod(2, 2) = 0.5;
  CHECK(coherent_information(prod) == doctest::Approx(-1.0).epsilon(1e-12));
  CHECK(coherent_information(bell_cb()) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(von_neumann_entropy(Eigen::Matrix4cd::Identity() / 4.0) == doctest::Approx(2.0));
  CHECK(von_neumann_entropy(bell_cb()) == doctest::Approx(0.0).epsilon(1e-12));
  const Eigen::Matrix2cd rb = trace_out_reference(bell_cb());
  CHECK((rb - Eigen::Matrix2cd::Identity() / 2.0).norm() < 1e-15);
  CHECK(trace_distance(prod, prod) == 0.0);
  CHECK(trace_distance(prod, bell_cb()) == doctest::Approx((1.0 + std::sqrt(5.0)) / 4.0).epsilon(1e-12));
}

TEST_CASE("zero coupling gives the trivial product state") {
  const auto s = setup_of(rank_one(0.0, 0.0, 0.0, 0.0), 0, 0, rank_one(0.0, 0.0, 5.0, 5.0), 5, 5);
  const auto r = evaluate_channel(s);
  Eigen::Matrix4cd expect = Eigen::Matrix4cd::Zero();
  expect(0, 0) = expect(2, 2) = 0.5;
  CHECK((r.rho_cb - expect).norm() < 1e-14);
  CHECK(r.coherent_info == doctest::Approx(-1.0).epsilon(1e-12));
}

TEST_CASE("encoder alone leaves qubit B untouched") {
  const auto s = setup_of(rank_one(1.7, 0.4, 0.0, 0.0), 0, 0, rank_one(0.0, 0.0, 5.0, 5.0), 5, 5);
  const Eigen::Matrix2cd rb = trace_out_reference(output_state(s));
  Eigen::Matrix2cd zero = Eigen::Matrix2cd::Zero();
  zero(0, 0) = 1.0;
  CHECK((rb - zero).norm() < 1e-14);
}

TEST_CASE("a J = 0 sweep row is -1 everywhere") {
  for (const char* name : {"two_rank_one", "single_rank_one"}) {
    const auto t = preset(name);
    const std::vector<double> js{0.0};
    const std::vector<double> sig{0.5, 1.0, 3.0};
    for (const auto& row : capacity_sweep(t, js, sig))
      CHECK(row.coherent_info == doctest::Approx(-1.0).epsilon(1e-12));
  }
}

TEST_CASE("single rank-one factors break entanglement on a 10x10 grid") {
  const auto t = preset("single_rank_one");
  std::vector<double> js, sig;
  for (int i = 0; i < 10; ++i) {
    js.push_back(10.0 * i / 9.0);
    sig.push_back(0.5 + 0.5 * i);
  }
  const auto rows = capacity_sweep(t, js, sig, 4);
  REQUIRE(rows.size() == 100);
  double worst = -2.0;
  for (const auto& r : rows) worst = std::max(worst, r.coherent_info);
  CHECK(worst <= 1e-9);
}

TEST_CASE("single rank-one factors with a timelike, overlapping placement stay at or below zero") {
  std::mt19937 rng(11);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 40; ++i) {
    const double j1 = 6.0 * u(rng), j2 = 6.0 * u(rng);
    const double d = 4.0 * u(rng);
    const auto kind = i % 2 ? ObservableKind::pi_right : ObservableKind::pi;
    const auto s = setup_of(rank_one(j1, 0.0, 0.0, 0.0, 1.0, kind), 0, 0,
                            rank_one(j2, 0.0, d, d, 1.0, kind), d, d);
    CHECK(coherent_information(output_state(s)) <= 1e-9);
  }
}

TEST_CASE("two rank-one gates transmit quantum information") {
  const auto t = preset("two_rank_one");
  const std::vector<double> js{0.5, 1, 2, 4, 8, 16, 32, 64, 128, 160};
  const std::vector<double> sig{1.0};
  const auto rows = capacity_sweep(t, js, sig);
  std::vector<double> ic;
  for (const auto& r : rows) ic.push_back(r.coherent_info);
  CHECK(*std::max_element(ic.begin(), ic.end()) > 0.0);
  CHECK(ic.back() > 0.9);
  CHECK(ic.back() <= 1.0 + 1e-9);
  // the trend over the upper half of the sweep
  CHECK(is_monotone_increasing(std::span<const double>(ic).subspan(4), 1e-6));
  for (const auto& r : rows) CHECK((r.branch_count > 0 && r.branch_count <= 256));
}

TEST_CASE("capacity sweep ordering and threading") {
  const auto t = preset("two_rank_one");
  const std::vector<double> js{0.5, 2.0, 8.0};
  const std::vector<double> sig{1.0, 2.0};
  const auto a = capacity_sweep(t, js, sig, 1);
  const auto b = capacity_sweep(t, js, sig, 4);
  REQUIRE(a.size() == 6);
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].sigma == sig[i / 3]);
    CHECK(a[i].j == js[i % 3]);
    CHECK(a[i].coherent_info == b[i].coherent_info);
  }
}

TEST_CASE("exchanging encoder and decoder placements at equal times") {
  // Pi is parity even, so reflecting the layout about the midpoint is a symmetry
  std::mt19937 rng(5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 10; ++i) {
    const double d = 0.5 + 2.0 * u(rng);
    const double t = 2.0 * u(rng);
    const double j1 = 2.0 * u(rng), j2 = 2.0 * u(rng), j3 = 2.0 * u(rng), j4 = 2.0 * u(rng);
    const double a1 = 3.0 * u(rng), a2 = 3.0 * u(rng), a3 = 3.0 * u(rng), a4 = 3.0 * u(rng);
    auto gate = [&](double ja, double xa, double jb, double xb, double x) {
      GateSpec g;
      g.factors = rank_one(ja, xa, x, t).factors;
      g.factors.push_back(rank_one(jb, xb, x, t + 0.3).factors[0]);
      return g;
    };
    const auto fwd = setup_of(gate(j1, a1, j2, a2, -d), -d, t, gate(j3, a3, j4, a4, d), d, t);
    const auto swapped = setup_of(gate(j1, a1, j2, a2, d), d, t, gate(j3, a3, j4, a4, -d), -d, t);
    const auto rf = evaluate_channel(fwd);
    const auto rs = evaluate_channel(swapped);
    CHECK(rs.coherent_info == doctest::Approx(rf.coherent_info).epsilon(1e-9));
    CHECK(trace_distance(rf.rho_cb, rs.rho_cb) < 1e-9);
  }
}

TEST_CASE("engine agrees with the truncated Fock oracle") {
  const auto t = preset("two_rank_one");
  const std::vector<double> k{0.7, 1.3};
  const auto modes = uniform_modes(k);
  const auto s = instantiate(t, 0.3, 1.0);
  const auto orc = fock_oracle(s, modes, 10);
  CHECK(orc.reliable);
  CHECK(orc.fock_dimension == 121);
  CHECK(trace_distance(output_state(s, &modes), orc.rho_cb) < 1e-6);
  CHECK(orc.coherent_info == doctest::Approx(coherent_information(output_state(s, &modes))).epsilon(1e-6));

  // three modes, non-chiral observables, mixed axes
  const std::vector<double> k3{0.4, 0.8, 1.2};
  const auto m3 = uniform_modes(k3);
  GateSpec enc = gates::naive_two_rank_one(0.25, DetectorOp{0.3, 0.0}, 0.2, DetectorOp{1.6, 0.0},
                                           SmearingProfile{0.0, 1.0}, 0.0, 1.0);
  GateSpec dec = rank_one(0.3, 0.9, 2.0, 1.5);
  const auto s3 = setup_of(enc, 0, 0, dec, 2.0, 1.5);
  const auto o3 = fock_oracle(s3, m3, 7);
  CHECK(o3.reliable);
  CHECK(trace_distance(output_state(s3, &m3), o3.rho_cb) < 1e-6);
}

TEST_CASE("single mode coherent-state algebra") {
  const std::vector<double> k{0.8};
  const auto modes = uniform_modes(k);
  Eigen::Matrix2cd h;
  h << 1, 1, 1, -1;
  h /= std::sqrt(2.0);
  for (double j : {0.1, 0.4, 0.7, 1.0}) {
    // B = (|+> + |->)/sqrt2 picks up exp(+-i J Pi / 2) on the two branches,
    // so <+|rho_B|-> = <exp(i J Pi)> / 2
    const auto dec = rank_one(0.5 * j, 0.0, 0.0, 1.0);
    const auto s = setup_of(rank_one(0.0, 0.0, 0.0, 0.0), 0, 0, dec, 0, 1);
    const auto orc = fock_oracle(s, modes, 12);
    REQUIRE(orc.reliable);
    const Eigen::Matrix2cd rb = h * trace_out_reference(orc.rho_cb) * h;
    const double pi2 = correlator(dec.factors[0].observable, dec.factors[0].observable, modes).real();
    const double expect = std::exp(-0.5 * j * j * pi2);
    CHECK(pi2 > 0.1);
    CHECK(std::abs(2.0 * std::abs(rb(0, 1)) - expect) < 1e-8);
  }
}

TEST_CASE("Fock truncation leak is flagged") {
  const std::vector<double> k{0.8};
  const auto modes = uniform_modes(k);
  const auto s = setup_of(rank_one(6.0, 0.0, 0.0, 0.0), 0, 0, rank_one(6.0, 0.0, 0.0, 1.0), 0, 1);
  const auto orc = fock_oracle(s, modes, 3);
  CHECK_FALSE(orc.reliable);
  CHECK(orc.top_population > 1e-8);
  CHECK_THROWS_AS(fock_oracle(s, uniform_modes(std::vector<double>{0.1, 0.2, 0.3, 0.4}), 4),
                  PreconditionError);
  CHECK_THROWS_AS(fock_oracle(s, modes, 13), PreconditionError);
}

TEST_CASE("output is a valid state and respects the entropy bounds") {
  const auto t = preset("two_rank_one");
  std::vector<double> js, sig;
  for (int i = 0; i < 8; ++i) {
    js.push_back(std::pow(2.0, i - 2));
    sig.push_back(0.5 + 0.6 * i);
  }
  for (double j : js)
    for (double s : sig) {
      const auto r = evaluate_channel(instantiate(t, j, s));
      CHECK(min_eigenvalue(r.rho_cb) >= -1e-9);
      CHECK(std::abs(r.rho_cb.trace() - 1.0) < 1e-10);
      CHECK((r.rho_cb - r.rho_cb.adjoint()).norm() < 1e-12);
      const double sb = von_neumann_entropy(trace_out_reference(r.rho_cb));
      CHECK(r.coherent_info <= sb + 1e-9);
      CHECK(sb <= 1.0 + 1e-12);
      CHECK(r.coherent_info >= -1.0 - 1e-9);
    }
}

TEST_CASE("small coupling is continuous with the trivial channel") {
  for (const char* name : {"two_rank_one", "single_rank_one"}) {
    const auto s = instantiate(preset(name), 1e-4, 1.0);
    CHECK(std::abs(evaluate_channel(s).coherent_info + 1.0) < 1e-3);
  }
}

TEST_CASE("unsupported gates are rejected") {
  const auto cos_gate = gates::cross_term(0.5, DetectorOp{}, 0.0, 0.0, 1.0);
  CHECK(classify(cos_gate) == GateClass::non_gaussian);
  const auto s = setup_of(cos_gate, 0, 0, rank_one(0.5, 0.0, 1.0, 1.0), 1, 1);
  CHECK_THROWS_AS(evaluate_channel(s), UnsupportedError);

  GateSpec big;
  for (int i = 0; i < 6; ++i) big.factors.push_back(rank_one(0.1, 0.1 * i, 0.0, 0.0).factors[0]);
  GateSpec big_dec;
  for (int i = 0; i < 5; ++i) big_dec.factors.push_back(rank_one(0.1, 0.1 * i, 1.0, 1.0).factors[0]);
  CHECK_THROWS_AS(evaluate_channel(setup_of(big, 0, 0, big_dec, 1, 1)), UnsupportedError);

  const auto late = setup_of(rank_one(0.5, 0.0, 0.0, 2.0), 0, 2, rank_one(0.5, 0.0, 1.0, 1.0), 1, 1);
  CHECK_THROWS_AS(evaluate_channel(late), PreconditionError);
}

TEST_CASE("conjugate coupling follows the commutator rule") {
  const auto t = preset("two_rank_one");
  for (double j : {0.5, 4.0, 64.0}) {
    const auto s = instantiate(t, j, 1.0);
    const auto& f = s.encoder.factors;
    const double c = std::abs(commutator_phase(f[1].observable, f[0].observable));
    CHECK(std::abs(f[1].coupling) == doctest::Approx(j));
    CHECK(std::abs(f[0].coupling) ==
          doctest::Approx(std::min(j, kPi / (4.0 * j * c))).epsilon(1e-12));
  }
}
