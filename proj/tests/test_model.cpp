#include <doctest.h>

#include <cmath>
#include <limits>

#include "fixtures.hpp"
#include "hcmec/model.hpp"

using namespace hcmec;
using namespace hcmec::testing;

namespace {

// SINR evaluated directly on the aggregate channel and stacked beamformers.
double
sinr_oracle (int k, const std::vector<ComplexVector> &w, const NetworkScenario &sc)
{
  const ComplexVector hk = sc.aggregate_channel (k);
  const int n_bs = sc.num_bs () * sc.bs_antennas ();
  auto stacked = [&] (int i) {
    ComplexVector v = ComplexVector::Zero (hk.size ());
    if (sc.is_central (i))
      v.head (n_bs) = w[i];
    else
      v.segment (n_bs + sc.serving[i] * sc.uav_antennas (), sc.uav_antennas ()) = w[i];
    return v;
  };
  double denom = sc.noise_power;
  for (int i = 0; i < sc.num_users (); ++i)
    if (i != k)
      denom += std::norm (hk.dot (stacked (i)));
  return std::norm (hk.dot (stacked (k))) / denom;
}

}  // namespace

TEST_CASE ("sinr hand examples")
{
  SUBCASE ("zero beam")
  {
    NetworkScenario sc = bare_scenario (1, 1, 0, 1, {kCloud});
    sc.h_bs[0][0] = 1.0;
    std::vector<ComplexVector> w = {ComplexVector::Zero (1)};
    CHECK (sinr (0, w, sc) == 0.0);
  }
  SUBCASE ("single user")
  {
    NetworkScenario sc = bare_scenario (1, 1, 0, 1, {kCloud});
    sc.h_bs[0][0] = 1.0;
    std::vector<ComplexVector> w = {ComplexVector::Constant (1, 2.0)};
    CHECK (sinr (0, w, sc) == doctest::Approx (4.0));
  }
  SUBCASE ("two users")
  {
    NetworkScenario sc = bare_scenario (1, 1, 0, 1, {kCloud, kCloud});
    sc.h_bs[0][0] = 1.0;
    sc.h_bs[1][0] = 1.0;
    std::vector<ComplexVector> w = {ComplexVector::Constant (1, 2.0), ComplexVector::Constant (1, 1.0)};
    CHECK (sinr (0, w, sc) == doctest::Approx (2.0));
  }
}

TEST_CASE ("sinr matches the aggregate-channel oracle on random mixed networks")
{
  Rng rng (11);
  for (int trial = 0; trial < 50; ++trial)
    {
      NetworkScenario sc = bare_scenario (3, 2, 2, 2, {kCloud, kCloud, 0, 1, kCloud, 1}, 0.3);
      randomize_channels (sc, rng);
      const auto w = random_beams (sc, rng);
      for (int k = 0; k < sc.num_users (); ++k)
        CHECK (rel_diff (sinr (k, w, sc), sinr_oracle (k, w, sc)) < 1e-12);
    }
}

TEST_CASE ("sinr is invariant to beam phase rotations")
{
  Rng rng (5);
  NetworkScenario sc = bare_scenario (2, 2, 1, 2, {kCloud, kCloud, 0});
  randomize_channels (sc, rng);
  auto w = random_beams (sc, rng);
  std::vector<double> before;
  for (int k = 0; k < 3; ++k)
    before.push_back (sinr (k, w, sc));
  w[1] *= std::polar (1.0, 0.7);
  w[2] *= std::polar (1.0, -2.1);
  for (int k = 0; k < 3; ++k)
    CHECK (rel_diff (sinr (k, w, sc), before[k]) < 1e-12);
}

TEST_CASE ("rate bound is tau log2(1 + sinr)")
{
  NetworkScenario sc = bare_scenario (1, 1, 0, 1, {kCloud});
  sc.h_bs[0][0] = 1.0;
  std::vector<ComplexVector> w = {ComplexVector::Constant (1, std::sqrt (3.0))};
  CHECK (rate_bound (0, w, sc) == doctest::Approx (2.0 * sc.bandwidth));
}

TEST_CASE ("power_ec components")
{
  NetworkScenario sc = bare_scenario (1, 1, 1, 1, {0, 0});
  VariableState s = VariableState::zeros (sc);
  SUBCASE ("computation term")
  {
    s.f << 4e8, 6e8;
    const EcPower p = power_ec (0, s, sc);
    CHECK (p.computation == doctest::Approx (0.1));
  }
  SUBCASE ("idle platform")
  {
    const EcPower p = power_ec (0, s, sc);
    CHECK (p.total () == doctest::Approx (100.0));
  }
  SUBCASE ("transmit sum")
  {
    sc.ec_operation_power = 0.0;
    s.w[0] = ComplexVector::Constant (1, 0.1);
    s.w[1] = ComplexVector::Constant (1, Complex (0.0, 0.1));
    const EcPower p = power_ec (0, s, sc);
    CHECK (p.transmit == doctest::Approx (0.02));
    CHECK (p.total () == doctest::Approx (0.02));
  }
  SUBCASE ("total is the sum of its parts")
  {
    s.f << 3e8, 2e8;
    s.w[0] = ComplexVector::Constant (1, 0.05);
    const EcPower p = power_ec (0, s, sc);
    CHECK (p.total () == p.transmit + p.computation + p.operation);
  }
}

TEST_CASE ("delay decomposition")
{
  NetworkScenario sc = bare_scenario (1, 1, 1, 1, {kCloud, 0});
  VariableState s = VariableState::zeros (sc);
  s.f << 1e9, 1e9;
  s.r << 1e6, 1e6;
  CHECK (delay (0, s, sc).total () == doctest::Approx (0.20045));
  CHECK (delay (1, s, sc).total () == doctest::Approx (0.2));
  CHECK (delay (1, s, sc).fronthaul == 0.0);

  s.f[0] = 1e300;
  s.r[0] = 1e300;
  CHECK (delay (0, s, sc).total () == doctest::Approx (4.5e-4));

  s.f[0] = 0.0;
  CHECK_THROWS_AS (delay (0, s, sc), std::domain_error);
  s.f[0] = 1e9;
  s.r[0] = -1.0;
  CHECK_THROWS_AS (delay (0, s, sc), std::domain_error);
}

TEST_CASE ("delay strictly decreases in f and r")
{
  NetworkScenario sc = bare_scenario (1, 1, 0, 1, {kCloud});
  VariableState s = VariableState::zeros (sc);
  s.f[0] = 1e8;
  s.r[0] = 1e5;
  double prev = delay (0, s, sc).total ();
  for (int i = 0; i < 20; ++i)
    {
      s.f[0] *= 1.3;
      const double cur = delay (0, s, sc).total ();
      CHECK (cur < prev);
      prev = cur;
    }
  for (int i = 0; i < 20; ++i)
    {
      s.r[0] *= 1.3;
      const double cur = delay (0, s, sc).total ();
      CHECK (cur < prev);
      prev = cur;
    }
}

TEST_CASE ("fronthaul load counts links above the threshold")
{
  NetworkScenario sc = bare_scenario (1, 1, 0, 1, {kCloud, kCloud});
  VariableState s = VariableState::zeros (sc);
  s.r << 1e6, 1e6;
  CHECK (fronthaul_load (0, s, sc, 1e-9) == 0.0);

  NetworkScenario one = bare_scenario (1, 1, 0, 1, {kCloud});
  VariableState t = VariableState::zeros (one);
  t.r[0] = 5e6;
  t.w[0][0] = 0.1;
  CHECK (fronthaul_load (0, t, one, 1e-9) == 5e6);

  s.w[0][0] = std::sqrt (1e-3);
  s.w[1][0] = std::sqrt (1e-12);
  CHECK (fronthaul_load (0, s, sc, 1e-9) == 1e6);
}

TEST_CASE ("metrics objective is the weighted rate sum")
{
  Rng rng (2);
  NetworkScenario sc = bare_scenario (2, 2, 1, 1, {kCloud, 0, kCloud});
  randomize_channels (sc, rng);
  sc.tasks[1].weight = 2.5;
  VariableState s = VariableState::zeros (sc);
  s.w = random_beams (sc, rng);
  s.r << 1.5e6, 2.25e6, 3e5;
  s.f << 1e9, 1e8, 2e9;
  const MetricsReport m = evaluate_metrics (s, sc, 1e-9);
  CHECK (m.objective == 1.5e6 + 2.5 * 2.25e6 + 3e5);
  CHECK (m.average_rate () == doctest::Approx ((1.5e6 + 2.25e6 + 3e5) / 3.0));
  CHECK (m.worst_delay () == doctest::Approx (m.delay[m.worst_delay_user].total ()));
}

TEST_CASE ("audit has one entry per constraint and flags violations")
{
  NetworkScenario sc = bare_scenario (2, 1, 1, 1, {kCloud, kCloud, 0});
  sc.h_bs[0] << 1.0, 0.5;
  sc.h_bs[1] << 0.2, 1.0;
  sc.h_uav[2][0] << 1.0;
  VariableState s = VariableState::zeros (sc);
  s.r.setConstant (1e3);
  s.f.setConstant (1e8);

  const FeasibilityReport rep = audit (s, sc, 1e-6);
  const int b = 2, e = 1, k = 3;
  CHECK (rep.entries.size () == static_cast<std::size_t> (b + e + b + 1 + e + k + k));
  CHECK_FALSE (rep.pass ());
  int rate_fail = 0;
  for (const auto &c : rep.entries)
    if (c.family == ConstraintFamily::Rate && !c.pass)
      ++rate_fail;
  CHECK (rate_fail == 3);

  SUBCASE ("edge compute above capacity")
  {
    s.f[2] = 2e9;
    bool flagged = false;
    for (const auto &c : audit (s, sc, 1e-6).entries)
      if (c.family == ConstraintFamily::EcCapacity && !c.pass)
        flagged = true;
    CHECK (flagged);
  }
  SUBCASE ("a feasible hand-built point passes")
  {
    s.w[0] << 0.3, 0.0;
    s.w[1] << 0.0, 0.3;
    s.w[2] << 0.2;
    for (int i = 0; i < 3; ++i)
      s.r[i] = 0.9 * rate_bound (i, s.w, sc);
    s.f << 1e9, 1e9, 4e8;
    const FeasibilityReport ok = audit (s, sc, 1e-6);
    CHECK (ok.pass ());
    CHECK (ok.violations ().empty ());
  }
}

TEST_CASE ("state dimension checks")
{
  const NetworkScenario sc = bare_scenario (2, 2, 1, 3, {kCloud, 0});
  VariableState s = VariableState::zeros (sc);
  CHECK (s.w[0].size () == 4);
  CHECK (s.w[1].size () == 3);
  CHECK_NOTHROW (s.check_dimensions (sc));
  s.w[1] = ComplexVector::Zero (2);
  CHECK_THROWS_AS (s.check_dimensions (sc), std::invalid_argument);
}
