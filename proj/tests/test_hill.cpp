#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "hillstark/hill.hpp"

using namespace hillstark;
using std::numbers::pi;

namespace {

PeriodicPotential mathieu(double v) {
  return PeriodicPotential::make(pi, {{1, v}, {-1, v}});
}

// classical RK4 at fixed step, Richardson-extrapolated: an independent
// reference path for the adaptive solver
struct Rk4Ref {
  const PeriodicPotential& V;
  cplx E;
  void rhs(double x, const cplx y[4], cplx dy[4]) const {
    const cplx q = V(cplx(x, 0.0)) - E;
    dy[0] = y[1]; dy[1] = q * y[0];
    dy[2] = y[3]; dy[3] = q * y[2];
  }
  void run(double x1, int n, cplx y[4]) const {
    y[0] = 1.0; y[1] = 0.0; y[2] = 0.0; y[3] = 1.0;
    const double h = x1 / n;
    cplx k1[4], k2[4], k3[4], k4[4], t[4];
    for (int i = 0; i < n; ++i) {
      const double x = i * h;
      rhs(x, y, k1);
      for (int j = 0; j < 4; ++j) t[j] = y[j] + 0.5 * h * k1[j];
      rhs(x + 0.5 * h, t, k2);
      for (int j = 0; j < 4; ++j) t[j] = y[j] + 0.5 * h * k2[j];
      rhs(x + 0.5 * h, t, k3);
      for (int j = 0; j < 4; ++j) t[j] = y[j] + h * k3[j];
      rhs(x + h, t, k4);
      for (int j = 0; j < 4; ++j)
        y[j] += h / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
    }
  }
};

}  // namespace

TEST_CASE("free particle fundamental system") {
  auto V = PeriodicPotential::free_particle(pi);
  for (double E : {2.0, 10.0, 50.0}) {
    const auto j = fundamental_system(V, E, pi, {}, 0);
    const double s = std::sqrt(E);
    CHECK(std::abs(j.phi1.v[0] - std::cos(s * pi)) < 1e-10);
    CHECK(std::abs(j.phi2.v[0] - std::sin(s * pi) / s) < 1e-10);
    CHECK(std::abs(j.phi1.w[0] + s * std::sin(s * pi)) < 1e-9);
    CHECK(std::abs(j.phi2.w[0] - std::cos(s * pi)) < 1e-10);
  }
}

TEST_CASE("Wronskian is 1 for random potentials and energies") {
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> ur(-1.0, 1.0);
  for (int i = 0; i < 12; ++i) {
    auto V = PeriodicPotential::make(
        pi, {{1, cplx(0.4 * ur(rng), 0.2 * ur(rng))}, {2, cplx(0.2 * ur(rng), 0.1 * ur(rng))}});
    const cplx E(8.0 * ur(rng) + 4.0, 3.0 * ur(rng));
    const auto j = fundamental_system(V, E, pi);
    CHECK(std::abs(j.wronskian_defect) < 1e-9);
  }
}

TEST_CASE("adaptive solver matches Richardson-extrapolated RK4") {
  auto V = mathieu(1.0);  // V = 2 cos(2x)
  const cplx E = 10.0;
  Rk4Ref ref{V, E};
  cplx yh[4], yh2[4];
  ref.run(pi, 4000, yh);
  ref.run(pi, 8000, yh2);
  cplx rich[4];
  for (int i = 0; i < 4; ++i) rich[i] = yh2[i] + (yh2[i] - yh[i]) / 15.0;

  const auto j = fundamental_system(V, E, pi);
  CHECK(std::abs(j.phi1.v[0] - rich[0]) < 1e-9);
  CHECK(std::abs(j.phi1.w[0] - rich[1]) < 1e-9);
  CHECK(std::abs(j.phi2.v[0] - rich[2]) < 1e-9);
  CHECK(std::abs(j.phi2.w[0] - rich[3]) < 1e-9);
}

TEST_CASE("discriminant: free particle") {
  auto V = PeriodicPotential::free_particle(pi);
  auto [mu0, dmu0] = discriminant(V, 0.0);
  CHECK(std::abs(mu0 - 1.0) < 1e-10);
  auto [mu1, dmu1] = discriminant(V, 1.0);  // E = (pi/a)^2 -> mu = -1
  CHECK(std::abs(mu1 + 1.0) < 1e-10);
  (void)dmu0; (void)dmu1;
}

TEST_CASE("discriminant: conjugation symmetry") {
  auto V = mathieu(0.3);
  std::mt19937 rng(5);
  std::uniform_real_distribution<double> ur(-1.0, 1.0);
  for (int i = 0; i < 20; ++i) {
    const cplx E(30.0 * ur(rng) + 10.0, 10.0 * ur(rng));
    auto [mup, dmup] = discriminant(V, E);
    auto [muc, dmuc] = discriminant(V, std::conj(E));
    CHECK(std::abs(muc - std::conj(mup)) < 1e-10 * (1.0 + std::abs(mup)));
    CHECK(std::abs(dmuc - std::conj(dmup)) < 1e-9 * (1.0 + std::abs(dmup)));
  }
}

TEST_CASE("dmu/dE from the variational system matches finite differences") {
  auto V = PeriodicPotential::make(pi, {{1, cplx(0.3, 0.1)}, {2, cplx(0.1, 0.0)}});
  for (double E : {-1.0, 3.7, 25.0, 140.0}) {
    const double h = 1e-5 * std::max(1.0, std::abs(E));
    auto [mu, dmu] = discriminant(V, E);
    auto [mup, d1] = discriminant(V, E + h);
    auto [mum, d2] = discriminant(V, E - h);
    const cplx fd = (mup - mum) / (2.0 * h);
    CHECK(std::abs(fd - dmu) < 1e-6 * (1.0 + std::abs(dmu)));
    (void)mu; (void)d1; (void)d2;
  }
}

TEST_CASE("large-E discriminant: mu - cos(sqrt(E) a) decays like 1/E") {
  auto V = mathieu(0.3);
  std::vector<double> logE, logd;
  for (double E : {1e3, 3e3, 1e4, 3e4, 1e5}) {
    auto [mu, dmu] = discriminant(V, E);
    const double d = std::abs(mu - std::cos(std::sqrt(E) * pi));
    logE.push_back(std::log(E));
    logd.push_back(std::log(d));
    (void)dmu;
  }
  // least-squares slope
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const int n = static_cast<int>(logE.size());
  for (int i = 0; i < n; ++i) {
    sx += logE[i]; sy += logd[i]; sxx += logE[i] * logE[i]; sxy += logE[i] * logd[i];
  }
  const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  CHECK(slope < -0.9);
  CHECK(slope > -1.6);
}

TEST_CASE("ODE and integral-equation backends agree at the switch") {
  auto V = PeriodicPotential::make(pi, {{1, cplx(0.3, 0.1)}, {2, cplx(0.0, 0.1)}});
  HillOptions lo;  lo.e_switch = 1e9;   // force ODE
  HillOptions hi;  hi.e_switch = 1.0;   // force integral equation
  for (double E : {2e4, 6e4}) {
    const auto a = fundamental_system(V, E, pi, {}, 2, lo);
    const auto b = fundamental_system(V, E, pi, {}, 2, hi);
    CHECK(std::abs(a.mu(0) - b.mu(0)) < 2e-7);
    CHECK(std::abs(a.mu(1) - b.mu(1)) < 2e-7 * std::abs(a.mu(1)) + 1e-12);
    CHECK(std::abs(a.phi2.v[0] - b.phi2.v[0]) < 2e-7);
  }
}

TEST_CASE("complex-x path evaluation stays on the analytic continuation") {
  auto V = mathieu(0.3);
  const cplx E = 35.0;
  const cplx x(1.1, -0.4);
  // two different admissible paths must agree (analyticity)
  const std::vector<cplx> p1{cplx(1.1, 0.0), x};
  const std::vector<cplx> p2{cplx(0.3, -0.2), cplx(1.1, -0.2), x};
  const auto a = fundamental_system(V, E, x, p1);
  const auto b = fundamental_system(V, E, x, p2);
  CHECK(std::abs(a.phi1.v[0] - b.phi1.v[0]) < 1e-9 * (1.0 + std::abs(a.phi1.v[0])));
  CHECK(std::abs(a.phi2.v[0] - b.phi2.v[0]) < 1e-9 * (1.0 + std::abs(a.phi2.v[0])));
}

TEST_CASE("monodromy eigenvalue branches") {
  CHECK(std::abs(monodromy_eigenvalue(1.0, 1) - 1.0) < 1e-14);
  const cplx lp = monodromy_eigenvalue(0.0, 1);
  const cplx lm = monodromy_eigenvalue(0.0, -1);
  CHECK(std::abs(lp * lm - 1.0) < 1e-14);
  CHECK(std::abs(lp - cplx(0, 1)) < 1e-14);

  const double mu = std::cosh(0.3);
  for (int br : {-1, 1}) {
    const cplx l = monodromy_eigenvalue(mu, br);
    CHECK(std::abs(l + 1.0 / l - 2.0 * mu) < 1e-12);
  }
  CHECK(std::abs(monodromy_eigenvalue(mu, 1)) > 1.0);
  CHECK(std::abs(monodromy_eigenvalue(mu, -1)) < 1.0);
}
