// High-energy backend for the fundamental system: the solutions satisfy
//
//   phi(x) = phi_free(x) + (1/s) int_0^x sin(s(x-y)) V(y) phi(y) dy,  s = sqrt(E),
//
// and for a finite Fourier potential every Picard iterate stays inside the
// algebra of terms c * x^k * e^{i w x}, so the iteration integrates exactly.
// Each application of the integral operator contracts by O(|V|_1 / s); two
// iterations leave a remainder O(s^-3) uniformly on compact x sets. The
// E-derivative levels solve phi_r'' + E phi_r = V phi_r - r phi_{r-1} with
// zero initial data, which is the same Volterra equation with a source.

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "hillstark/hill.hpp"

namespace hillstark::detail {

namespace {

struct Term {
  cplx c;
  cplx w;  // frequency: term is c * x^k * e^{i w x}
  int k;
};

using ExpPoly = std::vector<Term>;

double term_mag(const Term& t, cplx x) {
  const double ax = std::abs(x);
  return std::abs(t.c) * std::pow(std::max(1.0, ax), t.k) *
         std::exp(-std::imag(t.w * x));
}

void normalize(ExpPoly& p, cplx x_scale) {
  std::sort(p.begin(), p.end(), [](const Term& a, const Term& b) {
    if (a.k != b.k) return a.k < b.k;
    if (a.w.real() != b.w.real()) return a.w.real() < b.w.real();
    return a.w.imag() < b.w.imag();
  });
  ExpPoly out;
  out.reserve(p.size());
  for (const Term& t : p) {
    if (!out.empty() && out.back().k == t.k &&
        std::abs(out.back().w - t.w) <= 1e-12 * (1.0 + std::abs(t.w))) {
      out.back().c += t.c;
    } else {
      out.push_back(t);
    }
  }
  double mmax = 0.0;
  for (const Term& t : out) mmax = std::max(mmax, term_mag(t, x_scale));
  ExpPoly pruned;
  pruned.reserve(out.size());
  for (const Term& t : out)
    if (term_mag(t, x_scale) > 1e-17 * mmax) pruned.push_back(t);
  p = std::move(pruned);
}

// int_0^x y^k e^{i w y} dy as terms in x
void integrate_term(const Term& t, double xb, ExpPoly& out) {
  const double aw = std::abs(t.w);
  if (aw * xb <= std::max(2.0 * t.k + 2.0, 8.0)) {
    // series sum_m (iw)^m x^{k+m+1} / (m! (k+m+1)); converges for any w
    cplx fac = t.c;
    for (int m = 0; m <= 400; ++m) {
      out.push_back({fac / static_cast<double>(t.k + m + 1), 0.0, t.k + m + 1});
      const double sz = std::abs(fac) * std::pow(std::max(1.0, xb), t.k + m + 1);
      if (m >= 2 && sz < 1e-22 * (1.0 + std::abs(t.c))) break;
      fac *= iu * t.w / static_cast<double>(m + 1);
    }
    return;
  }
  // integration by parts: e^{iwx} sum_l (-1)^l k!/(k-l)! x^{k-l}/(iw)^{l+1} - P(0)
  const cplx iw = iu * t.w;
  cplx coef = t.c / iw;
  double sign = 1.0;
  double fall = 1.0;
  for (int l = 0; l <= t.k; ++l) {
    out.push_back({sign * fall * coef, t.w, t.k - l});
    if (l == t.k) out.push_back({-sign * fall * coef, 0.0, 0});
    sign = -sign;
    fall *= static_cast<double>(t.k - l);
    coef /= iw;
  }
}

// (1/s) int_0^x sin(s(x-y)) [sum_n v_n e^{i n b y}] f(y) dy
ExpPoly kernel_apply(const ExpPoly& f, const std::vector<std::pair<double, cplx>>& harm,
                     cplx s, double xb, cplx x_scale) {
  ExpPoly out;
  for (int sg = -1; sg <= 1; sg += 2) {
    const double sigma = static_cast<double>(sg);
    const cplx pref = sigma / (2.0 * iu * s);
    for (const auto& [nb, v] : harm) {
      for (const Term& t : f) {
        ExpPoly integ;
        integrate_term({t.c * v, t.w + nb - sigma * s, t.k}, xb, integ);
        for (const Term& ti : integ)
          out.push_back({pref * ti.c, ti.w + sigma * s, ti.k});
      }
    }
  }
  normalize(out, x_scale);
  return out;
}

cplx eval(const ExpPoly& p, cplx x) {
  cplx sum = 0.0;
  for (const Term& t : p)
    sum += t.c * std::pow(x, t.k) * std::exp(iu * t.w * x);
  return sum;
}

cplx eval_deriv(const ExpPoly& p, cplx x) {
  cplx sum = 0.0;
  for (const Term& t : p) {
    cplx base = std::exp(iu * t.w * x);
    cplx poly = iu * t.w * std::pow(x, t.k);
    if (t.k > 0) poly += static_cast<double>(t.k) * std::pow(x, t.k - 1);
    sum += t.c * poly * base;
  }
  return sum;
}

struct Expansion {
  // levels[sol][r], sol 0 = phi1, 1 = phi2
  std::vector<ExpPoly> lv1, lv2;
};

Expansion build(const PeriodicPotential& V, cplx E, int K, cplx x_scale,
                const HillOptions& opt) {
  const cplx s = std::sqrt(E);
  const double xb = std::abs(x_scale);
  std::vector<std::pair<double, cplx>> harm;
  for (const auto& [n, v] : V.coeffs())
    harm.emplace_back(n * V.reciprocal(), v);
  const std::vector<std::pair<double, cplx>> one{{0.0, cplx(1.0, 0.0)}};

  Expansion ex;
  for (int sol = 0; sol < 2; ++sol) {
    ExpPoly free;
    if (sol == 0)
      free = {{0.5, s, 0}, {0.5, -s, 0}};
    else
      free = {{1.0 / (2.0 * iu * s), s, 0}, {-1.0 / (2.0 * iu * s), -s, 0}};

    auto& lv = (sol == 0) ? ex.lv1 : ex.lv2;
    lv.resize(K + 1);
    // level 0: Picard iteration of the Volterra equation
    ExpPoly F = free;
    for (int it = 0; it < opt.volterra_iterations; ++it) {
      ExpPoly t = kernel_apply(F, harm, s, xb, x_scale);
      t.insert(t.end(), free.begin(), free.end());
      normalize(t, x_scale);
      F = std::move(t);
    }
    lv[0] = F;
    // levels r >= 1: source -r * phi_{r-1}
    for (int r = 1; r <= K; ++r) {
      ExpPoly g = kernel_apply(lv[r - 1], one, s, xb, x_scale);
      for (Term& t : g) t.c *= -static_cast<double>(r);
      ExpPoly X = g;
      for (int it = 0; it < opt.volterra_iterations; ++it) {
        ExpPoly t = kernel_apply(X, harm, s, xb, x_scale);
        t.insert(t.end(), g.begin(), g.end());
        normalize(t, x_scale);
        X = std::move(t);
      }
      lv[r] = X;
    }
  }
  return ex;
}

FundamentalJet eval_jet(const Expansion& ex, cplx E, int K, cplx x) {
  FundamentalJet out;
  out.E = E;
  out.phi1.v.resize(K + 1);
  out.phi1.w.resize(K + 1);
  out.phi2.v.resize(K + 1);
  out.phi2.w.resize(K + 1);
  for (int r = 0; r <= K; ++r) {
    out.phi1.v[r] = eval(ex.lv1[r], x);
    out.phi1.w[r] = eval_deriv(ex.lv1[r], x);
    out.phi2.v[r] = eval(ex.lv2[r], x);
    out.phi2.w[r] = eval_deriv(ex.lv2[r], x);
  }
  out.wronskian_defect =
      out.phi1.v[0] * out.phi2.w[0] - out.phi1.w[0] * out.phi2.v[0] - 1.0;
  return out;
}

}  // namespace

FundamentalJet fundamental_highE(const PeriodicPotential& V, cplx E, cplx x_end,
                                 int deriv_order, const HillOptions& opt) {
  const cplx x_scale = (std::abs(x_end) > 0.0) ? x_end : cplx(V.period(), 0.0);
  Expansion ex = build(V, E, deriv_order, x_scale, opt);
  return eval_jet(ex, E, deriv_order, x_end);
}

std::vector<FundamentalJet> fundamental_highE_grid(const PeriodicPotential& V,
                                                   cplx E, int m, int deriv_order,
                                                   const HillOptions& opt) {
  const double a = V.period();
  Expansion ex = build(V, E, deriv_order, cplx(a, 0.0), opt);
  std::vector<FundamentalJet> out;
  out.reserve(m + 1);
  for (int l = 0; l <= m; ++l)
    out.push_back(eval_jet(ex, E, deriv_order, cplx(a * l / m, 0.0)));
  return out;
}

}  // namespace hillstark::detail
