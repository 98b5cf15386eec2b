#include "hillstark/bloch.hpp"

#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace hillstark {

namespace {

// everything entering the normalized solution at fixed p
struct CoreData {
  double p = 0, E = 0, a = 0;
  bool symmetric = false;
  cplx sinpa, cospa, lam;
  cplx m1, m2, m3;        // mu derivative levels
  cplx W0, W1, W2;        // phi2(a) levels
  cplx P0, P1, P2;        // phi1(a) levels
  cplx N, Np, Npp;        // N = -2 phi2(a) mu', with E-derivatives
  cplx inv, dinv, dinv2;  // (sign)/sqrt(N) and its E-derivatives
  double Ep = 0, Epp = 0; // dE/dp, d2E/dp2
};

struct Assembled {
  cplx phi, dphi_dx, u, up, upp;
  cplx du_dE, d2u_dE2;
};

Assembled assemble(const CoreData& c, const FundamentalJet& jx, cplx x, int order) {
  const cplx f1 = jx.phi1.v[0], f2 = jx.phi2.v[0];
  const cplx f1x = jx.phi1.w[0], f2x = jx.phi2.w[0];
  const cplx f1E = jx.phi1.v[1], f2E = jx.phi2.v[1];

  cplx A, Ax, Ap, AE, App{}, ApE{}, AEE{};
  if (c.symmetric) {
    const cplx is = iu * c.sinpa;
    A = c.W0 * f1 + is * f2;
    Ax = c.W0 * f1x + is * f2x;
    Ap = iu * c.a * c.cospa * f2;
    AE = c.W1 * f1 + c.W0 * f1E + is * f2E;
    if (order >= 2) {
      const cplx f1EE = jx.phi1.v[2], f2EE = jx.phi2.v[2];
      App = -iu * c.a * c.a * c.sinpa * f2;
      ApE = iu * c.a * c.cospa * f2E;
      AEE = c.W2 * f1 + 2.0 * c.W1 * f1E + c.W0 * f1EE + is * f2EE;
    }
  } else {
    const cplx G = c.P0 - c.lam;
    const cplx lam_p = iu * c.a * c.lam;
    A = c.W0 * f1 - G * f2;
    Ax = c.W0 * f1x - G * f2x;
    Ap = lam_p * f2;
    AE = c.W1 * f1 + c.W0 * f1E - c.P1 * f2 - G * f2E;
    if (order >= 2) {
      const cplx f1EE = jx.phi1.v[2], f2EE = jx.phi2.v[2];
      App = -c.a * c.a * c.lam * f2;
      ApE = lam_p * f2E;
      AEE = c.W2 * f1 + 2.0 * c.W1 * f1E + c.W0 * f1EE - c.P2 * f2 -
            2.0 * c.P1 * f2E - G * f2EE;
    }
  }

  const cplx B0 = A * c.inv;
  const cplx dA = Ap + c.Ep * AE;
  const cplx Bp = dA * c.inv + A * (c.Ep * c.dinv);

  Assembled out;
  out.phi = B0;
  out.dphi_dx = Ax * c.inv;
  const cplx ph = std::exp(-iu * c.p * x);
  out.u = ph * B0;
  out.up = ph * (-iu * x * B0 + Bp);
  out.du_dE = out.up / c.Ep;
  if (order >= 2) {
    const cplx d2A = App + 2.0 * c.Ep * ApE + c.Epp * AE + c.Ep * c.Ep * AEE;
    const cplx Bpp = d2A * c.inv + 2.0 * dA * (c.Ep * c.dinv) +
                     A * (c.Epp * c.dinv + c.Ep * c.Ep * c.dinv2);
    out.upp = ph * (-x * x * B0 - 2.0 * iu * x * Bp + Bpp);
    out.d2u_dE2 =
        out.upp / (c.Ep * c.Ep) - out.up * c.Epp / (c.Ep * c.Ep * c.Ep);
  }
  return out;
}

std::vector<cplx> path_to(cplx x) {
  if (x.imag() != 0.0 && x.real() != 0.0) return {cplx(x.real(), 0.0), x};
  return {};
}

}  // namespace

struct BlochEvaluator::Core : CoreData {};

BlochEvaluator::BlochEvaluator(const BandStructure& B, BlochOptions opt)
    : B_(std::make_shared<BandStructure>(B)),
      opt_(opt),
      cache_(std::make_shared<MonodromyCache>(B.potential(), 3, B.options())) {}

double BlochEvaluator::delta_p() const {
  return opt_.delta_p_rel * B_->potential().reciprocal();
}

void BlochEvaluator::check_guard(double p) const {
  const double hb = 0.5 * B_->potential().reciprocal();
  const double dp = delta_p();
  for (const GapInfo& g : B_->gaps()) {
    if (g.closed) continue;
    if (std::abs(std::abs(p) - g.n * hb) < dp) {
      std::ostringstream os;
      os << "bloch: p = " << p << " is within delta_p of the open-gap cut at "
         << (p < 0 ? "-" : "") << g.n << " b/2; dE/dp and du/dp are singular there";
      throw std::domain_error(os.str());
    }
  }
}

// Builds the monodromy-side quantities. The normalization takes
// sign(sin(pa)) = (-1)^{n-1} times the principal square root of
// N = -2 phi2(a) mu', which is positive inside open bands; the signed root
// keeps phi continuous through closed gaps (free-particle limit included)
// and makes u -> +1/sqrt(a) at high energy.
BlochEvaluator::Core BlochEvaluator::core_from(double p, double E, int sheet) const {
  Core c;
  c.p = p;
  c.a = B_->potential().period();
  c.symmetric = B_->potential().symmetric() && !opt_.force_general_form;
  c.E = E;
  const auto jet = cache_->at(E);
  c.m1 = jet->mu(1);
  c.m2 = jet->mu(2);
  c.m3 = jet->mu(3);
  c.W0 = jet->phi2.v[0];
  c.W1 = jet->phi2.v[1];
  c.W2 = jet->phi2.v[2];
  c.P0 = jet->phi1.v[0];
  c.P1 = jet->phi1.v[1];
  c.P2 = jet->phi1.v[2];
  c.sinpa = std::sin(p * c.a);
  c.cospa = std::cos(p * c.a);
  c.lam = std::exp(iu * p * c.a);

  c.N = -2.0 * c.W0 * c.m1;
  if (std::abs(c.N) < opt_.denom_floor) {
    std::ostringstream os;
    os << "bloch: normalization denominator -2 phi2(a) dmu/dE vanishes at p = "
       << p << " (band edge); evaluate at p offset by delta_p instead";
    throw std::domain_error(os.str());
  }
  c.Np = -2.0 * (c.W1 * c.m1 + c.W0 * c.m2);
  c.Npp = -2.0 * (c.W2 * c.m1 + 2.0 * c.W1 * c.m2 + c.W0 * c.m3);
  const double sgn = (sheet % 2 == 1) ? 1.0 : -1.0;
  c.inv = sgn / std::sqrt(c.N);
  c.dinv = -c.Np * c.inv / (2.0 * c.N);
  c.dinv2 = c.inv * (0.75 * (c.Np / c.N) * (c.Np / c.N) - c.Npp / (2.0 * c.N));

  c.Ep = (-c.a * c.sinpa / c.m1).real();
  c.Epp = ((-c.a * c.a * c.cospa - c.m2 * c.Ep * c.Ep) / c.m1).real();
  return c;
}

BlochEvaluator::Core BlochEvaluator::core(double p) const {
  check_guard(p);
  const double hb = 0.5 * B_->potential().reciprocal();
  // closed-gap cut points are regular for phi but degenerate in the formula
  // (monodromy = +-identity); nudge the evaluation off the point
  const double r = std::abs(p) / hb;
  if (std::abs(r - std::round(r)) * hb < 1e-7 * hb && std::round(r) >= 1.0) {
    const double nudge = 1e-7 * B_->potential().reciprocal();
    const double pn = (std::round(r) * hb - nudge) * (p < 0 ? -1.0 : 1.0);
    return core(pn);
  }
  const int n = B_->sheet_of(p);
  return core_from(p, B_->multisheeted_E(p), n);
}

BlochEval BlochEvaluator::at(double p, cplx x) const {
  const Core c = core(p);
  const auto path = path_to(x);
  const FundamentalJet jx =
      fundamental_system(B_->potential(), c.E, x, path, 1, B_->options());
  const Assembled s = assemble(c, jx, x, 1);
  BlochEval out;
  out.p = c.p;
  out.E = c.E;
  out.x = x;
  out.phi = s.phi;
  out.dphi_dx = s.dphi_dx;
  out.u = s.u;
  out.du_dp = s.up;
  out.dE_dp = c.Ep;
  out.norm_C = c.inv;
  return out;
}

BlochEvaluator::UDerivs BlochEvaluator::u_and_derivatives(double p, cplx x,
                                                          int order) const {
  const Core c = core(p);
  const FundamentalJet jx = fundamental_system(
      B_->potential(), c.E, x, path_to(x), order >= 2 ? 2 : 1, B_->options());
  const Assembled s = assemble(c, jx, x, order);
  UDerivs out;
  out.p = c.p;
  out.E = c.E;
  out.dE_dp = c.Ep;
  out.u = s.u;
  out.du_dp = s.up;
  out.du_dE = s.du_dE;
  if (order >= 2) {
    out.d2u_dp2 = s.upp;
    out.d2u_dE2 = s.d2u_dE2;
  }
  return out;
}

BlochEvaluator::UDerivs BlochEvaluator::u_at_energy(double E, cplx x,
                                                    int order) const {
  const auto jet = cache_->at(E);
  const double mu = jet->mu(0).real();
  const double dmu = jet->mu(1).real();
  if (std::abs(mu) >= 1.0)
    throw std::domain_error("bloch: energy lies in a gap (|mu| >= 1)");
  const double a = B_->potential().period();
  // sheet with p ~ sqrt(E), oriented so dE/dp > 0
  const double s0 = std::sqrt(std::max(E, 0.0));
  int n = static_cast<int>(std::floor(s0 * a / std::numbers::pi)) + 1;
  double best_p = 0.0;
  int best_n = 0;
  for (int cand = std::max(1, n - 1); cand <= n + 1; ++cand) {
    const double th = std::acos(((cand % 2 == 1) ? 1.0 : -1.0) * mu);
    const double pa = (cand % 2 == 1) ? (cand - 1) * std::numbers::pi + th
                                      : cand * std::numbers::pi - th;
    const double Ep = -a * std::sin(pa) / dmu;
    if (Ep <= 0.0) continue;
    const double p = pa / a;
    if (best_n == 0 || std::abs(p - s0) < std::abs(best_p - s0)) {
      best_p = p;
      best_n = cand;
    }
  }
  if (best_n == 0)
    throw std::domain_error("bloch: could not orient the sheet at this energy");
  if (std::abs(std::sin(best_p * a)) < 1e-6)
    throw std::domain_error("bloch: energy too close to a band edge");
  const Core c = core_from(best_p, E, best_n);
  const FundamentalJet jx = fundamental_system(
      B_->potential(), E, x, path_to(x), order >= 2 ? 2 : 1, B_->options());
  const Assembled sa = assemble(c, jx, x, order);
  UDerivs out;
  out.p = best_p;
  out.E = E;
  out.dE_dp = c.Ep;
  out.u = sa.u;
  out.du_dp = sa.up;
  out.du_dE = sa.du_dE;
  if (order >= 2) {
    out.d2u_dp2 = sa.upp;
    out.d2u_dE2 = sa.d2u_dE2;
  }
  return out;
}

BlochEvaluator::ULine BlochEvaluator::u_line(double p, int m) const {
  const Core c = core(p);
  const auto jets =
      fundamental_system_grid(B_->potential(), c.E, m, 1, B_->options());
  ULine out;
  out.p = c.p;
  out.E = c.E;
  out.dE_dp = c.Ep;
  out.u.resize(m);
  out.du_dp.resize(m);
  const double a = B_->potential().period();
  for (int l = 0; l < m; ++l) {
    const Assembled s = assemble(c, jets[l], cplx(a * l / m, 0.0), 1);
    out.u[l] = s.u;
    out.du_dp[l] = s.up;
  }
  return out;
}

int BlochEvaluator::cut_sign(int n, Side side) const {
  if (B_->gap(n).closed) return 1;
  const double b = B_->potential().reciprocal();
  const double delta = 1e-4 * b;
  const double pr = 0.5 * n * b + (side == Side::above ? delta : -delta);
  const int m = 48;
  const ULine right = u_line(pr, m);
  const ULine left = u_line(-pr, m);
  const double a = B_->potential().period();
  cplx dot = 0.0;
  double nr = 0.0, nl = 0.0;
  for (int l = 0; l < m; ++l) {
    const double x = a * l / m;
    const cplx phiR = right.u[l] * std::exp(iu * pr * x);
    const cplx phiL = left.u[l] * std::exp(-iu * pr * x);
    dot += std::conj(phiL) * phiR;
    nr += std::norm(phiR);
    nl += std::norm(phiL);
  }
  const double ratio = dot.real() / std::sqrt(nr * nl);
  return ratio >= 0.0 ? 1 : -1;
}

}  // namespace hillstark
