#pragma once

#include <memory>
#include <vector>

#include "hillstark/bands.hpp"

namespace hillstark {

// Normalized Bloch solution at quasimomentum p and position x:
//   phi(x,p) = A(x) / sqrt(N),  N = -2 phi2(a) dmu/dE,
// with A from the Kohn form for symmetric potentials and its general
// variant otherwise; u(x,p) = e^{-ipx} phi(x,p) is the periodic part.
struct BlochEval {
  double p = 0.0;
  double E = 0.0;
  cplx x;
  cplx phi, dphi_dx;
  cplx u;
  cplx du_dp;   // sheet derivative along the cut real line
  double dE_dp = 0.0;
  cplx norm_C;  // 1 / sqrt(N)
};

struct BlochOptions {
  // guard distance from open-gap cut points, where dE/dp degenerates and
  // the normalization becomes 0/0
  double delta_p_rel = 1e-6;  // in units of b
  double denom_floor = 1e-12;
  // use the general normalization form even for symmetric potentials
  // (cross-validation; the two forms agree when phi1(a) = phi2'(a))
  bool force_general_form = false;
};

class BlochEvaluator {
 public:
  explicit BlochEvaluator(const BandStructure& B, BlochOptions opt = {});

  const BandStructure& bands() const { return *B_; }
  const PeriodicPotential& potential() const { return B_->potential(); }
  double delta_p() const;

  BlochEval at(double p, cplx x) const;

  struct UDerivs {
    double p = 0.0, E = 0.0, dE_dp = 0.0;
    cplx u, du_dp, du_dE;
    cplx d2u_dp2, d2u_dE2;  // filled when order >= 2
  };
  UDerivs u_and_derivatives(double p, cplx x, int order = 1) const;

  // Same quantities parametrized by the energy instead of p: the sheet is
  // the one with p ~ sqrt(E) > 0. Intended for the high-energy regime where
  // the band index exceeds the computed band structure. Throws if E falls
  // in a gap or too close to a band edge.
  UDerivs u_at_energy(double E, cplx x, int order = 1) const;

  // u and du/dp on the period grid x_l = l a / m, l = 0..m-1, one ODE pass
  struct ULine {
    double p = 0.0, E = 0.0, dE_dp = 0.0;
    std::vector<cplx> u, du_dp;
  };
  ULine u_line(double p, int m) const;

  // Measured sign s in the cut identification at p = n b/2:
  //   side below:  phi(x, -nb/2 + 0) = s * phi(x, +nb/2 - 0)
  //   side above:  phi(x, -nb/2 - 0) = s * phi(x, +nb/2 + 0)
  // Returns +1 for closed gaps (no cut).
  int cut_sign(int n, Side side) const;

 private:
  struct Core;  // per-(p,E) monodromy quantities
  Core core(double p) const;
  Core core_from(double p, double E, int sheet) const;
  void check_guard(double p) const;

  std::shared_ptr<const BandStructure> B_;
  BlochOptions opt_;
  std::shared_ptr<MonodromyCache> cache_;
};

}  // namespace hillstark
