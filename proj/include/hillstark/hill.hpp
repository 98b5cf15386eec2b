#pragma once

#include <map>
#include <memory>
#include <shared_mutex>
#include <span>
#include <utility>
#include <vector>

#include "hillstark/potential.hpp"

namespace hillstark {

// One solution of the Hill equation -phi'' + V phi = E phi at a point,
// together with d^r/dE^r up to the requested order (variational system:
// phi_r'' = (V - E) phi_r - r phi_{r-1}, zero initial data for r >= 1).
struct SolutionJet {
  std::vector<cplx> v;  // v[r] = d^r phi / dE^r
  std::vector<cplx> w;  // w[r] = d^r phi' / dE^r
};

// Fundamental pair phi1, phi2 with the initial data
//   phi1(0)=1, phi1'(0)=0,  phi2(0)=0, phi2'(0)=1.
struct FundamentalJet {
  cplx E;
  SolutionJet phi1, phi2;
  cplx wronskian_defect;  // phi1 phi2' - phi1' phi2 - 1 at the endpoint

  int order() const { return static_cast<int>(phi1.v.size()) - 1; }
  // d^r mu / dE^r = (phi1^(r)(a) + phi2'^(r)(a)) / 2; meaningful when the
  // endpoint is x = a.
  cplx mu(int r = 0) const { return 0.5 * (phi1.v[r] + phi2.w[r]); }
};

struct HillOptions {
  double rtol = 1e-11;
  double atol = 1e-13;
  // |E| above which the iterated Volterra integral equation replaces the
  // ODE stepper; the oscillation period ~ 1/sqrt(E) defeats fixed-accuracy
  // stepping while the integral iteration gains accuracy with E.
  double e_switch = 1e4;
  int volterra_iterations = 2;
  long max_steps = 2'000'000;
};

// Fundamental system along a piecewise-linear complex path from 0. The span
// lists the vertices after 0, ending at x_end; an empty span means the
// straight segment 0 -> x_end. deriv_order = K adds d^r/dE^r for r <= K.
FundamentalJet fundamental_system(const PeriodicPotential& V, cplx E, cplx x_end,
                                  std::span<const cplx> path_vertices = {},
                                  int deriv_order = 0, const HillOptions& opt = {});

// One pass along the real segment [0, a], returning jets at x_l = l a / m,
// l = 0..m (so back() is the monodromy point x = a).
std::vector<FundamentalJet> fundamental_system_grid(const PeriodicPotential& V,
                                                    cplx E, int m,
                                                    int deriv_order = 0,
                                                    const HillOptions& opt = {});

// Jet at x = a (monodromy data).
FundamentalJet monodromy(const PeriodicPotential& V, cplx E, int deriv_order = 1,
                         const HillOptions& opt = {});

// Hill discriminant mu(E) = (phi1(a) + phi2'(a))/2 and dmu/dE.
std::pair<cplx, cplx> discriminant(const PeriodicPotential& V, cplx E,
                                   const HillOptions& opt = {});

// Root of lambda^2 - 2 mu lambda + 1 = 0; lambda + 1/lambda = 2 mu.
// branch = +1 selects |lambda| >= 1, branch = -1 selects |lambda| <= 1;
// on the unit circle (|mu| <= 1 real) the tie goes to sign(branch) = sign(Im).
cplx monodromy_eigenvalue(cplx mu, int branch);

// Thread-safe memo of monodromy jets keyed by E. Reads are shared; inserts
// are idempotent, so concurrent builders may race benignly.
class MonodromyCache {
 public:
  MonodromyCache(PeriodicPotential V, int deriv_order, HillOptions opt = {})
      : V_(std::move(V)), order_(deriv_order), opt_(opt) {}

  std::shared_ptr<const FundamentalJet> at(cplx E) const;
  const PeriodicPotential& potential() const { return V_; }

 private:
  PeriodicPotential V_;
  int order_;
  HillOptions opt_;
  mutable std::shared_mutex mtx_;
  mutable std::map<std::pair<double, double>, std::shared_ptr<const FundamentalJet>> memo_;
};

namespace detail {
// high-energy backend, defined in volterra.cpp
FundamentalJet fundamental_highE(const PeriodicPotential& V, cplx E, cplx x_end,
                                 int deriv_order, const HillOptions& opt);
std::vector<FundamentalJet> fundamental_highE_grid(const PeriodicPotential& V,
                                                   cplx E, int m, int deriv_order,
                                                   const HillOptions& opt);
}  // namespace detail

}  // namespace hillstark
