#pragma once

#include <vector>

#include "hillstark/hill.hpp"

namespace hillstark {

// Which side of a cut point p = n b/2 a value refers to, mirroring the
// paper-style +-0 notation for the multisheeted band function.
enum class Side { below, above };

struct GapInfo {
  int n;        // gap between band n and band n+1
  double Et;    // E^t_n
  double Eb;    // E^b_{n+1}
  double width; // Eb - Et, zero when closed
  bool closed;
};

struct KohnPoint {
  int n;
  double E_star;   // critical point of mu inside gap n
  double kappa;    // arccosh(|mu(E_star)|) / a, 0 for closed gaps
  double mu_star;
};

// Band structure of the Hill operator: edges from mu(E) = +-1, gaps, Kohn
// branch-point data, and samplers for E_n(k) and the multisheeted E(p).
class BandStructure {
 public:
  static BandStructure compute(const PeriodicPotential& V, int n_max,
                               const HillOptions& opt = {});

  const PeriodicPotential& potential() const { return V_; }
  const HillOptions& options() const { return opt_; }
  int n_max() const { return n_max_; }

  double band_bottom(int n) const;  // E^b_n, n = 1..n_max+1
  double band_top(int n) const;     // E^t_n, n = 1..n_max
  const std::vector<GapInfo>& gaps() const { return gaps_; }
  const GapInfo& gap(int n) const;
  const KohnPoint& kohn(int n) const;

  // E_n(k); k is folded into the Brillouin zone (-b/2, b/2].
  double band_function(int n, double k) const;

  // Multisheeted band function on the cut real line. |p| in
  // [(n-1)b/2, nb/2] maps into band n; at cut points the side argument
  // selects the limit: below gives E^t_n, above gives E^b_{n+1}.
  double multisheeted_E(double p, Side side = Side::below) const;
  double dE_dp(double p, Side side = Side::below) const;
  int sheet_of(double p, Side side = Side::below) const;

  // closure tolerance used for gap n (1e-9 max(1, E^t_n))
  double gap_tolerance(int n) const;

 private:
  BandStructure(PeriodicPotential V, HillOptions opt)
      : V_(std::move(V)), opt_(opt) {}
  double solve_in_band(int n, double mu_target) const;

  PeriodicPotential V_;
  HillOptions opt_;
  int n_max_ = 0;
  std::vector<double> Eb_, Et_;  // Eb_ has n_max+1 entries, Et_ has n_max
  std::vector<GapInfo> gaps_;
  std::vector<KohnPoint> kohn_;
};

}  // namespace hillstark
