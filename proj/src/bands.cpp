#include "hillstark/bands.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace hillstark {

namespace {

struct MuEval {
  double mu, dmu, d2mu;
};

MuEval mu_at(const PeriodicPotential& V, double E, const HillOptions& opt) {
  const FundamentalJet j = monodromy(V, E, 2, opt);
  return {j.mu(0).real(), j.mu(1).real(), j.mu(2).real()};
}

// safeguarded Newton/bisection for g(E) = mu(E) - target on [lo, hi],
// assuming a sign change
double solve_mu(const PeriodicPotential& V, double lo, double hi, double glo,
                double ghi, double target, const HillOptions& opt) {
  if (glo == 0.0) return lo;
  if (ghi == 0.0) return hi;
  if (glo * ghi > 0.0) {
    std::ostringstream os;
    os << "bands: no sign change of mu - " << target << " on [" << lo << ", "
       << hi << "]";
    throw std::runtime_error(os.str());
  }
  double x = 0.5 * (lo + hi);
  for (int it = 0; it < 200; ++it) {
    const MuEval m = mu_at(V, x, opt);
    const double g = m.mu - target;
    if (g == 0.0) return x;
    if (g * glo > 0.0) { lo = x; glo = g; } else { hi = x; }
    const double tol = 1e-10 * std::max(1.0, std::abs(x));
    if (hi - lo < tol) return 0.5 * (lo + hi);
    double xn = x - g / m.dmu;  // Newton, kept only if it stays bracketed
    if (!(xn > lo && xn < hi)) xn = 0.5 * (lo + hi);
    x = xn;
  }
  return x;
}

// critical point of mu (root of dmu/dE) inside [lo, hi] with a sign change
double solve_dmu(const PeriodicPotential& V, double lo, double hi, double glo,
                 const HillOptions& opt) {
  double x = 0.5 * (lo + hi);
  for (int it = 0; it < 200; ++it) {
    const MuEval m = mu_at(V, x, opt);
    if (m.dmu == 0.0) return x;
    if (m.dmu * glo > 0.0) lo = x; else hi = x;
    const double tol = 1e-11 * std::max(1.0, std::abs(x));
    if (hi - lo < tol) return 0.5 * (lo + hi);
    double xn = x - m.dmu / m.d2mu;
    if (!(xn > lo && xn < hi)) xn = 0.5 * (lo + hi);
    x = xn;
  }
  return x;
}

}  // namespace

BandStructure BandStructure::compute(const PeriodicPotential& V, int n_max,
                                     const HillOptions& opt) {
  if (n_max < 1) throw std::invalid_argument("bands: n_max must be >= 1");

  BandStructure B(V, opt);
  B.n_max_ = n_max;

  const double a = V.period();
  const double unit = std::pow(std::numbers::pi / a, 2.0);
  double vsup = 0.0;
  for (const auto& [n, v] : V.coeffs()) vsup += std::abs(v);

  // One critical point of mu per gap (mu' has no zero inside open bands), so
  // scanning dmu/dE for sign changes walks gap by gap. E_lo sits below the
  // spectrum where mu > 1 and mu' < 0.
  for (int attempt = 0; attempt < 4; ++attempt) {
    B.Eb_.clear(); B.Et_.clear(); B.gaps_.clear(); B.kohn_.clear();
    const double refine = std::pow(2.0, attempt);
    const double E_lo = -vsup - 1.0;
    std::vector<double> crit;       // E*_n, n = 1.. (gap index)
    std::vector<double> crit_mu;

    double E = E_lo;
    MuEval prev = mu_at(V, E, opt);
    double prev_E = E;
    bool ok = true;
    while (static_cast<int>(crit.size()) < n_max + 1) {
      const double n_est = std::sqrt(std::max(E, 1.0)) / std::sqrt(unit);
      const double step =
          std::max(0.05 * unit, unit * (2.0 * n_est + 1.0) / 10.0) / refine;
      E += step;
      const MuEval cur = mu_at(V, E, opt);
      if (prev.dmu * cur.dmu < 0.0) {
        const double es = solve_dmu(V, prev_E, E, prev.dmu, opt);
        crit.push_back(es);
        crit_mu.push_back(mu_at(V, es, opt).mu);
      }
      prev = cur;
      prev_E = E;
      if (E > unit * (n_max + 3) * (n_max + 3) + vsup + 10.0) { ok = false; break; }
    }
    if (!ok) continue;  // missed sign changes: rescan finer

    // expected alternation: mu*_n has sign (-1)^n
    bool alternating = true;
    for (std::size_t i = 0; i < crit.size(); ++i)
      if ((i % 2 == 0) != (crit_mu[i] < 0.0)) alternating = false;
    if (!alternating) continue;

    double left = E_lo;
    for (int n = 1; n <= n_max + 1; ++n) {
      const double right = crit[n - 1];
      const double target_b = (n % 2 == 1) ? 1.0 : -1.0;  // mu at E^b_n
      const double gb_left = mu_at(V, left, opt).mu - target_b;
      const double gb_right = crit_mu[n - 1] - target_b;
      B.Eb_.push_back(solve_mu(V, left, right, gb_left, gb_right, target_b, opt));
      if (n <= n_max) {
        const double mu_star = crit_mu[n - 1];
        const bool tangent = std::abs(std::abs(mu_star) - 1.0) <= 1e-10;
        if (tangent) {
          B.Et_.push_back(right);
        } else {
          const double target_t = -target_b;  // mu at E^t_n
          const double gt_left = mu_at(V, B.Eb_.back(), opt).mu - target_t;
          B.Et_.push_back(solve_mu(V, B.Eb_.back(), right, gt_left,
                                   mu_star - target_t, target_t, opt));
        }
      }
      left = right;
    }

    // gaps and Kohn data; a tangent critical point closes the gap exactly
    for (int n = 1; n <= n_max; ++n) {
      GapInfo g;
      g.n = n;
      g.Et = B.Et_[n - 1];
      const double mu_star = crit_mu[n - 1];
      const bool tangent = std::abs(std::abs(mu_star) - 1.0) <= 1e-10;
      double Eb_next = (n < static_cast<int>(B.Eb_.size()) + 1)
                           ? B.Eb_[n]
                           : B.Eb_.back();
      if (tangent) {
        g.Eb = g.Et;
        if (n < static_cast<int>(B.Eb_.size())) B.Eb_[n] = g.Et;
      } else {
        g.Eb = Eb_next;
      }
      g.width = g.Eb - g.Et;
      g.closed = tangent || g.width < 1e-9 * std::max(1.0, std::abs(g.Et));
      if (g.closed) { g.width = 0.0; g.Eb = g.Et; }
      B.gaps_.push_back(g);

      KohnPoint kp;
      kp.n = n;
      kp.E_star = crit[n - 1];
      kp.mu_star = mu_star;
      kp.kappa = g.closed ? 0.0 : std::acosh(std::abs(mu_star)) / a;
      B.kohn_.push_back(kp);
    }

    // sanity: strict ordering of edges
    bool ordered = true;
    for (int n = 1; n <= n_max; ++n) {
      if (!(B.Eb_[n - 1] < B.Et_[n - 1])) ordered = false;
      if (n < n_max && !(B.Et_[n - 1] <= B.Eb_[n])) ordered = false;
    }
    if (ordered) return B;
  }
  throw std::runtime_error("bands: edge scan failed to bracket all bands");
}

double BandStructure::band_bottom(int n) const {
  if (n < 1 || n > static_cast<int>(Eb_.size()))
    throw std::out_of_range("bands: band index out of range");
  return Eb_[n - 1];
}

double BandStructure::band_top(int n) const {
  if (n < 1 || n > static_cast<int>(Et_.size()))
    throw std::out_of_range("bands: band index out of range");
  return Et_[n - 1];
}

const GapInfo& BandStructure::gap(int n) const {
  if (n < 1 || n > static_cast<int>(gaps_.size()))
    throw std::out_of_range("bands: gap index out of range");
  return gaps_[n - 1];
}

const KohnPoint& BandStructure::kohn(int n) const {
  if (n < 1 || n > static_cast<int>(kohn_.size()))
    throw std::out_of_range("bands: gap index out of range");
  return kohn_[n - 1];
}

double BandStructure::gap_tolerance(int n) const {
  return 1e-9 * std::max(1.0, std::abs(gap(n).Et));
}

double BandStructure::solve_in_band(int n, double mu_target) const {
  const double lo = Eb_[n - 1], hi = Et_[n - 1];
  const double glo = ((n % 2 == 1) ? 1.0 : -1.0) - mu_target;
  const double ghi = -((n % 2 == 1) ? 1.0 : -1.0) - mu_target;
  // mu is monotone across the band from (-1)^{n-1} to (-1)^n
  return solve_mu(V_, lo, hi, glo, ghi, mu_target, opt_);
}

double BandStructure::band_function(int n, double k) const {
  if (n < 1 || n > n_max_)
    throw std::out_of_range("bands: band index exceeds n_max");
  const double b = V_.reciprocal();
  // fold into (-b/2, b/2], then use evenness
  double kf = std::remainder(k, b);
  kf = std::abs(kf);
  const double mu_target = std::cos(kf * V_.period()) * ((n % 2 == 1) ? 1.0 : -1.0);
  // cos(pa) with p on sheet n equals (-1)^{n-1} cos(ka)
  if (kf < 1e-14) return (n % 2 == 1) ? Eb_[n - 1] : Et_[n - 1];
  if (std::abs(kf - 0.5 * b) < 1e-14) return (n % 2 == 1) ? Et_[n - 1] : Eb_[n - 1];
  return solve_in_band(n, mu_target);
}

int BandStructure::sheet_of(double p, Side side) const {
  const double hb = 0.5 * V_.reciprocal();
  const double t = std::abs(p) / hb;
  const double r = std::round(t);
  int n;
  if (std::abs(t - r) < 1e-12 && r >= 1.0) {
    n = static_cast<int>(r) + (side == Side::above ? 1 : 0);
  } else {
    n = static_cast<int>(std::floor(t)) + 1;
  }
  if (n < 1) n = 1;
  if (n > n_max_)
    throw std::out_of_range("bands: |p| beyond the computed bands");
  return n;
}

double BandStructure::multisheeted_E(double p, Side side) const {
  const double b = V_.reciprocal();
  const int n = sheet_of(p, side);
  const double ap = std::abs(p);
  double k = (n % 2 == 1) ? ap - 0.5 * (n - 1) * b : 0.5 * n * b - ap;
  k = std::clamp(k, 0.0, 0.5 * b);
  // exact cut points: the side picks which band, the edge value follows
  return band_function(n, k);
}

double BandStructure::dE_dp(double p, Side side) const {
  const double a = V_.period();
  const int n = sheet_of(p, side);
  const double E = multisheeted_E(p, side);
  const MuEval m = mu_at(V_, E, opt_);
  const double s = std::sin(p * a);
  if (std::abs(m.dmu) > 1e-8 * std::max(1.0, std::abs(m.d2mu)))
    return -a * s / m.dmu;
  // closed-gap point: mu' and sin(pa) vanish together; from
  // -a^2 cos(pa) = mu'' (E')^2 the slope follows, signed by monotonicity
  const double mu = m.mu;
  const double sq = -a * a * mu / m.d2mu;
  if (sq < 0.0) return 0.0;  // open-gap edge: genuine dE/dp = 0
  (void)n;
  return std::copysign(std::sqrt(sq), p);
}

}  // namespace hillstark
