#include "hillstark/hill.hpp"

#include <algorithm>
#include <mutex>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace hillstark {

namespace {

// State layout for the Dormand-Prince stepper: for sol s in {phi1, phi2} and
// level r in 0..K, components (v, w) with v' = w, w' = (V-E) v - r v_{r-1}.
struct Rhs {
  const PeriodicPotential& V;
  cplx E;
  int K;

  void operator()(cplx x, const std::vector<cplx>& y, std::vector<cplx>& dy) const {
    const cplx q = V(x) - E;
    const int L = K + 1;
    for (int s = 0; s < 2; ++s) {
      for (int r = 0; r < L; ++r) {
        const int i = 2 * (s * L + r);
        dy[i] = y[i + 1];
        dy[i + 1] = q * y[i] - (r > 0 ? static_cast<double>(r) * y[i - 2] : 0.0);
      }
    }
  }
};

constexpr double A21 = 1.0 / 5;
constexpr double A31 = 3.0 / 40, A32 = 9.0 / 40;
constexpr double A41 = 44.0 / 45, A42 = -56.0 / 15, A43 = 32.0 / 9;
constexpr double A51 = 19372.0 / 6561, A52 = -25360.0 / 2187,
                 A53 = 64448.0 / 6561, A54 = -212.0 / 729;
constexpr double A61 = 9017.0 / 3168, A62 = -355.0 / 33, A63 = 46732.0 / 5247,
                 A64 = 49.0 / 176, A65 = -5103.0 / 18656;
constexpr double B1 = 35.0 / 384, B3 = 500.0 / 1113, B4 = 125.0 / 192,
                 B5 = -2187.0 / 6784, B6 = 11.0 / 84;
constexpr double E1 = B1 - 5179.0 / 57600, E3 = B3 - 7571.0 / 16695,
                 E4 = B4 - 393.0 / 640, E5 = B5 + 92097.0 / 339200,
                 E6 = B6 - 187.0 / 2100, E7 = -1.0 / 40;

// Adaptive DP5(4) along one straight complex segment x0 -> x0 + dir, with
// callbacks at t-fractions listed in `stops` (ascending, last must be 1).
// FSAL is not exploited across stop boundaries; stops are step targets.
class Dopri5 {
 public:
  Dopri5(const Rhs& f, const HillOptions& opt) : f_(f), opt_(opt) {
    const int n = 4 * (f.K + 1);
    for (auto* k : {&k1_, &k2_, &k3_, &k4_, &k5_, &k6_, &k7_, &ytmp_, &yerr_})
      k->assign(n, 0.0);
  }

  // integrate y from t=t0 to t=t1 (x = x0 + t*dir), adapting the step
  void advance(cplx x0, cplx dir, double t0, double t1, std::vector<cplx>& y,
               long& steps) {
    const double seg = std::abs(dir);
    if (seg == 0.0 || t1 <= t0) return;
    const double osc = std::sqrt(std::abs(f_.E)) + std::abs(f_.V.sup_on_strip()) + 1.0;
    double h = std::min(t1 - t0, 0.5 / (seg * std::sqrt(osc)));
    double t = t0;
    bool first = true;
    while (t < t1) {
      if (++steps > opt_.max_steps || h < 1e-15 * std::max(1.0, t1)) {
        std::ostringstream os;
        os << "hill: step size underflow integrating at E = (" << f_.E.real()
           << ", " << f_.E.imag() << ")";
        throw std::runtime_error(os.str());
      }
      h = std::min(h, t1 - t);
      const double err = step(x0, dir, t, h, y, first);
      if (err <= 1.0) {
        t += h;
        y = ytmp_;
        std::swap(k1_, k7_);  // FSAL
        first = false;
        h *= std::clamp(0.9 * std::pow(std::max(err, 1e-10), -0.2), 1.0, 5.0);
      } else {
        // k1 is still the derivative at (t, y); no refresh needed
        h *= std::max(0.9 * std::pow(err, -0.2), 0.2);
      }
    }
  }

 private:
  double step(cplx x0, cplx dir, double t, double h, const std::vector<cplx>& y,
              bool refresh_k1) {
    const int n = static_cast<int>(y.size());
    auto X = [&](double tt) { return x0 + tt * dir; };
    if (refresh_k1) {
      f_(X(t), y, k1_);
      for (auto& v : k1_) v *= dir;
    }
    auto stage = [&](std::vector<cplx>& k, double c,
                     std::initializer_list<std::pair<const std::vector<cplx>*, double>> terms) {
      for (int i = 0; i < n; ++i) {
        cplx acc = y[i];
        for (const auto& [kv, a] : terms) acc += h * a * (*kv)[i];
        ytmp_[i] = acc;
      }
      f_(X(t + c * h), ytmp_, k);
      for (auto& v : k) v *= dir;
    };
    stage(k2_, 1.0 / 5, {{&k1_, A21}});
    stage(k3_, 3.0 / 10, {{&k1_, A31}, {&k2_, A32}});
    stage(k4_, 4.0 / 5, {{&k1_, A41}, {&k2_, A42}, {&k3_, A43}});
    stage(k5_, 8.0 / 9, {{&k1_, A51}, {&k2_, A52}, {&k3_, A53}, {&k4_, A54}});
    stage(k6_, 1.0, {{&k1_, A61}, {&k2_, A62}, {&k3_, A63}, {&k4_, A64}, {&k5_, A65}});
    // 5th order solution into ytmp_
    for (int i = 0; i < n; ++i)
      ytmp_[i] = y[i] + h * (B1 * k1_[i] + B3 * k3_[i] + B4 * k4_[i] +
                             B5 * k5_[i] + B6 * k6_[i]);
    f_(X(t + h), ytmp_, k7_);
    for (auto& v : k7_) v *= dir;

    double ymax = 0.0;
    for (int i = 0; i < n; ++i)
      ymax = std::max(ymax, std::max(std::abs(y[i]), std::abs(ytmp_[i])));
    double err = 0.0;
    for (int i = 0; i < n; ++i) {
      const cplx e = h * (E1 * k1_[i] + E3 * k3_[i] + E4 * k4_[i] +
                          E5 * k5_[i] + E6 * k6_[i] + E7 * k7_[i]);
      const double sc = opt_.atol * (1.0 + ymax) +
                        opt_.rtol * std::max(std::abs(y[i]), std::abs(ytmp_[i]));
      err = std::max(err, std::abs(e) / sc);
    }
    return err;
  }

  const Rhs& f_;
  const HillOptions& opt_;
  std::vector<cplx> k1_, k2_, k3_, k4_, k5_, k6_, k7_, ytmp_, yerr_;
};

std::vector<cplx> initial_state(int K) {
  const int L = K + 1;
  std::vector<cplx> y(4 * L, 0.0);
  y[0] = 1.0;              // phi1(0) = 1
  y[2 * L + 1] = 1.0;      // phi2'(0) = 1
  return y;
}

FundamentalJet pack(cplx E, int K, const std::vector<cplx>& y) {
  FundamentalJet out;
  out.E = E;
  const int L = K + 1;
  out.phi1.v.resize(L);
  out.phi1.w.resize(L);
  out.phi2.v.resize(L);
  out.phi2.w.resize(L);
  for (int r = 0; r < L; ++r) {
    out.phi1.v[r] = y[2 * r];
    out.phi1.w[r] = y[2 * r + 1];
    out.phi2.v[r] = y[2 * (L + r)];
    out.phi2.w[r] = y[2 * (L + r) + 1];
  }
  out.wronskian_defect =
      out.phi1.v[0] * out.phi2.w[0] - out.phi1.w[0] * out.phi2.v[0] - 1.0;
  return out;
}

}  // namespace

FundamentalJet fundamental_system(const PeriodicPotential& V, cplx E, cplx x_end,
                                  std::span<const cplx> path_vertices,
                                  int deriv_order, const HillOptions& opt) {
  if (std::abs(E) > opt.e_switch && path_vertices.size() <= 8)
    return detail::fundamental_highE(V, E, x_end, deriv_order, opt);

  std::vector<cplx> verts(path_vertices.begin(), path_vertices.end());
  if (verts.empty())
    verts.push_back(x_end);
  else if (std::abs(verts.back() - x_end) > 0.0)
    throw std::invalid_argument("hill: path must end at x_end");
  if (verts.size() > 8)
    throw std::invalid_argument("hill: paths are limited to 8 segments");

  Rhs f{V, E, deriv_order};
  Dopri5 stepper(f, opt);
  std::vector<cplx> y = initial_state(deriv_order);
  long steps = 0;
  cplx x0 = 0.0;
  for (cplx v : verts) {
    stepper.advance(x0, v - x0, 0.0, 1.0, y, steps);
    x0 = v;
  }
  return pack(E, deriv_order, y);
}

std::vector<FundamentalJet> fundamental_system_grid(const PeriodicPotential& V,
                                                    cplx E, int m, int deriv_order,
                                                    const HillOptions& opt) {
  if (m < 1) throw std::invalid_argument("hill: grid needs m >= 1");
  if (std::abs(E) > opt.e_switch)
    return detail::fundamental_highE_grid(V, E, m, deriv_order, opt);

  Rhs f{V, E, deriv_order};
  Dopri5 stepper(f, opt);
  std::vector<cplx> y = initial_state(deriv_order);
  std::vector<FundamentalJet> out;
  out.reserve(m + 1);
  out.push_back(pack(E, deriv_order, y));
  long steps = 0;
  const double a = V.period();
  for (int l = 1; l <= m; ++l) {
    stepper.advance(cplx(a * (l - 1) / m, 0.0), cplx(a / m, 0.0), 0.0, 1.0, y, steps);
    out.push_back(pack(E, deriv_order, y));
  }
  return out;
}

FundamentalJet monodromy(const PeriodicPotential& V, cplx E, int deriv_order,
                         const HillOptions& opt) {
  return fundamental_system(V, E, V.period(), {}, deriv_order, opt);
}

std::pair<cplx, cplx> discriminant(const PeriodicPotential& V, cplx E,
                                   const HillOptions& opt) {
  const FundamentalJet j = monodromy(V, E, 1, opt);
  return {j.mu(0), j.mu(1)};
}

cplx monodromy_eigenvalue(cplx mu, int branch) {
  const cplx r = std::sqrt(mu * mu - 1.0);
  cplx lp = mu + r;
  if (std::abs(lp) < 1.0) lp = mu - r;  // make lp the root with |lambda| >= 1
  const cplx lm = 1.0 / lp;
  if (std::abs(std::abs(lp) - 1.0) < 1e-14) {
    // both roots on the unit circle: tie-break by the sign of Im
    const cplx up = lp.imag() >= 0.0 ? lp : lm;
    const cplx dn = lp.imag() >= 0.0 ? lm : lp;
    return branch > 0 ? up : dn;
  }
  return branch > 0 ? lp : lm;
}

std::shared_ptr<const FundamentalJet> MonodromyCache::at(cplx E) const {
  const std::pair<double, double> key{E.real(), E.imag()};
  {
    std::shared_lock lk(mtx_);
    auto it = memo_.find(key);
    if (it != memo_.end()) return it->second;
  }
  auto jet = std::make_shared<const FundamentalJet>(monodromy(V_, E, order_, opt_));
  std::unique_lock lk(mtx_);
  return memo_.emplace(key, std::move(jet)).first->second;
}

}  // namespace hillstark
