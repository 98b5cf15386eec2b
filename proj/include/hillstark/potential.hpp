#pragma once

#include <complex>
#include <map>
#include <string>
#include <utility>
#include <vector>

namespace hillstark {

using cplx = std::complex<double>;

inline constexpr cplx iu{0.0, 1.0};

// Periodic potential given by a finite mean-zero Fourier series
//
//   V(x) = sum_{n != 0} v_n e^{i n b x},   b = 2*pi/a,
//
// with v_{-n} = conj(v_n) so that V is real on the real axis. Finite series
// are entire, so V and its antiderivative Q evaluate exactly at complex x;
// the radius R is a user-set cap bounding the strip |Im x| <= R that the
// rest of the toolkit works in.
class PeriodicPotential {
public:
  static constexpr double default_radius = 1.0;

  // Builds a potential from (harmonic, amplitude) pairs. Rejects n = 0
  // entries (mean value must vanish) and all-zero series. A missing
  // conjugate partner v_{-n} is filled in; an inconsistent one is an error.
  static PeriodicPotential make(double period,
                                const std::vector<std::pair<int, cplx>>& coeffs,
                                double radius = default_radius);

  // V = 0. The file loader refuses constant potentials, but free-particle
  // limits are needed all over the test suite, so the library admits them
  // through this explicit constructor only.
  static PeriodicPotential free_particle(double period,
                                         double radius = default_radius);

  // JSON file {"period": a, "coeffs": [[n, re, im], ...], "radius": R?}.
  static PeriodicPotential load(const std::string& path);

  double period() const { return a_; }
  double reciprocal() const { return b_; }  // b = 2*pi/a
  double radius() const { return radius_; }
  void set_radius(double r);

  bool constant() const { return coeffs_.empty(); }
  // V(-x) = V(x); with the reality constraint this is "all v_n real".
  bool symmetric() const { return symmetric_; }

  const std::map<int, cplx>& coeffs() const { return coeffs_; }

  cplx operator()(cplx x) const;      // V(x)
  cplx antiderivative(cplx x) const;  // Q(x) = int_0^x V, Q(0) = 0

  double sup_on_strip() const;      // sum |v_n| e^{|n| b R}, bounds |V| on the strip
  double l1_norm_over_period() const;  // int_0^a |V| dx (quadrature)
  double l2_norm_sq_mean() const;      // sum |v_n|^2  (Parseval value of (1/a) int |V|^2)

private:
  PeriodicPotential() = default;
  double a_ = 0.0;
  double b_ = 0.0;
  double radius_ = default_radius;
  bool symmetric_ = true;
  std::map<int, cplx> coeffs_;
};

}  // namespace hillstark
