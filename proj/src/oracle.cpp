#include "hillstark/oracle.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>

namespace hillstark::oracle {

namespace {

Eigen::MatrixXcd pw_matrix(const PeriodicPotential& V, double k, int M) {
  const double b = V.reciprocal();
  const int dim = 2 * M + 1;
  Eigen::MatrixXcd H = Eigen::MatrixXcd::Zero(dim, dim);
  for (int i = 0; i < dim; ++i) {
    const double km = k + (i - M) * b;
    H(i, i) = km * km;
  }
  for (const auto& [n, v] : V.coeffs()) {
    // <m|V|m'> = v_{m-m'}: fills the n-th diagonal
    for (int i = 0; i < dim; ++i) {
      const int jcol = i - n;
      if (jcol >= 0 && jcol < dim) H(i, jcol) += v;
    }
  }
  return H;
}

}  // namespace

std::vector<double> pw_bands(const PeriodicPotential& V, double k, int count, int M) {
  if (M < 8) throw std::invalid_argument("oracle: plane-wave cutoff M must be >= 8");
  if (count > 2 * M + 1)
    throw std::invalid_argument("oracle: requested more bands than basis size");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(pw_matrix(V, k, M),
                                                     Eigen::EigenvaluesOnly);
  std::vector<double> out(count);
  for (int i = 0; i < count; ++i) out[i] = es.eigenvalues()[i];
  return out;
}

double pw_band(const PeriodicPotential& V, double k, int n, int M) {
  return pw_bands(V, k, n, M).back();
}

double pw_band_converged(const PeriodicPotential& V, double k, int n, int M0,
                         int M_max) {
  double prev = pw_band(V, k, n, M0);
  for (int M = 2 * M0; M <= M_max; M *= 2) {
    const double cur = pw_band(V, k, n, M);
    if (std::abs(cur - prev) < 1e-8) return cur;
    prev = cur;
  }
  throw std::runtime_error("oracle: plane-wave band not converged at M_max");
}

PwState pw_state(const PeriodicPotential& V, double k, int n, int M) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(pw_matrix(V, k, M));
  PwState s;
  s.k = k;
  s.b = V.reciprocal();
  s.M = M;
  s.E = es.eigenvalues()[n - 1];
  s.coef.resize(2 * M + 1);
  for (int i = 0; i < 2 * M + 1; ++i) s.coef[i] = es.eigenvectors()(i, n - 1);
  return s;
}

cplx PwState::eval(double x) const {
  cplx sum = 0.0;
  for (int i = 0; i < static_cast<int>(coef.size()); ++i) {
    const double km = k + (i - M) * b;
    sum += coef[i] * std::exp(iu * km * x);
  }
  return sum;
}

cplx PwState::eval_dd(double x) const {
  cplx sum = 0.0;
  for (int i = 0; i < static_cast<int>(coef.size()); ++i) {
    const double km = k + (i - M) * b;
    sum += -km * km * coef[i] * std::exp(iu * km * x);
  }
  return sum;
}

}  // namespace hillstark::oracle
