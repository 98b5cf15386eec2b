#pragma once

#include <vector>

#include "hillstark/potential.hpp"

namespace hillstark::oracle {

// Brute-force references for tests: plane-wave (Fourier) discretization of
// the Bloch eigenproblem at quasimomentum k. Basis e^{i(k+mb)x}, |m| <= M;
// the matrix is Hermitian with diagonal (k+mb)^2 and off-diagonals v_{m-m'}.
// Deliberately shares nothing with the discriminant solver.

// Ascending eigenvalues E_1(k)..E_count(k) at fixed cutoff M.
std::vector<double> pw_bands(const PeriodicPotential& V, double k, int count, int M);

// n-th band (1-based) at fixed cutoff M >= 8.
double pw_band(const PeriodicPotential& V, double k, int n, int M);

// Doubles M until the value moves by less than 1e-8; throws on
// non-convergence at M_max.
double pw_band_converged(const PeriodicPotential& V, double k, int n,
                         int M0 = 16, int M_max = 4096);

// Eigenpair with the plane-wave coefficients, for x-space residual checks.
struct PwState {
  double k;
  double b;
  int M;
  double E;
  std::vector<cplx> coef;  // c_m, m = -M..M
  cplx eval(double x) const;    // psi(x)
  cplx eval_dd(double x) const; // psi''(x)
};
PwState pw_state(const PeriodicPotential& V, double k, int n, int M);

}  // namespace hillstark::oracle
