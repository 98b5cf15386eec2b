#include "hillstark/potential.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace hillstark {

PeriodicPotential PeriodicPotential::make(
    double period, const std::vector<std::pair<int, cplx>>& coeffs,
    double radius) {
  if (!(period > 0.0) || !std::isfinite(period))
    throw std::invalid_argument("potential: period must be positive and finite");
  if (!(radius > 0.0))
    throw std::invalid_argument("potential: analyticity radius must be positive");

  PeriodicPotential V;
  V.a_ = period;
  V.b_ = 2.0 * std::numbers::pi / period;
  V.radius_ = radius;

  for (std::size_t i = 0; i < coeffs.size(); ++i) {
    const auto& [n, v] = coeffs[i];
    if (n == 0)
      throw std::invalid_argument(
          "potential: coeffs[" + std::to_string(i) +
          "]: harmonic n=0 not allowed, the mean value must vanish");
    if (!std::isfinite(v.real()) || !std::isfinite(v.imag()))
      throw std::invalid_argument("potential: coeffs[" + std::to_string(i) +
                                  "]: non-finite amplitude");
    auto it = V.coeffs_.find(n);
    if (it != V.coeffs_.end() && std::abs(it->second - v) >
                                     1e-14 * (1.0 + std::abs(v)))
      throw std::invalid_argument("potential: coeffs[" + std::to_string(i) +
                                  "]: harmonic " + std::to_string(n) +
                                  " given twice with different values");
    V.coeffs_[n] = v;
  }

  // reality: fill missing conjugate partners, reject inconsistent ones
  for (auto& [n, v] : V.coeffs_) {
    auto it = V.coeffs_.find(-n);
    if (it == V.coeffs_.end()) continue;
    if (std::abs(it->second - std::conj(v)) > 1e-13 * (1.0 + std::abs(v)))
      throw std::invalid_argument(
          "potential: harmonics " + std::to_string(n) + " and " +
          std::to_string(-n) + " break the reality constraint v_{-n} = conj(v_n)");
  }
  std::map<int, cplx> closed = V.coeffs_;
  for (const auto& [n, v] : V.coeffs_) closed.emplace(-n, std::conj(v));
  V.coeffs_ = std::move(closed);

  bool any_nonzero = false;
  bool sym = true;
  for (const auto& [n, v] : V.coeffs_) {
    if (std::abs(v) > 0.0) any_nonzero = true;
    if (std::abs(v.imag()) > 1e-15 * (1.0 + std::abs(v))) sym = false;
  }
  if (!any_nonzero)
    throw std::invalid_argument(
        "potential: all coefficients vanish, constant potentials are excluded");
  V.symmetric_ = sym;
  return V;
}

PeriodicPotential PeriodicPotential::free_particle(double period, double radius) {
  if (!(period > 0.0) || !std::isfinite(period))
    throw std::invalid_argument("potential: period must be positive and finite");
  PeriodicPotential V;
  V.a_ = period;
  V.b_ = 2.0 * std::numbers::pi / period;
  V.radius_ = radius;
  V.symmetric_ = true;
  return V;
}

void PeriodicPotential::set_radius(double r) {
  if (!(r > 0.0))
    throw std::invalid_argument("potential: analyticity radius must be positive");
  radius_ = r;
}

cplx PeriodicPotential::operator()(cplx x) const {
  cplx sum = 0.0;
  const cplx z = std::exp(iu * b_ * x);
  for (const auto& [n, v] : coeffs_) sum += v * std::pow(z, n);
  return sum;
}

cplx PeriodicPotential::antiderivative(cplx x) const {
  // Q(x) = sum v_n (e^{i n b x} - 1) / (i n b); exact and entire, Q(0) = 0.
  cplx sum = 0.0;
  const cplx z = std::exp(iu * b_ * x);
  for (const auto& [n, v] : coeffs_) {
    sum += v * (std::pow(z, n) - 1.0) / (iu * static_cast<double>(n) * b_);
  }
  return sum;
}

double PeriodicPotential::sup_on_strip() const {
  double s = 0.0;
  for (const auto& [n, v] : coeffs_)
    s += std::abs(v) * std::exp(std::abs(n) * b_ * radius_);
  return s;
}

double PeriodicPotential::l1_norm_over_period() const {
  const int m = 512;
  double s = 0.0;
  for (int i = 0; i < m; ++i)
    s += std::abs((*this)(a_ * (i + 0.5) / m));
  return s * a_ / m;
}

double PeriodicPotential::l2_norm_sq_mean() const {
  double s = 0.0;
  for (const auto& [n, v] : coeffs_) s += std::norm(v);
  return s;
}

PeriodicPotential PeriodicPotential::load(const std::string& path) {
  std::ifstream in(path);
  if (!in)
    throw std::invalid_argument("potential: cannot open '" + path + "'");
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw std::invalid_argument("potential: " + path + ": " + e.what());
  }
  if (!j.is_object() || !j.contains("period") || !j.contains("coeffs"))
    throw std::invalid_argument(
        "potential: " + path + ": expected object with 'period' and 'coeffs'");
  if (!j["period"].is_number())
    throw std::invalid_argument("potential: " + path + ": 'period' must be a number");
  if (!j["coeffs"].is_array())
    throw std::invalid_argument("potential: " + path + ": 'coeffs' must be an array");

  std::vector<std::pair<int, cplx>> coeffs;
  for (std::size_t i = 0; i < j["coeffs"].size(); ++i) {
    const auto& e = j["coeffs"][i];
    if (!e.is_array() || e.size() != 3 || !e[0].is_number_integer() ||
        !e[1].is_number() || !e[2].is_number())
      throw std::invalid_argument("potential: " + path + ": coeffs[" +
                                  std::to_string(i) +
                                  "]: expected [n, re, im]");
    coeffs.emplace_back(e[0].get<int>(),
                        cplx(e[1].get<double>(), e[2].get<double>()));
  }
  double radius = PeriodicPotential::default_radius;
  if (j.contains("radius")) {
    if (!j["radius"].is_number())
      throw std::invalid_argument("potential: " + path + ": 'radius' must be a number");
    radius = j["radius"].get<double>();
  }
  try {
    return make(j["period"].get<double>(), coeffs, radius);
  } catch (const std::invalid_argument& e) {
    throw std::invalid_argument(std::string(e.what()) + " (in " + path + ")");
  }
}

}  // namespace hillstark
