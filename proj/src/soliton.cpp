#include "gkdv/soliton.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "gkdv/error.hpp"
#include "gkdv/simd.hpp"

namespace gkdv {
namespace {

void check_p(int p) {
  if (p < 2) throw DomainError("nonlinearity exponent p must be an integer >= 2");
}

void check_wrap(int p, double c, const Grid1D& grid, double center, double wrap_tol) {
  const double half = 0.5 * grid.length();
  const double room = std::min(center + half, half - center);
  if (room < tail_extent(p, c, wrap_tol)) {
    throw DomainError("tail-wrap violation: profile at center " + std::to_string(center) +
                      " is not negligible at the boundary");
  }
}

}  // namespace

SolitonEnsemble::SolitonEnsemble(int p, std::vector<SolitonParams> params)
    : p_(p), params_(std::move(params)) {
  check_p(p);
  if (params_.empty()) throw DomainError("ensemble needs at least one soliton");
  for (std::size_t j = 0; j < params_.size(); ++j) {
    if (!(params_[j].c > 0.0)) throw DomainError("soliton speeds must be positive");
    if (j > 0 && !(params_[j].c > params_[j - 1].c)) {
      throw DomainError("soliton speeds must be strictly increasing");
    }
  }
}

double SolitonEnsemble::min_separation(double t) const {
  std::vector<double> xs;
  for (std::size_t j = 0; j < size(); ++j) xs.push_back(center(j, t));
  std::sort(xs.begin(), xs.end());
  double sep = INFINITY;
  for (std::size_t j = 1; j < xs.size(); ++j) sep = std::min(sep, xs[j] - xs[j - 1]);
  return sep;
}

double ground_state_value(int p, double c, double x) {
  // sech(z) = 2 e^{-|z|} / (1 + e^{-2|z|}) never overflows.
  const double z = std::abs(0.5 * (p - 1) * std::sqrt(c) * x);
  const double e = std::exp(-z);
  const double sech = 2.0 * e / (1.0 + e * e);
  const double q = std::pow(0.5 * (p + 1) * sech * sech, 1.0 / (p - 1));
  return std::pow(c, 1.0 / (p - 1)) * q;
}

double tail_extent(int p, double c, double tol) {
  check_p(p);
  // sech^{2/(p-1)}(z) = tol  =>  z = acosh(tol^{-(p-1)/2}), evaluated in log space.
  const double lg = -0.5 * (p - 1) * std::log(tol);
  const double z = lg + std::log1p(std::sqrt(-std::expm1(-2.0 * lg)));
  return 2.0 * z / ((p - 1) * std::sqrt(c));
}

Field ground_state(int p, double c, const Grid1D& grid, double center, double wrap_tol) {
  check_p(p);
  if (!(c > 0.0)) throw DomainError("speed must be positive");
  check_wrap(p, c, grid, center, wrap_tol);
  return Field::from_function(grid, [&](double x) { return ground_state_value(p, c, x - center); });
}

Field soliton_field(int p, const SolitonParams& s, double t, const Grid1D& grid,
                    double wrap_tol) {
  const double center = s.c * t + s.x0;
  const double half = 0.5 * grid.length();
  if (center < -half || center > half) {
    throw DomainError("soliton center " + std::to_string(center) + " left the domain");
  }
  return ground_state(p, s.c, grid, center, wrap_tol);
}

Field ensemble_field(const SolitonEnsemble& ens, double t, const Grid1D& grid, double min_sep,
                     double wrap_tol) {
  if (ens.size() > 1 && ens.min_separation(t) < min_sep) {
    throw DomainError("soliton separation " + std::to_string(ens.min_separation(t)) +
                      " below the minimum " + std::to_string(min_sep));
  }
  Field r(grid);
  for (const auto& s : ens.params()) r += soliton_field(ens.p(), s, t, grid, wrap_tol);
  return r;
}

Conserved conserved_quantities(const Field& u, int p) {
  check_p(p);
  const auto& k = simd::active();
  const double dx = u.grid().dx();
  const Field ux = derivative(u, 1);
  RVec up(u.size());
  k.ipow(u.data(), up.data(), u.size(), p);
  const double mass = k.dot(u.data(), u.data(), u.size()) * dx;
  const double grad = k.dot(ux.data(), ux.data(), u.size()) * dx;
  const double pot = k.dot(up.data(), u.data(), u.size()) * dx;
  return {mass, 0.5 * grad - pot / (p + 1)};
}

double mass_scaling_exponent(int p) {
  check_p(p);
  return (5.0 - p) / (2.0 * (p - 1));
}

Criticality criticality(int p, double c) {
  if (!(c > 0.0)) throw DomainError("speed must be positive");
  const double e = mass_scaling_exponent(p);
  return {p < 5 ? 1 : (p == 5 ? 0 : -1), e};
}

}  // namespace gkdv
