#pragma once

#include <string>
#include <vector>

#include "gkdv/linop.hpp"
#include "gkdv/soliton.hpp"

namespace gkdv {

/// Directions a test function must be L2-orthogonal to.
class ConstraintSet {
 public:
  /// Throws DomainError unless the L2-normalized Gram determinant exceeds 1e-10.
  ConstraintSet(std::string name, std::vector<Field> fields);

  const std::string& name() const { return name_; }
  const std::vector<Field>& fields() const { return fields_; }
  std::size_t size() const { return fields_.size(); }
  const Grid1D& grid() const { return fields_.front().grid(); }
  double gram_determinant() const { return gram_det_; }

 private:
  std::string name_;
  std::vector<Field> fields_;
  double gram_det_;
};

/// {Z~+, Z~-, Q_{c,x}} for a soliton of speed c centered at `center`.
ConstraintSet dual_constraints(const EdgeSpectrum& spec, double c, double center,
                               const Grid1D& grid);
/// {Q_{c,x}}.
ConstraintSet translation_constraint(int p, double c, double center, const Grid1D& grid);
/// {Q_c^{(p+1)/2}, Q_{c,x}}.
ConstraintSet power_constraints(int p, double c, double center, const Grid1D& grid);

struct RayleighMinimum {
  double lambda;   ///< min (L_c v, v) / ||v||_{H1}^2 over the constrained subspace
  Field minimizer; ///< normalized to ||v||_{H1} = 1
};

/// Smallest generalized eigenvalue of the discretized pencil
/// ((L_c., .), ||.||_{H1}^2) restricted to the L2-orthogonal complement of
/// the constraints, by dense Householder projection and LAPACK dsygvx.
RayleighMinimum constrained_min_rayleigh(int p, double c, double center,
                                         const ConstraintSet& constraints, const Grid1D& grid);

/// (L_c v, v) / ||v||_{H1}^2.
double rayleigh_quotient(const Field& v, int p, double c, double center = 0.0);

/// H_j = int (v_x^2 - p R~_j^{p-1} v^2 + c_j v^2) phi_j with R~_j centered at
/// c_j t + x_j + y_j. The weights must sum to one within 1e-12.
std::vector<double> localized_form_H(const Field& v, const SolitonEnsemble& ens,
                                     const std::vector<double>& y,
                                     const std::vector<Field>& weights, double t);

/// Smallest K with ||v||_{H1}^2 <= K (L_c v, v) + K^2 ((v, Z~+)^2 + (v, Z~-)^2)
/// for every v orthogonal to Q_{c,x}, found by bisection on the pencil
/// minimum to relative tolerance rel_tol.
double minimal_composite_constant(const EdgeSpectrum& spec, double c, const Grid1D& grid,
                                  double rel_tol = 1e-6);

/// Safety factor applied to the largest per-soliton minimal constant.
inline constexpr double kCompositeMargin = 1.25;
/// kCompositeMargin * max_j minimal_composite_constant(c_j).
double composite_constant(const EdgeSpectrum& spec, const std::vector<double>& speeds,
                          const Grid1D& grid);

}  // namespace gkdv
