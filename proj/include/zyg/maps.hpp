#pragma once

// Sampled coordinate changes F = id + R on the torus: Newton inversion,
// Jacobians, pushforward of forms, pullback of vector fields. Composition
// with maps uses separable 4-point cubic interpolation.

#include "zyg/exterior.hpp"
#include "zyg/grid.hpp"

namespace zyg {

// periodic separable cubic (4-point Lagrange) interpolation
double interp_cubic(const ScalarField& f, const Pt& p);

struct DiffeoGrid {
  GridSpec spec;
  VecField R;         // displacement of F = id + R, sampled on the source grid
  VecField phi_disp;  // displacement S of Phi = F^{-1} = id + S, on the target grid
  MatrixField jac_phi;  // (i,j) entry: d phi^i / d y^j, on the target grid

  Pt apply_F(const Pt& x) const;    // interpolated forward map
  Pt apply_phi(const Pt& y) const;  // interpolated inverse map
};

struct DiffeoOptions {
  double newton_tol_rel = 1e-13;  // times half_width
  int newton_max_iter = 60;
  double det_floor = 0.1;
  double inversion_check_rel = 1e-9;  // times half_width
};

// Build the sampled inverse and its Jacobian from a displacement field.
// Jacobians are spectral; R is expected to vanish near the torus seam.
DiffeoGrid make_diffeo(const GridSpec& spec, const VecField& R,
                       const DiffeoOptions& opts = {});

// F_* omega = Phi^* omega on the target grid: components composed with Phi
// (cubic interpolation) and contracted with minors of grad Phi
FormField pushforward_form(const DiffeoGrid& D, const FormField& w);
// same, with components evaluated exactly from pointwise rules
FormField pushforward_form_rules(const DiffeoGrid& D, int degree,
                                 const std::vector<PointRule>& comp_rules);

// (Phi^* X)(x) = (grad F(x))^{-1} X(F(x)) on the source grid
VecField pullback_vf(const DiffeoGrid& D, const VecField& X);
VecField pullback_vf_rules(const DiffeoGrid& D, const std::vector<PointRule>& comp_rules);

// identity map helper
DiffeoGrid identity_diffeo(const GridSpec& spec);

}  // namespace zyg
