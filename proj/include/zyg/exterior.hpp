#pragma once

// Exterior calculus on grid fields. Derivatives are spectral on the torus;
// frame inversion uses cofactor formulas (n <= 3).

#include "zyg/fft.hpp"
#include "zyg/grid.hpp"

namespace zyg {

using VecField = std::vector<ScalarField>;  // ndim component fields

FormField ext_d(const FormField& w);
FormField wedge(const FormField& s, const FormField& w);
FormField interior(const VecField& Y, const FormField& w);
FormField lie_derivative(const VecField& Y, const FormField& w);  // d i_Y + i_Y d
FormField codifferential(const FormField& w);
FormField hodge_laplacian(const FormField& w);  // d theta + theta d, composite route

// <omega, Y> for a 1-form
ScalarField pair_form_vf(const FormField& w, const VecField& Y);

// apply a vector field to a function (spectral gradient contraction)
ScalarField vf_apply(const VecField& Y, const ScalarField& f);

// dual basis lambda^i with <lambda^i, X_j> = delta_ij, from the first n frame
// fields; requires |det| > 0.05 samplewise
std::vector<FormField> dual_coframe(const Frame& X);

// c_ij^k with d lambda^k = sum_{i<j} c_ij^k lambda^i ^ lambda^j, evaluated by
// interior products; flattened (i*n + j)*n + k
std::vector<ScalarField> structure_coefficients(const std::vector<FormField>& coframe,
                                                const Frame& X);

// per-node inverse of an n x n matrix field by cofactors; throws below det_floor
MatrixField invert_matrix_field(const MatrixField& m, double det_floor);
ScalarField matrix_det(const MatrixField& m);

}  // namespace zyg
