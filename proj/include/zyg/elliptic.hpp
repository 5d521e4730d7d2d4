#pragma once

// Dirichlet solver on the unit ball, metric algebra from coefficient
// matrices, the Picard solve of the divergence-form coordinate system, and
// the contraction map that verifies the regularity fixed point.
//
// Sign convention: the positive Laplacian -sum d^2/dx^2 throughout.

#include "zyg/maps.hpp"

namespace zyg {

struct BallMask {
  GridSpec spec;
  double radius = 1.0;
  std::vector<std::uint8_t> state;       // 0 outside, 1 inside, 2 boundary band
  std::vector<std::size_t> inside_list;  // flat indices with state == 1

  static BallMask make(const GridSpec& spec, double radius = 1.0);
  bool is_inside(std::size_t flat) const { return state[flat] == 1; }
};

struct SolveStats {
  int cg_iters = 0;
  double rel_residual = 0.0;
};

// -sum d^2 u = f at inside nodes (5-point / 7-point), u = g on the band;
// g may be empty (zero boundary values)
ScalarField dirichlet_solve(const ScalarField& f, const ScalarField* g, const BallMask& mask,
                            double cg_tol = 1e-10, SolveStats* stats = nullptr);

// metric from the coefficient matrix: ginv = (I+A)^{-1} (I+A)^{-T},
// sqrtdet = det(I+A), cofactor algebra per node
struct MetricFields {
  MatrixField ginv;
  ScalarField sqrtdet;
};
MetricFields metric_from_A(const MatrixField& A, bool require_small = true);

// K^{ij} = sqrtdet * ginv^{ij}
MatrixField metric_weights(const MetricFields& m);

// positive divergence-form operator -sum_ij d_i(K^ij d_j u) on the full grid:
// conservative half-point staggered fluxes for the diagonal, centered
// differences for the cross terms (symmetric as a pair)
ScalarField divform_apply(const MatrixField& K, const ScalarField& u);
// -sum_j d_j ( sum_i K^{ij} a_i ) with the same staggering
ScalarField divflux_apply(const MatrixField& K, const VecField& a);

// solve -sum_ij d_i(K^ij d_j u) = f inside, u = g on the band
ScalarField divform_solve(const MatrixField& K, const ScalarField& f, const ScalarField* g,
                          const BallMask& mask, double cg_tol = 1e-10,
                          SolveStats* stats = nullptr);

struct PicardStats {
  std::vector<double> step_norms;
  std::vector<double> ratios;
  double weak_residual = 0.0;
  int iterations = 0;
};

struct SolveROptions {
  double picard_tol = 1e-9;
  int picard_max_iter = 60;
  double cg_tol = 1e-11;
  DiffeoOptions diffeo;
};

// Picard solve of  sum_j d_j(K^ij (d_i R^k - a_i^k)) = 0,  R|band = 0,
// for the coefficient matrix A supported in the half-ball; returns the
// coordinate change F = id + R with sampled inverse
DiffeoGrid solve_R(const MatrixField& A, const BallMask& mask, const SolveROptions& opts = {},
                   PicardStats* stats = nullptr);

// discrete weak-form residual of  sum_i d_i(sqrtdet(h) h^{ij} b_j^k) = 0,
// measured as max_k sup |D(strong residual)| / sup |B|
double pde_B_residual(const MatrixField& B, const BallMask& mask, double cg_tol = 1e-10);

struct ContractionReport {
  std::vector<double> ratios;       // successive-iterate ratios
  double final_step = 0.0;          // |f_{m+1} - f_m|_inf / |B0|_inf at exit
  double recovery = 0.0;            // |f_inf - B0|_inf / |B0|_inf
  MatrixField fixed_point;
  bool contracting = true;
};

// iterate f <- T_B[f] from f = 0, where
//   T_B[f]_j^k = harmonic_ext(B|band)_j^k + <D(theta d eta^k), d/dy^j>
//                + sum_i D(d^2 R_i^k(f) / dy^j dy^i)
// with R_i^k(f) = sum_j (sqrtdet(h(f)) h(f)^{ij} - delta^{ij}) f_j^k
ContractionReport contraction_TB(const MatrixField& B0, const std::vector<FormField>& deta,
                                 const MatrixField& boundaryB, const BallMask& mask,
                                 int max_iter = 25, double cg_tol = 1e-10);

}  // namespace zyg
