#pragma once

// Flows and coordinate constructions: canonical coordinates by ODE
// integration, the ray ODE for the pulled-back coefficient matrix, the
// scaling preprocessor, and harmonic coordinates.

#include "zyg/elliptic.hpp"

namespace zyg {

// pointwise vector field rule: writes ndim components at p
using VfRule = std::function<void(const Pt&, double*)>;

struct FlowOptions {
  double step = 1e-3;      // RK4 step in the flow parameter
  bool r_weighted = false; // integrate dE/dr = r * sum t^i X_i(E) instead
};

// e^{t.X}(p): RK4 on dE/dr = sum_i t^i X_i(E), r in [0,1]
Pt flow(const std::vector<VfRule>& X, const Pt& p, const std::vector<double>& t,
        const FlowOptions& opts = {});

// sampled chart t -> Phi0(t) = e^{t.X}(p); nodes with |t| > radius are
// evaluated at the radially clamped parameter and are not meaningful
struct ChartGrid {
  GridSpec spec;
  double radius = 0.0;
  VecField map;     // chart values per coordinate
  MatrixField jac;  // centered finite differences of the samples, (i,j) = d map^i / d t^j
};

ChartGrid canonical_chart(const std::vector<VfRule>& X, const Pt& p, double radius,
                          const GridSpec& spec, const FlowOptions& opts = {});

// pull a vector field through a sampled chart: (chart^* Y)(t) = jac(t)^{-1} Y(map(t));
// meaningful where |t| < radius - 2h
VecField chart_pullback_vf(const ChartGrid& chart, const std::vector<VfRule>& Y,
                           double det_floor = 1e-6);

// structure coefficient rule evaluated along the chart: (i, k, j) -> value at t
using CijkRule = std::function<double(int i, int k, int j, const Pt& t)>;

struct RayOdeOptions {
  double step = 1.0 / 256.0;  // RK4 step in the ray parameter
  double r_start_rel = 1e-6;  // asymptotic start radius, relative to half_width
  double blowup_norm = 1e6;
};

// integrate d/dr ( r A(r theta) ) = -A^2 - C A - C along each grid ray with
// C(x)_i^j = sum_k x_k c_ik^j(Phi0(x)), A(0) = 0; out(i,j) = A_i^j with
// [Y_1..Y_n]^T = (I + A) grad
MatrixField ray_ode_A(const CijkRule& c, const GridSpec& spec, double radius,
                      const RayOdeOptions& opts = {});

// scaling preprocessor: lambda_kappa^i = dx^i + chi1(x) a^i_j(kappa x) dx^j,
// kappa halved from mu0 until the measured alpha/beta-1 norms drop below
// target; requires a^i_j(0) = 0
struct ScalingResult {
  std::vector<FormField> lambdas;
  double kappa0 = 0.0;
  double measured = 0.0;          // norm sum at kappa0
  std::vector<double> sweep_kappa;
  std::vector<double> sweep_norm;
};

// coefficient rules: coef[i][j](x) = <theta^i - dx^i, d/dx^j> on mu0 B^n
ScalingResult scaling_prepare(const std::vector<std::vector<PointRule>>& coef,
                              double alpha, double beta, double mu0, double target,
                              const GridSpec& spec);

// companion form tau_kappa with d lambda_kappa = d tau_kappa (used as an
// invariant check); theta given as grid forms here
std::vector<FormField> scaling_tau(const std::vector<FormField>& theta, double kappa,
                                   double mu0, const GridSpec& spec);
std::vector<FormField> scaling_lambda_grid(const std::vector<FormField>& theta, double kappa,
                                           const GridSpec& spec);

// one linear change of frame so that the coefficients vanish at the basepoint
std::vector<std::vector<PointRule>> normalize_basepoint(
    const std::vector<std::vector<PointRule>>& coef);

// harmonic chart: solve -sum d_i(sqrtdet ginv^{ij} d_j psi^k) = 0 inside the
// ball with psi^k = seed^k (default: the coordinate functions) on the band
struct HarmonicChart {
  VecField psi;       // full chart values
  VecField psi_disp;  // psi - id
  SolveStats stats;
};
HarmonicChart harmonic_chart_fields(const MetricFields& metric, const BallMask& mask,
                                    const VecField* seed = nullptr, double cg_tol = 1e-10);
// full DiffeoGrid (with sampled inverse) when the chart is needed as a map
DiffeoGrid harmonic_chart(const MetricFields& metric, const BallMask& mask,
                          const VecField* seed = nullptr, double cg_tol = 1e-10);

}  // namespace zyg
