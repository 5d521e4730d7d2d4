#pragma once

// End-to-end orchestration: the coordinate-improvement pipeline, recursive
// frame-adapted norms, the dual-coframe differential test, and the
// canonical-vs-harmonic coordinate experiment.

#include <string>

#include "zyg/charts.hpp"
#include "zyg/potential.hpp"

namespace zyg {

struct ImproveConfig {
  double alpha = 0.6;
  double beta = 1.4;           // must lie in [alpha, alpha+1]
  double target = 1e-2;        // smallness required of the input
  double picard_tol = 1e-9;
  double cg_tol = 1e-11;
  int window_lo = 2;           // exponent fit window
  int window_hi = -1;          // -1: jmax-1
  bool manufactured = false;   // input built with d-lambda one class smoother
  int contraction_iters = 18;

  void validate() const;
};

struct ImproveResult {
  DiffeoGrid F;
  std::vector<FormField> etas;
  MatrixField B;
  RegularityReport rep_A;
  RegularityReport rep_B;
  PicardStats picard;
  double input_smallness = 0.0;
  double pde_b_weak_residual = 0.0;
  ContractionReport contraction;
  bool exponent_gain_ok = true;  // only meaningful when cfg.manufactured
  double out_quantity = 0.0;     // |F - id|_{C^{alpha+1}} + sum |eta - dy|_{C^beta}
  std::string manifest_json() const;
};

// lambdas: n 1-forms with supp(lambda^i - dx^i) inside the half-ball and the
// measured smallness below cfg.target (run scaling_prepare first otherwise).
// coef_rules, when given, supply exact pointwise values of the deviation
// coefficients for composition with the inverse map.
ImproveResult improve_chart(const std::vector<FormField>& lambdas, const ImproveConfig& cfg,
                            const std::vector<std::vector<PointRule>>* coef_rules = nullptr);

// recursive frame-adapted norm: base case is the dyadic norm; above order one
// it adds the norms of the frame derivatives one order lower
double cX_norm(const ScalarField& f, const Frame& frame, double beta, int depth_budget = 3);

struct ConditionBCheck {
  std::string name;
  double measured = 0.0;
  double threshold = 0.0;
  bool pass = false;
  bool smooth = false;  // block profile beyond resolution: counts as pass
};

struct ConditionBReport {
  bool pass = true;
  std::vector<ConditionBCheck> checks;
  std::string to_json() const;
};

// dual-coframe differential test at order beta, with a 0.15 exponent
// tolerance; the frame's first n fields must span. The analysis is local to
// the plateau of the supplied cutoff.
ConditionBReport test_condition_b(const Frame& frame, double beta, const ScalarField& cutoff,
                                  double tol = 0.15);

// the explicit one-parameter frame family: X = d/dx, Y = x f(y) d/dx + d/dy
// with f(y) = alpha * max(0,y)^{alpha-1}
double cusp_profile(double alpha, double y);  // f above
double chart_factor_exact(double alpha, double s);  // g(s) by quadrature
double chart_series_coefficient(double alpha);      // 1 - 1/(alpha+1)

struct CanHarmConfig {
  int grid = 256;
  double flow_step = 1.0 / 128.0;
  double cg_tol = 1e-9;
  double chart_radius = 0.95;
  std::pair<int, int> fit_window{2, -1};  // -1: jmax-1
};

struct CanHarmReport {
  double alpha = 0.0;
  double chart_vs_exact = 0.0;      // sup |flow chart - t g(s)| over the plateau
  double canonical_exponent = 0.0;
  double harmonic_exponent = 0.0;
  double series_lhs = 0.0;          // (1 - g(s))/s^alpha at s = 1e-3
  double series_rhs = 0.0;          // 1 - 1/(alpha+1)
  std::string to_json() const;
};

CanHarmReport canonical_vs_harmonic(double alpha, const CanHarmConfig& cfg = {});

// manufactured pipeline input: coefficient rules for the deviation of a
// 2-D coframe with coefficient exponent alpha and d-lambda exponent beta-1
// (rough_differential = false) or alpha-1 (rough_differential = true)
std::vector<std::vector<PointRule>> manufactured_coef(double alpha, double beta,
                                                      double amplitude,
                                                      bool rough_differential = false);

}  // namespace zyg
