#include "zyg/pipeline.hpp"

#include <cmath>
#include <sstream>

namespace zyg {

namespace {

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string json_num(double v) { return std::isnan(v) ? "null" : fmt17(v); }

}  // namespace

void ImproveConfig::validate() const {
  if (!(alpha > 0) || !(beta >= alpha) || !(beta <= alpha + 1.0))
    throw std::invalid_argument("ImproveConfig: need 0 < alpha <= beta <= alpha + 1");
}

ImproveResult improve_chart(const std::vector<FormField>& lambdas, const ImproveConfig& cfg,
                            const std::vector<std::vector<PointRule>>* coef_rules) {
  cfg.validate();
  if (lambdas.empty()) throw std::invalid_argument("improve_chart: no forms");
  const GridSpec spec = lambdas[0].spec;
  const int n = spec.ndim;
  if (static_cast<int>(lambdas.size()) != n)
    throw std::invalid_argument("improve_chart: need ndim coframe forms");

  ImproveResult out;

  // deviation matrix A.at(i,k) = <lambda^k - dx^k, d/dx^i>
  MatrixField A(n, n, spec);
  double smallness = 0.0;
  for (int k = 0; k < n; ++k) {
    FormField dev(1, spec);
    for (int i = 0; i < n; ++i) {
      dev.comp({i}) = lambdas[k].comp({i});
      if (i == k)
        for (std::size_t p = 0; p < dev.comp({i}).size(); ++p) dev.comp({i})[p] -= 1.0;
      A.at(i, k) = dev.comp({i});
    }
    if (!supported_in_ball(dev, 0.5))
      throw std::runtime_error("improve_chart: lambda - dx not supported in the half-ball");
    smallness += norm_dyadic(dev, cfg.alpha) + norm_dyadic(ext_d(lambdas[k]), cfg.beta - 1.0);
  }
  out.input_smallness = smallness;
  if (smallness > cfg.target)
    throw std::runtime_error("improve_chart: input above smallness target; scale first");

  BallMask mask = BallMask::make(spec, 1.0);
  SolveROptions ropts;
  ropts.picard_tol = cfg.picard_tol;
  ropts.cg_tol = cfg.cg_tol;
  out.F = solve_R(A, mask, ropts, &out.picard);

  // eta^k: b_j^k = (grad Phi - I)_j^k + sum_i (a_i^k o Phi) (grad Phi)_j^i
  out.B = MatrixField(n, n, spec);
  auto a_at = [&](int i, int k, const Pt& x) {
    if (coef_rules) return (*coef_rules)[k][i](x);
    return interp_cubic(A.at(i, k), x);
  };
  for (int k = 0; k < n; ++k) {
    FormField eta(1, spec);
    for_nodes(spec, [&](std::size_t flat, const Pt& y) {
      Pt x = y;
      for (int a = 0; a < n; ++a) x[a] += out.F.phi_disp[a][flat];
      double av[3];
      for (int i = 0; i < n; ++i) av[i] = a_at(i, k, x);
      for (int j = 0; j < n; ++j) {
        double b = out.F.jac_phi.at(k, j)[flat] - (j == k ? 1.0 : 0.0);
        for (int i = 0; i < n; ++i) b += av[i] * out.F.jac_phi.at(i, j)[flat];
        out.B.at(j, k)[flat] = b;
        eta.comp({j})[flat] = b + (j == k ? 1.0 : 0.0);
      }
    });
    out.etas.push_back(std::move(eta));
  }

  out.pde_b_weak_residual = pde_B_residual(out.B, mask, cfg.cg_tol);

  // d eta^k as the pushforward of d lambda^k (compactly supported, clean)
  std::vector<FormField> detas;
  for (int k = 0; k < n; ++k) detas.push_back(pushforward_form(out.F, ext_d(lambdas[k])));

  out.contraction = contraction_TB(out.B, detas, out.B, mask, cfg.contraction_iters, cfg.cg_tol);

  auto bank = build_filter_bank(spec);
  std::pair<int, int> window{cfg.window_lo, cfg.window_hi < 0 ? bank->jmax - 1 : cfg.window_hi};

  auto roughest = [&](const std::vector<RegularityReport>& reps) {
    RegularityReport best = reps[0];
    for (const auto& r : reps)
      if (!r.smooth_beyond_resolution &&
          (best.smooth_beyond_resolution || r.fitted_exponent < best.fitted_exponent))
        best = r;
    return best;
  };

  {
    std::vector<RegularityReport> reps;
    for (int k = 0; k < n; ++k) {
      FormField dev(1, spec);
      for (int i = 0; i < n; ++i) dev.comp({i}) = A.at(i, k);
      reps.push_back(fit_exponent(dev, window));
    }
    out.rep_A = roughest(reps);
  }
  {
    // interior cutoff keeps the exponent fit away from the sphere kink
    ScalarField chi = radial_cutoff(spec, 0.55, 0.75);
    std::vector<RegularityReport> reps;
    for (int k = 0; k < n; ++k) {
      FormField dev(1, spec);
      for (int i = 0; i < n; ++i) dev.comp({i}) = chi * out.B.at(i, k);
      reps.push_back(fit_exponent(dev, window));
    }
    out.rep_B = roughest(reps);
  }
  if (cfg.manufactured && !out.rep_A.smooth_beyond_resolution &&
      !out.rep_B.smooth_beyond_resolution)
    out.exponent_gain_ok = out.rep_B.fitted_exponent >=
                           out.rep_A.fitted_exponent + 0.8 * (cfg.beta - cfg.alpha) - 0.15;

  {
    ScalarField chi = radial_cutoff(spec, 0.6, 0.8);
    double q = 0;
    for (int a = 0; a < n; ++a) q = std::max(q, norm_dyadic(chi * out.F.R[a], cfg.alpha + 1.0));
    double qe = 0;
    for (int k = 0; k < n; ++k) {
      FormField dev(1, spec);
      for (int i = 0; i < n; ++i) dev.comp({i}) = chi * out.B.at(i, k);
      qe += norm_dyadic(dev, cfg.beta);
    }
    out.out_quantity = q + qe;
  }
  return out;
}

std::string ImproveResult::manifest_json() const {
  std::ostringstream os;
  os << "{";
  os << "\"input_smallness\":" << json_num(input_smallness);
  os << ",\"picard\":{\"iterations\":" << picard.iterations
     << ",\"weak_residual\":" << json_num(picard.weak_residual) << ",\"ratios\":[";
  for (std::size_t i = 0; i < picard.ratios.size(); ++i) {
    if (i) os << ",";
    os << json_num(picard.ratios[i]);
  }
  os << "]}";
  os << ",\"pde_b_weak_residual\":" << json_num(pde_b_weak_residual);
  os << ",\"contraction\":{\"recovery\":" << json_num(contraction.recovery)
     << ",\"final_step\":" << json_num(contraction.final_step)
     << ",\"contracting\":" << (contraction.contracting ? "true" : "false") << ",\"ratios\":[";
  for (std::size_t i = 0; i < contraction.ratios.size(); ++i) {
    if (i) os << ",";
    os << json_num(contraction.ratios[i]);
  }
  os << "]}";
  os << ",\"exponent_A\":" << json_num(rep_A.fitted_exponent);
  os << ",\"exponent_B\":" << json_num(rep_B.fitted_exponent);
  os << ",\"exponent_gain_ok\":" << (exponent_gain_ok ? "true" : "false");
  os << ",\"out_quantity\":" << json_num(out_quantity);
  os << "}";
  return os.str();
}

double cX_norm(const ScalarField& f, const Frame& frame, double beta, int depth_budget) {
  require_same_spec(f.spec, frame.spec, "cX_norm");
  const int n = f.spec.ndim;
  {
    MatrixField m(n, n, frame.spec);
    for (int a = 0; a < n; ++a)
      for (int j = 0; j < n; ++j) m.at(a, j) = frame.vfs[j][a];
    ScalarField det = matrix_det(m);
    for (std::size_t p = 0; p < det.size(); ++p)
      if (std::abs(det[p]) <= 0.05) throw std::runtime_error("cX_norm: frame span failure");
  }
  if (!(beta > 0)) throw std::invalid_argument("cX_norm: order must be positive");
  int depth = static_cast<int>(std::ceil(beta)) - 1;
  if (depth > depth_budget)
    throw std::runtime_error("cX_norm: recursion depth beyond the numerical budget");
  std::function<double(const ScalarField&, double)> rec = [&](const ScalarField& g,
                                                              double b) -> double {
    if (b <= 1.0) return norm_dyadic(g, b);
    double v = rec(g, b - 1.0);
    for (int j = 0; j < frame.q; ++j) v += rec(vf_apply(frame.vfs[j], g), b - 1.0);
    return v;
  };
  return rec(f, beta);
}

namespace {

void add_check(ConditionBReport& rep, const std::string& name, const RegularityReport& r,
               double threshold, double tol) {
  ConditionBCheck c;
  c.name = name;
  c.threshold = threshold;
  if (r.smooth_beyond_resolution) {
    c.smooth = true;
    c.pass = true;
    c.measured = std::numeric_limits<double>::quiet_NaN();
  } else {
    c.measured = r.fitted_exponent;
    c.pass = r.fitted_exponent >= threshold - tol;
  }
  rep.pass = rep.pass && c.pass;
  rep.checks.push_back(c);
}

RegularityReport fit_scalar_cut(const ScalarField& f, const ScalarField& cutoff) {
  return fit_exponent(cutoff * f);
}

}  // namespace

ConditionBReport test_condition_b(const Frame& frame, double beta, const ScalarField& cutoff,
                                  double tol) {
  const int n = frame.spec.ndim;
  ConditionBReport rep;
  auto coframe = dual_coframe(frame);

  auto cut_form = [&](const FormField& w) {
    FormField out(w.degree, w.spec);
    for (std::size_t c = 0; c < w.comps.size(); ++c) out.comps[c] = cutoff * w.comps[c];
    return out;
  };

  for (int j = 0; j < n; ++j) {
    FormField dl = ext_d(coframe[j]);
    std::string base = "dlambda^" + std::to_string(j + 1);
    if (beta <= 1.0) {
      add_check(rep, base, fit_exponent(cut_form(dl)), beta - 1.0, tol);
    } else {
      add_check(rep, base + " order 0+", fit_exponent(cut_form(dl)), 0.0, tol);
      for (int i = 0; i < n; ++i) {
        FormField lied = ext_d(interior(frame.vfs[i], dl));
        add_check(rep, "d i_X" + std::to_string(i + 1) + " " + base,
                  fit_exponent(cut_form(lied)), beta - 2.0, tol);
        if (beta > 2.0) {
          for (int i2 = 0; i2 < n; ++i2) {
            FormField lied2 = ext_d(interior(frame.vfs[i2], lied));
            add_check(rep,
                      "d i_X" + std::to_string(i2 + 1) + " d i_X" + std::to_string(i + 1) +
                          " " + base,
                      fit_exponent(cut_form(lied2)), beta - 3.0, tol);
          }
        }
      }
    }
  }

  // extra fields: <lambda^j, X_k> must have frame regularity of order beta;
  // tested through exponents of iterated frame derivatives
  int depth = std::min(3, std::max(0, static_cast<int>(std::ceil(beta)) - 1));
  for (int k = n; k < frame.q; ++k)
    for (int j = 0; j < n; ++j) {
      std::string base =
          "<lambda^" + std::to_string(j + 1) + ",X" + std::to_string(k + 1) + ">";
      std::vector<ScalarField> level{pair_form_vf(coframe[j], frame.vfs[k])};
      for (int m = 0; m <= depth; ++m) {
        for (std::size_t g = 0; g < level.size(); ++g)
          add_check(rep, base + " level " + std::to_string(m) + "." + std::to_string(g),
                    fit_scalar_cut(level[g], cutoff), beta - m, tol);
        if (m == depth) break;
        std::vector<ScalarField> next;
        for (const auto& g : level)
          for (int i = 0; i < frame.q; ++i) next.push_back(vf_apply(frame.vfs[i], g));
        level = std::move(next);
      }
    }
  return rep;
}

std::string ConditionBReport::to_json() const {
  std::ostringstream os;
  os << "{\"pass\":" << (pass ? "true" : "false") << ",\"checks\":[";
  for (std::size_t i = 0; i < checks.size(); ++i) {
    if (i) os << ",";
    os << "{\"name\":\"" << checks[i].name << "\",\"measured\":" << json_num(checks[i].measured)
       << ",\"threshold\":" << json_num(checks[i].threshold)
       << ",\"pass\":" << (checks[i].pass ? "true" : "false")
       << ",\"smooth\":" << (checks[i].smooth ? "true" : "false") << "}";
  }
  os << "]}";
  return os.str();
}

double cusp_profile(double alpha, double y) {
  // f(y) = alpha * max(0,y)^{alpha-1}; the value at exactly 0 follows the
  // step convention of the alpha = 1 case
  if (y < 0.0) return 0.0;
  if (y == 0.0) return alpha == 1.0 ? 1.0 : 0.0;
  return alpha * std::pow(y, alpha - 1.0);
}

double chart_factor_exact(double alpha, double s) {
  if (s <= 0.0) return 1.0;
  // g(s) = e^{-s^alpha} / s * int_0^s e^{rho^alpha} d rho, composite Simpson
  const int m = 4096;  // panels, even
  const double h = s / m;
  double acc = std::exp(0.0) + std::exp(std::pow(s, alpha));
  for (int i = 1; i < m; ++i)
    acc += (i % 2 == 1 ? 4.0 : 2.0) * std::exp(std::pow(i * h, alpha));
  double integral = acc * h / 3.0;
  return std::exp(-std::pow(s, alpha)) / s * integral;
}

double chart_series_coefficient(double alpha) { return 1.0 - 1.0 / (alpha + 1.0); }

CanHarmReport canonical_vs_harmonic(double alpha, const CanHarmConfig& cfg) {
  if (!(alpha > 1.0))
    throw std::invalid_argument("canonical_vs_harmonic: needs alpha > 1");
  CanHarmReport rep;
  rep.alpha = alpha;
  GridSpec spec = GridSpec::make(2, cfg.grid, 2.0);

  auto f = [alpha](double y) { return cusp_profile(alpha, y); };
  VfRule Xr = [](const Pt&, double* out) {
    out[0] = 1.0;
    out[1] = 0.0;
    out[2] = 0.0;
  };
  VfRule Yr = [f](const Pt& p, double* out) {
    out[0] = p[0] * f(p[1]);
    out[1] = 1.0;
    out[2] = 0.0;
  };

  FlowOptions fo;
  fo.step = cfg.flow_step;
  ChartGrid chart = canonical_chart({Xr, Yr}, Pt{0, 0, 0}, cfg.chart_radius, spec, fo);

  // closed-form comparison on the plateau
  double cmp = 0;
  for_nodes(spec, [&](std::size_t flat, const Pt& p) {
    double r = std::sqrt(p[0] * p[0] + p[1] * p[1]);
    if (r > 0.7) return;
    double gx = p[0] * chart_factor_exact(alpha, p[1]);
    cmp = std::max(cmp, std::abs(chart.map[0][flat] - gx));
    cmp = std::max(cmp, std::abs(chart.map[1][flat] - p[1]));
  });
  rep.chart_vs_exact = cmp;

  auto bank = build_filter_bank(spec);
  std::pair<int, int> window{cfg.fit_window.first,
                             cfg.fit_window.second < 0 ? bank->jmax - 1 : cfg.fit_window.second};
  ScalarField chi = radial_cutoff(spec, 0.5, 0.7);

  auto roughest_exponent = [&](const VecField& W) {
    double best = std::numeric_limits<double>::quiet_NaN();
    for (const auto& comp : W) {
      RegularityReport r = fit_exponent(chi * comp, window);
      if (r.smooth_beyond_resolution) continue;
      if (std::isnan(best) || r.fitted_exponent < best) best = r.fitted_exponent;
    }
    return best;
  };

  VecField Wcan = chart_pullback_vf(chart, {Yr});
  rep.canonical_exponent = roughest_exponent(Wcan);

  // harmonic side: metric of the dual coframe lambda = dx - x f(y) dy, eta = dy
  MatrixField A(2, 2, spec);
  A.at(1, 0) = sample_function(spec, [&](const Pt& p) { return -p[0] * f(p[1]); });
  MetricFields metric = metric_from_A(A, false);
  BallMask mask = BallMask::make(spec, 1.0);
  HarmonicChart hc = harmonic_chart_fields(metric, mask, nullptr, cfg.cg_tol);

  // W^k = Y psi^k computed from the spectral gradient of the displacement
  VecField Wharm(2, ScalarField(spec));
  for (int k = 0; k < 2; ++k) {
    auto grad = spectral_gradient(hc.psi_disp[k]);
    for_nodes(spec, [&](std::size_t flat, const Pt& p) {
      double y[3];
      Yr(p, y);
      double acc = y[k];  // identity part of psi
      for (int a = 0; a < 2; ++a) acc += y[a] * grad[a][flat];
      Wharm[k][flat] = acc;
    });
  }
  rep.harmonic_exponent = roughest_exponent(Wharm);

  const double s0 = 1e-3;
  rep.series_lhs = (1.0 - chart_factor_exact(alpha, s0)) / std::pow(s0, alpha);
  rep.series_rhs = chart_series_coefficient(alpha);
  return rep;
}

std::string CanHarmReport::to_json() const {
  std::ostringstream os;
  os << "{\"alpha\":" << json_num(alpha) << ",\"chart_vs_exact\":" << json_num(chart_vs_exact)
     << ",\"canonical_exponent\":" << json_num(canonical_exponent)
     << ",\"harmonic_exponent\":" << json_num(harmonic_exponent)
     << ",\"series_lhs\":" << json_num(series_lhs) << ",\"series_rhs\":" << json_num(series_rhs)
     << "}";
  return os.str();
}

std::vector<std::vector<PointRule>> manufactured_coef(double alpha, double beta,
                                                      double amplitude,
                                                      bool rough_differential) {
  auto cusp = [](double u, double sigma) { return u > 0.0 ? std::pow(u, sigma) : 0.0; };
  PointRule zero = [](const Pt&) { return 0.0; };
  PointRule a12;
  if (!rough_differential) {
    // C^alpha cusp across y plus a C^beta cusp across x: the x-derivative,
    // which feeds d lambda, is exactly one class below beta
    a12 = [=](const Pt& p) {
      double chi = radial_cutoff_value(p, 2, 0.3, 0.45);
      if (chi == 0.0) return 0.0;
      return amplitude * chi *
             (cusp(p[1], alpha) * std::cos(1.7 * p[0]) +
              cusp(p[0], beta) * std::cos(2.3 * p[1] + 0.4));
    };
  } else {
    // cusp across x of class alpha: d lambda is as rough as the coefficients
    a12 = [=](const Pt& p) {
      double chi = radial_cutoff_value(p, 2, 0.3, 0.45);
      if (chi == 0.0) return 0.0;
      return amplitude * chi * cusp(p[0], alpha) * std::cos(2.3 * p[1] + 0.4);
    };
  }
  // coef[k][j] = <lambda^k - dx^k, d/dx^j>: only lambda^1 deviates, in dx^2
  std::vector<std::vector<PointRule>> coef(2, std::vector<PointRule>(2, zero));
  coef[0][1] = a12;
  return coef;
}

}  // namespace zyg
