#include "zyg/charts.hpp"

#include <cmath>

#include "zyg/lp.hpp"
#include "zyg/potential.hpp"

namespace zyg {

namespace {

constexpr int kMaxDim = 3;

struct RhsEval {
  const std::vector<VfRule>& X;
  const std::vector<double>& t;
  int ndim;
  bool r_weighted;

  void operator()(double r, const Pt& e, double* out) const {
    double comp[kMaxDim];
    for (int a = 0; a < ndim; ++a) out[a] = 0;
    for (std::size_t i = 0; i < X.size(); ++i) {
      if (t[i] == 0) continue;
      X[i](e, comp);
      for (int a = 0; a < ndim; ++a) out[a] += t[i] * comp[a];
    }
    if (r_weighted)
      for (int a = 0; a < ndim; ++a) out[a] *= r;
  }
};

}  // namespace

Pt flow(const std::vector<VfRule>& X, const Pt& p, const std::vector<double>& t,
        const FlowOptions& opts) {
  if (X.size() != t.size()) throw std::invalid_argument("flow: coefficient count mismatch");
  const int ndim = kMaxDim;  // rules write up to 3 comps; unused stay 0
  int nsteps = std::max(1, static_cast<int>(std::ceil(1.0 / opts.step)));
  double h = 1.0 / nsteps;
  Pt e = p;
  RhsEval rhs{X, t, ndim, opts.r_weighted};
  double k1[kMaxDim], k2[kMaxDim], k3[kMaxDim], k4[kMaxDim];
  Pt tmp;
  for (int s = 0; s < nsteps; ++s) {
    double r = s * h;
    rhs(r, e, k1);
    for (int a = 0; a < ndim; ++a) tmp[a] = e[a] + 0.5 * h * k1[a];
    rhs(r + 0.5 * h, tmp, k2);
    for (int a = 0; a < ndim; ++a) tmp[a] = e[a] + 0.5 * h * k2[a];
    rhs(r + 0.5 * h, tmp, k3);
    for (int a = 0; a < ndim; ++a) tmp[a] = e[a] + h * k3[a];
    rhs(r + h, tmp, k4);
    for (int a = 0; a < ndim; ++a)
      e[a] += h / 6.0 * (k1[a] + 2.0 * k2[a] + 2.0 * k3[a] + k4[a]);
    for (int a = 0; a < ndim; ++a)
      if (!std::isfinite(e[a])) throw std::runtime_error("flow: trajectory left the domain");
  }
  return e;
}

ChartGrid canonical_chart(const std::vector<VfRule>& X, const Pt& p, double radius,
                          const GridSpec& spec, const FlowOptions& opts) {
  ChartGrid chart;
  chart.spec = spec;
  chart.radius = radius;
  chart.map.assign(spec.ndim, ScalarField(spec));
  std::vector<double> t(X.size(), 0.0);
  for_nodes(spec, [&](std::size_t flat, const Pt& node) {
    double r2 = 0;
    for (int a = 0; a < spec.ndim; ++a) r2 += node[a] * node[a];
    double r = std::sqrt(r2);
    Pt tt = node;
    if (r > radius)  // clamp: values beyond the chart radius are placeholders
      for (int a = 0; a < spec.ndim; ++a) tt[a] *= radius / r;
    for (int a = 0; a < spec.ndim && a < static_cast<int>(t.size()); ++a) t[a] = tt[a];
    Pt e = flow(X, p, t, opts);
    for (int a = 0; a < spec.ndim; ++a) chart.map[a][flat] = e[a];
  });

  // centered differences of the samples
  chart.jac = MatrixField(spec.ndim, spec.ndim, spec);
  const auto hx = [&](int a) { return spec.spacing(a); };
  for (int i = 0; i < spec.ndim; ++i)
    for (int j = 0; j < spec.ndim; ++j) {
      ScalarField& t_ = chart.jac.at(i, j);
      for_nodes(spec, [&](std::size_t flat, const Pt&) {
        Idx idx = spec.unflat(flat);
        Idx ip = idx, im = idx;
        ip[j] = spec.wrap(j, idx[j] + 1);
        im[j] = spec.wrap(j, idx[j] - 1);
        t_[flat] = (chart.map[i].at(ip) - chart.map[i].at(im)) / (2.0 * hx(j));
      });
    }
  return chart;
}

VecField chart_pullback_vf(const ChartGrid& chart, const std::vector<VfRule>& Y,
                           double det_floor) {
  const GridSpec& spec = chart.spec;
  const int n = spec.ndim;
  if (static_cast<int>(Y.size()) != 1)
    throw std::invalid_argument("chart_pullback_vf: pass exactly one field rule");
  VecField out(n, ScalarField(spec));
  for_nodes(spec, [&](std::size_t flat, const Pt&) {
    double J[3][3];
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) J[i][j] = chart.jac.at(i, j)[flat];
    Pt x{0, 0, 0};
    for (int a = 0; a < n; ++a) x[a] = chart.map[a][flat];
    double y[3] = {0, 0, 0};
    Y[0](x, y);
    // solve J^T v = y? convention: (chart^* Y)^j with Y = sum Y^i d/dx^i and
    // d Phi0 (chart^*Y) = Y, i.e. sum_j J[i][j] v[j] = y[i]
    double m[3][4];
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) m[i][j] = J[i][j];
      m[i][n] = y[i];
    }
    for (int c = 0; c < n; ++c) {
      int piv = c;
      for (int r = c + 1; r < n; ++r)
        if (std::abs(m[r][c]) > std::abs(m[piv][c])) piv = r;
      for (int k = c; k <= n; ++k) std::swap(m[c][k], m[piv][k]);
      double d = m[c][c];
      if (std::abs(d) < det_floor) {
        for (int j = 0; j < n; ++j) out[j][flat] = 0.0;  // outside the resolved region
        return;
      }
      for (int r = 0; r < n; ++r) {
        if (r == c) continue;
        double f = m[r][c] / d;
        for (int k = c; k <= n; ++k) m[r][k] -= f * m[c][k];
      }
    }
    for (int j = 0; j < n; ++j) out[j][flat] = m[j][n] / m[j][j];
  });
  return out;
}

MatrixField ray_ode_A(const CijkRule& c, const GridSpec& spec, double radius,
                      const RayOdeOptions& opts) {
  const int n = spec.ndim;
  MatrixField out(n, n, spec);

  auto eval_C = [&](const Pt& x, double C[3][3]) {
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        double acc = 0;
        for (int k = 0; k < n; ++k) acc += x[k] * c(i, k, j, x);
        C[i][j] = acc;
      }
  };

  // N(r) = r * A(r theta): N' = -(N/r)^2 - C (N/r) - C, N ~ -C r / 2 near 0
  for_nodes(spec, [&](std::size_t flat, const Pt& node) {
    double r2 = 0;
    for (int a = 0; a < n; ++a) r2 += node[a] * node[a];
    double rtot = std::sqrt(r2);
    if (rtot > radius || rtot == 0) {
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) out.at(i, j)[flat] = 0.0;
      return;
    }
    Pt theta;
    for (int a = 0; a < n; ++a) theta[a] = node[a] / rtot;

    double r0 = std::max(opts.r_start_rel * spec.half_width, 1e-14);
    double N[3][3] = {{0, 0, 0}, {0, 0, 0}, {0, 0, 0}};
    {
      Pt x0;
      for (int a = 0; a < n; ++a) x0[a] = r0 * theta[a];
      double C0[3][3];
      eval_C(x0, C0);
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) N[i][j] = -0.5 * r0 * C0[i][j];
    }
    int nsteps = std::max(1, static_cast<int>(std::ceil((rtot - r0) / opts.step)));
    double h = (rtot - r0) / nsteps;
    auto rhs = [&](double r, const double Nc[3][3], double dN[3][3]) {
      Pt x;
      for (int a = 0; a < n; ++a) x[a] = r * theta[a];
      double C[3][3];
      eval_C(x, C);
      double M[3][3];
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) M[i][j] = Nc[i][j] / r;
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
          double m2 = 0, cm = 0;
          for (int k = 0; k < n; ++k) {
            m2 += M[i][k] * M[k][j];
            cm += C[i][k] * M[k][j];
          }
          dN[i][j] = -m2 - cm - C[i][j];
        }
    };
    double k1[3][3], k2[3][3], k3[3][3], k4[3][3], tmp[3][3];
    double r = r0;
    for (int s = 0; s < nsteps; ++s) {
      rhs(r, N, k1);
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) tmp[i][j] = N[i][j] + 0.5 * h * k1[i][j];
      rhs(r + 0.5 * h, tmp, k2);
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) tmp[i][j] = N[i][j] + 0.5 * h * k2[i][j];
      rhs(r + 0.5 * h, tmp, k3);
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) tmp[i][j] = N[i][j] + h * k3[i][j];
      rhs(r + h, tmp, k4);
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
          N[i][j] += h / 6.0 * (k1[i][j] + 2 * k2[i][j] + 2 * k3[i][j] + k4[i][j]);
          if (!std::isfinite(N[i][j]) || std::abs(N[i][j]) > opts.blowup_norm)
            throw std::runtime_error("ray_ode_A: blowup before reaching the node (radius " +
                                     std::to_string(r) + ")");
        }
      r += h;
    }
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) out.at(i, j)[flat] = N[i][j] / rtot;
  });
  return out;
}

std::vector<std::vector<PointRule>> normalize_basepoint(
    const std::vector<std::vector<PointRule>>& coef) {
  const int n = static_cast<int>(coef.size());
  Pt zero{0, 0, 0};
  // L = (I + A(0))^{-1}; new coefficients (I+A_new) = L (I+A)
  double A0[3][3] = {{0, 0, 0}, {0, 0, 0}, {0, 0, 0}};
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) A0[i][j] = coef[i][j](zero);
  double G[3][3];
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) G[i][j] = (i == j ? 1.0 : 0.0) + A0[i][j];
  // invert G (n <= 3) by Gauss-Jordan
  double L[3][3] = {{1, 0, 0}, {0, 1, 0}, {0, 0, 1}};
  for (int c = 0; c < n; ++c) {
    int piv = c;
    for (int r = c + 1; r < n; ++r)
      if (std::abs(G[r][c]) > std::abs(G[piv][c])) piv = r;
    std::swap(G[c], G[piv]);
    std::swap(L[c], L[piv]);
    double d = G[c][c];
    if (std::abs(d) < 1e-12)
      throw std::runtime_error("normalize_basepoint: frame singular at the basepoint");
    for (int k = 0; k < n; ++k) {
      G[c][k] /= d;
      L[c][k] /= d;
    }
    for (int r = 0; r < n; ++r) {
      if (r == c) continue;
      double f = G[r][c];
      for (int k = 0; k < n; ++k) {
        G[r][k] -= f * G[c][k];
        L[r][k] -= f * L[c][k];
      }
    }
  }
  std::vector<std::vector<PointRule>> out(n, std::vector<PointRule>(n));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      std::vector<double> Li(n);
      for (int m = 0; m < n; ++m) Li[m] = L[i][m];
      auto rules = coef;  // captured copy
      out[i][j] = [Li, rules, i, j, n](const Pt& p) {
        double acc = -((i == j) ? 1.0 : 0.0);
        for (int m = 0; m < n; ++m) {
          double am = (m == j ? 1.0 : 0.0) + rules[m][j](p);
          acc += Li[m] * am;
        }
        return acc;
      };
    }
  return out;
}

ScalingResult scaling_prepare(const std::vector<std::vector<PointRule>>& coef, double alpha,
                              double beta, double mu0, double target, const GridSpec& spec) {
  const int n = spec.ndim;
  if (static_cast<int>(coef.size()) != n)
    throw std::invalid_argument("scaling_prepare: coefficient table must be ndim x ndim");
  Pt zero{0, 0, 0};
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (std::abs(coef[i][j](zero)) > 1e-10)
        throw std::invalid_argument("scaling_prepare: basepoint not normalized");

  ScalarField chi1 = radial_cutoff(spec, 1.0 / 3.0, 0.45);
  double hmax = 0;
  for (int a = 0; a < n; ++a) hmax = std::max(hmax, spec.spacing(a));
  const double kappa_floor = 8.0 * hmax;

  ScalingResult out;
  double kappa = mu0;
  while (true) {
    std::vector<FormField> lambdas;
    double total = 0;
    for (int i = 0; i < n; ++i) {
      FormField lam(1, spec);
      FormField dev(1, spec);
      for (int j = 0; j < n; ++j) {
        ScalarField cj = sample_function(spec, [&](const Pt& p) {
          double cv = radial_cutoff_value(p, n, 1.0 / 3.0, 0.45);
          if (cv == 0.0) return 0.0;
          Pt q{0, 0, 0};
          for (int a = 0; a < n; ++a) q[a] = kappa * p[a];
          return cv * coef[i][j](q);
        });
        dev.comp({j}) = cj;
        lam.comp({j}) = cj;
      }
      // lambda = dx^i + deviation
      for (std::size_t p = 0; p < lam.comp({i}).size(); ++p) lam.comp({i})[p] += 1.0;
      total += norm_dyadic(dev, alpha) + norm_dyadic(ext_d(lam), beta - 1.0);
      lambdas.push_back(std::move(lam));
    }
    out.sweep_kappa.push_back(kappa);
    out.sweep_norm.push_back(total);
    if (total < target) {
      out.lambdas = std::move(lambdas);
      out.kappa0 = kappa;
      out.measured = total;
      return out;
    }
    kappa *= 0.5;
    if (kappa < kappa_floor)
      throw std::runtime_error("scaling_prepare: target unreachable above the kappa floor");
  }
}

std::vector<FormField> scaling_lambda_grid(const std::vector<FormField>& theta, double kappa,
                                           const GridSpec& spec) {
  const int n = spec.ndim;
  ScalarField chi1 = radial_cutoff(spec, 1.0 / 3.0, 0.45);
  std::vector<FormField> out;
  for (int i = 0; i < n; ++i) {
    FormField lam(1, spec);
    for (int j = 0; j < n; ++j) {
      ScalarField dev = sample_function(spec, [&](const Pt& p) {
        double cv = radial_cutoff_value(p, n, 1.0 / 3.0, 0.45);
        if (cv == 0.0) return 0.0;
        Pt q{0, 0, 0};
        for (int a = 0; a < n; ++a) q[a] = kappa * p[a];
        double v = interp_cubic(theta[i].comp({j}), q) - (i == j ? 1.0 : 0.0);
        return cv * v;
      });
      lam.comp({j}) = dev;
    }
    for (std::size_t p = 0; p < lam.comp({i}).size(); ++p) lam.comp({i})[p] += 1.0;
    out.push_back(std::move(lam));
  }
  return out;
}

std::vector<FormField> scaling_tau(const std::vector<FormField>& theta, double kappa,
                                   double mu0, const GridSpec& spec) {
  const int n = spec.ndim;
  ScalarField chi0 = radial_cutoff(spec, mu0 / 2.0, 0.9 * mu0);
  std::vector<FormField> out;
  for (int i = 0; i < n; ++i) {
    // rho^i = G * theta-d d(chi0 theta^i), anchored to vanish at 0
    FormField ct(1, spec);
    for (int j = 0; j < n; ++j) ct.comp({j}) = chi0 * theta[i].comp({j});
    FormField rho = newtonian(codifferential(ext_d(ct)), true, nullptr, true);
    Pt zero{0, 0, 0};
    for (int j = 0; j < n; ++j) {
      double v0 = interp_cubic(rho.comp({j}), zero);
      for (std::size_t p = 0; p < rho.comp({j}).size(); ++p) rho.comp({j})[p] -= v0;
    }
    // tau = chi1 (phi_kappa^* rho)/kappa + G * theta-d(d chi1 ^ phi^*(theta - dx))/kappa
    FormField tau(1, spec);
    for (int j = 0; j < n; ++j)
      tau.comp({j}) = sample_function(spec, [&](const Pt& p) {
        double cv = radial_cutoff_value(p, n, 1.0 / 3.0, 0.45);
        if (cv == 0.0) return 0.0;
        Pt q{0, 0, 0};
        for (int a = 0; a < n; ++a) q[a] = kappa * p[a];
        return cv * interp_cubic(rho.comp({j}), q);
      });
    ScalarField chi1 = radial_cutoff(spec, 1.0 / 3.0, 0.45);
    FormField dchi1 = ext_d([&] {
      FormField c0(0, spec);
      c0.comps[0] = chi1;
      return c0;
    }());
    FormField dev(1, spec);
    for (int j = 0; j < n; ++j)
      dev.comp({j}) = sample_function(spec, [&](const Pt& p) {
        Pt q{0, 0, 0};
        for (int a = 0; a < n; ++a) q[a] = kappa * p[a];
        double r = 0;
        for (int a = 0; a < n; ++a) r += q[a] * q[a];
        if (std::sqrt(r) > 0.95 * mu0) return 0.0;  // stay inside the given domain
        return interp_cubic(theta[i].comp({j}), q) - (i == j ? 1.0 : 0.0);
      });
    FormField corr = newtonian(codifferential(wedge(dchi1, dev)), true, nullptr, true);
    out.push_back(tau + corr);
  }
  return out;
}

HarmonicChart harmonic_chart_fields(const MetricFields& metric, const BallMask& mask,
                                    const VecField* seed, double cg_tol) {
  const GridSpec& spec = mask.spec;
  const int n = spec.ndim;
  MatrixField K = metric_weights(metric);
  HarmonicChart out;
  out.psi.assign(n, ScalarField(spec));
  out.psi_disp.assign(n, ScalarField(spec));
  ScalarField zero(spec);
  for (int k = 0; k < n; ++k) {
    ScalarField g = seed ? (*seed)[k]
                         : sample_function(spec, [&](const Pt& p) { return p[k]; });
    SolveStats st;
    out.psi[k] = divform_solve(K, zero, &g, mask, cg_tol, &st);
    out.stats = st;
    ScalarField id = sample_function(spec, [&](const Pt& p) { return p[k]; });
    out.psi_disp[k] = out.psi[k] - id;
  }
  return out;
}

DiffeoGrid harmonic_chart(const MetricFields& metric, const BallMask& mask, const VecField* seed,
                          double cg_tol) {
  HarmonicChart hc = harmonic_chart_fields(metric, mask, seed, cg_tol);
  return make_diffeo(mask.spec, hc.psi_disp);
}

}  // namespace zyg
