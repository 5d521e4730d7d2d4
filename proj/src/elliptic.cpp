#include "zyg/elliptic.hpp"

#include <cmath>

#include "zyg/potential.hpp"

namespace zyg {

BallMask BallMask::make(const GridSpec& spec, double radius) {
  BallMask m;
  m.spec = spec;
  m.radius = radius;
  m.state.assign(spec.node_count(), 0);
  double h = 0;
  for (int a = 0; a < spec.ndim; ++a) h = std::max(h, spec.spacing(a));
  if (radius + 4.0 * h >= spec.half_width)
    throw std::invalid_argument("BallMask: ball too close to the torus seam");
  const double band_hi = radius + 2.0 * h;
  for_nodes(spec, [&](std::size_t flat, const Pt& p) {
    double r2 = 0;
    for (int a = 0; a < spec.ndim; ++a) r2 += p[a] * p[a];
    double r = std::sqrt(r2);
    if (r < radius) {
      m.state[flat] = 1;
      m.inside_list.push_back(flat);
    } else if (r <= band_hi) {
      m.state[flat] = 2;
    }
  });
  if (m.inside_list.empty()) throw std::invalid_argument("BallMask: no interior nodes");
  return m;
}

namespace {

std::array<std::ptrdiff_t, 3> axis_strides(const GridSpec& spec) {
  std::array<std::ptrdiff_t, 3> st{0, 0, 0};
  std::ptrdiff_t s = 1;
  for (int a = spec.ndim - 1; a >= 0; --a) {
    st[a] = s;
    s *= spec.sizes[a];
  }
  return st;
}

// conjugate gradient on the inside node set with optional Jacobi
// preconditioning; x carries boundary values in band entries on input
SolveStats cg_solve(const BallMask& mask,
                    const std::function<void(const ScalarField&, ScalarField&)>& apply_full,
                    const ScalarField& rhs, ScalarField& x, double tol,
                    const std::vector<double>* jacobi) {
  const auto& inside = mask.inside_list;
  const std::size_t m = inside.size();

  ScalarField bnd = x;
  for (std::size_t i : inside) bnd[i] = 0.0;
  ScalarField Abnd(mask.spec);
  apply_full(bnd, Abnd);

  std::vector<double> b(m), xi(m, 0.0), r(m), z(m), p(m), Ap(m);
  double bnorm2 = 0;
  for (std::size_t q = 0; q < m; ++q) {
    b[q] = rhs[inside[q]] - Abnd[inside[q]];
    r[q] = b[q];
    bnorm2 += b[q] * b[q];
  }
  SolveStats stats;
  if (bnorm2 == 0) {
    x = bnd;
    return stats;
  }
  auto precond = [&](const std::vector<double>& rr, std::vector<double>& zz) {
    if (!jacobi) {
      zz = rr;
      return;
    }
    for (std::size_t q = 0; q < m; ++q) zz[q] = rr[q] / (*jacobi)[q];
  };
  precond(r, z);
  p = z;
  double rz = 0;
  for (std::size_t q = 0; q < m; ++q) rz += r[q] * z[q];

  const int max_iter =
      10 * std::max({mask.spec.sizes[0], mask.spec.sizes[1], mask.spec.sizes[2]});
  ScalarField pf = bnd, Apf(mask.spec);
  for (std::size_t i = 0; i < pf.size(); ++i) pf[i] = 0.0;

  double rr2 = bnorm2;
  int it = 0;
  for (; it < max_iter; ++it) {
    if (std::sqrt(rr2 / bnorm2) <= tol) break;
    for (std::size_t q = 0; q < m; ++q) pf[inside[q]] = p[q];
    apply_full(pf, Apf);
    double pAp = 0;
    for (std::size_t q = 0; q < m; ++q) {
      Ap[q] = Apf[inside[q]];
      pAp += p[q] * Ap[q];
    }
    if (!(pAp > 0)) throw std::runtime_error("cg_solve: operator not positive definite");
    double alpha = rz / pAp;
    rr2 = 0;
    for (std::size_t q = 0; q < m; ++q) {
      xi[q] += alpha * p[q];
      r[q] -= alpha * Ap[q];
      rr2 += r[q] * r[q];
    }
    precond(r, z);
    double rz_new = 0;
    for (std::size_t q = 0; q < m; ++q) rz_new += r[q] * z[q];
    double beta = rz_new / rz;
    rz = rz_new;
    for (std::size_t q = 0; q < m; ++q) p[q] = z[q] + beta * p[q];
  }
  if (it >= max_iter) throw std::runtime_error("cg_solve: no convergence in 10*N iterations");
  stats.cg_iters = it;
  stats.rel_residual = std::sqrt(rr2 / bnorm2);
  x = bnd;
  for (std::size_t q = 0; q < m; ++q) x[inside[q]] = xi[q];
  return stats;
}

}  // namespace

ScalarField dirichlet_solve(const ScalarField& f, const ScalarField* g, const BallMask& mask,
                            double cg_tol, SolveStats* stats) {
  require_same_spec(f.spec, mask.spec, "dirichlet_solve");
  const GridSpec& spec = mask.spec;
  const int n = spec.ndim;
  const auto st = axis_strides(spec);
  double invh2[3] = {0, 0, 0};
  for (int a = 0; a < n; ++a) invh2[a] = 1.0 / (spec.spacing(a) * spec.spacing(a));

  auto apply_full = [&](const ScalarField& u, ScalarField& out) {
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = 0.0;
    const double* ud = u.a.data();
    for (std::size_t flat : mask.inside_list) {
      double acc = 0;
      for (int a = 0; a < n; ++a)
        acc += (2.0 * ud[flat] - ud[flat + st[a]] - ud[flat - st[a]]) * invh2[a];
      out[flat] = acc;
    }
  };

  ScalarField x(spec);
  if (g) {
    require_same_spec(g->spec, spec, "dirichlet_solve boundary");
    for (std::size_t i = 0; i < x.size(); ++i)
      if (mask.state[i] != 1) x[i] = (*g)[i];
  }
  SolveStats s = cg_solve(mask, apply_full, f, x, cg_tol, nullptr);
  if (stats) *stats = s;
  return x;
}

MetricFields metric_from_A(const MatrixField& A, bool require_small) {
  if (A.rows != A.cols || A.rows != A.spec.ndim)
    throw std::invalid_argument("metric_from_A: expects an ndim x ndim matrix field");
  const int n = A.rows;
  if (require_small) {
    for (const auto& e : A.e)
      if (sup_norm(e) >= 0.5)
        throw std::invalid_argument("metric_from_A: coefficient matrix not < 1/2 samplewise");
  }
  MatrixField G(n, n, A.spec);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      G.at(i, j) = A.at(i, j);
      if (i == j)
        for (std::size_t p = 0; p < G.at(i, j).size(); ++p) G.at(i, j)[p] += 1.0;
    }
  MetricFields out;
  out.sqrtdet = matrix_det(G);
  for (std::size_t p = 0; p < out.sqrtdet.size(); ++p)
    if (out.sqrtdet[p] <= 0.05) throw std::runtime_error("metric_from_A: near-singular node");
  MatrixField Ginv = invert_matrix_field(G, 0.05);
  out.ginv = MatrixField(n, n, A.spec);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      ScalarField& t = out.ginv.at(i, j);
      for (std::size_t p = 0; p < t.size(); ++p) {
        double acc = 0;
        for (int k = 0; k < n; ++k) acc += Ginv.at(i, k)[p] * Ginv.at(j, k)[p];
        t[p] = acc;
      }
    }
  return out;
}

MatrixField metric_weights(const MetricFields& m) {
  MatrixField K(m.ginv.rows, m.ginv.cols, m.ginv.spec);
  for (int i = 0; i < K.rows; ++i)
    for (int j = 0; j < K.cols; ++j) K.at(i, j) = m.sqrtdet * m.ginv.at(i, j);
  return K;
}

namespace {

// shared stencil body; `flat` must be at least two cells away from the seam
inline double divform_at(const MatrixField& K, const double* u, std::size_t flat, int n,
                         const std::array<std::ptrdiff_t, 3>& st, const double* h) {
  double acc = 0;
  for (int a = 0; a < n; ++a) {
    const std::size_t fp = flat + st[a];
    const std::size_t fm = flat - st[a];
    const double* kaa = K.at(a, a).a.data();
    double kp = 0.5 * (kaa[flat] + kaa[fp]);
    double km = 0.5 * (kaa[fm] + kaa[flat]);
    acc -= (kp * (u[fp] - u[flat]) - km * (u[flat] - u[fm])) / (h[a] * h[a]);
    for (int b = 0; b < n; ++b) {
      if (b == a) continue;
      const double* kab = K.at(a, b).a.data();
      double wp = kab[fp] * (u[fp + st[b]] - u[fp - st[b]]) / (2.0 * h[b]);
      double wm = kab[fm] * (u[fm + st[b]] - u[fm - st[b]]) / (2.0 * h[b]);
      acc -= (wp - wm) / (2.0 * h[a]);
    }
  }
  return acc;
}

}  // namespace

ScalarField divform_apply(const MatrixField& K, const ScalarField& u) {
  require_same_spec(K.spec, u.spec, "divform_apply");
  const GridSpec& spec = u.spec;
  const int n = spec.ndim;
  const auto st = axis_strides(spec);
  double h[3] = {spec.spacing(0), n > 1 ? spec.spacing(1) : 1.0, n > 2 ? spec.spacing(2) : 1.0};
  ScalarField out(spec);

  // wrap-safe generic path on the seam cells, fast path elsewhere
  auto at_wrapped = [&](std::size_t flat) {
    Idx idx = spec.unflat(flat);
    double acc = 0;
    auto stepw = [&](const Idx& base, int axis, int dir) {
      Idx j = base;
      j[axis] = spec.wrap(axis, j[axis] + dir);
      return spec.flat(j);
    };
    for (int a = 0; a < n; ++a) {
      Idx ip = idx, im = idx;
      ip[a] = spec.wrap(a, idx[a] + 1);
      im[a] = spec.wrap(a, idx[a] - 1);
      std::size_t fp = spec.flat(ip), fm = spec.flat(im);
      const ScalarField& kaa = K.at(a, a);
      double kp = 0.5 * (kaa[flat] + kaa[fp]);
      double km = 0.5 * (kaa[fm] + kaa[flat]);
      acc -= (kp * (u[fp] - u[flat]) - km * (u[flat] - u[fm])) / (h[a] * h[a]);
      for (int b = 0; b < n; ++b) {
        if (b == a) continue;
        double wp = K.at(a, b)[fp] * (u[stepw(ip, b, +1)] - u[stepw(ip, b, -1)]) / (2.0 * h[b]);
        double wm = K.at(a, b)[fm] * (u[stepw(im, b, +1)] - u[stepw(im, b, -1)]) / (2.0 * h[b]);
        acc -= (wp - wm) / (2.0 * h[a]);
      }
    }
    return acc;
  };

  for_nodes(spec, [&](std::size_t flat, const Pt&) {
    Idx idx = spec.unflat(flat);
    bool near_seam = false;
    for (int a = 0; a < n; ++a)
      if (idx[a] < 2 || idx[a] >= spec.sizes[a] - 2) near_seam = true;
    out[flat] = near_seam ? at_wrapped(flat) : divform_at(K, u.a.data(), flat, n, st, h);
  });
  return out;
}

ScalarField divflux_apply(const MatrixField& K, const VecField& a) {
  if (static_cast<int>(a.size()) != K.spec.ndim)
    throw std::invalid_argument("divflux_apply: arity mismatch");
  const GridSpec& spec = K.spec;
  const int n = spec.ndim;
  ScalarField out(spec);
  double h[3] = {spec.spacing(0), n > 1 ? spec.spacing(1) : 1.0, n > 2 ? spec.spacing(2) : 1.0};
  for_nodes(spec, [&](std::size_t flat, const Pt&) {
    Idx idx = spec.unflat(flat);
    auto stepw = [&](int axis, int dir) {
      Idx j = idx;
      j[axis] = spec.wrap(axis, j[axis] + dir);
      return spec.flat(j);
    };
    double acc = 0;
    for (int ax = 0; ax < n; ++ax) {
      std::size_t fp = stepw(ax, +1);
      std::size_t fm = stepw(ax, -1);
      const ScalarField& kxx = K.at(ax, ax);
      double kp = 0.5 * (kxx[flat] + kxx[fp]);
      double km = 0.5 * (kxx[fm] + kxx[flat]);
      double axp = 0.5 * (a[ax][flat] + a[ax][fp]);
      double axm = 0.5 * (a[ax][fm] + a[ax][flat]);
      acc -= (kp * axp - km * axm) / h[ax];
      for (int b = 0; b < n; ++b) {
        if (b == ax) continue;
        double wp = K.at(ax, b)[fp] * a[b][fp];
        double wm = K.at(ax, b)[fm] * a[b][fm];
        acc -= (wp - wm) / (2.0 * h[ax]);
      }
    }
    out[flat] = acc;
  });
  return out;
}

ScalarField divform_solve(const MatrixField& K, const ScalarField& f, const ScalarField* g,
                          const BallMask& mask, double cg_tol, SolveStats* stats) {
  require_same_spec(K.spec, mask.spec, "divform_solve");
  const GridSpec& spec = mask.spec;
  const int n = spec.ndim;
  const auto st = axis_strides(spec);
  double h[3] = {spec.spacing(0), n > 1 ? spec.spacing(1) : 1.0, n > 2 ? spec.spacing(2) : 1.0};

  auto apply_full = [&](const ScalarField& u, ScalarField& out) {
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = 0.0;
    const double* ud = u.a.data();
    for (std::size_t flat : mask.inside_list)
      out[flat] = divform_at(K, ud, flat, n, st, h);
  };

  // Jacobi diagonal: the u[flat] coefficient of the staggered diagonal part
  std::vector<double> diag(mask.inside_list.size());
  for (std::size_t q = 0; q < mask.inside_list.size(); ++q) {
    std::size_t flat = mask.inside_list[q];
    double d = 0;
    for (int a = 0; a < n; ++a) {
      const double* kaa = K.at(a, a).a.data();
      double kp = 0.5 * (kaa[flat] + kaa[flat + st[a]]);
      double km = 0.5 * (kaa[flat - st[a]] + kaa[flat]);
      d += (kp + km) / (h[a] * h[a]);
    }
    diag[q] = d;
  }

  ScalarField x(spec);
  if (g) {
    require_same_spec(g->spec, spec, "divform_solve boundary");
    for (std::size_t i = 0; i < x.size(); ++i)
      if (mask.state[i] != 1) x[i] = (*g)[i];
  }
  SolveStats s = cg_solve(mask, apply_full, f, x, cg_tol, &diag);
  if (stats) *stats = s;
  return x;
}

DiffeoGrid solve_R(const MatrixField& A, const BallMask& mask, const SolveROptions& opts,
                   PicardStats* stats) {
  const GridSpec& spec = A.spec;
  const int n = spec.ndim;
  for (const auto& e : A.e)
    if (!supported_in_ball(e, 0.5))
      throw std::runtime_error("solve_R: coefficient matrix not supported in the half-ball");
  MetricFields mf = metric_from_A(A);
  MatrixField K = metric_weights(mf);
  MatrixField ImK(n, n, spec);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      ImK.at(i, j) = -1.0 * K.at(i, j);
      if (i == j)
        for (std::size_t p = 0; p < ImK.at(i, j).size(); ++p) ImK.at(i, j)[p] += 1.0;
    }

  PicardStats ps;
  VecField R(n, ScalarField(spec));
  double scale = std::max(sup_norm(A), 1e-300);

  std::vector<ScalarField> rhs0;
  for (int k = 0; k < n; ++k) {
    VecField ak(n, ScalarField(spec));
    for (int i = 0; i < n; ++i) ak[i] = A.at(i, k);
    rhs0.push_back(divflux_apply(K, ak));
  }

  double prev_step = -1;
  for (int it = 0; it < opts.picard_max_iter; ++it) {
    double step = 0;
    VecField Rnew(n, ScalarField(spec));
    for (int k = 0; k < n; ++k) {
      // laplacian R_new = divflux(K, a^k) + divform(I-K) R  (all positive-operator
      // conventions), i.e. the fixed point solves divform(K) R = divflux(K, a^k)
      ScalarField rhs = rhs0[k] + divform_apply(ImK, R[k]);
      Rnew[k] = dirichlet_solve(rhs, nullptr, mask, opts.cg_tol);
      step = std::max(step, sup_norm(Rnew[k] - R[k]));
    }
    R = Rnew;
    ps.step_norms.push_back(step);
    if (prev_step > 0) {
      ps.ratios.push_back(step / prev_step);
      if (it >= 3 && step > 1.2 * prev_step && step > 1e-6 * scale)
        throw std::runtime_error("solve_R: Picard iteration diverging");
    }
    prev_step = step;
    ps.iterations = it + 1;
    if (step <= opts.picard_tol * scale) break;
  }

  double rnorm = 0;
  for (int k = 0; k < n; ++k) rnorm = std::max(rnorm, sup_norm(R[k]));
  double wres = 0;
  for (int k = 0; k < n; ++k) {
    ScalarField strong = divform_apply(K, R[k]) - rhs0[k];
    ScalarField lifted = dirichlet_solve(strong, nullptr, mask, opts.cg_tol);
    wres = std::max(wres, sup_norm(lifted));
  }
  ps.weak_residual = rnorm > 0 ? wres / rnorm : wres;
  if (stats) *stats = ps;

  return make_diffeo(spec, R, opts.diffeo);
}

double pde_B_residual(const MatrixField& B, const BallMask& mask, double cg_tol) {
  const int n = B.spec.ndim;
  MetricFields mf = metric_from_A(B, false);
  MatrixField K = metric_weights(mf);
  double bnorm = sup_norm(B);
  if (bnorm == 0) return 0.0;
  double res = 0;
  for (int k = 0; k < n; ++k) {
    VecField bk(n, ScalarField(B.spec));
    for (int i = 0; i < n; ++i) bk[i] = B.at(i, k);
    ScalarField strong = divflux_apply(K, bk);
    ScalarField lifted = dirichlet_solve(strong, nullptr, mask, cg_tol);
    res = std::max(res, sup_norm(lifted));
  }
  return res / bnorm;
}

ContractionReport contraction_TB(const MatrixField& B0, const std::vector<FormField>& deta,
                                 const MatrixField& boundaryB, const BallMask& mask,
                                 int max_iter, double cg_tol) {
  const GridSpec& spec = B0.spec;
  const int n = spec.ndim;
  if (static_cast<int>(deta.size()) != n)
    throw std::invalid_argument("contraction_TB: need one d-eta per coordinate");
  const double b0norm = std::max(sup_norm(B0), 1e-300);
  const auto st = axis_strides(spec);
  double h[3] = {spec.spacing(0), n > 1 ? spec.spacing(1) : 1.0, n > 2 ? spec.spacing(2) : 1.0};

  MatrixField fixed(n, n, spec);
  ScalarField zero(spec);
  for (int k = 0; k < n; ++k) {
    FormField tde = codifferential(deta[k]);
    for (int j = 0; j < n; ++j) {
      ScalarField bb(spec);
      for (std::size_t i = 0; i < bb.size(); ++i)
        if (mask.state[i] != 1) bb[i] = boundaryB.at(j, k)[i];
      ScalarField harm = dirichlet_solve(zero, &bb, mask, cg_tol);
      ScalarField dsol = dirichlet_solve(tde.comp({j}), nullptr, mask, cg_tol);
      fixed.at(j, k) = harm + dsol;
    }
  }

  ContractionReport rep;
  MatrixField f(n, n, spec);
  double prev_step = -1;
  for (int it = 0; it < max_iter; ++it) {
    MetricFields mf = metric_from_A(f, false);
    MatrixField K = metric_weights(mf);
    MatrixField Rik(n, n, spec);
    for (int i = 0; i < n; ++i)
      for (int k = 0; k < n; ++k) {
        ScalarField& t = Rik.at(i, k);
        for (std::size_t p = 0; p < t.size(); ++p) {
          double acc = 0;
          for (int j = 0; j < n; ++j)
            acc += (K.at(i, j)[p] - (i == j ? 1.0 : 0.0)) * f.at(j, k)[p];
          t[p] = acc;
        }
      }
    MatrixField fnew(n, n, spec);
    double step = 0;
    for (int k = 0; k < n; ++k)
      for (int j = 0; j < n; ++j) {
        ScalarField w(spec);
        for (std::size_t flat : mask.inside_list) {
          double acc = 0;
          for (int i = 0; i < n; ++i) {
            const double* rik = Rik.at(i, k).a.data();
            if (i == j) {
              acc += (rik[flat + st[i]] - 2.0 * rik[flat] + rik[flat - st[i]]) / (h[i] * h[i]);
            } else {
              const std::size_t fjp = flat + st[j], fjm = flat - st[j];
              double dp = (rik[fjp + st[i]] - rik[fjp - st[i]]) / (2.0 * h[i]);
              double dm = (rik[fjm + st[i]] - rik[fjm - st[i]]) / (2.0 * h[i]);
              acc += (dp - dm) / (2.0 * h[j]);
            }
          }
          w[flat] = acc;
        }
        ScalarField dsol = dirichlet_solve(w, nullptr, mask, cg_tol);
        fnew.at(j, k) = fixed.at(j, k) + dsol;
        for (std::size_t p = 0; p < fnew.at(j, k).size(); ++p)
          if (mask.state[p] == 2) fnew.at(j, k)[p] = boundaryB.at(j, k)[p];
        step = std::max(step, sup_norm(fnew.at(j, k) - f.at(j, k)));
      }
    f = fnew;
    if (prev_step > 0) {
      double ratio = step / prev_step;
      rep.ratios.push_back(ratio);
      if (ratio >= 1.0 && step > 1e-11 * b0norm) rep.contracting = false;
    }
    prev_step = step;
    rep.final_step = step / b0norm;
    if (step <= 1e-12 * b0norm) break;
  }
  rep.fixed_point = f;
  double dist = 0;
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < n; ++k) {
      ScalarField diff = f.at(i, k) - B0.at(i, k);
      double d = 0;
      for (std::size_t p = 0; p < diff.size(); ++p)
        if (mask.state[p] != 0) d = std::max(d, std::abs(diff[p]));
      dist = std::max(dist, d);
    }
  rep.recovery = dist / b0norm;
  return rep;
}

}  // namespace zyg
