#include "zyg/maps.hpp"

#include <cmath>

namespace zyg {

namespace {

inline void lagrange_weights(double t, double w[4]) {
  // nodes at offsets -1, 0, 1, 2; t in [0,1)
  w[0] = -t * (t - 1.0) * (t - 2.0) / 6.0;
  w[1] = (t + 1.0) * (t - 1.0) * (t - 2.0) / 2.0;
  w[2] = -(t + 1.0) * t * (t - 2.0) / 2.0;
  w[3] = (t + 1.0) * t * (t - 1.0) / 6.0;
}

}  // namespace

double interp_cubic(const ScalarField& f, const Pt& p) {
  const GridSpec& s = f.spec;
  int base[3];
  double w[3][4];
  for (int a = 0; a < s.ndim; ++a) {
    double u = (p[a] + s.half_width) / s.spacing(a);
    double fl = std::floor(u);
    double t = u - fl;
    base[a] = static_cast<int>(fl);
    lagrange_weights(t, w[a]);
  }
  double acc = 0;
  if (s.ndim == 1) {
    for (int i = 0; i < 4; ++i) acc += w[0][i] * f[s.wrap(0, base[0] + i - 1)];
    return acc;
  }
  if (s.ndim == 2) {
    const int n1 = s.sizes[1];
    for (int i = 0; i < 4; ++i) {
      const double* row = f.a.data() + static_cast<std::size_t>(s.wrap(0, base[0] + i - 1)) * n1;
      double r = 0;
      for (int j = 0; j < 4; ++j) r += w[1][j] * row[s.wrap(1, base[1] + j - 1)];
      acc += w[0][i] * r;
    }
    return acc;
  }
  for (int i = 0; i < 4; ++i) {
    double ri = 0;
    for (int j = 0; j < 4; ++j) {
      double rj = 0;
      for (int k = 0; k < 4; ++k) {
        Idx idx{s.wrap(0, base[0] + i - 1), s.wrap(1, base[1] + j - 1), s.wrap(2, base[2] + k - 1)};
        rj += w[2][k] * f.at(idx);
      }
      ri += w[1][j] * rj;
    }
    acc += w[0][i] * ri;
  }
  return acc;
}

Pt DiffeoGrid::apply_F(const Pt& x) const {
  Pt y = x;
  for (int a = 0; a < spec.ndim; ++a) y[a] += interp_cubic(R[a], x);
  return y;
}

Pt DiffeoGrid::apply_phi(const Pt& y) const {
  Pt x = y;
  for (int a = 0; a < spec.ndim; ++a) x[a] += interp_cubic(phi_disp[a], y);
  return x;
}

DiffeoGrid identity_diffeo(const GridSpec& spec) {
  DiffeoGrid d;
  d.spec = spec;
  d.R.assign(spec.ndim, ScalarField(spec));
  d.phi_disp.assign(spec.ndim, ScalarField(spec));
  d.jac_phi = MatrixField(spec.ndim, spec.ndim, spec);
  for (int i = 0; i < spec.ndim; ++i)
    for (std::size_t p = 0; p < d.jac_phi.at(i, i).size(); ++p) d.jac_phi.at(i, i)[p] = 1.0;
  return d;
}

DiffeoGrid make_diffeo(const GridSpec& spec, const VecField& R, const DiffeoOptions& opts) {
  const int n = spec.ndim;
  if (static_cast<int>(R.size()) != n) throw std::invalid_argument("make_diffeo: arity mismatch");
  DiffeoGrid d;
  d.spec = spec;
  d.R = R;

  // grad R, spectral; also the forward Jacobian determinant check
  std::vector<std::vector<ScalarField>> gradR(n);  // gradR[i][j] = d R^i / d x^j
  for (int i = 0; i < n; ++i) gradR[i] = spectral_gradient(R[i]);
  {
    MatrixField jacF(n, n, spec);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        jacF.at(i, j) = gradR[i][j];
        if (i == j)
          for (std::size_t p = 0; p < jacF.at(i, j).size(); ++p) jacF.at(i, j)[p] += 1.0;
      }
    ScalarField det = matrix_det(jacF);
    for (std::size_t p = 0; p < det.size(); ++p)
      if (det[p] <= opts.det_floor)
        throw std::runtime_error("make_diffeo: forward Jacobian below determinant floor");
  }

  const double tol = opts.newton_tol_rel * spec.half_width;
  d.phi_disp.assign(n, ScalarField(spec));

  for_nodes(spec, [&](std::size_t flat, const Pt& y) {
    Pt x = y;
    double err = 0;
    for (int it = 0; it < opts.newton_max_iter; ++it) {
      Pt res;  // F(x) - y
      err = 0;
      for (int a = 0; a < n; ++a) {
        res[a] = x[a] + interp_cubic(R[a], x) - y[a];
        err = std::max(err, std::abs(res[a]));
      }
      if (err <= tol) break;
      // J = I + grad R at x
      double J[3][3] = {{1, 0, 0}, {0, 1, 0}, {0, 0, 1}};
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) J[i][j] = (i == j ? 1.0 : 0.0) + interp_cubic(gradR[i][j], x);
      // solve J * step = res by small Gaussian elimination
      double step[3] = {res[0], res[1], res[2]};
      {
        double m[3][4];
        for (int i = 0; i < n; ++i) {
          for (int j = 0; j < n; ++j) m[i][j] = J[i][j];
          m[i][n] = step[i];
        }
        for (int c = 0; c < n; ++c) {
          int piv = c;
          for (int r = c + 1; r < n; ++r)
            if (std::abs(m[r][c]) > std::abs(m[piv][c])) piv = r;
          for (int k = c; k <= n; ++k) std::swap(m[c][k], m[piv][k]);
          if (std::abs(m[c][c]) < 1e-14)
            throw std::runtime_error("make_diffeo: Newton Jacobian singular");
          for (int r = 0; r < n; ++r) {
            if (r == c) continue;
            double fmul = m[r][c] / m[c][c];
            for (int k = c; k <= n; ++k) m[r][k] -= fmul * m[c][k];
          }
        }
        for (int i = 0; i < n; ++i) step[i] = m[i][n] / m[i][i];
      }
      double damp = 1.0;
      for (int i = 0; i < n; ++i)
        if (std::abs(step[i]) > 0.25 * spec.half_width) damp = 0.5;
      for (int i = 0; i < n; ++i) x[i] -= damp * step[i];
    }
    if (err > opts.inversion_check_rel * spec.half_width)
      throw std::runtime_error("make_diffeo: Newton inversion failed to converge");
    for (int a = 0; a < n; ++a) d.phi_disp[a][flat] = x[a] - y[a];
  });

  d.jac_phi = MatrixField(n, n, spec);
  for (int i = 0; i < n; ++i) {
    auto g = spectral_gradient(d.phi_disp[i]);
    for (int j = 0; j < n; ++j) {
      d.jac_phi.at(i, j) = g[j];
      if (i == j)
        for (std::size_t p = 0; p < d.jac_phi.at(i, j).size(); ++p) d.jac_phi.at(i, j)[p] += 1.0;
    }
  }
  return d;
}

namespace {

FormField pushforward_impl(const DiffeoGrid& D, int degree,
                           const std::function<double(int comp, const Pt&)>& eval,
                           const std::vector<std::vector<int>>& src_indices) {
  const GridSpec& spec = D.spec;
  const int n = spec.ndim;
  FormField out(degree, spec);
  if (degree == 0) {
    for_nodes(spec, [&](std::size_t flat, const Pt& y) {
      out.comps[0][flat] = eval(0, D.apply_phi(y));
    });
    return out;
  }
  for_nodes(spec, [&](std::size_t flat, const Pt& y) {
    Pt x = D.apply_phi(y);
    double jac[3][3];
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) jac[i][j] = D.jac_phi.at(i, j)[flat];
    std::vector<double> vals(src_indices.size());
    for (std::size_t c = 0; c < src_indices.size(); ++c) vals[c] = eval(static_cast<int>(c), x);
    for (std::size_t q = 0; q < out.indices.size(); ++q) {
      const auto& J = out.indices[q];
      double acc = 0;
      for (std::size_t c = 0; c < src_indices.size(); ++c) {
        const auto& I = src_indices[c];
        // minor det of dPhi^{I} / dy^{J}
        double det;
        if (degree == 1) {
          det = jac[I[0]][J[0]];
        } else if (degree == 2) {
          det = jac[I[0]][J[0]] * jac[I[1]][J[1]] - jac[I[0]][J[1]] * jac[I[1]][J[0]];
        } else {
          det = jac[I[0]][J[0]] * (jac[I[1]][J[1]] * jac[I[2]][J[2]] - jac[I[1]][J[2]] * jac[I[2]][J[1]]) -
                jac[I[0]][J[1]] * (jac[I[1]][J[0]] * jac[I[2]][J[2]] - jac[I[1]][J[2]] * jac[I[2]][J[0]]) +
                jac[I[0]][J[2]] * (jac[I[1]][J[0]] * jac[I[2]][J[1]] - jac[I[1]][J[1]] * jac[I[2]][J[0]]);
        }
        acc += vals[c] * det;
      }
      out.comps[q][flat] = acc;
    }
  });
  return out;
}

}  // namespace

FormField pushforward_form(const DiffeoGrid& D, const FormField& w) {
  require_same_spec(D.spec, w.spec, "pushforward_form");
  return pushforward_impl(
      D, w.degree,
      [&](int c, const Pt& x) { return interp_cubic(w.comps[c], x); }, w.indices);
}

FormField pushforward_form_rules(const DiffeoGrid& D, int degree,
                                 const std::vector<PointRule>& comp_rules) {
  auto idx = multi_indices(D.spec.ndim, degree);
  if (idx.size() != comp_rules.size())
    throw std::invalid_argument("pushforward_form_rules: component count mismatch");
  return pushforward_impl(
      D, degree, [&](int c, const Pt& x) { return comp_rules[c](x); }, idx);
}

namespace {

VecField pullback_impl(const DiffeoGrid& D,
                       const std::function<double(int comp, const Pt&)>& eval) {
  const GridSpec& spec = D.spec;
  const int n = spec.ndim;
  // (grad F)^{-1} with grad F spectral from R
  std::vector<std::vector<ScalarField>> gradR(n);
  for (int i = 0; i < n; ++i) gradR[i] = spectral_gradient(D.R[i]);
  MatrixField jacF(n, n, spec);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      jacF.at(i, j) = gradR[i][j];
      if (i == j)
        for (std::size_t p = 0; p < jacF.at(i, j).size(); ++p) jacF.at(i, j)[p] += 1.0;
    }
  MatrixField inv = invert_matrix_field(jacF, 0.1);
  VecField out(n, ScalarField(spec));
  for_nodes(spec, [&](std::size_t flat, const Pt& x) {
    Pt y = x;
    for (int a = 0; a < n; ++a) y[a] += D.R[a][flat];
    double Xy[3] = {0, 0, 0};
    for (int a = 0; a < n; ++a) Xy[a] = eval(a, y);
    for (int i = 0; i < n; ++i) {
      double acc = 0;
      for (int a = 0; a < n; ++a) acc += inv.at(i, a)[flat] * Xy[a];
      out[i][flat] = acc;
    }
  });
  return out;
}

}  // namespace

VecField pullback_vf(const DiffeoGrid& D, const VecField& X) {
  return pullback_impl(D, [&](int a, const Pt& y) { return interp_cubic(X[a], y); });
}

VecField pullback_vf_rules(const DiffeoGrid& D, const std::vector<PointRule>& comp_rules) {
  if (static_cast<int>(comp_rules.size()) != D.spec.ndim)
    throw std::invalid_argument("pullback_vf_rules: arity mismatch");
  return pullback_impl(D, [&](int a, const Pt& y) { return comp_rules[a](y); });
}

}  // namespace zyg
