#include "zyg/exterior.hpp"

#include <algorithm>
#include <cmath>

namespace zyg {

namespace {

// sign and sorted target of prepending axis a to a sorted multi-index
struct Insert {
  std::vector<int> mi;
  double sgn;
  bool zero;
};

Insert insert_axis(int a, const std::vector<int>& J) {
  Insert r;
  r.zero = false;
  r.sgn = 1.0;
  r.mi.reserve(J.size() + 1);
  std::size_t pos = 0;
  while (pos < J.size() && J[pos] < a) ++pos;
  if (pos < J.size() && J[pos] == a) {
    r.zero = true;
    return r;
  }
  r.mi.assign(J.begin(), J.begin() + pos);
  r.mi.push_back(a);
  r.mi.insert(r.mi.end(), J.begin() + pos, J.end());
  if (pos % 2 == 1) r.sgn = -1.0;
  return r;
}

}  // namespace

FormField ext_d(const FormField& w) {
  if (w.degree >= w.spec.ndim)
    throw std::invalid_argument("ext_d: degree would exceed the dimension");
  FormField out(w.degree + 1, w.spec);
  for (std::size_t p = 0; p < w.comps.size(); ++p) {
    const auto& J = w.indices[p];
    for (int a = 0; a < w.spec.ndim; ++a) {
      Insert ins = insert_axis(a, J);
      if (ins.zero) continue;
      ScalarField df = spectral_deriv(w.comps[p], a);
      ScalarField& tgt = out.comp(ins.mi);
      for (std::size_t i = 0; i < tgt.size(); ++i) tgt[i] += ins.sgn * df[i];
    }
  }
  return out;
}

FormField wedge(const FormField& s, const FormField& w) {
  require_same_spec(s.spec, w.spec, "wedge");
  if (s.degree + w.degree > s.spec.ndim) throw std::invalid_argument("wedge: degree overflow");
  FormField out(s.degree + w.degree, s.spec);
  for (std::size_t p = 0; p < s.comps.size(); ++p)
    for (std::size_t q = 0; q < w.comps.size(); ++q) {
      std::vector<int> tuple = s.indices[p];
      tuple.insert(tuple.end(), w.indices[q].begin(), w.indices[q].end());
      SignedPos sp = antisym_lookup(out, tuple);
      if (sp.pos < 0) continue;
      ScalarField& tgt = out.comps[sp.pos];
      const ScalarField& a = s.comps[p];
      const ScalarField& b = w.comps[q];
      for (std::size_t i = 0; i < tgt.size(); ++i) tgt[i] += sp.sgn * a[i] * b[i];
    }
  return out;
}

FormField interior(const VecField& Y, const FormField& w) {
  if (w.degree < 1) throw std::invalid_argument("interior: degree must be >= 1");
  if (static_cast<int>(Y.size()) != w.spec.ndim)
    throw std::invalid_argument("interior: vector field arity mismatch");
  FormField out(w.degree - 1, w.spec);
  for (std::size_t p = 0; p < out.comps.size(); ++p) {
    const auto& J = out.indices[p];
    for (int a = 0; a < w.spec.ndim; ++a) {
      std::vector<int> tuple;
      tuple.push_back(a);
      tuple.insert(tuple.end(), J.begin(), J.end());
      SignedPos sp = antisym_lookup(w, tuple);
      if (sp.pos < 0) continue;
      const ScalarField& wa = w.comps[sp.pos];
      const ScalarField& ya = Y[a];
      ScalarField& tgt = out.comps[p];
      for (std::size_t i = 0; i < tgt.size(); ++i) tgt[i] += sp.sgn * ya[i] * wa[i];
    }
  }
  return out;
}

FormField lie_derivative(const VecField& Y, const FormField& w) {
  if (w.degree == 0) {
    FormField out(0, w.spec);
    out.comps[0] = vf_apply(Y, w.comps[0]);
    return out;
  }
  FormField a = ext_d(interior(Y, w));
  if (w.degree == w.spec.ndim) return a;
  return a + interior(Y, ext_d(w));
}

FormField codifferential(const FormField& w) {
  if (w.degree < 1) throw std::invalid_argument("codifferential: degree must be >= 1");
  FormField out(w.degree - 1, w.spec);
  for (std::size_t p = 0; p < w.comps.size(); ++p) {
    const auto& I = w.indices[p];
    for (std::size_t l = 0; l < I.size(); ++l) {
      ScalarField df = spectral_deriv(w.comps[p], I[l]);
      std::vector<int> rest;
      for (std::size_t r = 0; r < I.size(); ++r)
        if (r != l) rest.push_back(I[r]);
      double sgn = ((l + 1) % 2 == 0) ? 1.0 : -1.0;  // (-1)^l with l counted from 1
      ScalarField& tgt = out.comp(rest);
      for (std::size_t i = 0; i < tgt.size(); ++i) tgt[i] += sgn * df[i];
    }
  }
  return out;
}

FormField hodge_laplacian(const FormField& w) {
  FormField out(w.degree, w.spec);
  if (w.degree > 0) out = out + ext_d(codifferential(w));
  if (w.degree < w.spec.ndim) out = out + codifferential(ext_d(w));
  return out;
}

ScalarField pair_form_vf(const FormField& w, const VecField& Y) {
  if (w.degree != 1) throw std::invalid_argument("pair_form_vf: needs a 1-form");
  ScalarField out(w.spec);
  for (int a = 0; a < w.spec.ndim; ++a) {
    const ScalarField& wa = w.comp({a});
    const ScalarField& ya = Y[a];
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += wa[i] * ya[i];
  }
  return out;
}

ScalarField vf_apply(const VecField& Y, const ScalarField& f) {
  ScalarField out(f.spec);
  for (int a = 0; a < f.spec.ndim; ++a) {
    ScalarField df = spectral_deriv(f, a);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += Y[a][i] * df[i];
  }
  return out;
}

ScalarField matrix_det(const MatrixField& m) {
  if (m.rows != m.cols) throw std::invalid_argument("matrix_det: square only");
  const int n = m.rows;
  ScalarField det(m.spec);
  for (std::size_t i = 0; i < det.size(); ++i) {
    if (n == 1) {
      det[i] = m.at(0, 0)[i];
    } else if (n == 2) {
      det[i] = m.at(0, 0)[i] * m.at(1, 1)[i] - m.at(0, 1)[i] * m.at(1, 0)[i];
    } else {
      double a = m.at(0, 0)[i], b = m.at(0, 1)[i], c = m.at(0, 2)[i];
      double d = m.at(1, 0)[i], e = m.at(1, 1)[i], f = m.at(1, 2)[i];
      double g = m.at(2, 0)[i], h = m.at(2, 1)[i], k = m.at(2, 2)[i];
      det[i] = a * (e * k - f * h) - b * (d * k - f * g) + c * (d * h - e * g);
    }
  }
  return det;
}

MatrixField invert_matrix_field(const MatrixField& m, double det_floor) {
  if (m.rows != m.cols) throw std::invalid_argument("invert_matrix_field: square only");
  const int n = m.rows;
  MatrixField out(n, n, m.spec);
  ScalarField det = matrix_det(m);
  for (std::size_t i = 0; i < det.size(); ++i)
    if (std::abs(det[i]) <= det_floor)
      throw std::runtime_error("invert_matrix_field: near-singular node");
  for (std::size_t i = 0; i < det.size(); ++i) {
    const double id = 1.0 / det[i];
    if (n == 1) {
      out.at(0, 0)[i] = id;
    } else if (n == 2) {
      out.at(0, 0)[i] = m.at(1, 1)[i] * id;
      out.at(0, 1)[i] = -m.at(0, 1)[i] * id;
      out.at(1, 0)[i] = -m.at(1, 0)[i] * id;
      out.at(1, 1)[i] = m.at(0, 0)[i] * id;
    } else {
      double a = m.at(0, 0)[i], b = m.at(0, 1)[i], c = m.at(0, 2)[i];
      double d = m.at(1, 0)[i], e = m.at(1, 1)[i], f = m.at(1, 2)[i];
      double g = m.at(2, 0)[i], h = m.at(2, 1)[i], k = m.at(2, 2)[i];
      out.at(0, 0)[i] = (e * k - f * h) * id;
      out.at(0, 1)[i] = (c * h - b * k) * id;
      out.at(0, 2)[i] = (b * f - c * e) * id;
      out.at(1, 0)[i] = (f * g - d * k) * id;
      out.at(1, 1)[i] = (a * k - c * g) * id;
      out.at(1, 2)[i] = (c * d - a * f) * id;
      out.at(2, 0)[i] = (d * h - e * g) * id;
      out.at(2, 1)[i] = (b * g - a * h) * id;
      out.at(2, 2)[i] = (a * e - b * d) * id;
    }
  }
  return out;
}

std::vector<FormField> dual_coframe(const Frame& X) {
  const int n = X.spec.ndim;
  if (X.q < n) throw std::invalid_argument("dual_coframe: frame has fewer fields than ndim");
  MatrixField m(n, n, X.spec);
  for (int a = 0; a < n; ++a)
    for (int j = 0; j < n; ++j) m.at(a, j) = X.vfs[j][a];
  MatrixField inv = invert_matrix_field(m, 0.05);
  std::vector<FormField> coframe;
  for (int i = 0; i < n; ++i) {
    FormField lam(1, X.spec);
    for (int a = 0; a < n; ++a) lam.comp({a}) = inv.at(i, a);
    coframe.push_back(std::move(lam));
  }
  return coframe;
}

std::vector<ScalarField> structure_coefficients(const std::vector<FormField>& coframe,
                                                const Frame& X) {
  // commutator convention: c_ij^k = <lambda^k, [X_i, X_j]> = d lambda^k(X_j, X_i),
  // the sign that matches [X_i, X_j] = sum_k c_ij^k X_k
  const int n = X.spec.ndim;
  std::vector<ScalarField> c(static_cast<std::size_t>(n) * n * n, ScalarField(X.spec));
  auto at = [&](int i, int j, int k) -> ScalarField& {
    return c[(static_cast<std::size_t>(i) * n + j) * n + k];
  };
  for (int k = 0; k < n; ++k) {
    FormField dl = ext_d(coframe[k]);
    for (int i = 0; i < n; ++i) {
      FormField ii = interior(X.vfs[i], dl);
      for (int j = i + 1; j < n; ++j) {
        ScalarField cij = -1.0 * pair_form_vf(ii, X.vfs[j]);
        at(i, j, k) = cij;
        at(j, i, k) = -1.0 * cij;
      }
    }
  }
  return c;
}

}  // namespace zyg
