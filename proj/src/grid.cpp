#include "zyg/grid.hpp"

#include <algorithm>
#include <cmath>

namespace zyg {

static bool is_pow2(int n) { return n >= 1 && (n & (n - 1)) == 0; }

static void validate(const GridSpec& s) {
  if (s.ndim < 1 || s.ndim > 3) throw std::invalid_argument("GridSpec: ndim must be 1, 2 or 3");
  if (!(s.half_width > 0)) throw std::invalid_argument("GridSpec: half_width must be positive");
  for (int a = 0; a < s.ndim; ++a) {
    if (!is_pow2(s.sizes[a]) || s.sizes[a] < 16)
      throw std::invalid_argument("GridSpec: sizes must be powers of two >= 16");
  }
}

GridSpec GridSpec::make(int ndim, int size, double half_width) {
  GridSpec s;
  s.ndim = ndim;
  s.half_width = half_width;
  for (int a = 0; a < ndim; ++a) s.sizes[a] = size;
  validate(s);
  return s;
}

GridSpec GridSpec::make(const std::vector<int>& sizes, double half_width) {
  GridSpec s;
  s.ndim = static_cast<int>(sizes.size());
  s.half_width = half_width;
  for (int a = 0; a < s.ndim && a < 3; ++a) s.sizes[a] = sizes[a];
  validate(s);
  return s;
}

void for_nodes(const GridSpec& spec, const std::function<void(std::size_t, const Pt&)>& fn) {
  Idx idx{0, 0, 0};
  const std::size_t n = spec.node_count();
  for (std::size_t f = 0; f < n; ++f) {
    fn(f, spec.node(idx));
    for (int a = spec.ndim - 1; a >= 0; --a) {
      if (++idx[a] < spec.sizes[a]) break;
      idx[a] = 0;
    }
  }
}

ScalarField sample_function(const GridSpec& spec, const PointRule& f) {
  ScalarField out(spec);
  for_nodes(spec, [&](std::size_t i, const Pt& p) { out[i] = f(p); });
  assert_finite(out, "sample_function");
  return out;
}

void require_same_spec(const GridSpec& a, const GridSpec& b, const char* where) {
  if (a != b) throw std::invalid_argument(std::string(where) + ": grid specs differ");
}

void assert_finite(const ScalarField& f, const char* where) {
  for (double v : f.a)
    if (!std::isfinite(v)) throw std::runtime_error(std::string(where) + ": non-finite sample");
}

ScalarField operator+(const ScalarField& f, const ScalarField& g) {
  require_same_spec(f.spec, g.spec, "operator+");
  ScalarField out(f.spec);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = f[i] + g[i];
  return out;
}

ScalarField operator-(const ScalarField& f, const ScalarField& g) {
  require_same_spec(f.spec, g.spec, "operator-");
  ScalarField out(f.spec);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = f[i] - g[i];
  return out;
}

ScalarField operator*(const ScalarField& f, const ScalarField& g) {
  require_same_spec(f.spec, g.spec, "operator*");
  ScalarField out(f.spec);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = f[i] * g[i];
  return out;
}

ScalarField operator*(double c, const ScalarField& f) {
  ScalarField out(f.spec);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = c * f[i];
  return out;
}

ScalarField& operator+=(ScalarField& f, const ScalarField& g) {
  require_same_spec(f.spec, g.spec, "operator+=");
  for (std::size_t i = 0; i < f.size(); ++i) f[i] += g[i];
  return f;
}

ScalarField& operator-=(ScalarField& f, const ScalarField& g) {
  require_same_spec(f.spec, g.spec, "operator-=");
  for (std::size_t i = 0; i < f.size(); ++i) f[i] -= g[i];
  return f;
}

ScalarField& operator*=(ScalarField& f, double c) {
  for (std::size_t i = 0; i < f.size(); ++i) f[i] *= c;
  return f;
}

double sup_norm(const ScalarField& f) {
  double m = 0;
  for (double v : f.a) m = std::max(m, std::abs(v));
  return m;
}

double mean(const ScalarField& f) {
  double s = 0;
  for (double v : f.a) s += v;
  return s / static_cast<double>(f.size());
}

double radial_cutoff_value(const Pt& p, int ndim, double r_plateau, double r_zero) {
  double r2 = 0;
  for (int a = 0; a < ndim; ++a) r2 += p[a] * p[a];
  double r = std::sqrt(r2);
  if (r <= r_plateau) return 1.0;
  if (r >= r_zero) return 0.0;
  double t = (r - r_plateau) / (r_zero - r_plateau);
  double sa = std::exp(-1.0 / t);
  double sb = std::exp(-1.0 / (1.0 - t));
  return sb / (sa + sb);
}

ScalarField radial_cutoff(const GridSpec& spec, double r_plateau, double r_zero) {
  return sample_function(spec, [&](const Pt& p) {
    return radial_cutoff_value(p, spec.ndim, r_plateau, r_zero);
  });
}

double radial_taper_value(const Pt& p, int ndim, double r_plateau, double r_zero) {
  double r2 = 0;
  for (int a = 0; a < ndim; ++a) r2 += p[a] * p[a];
  double r = std::sqrt(r2);
  if (r <= r_plateau) return 1.0;
  if (r >= r_zero) return 0.0;
  double t = (r - r_plateau) / (r_zero - r_plateau);
  return 1.0 - t * t * t * (10.0 + t * (-15.0 + 6.0 * t));
}

ScalarField radial_taper(const GridSpec& spec, double r_plateau, double r_zero) {
  return sample_function(spec, [&](const Pt& p) {
    return radial_taper_value(p, spec.ndim, r_plateau, r_zero);
  });
}

int binom(int n, int k) {
  if (k < 0 || k > n) return 0;
  int r = 1;
  for (int i = 0; i < k; ++i) r = r * (n - i) / (i + 1);
  return r;
}

std::vector<std::vector<int>> multi_indices(int n, int k) {
  std::vector<std::vector<int>> out;
  if (k == 0) {
    out.push_back({});
    return out;
  }
  std::vector<int> cur(k);
  std::function<void(int, int)> rec = [&](int start, int depth) {
    if (depth == k) {
      out.push_back(cur);
      return;
    }
    for (int i = start; i < n; ++i) {
      cur[depth] = i;
      rec(i + 1, depth + 1);
    }
  };
  rec(0, 0);
  return out;
}

FormField::FormField(int k, const GridSpec& s) : degree(k), spec(s) {
  if (k < 0 || k > s.ndim)
    throw std::invalid_argument("FormField: degree must lie in 0..ndim");
  indices = multi_indices(s.ndim, k);
  comps.assign(indices.size(), ScalarField(s));
}

int FormField::comp_pos(const std::vector<int>& mi) const {
  for (std::size_t p = 0; p < indices.size(); ++p)
    if (indices[p] == mi) return static_cast<int>(p);
  return -1;
}

ScalarField& FormField::comp(const std::vector<int>& mi) {
  int p = comp_pos(mi);
  if (p < 0) throw std::invalid_argument("FormField::comp: no such multi-index");
  return comps[p];
}

const ScalarField& FormField::comp(const std::vector<int>& mi) const {
  int p = comp_pos(mi);
  if (p < 0) throw std::invalid_argument("FormField::comp: no such multi-index");
  return comps[p];
}

FormField operator+(const FormField& f, const FormField& g) {
  if (f.degree != g.degree) throw std::invalid_argument("form degrees differ");
  FormField out(f.degree, f.spec);
  for (std::size_t p = 0; p < out.comps.size(); ++p) out.comps[p] = f.comps[p] + g.comps[p];
  return out;
}

FormField operator-(const FormField& f, const FormField& g) {
  if (f.degree != g.degree) throw std::invalid_argument("form degrees differ");
  FormField out(f.degree, f.spec);
  for (std::size_t p = 0; p < out.comps.size(); ++p) out.comps[p] = f.comps[p] - g.comps[p];
  return out;
}

FormField operator*(double c, const FormField& f) {
  FormField out(f.degree, f.spec);
  for (std::size_t p = 0; p < out.comps.size(); ++p) out.comps[p] = c * f.comps[p];
  return out;
}

double sup_norm(const FormField& f) {
  double m = 0;
  for (const auto& c : f.comps) m = std::max(m, sup_norm(c));
  return m;
}

SignedPos antisym_lookup(const FormField& w, std::vector<int> tuple) {
  double sgn = 1.0;
  // insertion sort, tracking the permutation sign
  for (std::size_t i = 1; i < tuple.size(); ++i) {
    for (std::size_t j = i; j > 0 && tuple[j - 1] > tuple[j]; --j) {
      std::swap(tuple[j - 1], tuple[j]);
      sgn = -sgn;
    }
  }
  for (std::size_t i = 1; i < tuple.size(); ++i)
    if (tuple[i] == tuple[i - 1]) return {-1, 0.0};
  return {w.comp_pos(tuple), sgn};
}

MatrixField::MatrixField(int r, int c, const GridSpec& s) : rows(r), cols(c), spec(s) {
  e.assign(static_cast<std::size_t>(r) * c, ScalarField(s));
}

double sup_norm(const MatrixField& m) {
  double v = 0;
  for (const auto& c : m.e) v = std::max(v, sup_norm(c));
  return v;
}

Frame::Frame(int q_, const GridSpec& s) : q(q_), spec(s) {
  vfs.assign(q, std::vector<ScalarField>(s.ndim, ScalarField(s)));
}

void Frame::check_c_antisymmetry(double rel_tol) const {
  if (!has_c) return;
  double mag = 0;
  for (const auto& f : c) mag = std::max(mag, sup_norm(f));
  if (mag == 0) return;
  for (int i = 0; i < q; ++i)
    for (int j = 0; j < q; ++j)
      for (int k = 0; k < q; ++k) {
        const auto& cij = cijk(i, j, k);
        const auto& cji = cijk(j, i, k);
        for (std::size_t p = 0; p < cij.size(); ++p)
          if (std::abs(cij[p] + cji[p]) > rel_tol * mag)
            throw std::runtime_error("Frame: structure coefficients not antisymmetric");
      }
}

}  // namespace zyg
