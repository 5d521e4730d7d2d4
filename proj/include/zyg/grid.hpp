#pragma once

// Uniform periodic grids on the torus [-L, L)^n and the field containers
// used by every other component: scalar fields, differential forms given
// by their components on sorted multi-indices, frames of vector fields,
// and matrix-valued fields.

#include <array>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace zyg {

using Pt = std::array<double, 3>;
using Idx = std::array<int, 3>;

struct GridSpec {
  int ndim = 0;
  std::array<int, 3> sizes{1, 1, 1};  // entries beyond ndim stay 1
  double half_width = 2.0;            // L; the domain is [-L, L)^ndim

  static GridSpec make(int ndim, int size, double half_width = 2.0);
  static GridSpec make(const std::vector<int>& sizes, double half_width = 2.0);

  double spacing(int axis) const { return 2.0 * half_width / sizes[axis]; }
  std::size_t node_count() const {
    std::size_t n = 1;
    for (int a = 0; a < ndim; ++a) n *= static_cast<std::size_t>(sizes[a]);
    return n;
  }
  // node coordinates are -L + i*h (cell-corner convention)
  double coord(int axis, int i) const { return -half_width + spacing(axis) * i; }
  Pt node(const Idx& idx) const {
    Pt p{0, 0, 0};
    for (int a = 0; a < ndim; ++a) p[a] = coord(a, idx[a]);
    return p;
  }
  std::size_t flat(const Idx& idx) const {
    std::size_t f = 0;
    for (int a = 0; a < ndim; ++a) f = f * sizes[a] + static_cast<std::size_t>(idx[a]);
    return f;
  }
  Idx unflat(std::size_t f) const {
    Idx idx{0, 0, 0};
    for (int a = ndim - 1; a >= 0; --a) {
      idx[a] = static_cast<int>(f % sizes[a]);
      f /= sizes[a];
    }
    return idx;
  }
  int wrap(int axis, int i) const {
    int n = sizes[axis];
    i %= n;
    return i < 0 ? i + n : i;
  }
  bool operator==(const GridSpec& o) const {
    return ndim == o.ndim && sizes == o.sizes && half_width == o.half_width;
  }
  bool operator!=(const GridSpec& o) const { return !(*this == o); }
};

struct ScalarField {
  GridSpec spec;
  std::vector<double> a;

  ScalarField() = default;
  explicit ScalarField(const GridSpec& s, double fill = 0.0)
      : spec(s), a(s.node_count(), fill) {}

  double& operator[](std::size_t i) { return a[i]; }
  double operator[](std::size_t i) const { return a[i]; }
  double& at(const Idx& idx) { return a[spec.flat(idx)]; }
  double at(const Idx& idx) const { return a[spec.flat(idx)]; }
  std::size_t size() const { return a.size(); }
};

// Pointwise rule on [-L, L)^n.
using PointRule = std::function<double(const Pt&)>;

ScalarField sample_function(const GridSpec& spec, const PointRule& f);

// Visit all nodes in row-major order: fn(flat_index, node)
void for_nodes(const GridSpec& spec, const std::function<void(std::size_t, const Pt&)>& fn);

void require_same_spec(const GridSpec& a, const GridSpec& b, const char* where);
void assert_finite(const ScalarField& f, const char* where);

// smooth radial cutoff: 1 for |x| <= r_plateau, 0 for |x| >= r_zero,
// exp(-1/t) smooth step between
ScalarField radial_cutoff(const GridSpec& spec, double r_plateau, double r_zero);
double radial_cutoff_value(const Pt& p, int ndim, double r_plateau, double r_zero);

// quintic-step taper (C^2): its dyadic blocks follow a clean power law, which
// keeps exponent fits of taper-localized fields unbiased
ScalarField radial_taper(const GridSpec& spec, double r_plateau, double r_zero);
double radial_taper_value(const Pt& p, int ndim, double r_plateau, double r_zero);

// arithmetic (specs must match)
ScalarField operator+(const ScalarField& f, const ScalarField& g);
ScalarField operator-(const ScalarField& f, const ScalarField& g);
ScalarField operator*(const ScalarField& f, const ScalarField& g);
ScalarField operator*(double c, const ScalarField& f);
ScalarField& operator+=(ScalarField& f, const ScalarField& g);
ScalarField& operator-=(ScalarField& f, const ScalarField& g);
ScalarField& operator*=(ScalarField& f, double c);
double sup_norm(const ScalarField& f);
double mean(const ScalarField& f);

// sorted multi-indices of length k over axes {0..n-1}, lexicographic order
std::vector<std::vector<int>> multi_indices(int n, int k);
int binom(int n, int k);

struct FormField {
  int degree = 0;
  GridSpec spec;
  std::vector<std::vector<int>> indices;  // multi_indices(spec.ndim, degree)
  std::vector<ScalarField> comps;

  FormField() = default;
  FormField(int k, const GridSpec& s);

  ScalarField& comp(const std::vector<int>& mi);
  const ScalarField& comp(const std::vector<int>& mi) const;
  int comp_pos(const std::vector<int>& mi) const;  // -1 if absent
};

FormField operator+(const FormField& f, const FormField& g);
FormField operator-(const FormField& f, const FormField& g);
FormField operator*(double c, const FormField& f);
double sup_norm(const FormField& f);

// antisymmetric component lookup: value of omega on an arbitrary index tuple
// (sign of the sorting permutation, zero if an axis repeats)
struct SignedPos {
  int pos;     // component position, -1 if the tuple has a repeated axis
  double sgn;  // +1/-1
};
SignedPos antisym_lookup(const FormField& w, std::vector<int> tuple);

struct MatrixField {
  int rows = 0, cols = 0;
  GridSpec spec;
  std::vector<ScalarField> e;  // row-major

  MatrixField() = default;
  MatrixField(int r, int c, const GridSpec& s);
  ScalarField& at(int r, int c) { return e[static_cast<std::size_t>(r) * cols + c]; }
  const ScalarField& at(int r, int c) const { return e[static_cast<std::size_t>(r) * cols + c]; }
};

double sup_norm(const MatrixField& m);

// q vector fields, each with ndim component fields; optional structure
// coefficients c[i][j][k] with [X_i, X_j] = sum_k c_ij^k X_k
struct Frame {
  int q = 0;
  GridSpec spec;
  std::vector<std::vector<ScalarField>> vfs;  // q x ndim
  bool has_c = false;
  std::vector<ScalarField> c;  // q*q*q flattened, index (i*q + j)*q + k

  Frame() = default;
  Frame(int q_, const GridSpec& s);
  ScalarField& cijk(int i, int j, int k) { return c[(static_cast<std::size_t>(i) * q + j) * q + k]; }
  const ScalarField& cijk(int i, int j, int k) const {
    return c[(static_cast<std::size_t>(i) * q + j) * q + k];
  }
  void check_c_antisymmetry(double rel_tol = 1e-12) const;
};

}  // namespace zyg
