#include "zyg/lp.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <random>
#include <sstream>

namespace zyg {

double psi0_profile(double r) {
  constexpr double lo = 1.5, hi = 8.0 / 3.0;
  if (r <= lo) return 1.0;
  if (r >= hi) return 0.0;
  double t = (r - lo) / (hi - lo);
  double sa = std::exp(-1.0 / t);
  double sb = std::exp(-1.0 / (1.0 - t));
  return sb / (sa + sb);
}

namespace {

double knorm(const Idx& k, int ndim) {
  double s = 0;
  for (int a = 0; a < ndim; ++a) s += static_cast<double>(k[a]) * k[a];
  return std::sqrt(s);
}

struct BankKey {
  int ndim;
  std::array<int, 3> sizes;
  double half_width;
  bool operator<(const BankKey& o) const {
    if (ndim != o.ndim) return ndim < o.ndim;
    if (sizes != o.sizes) return sizes < o.sizes;
    return half_width < o.half_width;
  }
};

std::mutex g_bank_mutex;
std::map<BankKey, std::shared_ptr<const LPFilterBank>>& bank_cache() {
  static std::map<BankKey, std::shared_ptr<const LPFilterBank>> cache;
  return cache;
}

}  // namespace

std::shared_ptr<const LPFilterBank> build_filter_bank(const GridSpec& spec) {
  std::lock_guard<std::mutex> lock(g_bank_mutex);
  BankKey key{spec.ndim, spec.sizes, spec.half_width};
  auto& cache = bank_cache();
  auto it = cache.find(key);
  if (it != cache.end()) return it->second;

  int nyq = spec.sizes[0];
  for (int a = 1; a < spec.ndim; ++a) nyq = std::min(nyq, spec.sizes[a]);
  nyq /= 2;
  // top block unclipped: support of psi_jmax (radius 8/3 * 2^jmax) fits under Nyquist
  int jmax = static_cast<int>(std::floor(std::log2(nyq * 3.0 / 8.0)));
  if (jmax < 1) throw std::invalid_argument("build_filter_bank: grid too small to host two blocks");

  auto bank = std::make_shared<LPFilterBank>();
  bank->spec = spec;
  bank->jmax = jmax;
  bank->psi.resize(jmax + 1);
  bank->delta.resize(jmax + 1);
  for (int j = 0; j <= jmax; ++j) {
    double scale = std::pow(2.0, -j);
    bank->psi[j] = make_multiplier(
        spec, [&](const Idx& k) { return psi0_profile(knorm(k, spec.ndim) * scale); });
    bank->delta[j].resize(bank->psi[j].size());
    for (std::size_t i = 0; i < bank->psi[j].size(); ++i)
      bank->delta[j][i] = j == 0 ? bank->psi[0][i] : bank->psi[j][i] - bank->psi[j - 1][i];
  }
  cache.emplace(key, bank);
  return bank;
}

ScalarField lp_block(const ScalarField& f, int j, const LPFilterBank& bank) {
  require_same_spec(f.spec, bank.spec, "lp_block");
  if (j < 0 || j > bank.jmax) throw std::invalid_argument("lp_block: block index out of range");
  return apply_multiplier(f, bank.delta[j]);
}

ScalarField lp_lowpass(const ScalarField& f, int j, const LPFilterBank& bank) {
  require_same_spec(f.spec, bank.spec, "lp_lowpass");
  if (j < 0) return ScalarField(f.spec);  // psi_j = 0 for j <= -1
  if (j > bank.jmax) throw std::invalid_argument("lp_lowpass: block index out of range");
  return apply_multiplier(f, bank.psi[j]);
}

std::vector<double> lp_block_norms(const ScalarField& f, const LPFilterBank& bank) {
  require_same_spec(f.spec, bank.spec, "lp_block_norms");
  Spectrum s = fft_forward(f);
  std::vector<double> norms(bank.jmax + 1);
  for (int j = 0; j <= bank.jmax; ++j) {
    Spectrum sj = s;
    apply_multiplier_inplace(sj, bank.delta[j]);
    norms[j] = sup_norm(fft_inverse(sj));
  }
  return norms;
}

double norm_dyadic(const ScalarField& f, double s) {
  auto bank = build_filter_bank(f.spec);
  auto b = lp_block_norms(f, *bank);
  double v = b[0];
  for (int j = 1; j <= bank->jmax; ++j) v = std::max(v, std::pow(2.0, j * s) * b[j]);
  return v;
}

double norm_dyadic(const FormField& f, double s) {
  double v = 0;
  for (const auto& c : f.comps) v = std::max(v, norm_dyadic(c, s));
  return v;
}

namespace {

// enumerate lattice shift vectors m != 0 with |h(m)| <= L, one per +-pair
void for_shifts(const GridSpec& spec, const std::function<void(const Idx&, double)>& fn) {
  const double L = spec.half_width;
  Idx m{0, 0, 0};
  Idx lo{0, 0, 0}, hi{0, 0, 0};
  for (int a = 0; a < spec.ndim; ++a) {
    hi[a] = spec.sizes[a] / 2;
    lo[a] = (a == 0) ? 0 : -hi[a];  // first axis nonnegative kills the +- double count
  }
  std::function<void(int)> rec = [&](int axis) {
    if (axis == spec.ndim) {
      bool zero = true;
      bool leading_neg = false;
      for (int a = 0; a < spec.ndim; ++a) {
        if (m[a] != 0) {
          if (zero && m[a] < 0) leading_neg = true;
          zero = false;
          break;
        }
      }
      if (zero || leading_neg) return;
      double h2 = 0;
      for (int a = 0; a < spec.ndim; ++a) {
        double ha = m[a] * spec.spacing(a);
        h2 += ha * ha;
      }
      if (h2 > L * L || h2 == 0) return;
      fn(m, std::sqrt(h2));
      return;
    }
    for (int v = lo[axis]; v <= hi[axis]; ++v) {
      m[axis] = v;
      rec(axis + 1);
    }
  };
  rec(0);
}

double shifted_sup_diff2(const ScalarField& f, const Idx& m) {
  const GridSpec& s = f.spec;
  double best = 0;
  if (s.ndim == 1) {
    const int n = s.sizes[0];
    const int d1 = s.wrap(0, m[0]), d2 = s.wrap(0, 2 * m[0]);
    for (int i = 0; i < n; ++i) {
      int i1 = i + d1;
      if (i1 >= n) i1 -= n;
      int i2 = i + d2;
      if (i2 >= n) i2 -= n;
      best = std::max(best, std::abs(f[i2] - 2 * f[i1] + f[i]));
    }
    return best;
  }
  if (s.ndim == 2) {
    const int n0 = s.sizes[0], n1 = s.sizes[1];
    const int a1 = s.wrap(0, m[0]), a2 = s.wrap(0, 2 * m[0]);
    const int b1 = s.wrap(1, m[1]), b2 = s.wrap(1, 2 * m[1]);
    for (int i = 0; i < n0; ++i) {
      int i1 = i + a1;
      if (i1 >= n0) i1 -= n0;
      int i2 = i + a2;
      if (i2 >= n0) i2 -= n0;
      const double* r0 = f.a.data() + static_cast<std::size_t>(i) * n1;
      const double* r1 = f.a.data() + static_cast<std::size_t>(i1) * n1;
      const double* r2 = f.a.data() + static_cast<std::size_t>(i2) * n1;
      for (int j = 0; j < n1; ++j) {
        int j1 = j + b1;
        if (j1 >= n1) j1 -= n1;
        int j2 = j + b2;
        if (j2 >= n1) j2 -= n1;
        best = std::max(best, std::abs(r2[j2] - 2 * r1[j1] + r0[j]));
      }
    }
    return best;
  }
  // generic path
  const std::size_t n = s.node_count();
  for (std::size_t fl = 0; fl < n; ++fl) {
    Idx i = s.unflat(fl);
    Idx i1, i2;
    for (int a = 0; a < s.ndim; ++a) {
      i1[a] = s.wrap(a, i[a] + m[a]);
      i2[a] = s.wrap(a, i[a] + 2 * m[a]);
    }
    best = std::max(best, std::abs(f.at(i2) - 2 * f.at(i1) + f.at(i)));
  }
  return best;
}

double shifted_sup_diff1(const ScalarField& f, const Idx& m) {
  const GridSpec& s = f.spec;
  double best = 0;
  const std::size_t n = s.node_count();
  if (s.ndim == 1) {
    const int d1 = s.wrap(0, m[0]);
    const int nn = s.sizes[0];
    for (int i = 0; i < nn; ++i) {
      int i1 = i + d1;
      if (i1 >= nn) i1 -= nn;
      best = std::max(best, std::abs(f[i1] - f[i]));
    }
    return best;
  }
  for (std::size_t fl = 0; fl < n; ++fl) {
    Idx i = s.unflat(fl);
    Idx i1;
    for (int a = 0; a < s.ndim; ++a) i1[a] = s.wrap(a, i[a] + m[a]);
    best = std::max(best, std::abs(f.at(i1) - f.at(i)));
  }
  return best;
}

}  // namespace

double norm_diff2(const ScalarField& f, double s) {
  if (!(s > 0 && s < 2)) throw std::invalid_argument("norm_diff2: order must lie in (0,2)");
  double v = sup_norm(f);
  for_shifts(f.spec, [&](const Idx& m, double h) {
    double d = shifted_sup_diff2(f, m);
    v = std::max(v, std::pow(h, -s) * d);
  });
  return v;
}

double norm_holder(const ScalarField& f, double s) {
  if (!(s > 0 && s < 1)) throw std::invalid_argument("norm_holder: order must lie in (0,1)");
  double v = sup_norm(f);
  for_shifts(f.spec, [&](const Idx& m, double h) {
    double d = shifted_sup_diff1(f, m);
    v = std::max(v, std::pow(h, -s) * d);
  });
  return v;
}

double norm_negative(const ScalarField& f, double s) {
  if (s > 0) throw std::invalid_argument("norm_negative: order must be <= 0");
  return norm_dyadic(f, s);
}

NegativeWitness negative_witness(const ScalarField& f) {
  const double fac = M_PI / f.spec.half_width;
  auto inv = [&](const Idx& k) {
    double s2 = 0;
    for (int a = 0; a < f.spec.ndim; ++a) s2 += static_cast<double>(k[a]) * k[a];
    return 1.0 / (1.0 + fac * fac * s2);
  };
  NegativeWitness w;
  w.g0 = apply_multiplier(f, inv);
  for (int a = 0; a < f.spec.ndim; ++a)
    w.g.push_back(-1.0 * spectral_deriv(w.g0, a));
  return w;
}

namespace {

RegularityReport fit_from_blocks(std::vector<double> blocks, int jmax,
                                 std::optional<std::pair<int, int>> window) {
  RegularityReport rep;
  rep.block_norms = std::move(blocks);
  int lo = window ? window->first : 2;
  int hi = window ? window->second : jmax - 1;
  rep.window_lo = lo = std::max(lo, 0);
  rep.window_hi = hi = std::min(hi, jmax);

  double bmax = 0;
  for (double b : rep.block_norms) bmax = std::max(bmax, b);
  const double floor = 1e-13 * bmax;

  std::vector<std::pair<double, double>> pts;  // (j, log2 b_j)
  int jtop = -1;
  for (int j = lo; j <= hi; ++j)
    if (rep.block_norms[j] > floor && rep.block_norms[j] > 0) {
      pts.push_back({static_cast<double>(j), std::log2(rep.block_norms[j])});
      jtop = j;
    }

  // smooth beyond resolution: too few live blocks, or the upper half of the
  // window already sits at the noise floor (super-polynomial decay)
  if (pts.size() < 3 || 2 * jtop <= lo + hi) {
    rep.smooth_beyond_resolution = true;
    rep.fitted_exponent = std::numeric_limits<double>::quiet_NaN();
    return rep;
  }
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (auto [x, y] : pts) {
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double n = static_cast<double>(pts.size());
  const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  const double icpt = (sy - slope * sx) / n;
  rep.fitted_exponent = -slope;
  double ss = 0;
  for (auto [x, y] : pts) {
    double r = y - (slope * x + icpt);
    ss += r * r;
  }
  rep.residual = std::sqrt(ss / n);
  return rep;
}

}  // namespace

RegularityReport fit_exponent(const ScalarField& f, std::optional<std::pair<int, int>> window) {
  auto bank = build_filter_bank(f.spec);
  return fit_from_blocks(lp_block_norms(f, *bank), bank->jmax, window);
}

RegularityReport fit_exponent(const FormField& f, std::optional<std::pair<int, int>> window) {
  auto bank = build_filter_bank(f.spec);
  std::vector<double> bmax(bank->jmax + 1, 0.0);
  for (const auto& c : f.comps) {
    auto b = lp_block_norms(c, *bank);
    for (std::size_t j = 0; j < bmax.size(); ++j) bmax[j] = std::max(bmax[j], b[j]);
  }
  return fit_from_blocks(std::move(bmax), bank->jmax, window);
}

std::string RegularityReport::to_json() const {
  std::ostringstream os;
  auto num = [&](double v) {
    char buf[40];
    if (std::isnan(v)) {
      os << "null";
      return;
    }
    std::snprintf(buf, sizeof buf, "%.17g", v);
    os << buf;
  };
  auto arr = [&](const std::vector<double>& v) {
    os << "[";
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (i) os << ",";
      num(v[i]);
    }
    os << "]";
  };
  os << "{\"block_norms\":";
  arr(block_norms);
  os << ",\"s_grid\":";
  arr(s_grid);
  os << ",\"diff2\":";
  arr(diff2_norms);
  os << ",\"exponent\":";
  num(fitted_exponent);
  os << ",\"smooth_beyond_resolution\":" << (smooth_beyond_resolution ? "true" : "false");
  os << ",\"window\":[" << window_lo << "," << window_hi << "]";
  os << ",\"residual\":";
  num(residual);
  os << "}";
  return os.str();
}

ScalarField random_band_limited(const GridSpec& spec, int kmax, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  Spectrum s;
  s.spec = spec;
  s.c.assign(spectrum_size(spec), {0.0, 0.0});
  for_freqs(spec, [&](std::size_t flat, const Idx& k) {
    bool in = true;
    for (int a = 0; a < spec.ndim; ++a)
      if (std::abs(k[a]) > kmax) in = false;
    if (!in) return;
    double re = gauss(rng), im = gauss(rng);
    bool self_conj = true;
    for (int a = 0; a < spec.ndim; ++a)
      if (k[a] != 0 && 2 * std::abs(k[a]) != spec.sizes[a]) self_conj = false;
    s.c[flat] = self_conj ? std::complex<double>(re, 0.0) : std::complex<double>(re, im);
  });
  ScalarField f = fft_inverse(s);
  double m = sup_norm(f);
  if (m > 0)
    for (double& v : f.a) v /= m;
  return f;
}

}  // namespace zyg
