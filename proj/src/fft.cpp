#include "zyg/fft.hpp"

#include <fftw3.h>

#include <cmath>
#include <map>
#include <mutex>

namespace zyg {

namespace {

struct PlanPair {
  fftw_plan fwd = nullptr;
  fftw_plan bwd = nullptr;
  double* real = nullptr;
  fftw_complex* cplx = nullptr;
  std::size_t nreal = 0, ncplx = 0;
};

struct PlanKey {
  int ndim;
  std::array<int, 3> sizes;
  bool operator<(const PlanKey& o) const {
    if (ndim != o.ndim) return ndim < o.ndim;
    return sizes < o.sizes;
  }
};

std::mutex g_mutex;
std::map<PlanKey, PlanPair>& plan_cache() {
  static std::map<PlanKey, PlanPair> cache;
  return cache;
}

PlanPair& get_plans(const GridSpec& spec) {
  std::lock_guard<std::mutex> lock(g_mutex);
  PlanKey key{spec.ndim, spec.sizes};
  auto& cache = plan_cache();
  auto it = cache.find(key);
  if (it != cache.end()) return it->second;

  PlanPair p;
  p.nreal = spec.node_count();
  p.ncplx = spectrum_size(spec);
  p.real = fftw_alloc_real(p.nreal);
  p.cplx = fftw_alloc_complex(p.ncplx);
  int n[3] = {spec.sizes[0], spec.sizes[1], spec.sizes[2]};
  p.fwd = fftw_plan_dft_r2c(spec.ndim, n, p.real, p.cplx, FFTW_ESTIMATE);
  p.bwd = fftw_plan_dft_c2r(spec.ndim, n, p.cplx, p.real, FFTW_ESTIMATE);
  if (!p.fwd || !p.bwd) throw std::runtime_error("fft: plan creation failed");
  return cache.emplace(key, p).first->second;
}

int signed_freq(int i, int n) { return i <= n / 2 ? i : i - n; }

}  // namespace

std::size_t spectrum_size(const GridSpec& spec) {
  std::size_t s = 1;
  for (int a = 0; a < spec.ndim - 1; ++a) s *= static_cast<std::size_t>(spec.sizes[a]);
  return s * (static_cast<std::size_t>(spec.sizes[spec.ndim - 1]) / 2 + 1);
}

Spectrum fft_forward(const ScalarField& f) {
  auto& p = get_plans(f.spec);
  std::lock_guard<std::mutex> lock(g_mutex);
  for (std::size_t i = 0; i < p.nreal; ++i) p.real[i] = f[i];
  fftw_execute(p.fwd);
  Spectrum s;
  s.spec = f.spec;
  s.c.resize(p.ncplx);
  for (std::size_t i = 0; i < p.ncplx; ++i) s.c[i] = {p.cplx[i][0], p.cplx[i][1]};
  return s;
}

ScalarField fft_inverse(const Spectrum& s) {
  auto& p = get_plans(s.spec);
  std::lock_guard<std::mutex> lock(g_mutex);
  for (std::size_t i = 0; i < p.ncplx; ++i) {
    p.cplx[i][0] = s.c[i].real();
    p.cplx[i][1] = s.c[i].imag();
  }
  fftw_execute(p.bwd);
  ScalarField out(s.spec);
  const double norm = 1.0 / static_cast<double>(s.spec.node_count());
  for (std::size_t i = 0; i < p.nreal; ++i) out[i] = p.real[i] * norm;
  return out;
}

void for_freqs(const GridSpec& spec, const std::function<void(std::size_t, const Idx&)>& fn) {
  const int last = spec.ndim - 1;
  const int nlast = spec.sizes[last] / 2 + 1;
  Idx dims{1, 1, 1};
  for (int a = 0; a < spec.ndim; ++a) dims[a] = (a == last) ? nlast : spec.sizes[a];
  Idx it{0, 0, 0};
  std::size_t total = 1;
  for (int a = 0; a < spec.ndim; ++a) total *= static_cast<std::size_t>(dims[a]);
  Idx k{0, 0, 0};
  for (std::size_t flat = 0; flat < total; ++flat) {
    for (int a = 0; a < spec.ndim; ++a)
      k[a] = (a == last) ? it[a] : signed_freq(it[a], spec.sizes[a]);
    fn(flat, k);
    for (int a = spec.ndim - 1; a >= 0; --a) {
      if (++it[a] < dims[a]) break;
      it[a] = 0;
    }
  }
}

std::vector<double> make_multiplier(const GridSpec& spec,
                                    const std::function<double(const Idx&)>& m) {
  std::vector<double> table(spectrum_size(spec));
  for_freqs(spec, [&](std::size_t flat, const Idx& k) { table[flat] = m(k); });
  return table;
}

ScalarField apply_multiplier(const ScalarField& f, const std::vector<double>& table) {
  Spectrum s = fft_forward(f);
  apply_multiplier_inplace(s, table);
  return fft_inverse(s);
}

void apply_multiplier_inplace(Spectrum& s, const std::vector<double>& table) {
  if (table.size() != s.c.size()) throw std::invalid_argument("multiplier table size mismatch");
  for (std::size_t i = 0; i < s.c.size(); ++i) s.c[i] *= table[i];
}

ScalarField apply_multiplier(const ScalarField& f,
                             const std::function<double(const Idx&)>& m) {
  return apply_multiplier(f, make_multiplier(f.spec, m));
}

ScalarField spectral_deriv(const ScalarField& f, int axis) {
  const double fac = M_PI / f.spec.half_width;
  const int nax = f.spec.sizes[axis];
  Spectrum s = fft_forward(f);
  for_freqs(f.spec, [&](std::size_t flat, const Idx& k) {
    if (k[axis] * 2 == nax) {
      s.c[flat] = 0.0;  // Nyquist mode has no well-defined odd derivative
      return;
    }
    s.c[flat] *= std::complex<double>(0.0, fac * k[axis]);
  });
  return fft_inverse(s);
}

std::vector<ScalarField> spectral_gradient(const ScalarField& f) {
  std::vector<ScalarField> g;
  g.reserve(f.spec.ndim);
  for (int a = 0; a < f.spec.ndim; ++a) g.push_back(spectral_deriv(f, a));
  return g;
}

ScalarField spectral_positive_laplacian(const ScalarField& f) {
  const double fac = M_PI / f.spec.half_width;
  return apply_multiplier(f, [&](const Idx& k) {
    double s = 0;
    for (int a = 0; a < f.spec.ndim; ++a) s += static_cast<double>(k[a]) * k[a];
    return fac * fac * s;
  });
}

ScalarField spectral_inv_positive_laplacian_zero_mean(const ScalarField& f) {
  const double fac = M_PI / f.spec.half_width;
  return apply_multiplier(f, [&](const Idx& k) {
    double s = 0;
    for (int a = 0; a < f.spec.ndim; ++a) s += static_cast<double>(k[a]) * k[a];
    return s == 0 ? 0.0 : 1.0 / (fac * fac * s);
  });
}

}  // namespace zyg
