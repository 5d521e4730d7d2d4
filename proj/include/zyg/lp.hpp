#pragma once

// Littlewood-Paley filter bank and the numerical Zygmund-Holder norms:
// dyadic block norms for any real order, second-difference and first-difference
// norms at matching orders, negative-order witnesses, and the regularity
// exponent fitted from block decay.

#include <memory>
#include <optional>

#include "zyg/fft.hpp"
#include "zyg/grid.hpp"

namespace zyg {

// psi0 profile: smooth radial bump, identically 1 for |xi| <= 3/2 and 0 for
// |xi| >= 8/3, built from the exp(-1/t) smooth step.
double psi0_profile(double r);

struct LPFilterBank {
  GridSpec spec;
  int jmax = 0;
  // psi[j]: low-pass at scale 2^j; delta[j] = psi[j] - psi[j-1] (delta[0] = psi[0])
  std::vector<std::vector<double>> psi;
  std::vector<std::vector<double>> delta;
};

// banks are immutable and cached per GridSpec (synchronized)
std::shared_ptr<const LPFilterBank> build_filter_bank(const GridSpec& spec);

ScalarField lp_block(const ScalarField& f, int j, const LPFilterBank& bank);
ScalarField lp_lowpass(const ScalarField& f, int j, const LPFilterBank& bank);  // psi_j * f, zero for j<0

// sup norms of all blocks j = 0..jmax
std::vector<double> lp_block_norms(const ScalarField& f, const LPFilterBank& bank);

double norm_dyadic(const ScalarField& f, double s);
double norm_dyadic(const FormField& f, double s);  // max over components

double norm_diff2(const ScalarField& f, double s);   // s in (0,2)
double norm_holder(const ScalarField& f, double s);  // s in (0,1)

// order s <= 0; dyadic formula plus the spectral witness decomposition
// f = g0 + sum_j d/dx_j g_j with g0 = (I+Lap)^{-1} f
double norm_negative(const ScalarField& f, double s);
struct NegativeWitness {
  ScalarField g0;
  std::vector<ScalarField> g;
};
NegativeWitness negative_witness(const ScalarField& f);

struct RegularityReport {
  std::vector<double> block_norms;
  std::vector<double> s_grid;
  std::vector<double> diff2_norms;
  double fitted_exponent = 0.0;
  bool smooth_beyond_resolution = false;
  int window_lo = 0, window_hi = 0;
  double residual = 0.0;

  std::string to_json() const;
};

// window defaults to [2, jmax-1]; pass {lo,hi} to override
RegularityReport fit_exponent(const ScalarField& f,
                              std::optional<std::pair<int, int>> window = std::nullopt);
RegularityReport fit_exponent(const FormField& f,
                              std::optional<std::pair<int, int>> window = std::nullopt);

// deterministic random band-limited field: independent gaussian spectrum on
// modes with |k|_inf <= kmax, unit sup-norm normalization
ScalarField random_band_limited(const GridSpec& spec, int kmax, std::uint64_t seed);

}  // namespace zyg
