#pragma once

// Spectral engine on the periodic grid, backed by FFTW (real transforms).
//
// Frequency convention: the lattice mode k (integers, one per axis) is the
// function exp(2*pi*i * k.x / (2L)), so |k| counts cycles per full period.
// The analytic wavenumber of mode k along axis a is kappa_a = pi*k_a/L.

#include <array>
#include <complex>
#include <functional>
#include <vector>

#include "zyg/grid.hpp"

namespace zyg {

struct Spectrum {
  GridSpec spec;
  std::vector<std::complex<double>> c;  // r2c half-complex layout, last axis halved
};

std::size_t spectrum_size(const GridSpec& spec);

Spectrum fft_forward(const ScalarField& f);
ScalarField fft_inverse(const Spectrum& s);  // normalized by 1/node_count

// Iterate the half-complex lattice: fn(flat, k) with k the signed integer
// frequency vector (unused axes zero).
void for_freqs(const GridSpec& spec, const std::function<void(std::size_t, const Idx&)>& fn);

// f -> inverse_fft(m(k) * fft(f)) for a real multiplier m of the integer
// frequency vector.
ScalarField apply_multiplier(const ScalarField& f,
                             const std::function<double(const Idx&)>& m);

// precomputed multiplier table over the half-complex lattice
std::vector<double> make_multiplier(const GridSpec& spec,
                                    const std::function<double(const Idx&)>& m);
ScalarField apply_multiplier(const ScalarField& f, const std::vector<double>& table);
void apply_multiplier_inplace(Spectrum& s, const std::vector<double>& table);

// spectral partial derivative along axis (Nyquist mode of that axis zeroed)
ScalarField spectral_deriv(const ScalarField& f, int axis);

// all first derivatives
std::vector<ScalarField> spectral_gradient(const ScalarField& f);

// positive Laplacian -sum d^2/dx^2 and its (zero-mean) inverse
ScalarField spectral_positive_laplacian(const ScalarField& f);
ScalarField spectral_inv_positive_laplacian_zero_mean(const ScalarField& f);

}  // namespace zyg
