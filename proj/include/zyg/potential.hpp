#pragma once

// Newtonian potential on the torus, the rho + d xi decomposition, Bony
// paraproducts, and the paraproduct form used to regularize d of a pushed
// forward form.

#include "zyg/lp.hpp"

namespace zyg {

// componentwise solve of (positive Laplacian) sigma = w by division by the
// |xi|^2 symbol; the zero mode of the output is 0 and subtracted component
// means are reported. Requires supp w inside the half-ball unless
// skip_support_check.
FormField newtonian(const FormField& w, bool allow_mean = false,
                    std::vector<double>* subtracted_means = nullptr,
                    bool skip_support_check = false);

// theta|{chi=1} = rho + d xi with rho = G * theta-d(chi theta) + mean and
// xi = G * theta(chi theta); rho carries the d(theta) regularity, xi is one
// order smoother
struct RhoXi {
  FormField rho;
  FormField xi;
};
RhoXi decompose_rho_dxi(const FormField& theta, const ScalarField& chi);

// blockwise helpers on forms
FormField form_block(const FormField& w, int j, const LPFilterBank& bank);
FormField form_lowpass(const FormField& w, int j, const LPFilterBank& bank);

// P(sigma, omega) = sum_j Delta_j sigma ^ psi_{j-2} omega  (psi_m = 0, m < 0)
FormField para_P(const FormField& sigma, const FormField& omega, const LPFilterBank& bank);
// R(sigma, omega) = sum_{|j-k|<=1} Delta_j sigma ^ Delta_k omega
FormField para_R(const FormField& sigma, const FormField& omega, const LPFilterBank& bank);

// relative sup residual of sigma^omega = P(s,w) + (-1)^{kl} P(w,s) + R(w,s)
double bony_check(const FormField& sigma, const FormField& omega, const LPFilterBank& bank);
// relative sup residual of d P(s,w) = P(ds,w) + (-1)^k P(s,dw)
double leibniz_check(const FormField& sigma, const FormField& omega, const LPFilterBank& bank);

// tau = sum_I P(rho_I, d mu^I) + (-1)^k P(mu^I, d rho_I) + R(rho_I, d mu^I)
// where rho_I are scalars and mu^I are (k-1)-forms; d tau matches
// d(sum_I rho_I d mu^I) up to block truncation
FormField build_tau(const std::vector<ScalarField>& rho, const std::vector<FormField>& mu,
                    const LPFilterBank& bank);

// support-in-half-ball test used across modules
bool supported_in_ball(const ScalarField& f, double radius, double rel_tol = 1e-13);
bool supported_in_ball(const FormField& f, double radius, double rel_tol = 1e-13);

}  // namespace zyg
