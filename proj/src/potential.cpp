#include "zyg/potential.hpp"

#include <cmath>

#include "zyg/exterior.hpp"

namespace zyg {

bool supported_in_ball(const ScalarField& f, double radius, double rel_tol) {
  double mag = sup_norm(f);
  if (mag == 0) return true;
  bool ok = true;
  for_nodes(f.spec, [&](std::size_t i, const Pt& p) {
    double r2 = 0;
    for (int a = 0; a < f.spec.ndim; ++a) r2 += p[a] * p[a];
    if (r2 >= radius * radius && std::abs(f[i]) >= rel_tol * mag) ok = false;
  });
  return ok;
}

bool supported_in_ball(const FormField& f, double radius, double rel_tol) {
  for (const auto& c : f.comps)
    if (!supported_in_ball(c, radius, rel_tol)) return false;
  return true;
}

FormField newtonian(const FormField& w, bool allow_mean, std::vector<double>* subtracted_means,
                    bool skip_support_check) {
  if (!skip_support_check && !supported_in_ball(w, 0.5))
    throw std::runtime_error("newtonian: input not supported inside the half-ball");
  FormField out(w.degree, w.spec);
  if (subtracted_means) subtracted_means->clear();
  const double fac = M_PI / w.spec.half_width;
  for (std::size_t c = 0; c < w.comps.size(); ++c) {
    double m = mean(w.comps[c]);
    if (!allow_mean && w.spec.ndim <= 2 && std::abs(m) > 1e-12 * std::max(1.0, sup_norm(w.comps[c])))
      throw std::runtime_error("newtonian: nonzero mean component without correction flag");
    if (subtracted_means) subtracted_means->push_back(m);
    out.comps[c] = apply_multiplier(w.comps[c], [&](const Idx& k) {
      double s2 = 0;
      for (int a = 0; a < w.spec.ndim; ++a) s2 += static_cast<double>(k[a]) * k[a];
      return s2 == 0 ? 0.0 : 1.0 / (fac * fac * s2);
    });
  }
  return out;
}

RhoXi decompose_rho_dxi(const FormField& theta, const ScalarField& chi) {
  require_same_spec(theta.spec, chi.spec, "decompose_rho_dxi");
  if (theta.degree < 1) throw std::invalid_argument("decompose_rho_dxi: needs degree >= 1");
  if (!supported_in_ball(chi, 0.5))
    throw std::runtime_error("decompose_rho_dxi: cutoff support violation");
  FormField ct(theta.degree, theta.spec);
  for (std::size_t c = 0; c < ct.comps.size(); ++c) ct.comps[c] = chi * theta.comps[c];

  RhoXi out;
  if (ct.degree < ct.spec.ndim) {
    out.rho = newtonian(codifferential(ext_d(ct)), true, nullptr, true);
  } else {
    out.rho = FormField(ct.degree, ct.spec);  // top degree: theta-d part vanishes
  }
  // adding the component means restores rho + d xi = chi theta exactly on the
  // torus (the periodic potential drops the zero mode)
  for (std::size_t c = 0; c < ct.comps.size(); ++c) {
    double m = mean(ct.comps[c]);
    for (std::size_t i = 0; i < out.rho.comps[c].size(); ++i) out.rho.comps[c][i] += m;
  }
  out.xi = newtonian(codifferential(ct), true, nullptr, true);
  return out;
}

FormField form_block(const FormField& w, int j, const LPFilterBank& bank) {
  FormField out(w.degree, w.spec);
  for (std::size_t c = 0; c < w.comps.size(); ++c) out.comps[c] = lp_block(w.comps[c], j, bank);
  return out;
}

FormField form_lowpass(const FormField& w, int j, const LPFilterBank& bank) {
  FormField out(w.degree, w.spec);
  if (j < 0) return out;
  for (std::size_t c = 0; c < w.comps.size(); ++c) out.comps[c] = lp_lowpass(w.comps[c], j, bank);
  return out;
}

FormField para_P(const FormField& sigma, const FormField& omega, const LPFilterBank& bank) {
  require_same_spec(sigma.spec, omega.spec, "para_P");
  if (sigma.degree + omega.degree > sigma.spec.ndim)
    throw std::invalid_argument("para_P: degree overflow");
  FormField out(sigma.degree + omega.degree, sigma.spec);
  for (int j = 2; j <= bank.jmax; ++j) {
    FormField bs = form_block(sigma, j, bank);
    FormField lw = form_lowpass(omega, j - 2, bank);
    out = out + wedge(bs, lw);
  }
  return out;
}

FormField para_R(const FormField& sigma, const FormField& omega, const LPFilterBank& bank) {
  require_same_spec(sigma.spec, omega.spec, "para_R");
  if (sigma.degree + omega.degree > sigma.spec.ndim)
    throw std::invalid_argument("para_R: degree overflow");
  FormField out(sigma.degree + omega.degree, sigma.spec);
  std::vector<FormField> bs, bw;
  for (int j = 0; j <= bank.jmax; ++j) {
    bs.push_back(form_block(sigma, j, bank));
    bw.push_back(form_block(omega, j, bank));
  }
  for (int j = 0; j <= bank.jmax; ++j)
    for (int k = std::max(0, j - 1); k <= std::min(bank.jmax, j + 1); ++k)
      out = out + wedge(bs[j], bw[k]);
  return out;
}

double bony_check(const FormField& sigma, const FormField& omega, const LPFilterBank& bank) {
  // sigma ^ omega = P(sigma,omega) + (-1)^{kl} P(omega,sigma) + R(sigma,omega);
  // the resonant slot written with sigma first equals (-1)^{kl} R(omega,sigma),
  // which is what the blockwise expansion of the product telescopes to
  FormField prod = wedge(sigma, omega);
  int kl = sigma.degree * omega.degree;
  double sign = (kl % 2 == 0) ? 1.0 : -1.0;
  FormField rec = para_P(sigma, omega, bank) + sign * para_P(omega, sigma, bank) +
                  para_R(sigma, omega, bank);
  double denom = sup_norm(prod);
  if (denom == 0) denom = std::max(1.0, sup_norm(sigma) * sup_norm(omega));
  return sup_norm(prod - rec) / denom;
}

double leibniz_check(const FormField& sigma, const FormField& omega, const LPFilterBank& bank) {
  FormField lhs = ext_d(para_P(sigma, omega, bank));
  double sign = (sigma.degree % 2 == 0) ? 1.0 : -1.0;
  FormField rhs = para_P(ext_d(sigma), omega, bank) + sign * para_P(sigma, ext_d(omega), bank);
  double denom = sup_norm(lhs);
  if (denom == 0) denom = 1.0;
  return sup_norm(lhs - rhs) / denom;
}

FormField build_tau(const std::vector<ScalarField>& rho, const std::vector<FormField>& mu,
                    const LPFilterBank& bank) {
  if (rho.size() != mu.size() || rho.empty())
    throw std::invalid_argument("build_tau: component count mismatch");
  const int k = mu[0].degree + 1;
  FormField out(k, rho[0].spec);
  double sign = (k % 2 == 0) ? 1.0 : -1.0;
  for (std::size_t c = 0; c < rho.size(); ++c) {
    FormField rho0(0, rho[c].spec);
    rho0.comps[0] = rho[c];
    FormField dmu = ext_d(mu[c]);
    FormField drho = ext_d(rho0);
    out = out + para_P(rho0, dmu, bank) + sign * para_P(mu[c], drho, bank) +
          para_R(rho0, dmu, bank);
  }
  return out;
}

}  // namespace zyg
