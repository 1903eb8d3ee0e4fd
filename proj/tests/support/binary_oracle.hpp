#pragma once

// Quadrature verification of the binary sampler's full conditionals.  The
// Polya-gamma-augmented pseudo-joint contributes kappa mu - omega mu^2 / 2
// per active observation plus the PG(k, 0) prior on omega; that prior factor
// is constant along every slice taken here except the omega slice itself,
// where the tabulated series density supplies it.

#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "hrdd/data.hpp"
#include "hrdd/gibbs_binary.hpp"
#include "hrdd/polya_gamma.hpp"
#include "conditional_oracle.hpp"
#include "quadrature.hpp"

namespace binary_oracle {

// Log pseudo-joint without the PG prior factors (constant in all coordinates
// sliced through this function) and without spike-and-slab terms (off here).
inline double log_joint(const hrdd::BinarySampler& smp,
                        const hrdd::Hyperparams& hp,
                        const hrdd::ChainState& st) {
  double lj = 0.0;
  const std::size_t G = smp.n_groups();
  const int p = smp.p();
  for (std::size_t g = 0; g < G; ++g) {
    const auto& d = smp.design(g);
    const auto& w = smp.w(g);
    const auto& kap = smp.kappa(g);
    for (std::size_t i = 0; i < d.n(); ++i) {
      if (d.k[i] <= 0.0) continue;
      double mu = st.tau[g] * w[i];
      for (int j = 0; j < p; ++j)
        mu += st.beta[g][static_cast<std::size_t>(j)] * d.z_col[static_cast<std::size_t>(j)][i];
      lj += kap[i] * mu - 0.5 * st.omega_pg[g][i] * mu * mu;
    }
    lj += cond_oracle::log_normal(st.tau[g], st.m_tau, st.psi_tau);
    for (int j = 0; j < p; ++j)
      lj += cond_oracle::log_normal(st.beta[g][static_cast<std::size_t>(j)],
                                    st.m_beta[static_cast<std::size_t>(j)],
                                    st.psi_beta[static_cast<std::size_t>(j)]);
  }
  lj += -(hp.a_psi + 1.0) * std::log(st.psi_tau) - hp.b_psi / st.psi_tau;
  for (int j = 0; j < p; ++j)
    lj += -(hp.a_psi + 1.0) * std::log(st.psi_beta[static_cast<std::size_t>(j)]) -
          hp.b_psi / st.psi_beta[static_cast<std::size_t>(j)];
  lj += cond_oracle::log_normal(st.m_tau, hp.a_m, hp.b_m);
  for (int j = 0; j < p; ++j)
    lj += cond_oracle::log_normal(st.m_beta[static_cast<std::size_t>(j)], hp.a_m, hp.b_m);
  return lj;
}

struct TinyInstance {
  hrdd::Dataset data;
  hrdd::Hyperparams hyper;
  std::vector<double> h;
  hrdd::ChainState ref;
};

inline TinyInstance tiny_instance() {
  TinyInstance t;
  t.data.c = 0.0;
  t.data.outcome_kind = hrdd::OutcomeKind::binary;
  hrdd::GroupData g0;
  g0.x = {-0.8, -0.35, 0.1, 0.45, 0.9};
  g0.y = {0.0, 0.0, 1.0, 1.0, 1.0};
  g0.w = {0, 0, 1, 1, 1};
  hrdd::GroupData g1;
  g1.x = {-0.9, -0.5, -0.15, 0.2, 0.6, 0.95};
  g1.y = {0.0, 1.0, 0.0, 1.0, 1.0, 0.0};
  g1.w = {0, 0, 0, 1, 1, 1};
  t.data.groups = {g0, g1};
  t.h = {1.2, 0.9};  // group 1 loses its two edge observations

  t.hyper = hrdd::binary_default_hyper();
  t.hyper.q = 1;
  t.hyper.a_m = 0.2;
  t.hyper.b_m = 4.0;
  t.hyper.a_psi = 3.0;
  t.hyper.b_psi = 3.0;

  auto& s = t.ref;
  s.tau = {0.7, -0.4};
  s.beta = {{0.3, -0.2, 0.5}, {-0.1, 0.4, 0.2}};
  s.s = {0, 0};
  s.pi = 0.5;
  s.psi_tau = 0.8;
  s.psi_beta = {0.9, 1.1, 0.7};
  s.m_tau = 0.3;
  s.m_beta = {0.1, -0.2, 0.3};
  s.omega_pg = {{0.21, 0.33, 0.26, 0.19, 0.24},
                {0.0, 0.28, 0.31, 0.22, 0.35, 0.0}};
  return t;
}

inline std::vector<cond_oracle::CheckResult> run_all() {
  using hrdd::ChainState;
  TinyInstance t = tiny_instance();
  hrdd::BinarySampler smp(t.data, t.hyper, t.h, 7);
  const ChainState& ref = t.ref;
  const hrdd::Hyperparams& hp = t.hyper;
  std::vector<cond_oracle::CheckResult> out;

  // omega_ig: density pg(omega | k, 0) exp(-omega mu^2 / 2), versus the
  // closed-form PG(k, mu) moments the sampler draws from
  {
    const std::size_t picks[][2] = {{0, 2}, {0, 0}, {1, 3}};
    for (auto [g, i] : picks) {
      const auto& d = smp.design(g);
      double mu = ref.tau[g] * smp.w(g)[i];
      for (int j = 0; j < smp.p(); ++j)
        mu += ref.beta[g][static_cast<std::size_t>(j)] * d.z_col[static_cast<std::size_t>(j)][i];
      const double k = d.k[i];
      const double m = hrdd::pg_mean(k, mu);
      const double sd = std::sqrt(hrdd::pg_var(k, mu));
      auto tab = oracle::tabulate(
          [&](double wv) {
            return oracle::pg_density(wv, k, 0.0) * std::exp(-0.5 * wv * mu * mu);
          },
          1e-10, m + 40.0 * sd, 40001);
      auto q = oracle::moments(tab);
      out.push_back({"pg_omega_" + std::to_string(g) + "_" + std::to_string(i),
                     cond_oracle::rel_err(q.mean, m),
                     cond_oracle::rel_err(q.var, sd * sd)});
    }
  }

  // tau_g
  for (std::size_t g = 0; g < 2; ++g) {
    auto pr = smp.tau_conditional(g, ref);
    auto lf = [&, g](double x) {
      ChainState st = ref;
      st.tau[g] = x;
      return log_joint(smp, hp, st);
    };
    const double sd = std::sqrt(pr.var);
    auto q = cond_oracle::slice_moments(lf, pr.mean - 12.0 * sd, pr.mean + 12.0 * sd);
    out.push_back({"bin_tau_" + std::to_string(g),
                   cond_oracle::rel_err(q.mean, pr.mean),
                   cond_oracle::rel_err(q.var, pr.var)});
  }

  // beta coordinates through the MVN conditional slice
  {
    const std::size_t picks[][2] = {{0, 0}, {1, 2}};
    for (auto [g, a] : picks) {
      auto pr = smp.beta_conditional(g, ref);
      const int p = smp.p();
      Eigen::MatrixXd cov(p, p);
      for (int i = 0; i < p; ++i)
        for (int j = 0; j < p; ++j)
          cov(i, j) = pr.cov[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
      Eigen::VectorXd mean(p);
      for (int i = 0; i < p; ++i) mean(i) = pr.mean[static_cast<std::size_t>(i)];
      const Eigen::MatrixXd lambda = cov.inverse();
      const Eigen::VectorXd lin = lambda * mean;
      double shift = lin(static_cast<int>(a));
      for (int b = 0; b < p; ++b) {
        if (static_cast<std::size_t>(b) == a) continue;
        shift -= lambda(static_cast<int>(a), b) * ref.beta[g][static_cast<std::size_t>(b)];
      }
      const double cvar = 1.0 / lambda(static_cast<int>(a), static_cast<int>(a));
      const double cmean = shift * cvar;
      auto lf = [&, g, a](double x) {
        ChainState st = ref;
        st.beta[g][a] = x;
        return log_joint(smp, hp, st);
      };
      const double sd = std::sqrt(cvar);
      auto q = cond_oracle::slice_moments(lf, cmean - 12.0 * sd, cmean + 12.0 * sd);
      out.push_back({"bin_beta_" + std::to_string(g) + "_" + std::to_string(a),
                     cond_oracle::rel_err(q.mean, cmean),
                     cond_oracle::rel_err(q.var, cvar)});
    }
  }

  // one hyper-variance and one hyper-mean slice through the binary joint
  {
    auto pr = smp.psi_tau_conditional(ref);
    auto lf = [&](double x) {
      ChainState st = ref;
      st.psi_tau = x;
      return log_joint(smp, hp, st);
    };
    const double m = std::log(pr.rate) - std::log(pr.shape);
    auto q = cond_oracle::slice_moments_log_scale(lf, m - 8.0, m + 12.0);
    const double mean = pr.rate / (pr.shape - 1.0);
    const double var = pr.rate * pr.rate /
                       ((pr.shape - 1.0) * (pr.shape - 1.0) * (pr.shape - 2.0));
    out.push_back({"bin_psi_tau", cond_oracle::rel_err(q.mean, mean),
                   cond_oracle::rel_err(q.var, var)});
  }
  {
    auto pr = smp.m_tau_conditional(ref);
    auto lf = [&](double x) {
      ChainState st = ref;
      st.m_tau = x;
      return log_joint(smp, hp, st);
    };
    const double sd = std::sqrt(pr.var);
    auto q = cond_oracle::slice_moments(lf, pr.mean - 12.0 * sd, pr.mean + 12.0 * sd);
    out.push_back({"bin_m_tau", cond_oracle::rel_err(q.mean, pr.mean),
                   cond_oracle::rel_err(q.var, pr.var)});
  }

  return out;
}

}  // namespace binary_oracle
