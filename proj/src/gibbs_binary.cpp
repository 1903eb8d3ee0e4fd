#include "hrdd/gibbs_binary.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <string>

#include "hrdd/errors.hpp"
#include "hrdd/polya_gamma.hpp"
#include "hrdd/vecops.hpp"

namespace hrdd {

namespace {

enum : std::uint64_t {
  kBlockPg = 1,
  kBlockTau = 2,
  kBlockSpike = 3,
  kBlockPi = 4,
  kBlockBeta = 5,
  kBlockPsi = 6,
  kBlockMean = 7,
};

double log_normal_density(double x, double mean, double var) {
  const double d = x - mean;
  return -0.5 * std::log(2.0 * 3.14159265358979323846 * var) - 0.5 * d * d / var;
}

double logistic(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

}  // namespace

double tau_star_transform(double tau, double beta1) {
  return logistic(tau + beta1) - logistic(beta1);
}

BinarySampler::BinarySampler(const Dataset& data, const Hyperparams& hyper,
                             std::vector<double> h, std::uint64_t seed)
    : hyper_(hyper), c_(data.c), seed_(seed) {
  validate(data);
  if (data.outcome_kind != OutcomeKind::binary)
    throw ValidationError(ValidationError::Kind::MixedOutcomeType,
                          "binary sampler requires a binary-outcome dataset");
  const std::size_t G = data.n_groups();
  if (h.size() != G)
    throw ValidationError(ValidationError::Kind::LengthMismatch,
                          "need one bandwidth per group");
  designs_.reserve(G);
  for (std::size_t g = 0; g < G; ++g) {
    const auto& gd = data.groups[g];
    designs_.push_back(build_design(gd, c_, h[g], hyper_.q, hyper_.kernel));
    y_.push_back(gd.y);
    x_.push_back(gd.x);
    std::vector<double> wd(gd.size());
    for (std::size_t i = 0; i < gd.size(); ++i) wd[i] = gd.w[i] ? 1.0 : 0.0;
    w_.push_back(std::move(wd));
    std::vector<double> kap(gd.size());
    for (std::size_t i = 0; i < gd.size(); ++i)
      kap[i] = designs_[g].k[i] * (gd.y[i] - 0.5);
    kappa_.push_back(std::move(kap));
    if (designs_.back().n_active_minus == 0 || designs_.back().n_active_plus == 0)
      warnings_.push_back("group " + std::to_string(g) +
                          ": one side of the cutoff has no kernel support; "
                          "its parameters are prior-identified");
  }
}

RngStream BinarySampler::block_stream(std::uint64_t sweep_idx,
                                      std::uint64_t block,
                                      std::uint64_t group) const {
  return RngStream(seed_, 0).fork(sweep_idx).fork(block).fork(group);
}

void BinarySampler::set_bandwidths(ChainState& s, const std::vector<double>& h) {
  if (h.size() != designs_.size())
    throw ValidationError(ValidationError::Kind::LengthMismatch,
                          "need one bandwidth per group");
  for (std::size_t g = 0; g < designs_.size(); ++g) {
    GroupData gd;
    gd.x = x_[g];
    gd.y = y_[g];
    gd.w.resize(w_[g].size());
    for (std::size_t i = 0; i < w_[g].size(); ++i)
      gd.w[i] = w_[g][i] > 0.5 ? 1 : 0;
    designs_[g] = build_design(gd, c_, h[g], hyper_.q, hyper_.kernel);
    for (std::size_t i = 0; i < designs_[g].k.size(); ++i) {
      kappa_[g][i] = designs_[g].k[i] * (y_[g][i] - 0.5);
      if (designs_[g].k[i] == 0.0 && !s.omega_pg.empty()) s.omega_pg[g][i] = 0.0;
    }
  }
}

ChainState BinarySampler::init_state() const {
  const std::size_t G = designs_.size();
  const int p = hyper_.p();
  ChainState s;
  s.tau.assign(G, 0.0);
  s.beta.assign(G, std::vector<double>(static_cast<std::size_t>(p), 0.0));
  s.s.assign(G, 0);
  s.pi = 0.5;
  s.omega_pg.resize(G);

  // first-order logit scale: regress 4 (y - 1/2) as in the continuous case
  for (std::size_t g = 0; g < G; ++g) {
    const auto& d = designs_[g];
    const std::size_t n = d.n();
    const int cols = p + 1;
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(cols, cols);
    Eigen::VectorXd b = Eigen::VectorXd::Zero(cols);
    for (std::size_t i = 0; i < n; ++i) {
      if (d.k[i] <= 0.0) continue;
      Eigen::VectorXd xi(cols);
      xi(0) = w_[g][i];
      for (int j = 0; j < p; ++j) xi(j + 1) = d.z_col[static_cast<std::size_t>(j)][i];
      A.noalias() += d.k[i] * xi * xi.transpose();
      b.noalias() += d.k[i] * 4.0 * (y_[g][i] - 0.5) * xi;
    }
    A.diagonal().array() += 1e-6;
    const Eigen::VectorXd coef = A.ldlt().solve(b);
    s.tau[g] = coef(0);
    for (int j = 0; j < p; ++j) s.beta[g][static_cast<std::size_t>(j)] = coef(j + 1);
    s.omega_pg[g].assign(n, 0.0);
    for (std::size_t i = 0; i < n; ++i)
      if (d.k[i] > 0.0) s.omega_pg[g][i] = 0.25 * d.k[i];  // PG mean at mu = 0
  }

  const double dG = static_cast<double>(G);
  double mt = 0.0;
  for (double t : s.tau) mt += t;
  mt /= dG;
  double vt = 0.0;
  for (double t : s.tau) vt += (t - mt) * (t - mt);
  vt /= dG;
  s.m_tau = mt;
  s.psi_tau = std::max(vt, 1e-4);
  s.m_beta.assign(static_cast<std::size_t>(p), 0.0);
  s.psi_beta.assign(static_cast<std::size_t>(p), 0.0);
  for (int j = 0; j < p; ++j) {
    double m = 0.0;
    for (std::size_t g = 0; g < G; ++g) m += s.beta[g][static_cast<std::size_t>(j)];
    m /= dG;
    double v = 0.0;
    for (std::size_t g = 0; g < G; ++g) {
      const double dj = s.beta[g][static_cast<std::size_t>(j)] - m;
      v += dj * dj;
    }
    v /= dG;
    s.m_beta[static_cast<std::size_t>(j)] = m;
    s.psi_beta[static_cast<std::size_t>(j)] = std::max(v, 1e-4);
  }
  return s;
}

void BinarySampler::linear_predictor(std::size_t g, const ChainState& s,
                                     std::vector<double>& out) const {
  const auto& d = designs_[g];
  const std::size_t n = d.n();
  out.assign(n, 0.0);
  for (std::size_t j = 0; j < d.z_col.size(); ++j)
    vecops::axpy(s.beta[g][j], d.z_col[j].data(), out.data(), n);
  vecops::axpy(s.tau[g], w_[g].data(), out.data(), n);
}

void BinarySampler::update_pg_latents(ChainState& s, std::uint64_t sweep_idx) {
  for (std::size_t g = 0; g < designs_.size(); ++g) {
    const auto& d = designs_[g];
    linear_predictor(g, s, tmp_);
    auto rng = block_stream(sweep_idx, kBlockPg, g);
    for (std::size_t i = 0; i < d.n(); ++i) {
      if (d.k[i] <= 0.0) {
        s.omega_pg[g][i] = 0.0;
        continue;
      }
      s.omega_pg[g][i] = pg_draw(rng, d.k[i], tmp_[i]);
    }
  }
}

NormalParams BinarySampler::tau_conditional(std::size_t g,
                                            const ChainState& s) const {
  const auto& d = designs_[g];
  const std::size_t n = d.n();
  // Z beta part of the predictor
  zb_.assign(n, 0.0);
  for (std::size_t j = 0; j < d.z_col.size(); ++j)
    vecops::axpy(s.beta[g][j], d.z_col[j].data(), zb_.data(), n);

  const double sw = vecops::dot(s.omega_pg[g].data(), w_[g].data(), n);
  const double lin = vecops::dot(w_[g].data(), kappa_[g].data(), n) -
                     vecops::dot3(w_[g].data(), s.omega_pg[g].data(), zb_.data(), n);
  const bool spike = hyper_.use_spike_slab && s.s[g] != 0;
  const double prior_var = (spike ? hyper_.epsilon : 1.0) * s.psi_tau;
  const double prec = sw + 1.0 / prior_var;
  if (!(prec > 0.0) || !std::isfinite(prec))
    throw NumericalError("tau conditional: nonpositive precision");
  const double B = lin + (spike ? 0.0 : s.m_tau / s.psi_tau);
  return {B / prec, 1.0 / prec};
}

void BinarySampler::update_taus(ChainState& s, std::uint64_t sweep_idx) {
  for (std::size_t g = 0; g < designs_.size(); ++g) {
    const auto pr = tau_conditional(g, s);
    auto rng = block_stream(sweep_idx, kBlockTau, g);
    s.tau[g] = rng.normal(pr.mean, std::sqrt(pr.var));
  }
}

double BinarySampler::spike_probability(std::size_t g,
                                        const ChainState& s) const {
  const double pi = std::clamp(s.pi, 1e-15, 1.0 - 1e-15);
  const double l1 =
      log_normal_density(s.tau[g], 0.0, hyper_.epsilon * s.psi_tau) + std::log(pi);
  const double l0 =
      log_normal_density(s.tau[g], s.m_tau, s.psi_tau) + std::log1p(-pi);
  return logistic(l1 - l0);
}

BetaParams BinarySampler::pi_conditional(const ChainState& s) const {
  double count = 0.0;
  for (auto v : s.s) count += v;
  const double G = static_cast<double>(designs_.size());
  return {hyper_.a_pi + count, hyper_.b_pi + G - count};
}

void BinarySampler::update_spikes(ChainState& s, std::uint64_t sweep_idx) {
  if (!hyper_.use_spike_slab) return;
  for (std::size_t g = 0; g < designs_.size(); ++g) {
    auto rng = block_stream(sweep_idx, kBlockSpike, g);
    s.s[g] = rng.bernoulli(spike_probability(g, s)) ? 1 : 0;
  }
  const auto pr = pi_conditional(s);
  auto rng = block_stream(sweep_idx, kBlockPi, 0);
  s.pi = rng.beta(pr.a, pr.b);
}

MvnParams BinarySampler::beta_conditional(std::size_t g,
                                          const ChainState& s) const {
  const auto& d = designs_[g];
  const std::size_t n = d.n();
  const int p = hyper_.p();
  Eigen::MatrixXd prec(p, p);
  Eigen::VectorXd B(p);
  for (int a = 0; a < p; ++a) {
    const auto& za = d.z_col[static_cast<std::size_t>(a)];
    for (int b = a; b < p; ++b) {
      const double v = vecops::dot3(s.omega_pg[g].data(), za.data(),
                                    d.z_col[static_cast<std::size_t>(b)].data(), n);
      prec(a, b) = v;
      prec(b, a) = v;
    }
    prec(a, a) += 1.0 / s.psi_beta[static_cast<std::size_t>(a)];
    B(a) = vecops::dot(za.data(), kappa_[g].data(), n) -
           s.tau[g] * vecops::dot3(s.omega_pg[g].data(), za.data(), w_[g].data(), n) +
           s.m_beta[static_cast<std::size_t>(a)] / s.psi_beta[static_cast<std::size_t>(a)];
  }
  Eigen::LLT<Eigen::MatrixXd> llt(prec);
  if (llt.info() != Eigen::Success)
    throw NumericalError("beta conditional: precision not positive definite");
  const Eigen::VectorXd mean = llt.solve(B);
  const Eigen::MatrixXd cov = llt.solve(Eigen::MatrixXd::Identity(p, p));
  MvnParams out;
  out.mean.assign(mean.data(), mean.data() + p);
  out.cov.assign(static_cast<std::size_t>(p), std::vector<double>(static_cast<std::size_t>(p)));
  for (int a = 0; a < p; ++a)
    for (int b = 0; b < p; ++b)
      out.cov[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)] = cov(a, b);
  return out;
}

void BinarySampler::update_betas(ChainState& s, std::uint64_t sweep_idx) {
  const int p = hyper_.p();
  for (std::size_t g = 0; g < designs_.size(); ++g) {
    const auto& d = designs_[g];
    const std::size_t n = d.n();
    Eigen::MatrixXd prec(p, p);
    Eigen::VectorXd B(p);
    for (int a = 0; a < p; ++a) {
      const auto& za = d.z_col[static_cast<std::size_t>(a)];
      for (int b = a; b < p; ++b) {
        const double v = vecops::dot3(s.omega_pg[g].data(), za.data(),
                                      d.z_col[static_cast<std::size_t>(b)].data(), n);
        prec(a, b) = v;
        prec(b, a) = v;
      }
      prec(a, a) += 1.0 / s.psi_beta[static_cast<std::size_t>(a)];
      B(a) = vecops::dot(za.data(), kappa_[g].data(), n) -
             s.tau[g] * vecops::dot3(s.omega_pg[g].data(), za.data(), w_[g].data(), n) +
             s.m_beta[static_cast<std::size_t>(a)] / s.psi_beta[static_cast<std::size_t>(a)];
    }
    Eigen::LLT<Eigen::MatrixXd> llt(prec);
    if (llt.info() != Eigen::Success)
      throw NumericalError("beta update: precision not positive definite");
    const Eigen::VectorXd mean = llt.solve(B);
    auto rng = block_stream(sweep_idx, kBlockBeta, g);
    Eigen::VectorXd z(p);
    for (int j = 0; j < p; ++j) z(j) = rng.normal();
    const Eigen::VectorXd dev = llt.matrixU().solve(z);
    for (int j = 0; j < p; ++j)
      s.beta[g][static_cast<std::size_t>(j)] = mean(j) + dev(j);
  }
}

InvGammaParams BinarySampler::psi_tau_conditional(const ChainState& s) const {
  const double G = static_cast<double>(designs_.size());
  double rate = hyper_.b_psi;
  for (std::size_t g = 0; g < designs_.size(); ++g) {
    if (hyper_.use_spike_slab && s.s[g]) {
      rate += 0.5 * s.tau[g] * s.tau[g] / hyper_.epsilon;
    } else {
      const double d = s.tau[g] - s.m_tau;
      rate += 0.5 * d * d;
    }
  }
  return {hyper_.a_psi + 0.5 * G, rate};
}

InvGammaParams BinarySampler::psi_beta_conditional(int k,
                                                   const ChainState& s) const {
  const double G = static_cast<double>(designs_.size());
  double rate = hyper_.b_psi;
  for (std::size_t g = 0; g < designs_.size(); ++g) {
    const double d = s.beta[g][static_cast<std::size_t>(k)] - s.m_beta[static_cast<std::size_t>(k)];
    rate += 0.5 * d * d;
  }
  return {hyper_.a_psi + 0.5 * G, rate};
}

void BinarySampler::update_hyper_variances(ChainState& s,
                                           std::uint64_t sweep_idx) {
  {
    const auto pr = psi_tau_conditional(s);
    auto rng = block_stream(sweep_idx, kBlockPsi, 0);
    s.psi_tau = rng.inv_gamma(pr.shape, pr.rate);
  }
  for (int k = 0; k < hyper_.p(); ++k) {
    const auto pr = psi_beta_conditional(k, s);
    auto rng = block_stream(sweep_idx, kBlockPsi, static_cast<std::uint64_t>(k) + 1);
    s.psi_beta[static_cast<std::size_t>(k)] = rng.inv_gamma(pr.shape, pr.rate);
  }
}

NormalParams BinarySampler::m_tau_conditional(const ChainState& s) const {
  double prec = 1.0 / hyper_.b_m;
  double B = hyper_.a_m / hyper_.b_m;
  for (std::size_t g = 0; g < designs_.size(); ++g) {
    if (hyper_.use_spike_slab && s.s[g]) continue;
    prec += 1.0 / s.psi_tau;
    B += s.tau[g] / s.psi_tau;
  }
  return {B / prec, 1.0 / prec};
}

NormalParams BinarySampler::m_beta_conditional(int k, const ChainState& s) const {
  const double G = static_cast<double>(designs_.size());
  const double psi = s.psi_beta[static_cast<std::size_t>(k)];
  const double prec = G / psi + 1.0 / hyper_.b_m;
  double B = hyper_.a_m / hyper_.b_m;
  for (std::size_t g = 0; g < designs_.size(); ++g)
    B += s.beta[g][static_cast<std::size_t>(k)] / psi;
  return {B / prec, 1.0 / prec};
}

void BinarySampler::update_hyper_means(ChainState& s, std::uint64_t sweep_idx) {
  {
    const auto pr = m_tau_conditional(s);
    auto rng = block_stream(sweep_idx, kBlockMean, 0);
    s.m_tau = rng.normal(pr.mean, std::sqrt(pr.var));
  }
  for (int k = 0; k < hyper_.p(); ++k) {
    const auto pr = m_beta_conditional(k, s);
    auto rng = block_stream(sweep_idx, kBlockMean, static_cast<std::uint64_t>(k) + 1);
    s.m_beta[static_cast<std::size_t>(k)] = rng.normal(pr.mean, std::sqrt(pr.var));
  }
}

void BinarySampler::sweep(ChainState& s, std::uint64_t sweep_idx) {
  update_pg_latents(s, sweep_idx);
  update_taus(s, sweep_idx);
  update_spikes(s, sweep_idx);
  update_betas(s, sweep_idx);
  update_hyper_variances(s, sweep_idx);
  update_hyper_means(s, sweep_idx);
}

PosteriorDraws run_chain_binary(const BinaryModelSpec& spec) {
  if (spec.n_burn < 0 || spec.n_iter <= spec.n_burn)
    throw DomainError("run_chain_binary: need n_iter > n_burn >= 0");
  for (double h : spec.h)
    if (!(h > 0.0)) throw DomainError("run_chain_binary: bandwidths must be > 0");
  BinarySampler sampler(spec.dataset, spec.hyper, spec.h, spec.seed);
  ChainState state = sampler.init_state();
  const std::size_t G = sampler.n_groups();
  PosteriorDraws out;
  out.draws.reserve(static_cast<std::size_t>(spec.n_iter - spec.n_burn));
  for (int t = 0; t < spec.n_iter; ++t) {
    try {
      sampler.sweep(state, static_cast<std::uint64_t>(t));
    } catch (const NumericalError& e) {
      throw NumericalError("iteration " + std::to_string(t) + ": " + e.what());
    }
    if (t >= spec.n_burn) {
      DrawSnapshot snap;
      snap.tau = state.tau;
      snap.beta = state.beta;
      snap.s = state.s;
      snap.pi = state.pi;
      snap.omega = state.omega;
      snap.w_mix = state.w_mix;
      snap.psi_tau = state.psi_tau;
      snap.psi_beta = state.psi_beta;
      snap.m_tau = state.m_tau;
      snap.m_beta = state.m_beta;
      out.draws.push_back(std::move(snap));
      std::vector<double> eff(G);
      for (std::size_t g = 0; g < G; ++g)
        eff[g] = tau_star_transform(state.tau[g], state.beta[g][0]);
      out.effect.push_back(std::move(eff));
    }
  }
  out.summary = summarize_effects(out.effect);
  out.warnings = sampler.warnings();
  return out;
}

}  // namespace hrdd
