#include "hrdd/gibbs_continuous.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <string>

#include "hrdd/errors.hpp"
#include "hrdd/vecops.hpp"

namespace hrdd {

namespace {

// block ids for RNG stream forking
enum : std::uint64_t {
  kBlockOmega = 1,
  kBlockTau = 2,
  kBlockSpike = 3,
  kBlockPi = 4,
  kBlockBeta = 5,
  kBlockPsi = 6,
  kBlockMean = 7,
  kBlockOutlier = 8,
  kBlockWMix = 9,
  kBlockResponse = 10,
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

// precision and linear term of the beta_g conditional; `e_no_beta` = y - tau w
void beta_system(const GroupDesign& d, const std::vector<double>& u,
                 const std::vector<double>& e_no_beta, double omega,
                 const std::vector<double>& psi_beta,
                 const std::vector<double>& m_beta, Eigen::MatrixXd& prec,
                 Eigen::VectorXd& B) {
  const std::size_t n = d.n();
  const int p = static_cast<int>(d.p());
  prec.resize(p, p);
  B.resize(p);
  for (int a = 0; a < p; ++a) {
    const auto& za = d.z_col[static_cast<std::size_t>(a)];
    for (int b = a; b < p; ++b) {
      const double v = omega * vecops::dot4(u.data(), d.k.data(), za.data(),
                                            d.z_col[static_cast<std::size_t>(b)].data(), n);
      prec(a, b) = v;
      prec(b, a) = v;
    }
    prec(a, a) += 1.0 / psi_beta[static_cast<std::size_t>(a)];
    B(a) = omega * vecops::dot4(u.data(), d.k.data(), za.data(), e_no_beta.data(), n) +
           m_beta[static_cast<std::size_t>(a)] / psi_beta[static_cast<std::size_t>(a)];
  }
}

}  // namespace

ContinuousSampler::ContinuousSampler(const Dataset& data, const Hyperparams& hyper,
                                     std::vector<double> h, std::uint64_t seed,
                                     std::optional<double> fixed_omega)
    : hyper_(hyper), c_(data.c), seed_(seed), fixed_omega_(fixed_omega) {
  validate(data);
  const std::size_t G = data.n_groups();
  if (h.size() != G)
    throw ValidationError(ValidationError::Kind::LengthMismatch,
                          "need one bandwidth per group");
  designs_.reserve(G);
  y_.reserve(G);
  w_.reserve(G);
  x_.reserve(G);
  for (std::size_t g = 0; g < G; ++g) {
    const auto& gd = data.groups[g];
    designs_.push_back(build_design(gd, c_, h[g], hyper_.q, hyper_.kernel));
    y_.push_back(gd.y);
    x_.push_back(gd.x);
    std::vector<double> wd(gd.size());
    for (std::size_t i = 0; i < gd.size(); ++i) wd[i] = gd.w[i] ? 1.0 : 0.0;
    w_.push_back(std::move(wd));
    if (designs_.back().n_active_minus == 0 || designs_.back().n_active_plus == 0)
      warnings_.push_back("group " + std::to_string(g) +
                          ": one side of the cutoff has no kernel support; "
                          "its parameters are prior-identified");
  }
}

RngStream ContinuousSampler::block_stream(std::uint64_t sweep_idx,
                                          std::uint64_t block,
                                          std::uint64_t group) const {
  return RngStream(seed_, 0).fork(sweep_idx).fork(block).fork(group);
}

void ContinuousSampler::set_bandwidths(ChainState& s, const std::vector<double>& h) {
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
      if (designs_[g].k[i] == 0.0) {
        s.u[g][i] = 1.0;
        s.r[g][i] = 0;
      }
    }
  }
}

ChainState ContinuousSampler::init_state() const {
  const std::size_t G = designs_.size();
  const int p = hyper_.p();
  ChainState s;
  s.tau.assign(G, 0.0);
  s.beta.assign(G, std::vector<double>(static_cast<std::size_t>(p), 0.0));
  s.s.assign(G, 0);
  s.pi = 0.5;
  s.w_mix = 0.5;
  s.u.resize(G);
  s.r.resize(G);
  for (std::size_t g = 0; g < G; ++g) {
    s.u[g].assign(y_[g].size(), 1.0);
    s.r[g].assign(y_[g].size(), 0);
  }

  // per-group ridge-stabilized weighted least squares
  double wrss = 0.0, wsum = 0.0;
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
      b.noalias() += d.k[i] * y_[g][i] * xi;
    }
    A.diagonal().array() += 1e-6;
    const Eigen::VectorXd coef = A.ldlt().solve(b);
    s.tau[g] = coef(0);
    for (int j = 0; j < p; ++j) s.beta[g][static_cast<std::size_t>(j)] = coef(j + 1);
    for (std::size_t i = 0; i < n; ++i) {
      if (d.k[i] <= 0.0) continue;
      double mu = s.tau[g] * w_[g][i];
      for (int j = 0; j < p; ++j)
        mu += s.beta[g][static_cast<std::size_t>(j)] * d.z_col[static_cast<std::size_t>(j)][i];
      const double e = y_[g][i] - mu;
      wrss += d.k[i] * e * e;
      wsum += d.k[i];
    }
  }
  const double resid_var = wsum > 0.0 ? std::max(wrss / wsum, 1e-8) : 1.0;
  s.omega = fixed_omega_.value_or(1.0 / resid_var);

  // hyper-means at cross-group averages, variances empirical (floored)
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

void ContinuousSampler::residuals(std::size_t g, const ChainState& s,
                                  std::vector<double>& out) const {
  const auto& d = designs_[g];
  const std::size_t n = d.n();
  zb_.assign(n, 0.0);
  for (std::size_t j = 0; j < d.z_col.size(); ++j)
    vecops::axpy(s.beta[g][j], d.z_col[j].data(), zb_.data(), n);
  out.resize(n);
  vecops::residual(y_[g].data(), w_[g].data(), s.tau[g], zb_.data(), out.data(), n);
}

GammaParams ContinuousSampler::omega_conditional(const ChainState& s) const {
  double shape = hyper_.a_omega;
  double rate = hyper_.b_omega;
  for (std::size_t g = 0; g < designs_.size(); ++g) {
    const auto& d = designs_[g];
    const std::size_t n = d.n();
    shape += 0.5 * vecops::sum(d.k.data(), n);
    residuals(g, s, e_);
    rate += 0.5 * vecops::dot4(s.u[g].data(), d.k.data(), e_.data(), e_.data(), n);
  }
  if (!(rate > 0.0) || !std::isfinite(rate) || !std::isfinite(shape))
    throw NumericalError("omega conditional: nonpositive or non-finite rate");
  return {shape, rate};
}

void ContinuousSampler::update_omega(ChainState& s, std::uint64_t sweep_idx) {
  if (fixed_omega_) {
    s.omega = *fixed_omega_;
    return;
  }
  const auto p = omega_conditional(s);
  auto rng = block_stream(sweep_idx, kBlockOmega, 0);
  s.omega = rng.gamma_rate(p.shape, p.rate);
}

NormalParams ContinuousSampler::tau_conditional(std::size_t g,
                                                const ChainState& s) const {
  const auto& d = designs_[g];
  const std::size_t n = d.n();
  // residual with tau = 0: y - Z beta
  zb_.assign(n, 0.0);
  for (std::size_t j = 0; j < d.z_col.size(); ++j)
    vecops::axpy(s.beta[g][j], d.z_col[j].data(), zb_.data(), n);
  e_.resize(n);
  vecops::residual(y_[g].data(), w_[g].data(), 0.0, zb_.data(), e_.data(), n);

  const double suw = vecops::dot3(s.u[g].data(), d.k.data(), w_[g].data(), n);
  const double sB = vecops::dot4(s.u[g].data(), d.k.data(), w_[g].data(), e_.data(), n);
  const bool spike = s.s[g] != 0;
  const double prior_var = (spike ? hyper_.epsilon : 1.0) * s.psi_tau;
  const double prec = s.omega * suw + 1.0 / prior_var;
  if (!(prec > 0.0) || !std::isfinite(prec))
    throw NumericalError("tau conditional: nonpositive precision");
  const double B = s.omega * sB + (spike ? 0.0 : s.m_tau / s.psi_tau);
  return {B / prec, 1.0 / prec};
}

void ContinuousSampler::update_taus(ChainState& s, std::uint64_t sweep_idx) {
  for (std::size_t g = 0; g < designs_.size(); ++g) {
    const auto pr = tau_conditional(g, s);
    auto rng = block_stream(sweep_idx, kBlockTau, g);
    s.tau[g] = rng.normal(pr.mean, std::sqrt(pr.var));
  }
}

double ContinuousSampler::spike_probability(std::size_t g,
                                            const ChainState& s) const {
  const double pi = std::clamp(s.pi, 1e-15, 1.0 - 1e-15);
  const double l1 =
      log_normal_density(s.tau[g], 0.0, hyper_.epsilon * s.psi_tau) + std::log(pi);
  const double l0 =
      log_normal_density(s.tau[g], s.m_tau, s.psi_tau) + std::log1p(-pi);
  return logistic(l1 - l0);
}

BetaParams ContinuousSampler::pi_conditional(const ChainState& s) const {
  double count = 0.0;
  for (auto v : s.s) count += v;
  const double G = static_cast<double>(designs_.size());
  return {hyper_.a_pi + count, hyper_.b_pi + G - count};
}

void ContinuousSampler::update_spikes(ChainState& s, std::uint64_t sweep_idx) {
  if (!hyper_.use_spike_slab) return;
  for (std::size_t g = 0; g < designs_.size(); ++g) {
    auto rng = block_stream(sweep_idx, kBlockSpike, g);
    s.s[g] = rng.bernoulli(spike_probability(g, s)) ? 1 : 0;
  }
  const auto pr = pi_conditional(s);
  auto rng = block_stream(sweep_idx, kBlockPi, 0);
  s.pi = rng.beta(pr.a, pr.b);
}

MvnParams ContinuousSampler::beta_conditional(std::size_t g,
                                              const ChainState& s) const {
  const auto& d = designs_[g];
  const std::size_t n = d.n();
  const int p = hyper_.p();
  // residual without the Z part: y - tau w
  tmp_ = y_[g];
  vecops::axpy(-s.tau[g], w_[g].data(), tmp_.data(), n);

  Eigen::MatrixXd prec;
  Eigen::VectorXd B;
  beta_system(d, s.u[g], tmp_, s.omega, s.psi_beta, s.m_beta, prec, B);
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

void ContinuousSampler::update_betas(ChainState& s, std::uint64_t sweep_idx) {
  const int p = hyper_.p();
  for (std::size_t g = 0; g < designs_.size(); ++g) {
    const auto& d = designs_[g];
    const std::size_t n = d.n();
    tmp_ = y_[g];
    vecops::axpy(-s.tau[g], w_[g].data(), tmp_.data(), n);
    Eigen::MatrixXd prec;
    Eigen::VectorXd B;
    beta_system(d, s.u[g], tmp_, s.omega, s.psi_beta, s.m_beta, prec, B);
    Eigen::LLT<Eigen::MatrixXd> llt(prec);
    if (llt.info() != Eigen::Success)
      throw NumericalError("beta update: precision not positive definite");
    const Eigen::VectorXd mean = llt.solve(B);
    auto rng = block_stream(sweep_idx, kBlockBeta, g);
    Eigen::VectorXd z(p);
    for (int j = 0; j < p; ++j) z(j) = rng.normal();
    // draw = mean + L^{-T} z
    const Eigen::VectorXd dev = llt.matrixU().solve(z);
    for (int j = 0; j < p; ++j)
      s.beta[g][static_cast<std::size_t>(j)] = mean(j) + dev(j);
  }
}

InvGammaParams ContinuousSampler::psi_tau_conditional(const ChainState& s) const {
  const double G = static_cast<double>(designs_.size());
  double rate = hyper_.b_psi;
  for (std::size_t g = 0; g < designs_.size(); ++g) {
    if (s.s[g]) {
      rate += 0.5 * s.tau[g] * s.tau[g] / hyper_.epsilon;
    } else {
      const double d = s.tau[g] - s.m_tau;
      rate += 0.5 * d * d;
    }
  }
  return {hyper_.a_psi + 0.5 * G, rate};
}

InvGammaParams ContinuousSampler::psi_beta_conditional(int k,
                                                       const ChainState& s) const {
  const double G = static_cast<double>(designs_.size());
  double rate = hyper_.b_psi;
  for (std::size_t g = 0; g < designs_.size(); ++g) {
    const double d = s.beta[g][static_cast<std::size_t>(k)] - s.m_beta[static_cast<std::size_t>(k)];
    rate += 0.5 * d * d;
  }
  return {hyper_.a_psi + 0.5 * G, rate};
}

void ContinuousSampler::update_hyper_variances(ChainState& s,
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

NormalParams ContinuousSampler::m_tau_conditional(const ChainState& s) const {
  double prec = 1.0 / hyper_.b_m;
  double B = hyper_.a_m / hyper_.b_m;
  for (std::size_t g = 0; g < designs_.size(); ++g) {
    if (s.s[g]) continue;
    prec += 1.0 / s.psi_tau;
    B += s.tau[g] / s.psi_tau;
  }
  return {B / prec, 1.0 / prec};
}

NormalParams ContinuousSampler::m_beta_conditional(int k,
                                                   const ChainState& s) const {
  const double G = static_cast<double>(designs_.size());
  const double psi = s.psi_beta[static_cast<std::size_t>(k)];
  const double prec = G / psi + 1.0 / hyper_.b_m;
  double B = hyper_.a_m / hyper_.b_m;
  for (std::size_t g = 0; g < designs_.size(); ++g)
    B += s.beta[g][static_cast<std::size_t>(k)] / psi;
  return {B / prec, 1.0 / prec};
}

void ContinuousSampler::update_hyper_means(ChainState& s, std::uint64_t sweep_idx) {
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

double ContinuousSampler::outlier_probability(std::size_t g, std::size_t i,
                                              const ChainState& s) const {
  const auto& d = designs_[g];
  if (d.k[i] == 0.0) return 0.0;
  residuals(g, s, e_);
  const double k = d.k[i];
  const double q = 0.5 * s.omega * k * e_[i] * e_[i];
  const double nu = hyper_.nu;
  const double log_m1_m0 = std::lgamma(nu + 0.5 * k) - std::lgamma(nu) +
                           nu * std::log(nu) -
                           (nu + 0.5 * k) * std::log(nu + q) + q;
  const double w = std::clamp(s.w_mix, 1e-15, 1.0 - 1e-15);
  return logistic(log_m1_m0 + std::log(w) - std::log1p(-w));
}

GammaParams ContinuousSampler::u_conditional(std::size_t g, std::size_t i,
                                             const ChainState& s) const {
  const auto& d = designs_[g];
  residuals(g, s, e_);
  const double q = 0.5 * s.omega * d.k[i] * e_[i] * e_[i];
  return {hyper_.nu + 0.5 * d.k[i], hyper_.nu + q};
}

BetaParams ContinuousSampler::w_conditional(const ChainState& s) const {
  double r_sum = 0.0, n_eff = 0.0;
  for (std::size_t g = 0; g < designs_.size(); ++g) {
    const auto& d = designs_[g];
    for (std::size_t i = 0; i < d.k.size(); ++i) {
      if (d.k[i] == 0.0) continue;
      n_eff += 1.0;
      r_sum += s.r[g][i];
    }
  }
  return {hyper_.a_w + r_sum, hyper_.b_w + n_eff - r_sum};
}

void ContinuousSampler::update_outliers(ChainState& s, std::uint64_t sweep_idx) {
  if (!hyper_.use_robust_mixture) return;
  const double nu = hyper_.nu;
  const double w = std::clamp(s.w_mix, 1e-15, 1.0 - 1e-15);
  const double log_odds_w = std::log(w) - std::log1p(-w);
  for (std::size_t g = 0; g < designs_.size(); ++g) {
    const auto& d = designs_[g];
    residuals(g, s, e_);
    auto rng = block_stream(sweep_idx, kBlockOutlier, g);
    for (std::size_t i = 0; i < d.k.size(); ++i) {
      const double k = d.k[i];
      if (k == 0.0) {
        s.r[g][i] = 0;
        s.u[g][i] = 1.0;
        continue;
      }
      const double q = 0.5 * s.omega * k * e_[i] * e_[i];
      const double log_m1_m0 = std::lgamma(nu + 0.5 * k) - std::lgamma(nu) +
                               nu * std::log(nu) -
                               (nu + 0.5 * k) * std::log(nu + q) + q;
      const bool outlier = rng.bernoulli(logistic(log_m1_m0 + log_odds_w));
      s.r[g][i] = outlier ? 1 : 0;
      s.u[g][i] = outlier ? rng.gamma_rate(nu + 0.5 * k, nu + q) : 1.0;
    }
  }
  const auto pr = w_conditional(s);
  auto rng = block_stream(sweep_idx, kBlockWMix, 0);
  s.w_mix = rng.beta(pr.a, pr.b);
}

void ContinuousSampler::sweep(ChainState& s, std::uint64_t sweep_idx) {
  update_omega(s, sweep_idx);
  update_taus(s, sweep_idx);
  update_spikes(s, sweep_idx);
  update_betas(s, sweep_idx);
  update_hyper_variances(s, sweep_idx);
  update_hyper_means(s, sweep_idx);
  update_outliers(s, sweep_idx);
}

void ContinuousSampler::draw_response_from_model(ChainState& s,
                                                 std::uint64_t sweep_idx) {
  for (std::size_t g = 0; g < designs_.size(); ++g) {
    const auto& d = designs_[g];
    const std::size_t n = d.n();
    zb_.assign(n, 0.0);
    for (std::size_t j = 0; j < d.z_col.size(); ++j)
      vecops::axpy(s.beta[g][j], d.z_col[j].data(), zb_.data(), n);
    auto rng = block_stream(sweep_idx, kBlockResponse, g);
    for (std::size_t i = 0; i < n; ++i) {
      if (d.k[i] <= 0.0) continue;
      const double mu = s.tau[g] * w_[g][i] + zb_[i];
      const double sd = 1.0 / std::sqrt(s.omega * s.u[g][i] * d.k[i]);
      y_[g][i] = rng.normal(mu, sd);
    }
  }
}

PosteriorDraws run_chain_continuous(const ContinuousModelSpec& spec) {
  if (spec.n_burn < 0 || spec.n_iter <= spec.n_burn)
    throw DomainError("run_chain_continuous: need n_iter > n_burn >= 0");
  for (double h : spec.h)
    if (!(h > 0.0)) throw DomainError("run_chain_continuous: bandwidths must be > 0");
  ContinuousSampler sampler(spec.dataset, spec.hyper, spec.h, spec.seed,
                            spec.fixed_omega);
  ChainState state = sampler.init_state();
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
      out.effect.push_back(state.tau);
    }
  }
  out.summary = summarize_effects(out.effect);
  out.warnings = sampler.warnings();
  return out;
}

}  // namespace hrdd
