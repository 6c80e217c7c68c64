#include "grassfeel/preference_optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "grassfeel/rng.hpp"

namespace grassfeel {

namespace {

constexpr double kDuplicateTol = 1e-9;
constexpr double kCoincidentTol = 1e-6;
constexpr double kMinSegmentLength = 1e-6;
constexpr double kPolishWindow = 0.2;
constexpr std::array<int, kParamCount> kHaltonBases{2, 3, 5, 7, 11, 13, 17};

// Stream tags for (seed, iteration) derived generators.
constexpr std::uint64_t kStreamSlider = 1;
constexpr std::uint64_t kStreamHalton = 2;

Rng iteration_rng(const OptimizerState& state, std::uint64_t stream) {
  return Rng(derive_seed(state.seed, (static_cast<std::uint64_t>(state.iteration) << 8) | stream));
}

ParamVector random_point(Rng& rng) {
  ParamVector v;
  for (auto& x : v.values) x = rng.uniform();
  return v;
}

// log σ(z) without overflow.
double log_sigmoid(double z) {
  return z >= 0.0 ? -std::log1p(std::exp(-z)) : z - std::log1p(std::exp(z));
}

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

Eigen::LLT<Eigen::MatrixXd> factor(const Eigen::MatrixXd& K) {
  Eigen::LLT<Eigen::MatrixXd> llt(K);
  if (llt.info() != Eigen::Success) {
    throw NotPositiveDefiniteError("kernel matrix is not positive definite");
  }
  return llt;
}

void check_prefs(const OptimizerState& state) {
  for (const auto& p : state.prefs) {
    if (p.winner >= state.X.size()) throw std::invalid_argument("preference winner out of range");
    for (auto l : p.losers) {
      if (l >= state.X.size() || l == p.winner) {
        throw std::invalid_argument("preference loser invalid");
      }
    }
  }
}

// Likelihood part of the objective: value, gradient and the positive
// semi-definite curvature matrix W (negated Hessian).
struct LikelihoodTerms {
  double value = 0.0;
  Eigen::VectorXd gradient;
  Eigen::MatrixXd curvature;
};

LikelihoodTerms likelihood_terms(const Eigen::VectorXd& g, const OptimizerState& state,
                                 const GPConfig& cfg, bool with_curvature) {
  const auto n = g.size();
  const double s = cfg.btl_scale;
  LikelihoodTerms out;
  out.gradient = Eigen::VectorXd::Zero(n);
  if (with_curvature) out.curvature = Eigen::MatrixXd::Zero(n, n);
  for (const auto& p : state.prefs) {
    const auto w = static_cast<Eigen::Index>(p.winner);
    for (auto loser : p.losers) {
      const auto l = static_cast<Eigen::Index>(loser);
      const double z = (g(w) - g(l)) / s;
      out.value += log_sigmoid(z);
      const double d = sigmoid(-z) / s;
      out.gradient(w) += d;
      out.gradient(l) -= d;
      if (with_curvature) {
        const double c = sigmoid(z) * sigmoid(-z) / (s * s);
        out.curvature(w, w) += c;
        out.curvature(l, l) += c;
        out.curvature(w, l) -= c;
        out.curvature(l, w) -= c;
      }
    }
  }
  return out;
}

double objective(const Eigen::VectorXd& g, const OptimizerState& state, const GPConfig& cfg,
                 const Eigen::MatrixXd& K_inv) {
  return likelihood_terms(g, state, cfg, false).value - 0.5 * g.dot(K_inv * g);
}

std::size_t argmax_index(const std::vector<double>& values) {
  return static_cast<std::size_t>(
      std::distance(values.begin(), std::max_element(values.begin(), values.end())));
}

double radical_inverse(std::uint64_t index, int base) {
  double result = 0.0;
  double f = 1.0 / base;
  while (index > 0) {
    result += f * static_cast<double>(index % base);
    index /= base;
    f /= base;
  }
  return result;
}

}  // namespace

void GPConfig::validate() const {
  bool ok = signal_variance > 0.0 && noise_variance > 0.0 && btl_scale > 0.0;
  for (double l : lengthscales) ok = ok && l > 0.0;
  if (!ok) throw std::invalid_argument("GP hyperparameters must all be positive");
}

OptimizerState make_optimizer_state(const GPConfig& cfg) {
  cfg.validate();
  OptimizerState state;
  state.seed = cfg.seed;
  return state;
}

double kernel(const ParamVector& a, const ParamVector& b, const GPConfig& cfg) {
  double r2 = 0.0;
  for (std::size_t d = 0; d < kParamCount; ++d) {
    const double diff = (a[d] - b[d]) / cfg.lengthscales[d];
    r2 += diff * diff;
  }
  return cfg.signal_variance * std::exp(-0.5 * r2);
}

Eigen::MatrixXd kernel_matrix(const std::vector<ParamVector>& X, const GPConfig& cfg) {
  const auto n = static_cast<Eigen::Index>(X.size());
  Eigen::MatrixXd K(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    K(i, i) = cfg.signal_variance + cfg.noise_variance;
    for (Eigen::Index j = 0; j < i; ++j) {
      K(i, j) = K(j, i) = kernel(X[i], X[j], cfg);
    }
  }
  return K;
}

double pref_likelihood(double g_winner, double g_loser, double scale) {
  if (!(scale > 0.0)) throw std::invalid_argument("preference scale must be positive");
  return sigmoid((g_winner - g_loser) / scale);
}

LogPosterior log_posterior(const Eigen::VectorXd& g, const OptimizerState& state,
                           const GPConfig& cfg) {
  if (static_cast<std::size_t>(g.size()) != state.X.size()) {
    throw std::invalid_argument("goodness vector does not match observations");
  }
  check_prefs(state);
  const auto llt = factor(kernel_matrix(state.X, cfg));
  const Eigen::VectorXd K_inv_g = llt.solve(g);
  auto lik = likelihood_terms(g, state, cfg, false);
  return {lik.value - 0.5 * g.dot(K_inv_g), lik.gradient - K_inv_g};
}

MapFit map_estimate(const OptimizerState& state, const GPConfig& cfg) {
  if (state.X.empty()) throw std::invalid_argument("MAP estimate needs at least one observation");
  check_prefs(state);
  const auto n = static_cast<Eigen::Index>(state.X.size());
  const auto llt = factor(kernel_matrix(state.X, cfg));
  const Eigen::MatrixXd K_inv = llt.solve(Eigen::MatrixXd::Identity(n, n));

  MapFit fit;
  fit.goodness = Eigen::VectorXd::Zero(n);
  double value = objective(fit.goodness, state, cfg, K_inv);
  for (fit.iterations = 0; fit.iterations <= kMapMaxIterations; ++fit.iterations) {
    const auto lik = likelihood_terms(fit.goodness, state, cfg, true);
    const Eigen::VectorXd grad = lik.gradient - K_inv * fit.goodness;
    fit.gradient_norm = grad.lpNorm<Eigen::Infinity>();
    if (fit.gradient_norm <= kMapGradientTolerance) {
      fit.converged = true;
      break;
    }
    if (fit.iterations == kMapMaxIterations) break;

    // The objective is concave, so the Newton system is positive definite.
    const Eigen::MatrixXd A = lik.curvature + K_inv;
    Eigen::LDLT<Eigen::MatrixXd> newton(A);
    Eigen::VectorXd step = newton.solve(grad);
    if (newton.info() != Eigen::Success || !step.allFinite()) step = grad;

    double alpha = 1.0;
    bool improved = false;
    for (int k = 0; k < 40; ++k, alpha *= 0.5) {
      const Eigen::VectorXd trial = fit.goodness + alpha * step;
      const double trial_value = objective(trial, state, cfg, K_inv);
      if (trial_value >= value) {
        fit.goodness = trial;
        value = trial_value;
        improved = true;
        break;
      }
    }
    if (!improved) break;  // stalled at rounding level
  }
  return fit;
}

GoodnessPosterior::GoodnessPosterior(const OptimizerState& state, const GPConfig& cfg)
    : X_(state.X), cfg_(cfg) {
  if (!state.map_current || state.map_goodness.size() != state.X.size() || state.X.empty()) {
    throw StaleModelError("MAP goodness values are not current");
  }
  llt_ = factor(kernel_matrix(X_, cfg_));
  const Eigen::VectorXd g =
      Eigen::Map<const Eigen::VectorXd>(state.map_goodness.data(),
                                        static_cast<Eigen::Index>(state.map_goodness.size()));
  alpha_ = llt_.solve(g);
  incumbent_value_ = state.map_goodness[state.incumbent];
}

Prediction GoodnessPosterior::predict(const ParamVector& x) const {
  const auto n = static_cast<Eigen::Index>(X_.size());
  Eigen::VectorXd k_star(n);
  for (Eigen::Index i = 0; i < n; ++i) k_star(i) = kernel(x, X_[i], cfg_);
  const Eigen::VectorXd v = llt_.matrixL().solve(k_star);
  Prediction out;
  out.mean = k_star.dot(alpha_);
  out.variance = std::max(0.0, cfg_.signal_variance - v.squaredNorm());
  return out;
}

Prediction posterior_predict(const ParamVector& x, const OptimizerState& state,
                             const GPConfig& cfg) {
  return GoodnessPosterior(state, cfg).predict(x);
}

double expected_improvement(double mean, double variance, double best) {
  const double sigma = std::sqrt(std::max(variance, 0.0));
  const double delta = mean - best;
  if (sigma <= 0.0) return std::max(delta, 0.0);
  const double z = delta / sigma;
  const double cdf = 0.5 * std::erfc(-z / std::numbers::sqrt2);
  const double pdf = std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi);
  return std::max(0.0, delta * cdf + sigma * pdf);
}

double expected_improvement(const ParamVector& x, const OptimizerState& state,
                            const GPConfig& cfg) {
  const GoodnessPosterior post(state, cfg);
  const auto p = post.predict(x);
  return expected_improvement(p.mean, p.variance, post.incumbent_value());
}

ParamVector argmax_ei(const OptimizerState& state, const GPConfig& cfg) {
  const GoodnessPosterior post(state, cfg);
  const auto ei = [&](const ParamVector& x) {
    const auto p = post.predict(x);
    return expected_improvement(p.mean, p.variance, post.incumbent_value());
  };

  Rng rng = iteration_rng(state, kStreamHalton);
  std::array<double, kParamCount> shift{};
  for (auto& s : shift) s = rng.uniform();

  ParamVector best;
  double best_ei = -1.0;
  for (int i = 0; i < kEiCandidates; ++i) {
    ParamVector x;
    for (std::size_t d = 0; d < kParamCount; ++d) {
      const double h = radical_inverse(static_cast<std::uint64_t>(i) + 1, kHaltonBases[d]) + shift[d];
      x[d] = h - std::floor(h);
    }
    const double value = ei(x);
    if (value > best_ei) {
      best_ei = value;
      best = x;
    }
  }

  constexpr double kInvPhi = 0.6180339887498949;
  for (std::size_t d = 0; d < kParamCount; ++d) {
    double lo = std::max(0.0, best[d] - 0.5 * kPolishWindow);
    double hi = std::min(1.0, best[d] + 0.5 * kPolishWindow);
    ParamVector probe = best;
    const auto at = [&](double v) {
      probe[d] = v;
      return ei(probe);
    };
    double c = hi - kInvPhi * (hi - lo);
    double e = lo + kInvPhi * (hi - lo);
    double fc = at(c);
    double fe = at(e);
    for (int step = 0; step < kEiPolishSteps; ++step) {
      if (fc >= fe) {
        hi = e;
        e = c;
        fe = fc;
        c = hi - kInvPhi * (hi - lo);
        fc = at(c);
      } else {
        lo = c;
        c = e;
        fc = fe;
        e = lo + kInvPhi * (hi - lo);
        fe = at(e);
      }
    }
    const double candidate = fc >= fe ? c : e;
    const double candidate_ei = std::max(fc, fe);
    if (candidate_ei > best_ei) {
      best[d] = candidate;
      best_ei = candidate_ei;
    }
  }
  return best;
}

SliderSegment next_slider(const OptimizerState& state, const GPConfig& cfg) {
  Rng rng = iteration_rng(state, kStreamSlider);
  SliderSegment seg;
  if (state.iteration == 0 || state.X.empty()) {
    seg.x0 = ParamVector::filled(0.5);
    seg.x1 = random_point(rng);
  } else {
    seg.x0 = state.X[state.incumbent];
    seg.x1 = argmax_ei(state, cfg);
  }
  while (distance(seg.x0, seg.x1) < kMinSegmentLength) seg.x1 = random_point(rng);
  return seg;
}

ParamVector slider_point(const SliderSegment& seg, double t) {
  if (!(t >= 0.0 && t <= 1.0)) throw std::out_of_range("slider position outside [0, 1]");
  ParamVector out;
  for (std::size_t d = 0; d < kParamCount; ++d) {
    out[d] = std::clamp(std::lerp(seg.x0[d], seg.x1[d], t), 0.0, 1.0);
  }
  return out;
}

std::optional<std::size_t> find_observation(const std::vector<ParamVector>& X,
                                            const ParamVector& x, double tol) {
  for (std::size_t i = 0; i < X.size(); ++i) {
    if (distance(X[i], x) <= tol) return i;
  }
  return std::nullopt;
}

OptimizerState incorporate_choice(const OptimizerState& state, const SliderSegment& seg,
                                  double t_chosen, const GPConfig& cfg) {
  const ParamVector chosen = slider_point(seg, t_chosen);
  OptimizerState next = state;
  const auto observe = [&next](const ParamVector& x) {
    if (auto idx = find_observation(next.X, x, kDuplicateTol)) return *idx;
    next.X.push_back(x);
    return next.X.size() - 1;
  };
  const std::size_t i0 = observe(seg.x0);
  const std::size_t i1 = observe(seg.x1);
  const std::size_t ic = observe(chosen);

  PreferenceTriple triple{ic, {}};
  for (auto [idx, endpoint] : {std::pair{i0, &seg.x0}, std::pair{i1, &seg.x1}}) {
    if (idx != ic && distance(*endpoint, chosen) >= kCoincidentTol) triple.losers.push_back(idx);
  }
  if (!triple.losers.empty()) next.prefs.push_back(std::move(triple));

  const MapFit fit = map_estimate(next, cfg);
  next.map_goodness.assign(fit.goodness.data(), fit.goodness.data() + fit.goodness.size());
  next.map_current = true;
  next.incumbent = argmax_index(next.map_goodness);
  ++next.iteration;
  return next;
}

nlohmann::json optimizer_to_json(const OptimizerState& state) {
  nlohmann::json prefs = nlohmann::json::array();
  for (const auto& p : state.prefs) prefs.push_back({{"winner", p.winner}, {"losers", p.losers}});
  return {{"X", state.X},
          {"prefs", prefs},
          {"goodness", state.map_goodness},
          {"map_current", state.map_current},
          {"incumbent", state.incumbent},
          {"iteration", state.iteration},
          {"seed", state.seed}};
}

OptimizerState optimizer_from_json(const nlohmann::json& j) {
  OptimizerState s;
  j.at("X").get_to(s.X);
  for (const auto& p : j.at("prefs")) {
    s.prefs.push_back({p.at("winner").get<std::size_t>(), p.at("losers").get<std::vector<std::size_t>>()});
  }
  j.at("goodness").get_to(s.map_goodness);
  s.map_current = j.value("map_current", s.map_goodness.size() == s.X.size());
  j.at("incumbent").get_to(s.incumbent);
  j.at("iteration").get_to(s.iteration);
  j.at("seed").get_to(s.seed);
  check_prefs(s);
  if (!s.map_goodness.empty() && s.incumbent >= s.map_goodness.size()) {
    throw std::invalid_argument("incumbent index out of range");
  }
  return s;
}

nlohmann::json gp_config_to_json(const GPConfig& cfg) {
  return {{"signal_variance", cfg.signal_variance},
          {"lengthscales", cfg.lengthscales},
          {"noise_variance", cfg.noise_variance},
          {"btl_scale", cfg.btl_scale},
          {"seed", cfg.seed}};
}

GPConfig gp_config_from_json(const nlohmann::json& j, GPConfig cfg) {
  cfg.signal_variance = j.value("signal_variance", cfg.signal_variance);
  if (j.contains("lengthscales")) {
    const auto& l = j.at("lengthscales");
    if (l.is_number()) {
      cfg.lengthscales = GPConfig::filled_lengthscales(l.get<double>());
    } else {
      l.get_to(cfg.lengthscales);
    }
  }
  cfg.noise_variance = j.value("noise_variance", cfg.noise_variance);
  cfg.btl_scale = j.value("btl_scale", cfg.btl_scale);
  cfg.seed = j.value("seed", cfg.seed);
  cfg.validate();
  return cfg;
}

}  // namespace grassfeel
