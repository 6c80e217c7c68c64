#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Core>
#include <json.hpp>

#include "grassfeel/param_space.hpp"

// Sequential line search over the normalized parameter cube.
//
// Each slider selection certifies that the chosen point beats both segment
// endpoints. Those pairwise preferences drive a Bradley-Terry likelihood on
// latent goodness values with an ARD squared-exponential GP prior. The MAP
// goodness of the observed points is found by Newton ascent; a GP regression
// on those values gives the predictive mean/variance for expected
// improvement. The next slider runs from the incumbent to the EI maximizer.

namespace grassfeel {

class ModelError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Cholesky of the kernel matrix failed.
class NotPositiveDefiniteError : public ModelError {
 public:
  using ModelError::ModelError;
};

/// Prediction requested while MAP values lag behind the observations.
class StaleModelError : public ModelError {
 public:
  using ModelError::ModelError;
};

struct GPConfig {
  double signal_variance = 1.0;
  std::array<double, kParamCount> lengthscales = filled_lengthscales(0.5);
  double noise_variance = 1e-4;
  double btl_scale = 0.1;
  std::uint64_t seed = 0;

  static constexpr std::array<double, kParamCount> filled_lengthscales(double l) {
    std::array<double, kParamCount> out{};
    for (auto& v : out) v = l;
    return out;
  }

  /// Throws std::invalid_argument unless every field is positive.
  void validate() const;
};

struct PreferenceTriple {
  std::size_t winner = 0;
  std::vector<std::size_t> losers;

  bool operator==(const PreferenceTriple&) const = default;
};

/// Random draws for iteration i come from a stream derived from (seed, i),
/// so the seed and iteration counter are the whole generator state.
struct OptimizerState {
  std::vector<ParamVector> X;
  std::vector<PreferenceTriple> prefs;
  std::vector<double> map_goodness;
  bool map_current = true;
  std::size_t incumbent = 0;
  int iteration = 0;
  std::uint64_t seed = 0;

  bool operator==(const OptimizerState&) const = default;
};

/// Empty state whose random streams derive from cfg.seed.
OptimizerState make_optimizer_state(const GPConfig& cfg);

struct SliderSegment {
  ParamVector x0;
  ParamVector x1;

  bool operator==(const SliderSegment&) const = default;
};

double kernel(const ParamVector& a, const ParamVector& b, const GPConfig& cfg);

/// Kernel matrix over X with noise_variance added on the diagonal.
Eigen::MatrixXd kernel_matrix(const std::vector<ParamVector>& X, const GPConfig& cfg);

/// P(winner ≻ loser) = 1 / (1 + exp(-(g_w - g_l) / s)).
double pref_likelihood(double g_winner, double g_loser, double scale);

struct LogPosterior {
  double value = 0.0;
  Eigen::VectorXd gradient;
};

/// Σ log P(w ≻ l) - ½ gᵀ K⁻¹ g with its analytic gradient. Throws
/// NotPositiveDefiniteError when K cannot be factored and
/// std::invalid_argument when g does not match X.
LogPosterior log_posterior(const Eigen::VectorXd& g, const OptimizerState& state,
                           const GPConfig& cfg);

struct MapFit {
  Eigen::VectorXd goodness;
  int iterations = 0;
  double gradient_norm = 0.0;  // ∞-norm at the returned point
  bool converged = false;
};

inline constexpr double kMapGradientTolerance = 1e-6;
inline constexpr int kMapMaxIterations = 500;

/// Damped Newton ascent from g = 0. `converged` is false when the gradient
/// tolerance was not met within the iteration budget.
MapFit map_estimate(const OptimizerState& state, const GPConfig& cfg);

struct Prediction {
  double mean = 0.0;
  double variance = 0.0;
};

/// Factored GP regression on the current MAP values; reuse it when
/// predicting at many points.
class GoodnessPosterior {
 public:
  /// Throws StaleModelError unless state.map_goodness is current.
  GoodnessPosterior(const OptimizerState& state, const GPConfig& cfg);

  Prediction predict(const ParamVector& x) const;
  double incumbent_value() const { return incumbent_value_; }

 private:
  std::vector<ParamVector> X_;
  GPConfig cfg_;
  Eigen::LLT<Eigen::MatrixXd> llt_;
  Eigen::VectorXd alpha_;
  double incumbent_value_ = 0.0;
};

Prediction posterior_predict(const ParamVector& x, const OptimizerState& state,
                             const GPConfig& cfg);

/// Closed-form EI against incumbent value `best`; max(mean - best, 0) when
/// the variance vanishes.
double expected_improvement(double mean, double variance, double best);
double expected_improvement(const ParamVector& x, const OptimizerState& state,
                            const GPConfig& cfg);

inline constexpr int kEiCandidates = 1024;
inline constexpr int kEiPolishSteps = 50;

/// Best of kEiCandidates shifted-Halton points, then one coordinate-wise
/// golden-section pass of kEiPolishSteps reductions per axis.
ParamVector argmax_ei(const OptimizerState& state, const GPConfig& cfg);

SliderSegment next_slider(const OptimizerState& state, const GPConfig& cfg);

/// (1 - t)·x0 + t·x1. Throws std::out_of_range for t outside [0, 1].
ParamVector slider_point(const SliderSegment& seg, double t);

/// Index of an observation within `tol` (Euclidean) of x.
std::optional<std::size_t> find_observation(const std::vector<ParamVector>& X,
                                            const ParamVector& x, double tol);

OptimizerState incorporate_choice(const OptimizerState& state, const SliderSegment& seg,
                                  double t_chosen, const GPConfig& cfg);

nlohmann::json optimizer_to_json(const OptimizerState& state);
OptimizerState optimizer_from_json(const nlohmann::json& j);
nlohmann::json gp_config_to_json(const GPConfig& cfg);
GPConfig gp_config_from_json(const nlohmann::json& j, GPConfig defaults = {});

}  // namespace grassfeel
