#include "grassfeel/synthetic_user.hpp"

#include <cmath>
#include <stdexcept>

namespace grassfeel {

double goodness(const LatentGoodness& f, const ParamVector& x) {
  const double d = distance(x, f.target);
  return std::exp(-d * d / (2.0 * f.width * f.width));
}

double choose(const ChoicePolicy& policy, const LatentGoodness& f, const SliderSegment& seg,
              Rng& rng) {
  if (policy.grid_points < 2) throw std::invalid_argument("choice grid needs at least 2 points");
  const int last = policy.grid_points - 1;
  double best_t = 0.0;
  double best_score = -INFINITY;
  for (int i = 0; i <= last; ++i) {
    const double t = static_cast<double>(i) / last;
    double score = goodness(f, slider_point(seg, t));
    if (policy.noise_scale > 0.0) score += policy.noise_scale * rng.gumbel();
    if (score > best_score) {
      best_score = score;
      best_t = t;
    }
  }
  return best_t;
}

double choose(const ChoicePolicy& policy, const LatentGoodness& f, const SliderSegment& seg) {
  if (policy.noise_scale > 0.0) {
    throw std::invalid_argument("noisy choice needs a random generator");
  }
  Rng unused(policy.seed);
  return choose(policy, f, seg, unused);
}

}  // namespace grassfeel
