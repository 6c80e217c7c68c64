#pragma once

#include <cstdint>

#include "grassfeel/param_space.hpp"
#include "grassfeel/preference_optimizer.hpp"
#include "grassfeel/rng.hpp"

namespace grassfeel {

/// Gaussian bump exp(-‖x - target‖² / (2 w²)) standing in for a user's taste.
struct LatentGoodness {
  ParamVector target = ParamVector::filled(0.5);
  double width = 0.4;
};

struct ChoicePolicy {
  int grid_points = 101;
  double noise_scale = 0.0;  // 0 picks the true argmax
  std::uint64_t seed = 0;
};

double goodness(const LatentGoodness& f, const ParamVector& x);

/// Scores `grid_points` uniform slider positions and returns the best t.
/// With noise, each score gets noise_scale · Gumbel drawn from `rng`; ties go
/// to the smallest t.
double choose(const ChoicePolicy& policy, const LatentGoodness& f, const SliderSegment& seg,
              Rng& rng);

/// Greedy convenience overload (no randomness consumed).
double choose(const ChoicePolicy& policy, const LatentGoodness& f, const SliderSegment& seg);

}  // namespace grassfeel
