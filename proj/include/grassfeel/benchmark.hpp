#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "grassfeel/preference_optimizer.hpp"
#include "grassfeel/session.hpp"
#include "grassfeel/synthetic_user.hpp"

namespace grassfeel {

struct IterationRecord {
  int iteration = 0;
  double chosen_t = 0.0;
  /// Latent goodness and distance of the optimizer's incumbent.
  double best_goodness = 0.0;
  double distance_to_target = 0.0;
};

/// CSV with header iteration,best_goodness,distance_to_target.
std::string records_to_csv(const std::vector<IterationRecord>& records);

/// Target used when none is given: uniform in [0.1, 0.9]^7, derived from seed.
ParamVector default_target(std::uint64_t seed);

struct HeadlessOptions {
  std::uint64_t seed = 0;
  int iterations = 15;
  double noise = 0.0;
  std::optional<ParamVector> target;
  int grid_points = 101;
  double width = 0.4;
};

struct HeadlessRun {
  ParamVector target;
  std::vector<IterationRecord> records;
  std::vector<EventLogEntry> log;
  std::uint64_t final_hash = 0;
};

/// Drives a Session with the synthetic user (set_slider then commit_choice
/// per iteration) using deterministic log timestamps.
HeadlessRun run_headless(SessionConfig cfg, const HeadlessOptions& opts);

enum class SegmentStrategy {
  sls,     // incumbent to EI maximizer
  random,  // incumbent to a uniform random point
};

struct BenchmarkResult {
  std::vector<IterationRecord> records;
  double final_distance = 0.0;
};

/// Closed loop straight on the optimizer. Both strategies share the
/// preference model, choice policy and incumbent bookkeeping; only the
/// segment's far endpoint differs.
BenchmarkResult run_benchmark(SegmentStrategy strategy, const LatentGoodness& user,
                              const ChoicePolicy& policy, GPConfig gp, int iterations);

}  // namespace grassfeel
