#include "grassfeel/benchmark.hpp"

#include <cstdio>

#include "grassfeel/rng.hpp"

namespace grassfeel {

namespace {

constexpr std::uint64_t kTargetStream = 0x7461726765ULL;
constexpr std::uint64_t kChoiceStream = 0x63686f696365ULL;
constexpr std::uint64_t kBaselineStream = 0x72616e646f6dULL;

IterationRecord record_for(const OptimizerState& opt, const LatentGoodness& user, double t) {
  const ParamVector& best = opt.X[opt.incumbent];
  return {opt.iteration, t, goodness(user, best), distance(best, user.target)};
}

}  // namespace

std::string records_to_csv(const std::vector<IterationRecord>& records) {
  std::string out = "iteration,best_goodness,distance_to_target\n";
  char line[96];
  for (const auto& r : records) {
    std::snprintf(line, sizeof line, "%d,%.9f,%.9f\n", r.iteration, r.best_goodness,
                  r.distance_to_target);
    out += line;
  }
  return out;
}

ParamVector default_target(std::uint64_t seed) {
  Rng rng(derive_seed(seed, kTargetStream));
  ParamVector v;
  for (auto& x : v.values) x = 0.1 + 0.8 * rng.uniform();
  return v;
}

HeadlessRun run_headless(SessionConfig cfg, const HeadlessOptions& opts) {
  cfg.seed = opts.seed;
  Session session(cfg, logical_clock());
  const LatentGoodness user{opts.target.value_or(default_target(opts.seed)), opts.width};
  const ChoicePolicy policy{opts.grid_points, opts.noise, opts.seed};
  Rng choice_rng(derive_seed(opts.seed, kChoiceStream));

  HeadlessRun run;
  run.target = user.target;
  for (int i = 0; i < opts.iterations; ++i) {
    const double t = choose(policy, user, *session.state().segment, choice_rng);
    auto reply = session.handle({{"type", "set_slider"}, {"t", t}});
    if (reply.at("type") == "error") throw std::runtime_error(reply.at("message").get<std::string>());
    reply = session.handle({{"type", "commit_choice"}});
    if (reply.at("type") == "error") throw std::runtime_error(reply.at("message").get<std::string>());
    run.records.push_back(record_for(session.state().optimizer, user, t));
  }
  run.log = session.log();
  run.final_hash = state_hash(session.state());
  return run;
}

BenchmarkResult run_benchmark(SegmentStrategy strategy, const LatentGoodness& user,
                              const ChoicePolicy& policy, GPConfig gp, int iterations) {
  gp.seed = policy.seed;
  OptimizerState opt = make_optimizer_state(gp);
  Rng choice_rng(derive_seed(policy.seed, kChoiceStream));
  Rng baseline_rng(derive_seed(policy.seed, kBaselineStream));

  BenchmarkResult result;
  for (int i = 0; i < iterations; ++i) {
    SliderSegment seg;
    if (strategy == SegmentStrategy::sls || opt.X.empty()) {
      seg = next_slider(opt, gp);
    } else {
      seg.x0 = opt.X[opt.incumbent];
      for (auto& x : seg.x1.values) x = baseline_rng.uniform();
    }
    const double t = choose(policy, user, seg, choice_rng);
    opt = incorporate_choice(opt, seg, t, gp);
    result.records.push_back(record_for(opt, user, t));
  }
  result.final_distance = result.records.empty() ? distance(ParamVector::filled(0.5), user.target)
                                                 : result.records.back().distance_to_target;
  return result;
}

}  // namespace grassfeel
