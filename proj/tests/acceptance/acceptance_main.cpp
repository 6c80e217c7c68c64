// Headless acceptance suite. One PASS/FAIL line per criterion; the exit code
// is non-zero if any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <string>
#include <vector>

#include "grassfeel/array_field.hpp"
#include "grassfeel/benchmark.hpp"
#include "grassfeel/hash.hpp"
#include "grassfeel/preference_optimizer.hpp"
#include "grassfeel/rng.hpp"
#include "grassfeel/session.hpp"
#include "grassfeel/stm_trajectory.hpp"
#include "grassfeel/viz_mapping.hpp"
#include "grassfeel/waveform.hpp"
#include "oracles.hpp"

using namespace grassfeel;
using nlohmann::json;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok && pass) detail = what;
    pass = pass && ok;
  }
};

std::string fmt(const char* f, double a, double b = 0.0) {
  char buf[160];
  std::snprintf(buf, sizeof buf, f, a, b);
  return buf;
}

Outcome stm_geometry() {
  Outcome o;
  const StmConfig cfg;  // r = 8 mm, step = 5 mm, f = 10 Hz
  const int n = points_per_revolution(cfg);
  o.require(n == 10, "points_per_revolution != 10");
  o.require(std::abs(1.0 / frame_interval_s(cfg) - 100.0) < 1e-9, "frame cadence != 100 Hz");
  o.require(frame_interval_s(cfg) * n == 0.1, "revolution period != 100 ms");
  const double chord_oracle = 2.0 * 8.0 * std::sin(std::numbers::pi / 10.0);
  o.require(std::abs(chord_step_mm(cfg) - chord_oracle) <= 1e-9, "chord step off the chord formula");
  o.require(std::abs(chord_oracle - 4.944) < 5e-4, "chord oracle does not round to 4.944");
  // One full revolution visits 10 distinct points and returns to the first.
  const auto frames = schedule(cfg, HapticParams{20, 0.5, 65, 0.3, 250, 0.2, 0.0},
                               WaveformSpec{}, 0.0, 0.1 + frame_interval_s(cfg));
  o.require(frames.size() == 11, "revolution schedule length != 11");
  if (frames.size() == 11) {
    o.require((frames[10].position - frames[0].position).norm() < 1e-9, "revolution does not close");
  }
  if (o.pass) o.detail = fmt("N=10 cadence=100Hz chord=%.12f mm", chord_step_mm(cfg));
  return o;
}

Outcome focal_coherence() {
  Outcome o;
  const auto cfg = default_array_config();
  const auto array = build_array(cfg);
  const AcousticConfig acoustic;
  Rng rng(2024);
  double worst_rel = 0.0, worst_argmax = 0.0;
  for (int i = 0; i < 20; ++i) {
    const Vec3 target(-20.0 + 40.0 * rng.uniform(), -20.0 + 40.0 * rng.uniform(),
                      180.0 + 40.0 * rng.uniform());
    const auto phases = focus_phases(array, acoustic, target);
    double coherent = 0.0;
    for (const auto& tr : array) coherent += 1.0 / (target - tr.position).norm();
    const double mag = std::abs(pressure_at(array, acoustic, phases, target, 1.0));
    worst_rel = std::max(worst_rel, std::abs(mag - coherent) / coherent);

    ScanGrid grid;
    grid.center = target;
    grid.extent_mm = 40.0;
    grid.resolution_mm = 1.0;
    const auto map = field_scan(array, acoustic, phases, grid, 1.0);
    const auto [iu, iv] = map.argmax();
    worst_argmax = std::max(worst_argmax, (grid.node(iu, iv) - target).norm());
  }
  o.require(worst_rel <= 1e-9, fmt("coherent sum relative error %.3g", worst_rel));
  o.require(worst_argmax <= 1.0, fmt("scan argmax %.3f mm from target", worst_argmax));
  if (o.pass) o.detail = fmt("max rel err %.2e, max argmax offset %.3f mm", worst_rel, worst_argmax);
  return o;
}

Outcome spectral_fidelity() {
  Outcome o;
  const auto spec = spec_from_params(HapticParams{20, 0.5, 65, 0.3, 250, 0.2, 0.0});
  RenderConfig cfg;
  cfg.block_size = 4000;
  PhaseState phases{};
  const auto block = render_block(spec, cfg, phases, 0);
  const auto mags = oracle::dft_magnitudes(block.samples);
  std::vector<std::size_t> order(mags.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::partial_sort(order.begin(), order.begin() + 3, order.end(),
                    [&](std::size_t a, std::size_t b) { return mags[a] > mags[b]; });
  std::vector<std::size_t> top(order.begin(), order.begin() + 3);
  std::sort(top.begin(), top.end());
  o.require(top == std::vector<std::size_t>{20, 65, 250}, "dominant bins are not 20/65/250 Hz");
  const double base = mags[20] / 5.0;
  const double r1 = mags[65] / (3.0 * base), r2 = mags[250] / (2.0 * base);
  o.require(std::abs(r1 - 1.0) <= 0.02 && std::abs(r2 - 1.0) <= 0.02,
            fmt("amplitude ratios off by %.4f / %.4f", r1 - 1.0, r2 - 1.0));
  if (o.pass) o.detail = fmt("peaks at 20/65/250 Hz, ratio errors %.2e %.2e", r1 - 1.0, r2 - 1.0);
  return o;
}

Outcome gp_map_correctness() {
  Outcome o;
  const GPConfig gp;
  Rng rng(4);
  double worst_rel = 0.0, worst_grad = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    const int n = 3 + static_cast<int>(rng.next_u64() % 6);
    OptimizerState s;
    for (int i = 0; i < n; ++i) {
      ParamVector x;
      for (auto& v : x.values) v = rng.uniform();
      s.X.push_back(x);
    }
    for (int p = 0; p < n - 1; ++p) {
      const auto w = static_cast<std::size_t>(rng.next_u64() % n);
      const auto l = (w + 1 + rng.next_u64() % (n - 1)) % n;
      s.prefs.push_back({w, {static_cast<std::size_t>(l)}});
    }
    Eigen::VectorXd g(n);
    for (auto& v : g) v = 2.0 * rng.uniform() - 1.0;
    const auto analytic = log_posterior(g, s, gp).gradient;
    const auto numeric = oracle::central_gradient<Eigen::VectorXd>(
        [&](const Eigen::VectorXd& x) { return log_posterior(x, s, gp).value; }, g, 1e-5);
    worst_rel = std::max(worst_rel, (analytic - numeric).norm() / analytic.norm());
    const auto fit = map_estimate(s, gp);
    const double gn = log_posterior(fit.goodness, s, gp).gradient.lpNorm<Eigen::Infinity>();
    o.require(fit.converged, "MAP did not converge");
    worst_grad = std::max(worst_grad, gn);
  }
  o.require(worst_rel <= 1e-4, fmt("gradient relative error %.3g", worst_rel));
  o.require(worst_grad <= 1e-6, fmt("MAP gradient %.3g", worst_grad));
  if (o.pass) o.detail = fmt("max FD rel err %.2e, max MAP |grad| %.2e", worst_rel, worst_grad);
  return o;
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const auto m = v.size() / 2;
  return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

Outcome sls_convergence() {
  Outcome o;
  std::vector<double> sls, baseline;
  int wins = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const LatentGoodness user{default_target(seed), 0.4};
    const ChoicePolicy policy{101, 0.0, seed};
    const double a = run_benchmark(SegmentStrategy::sls, user, policy, GPConfig{}, 15).final_distance;
    const double b =
        run_benchmark(SegmentStrategy::random, user, policy, GPConfig{}, 15).final_distance;
    sls.push_back(a);
    baseline.push_back(b);
    wins += a < b ? 1 : 0;
  }
  const double ms = median(sls), mb = median(baseline);
  o.require(ms < mb, fmt("median SLS %.4f not below baseline %.4f", ms, mb));
  o.require(wins >= 14, fmt("SLS won %.0f of 20 seeds", wins));
  o.detail = fmt("median SLS %.4f vs baseline %.4f", ms, mb) + ", wins " + std::to_string(wins) +
             "/20";
  return o;
}

Outcome determinism_replay() {
  Outcome o;
  HeadlessOptions opts;
  opts.seed = 31;
  opts.iterations = 15;
  opts.noise = 0.05;
  const auto a = run_headless(SessionConfig{}, opts);
  const auto b = run_headless(SessionConfig{}, opts);
  o.require(log_to_jsonl(a.log) == log_to_jsonl(b.log), "event logs differ");
  SessionConfig cfg;
  const auto reloaded = log_from_jsonl(log_to_jsonl(a.log));
  o.require(replay(reloaded, cfg) == a.final_hash, "replay final hash differs");
  for (std::size_t k = 1; k <= a.log.size(); ++k) {
    const std::vector<EventLogEntry> prefix(a.log.begin(), a.log.begin() + static_cast<long>(k));
    if (hash_hex(replay(prefix, cfg)) != a.log[k - 1].state_hash) {
      o.require(false, "prefix replay mismatch at seq " + std::to_string(k - 1));
      break;
    }
  }
  if (o.pass) {
    o.detail = std::to_string(a.log.size()) + " entries, final hash " + hash_hex(a.final_hash);
  }
  return o;
}

Outcome gating_and_modes() {
  Outcome o;
  SessionConfig cfg;
  cfg.seed = 3;
  Session s(cfg, logical_clock());
  const double distances[] = {149.9, 150.0, 200.0, 250.0, 250.1};
  const bool expected[] = {false, true, true, true, false};
  for (int i = 0; i < 5; ++i) {
    s.handle({{"type", "hand"}, {"distance_mm", distances[i]}});
    o.require(s.state().stimulus_active == expected[i], fmt("gating wrong at %.1f mm", distances[i]));
  }
  const auto reply = s.handle({{"type", "set_param"}, {"i", 0}, {"v", 0.3}});
  o.require(reply.at("type") == "error" && reply.at("code") == "mode", "set_param accepted in SLS");
  s.handle({{"type", "set_slider"}, {"t", 0.37}});
  const auto slider_point_now = slider_point(*s.state().segment, 0.37);
  s.handle({{"type", "set_mode"}, {"mode", "manual"}});
  o.require(s.state().manual_vector == slider_point_now, "manual_vector != slider point");
  if (o.pass) o.detail = "gate {F,T,T,T,F}, set_param rejected, manual seed exact";
  return o;
}

Outcome mapping_monotonicity() {
  Outcome o;
  const auto domain = default_domain();
  for (std::size_t axis = 0; axis < kParamCount; ++axis) {
    GrassSceneSpec prev;
    for (int i = 0; i < 10; ++i) {
      auto v = ParamVector::filled(0.5);
      v[axis] = i / 9.0;
      const auto s = scene_from_params(domain, to_physical(domain, v));
      if (i > 0) {
        const auto b = axis / 2;
        bool ok = true;
        if (axis == 6) ok = s.wind_speed_norm >= prev.wind_speed_norm;
        else if (axis % 2 == 0) ok = s.bands[b].blade_count >= prev.bands[b].blade_count;
        else ok = s.bands[b].blade_scale >= prev.bands[b].blade_scale;
        o.require(ok, "non-monotone on axis " + std::to_string(axis));
      }
      prev = s;
    }
  }
  const auto lo = scene_from_params(domain, to_physical(domain, ParamVector::filled(0.0)));
  const auto hi = scene_from_params(domain, to_physical(domain, ParamVector::filled(1.0)));
  for (std::size_t b = 0; b < 3; ++b) {
    o.require(lo.bands[b].blade_count == 20 && lo.bands[b].blade_scale == 0.2, "lower boundary");
    o.require(hi.bands[b].blade_count == 120 && hi.bands[b].blade_scale == 1.0, "upper boundary");
  }
  o.require(lo.wind_speed_norm == 0.0 && hi.wind_speed_norm == 1.0, "wind boundary");
  if (o.pass) o.detail = "monotone on all 7 axes, boundaries exact";
  return o;
}

struct Criterion {
  int id;
  const char* name;
  double budget_s;
  std::function<Outcome()> run;
};

}  // namespace

int main() {
  const std::vector<Criterion> criteria = {
      {1, "stm_geometry", 1.0, stm_geometry},
      {2, "focal_coherence", 30.0, focal_coherence},
      {3, "spectral_fidelity", 0.0, spectral_fidelity},
      {4, "gp_map_correctness", 10.0, gp_map_correctness},
      {5, "sls_convergence", 120.0, sls_convergence},
      {6, "determinism_replay", 0.0, determinism_replay},
      {7, "gating_and_modes", 0.0, gating_and_modes},
      {8, "mapping_monotonicity", 0.0, mapping_monotonicity},
  };
  int failures = 0;
  for (const auto& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("exception: ") + e.what();
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (c.budget_s > 0.0 && secs >= c.budget_s) {
      o.pass = false;
      o.detail += fmt(" (over %.0f s budget)", c.budget_s);
    }
    std::printf("[%s] %d %s (%.2f s): %s\n", o.pass ? "PASS" : "FAIL", c.id, c.name, secs,
                o.detail.c_str());
    failures += o.pass ? 0 : 1;
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failures,
              criteria.size());
  return failures == 0 ? 0 : 1;
}
