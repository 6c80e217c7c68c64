#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "grassfeel/param_space.hpp"
#include "grassfeel/preference_optimizer.hpp"
#include "grassfeel/stm_trajectory.hpp"
#include "grassfeel/viz_mapping.hpp"
#include "grassfeel/waveform.hpp"

namespace grassfeel {

inline constexpr std::size_t kPreviewSamples = 256;

/// Everything a session needs besides its seed. Loaded from the JSON config
/// file; any missing key keeps its default.
struct SessionConfig {
  double gate_min_mm = 150.0;
  double gate_max_mm = 250.0;
  std::uint64_t seed = 0;
  ParamDomain domain = default_domain();
  StmConfig stm;
  GPConfig gp;
  RenderConfig render;
  std::string array_config_path;  // empty: built-in four-board layout
  std::string listen_address = "127.0.0.1";
  unsigned short port = 8080;
};

SessionConfig session_config_from_json(const nlohmann::json& j);
SessionConfig load_session_config(const std::string& path);

enum class Mode { sls, manual };

struct SessionState {
  Mode mode = Mode::sls;
  OptimizerState optimizer;
  std::optional<SliderSegment> segment;
  double slider_t = 0.5;
  ParamVector manual_vector = ParamVector::filled(0.5);
  HapticParams current_params;
  std::optional<double> hand_distance_mm;
  bool stimulus_active = false;
  double gate_min_mm = 150.0;
  double gate_max_mm = 250.0;
  std::uint64_t seed = 0;
};

SessionState create_session(std::uint64_t seed, const SessionConfig& cfg = {});

bool gate_active(const std::optional<double>& hand_distance_mm, double gate_min_mm,
                 double gate_max_mm);

/// The vector current_params is derived from in the active mode.
ParamVector active_vector(const SessionState& state);

/// Canonical serialization: sorted keys, full double precision.
nlohmann::json canonical_state(const SessionState& state);
std::uint64_t state_hash(const SessionState& state);

/// Outbound "state" message: params, scene, waveform preview, segment,
/// iteration, gating and the state hash.
nlohmann::json state_message(const SessionState& state, const ParamDomain& domain,
                             const SessionConfig& cfg);

nlohmann::json error_message(std::string_view code, std::string_view message);

/// Result of applying one inbound message.
struct HandleResult {
  SessionState state;
  nlohmann::json reply;
  /// Canonical form of the accepted message; empty on rejection.
  std::optional<nlohmann::json> event;
};

/// Pure transition. Malformed or disallowed messages leave the state as it
/// was and produce an "error" reply (codes: malformed, mode, range, model).
HandleResult handle_message(const SessionState& state, const nlohmann::json& msg,
                            const ParamDomain& domain, const SessionConfig& cfg);

struct EventLogEntry {
  std::int64_t seq = 0;
  std::string wall_time;
  nlohmann::json event;
  std::string state_hash;

  bool operator==(const EventLogEntry&) const = default;
};

nlohmann::json log_entry_to_json(const EventLogEntry& e);
EventLogEntry log_entry_from_json(const nlohmann::json& j);
std::string log_to_jsonl(const std::vector<EventLogEntry>& log);
std::vector<EventLogEntry> log_from_jsonl(const std::string& text);

class ReplayError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ReplayDivergence : public ReplayError {
 public:
  ReplayDivergence(std::int64_t seq, const std::string& expected, const std::string& actual);
  std::int64_t seq() const { return seq_; }

 private:
  std::int64_t seq_;
};

/// Re-applies the logged events from a fresh session (the leading "create"
/// entry supplies the seed and domain; an empty log replays to
/// create_session(cfg.seed)) and checks each recomputed hash. Returns the
/// final hash.
std::uint64_t replay(const std::vector<EventLogEntry>& log, const SessionConfig& cfg = {});

using Clock = std::function<std::string()>;
/// Current UTC time, ISO-8601 with milliseconds.
Clock system_clock();
/// Deterministic timestamps one millisecond apart from the Unix epoch, for
/// reproducible headless logs.
Clock logical_clock();

/// What the streaming tick needs; published whenever the session mutates.
struct StimulusSnapshot {
  HapticParams params;
  WaveformSpec spec;
  bool active = false;
  std::uint64_t version = 0;
};

/// Single-slot mailbox between the session writer and the streaming reader.
class SnapshotExchange {
 public:
  void publish(std::shared_ptr<const StimulusSnapshot> snap);
  std::shared_ptr<const StimulusSnapshot> load() const;

 private:
  mutable std::mutex mutex_;
  std::shared_ptr<const StimulusSnapshot> current_;
};

/// Owns the authoritative state and the append-only log. Not thread-safe;
/// callers serialize mutation. Streaming readers go through snapshots().
class Session {
 public:
  explicit Session(SessionConfig cfg, Clock clock = system_clock());

  /// Applies one inbound message and returns the outbound reply. Accepted
  /// messages are logged.
  nlohmann::json handle(const nlohmann::json& msg);
  nlohmann::json handle_text(const std::string& text);

  const SessionState& state() const { return state_; }
  const SessionConfig& config() const { return cfg_; }
  const ParamDomain& domain() const { return domain_; }
  const std::vector<EventLogEntry>& log() const { return log_; }
  nlohmann::json current_message() const;
  SnapshotExchange& snapshots() { return exchange_; }

 private:
  void append(nlohmann::json event);
  void publish();

  SessionConfig cfg_;
  ParamDomain domain_;
  Clock clock_;
  SessionState state_;
  std::vector<EventLogEntry> log_;
  SnapshotExchange exchange_;
  std::uint64_t version_ = 0;
};

}  // namespace grassfeel
