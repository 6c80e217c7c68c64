#include "grassfeel/session.hpp"

#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <sstream>

#include "grassfeel/hash.hpp"

namespace grassfeel {

namespace {

using nlohmann::json;

std::string_view mode_name(Mode m) { return m == Mode::sls ? "sls" : "manual"; }

Vec3 vec3_from(const json& j) {
  const auto a = j.get<std::array<double, 3>>();
  return {a[0], a[1], a[2]};
}

void refresh_derived(SessionState& s, const ParamDomain& domain) {
  s.current_params = to_physical(domain, active_vector(s));
  s.stimulus_active = gate_active(s.hand_distance_mm, s.gate_min_mm, s.gate_max_mm);
}

struct Rejection {
  std::string code;
  std::string message;
};

// Fetches a numeric field or throws a malformed-message rejection.
double number_field(const json& msg, std::initializer_list<const char*> names) {
  for (const char* name : names) {
    auto it = msg.find(name);
    if (it != msg.end()) {
      if (!it->is_number()) throw Rejection{"malformed", std::string(name) + " must be a number"};
      const double v = it->get<double>();
      if (!std::isfinite(v)) throw Rejection{"malformed", std::string(name) + " must be finite"};
      return v;
    }
  }
  throw Rejection{"malformed", std::string("missing field ") + *names.begin()};
}

std::string iso8601(std::chrono::system_clock::time_point tp) {
  const auto ms =
      std::chrono::duration_cast<std::chrono::milliseconds>(tp.time_since_epoch()).count();
  const std::time_t secs = static_cast<std::time_t>(ms / 1000);
  std::tm tm{};
  gmtime_r(&secs, &tm);
  char buf[40];
  const std::size_t n = std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%S", &tm);
  std::snprintf(buf + n, sizeof buf - n, ".%03lldZ", static_cast<long long>(ms % 1000));
  return buf;
}

}  // namespace

SessionConfig session_config_from_json(const json& j) {
  SessionConfig cfg;
  cfg.gate_min_mm = j.value("gate_min_mm", cfg.gate_min_mm);
  cfg.gate_max_mm = j.value("gate_max_mm", cfg.gate_max_mm);
  cfg.seed = j.value("seed", cfg.seed);
  if (j.contains("domain")) cfg.domain = domain_from_json(j.at("domain"));
  if (j.contains("stm")) {
    const auto& s = j.at("stm");
    cfg.stm.circle_radius_mm = s.value("circle_radius_mm", cfg.stm.circle_radius_mm);
    cfg.stm.stm_freq_hz = s.value("stm_freq_hz", cfg.stm.stm_freq_hz);
    cfg.stm.step_mm = s.value("step_mm", cfg.stm.step_mm);
    cfg.stm.path_length_mm = s.value("path_length_mm", cfg.stm.path_length_mm);
    if (s.contains("workspace_origin")) cfg.stm.workspace_origin = vec3_from(s.at("workspace_origin"));
    if (s.contains("path_axis")) cfg.stm.path_axis = vec3_from(s.at("path_axis"));
    if (s.contains("plane_normal")) cfg.stm.plane_normal = vec3_from(s.at("plane_normal"));
  }
  if (j.contains("gp")) cfg.gp = gp_config_from_json(j.at("gp"), cfg.gp);
  if (j.contains("render")) {
    const auto& r = j.at("render");
    cfg.render.sample_rate_hz = r.value("sample_rate_hz", cfg.render.sample_rate_hz);
    cfg.render.block_size = r.value("block_size", cfg.render.block_size);
  }
  cfg.array_config_path = j.value("array_config_path", cfg.array_config_path);
  if (j.contains("listen")) {
    // "host:port" or bare host
    const auto listen = j.at("listen").get<std::string>();
    const auto colon = listen.rfind(':');
    if (colon == std::string::npos) {
      cfg.listen_address = listen;
    } else {
      cfg.listen_address = listen.substr(0, colon);
      cfg.port = static_cast<unsigned short>(std::stoi(listen.substr(colon + 1)));
    }
  }
  if (!(cfg.gate_min_mm <= cfg.gate_max_mm)) {
    throw std::invalid_argument("gate_min_mm must not exceed gate_max_mm");
  }
  validate(cfg.stm);
  return cfg;
}

SessionConfig load_session_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file " + path);
  return session_config_from_json(json::parse(in));
}

bool gate_active(const std::optional<double>& hand_distance_mm, double gate_min_mm,
                 double gate_max_mm) {
  return hand_distance_mm && *hand_distance_mm >= gate_min_mm && *hand_distance_mm <= gate_max_mm;
}

ParamVector active_vector(const SessionState& state) {
  if (state.mode == Mode::manual || !state.segment) return state.manual_vector;
  return slider_point(*state.segment, state.slider_t);
}

SessionState create_session(std::uint64_t seed, const SessionConfig& cfg) {
  GPConfig gp = cfg.gp;
  gp.seed = seed;
  SessionState s;
  s.seed = seed;
  s.gate_min_mm = cfg.gate_min_mm;
  s.gate_max_mm = cfg.gate_max_mm;
  s.optimizer = make_optimizer_state(gp);
  s.segment = next_slider(s.optimizer, gp);
  s.slider_t = 0.5;
  refresh_derived(s, cfg.domain);
  return s;
}

json canonical_state(const SessionState& s) {
  json j;
  j["mode"] = mode_name(s.mode);
  j["optimizer"] = optimizer_to_json(s.optimizer);
  j["segment"] = s.segment ? json{{"x0", s.segment->x0}, {"x1", s.segment->x1}} : json(nullptr);
  j["slider_t"] = s.slider_t;
  j["manual_vector"] = s.manual_vector;
  j["current_params"] = s.current_params;
  j["hand_distance_mm"] = s.hand_distance_mm ? json(*s.hand_distance_mm) : json(nullptr);
  j["stimulus_active"] = s.stimulus_active;
  j["config"] = {{"gate_min_mm", s.gate_min_mm}, {"gate_max_mm", s.gate_max_mm}, {"seed", s.seed}};
  return j;
}

std::uint64_t state_hash(const SessionState& state) {
  return fnv1a64(canonical_state(state).dump());
}

json state_message(const SessionState& s, const ParamDomain& domain, const SessionConfig& cfg) {
  json m;
  m["type"] = "state";
  m["mode"] = mode_name(s.mode);
  m["iteration"] = s.optimizer.iteration;
  m["slider_t"] = s.slider_t;
  m["segment"] = s.segment ? json{{"x0", s.segment->x0}, {"x1", s.segment->x1}} : json(nullptr);
  m["params"] = s.current_params;
  m["normalized"] = active_vector(s);
  m["manual_vector"] = s.manual_vector;
  m["scene"] = scene_to_json(scene_from_params(domain, s.current_params));
  m["waveform_preview"] = render_preview(spec_from_params(s.current_params),
                                         cfg.render.sample_rate_hz, kPreviewSamples);
  m["stimulus_active"] = s.stimulus_active;
  m["hand_distance_mm"] = s.hand_distance_mm ? json(*s.hand_distance_mm) : json(nullptr);
  m["state_hash"] = hash_hex(state_hash(s));
  return m;
}

json error_message(std::string_view code, std::string_view message) {
  return {{"type", "error"}, {"code", code}, {"message", message}};
}

HandleResult handle_message(const SessionState& state, const json& msg, const ParamDomain& domain,
                            const SessionConfig& cfg) {
  GPConfig gp = cfg.gp;
  gp.seed = state.seed;
  try {
    if (!msg.is_object() || !msg.contains("type") || !msg.at("type").is_string()) {
      throw Rejection{"malformed", "message must be an object with a string \"type\""};
    }
    const auto type = msg.at("type").get<std::string>();
    SessionState next = state;
    json event;

    if (type == "set_slider") {
      const double t = number_field(msg, {"t"});
      if (state.mode != Mode::sls) throw Rejection{"mode", "set_slider requires SLS mode"};
      if (!(t >= 0.0 && t <= 1.0)) throw Rejection{"range", "t must lie in [0, 1]"};
      next.slider_t = t;
      event = {{"type", type}, {"t", t}};
    } else if (type == "commit_choice") {
      if (state.mode != Mode::sls) throw Rejection{"mode", "commit_choice requires SLS mode"};
      if (!state.segment) throw Rejection{"mode", "no slider segment to commit"};
      next.optimizer = incorporate_choice(state.optimizer, *state.segment, state.slider_t, gp);
      next.segment = next_slider(next.optimizer, gp);
      next.slider_t = 0.5;
      event = {{"type", type}};
    } else if (type == "set_param") {
      const double index = number_field(msg, {"i", "index"});
      const double v = number_field(msg, {"v", "value"});
      if (state.mode != Mode::manual) throw Rejection{"mode", "set_param requires manual mode"};
      if (index != std::floor(index) || index < 0 || index >= static_cast<double>(kParamCount)) {
        throw Rejection{"range", "parameter index must be an integer in [0, 6]"};
      }
      if (!(v >= 0.0 && v <= 1.0)) throw Rejection{"range", "v must lie in [0, 1]"};
      next.manual_vector[static_cast<std::size_t>(index)] = v;
      event = {{"type", type}, {"i", static_cast<int>(index)}, {"v", v}};
    } else if (type == "set_mode") {
      const auto it = msg.find("mode");
      if (it == msg.end() || !it->is_string()) throw Rejection{"malformed", "mode must be a string"};
      const auto mode = it->get<std::string>();
      if (mode == "manual") {
        if (state.mode != Mode::manual) next.manual_vector = active_vector(state);
        next.mode = Mode::manual;
      } else if (mode == "sls") {
        next.mode = Mode::sls;
      } else {
        throw Rejection{"malformed", "mode must be \"sls\" or \"manual\""};
      }
      event = {{"type", type}, {"mode", mode}};
    } else if (type == "hand") {
      const auto it = msg.find("distance_mm");
      if (it == msg.end()) throw Rejection{"malformed", "missing field distance_mm"};
      if (it->is_null()) {
        next.hand_distance_mm.reset();
        event = {{"type", type}, {"distance_mm", nullptr}};
      } else {
        const double d = number_field(msg, {"distance_mm"});
        if (d < 0.0) throw Rejection{"range", "distance_mm must be non-negative"};
        next.hand_distance_mm = d;
        event = {{"type", type}, {"distance_mm", d}};
      }
    } else if (type == "reset") {
      std::uint64_t seed = cfg.seed;
      if (auto it = msg.find("seed"); it != msg.end()) {
        if (!it->is_number_integer() || (!it->is_number_unsigned() && it->get<std::int64_t>() < 0)) {
          throw Rejection{"malformed", "seed must be a non-negative integer"};
        }
        seed = it->get<std::uint64_t>();
      }
      next = create_session(seed, cfg);
      event = {{"type", type}, {"seed", seed}};
    } else {
      throw Rejection{"malformed", "unknown message type \"" + type + "\""};
    }

    refresh_derived(next, domain);
    json reply = state_message(next, domain, cfg);
    return {std::move(next), std::move(reply), std::move(event)};
  } catch (const Rejection& r) {
    return {state, error_message(r.code, r.message), std::nullopt};
  } catch (const ModelError& e) {
    return {state, error_message("model", e.what()), std::nullopt};
  }
}

json log_entry_to_json(const EventLogEntry& e) {
  return {{"seq", e.seq}, {"wall_time", e.wall_time}, {"event", e.event}, {"state_hash", e.state_hash}};
}

EventLogEntry log_entry_from_json(const json& j) {
  EventLogEntry e;
  j.at("seq").get_to(e.seq);
  j.at("wall_time").get_to(e.wall_time);
  e.event = j.at("event");
  j.at("state_hash").get_to(e.state_hash);
  return e;
}

std::string log_to_jsonl(const std::vector<EventLogEntry>& log) {
  std::string out;
  for (const auto& e : log) {
    out += log_entry_to_json(e).dump();
    out += '\n';
  }
  return out;
}

std::vector<EventLogEntry> log_from_jsonl(const std::string& text) {
  std::vector<EventLogEntry> out;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    try {
      out.push_back(log_entry_from_json(json::parse(line)));
    } catch (const json::exception& e) {
      throw ReplayError(std::string("malformed log line: ") + e.what());
    }
  }
  return out;
}

ReplayDivergence::ReplayDivergence(std::int64_t seq, const std::string& expected,
                                   const std::string& actual)
    : ReplayError("replay diverged at seq " + std::to_string(seq) + ": logged " + expected +
                  ", replayed " + actual),
      seq_(seq) {}

std::uint64_t replay(const std::vector<EventLogEntry>& log, const SessionConfig& cfg) {
  if (log.empty()) return state_hash(create_session(cfg.seed, cfg));

  SessionConfig run_cfg = cfg;
  SessionState state;
  for (std::size_t i = 0; i < log.size(); ++i) {
    const auto& entry = log[i];
    if (entry.seq != static_cast<std::int64_t>(i)) {
      throw ReplayError("log is not gapless at position " + std::to_string(i));
    }
    const auto& ev = entry.event;
    if (i == 0) {
      if (ev.value("type", "") != "create" || !ev.contains("seed")) {
        throw ReplayError("log must start with a create event");
      }
      if (ev.contains("domain")) run_cfg.domain = domain_from_json(ev.at("domain"));
      state = create_session(ev.at("seed").get<std::uint64_t>(), run_cfg);
    } else {
      auto result = handle_message(state, ev, run_cfg.domain, run_cfg);
      if (!result.event) {
        throw ReplayDivergence(entry.seq, entry.state_hash,
                               "rejected: " + result.reply.value("message", std::string()));
      }
      state = std::move(result.state);
    }
    const auto actual = hash_hex(state_hash(state));
    if (actual != entry.state_hash) throw ReplayDivergence(entry.seq, entry.state_hash, actual);
  }
  return state_hash(state);
}

Clock system_clock() {
  return [] { return iso8601(std::chrono::system_clock::now()); };
}

Clock logical_clock() {
  auto tick = std::make_shared<std::int64_t>(0);
  return [tick] {
    return iso8601(std::chrono::system_clock::time_point(std::chrono::milliseconds((*tick)++)));
  };
}

void SnapshotExchange::publish(std::shared_ptr<const StimulusSnapshot> snap) {
  std::lock_guard lock(mutex_);
  current_ = std::move(snap);
}

std::shared_ptr<const StimulusSnapshot> SnapshotExchange::load() const {
  std::lock_guard lock(mutex_);
  return current_;
}

Session::Session(SessionConfig cfg, Clock clock)
    : cfg_(std::move(cfg)), domain_(cfg_.domain), clock_(std::move(clock)) {
  state_ = create_session(cfg_.seed, cfg_);
  append({{"type", "create"}, {"seed", cfg_.seed}, {"domain", domain_to_json(domain_)}});
  publish();
}

json Session::handle(const json& msg) {
  auto result = handle_message(state_, msg, domain_, cfg_);
  if (result.event) {
    state_ = std::move(result.state);
    append(std::move(*result.event));
    publish();
  }
  return std::move(result.reply);
}

json Session::handle_text(const std::string& text) {
  json msg;
  try {
    msg = json::parse(text);
  } catch (const json::parse_error&) {
    return error_message("malformed", "message is not valid JSON");
  }
  return handle(msg);
}

json Session::current_message() const { return state_message(state_, domain_, cfg_); }

void Session::append(json event) {
  EventLogEntry e;
  e.seq = static_cast<std::int64_t>(log_.size());
  e.wall_time = clock_();
  e.event = std::move(event);
  e.state_hash = hash_hex(state_hash(state_));
  log_.push_back(std::move(e));
}

void Session::publish() {
  auto snap = std::make_shared<StimulusSnapshot>();
  snap->params = state_.current_params;
  snap->spec = spec_from_params(state_.current_params);
  snap->active = state_.stimulus_active;
  snap->version = ++version_;
  exchange_.publish(std::move(snap));
}

}  // namespace grassfeel
