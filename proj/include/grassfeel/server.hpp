#pragma once

#include <cstdint>
#include <memory>

#include <json.hpp>

#include "grassfeel/session.hpp"

namespace grassfeel {

class ServerCore;

/// Live session endpoint. One port serves both the WebSocket channel (any
/// path, JSON messages with a "type" field) and the REST routes:
///   GET  /session       current state message
///   POST /session       {"seed": n} re-creates the session
///   GET  /session/log   event log as JSONL
///   GET  /stream/stats  streaming tick counters
/// Session mutation happens only on the network thread; a second thread runs
/// the stimulus tick at the audio block rate against published snapshots.
class Server {
 public:
  /// Binds cfg.listen_address:cfg.port immediately; port 0 picks a free one.
  explicit Server(SessionConfig cfg);
  ~Server();

  Server(const Server&) = delete;
  Server& operator=(const Server&) = delete;

  unsigned short port() const;

  /// Serves until stop() or SIGINT/SIGTERM (when handle_signals is set).
  void run(bool handle_signals = false);
  /// Thread-safe; makes run() return.
  void stop();

  /// Event log snapshot, safe to call after run() has returned.
  std::vector<EventLogEntry> log() const;

 private:
  std::shared_ptr<ServerCore> impl_;
};

}  // namespace grassfeel
