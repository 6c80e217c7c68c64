#include "grassfeel/server.hpp"

#include <atomic>
#include <chrono>
#include <deque>
#include <mutex>
#include <thread>

#include <boost/asio/ip/tcp.hpp>
#include <boost/asio/signal_set.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/http.hpp>
#include <boost/beast/websocket.hpp>

#include "grassfeel/stream.hpp"

namespace grassfeel {

namespace beast = boost::beast;
namespace http = beast::http;
namespace websocket = beast::websocket;
namespace net = boost::asio;
using tcp = net::ip::tcp;
using nlohmann::json;

namespace {

struct StreamStats {
  std::uint64_t blocks = 0;
  std::uint64_t frames = 0;
  std::uint64_t snapshot_version = 0;
  double time_s = 0.0;
  std::optional<FocusFrame> last_frame;
};

json stats_to_json(const StreamStats& s) {
  json j = {{"blocks", s.blocks},
            {"frames", s.frames},
            {"snapshot_version", s.snapshot_version},
            {"time_s", s.time_s},
            {"last_frame", nullptr}};
  if (s.last_frame) {
    const auto& p = s.last_frame->position;
    j["last_frame"] = {{"t", s.last_frame->t},
                       {"position_mm", {p.x(), p.y(), p.z()}},
                       {"amplitude", s.last_frame->amplitude}};
  }
  return j;
}

}  // namespace

class WsSession;

class ServerCore : public std::enable_shared_from_this<ServerCore> {
 public:
  explicit ServerCore(SessionConfig cfg)
      : cfg_(std::move(cfg)), acceptor_(ioc_), session_(cfg_) {
    const tcp::endpoint ep(net::ip::make_address(cfg_.listen_address), cfg_.port);
    acceptor_.open(ep.protocol());
    acceptor_.set_option(net::socket_base::reuse_address(true));
    acceptor_.bind(ep);
    acceptor_.listen(net::socket_base::max_listen_connections);
  }

  unsigned short port() const { return acceptor_.local_endpoint().port(); }

  void run(bool handle_signals);
  void stop() {
    net::post(ioc_, [self = shared_from_this()] {
      beast::error_code ec;
      self->acceptor_.close(ec);
      self->ioc_.stop();
    });
  }

  std::vector<EventLogEntry> log() const {
    std::lock_guard lock(log_mutex_);
    return log_copy_;
  }

  http::response<http::string_body> handle_http(const http::request<http::string_body>& req);
  void on_ws_message(const std::shared_ptr<WsSession>& from, const std::string& text);
  void subscribe(const std::shared_ptr<WsSession>& ws) { subscribers_.push_back(ws); }
  json current_message() const { return session_.current_message(); }

 private:
  void do_accept();
  void broadcast(const std::string& text);
  void after_mutation();
  void stream_loop();

  SessionConfig cfg_;
  net::io_context ioc_{1};
  tcp::acceptor acceptor_;
  Session session_;
  std::vector<std::weak_ptr<WsSession>> subscribers_;

  std::atomic<bool> streaming_{false};
  mutable std::mutex stats_mutex_;
  StreamStats stats_;

  mutable std::mutex log_mutex_;
  std::vector<EventLogEntry> log_copy_;
};

class WsSession : public std::enable_shared_from_this<WsSession> {
 public:
  WsSession(tcp::socket socket, ServerCore* server)
      : ws_(std::move(socket)), server_(server) {}

  void run(http::request<http::string_body> req) {
    ws_.set_option(websocket::stream_base::timeout::suggested(beast::role_type::server));
    ws_.async_accept(req, [self = shared_from_this()](beast::error_code ec) {
      if (ec) return;
      self->server_->subscribe(self);
      self->send(self->server_->current_message().dump());
      self->do_read();
    });
  }

  void send(std::string text) {
    queue_.push_back(std::move(text));
    if (queue_.size() == 1) do_write();
  }

 private:
  void do_read() {
    ws_.async_read(buffer_, [self = shared_from_this()](beast::error_code ec, std::size_t) {
      if (ec) return;
      auto text = beast::buffers_to_string(self->buffer_.data());
      self->buffer_.consume(self->buffer_.size());
      self->server_->on_ws_message(self, text);
      self->do_read();
    });
  }

  void do_write() {
    ws_.text(true);
    ws_.async_write(net::buffer(queue_.front()),
                    [self = shared_from_this()](beast::error_code ec, std::size_t) {
                      if (ec) return;
                      self->queue_.pop_front();
                      if (!self->queue_.empty()) self->do_write();
                    });
  }

  websocket::stream<beast::tcp_stream> ws_;
  beast::flat_buffer buffer_;
  std::deque<std::string> queue_;
  ServerCore* server_;  // outlives every connection: owns the io_context
};

namespace {

class HttpSession : public std::enable_shared_from_this<HttpSession> {
 public:
  HttpSession(tcp::socket socket, ServerCore* server)
      : stream_(std::move(socket)), server_(server) {}

  void run() { do_read(); }

 private:
  void do_read() {
    req_ = {};
    stream_.expires_after(std::chrono::seconds(30));
    http::async_read(stream_, buffer_, req_,
                     [self = shared_from_this()](beast::error_code ec, std::size_t) {
                       self->on_read(ec);
                     });
  }

  void on_read(beast::error_code ec) {
    if (ec == http::error::end_of_stream) {
      stream_.socket().shutdown(tcp::socket::shutdown_send, ec);
      return;
    }
    if (ec) return;
    if (websocket::is_upgrade(req_)) {
      stream_.expires_never();
      std::make_shared<WsSession>(stream_.release_socket(), server_)->run(std::move(req_));
      return;
    }
    auto res = std::make_shared<http::response<http::string_body>>(server_->handle_http(req_));
    http::async_write(stream_, *res,
                      [self = shared_from_this(), res](beast::error_code wec, std::size_t) {
                        if (wec) return;
                        if (res->need_eof()) {
                          self->stream_.socket().shutdown(tcp::socket::shutdown_send, wec);
                          return;
                        }
                        self->do_read();
                      });
  }

  beast::tcp_stream stream_;
  beast::flat_buffer buffer_;
  http::request<http::string_body> req_;
  ServerCore* server_;  // outlives every connection: owns the io_context
};

http::response<http::string_body> make_response(const http::request<http::string_body>& req,
                                                http::status status, std::string body,
                                                const char* content_type = "application/json") {
  http::response<http::string_body> res{status, req.version()};
  res.set(http::field::content_type, content_type);
  res.keep_alive(req.keep_alive());
  res.body() = std::move(body);
  res.prepare_payload();
  return res;
}

}  // namespace

void ServerCore::run(bool handle_signals) {
  std::optional<net::signal_set> signals;
  if (handle_signals) {
    signals.emplace(ioc_, SIGINT, SIGTERM);
    signals->async_wait([this](beast::error_code, int) { stop(); });
  }
  {
    std::lock_guard lock(log_mutex_);
    log_copy_ = session_.log();
  }
  streaming_ = true;
  std::thread streamer([this] { stream_loop(); });
  do_accept();
  ioc_.run();
  streaming_ = false;
  streamer.join();
}

void ServerCore::do_accept() {
  acceptor_.async_accept([self = shared_from_this()](beast::error_code ec, tcp::socket socket) {
    if (ec) return;  // acceptor closed
    std::make_shared<HttpSession>(std::move(socket), self.get())->run();
    self->do_accept();
  });
}

void ServerCore::broadcast(const std::string& text) {
  std::erase_if(subscribers_, [](const auto& w) { return w.expired(); });
  for (const auto& w : subscribers_) {
    if (auto ws = w.lock()) ws->send(text);
  }
}

void ServerCore::after_mutation() {
  {
    std::lock_guard lock(log_mutex_);
    log_copy_ = session_.log();
  }
  broadcast(session_.current_message().dump());
}

void ServerCore::on_ws_message(const std::shared_ptr<WsSession>& from, const std::string& text) {
  const auto before = session_.log().size();
  const auto reply = session_.handle_text(text);
  if (session_.log().size() != before) {
    after_mutation();
  } else {
    from->send(reply.dump());
  }
}

http::response<http::string_body> ServerCore::handle_http(
    const http::request<http::string_body>& req) {
  const auto target = std::string(req.target());
  const auto path = target.substr(0, target.find('?'));
  const bool get = req.method() == http::verb::get;
  const bool post = req.method() == http::verb::post;

  if (path == "/session" && get) {
    return make_response(req, http::status::ok, session_.current_message().dump());
  }
  if (path == "/session" && post) {
    json msg = {{"type", "reset"}};
    if (!req.body().empty()) {
      json body = json::parse(req.body(), nullptr, false);
      if (body.is_discarded() || !body.is_object()) {
        return make_response(req, http::status::bad_request,
                             error_message("malformed", "body must be a JSON object").dump());
      }
      if (body.contains("seed")) msg["seed"] = body["seed"];
    }
    const auto reply = session_.handle(msg);
    if (reply.at("type") == "error") {
      return make_response(req, http::status::bad_request, reply.dump());
    }
    after_mutation();
    return make_response(req, http::status::created, reply.dump());
  }
  if (path == "/session/log" && get) {
    return make_response(req, http::status::ok, log_to_jsonl(session_.log()),
                         "application/x-ndjson");
  }
  if (path == "/stream/stats" && get) {
    std::lock_guard lock(stats_mutex_);
    return make_response(req, http::status::ok, stats_to_json(stats_).dump());
  }
  if (path == "/session" || path == "/session/log" || path == "/stream/stats") {
    return make_response(req, http::status::method_not_allowed,
                         error_message("method", "method not allowed").dump());
  }
  return make_response(req, http::status::not_found,
                       error_message("not_found", "no route for " + path).dump());
}

void ServerCore::stream_loop() {
  StimulusStreamer streamer(cfg_.stm, cfg_.render);
  const auto period = std::chrono::duration_cast<std::chrono::steady_clock::duration>(
      std::chrono::duration<double>(static_cast<double>(cfg_.render.block_size) /
                                    cfg_.render.sample_rate_hz));
  auto deadline = std::chrono::steady_clock::now();
  while (streaming_) {
    const auto snap = session_.snapshots().load();
    const auto out = streamer.tick(*snap);
    {
      std::lock_guard lock(stats_mutex_);
      ++stats_.blocks;
      stats_.frames += out.frames.size();
      stats_.snapshot_version = snap->version;
      stats_.time_s = streamer.time_s();
      if (!out.frames.empty()) stats_.last_frame = out.frames.back();
    }
    deadline += period;
    std::this_thread::sleep_until(deadline);
  }
}

Server::Server(SessionConfig cfg) : impl_(std::make_shared<ServerCore>(std::move(cfg))) {}
Server::~Server() = default;
unsigned short Server::port() const { return impl_->port(); }
void Server::run(bool handle_signals) { impl_->run(handle_signals); }
void Server::stop() { impl_->stop(); }
std::vector<EventLogEntry> Server::log() const { return impl_->log(); }

}  // namespace grassfeel
