#include "relief/server.hpp"

#include <deque>
#include <fstream>
#include <sstream>
#include <thread>
#include <vector>

#include <boost/asio/dispatch.hpp>
#include <boost/asio/ip/tcp.hpp>
#include <boost/asio/post.hpp>
#include <boost/asio/strand.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/http.hpp>
#include <boost/beast/websocket.hpp>

#include "relief/asset_io.hpp"
#include "relief/errors.hpp"
#include "relief/protocol.hpp"

namespace relief::service {
namespace {

namespace beast = boost::beast;
namespace http = beast::http;
namespace websocket = beast::websocket;
namespace net = boost::asio;
using tcp = net::ip::tcp;
using Request = http::request<http::string_body>;
using Response = http::response<http::string_body>;

std::vector<std::string> path_segments(beast::string_view target) {
  std::string path(target.substr(0, target.find('?')));
  std::vector<std::string> out;
  std::istringstream in(path);
  std::string part;
  while (std::getline(in, part, '/')) {
    if (!part.empty()) out.push_back(part);
  }
  return out;
}

Response make_response(const Request& req, http::status status, std::string body,
                       std::string_view content_type = "application/json") {
  Response res{status, req.version()};
  res.set(http::field::server, "relief");
  res.set(http::field::content_type, std::string(content_type));
  res.set(http::field::access_control_allow_origin, "*");
  res.keep_alive(req.keep_alive());
  res.body() = std::move(body);
  res.prepare_payload();
  return res;
}

Response json_error(const Request& req, http::status status, std::string_view code,
                    std::string_view message) {
  return make_response(req, status, error_json(code, message).dump());
}

std::string_view mime_type(const std::filesystem::path& p) {
  const auto ext = p.extension().string();
  if (ext == ".html") return "text/html";
  if (ext == ".js" || ext == ".mjs") return "application/javascript";
  if (ext == ".css") return "text/css";
  if (ext == ".json") return "application/json";
  if (ext == ".svg") return "image/svg+xml";
  if (ext == ".png") return "image/png";
  return "application/octet-stream";
}

// ---------------------------------------------------------------------------

class WsConnection : public Subscriber, public std::enable_shared_from_this<WsConnection> {
 public:
  WsConnection(tcp::socket socket, std::shared_ptr<Session> session, SessionManager& sessions)
      : ws_(std::move(socket)), session_(std::move(session)), sessions_(sessions) {}

  void accept(Request req) {
    ws_.set_option(websocket::stream_base::timeout::suggested(beast::role_type::server));
    ws_.async_accept(req, [self = shared_from_this()](beast::error_code ec) {
      self->on_accept(ec);
    });
  }

  void on_snapshot(const Snapshot& snapshot) override {
    std::string text = to_json(snapshot).dump();
    std::lock_guard lock(mu_);
    if (closed_) return;
    snapshot_ = std::move(text);  // latest wins
    schedule_flush();
  }

  void on_ack(const Ack& ack) override { enqueue(to_json(ack).dump()); }

 private:
  void on_accept(beast::error_code ec) {
    if (ec) return;
    on_snapshot(session_->engine().latest());
    session_->engine().subscribe(shared_from_this());
    do_read();
  }

  void do_read() {
    ws_.async_read(buffer_, [self = shared_from_this()](beast::error_code ec, std::size_t) {
      self->on_read(ec);
    });
  }

  void on_read(beast::error_code ec) {
    if (ec) {
      std::lock_guard lock(mu_);
      closed_ = true;
      return;
    }
    const std::string text = beast::buffers_to_string(buffer_.data());
    buffer_.consume(buffer_.size());
    try {
      Command cmd = parse_command(text);
      sessions_.session(session_->id());  // throws once the session is closed
      session_->post(std::move(cmd));
    } catch (const ProtocolError& e) {
      enqueue(error_json(e.code(), e.what()).dump());
    } catch (const GoneError& e) {
      enqueue(error_json("gone", e.what()).dump());
    } catch (const NotFoundError& e) {
      enqueue(error_json("not_found", e.what()).dump());
    }
    do_read();
  }

  void enqueue(std::string text) {
    std::lock_guard lock(mu_);
    if (closed_) return;
    queue_.push_back(std::move(text));
    schedule_flush();
  }

  // Called with mu_ held.
  void schedule_flush() {
    if (flush_posted_) return;
    flush_posted_ = true;
    net::post(ws_.get_executor(), [self = shared_from_this()] { self->flush(); });
  }

  void flush() {
    {
      std::lock_guard lock(mu_);
      flush_posted_ = false;
    }
    if (!writing_) write_next();
  }

  void write_next() {
    {
      std::lock_guard lock(mu_);
      if (closed_) return;
      if (!queue_.empty()) {
        out_ = std::move(queue_.front());
        queue_.pop_front();
      } else if (snapshot_) {
        out_ = std::move(*snapshot_);
        snapshot_.reset();
      } else {
        return;
      }
    }
    writing_ = true;
    ws_.text(true);
    ws_.async_write(net::buffer(out_),
                    [self = shared_from_this()](beast::error_code ec, std::size_t) {
                      self->writing_ = false;
                      if (ec) {
                        std::lock_guard lock(self->mu_);
                        self->closed_ = true;
                        return;
                      }
                      self->write_next();
                    });
  }

  websocket::stream<beast::tcp_stream> ws_;
  std::shared_ptr<Session> session_;
  SessionManager& sessions_;
  beast::flat_buffer buffer_;

  std::mutex mu_;
  std::optional<std::string> snapshot_;
  std::deque<std::string> queue_;
  bool flush_posted_ = false;
  bool closed_ = false;

  // I/O thread only.
  bool writing_ = false;
  std::string out_;
};

// ---------------------------------------------------------------------------

class HttpConnection : public std::enable_shared_from_this<HttpConnection> {
 public:
  HttpConnection(tcp::socket socket, SessionManager& sessions, const ServerOptions& options)
      : stream_(std::move(socket)), sessions_(sessions), options_(options) {}

  void run() {
    net::dispatch(stream_.get_executor(), [self = shared_from_this()] { self->do_read(); });
  }

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
      upgrade();
      return;
    }
    send(route());
  }

  void upgrade() {
    const auto parts = path_segments(req_.target());
    if (parts.size() != 3 || parts[0] != "sessions" || parts[2] != "ws") {
      send(json_error(req_, http::status::not_found, "not_found", "no WebSocket endpoint here"));
      return;
    }
    std::shared_ptr<Session> session;
    try {
      session = sessions_.session(parts[1]);
    } catch (const GoneError& e) {
      send(json_error(req_, http::status::gone, "gone", e.what()));
      return;
    } catch (const NotFoundError& e) {
      send(json_error(req_, http::status::not_found, "not_found", e.what()));
      return;
    }
    stream_.expires_never();
    auto ws = std::make_shared<WsConnection>(stream_.release_socket(), std::move(session), sessions_);
    ws->accept(std::move(req_));
  }

  Response route() {
    const auto parts = path_segments(req_.target());
    const auto method = req_.method();
    try {
      if (method == http::verb::get && parts.size() == 1 && parts[0] == "assets") {
        return make_response(req_, http::status::ok, assets_json(sessions_.assets()).dump());
      }
      if (method == http::verb::get && parts.size() == 5 && parts[0] == "assets" &&
          parts[2] == "levels" && parts[4] == "grid") {
        const auto pyramid = sessions_.asset(parts[1]);
        std::size_t level = 0;
        try {
          level = std::stoul(parts[3]);
        } catch (const std::exception&) {
          return json_error(req_, http::status::bad_request, "bad_level", "level must be an integer");
        }
        if (level >= pyramid->size()) {
          return json_error(req_, http::status::not_found, "not_found", "no such level");
        }
        return make_response(req_, http::status::ok, encode_binary_grid(pyramid->level(level)),
                             "application/octet-stream");
      }
      if (method == http::verb::post && parts.size() == 1 && parts[0] == "sessions") {
        const OpenRequest open = parse_open_request(req_.body());
        const std::string id = sessions_.open_session(open.asset, open.params, open.roi);
        nlohmann::json body = {{"session", id}, {"ws", "/sessions/" + id + "/ws"}};
        return make_response(req_, http::status::created, body.dump());
      }
      if (method == http::verb::delete_ && parts.size() == 2 && parts[0] == "sessions") {
        sessions_.close_session(parts[1]);
        return make_response(req_, http::status::no_content, "");
      }
      if (method == http::verb::get && options_.static_dir) {
        return serve_static(parts);
      }
      return json_error(req_, http::status::not_found, "not_found", "no such endpoint");
    } catch (const ProtocolError& e) {
      return json_error(req_, http::status::bad_request, e.code(), e.what());
    } catch (const ValidationError& e) {
      return json_error(req_, http::status::bad_request, "validation", e.what());
    } catch (const NotFoundError& e) {
      return json_error(req_, http::status::not_found, "not_found", e.what());
    } catch (const GoneError& e) {
      return json_error(req_, http::status::gone, "gone", e.what());
    }
  }

  Response serve_static(const std::vector<std::string>& parts) {
    std::filesystem::path rel;
    for (const auto& p : parts) {
      if (p == ".." || p == ".") {
        return json_error(req_, http::status::bad_request, "bad_path", "invalid path");
      }
      rel /= p;
    }
    if (rel.empty()) rel = "index.html";
    const auto full = *options_.static_dir / rel;
    std::ifstream in(full, std::ios::binary);
    if (!in) return json_error(req_, http::status::not_found, "not_found", "no such file");
    std::ostringstream body;
    body << in.rdbuf();
    return make_response(req_, http::status::ok, body.str(), mime_type(full));
  }

  void send(Response res) {
    auto sp = std::make_shared<Response>(std::move(res));
    http::async_write(stream_, *sp,
                      [self = shared_from_this(), sp](beast::error_code ec, std::size_t) {
                        if (ec) return;
                        if (sp->need_eof()) {
                          self->stream_.socket().shutdown(tcp::socket::shutdown_send, ec);
                          return;
                        }
                        self->do_read();
                      });
  }

  beast::tcp_stream stream_;
  beast::flat_buffer buffer_;
  Request req_;
  SessionManager& sessions_;
  const ServerOptions& options_;
};

}  // namespace

struct Server::Impl {
  Impl(SessionManager& s, ServerOptions o) : sessions(s), options(std::move(o)) {}

  void do_accept() {
    acceptor->async_accept(net::make_strand(ioc), [this](beast::error_code ec, tcp::socket socket) {
      if (!ec) std::make_shared<HttpConnection>(std::move(socket), sessions, options)->run();
      if (acceptor->is_open()) do_accept();
    });
  }

  SessionManager& sessions;
  ServerOptions options;
  net::io_context ioc{1};
  std::optional<tcp::acceptor> acceptor;
  std::thread thread;
  std::uint16_t port = 0;
};

Server::Server(SessionManager& sessions, ServerOptions options)
    : impl_(std::make_unique<Impl>(sessions, std::move(options))) {}

Server::~Server() { stop(); }

void Server::start() {
  const auto address = net::ip::make_address(impl_->options.address);
  impl_->acceptor.emplace(impl_->ioc);
  const tcp::endpoint endpoint(address, impl_->options.port);
  impl_->acceptor->open(endpoint.protocol());
  impl_->acceptor->set_option(net::socket_base::reuse_address(true));
  impl_->acceptor->bind(endpoint);
  impl_->acceptor->listen(net::socket_base::max_listen_connections);
  impl_->port = impl_->acceptor->local_endpoint().port();
  impl_->do_accept();
  impl_->thread = std::thread([this] { impl_->ioc.run(); });
}

void Server::stop() {
  if (!impl_) return;
  if (impl_->acceptor) {
    net::post(impl_->ioc, [this] {
      beast::error_code ec;
      impl_->acceptor->close(ec);
    });
  }
  impl_->ioc.stop();
  if (impl_->thread.joinable()) impl_->thread.join();
}

std::uint16_t Server::port() const { return impl_->port; }

}  // namespace relief::service
