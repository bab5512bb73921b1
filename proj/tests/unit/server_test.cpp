#include <gtest/gtest.h>

#include <boost/beast/core.hpp>
#include <boost/beast/http.hpp>
#include <boost/beast/websocket.hpp>
#include <boost/asio/ip/tcp.hpp>

#include <chrono>
#include <functional>
#include <nlohmann/json.hpp>
#include <sstream>

#include "relief/asset_io.hpp"
#include "relief/fixtures.hpp"
#include "relief/server.hpp"

using namespace relief;
using namespace relief::service;
namespace beast = boost::beast;
namespace http = beast::http;
namespace websocket = beast::websocket;
namespace net = boost::asio;
using tcp = net::ip::tcp;

namespace {

struct Reply {
  unsigned status = 0;
  std::string body;
};

class ServerTest : public ::testing::Test {
 protected:
  void SetUp() override {
    manager_.add_asset("demo", std::make_shared<const DepthPyramid>(build_pyramid(
                                   fixtures::make_field(fixtures::FieldKind::kFlat, 201), 2)));
    server_ = std::make_unique<Server>(manager_, ServerOptions{"127.0.0.1", 0, std::nullopt});
    server_->start();
  }
  void TearDown() override {
    server_->stop();
    manager_.close_all();
  }

  Reply request(http::verb verb, const std::string& target, const std::string& body = "") {
    net::io_context ioc;
    tcp::resolver resolver(ioc);
    beast::tcp_stream stream(ioc);
    stream.connect(resolver.resolve("127.0.0.1", std::to_string(server_->port())));
    http::request<http::string_body> req{verb, target, 11};
    req.set(http::field::host, "127.0.0.1");
    if (!body.empty()) {
      req.set(http::field::content_type, "application/json");
      req.body() = body;
    }
    req.prepare_payload();
    http::write(stream, req);
    beast::flat_buffer buffer;
    http::response<http::string_body> res;
    http::read(stream, buffer, res);
    beast::error_code ec;
    stream.socket().shutdown(tcp::socket::shutdown_both, ec);
    return {res.result_int(), res.body()};
  }

  std::string open_session() {
    const auto r = request(http::verb::post, "/sessions", R"({"asset":"demo"})");
    EXPECT_EQ(r.status, 201u) << r.body;
    return nlohmann::json::parse(r.body)["session"].get<std::string>();
  }

  SessionManager manager_{EngineConfig{}, true};
  std::unique_ptr<Server> server_;
};

class WsClient {
 public:
  WsClient(std::uint16_t port, const std::string& target) : ws_(ioc_) {
    tcp::resolver resolver(ioc_);
    beast::get_lowest_layer(ws_).connect(resolver.resolve("127.0.0.1", std::to_string(port)));
    ws_.handshake("127.0.0.1", target);
  }

  nlohmann::json read() {
    beast::flat_buffer buffer;
    ws_.read(buffer);
    return nlohmann::json::parse(beast::buffers_to_string(buffer.data()));
  }

  void send(const std::string& text) { ws_.write(net::buffer(text)); }

  // Reads until `pred` holds or `limit` messages went by.
  nlohmann::json read_until(const std::function<bool(const nlohmann::json&)>& pred, int limit = 400) {
    for (int k = 0; k < limit; ++k) {
      auto msg = read();
      if (pred(msg)) return msg;
    }
    return nlohmann::json();
  }

 private:
  net::io_context ioc_;
  websocket::stream<beast::tcp_stream> ws_;
};

}  // namespace

TEST_F(ServerTest, ListsAssets) {
  const auto r = request(http::verb::get, "/assets");
  ASSERT_EQ(r.status, 200u);
  const auto j = nlohmann::json::parse(r.body);
  ASSERT_EQ(j.size(), 1u);
  EXPECT_EQ(j[0]["id"], "demo");
  ASSERT_EQ(j[0]["levels"].size(), 2u);
  EXPECT_EQ(j[0]["levels"][1]["width"], 101);
}

TEST_F(ServerTest, ServesLevelGridAsMhdf) {
  const auto r = request(http::verb::get, "/assets/demo/levels/1/grid");
  ASSERT_EQ(r.status, 200u);
  std::istringstream in(r.body);
  const DepthField f = read_binary_grid(in);
  EXPECT_TRUE(identical(f, manager_.asset("demo")->level(1)));
  EXPECT_EQ(request(http::verb::get, "/assets/demo/levels/7/grid").status, 404u);
  EXPECT_EQ(request(http::verb::get, "/assets/nope/levels/0/grid").status, 404u);
}

TEST_F(ServerTest, OpenSessionErrors) {
  EXPECT_EQ(request(http::verb::post, "/sessions", R"({"asset":"nope"})").status, 404u);
  const auto bad = request(http::verb::post, "/sessions", R"({"asset":"demo","params":{"delta_n":0}})");
  EXPECT_EQ(bad.status, 400u);
  EXPECT_EQ(nlohmann::json::parse(bad.body)["type"], "error");
  EXPECT_EQ(request(http::verb::post, "/sessions", "{not json").status, 400u);
  EXPECT_EQ(request(http::verb::get, "/nothing").status, 404u);
}

TEST_F(ServerTest, WebSocketStreamsSnapshotsAndAcks) {
  const auto id = open_session();
  WsClient ws(server_->port(), "/sessions/" + id + "/ws");

  const auto first = ws.read_until([](const auto& m) { return m["type"] == "snapshot"; });
  ASSERT_FALSE(first.is_null());
  EXPECT_EQ(first["in_contact"], false);
  EXPECT_EQ(first["force"], nlohmann::json::array({0.0, 0.0, 0.0}));
  const auto hip = first["hip"];

  ws.send(R"({"type":"set_hip","cmd_id":5,"x":)" + hip[0].dump() + R"(,"y":)" + hip[1].dump() +
          R"(,"z":1})");
  const auto ack = ws.read_until([](const auto& m) { return m["type"] == "ack"; });
  ASSERT_FALSE(ack.is_null());
  EXPECT_EQ(ack["cmd_id"], 5);
  const auto seq = ack["seq"].get<std::uint64_t>();
  const auto contact = ws.read_until([&](const auto& m) {
    return m["type"] == "snapshot" && m["seq"].template get<std::uint64_t>() >= seq + 1;
  });
  ASSERT_FALSE(contact.is_null());
  EXPECT_EQ(contact["in_contact"], true);
  EXPECT_GT(contact["force"][2].get<double>(), 0.0);

  ws.send(R"({"type":"set_level","delta":1,"cmd_id":6})");
  const auto rejected = ws.read_until([](const auto& m) { return m["type"] == "error"; });
  EXPECT_EQ(rejected["code"], "invalid_roi");
  EXPECT_EQ(rejected["cmd_id"], 6);

  ws.send("{garbage");
  const auto bad = ws.read_until([](const auto& m) { return m["type"] == "error"; });
  EXPECT_EQ(bad["code"], "bad_json");
}

TEST_F(ServerTest, ClosedSessionIsGone) {
  const auto id = open_session();
  EXPECT_EQ(request(http::verb::delete_, "/sessions/" + id).status, 204u);
  EXPECT_EQ(request(http::verb::delete_, "/sessions/" + id).status, 410u);
  EXPECT_EQ(request(http::verb::delete_, "/sessions/s404").status, 404u);
  try {
    WsClient ws(server_->port(), "/sessions/" + id + "/ws");
    FAIL() << "upgrade should be refused";
  } catch (const beast::system_error&) {
  }
}

TEST_F(ServerTest, CommandAfterCloseReportsGone) {
  const auto id = open_session();
  WsClient ws(server_->port(), "/sessions/" + id + "/ws");
  ws.read_until([](const auto& m) { return m["type"] == "snapshot"; });
  EXPECT_EQ(request(http::verb::delete_, "/sessions/" + id).status, 204u);
  ws.send(R"({"type":"set_level","delta":-1})");
  const auto gone = ws.read_until([](const auto& m) { return m["type"] == "error"; });
  EXPECT_EQ(gone["code"], "gone");
}
