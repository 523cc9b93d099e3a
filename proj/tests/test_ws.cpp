#include <doctest.h>

#include <thread>

#include <boost/beast/core.hpp>
#include <boost/beast/http.hpp>
#include <boost/beast/websocket.hpp>

#include "panocoach/error.hpp"
#include "panocoach/server.hpp"
#include "panocoach/ws_server.hpp"
#include "support.hpp"

using namespace panocoach;
using namespace testing;
namespace beast = boost::beast;
namespace http = beast::http;
namespace websocket = beast::websocket;
namespace net = boost::asio;
using tcp = net::ip::tcp;

namespace {

struct Running {
  WsServer ws{0, 30};
  SessionServer server{ServerConfig{}, ws.transport()};
  std::thread loop;

  Running() {
    loop = std::thread([this] { ws.run(server, debug_endpoints(server)); });
  }
  ~Running() {
    ws.stop();
    loop.join();
  }
};

class WsClient {
 public:
  explicit WsClient(std::uint16_t port) : ws_(ioc_) {
    tcp::resolver resolver(ioc_);
    net::connect(ws_.next_layer(), resolver.resolve("127.0.0.1", std::to_string(port)));
    ws_.handshake("127.0.0.1", "/");
    ws_.binary(true);
  }
  void send(const std::string& frame) { ws_.write(net::buffer(frame)); }
  Envelope next() {
    beast::flat_buffer buffer;
    ws_.read(buffer);
    return decode_frame(beast::buffers_to_string(buffer.data()));
  }
  template <typename M>
  M next_of() {
    for (;;) {
      Envelope env = next();
      if (auto* m = std::get_if<M>(&env.payload)) return *m;
    }
  }

 private:
  net::io_context ioc_;
  websocket::stream<tcp::socket> ws_;
};

std::pair<int, std::string> http_get(std::uint16_t port, const std::string& target) {
  net::io_context ioc;
  tcp::socket socket(ioc);
  tcp::resolver resolver(ioc);
  net::connect(socket, resolver.resolve("127.0.0.1", std::to_string(port)));
  http::request<http::empty_body> req{http::verb::get, target, 11};
  req.set(http::field::host, "127.0.0.1");
  http::write(socket, req);
  beast::flat_buffer buffer;
  http::response<http::string_body> res;
  http::read(socket, buffer, res);
  return {res.result_int(), res.body()};
}

}  // namespace

TEST_CASE("websocket session and debug endpoints") {
  Running run;
  const std::uint16_t port = run.ws.port();
  REQUIRE(port != 0);

  WsClient coach(port);
  coach.send(frame(msg::Hello{Role::Kind::Coach, std::nullopt}));
  const auto welcome = coach.next_of<msg::Welcome>();
  CHECK(welcome.role == Role::coach());

  coach.send(frame(1, SpawnEntity{player("a", 0.0, 0.0)}));
  coach.send(frame(2, SpawnEntity{player("b", 10.0, 0.0)}));
  CHECK(coach.next_of<msg::Delta>().seq == 1);
  CHECK(coach.next_of<msg::Delta>().seq == 2);

  WsClient viewer(port);
  viewer.send(frame(msg::Hello{Role::Kind::Observer, std::nullopt}));
  const auto late = viewer.next_of<msg::Welcome>();
  CHECK(late.seq == 2);
  CHECK(late.snapshot.entities.size() == 2);

  viewer.send(frame(3, RemoveEntity{"a"}));
  CHECK(viewer.next_of<msg::Reject>().reason == "AuthorityError");

  const auto [scene_status, scene_body] = http_get(port, "/debug/scene");
  CHECK(scene_status == 200);
  CHECK(scene_from_json(Json::parse(scene_body)).entities.size() == 2);

  const auto [fpv_status, fpv_body] = http_get(port, "/debug/fpv?entity=a");
  REQUIRE(fpv_status == 200);
  const Json fpv = Json::parse(fpv_body);
  CHECK(fpv["entity_id"] == "a");
  REQUIRE(fpv["items"].size() == 1);
  CHECK(fpv["items"][0]["id"] == "b");

  CHECK(http_get(port, "/debug/fpv?entity=zz").first == 404);
  CHECK(http_get(port, "/debug/fpv").first == 400);
  CHECK(http_get(port, "/nope").first == 404);

  coach.send(frame(msg::Bye{}));
  CHECK_NOTHROW(viewer.next_of<msg::Bye>());
}

TEST_CASE("binding a busy port fails with BindFailure") {
  WsServer first(0, 30);
  try {
    WsServer second(first.port(), 30);
    FAIL("expected BindFailure");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::BindFailure);
  }
}
