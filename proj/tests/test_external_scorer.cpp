#include <arpa/inet.h>
#include <netinet/in.h>
#include <sys/socket.h>
#include <unistd.h>

#include <algorithm>
#include <thread>

#include "doctest.h"
#include "json.hpp"
#include "simeval/error.hpp"
#include "simeval/external_scorer.hpp"
#include "simeval/random.hpp"

using namespace simeval;
using namespace std::chrono_literals;

namespace {

EndpointSpec echo(const std::string& flags = "") {
  return parse_endpoint("exec:" + std::string(ECHO_SCORER_PATH) + (flags.empty() ? "" : " " + flags));
}

std::vector<double> lengths(const std::vector<std::string>& texts) {
  std::vector<double> out;
  for (const auto& t : texts) out.push_back(static_cast<double>(t.size()));
  return out;
}

const std::vector<std::string> kTexts{"Hi.", "The cat sat.", "", "Ünïcödé \"quoted\"\nand a newline."};

// Accepts one connection and answers requests in pairs, second one first.
class SwapServer {
 public:
  SwapServer() {
    fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
    REQUIRE(::bind(fd_, reinterpret_cast<sockaddr*>(&addr), sizeof addr) == 0);
    REQUIRE(::listen(fd_, 1) == 0);
    socklen_t len = sizeof addr;
    ::getsockname(fd_, reinterpret_cast<sockaddr*>(&addr), &len);
    port_ = ntohs(addr.sin_port);
    thread_ = std::thread([this] { serve(); });
  }
  ~SwapServer() {
    thread_.join();
    ::close(fd_);
  }
  std::uint16_t port() const { return port_; }

 private:
  void serve() {
    const int conn = ::accept(fd_, nullptr, nullptr);
    if (conn < 0) return;
    std::string buffer;
    std::vector<nlohmann::json> held;
    char chunk[4096];
    ssize_t n;
    while ((n = ::read(conn, chunk, sizeof chunk)) > 0) {
      buffer.append(chunk, static_cast<std::size_t>(n));
      std::size_t nl;
      while ((nl = buffer.find('\n')) != std::string::npos) {
        held.push_back(nlohmann::json::parse(buffer.substr(0, nl)));
        buffer.erase(0, nl + 1);
        if (held.size() == 2) {
          std::string out;
          for (auto it = held.rbegin(); it != held.rend(); ++it)
            out += nlohmann::json{{"id", (*it)["id"]}, {"score", (*it)["text"].get<std::string>().size()}}.dump() + "\n";
          held.clear();
          if (::write(conn, out.data(), out.size()) < 0) break;
        }
      }
    }
    ::close(conn);
  }

  int fd_ = -1;
  std::uint16_t port_ = 0;
  std::thread thread_;
};

}  // namespace

TEST_CASE("parse_endpoint") {
  const auto tcp = parse_endpoint("localhost:7000");
  CHECK(tcp.kind == EndpointSpec::Kind::tcp);
  CHECK(tcp.host == "localhost");
  CHECK(tcp.port == 7000);
  const auto exec = parse_endpoint("exec:python3 serve.py --stdio");
  CHECK(exec.kind == EndpointSpec::Kind::subprocess);
  CHECK(exec.command == "python3 serve.py --stdio");

  for (const char* bad : {"", "exec:", "localhost", "host:", ":80", "host:0", "host:65536", "host:12ab"})
    CHECK_THROWS_AS(parse_endpoint(bad), ValidationError);
}

TEST_CASE("wire encoding") {
  CHECK(encode_request(7, "Hi.") == R"({"id":7,"text":"Hi."})");
  const auto r = decode_response(R"({"id": 7, "score": 1.25})");
  CHECK(*r.id == 7);
  CHECK(*r.score == 1.25);
  const auto e = decode_response(R"({"id": 3, "error": "boom"})");
  CHECK(*e.error == "boom");
  const auto null_id = decode_response(R"({"id": null, "error": "malformed request"})");
  CHECK_FALSE(null_id.id);

  CHECK_THROWS_AS(decode_response("not json"), TransportError);
  CHECK_THROWS_AS(decode_response("[1,2]"), TransportError);
  CHECK_THROWS_AS(decode_response(R"({"id": 1})"), TransportError);
  CHECK_THROWS_AS(decode_response(R"({"score": 1})"), TransportError);
  CHECK_THROWS_AS(decode_response(R"({"id": 1, "score": "high"})"), TransportError);
  CHECK_THROWS_AS(decode_response(R"({"id": 1.5, "score": 1})"), TransportError);
}

TEST_CASE("subprocess echo scorer") {
  SUBCASE("in order, across batches") {
    ExternalScorer scorer(echo());
    CHECK(scorer.score_batch(kTexts) == lengths(kTexts));
    CHECK(scorer.score_batch(kTexts) == lengths(kTexts));
    CHECK(scorer.score("abcde") == 5.0);
  }
  SUBCASE("out-of-order responses are matched by id") {
    ExternalScorer scorer(echo("--reverse 4"));
    CHECK(scorer.score_batch(kTexts) == lengths(kTexts));
  }
  SUBCASE("large pipelined batch") {
    Rng rng(1);
    std::vector<std::string> texts;
    for (int i = 0; i < 3000; ++i) texts.push_back(std::string(1 + rng.below(200), 'x'));
    ExternalScorer scorer(echo());
    CHECK(scorer.score_batch(texts) == lengths(texts));
  }
  SUBCASE("empty batch") {
    ExternalScorer scorer(echo("--hang"), 200ms);
    CHECK(scorer.score_batch({}).empty());
  }
}

TEST_CASE("subprocess faults") {
  SUBCASE("dropped response times out naming the id") {
    ExternalScorer scorer(echo("--drop 2"), 300ms);
    try {
      scorer.score_batch(kTexts);
      FAIL("expected a timeout");
    } catch (const TransportError& e) {
      CHECK(e.id() == 2);
      CHECK(std::string(e.what()).find("timed out") != std::string::npos);
    }
    // The channel is dropped after a failure.
    CHECK_THROWS_WITH_AS(scorer.score_batch(kTexts), doctest::Contains("unusable"), TransportError);
  }
  SUBCASE("garbage") {
    ExternalScorer scorer(echo("--garbage"), 2s);
    CHECK_THROWS_WITH_AS(scorer.score_batch(kTexts), doctest::Contains("malformed"), TransportError);
  }
  SUBCASE("wrong id") {
    ExternalScorer scorer(echo("--wrong-id"), 2s);
    CHECK_THROWS_WITH_AS(scorer.score_batch(kTexts), doctest::Contains("does not match"), TransportError);
  }
  SUBCASE("error response") {
    ExternalScorer scorer(echo("--error"), 2s);
    CHECK_THROWS_WITH_AS(scorer.score_batch(kTexts), doctest::Contains("model exploded"), TransportError);
  }
  SUBCASE("early exit") {
    ExternalScorer scorer(echo("--exit-after 2"), 2s);
    try {
      scorer.score_batch(kTexts);
      FAIL("expected a transport error");
    } catch (const TransportError& e) {
      CHECK(e.id() == 2);
    }
  }
  SUBCASE("command that does not exist") {
    ExternalScorer scorer(parse_endpoint("exec:/nonexistent/scorer"), 2s);
    CHECK_THROWS_AS(scorer.score_batch(kTexts), TransportError);
  }
}

TEST_CASE("tcp transport") {
  SwapServer server;
  ExternalScorer scorer(parse_endpoint("127.0.0.1:" + std::to_string(server.port())), 5s);
  const std::vector<std::string> texts{"a", "bb", "ccc", "dddd"};
  CHECK(scorer.score_batch(texts) == lengths(texts));
}

TEST_CASE("tcp connection refused") {
  // Bind and close a socket to find a port nobody listens on.
  const int fd = ::socket(AF_INET, SOCK_STREAM, 0);
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
  ::bind(fd, reinterpret_cast<sockaddr*>(&addr), sizeof addr);
  socklen_t len = sizeof addr;
  ::getsockname(fd, reinterpret_cast<sockaddr*>(&addr), &len);
  const auto port = ntohs(addr.sin_port);
  ::close(fd);
  CHECK_THROWS_AS(ExternalScorer(parse_endpoint("127.0.0.1:" + std::to_string(port))), TransportError);
}

TEST_CASE("external model through make_scorer") {
  ScorerModel model;
  model.provenance = Provenance::external;
  model.endpoint = "exec:" + std::string(ECHO_SCORER_PATH);
  auto scorer = make_scorer(model);
  const std::vector<std::string> in{"short", "a longer output"};
  const auto s = scorer->score_batch(in);
  CHECK(delta_sle(s[1], s[0]) == 10.0);
}
