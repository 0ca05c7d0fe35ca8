#pragma once

#include <chrono>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "simeval/scorer.hpp"

namespace simeval {

// Where an external scorer lives. Textual forms:
//   exec:<shell command>   spawn a subprocess and talk over its stdin/stdout
//   <host>:<port>          connect to a TCP socket
struct EndpointSpec {
  enum class Kind { subprocess, tcp };
  Kind kind = Kind::tcp;
  std::string command;
  std::string host;
  std::uint16_t port = 0;
};

// Throws ValidationError on a malformed endpoint string.
EndpointSpec parse_endpoint(std::string_view spec);

// Wire format, one JSON object per line:
//   request  {"id": <int>, "text": <str>}
//   response {"id": <int>, "score": <float>}
// A response may instead carry {"id": ..., "error": <str>}.
std::string encode_request(long long id, std::string_view text);

struct ScoreResponse {
  std::optional<long long> id;
  std::optional<double> score;
  std::optional<std::string> error;
};

// Throws TransportError if the line is not a response object.
ScoreResponse decode_response(std::string_view line);

// Bidirectional line transport; implementations own their file descriptors.
class LineChannel {
 public:
  virtual ~LineChannel() = default;
  virtual int read_fd() const = 0;
  virtual int write_fd() const = 0;
};

inline constexpr std::chrono::milliseconds kDefaultBatchTimeout{60'000};

// Client side of the external-scorer protocol. Requests of one batch are
// pipelined; responses may arrive in any order and are matched by id. Each
// instance serializes its batches; use one instance per thread.
class ExternalScorer : public SimplicityScorer {
 public:
  explicit ExternalScorer(const EndpointSpec& endpoint,
                          std::chrono::milliseconds timeout = kDefaultBatchTimeout);
  ~ExternalScorer() override;
  ExternalScorer(ExternalScorer&&) noexcept;
  ExternalScorer& operator=(ExternalScorer&&) noexcept;

  // One score per text, in input order. An empty batch sends nothing.
  std::vector<double> score_batch(std::span<const std::string> texts) override;

 private:
  std::unique_ptr<LineChannel> channel_;
  std::chrono::milliseconds timeout_;
  long long next_id_ = 0;
  std::string read_buffer_;
};

}  // namespace simeval
