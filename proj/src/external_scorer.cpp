#include "simeval/external_scorer.hpp"

#include <fcntl.h>
#include <netdb.h>
#include <poll.h>
#include <signal.h>
#include <sys/socket.h>
#include <sys/types.h>
#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <charconv>
#include <cmath>
#include <cstring>
#include <mutex>
#include <thread>
#include <unordered_map>

#include "simeval/error.hpp"
#include "simeval/jsonl.hpp"

namespace simeval {

namespace {

constexpr std::string_view kExecPrefix = "exec:";

std::string errno_message(const char* what) { return std::string(what) + ": " + std::strerror(errno); }

void ignore_sigpipe() {
  static std::once_flag once;
  std::call_once(once, [] { ::signal(SIGPIPE, SIG_IGN); });
}

void set_nonblocking(int fd) {
  const int flags = ::fcntl(fd, F_GETFL, 0);
  if (flags < 0 || ::fcntl(fd, F_SETFL, flags | O_NONBLOCK) < 0)
    throw TransportError(errno_message("fcntl"));
}

class FileDescriptor {
 public:
  FileDescriptor() = default;
  explicit FileDescriptor(int fd) : fd_(fd) {}
  FileDescriptor(FileDescriptor&& other) noexcept : fd_(std::exchange(other.fd_, -1)) {}
  FileDescriptor& operator=(FileDescriptor&& other) noexcept {
    if (this != &other) {
      reset();
      fd_ = std::exchange(other.fd_, -1);
    }
    return *this;
  }
  FileDescriptor(const FileDescriptor&) = delete;
  FileDescriptor& operator=(const FileDescriptor&) = delete;
  ~FileDescriptor() { reset(); }

  int get() const { return fd_; }
  void reset() {
    if (fd_ >= 0) ::close(fd_);
    fd_ = -1;
  }

 private:
  int fd_ = -1;
};

class SubprocessChannel : public LineChannel {
 public:
  explicit SubprocessChannel(const std::string& command) {
    ignore_sigpipe();
    int to_child[2];
    int from_child[2];
    if (::pipe2(to_child, O_CLOEXEC) != 0) throw TransportError(errno_message("pipe"));
    FileDescriptor child_in(to_child[0]), parent_out(to_child[1]);
    if (::pipe2(from_child, O_CLOEXEC) != 0) throw TransportError(errno_message("pipe"));
    FileDescriptor parent_in(from_child[0]), child_out(from_child[1]);

    pid_ = ::fork();
    if (pid_ < 0) throw TransportError(errno_message("fork"));
    if (pid_ == 0) {
      ::dup2(child_in.get(), STDIN_FILENO);
      ::dup2(child_out.get(), STDOUT_FILENO);
      ::execl("/bin/sh", "sh", "-c", command.c_str(), static_cast<char*>(nullptr));
      ::_exit(127);
    }
    write_ = std::move(parent_out);
    read_ = std::move(parent_in);
    set_nonblocking(write_.get());
    set_nonblocking(read_.get());
  }

  ~SubprocessChannel() override {
    // Closing stdin is the shutdown signal; give the scorer a moment to exit.
    write_.reset();
    read_.reset();
    if (pid_ <= 0) return;
    for (int i = 0; i < 100; ++i) {
      if (::waitpid(pid_, nullptr, WNOHANG) == pid_) return;
      std::this_thread::sleep_for(std::chrono::milliseconds(10));
    }
    ::kill(pid_, SIGKILL);
    ::waitpid(pid_, nullptr, 0);
  }

  int read_fd() const override { return read_.get(); }
  int write_fd() const override { return write_.get(); }

 private:
  pid_t pid_ = -1;
  FileDescriptor write_;
  FileDescriptor read_;
};

class TcpChannel : public LineChannel {
 public:
  TcpChannel(const std::string& host, std::uint16_t port) {
    ignore_sigpipe();
    addrinfo hints{};
    hints.ai_family = AF_UNSPEC;
    hints.ai_socktype = SOCK_STREAM;
    addrinfo* found = nullptr;
    const std::string service = std::to_string(port);
    if (int rc = ::getaddrinfo(host.c_str(), service.c_str(), &hints, &found); rc != 0)
      throw TransportError("cannot resolve " + host + ": " + ::gai_strerror(rc));
    std::string last_error = "no addresses";
    for (addrinfo* ai = found; ai != nullptr; ai = ai->ai_next) {
      FileDescriptor fd(::socket(ai->ai_family, ai->ai_socktype | SOCK_CLOEXEC, ai->ai_protocol));
      if (fd.get() < 0) continue;
      if (::connect(fd.get(), ai->ai_addr, ai->ai_addrlen) == 0) {
        socket_ = std::move(fd);
        break;
      }
      last_error = std::strerror(errno);
    }
    ::freeaddrinfo(found);
    if (socket_.get() < 0)
      throw TransportError("cannot connect to " + host + ":" + service + ": " + last_error);
    set_nonblocking(socket_.get());
  }

  int read_fd() const override { return socket_.get(); }
  int write_fd() const override { return socket_.get(); }

 private:
  FileDescriptor socket_;
};

}  // namespace

EndpointSpec parse_endpoint(std::string_view spec) {
  EndpointSpec endpoint;
  if (spec.substr(0, kExecPrefix.size()) == kExecPrefix) {
    endpoint.kind = EndpointSpec::Kind::subprocess;
    endpoint.command = std::string(spec.substr(kExecPrefix.size()));
    if (endpoint.command.find_first_not_of(" \t") == std::string::npos)
      throw ValidationError("endpoint \"" + std::string(spec) + "\" has an empty command");
    return endpoint;
  }
  const auto colon = spec.rfind(':');
  if (colon == std::string_view::npos || colon == 0 || colon + 1 == spec.size())
    throw ValidationError("endpoint \"" + std::string(spec) + "\" is neither exec:<command> nor host:port");
  std::string_view host = spec.substr(0, colon);
  if (host.size() >= 2 && host.front() == '[' && host.back() == ']') host = host.substr(1, host.size() - 2);
  const std::string_view port = spec.substr(colon + 1);
  unsigned value = 0;
  auto [end, ec] = std::from_chars(port.data(), port.data() + port.size(), value);
  if (ec != std::errc() || end != port.data() + port.size() || value == 0 || value > 65535)
    throw ValidationError("endpoint \"" + std::string(spec) + "\" has an invalid port");
  endpoint.kind = EndpointSpec::Kind::tcp;
  endpoint.host = std::string(host);
  endpoint.port = static_cast<std::uint16_t>(value);
  return endpoint;
}

std::string encode_request(long long id, std::string_view text) {
  Json request{{"id", id}, {"text", std::string(text)}};
  return request.dump(-1, ' ', false, Json::error_handler_t::replace);
}

ScoreResponse decode_response(std::string_view line) {
  Json json;
  try {
    json = Json::parse(line);
  } catch (const Json::parse_error&) {
    throw TransportError("malformed response line: " + std::string(line.substr(0, 200)));
  }
  if (!json.is_object()) throw TransportError("response is not a JSON object: " + std::string(line.substr(0, 200)));

  ScoreResponse response;
  auto id = json.find("id");
  if (id != json.end() && id->is_number_integer()) {
    response.id = id->get<long long>();
  } else if (id != json.end() && !id->is_null()) {
    throw TransportError("response id is not an integer: " + std::string(line.substr(0, 200)));
  }
  if (auto error = json.find("error"); error != json.end() && !error->is_null())
    response.error = error->is_string() ? error->get<std::string>() : error->dump();
  if (auto score = json.find("score"); score != json.end()) {
    if (!score->is_number()) throw TransportError("response score is not a number", response.id);
    response.score = score->get<double>();
  }
  if (!response.error) {
    if (!response.id) throw TransportError("response without id: " + std::string(line.substr(0, 200)));
    if (!response.score) throw TransportError("response without score", response.id);
  }
  return response;
}

ExternalScorer::ExternalScorer(const EndpointSpec& endpoint, std::chrono::milliseconds timeout)
    : timeout_(timeout) {
  if (endpoint.kind == EndpointSpec::Kind::subprocess) {
    channel_ = std::make_unique<SubprocessChannel>(endpoint.command);
  } else {
    channel_ = std::make_unique<TcpChannel>(endpoint.host, endpoint.port);
  }
}

ExternalScorer::~ExternalScorer() = default;
ExternalScorer::ExternalScorer(ExternalScorer&&) noexcept = default;
ExternalScorer& ExternalScorer::operator=(ExternalScorer&&) noexcept = default;

std::vector<double> ExternalScorer::score_batch(std::span<const std::string> texts) {
  if (texts.empty()) return {};
  if (!channel_) throw TransportError("scorer connection is unusable after an earlier failure");

  // Any failure leaves unread responses on the wire, so the channel is
  // dropped rather than reused.
  auto channel = std::move(channel_);

  std::unordered_map<long long, std::size_t> pending;
  std::string outgoing;
  for (std::size_t i = 0; i < texts.size(); ++i) {
    const long long id = next_id_++;
    pending.emplace(id, i);
    outgoing += encode_request(id, texts[i]);
    outgoing += '\n';
  }
  std::vector<double> scores(texts.size(), 0.0);

  auto first_missing = [&] {
    long long lowest = next_id_;
    for (const auto& [id, index] : pending) lowest = std::min(lowest, id);
    return lowest;
  };

  auto handle_line = [&](std::string_view line) {
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.find_first_not_of(" \t") == std::string_view::npos) return;
    const ScoreResponse response = decode_response(line);
    if (response.error) throw TransportError("scorer reported error: " + *response.error, response.id);
    auto it = pending.find(*response.id);
    if (it == pending.end()) throw TransportError("response id does not match any pending request", response.id);
    if (!std::isfinite(*response.score)) throw TransportError("non-finite score", response.id);
    scores[it->second] = *response.score;
    pending.erase(it);
  };

  const auto deadline = std::chrono::steady_clock::now() + timeout_;
  std::size_t written = 0;
  const int rfd = channel->read_fd();
  const int wfd = channel->write_fd();
  char chunk[65536];

  while (!pending.empty()) {
    const auto now = std::chrono::steady_clock::now();
    if (now >= deadline)
      throw TransportError("timed out after " + std::to_string(timeout_.count()) + " ms waiting for response",
                           first_missing());
    const auto wait_ms = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - now).count();

    pollfd fds[2];
    nfds_t nfds = 0;
    const bool want_write = written < outgoing.size();
    if (rfd == wfd) {
      fds[nfds++] = {rfd, static_cast<short>(POLLIN | (want_write ? POLLOUT : 0)), 0};
    } else {
      fds[nfds++] = {rfd, POLLIN, 0};
      if (want_write) fds[nfds++] = {wfd, POLLOUT, 0};
    }
    const int ready = ::poll(fds, nfds, static_cast<int>(std::min<long long>(wait_ms + 1, 1 << 30)));
    if (ready < 0) {
      if (errno == EINTR) continue;
      throw TransportError(errno_message("poll"));
    }

    for (nfds_t k = 0; k < nfds; ++k) {
      const short revents = fds[k].revents;
      if (want_write && fds[k].fd == wfd && (revents & (POLLOUT | POLLERR))) {
        const ssize_t n = ::write(wfd, outgoing.data() + written, outgoing.size() - written);
        if (n < 0 && errno != EAGAIN && errno != EWOULDBLOCK && errno != EINTR)
          throw TransportError(errno_message("scorer stopped accepting requests"), first_missing());
        if (n > 0) written += static_cast<std::size_t>(n);
      }
      if (fds[k].fd == rfd && (revents & (POLLIN | POLLHUP | POLLERR))) {
        const ssize_t n = ::read(rfd, chunk, sizeof chunk);
        if (n == 0)
          throw TransportError("scorer closed the connection before answering", first_missing());
        if (n < 0) {
          if (errno == EAGAIN || errno == EWOULDBLOCK || errno == EINTR) continue;
          throw TransportError(errno_message("read from scorer"), first_missing());
        }
        read_buffer_.append(chunk, static_cast<std::size_t>(n));
        std::size_t start = 0;
        for (auto nl = read_buffer_.find('\n', start); nl != std::string::npos;
             nl = read_buffer_.find('\n', start)) {
          handle_line(std::string_view(read_buffer_).substr(start, nl - start));
          start = nl + 1;
        }
        read_buffer_.erase(0, start);
      }
    }
  }

  channel_ = std::move(channel);
  return scores;
}

}  // namespace simeval
