/*
 * Copyright 2026 The pw2v Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <arpa/inet.h>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <bit>
#include <cerrno>
#include <charconv>
#include <chrono>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>
#include <string_view>
#include <thread>
#include <utility>
#include <vector>

#include "pw2v/error.hpp"
#include "pw2v/transport.hpp"

namespace pw2v {

struct Endpoint {
  std::string host;
  std::uint16_t port = 0;

  std::string str() const { return host + ":" + std::to_string(port); }
  friend bool operator==(const Endpoint&, const Endpoint&) = default;
};

inline Endpoint parse_endpoint(std::string_view text) {
  const auto colon = text.rfind(':');
  if (colon == std::string_view::npos || colon == 0)
    throw Error(ErrorKind::kParse, "expected host:port, got '" + std::string(text) + "'");
  unsigned port = 0;
  const auto digits = text.substr(colon + 1);
  const auto [p, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), port);
  if (ec != std::errc() || p != digits.data() + digits.size() || port > 65535)
    throw Error(ErrorKind::kParse, "bad port in '" + std::string(text) + "'");
  return {std::string(text.substr(0, colon)), static_cast<std::uint16_t>(port)};
}

/// One "host:port" per line, rank order; blank lines and '#' comments skipped.
inline std::vector<Endpoint> read_hosts_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::kIo, "cannot open hosts file " + path.string());
  std::vector<Endpoint> out;
  std::string line;
  while (std::getline(in, line)) {
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    const auto last = line.find_last_not_of(" \t\r");
    out.push_back(parse_endpoint(std::string_view(line).substr(first, last - first + 1)));
  }
  if (out.empty()) throw Error(ErrorKind::kParse, "hosts file lists no endpoints");
  return out;
}

namespace wire {

enum Kind : std::uint8_t {
  kHandshake = 1,
  kAck = 2,
  kError = 3,
  kBarrier = 4,
  kRowSync = 5,
  kScalars = 6,
};

inline constexpr std::uint32_t kMaxFrame = 1u << 31;

class Writer {
 public:
  void u8(std::uint8_t v) { buf_.push_back(v); }
  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) buf_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void u64(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) buf_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void f32(float v) { u32(std::bit_cast<std::uint32_t>(v)); }
  void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
  void text(std::string_view s) { buf_.insert(buf_.end(), s.begin(), s.end()); }
  std::vector<std::uint8_t>& bytes() { return buf_; }

 private:
  std::vector<std::uint8_t> buf_;
};

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> b) : b_(b) {}
  std::uint8_t u8() { return take(1)[0]; }
  std::uint32_t u32() {
    const auto s = take(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(s[i]) << (8 * i);
    return v;
  }
  std::uint64_t u64() {
    const auto s = take(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(s[i]) << (8 * i);
    return v;
  }
  float f32() { return std::bit_cast<float>(u32()); }
  double f64() { return std::bit_cast<double>(u64()); }
  std::string rest() {
    std::string s(b_.begin() + static_cast<std::ptrdiff_t>(pos_), b_.end());
    pos_ = b_.size();
    return s;
  }
  bool done() const noexcept { return pos_ == b_.size(); }

 private:
  std::span<const std::uint8_t> take(std::size_t n) {
    if (b_.size() - pos_ < n) throw Error(ErrorKind::kTransport, "truncated frame body");
    const auto s = b_.subspan(pos_, n);
    pos_ += n;
    return s;
  }
  std::span<const std::uint8_t> b_;
  std::size_t pos_ = 0;
};

struct Frame {
  std::uint8_t kind = 0;
  std::vector<std::uint8_t> body;
};

class Socket {
 public:
  Socket() = default;
  explicit Socket(int fd) : fd_(fd) {}
  Socket(Socket&& o) noexcept : fd_(std::exchange(o.fd_, -1)) {}
  Socket& operator=(Socket&& o) noexcept {
    if (this != &o) {
      close();
      fd_ = std::exchange(o.fd_, -1);
    }
    return *this;
  }
  ~Socket() { close(); }

  int fd() const noexcept { return fd_; }
  bool valid() const noexcept { return fd_ >= 0; }
  void close() {
    if (fd_ >= 0) ::close(fd_);
    fd_ = -1;
  }

  void send_all(const std::uint8_t* p, std::size_t n) {
    while (n > 0) {
      const ssize_t k = ::send(fd_, p, n, MSG_NOSIGNAL);
      if (k < 0 && errno == EINTR) continue;
      if (k <= 0) throw Error(ErrorKind::kTransport, std::string("send: ") + std::strerror(errno));
      p += k;
      n -= static_cast<std::size_t>(k);
    }
  }

  void recv_all(std::uint8_t* p, std::size_t n) {
    while (n > 0) {
      const ssize_t k = ::recv(fd_, p, n, 0);
      if (k < 0 && errno == EINTR) continue;
      if (k == 0) throw Error(ErrorKind::kTransport, "peer closed the connection");
      if (k < 0) throw Error(ErrorKind::kTransport, std::string("recv: ") + std::strerror(errno));
      p += k;
      n -= static_cast<std::size_t>(k);
    }
  }

  void send_frame(std::uint8_t kind, std::span<const std::uint8_t> body) {
    Writer head;
    head.u32(static_cast<std::uint32_t>(body.size() + 1));
    head.u8(kind);
    send_all(head.bytes().data(), head.bytes().size());
    if (!body.empty()) send_all(body.data(), body.size());
  }

  Frame recv_frame() {
    std::uint8_t head[5];
    recv_all(head, sizeof head);
    const std::uint32_t len = Reader(std::span<const std::uint8_t>(head, 4)).u32();
    if (len < 1 || len > kMaxFrame) throw Error(ErrorKind::kTransport, "bad frame length");
    Frame f;
    f.kind = head[4];
    f.body.resize(len - 1);
    if (!f.body.empty()) recv_all(f.body.data(), f.body.size());
    return f;
  }

 private:
  int fd_ = -1;
};

inline addrinfo* resolve(const Endpoint& ep, bool passive) {
  addrinfo hints{};
  hints.ai_family = AF_UNSPEC;
  hints.ai_socktype = SOCK_STREAM;
  if (passive) hints.ai_flags = AI_PASSIVE;
  addrinfo* res = nullptr;
  const std::string port = std::to_string(ep.port);
  const int rc = ::getaddrinfo(ep.host.c_str(), port.c_str(), &hints, &res);
  if (rc != 0)
    throw Error(ErrorKind::kTransport, "cannot resolve " + ep.str() + ": " + ::gai_strerror(rc));
  return res;
}

inline void set_nodelay(const Socket& s) {
  int one = 1;
  ::setsockopt(s.fd(), IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
}

inline Socket listen_on(const Endpoint& ep) {
  addrinfo* res = resolve(ep, true);
  std::string why = "no address";
  for (addrinfo* a = res; a; a = a->ai_next) {
    Socket s(::socket(a->ai_family, a->ai_socktype, a->ai_protocol));
    if (!s.valid()) continue;
    int one = 1;
    ::setsockopt(s.fd(), SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
    if (::bind(s.fd(), a->ai_addr, a->ai_addrlen) == 0 && ::listen(s.fd(), 64) == 0) {
      ::freeaddrinfo(res);
      return s;
    }
    why = std::strerror(errno);
  }
  ::freeaddrinfo(res);
  throw Error(ErrorKind::kTransport, "cannot listen on " + ep.str() + ": " + why);
}

inline Socket accept_within(const Socket& listener, std::chrono::milliseconds timeout) {
  pollfd p{listener.fd(), POLLIN, 0};
  const int rc = ::poll(&p, 1, static_cast<int>(timeout.count()));
  if (rc <= 0) throw Error(ErrorKind::kTransport, "timed out waiting for peers to connect");
  Socket s(::accept(listener.fd(), nullptr, nullptr));
  if (!s.valid()) throw Error(ErrorKind::kTransport, std::string("accept: ") + std::strerror(errno));
  set_nodelay(s);
  return s;
}

inline Socket connect_within(const Endpoint& ep, std::chrono::milliseconds timeout) {
  const auto deadline = std::chrono::steady_clock::now() + timeout;
  std::string why;
  for (;;) {
    addrinfo* res = resolve(ep, false);
    for (addrinfo* a = res; a; a = a->ai_next) {
      Socket s(::socket(a->ai_family, a->ai_socktype, a->ai_protocol));
      if (!s.valid()) continue;
      if (::connect(s.fd(), a->ai_addr, a->ai_addrlen) == 0) {
        ::freeaddrinfo(res);
        set_nodelay(s);
        return s;
      }
      why = std::strerror(errno);
    }
    ::freeaddrinfo(res);
    if (std::chrono::steady_clock::now() >= deadline)
      throw Error(ErrorKind::kTransport, "cannot connect to " + ep.str() + ": " + why);
    std::this_thread::sleep_for(std::chrono::milliseconds(50));
  }
}

}  // namespace wire

/// TCP transport with rank 0 as the reducer. Ranks 1..N-1 connect to rank
/// 0's endpoint; every collective is a gather to rank 0 followed by a
/// broadcast of the result. Row payloads travel as float32, so all replicas
/// hold the float-rounded mean after a sync.
template <typename Real>
class SocketTransport final : public Transport<Real> {
 public:
  struct Options {
    std::chrono::milliseconds connect_timeout{30000};
  };

  SocketTransport(std::size_t rank, std::size_t nodes, const Endpoint& root)
      : SocketTransport(rank, nodes, root, Options{}) {}

  SocketTransport(std::size_t rank, std::size_t nodes, const Endpoint& root, Options opt)
      : rank_(rank), nodes_(nodes), opt_(opt) {
    if (nodes < 1 || rank >= nodes)
      throw Error(ErrorKind::kInvalidConfig, "rank must lie in [0, nodes)");
    if (rank_ == 0) {
      if (nodes_ > 1) listener_ = wire::listen_on(root);
    } else {
      root_ = wire::connect_within(root, opt_.connect_timeout);
    }
  }

  /// Rank 0 only: a listener bound to port 0 reports the chosen port here.
  std::uint16_t bound_port() const {
    sockaddr_storage addr{};
    socklen_t len = sizeof addr;
    if (!listener_.valid() ||
        ::getsockname(listener_.fd(), reinterpret_cast<sockaddr*>(&addr), &len) != 0)
      return 0;
    if (addr.ss_family == AF_INET)
      return ntohs(reinterpret_cast<sockaddr_in*>(&addr)->sin_port);
    return ntohs(reinterpret_cast<sockaddr_in6*>(&addr)->sin6_port);
  }

  std::size_t rank() const override { return rank_; }
  std::size_t size() const override { return nodes_; }

  void handshake(const HandshakeInfo& info) override {
    if (rank_ != 0) {
      root_.send_frame(wire::kHandshake, encode(info));
      const auto f = root_.recv_frame();
      if (f.kind == wire::kError)
        throw Error(ErrorKind::kHandshake, "handshake failed: " + wire::Reader(f.body).rest());
      if (f.kind != wire::kAck) throw Error(ErrorKind::kHandshake, "unexpected handshake reply");
      return;
    }
    peers_.clear();
    peers_.resize(nodes_);
    std::string why;
    for (std::size_t i = 1; i < nodes_; ++i) {
      wire::Socket s = wire::accept_within(listener_, opt_.connect_timeout);
      const auto f = s.recv_frame();
      if (f.kind != wire::kHandshake) throw Error(ErrorKind::kHandshake, "peer skipped handshake");
      const HandshakeInfo other = decode(f.body);
      std::string bad = handshake_mismatch(info, other);
      if (bad.empty() && (other.rank == 0 || other.rank >= nodes_ || peers_[other.rank].valid()))
        bad = "duplicate or out-of-range rank " + std::to_string(other.rank);
      if (!bad.empty() && why.empty()) why = bad;
      if (other.rank > 0 && other.rank < nodes_ && !peers_[other.rank].valid())
        peers_[other.rank] = std::move(s);
      else
        extra_.push_back(std::move(s));
    }
    if (!why.empty()) {
      wire::Writer w;
      w.text(why);
      for (auto& p : peers_)
        if (p.valid()) send_quietly(p, wire::kError, w.bytes());
      for (auto& p : extra_) send_quietly(p, wire::kError, w.bytes());
      throw Error(ErrorKind::kHandshake, "handshake failed: " + why);
    }
    for (std::size_t r = 1; r < nodes_; ++r) peers_[r].send_frame(wire::kAck, {});
  }

  void barrier() override {
    if (nodes_ == 1) return;
    if (rank_ != 0) {
      root_.send_frame(wire::kBarrier, {});
      expect(root_.recv_frame(), wire::kBarrier);
      return;
    }
    for (std::size_t r = 1; r < nodes_; ++r) expect(peers_[r].recv_frame(), wire::kBarrier);
    for (std::size_t r = 1; r < nodes_; ++r) peers_[r].send_frame(wire::kBarrier, {});
  }

  void allreduce_average(EmbeddingModel<Real>& model, MatrixSelector which,
                         std::span<const WordId> rows) override {
    RowMatrix<Real>& m = select_matrix(model, which);
    const std::size_t d = m.cols();
    if (rank_ != 0) {
      root_.send_frame(wire::kRowSync, encode_rows(m, which, rows));
      const auto f = root_.recv_frame();
      expect(f, wire::kRowSync);
      install(m, which, rows, f.body);
      return;
    }
    std::vector<double> acc(rows.size() * d);
    for (std::size_t i = 0; i < rows.size(); ++i) {
      const Real* src = m.row_ptr(rows[i]);
      for (std::size_t j = 0; j < d; ++j)
        acc[i * d + j] = static_cast<double>(static_cast<float>(src[j]));
    }
    for (std::size_t r = 1; r < nodes_; ++r) {
      const auto f = peers_[r].recv_frame();
      expect(f, wire::kRowSync);
      wire::Reader in(f.body);
      check_header(in, which, rows);
      for (double& a : acc) a += static_cast<double>(in.f32());
      if (!in.done()) fail("row-sync frame has trailing bytes");
    }
    const double n = static_cast<double>(nodes_);
    std::vector<float> mean(acc.size());
    for (std::size_t i = 0; i < acc.size(); ++i) mean[i] = static_cast<float>(acc[i] / n);
    for (std::size_t i = 0; i < rows.size(); ++i) {
      Real* dst = m.row_ptr(rows[i]);
      for (std::size_t j = 0; j < d; ++j) dst[j] = static_cast<Real>(mean[i * d + j]);
    }
    if (nodes_ == 1) return;
    wire::Writer w;
    w.u8(static_cast<std::uint8_t>(which));
    w.u32(static_cast<std::uint32_t>(rows.size()));
    for (const WordId id : rows) w.u32(id);
    for (const float v : mean) w.f32(v);
    for (std::size_t r = 1; r < nodes_; ++r) peers_[r].send_frame(wire::kRowSync, w.bytes());
  }

  void reduce_sum(std::span<double> values) override {
    if (nodes_ == 1) return;
    auto encode_values = [](std::span<const double> v) {
      wire::Writer w;
      w.u32(static_cast<std::uint32_t>(v.size()));
      for (const double x : v) w.f64(x);
      return std::move(w.bytes());
    };
    auto decode_into = [this](const wire::Frame& f, std::span<double> out, bool add) {
      expect(f, wire::kScalars);
      wire::Reader in(f.body);
      if (in.u32() != out.size()) fail("scalar vectors differ in length");
      for (double& x : out) x = add ? x + in.f64() : in.f64();
    };
    if (rank_ != 0) {
      root_.send_frame(wire::kScalars, encode_values(values));
      decode_into(root_.recv_frame(), values, false);
      return;
    }
    for (std::size_t r = 1; r < nodes_; ++r) decode_into(peers_[r].recv_frame(), values, true);
    const auto out = encode_values(values);
    for (std::size_t r = 1; r < nodes_; ++r) peers_[r].send_frame(wire::kScalars, out);
  }

 private:
  static std::vector<std::uint8_t> encode(const HandshakeInfo& h) {
    wire::Writer w;
    w.u32(h.version);
    w.u32(h.rank);
    w.u32(h.nodes);
    w.u32(h.vocab_size);
    w.u32(h.dim);
    w.u64(h.config_hash);
    return std::move(w.bytes());
  }

  static HandshakeInfo decode(std::span<const std::uint8_t> body) {
    wire::Reader in(body);
    HandshakeInfo h;
    h.version = in.u32();
    h.rank = in.u32();
    h.nodes = in.u32();
    h.vocab_size = in.u32();
    h.dim = in.u32();
    h.config_hash = in.u64();
    return h;
  }

  static std::vector<std::uint8_t> encode_rows(const RowMatrix<Real>& m, MatrixSelector which,
                                               std::span<const WordId> rows) {
    wire::Writer w;
    w.u8(static_cast<std::uint8_t>(which));
    w.u32(static_cast<std::uint32_t>(rows.size()));
    for (const WordId id : rows) w.u32(id);
    for (const WordId id : rows)
      for (const Real v : m.row(id)) w.f32(static_cast<float>(v));
    return std::move(w.bytes());
  }

  void check_header(wire::Reader& in, MatrixSelector which, std::span<const WordId> rows) {
    if (in.u8() != static_cast<std::uint8_t>(which)) fail("ranks synced different matrices");
    if (in.u32() != rows.size()) fail("ranks synced different row counts");
    for (const WordId id : rows)
      if (in.u32() != id) fail("ranks synced different rows");
  }

  void install(RowMatrix<Real>& m, MatrixSelector which, std::span<const WordId> rows,
               std::span<const std::uint8_t> body) {
    wire::Reader in(body);
    check_header(in, which, rows);
    for (const WordId id : rows)
      for (Real& v : m.row(id)) v = static_cast<Real>(in.f32());
    if (!in.done()) fail("row-sync frame has trailing bytes");
  }

  void expect(const wire::Frame& f, std::uint8_t kind) {
    if (f.kind == wire::kError) fail("peer reported: " + wire::Reader(f.body).rest());
    if (f.kind != kind) fail("unexpected frame kind " + std::to_string(f.kind));
  }

  [[noreturn]] void fail(const std::string& why) {
    if (rank_ == 0) {
      wire::Writer w;
      w.text(why);
      for (auto& p : peers_)
        if (p.valid()) send_quietly(p, wire::kError, w.bytes());
    }
    throw Error(ErrorKind::kTransport, why);
  }

  static void send_quietly(wire::Socket& s, std::uint8_t kind, std::span<const std::uint8_t> body) {
    try {
      s.send_frame(kind, body);
    } catch (const Error&) {
    }
  }

  std::size_t rank_;
  std::size_t nodes_;
  Options opt_;
  wire::Socket listener_;
  wire::Socket root_;
  std::vector<wire::Socket> peers_;
  std::vector<wire::Socket> extra_;
};

}  // namespace pw2v
