#include <arpa/inet.h>
#include <fcntl.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <atomic>
#include <chrono>
#include <cstring>
#include <thread>

#include "httpmbt/harness.hpp"

namespace httpmbt {

namespace {

void set_nonblocking(int fd) {
  int flags = fcntl(fd, F_GETFL, 0);
  fcntl(fd, F_SETFL, flags | O_NONBLOCK);
}

sockaddr_in make_addr(const std::string& host, std::uint16_t port) {
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_port = htons(port);
  if (host == "localhost") {
    addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
  } else if (inet_pton(AF_INET, host.c_str(), &addr.sin_addr) != 1) {
    throw endpoint_error("cannot resolve host: " + host);
  }
  return addr;
}

int listen_on(std::uint16_t port) {
  int fd = ::socket(AF_INET, SOCK_STREAM, 0);
  if (fd < 0) throw endpoint_error("socket() failed");
  int one = 1;
  setsockopt(fd, SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));
  sockaddr_in addr = make_addr("localhost", port);
  if (bind(fd, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) != 0) {
    ::close(fd);
    throw endpoint_error("bind() failed on port " + std::to_string(port));
  }
  if (listen(fd, 16) != 0) {
    ::close(fd);
    throw endpoint_error("listen() failed");
  }
  return fd;
}

std::uint16_t bound_port(int fd) {
  sockaddr_in addr{};
  socklen_t len = sizeof(addr);
  getsockname(fd, reinterpret_cast<sockaddr*>(&addr), &len);
  return ntohs(addr.sin_port);
}

void send_all(int fd, std::string_view bytes) {
  std::size_t off = 0;
  while (off < bytes.size()) {
    ssize_t n = ::send(fd, bytes.data() + off, bytes.size() - off, MSG_NOSIGNAL);
    if (n > 0) {
      off += static_cast<std::size_t>(n);
      continue;
    }
    if (n < 0 && (errno == EAGAIN || errno == EWOULDBLOCK)) {
      pollfd p{fd, POLLOUT, 0};
      ::poll(&p, 1, 100);
      continue;
    }
    throw endpoint_error("send() failed: " + std::string(std::strerror(errno)));
  }
}

}  // namespace

struct SocketEndpoint::Impl {
  std::string host;
  std::uint16_t port = 0;
  int listener = -1;
  struct Conn {
    std::uint32_t pcid;
    int fd;
    bool open = true;
  };
  std::vector<Conn> conns;
  std::uint32_t next_pcid = 0;
  std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();

  Conn* find(std::uint32_t pcid) {
    for (Conn& c : conns) {
      if (c.pcid == pcid) return &c;
    }
    return nullptr;
  }
};

SocketEndpoint::SocketEndpoint(const std::string& host, std::uint16_t port,
                               std::optional<std::uint16_t> origin_listen_port)
    : impl_(std::make_unique<Impl>()) {
  impl_->host = host;
  impl_->port = port;
  if (origin_listen_port) {
    impl_->listener = listen_on(*origin_listen_port);
    set_nonblocking(impl_->listener);
  }
}

SocketEndpoint::~SocketEndpoint() { close(); }

std::uint32_t SocketEndpoint::open_connection() {
  int fd = ::socket(AF_INET, SOCK_STREAM, 0);
  if (fd < 0) throw endpoint_error("socket() failed");
  sockaddr_in addr = make_addr(impl_->host, impl_->port);
  if (connect(fd, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) != 0) {
    ::close(fd);
    throw endpoint_error("connect() refused: " + impl_->host + ":" +
                         std::to_string(impl_->port));
  }
  int one = 1;
  setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof(one));
  set_nonblocking(fd);
  impl_->conns.push_back({++impl_->next_pcid, fd, true});
  return impl_->next_pcid;
}

void SocketEndpoint::send(std::uint32_t pcid, std::string_view bytes) {
  Impl::Conn* c = impl_->find(pcid);
  if (c == nullptr || !c->open) throw endpoint_error("send on closed connection");
  send_all(c->fd, bytes);
}

std::optional<RecvChunk> SocketEndpoint::maybe_recv(int wait_ms) {
  std::vector<pollfd> fds;
  std::vector<std::uint32_t> ids;
  if (impl_->listener >= 0) {
    fds.push_back({impl_->listener, POLLIN, 0});
    ids.push_back(0);
  }
  for (const Impl::Conn& c : impl_->conns) {
    if (!c.open) continue;
    fds.push_back({c.fd, POLLIN, 0});
    ids.push_back(c.pcid);
  }
  if (fds.empty()) return std::nullopt;
  int n = ::poll(fds.data(), fds.size(), wait_ms);
  if (n <= 0) return std::nullopt;

  for (std::size_t i = 0; i < fds.size(); ++i) {
    if ((fds[i].revents & (POLLIN | POLLHUP | POLLERR)) == 0) continue;
    if (ids[i] == 0) {
      int fd = accept(impl_->listener, nullptr, nullptr);
      if (fd >= 0) {
        set_nonblocking(fd);
        impl_->conns.push_back({++impl_->next_pcid, fd, true});
      }
      continue;  // data, if any, is picked up on a later poll
    }
    char buf[65536];
    ssize_t got = ::recv(fds[i].fd, buf, sizeof(buf), 0);
    if (got > 0) return RecvChunk{ids[i], std::string(buf, static_cast<std::size_t>(got))};
    if (got == 0 || (got < 0 && errno != EAGAIN && errno != EWOULDBLOCK)) {
      if (Impl::Conn* c = impl_->find(ids[i])) {
        c->open = false;
        ::close(c->fd);
      }
    }
  }
  return std::nullopt;
}

std::int64_t SocketEndpoint::now_ms() {
  return std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() -
                                                               impl_->start)
      .count();
}

void SocketEndpoint::close() {
  for (Impl::Conn& c : impl_->conns) {
    if (c.open) ::close(c.fd);
    c.open = false;
  }
  impl_->conns.clear();
  if (impl_->listener >= 0) {
    ::close(impl_->listener);
    impl_->listener = -1;
  }
}

std::uint16_t pick_free_port() {
  int fd = listen_on(0);
  std::uint16_t port = bound_port(fd);
  ::close(fd);
  return port;
}

// ---------------------------------------------------------------------------

struct SocketSut::Impl {
  int listener = -1;
  std::uint16_t port = 0;
  std::atomic<bool> stop{false};
  std::thread worker;

  ~Impl() {
    stop = true;
    if (worker.joinable()) worker.join();
    if (listener >= 0) ::close(listener);
  }
};

SocketSut::SocketSut() : impl_(std::make_unique<Impl>()) {}
SocketSut::~SocketSut() = default;

std::uint16_t SocketSut::port() const { return impl_->port; }

std::unique_ptr<SocketSut> SocketSut::serve_http(const Fixture& fixture,
                                                 std::optional<Mutant> mutant,
                                                 std::uint64_t etag_seed, std::uint16_t port) {
  auto sut = std::unique_ptr<SocketSut>(new SocketSut());
  Impl* impl = sut->impl_.get();
  impl->listener = listen_on(port);
  impl->port = bound_port(impl->listener);
  set_nonblocking(impl->listener);

  impl->worker = std::thread([impl, fixture, mutant, etag_seed] {
    ServerCore core(fixture, mutant, etag_seed);
    StreamReassembler rx;
    struct Conn {
      std::uint32_t id;
      int fd;
    };
    std::vector<Conn> conns;
    std::uint32_t next_id = 0;
    while (!impl->stop) {
      std::vector<pollfd> fds{{impl->listener, POLLIN, 0}};
      for (const Conn& c : conns) fds.push_back({c.fd, POLLIN, 0});
      ::poll(fds.data(), fds.size(), 20);
      if (fds[0].revents & POLLIN) {
        int fd = accept(impl->listener, nullptr, nullptr);
        if (fd >= 0) {
          set_nonblocking(fd);
          conns.push_back({++next_id, fd});
        }
      }
      for (std::size_t i = 1; i < fds.size(); ++i) {
        if ((fds[i].revents & (POLLIN | POLLHUP)) == 0) continue;
        char buf[65536];
        ssize_t got = ::recv(fds[i].fd, buf, sizeof(buf), 0);
        if (got <= 0) {
          if (got == 0 || (errno != EAGAIN && errno != EWOULDBLOCK)) {
            ::close(fds[i].fd);
            conns.erase(conns.begin() + (i - 1));
            break;  // fds indices are stale now; re-poll
          }
          continue;
        }
        std::uint32_t id = conns[i - 1].id;
        rx.feed(id, std::string_view(buf, static_cast<std::size_t>(got)));
        while (auto m = rx.pop()) {
          HttpResponse resp = m->malformed || !std::holds_alternative<HttpRequest>(m->msg)
                                  ? make_response(404, std::nullopt, "")
                                  : core.handle(std::get<HttpRequest>(m->msg));
          try {
            send_all(conns[i - 1].fd, encode(resp));
          } catch (const endpoint_error&) {
          }
        }
      }
    }
    for (const Conn& c : conns) ::close(c.fd);
  });
  return sut;
}

std::unique_ptr<SocketSut> SocketSut::serve_proxy(std::uint16_t port,
                                                  const std::string& origin_host,
                                                  std::uint16_t origin_port, bool corrupt) {
  auto sut = std::unique_ptr<SocketSut>(new SocketSut());
  Impl* impl = sut->impl_.get();
  impl->listener = listen_on(port);
  impl->port = bound_port(impl->listener);
  set_nonblocking(impl->listener);

  impl->worker = std::thread([impl, origin_host, origin_port, corrupt] {
    StreamReassembler rx;
    struct Conn {
      std::uint32_t id;
      int fd;
      bool upstream;           // true: connection we dialed toward the origin
      std::uint32_t peer = 0;  // client conn a forwarded message came from
    };
    std::vector<Conn> conns;
    std::uint32_t next_id = 0;
    auto find = [&](std::uint32_t id) -> Conn* {
      for (Conn& c : conns) {
        if (c.id == id) return &c;
      }
      return nullptr;
    };
    while (!impl->stop) {
      std::vector<pollfd> fds{{impl->listener, POLLIN, 0}};
      for (const Conn& c : conns) fds.push_back({c.fd, POLLIN, 0});
      ::poll(fds.data(), fds.size(), 20);
      if (fds[0].revents & POLLIN) {
        int fd = accept(impl->listener, nullptr, nullptr);
        if (fd >= 0) {
          set_nonblocking(fd);
          conns.push_back({++next_id, fd, false, 0});
        }
      }
      for (std::size_t i = 1; i < fds.size(); ++i) {
        if ((fds[i].revents & (POLLIN | POLLHUP)) == 0) continue;
        char buf[65536];
        ssize_t got = ::recv(fds[i].fd, buf, sizeof(buf), 0);
        if (got <= 0) {
          if (got == 0 || (errno != EAGAIN && errno != EWOULDBLOCK)) {
            ::close(fds[i].fd);
            conns.erase(conns.begin() + (i - 1));
            break;
          }
          continue;
        }
        Conn self = conns[i - 1];
        rx.feed(self.id, std::string_view(buf, static_cast<std::size_t>(got)));
        while (auto m = rx.pop()) {
          if (m->malformed) continue;
          try {
            if (!self.upstream) {
              // Forward each client message on a fresh upstream connection.
              int fd = ::socket(AF_INET, SOCK_STREAM, 0);
              if (fd < 0) continue;
              sockaddr_in addr = make_addr(origin_host, origin_port);
              if (connect(fd, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) != 0) {
                ::close(fd);
                continue;
              }
              set_nonblocking(fd);
              std::string raw = corrupt ? corrupt_forwarded_message(m->raw) : m->raw;
              send_all(fd, raw);
              conns.push_back({++next_id, fd, true, self.id});
            } else if (Conn* client = find(self.peer)) {
              send_all(client->fd, m->raw);
            }
          } catch (const endpoint_error&) {
          }
        }
      }
    }
    for (const Conn& c : conns) ::close(c.fd);
  });
  return sut;
}

}  // namespace httpmbt
