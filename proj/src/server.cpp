#include "icanvas/server.hpp"

#include <arpa/inet.h>
#include <netinet/in.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <condition_variable>
#include <cstring>
#include <deque>

#include "httplib.h"

namespace icanvas {

struct Server::Client {
  int fd = -1;
  std::mutex mu;
  std::condition_variable cv;
  std::deque<std::string> queue;
  bool closed = false;
  // Until a token-protected client says hello it receives nothing.
  bool authorized = false;
  std::uint64_t listener = 0;
  std::thread reader;
  std::thread writer;
};

Server::Server(Session& session, ServerOptions options) : session_(session), options_(std::move(options)) {}

Server::~Server() { stop(); }

namespace {

bool send_all(int fd, const std::string& data) {
  std::size_t off = 0;
  while (off < data.size()) {
    const ssize_t n = ::send(fd, data.data() + off, data.size() - off, MSG_NOSIGNAL);
    if (n <= 0) return false;
    off += static_cast<std::size_t>(n);
  }
  return true;
}

}  // namespace

void Server::start() {
  listen_fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
  if (listen_fd_ < 0) throw Error(Errc::io_error, std::string("socket: ") + std::strerror(errno));
  int one = 1;
  ::setsockopt(listen_fd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_port = htons(static_cast<std::uint16_t>(options_.port));
  if (::inet_pton(AF_INET, options_.host.c_str(), &addr.sin_addr) != 1)
    throw Error(Errc::io_error, "bad listen address " + options_.host);
  if (::bind(listen_fd_, reinterpret_cast<sockaddr*>(&addr), sizeof addr) < 0 || ::listen(listen_fd_, 16) < 0) {
    const std::string msg = std::strerror(errno);
    ::close(listen_fd_);
    listen_fd_ = -1;
    throw Error(Errc::io_error, "cannot listen on " + options_.host + ":" + std::to_string(options_.port) + ": " + msg);
  }
  socklen_t len = sizeof addr;
  ::getsockname(listen_fd_, reinterpret_cast<sockaddr*>(&addr), &len);
  port_ = ntohs(addr.sin_port);

  http_ = std::make_unique<httplib::Server>();
  http_->Get(R"(/assets/([0-9a-f]+))", [this](const httplib::Request& req, httplib::Response& res) {
    auto asset = session_.find_asset(req.matches[1]);
    if (!asset) {
      res.status = 404;
      res.set_content("unknown asset\n", "text/plain");
      return;
    }
    const auto png = encode_png(asset->width, asset->height, asset->pixels());
    res.set_header("Cache-Control", "public, max-age=31536000, immutable");
    res.set_content(std::string(png.begin(), png.end()), "image/png");
  });
  http_->Get("/document", [this](const httplib::Request&, httplib::Response& res) {
    res.set_content(serialize(session_.document()), "application/json");
  });
  if (options_.http_port == 0) {
    http_port_ = http_->bind_to_any_port(options_.host);
  } else {
    http_port_ = http_->bind_to_port(options_.host, options_.http_port) ? options_.http_port : -1;
  }
  if (http_port_ < 0) {
    ::close(listen_fd_);
    listen_fd_ = -1;
    throw Error(Errc::io_error, "cannot bind asset server on port " + std::to_string(options_.http_port));
  }
  running_ = true;
  http_thread_ = std::thread([this] { http_->listen_after_bind(); });
  accept_thread_ = std::thread([this] { accept_loop(); });
}

void Server::stop() {
  if (!running_.exchange(false)) return;
  ::shutdown(listen_fd_, SHUT_RDWR);
  if (accept_thread_.joinable()) accept_thread_.join();
  ::close(listen_fd_);
  listen_fd_ = -1;
  http_->stop();
  if (http_thread_.joinable()) http_thread_.join();
  std::vector<std::shared_ptr<Client>> clients;
  {
    std::lock_guard g(clients_mu_);
    clients.swap(clients_);
  }
  for (auto& c : clients) {
    close_client(*c);
    release(*c);
  }
}

// Joins a closed client's threads. Never called under the session lock,
// because unsubscribing there would disturb the listener fan-out.
void Server::release(Client& c) {
  if (c.reader.joinable()) c.reader.join();
  if (c.writer.joinable()) c.writer.join();
  if (c.listener) session_.unsubscribe(c.listener);
  ::close(c.fd);
}

std::size_t Server::client_count() const {
  std::lock_guard g(clients_mu_);
  std::size_t n = 0;
  for (const auto& c : clients_) {
    std::lock_guard cg(c->mu);
    n += c->closed ? 0 : 1;
  }
  return n;
}

void Server::accept_loop() {
  while (running_) {
    pollfd p{listen_fd_, POLLIN, 0};
    const int r = ::poll(&p, 1, 200);
    reap();
    if (r <= 0 || !(p.revents & POLLIN)) {
      if (p.revents & (POLLERR | POLLHUP | POLLNVAL)) return;
      continue;
    }
    const int fd = ::accept(listen_fd_, nullptr, nullptr);
    if (fd < 0) continue;
    auto client = std::make_shared<Client>();
    client->fd = fd;
    client->authorized = options_.token.empty();
    {
      std::lock_guard g(clients_mu_);
      clients_.push_back(client);
    }
    if (client->authorized) client->listener = session_.attach([this, client](const json& e) {
      enqueue(*client, e.dump() + "\n");
    });
    client->writer = std::thread([this, client] { write_loop(client); });
    client->reader = std::thread([this, client] { read_loop(client); });
  }
}

void Server::reap() {
  std::vector<std::shared_ptr<Client>> dead;
  {
    std::lock_guard g(clients_mu_);
    for (auto it = clients_.begin(); it != clients_.end();) {
      bool closed;
      {
        std::lock_guard cg((*it)->mu);
        closed = (*it)->closed;
      }
      if (closed) {
        dead.push_back(*it);
        it = clients_.erase(it);
      } else {
        ++it;
      }
    }
  }
  for (auto& c : dead) release(*c);
}

void Server::close_client(Client& c) {
  {
    std::lock_guard g(c.mu);
    if (c.closed) return;
    c.closed = true;
  }
  ::shutdown(c.fd, SHUT_RDWR);
  c.cv.notify_all();
}

void Server::enqueue(Client& c, std::string line) {
  bool slow = false;
  {
    std::lock_guard g(c.mu);
    if (c.closed || !c.authorized) return;
    if (c.queue.size() >= options_.max_queued) {
      slow = true;
    } else {
      c.queue.push_back(std::move(line));
    }
  }
  if (slow) {
    ++dropped_slow_;
    close_client(c);
    return;
  }
  c.cv.notify_one();
}

void Server::write_loop(std::shared_ptr<Client> c) {
  for (;;) {
    std::string line;
    {
      std::unique_lock g(c->mu);
      c->cv.wait(g, [&] { return c->closed || !c->queue.empty(); });
      if (c->closed) return;
      line = std::move(c->queue.front());
      c->queue.pop_front();
    }
    if (!send_all(c->fd, line)) {
      close_client(*c);
      return;
    }
  }
}

void Server::read_loop(std::shared_ptr<Client> c) {
  std::string buffer;
  char chunk[4096];
  bool authorized = options_.token.empty();
  for (;;) {
    const ssize_t n = ::recv(c->fd, chunk, sizeof chunk, 0);
    if (n <= 0) break;
    buffer.append(chunk, static_cast<std::size_t>(n));
    std::size_t nl;
    while ((nl = buffer.find('\n')) != std::string::npos) {
      std::string line = buffer.substr(0, nl);
      buffer.erase(0, nl + 1);
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (line.empty()) continue;
      if (!authorized) {
        json hello = json::parse(line, nullptr, false);
        if (hello.is_object() && hello.value("cmd", "") == "hello" && hello.value("token", "") == options_.token) {
          authorized = true;
          {
            std::lock_guard g(c->mu);
            c->authorized = true;
          }
          c->listener = session_.attach([this, c](const json& e) { enqueue(*c, e.dump() + "\n"); });
        } else {
          send_all(c->fd, json({{"kind", "error"}, {"request_id", nullptr}, {"code", "auth"},
                                {"message", "first message must be hello with a valid token"}})
                              .dump() +
                              "\n");
          close_client(*c);
          return;
        }
        continue;
      }
      session_.handle_line(line);
    }
  }
  close_client(*c);
}

}  // namespace icanvas
