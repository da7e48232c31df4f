#pragma once

#include <atomic>
#include <cstdint>
#include <memory>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "icanvas/session.hpp"

namespace httplib {
class Server;
}

namespace icanvas {

struct ServerOptions {
  std::string host = "127.0.0.1";
  int port = 7411;       // 0 picks a free port
  int http_port = 7412;  // 0 picks a free port
  // When set, a client's first line must be {"cmd":"hello","token":...}.
  std::string token;
  // Events queued for one client before it counts as slow and is dropped.
  std::size_t max_queued = 1024;
};

// Hosts one session: a TCP channel carrying line-delimited JSON (commands in,
// events out, fanned out to every client) and an HTTP server answering
// GET /assets/<hash> with PNG bytes.
class Server {
 public:
  Server(Session& session, ServerOptions options);
  ~Server();
  Server(const Server&) = delete;
  Server& operator=(const Server&) = delete;

  // Binds both ports and starts serving; throws io_error if binding fails.
  void start();
  void stop();

  int port() const noexcept { return port_; }
  int http_port() const noexcept { return http_port_; }
  std::size_t client_count() const;
  // Clients dropped for falling behind.
  std::uint64_t dropped_slow() const noexcept { return dropped_slow_; }

 private:
  struct Client;

  void accept_loop();
  void read_loop(std::shared_ptr<Client> client);
  void write_loop(std::shared_ptr<Client> client);
  void enqueue(Client& client, std::string line);
  void close_client(Client& client);
  void reap();
  void release(Client& client);

  Session& session_;
  ServerOptions options_;
  int listen_fd_ = -1;
  int port_ = 0;
  int http_port_ = 0;
  std::atomic<bool> running_{false};
  std::atomic<std::uint64_t> dropped_slow_{0};
  std::thread accept_thread_;
  std::unique_ptr<httplib::Server> http_;
  std::thread http_thread_;
  mutable std::mutex clients_mu_;
  std::vector<std::shared_ptr<Client>> clients_;
};

}  // namespace icanvas
