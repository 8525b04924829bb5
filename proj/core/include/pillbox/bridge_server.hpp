#pragma once

#include <chrono>
#include <cstdint>
#include <functional>
#include <memory>

#include "pillbox/bridge_protocol.hpp"

namespace pillbox {

struct BridgeServerOptions {
  std::uint16_t port = 8765;   // 0 picks a free port
  std::chrono::milliseconds tick{50};
  bool loopback_only = true;
  bool stop_on_signal = false;  // SIGINT / SIGTERM end run()
};

// WebSocket endpoint for the device panel. Each text message carries one JSON
// object. A client gets the current snapshot on connect, one after each
// command it sends, and one whenever pacing moves the device forward.
// Everything, device included, runs on the caller's thread inside run().
class BridgeServer {
 public:
  BridgeServer(BridgeSession& session, BridgeServerOptions options);
  ~BridgeServer();
  BridgeServer(const BridgeServer&) = delete;
  BridgeServer& operator=(const BridgeServer&) = delete;

  // Bound port, valid after construction.
  std::uint16_t port() const;

  // Blocks until stop() is called (from any thread).
  void run();
  void stop();

  std::size_t clients() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace pillbox
