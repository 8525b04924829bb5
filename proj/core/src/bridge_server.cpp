#include "pillbox/bridge_server.hpp"

#include <boost/asio.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/websocket.hpp>
#include <csignal>
#include <deque>
#include <set>

#include "pillbox/error.hpp"

namespace pillbox {

namespace asio = boost::asio;
namespace beast = boost::beast;
namespace websocket = beast::websocket;
using tcp = asio::ip::tcp;

namespace {

class Client;

struct Hub {
  BridgeSession& session;
  std::set<std::shared_ptr<Client>> clients;

  void broadcast(const std::string& text);
};

class Client : public std::enable_shared_from_this<Client> {
 public:
  Client(tcp::socket socket, Hub& hub) : ws_(std::move(socket)), hub_(hub) {}

  void start() {
    ws_.set_option(websocket::stream_base::timeout::suggested(beast::role_type::server));
    ws_.async_accept([self = shared_from_this()](beast::error_code ec) {
      if (ec) return;
      self->hub_.clients.insert(self);
      self->send(self->hub_.session.next_snapshot());
      self->read();
    });
  }

  void send(std::string text) {
    queue_.push_back(std::move(text));
    if (queue_.size() == 1) write();
  }

  void close() {
    beast::error_code ignored;
    beast::get_lowest_layer(ws_).socket().close(ignored);
  }

 private:
  void read() {
    ws_.async_read(buffer_, [self = shared_from_this()](beast::error_code ec, std::size_t) {
      if (ec) {
        self->drop();
        return;
      }
      const auto text = beast::buffers_to_string(self->buffer_.data());
      self->buffer_.consume(self->buffer_.size());
      if (auto problem = self->hub_.session.handle(text)) {
        self->send(error_json(*problem));
      } else {
        self->hub_.broadcast(self->hub_.session.next_snapshot());
      }
      self->read();
    });
  }

  void write() {
    ws_.text(true);
    ws_.async_write(asio::buffer(queue_.front()), [self = shared_from_this()](beast::error_code ec, std::size_t) {
      if (ec) {
        self->drop();
        return;
      }
      self->queue_.pop_front();
      if (!self->queue_.empty()) self->write();
    });
  }

  void drop() { hub_.clients.erase(shared_from_this()); }

  websocket::stream<beast::tcp_stream> ws_;
  Hub& hub_;
  beast::flat_buffer buffer_;
  std::deque<std::string> queue_;
};

void Hub::broadcast(const std::string& text) {
  for (const auto& c : clients) c->send(text);
}

}  // namespace

struct BridgeServer::Impl {
  Impl(BridgeSession& session, BridgeServerOptions opts)
      : options(opts), hub{session, {}}, acceptor(io), pacing(io), signals(io) {
    const auto address = opts.loopback_only ? asio::ip::address_v4::loopback() : asio::ip::address_v4::any();
    const tcp::endpoint endpoint(address, opts.port);
    beast::error_code ec;
    acceptor.open(endpoint.protocol(), ec);
    if (!ec) acceptor.set_option(asio::socket_base::reuse_address(true), ec);
    if (!ec) acceptor.bind(endpoint, ec);
    if (!ec) acceptor.listen(asio::socket_base::max_listen_connections, ec);
    if (ec) throw Error(ErrorCode::kPrecondition, "cannot listen on port " + std::to_string(opts.port) + ": " + ec.message());
  }

  void accept() {
    acceptor.async_accept([this](beast::error_code ec, tcp::socket socket) {
      if (ec) return;
      std::make_shared<Client>(std::move(socket), hub)->start();
      accept();
    });
  }

  void schedule_tick() {
    pacing.expires_after(options.tick);
    pacing.async_wait([this](beast::error_code ec) {
      if (ec) return;
      const auto now = std::chrono::steady_clock::now();
      const auto& device = hub.session.device();
      const auto before_time = device.now();
      const auto before_events = device.events_processed();
      hub.session.tick(now - last_tick);
      last_tick = now;
      if (device.now() != before_time || device.events_processed() != before_events) {
        hub.broadcast(hub.session.next_snapshot());
      }
      schedule_tick();
    });
  }

  BridgeServerOptions options;
  asio::io_context io;
  Hub hub;
  tcp::acceptor acceptor;
  asio::steady_timer pacing;
  asio::signal_set signals;
  std::chrono::steady_clock::time_point last_tick;
};

BridgeServer::BridgeServer(BridgeSession& session, BridgeServerOptions options)
    : impl_(std::make_unique<Impl>(session, options)) {}

BridgeServer::~BridgeServer() = default;

std::uint16_t BridgeServer::port() const { return impl_->acceptor.local_endpoint().port(); }

void BridgeServer::run() {
  impl_->last_tick = std::chrono::steady_clock::now();
  impl_->accept();
  impl_->schedule_tick();
  if (impl_->options.stop_on_signal) {
    impl_->signals.add(SIGINT);
    impl_->signals.add(SIGTERM);
    impl_->signals.async_wait([this](beast::error_code ec, int) {
      if (!ec) stop();
    });
  }
  impl_->io.run();
  for (const auto& c : impl_->hub.clients) c->close();
  impl_->hub.clients.clear();
}

void BridgeServer::stop() {
  asio::post(impl_->io, [this] {
    beast::error_code ignored;
    impl_->acceptor.close(ignored);
    impl_->pacing.cancel();
    impl_->signals.cancel();
    for (const auto& c : impl_->hub.clients) c->close();
    impl_->hub.clients.clear();
    impl_->io.stop();
  });
}

std::size_t BridgeServer::clients() const { return impl_->hub.clients.size(); }

}  // namespace pillbox
