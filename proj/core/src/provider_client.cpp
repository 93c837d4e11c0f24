#include <future>
#include <map>
#include <mutex>
#include <thread>

#include "idiomspace/errors.hpp"
#include "idiomspace/providers.hpp"

namespace idiomspace::providers {

struct ProtocolClient::State {
  std::unique_ptr<Transport> transport;
  Handshake handshake;
  std::mutex mutex;
  std::map<std::uint64_t, std::promise<ProbeResponse>> pending;
  std::uint64_t next_id = 1;
  bool closed = false;
  std::string close_reason;
  std::thread reader;

  void fail_all(const std::string& reason) {
    std::lock_guard lock(mutex);
    closed = true;
    close_reason = reason;
    for (auto& [id, promise] : pending) {
      promise.set_exception(std::make_exception_ptr(TransportError(reason)));
    }
    pending.clear();
  }

  void read_loop() {
    try {
      while (auto line = transport->read_line()) {
        if (line->empty()) continue;
        ProbeResponse resp = decode_response(*line);
        std::lock_guard lock(mutex);
        auto it = pending.find(resp.id);
        if (it == pending.end()) continue;  // stale or foreign id
        it->second.set_value(std::move(resp));
        pending.erase(it);
      }
      fail_all("provider closed the connection");
    } catch (const std::exception& e) {
      fail_all(std::string("provider channel failed: ") + e.what());
    }
  }
};

ProtocolClient::ProtocolClient(std::unique_ptr<Transport> transport)
    : state_(std::make_shared<State>()) {
  state_->transport = std::move(transport);
  auto line = state_->transport->read_line();
  if (!line) throw TransportError("provider exited before sending its handshake");
  state_->handshake = decode_handshake(*line);
  state_->reader = std::thread([s = state_.get()] { s->read_loop(); });
}

ProtocolClient::~ProtocolClient() {
  try {
    state_->transport->close_write();
  } catch (...) {
  }
  if (state_->reader.joinable()) state_->reader.join();
}

Handshake ProtocolClient::handshake() const { return state_->handshake; }

std::vector<ProbeResponse> ProtocolClient::submit(std::span<const ProbeRequest> batch) {
  std::vector<std::future<ProbeResponse>> futures;
  std::vector<std::string> lines;
  futures.reserve(batch.size());
  lines.reserve(batch.size());
  {
    std::lock_guard lock(state_->mutex);
    if (state_->closed) throw TransportError(state_->close_reason);
    for (const auto& req : batch) {
      ProbeRequest wire = req;
      wire.id = state_->next_id++;
      auto [it, ok] = state_->pending.emplace(wire.id, std::promise<ProbeResponse>{});
      futures.push_back(it->second.get_future());
      lines.push_back(encode(wire));
    }
  }
  // Written without holding the state lock so the reader can drain responses
  // while a large batch is still being sent.
  for (const auto& line : lines) state_->transport->write_line(line);
  std::vector<ProbeResponse> out;
  out.reserve(batch.size());
  for (std::size_t i = 0; i < futures.size(); ++i) {
    ProbeResponse resp = futures[i].get();
    resp.id = batch[i].id;
    out.push_back(std::move(resp));
  }
  return out;
}

}  // namespace idiomspace::providers
