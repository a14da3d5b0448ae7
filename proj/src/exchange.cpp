#include "kinflow/exchange.hpp"

#include <algorithm>
#include <limits>

namespace kinflow {

void encode_header(const MessageHeader& header, std::span<std::byte, kMessageHeaderBytes> out) {
  for (int b = 0; b < 8; ++b) out[b] = std::byte((header.step >> (8 * b)) & 0xff);
  for (int b = 0; b < 4; ++b) out[8 + b] = std::byte((header.stage >> (8 * b)) & 0xff);
  for (int b = 0; b < 4; ++b) out[12 + b] = std::byte((header.payloadBytes >> (8 * b)) & 0xff);
}

MessageHeader decode_header(std::span<const std::byte, kMessageHeaderBytes> in) {
  MessageHeader h;
  for (int b = 0; b < 8; ++b) h.step |= std::uint64_t(std::to_integer<unsigned>(in[b])) << (8 * b);
  for (int b = 0; b < 4; ++b) h.stage |= std::uint32_t(std::to_integer<unsigned>(in[8 + b])) << (8 * b);
  for (int b = 0; b < 4; ++b) h.payloadBytes |= std::uint32_t(std::to_integer<unsigned>(in[12 + b])) << (8 * b);
  return h;
}

class InProcessEndpoint final : public Transport {
 public:
  InProcessEndpoint(InProcessHub& hub, int rank) : hub_(&hub), rank_(rank) {}

  int rank() const override { return rank_; }
  int size() const override { return hub_->participants(); }

  void initiate_send(int peer, std::span<const std::byte> data) override {
    check_peer(peer);
    hub_->post(rank_, peer, std::vector<std::byte>(data.begin(), data.end()));
  }

  void initiate_receive(int peer, std::span<std::byte> buffer) override {
    check_peer(peer);
    pending_.push_back({peer, buffer});
  }

  void wait_all() override {
    auto pending = std::move(pending_);
    pending_.clear();
    for (const auto& [peer, buffer] : pending) {
      const std::vector<std::byte> message = hub_->take(peer, rank_);
      if (message.size() != buffer.size())
        throw ScheduleError("partition " + std::to_string(rank_) + " expected " + std::to_string(buffer.size()) +
                            " bytes from partition " + std::to_string(peer) + ", got " +
                            std::to_string(message.size()));
      std::copy(message.begin(), message.end(), buffer.begin());
    }
  }

  double reduce_min(double value) override { return hub_->reduce_min(value); }
  void barrier() override { hub_->reduce_min(0.0); }

 private:
  void check_peer(int peer) const {
    if (peer < 0 || peer >= hub_->participants() || peer == rank_)
      throw TransportError("invalid peer " + std::to_string(peer) + " for partition " + std::to_string(rank_));
  }

  struct Pending {
    int peer;
    std::span<std::byte> buffer;
  };
  InProcessHub* hub_;
  int rank_;
  std::vector<Pending> pending_;
};

InProcessHub::InProcessHub(int participants, std::chrono::milliseconds timeout)
    : participants_(participants), timeout_(timeout) {
  if (participants < 1) throw TransportError("a hub needs at least one participant");
}

std::unique_ptr<Transport> InProcessHub::endpoint(int rank) {
  if (rank < 0 || rank >= participants_) throw TransportError("rank " + std::to_string(rank) + " out of range");
  return std::make_unique<InProcessEndpoint>(*this, rank);
}

void InProcessHub::abort() {
  {
    std::lock_guard lock(mutex_);
    aborted_ = true;
  }
  changed_.notify_all();
}

template <class Pred>
void InProcessHub::wait_for(std::unique_lock<std::mutex>& lock, Pred ready, const char* what) {
  const bool ok = changed_.wait_for(lock, timeout_, [&] { return aborted_ || ready(); });
  if (aborted_) throw TransportError(std::string(what) + " interrupted: another partition failed");
  if (!ok) throw TransportError(std::string(what) + " timed out");
}

void InProcessHub::post(int from, int to, std::vector<std::byte> message) {
  {
    std::lock_guard lock(mutex_);
    if (aborted_) throw TransportError("send interrupted: another partition failed");
    mailbox_[{from, to}].push_back(std::move(message));
  }
  changed_.notify_all();
}

std::vector<std::byte> InProcessHub::take(int from, int to) {
  std::unique_lock lock(mutex_);
  auto& box = mailbox_[{from, to}];
  auto& head = mailboxHead_[{from, to}];
  wait_for(lock, [&] { return head < box.size(); }, "receive");
  std::vector<std::byte> message = std::move(box[head]);
  if (++head == box.size()) {
    box.clear();
    head = 0;
  }
  return message;
}

double InProcessHub::reduce_min(double value) {
  std::unique_lock lock(mutex_);
  if (aborted_) throw TransportError("reduction interrupted: another partition failed");
  const std::uint64_t generation = generation_;
  partialMin_ = arrived_ == 0 ? value : std::min(partialMin_, value);
  if (++arrived_ == participants_) {
    result_ = partialMin_;
    arrived_ = 0;
    ++generation_;
    lock.unlock();
    changed_.notify_all();
    return result_;
  }
  wait_for(lock, [&] { return generation_ != generation; }, "reduction");
  return result_;
}

}  // namespace kinflow
