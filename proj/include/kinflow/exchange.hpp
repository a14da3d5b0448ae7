#pragma once

#include "kinflow/error.hpp"
#include "kinflow/partition.hpp"
#include "kinflow/state.hpp"

#include <bit>
#include <chrono>
#include <condition_variable>
#include <cstddef>
#include <cstdint>
#include <cstring>
#include <map>
#include <memory>
#include <mutex>
#include <span>
#include <string>
#include <type_traits>
#include <vector>

namespace kinflow {

/// Point-to-point and collective operations between partitions.
class Transport {
 public:
  virtual ~Transport() = default;
  virtual int rank() const = 0;
  virtual int size() const = 0;
  /// The data must stay alive until wait_all returns.
  virtual void initiate_send(int peer, std::span<const std::byte> data) = 0;
  /// The message must have exactly the buffer's size.
  virtual void initiate_receive(int peer, std::span<std::byte> buffer) = 0;
  virtual void wait_all() = 0;
  virtual double reduce_min(double value) = 0;
  virtual void barrier() = 0;
};

/// Threads of one process exchanging through shared mailboxes. Blocking
/// operations give up with TransportError after the timeout or once any
/// participant has called abort().
class InProcessHub {
 public:
  explicit InProcessHub(int participants, std::chrono::milliseconds timeout = std::chrono::seconds(120));
  InProcessHub(const InProcessHub&) = delete;
  InProcessHub& operator=(const InProcessHub&) = delete;

  int participants() const { return participants_; }
  std::unique_ptr<Transport> endpoint(int rank);
  void abort();

 private:
  friend class InProcessEndpoint;

  void post(int from, int to, std::vector<std::byte> message);
  std::vector<std::byte> take(int from, int to);
  double reduce_min(double value);
  template <class Pred>
  void wait_for(std::unique_lock<std::mutex>& lock, Pred ready, const char* what);

  int participants_;
  std::chrono::milliseconds timeout_;
  std::mutex mutex_;
  std::condition_variable changed_;
  bool aborted_ = false;
  std::map<std::pair<int, int>, std::vector<std::vector<std::byte>>> mailbox_;
  std::map<std::pair<int, int>, std::size_t> mailboxHead_;
  std::uint64_t generation_ = 0;
  int arrived_ = 0;
  double partialMin_ = 0.0;
  double result_ = 0.0;
};

/// Wall-clock seconds spent in each phase of the halo exchange.
struct CommTiming {
  double pack = 0.0;
  double initiate = 0.0;
  double wait = 0.0;
  double unpack = 0.0;
  double total() const { return pack + initiate + wait + unpack; }
};

inline constexpr std::size_t kMessageHeaderBytes = 16;

/// Little-endian message header: step, stage and payload length in bytes.
struct MessageHeader {
  std::uint64_t step = 0;
  std::uint32_t stage = 0;
  std::uint32_t payloadBytes = 0;
};

void encode_header(const MessageHeader& header, std::span<std::byte, kMessageHeaderBytes> out);
MessageHeader decode_header(std::span<const std::byte, kMessageHeaderBytes> in);

/// Packs a state as five little-endian values.
template <class Real>
void encode_state(const State<Real>& s, std::byte* out) {
  for (int v = 0; v < kNumVars; ++v) {
    auto bits = std::bit_cast<std::conditional_t<sizeof(Real) == 8, std::uint64_t, std::uint32_t>>(s[v]);
    for (std::size_t b = 0; b < sizeof(Real); ++b) out[v * sizeof(Real) + b] = std::byte((bits >> (8 * b)) & 0xff);
  }
}

template <class Real>
State<Real> decode_state(const std::byte* in) {
  using Bits = std::conditional_t<sizeof(Real) == 8, std::uint64_t, std::uint32_t>;
  State<Real> s;
  for (int v = 0; v < kNumVars; ++v) {
    Bits bits = 0;
    for (std::size_t b = 0; b < sizeof(Real); ++b) bits |= Bits(std::to_integer<unsigned>(in[v * sizeof(Real) + b])) << (8 * b);
    s[v] = std::bit_cast<Real>(bits);
  }
  return s;
}

/// Fills the remote copies of one subdomain from their owners, once per
/// stage. begin() packs and posts; finish() waits, validates headers and
/// unpacks, so independent work can run in between.
template <class Real>
class HaloExchange {
 public:
  HaloExchange(std::vector<PeerLink> links, Transport& transport)
      : links_(std::move(links)), transport_(&transport) {
    for (const PeerLink& l : links_) {
      sendBuffers_.emplace_back(kMessageHeaderBytes + l.send.size() * kStateBytes);
      recvBuffers_.emplace_back(kMessageHeaderBytes + l.recv.size() * kStateBytes);
    }
  }

  void begin(std::span<const State<Real>> fields, std::uint64_t step, std::uint32_t stage, CommTiming& timing);
  void finish(std::span<State<Real>> fields, CommTiming& timing);

  void exchange(std::span<State<Real>> fields, std::uint64_t step, std::uint32_t stage, CommTiming& timing) {
    begin(fields, step, stage, timing);
    finish(fields, timing);
  }

  std::size_t num_peers() const { return links_.size(); }

 private:
  static constexpr std::size_t kStateBytes = kNumVars * sizeof(Real);

  std::vector<PeerLink> links_;
  Transport* transport_;
  std::vector<std::vector<std::byte>> sendBuffers_;
  std::vector<std::vector<std::byte>> recvBuffers_;
  MessageHeader expected_;
};

namespace detail {
inline double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}
}  // namespace detail

template <class Real>
void HaloExchange<Real>::begin(std::span<const State<Real>> fields, std::uint64_t step, std::uint32_t stage,
                               CommTiming& timing) {
  expected_ = {step, stage, 0};
  auto start = std::chrono::steady_clock::now();
  for (std::size_t k = 0; k < links_.size(); ++k) {
    std::vector<std::byte>& buf = sendBuffers_[k];
    const auto& cells = links_[k].send;
    encode_header({step, stage, static_cast<std::uint32_t>(cells.size() * kStateBytes)},
                  std::span<std::byte, kMessageHeaderBytes>(buf.data(), kMessageHeaderBytes));
    std::byte* out = buf.data() + kMessageHeaderBytes;
    for (int c : cells) {
      encode_state(fields[c], out);
      out += kStateBytes;
    }
  }
  timing.pack += detail::seconds_since(start);

  start = std::chrono::steady_clock::now();
  for (std::size_t k = 0; k < links_.size(); ++k) {
    transport_->initiate_receive(links_[k].peer, recvBuffers_[k]);
    transport_->initiate_send(links_[k].peer, sendBuffers_[k]);
  }
  timing.initiate += detail::seconds_since(start);
}

template <class Real>
void HaloExchange<Real>::finish(std::span<State<Real>> fields, CommTiming& timing) {
  auto start = std::chrono::steady_clock::now();
  transport_->wait_all();
  timing.wait += detail::seconds_since(start);

  start = std::chrono::steady_clock::now();
  for (std::size_t k = 0; k < links_.size(); ++k) {
    const std::vector<std::byte>& buf = recvBuffers_[k];
    const auto& cells = links_[k].recv;
    const MessageHeader h =
        decode_header(std::span<const std::byte, kMessageHeaderBytes>(buf.data(), kMessageHeaderBytes));
    if (h.step != expected_.step || h.stage != expected_.stage || h.payloadBytes != cells.size() * kStateBytes)
      throw ScheduleError("message from partition " + std::to_string(links_[k].peer) + " is for step " +
                          std::to_string(h.step) + " stage " + std::to_string(h.stage) + " with " +
                          std::to_string(h.payloadBytes) + " bytes, expected step " +
                          std::to_string(expected_.step) + " stage " + std::to_string(expected_.stage) +
                          " with " + std::to_string(cells.size() * kStateBytes) + " bytes");
    const std::byte* in = buf.data() + kMessageHeaderBytes;
    for (int c : cells) {
      fields[c] = decode_state<Real>(in);
      in += kStateBytes;
    }
  }
  timing.unpack += detail::seconds_since(start);
}

#ifdef KINFLOW_HAVE_MPI
/// Transport over MPI_COMM_WORLD. MPI must be initialised by the caller.
std::unique_ptr<Transport> make_mpi_transport();
#endif

}  // namespace kinflow
