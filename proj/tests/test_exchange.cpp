#include "kinflow/exchange.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <exception>
#include <random>
#include <thread>

using namespace kinflow;

namespace {

/// Runs body(rank, transport) on one thread per participant and rethrows the
/// first failure.
template <class Body>
void run_parallel(InProcessHub& hub, Body body) {
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(hub.participants()));
  std::vector<std::thread> threads;
  for (int r = 0; r < hub.participants(); ++r) {
    threads.emplace_back([&, r] {
      try {
        auto transport = hub.endpoint(r);
        body(r, *transport);
      } catch (...) {
        errors[r] = std::current_exception();
      }
    });
  }
  for (auto& t : threads) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

State<double> global_value(int cell) {
  State<double> s;
  for (int v = 0; v < kNumVars; ++v) s[v] = std::sin(0.37 * cell + v) + 1e-3 * v / (cell + 1.0);
  return s;
}

}  // namespace

TEST_CASE("reduce_min over three participants") {
  InProcessHub hub(3);
  const std::array values = {0.5, 0.3, 0.4};
  std::array<double, 3> got{};
  run_parallel(hub, [&](int r, Transport& t) { got[r] = t.reduce_min(values[r]); });
  for (double g : got) CHECK(g == 0.3);
}

TEST_CASE("reduce_min with eight participants matches a sequential minimum") {
  InProcessHub hub(8);
  constexpr int kRounds = 200;
  std::vector<std::vector<double>> values(8, std::vector<double>(kRounds));
  std::mt19937_64 rng(42);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  for (auto& row : values)
    for (double& v : row) v = dist(rng);
  std::vector<std::vector<double>> got(8, std::vector<double>(kRounds));
  run_parallel(hub, [&](int r, Transport& t) {
    for (int k = 0; k < kRounds; ++k) got[r][k] = t.reduce_min(values[r][k]);
    t.barrier();
  });
  for (int k = 0; k < kRounds; ++k) {
    double expected = values[0][k];
    for (int r = 1; r < 8; ++r) expected = std::min(expected, values[r][k]);
    for (int r = 0; r < 8; ++r) CHECK(got[r][k] == expected);
  }
}

TEST_CASE("message header layout is little-endian") {
  std::array<std::byte, kMessageHeaderBytes> buf{};
  encode_header({0x0102030405060708ULL, 0x0A0B0C0DU, 0x11223344U}, buf);
  const std::array<unsigned, 16> expected = {0x08, 0x07, 0x06, 0x05, 0x04, 0x03, 0x02, 0x01,
                                             0x0D, 0x0C, 0x0B, 0x0A, 0x44, 0x33, 0x22, 0x11};
  for (std::size_t b = 0; b < buf.size(); ++b) CHECK(std::to_integer<unsigned>(buf[b]) == expected[b]);
  const MessageHeader h = decode_header(buf);
  CHECK(h.step == 0x0102030405060708ULL);
  CHECK(h.stage == 0x0A0B0C0DU);
  CHECK(h.payloadBytes == 0x11223344U);
}

TEST_CASE("state packing round-trips bit for bit") {
  const State<double> d = {1.0 / 3.0, -0.0, 1e-300, -7.25, std::nextafter(1.0, 2.0)};
  std::array<std::byte, 40> buf{};
  encode_state(d, buf.data());
  const State<double> back = decode_state<double>(buf.data());
  CHECK(std::memcmp(back.data(), d.data(), sizeof(d)) == 0);
  // Least significant byte first.
  CHECK(std::to_integer<unsigned>(buf[8 + 7]) == 0x80);

  const State<float> f = {1.0f / 3.0f, -2.5f, 1e-30f, 3.0f, 4.0f};
  encode_state(f, buf.data());
  const State<float> fb = decode_state<float>(buf.data());
  CHECK(std::memcmp(fb.data(), f.data(), sizeof(f)) == 0);
}

TEST_CASE("halo exchange reproduces owner values exactly") {
  const Mesh mesh = compute_geometry(make_periodic_box(6));
  const auto bcs = BoundaryConditions::defaults();
  const Connectivity tables = build_full_connectivity(mesh, bcs);
  const Discretization global = build_discretization(mesh, tables, bcs);
  std::vector<Vec3> centroids;
  for (const Cell& c : mesh.cells) centroids.push_back(c.centroid);
  const auto plans = build_subdomains(global, tables, partition_rcb(centroids, 4));

  InProcessHub hub(4);
  std::vector<CommTiming> timing(4);
  run_parallel(hub, [&](int r, Transport& t) {
    const SubdomainPlan& plan = plans[r];
    std::vector<State<double>> fields(static_cast<std::size_t>(plan.disc.num_cells()));
    for (int step = 0; step < 3; ++step) {
      for (std::uint32_t stage = 1; stage <= 2; ++stage) {
        for (int c = 0; c < plan.disc.num_physical(); ++c) {
          fields[c] = c < plan.disc.numOwned ? global_value(plan.to_global(c) + step)
                                             : State<double>{NAN, NAN, NAN, NAN, NAN};
        }
        HaloExchange<double> halo(plan.peers, t);
        halo.exchange(fields, static_cast<std::uint64_t>(step), stage, timing[r]);
        for (int c = plan.disc.numOwned; c < plan.disc.num_physical(); ++c) {
          const State<double> expected = global_value(plan.to_global(c) + step);
          REQUIRE(std::memcmp(fields[c].data(), expected.data(), sizeof(expected)) == 0);
        }
      }
    }
  });
  for (const CommTiming& ct : timing) CHECK(ct.total() >= 0.0);
}

TEST_CASE("exchange failures") {
  SUBCASE("stage mismatch raises ScheduleError") {
    const std::vector<PeerLink> links0 = {{1, {0}, {1}}};
    const std::vector<PeerLink> links1 = {{0, {0}, {1}}};
    InProcessHub hub(2);
    CHECK_THROWS_AS(run_parallel(hub,
                                 [&](int r, Transport& t) {
                                   std::vector<State<double>> f(2, State<double>{1, 0, 0, 0, 2});
                                   HaloExchange<double> halo(r == 0 ? links0 : links1, t);
                                   CommTiming ct;
                                   halo.exchange(f, 5, r == 0 ? 1u : 2u, ct);
                                 }),
                    ScheduleError);
  }
  SUBCASE("length mismatch raises ScheduleError") {
    InProcessHub hub(2);
    CHECK_THROWS_AS(run_parallel(hub,
                                 [&](int r, Transport& t) {
                                   std::vector<std::byte> out(r == 0 ? 10 : 16), in(16);
                                   t.initiate_receive(1 - r, in);
                                   t.initiate_send(1 - r, out);
                                   t.wait_all();
                                 }),
                    ScheduleError);
  }
  SUBCASE("a missing peer times out") {
    InProcessHub hub(2, std::chrono::milliseconds(50));
    auto t = hub.endpoint(0);
    std::vector<std::byte> in(16);
    t->initiate_receive(1, in);
    CHECK_THROWS_AS(t->wait_all(), TransportError);
    CHECK_THROWS_AS(t->reduce_min(1.0), TransportError);
  }
  SUBCASE("abort releases waiting partitions") {
    InProcessHub hub(2);
    std::thread other([&] {
      std::this_thread::sleep_for(std::chrono::milliseconds(20));
      hub.abort();
    });
    auto t = hub.endpoint(0);
    CHECK_THROWS_AS(t->barrier(), TransportError);
    other.join();
  }
  SUBCASE("invalid peer") {
    InProcessHub hub(2);
    auto t = hub.endpoint(0);
    std::vector<std::byte> buf(4);
    CHECK_THROWS_AS(t->initiate_send(0, buf), TransportError);
    CHECK_THROWS_AS(hub.endpoint(2), TransportError);
  }
}
