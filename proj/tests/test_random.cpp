#include <cmath>
#include <fstream>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "remlab/random.hpp"
#include "remlab/stats.hpp"

using namespace remlab;

TEST_CASE("philox4x32-10 known answers") {
  // Reference vectors distributed with Random123.
  CHECK(philox4x32({0, 0, 0, 0}, {0, 0}) == PhiloxBlock{0x6627e8d5u, 0xe169c58du, 0xbc57ac4cu, 0x9b00dbd8u});
  CHECK(philox4x32({0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu}, {0xffffffffu, 0xffffffffu}) ==
        PhiloxBlock{0x408f276du, 0x41c83b0eu, 0xa20bc7c6u, 0x6d5451fdu});
  CHECK(philox4x32({0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u}, {0xa4093822u, 0x299f31d0u}) ==
        PhiloxBlock{0xd16cfe09u, 0x94fdccebu, 0x5001e420u, 0x24126ea1u});
}

TEST_CASE("seed derivation is deterministic") {
  CHECK(seed_derivation(42, 7, 3) == seed_derivation(42, 7, 3));
  CHECK(seed_derivation(42, 7, StreamLabel::retry) == seed_derivation(42, 7, 3));
}

TEST_CASE("seed derivation separates replicas, labels and masters") {
  std::mt19937_64 rng(123);
  for (int i = 0; i < 10000; ++i) {
    const std::uint64_t s = rng();
    REQUIRE(seed_derivation(s, 0, 0) != seed_derivation(s, 1, 0));
  }
  std::set<StreamKey> seen;
  for (std::uint64_t master : {0ull, 1ull, 42ull, ~0ull}) {
    for (std::uint64_t replica : {0ull, 1ull, 2ull, 65535ull, 65536ull, static_cast<unsigned long long>(kMaxReplicaId)}) {
      for (std::uint32_t label : {0u, 1u, 2u, 0xFFFFu}) {
        CHECK(seen.insert(seed_derivation(master, replica, label)).second);
      }
    }
  }
}

TEST_CASE("seed derivation rejects out-of-range inputs") {
  CHECK_THROWS_AS(seed_derivation(1, kMaxReplicaId + 1, 0), std::out_of_range);
  CHECK_THROWS_AS(seed_derivation(1, 0, 0x10000u), std::out_of_range);
  CHECK_NOTHROW(seed_derivation(1, kMaxReplicaId, 0xFFFFu));
}

TEST_CASE("seed derivation matches the golden file") {
  std::ifstream in(std::string(REMLAB_TEST_DATA_DIR) + "/seed_keys_42.txt");
  REQUIRE(in);
  std::string line;
  int rows = 0;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') {
      continue;
    }
    std::istringstream fields(line);
    std::uint64_t master = 0;
    std::uint64_t replica = 0;
    std::uint32_t label = 0;
    std::string key;
    std::string stream;
    fields >> master >> replica >> label >> key >> stream;
    const StreamKey k = seed_derivation(master, replica, label);
    CHECK(k.key == std::stoull(key, nullptr, 16));
    CHECK(k.stream == std::stoull(stream, nullptr, 16));
    ++rows;
  }
  CHECK(rows == 16);
}

TEST_CASE("to_open_unit stays inside (0, 1)") {
  CHECK(to_open_unit(0) > 0.0);
  CHECK(to_open_unit(~std::uint64_t{0}) < 1.0);
  CHECK(to_open_unit(std::uint64_t{1} << 63) == doctest::Approx(0.5).epsilon(1e-15));
}

TEST_CASE("counter stream words come from consecutive blocks") {
  const StreamKey key = seed_derivation(5, 3, 0);
  CounterStream s(key);
  const PhiloxBlock b0 = philox_block(key, 0);
  const PhiloxBlock b1 = philox_block(key, 1);
  CHECK(s() == ((std::uint64_t{b0[0]} << 32) | b0[1]));
  CHECK(s() == ((std::uint64_t{b0[2]} << 32) | b0[3]));
  CHECK(s() == ((std::uint64_t{b1[0]} << 32) | b1[1]));
}

TEST_CASE("per-index substreams walk with stride 2^32") {
  const StreamKey key = seed_derivation(5, 3, 0);
  CounterStream s = CounterStream::for_index(key, 17);
  s();
  s();
  const PhiloxBlock next = philox_block(key, 17 + (std::uint64_t{1} << 32));
  CHECK(s() == ((std::uint64_t{next[0]} << 32) | next[1]));
}

TEST_CASE("counter stream uniforms look uniform") {
  CounterStream s(seed_derivation(9, 0, StreamLabel::sampler));
  std::vector<double> u(20000);
  for (double& x : u) {
    x = s.uniform();
  }
  const TestReport r = ks_one_sample(u, [](double x) { return std::clamp(x, 0.0, 1.0); });
  CHECK(r.passed());

  // Lag-1 correlation of a long run.
  double sxy = 0.0;
  for (std::size_t i = 1; i < u.size(); ++i) {
    sxy += (u[i] - 0.5) * (u[i - 1] - 0.5);
  }
  CHECK(std::abs(sxy / (u.size() - 1) * 12.0) < 0.03);
}

TEST_CASE("different replicas give unrelated streams") {
  CounterStream a(seed_derivation(9, 0, 0));
  CounterStream b(seed_derivation(9, 1, 0));
  std::vector<double> x(5000);
  std::vector<double> y(5000);
  for (std::size_t i = 0; i < x.size(); ++i) {
    x[i] = a.uniform();
    y[i] = b.uniform();
  }
  CHECK(ks_two_sample(x, y).passed());
  CHECK(x != y);
}
