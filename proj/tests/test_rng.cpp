#include <doctest.h>

#include <algorithm>
#include <vector>

#include "localest/rng.hpp"

using namespace localest;

TEST_CASE("seed derivation is a pure function") {
  CHECK(seed_derivation(42, 7, 3) == seed_derivation(42, 7, 3));
  CHECK(seed_derivation(42, 0, 0) != seed_derivation(42, 1, 0));
  CHECK(seed_derivation(42, 0, 0) != seed_derivation(42, 0, 1));
  CHECK(seed_derivation(42, 0, 0) != seed_derivation(43, 0, 0));
}

TEST_CASE("a million derived seeds do not collide") {
  std::vector<std::uint64_t> seeds;
  seeds.reserve(1'000'000);
  for (std::uint64_t rep = 0; rep < 250'000; ++rep) {
    for (std::uint16_t tag = 0; tag < 4; ++tag) seeds.push_back(seed_derivation(20240601, rep, tag));
  }
  std::sort(seeds.begin(), seeds.end());
  CHECK(std::adjacent_find(seeds.begin(), seeds.end()) == seeds.end());
}

TEST_CASE("counter streams differ across counters and reproduce") {
  auto a = counter_stream(9, 0);
  auto b = counter_stream(9, 0);
  auto c = counter_stream(9, 1);
  const auto va = a();
  CHECK(va == b());
  CHECK(va != c());
}

TEST_CASE("mix64 is bijective on a sample") {
  std::vector<std::uint64_t> out;
  for (std::uint64_t i = 0; i < 100000; ++i) out.push_back(mix64(i));
  std::sort(out.begin(), out.end());
  CHECK(std::adjacent_find(out.begin(), out.end()) == out.end());
}
