#include <complex>
#include <stdexcept>
#include <vector>

#include "doctest.h"
#include "rppg/core/fft.hpp"
#include "test_util.hpp"

using rppg::core::fft;
using rppg::core::next_pow2;

TEST_CASE("next_pow2 covers edge values and powers") {
  CHECK(next_pow2(0) == 1);
  CHECK(next_pow2(1) == 1);
  CHECK(next_pow2(2) == 2);
  CHECK(next_pow2(3) == 4);
  CHECK(next_pow2(4) == 4);
  CHECK(next_pow2(5) == 8);
  CHECK(next_pow2(1023) == 1024);
  CHECK(next_pow2(1024) == 1024);
  CHECK(next_pow2(1025) == 2048);
}

TEST_CASE("fft matches the naive DFT on random data") {
  testutil::TestRng rng(7);
  for (std::size_t n : {8u, 64u, 256u}) {
    std::vector<std::complex<double>> x(n);
    for (auto& v : x) v = {rng.gauss(), rng.gauss()};
    auto want = testutil::naive_dft(x);
    auto got = x;
    fft(got);
    REQUIRE(got.size() == want.size());
    for (std::size_t k = 0; k < n; ++k) {
      CHECK(std::abs(got[k] - want[k]) < 1e-9);
    }
  }
}

TEST_CASE("inverse fft round-trips") {
  testutil::TestRng rng(11);
  std::vector<std::complex<double>> x(128);
  for (auto& v : x) v = {rng.uniform() - 0.5, rng.uniform() - 0.5};
  auto y = x;
  fft(y);
  fft(y, true);
  for (std::size_t i = 0; i < x.size(); ++i) {
    CHECK(std::abs(y[i] - x[i]) < 1e-12);
  }
}

TEST_CASE("fft rejects non power-of-two lengths") {
  std::vector<std::complex<double>> x(12, {1.0, 0.0});
  CHECK_THROWS_AS(fft(x), std::invalid_argument);
}

TEST_CASE("fft preserves energy (Parseval)") {
  testutil::TestRng rng(3);
  std::vector<std::complex<double>> x(512);
  double time_energy = 0.0;
  for (auto& v : x) {
    v = {rng.gauss(), 0.0};
    time_energy += std::norm(v);
  }
  auto spec = x;
  fft(spec);
  double freq_energy = 0.0;
  for (const auto& v : spec) freq_energy += std::norm(v);
  freq_energy /= static_cast<double>(x.size());
  CHECK(freq_energy == doctest::Approx(time_energy).epsilon(1e-10));
}
