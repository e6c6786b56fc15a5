#include "corrnoise/kernels.hpp"

#include <cmath>
#include <string>
#include <vector>

#include "doctest.h"
#include "test_util.hpp"

using namespace corrnoise;

namespace {

std::vector<double> random_vec(std::uint64_t seed, std::size_t n) {
  std::vector<double> v(n);
  for (std::size_t i = 0; i < n; ++i) {
    v[i] = testutil::uniform_in(seed, i, -1.0, 1.0);
  }
  return v;
}

}  // namespace

TEST_CASE("dispatched kernels agree with scalar reference") {
  const auto& fast = kernels::ops();
  const auto& ref = kernels::scalar_ops();
  INFO("backend: ", kernels::backend_name());

  // Lengths straddle the vector width and exercise the remainders.
  for (const std::size_t n : {1u, 2u, 3u, 4u, 5u, 7u, 8u, 13u, 64u, 257u}) {
    const auto a = random_vec(1000 + n, n);
    const auto b = random_vec(2000 + n, n);
    const auto w = random_vec(3000 + n, n);

    CHECK(fast.dot(a.data(), b.data(), n) ==
          doctest::Approx(ref.dot(a.data(), b.data(), n)).epsilon(1e-12));
    CHECK(fast.nrm2sq(a.data(), n) ==
          doctest::Approx(ref.nrm2sq(a.data(), n)).epsilon(1e-12));
    CHECK(fast.weighted_sqdist(w.data(), a.data(), b.data(), n) ==
          doctest::Approx(ref.weighted_sqdist(w.data(), a.data(), b.data(), n))
              .epsilon(1e-12));

    auto y1 = random_vec(4000 + n, n);
    auto y2 = y1;
    fast.axpy(y1.data(), 0.37, a.data(), n);
    ref.axpy(y2.data(), 0.37, a.data(), n);
    for (std::size_t i = 0; i < n; ++i) {
      CHECK(y1[i] == doctest::Approx(y2[i]).epsilon(1e-13));
    }

    auto z1 = random_vec(5000 + n, n);
    auto z2 = z1;
    fast.scale_add(z1.data(), 0.9, a.data(), -0.21, n);
    ref.scale_add(z2.data(), 0.9, a.data(), -0.21, n);
    for (std::size_t i = 0; i < n; ++i) {
      CHECK(z1[i] == doctest::Approx(z2[i]).epsilon(1e-13));
    }
  }
}

TEST_CASE("conv_acc matches the row-by-row reference") {
  const auto& fast = kernels::ops();
  const auto& ref = kernels::scalar_ops();
  for (const std::size_t n : {1u, 4u, 6u, 33u}) {
    for (const std::size_t rows : {1u, 2u, 3u, 9u}) {
      const auto c = random_vec(10 * n + rows, rows);
      const auto block = random_vec(20 * n + rows, rows * n);
      auto acc1 = random_vec(30 * n + rows, n);
      auto acc2 = acc1;
      fast.conv_acc(acc1.data(), n, c.data(), block.data(), n, rows);
      ref.conv_acc(acc2.data(), n, c.data(), block.data(), n, rows);
      for (std::size_t i = 0; i < n; ++i) {
        CHECK(acc1[i] == doctest::Approx(acc2[i]).epsilon(1e-12));
      }
    }
  }
}

TEST_CASE("backend can be forced to scalar and back") {
  const std::string original = kernels::backend_name();
  REQUIRE(kernels::force_backend("scalar"));
  CHECK(std::string(kernels::backend_name()) == "scalar");
  CHECK_FALSE(kernels::force_backend("not-a-backend"));
  REQUIRE(kernels::force_backend("auto"));
  CHECK(std::string(kernels::backend_name()) == original);
}
