#include <doctest.h>

#include <atomic>
#include <stdexcept>
#include <vector>

#include "msv/parallel.hpp"

TEST_SUITE("parallel") {

TEST_CASE("every index is visited exactly once") {
  for (int jobs : {1, 2, 7}) {
    std::vector<std::atomic<int>> hits(100);
    msv::parallel_for(100, jobs, [&](int i) { hits[static_cast<std::size_t>(i)]++; });
    for (const auto& h : hits) CHECK(h.load() == 1);
  }
}

TEST_CASE("zero iterations is a no-op") {
  msv::parallel_for(0, 4, [](int) { FAIL("body must not run"); });
}

TEST_CASE("worker exceptions propagate to the caller") {
  CHECK_THROWS_AS(
      msv::parallel_for(50, 4,
                        [](int i) {
                          if (i == 17) throw std::runtime_error("boom");
                        }),
      std::runtime_error);
}

}  // TEST_SUITE
