#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>

#include "wavegreen/acceptance.hpp"

TEST_CASE("acceptance criteria") {
  const auto results = wgf::acceptance::run_all();
  REQUIRE(results.size() == 11);
  for (const auto& c : results) {
    std::printf("[%s] %2d %s: %s\n", c.pass ? "PASS" : "FAIL", c.id, c.name.c_str(),
                c.detail.c_str());
    std::fflush(stdout);
    CHECK_MESSAGE(c.pass, c.name, ": ", c.detail);
  }
}
