#include <string>

#include "doctest.h"
#include "hdgap/config.hpp"
#include "hdgap/errors.hpp"
#include "test_util.hpp"

using namespace hdgap;

namespace {

const char* kSim = R"([simulate]
n = 300
p1 = 4
p2 = 40
beta = -0.3, 0.2
replications = 20
estimators = double_selection, single_selection
seed = 9

[bootstrap]
replications = 200
seed = 5

[output]
dir = out
)";

bool message_contains(const std::string& ini, const std::string& needle) {
  testing::TempDir dir("config");
  try {
    config::load(dir.file("c.ini", ini));
  } catch (const ConfigError& e) {
    return std::string(e.what()).find(needle) != std::string::npos;
  }
  return false;
}

}  // namespace

TEST_CASE("simulation config loads and resolves paths") {
  testing::TempDir dir("config");
  const auto cfg = config::load(dir.file("sim.ini", kSim));
  REQUIRE(cfg.simulate);
  const auto& spec = cfg.simulate->spec;
  CHECK(spec.dgp.n == 300);
  CHECK(spec.dgp.p1 == 4);
  CHECK(spec.dgp.beta_true.size() == 4);
  CHECK(spec.dgp.beta_true(0) == -0.3);
  CHECK(spec.dgp.beta_true(2) == 0.0);
  CHECK(spec.replications == 20);
  CHECK(cfg.simulate->estimators.size() == 2);
  CHECK(cfg.bootstrap.replications == 200);
  CHECK(cfg.output_dir == dir.path() / "out");
}

TEST_CASE("overrides take precedence over the file") {
  testing::TempDir dir("config");
  auto cfg = config::load(dir.file("sim.ini", kSim));
  config::Overrides o;
  o.seed = 77;
  o.penalty_c = 0.5;
  o.out = dir.path() / "elsewhere";
  config::apply(cfg, o);
  CHECK(cfg.bootstrap.seed == 77);
  CHECK(cfg.model.penalty.c == 0.5);
  CHECK(cfg.output_dir == dir.path() / "elsewhere");
}

TEST_CASE("config errors name the section and key") {
  CHECK(message_contains("[nonsense]\na = 1\n", "[nonsense]"));
  CHECK(message_contains("[simulate]\nn = many\n", "[simulate] n"));
  CHECK(message_contains("[model]\npenalty_c = -1\n", "penalty_c"));
  CHECK(message_contains("[bootstrap]\nmultiplier = rademacher\n", "multiplier"));
  CHECK(message_contains("[model]\npenalty = 2\n", "[model] penalty: unknown key"));
  CHECK(message_contains("[simulate]\np1 = 3\nbeta = 1, 2, 3, 4, 5\n", "beta"));
}
