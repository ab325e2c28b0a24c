#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <string>

#include "mflda/config.hpp"

using namespace mflda;

namespace {

const std::string kFull = R"(
[model]
alpha = 1.5
eps = 0.25

[init]
kind = gaussian
mean_x = -0.2
mean_y = 0.4
var = 0.25

[sim]
N = 500
dt = 1e-3
t_end = 20
seed = 0
snapshot_times = 0, 5, 12.5, 20
)";

std::string without(const std::string& text, const std::string& line_start) {
  std::string out;
  std::size_t pos = 0;
  while (pos < text.size()) {
    const std::size_t end = text.find('\n', pos);
    const std::string line = text.substr(pos, end - pos);
    if (line.rfind(line_start, 0) != 0) out += line + '\n';
    if (end == std::string::npos) break;
    pos = end + 1;
  }
  return out;
}

std::string replaced(std::string text, const std::string& from, const std::string& to) {
  text.replace(text.find(from), from.size(), to);
  return text;
}

std::string field_of(const std::string& text) {
  try {
    parse_run_config(text);
  } catch (const ConfigError& e) {
    return e.field();
  }
  return "";
}

}  // namespace

TEST_CASE("bundled run A config parses") {
  const RunConfig c = load_run_config(std::string(MFLDA_SOURCE_DIR) + "/configs/paper_runA.cfg");
  CHECK(c.sim.params.alpha() == 1.5);
  CHECK(c.sim.params.eps() == 0.25);
  CHECK(c.sim.n == 500);
  CHECK(c.sim.dt == 1e-3);
  CHECK(c.sim.t_end == 20.0);
  CHECK(c.sim.seed == 0);
  CHECK(c.sim.init.kind == InitSpec::Kind::kGaussianIid);
  CHECK(c.sim.init.mean_x == -0.2);
  CHECK(c.sim.init.mean_y == 0.4);
  CHECK(c.sim.init.var == 0.25);
  CHECK(c.sim.snapshot_times == std::vector<double>{0, 5, 12.5, 20});
  CHECK(c.classifier.window == 5.0);

  const RunConfig b = load_run_config(std::string(MFLDA_SOURCE_DIR) + "/configs/paper_runB.cfg");
  CHECK(b.sim.params.eps() == 0.5);
}

TEST_CASE("defaults fill optional fields") {
  const RunConfig c = parse_run_config(without(kFull, "snapshot_times"));
  CHECK(c.sim.record_stride == 10);
  CHECK(c.sim.k_max == 4);
  CHECK(c.sim.snapshot_times == std::vector<double>{0, 5, 12.5, 20});
  CHECK(c.classifier.osc_threshold == 0.5);
  CHECK(c.classifier.conv_threshold == 0.1);
  CHECK(c.classifier.drift_threshold == 0.05);

  // Default snapshots beyond a short horizon are dropped.
  const RunConfig s = parse_run_config(replaced(without(kFull, "snapshot_times"), "t_end = 20",
                                                "t_end = 6"));
  CHECK(s.sim.snapshot_times == std::vector<double>{0, 5});
}

TEST_CASE("missing required fields are named") {
  CHECK(field_of(without(kFull, "seed")) == "sim.seed");
  CHECK(field_of(without(kFull, "alpha")) == "model.alpha");
  CHECK(field_of(without(kFull, "eps")) == "model.eps");
  CHECK(field_of(without(kFull, "N ")) == "sim.N");
  CHECK(field_of(without(kFull, "var")) == "init.var");
  try {
    parse_run_config(without(kFull, "seed"));
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()) == "sim.seed: required field is missing");
  }
}

TEST_CASE("bad values are named") {
  CHECK(field_of(replaced(kFull, "alpha = 1.5", "alpha = 0.5")) == "model.alpha");
  CHECK(field_of(replaced(kFull, "eps = 0.25", "eps = 2")) == "model.eps");
  CHECK(field_of(replaced(kFull, "eps = 0.25", "eps = -1")) == "model.eps");
  CHECK(field_of(replaced(kFull, "N = 500", "N = 0")) == "sim.N");
  CHECK(field_of(replaced(kFull, "N = 500", "N = many")) == "sim.N");
  CHECK(field_of(replaced(kFull, "dt = 1e-3", "dt = 0")) == "sim.dt");
  CHECK(field_of(replaced(kFull, "dt = 1e-3", "dt = 1e-3x")) == "sim.dt");
  CHECK(field_of(replaced(kFull, "seed = 0", "seed = -3")) == "sim.seed");
  CHECK(field_of(replaced(kFull, "kind = gaussian", "kind = uniform")) == "init.kind");
  CHECK(field_of(replaced(kFull, "var = 0.25", "var = -0.25")) == "init.var");
  CHECK(field_of(replaced(kFull, "12.5, 20", "12.5, 25")) == "sim.snapshot_times");
  CHECK(field_of(kFull + "k_max = 3\n") == "sim.k_max");
  CHECK(field_of(replaced(kFull, "[model]", "[model")) == "<file>");
}

TEST_CASE("dirac start") {
  const std::string text =
      replaced(without(kFull, "var"), "kind = gaussian", "kind = dirac");
  const RunConfig c = parse_run_config(text);
  CHECK(c.sim.init.kind == InitSpec::Kind::kDirac);
  CHECK(c.sim.init.var == 0.0);
  CHECK(field_of(replaced(kFull, "kind = gaussian", "kind = dirac")) == "init.var");
}

TEST_CASE("config echo") {
  const RunConfig c = parse_run_config(kFull);
  const auto doc = to_json(c);
  CHECK(doc["model"]["alpha"] == 1.5);
  CHECK(doc["init"]["kind"] == "gaussian");
  CHECK(doc["sim"]["N"] == 500);
  CHECK(doc["sim"]["snapshot_times"].size() == 4);
  CHECK(doc["classifier"]["window"] == 5.0);
}
