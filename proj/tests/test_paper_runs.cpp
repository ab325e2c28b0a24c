#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "mflda/commands.hpp"

using namespace mflda;
namespace fs = std::filesystem;

namespace {

std::string verdict_of(const char* cfg) {
  const fs::path dir = fs::temp_directory_path() / "mflda_test_paper_runs" / cfg;
  fs::remove_all(dir);
  std::ostringstream log;
  const SimulateCommand cmd{fs::path(MFLDA_SOURCE_DIR) / "configs" / cfg, dir, std::nullopt};
  REQUIRE(run_simulate(cmd, log) == kExitOk);
  std::ifstream in(dir / "manifest.json");
  return nlohmann::json::parse(in)["verdicts"]["classifier"]["verdict"].get<std::string>();
}

}  // namespace

TEST_CASE("bundled run A oscillates") { CHECK(verdict_of("paper_runA.cfg") == "oscillating"); }

TEST_CASE("bundled run B converges") { CHECK(verdict_of("paper_runB.cfg") == "converged"); }
