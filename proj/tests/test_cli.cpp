#include <cstdlib>
#include <filesystem>
#include <fstream>

#include "degen/cli.hpp"
#include "doctest.h"
#include "json.hpp"

using namespace degen;
namespace fs = std::filesystem;

namespace {
struct Scratch {
  fs::path dir;
  Scratch() {
    dir = fs::temp_directory_path() / ("degen-cli-test-" + std::to_string(std::rand()));
    fs::create_directories(dir);
  }
  ~Scratch() { fs::remove_all(dir); }
  fs::path write(const std::string& name, const std::string& text) const {
    std::ofstream(dir / name) << text;
    return dir / name;
  }
};

int run(std::vector<std::string> args) {
  args.insert(args.begin(), "degen");
  args.push_back("--quiet");
  return run_cli(args);
}

const char* kSmall = R"(
[grid]
N = 16
M = 32
[coefficients]
c = -1
f = -1
boundary = 1
[barrier]
tangential = 32
levels = 32
)";
}  // namespace

TEST_CASE("cli exit codes") {
  Scratch s;
  auto cfg = s.write("small.toml", kSmall).string();
  auto out = (s.dir / "out").string();

  CHECK(run({"--config", cfg, "--out", out, "solve"}) == kExitOk);
  CHECK(fs::exists(s.dir / "out" / "solution.csv"));
  std::ifstream rep(s.dir / "out" / "report.json");
  auto j = nlohmann::json::parse(rep);
  CHECK(j.contains("steps"));

  CHECK(run({"--config", cfg, "--out", out, "indicial", "--scope", "boundary"}) == kExitOk);
  CHECK(run({"--config", cfg, "--out", out, "indicial"}) == kExitConfigError);
  CHECK(run({"--config", cfg, "--out", out, "barrier"}) == kExitOk);
  CHECK(run({"--config", (s.dir / "missing.toml").string(), "solve"}) == kExitConfigError);
  CHECK(run({"--config", cfg, "--out", out, "--mode", "sideways", "solve"}) == kExitConfigError);

  auto positive = s.write("pos.toml", "[coefficients]\nc = 1\nf = 0\nboundary = 0\n").string();
  CHECK(run({"--config", positive, "--out", out, "solve"}) == kExitVerificationFailure);

  auto nan_f = s.write("nan.toml", "[grid]\nN = 8\nM = 8\n[coefficients]\nc = -1\nf = \"log(t)\"\nboundary = 0\n").string();
  CHECK(run({"--config", nan_f, "--out", out, "solve"}) != kExitOk);
}

TEST_CASE("manufacture and analyze") {
  Scratch s;
  auto cfg = s.write("m.toml", R"(
[grid]
N = 16
M = 128
[manufactured]
case = "monomial"
s = 1.5
[analysis]
operations = ["fit_boundary_decay", "detect_log_factor"]
)").string();
  auto out = (s.dir / "out").string();
  CHECK(run({"--config", cfg, "--out", out, "manufacture"}) == kExitOk);
  CHECK(fs::exists(s.dir / "out" / "u.csv"));
  CHECK(run({"--config", cfg, "--out", out, "analyze"}) == kExitOk);
  std::ifstream in(s.dir / "out" / "analysis.json");
  auto j = nlohmann::json::parse(in);
  CHECK(!j.empty());
}
