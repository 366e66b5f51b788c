#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

namespace fs = std::filesystem;

namespace {

int run_tool(const std::string& args) {
  const std::string command = std::string(TIEDML_TOOL) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(command.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("tiedml-cli-test-" + name);
  fs::remove_all(dir);
  return dir;
}

}  // namespace

TEST_CASE("identical configs give byte-identical reports") {
  const fs::path a = scratch("a");
  const fs::path b = scratch("b");
  REQUIRE(run_tool("renewal srt --n 5000 --out " + a.string()) == 0);
  REQUIRE(run_tool("renewal srt --n 5000 --threads 1 --out " + b.string()) == 0);
  CHECK(slurp(a / "reports.json") == slurp(b / "reports.json"));
  CHECK(slurp(a / "manifest.json") == slurp(b / "manifest.json"));
  const auto manifest = nlohmann::json::parse(slurp(a / "manifest.json"));
  CHECK(manifest.at("pass") == true);
  CHECK(manifest.at("artifacts").size() == 2);
  CHECK(manifest.at("artifacts")[0].at("sha256").get<std::string>().size() == 64);
}

TEST_CASE("config files, overrides and usage errors") {
  const fs::path dir = scratch("config");
  fs::create_directories(dir);
  {
    std::ofstream cfg(dir / "ok.json");
    cfg << R"({"experiment": "cor7", "big_n": 400, "seed": 3})";
    std::ofstream bad(dir / "bad.json");
    bad << R"({"experiment": "cor7", "colour": "blue"})";
  }
  CHECK(run_tool("--config " + (dir / "ok.json").string() + " --out " + (dir / "o").string()) == 0);
  const auto reports = nlohmann::json::parse(slurp(dir / "o" / "reports.json"));
  CHECK(reports.at("settings").at("big_n") == 400);
  CHECK(run_tool("--config " + (dir / "ok.json").string() + " --big-n 800 --out " +
                 (dir / "p").string()) == 0);
  CHECK(nlohmann::json::parse(slurp(dir / "p" / "reports.json")).at("settings").at("big_n") == 800);
  CHECK(run_tool("--config " + (dir / "bad.json").string()) == 2);
  CHECK(run_tool("no-such-experiment") == 2);
  CHECK(run_tool("srt --gamma 3 --out " + (dir / "q").string()) == 2);
  CHECK_FALSE(fs::exists(dir / "q" / "manifest.json"));
}

TEST_CASE("failing reports set exit status 1") {
  const fs::path dir = scratch("fail");
  CHECK(run_tool("llt --n 64 --out " + dir.string()) == 0);
  CHECK(run_tool("llt --n 64 --tolerance 1e-9 --out " + dir.string()) == 1);
  const auto reports = nlohmann::json::parse(slurp(dir / "reports.json"));
  CHECK(reports.at("pass") == false);
}

TEST_CASE("output directory from the environment") {
  const fs::path dir = scratch("env");
  const std::string args = "renewal tables --n 100";
  const std::string command = "TIEDML_OUT=" + dir.string() + " " + TIEDML_TOOL + " " + args +
                              " > /dev/null 2>&1";
  CHECK(std::system(command.c_str()) == 0);
  CHECK(fs::exists(dir / "tables.csv"));
}
