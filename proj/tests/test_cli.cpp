#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <string>
#include <sys/stat.h>

namespace {

const std::string kCli = MFGLAB_CLI_PATH;

int run(const std::string& args) {
  const std::string cmd = kCli + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WEXITSTATUS(status);
}

std::string write_config(const std::string& name, const std::string& body) {
  const std::string path = "/tmp/" + name;
  std::ofstream out(path);
  out << body;
  return path;
}

const char* kValidConfig = R"json({
  "resolution": [17, 17],
  "time": {"T": 1.0, "nt": 16},
  "nu": 0.2,
  "regime": "DH",
  "cost": ["1 + 0.5*sin(pi*x)*sin(pi*y)"],
  "m0": "0.02*sin(pi*x)*sin(pi*y)",
  "window": [{"edge": "right", "from": 0.0, "to": 1.0}],
  "probes": 4
})json";

bool exists(const std::string& path) {
  struct stat st{};
  return ::stat(path.c_str(), &st) == 0;
}

}  // namespace

TEST_CASE("missing arguments and unknown subcommands exit with config error") {
  CHECK(run("") == 2);
  CHECK(run("frobnicate") == 2);
  CHECK(run("forward") == 2);  // --config is required
}

TEST_CASE("nonexistent and malformed configs exit with code 2") {
  CHECK(run("forward --config /tmp/no_such_config_mfglab.json") == 2);
  const std::string bad = write_config("mfglab_bad.json", "{ not json");
  CHECK(run("forward --config " + bad) == 2);
  const std::string badexpr = write_config(
      "mfglab_badexpr.json",
      R"({"resolution": [17, 17], "cost": ["sin(pi*x"], "regime": "DH"})");
  CHECK(run("forward --config " + badexpr) == 2);
  const std::string badregime = write_config(
      "mfglab_badregime.json",
      R"({"resolution": [17, 17], "cost": ["1"], "regime": "XX"})");
  CHECK(run("forward --config " + badregime) == 2);
}

TEST_CASE("forward writes artifacts and exits 0") {
  const std::string cfg = write_config("mfglab_ok.json", kValidConfig);
  const std::string out = "/tmp/mfglab_cli_out";
  CHECK(run("forward --config " + cfg + " --out " + out) == 0);
  CHECK(exists(out + "/forward.json"));
  CHECK(exists(out + "/u_initial.csv"));
  CHECK(exists(out + "/m_final.csv"));

  // CSV header contract.
  std::ifstream csv(out + "/m_final.csv");
  std::string header;
  std::getline(csv, header);
  CHECK(header == "x,y,value");

  // Config hash present in the manifest.
  std::ifstream manifest(out + "/forward.json");
  std::string text((std::istreambuf_iterator<char>(manifest)),
                   std::istreambuf_iterator<char>());
  CHECK(text.find("config_hash") != std::string::npos);
  CHECK(text.find("provenance") != std::string::npos);
}

TEST_CASE("measure then reconstruct artifacts round trip") {
  const std::string cfg = write_config("mfglab_ok2.json", kValidConfig);
  const std::string out = "/tmp/mfglab_cli_out2";
  CHECK(run("measure --config " + cfg + " --out " + out) == 0);
  CHECK(exists(out + "/record.json"));
  CHECK(exists(out + "/measure.json"));
  CHECK(run("linearize --config " + cfg + " --out " + out) == 0);
  CHECK(exists(out + "/linearize.json"));
}
