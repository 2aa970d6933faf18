#include <catch2/catch_amalgamated.hpp>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "timestitch/cli.hpp"

using namespace timestitch;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result invoke(std::vector<std::string> args) {
  args.insert(args.begin(), "timestitch");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = cli::run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string device_file(const std::string& name) {
  return std::string(TIMESTITCH_DATA_DIR) + "/devices/" + name;
}

std::filesystem::path scratch(const std::string& name) {
  auto p = std::filesystem::temp_directory_path() / ("timestitch_cli_" + name);
  std::filesystem::remove_all(p);
  return p;
}

double field(const std::string& text, const std::string& key) {
  std::istringstream is(text);
  for (std::string line; std::getline(is, line);) {
    if (line.rfind(key + " ", 0) == 0) return std::stod(line.substr(key.size() + 1));
  }
  FAIL("no '" << key << "' line in output");
  return 0.0;
}

}  // namespace

TEST_CASE("bench writes a circuit and its accepted outputs", "[cli]") {
  const auto dir = scratch("bench");
  const auto r = invoke({"bench", "--bench", "qft", "--n", "4", "--out", dir.string()});
  REQUIRE(r.code == 0);
  CHECK(r.out.find("accepted=1010") != std::string::npos);
  CHECK(std::filesystem::exists(dir / "qft-4.qasm"));
  CHECK(qasm::parse_file((dir / "qft-4.qasm").string()) == make_benchmark(BenchKind::QFT, 4).circuit);
  std::filesystem::remove_all(dir);
}

TEST_CASE("schedule lists slack windows", "[cli]") {
  const auto r = invoke({"schedule", "--bench", "ghz", "--n", "3", "--policy", "alap"});
  REQUIRE(r.code == 0);
  CHECK(r.out.find("window") != std::string::npos);
  CHECK(invoke({"windows", "--bench", "ghz", "--n", "3"}).out == r.out);
}

TEST_CASE("slice writes one SI circuit per window", "[cli]") {
  const auto dir = scratch("slice");
  const auto r = invoke({"slice", "--bench", "qft", "--n", "4", "--out", dir.string()});
  REQUIRE(r.code == 0);
  CHECK(std::filesystem::exists(dir / "manifest.txt"));
  CHECK(std::filesystem::exists(dir / "si_w0.qasm"));
  CHECK(r.out.find("pass") != std::string::npos);
  CHECK(r.out.find("fail") != std::string::npos);
  std::filesystem::remove_all(dir);
}

TEST_CASE("run on a noise-free device scores perfectly", "[cli]") {
  const auto r = invoke({"run", "--bench", "ghz", "--n", "4", "--device", device_file("noise-free7.json"),
                      "--eval-shots", "2000"});
  REQUIRE(r.code == 0);
  CHECK(field(r.out, "pos") == 1.0);
  CHECK(field(r.out, "hellinger") == 1.0);
}

TEST_CASE("tuned schedules replay with unchanged duration", "[cli]") {
  const auto dir = scratch("tune");
  std::filesystem::create_directories(dir);
  const auto timed = (dir / "tuned.qasm").string();
  const auto t = invoke({"tune", "--bench", "qft", "--n", "4", "--budget", "20", "--shots", "128",
                      "--out", timed});
  REQUIRE(t.code == 0);
  const auto replay = invoke({"run", "--schedule", timed, "--accepted", "1010", "--eval-shots", "500"});
  REQUIRE(replay.code == 0);
  const auto d = reference_device();
  const auto alap = schedule(make_benchmark(BenchKind::QFT, 4).circuit,
                             std::make_shared<const DeviceModel>(d), Policy::ALAP);
  CHECK(replay.out.find("total_duration=" + std::to_string(alap.total_duration())) !=
        std::string::npos);
  std::filesystem::remove_all(dir);
}

TEST_CASE("compare is reproducible byte for byte", "[cli]") {
  const std::vector<std::string> args{"compare", "--bench", "qft", "--n", "3", "--budget", "20",
                                      "--shots", "128", "--eval-shots", "1000", "--seed", "4"};
  const auto a = invoke(args);
  const auto b = invoke(args);
  REQUIRE(a.code == 0);
  CHECK(a.out == b.out);
  for (const char* row : {"ALAP", "ASAP", "Middle", "TS-SI", "TS-SI+C", "DD", "DD(H)", "TS+DD",
                          "TS+DD(H)"}) {
    CHECK(a.out.find(std::string("\n") + row + " ") != std::string::npos);
  }
  auto other = args;
  other.back() = "5";
  CHECK(invoke(other).out != a.out);
}

TEST_CASE("the device falls back to the environment variable", "[cli]") {
  ::setenv(cli::kDeviceEnv, device_file("noise-free7.json").c_str(), 1);
  const auto r = invoke({"run", "--bench", "ghz", "--n", "3", "--eval-shots", "100"});
  ::unsetenv(cli::kDeviceEnv);
  REQUIRE(r.code == 0);
  CHECK(r.out.find("device=noise-free7") != std::string::npos);
}

TEST_CASE("errors give a message and a nonzero exit code", "[cli]") {
  auto r = invoke({"run", "--bench", "nope"});
  CHECK(r.code != 0);
  CHECK(r.err.find("error:") != std::string::npos);
  CHECK(invoke({"run", "--input", "/nonexistent.qasm"}).code != 0);
  CHECK(invoke({"run", "--bench", "ghz", "--input", "x.qasm"}).code != 0);
  CHECK(invoke({"tune", "--bench", "ghz", "--mode", "fast"}).code != 0);
  CHECK(invoke({"run", "--bench", "ghz", "--dd", "sometimes"}).code != 0);
  CHECK(invoke({"run", "--bench", "ghz", "--device", "/nonexistent.json"}).code != 0);
  CHECK(invoke({}).code != 0);
}
