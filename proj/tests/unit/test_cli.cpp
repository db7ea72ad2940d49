#include "cli.hpp"

#include <json.hpp>

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <vector>

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result run(std::vector<std::string> args) {
  args.insert(args.begin(), "wcga");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = wcga::cli_main(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

const char* kConfig = R"(experiment = "lebesgue"
name = "leb"
seed = 3
trials = 3
[dictionary]
type = "trig"
n = 32
p = 4
N = 3
[target]
kind = "dense"
law = "power"
[oracle]
m_max = 3
)";

}  // namespace

TEST_SUITE("cli") {
  TEST_CASE("constants of an orthonormal system") {
    const auto r = run({"constants", "--dict", "trig", "--d", "1", "--N", "3", "--p", "2", "--K", "2", "--preset",
                        "orthonormal-r"});
    CHECK(r.code == 0);
    CHECK(r.out.find("C1 = 1 (exact") != std::string::npos);
    CHECK(r.out.find("U = 1 (exact") != std::string::npos);
    CHECK(r.out.find("V = 1 (exact") != std::string::npos);
    CHECK(r.out.find("delta = 0 (exact") != std::string::npos);
    const auto j = run({"constants", "--N", "2", "--K", "1", "--which", "C1,delta", "--json"});
    CHECK(j.code == 0);
    CHECK(nlohmann::json::parse(j.out).at("estimates").size() == 2);
  }

  TEST_CASE("preset checks") {
    CHECK(run({"constants", "--dict", "trig", "--N", "2", "--p", "3", "--preset", "ex1q"}).code == 1);
    CHECK(run({"constants", "--dict", "haar", "--J", "2", "--p", "1.5", "--preset", "ex4q", "--which", "C1"}).code == 0);
    CHECK(run({"constants", "--preset", "ex9"}).code == 1);
    CHECK(run({"constants", "--N", "2", "--K", "2", "--D", "1"}).code == 1);
  }

  TEST_CASE("sigma table") {
    const auto r = run({"sigma", "--dict", "trig", "--N", "3", "--p", "4", "--K", "2", "--m-max", "2"});
    CHECK(r.code == 0);
    CHECK(r.out.rfind("m,sigma_m,support\n", 0) == 0);
  }

  TEST_CASE("run, rerun and verify") {
    const auto dir = std::filesystem::temp_directory_path() / "wcga_cli_test";
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    const auto cfg = dir / "leb.toml";
    std::ofstream(cfg) << kConfig;

    CHECK(run({"run", cfg.string(), "--out", (dir / "a").string()}).code == 0);
    CHECK(run({"run", cfg.string(), "--out", (dir / "b").string(), "--threads", "2"}).code == 0);
    CHECK(std::filesystem::exists(dir / "a" / "leb.json"));
    CHECK(slurp(dir / "a" / "leb.csv") == slurp(dir / "b" / "leb.csv"));
    CHECK_FALSE(slurp(dir / "a" / "leb.csv").empty());

    std::ofstream(dir / "bad.toml") << "experiment = \"lebesgue\"\n[dictionary]\ntype = \"trig\"\nN = 3\nsize = 1\n";
    const auto bad = run({"run", (dir / "bad.toml").string()});
    CHECK(bad.code == 1);
    CHECK(bad.err.find("dictionary.size") != std::string::npos);
    CHECK(run({"run", (dir / "missing.toml").string()}).code == 1);

    const auto demo = run({"demo", "--out", (dir / "demo").string()});
    CHECK(demo.code == 0);
    const auto traces = (dir / "demo" / "demo_decay.traces.json").string();
    const auto v = run({"verify", traces, "--theorem", "2.3"});
    CHECK(v.code == 0);
    CHECK(v.out.find("PASS (min slack ") != std::string::npos);
    CHECK(v.out.find("FAIL") == std::string::npos);
    // an absurd V shrinks c1 to nothing; an absurdly small one makes the bound fail
    CHECK(run({"verify", traces, "--theorem", "2.3", "--V", "1e-3"}).code == 2);
    CHECK(run({"verify", (dir / "demo" / "demo_rate.traces.json").string(), "--theorem", "5.1"}).code == 0);
    CHECK(run({"verify", (dir / "demo" / "demo_rate.traces.json").string(), "--theorem", "rate"}).code == 0);
    CHECK(run({"verify", traces, "--theorem", "decay"}).code == 0);

    auto doc = nlohmann::json::parse(slurp(traces));
    doc["schema_version"] = 99;
    std::ofstream(dir / "old.json") << doc.dump();
    const auto refused = run({"verify", (dir / "old.json").string(), "--theorem", "2.3"});
    CHECK(refused.code == 1);
    CHECK(refused.err.find("schema_version") != std::string::npos);
    std::filesystem::remove_all(dir);
  }

  TEST_CASE("usage errors") {
    CHECK(run({}).code == 1);
    CHECK(run({"frobnicate"}).code == 1);
    CHECK(run({"verify", "x.json"}).code == 1);
    CHECK(run({"--help"}).code == 0);
  }
}
