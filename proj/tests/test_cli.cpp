#include "doctest.h"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "json.hpp"
#include "ptkk/cli.hpp"
#include "ptkk/kk.hpp"

namespace fs = std::filesystem;
using namespace ptkk;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    static int counter = 0;
    path = fs::temp_directory_path() / ("ptkk_cli_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  [[nodiscard]] std::string str(const std::string& sub = "") const { return (path / sub).string(); }
};

// Runs the tool with stdout and stderr captured.
struct Run {
  int code = -1;
  std::string out;
  std::string err;
};

Run ptkk_run(std::vector<std::string> args) {
  args.insert(args.begin(), "ptkk");
  std::ostringstream out, err;
  auto* old_out = std::cout.rdbuf(out.rdbuf());
  auto* old_err = std::cerr.rdbuf(err.rdbuf());
  Run r;
  r.code = cli::run(args);
  std::cout.rdbuf(old_out);
  std::cerr.rdbuf(old_err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

nlohmann::json manifest(const TempDir& d, const std::string& cmd) {
  return nlohmann::json::parse(slurp(d.str(cmd + ".manifest.json")));
}

const std::vector<std::string> kSmallGrid{"--half-width", "5", "--n-points", "1001"};

std::vector<std::string> operator+(std::vector<std::string> a, const std::vector<std::string>& b) {
  a.insert(a.end(), b.begin(), b.end());
  return a;
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("kk-residual at the reference point") {
  TempDir d;
  const Run r = ptkk_run({"kk-residual", "--gamma", "1.5", "--gamma-ex", "0.1", "--convention", "sp", "--out", d.str()});
  REQUIRE(r.code == 0);
  CHECK(r.out.find("reduction_factor=") != std::string::npos);
  const auto m = manifest(d, "kk-residual");
  CHECK(m["summary"]["N_B"] == 1);
  CHECK(m["summary"]["reduction_factor"].get<double>() > 17.0);
  CHECK(m["summary"]["reduction_factor"].get<double>() < 26.0);
  CHECK(m["version"] == cli::version());
  CHECK(fs::exists(d.str("kk.csv")));
}

TEST_CASE("poles of the Hermitian dimer") {
  TempDir d;
  const Run r = ptkk_run({"poles", "--gamma", "0", "--gamma-ex", "0", "--kappa", "1", "--out", d.str()});
  REQUIRE(r.code == 0);
  CHECK(r.out.find("N_B=0") != std::string::npos);
  const auto m = manifest(d, "poles");
  CHECK(m["derived"]["N_B"] == 0);
  const auto& ps = m["derived"]["poles"];
  REQUIRE(ps.size() == 2);
  CHECK(std::abs(ps[0]["location"]["re"].get<double>() - 1.0) < 1e-15);
  CHECK(std::abs(ps[1]["location"]["re"].get<double>() + 1.0) < 1e-15);
  CHECK(m["derived"]["contour_N_B"].is_null());
}

TEST_CASE("scaling reports the exponent") {
  TempDir d;
  const Run r = ptkk_run({"scaling", "--convention", "sp", "--gamma-ex", "0.05", "--out", d.str()});
  REQUIRE(r.code == 0);
  const auto m = manifest(d, "scaling");
  CHECK(m["summary"]["nu"].get<double>() == doctest::Approx(-1.08).epsilon(0.05));
  CHECK(m["derived"]["points"].size() == 25);
}

TEST_CASE("every command writes its table") {
  TempDir d;
  const std::string o = d.str();
  CHECK(ptkk_run({"trajectory", "--steps", "51", "--out", o}).code == 0);
  CHECK(ptkk_run({"phase-diagram", "--n-gamma", "10", "--n-gamma-ex", "10", "--subsample", "1", "--out", o}).code == 0);
  CHECK(ptkk_run(std::vector<std::string>{"ssh-check", "--n-scan", "7", "--out", o} + kSmallGrid).code == 0);
  CHECK(ptkk_run(std::vector<std::string>{"fit-pole", "--out", o} + kSmallGrid).code == 0);
  CHECK(ptkk_run({"poles", "--model", "ssh", "--gamma", "1.5", "--gamma-ex", "0.05", "--out", o}).code == 0);
  for (const char* f : {"trajectory.csv", "phase.csv", "ssh.csv", "fit_pole.csv", "poles.csv"})
    CHECK(fs::exists(d.str(f)));
  const auto m = manifest(d, "phase-diagram");
  CHECK(m["summary"]["disagreements"] == 0);
  CHECK(m["summary"]["checked_cells"] == 100);
}

TEST_CASE("determinism: identical runs give identical bytes") {
  TempDir a, b;
  const std::vector<std::string> args{"kk-residual", "--gamma", "1.3", "--gamma-ex", "0.2"};
  REQUIRE(ptkk_run(args + kSmallGrid + std::vector<std::string>{"--out", a.str(), "--threads", "3"}).code == 0);
  REQUIRE(ptkk_run(args + kSmallGrid + std::vector<std::string>{"--out", b.str()}).code == 0);
  CHECK(slurp(a.str("kk.csv")) == slurp(b.str("kk.csv")));
  CHECK(slurp(a.str("kk-residual.manifest.json")) == slurp(b.str("kk-residual.manifest.json")));

  TempDir c, e;
  REQUIRE(ptkk_run({"scaling", "--n-scan", "6", "--n-points", "801", "--out", c.str()}).code == 0);
  REQUIRE(ptkk_run({"scaling", "--n-scan", "6", "--n-points", "801", "--out", e.str(), "--threads", "2"}).code == 0);
  CHECK(slurp(c.str("scaling.csv")) == slurp(e.str("scaling.csv")));
  CHECK(slurp(c.str("scaling.manifest.json")) == slurp(e.str("scaling.manifest.json")));
}

TEST_CASE("a saved manifest re-runs to identical outputs") {
  TempDir a, b;
  REQUIRE(ptkk_run(std::vector<std::string>{"kk-residual", "--gamma", "1.7", "--convention", "sym", "--out", a.str()} +
                   kSmallGrid)
              .code == 0);
  const Run r = ptkk_run({"--config", a.str("kk-residual.manifest.json"), "--out", b.str()});
  REQUIRE(r.code == 0);
  CHECK(slurp(a.str("kk.csv")) == slurp(b.str("kk.csv")));
  CHECK(slurp(a.str("kk-residual.manifest.json")) == slurp(b.str("kk-residual.manifest.json")));
}

TEST_CASE("flags override the config file") {
  TempDir d;
  {
    std::ofstream cfg(d.str("run.json"));
    cfg << R"({"command": "poles", "gamma": 1.5, "gamma_ex": 0.1})";
  }
  REQUIRE(ptkk_run({"--config", d.str("run.json"), "--out", d.str()}).code == 0);
  CHECK(manifest(d, "poles")["derived"]["N_B"] == 1);
  REQUIRE(ptkk_run({"poles", "--config", d.str("run.json"), "--gamma", "0.5", "--out", d.str()}).code == 0);
  CHECK(manifest(d, "poles")["derived"]["N_B"] == 0);
  CHECK(manifest(d, "poles")["config"]["gamma"] == 0.5);
}

TEST_CASE("config errors") {
  TempDir d;
  {
    std::ofstream cfg(d.str("bad.json"));
    cfg << R"({"command": "poles", "gama": 1.5})";
    std::ofstream broken(d.str("broken.json"));
    broken << "{ not json";
  }
  Run r = ptkk_run({"--config", d.str("bad.json"), "--out", d.str()});
  CHECK(r.code == 2);
  CHECK(r.err.find("gama") != std::string::npos);
  r = ptkk_run({"--config", d.str("broken.json"), "--out", d.str()});
  CHECK(r.code == 2);
  CHECK(r.err.find("malformed config") != std::string::npos);
  r = ptkk_run({"kk-residual", "--config", d.str("bad.json"), "--out", d.str()});
  CHECK(r.code == 2);
}

TEST_CASE("output directory from the environment") {
  TempDir d;
  ::setenv(cli::kOutputDirEnv, d.str("env").c_str(), 1);
  const Run r = ptkk_run({"poles"});
  ::unsetenv(cli::kOutputDirEnv);
  REQUIRE(r.code == 0);
  CHECK(fs::exists(d.str("env/poles.manifest.json")));
}

TEST_CASE("exit codes and messages") {
  TempDir d;
  const std::string o = d.str();
  Run r = ptkk_run({"poles", "--bogus", "1", "--out", o});
  CHECK(r.code == 2);
  r = ptkk_run({"frobnicate"});
  CHECK(r.code == 2);
  r = ptkk_run({"poles", "--gamma", "-1", "--out", o});
  CHECK(r.code == 2);
  CHECK(r.err.find("gamma") != std::string::npos);
  r = ptkk_run({"poles", "--convention", "both", "--out", o});
  CHECK(r.code == 2);
  CHECK(r.err.find("convention") != std::string::npos);
  r = ptkk_run({"kk-residual", "--n-points", "1000", "--out", o});
  CHECK(r.code == 2);
  CHECK(r.err.find("odd") != std::string::npos);
  // the EP of the closed dimer puts the poles on the axis
  r = ptkk_run({"kk-residual", "--gamma", "1", "--gamma-ex", "0", "--out", o});
  CHECK(r.code == 3);
  CHECK(r.err.find("real axis") != std::string::npos);
  // a flat spectrum has no pole to fit
  {
    std::ofstream flat(d.str("flat.csv"));
    flat << "omega,re,im\n-1,0,0\n-0.5,0,0\n0,0,0\n0.5,0,0\n1,0,0\n";
  }
  r = ptkk_run({"fit-pole", "--input", d.str("flat.csv"), "--out", o});
  CHECK(r.code == 3);
  CHECK(r.err.find("no detectable peak") != std::string::npos);
  CHECK(ptkk_run({"--help"}).code == 0);
}

TEST_CASE("diagnose an external spectrum") {
  TempDir d;
  auto write = [&](const std::string& name, const DimerParams& p, bool raw) {
    std::ofstream out(d.str(name));
    write_spectrum_csv(out, SampledResponse::sample(reflection_response(p), FrequencyGrid{}, !raw));
  };
  write("broken.csv", {1.5, 1.0, 0.1, Convention::single_port}, true);
  write("causal.csv", {0.4, 1.0, 0.1, Convention::single_port}, true);

  Run r = ptkk_run({"diagnose", "--input", d.str("broken.csv"), "--offset", "1", "--out", d.str()});
  REQUIRE(r.code == 0);
  CHECK(r.out.find("verdict=uhp_pole") != std::string::npos);
  auto m = manifest(d, "diagnose");
  CHECK(m["summary"]["reduction_factor"].get<double>() > 5.0);
  CHECK(m["derived"]["fit"]["location"]["im"].get<double>() == doctest::Approx(1.1264).epsilon(0.1));

  r = ptkk_run({"diagnose", "--input", d.str("causal.csv"), "--offset", "1", "--out", d.str()});
  REQUIRE(r.code == 0);
  CHECK(r.out.find("verdict=causal") != std::string::npos);

  {
    std::ofstream bad(d.str("bad.csv"));
    bad << "omega,re,im\n-1,0,0\n0,zero,0\n1,0,0\n";
    std::ofstream uneven(d.str("uneven.csv"));
    uneven << "omega,re,im\n-1,0,0\n0.3,0,0\n1,0,0\n";
  }
  r = ptkk_run({"diagnose", "--input", d.str("bad.csv"), "--out", d.str()});
  CHECK(r.code == 2);
  CHECK(r.err.find("malformed CSV") != std::string::npos);
  r = ptkk_run({"diagnose", "--input", d.str("uneven.csv"), "--out", d.str()});
  CHECK(r.code == 2);
  CHECK(r.err.find("non-uniform") != std::string::npos);
  r = ptkk_run({"diagnose", "--input", d.str("missing.csv"), "--out", d.str()});
  CHECK(r.code == 2);
  r = ptkk_run({"diagnose", "--out", d.str()});
  CHECK(r.code == 2);
}

}
