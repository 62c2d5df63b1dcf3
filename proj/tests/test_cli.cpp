#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

namespace fs = std::filesystem;

namespace {

struct CmdResult {
  int exit_code;
  std::string out;
};

// Runs the built CLI binary, capturing stdout.
CmdResult run_cli(const std::string& args) {
  std::string cmd = std::string(DIRACLAB_CLI_PATH) + " " + args + " 2>/dev/null";
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  std::string out;
  char buf[4096];
  std::size_t got;
  while ((got = fread(buf, 1, sizeof(buf), pipe)) > 0) out.append(buf, got);
  int status = pclose(pipe);
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, out};
}

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           ("diraclab_test_" + std::to_string(::getpid()) + "_" +
            std::to_string(counter()++));
    fs::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
  static int& counter() {
    static int c = 0;
    return c;
  }
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("simulate writes the trajectory CSV with the pinned header") {
  TempDir tmp;
  auto res = run_cli("simulate --preset fig1-persistence --set solver.t_end=0 --out " +
                     tmp.path.string());
  CHECK(res.exit_code == 0);
  fs::path csv = tmp.path / "trajectory.csv";
  REQUIRE(fs::exists(csv));
  std::string content = slurp(csv);
  CHECK(content.rfind("t,rho,I,xbar,umax,J\n", 0) == 0);
  // a t_end = 0 run records exactly the initial state
  CHECK(std::count(content.begin(), content.end(), '\n') == 2);
}

TEST_CASE("simulate is byte-deterministic") {
  TempDir a, b;
  std::string args = "simulate --preset fig1-persistence --set solver.t_end=0.003 "
                     "--set grid.n_points=601 --set solver.epsilon=0.01 --set solver.dt=0.001";
  CHECK(run_cli(args + " --out " + a.path.string()).exit_code == 0);
  CHECK(run_cli(args + " --out " + b.path.string()).exit_code == 0);
  CHECK(slurp(a.path / "trajectory.csv") == slurp(b.path / "trajectory.csv"));
}

TEST_CASE("snapshots are written in long format when requested") {
  TempDir tmp;
  auto res = run_cli(
      "simulate --preset fig1-persistence --set solver.t_end=0.002 --set grid.n_points=61 "
      "--set solver.epsilon=0.01 --set solver.dt=0.001 --snapshots 1 --out " +
      tmp.path.string());
  CHECK(res.exit_code == 0);
  std::string snaps = slurp(tmp.path / "snapshots.csv");
  CHECK(snaps.rfind("t,x,n\n", 0) == 0);
  // 3 snapshots (t = 0, 0.001, 0.002) of 61 nodes each plus the header
  CHECK(std::count(snaps.begin(), snaps.end(), '\n') == 1 + 3 * 61);
}

TEST_CASE("malformed config exits 2 without partial outputs") {
  TempDir tmp;
  fs::path cfg = tmp.path / "broken.cfg";
  std::ofstream(cfg) << "[solver]\ndt = banana\n";
  auto res = run_cli("simulate --config " + cfg.string() + " --out " + tmp.path.string());
  CHECK(res.exit_code == 2);
  CHECK_FALSE(fs::exists(tmp.path / "trajectory.csv"));

  CHECK(run_cli("simulate --preset no-such-preset").exit_code == 2);
  CHECK(run_cli("simulate").exit_code == 2);
}

TEST_CASE("classify emits the JSON verdicts of the named experiments") {
  auto verdict = [&](const std::string& preset) {
    auto res = run_cli("classify --preset " + preset);
    REQUIRE(res.exit_code == 0);
    return nlohmann::json::parse(res.out);
  };
  CHECK(verdict("fig1-persistence")["tag"] == "Persistence");
  CHECK(verdict("fig1-persistence")["witness"] == "(-0.5, -0.4)");
  auto ext = verdict("fig1-extinction");
  CHECK(ext["tag"] == "ExtinctionInterval");
  CHECK(std::abs(ext["margin"].get<double>() - 0.11) < 1e-9);
  CHECK(verdict("fig2-far")["tag"] == "Critical");
  CHECK(verdict("fig2-near")["tag"] == "Critical");
  CHECK(verdict("fig4-remark")["tag"] == "Unclassified");
  CHECK(verdict("fig4-remark")["margin"].is_null());
}

TEST_CASE("preset export round-trips through a config file") {
  TempDir tmp;
  auto exp = run_cli("preset export fig5-slow");
  REQUIRE(exp.exit_code == 0);
  fs::path cfg = tmp.path / "fig5.cfg";
  std::ofstream(cfg) << exp.out;
  auto res = run_cli("classify --config " + cfg.string());
  CHECK(res.exit_code == 0);
  CHECK(nlohmann::json::parse(res.out)["tag"] == "Persistence");

  auto lst = run_cli("preset list");
  CHECK(lst.exit_code == 0);
  CHECK(lst.out.find("fig6-sweep") != std::string::npos);
}

TEST_CASE("sweep writes one row per period in input order") {
  TempDir tmp;
  auto res = run_cli(
      "sweep --preset fig6-sweep --values 0.5,0.25 --jobs 2 "
      "--set grid.n_points=301 --set solver.epsilon=0.02 --set solver.dt=0.002 --out " +
      tmp.path.string());
  CHECK(res.exit_code == 0);
  std::string csv = slurp(tmp.path / "sweep.csv");
  REQUIRE(csv.rfind("T,mean_rho,min_rho,extinct\n", 0) == 0);
  std::stringstream ss(csv);
  std::string header, row1, row2;
  std::getline(ss, header);
  std::getline(ss, row1);
  std::getline(ss, row2);
  CHECK(row1.rfind("0.5,", 0) == 0);
  CHECK(row2.rfind("0.25,", 0) == 0);
  CHECK(row1.find("false") != std::string::npos);
}

TEST_CASE("hjlimit writes the closure trajectory and the bounds report") {
  TempDir tmp;
  auto res = run_cli("hjlimit --preset fig5-slow --out " + tmp.path.string());
  CHECK(res.exit_code == 0);
  std::string csv = slurp(tmp.path / "hj_trajectory.csv");
  CHECK(csv.rfind("t,rho,I,xbar,umax,J,source,M,phase\n", 0) == 0);
  CHECK(csv.find(",hj,") != std::string::npos);

  auto rep = nlohmann::json::parse(slurp(tmp.path / "hj_bounds.json"));
  CHECK(rep["initial_phase"] == "persistent");
  REQUIRE(rep["events"].is_array());
  REQUIRE_FALSE(rep["events"].empty());
  CHECK(std::abs(rep["events"][0]["t"].get<double>() - 0.5) < 1e-9);

  // an extinct start reports the duration bounds
  TempDir tmp2;
  fs::path cfg = tmp2.path / "extinct.cfg";
  std::ofstream(cfg) << R"([grid]
x_min = -3
x_max = 3
dx = 0.001

[solver]
epsilon = 0.001
dt = 0.0001
t_end = 1

[model.1]
form = quadratic
r = 0.25
g = 1
theta = 0

[ic]
kind = gaussian
center = -0.65
mass = 0.2
)";
  auto res2 = run_cli("hjlimit --config " + cfg.string() + " --out " + tmp2.path.string());
  CHECK(res2.exit_code == 0);
  auto rep2 = nlohmann::json::parse(slurp(tmp2.path / "hj_bounds.json"));
  CHECK(rep2["initial_phase"] == "extinct");
  double tb = rep2["t_bar"].get<double>();
  CHECK(tb > rep2["duration_bounds"]["lower"].get<double>());
  CHECK(tb < rep2["duration_bounds"]["upper"].get<double>());
}
