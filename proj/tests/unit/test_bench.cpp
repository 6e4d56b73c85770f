#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "harmonia/bench.hpp"

using namespace harmonia;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& name) {
  const fs::path d = fs::temp_directory_path() / name;
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void write_bundle(const fs::path& root, const std::string& sid, Method m, std::uint64_t seed, double rmse) {
  RunResult r;
  r.scenario = sid;
  r.method = m;
  r.seed = seed;
  r.metrics.rmse = rmse;
  r.metrics.paper_mae = rmse / 2;
  r.metrics.mean_abs_laplacian = 1e-3;
  const fs::path d = run_dir(root.string(), sid, m, seed);
  fs::create_directories(d);
  std::ofstream(d / "metrics.csv") << metrics_csv(r);
}

}  // namespace

TEST_CASE("mean and population standard deviation") {
  const auto ms = mean_std({0.01, 0.03});
  CHECK(ms[0] == doctest::Approx(0.02));
  CHECK(ms[1] == doctest::Approx(0.01));
  CHECK(mean_std({5.0})[1] == 0.0);
}

TEST_CASE("gradient ascent follows a linear potential straight up") {
  const Domain box = Domain::rect({0, 0, 1, 1});
  const auto grad = [](const Pt&) { return std::array<double, 2>{0.0, 1.0}; };
  const RobotPath p = robot_path(grad, box, {0.3, 0.05, 0});
  CHECK(p.status == PathStatus::reached);
  CHECK(p.points.back()[1] >= 0.99 - 1e-12);
  for (const auto& q : p.points) CHECK(q[0] == doctest::Approx(0.3));
  CHECK(p.points.size() >= 95);
  CHECK(p.points.size() <= 97);

  const auto flat = [](const Pt&) { return std::array<double, 2>{0.0, 0.0}; };
  CHECK(robot_path(flat, box, {0.3, 0.05, 0}).status == PathStatus::stationary);
  const auto out = [](const Pt&) { return std::array<double, 2>{-1.0, 0.0}; };
  CHECK(robot_path(out, box, {0.3, 0.05, 0}).status == PathStatus::exited);
}

TEST_CASE("ascent on the finite-difference robot field reaches the goal") {
  const Scenario s = make_scenario("robot");
  const Oracle& o = cached_oracle(s, Preset::fast);
  const auto grad = [&](const Pt& p) {
    const auto g = o.gradient(p);
    return std::array<double, 2>{g[0], g[1]};
  };
  const RobotPath coarse = robot_path(grad, s.domain, {0.25, 0.05, 0});
  CHECK(coarse.status == PathStatus::reached);
  CHECK(coarse.points.back()[1] >= 0.98);
  for (const auto& q : coarse.points) CHECK(s.domain.contains_closed(q, 1e-9));

  PathOptions half;
  half.step = 0.005;
  half.max_steps = 20000;
  const RobotPath fine = robot_path(grad, s.domain, {0.25, 0.05, 0}, half);
  CHECK(fine.status == PathStatus::reached);
  const double shift = std::hypot(fine.points.back()[0] - coarse.points.back()[0],
                                  fine.points.back()[1] - coarse.points.back()[1]);
  CHECK(shift < 2 * 0.01);
}

TEST_CASE("table aggregates bundles and lists missing runs") {
  const fs::path root = fresh_dir("harmonia_table_test");
  write_bundle(root, "heat_box", Method::pinn, 0, 0.01);
  write_bundle(root, "heat_box", Method::pinn, 1, 0.03);
  write_bundle(root, "heat_box", Method::holomorphic, 0, 0.002);
  TableOptions opt;
  opt.out_dir = root.string();
  opt.scenarios = {"heat_box"};
  opt.methods = {Method::pinn, Method::holomorphic, Method::curlnet};
  const Table t = table(opt);
  REQUIRE(t.cells.size() == 2);
  CHECK(t.cells[0].method == Method::pinn);
  CHECK(t.cells[0].runs == 2);
  CHECK(t.cells[0].mean[0] == doctest::Approx(0.02));
  CHECK(t.cells[0].stddev[0] == doctest::Approx(0.01));
  CHECK(t.cells[0].mean[1] == doctest::Approx(0.01));
  CHECK(t.missing == std::vector<std::string>{"heat_box/curlnet"});
  CHECK(fs::exists(root / "table.csv"));

  opt.seeds = {0, 1};
  const Table seeded = table(opt);
  CHECK(std::find(seeded.missing.begin(), seeded.missing.end(), "heat_box/holomorphic/seed1") != seeded.missing.end());
  fs::remove_all(root);
}

TEST_CASE("incompatible pairings are rejected before training") {
  RunConfig cfg;
  cfg.epochs = 1;
  CHECK_THROWS_AS(run("pipe3d", Method::holomorphic, 0, cfg), IncompatibleError);
  CHECK_THROWS_AS(run("electrostatics", Method::qholomorphic, 0, cfg), IncompatibleError);
  CHECK_THROWS_AS(run("heat_box", Method::xpinn, 0, cfg), IncompatibleError);
}

TEST_CASE("a short run writes a reproducible bundle") {
  const fs::path root = fresh_dir("harmonia_run_test");
  RunConfig cfg;
  cfg.epochs = 20;
  cfg.eval_n = 32;
  cfg.out_dir = (root / "a").string();
  const RunResult a = run("heat_box", Method::holomorphic, 3, cfg);
  cfg.out_dir = (root / "b").string();
  const RunResult b = run("heat_box", Method::holomorphic, 3, cfg);
  CHECK(a.trace.front().loss == a.initial_loss);
  CHECK(a.eval_points > 0);
  CHECK(std::isfinite(a.metrics.rmse));
  const fs::path da = run_dir((root / "a").string(), "heat_box", Method::holomorphic, 3);
  const fs::path db = run_dir((root / "b").string(), "heat_box", Method::holomorphic, 3);
  for (const char* f : {"config.json", "field.csv", "fieldgrid.txt", "metrics.csv", "losstrace.csv", "params.bin"}) {
    INFO(f);
    REQUIRE(fs::exists(da / f));
  }
  for (const char* f : {"field.csv", "metrics.csv", "losstrace.csv", "params.bin"}) {
    INFO(f);
    CHECK(slurp(da / f) == slurp(db / f));
  }
  CHECK(a.metrics.rmse == b.metrics.rmse);
  fs::remove_all(root);
}
