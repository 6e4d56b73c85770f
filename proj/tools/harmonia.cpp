// harmonia: run benchmark scenarios, tabulate results, solve reference
// fields and run the invariant suites.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "harmonia/bench.hpp"
#include "harmonia/checks.hpp"
#include "harmonia/error.hpp"
#include "harmonia/oracle.hpp"
#include "harmonia/scenario.hpp"

namespace {

constexpr int kExitIncompatible = 2;
constexpr int kExitDivergence = 3;

std::vector<std::string> method_names() {
  std::vector<std::string> v;
  for (auto m : harmonia::all_methods()) v.emplace_back(harmonia::to_string(m));
  return v;
}

std::vector<std::string> scenario_names() {
  const auto ids = harmonia::scenario_ids();
  return {ids.begin(), ids.end()};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"harmonia: harmonic-function networks and their benchmarks"};
  app.require_subcommand(1);

  // run
  auto* run = app.add_subcommand("run", "train one scenario/method/seed and write its output bundle");
  std::string scenario, method;
  std::uint64_t seed = 0;
  bool fast = false, paper = false;
  harmonia::RunConfig rc;
  std::string out = "runs";
  run->add_option("--scenario", scenario, "scenario id")->required()->check(CLI::IsMember(scenario_names()));
  run->add_option("--method", method, "method id")->required()->check(CLI::IsMember(method_names()));
  run->add_option("--seed", seed, "initialization seed");
  auto* fast_flag = run->add_flag("--fast", fast, "4000 epochs, desk-scale grids (default)");
  run->add_flag("--paper", paper, "16000 epochs, paper grids")->excludes(fast_flag);
  run->add_option("--epochs", rc.epochs, "override the preset epoch count")->check(CLI::PositiveNumber);
  run->add_option("--lr", rc.lr, "override the learning rate")->check(CLI::PositiveNumber);
  run->add_option("--eval-n", rc.eval_n, "evaluation grid cells per axis")->check(CLI::PositiveNumber);
  run->add_option("--hpinn-k", rc.model.hpinn_k, "hPINN blend sharpness")->check(CLI::PositiveNumber);
  run->add_option("--out", out, "output root");

  // table
  auto* tab = app.add_subcommand("table", "aggregate run bundles into mean +- std tables");
  harmonia::TableOptions to;
  std::vector<std::string> t_scen, t_meth;
  to.out_dir = "runs";
  tab->add_option("--out", to.out_dir, "output root holding the run bundles");
  tab->add_flag("--scale100", to.scale100, "print values multiplied by 100");
  tab->add_option("--scenario", t_scen, "restrict to scenarios")->check(CLI::IsMember(scenario_names()));
  tab->add_option("--method", t_meth, "restrict to methods")->check(CLI::IsMember(method_names()));
  tab->add_option("--seed", to.seeds, "expected seeds; absent bundles are listed as missing");

  // oracle
  auto* orc = app.add_subcommand("oracle", "solve a scenario's reference field on a grid");
  orc->set_help_flag("--help", "print this help message and exit");
  std::string o_scen, o_out = "oracle";
  double o_h = 0.0, o_tol = 1e-10, o_omega = 0.0;
  orc->add_option("--scenario", o_scen, "scenario id")->required()->check(CLI::IsMember(scenario_names()));
  orc->add_option("--h", o_h, "grid spacing (default: the scenario's)")->check(CLI::PositiveNumber);
  orc->add_option("--tol", o_tol, "SOR max-update tolerance")->check(CLI::PositiveNumber);
  orc->add_option("--omega", o_omega, "SOR relaxation (default: optimal for the grid)")->check(CLI::Range(0.0, 2.0));
  orc->add_option("--out", o_out, "output directory");

  // check
  auto* chk = app.add_subcommand("check", "run the invariant suites");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) {
      rc.preset = paper ? harmonia::Preset::paper : harmonia::Preset::fast;
      rc.out_dir = out;
      const auto m = harmonia::parse_method(method);
      const auto r = harmonia::run(scenario, m, seed, rc);
      std::cout << harmonia::metrics_csv(r);
      std::cerr << "wall " << r.wall_seconds << " s, bundle "
                << harmonia::run_dir(out, scenario, m, seed) << '\n';
      for (const auto& p : r.paths) {
        std::cerr << "path from (" << p.start[0] << ", " << p.start[1] << "): " << harmonia::to_string(p.status)
                  << " at (" << p.points.back()[0] << ", " << p.points.back()[1] << ")\n";
      }
      return 0;
    }
    if (*tab) {
      for (const auto& s : t_scen) to.scenarios.push_back(s);
      for (const auto& m : t_meth) to.methods.push_back(harmonia::parse_method(m));
      const auto t = harmonia::table(to);
      std::cout << t.console;
      return 0;
    }
    if (*orc) {
      harmonia::Scenario s = harmonia::make_scenario(o_scen);
      if (s.oracle.kind == harmonia::OracleSpec::Kind::analytic_box && o_h == 0.0) o_h = 1.0 / 128;
      if (o_h == 0.0) o_h = s.oracle.h;
      harmonia::SorOptions so;
      so.tol = o_tol;
      const auto lo = s.domain.lo(), hi = s.domain.hi();
      double extent = 0.0;
      for (int a = 0; a < s.dim; ++a) extent = std::max(extent, hi[static_cast<std::size_t>(a)] - lo[static_cast<std::size_t>(a)]);
      so.omega = o_omega > 0.0 ? o_omega : harmonia::optimal_omega(static_cast<int>(std::lround(extent / o_h)));
      if (s.dielectric) so.permittivity = [&s](const harmonia::Pt& p) { return s.permittivity(p); };
      harmonia::SorReport rep;
      const auto g = harmonia::fd_laplace_solve(s.domain, s.boundary, o_h, so, &rep);
      std::filesystem::create_directories(o_out);
      const auto base = (std::filesystem::path(o_out) / o_scen).string();
      harmonia::write_grid_csv(g, base + "_fd.csv");
      harmonia::write_grid_text(g, base + "_fd.txt");
      std::cout << "scenario,h,omega,iterations,max_update,residual\n"
                << o_scen << ',' << harmonia::fmt17(o_h) << ',' << harmonia::fmt17(so.omega) << ','
                << rep.iterations << ',' << harmonia::fmt17(rep.max_update) << ',' << harmonia::fmt17(rep.residual)
                << '\n';
      return 0;
    }
    if (*chk) {
      bool ok = true;
      for (const auto& c : harmonia::run_checks()) {
        std::printf("%s %-28s worst %.3e limit %.1e  %s\n", c.passed ? "PASS" : "FAIL", c.name.c_str(), c.value,
                    c.limit, c.detail.c_str());
        ok = ok && c.passed;
      }
      return ok ? 0 : 1;
    }
  } catch (const harmonia::IncompatibleError& e) {
    std::cerr << "incompatible: " << e.what() << '\n';
    return kExitIncompatible;
  } catch (const harmonia::DivergenceError& e) {
    std::cerr << "diverged at epoch " << e.index() << ": " << e.what() << '\n';
    return kExitDivergence;
  } catch (const harmonia::NonFiniteError& e) {
    std::cerr << "non-finite value: " << e.what() << '\n';
    return kExitDivergence;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
