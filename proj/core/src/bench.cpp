#include "harmonia/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <memory>
#include <mutex>
#include <set>
#include <sstream>

#include "harmonia/error.hpp"
#include "harmonia/rng.hpp"
#include "json.hpp"

namespace harmonia {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

int RunConfig::resolved_epochs() const {
  if (epochs > 0) return epochs;
  return preset == Preset::paper ? 16000 : 4000;
}

double RunConfig::resolved_lr(Method m) const {
  if (lr > 0.0) return lr;
  return m == Method::qholomorphic ? 0.05 : 1e-3;
}

const char* to_string(PathStatus s) {
  switch (s) {
    case PathStatus::reached: return "reached";
    case PathStatus::exited: return "exited";
    case PathStatus::max_steps: return "max_steps";
    case PathStatus::stationary: return "stationary";
  }
  return "?";
}

RobotPath robot_path(const std::function<std::array<double, 2>(const Pt&)>& gradient, const Domain& domain,
                     const Pt& start, const PathOptions& opts) {
  if (!(opts.step > 0.0)) throw Error("robot_path: step must be positive");
  if (!domain.contains_closed(start)) throw Error("robot_path: start lies outside the domain");
  RobotPath path;
  path.start = start;
  path.points.push_back(start);
  Pt p = start;
  for (int n = 0; n < opts.max_steps; ++n) {
    if (p[1] >= 1.0 - opts.step) {
      path.status = PathStatus::reached;
      return path;
    }
    const auto g = gradient(p);
    const double norm = std::hypot(g[0], g[1]);
    if (!std::isfinite(norm)) throw NonFiniteError("robot_path: non-finite gradient", n);
    if (norm < 1e-10) {
      path.status = PathStatus::stationary;
      return path;
    }
    const double dx = opts.step * g[0] / norm;
    const double dy = opts.step * g[1] / norm;
    Pt q{p[0] + dx, p[1] + dy, 0.0};
    if (!domain.contains_closed(q)) {
      // Slide along the wall: keep the larger axis component first.
      // A slide only counts if it moves.
      Pt qx{p[0] + dx, p[1], 0.0};
      Pt qy{p[0], p[1] + dy, 0.0};
      bool mx = dx != 0.0, my = dy != 0.0;
      if (std::abs(dy) > std::abs(dx)) {
        std::swap(qx, qy);
        std::swap(mx, my);
      }
      if (mx && domain.contains_closed(qx)) {
        q = qx;
      } else if (my && domain.contains_closed(qy)) {
        q = qy;
      } else {
        path.status = PathStatus::exited;
        return path;
      }
    }
    p = q;
    path.points.push_back(p);
  }
  path.status = p[1] >= 1.0 - opts.step ? PathStatus::reached : PathStatus::max_steps;
  return path;
}

const Oracle& cached_oracle(const Scenario& s, Preset preset) {
  static std::mutex mu;
  static std::map<std::string, std::unique_ptr<Oracle>> cache;
  const std::string key = s.id + "/" + to_string(preset);
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(key);
  if (it == cache.end()) it = cache.emplace(key, std::make_unique<Oracle>(build_oracle(s))).first;
  return *it->second;
}

std::string run_dir(const std::string& root, const std::string& scenario, Method method, std::uint64_t seed) {
  return (fs::path(root) / scenario / to_string(method) / ("seed" + std::to_string(seed))).string();
}

std::string metrics_csv(const RunResult& r) {
  std::ostringstream o;
  o << "scenario,method,seed,rmse,paper_mae,mean_abs_laplacian,initial_loss,final_loss,interface_jump,eval_points\n";
  o << r.scenario << ',' << to_string(r.method) << ',' << r.seed << ',' << fmt17(r.metrics.rmse) << ','
    << fmt17(r.metrics.paper_mae) << ',' << fmt17(r.metrics.mean_abs_laplacian) << ',' << fmt17(r.initial_loss)
    << ',' << fmt17(r.final_loss) << ',' << fmt17(r.interface_jump) << ',' << r.eval_points << '\n';
  return o.str();
}

namespace {

void write_text(const fs::path& path, const std::string& text, std::vector<std::string>& files) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error("cannot write " + path.string());
  f << text;
  if (!f) throw Error("write failed: " + path.string());
  files.push_back(path.string());
}

std::string trace_csv(const std::vector<TracePoint>& trace) {
  std::ostringstream o;
  o << "epoch,loss\n";
  for (const auto& t : trace) o << t.epoch << ',' << fmt17(t.loss) << '\n';
  return o.str();
}

json point_json(const Pt& p, int dim) {
  json a = json::array();
  for (int i = 0; i < dim; ++i) a.push_back(p[static_cast<std::size_t>(i)]);
  return a;
}

json scenario_json(const Scenario& s) {
  json j;
  j["id"] = s.id;
  j["dim"] = s.dim;
  j["domain_lo"] = point_json(s.domain.lo(), s.dim);
  j["domain_hi"] = point_json(s.domain.hi(), s.dim);
  if (!s.domain.poly().empty()) {
    json hole = json::array();
    for (const auto& v : s.domain.poly()) hole.push_back(point_json(v, 2));
    j["hole"] = hole;
  }
  if (s.domain.rects().size() > 1) {
    json rs = json::array();
    for (const auto& r : s.domain.rects()) rs.push_back({r.x0, r.y0, r.x1, r.y1});
    j["rects"] = rs;
  }
  json bs = json::array();
  for (const auto& b : s.boundary) {
    json e;
    e["name"] = b.name;
    e["kind"] = b.kind == BoundaryKind::dirichlet ? "dirichlet" : "insulated";
    if (b.shape == BoundarySegment::Shape::face) {
      e["axis"] = b.axis;
      e["coord"] = b.a[static_cast<std::size_t>(b.axis)];
    } else {
      e["a"] = point_json(b.a, 2);
      e["b"] = point_json(b.b, 2);
    }
    if (b.kind == BoundaryKind::dirichlet) e["value"] = b.value;
    bs.push_back(e);
  }
  j["boundary"] = bs;
  if (s.decomposition) j["subdomains"] = s.decomposition->subdomains.size();
  if (s.dielectric) {
    j["eps1"] = s.eps1;
    j["eps2"] = s.eps2;
    j["material_interface_y"] = s.material_interface->segment.a[1];
  }
  json o;
  if (s.oracle.kind == OracleSpec::Kind::analytic_box) {
    o["kind"] = "analytic_box";
  } else {
    o["kind"] = "finite_difference";
    o["h"] = s.oracle.h;
    o["tol"] = s.oracle.tol;
  }
  j["oracle"] = o;
  j["eval_n"] = s.eval_n;
  if (s.eval_min_x > -1e299) j["eval_min_x"] = s.eval_min_x;
  return j;
}

template <int D>
double interface_jump(const Model<D>& m, std::span<const double> params) {
  if (m.plan.interface.empty()) return 0.0;
  std::vector<UnitQuery<D>> q;
  for (const auto& s : m.plan.interface) {
    q.push_back({s.first, s.x});
    q.push_back({s.second, s.x});
  }
  auto ws = m.net->batch_workspace();
  std::vector<UnitOutput<D>> out;
  m.net->eval_queries(params, q, 0, ws, out);
  double worst = 0.0;
  for (std::size_t i = 0; i < out.size(); i += 2) worst = std::max(worst, std::abs(out[i].phi.v - out[i + 1].phi.v));
  return worst;
}

template <int D>
RunResult run_impl(const Scenario& s, Method method, std::uint64_t seed, const RunConfig& cfg, const Oracle& oracle) {
  const auto t0 = std::chrono::steady_clock::now();
  Model<D> model = build_model<D>(s, method, cfg.model);
  const PiecewiseNet<D>& net = *model.net;

  TrainConfig tc;
  tc.epochs = cfg.resolved_epochs();
  tc.lr = cfg.resolved_lr(method);
  tc.seed = seed;
  tc.trace_limit = cfg.trace_limit;

  Rng rng(seed);
  std::vector<double> params0 = net.init(rng);
  LossEvaluator<D> loss(net, model.plan, model.terms, model.field_mode);
  const Objective objective = [&](std::span<const double> p, std::vector<double>& g) {
    return loss.evaluate(p, &g).total;
  };

  RunResult r;
  r.scenario = s.id;
  r.method = method;
  r.seed = seed;

  fs::path dir;
  if (!cfg.out_dir.empty()) {
    dir = run_dir(cfg.out_dir, s.id, method, seed);
    fs::create_directories(dir);
  }

  json config;
  config["scenario"] = scenario_json(s);
  config["method"] = to_string(method);
  config["seed"] = seed;
  config["preset"] = to_string(cfg.preset);
  config["terms"] = model.terms;
  config["field_mode"] = model.field_mode == FieldMode::curl ? "curl" : "gradient";
  config["units"] = net.regions();
  config["parameters"] = net.param_count();
  config["notes"] = model.notes;
  config["train"] = {{"optimizer", "adam"}, {"epochs", tc.epochs},  {"lr", tc.lr},
                     {"beta1", tc.beta1},   {"beta2", tc.beta2},    {"eps", tc.eps},
                     {"full_batch", true},  {"init_seed", seed}};
  config["samples"] = {{"dirichlet", model.plan.dirichlet.size()},
                       {"insulated", model.plan.insulated.size()},
                       {"collocation", model.plan.collocation.size()},
                       {"interface", model.plan.interface.size()},
                       {"dielectric", model.plan.dielectric.size()}};
  const auto& ms = cfg.model.real_spec;
  config["network"] = {{"hidden_layers", ms.hidden_layers},
                       {"width", ms.width},
                       {"real_activation", "tanh"},
                       {"complex_activation", "sin"},
                       {"init", "kaiming_uniform"},
                       {"hpinn_k", cfg.model.hpinn_k}};
  if (method == Method::qholomorphic) {
    config["quantum"] = {{"qubits", cfg.model.qubits},
                         {"depth", cfg.model.depth},
                         {"feature_map", "exp(-(x+iy) pi H)"},
                         {"angle_gradient", "central differences"}};
  }

  TrainReport report;
  try {
    report = train(std::move(params0), objective, tc);
  } catch (const DivergenceError& e) {
    if (!dir.empty()) {
      config["status"] = "diverged";
      config["diverged_at_epoch"] = e.index();
      write_text(dir / "losstrace.csv", trace_csv(e.partial().trace), r.files);
      write_text(dir / "config.json", config.dump(2) + "\n", r.files);
    }
    throw;
  }
  r.initial_loss = report.initial_loss;
  r.trace = report.trace;
  r.final_loss = report.final_loss;
  const std::span<const double> params = report.params;

  std::vector<std::size_t> idx;
  const std::vector<Pt> pts = eval_points(s, oracle, &idx);
  const std::vector<Jet<D>> jets = field_jets<D>(net, params, pts, 2);
  std::vector<double> value(pts.size()), truth(pts.size()), lap(pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i) {
    value[i] = jets[i].v;
    truth[i] = oracle.value(pts[i]);
    double l = 0.0;
    for (int k = 0; k < D; ++k) l += jets[i].h[static_cast<std::size_t>(k * D + k)];
    lap[i] = l;
    if (!std::isfinite(value[i]) || !std::isfinite(lap[i])) {
      throw NonFiniteError("run: non-finite field at an evaluation point", static_cast<std::ptrdiff_t>(i));
    }
  }
  r.metrics = metrics(value, truth, lap);
  r.eval_points = pts.size();
  r.interface_jump = interface_jump(model, params);

  if constexpr (D == 2) {
    if (!s.path_starts.empty()) {
      auto ws = net.workspace();
      const auto grad = [&](const Pt& p) {
        const auto o = net.eval(params, to_point<2>(p), 1, ws);
        return std::array<double, 2>{o.field[0], o.field[1]};
      };
      for (const Pt& start : s.path_starts) r.paths.push_back(robot_path(grad, s.domain, start));
    }
  }
  r.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  if (dir.empty()) return r;

  FieldGrid grid = eval_grid_layout(s);
  {
    std::ostringstream o;
    o << (D == 3 ? "x,y,z" : "x,y") << ",value,oracle,laplacian\n";
    for (std::size_t i = 0; i < pts.size(); ++i) {
      for (int k = 0; k < D; ++k) o << fmt17(pts[i][static_cast<std::size_t>(k)]) << ',';
      o << fmt17(value[i]) << ',' << fmt17(truth[i]) << ',' << fmt17(lap[i]) << '\n';
      grid.values[idx[i]] = value[i];
      grid.mask[idx[i]] = 1;
    }
    write_text(dir / "field.csv", o.str(), r.files);
  }
  write_grid_text(grid, (dir / "fieldgrid.txt").string());
  r.files.push_back((dir / "fieldgrid.txt").string());
  write_text(dir / "metrics.csv", metrics_csv(r), r.files);
  write_text(dir / "losstrace.csv", trace_csv(report.trace), r.files);
  save_params((dir / "params.bin").string(), model.param_kind, params);
  r.files.push_back((dir / "params.bin").string());

  if (!r.paths.empty()) {
    std::ostringstream o;
    o << "path,start_x,start_y,step,x,y,status\n";
    json summary = json::array();
    for (std::size_t k = 0; k < r.paths.size(); ++k) {
      const auto& p = r.paths[k];
      for (std::size_t n = 0; n < p.points.size(); ++n) {
        o << k << ',' << fmt17(p.start[0]) << ',' << fmt17(p.start[1]) << ',' << n << ','
          << fmt17(p.points[n][0]) << ',' << fmt17(p.points[n][1]) << ',' << to_string(p.status) << '\n';
      }
      summary.push_back({{"start", point_json(p.start, 2)},
                         {"end", point_json(p.points.back(), 2)},
                         {"steps", p.points.size() - 1},
                         {"status", to_string(p.status)}});
    }
    write_text(dir / "paths.csv", o.str(), r.files);
    config["paths"] = summary;
  }

  config["status"] = "ok";
  config["metrics"] = {{"rmse", r.metrics.rmse},
                       {"paper_mae", r.metrics.paper_mae},
                       {"mean_abs_laplacian", r.metrics.mean_abs_laplacian},
                       {"interface_jump", r.interface_jump},
                       {"eval_points", r.eval_points}};
  config["initial_loss"] = r.initial_loss;
  config["final_loss"] = r.final_loss;
  config["wall_seconds"] = r.wall_seconds;
  write_text(dir / "config.json", config.dump(2) + "\n", r.files);
  return r;
}

}  // namespace

RunResult run(const std::string& scenario, Method method, std::uint64_t seed, const RunConfig& cfg) {
  Scenario s = make_scenario(scenario, cfg.preset);
  check_compatible(method, s.traits());
  const Oracle& oracle = cached_oracle(s, cfg.preset);
  if (cfg.eval_n > 0) s.eval_n = cfg.eval_n;
  if (s.dim == 3) return run_impl<3>(s, method, seed, cfg, oracle);
  return run_impl<2>(s, method, seed, cfg, oracle);
}

// ---------------------------------------------------------------------------
// Tables
// ---------------------------------------------------------------------------

std::array<double, 2> mean_std(const std::vector<double>& v) {
  if (v.empty()) return {0.0, 0.0};
  double m = 0.0;
  for (double x : v) m += x;
  m /= static_cast<double>(v.size());
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return {m, std::sqrt(s / static_cast<double>(v.size()))};
}

namespace {

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) out.push_back(cell);
  return out;
}

/// rmse, paper_mae, mean_abs_laplacian from a metrics.csv file.
std::array<double, 3> read_metrics(const fs::path& path) {
  std::ifstream f(path);
  std::string header, row;
  if (!std::getline(f, header) || !std::getline(f, row)) throw Error("malformed " + path.string());
  const auto h = split_csv(header);
  const auto v = split_csv(row);
  std::array<double, 3> out{};
  const char* names[] = {"rmse", "paper_mae", "mean_abs_laplacian"};
  for (int k = 0; k < 3; ++k) {
    const auto it = std::find(h.begin(), h.end(), names[k]);
    const auto col = static_cast<std::size_t>(it - h.begin());
    if (it == h.end() || col >= v.size()) throw Error("malformed " + path.string());
    out[static_cast<std::size_t>(k)] = std::stod(v[col]);
  }
  return out;
}

std::string pm(double mean, double sd, double scale) {
  std::ostringstream o;
  o << std::fixed << std::setprecision(scale == 100.0 ? 1 : 4) << mean * scale << " +- " << sd * scale;
  return o.str();
}

}  // namespace

Table table(const TableOptions& opts) {
  if (opts.out_dir.empty()) throw Error("table: output directory required");
  std::vector<std::string> scenarios = opts.scenarios;
  if (scenarios.empty()) scenarios.assign(scenario_ids().begin(), scenario_ids().end());
  std::vector<Method> methods = opts.methods;
  if (methods.empty()) methods.assign(all_methods().begin(), all_methods().end());

  Table t;
  for (const auto& sid : scenarios) {
    const ProblemTraits traits = make_scenario(sid).traits();
    for (Method m : methods) {
      try {
        check_compatible(m, traits);
      } catch (const IncompatibleError&) {
        continue;
      }
      std::set<std::uint64_t> seeds(opts.seeds.begin(), opts.seeds.end());
      const fs::path mdir = fs::path(opts.out_dir) / sid / to_string(m);
      if (opts.seeds.empty() && fs::is_directory(mdir)) {
        for (const auto& e : fs::directory_iterator(mdir)) {
          const std::string name = e.path().filename().string();
          if (name.rfind("seed", 0) == 0 && fs::exists(e.path() / "metrics.csv")) {
            seeds.insert(std::stoull(name.substr(4)));
          }
        }
      }
      std::array<std::vector<double>, 3> cols;
      for (std::uint64_t seed : seeds) {
        const fs::path f = fs::path(run_dir(opts.out_dir, sid, m, seed)) / "metrics.csv";
        if (!fs::exists(f)) {
          t.missing.push_back(sid + "/" + to_string(m) + "/seed" + std::to_string(seed));
          continue;
        }
        const auto v = read_metrics(f);
        for (std::size_t k = 0; k < 3; ++k) cols[k].push_back(v[k]);
      }
      if (cols[0].empty()) {
        if (opts.seeds.empty()) t.missing.push_back(sid + "/" + to_string(m));
        continue;
      }
      TableCell c;
      c.scenario = sid;
      c.method = m;
      c.runs = cols[0].size();
      for (std::size_t k = 0; k < 3; ++k) {
        const auto ms = mean_std(cols[k]);
        c.mean[k] = ms[0];
        c.stddev[k] = ms[1];
      }
      t.cells.push_back(c);
    }
  }

  std::ostringstream csv;
  csv << "scenario,method,runs,rmse_mean,rmse_std,paper_mae_mean,paper_mae_std,mean_abs_laplacian_mean,"
         "mean_abs_laplacian_std\n";
  for (const auto& c : t.cells) {
    csv << c.scenario << ',' << to_string(c.method) << ',' << c.runs;
    for (std::size_t k = 0; k < 3; ++k) csv << ',' << fmt17(c.mean[k]) << ',' << fmt17(c.stddev[k]);
    csv << '\n';
  }
  t.csv = csv.str();

  const double scale = opts.scale100 ? 100.0 : 1.0;
  std::ostringstream con;
  con << std::left << std::setw(16) << "scenario" << std::setw(18) << "method" << std::setw(6) << "runs"
      << std::setw(24) << "rmse" << std::setw(24) << "paper_mae" << "mean_abs_laplacian\n";
  for (const auto& c : t.cells) {
    con << std::left << std::setw(16) << c.scenario << std::setw(18) << to_string(c.method) << std::setw(6) << c.runs
        << std::setw(24) << pm(c.mean[0], c.stddev[0], scale) << std::setw(24) << pm(c.mean[1], c.stddev[1], scale)
        << pm(c.mean[2], c.stddev[2], scale) << '\n';
  }
  con << "mean +- population std (n divisor) over seeds";
  if (opts.scale100) con << "; values x100";
  con << '\n';
  for (const auto& m : t.missing) con << "missing: " << m << '\n';
  t.console = con.str();

  fs::create_directories(opts.out_dir);
  std::ofstream f(fs::path(opts.out_dir) / "table.csv", std::ios::binary);
  if (!f) throw Error("cannot write table.csv");
  f << t.csv;
  return t;
}

}  // namespace harmonia
