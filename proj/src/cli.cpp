#include "nsasd/cli.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <sstream>

#include "nsasd/einstein_weyl.hpp"
#include "nsasd/topology.hpp"
#include "nsasd/xray.hpp"
#include "nsasd/zoo.hpp"

namespace nsasd {

namespace {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string trim(const std::string& s) {
  size_t a = s.find_first_not_of(" \t\r\n");
  size_t b = s.find_last_not_of(" \t\r\n");
  return a == std::string::npos ? "" : s.substr(a, b - a + 1);
}

Box parse_box(const std::string& text) {
  // "lo:hi,lo:hi,..." per coordinate
  Box box;
  std::stringstream ss(text);
  std::string part;
  while (std::getline(ss, part, ',')) {
    const auto colon = part.find(':');
    if (colon == std::string::npos) throw UsageError("box wants lo:hi pairs");
    box.lo.push_back(std::stod(part.substr(0, colon)));
    box.hi.push_back(std::stod(part.substr(colon + 1)));
  }
  if (box.dim() == 0) throw UsageError("empty box");
  return box;
}

void emit(std::ostream& os, const ResidualReport& rep) { os << rep.json_line() << "\n"; }

int reports_exit(std::ostream& os, std::span<const ResidualReport> reps) {
  for (const auto& r : reps) emit(os, r);
  return all_pass(reps) ? 0 : 1;
}

ZooEntry entry_from_config(const RunConfig& cfg) {
  const EntrySpec* spec = find_entry_spec(cfg.entry);
  if (!spec) throw UsageError("unknown zoo entry '" + cfg.entry + "'");
  for (const auto& [k, v] : cfg.overrides) {
    bool known = false;
    for (const auto& [pname, vars] : spec->params) known = known || pname == k;
    if (!known) throw UsageError("entry '" + cfg.entry + "' has no parameter '" + k + "'");
    (void)v;
  }
  ZooEntry e = make_entry(*spec, cfg.overrides);
  if (cfg.box) {
    if (cfg.box->dim() != e.metric.dim) throw UsageError("box dimension mismatch");
    e.metric.box = *cfg.box;
  }
  return e;
}

VerifyOptions verify_options(const RunConfig& cfg) {
  VerifyOptions opt;
  opt.samples = cfg.samples;
  opt.seed = cfg.seed;
  if (auto it = cfg.tolerances.find("asd"); it != cfg.tolerances.end())
    opt.tolAsd = it->second;
  if (auto it = cfg.tolerances.find("ricci"); it != cfg.tolerances.end())
    opt.tolRicci = it->second;
  if (auto it = cfg.tolerances.find("scalar"); it != cfg.tolerances.end())
    opt.tolScalar = it->second;
  if (auto it = cfg.tolerances.find("kahler"); it != cfg.tolerances.end())
    opt.tolKahler = it->second;
  if (auto it = cfg.tolerances.find("killing"); it != cfg.tolerances.end())
    opt.tolKilling = it->second;
  return opt;
}

const EWStructure ew_from_name(const std::string& name) {
  for (const auto& [n, make] : ew_registry())
    if (n == name) return make();
  throw UsageError("unknown Einstein-Weyl structure '" + name + "'");
}

MonopoleData bundled_monopole(const std::string& ewName) {
  MonopoleData m;
  const Expr x = Expr::var(0), y = Expr::var(1), t = Expr::var(2);
  if (ewName == "flat3") {
    m.V = {3, Expr::constant(1.0)};
  } else if (ewName == "toda") {
    const Expr r2 = 1.0 + x * x + y * y;
    m.V = {3, -2.0 * t / (1.0 - t * t)};
    m.eta[0] = {3, -4.0 * y / r2};
    m.eta[1] = {3, 4.0 * x / r2};
  } else if (ewName == "dkp") {
    m.V = {3, -1.0 / t};
    m.eta[1] = {3, 1.0 / t};
  } else {
    throw UsageError("no bundled monopole for '" + ewName + "'");
  }
  return m;
}

int cmd_verify(const RunConfig& cfg, std::ostream& out) {
  ZooEntry e = entry_from_config(cfg);
  auto reports = verify_entry(e, verify_options(cfg));
  return reports_exit(out, reports);
}

int cmd_zoo(const RunConfig& cfg, std::ostream& out) {
  if (cfg.zooAction == "list") {
    for (const auto& spec : zoo_registry()) {
      out << spec.name;
      for (const auto& [p, vars] : spec.params) out << " " << p;
      out << "\n";
    }
    return 0;
  }
  if (cfg.zooAction == "eval") {
    ZooEntry e = entry_from_config(cfg);
    auto samples = sample_box(e.metric.box, cfg.samples, cfg.seed, e.metric.excluded);
    std::vector<ResidualReport> reps;
    for (const auto& gov : e.governing) {
      ResidualReport rep;
      rep.name = e.name + "/" + gov.name;
      rep.tolerance = gov.tolerance;
      for (const auto& p : samples) rep.absorb(gov.eval(p));
      reps.push_back(rep);
    }
    for (const auto& sr : e.sampleResiduals) {
      ResidualReport rep = sr.run(samples);
      rep.name = e.name + "/" + rep.name;
      reps.push_back(rep);
    }
    return reports_exit(out, reps);
  }
  throw UsageError("zoo wants 'list' or 'eval <entry>'");
}

int cmd_lax(const RunConfig& cfg, std::ostream& out) {
  ZooEntry e = entry_from_config(cfg);
  if (!e.frame) throw UsageError("entry '" + cfg.entry + "' carries no tetrad");
  auto samples = sample_box(e.metric.box, cfg.samples, cfg.seed, e.metric.excluded);
  const auto lambdas = default_lambdas(cfg.seed);
  double tol = 1e-8;
  if (auto it = cfg.tolerances.find("lax"); it != cfg.tolerances.end()) tol = it->second;
  std::vector<ResidualReport> reps;
  reps.push_back(lax_integrability(*e.frame, samples, lambdas, tol, e.name + "/lax"));
  reps.push_back(asd_residual(e.metric, samples, tol, e.name + "/asd"));
  return reports_exit(out, reps);
}

int cmd_petrov(const RunConfig& cfg, std::ostream& out) {
  ZooEntry e = entry_from_config(cfg);
  if (!e.frame) throw UsageError("entry '" + cfg.entry + "' carries no tetrad");
  auto samples = sample_box(e.metric.box, std::max(1, std::min(cfg.samples, 5)), cfg.seed,
                            e.metric.excluded);
  int exit = 0;
  for (const auto& p : samples) {
    WeylQuartic q = petrov_classify(e.metric, *e.frame, p);
    char buf[256];
    std::snprintf(buf, sizeof(buf),
                  "{\"name\":\"%s/petrov\",\"type\":\"%s\",\"allRootsReal\":%s}",
                  e.name.c_str(), petrov_name(q.petrovType).c_str(),
                  q.allRootsReal ? "true" : "false");
    out << buf << "\n";
    if (e.expected.petrov && q.petrovType != *e.expected.petrov) exit = 1;
  }
  return exit;
}

int cmd_reduce(const RunConfig& cfg, std::ostream& out) {
  ZooEntry e = entry_from_config(cfg);
  if (!e.killing || e.killing->isNull)
    throw UsageError("entry '" + cfg.entry +
                     "' has no non-null Killing vector; the null case is covered by the "
                     "canonical-form entries");
  ReducedEW red = jones_tod_reduce(e.metric);
  Box b3{{e.metric.box.lo[0], e.metric.box.lo[1], e.metric.box.lo[2]},
         {e.metric.box.hi[0], e.metric.box.hi[1], e.metric.box.hi[2]}};
  double tol = 1e-7;
  if (auto it = cfg.tolerances.find("ew"); it != cfg.tolerances.end()) tol = it->second;
  auto rep = ew_residual(red.ew, sample_box(b3, cfg.samples, cfg.seed), tol,
                         e.name + "/reduce-ew");
  std::vector<ResidualReport> reps = {rep};
  return reports_exit(out, reps);
}

int cmd_lift(const RunConfig& cfg, std::ostream& out) {
  EWStructure ew = ew_from_name(cfg.entry);
  MonopoleData m = bundled_monopole(cfg.entry);
  auto pts3 = sample_box(ew.h.box, cfg.samples, cfg.seed);
  std::vector<ResidualReport> reps;
  reps.push_back(ew_residual(ew, pts3, 1e-8, cfg.entry + "/ew"));
  reps.push_back(monopole_residual(ew, m, pts3, 1e-8, cfg.entry + "/monopole"));
  MetricField g = jones_tod_lift(ew, m);
  auto pts4 = sample_box(g.box, cfg.samples, cfg.seed);
  reps.push_back(asd_residual(g, pts4, 1e-8, cfg.entry + "/lift-asd"));
  return reports_exit(out, reps);
}

int cmd_solve_monopole(const RunConfig& cfg, std::ostream& out) {
  EWStructure ew = ew_from_name(cfg.entry);
  MonopoleData special = bundled_monopole(cfg.entry);
  // shrink the chart slightly so boundary data stays admissible
  Box b = ew.h.box;
  for (int i = 0; i < 3; ++i) {
    const double c = 0.5 * (b.lo[i] + b.hi[i]), r = 0.4 * (b.hi[i] - b.lo[i]);
    b.lo[i] = c - r;
    b.hi[i] = c + r;
  }
  GridSpec grid{b, cfg.gridN};
  auto sol = monopole_solve_linear(
      ew, grid, [&](std::span<const double> p) { return field_value(special.V, p); });
  double rms = 0;
  int cnt = 0;
  for (int i = 1; i < grid.n - 1; ++i)
    for (int j = 1; j < grid.n - 1; ++j)
      for (int k = 1; k < grid.n - 1; ++k) {
        auto p = grid.node(i, j, k);
        const double d = sol.at(i, j, k) - field_value(special.V, p);
        rms += d * d;
        ++cnt;
      }
  rms = std::sqrt(rms / cnt);
  ResidualReport rep;
  rep.name = cfg.entry + "/monopole-grid-rms";
  rep.tolerance = 1e-2;
  rep.samplePoints = cnt;
  rep.maxAbs = rms;
  if (!cfg.csvPath.empty()) {
    std::ofstream csv(cfg.csvPath);
    export_grid_csv(sol, csv);
  }
  std::vector<ResidualReport> reps = {rep};
  return reports_exit(out, reps);
}

int cmd_xray(const RunConfig& cfg, std::ostream& out) {
  Integrand3D f;
  const Expr x = Expr::var(0), y = Expr::var(1), z = Expr::var(2);
  std::string fname = "gaussian";
  if (auto it = cfg.overrides.find("f"); it != cfg.overrides.end()) fname = it->second;
  if (fname == "gaussian") {
    f.f = {3, expr_exp(-1.0 * (x * x + y * y + z * z))};
    f.decayRadius = 6;
    f.tailBound = 1e-14;
  } else {
    f.f = parse_field(fname, {"x", "y", "z"});
    f.decayRadius = 6;
    f.tailBound = 1e-10;
  }
  std::vector<LineParam> lines;
  if (!cfg.linesCsv.empty()) {
    std::ifstream in(cfg.linesCsv);
    if (!in) throw UsageError("cannot open lines file '" + cfg.linesCsv + "'");
    std::string lineTxt;
    while (std::getline(in, lineTxt)) {
      lineTxt = trim(lineTxt);
      if (lineTxt.empty() || lineTxt[0] == '#' || lineTxt[0] == 'x') continue;
      LineParam L;
      if (std::sscanf(lineTxt.c_str(), "%lf,%lf,%lf,%lf", &L.x, &L.y, &L.w, &L.z) == 4)
        lines.push_back(L);
    }
  } else {
    lines = sample_lines(cfg.samples, 0.8, cfg.seed);
  }
  double tol = 1e-4;
  if (auto it = cfg.tolerances.find("uhwave"); it != cfg.tolerances.end()) tol = it->second;

  auto psi = [&](const LineParam& L) { return john_transform(f, L).value; };
  std::ostringstream csv;
  csv << "x,y,w,z,psi,residual\n";
  ResidualReport rep;
  rep.name = "xray/uhwave";
  rep.tolerance = tol;
  for (const auto& L : lines) {
    std::span<const LineParam> one(&L, 1);
    ResidualReport r1 = uhwave_residual(psi, one, cfg.fdStep, tol);
    char buf[256];
    std::snprintf(buf, sizeof(buf), "%.12g,%.12g,%.12g,%.12g,%.12g,%.12g\n", L.x, L.y,
                  L.w, L.z, psi(L), r1.maxAbs);
    csv << buf;
    rep.absorb(r1.maxAbs);
  }
  if (!cfg.csvPath.empty()) {
    std::ofstream o(cfg.csvPath);
    o << csv.str();
  } else {
    out << csv.str();
  }
  emit(out, rep);
  return rep.pass() ? 0 : 1;
}

int cmd_topology(const RunConfig& cfg, std::ostream& out) {
  const FourManifoldTopology* t = find_manifold(cfg.entry);
  if (!t) throw UsageError("unknown manifold '" + cfg.entry + "'");
  const bool at = atiyah_check(t->euler, t->signature);
  const PlaneFieldVerdict hh = hirzebruch_hopf_check(*t, cfg.radius);
  char buf[256];
  std::snprintf(buf, sizeof(buf), "%-8s chi=%-4d tau=%-4d atiyah=%-5s hirzebruch-hopf=%s\n",
                t->name.c_str(), t->euler, t->signature, at ? "true" : "false",
                verdict_name(hh).c_str());
  out << buf;
  if (!at) {
    out << t->name << " fails Atiyah parity\n";
    return 1;
  }
  return hh == PlaneFieldVerdict::Admits ? 0 : 1;
}

}  // namespace

bool apply_option(RunConfig& cfg, const std::string& key, const std::string& value) {
  if (key == "entry" || key == "manifold" || key == "ew") cfg.entry = value;
  else if (key == "samples") cfg.samples = std::stoi(value);
  else if (key == "seed") cfg.seed = static_cast<unsigned>(std::stoul(value));
  else if (key == "box") cfg.box = parse_box(value);
  else if (key == "output") cfg.output = value;
  else if (key == "csv") cfg.csvPath = value;
  else if (key == "lines") cfg.linesCsv = value;
  else if (key == "radius") cfg.radius = std::stoi(value);
  else if (key == "grid") cfg.gridN = std::stoi(value);
  else if (key == "fd-step") cfg.fdStep = std::stod(value);
  else if (key.rfind("tol-", 0) == 0) cfg.tolerances[key.substr(4)] = std::stod(value);
  else if (key == "subcommand") cfg.subcommand = value;
  else if (key == "action") cfg.zooAction = value;
  else if (key == "f") cfg.overrides["f"] = value;
  else if (!key.empty() && (std::isupper(static_cast<unsigned char>(key[0])) ||
                            key == "beta" || key == "u" || key == "w"))
    cfg.overrides[key] = value;  // potential override
  else return false;
  return true;
}

RunConfig parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw EvalError("cannot open config file '" + path + "'");
  RunConfig cfg;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw EvalError("config line " + std::to_string(lineno) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (!apply_option(cfg, key, value))
      throw EvalError("config line " + std::to_string(lineno) + ": unknown key '" + key +
                      "'");
  }
  return cfg;
}

int run(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  std::ofstream fileOut;
  std::ostream* os = &out;
  if (!cfg.output.empty()) {
    fileOut.open(cfg.output);
    if (!fileOut) {
      err << "cannot open output file '" << cfg.output << "'\n";
      return 2;
    }
    os = &fileOut;
  }
  try {
    if (cfg.subcommand == "verify") return cmd_verify(cfg, *os);
    if (cfg.subcommand == "zoo") return cmd_zoo(cfg, *os);
    if (cfg.subcommand == "lax") return cmd_lax(cfg, *os);
    if (cfg.subcommand == "petrov") return cmd_petrov(cfg, *os);
    if (cfg.subcommand == "reduce") return cmd_reduce(cfg, *os);
    if (cfg.subcommand == "lift") return cmd_lift(cfg, *os);
    if (cfg.subcommand == "solve-monopole") return cmd_solve_monopole(cfg, *os);
    if (cfg.subcommand == "xray") return cmd_xray(cfg, *os);
    if (cfg.subcommand == "topology") return cmd_topology(cfg, *os);
    err << "unknown subcommand '" << cfg.subcommand << "'\n";
    return 2;
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  RunConfig cfg;
  std::vector<std::string> args(argv + 1, argv + argc);
  size_t i = 0;
  if (i < args.size() && args[i].rfind("--", 0) != 0) cfg.subcommand = args[i++];
  if (cfg.subcommand == "zoo" && i < args.size() && args[i].rfind("--", 0) != 0) {
    cfg.zooAction = args[i++];
    if (cfg.zooAction == "eval" && i < args.size() && args[i].rfind("--", 0) != 0)
      cfg.entry = args[i++];
  }
  try {
    for (; i < args.size(); ++i) {
      if (args[i].rfind("--", 0) != 0) {
        err << "unexpected argument '" << args[i] << "'\n";
        return 2;
      }
      const std::string key = args[i].substr(2);
      if (key == "config") {
        if (i + 1 >= args.size()) {
          err << "--config wants a path\n";
          return 2;
        }
        RunConfig fromFile = parse_config_file(args[++i]);
        // file settings fill in anything not yet set on the command line
        if (cfg.subcommand.empty()) cfg.subcommand = fromFile.subcommand;
        if (cfg.entry.empty()) cfg.entry = fromFile.entry;
        if (cfg.zooAction.empty()) cfg.zooAction = fromFile.zooAction;
        cfg.samples = fromFile.samples;
        cfg.seed = fromFile.seed;
        if (fromFile.box) cfg.box = fromFile.box;
        for (const auto& [k, v] : fromFile.tolerances) cfg.tolerances[k] = v;
        for (const auto& [k, v] : fromFile.overrides) cfg.overrides[k] = v;
        if (!fromFile.output.empty()) cfg.output = fromFile.output;
        if (!fromFile.csvPath.empty()) cfg.csvPath = fromFile.csvPath;
        if (!fromFile.linesCsv.empty()) cfg.linesCsv = fromFile.linesCsv;
        cfg.radius = fromFile.radius;
        cfg.gridN = fromFile.gridN;
        continue;
      }
      if (i + 1 >= args.size()) {
        err << "flag --" << key << " wants a value\n";
        return 2;
      }
      if (!apply_option(cfg, key, args[++i])) {
        err << "unknown flag --" << key << "\n";
        return 2;
      }
    }
  } catch (const std::exception& e) {
    err << "usage error: " << e.what() << "\n";
    return 2;
  }
  if (cfg.subcommand.empty()) {
    err << "usage: nsasd <verify|lax|reduce|lift|solve-monopole|xray|petrov|topology|zoo>"
           " [--flags]\n";
    return 2;
  }
  return run(cfg, out, err);
}

}  // namespace nsasd
