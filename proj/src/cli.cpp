#include "cabm/cli.hpp"

#include "cabm/json_io.hpp"
#include "cabm/verify.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace cabm {
namespace {

using nlohmann::json;
using Settings = std::vector<std::pair<std::string, std::string>>;

std::string fmt12(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::invalid_argument("cannot open file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

/// Descriptor arguments accept inline JSON, the shorthands understood by the
/// JSON readers, or a path to a file holding the JSON.
std::string descriptorText(const std::string& arg) {
  if (arg.empty()) throw std::invalid_argument("empty data descriptor");
  const char c = arg.front();
  if (c == '{' || c == '[' || c == '"') return arg;
  if (arg == "maximal" || arg == "empty") return '"' + arg + '"';
  return slurp(arg);
}

InitialData loadInitialData(const std::string& arg) {
  return initialDataFromJsonText(descriptorText(arg));
}

StepFunction loadStepFunction(const std::string& arg) {
  return stepFunctionFromJsonText(descriptorText(arg));
}

std::vector<double> parseDoubles(const std::string& s, const char* what) {
  std::vector<double> out;
  std::size_t pos = 0;
  while (pos <= s.size()) {
    const std::size_t next = s.find(',', pos);
    const std::string tok = s.substr(pos, next == std::string::npos ? next : next - pos);
    try {
      std::size_t used = 0;
      out.push_back(std::stod(tok, &used));
      if (used != tok.size()) throw std::invalid_argument(tok);
    } catch (const std::exception&) {
      throw std::invalid_argument(std::string(what) + ": bad number '" + tok + "'");
    }
    if (next == std::string::npos) break;
    pos = next + 1;
  }
  if (out.empty()) throw std::invalid_argument(std::string(what) + ": empty list");
  return out;
}

std::vector<double> parseColons(const std::string& s, std::size_t n, const char* what) {
  std::vector<double> parts;
  std::size_t pos = 0;
  while (pos <= s.size()) {
    const std::size_t next = s.find(':', pos);
    const std::string tok = s.substr(pos, next == std::string::npos ? next : next - pos);
    try {
      std::size_t used = 0;
      parts.push_back(std::stod(tok, &used));
      if (used != tok.size()) throw std::invalid_argument(tok);
    } catch (const std::exception&) {
      throw std::invalid_argument(std::string(what) + ": bad number '" + tok + "'");
    }
    if (next == std::string::npos) break;
    pos = next + 1;
  }
  if (parts.size() != n)
    throw std::invalid_argument(std::string(what) + ": expected " +
                                std::to_string(n) + " colon-separated numbers");
  return parts;
}

/// lo:hi:step -> the grid points lo, lo+step, ..., capped at hi.
std::vector<double> parseGrid(const std::string& s, const char* what) {
  const auto p = parseColons(s, 3, what);
  if (!(p[2] > 0.0) || !(p[1] >= p[0]))
    throw std::invalid_argument(std::string(what) + ": need lo <= hi and step > 0");
  std::vector<double> xs;
  const long count = static_cast<long>((p[1] - p[0]) / p[2] + 1e-9) + 1;
  for (long i = 0; i < count; ++i) xs.push_back(p[0] + static_cast<double>(i) * p[2]);
  return xs;
}

json settingsToJson(const Settings& settings) {
  json obj = json::object();
  for (const auto& [k, v] : settings) obj[k] = v;
  return obj;
}

std::string settingsToComments(const Settings& settings) {
  std::string out;
  for (const auto& [k, v] : settings) out += "# " + k + "=" + v + "\n";
  return out;
}

/// Writes the rendered report to --out (or the fallback stream) as one blob,
/// so repeated invocations are byte-identical.
int deliver(const std::string& text, const std::string& outPath,
            std::ostream& fallback, std::ostream& err, int code) {
  if (outPath.empty()) {
    fallback << text;
    return code;
  }
  std::ofstream f(outPath, std::ios::binary);
  if (!f) {
    err << "error: cannot write " << outPath << "\n";
    return 2;
  }
  f << text;
  return code;
}

std::string renderReports(const Settings& settings,
                          std::span<const CheckReport> reports,
                          const std::string& format) {
  if (format == "csv") return settingsToComments(settings) + reportsToCsv(reports);
  json doc = json::parse(reportsToJson(reports));
  doc["config"] = settingsToJson(settings);
  return doc.dump(2) + "\n";
}

std::uint64_t seedDefault() {
  if (const char* env = std::getenv("CABM_SEED")) {
    char* end = nullptr;
    const unsigned long long v = std::strtoull(env, &end, 10);
    if (end && *end == '\0' && end != env) return v;
  }
  return 1;
}

std::string trimmed(const std::string& s) {
  const std::size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return {};
  const std::size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

/// Pulls `--config FILE` out of the raw arguments and splices the file's
/// key=value lines in as `--key=value` tokens right after the subcommand
/// name. Later (user-typed) occurrences win because every option takes the
/// last value, which gives the precedence flags > config file > defaults.
std::vector<std::string> expandConfig(std::vector<std::string> args) {
  std::string path;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) {
      path = args[i + 1];
      args.erase(args.begin() + static_cast<std::ptrdiff_t>(i),
                 args.begin() + static_cast<std::ptrdiff_t>(i) + 2);
      break;
    }
    if (args[i].rfind("--config=", 0) == 0) {
      path = args[i].substr(9);
      args.erase(args.begin() + static_cast<std::ptrdiff_t>(i));
      break;
    }
  }
  if (path.empty()) return args;

  std::vector<std::string> injected;
  std::istringstream in(slurp(path));
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = trimmed(line);
    if (t.empty() || t[0] == '#' || t[0] == ';') continue;
    const std::size_t eq = t.find('=');
    if (eq == std::string::npos || eq == 0)
      throw std::invalid_argument(path + ":" + std::to_string(lineno) +
                                  ": expected key=value");
    const std::string key = trimmed(t.substr(0, eq));
    const std::string value = trimmed(t.substr(eq + 1));
    if (key == "config")
      throw std::invalid_argument(path + ": config files cannot chain");
    injected.push_back("--" + key + "=" + value);
  }

  // Insert after the subcommand token so the keys resolve against it.
  auto at = args.begin();
  while (at != args.end() && !at->empty() && at->front() == '-') ++at;
  if (at != args.end()) ++at;
  args.insert(at, injected.begin(), injected.end());
  return args;
}

}  // namespace

int cliMain(const std::vector<std::string>& args, std::ostream& out,
            std::ostream& err) {
  CLI::App app{"coalescing/annihilating Brownian motions: simulation and "
               "Pfaffian verification"};
  app.require_subcommand(1);

  RunConfig cfg;
  cfg.seed = seedDefault();
  std::string cfgFile;  // consumed before parsing; registered so help lists it

  // --- simulate ----------------------------------------------------------
  auto* sim = app.add_subcommand("simulate", "dump particle trajectories");
  sim->option_defaults()->take_last();
  std::string simInit, simLattice;
  std::uint64_t simReps = 1;
  int simStride = 1;
  sim->add_option("--theta", cfg.theta, "annihilation weight in [0,1]")->capture_default_str();
  sim->add_option("--t", cfg.t, "end time")->capture_default_str();
  sim->add_option("--dt", cfg.dt, "time step")->capture_default_str();
  sim->add_option("--reps", simReps, "number of trajectories")->capture_default_str();
  sim->add_option("--seed", cfg.seed, "base seed (env CABM_SEED sets the default)")->capture_default_str();
  auto* simInitOpt = sim->add_option("--init", simInit, "comma-separated start positions");
  auto* simLatOpt = sim->add_option("--lattice", simLattice, "start lattice lo:hi:spacing");
  simInitOpt->excludes(simLatOpt);
  sim->add_option("--stride", simStride, "record every Nth step")->capture_default_str();
  sim->add_option("--out", cfg.out, "output file (default stdout)");
  sim->add_option("--format", cfg.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
  sim->add_option("--config", cfgFile, "key=value configuration file (flags override it)");

  // --- kernel -------------------------------------------------------------
  auto* ker = app.add_subcommand("kernel", "tabulate the scalar kernel and its derivatives");
  ker->option_defaults()->take_last();
  std::string kerGrid, kerPath = "closed";
  QuadratureSpec kerQuad;
  ker->add_option("--data", cfg.data, "initial data (inline JSON, file, or maximal/empty)")->default_val("maximal");
  ker->add_option("--theta", cfg.theta, "annihilation weight in [0,1]")->capture_default_str();
  ker->add_option("--t", cfg.t, "evaluation time")->capture_default_str();
  ker->add_option("--grid", kerGrid, "grid lo:hi:step; rows cover pairs x <= y")->required();
  ker->add_option("--path", kerPath, "closed or quadrature")->check(CLI::IsMember({"closed", "quadrature"}));
  ker->add_option("--radius", kerQuad.radius, "integration box radius, units of sqrt(t)")->capture_default_str();
  ker->add_option("--nodes", kerQuad.nodesPerAxis, "quadrature nodes per panel axis")->capture_default_str();
  ker->add_option("--out", cfg.out, "output file (default stdout)");
  ker->add_option("--format", cfg.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
  ker->add_option("--config", cfgFile, "key=value configuration file (flags override it)");

  // --- duality-check ------------------------------------------------------
  auto* dua = app.add_subcommand("duality-check", "analytic duality Pfaffian vs simulation");
  dua->option_defaults()->take_last();
  std::string duaPoints;
  McParams duaMc;
  dua->add_option("--data", cfg.data, "finite_spin initial data (inline JSON or file)")->required();
  dua->add_option("--theta", cfg.theta, "annihilation weight in [0,1]")->capture_default_str();
  dua->add_option("--t", cfg.t, "observation time")->capture_default_str();
  dua->add_option("--dt", duaMc.dt, "time step")->capture_default_str();
  dua->add_option("--reps", duaMc.replicates, "Monte Carlo replicates")->default_val(10000);
  dua->add_option("--seed", duaMc.seed, "base seed (env CABM_SEED sets the default)")->default_val(cfg.seed);
  dua->add_option("--points", duaPoints, "even-length increasing list a1,b1,a2,b2,...")->required();
  dua->add_option("--bias", duaMc.biasAllowance, "bias allowance added to 3*stderr")->capture_default_str();
  dua->add_option("--out", cfg.out, "output file (default stdout)");
  dua->add_option("--format", cfg.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
  dua->add_option("--config", cfgFile, "key=value configuration file (flags override it)");

  // --- intensity-check ----------------------------------------------------
  auto* inten = app.add_subcommand("intensity-check", "binned densities and pair counts vs analytic intensities");
  inten->option_defaults()->take_last();
  std::string intenLattice = "-4:4:0.02", intenWindows;
  IntensityGrid grid;
  McParams intenMc;
  intenMc.replicates = 10000;
  inten->add_option("--data", cfg.data, "initial data for the kernel")->default_val("maximal");
  inten->add_option("--theta", cfg.theta, "annihilation weight in [0,1]")->capture_default_str();
  inten->add_option("--t", cfg.t, "observation time")->default_val(0.125);
  inten->add_option("--dt", intenMc.dt, "time step")->default_val(5e-4);
  inten->add_option("--reps", intenMc.replicates, "Monte Carlo replicates")->capture_default_str();
  inten->add_option("--seed", intenMc.seed, "base seed (env CABM_SEED sets the default)")->default_val(cfg.seed);
  inten->add_option("--lattice", intenLattice, "simulated start lattice lo:hi:spacing")->capture_default_str();
  inten->add_option("--bin-lo", grid.lo, "left edge of the first bin")->capture_default_str();
  inten->add_option("--bin-width", grid.width, "bin width")->capture_default_str();
  inten->add_option("--bins", grid.bins, "number of bins")->capture_default_str();
  inten->add_option("--windows", intenWindows, "pair windows a0:a1:b0:b1");
  inten->add_option("--bias-fraction", grid.biasFraction, "bias allowance as a fraction of each analytic value")->capture_default_str();
  inten->add_option("--out", cfg.out, "output file (default stdout)");
  inten->add_option("--format", cfg.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
  inten->add_option("--config", cfgFile, "key=value configuration file (flags override it)");

  // --- laplace ------------------------------------------------------------
  auto* lap = app.add_subcommand("laplace", "avoidance-functional series (optionally vs simulation)");
  lap->option_defaults()->take_last();
  std::string lapPhi, lapLattice;
  double lapTol = 1e-6;
  int lapMaxOrder = 12, lapBudget = 20;
  McParams lapMc;
  lapMc.replicates = 10000;
  lap->add_option("--data", cfg.data, "initial data for the kernel")->default_val("maximal");
  lap->add_option("--theta", cfg.theta, "annihilation weight in [0,1]")->capture_default_str();
  lap->add_option("--t", cfg.t, "observation time")->capture_default_str();
  lap->add_option("--phi", lapPhi, "step-function weight, values in [0,1), compact support")->required();
  lap->add_option("--tol", lapTol, "series tail tolerance")->capture_default_str();
  lap->add_option("--max-order", lapMaxOrder, "series order cap (<= 12)")->capture_default_str();
  lap->add_option("--node-budget", lapBudget, "quadrature nodes over the support (<= 32)")->capture_default_str();
  lap->add_option("--lattice", lapLattice, "when set, also simulate from this lattice lo:hi:spacing");
  lap->add_option("--dt", lapMc.dt, "time step for the simulation")->capture_default_str();
  lap->add_option("--reps", lapMc.replicates, "Monte Carlo replicates")->capture_default_str();
  lap->add_option("--seed", lapMc.seed, "base seed (env CABM_SEED sets the default)")->default_val(cfg.seed);
  lap->add_option("--bias", lapMc.biasAllowance, "bias allowance added to 3*stderr")->capture_default_str();
  lap->add_option("--out", cfg.out, "output file (default stdout)");
  lap->add_option("--format", cfg.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
  lap->add_option("--config", cfgFile, "key=value configuration file (flags override it)");

  // --- mixture-check ------------------------------------------------------
  auto* mix = app.add_subcommand("mixture-check", "k-fold atom mixture identities");
  mix->option_defaults()->take_last();
  MixtureConfig mixCfg;
  McParams mixMc;
  mixMc.dt = 1e-4;
  mixMc.replicates = 20000;
  mixMc.biasAllowance = 0.02;
  mix->add_option("--theta", mixCfg.theta, "annihilation weight in [0,1]")->capture_default_str();
  mix->add_option("--k", mixCfg.k, "atom multiplicity (>= 2)")->capture_default_str();
  mix->add_option("--t", mixCfg.t, "observation time for the cluster runs")->capture_default_str();
  mix->add_option("--eps", mixCfg.eps, "cluster spacing (also rerun at eps/2)")->capture_default_str();
  mix->add_option("--center", mixCfg.center, "cluster position")->capture_default_str();
  mix->add_option("--dt", mixMc.dt, "time step")->capture_default_str();
  mix->add_option("--reps", mixMc.replicates, "Monte Carlo replicates")->capture_default_str();
  mix->add_option("--seed", mixMc.seed, "base seed (env CABM_SEED sets the default)")->default_val(cfg.seed);
  mix->add_option("--bias", mixMc.biasAllowance, "bias allowance added to 3*stderr")->capture_default_str();
  mix->add_option("--out", cfg.out, "output file (default stdout)");
  mix->add_option("--format", cfg.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
  mix->add_option("--config", cfgFile, "key=value configuration file (flags override it)");

  // --- approx -------------------------------------------------------------
  auto* apx = app.add_subcommand("approx", "flip points of the oscillating product-data profile");
  apx->option_defaults()->take_last();
  std::string apxF;
  int apxN = 10;
  apx->add_option("--f", apxF, "target step function (inline JSON or file)")->required();
  apx->add_option("--n", apxN, "refinement level (n*n cells of width 1/n per side)")->capture_default_str();
  apx->add_option("--out", cfg.out, "output file (default stdout)");
  apx->add_option("--format", cfg.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
  apx->add_option("--config", cfgFile, "key=value configuration file (flags override it)");

  // --- selftest -----------------------------------------------------------
  auto* self = app.add_subcommand("selftest", "run the full acceptance battery");
  self->option_defaults()->take_last();
  AcceptanceOptions selfOpt;
  self->add_flag("--quick", selfOpt.quick, "reduced replicas for a fast smoke run");
  self->add_option("--seed", selfOpt.seed, "base seed (env CABM_SEED sets the default)")->capture_default_str();
  self->add_option("--out", cfg.out, "output file (default stdout)");
  self->add_option("--format", cfg.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
  self->add_option("--config", cfgFile, "key=value configuration file (flags override it)");

  // ------------------------------------------------------------------------
  std::vector<std::string> argStorage;
  try {
    argStorage = expandConfig(args);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  }
  std::vector<const char*> argv;
  argv.push_back("cabm");
  for (const std::string& a : argStorage) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }

  if (cfg.format.empty()) cfg.format = "csv";

  try {
    if (*sim) {
      cfg.subcommand = "simulate";
      std::vector<double> xs;
      if (!simLattice.empty()) {
        const auto p = parseColons(simLattice, 3, "--lattice");
        xs = latticeConfiguration(p[0], p[1], p[2]);
      } else if (!simInit.empty()) {
        xs = parseDoubles(simInit, "--init");
      } else {
        throw std::invalid_argument("simulate: need --init or --lattice");
      }
      const SimConfig sc{cfg.theta, cfg.dt, cfg.t};
      validateSimConfig(sc);
      if (simStride < 1) throw std::invalid_argument("simulate: --stride must be >= 1");
      Settings settings{{"subcommand", "simulate"},
                        {"theta", fmt12(cfg.theta)},
                        {"t", fmt12(cfg.t)},
                        {"dt", fmt12(cfg.dt)},
                        {"replicates", std::to_string(simReps)},
                        {"seed", std::to_string(cfg.seed)},
                        {"stride", std::to_string(simStride)},
                        {"init", [&] {
                           std::string s;
                           for (double x : xs) s += (s.empty() ? "" : ";") + fmt12(x);
                           return s;
                         }()},
                        {"format", cfg.format}};
      std::string text;
      if (cfg.format == "csv") {
        text = settingsToComments(settings) + "replicate,time,index,position\n";
        for (std::uint64_t r = 0; r < simReps; ++r) {
          Rng rng = Rng::forReplica(cfg.seed, r);
          for (const TrajectoryFrame& fr : simulateTrajectory(xs, sc, rng, simStride))
            for (std::size_t i = 0; i < fr.positions.size(); ++i)
              text += std::to_string(r) + "," + fmt12(fr.time) + "," +
                      std::to_string(i) + "," + fmt12(fr.positions[i]) + "\n";
        }
      } else {
        json doc;
        doc["config"] = settingsToJson(settings);
        json reps = json::array();
        for (std::uint64_t r = 0; r < simReps; ++r) {
          Rng rng = Rng::forReplica(cfg.seed, r);
          json frames = json::array();
          for (const TrajectoryFrame& fr : simulateTrajectory(xs, sc, rng, simStride))
            frames.push_back({{"time", fr.time}, {"positions", fr.positions}});
          reps.push_back({{"replicate", r}, {"frames", std::move(frames)}});
        }
        doc["replicates"] = std::move(reps);
        text = doc.dump(2) + "\n";
      }
      return deliver(text, cfg.out, out, err, 0);
    }

    if (*ker) {
      cfg.subcommand = "kernel";
      const InitialData data = loadInitialData(cfg.data);
      const KernelPath path = kerPath == "closed" ? KernelPath::Closed : KernelPath::Quadrature;
      const ScalarKernel kernel(data, cfg.theta, kerQuad, path);
      const std::vector<double> xs = parseGrid(kerGrid, "--grid");
      if (!(cfg.t > 0.0)) throw std::invalid_argument("kernel: --t must be positive");
      Settings settings{{"subcommand", "kernel"},
                        {"theta", fmt12(cfg.theta)},
                        {"t", fmt12(cfg.t)},
                        {"grid", kerGrid},
                        {"path", kerPath},
                        {"data", initialDataToJsonText(data)},
                        {"format", cfg.format}};
      std::string text;
      if (cfg.format == "csv") {
        text = settingsToComments(settings) + "x,y,K,DxK,DyK,DxyK\n";
        for (std::size_t i = 0; i < xs.size(); ++i)
          for (std::size_t j = i; j < xs.size(); ++j) {
            const KernelEval e = kernel(cfg.t, xs[i], xs[j]);
            text += fmt12(xs[i]) + "," + fmt12(xs[j]) + "," + fmt12(e.k) + "," +
                    fmt12(e.dx) + "," + fmt12(e.dy) + "," + fmt12(e.dxy) + "\n";
          }
      } else {
        json rows = json::array();
        for (std::size_t i = 0; i < xs.size(); ++i)
          for (std::size_t j = i; j < xs.size(); ++j) {
            const KernelEval e = kernel(cfg.t, xs[i], xs[j]);
            rows.push_back({{"x", xs[i]},
                            {"y", xs[j]},
                            {"K", e.k},
                            {"DxK", e.dx},
                            {"DyK", e.dy},
                            {"DxyK", e.dxy}});
          }
        json doc;
        doc["config"] = settingsToJson(settings);
        doc["rows"] = std::move(rows);
        text = doc.dump(2) + "\n";
      }
      return deliver(text, cfg.out, out, err, 0);
    }

    if (*dua) {
      cfg.subcommand = "duality-check";
      const InitialData data = loadInitialData(cfg.data);
      if (!std::holds_alternative<FiniteSpinData>(data))
        throw std::invalid_argument("duality-check: --data must be finite_spin");
      const std::vector<double> points = parseDoubles(duaPoints, "--points");
      const CheckReport r = dualityCheck(std::get<FiniteSpinData>(data),
                                         cfg.theta, cfg.t, points, duaMc);
      Settings settings{{"subcommand", "duality-check"},
                        {"theta", fmt12(cfg.theta)},
                        {"t", fmt12(cfg.t)},
                        {"dt", fmt12(duaMc.dt)},
                        {"replicates", std::to_string(duaMc.replicates)},
                        {"seed", std::to_string(duaMc.seed)},
                        {"points", duaPoints},
                        {"data", initialDataToJsonText(data)},
                        {"format", cfg.format}};
      const CheckReport reports[] = {r};
      return deliver(renderReports(settings, reports, cfg.format), cfg.out, out,
                     err, r.pass ? 0 : 1);
    }

    if (*inten) {
      cfg.subcommand = "intensity-check";
      const InitialData data = loadInitialData(cfg.data);
      const ScalarKernel kernel(data, cfg.theta);
      const auto p = parseColons(intenLattice, 3, "--lattice");
      const std::vector<double> init = latticeConfiguration(p[0], p[1], p[2]);
      if (!intenWindows.empty()) {
        const auto w = parseColons(intenWindows, 4, "--windows");
        grid.a0 = w[0];
        grid.a1 = w[1];
        grid.b0 = w[2];
        grid.b1 = w[3];
      }
      const auto reports = intensityCheck(init, kernel, cfg.t, grid, intenMc);
      Settings settings{{"subcommand", "intensity-check"},
                        {"theta", fmt12(cfg.theta)},
                        {"t", fmt12(cfg.t)},
                        {"dt", fmt12(intenMc.dt)},
                        {"replicates", std::to_string(intenMc.replicates)},
                        {"seed", std::to_string(intenMc.seed)},
                        {"lattice", intenLattice},
                        {"bins", std::to_string(grid.bins)},
                        {"bin_lo", fmt12(grid.lo)},
                        {"bin_width", fmt12(grid.width)},
                        {"windows", fmt12(grid.a0) + ":" + fmt12(grid.a1) + ":" +
                                        fmt12(grid.b0) + ":" + fmt12(grid.b1)},
                        {"bias_fraction", fmt12(grid.biasFraction)},
                        {"data", initialDataToJsonText(data)},
                        {"format", cfg.format}};
      return deliver(renderReports(settings, reports, cfg.format), cfg.out, out,
                     err, allPass(reports) ? 0 : 1);
    }

    if (*lap) {
      cfg.subcommand = "laplace";
      const InitialData data = loadInitialData(cfg.data);
      const ScalarKernel kernel(data, cfg.theta);
      const StepFunction phi = loadStepFunction(lapPhi);
      Settings settings{{"subcommand", "laplace"},
                        {"theta", fmt12(cfg.theta)},
                        {"t", fmt12(cfg.t)},
                        {"tol", fmt12(lapTol)},
                        {"max_order", std::to_string(lapMaxOrder)},
                        {"node_budget", std::to_string(lapBudget)},
                        {"phi", stepFunctionToJsonText(phi)},
                        {"data", initialDataToJsonText(data)},
                        {"format", cfg.format}};
      if (!lapLattice.empty()) {
        const auto p = parseColons(lapLattice, 3, "--lattice");
        const std::vector<double> init = latticeConfiguration(p[0], p[1], p[2]);
        settings.insert(settings.end() - 2,
                        {{"lattice", lapLattice},
                         {"dt", fmt12(lapMc.dt)},
                         {"replicates", std::to_string(lapMc.replicates)},
                         {"seed", std::to_string(lapMc.seed)}});
        const auto reports =
            laplaceCheck(kernel, cfg.t, phi, init, lapMc, lapTol, lapMaxOrder, lapBudget);
        return deliver(renderReports(settings, reports, cfg.format), cfg.out,
                       out, err, allPass(reports) ? 0 : 1);
      }
      const FredholmResult fr =
          laplaceFredholm(kernel, cfg.t, phi, lapTol, lapMaxOrder, lapBudget);
      std::string text;
      if (cfg.format == "csv") {
        text = settingsToComments(settings);
        text += "# value=" + fmt12(fr.value) + "\n";
        text += "# order_used=" + std::to_string(fr.orderUsed) + "\n";
        text += "# converged=" + std::string(fr.converged ? "1" : "0") + "\n";
        text += "order,term,partial_sum,order_bound,tail_bound\n";
        for (std::size_t k = 0; k < fr.termByOrder.size(); ++k)
          text += std::to_string(k) + "," + fmt12(fr.termByOrder[k]) + "," +
                  fmt12(fr.partialSums[k]) + "," + fmt12(fr.orderBound[k]) +
                  "," + fmt12(fr.tailBound[k]) + "\n";
      } else {
        json doc;
        doc["config"] = settingsToJson(settings);
        doc["value"] = fr.value;
        doc["order_used"] = fr.orderUsed;
        doc["converged"] = fr.converged;
        doc["terms"] = fr.termByOrder;
        doc["partial_sums"] = fr.partialSums;
        doc["order_bounds"] = fr.orderBound;
        doc["tail_bounds"] = fr.tailBound;
        text = doc.dump(2) + "\n";
      }
      return deliver(text, cfg.out, out, err, fr.converged ? 0 : 1);
    }

    if (*mix) {
      cfg.subcommand = "mixture-check";
      const auto reports = mixtureCheck(mixCfg, mixMc);
      Settings settings{{"subcommand", "mixture-check"},
                        {"theta", fmt12(mixCfg.theta)},
                        {"k", std::to_string(mixCfg.k)},
                        {"t", fmt12(mixCfg.t)},
                        {"eps", fmt12(mixCfg.eps)},
                        {"center", fmt12(mixCfg.center)},
                        {"dt", fmt12(mixMc.dt)},
                        {"replicates", std::to_string(mixMc.replicates)},
                        {"seed", std::to_string(mixMc.seed)},
                        {"format", cfg.format}};
      return deliver(renderReports(settings, reports, cfg.format), cfg.out, out,
                     err, allPass(reports) ? 0 : 1);
    }

    if (*apx) {
      cfg.subcommand = "approx";
      const StepFunction f = loadStepFunction(apxF);
      const PointMeasure mu = productApproximation(f, apxN);
      Settings settings{{"subcommand", "approx"},
                        {"n", std::to_string(apxN)},
                        {"f", stepFunctionToJsonText(f)},
                        {"format", cfg.format}};
      std::string text;
      if (cfg.format == "csv") {
        text = settingsToComments(settings) + "position,multiplicity\n";
        for (const auto& a : mu.atoms)
          text += fmt12(a.position) + "," + std::to_string(a.multiplicity) + "\n";
      } else {
        json atoms = json::array();
        for (const auto& a : mu.atoms)
          atoms.push_back({{"position", a.position}, {"multiplicity", a.multiplicity}});
        json doc;
        doc["config"] = settingsToJson(settings);
        doc["atoms"] = std::move(atoms);
        text = doc.dump(2) + "\n";
      }
      return deliver(text, cfg.out, out, err, 0);
    }

    if (*self) {
      cfg.subcommand = "selftest";
      const auto results = runAcceptance(selfOpt);
      bool all = true;
      for (const auto& r : results) all = all && r.pass;
      Settings settings{{"subcommand", "selftest"},
                        {"quick", selfOpt.quick ? "1" : "0"},
                        {"seed", std::to_string(selfOpt.seed)},
                        {"format", cfg.format}};
      std::string text;
      if (cfg.format == "csv") {
        text = settingsToComments(settings);
        std::vector<CheckReport> merged;
        for (const auto& r : results) {
          text += "# criterion " + std::to_string(r.index) + " " + r.name +
                  " pass=" + (r.pass ? "1" : "0") + " detail=" + r.detail + "\n";
          merged.insert(merged.end(), r.reports.begin(), r.reports.end());
        }
        text += reportsToCsv(merged);
      } else {
        json criteria = json::array();
        for (const auto& r : results) {
          json checks = json::array();
          if (!r.reports.empty())
            checks = json::parse(reportsToJson(r.reports)).at("checks");
          criteria.push_back({{"index", r.index},
                              {"name", r.name},
                              {"pass", r.pass},
                              {"detail", r.detail},
                              {"checks", std::move(checks)}});
        }
        json doc;
        doc["config"] = settingsToJson(settings);
        doc["all_pass"] = all;
        doc["criteria"] = std::move(criteria);
        text = doc.dump(2) + "\n";
      }
      return deliver(text, cfg.out, out, err, all ? 0 : 1);
    }
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  }
  err << "error: no subcommand selected\n";
  return 2;
}

}  // namespace cabm
