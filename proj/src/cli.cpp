#include "ptkk/cli.hpp"

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <memory>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "ptkk/errors.hpp"
#include "ptkk/experiments.hpp"
#include "ptkk/parallel.hpp"
#include "ptkk/report.hpp"

#ifndef PTKK_VERSION
#define PTKK_VERSION "0.0.0"
#endif

namespace ptkk::cli {

const char* version() { return PTKK_VERSION; }

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

std::string key_of(const std::string& flag) {
  std::string k = flag.substr(flag.find_first_not_of('-'));
  std::replace(k.begin(), k.end(), '-', '_');
  return k;
}

std::string num(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", x + 0.0);
  return buf;
}

std::string num(cplx z) {
  char buf[64];
  // + 0.0 turns -0 into 0
  std::snprintf(buf, sizeof buf, "%.6g%+.6gi", z.real() + 0.0, z.imag() + 0.0);
  return buf;
}

json number(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

// One subcommand plus the table of its options, so that a JSON config can
// fill every option the command line left unset and the manifest can record
// the effective values.
class Command {
 public:
  Command(CLI::App& app, const std::string& name, const std::string& description)
      : name_(name), app_(app.add_subcommand(name, description)) {
    app_->fallthrough();
  }

  template <typename T>
  CLI::Option* bind(const std::string& flag, T& var, const std::string& description, bool recorded = true) {
    CLI::Option* o = app_->add_option(flag, var, description)->capture_default_str();
    bindings_.push_back({o, key_of(flag), recorded, [&var](const json& j) { var = j.get<T>(); },
                         [&var] { return json(var); }});
    return o;
  }

  void apply(const json& config) {
    for (const auto& [k, v] : config.items()) {
      if (k == "command") continue;
      auto it = std::find_if(bindings_.begin(), bindings_.end(), [&](const Binding& b) { return b.key == k; });
      if (it == bindings_.end())
        throw ValidationError("config key '" + k + "' is not an option of '" + name_ + "'");
      if (it->option->count() > 0) continue;  // the command line wins
      try {
        it->load(v);
      } catch (const json::exception&) {
        throw ValidationError("config key '" + k + "' has the wrong type");
      }
    }
  }

  [[nodiscard]] json effective() const {
    json j = json::object();
    j["command"] = name_;
    for (const Binding& b : bindings_)
      if (b.recorded) j[b.key] = b.dump();
    return j;
  }

  [[nodiscard]] CLI::App* app() const { return app_; }
  [[nodiscard]] const std::string& name() const { return name_; }

 private:
  struct Binding {
    CLI::Option* option;
    std::string key;
    bool recorded;
    std::function<void(const json&)> load;
    std::function<json()> dump;
  };
  std::string name_;
  CLI::App* app_;
  std::vector<Binding> bindings_;
};

// ---------------------------------------------------------------------------
// Option groups shared between commands

struct Common {
  std::string out;
  unsigned threads = 0;

  void bind(Command& c) {
    c.bind("--out", out, "output directory (default $" + std::string(kOutputDirEnv) + " or .)", false);
    c.bind("--threads", threads, "worker threads, 0 = all cores", false);
  }
};

struct DimerOpts {
  double gamma = 1.5;
  double kappa = 1.0;
  double gamma_ex = 0.1;
  std::string convention = "sp";

  void bind(Command& c) {
    c.bind("--gamma", gamma, "gain/loss rate");
    c.bind("--kappa", kappa, "coupling; all rates are reported in units of kappa");
    c.bind("--gamma-ex", gamma_ex, "port decay rate");
    c.bind("--convention", convention, "port convention: sp or sym");
  }

  [[nodiscard]] DimerParams params() const {
    DimerParams p{gamma, kappa, gamma_ex, convention_from_string(convention)};
    p.validate();
    return p;
  }
};

struct ChainOpts {
  std::size_t sites = 4;
  double t1 = 1.0;
  double ratio = 0.5;
  std::vector<double> profile{-1.0, 1.0, -1.0, 1.0};

  void bind(Command& c) {
    c.bind("--sites", sites, "SSH chain length");
    c.bind("--t1", t1, "first SSH hopping");
    c.bind("--ratio", ratio, "second hopping over the first");
    c.bind("--profile", profile, "onsite gain/loss signs, one per site")->delimiter(',');
  }

  [[nodiscard]] ChainModel chain(double gamma, double gamma_ex) const {
    ChainModel m = ChainModel::ssh(sites, t1, ratio, gamma, gamma_ex, profile);
    m.validate();
    return m;
  }
};

struct GridOpts {
  double half_width = 5.0;
  std::size_t n_points = 4001;
  std::string tail = "asymptotic";
  double taper = 0.0;

  void bind(Command& c) {
    c.bind("--half-width", half_width, "frequency window [-W, W]");
    c.bind("--n-points", n_points, "grid points (odd)");
    c.bind("--tail", tail, "Hilbert tail model: asymptotic or none");
    c.bind("--taper", taper, "raised-cosine edge taper fraction");
  }

  [[nodiscard]] FrequencyGrid grid() const { return FrequencyGrid::symmetric(half_width, n_points); }

  [[nodiscard]] HilbertOptions hilbert(unsigned threads) const {
    HilbertOptions h;
    if (tail == "asymptotic") h.tail = TailModel::asymptotic;
    else if (tail == "none") h.tail = TailModel::none;
    else throw ValidationError("unknown tail model '" + tail + "' (expected asymptotic or none)");
    h.taper_fraction = taper;
    h.threads = threads;
    return h;
  }
};

KKRelation relation_from_string(const std::string& s) {
  if (s == "re") return KKRelation::real_from_imag;
  if (s == "im") return KKRelation::imag_from_real;
  throw ValidationError("unknown KK relation '" + s + "' (expected re or im)");
}

// ---------------------------------------------------------------------------
// Output

class Output {
 public:
  Output(const std::string& dir, const Command& cmd) : dir_(dir), cmd_(cmd) {
    std::error_code ec;
    fs::create_directories(dir_, ec);
    if (ec) throw ValidationError("cannot create output directory '" + dir_.string() + "': " + ec.message());
  }

  void table(const std::string& file, const std::function<void(std::ostream&)>& write) {
    std::ofstream out(dir_ / file, std::ios::binary);
    if (!out) throw ValidationError("cannot write '" + (dir_ / file).string() + "'");
    write(out);
    files_.push_back(file);
  }

  // Manifest plus the summary line.
  void finish(const json& derived, const json& summary, const std::string& line) {
    json m;
    m["command"] = cmd_.name();
    m["version"] = version();
    m["config"] = cmd_.effective();
    m["derived"] = derived;
    m["summary"] = summary;
    m["outputs"] = files_;
    const std::string file = cmd_.name() + ".manifest.json";
    std::ofstream out(dir_ / file, std::ios::binary);
    if (!out) throw ValidationError("cannot write '" + (dir_ / file).string() + "'");
    out << m.dump(2) << '\n';
    std::cout << cmd_.name() << ": " << line << std::endl;
  }

 private:
  fs::path dir_;
  const Command& cmd_;
  std::vector<std::string> files_;
};

std::string output_dir(const std::string& flag) {
  if (!flag.empty()) return flag;
  if (const char* env = std::getenv(kOutputDirEnv); env && *env) return env;
  return ".";
}

// ---------------------------------------------------------------------------
// Commands

struct PolesCmd {
  Command cmd;
  Common common;
  DimerOpts dimer;
  ChainOpts chain;
  std::string model = "dimer";

  explicit PolesCmd(CLI::App& app) : cmd(app, "poles", "poles, residues, and N_B of one model") {
    common.bind(cmd);
    dimer.bind(cmd);
    chain.bind(cmd);
    cmd.bind("--model", model, "dimer or ssh");
  }

  void operator()() {
    Model m;
    json derived;
    if (model == "dimer") {
      const DimerParams p = dimer.params();
      m = p;
      derived["gamma_c"] = critical_gamma(p);
      derived["threshold_uhp"] = uhp_threshold(p);
    } else if (model == "ssh") {
      m = chain.chain(dimer.gamma, dimer.gamma_ex);
    } else {
      throw ValidationError("unknown model '" + model + "' (expected dimer or ssh)");
    }
    const std::vector<PoleData> ps = poles(m);
    std::vector<cplx> uhp;
    bool on_axis = false;
    for (const PoleData& p : ps) {
      if (p.in_uhp()) uhp.push_back(p.location);
      if (p.half_plane() == HalfPlane::boundary) on_axis = true;
    }
    const int nb = static_cast<int>(uhp.size());
    derived["N_B"] = nb;
    derived["bode_sum"] = report::to_json(bode_sum(uhp));
    if (on_axis) {
      derived["contour_N_B"] = nullptr;
    } else {
      const RationalResponse r = reflection_response(m);
      ContourSpec c;
      c.half_width = std::max(10.0, 2.0 * r.denominator.root_bound());
      derived["contour_N_B"] = winding_number_contour(r, c).winding;
    }
    json list = json::array();
    for (const PoleData& p : ps) list.push_back(report::to_json(p));
    derived["poles"] = list;

    Output out(output_dir(common.out), cmd);
    out.table("poles.csv", [&](std::ostream& o) { report::write_poles_csv(o, ps); });
    std::string line = "N_B=" + std::to_string(nb);
    for (const PoleData& p : ps) {
      line += " z=" + num(p.location);
      if (!p.degenerate) line += " rho=" + num(p.residue);
    }
    out.finish(derived, {{"N_B", nb}}, line);
  }
};

struct TrajectoryCmd {
  Command cmd;
  Common common;
  DimerOpts dimer;
  double gamma_min = 0.0;
  double gamma_max = 2.0;
  std::size_t steps = 401;

  explicit TrajectoryCmd(CLI::App& app) : cmd(app, "trajectory", "pole paths as gamma sweeps a range") {
    common.bind(cmd);
    dimer.bind(cmd);
    cmd.bind("--gamma-min", gamma_min, "start of the sweep");
    cmd.bind("--gamma-max", gamma_max, "end of the sweep");
    cmd.bind("--steps", steps, "number of gamma values");
  }

  void operator()() {
    const DimerParams p = dimer.params();
    const double k = p.kappa;
    const Trajectory t = pole_trajectory(p.convention, p.gamma_ex / k, gamma_min / k, gamma_max / k, steps);
    const double gc = critical_gamma(p);
    json derived{{"gamma_c", gc}, {"units", "kappa"}};
    derived["crossing_gamma"] = t.crossing_gamma ? json(*t.crossing_gamma) : json(nullptr);
    Output out(output_dir(common.out), cmd);
    out.table("trajectory.csv", [&](std::ostream& o) { report::write_trajectory_csv(o, t); });
    out.finish(derived, {{"crossing_gamma", derived["crossing_gamma"]}},
               "crossing=" + (t.crossing_gamma ? num(*t.crossing_gamma) : std::string("none")) +
                   " gamma_c=" + num(gc));
  }
};

struct PhaseCmd {
  Command cmd;
  Common common;
  std::string convention = "sp";
  double gamma_min = 0.02, gamma_max = 2.0;
  double gamma_ex_min = 0.02, gamma_ex_max = 2.0;
  std::size_t n_gamma = 50, n_gamma_ex = 50;
  double subsample = 0.01;
  std::uint64_t seed = PhaseOptions{}.seed;

  explicit PhaseCmd(CLI::App& app) : cmd(app, "phase-diagram", "N_B on a (gamma, gamma_ex) grid") {
    common.bind(cmd);
    cmd.bind("--convention", convention, "sp or sym");
    cmd.bind("--gamma-min", gamma_min, "gamma axis start (units of kappa)");
    cmd.bind("--gamma-max", gamma_max, "gamma axis end");
    cmd.bind("--gamma-ex-min", gamma_ex_min, "gamma_ex axis start");
    cmd.bind("--gamma-ex-max", gamma_ex_max, "gamma_ex axis end");
    cmd.bind("--n-gamma", n_gamma, "gamma axis points");
    cmd.bind("--n-gamma-ex", n_gamma_ex, "gamma_ex axis points");
    cmd.bind("--subsample", subsample, "fraction of cells cross-checked by contour winding");
    cmd.bind("--seed", seed, "subsample seed");
  }

  void operator()() {
    if (!(subsample >= 0.0 && subsample <= 1.0)) throw ValidationError("--subsample must be in [0, 1]");
    if (n_gamma < 1 || n_gamma_ex < 1) throw ValidationError("phase grid needs at least one point per axis");
    PhaseOptions o;
    o.subsample_fraction = subsample;
    o.seed = seed;
    o.threads = resolve_threads(common.threads);
    const Convention conv = convention_from_string(convention);
    const PhaseMap m = phase_diagram(conv, linspace(gamma_min, gamma_max, n_gamma),
                                     linspace(gamma_ex_min, gamma_ex_max, n_gamma_ex), o);
    const auto broken = std::count(m.winding.begin(), m.winding.end(), 1);
    const auto boundary = std::count(m.boundary.begin(), m.boundary.end(), true);
    const json summary{{"cells", m.winding.size()},
                       {"broken_cells", broken},
                       {"boundary_cells", boundary},
                       {"checked_cells", m.checks.size()},
                       {"disagreements", m.disagreements()}};
    Output out(output_dir(common.out), cmd);
    out.table("phase.csv", [&](std::ostream& os) { report::write_phase_csv(os, m); });
    out.finish(summary, summary,
               "cells=" + std::to_string(m.winding.size()) + " N_B=1 in " + std::to_string(broken) +
                   " checked=" + std::to_string(m.checks.size()) +
                   " disagreements=" + std::to_string(m.disagreements()));
  }
};

struct KKCmd {
  Command cmd;
  Common common;
  DimerOpts dimer;
  ChainOpts chain;
  GridOpts grid;
  std::string model = "dimer";
  std::string relation = "re";

  explicit KKCmd(CLI::App& app) : cmd(app, "kk-residual", "standard and residue-corrected KK residuals") {
    common.bind(cmd);
    dimer.bind(cmd);
    chain.bind(cmd);
    grid.bind(cmd);
    cmd.bind("--model", model, "dimer or ssh");
    cmd.bind("--relation", relation, "re: Re from H[Im]; im: Im from H[Re]");
  }

  void operator()() {
    Model m;
    if (model == "dimer") m = dimer.params().normalized();
    else if (model == "ssh") m = chain.chain(dimer.gamma, dimer.gamma_ex);
    else throw ValidationError("unknown model '" + model + "' (expected dimer or ssh)");
    const FrequencyGrid g = grid.grid();
    const HilbertOptions h = grid.hilbert(resolve_threads(common.threads));
    const KKRelation rel = relation_from_string(relation);
    const SampledResponse s = SampledResponse::sample(reflection_response(m), g);
    const std::vector<PoleData> uhp = select_uhp(poles(m));
    const KKResult k = corrected_kk(s, uhp, h, rel);
    json plist = json::array();
    for (const PoleData& p : uhp) plist.push_back(report::to_json(p));
    const json summary{{"N_B", uhp.size()},
                       {"l2_standard", number(k.l2_standard)},
                       {"l2_corrected", number(k.l2_corrected)},
                       {"reduction_factor", number(k.reduction_factor)}};
    json derived = summary;
    derived["uhp_poles"] = plist;
    derived["spacing"] = g.spacing();
    Output out(output_dir(common.out), cmd);
    out.table("kk.csv", [&](std::ostream& os) { report::write_kk_csv(os, s, k); });
    out.finish(derived, summary,
               "N_B=" + std::to_string(uhp.size()) + " l2_standard=" + num(k.l2_standard) +
                   " l2_corrected=" + num(k.l2_corrected) + " reduction_factor=" + num(k.reduction_factor));
  }
};

struct ScanOpts {
  double window_min = 1.02;
  double window_max = 1.50;
  std::size_t n_scan = 25;
  double exclusion = 1e-3;

  void bind(Command& c) {
    c.bind("--window-min", window_min, "first scanned gamma");
    c.bind("--window-max", window_max, "last scanned gamma");
    c.bind("--n-scan", n_scan, "number of scanned gamma values");
    c.bind("--exclusion", exclusion, "drop points closer than this to gamma_c from the fit");
  }

  [[nodiscard]] ScalingOptions options(const GridOpts& grid, unsigned threads) const {
    ScalingOptions o;
    o.window_min = window_min;
    o.window_max = window_max;
    o.n_points = n_scan;
    o.exclusion_band = exclusion;
    o.grid = grid.grid();
    o.hilbert = grid.hilbert(1);
    o.threads = threads;
    return o;
  }
};

struct ScalingCmd {
  Command cmd;
  Common common;
  DimerOpts dimer;
  GridOpts grid;
  ScanOpts scan;

  explicit ScalingCmd(CLI::App& app)
      : cmd(app, "scaling", "power-law fit of the KK residual above threshold") {
    dimer.gamma_ex = 0.05;
    common.bind(cmd);
    dimer.bind(cmd);
    grid.bind(cmd);
    scan.bind(cmd);
  }

  void operator()() {
    const DimerParams p = dimer.params();
    const ScalingRun run = scaling_experiment(p, scan.options(grid, resolve_threads(common.threads)));
    double min_red = INFINITY;
    for (const ScalingPoint& pt : run.table)
      if (pt.distance > scan.exclusion) min_red = std::min(min_red, pt.reduction_factor);
    json derived = report::to_json(run.fit);
    derived["min_reduction_factor"] = number(min_red);
    const json summary{{"nu", number(run.fit.exponent)},
                       {"nu_stderr", number(run.fit.exponent_stderr)},
                       {"r_squared", number(run.fit.r_squared)},
                       {"gamma_c", run.fit.gamma_c},
                       {"min_reduction_factor", number(min_red)}};
    Output out(output_dir(common.out), cmd);
    out.table("scaling.csv", [&](std::ostream& os) { report::write_scaling_csv(os, run.table); });
    out.table("scaling_uhp_poles.csv", [&](std::ostream& os) { report::write_uhp_poles_csv(os, run.table); });
    out.finish(derived, summary,
               "nu=" + num(run.fit.exponent) + " +- " + num(run.fit.exponent_stderr) +
                   " R2=" + num(run.fit.r_squared) + " gamma_c=" + num(run.fit.gamma_c) +
                   " min_reduction=" + num(min_red));
  }
};

struct SshCmd {
  Command cmd;
  Common common;
  ChainOpts chain;
  GridOpts grid;
  ScanOpts scan;
  double gamma_ex = 0.05;
  double search_min = 0.0;
  double search_max = 4.0;

  explicit SshCmd(CLI::App& app) : cmd(app, "ssh-check", "KK scaling scan on a PT-symmetric SSH chain") {
    scan.window_max = 2.0;
    common.bind(cmd);
    chain.bind(cmd);
    grid.bind(cmd);
    scan.bind(cmd);
    cmd.bind("--gamma-ex", gamma_ex, "port decay rate");
    cmd.bind("--search-min", search_min, "threshold search bracket start");
    cmd.bind("--search-max", search_max, "threshold search bracket end");
  }

  void operator()() {
    SshOptions o;
    o.n_sites = chain.sites;
    o.t1 = chain.t1;
    o.ratio = chain.ratio;
    o.profile = chain.profile;
    o.gamma_ex = gamma_ex;
    o.search_min = search_min;
    o.search_max = search_max;
    o.scan = scan.options(grid, resolve_threads(common.threads));
    const SshRun run = ssh_experiment(o);
    json derived{{"gamma_c", run.gamma_c}, {"monotonic", run.monotonic}};
    derived["fit"] = run.fit ? report::to_json(*run.fit) : json(nullptr);
    if (!run.refusal.empty()) derived["refusal"] = run.refusal;
    json summary{{"gamma_c", run.gamma_c}, {"monotonic", run.monotonic}};
    summary["r_squared"] = run.fit ? number(run.fit->r_squared) : json(nullptr);
    summary["nu"] = run.fit ? number(run.fit->exponent) : json(nullptr);
    Output out(output_dir(common.out), cmd);
    out.table("ssh.csv", [&](std::ostream& os) { report::write_scaling_csv(os, run.table); });
    std::string line = "gamma_c=" + num(run.gamma_c);
    line += run.fit ? " nu=" + num(run.fit->exponent) + " R2=" + num(run.fit->r_squared) : " fit refused";
    line += run.monotonic ? " monotonic" : " non-monotonic";
    out.finish(derived, summary, line);
  }
};

SampledResponse load_spectrum(const std::string& path, double offset) {
  SampledResponse s = read_spectrum_csv(path);
  for (cplx& v : s.values) v -= offset;
  return s;
}

struct FitPoleCmd {
  Command cmd;
  Common common;
  DimerOpts dimer;
  GridOpts grid;
  std::string input;
  double offset = 0.0;
  double peak_ratio = PoleFitOptions{}.peak_ratio;

  explicit FitPoleCmd(CLI::App& app)
      : cmd(app, "fit-pole", "fit one UHP pole to the standard KK residual") {
    common.bind(cmd);
    dimer.bind(cmd);
    grid.bind(cmd);
    cmd.bind("--input", input, "spectrum CSV (omega,re,im); the dimer model is used when absent");
    cmd.bind("--offset", offset, "constant subtracted from the spectrum (1 for a raw reflection)");
    cmd.bind("--peak-ratio", peak_ratio, "detection threshold, max over median |residual|");
  }

  void operator()() {
    const SampledResponse s = input.empty()
                                  ? SampledResponse::sample(reflection_response(dimer.params().normalized()), grid.grid())
                                  : load_spectrum(input, offset);
    const KKResult k = standard_kk(s, grid.hilbert(resolve_threads(common.threads)));
    PoleFitOptions po;
    po.peak_ratio = peak_ratio;
    const PoleFitResult f = fit_uhp_pole(k.standard_residual, s.grid, po);
    const std::vector<double> model = lorentzian_residual(f.residue, f.location, s.grid);
    json derived = report::to_json(f);
    derived["l2_standard"] = number(k.l2_standard);
    if (input.empty()) {
      json exact = json::array();
      for (const PoleData& p : select_uhp(poles(Model{dimer.params().normalized()})))
        exact.push_back(report::to_json(p));
      derived["exact_uhp_poles"] = exact;
    }
    Output out(output_dir(common.out), cmd);
    out.table("fit_pole.csv", [&](std::ostream& os) {
      os << "omega,residual,fit\n";
      for (std::size_t i = 0; i < model.size(); ++i)
        os << report::format_double(s.grid.at(i)) << ',' << report::format_double(k.standard_residual[i]) << ','
           << report::format_double(model[i]) << '\n';
    });
    out.finish(derived, report::to_json(f),
               "z0=" + num(f.location) + " rho=" + num(f.residue) + " rms=" + num(f.rms_misfit) +
                   (f.converged ? "" : " (not converged)"));
  }
};

struct DiagnoseCmd {
  Command cmd;
  Common common;
  GridOpts grid;
  std::string input;
  double offset = 0.0;
  double peak_ratio = PoleFitOptions{}.peak_ratio;

  explicit DiagnoseCmd(CLI::App& app)
      : cmd(app, "diagnose", "KK check of an external spectrum, with a pole fit when it fails") {
    common.bind(cmd);
    grid.bind(cmd);
    cmd.bind("--input", input, "spectrum CSV (omega,re,im)")->required();
    cmd.bind("--offset", offset, "constant subtracted from the spectrum (1 for a raw reflection)");
    cmd.bind("--peak-ratio", peak_ratio, "detection threshold, max over median |residual|");
  }

  void operator()() {
    const SampledResponse s = load_spectrum(input, offset);
    const HilbertOptions h = grid.hilbert(resolve_threads(common.threads));
    PoleFitOptions po;
    po.peak_ratio = peak_ratio;
    KKResult k = standard_kk(s, h);
    json derived{{"n_points", s.grid.n_points}, {"half_width", s.grid.half_width}};
    json summary;
    std::string line;
    try {
      const PoleFitResult f = fit_uhp_pole(k.standard_residual, s.grid, po);
      const PoleData fitted{f.location, f.residue, false};
      k = corrected_kk(s, std::span(&fitted, 1), h);
      derived["fit"] = report::to_json(f);
      summary = {{"verdict", "uhp_pole"},
                 {"l2_standard", number(k.l2_standard)},
                 {"l2_corrected", number(k.l2_corrected)},
                 {"reduction_factor", number(k.reduction_factor)}};
      line = "verdict=uhp_pole z0=" + num(f.location) + " rho=" + num(f.residue) +
             " l2_standard=" + num(k.l2_standard) + " reduction_factor=" + num(k.reduction_factor);
    } catch (const NotDetectableError& e) {
      derived["fit"] = nullptr;
      derived["note"] = e.what();
      summary = {{"verdict", "causal"}, {"l2_standard", number(k.l2_standard)}};
      line = "verdict=causal l2_standard=" + num(k.l2_standard);
    }
    derived.update(summary);
    Output out(output_dir(common.out), cmd);
    out.table("diagnose.csv", [&](std::ostream& os) { report::write_kk_csv(os, s, k); });
    out.finish(derived, summary, line);
  }
};

// Finds --config in argv without parsing anything else.
std::string config_path(const std::vector<std::string>& args) {
  for (std::size_t i = 1; i < args.size(); ++i) {
    if (args[i] == "--config") {
      if (i + 1 >= args.size()) throw ValidationError("--config needs a file path");
      return args[i + 1];
    }
    if (args[i].rfind("--config=", 0) == 0) return args[i].substr(9);
  }
  return {};
}

json load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open config '" + path + "'");
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ValidationError("malformed config '" + path + "': " + e.what());
  }
  // a manifest is accepted as a config
  if (j.is_object() && j.contains("config") && j["config"].is_object()) j = j["config"];
  if (!j.is_object()) throw ValidationError("config '" + path + "' must be a JSON object");
  return j;
}

int dispatch(std::vector<std::string> args) {
  CLI::App app{"Residue-corrected Kramers-Kronig analysis of PT-symmetric resonators", "ptkk"};
  app.set_version_flag("--version", std::string(version()));
  std::string config_file;
  app.add_option("--config", config_file, "JSON run config; explicit flags override it");
  app.require_subcommand(1);

  PolesCmd poles_cmd(app);
  TrajectoryCmd trajectory_cmd(app);
  PhaseCmd phase_cmd(app);
  KKCmd kk_cmd(app);
  ScalingCmd scaling_cmd(app);
  SshCmd ssh_cmd(app);
  FitPoleCmd fit_cmd(app);
  DiagnoseCmd diagnose_cmd(app);
  std::vector<std::pair<Command*, std::function<void()>>> commands{
      {&poles_cmd.cmd, std::ref(poles_cmd)},   {&trajectory_cmd.cmd, std::ref(trajectory_cmd)},
      {&phase_cmd.cmd, std::ref(phase_cmd)},   {&kk_cmd.cmd, std::ref(kk_cmd)},
      {&scaling_cmd.cmd, std::ref(scaling_cmd)}, {&ssh_cmd.cmd, std::ref(ssh_cmd)},
      {&fit_cmd.cmd, std::ref(fit_cmd)},       {&diagnose_cmd.cmd, std::ref(diagnose_cmd)}};

  json config;
  if (const std::string path = config_path(args); !path.empty()) {
    config = load_config(path);
    const bool named = std::any_of(args.begin() + 1, args.end(), [&](const std::string& a) {
      return std::any_of(commands.begin(), commands.end(), [&](const auto& c) { return c.first->name() == a; });
    });
    if (!named && config.contains("command") && config["command"].is_string())
      args.insert(args.begin() + 1, config["command"].get<std::string>());
  }

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend() - 1);
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitValidation;
  }

  for (auto& [cmd, body] : commands) {
    if (!cmd->app()->parsed()) continue;
    if (!config.is_null()) {
      if (config.contains("command") && config["command"] != cmd->name())
        throw ValidationError("config is for '" + config["command"].get<std::string>() + "', not '" +
                              cmd->name() + "'");
      cmd->apply(config);
    }
    body();
    return kExitOk;
  }
  return kExitValidation;
}

}  // namespace

int run(const std::vector<std::string>& args) {
  try {
    return dispatch(args);
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << std::endl;
    return kExitValidation;
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << std::endl;
    return kExitNumerical;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << std::endl;
    return 1;
  }
}

int run(int argc, const char* const* argv) { return run(std::vector<std::string>(argv, argv + argc)); }

}  // namespace ptkk::cli
