#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "vpmcf/blowup.hpp"
#include "vpmcf/diagnostics.hpp"
#include "vpmcf/flow.hpp"
#include "vpmcf/io.hpp"
#include "vpmcf/scenario.hpp"
#include "vpmcf/trilobite.hpp"
#include "vpmcf/verify.hpp"

namespace fs = std::filesystem;
using namespace vpmcf;

namespace {

enum Exit { kPass = 0, kCertFail = 1, kUsage = 2, kNumeric = 3 };

int exit_for(const Error& e) {
  switch (e.kind()) {
    case ErrorKind::BadParameters:
    case ErrorKind::UnknownSuite:
    case ErrorKind::Io:
    case ErrorKind::ParameterDomain:
    case ErrorKind::QueryOutOfRange:
    case ErrorKind::EmptyWindow:
    case ErrorKind::NonNegativeTau:
    case ErrorKind::TooFewVertices:
    case ErrorKind::BetaTooLarge:
      return kUsage;
    default:
      return kNumeric;
  }
}

Vec2 parse_point(const std::string& s) {
  const auto comma = s.find(',');
  if (comma == std::string::npos) throw Error(ErrorKind::BadParameters, "expected X,Y but got '" + s + "'");
  try {
    return {std::stod(s.substr(0, comma)), std::stod(s.substr(comma + 1))};
  } catch (const std::exception&) {
    throw Error(ErrorKind::BadParameters, "expected X,Y but got '" + s + "'");
  }
}

int cmd_run(const std::string& path) {
  const ScenarioConfig cfg = load_config(path);
  const fs::path out(cfg.output);
  fs::create_directories(out);
  const ClosedCurve c0 = make_scenario(cfg);
  std::size_t written = 0;
  auto observer = [&](const Snapshot& s) {
    if (s.step % cfg.snapshot_every == 0) write_snapshot(out / ("snap_" + std::to_string(written++) + ".csv"), s.curve);
  };
  const FlowHistory h = run(c0, cfg.flow, observer);
  if (h.back().step % cfg.snapshot_every != 0) write_snapshot(out / ("snap_" + std::to_string(written++) + ".csv"), h.back().curve);
  {
    std::ofstream os(out / "series.csv");
    write_series_csv(os, series(h));
  }
  write_run_json(out / "run.json", h);
  std::printf("t=%.6f steps=%zu snapshots=%zu status=%s\n", h.back().curve.time, h.steps.size(), written,
              h.status == RunStatus::Completed ? "completed" : "singularity");
  return kPass;
}

int cmd_verify(const std::string& name) {
  std::vector<std::string> names = name == "all" ? suite_names() : std::vector<std::string>{name};
  PresetRuns presets;
  bool ok = true;
  std::string all_text;
  for (const auto& n : names) {
    const SuiteReport rep = run_suite(n, presets);
    const std::string text = rep.text();
    std::ofstream("verify_" + n + ".txt") << text;
    std::cout << text;
    all_text += text;
    ok = ok && rep.pass();
  }
  if (name == "all") std::ofstream("verify_all.txt") << all_text;
  return ok ? kPass : kCertFail;
}

int cmd_blowup(const std::string& dir, const std::string& center, double T, double lambda, bool automatic) {
  const FlowHistory h = load_history(dir);
  RescalingFrame f;
  if (automatic) {
    f.T = h.status == RunStatus::SingularityReached ? h.singular_time : h.back().curve.time;
    const auto& last = h.back();
    if (last.cache.diameter < 0.1 * h.front().cache.diameter) {
      f.center = Vec2::Zero();
      for (const auto& v : last.curve.vertices) f.center += v;
      f.center /= static_cast<double>(last.curve.size());
    } else {
      std::size_t arg = 0;
      for (std::size_t i = 0; i < last.curve.size(); ++i)
        if (std::abs(last.cache.curvature[i]) > std::abs(last.cache.curvature[arg])) arg = i;
      f.center = last.curve.vertices[arg];
    }
    const double span = f.T - h.front().curve.time;
    f.lambda = span > 0.0 ? 1.0 / std::sqrt(span) : 1.0;
  } else {
    if (center.empty() || !std::isfinite(T) || !std::isfinite(lambda)) {
      throw Error(ErrorKind::BadParameters, "blowup needs --center, --time and --lambda, or --auto");
    }
    f = {parse_point(center), T, lambda};
  }
  validate(f);
  const FlowHistory r = rescale(h, f);
  const fs::path out = fs::path(dir) / "blowup";
  write_history_snapshots(out, r);

  std::ostringstream os;
  char buf[256];
  std::snprintf(buf, sizeof buf, "frame center=%.10g,%.10g T=%.10g lambda=%.10g\n", f.center.x(), f.center.y(), f.T, f.lambda);
  os << buf << "rescaled snapshots " << r.snapshots.size() << "\n";
  const auto pi = psi_invariance_check(h, f);
  Certificate psi{"psi_invariance"};
  psi.update(pi.tolerance - pi.discrepancy);
  std::snprintf(buf, sizeof buf, "psi integrals source=%.10g rescaled=%.10g\n", pi.source_integral, pi.rescaled_integral);
  os << buf;
  for (const auto& sn : r.snapshots) {
    if (!(sn.curve.time < 0.0)) continue;
    std::snprintf(buf, sizeof buf, "tau=%.6e shrinker_residual=%.6e hbar=%.6e\n", sn.curve.time, shrinker_residual(sn.curve, sn.curve.time),
                  sn.hbar);
    os << buf;
  }
  std::optional<Certificate> decay;
  try {
    const auto v = hbar_decay_check(r);
    decay.emplace("hbar_decay");
    decay->update(v.empty() ? 0.0 : -static_cast<double>(v.size()));
    os << "hbar decay violations " << v.size() << "\n";
  } catch (const Error& e) {
    os << "hbar decay skipped: " << e.what() << "\n";
  }
  if (h.status == RunStatus::SingularityReached) {
    try {
      const auto t = classify_type(h, h.singular_time);
      std::snprintf(buf, sizeof buf, "type %s C=%.6f sup=%.6f\n", t.type == SingularityType::TypeI ? "I" : "II", t.constant, t.sup);
      os << buf;
    } catch (const Error& e) {
      os << "type classification skipped: " << e.what() << "\n";
    }
  }
  os << psi.line() << "\n";
  if (decay) os << decay->line() << "\n";
  std::ofstream(fs::path(dir) / "blowup_report.txt") << os.str();
  std::cout << os.str();
  return psi.pass && (!decay || decay->pass) ? kPass : kCertFail;
}

int cmd_density(const std::string& dir, const std::string& point, double t0, double rho) {
  const FlowHistory h = load_history(dir);
  const Vec2 x0 = parse_point(point);
  const double span = std::min(t0, h.back().curve.time) - h.front().curve.time;
  if (!(span > 0.0)) throw Error(ErrorKind::QueryOutOfRange, "time is not after the first snapshot");
  DensityQuery q{x0, t0, resolved_times(h, t0), std::nullopt};
  const auto d = gaussian_density(h, q);
  for (std::size_t k = 0; k < d.times.size(); ++k) std::printf("t=%.10g density=%.10g\n", d.times[k], d.values[k]);
  std::printf("limit=%.10g\n", d.limit);
  if (std::isfinite(rho)) {
    q.rho = rho;
    q.times.clear();
    for (double f : {0.0, 0.25, 0.5, 0.75, 0.9}) q.times.push_back(h.front().curve.time + f * span);
    const auto ld = local_density(h, q);
    Certificate c{"almost_monotone"};
    c.update(ld.worst_margin);
    std::printf("local pairs=%zu violations=%zu\n%s\n", ld.pairs_checked, ld.violations, c.line().c_str());
    return c.pass ? kPass : kCertFail;
  }
  return kPass;
}

int cmd_trilobite(double rho, int n, double r, const std::string& out) {
  const TrilobiteSurface s = balance_trilobite(rho, n, r);
  const fs::path dir(out);
  fs::create_directories(dir);
  std::ofstream os(dir / "trilobite_report.csv");
  if (!os) throw Error(ErrorKind::Io, "cannot write " + (dir / "trilobite_report.csv").string());
  write_trilobite_report(os, s);
  write_trilobite_report(std::cout, s);
  const auto t = s.totals();
  const double d = hbar_derivative_at_zero(s);
  Certificate c{"trilobite"};
  c.update(1e-10 * t.area - std::abs(t.intH));
  c.update(t.intHK);
  c.update(-d);
  std::cout << c.line() << "\n";
  return c.pass ? kPass : kCertFail;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"volume preserving curve shortening flow"};
  app.require_subcommand(1);

  std::string config;
  auto* run_cmd = app.add_subcommand("run", "run a scenario from a JSON config");
  run_cmd->add_option("config", config)->required();

  std::string suite;
  auto* verify_cmd = app.add_subcommand("verify", "run a certificate suite");
  verify_cmd->add_option("suite", suite)->required();

  std::string hist, center;
  double T = NAN, lambda = NAN;
  bool automatic = false;
  auto* blowup_cmd = app.add_subcommand("blowup", "parabolic rescaling of a stored run");
  blowup_cmd->add_option("--history", hist)->required();
  auto* c_opt = blowup_cmd->add_option("--center", center);
  auto* t_opt = blowup_cmd->add_option("--time", T);
  auto* l_opt = blowup_cmd->add_option("--lambda", lambda);
  auto* a_opt = blowup_cmd->add_flag("--auto", automatic);
  a_opt->excludes(c_opt)->excludes(t_opt)->excludes(l_opt);

  std::string dhist, point;
  double dtime = NAN, rho = NAN;
  auto* density_cmd = app.add_subcommand("density", "Gaussian density at a space-time point");
  density_cmd->add_option("--history", dhist)->required();
  density_cmd->add_option("--point", point)->required();
  density_cmd->add_option("--time", dtime)->required();
  density_cmd->add_option("--rho", rho);

  double trho = 1.0, tr = 0.005;
  int tn = 7;
  std::string tout = ".";
  auto* tri_cmd = app.add_subcommand("trilobite", "integrals of the trilobite surface");
  tri_cmd->add_option("--rho", trho)->required();
  tri_cmd->add_option("--n", tn)->required();
  tri_cmd->add_option("--r", tr)->required();
  tri_cmd->add_option("--out", tout);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kPass : kUsage;
  }

  try {
    if (*run_cmd) return cmd_run(config);
    if (*verify_cmd) return cmd_verify(suite);
    if (*blowup_cmd) return cmd_blowup(hist, center, T, lambda, automatic);
    if (*density_cmd) return cmd_density(dhist, point, dtime, rho);
    if (*tri_cmd) return cmd_trilobite(trho, tn, tr, tout);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_for(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kNumeric;
  }
  return kUsage;
}
