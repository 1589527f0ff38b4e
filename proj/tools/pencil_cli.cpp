#include <CLI11.hpp>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>

#include "pencil/adjoint_solver.hpp"
#include "pencil/errors.hpp"
#include "pencil/io.hpp"

using namespace pencil;
using io::json;

namespace {

enum class Level { Error = 0, Warn = 1, Info = 2, Debug = 3 };

Level log_level() {
  static const Level level = [] {
    const char* env = std::getenv("PENCIL_LOG");
    const std::string s = env ? env : "warn";
    if (s == "error") return Level::Error;
    if (s == "info") return Level::Info;
    if (s == "debug") return Level::Debug;
    return Level::Warn;
  }();
  return level;
}

void log(Level level, const std::string& msg) {
  static const char* names[] = {"error", "warn", "info", "debug"};
  if (level <= log_level()) std::cerr << "[" << names[static_cast<int>(level)] << "] " << msg << "\n";
}

constexpr int kExitConfig = 2;
constexpr int kExitCompute = 3;
constexpr int kExitInconsistent = 4;

struct Options {
  std::string config;
  std::string normalizers;
  std::string out;
  std::string csv;
  int truncation = -1;
  int sector = -1;
  double r_min = -1.0;
  double r_max = -1.0;
  int seed = -1;
};

io::RunConfig load(const Options& o) {
  if (o.config.empty()) throw ConfigError("--config is required");
  auto cfg = io::load_config(o.config);
  if (o.truncation >= 0) {
    if (o.truncation < 1) throw ConfigError("--truncation must be >= 1");
    cfg.truncation = o.truncation;
  }
  if (o.r_min >= 0.0) cfg.spectrum.r_min = o.r_min;
  if (o.r_max >= 0.0) cfg.spectrum.r_max = o.r_max;
  if (!(cfg.spectrum.r_min > 0.0 && cfg.spectrum.r_max > cfg.spectrum.r_min))
    throw ConfigError("--rmin/--rmax must satisfy 0 < rmin < rmax");
  if (o.seed >= 0) cfg.spectrum.options.seed = static_cast<unsigned>(o.seed);
  if (o.sector >= 0) {
    if (o.sector >= sector_count(cfg.potential.m())) throw ConfigError("--sector out of range");
    cfg.spectrum.sectors = {o.sector};
  }
  log(Level::Info, "loaded " + o.config + " (m = " + std::to_string(cfg.potential.m()) +
                       ", " + std::to_string(cfg.potential.table().size()) + " coefficients)");
  return cfg;
}

void emit(const Options& o, const json& doc) {
  const std::string text = doc.dump(2) + "\n";
  if (o.out.empty()) {
    std::cout << text;
  } else {
    io::write_atomic(o.out, text);
    log(Level::Info, "wrote " + o.out);
  }
}

json report_header(const char* command) { return json{{"schema", io::kSchemaVersion}, {"command", command}}; }

void cmd_forward(const Options& o) {
  const auto cfg = load(o);
  const auto v = solve_coefficients(cfg.potential, cfg.truncation);
  auto doc = report_header("forward");
  doc["potential"] = io::to_json(cfg.potential);
  doc["coefficients"] = io::to_json(v);
  doc["diagnostics"] = io::to_json(series_diagnostics(v));
  emit(o, doc);
}

void cmd_spectrum(const Options& o) {
  const auto cfg = load(o);
  const auto v = solve_coefficients(cfg.potential, cfg.truncation);
  std::vector<int> sectors = cfg.spectrum.sectors;
  if (sectors.empty())
    for (int s = 0; s < sector_count(cfg.potential.m()); ++s) sectors.push_back(s);
  auto doc = report_header("spectrum");
  json reports = json::array();
  for (int s : sectors) {
    const auto r = find_eigenvalues(v, s, cfg.spectrum.r_min, cfg.spectrum.r_max, cfg.spectrum.options);
    log(Level::Info, "sector " + std::to_string(s) + ": " + std::to_string(r.count) + " eigenvalues");
    reports.push_back(io::to_json(r));
  }
  doc["reports"] = reports;
  emit(o, doc);
}

void cmd_scattering(const Options& o) {
  const auto cfg = load(o);
  auto fwd = std::make_shared<const SolutionCoefficients>(solve_coefficients(cfg.potential, cfg.truncation));
  auto data = extract_normalizers(scattering_matrix(fwd, 0, cfg.potential.max_harmonic()), cfg.extraction);
  auto doc = report_header("scattering");
  json samples = json::array();
  for (cplx k : cfg.k_points) {
    const auto ctx = sector_ordering(cfg.potential.m(), k);
    const auto s = data.matrix(ctx.sector, k);
    json rows = json::array();
    for (int d = 0; d < s.rows(); ++d) {
      json row = json::array();
      for (int g = 0; g < s.cols(); ++g) row.push_back(io::to_json(s(d, g)));
      rows.push_back(row);
    }
    samples.push_back({{"k", io::to_json(k)}, {"sector", ctx.sector}, {"decaying", ctx.decaying},
                       {"growing", ctx.growing}, {"S", rows}, {"W", io::to_json(wronskian(*fwd, k))}});
  }
  doc["samples"] = samples;
  doc["data"] = io::normalizers_to_json(data);
  emit(o, doc);
}

void print_summary(std::ostream& os, const ReconstructionReport& r) {
  os << "level  unknowns  equations  residual      relative\n";
  for (const auto& l : r.levels)
    os << std::setw(5) << l.alpha << std::setw(10) << l.unknowns << std::setw(11) << l.equations << "  "
       << std::scientific << std::setprecision(3) << std::setw(12) << l.residual << "  " << std::setw(10)
       << l.relative << std::defaultfloat << "\n";
  for (const auto& h : r.held_out)
    os << "held-out shift " << h.alpha << ": " << std::scientific << std::setprecision(3) << h.residual
       << std::defaultfloat << "\n";
  if (r.has_reference) {
    os << "gamma  s  n  recovered                 error\n";
    for (const auto& [key, e] : r.errors) {
      const cplx v = r.recovered.at(key.gamma, key.s, key.n);
      std::ostringstream z;
      z << std::setprecision(6) << v.real() << (v.imag() < 0 ? " - " : " + ") << std::abs(v.imag()) << "i";
      os << std::setw(5) << key.gamma << std::setw(3) << key.s << std::setw(3) << key.n << "  " << std::left
         << std::setw(24) << z.str() << std::right << std::scientific << std::setprecision(3) << e
         << std::defaultfloat << "\n";
    }
    os << "max error: " << std::scientific << std::setprecision(3) << r.max_error << std::defaultfloat << "\n";
  }
}

void emit_reconstruction(const Options& o, const char* command, const ReconstructionReport& r) {
  auto doc = report_header(command);
  doc["report"] = io::to_json(r);
  emit(o, doc);
  print_summary(o.out.empty() ? std::cerr : std::cout, r);
}

void cmd_roundtrip(const Options& o) {
  const auto cfg = load(o);
  const auto r = roundtrip(cfg.potential, cfg.truncation, cfg.extraction, cfg.reconstruction);
  emit_reconstruction(o, "roundtrip", r);
}

void cmd_invert(const Options& o) {
  if (o.normalizers.empty() == o.config.empty()) throw ConfigError("invert needs exactly one of --normalizers or --config");
  if (!o.config.empty()) {
    cmd_roundtrip(o);
    return;
  }
  ScatteringData data = [&] {
    const auto doc = io::read_json(o.normalizers);
    try {
      return io::parse_normalizers(doc);
    } catch (const ConfigError& e) {
      throw ConfigError(o.normalizers + ": " + e.what());
    }
  }();
  const int truncation = o.truncation >= 1 ? o.truncation : kDefaultTruncation;
  const auto r = reconstruct(data, truncation);
  emit_reconstruction(o, "invert", r);
}

void cmd_verify(const Options& o) {
  const auto cfg = load(o);
  const auto& p = cfg.potential;
  const int m = p.m();
  const auto v = solve_coefficients(p, cfg.truncation);
  std::vector<double> grid;
  for (int i = 0; i < cfg.verify.points; ++i) grid.push_back(cfg.verify.x_max * i / (cfg.verify.points - 1));

  std::ostringstream csv;
  if (!o.csv.empty()) csv << "k_re,k_im,tau,x,series_re,series_im,ode_re,ode_im,residual\n";

  auto doc = report_header("verify");
  json checks = json::array();
  double worst_residual = 0.0;
  double worst_rel = 0.0;
  for (cplx k : cfg.k_points) {
    for (int tau = 0; tau < 2 * m; ++tau) {
      const oracle::Evaluator f = [&](double x, int d) { return v.evaluate(tau, x, k, d); };
      double residual = 0.0;
      std::vector<double> res_at;
      for (double x : grid) {
        const double r = std::abs(oracle::residual_l(p, f, x, k));
        res_at.push_back(r);
        residual = std::max(residual, r);
      }
      json entry{{"k", io::to_json(k)}, {"tau", tau}, {"residual", residual}};
      try {
        const auto sample = oracle::integrate_ode(p, k, tau, grid, cfg.verify.ode);
        const auto err = oracle::compare(f, sample);
        entry["ode_max_abs"] = err.max_abs;
        entry["ode_max_rel"] = err.max_rel;
        entry["ode_steps"] = sample.steps;
        worst_rel = std::max(worst_rel, err.max_rel);
        if (!o.csv.empty())
          for (std::size_t i = 0; i < grid.size(); ++i) {
            const cplx s = f(grid[i], 0);
            const cplx y = sample.values[0][i];
            csv << std::setprecision(17) << k.real() << ',' << k.imag() << ',' << tau << ',' << grid[i] << ','
                << s.real() << ',' << s.imag() << ',' << y.real() << ',' << y.imag() << ',' << res_at[i] << "\n";
          }
      } catch (const PencilError& e) {
        entry["ode_error"] = e.what();
        log(Level::Warn, std::string("oracle skipped: ") + e.what());
      }
      worst_residual = std::max(worst_residual, residual);
      checks.push_back(entry);
    }
  }
  doc["checks"] = checks;
  doc["max_residual"] = worst_residual;
  doc["max_ode_relative"] = worst_rel;
  if (!o.csv.empty()) io::write_atomic(o.csv, csv.str());
  emit(o, doc);
}

int exit_code(const PencilError& e) {
  switch (e.error_class()) {
    case ErrorClass::Config:
      return kExitConfig;
    case ErrorClass::Inconsistent:
      return kExitInconsistent;
    case ErrorClass::Compute:
      break;
  }
  return kExitCompute;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Forward, spectral and inverse computations for higher-order operator pencils"};
  app.require_subcommand(1);
  Options o;

  auto add_common = [&](CLI::App* sub, bool config_required) {
    auto* c = sub->add_option("--config", o.config, "JSON run configuration");
    if (config_required) c->required();
    sub->add_option("--truncation", o.truncation, "Series truncation A");
    sub->add_option("--out", o.out, "Output path (default: stdout)");
  };

  auto* forward = app.add_subcommand("forward", "Series coefficient tables and diagnostics");
  add_common(forward, true);
  auto* spectrum = app.add_subcommand("spectrum", "Eigenvalues in sector annuli");
  add_common(spectrum, true);
  spectrum->add_option("--sector", o.sector, "Sector id (default: all)");
  spectrum->add_option("--rmin", o.r_min, "Inner radius");
  spectrum->add_option("--rmax", o.r_max, "Outer radius");
  spectrum->add_option("--seed", o.seed, "Contour jitter seed");
  auto* scattering = app.add_subcommand("scattering", "Scattering matrix samples and normalizers");
  add_common(scattering, true);
  auto* invert = app.add_subcommand("invert", "Reconstruct the potential from normalizers");
  add_common(invert, false);
  invert->add_option("--normalizers", o.normalizers, "Normalizer table (JSON)");
  auto* rt = app.add_subcommand("roundtrip", "Forward, extract, reconstruct and compare");
  add_common(rt, true);
  auto* verify = app.add_subcommand("verify", "Series against residuals and direct integration");
  add_common(verify, true);
  verify->add_option("--csv", o.csv, "Plot-ready CSV of series and ODE values");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (*forward) cmd_forward(o);
    else if (*spectrum) cmd_spectrum(o);
    else if (*scattering) cmd_scattering(o);
    else if (*invert) cmd_invert(o);
    else if (*rt) cmd_roundtrip(o);
    else if (*verify) cmd_verify(o);
  } catch (const PencilError& e) {
    log(Level::Error, e.what());
    return exit_code(e);
  } catch (const std::exception& e) {
    log(Level::Error, e.what());
    return kExitCompute;
  }
  return 0;
}
