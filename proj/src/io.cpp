#include "pencil/io.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "pencil/errors.hpp"

namespace pencil::io {

namespace {

[[noreturn]] void fail(const std::string& where, const std::string& what) {
  throw ConfigError(where + ": " + what);
}

std::string join(const std::string& base, const std::string& key) { return base.empty() ? key : base + "." + key; }

void require_object(const json& j, const std::string& where) {
  if (!j.is_object()) fail(where.empty() ? "config" : where, "expected an object");
}

void reject_unknown(const json& j, const std::string& where, std::initializer_list<const char*> allowed) {
  const std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& [key, value] : j.items())
    if (!ok.count(key)) fail(join(where, key), "unknown field");
}

int get_int(const json& j, const std::string& where) {
  if (!j.is_number_integer()) fail(where, "expected an integer");
  return j.get<int>();
}

double get_double(const json& j, const std::string& where) {
  if (!j.is_number()) fail(where, "expected a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) fail(where, "expected a finite number");
  return v;
}

template <class T, class F>
void optional_field(const json& obj, const std::string& base, const char* key, T& out, F get) {
  if (auto it = obj.find(key); it != obj.end()) out = get(*it, join(base, key));
}

double positive(double v, const std::string& where) {
  if (!(v > 0.0)) fail(where, "must be positive");
  return v;
}

std::string bare_message(const std::exception& e) {
  std::string msg = e.what();
  const auto colon = msg.find(": ");
  return colon == std::string::npos ? msg : msg.substr(colon + 2);
}

}  // namespace

json to_json(cplx z) { return json{{"re", z.real()}, {"im", z.imag()}}; }

cplx complex_from_json(const json& j, const std::string& where) {
  require_object(j, where);
  reject_unknown(j, where, {"re", "im"});
  double re = 0.0;
  double im = 0.0;
  optional_field(j, where, "re", re, get_double);
  optional_field(j, where, "im", im, get_double);
  return {re, im};
}

PotentialCoefficients parse_potential(const json& doc) {
  require_object(doc, "");
  if (!doc.contains("m")) fail("m", "missing required field");
  const int m = get_int(doc["m"], "m");
  if (m < 1) fail("m", "must be >= 1");
  std::vector<CoefficientEntry> entries;
  if (auto it = doc.find("entries"); it != doc.end()) {
    if (!it->is_array()) fail("entries", "expected an array");
    for (std::size_t i = 0; i < it->size(); ++i) {
      const auto& e = (*it)[i];
      const std::string where = "entries[" + std::to_string(i) + "]";
      require_object(e, where);
      reject_unknown(e, where, {"gamma", "s", "n", "re", "im"});
      for (const char* key : {"gamma", "s", "n"})
        if (!e.contains(key)) fail(join(where, key), "missing required field");
      CoefficientEntry c;
      c.gamma = get_int(e["gamma"], join(where, "gamma"));
      c.s = get_int(e["s"], join(where, "s"));
      c.n = get_int(e["n"], join(where, "n"));
      double re = 0.0;
      double im = 0.0;
      optional_field(e, where, "re", re, get_double);
      optional_field(e, where, "im", im, get_double);
      c.value = {re, im};
      entries.push_back(c);
    }
  }
  try {
    return build_potential(m, entries);
  } catch (const IndexOutOfRange& e) {
    throw ConfigError(bare_message(e));
  }
}

RunConfig parse_config(const json& doc) {
  require_object(doc, "");
  reject_unknown(doc, "", {"schema", "m", "entries", "truncation", "k", "spectrum", "verify", "extraction",
                           "reconstruction"});
  RunConfig cfg;
  if (auto it = doc.find("schema"); it != doc.end() && get_int(*it, "schema") != kSchemaVersion)
    fail("schema", "unsupported version");
  cfg.potential = parse_potential(doc);
  optional_field(doc, "", "truncation", cfg.truncation, get_int);
  if (cfg.truncation < 1) fail("truncation", "must be >= 1");

  if (auto it = doc.find("k"); it != doc.end()) {
    if (!it->is_array() || it->empty()) fail("k", "expected a non-empty array of {re, im}");
    cfg.k_points.clear();
    for (std::size_t i = 0; i < it->size(); ++i)
      cfg.k_points.push_back(complex_from_json((*it)[i], "k[" + std::to_string(i) + "]"));
  }

  if (auto it = doc.find("spectrum"); it != doc.end()) {
    const std::string w = "spectrum";
    require_object(*it, w);
    reject_unknown(*it, w, {"sectors", "r_min", "r_max", "tol_root", "ray_inset", "seed"});
    auto& s = cfg.spectrum;
    if (auto sec = it->find("sectors"); sec != it->end()) {
      if (!sec->is_array()) fail(join(w, "sectors"), "expected an array of integers");
      for (std::size_t i = 0; i < sec->size(); ++i) {
        const std::string where = join(w, "sectors") + "[" + std::to_string(i) + "]";
        const int id = get_int((*sec)[i], where);
        if (id < 0 || id >= sector_count(cfg.potential.m())) fail(where, "sector id out of range");
        s.sectors.push_back(id);
      }
    }
    optional_field(*it, w, "r_min", s.r_min, get_double);
    optional_field(*it, w, "r_max", s.r_max, get_double);
    optional_field(*it, w, "tol_root", s.options.tol_root, get_double);
    optional_field(*it, w, "ray_inset", s.options.ray_inset, get_double);
    int seed = static_cast<int>(s.options.seed);
    optional_field(*it, w, "seed", seed, get_int);
    if (seed < 0) fail(join(w, "seed"), "must be >= 0");
    s.options.seed = static_cast<unsigned>(seed);
    if (!(s.r_min > 0.0)) fail(join(w, "r_min"), "must be positive");
    if (!(s.r_max > s.r_min)) fail(join(w, "r_max"), "must exceed r_min");
  }

  if (auto it = doc.find("verify"); it != doc.end()) {
    const std::string w = "verify";
    require_object(*it, w);
    reject_unknown(*it, w, {"x_max", "points", "x_far", "rtol", "atol"});
    auto& v = cfg.verify;
    optional_field(*it, w, "x_max", v.x_max, get_double);
    optional_field(*it, w, "points", v.points, get_int);
    optional_field(*it, w, "x_far", v.ode.x_far, get_double);
    optional_field(*it, w, "rtol", v.ode.rtol, get_double);
    optional_field(*it, w, "atol", v.ode.atol, get_double);
    positive(v.x_max, join(w, "x_max"));
    if (v.points < 2) fail(join(w, "points"), "must be >= 2");
    if (!(v.ode.x_far > v.x_max)) fail(join(w, "x_far"), "must exceed x_max");
    positive(v.ode.rtol, join(w, "rtol"));
    positive(v.ode.atol, join(w, "atol"));
  }

  if (auto it = doc.find("extraction"); it != doc.end()) {
    const std::string w = "extraction";
    require_object(*it, w);
    reject_unknown(*it, w, {"points", "radius_fraction", "stability_tol"});
    auto& e = cfg.extraction;
    optional_field(*it, w, "points", e.points, get_int);
    optional_field(*it, w, "radius_fraction", e.radius_fraction, get_double);
    optional_field(*it, w, "stability_tol", e.stability_tol, get_double);
    if (e.points < 8) fail(join(w, "points"), "must be >= 8");
    if (!(e.radius_fraction > 0.0 && e.radius_fraction < 0.5)) fail(join(w, "radius_fraction"), "must lie in (0, 0.5)");
    positive(e.stability_tol, join(w, "stability_tol"));
  }

  if (auto it = doc.find("reconstruction"); it != doc.end()) {
    const std::string w = "reconstruction";
    require_object(*it, w);
    reject_unknown(*it, w, {"tol_recon", "zero_tol"});
    optional_field(*it, w, "tol_recon", cfg.reconstruction.tol_recon, get_double);
    optional_field(*it, w, "zero_tol", cfg.reconstruction.zero_tol, get_double);
    positive(cfg.reconstruction.tol_recon, join(w, "tol_recon"));
  }
  return cfg;
}

json read_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path.string() + ": cannot open");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

RunConfig load_config(const std::filesystem::path& path) {
  const auto doc = read_json(path);
  try {
    return parse_config(doc);
  } catch (const ConfigError& e) {
    throw ConfigError(path.string() + ": " + bare_message(e));
  }
}

json to_json(const PotentialCoefficients& p) {
  json entries = json::array();
  for (const auto& e : p.entries())
    entries.push_back({{"gamma", e.gamma}, {"s", e.s}, {"n", e.n}, {"re", e.value.real()}, {"im", e.value.imag()}});
  return json{{"m", p.m()}, {"entries", entries}};
}

json to_json(const SeriesTable& table) {
  json series = json::array();
  for (int tau = 0; tau < table.order().D(); ++tau) {
    json constants = json::array();
    json poles = json::array();
    for (int alpha = 1; alpha <= table.truncation(); ++alpha) {
      const auto& lv = table.level(tau, alpha);
      constants.push_back({{"alpha", alpha}, {"re", table.constant(tau, alpha).real()},
                           {"im", table.constant(tau, alpha).imag()}});
      for (const auto& [key, b] : lv.poles())
        poles.push_back({{"n", key.n}, {"j", key.j}, {"alpha", alpha}, {"re", b.real()}, {"im", b.imag()}});
    }
    series.push_back({{"tau", tau}, {"constants", constants}, {"poles", poles}});
  }
  return json{{"schema", kSchemaVersion},
              {"kind", table.kind() == SeriesKind::Special ? "special" : "adjoint"},
              {"m", table.m()},
              {"truncation", table.truncation()},
              {"series", series}};
}

json to_json(const SeriesDiagnostics& d) {
  auto sums = [](const SeriesSums& s) {
    return json{{"off_diagonal", s.off_diagonal}, {"diagonal", s.diagonal}, {"constant", s.constant}};
  };
  json per = json::array();
  for (const auto& s : d.per_tau) per.push_back(sums(s));
  return json{{"per_tau", per}, {"total", sums(d.total)}, {"tail_ratio", d.tail_ratio},
              {"tail_bound", d.tail_bound}, {"decaying", d.decaying}};
}

json to_json(const SpectrumReport& r) {
  json eig = json::array();
  for (const auto& e : r.eigenvalues)
    eig.push_back({{"re", e.k.real()}, {"im", e.k.imag()}, {"residual", e.residual}, {"multiplicity", e.multiplicity}});
  return json{{"sector", r.sector}, {"label", r.label}, {"r_min", r.r_min}, {"r_max", r.r_max},
              {"count", r.count}, {"eigenvalues", eig}};
}

json to_json(const ReconstructionReport& r) {
  json levels = json::array();
  for (const auto& l : r.levels)
    levels.push_back({{"alpha", l.alpha}, {"residual", l.residual}, {"relative", l.relative},
                      {"unknowns", l.unknowns}, {"equations", l.equations}});
  json held = json::array();
  for (const auto& h : r.held_out) held.push_back({{"shift", h.alpha}, {"residual", h.residual}});
  json out{{"schema", kSchemaVersion}, {"recovered", to_json(r.recovered)}, {"levels", levels}, {"held_out", held}};
  if (r.has_reference) {
    json errors = json::array();
    for (const auto& [key, e] : r.errors) errors.push_back({{"gamma", key.gamma}, {"s", key.s}, {"n", key.n}, {"error", e}});
    out["errors"] = errors;
    out["max_error"] = r.max_error;
  }
  return out;
}

json normalizers_to_json(const ScatteringData& data) {
  json list = json::array();
  for (const auto& [key, v] : data.normalizers())
    list.push_back({{"n", key.n}, {"j", key.j}, {"v", key.v}, {"re", v.real()}, {"im", v.imag()}});
  json out{{"schema", kSchemaVersion}, {"m", data.m()}, {"max_harmonic", data.max_harmonic()}, {"normalizers", list}};
  if (!data.residue_records().empty()) {
    json rec = json::array();
    for (const auto& [key, r] : data.residue_records())
      rec.push_back({{"n", key.n}, {"j", key.j}, {"v", key.v}, {"sector", r.sector}, {"radius", r.radius},
                     {"radius_gap", r.radius_gap}, {"wronskian_zeros", r.wronskian_zeros}});
    out["residues"] = rec;
  }
  return out;
}

ScatteringData parse_normalizers(const json& doc) {
  require_object(doc, "");
  reject_unknown(doc, "", {"schema", "m", "max_harmonic", "normalizers", "residues"});
  if (auto it = doc.find("schema"); it != doc.end() && get_int(*it, "schema") != kSchemaVersion)
    fail("schema", "unsupported version");
  for (const char* key : {"m", "max_harmonic", "normalizers"})
    if (!doc.contains(key)) fail(key, "missing required field");
  const int m = get_int(doc["m"], "m");
  if (m < 1) fail("m", "must be >= 1");
  const int nmax = get_int(doc["max_harmonic"], "max_harmonic");
  if (nmax < 0) fail("max_harmonic", "must be >= 0");
  const auto& list = doc["normalizers"];
  if (!list.is_array()) fail("normalizers", "expected an array");
  ScatteringData::Normalizers table;
  for (std::size_t i = 0; i < list.size(); ++i) {
    const auto& e = list[i];
    const std::string where = "normalizers[" + std::to_string(i) + "]";
    require_object(e, where);
    reject_unknown(e, where, {"n", "j", "v", "re", "im"});
    for (const char* key : {"n", "j", "v"})
      if (!e.contains(key)) fail(join(where, key), "missing required field");
    const int n = get_int(e["n"], join(where, "n"));
    const int j = get_int(e["j"], join(where, "j"));
    const int v = get_int(e["v"], join(where, "v"));
    if (n < 1) fail(join(where, "n"), "must be >= 1");
    if (j < 1 || j >= 2 * m) fail(join(where, "j"), "must lie in [1, 2m-1]");
    if (v < 0 || v >= 2 * m) fail(join(where, "v"), "must lie in [0, 2m-1]");
    double re = 0.0;
    double im = 0.0;
    optional_field(e, where, "re", re, get_double);
    optional_field(e, where, "im", im, get_double);
    if (!table.emplace(NormalizerKey{n, j, v}, cplx(re, im)).second) fail(where, "duplicate (n, j, v)");
  }
  return ScatteringData(PencilOrder(m), nmax, std::move(table));
}

void write_atomic(const std::filesystem::path& path, const std::string& contents) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw ConfigError(tmp.string() + ": cannot open for writing");
    out << contents;
    if (!out.flush()) throw ConfigError(tmp.string() + ": write failed");
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp);
    throw ConfigError(path.string() + ": " + ec.message());
  }
}

}  // namespace pencil::io
