#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "pencil/oracle.hpp"
#include "pencil/scattering.hpp"
#include "pencil/spectral.hpp"

namespace pencil::io {

using json = nlohmann::json;

inline constexpr int kSchemaVersion = 1;

struct SpectrumSettings {
  std::vector<int> sectors;  // empty: every sector
  double r_min = 0.5;
  double r_max = 5.0;
  SpectrumOptions options;
};

struct VerifySettings {
  double x_max = 5.0;
  int points = 11;
  oracle::OdeOptions ode;
};

/// Parsed run configuration. Only `m` and `entries` are required.
struct RunConfig {
  PotentialCoefficients potential{PencilOrder(1)};
  int truncation = kDefaultTruncation;
  /// Sample points for `scattering` and `verify`.
  std::vector<cplx> k_points{cplx(1.0, 1.0), cplx(-0.7, 1.3), cplx(0.4, 2.1)};
  SpectrumSettings spectrum;
  VerifySettings verify;
  ExtractionOptions extraction;
  ReconstructionOptions reconstruction;
};

/// Throws ConfigError naming the offending field, e.g. "entries[1].gamma".
PotentialCoefficients parse_potential(const json& doc);
RunConfig parse_config(const json& doc);
/// Reads and parses a JSON file; syntax errors are reported as ConfigError with the position.
json read_json(const std::filesystem::path& path);
RunConfig load_config(const std::filesystem::path& path);

json to_json(cplx z);
cplx complex_from_json(const json& j, const std::string& where);

json to_json(const PotentialCoefficients& p);
json to_json(const SeriesTable& table);
json to_json(const SeriesDiagnostics& d);
json to_json(const SpectrumReport& r);
json to_json(const ReconstructionReport& r);
/// {"schema", "m", "max_harmonic", "normalizers": [{n, j, v, re, im}], "residues": [...]}
json normalizers_to_json(const ScatteringData& data);
/// Accepts the object written by normalizers_to_json. Throws ConfigError.
ScatteringData parse_normalizers(const json& doc);

/// Writes through a temporary file in the same directory and renames it into place.
void write_atomic(const std::filesystem::path& path, const std::string& contents);

}  // namespace pencil::io
