#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "pencil/errors.hpp"
#include "pencil/io.hpp"

using namespace pencil;
using io::json;

namespace {

std::string config_error(const json& doc) {
  try {
    io::parse_config(doc);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return {};
}

}  // namespace

TEST_CASE("potential config parsing") {
  const auto doc = json::parse(R"({"m": 1, "entries": [{"gamma": 0, "s": 0, "n": 1, "re": 0.3}]})");
  const auto cfg = io::parse_config(doc);
  CHECK(cfg.potential.m() == 1);
  CHECK(cfg.potential.at(0, 0, 1) == cplx(0.3, 0.0));
  CHECK(cfg.truncation == kDefaultTruncation);
  CHECK(io::parse_potential(json::parse(R"({"m": 2})")).empty());
}

TEST_CASE("config errors name the offending field") {
  CHECK(config_error(json::parse(R"({"entries": []})")).find("m") != std::string::npos);
  CHECK(config_error(json::parse(R"({"m": 1, "entries": [{"gamma": 0, "s": 0, "n": 1}, {"gamma": "x", "s": 0, "n": 1}]})"))
            .find("entries[1].gamma") != std::string::npos);
  CHECK(config_error(json::parse(R"({"m": 1, "entries": [{"gamma": 0, "s": 0}]})")).find("entries[0].n") !=
        std::string::npos);
  CHECK(config_error(json::parse(R"({"m": 1, "entries": [{"gamma": 0, "s": 5, "n": 1}]})")).find("entry 0") !=
        std::string::npos);
  CHECK(config_error(json::parse(R"({"m": 1, "bogus": 1})")).find("bogus") != std::string::npos);
  CHECK(config_error(json::parse(R"({"m": 1, "spectrum": {"r_min": 2, "r_max": 1}})")).find("spectrum.r_max") !=
        std::string::npos);
  CHECK(config_error(json::parse(R"({"m": 1, "spectrum": {"sectors": [2]}})")).find("spectrum.sectors[0]") !=
        std::string::npos);
  CHECK(config_error(json::parse(R"({"m": 1, "k": [{"re": 1, "imag": 2}]})")).find("k[0].imag") != std::string::npos);
}

TEST_CASE("malformed file raises a config error") {
  const auto path = std::filesystem::temp_directory_path() / "pencil_io_bad.json";
  {
    std::ofstream(path) << "{\"m\": 1,, }";
  }
  CHECK_THROWS_AS(io::load_config(path), ConfigError);
  CHECK_THROWS_AS(io::load_config(path.string() + ".missing"), ConfigError);
  std::filesystem::remove(path);
}

TEST_CASE("complex values serialize as re/im pairs") {
  const auto j = io::to_json(cplx(1.5, -2.0));
  CHECK(j["re"] == 1.5);
  CHECK(j["im"] == -2.0);
  CHECK(io::complex_from_json(j, "z") == cplx(1.5, -2.0));
}

TEST_CASE("potential round trips through json") {
  const std::vector<CoefficientEntry> es{{0, 0, 1, cplx(0.3, 0.1)}, {0, 1, 2, -0.2}};
  const auto p = build_potential(1, es);
  CHECK(io::parse_potential(io::to_json(p)) == p);
}

TEST_CASE("forward table dump contains the normalizer") {
  const CoefficientEntry e{0, 0, 1, 0.3};
  const auto v = solve_coefficients(build_potential(1, std::span(&e, 1)), 6);
  const auto j = io::to_json(v);
  CHECK(j["schema"] == 1);
  bool found = false;
  for (const auto& pole : j["series"][0]["poles"])
    if (pole["n"] == 1 && pole["j"] == 1 && pole["alpha"] == 1) {
      CHECK(pole["re"].get<double>() == doctest::Approx(0.0));
      CHECK(pole["im"].get<double>() == doctest::Approx(0.3));
      found = true;
    }
  CHECK(found);
  CHECK(j.dump() == io::to_json(v).dump());
}

TEST_CASE("normalizer tables round trip and validate") {
  ScatteringData data(PencilOrder(1), 1, {{{1, 1, 0}, cplx(0, 0.3)}, {{2, 1, 1}, cplx(0.1, 0.2)}});
  const auto j = io::normalizers_to_json(data);
  const auto back = io::parse_normalizers(j);
  CHECK(back.m() == 1);
  CHECK(back.max_harmonic() == 1);
  CHECK(back.normalizers() == data.normalizers());

  auto bad = j;
  bad["normalizers"][1]["j"] = 2;
  CHECK_THROWS_WITH_AS(io::parse_normalizers(bad), doctest::Contains("normalizers[1].j"), ConfigError);
  bad = j;
  bad["normalizers"].push_back(j["normalizers"][0]);
  CHECK_THROWS_WITH_AS(io::parse_normalizers(bad), doctest::Contains("duplicate"), ConfigError);
}

TEST_CASE("atomic writes replace the file") {
  const auto path = std::filesystem::temp_directory_path() / "pencil_io_atomic.json";
  io::write_atomic(path, "first");
  io::write_atomic(path, "second");
  std::ifstream in(path);
  std::string s;
  in >> s;
  CHECK(s == "second");
  CHECK(!std::filesystem::exists(path.string() + ".tmp"));
  std::filesystem::remove(path);
}
