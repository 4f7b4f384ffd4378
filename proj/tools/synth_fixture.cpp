// Writes the bundled synthetic fixture: weekly COVID-19 and total death files
// for England, Wales and Scotland, plus manifest.json with the generating curves.

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <json.hpp>

#include "wavefit/analysis.hpp"
#include "wavefit/ingest.hpp"
#include "wavefit/synthetic.hpp"

namespace fs = std::filesystem;
using namespace wavefit;

namespace {

constexpr const char* kWaves = "2020w10:2020w37,2020w38:2020w50,2020w51:2021w08";
constexpr std::array<double, 3> kBeta{2.0, -3.0, -2.5};
// Scale per place (Home, Hospital, Hospice, CareHome, OCE, Elsewhere) and wave.
constexpr double kAlpha[3][6] = {{5.5, 6.0, 6.5, 8.0, 7.0, 5.0}, {8.5, 9.0, 9.5, 10.0, 9.0, 8.0}, {6.5, 7.0, 7.5, 8.0, 7.0, 6.5}};
constexpr std::array<double, 6> kPeak{25.0, 40.0, 20.0, 45.0, 15.0, 10.0};
constexpr std::array<double, 3> kWaveScale{1.0, 0.6, 0.8};

struct NationShape {
  Nation nation;
  std::array<double, 3> alpha_shift;
  double scale;
};
constexpr std::array<NationShape, 3> kNations{{{Nation::England, {0.0, 0.0, 0.0}, 1.0},
                                               {Nation::Wales, {0.5, 0.5, 0.5}, 0.9},
                                               {Nation::Scotland, {0.0, -1.0, 0.0}, 0.85}}};

// Height of x^(-b-1) exp(-x^(-b)) at its mode.
double unit_peak(double beta) {
  const double x = std::pow(beta / (beta + 1.0), 1.0 / beta);
  return std::pow(x, -beta - 1.0) * std::exp(-std::pow(x, -beta));
}

std::string lower(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Generate the synthetic wave fixture"};
  std::string out_dir = "tests/fixtures/synthetic";
  app.add_option("--out", out_dir, "output directory")->capture_default_str();
  CLI11_PARSE(app, argc, argv);

  const auto windows = analysis::parse_wave_windows(kWaves);
  std::vector<synthetic::CurveSpec> curves;
  std::vector<synthetic::ShareSpec> shares;
  for (const auto& n : kNations) {
    for (int w = 0; w < 3; ++w) {
      for (std::size_t p = 0; p < kPlaceCount; ++p) {
        curves.push_back({n.nation, kAllPlaces[p], w, kPeak[p] * kWaveScale[w] * n.scale / unit_peak(kBeta[w]),
                          kAlpha[w][p] + n.alpha_shift[w], kBeta[w]});
      }
    }
    shares.push_back({n.nation, Place::Home, {25.0, 0.6, 0.15, 14.0, 45.0}});
    shares.push_back({n.nation, Place::CareHome, {40.0, 0.5, 0.2, 16.0, 32.0}});
    shares.push_back({n.nation, Place::Hospice, {6.0, 0.5, 0.2, 13.0, 40.0}});
    shares.push_back({n.nation, Place::OCE, {3.0, 0.4, 0.2, 15.0, 38.0}});
    shares.push_back({n.nation, Place::Elsewhere, {2.0, 0.4, 0.3, 12.0, 50.0}});
  }

  const synthetic::SyntheticTables tables = synthetic::generate(curves, windows, shares);
  fs::create_directories(out_dir);
  nlohmann::ordered_json manifest;
  manifest["waves"] = kWaves;
  manifest["files"] = nlohmann::ordered_json::array();
  for (const auto& [nation, covid] : tables.covid) {
    for (const DeathTable* t : {&covid, &tables.total.at(nation)}) {
      const std::string name =
          lower(to_string(nation)) + (t->measure() == Measure::CovidDeaths ? "_covid.csv" : "_total.csv");
      std::ofstream f(fs::path(out_dir) / name, std::ios::binary);
      ingest::write_weekly_csv(*t, f);
      manifest["files"].push_back(name);
    }
  }
  auto& cs = manifest["curves"] = nlohmann::ordered_json::array();
  for (const auto& c : curves) {
    cs.push_back({{"nation", to_string(c.nation)},
                  {"place", to_string(c.place)},
                  {"wave", windows[static_cast<std::size_t>(c.wave)].label},
                  {"mu", windows[static_cast<std::size_t>(c.wave)].start.ordinal()},
                  {"gamma", c.gamma},
                  {"alpha", c.alpha},
                  {"beta", c.beta}});
  }
  auto& ss = manifest["shares"] = nlohmann::ordered_json::array();
  for (const auto& s : shares) {
    ss.push_back({{"nation", to_string(s.nation)},
                  {"place", to_string(s.place)},
                  {"lambda", s.params.lambda},
                  {"nu_g", s.params.nu_g},
                  {"nu_d", s.params.nu_d},
                  {"kappa_g", s.params.kappa_g},
                  {"kappa_d", s.params.kappa_d}});
  }
  std::ofstream(fs::path(out_dir) / "manifest.json", std::ios::binary) << manifest.dump(2) << '\n';
  std::cout << "wrote " << manifest["files"].size() << " files to " << out_dir << '\n';
  return 0;
}
