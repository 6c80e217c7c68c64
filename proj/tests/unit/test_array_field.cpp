#include <catch2/catch_amalgamated.hpp>

#include <numbers>

#include "grassfeel/array_field.hpp"
#include "grassfeel/rng.hpp"

using namespace grassfeel;
using Catch::Approx;

namespace {
constexpr double kTwoPi = 2.0 * std::numbers::pi;

double coherent_sum(const std::vector<Transducer>& array, const Vec3& p, double amp) {
  double s = 0.0;
  for (const auto& t : array) s += amp / (p - t.position).norm();
  return s;
}
}  // namespace

TEST_CASE("acoustic defaults give an 8.5 mm wavelength", "[array]") {
  CHECK(AcousticConfig{}.wavelength_mm() == Approx(8.5).margin(1e-12));
}

TEST_CASE("default array has 4 × 249 tilted transducers", "[array]") {
  const auto cfg = default_array_config();
  CHECK(cfg.transducers_per_unit() == 249);
  const auto array = build_array(cfg);
  REQUIRE(array.size() == 996);
  for (const auto& t : array) {
    REQUIRE(std::abs(t.normal.norm() - 1.0) <= 1e-9);
    const double angle = std::acos(t.normal.dot(Vec3::UnitZ())) * 180.0 / std::numbers::pi;
    REQUIRE(angle == Approx(15.0).margin(1e-9));
  }
  // every board leans toward the axis above the ring
  for (std::size_t u = 0; u < 4; ++u) {
    const auto& t = array[u * 249];
    const Vec3 radial(t.position.x(), t.position.y(), 0.0);
    CHECK(t.normal.dot(radial) < 0.0);
  }
}

TEST_CASE("flat single board sits on its local grid", "[array]") {
  const auto array = build_array(single_unit_config(0.0));
  REQUIRE(array.size() == 249);
  CHECK(array[0].position == Vec3::Zero());
  CHECK(array[0].normal == Vec3::UnitZ());
  CHECK(array[1].position == Vec3(10.16, 0.0, 0.0));
  // row 1 skips columns 1, 2 and 16
  CHECK(array[18].position == Vec3(0.0, 10.16, 0.0));
  CHECK(array[19].position.x() == Approx(3 * 10.16));
}

TEST_CASE("build_array is deterministic and validates omitted cells", "[array]") {
  const auto a = build_array(default_array_config());
  const auto b = build_array(default_array_config());
  for (std::size_t i = 0; i < a.size(); ++i) {
    REQUIRE(a[i].position == b[i].position);
    REQUIRE(a[i].normal == b[i].normal);
  }
  auto cfg = default_array_config();
  cfg.omitted.push_back({1, 1});
  CHECK_THROWS_AS(build_array(cfg), GeometryError);
  cfg.omitted.back() = {18, 0};
  CHECK_THROWS_AS(build_array(cfg), GeometryError);
}

TEST_CASE("focus phases", "[array]") {
  const AcousticConfig ac;
  const double lambda = ac.wavelength_mm();

  std::vector<Transducer> one{{Vec3::Zero(), Vec3::UnitZ()}};
  CHECK(focus_phases(one, ac, Vec3(0, 0, 200)).phases[0] == Approx(3.3264).margin(1e-4));
  CHECK(focus_phases(one, ac, Vec3(0, 0, 200)).phases[0] ==
        Approx(kTwoPi * (200.0 / 8.5 - 23.0)).margin(1e-12));

  const double whole = focus_phases(one, ac, Vec3(0, 0, 24 * lambda)).phases[0];
  CHECK(std::min(whole, kTwoPi - whole) <= 1e-9);

  std::vector<Transducer> mirror{{Vec3(-30, 5, 0), Vec3::UnitZ()}, {Vec3(30, 5, 0), Vec3::UnitZ()}};
  const auto ph = focus_phases(mirror, ac, Vec3(0, 5, 180));
  CHECK(ph.phases[0] == ph.phases[1]);

  CHECK_THROWS_AS(focus_phases(one, ac, Vec3(0, 0, 0.5)), GeometryError);
}

TEST_CASE("pressure at the focus is the coherent sum", "[array]") {
  const AcousticConfig ac;
  const auto array = build_array(default_array_config());
  const Vec3 target(5, -7, 195);
  const auto ph = focus_phases(array, ac, target);
  const auto p = pressure_at(array, ac, ph, target, 0.8);
  const double expected = coherent_sum(array, target, 0.8);
  CHECK(std::abs(p) == Approx(expected).epsilon(1e-12));
  CHECK(std::abs(p.imag()) <= 1e-9 * expected);
  CHECK(std::abs(pressure_at(array, ac, ph, target, 0.0)) == 0.0);

  std::vector<Transducer> one{{Vec3::Zero(), Vec3::UnitZ()}};
  const auto p1 = pressure_at(one, ac, PhaseSet{{1.234}}, Vec3(3, 4, 120), 0.6);
  CHECK(std::abs(p1) == Approx(0.6 / Vec3(3, 4, 120).norm()).epsilon(1e-14));
  CHECK_THROWS_AS(pressure_at(one, ac, PhaseSet{{0.0}}, Vec3(0, 0, 0.2), 1.0), GeometryError);
}

TEST_CASE("single-phase perturbations never raise focal pressure", "[array][property]") {
  const AcousticConfig ac;
  const auto array = build_array(default_array_config());
  Rng rng(19);
  for (int trial = 0; trial < 20; ++trial) {
    const Vec3 target(-40 + 80 * rng.uniform(), -40 + 80 * rng.uniform(), 150 + 100 * rng.uniform());
    const auto ph = focus_phases(array, ac, target);
    const double base = std::abs(pressure_at(array, ac, ph, target, 1.0));
    for (int probe = 0; probe < 5; ++probe) {
      const auto idx = static_cast<std::size_t>(rng.next_u64() % array.size());
      for (double delta : {0.1, -0.1}) {
        PhaseSet perturbed = ph;
        perturbed.phases[idx] += delta;
        REQUIRE(std::abs(pressure_at(array, ac, perturbed, target, 1.0)) <= base);
      }
    }
  }
}

TEST_CASE("field scan basics", "[array]") {
  const AcousticConfig ac;
  const auto array = build_array(default_array_config());
  const Vec3 target(0, 0, 200);
  const auto ph = focus_phases(array, ac, target);

  ScanGrid point{target};
  point.extent_mm = 0.0;
  const auto single = field_scan(array, ac, ph, point);
  REQUIRE(single.values.size() == 1);
  CHECK(single.values[0] == std::abs(pressure_at(array, ac, ph, target, 1.0)));

  ScanGrid grid{target};
  grid.extent_mm = 20.0;
  const auto map = field_scan(array, ac, ph, grid);
  REQUIRE(map.nodes_u == 21);
  CHECK(map.argmax() == std::pair{10, 10});

  // fourfold symmetric array focused on its axis: quarter turns of the scan agree
  const int n = map.nodes_u - 1;
  for (int iv = 0; iv <= n; ++iv) {
    for (int iu = 0; iu <= n; ++iu) {
      REQUIRE(std::abs(map.at(iu, iv) - map.at(n - iv, iu)) <= 1e-9);
    }
  }

  const auto csv = field_to_csv(map);
  CHECK(csv.rfind("x_mm,y_mm,magnitude\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 1 + 21 * 21);
  const auto meta = field_metadata(map, target, ac, default_array_config());
  CHECK(meta["grid"]["nodes_u"] == 21);
  CHECK(meta["config_hash"].get<std::string>().size() == 16);
  CHECK(meta["acoustic"]["wavelength_mm"] == Approx(8.5));
}

TEST_CASE("array config JSON round trip", "[array]") {
  const auto cfg = default_array_config();
  const auto back = array_config_from_json(array_config_to_json(cfg));
  CHECK(config_hash(back) == config_hash(cfg));
  const auto a = build_array(cfg);
  const auto b = build_array(back);
  for (std::size_t i = 0; i < a.size(); ++i) REQUIRE((a[i].position - b[i].position).norm() < 1e-9);
}
