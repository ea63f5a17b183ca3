#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <filesystem>

#include "cl3/config.hpp"
#include "cl3/random.hpp"
#include "cl3/runner.hpp"
#include "cl3/snapshot.hpp"

using namespace cl3;

TEST_CASE("snapshot round trip is bit exact") {
  Grid g;
  g.n = {8, 6, 4};
  g.extent = {1.5, 2.0, 3.0};
  Rng rng(701);
  SpinorField f = random_smooth_field(g, rng);
  f.t = 0.375;

  const std::string path = std::filesystem::temp_directory_path() / "cl3_snap_test.bin";
  write_snapshot(path, f);
  const SpinorField r = read_snapshot(path);
  CHECK(r.grid == f.grid);
  CHECK(r.t == f.t);
  REQUIRE(r.data.size() == f.data.size());
  for (std::size_t i = 0; i < f.data.size(); ++i)
    for (int mu = 0; mu < 4; ++mu) CHECK(r.data[i].c[mu] == f.data[i].c[mu]);
  std::remove(path.c_str());
}

TEST_CASE("snapshot reader rejects garbage") {
  const std::string path = std::filesystem::temp_directory_path() / "cl3_snap_bad.bin";
  {
    std::ofstream out(path, std::ios::binary);
    out << "not a snapshot";
  }
  CHECK_THROWS_AS(read_snapshot(path), ConfigError);
  std::remove(path.c_str());
}

TEST_CASE("config round trip") {
  const std::string text = R"(
# sample run
[physics]
m = 1.25
q = 0.5
lambda = 0.1

[grid]
n = 24 16 8
extent = 6.0 4.0 2.0

[scheme]
dt = 0.01
t_end = 0.5
method = rk4
derivative = central-4
mode = linear

[potential]
kind = constant
a = 0.2 0.0 -0.1 0.3

[initial]
kind = gaussian
amplitude = 0.3
width = 0.9
carrier = 1 0 0

[output]
directory = runs/demo
stride = 5
format = csv
seed = 42
)";
  const RunConfig cfg = parse_config_string(text);
  CHECK(cfg.physics.m == 1.25);
  CHECK(cfg.scheme.method == Method::rk4);
  CHECK(cfg.potential.kind == PotentialSpec::Kind::constant);
  CHECK(cfg.output.stride == 5);
  CHECK(cfg.seed == 42);

  const RunConfig cfg2 = parse_config_string(save_config(cfg));
  CHECK(save_config(cfg2) == save_config(cfg));
}

TEST_CASE("config is fail-closed") {
  CHECK_THROWS_AS(parse_config_string("[physics]\nmm = 1\n"), ConfigError);
  CHECK_THROWS_AS(parse_config_string("[nonsense]\n"), ConfigError);
  CHECK_THROWS_AS(parse_config_string("[physics]\nm = 1\nm = 2\n"), ConfigError);
  CHECK_THROWS_AS(parse_config_string("[scheme]\nmethod = euler\n"), ConfigError);
  CHECK_THROWS_AS(parse_config_string("[grid]\nn = 2 2 2\n"), ConfigError);
  CHECK_THROWS_AS(parse_config_string("[output]\nformat = xml\n"), ConfigError);
  CHECK_THROWS_AS(
      parse_config_string("[initial]\nkind = planewave\nvelocity = 1 0 0\ncurrent = 1 0 0 0\n"),
      ConfigError);
  // strang-split with central-4 is rejected at load
  CHECK_THROWS_AS(parse_config_string("[scheme]\nderivative = central-4\n"), ConfigError);
}

TEST_CASE("initial-field builders") {
  RunConfig cfg;
  cfg.grid.n = {8, 8, 8};
  cfg.initial.kind = InitialSpec::Kind::planewave;
  cfg.initial.n = 1.0;
  cfg.initial.velocity = {1.0, 0.0, 0.0};
  cfg.physics.m = 1.0;
  const SpinorField f = build_initial(cfg);
  CHECK(f.data.size() == cfg.grid.size());

  // incommensurate wave is a validation error
  cfg.initial.velocity = {0.3, 0.0, 0.0};
  CHECK_THROWS_AS(build_initial(cfg), ConfigError);

  // (N, J) route through the prefactor reconstruction
  cfg.initial.have_current = true;
  cfg.initial.n = 1.0;
  cfg.initial.current = {std::sqrt(2.0), 1.0, 0.0, 0.0};
  const SpinorField f2 = build_initial(cfg);
  CHECK(std::abs(nonlinearity(f2.data[0]) - 1.0) < 1e-12);

  // inconsistent (N, J) propagates the reconstruction error
  cfg.initial.current = {5.0, 1.0, 0.0, 0.0};
  CHECK_THROWS_AS(build_initial(cfg), InconsistentPair);

  cfg.initial.have_current = false;
  cfg.initial.kind = InitialSpec::Kind::gaussian;
  cfg.initial.bump.amplitude = 0.1;
  const SpinorField g2 = build_initial(cfg);
  CHECK(g2.data.size() == cfg.grid.size());

  // file round trip via the initial-condition loader
  const std::string path = std::filesystem::temp_directory_path() / "cl3_init.bin";
  write_snapshot(path, g2);
  cfg.initial.kind = InitialSpec::Kind::file;
  cfg.initial.path = path;
  const SpinorField g3 = build_initial(cfg);
  CHECK(g3.data[10].c[0] == g2.data[10].c[0]);
  std::remove(path.c_str());
}

TEST_CASE("sampled potential loads from a snapshot file") {
  RunConfig cfg;
  cfg.grid.n = {6, 6, 6};
  SpinorField a = SpinorField::zeros(cfg.grid);
  for (std::size_t i = 0; i < a.data.size(); ++i) a.data[i] = Paravector{0.1, 0, 0, 0.05};
  const std::string path = std::filesystem::temp_directory_path() / "cl3_pot.bin";
  write_snapshot(path, a);
  cfg.potential.kind = PotentialSpec::Kind::sampled;
  cfg.potential_file = path;
  const PotentialSpec A = load_potential(cfg);
  CHECK(A.samples.size() == cfg.grid.size());
  CHECK(A.at(5).c[0].real() == 0.1);
  std::remove(path.c_str());
}
