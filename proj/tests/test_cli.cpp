#include <doctest.h>
#include <unistd.h>

#include "cli_util.hpp"

using clitest::run;
using clitest::slurp;
namespace fs = std::filesystem;

namespace {

std::string out_flag(const fs::path& dir) { return " --out " + dir.string(); }

}  // namespace

TEST_CASE("litho-map") {
  const auto a = clitest::scratch_dir("map_a"), b = clitest::scratch_dir("map_b");
  CHECK(run("litho-map --seed 4" + out_flag(a)).code == 0);
  CHECK(run("litho-map --seed 4" + out_flag(b)).code == 0);
  const std::string csv = slurp(a / "yield_map.csv");
  CHECK(csv == slurp(b / "yield_map.csv"));
  CHECK(csv.rfind("# config_hash=", 0) == 0);
  CHECK(csv.find(" seed=4\n") != std::string::npos);

  // the (W=52, L=460) group
  std::istringstream in(csv);
  std::string line, header, row52;
  std::getline(in, line);
  std::getline(in, header);
  while (std::getline(in, line))
    if (line.rfind("52,", 0) == 0) row52 = line;
  REQUIRE_FALSE(row52.empty());
  std::size_t col = 0;
  double yield = -1.0;
  std::istringstream hs(header);
  std::string cell;
  for (std::size_t i = 0; std::getline(hs, cell, ','); ++i)
    if (cell == "460") col = i;
  REQUIRE(col > 0);
  std::istringstream rs(row52);
  for (std::size_t i = 0; std::getline(rs, cell, ','); ++i)
    if (i == col) yield = std::stod(cell);
  CHECK(yield >= 0.40);
  CHECK(yield <= 0.60);

  const fs::path cfg = a / "bad.cfg";
  std::ofstream(cfg) << "map.w_min = 70\n";
  CHECK(run("litho-map --config " + cfg.string() + out_flag(a)).code == 2);
  std::ofstream(cfg) << "no.such.key = 1\n";
  CHECK(run("litho-map --config " + cfg.string() + out_flag(a)).code == 2);
  CHECK(run("litho-map --seed nope" + out_flag(a)).code == 2);
  CHECK(run("bogus").code == 2);
}

TEST_CASE("config formats and precedence") {
  const auto a = clitest::scratch_dir("cfg_a"), b = clitest::scratch_dir("cfg_b"), c = clitest::scratch_dir("cfg_c");
  std::ofstream(a / "c.json") << R"({"seed": 9, "map": {"dies": 3}})";
  std::ofstream(b / "c.cfg") << "# comment\nseed = 9\nmap.dies = 3\n";
  CHECK(run("litho-map --config " + (a / "c.json").string() + out_flag(a)).code == 0);
  CHECK(run("litho-map --config " + (b / "c.cfg").string() + out_flag(b)).code == 0);
  CHECK(slurp(a / "yield_map.csv") == slurp(b / "yield_map.csv"));
  // flag wins over config
  CHECK(run("litho-map --seed 10 --config " + (b / "c.cfg").string() + out_flag(c)).code == 0);
  CHECK(slurp(c / "yield_map.csv").find(" seed=10\n") != std::string::npos);
  // environment seed is a fallback only
  CHECK(run("litho-map" + out_flag(c)).code == 0);
  const std::string unseeded = slurp(c / "yield_map.csv");
  ::setenv("POKFORGE_SEED", "9", 1);
  CHECK(run("litho-map --config " + (a / "c.json").string() + out_flag(c)).code == 0);
  CHECK(slurp(c / "yield_map.csv") == slurp(a / "yield_map.csv"));
  std::ofstream(c / "d.cfg") << "map.dies = 3\n";
  CHECK(run("litho-map --config " + (c / "d.cfg").string() + out_flag(c)).code == 0);
  CHECK(slurp(c / "yield_map.csv") == slurp(a / "yield_map.csv"));
  ::unsetenv("POKFORGE_SEED");
  CHECK(unseeded.find(" seed=0\n") != std::string::npos);
}

TEST_CASE("enroll, reconstruct, respond") {
  const auto d = clitest::scratch_dir("enroll");
  for (const char* pipeline : {"fe", "xor"}) {
    CAPTURE(pipeline);
    const auto e = run(std::string("enroll --seed 21 --pipeline ") + pipeline + out_flag(d));
    CHECK(e.code == 0);
    CHECK(e.out.find("fingerprint=") != std::string::npos);
    CHECK(e.out.find("key=") == std::string::npos);
    CHECK(run("reconstruct --seed 21" + out_flag(d)).code == 0);
    CHECK(run("reconstruct --seed 22" + out_flag(d)).code == 3);
    const auto r1 = run("respond --seed 21 --challenge 00" + out_flag(d));
    const auto r2 = run("respond --seed 21 --challenge 00" + out_flag(d));
    CHECK(r1.code == 0);
    CHECK(r1.out.size() == 65);
    CHECK(r1.out == r2.out);
  }
  const auto k1 = run("enroll --seed 21 --emit-key" + out_flag(d));
  const auto k2 = run("reconstruct --seed 21 --emit-key" + out_flag(d));
  const auto key_of = [](const std::string& s) { return s.substr(s.find("key=")); };
  REQUIRE(k1.out.find("key=") != std::string::npos);
  CHECK(key_of(k1.out) == key_of(k2.out));

  const auto bytes = slurp(d / "enrollment.pok");
  const auto d2 = clitest::scratch_dir("enroll2");
  CHECK(run("enroll --seed 21" + out_flag(d2)).code == 0);
  CHECK(slurp(d2 / "enrollment.pok") == bytes);

  std::ofstream(d / "broken.pok") << "POKE garbage";
  CHECK(run("reconstruct --seed 21 --enrollment " + (d / "broken.pok").string()).code == 2);
  CHECK(run("reconstruct --seed 21 --enrollment " + (d / "missing.pok").string()).code == 2);
  CHECK(run("respond --seed 21 --challenge zz" + out_flag(d)).code == 2);
}

TEST_CASE("pcm-sim") {
  const auto a = clitest::scratch_dir("pcm_a"), b = clitest::scratch_dir("pcm_b");
  const auto r = run("pcm-sim --seed 7" + out_flag(a));
  CHECK(r.code == 0);
  CHECK(r.out.find("plugged_side=") != std::string::npos);
  CHECK(run("pcm-sim --seed 7" + out_flag(b)).code == 0);
  CHECK(slurp(a / "trace.csv") == slurp(b / "trace.csv"));
  CHECK(slurp(a / "trace.csv").find("t_s,I_left,I_right,molten_count\n") != std::string::npos);
  CHECK(slurp(a / "grain_map.pgm").rfind("P2\n# config_hash=", 0) == 0);

  const fs::path cfg = a / "weak.cfg";
  std::ofstream(cfg) << "pcm.v_prog = 1.0\n";
  CHECK(run("pcm-sim --seed 7 --config " + cfg.string() + out_flag(a)).code == 4);
}

TEST_CASE("analyze") {
  const auto a = clitest::scratch_dir("an_a"), b = clitest::scratch_dir("an_b");
  CHECK(run("analyze --seed 2" + out_flag(a)).code == 0);
  CHECK(run("analyze --seed 2" + out_flag(b)).code == 0);
  const std::string json = slurp(a / "report.json");
  CHECK(json == slurp(b / "report.json"));
  CHECK(json.rfind("{\n  \"provenance\": {\"config_hash\": ", 0) == 0);
  CHECK(json.find("\"mean_intra_distance\": 0.0") != std::string::npos);
  CHECK(slurp(a / "bias.csv").rfind("# config_hash=", 0) == 0);
  CHECK(run("analyze --seed 2 --source noisy" + out_flag(a)).code == 0);
}
