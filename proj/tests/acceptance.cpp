// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fail.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "cli_util.hpp"
#include "pokforge/bytes.hpp"
#include "pokforge/errors.hpp"
#include "pokforge/fuzzy.hpp"
#include "pokforge/grain_map.hpp"
#include "pokforge/litho.hpp"
#include "pokforge/metrics.hpp"
#include "pokforge/network.hpp"
#include "pokforge/pcm.hpp"
#include "pokforge/prf.hpp"
#include "pokforge/puf.hpp"
#include "pokforge/xor_fold.hpp"

using namespace pokforge;

namespace {

// Tolerances and budgets.
constexpr double kBandLow = 0.40, kBandHigh = 0.60, kBandRate = 0.95;
constexpr double kYieldSeconds = 5.0;
constexpr double kFeSeconds = 60.0;
constexpr double kXorSigmas = 4.0;
constexpr std::size_t kXorSamples = 100000;
constexpr double kKclTolerance = 1e-8;
constexpr double kOracleTolerance = 1e-10;
constexpr double kSymmetryTolerance = 1e-6;
constexpr double kSideFloor = 0.20;
constexpr double kContrastFloor = 10.0;
constexpr double kPcmSeconds = 300.0;
constexpr double kInterTolerance = 0.02;
constexpr double kEntropyFloor = 0.95;

struct Outcome {
  bool pass = true;
  std::string detail;
};

class Stopwatch {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

std::string fmt(const char* f, double a, double b = 0, double c = 0, double d = 0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c, d);
  return buf;
}

BitString from_int(std::uint32_t v, std::size_t n) {
  std::vector<std::uint8_t> b(n);
  for (std::size_t i = 0; i < n; ++i) b[i] = (v >> (n - 1 - i)) & 1u;
  return BitString(std::move(b));
}

// ---------------------------------------------------------------- 1
Outcome yield_band() {
  Stopwatch sw;
  const YieldSurface surface;
  LithoDesign d;
  d.rows = 10;
  d.cols = 10;
  d.length_nm = 460;
  d.width_nm = 52;
  int inside = 0;
  const int experiments = 500;
  for (int e = 0; e < experiments; ++e) {
    const double frac = double(fabricate_array(surface, d, derive_seed(0xA11CE, e)).read_bits().popcount()) / 100.0;
    inside += frac >= kBandLow && frac <= kBandHigh;
  }
  const double rate = double(inside) / experiments, t = sw.seconds();
  return {rate >= kBandRate && t < kYieldSeconds, fmt("%.3f of 500 experiments in band, %.2fs", rate, t)};
}

// ---------------------------------------------------------------- 2
Outcome fe_round_trip() {
  Stopwatch sw;
  const auto rep3 = LinearBlockCode::repetition(3);
  std::vector<BitString> errors;
  for (std::uint32_t pat = 0; pat < 256; ++pat) {  // 4 blocks, each: no flip or one of 3 positions
    std::uint32_t x = pat;
    BitString e = BitString::zeros(12);
    for (std::size_t b = 0; b < 4; ++b, x >>= 2)
      if (const std::uint32_t pick = x & 3u) e = e.with_flipped(3 * b + pick - 1);
    errors.push_back(e);
  }
  std::size_t failures = 0, cases = 0;
  for (std::uint32_t v = 0; v < 4096; ++v) {
    const BitString w = from_int(v, 12);
    Rng rng(derive_seed(2, v));
    const GenOutput g = fe_gen(rep3, w, 8, rng);
    for (const auto& e : errors) {
      ++cases;
      failures += fe_rep(xor_bits(w, e), g.helper) != g.key;
    }
  }
  const auto ham = LinearBlockCode::hamming74();
  std::size_t ham_fail = 0;
  for (std::uint32_t m = 0; m < 16; ++m)
    for (std::size_t e = 0; e < 8; ++e) {
      BitString c = ham.encode(from_int(m, 4));
      if (e < 7) c = c.with_flipped(e);
      ham_fail += ham.decode(c) != from_int(m, 4);
    }
  const double t = sw.seconds();
  return {failures == 0 && ham_fail == 0 && cases == 4096 * 256 && t < kFeSeconds,
          fmt("%.0f rep3 cases, %.0f failures; hamming74 %.0f failures; %.2fs", double(cases), double(failures),
              double(ham_fail), t)};
}

// ---------------------------------------------------------------- 3
Outcome xor_bias() {
  Rng rng(0x5eed);
  double worst = 0.0;
  bool pass = true;
  for (double p : {0.3, 0.4, 0.45, 0.6})
    for (std::size_t g : {1u, 2u, 4u, 8u}) {
      const BitString out = xor_fold(g, random_bits(kXorSamples * g, p, rng));
      const double q = (1.0 - std::pow(1.0 - 2.0 * p, double(g))) / 2.0;
      const double bound = kXorSigmas * std::sqrt(q * (1 - q) / double(kXorSamples));
      const double dev = std::fabs(double(out.popcount()) / double(kXorSamples) - q);
      worst = std::max(worst, dev / bound);
      pass &= dev <= bound && std::fabs(predicted_bias(p, g) - q) < 1e-15;
    }
  return {pass, fmt("worst deviation %.2f of the 4-sigma bound", worst)};
}

// ---------------------------------------------------------------- 4
std::vector<double> dense_solve(const ResistorNetwork& net) {
  const std::size_t n = net.node_count();
  std::vector<std::size_t> idx(n, SIZE_MAX);
  std::size_t m = 0;
  for (std::size_t i = 0; i < n; ++i)
    if (!net.is_fixed(i)) idx[i] = m++;
  std::vector<std::vector<double>> a(m, std::vector<double>(m + 1, 0.0));
  for (const auto& e : net.edges()) {
    const std::size_t ends[2] = {e.a, e.b};
    for (int s = 0; s < 2; ++s) {
      const std::size_t u = ends[s], v = ends[1 - s];
      if (net.is_fixed(u)) continue;
      a[idx[u]][idx[u]] += e.conductance;
      if (net.is_fixed(v))
        a[idx[u]][m] += e.conductance * net.fixed_potential(v);
      else
        a[idx[u]][idx[v]] -= e.conductance;
    }
  }
  for (std::size_t c = 0; c < m; ++c) {
    std::size_t piv = c;
    for (std::size_t r = c + 1; r < m; ++r)
      if (std::fabs(a[r][c]) > std::fabs(a[piv][c])) piv = r;
    std::swap(a[c], a[piv]);
    for (std::size_t r = 0; r < m; ++r)
      if (r != c) {
        const double f = a[r][c] / a[c][c];
        for (std::size_t k = c; k <= m; ++k) a[r][k] -= f * a[c][k];
      }
  }
  std::vector<double> v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = net.is_fixed(i) ? net.fixed_potential(i) : a[idx[i]][m] / a[idx[i]][idx[i]];
  return v;
}

Outcome pcm_solver() {
  // small-network oracle
  Rng rng(44);
  double worst_oracle = 0.0;
  for (int trial = 0; trial < 500; ++trial) {
    const std::size_t n = 2 + rng.below(5);
    ResistorNetwork net(n);
    for (std::size_t i = 1; i < n; ++i) net.add_edge(rng.below(i), i, 0.001 + 100.0 * rng.uniform());
    for (std::size_t k = rng.below(2 * n); k > 0; --k) {
      const std::size_t a = rng.below(n), b = rng.below(n);
      if (a != b) net.add_edge(a, b, 0.001 + 100.0 * rng.uniform());
    }
    net.fix(0, 1.0);
    if (n > 2) net.fix(n - 1, 0.0);
    const auto ref = dense_solve(net);
    const auto got = solve_network(net, {1e-14, 0}).potentials;
    for (std::size_t i = 0; i < n; ++i) worst_oracle = std::max(worst_oracle, std::fabs(got[i] - ref[i]));
  }

  // current conservation at every programming step
  double worst_kcl = 0.0;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    PcmCell cell = make_cell(generate_grain_map(32, 64, 0.01, seed), MaterialParams{}, default_contacts(64));
    worst_kcl = std::max(worst_kcl, program_pulse(cell, PulseParams{}).worst_kcl_error);
  }

  // mirror-symmetric geometry before any melting
  double worst_sym = 0.0;
  const std::vector<std::vector<Nucleus>> symmetric = {{{16, 20}}, {{10, 20}, {10, 43}}, {{5, 9}, {5, 54}, {25, 30}, {25, 33}}};
  for (const auto& nuclei : symmetric) {
    PcmCell cell = make_cell(grain_map_from_nuclei(32, 64, nuclei), MaterialParams{}, default_contacts(64));
    for (double v : {0.1, 1.0, 11.0}) {
      SolveRequest req;
      req.v_top = v;
      req.series_resistance = cell.material.driver_resistance;
      req.options = {1e-12, 0};
      const CellSolution s = solve_potentials(cell, req);
      worst_sym = std::max(worst_sym, std::fabs(s.i_left - s.i_right) / s.i_top);
    }
  }
  const bool pass = worst_oracle <= kOracleTolerance && worst_kcl <= kKclTolerance && worst_sym <= kSymmetryTolerance;
  return {pass, fmt("oracle max error %.2e, worst step KCL %.2e, symmetric imbalance %.2e", worst_oracle, worst_kcl,
                    worst_sym)};
}

// ---------------------------------------------------------------- 5
Outcome pcm_programming() {
  Stopwatch sw;
  const std::size_t runs = 200;
  std::size_t left = 0, right = 0, failures = 0, ties = 0, flips = 0, compared = 0, unstable_reads = 0;
  double min_contrast = 1e300;
  const ContactGeometry contacts = default_contacts(64);
  std::string first_failure;
  for (std::uint64_t seed = 0; seed < runs; ++seed) {
    PcmCell cell = make_cell(generate_grain_map(32, 64, 0.01, seed), MaterialParams{}, contacts);
    ProgramResult r;
    try {
      r = program_pulse(cell, PulseParams{});
    } catch (const Error& e) {
      ++failures;
      if (first_failure.empty()) first_failure = "seed " + std::to_string(seed) + ": " + e.what();
      continue;
    }
    (r.plugged_side == Side::left ? left : right)++;
    min_contrast = std::min(min_contrast, r.resistance_contrast);

    const auto hash = cell.state_hash();
    const std::size_t repeats = seed < 10 ? 100 : 1;
    for (std::size_t i = 0; i < repeats; ++i) unstable_reads += read_bit(cell) != r.bit;
    unstable_reads += cell.state_hash() != hash;

    if (r.tie_broken) {
      ++ties;
      continue;
    }
    PcmCell mirror = make_cell(mirrored(cell.grains), MaterialParams{}, contacts);
    ++compared;
    try {
      flips += program_pulse(mirror, PulseParams{}).bit == 1 - r.bit;
    } catch (const Error&) {
    }
  }
  const double t = sw.seconds();
  const bool pass = failures == 0 && double(left) >= kSideFloor * runs && double(right) >= kSideFloor * runs &&
                    flips == compared && unstable_reads == 0 && min_contrast >= kContrastFloor && t < kPcmSeconds;
  std::string detail = "left " + std::to_string(left) + ", right " + std::to_string(right) + ", failed " +
                       std::to_string(failures) + ", mirror flips " + std::to_string(flips) + "/" +
                       std::to_string(compared) + " (ties " + std::to_string(ties) + "), unstable reads " +
                       std::to_string(unstable_reads) + fmt(", min contrast %.1f, %.0fs", min_contrast, t);
  if (!first_failure.empty()) detail += "; first failure " + first_failure;
  return {pass, detail};
}

// ---------------------------------------------------------------- 6
Outcome intrinsic_pipeline() {
  EnrollParams p;
  p.pipeline = Pipeline::xor_only;
  std::size_t litho_fail = 0, pcm_fail = 0;
  bool structural = true;
  Rng rng(6);
  for (std::uint64_t d = 0; d < 1000; ++d) {
    DeviceHandle dev(SourceKind::litho, SourceParams{}, derive_seed(0x11780, d));
    const EnrollOutput e = enroll(dev, p, rng);
    structural &= !e.enrollment.helper && e.enrollment.plan.has_value();
    try {
      litho_fail += reconstruct(dev, e.enrollment) != e.key;
    } catch (const KeyMismatchError&) {
      ++litho_fail;
    }
  }
  // Record layout: magic, version, pipeline, source, id, 16-byte plan, KCV, CRC.
  {
    DeviceHandle dev(SourceKind::litho, SourceParams{}, 1);
    const auto bytes = enroll(dev, p, rng).enrollment.serialize();
    structural &= bytes.size() == 4 + 3 + 8 + 16 + 8 + 4;
  }
  SourceParams sp;
  std::string pcm_error;
  p.group_size = 2;
  for (std::uint64_t d = 0; d < 200; ++d) {
    DeviceHandle dev(SourceKind::pcm, sp, derive_seed(0x9c3, d));
    try {
      const EnrollOutput e = enroll(dev, p, rng);
      structural &= !e.enrollment.helper && e.enrollment.plan.has_value();
      pcm_fail += reconstruct(dev, e.enrollment) != e.key;
    } catch (const Error& e) {
      ++pcm_fail;
      if (pcm_error.empty()) pcm_error = e.what();
    }
  }
  std::string detail = "litho KCV failures " + std::to_string(litho_fail) + "/1000, pcm failures " +
                       std::to_string(pcm_fail) + "/200, helper-free records " + (structural ? "yes" : "no");
  if (!pcm_error.empty()) detail += "; " + pcm_error;
  return {litho_fail == 0 && pcm_fail == 0 && structural, detail};
}

// ---------------------------------------------------------------- 7
Outcome metrics_sanity() {
  // repeated reads
  double intra = 0.0;
  {
    DeviceHandle litho(SourceKind::litho, SourceParams{}, 3);
    std::vector<BitString> reads;
    for (int i = 0; i < 10; ++i) reads.push_back(litho.read());
    intra = std::max(intra, intra_distance(reads));
    SourceParams sp;
    sp.pcm.cells = 8;
    DeviceHandle pcm(SourceKind::pcm, sp, 3);
    reads.clear();
    for (int i = 0; i < 10; ++i) reads.push_back(pcm.read());
    intra = std::max(intra, intra_distance(reads));
  }
  Rng rng(77);
  std::vector<BitString> devs;
  for (int i = 0; i < 50; ++i) devs.push_back(random_bits(128, 0.5, rng));
  const double inter = inter_distance(devs);
  const double h = mcv_min_entropy(random_bits(100000, 0.5, rng));

  const BitString key = random_bits(128, 0.5, rng);
  BitString stream;
  for (std::uint32_t i = 0; stream.size() < 10000; ++i) stream = stream.concat(respond(key, from_int(i, 32)));
  const RandomnessTests t = monobit_runs(stream);
  const bool pass = intra == 0.0 && std::fabs(inter - 0.5) <= kInterTolerance && h >= kEntropyFloor &&
                    t.monobit_pass && t.runs_pass;
  return {pass, fmt("intra %.3f, inter %.4f, min-entropy %.4f, PRF monobit z %.2f", intra, inter, h, t.monobit_z) +
                    fmt(", runs z %.2f", t.runs_z)};
}

// ---------------------------------------------------------------- 8
Outcome bit_exact() {
  bool pass = true;
  std::string notes;
  Rng rng(8);
  for (const auto& code : {LinearBlockCode::repetition(3), LinearBlockCode::repetition(5), LinearBlockCode::hamming74()}) {
    const GenOutput g = fe_gen(code, random_bits(code.n() * 20, 0.5, rng), 64, rng);
    const auto bytes = g.helper.serialize();
    pass &= HelperData::deserialize(bytes).serialize() == bytes;
  }
  for (auto pipeline : {Pipeline::fe, Pipeline::xor_only}) {
    DeviceHandle dev(SourceKind::litho, SourceParams{}, 12);
    EnrollParams p;
    p.pipeline = pipeline;
    const auto bytes = enroll(dev, p, rng).enrollment.serialize();
    pass &= Enrollment::deserialize(bytes).serialize() == bytes;
  }
  const std::vector<std::uint8_t> key(20, 0x0b);
  const std::string msg = "Hi There";
  const bool rfc = to_hex(hmac_sha256(key, std::vector<std::uint8_t>(msg.begin(), msg.end()))) ==
                   "b0344c61d8db38535ca8afceaf0bf12b881dc200c9833da726e9376c2e32cff7";
  pass &= rfc;

  bool cli_same = true;
  const auto a = clitest::scratch_dir("accept_a"), b = clitest::scratch_dir("accept_b");
  const std::vector<std::pair<std::string, std::vector<std::string>>> commands = {
      {"litho-map --seed 5", {"yield_map.csv"}},
      {"pcm-sim --seed 5", {"trace.csv", "grain_map.pgm"}},
      {"enroll --seed 5", {"enrollment.pok"}},
      {"enroll --seed 5 --pipeline xor", {"enrollment.pok"}},
      {"analyze --seed 5", {"report.json", "bias.csv"}},
  };
  for (const auto& [args, files] : commands) {
    const auto ra = clitest::run(args + " --out " + a.string());
    const auto rb = clitest::run(args + " --out " + b.string());
    bool same = ra.code == 0 && rb.code == 0;
    for (const auto& f : files) same &= clitest::slurp(a / f) == clitest::slurp(b / f) && !clitest::slurp(a / f).empty();
    if (!same) notes += " [" + args + " differs]";
    cli_same &= same;
  }
  const auto r1 = clitest::run("respond --seed 5 --challenge 00 --out " + a.string());
  const auto r2 = clitest::run("respond --seed 5 --challenge 00 --out " + b.string());
  cli_same &= r1.code == 0 && r1.out == r2.out && r1.out.size() == 65;
  pass &= cli_same;
  return {pass, std::string("helper/enrollment round trips, RFC 4231 ") + (rfc ? "match" : "MISMATCH") +
                    ", CLI outputs " + (cli_same ? "identical" : "differ") + notes};
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
      {"yield band at the calibration point", yield_band},
      {"fuzzy extractor round trip", fe_round_trip},
      {"xor de-correlation bias", xor_bias},
      {"pcm network solver", pcm_solver},
      {"pcm programming", pcm_programming},
      {"intrinsic-reliability pipeline", intrinsic_pipeline},
      {"metrics sanity", metrics_sanity},
      {"bit-exact interfaces", bit_exact},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    std::printf("criterion %zu %s: %s (%s)\n", i + 1, o.pass ? "PASS" : "FAIL", criteria[i].first, o.detail.c_str());
    std::fflush(stdout);
    failed += !o.pass;
  }
  return failed ? 1 : 0;
}
