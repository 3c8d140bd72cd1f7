// pokforge: device simulation, enrollment, reconstruction, challenge-response
// and population analysis from the command line.

#include <CLI11.hpp>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <unistd.h>
#include <vector>

#include "config.hpp"
#include "pokforge/bytes.hpp"
#include "pokforge/errors.hpp"
#include "pokforge/grain_map.hpp"
#include "pokforge/litho.hpp"
#include "pokforge/metrics.hpp"
#include "pokforge/pcm.hpp"
#include "pokforge/prf.hpp"
#include "pokforge/puf.hpp"

namespace fs = std::filesystem;
using namespace pokforge;
using cli::Config;
using cli::ConfigError;

namespace {

enum Exit { kOk = 0, kFailure = 1, kUsage = 2, kKeyMismatch = 3, kProgramming = 4 };

constexpr std::uint64_t kEnrollStream = 0x656e726f6c6cULL;

struct Flags {
  std::string config_path;
  std::string seed;
  std::string out;
  std::string pipeline;
  std::string code;
  std::string source;
  std::string enrollment;
  std::string challenge;
  bool emit_key = false;
};

struct Context {
  Config cfg;
  std::uint64_t seed = 0;
  fs::path out = ".";

  std::string provenance() const { return "config_hash=" + cfg.hash() + " seed=" + std::to_string(seed); }
};

Context make_context(const Flags& f) {
  Context ctx;
  if (!f.config_path.empty()) ctx.cfg = Config::load(f.config_path);
  if (!f.seed.empty()) ctx.cfg.set("seed", f.seed);
  if (!ctx.cfg.has("seed"))
    if (const char* env = std::getenv("POKFORGE_SEED")) ctx.cfg.set("seed", env);
  if (!f.pipeline.empty()) ctx.cfg.set("pipeline", f.pipeline);
  if (!f.code.empty()) ctx.cfg.set("code", f.code);
  if (!f.source.empty()) ctx.cfg.set("source", f.source);
  ctx.seed = ctx.cfg.u64("seed", 0);
  if (auto out = ctx.cfg.take("out")) ctx.out = *out;
  if (!f.out.empty()) ctx.out = f.out;
  return ctx;
}

void write_atomic(const fs::path& path, const std::string& data) {
  fs::create_directories(path.parent_path().empty() ? fs::path(".") : path.parent_path());
  const fs::path tmp = path.string() + ".tmp" + std::to_string(::getpid());
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw Error("cannot write " + tmp.string());
    f.write(data.data(), static_cast<std::streamsize>(data.size()));
    if (!f) throw Error("write failed for " + tmp.string());
  }
  fs::rename(tmp, path);
}

std::vector<std::uint8_t> read_file(const fs::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw ConfigError("cannot read " + path.string());
  return std::vector<std::uint8_t>(std::istreambuf_iterator<char>(f), {});
}

YieldSurface read_surface(Config& c) {
  YieldSurface s;
  s.w50_at_lref = c.num("litho.w50", s.w50_at_lref);
  s.lref = c.num("litho.lref", s.lref);
  s.dw50_dl = c.num("litho.dw50_dl", s.dw50_dl);
  s.spread = c.num("litho.spread", s.spread);
  return s;
}

MaterialParams read_material(Config& c) {
  MaterialParams m;
  m.rho_crystalline0 = c.num("pcm.rho_crystalline", m.rho_crystalline0);
  m.rho_boundary0 = c.num("pcm.rho_boundary", m.rho_boundary0);
  m.rho_amorphous0 = c.num("pcm.rho_amorphous", m.rho_amorphous0);
  m.rho_molten = c.num("pcm.rho_molten", m.rho_molten);
  m.alpha_crystalline = c.num("pcm.alpha_crystalline", m.alpha_crystalline);
  m.alpha_boundary = c.num("pcm.alpha_boundary", m.alpha_boundary);
  m.alpha_amorphous = c.num("pcm.alpha_amorphous", m.alpha_amorphous);
  m.t_ambient = c.num("pcm.t_ambient", m.t_ambient);
  m.t_melt = c.num("pcm.t_melt", m.t_melt);
  m.diffusivity = c.num("pcm.diffusivity", m.diffusivity);
  m.heating = c.num("pcm.heating", m.heating);
  m.substrate_loss = c.num("pcm.substrate_loss", m.substrate_loss);
  m.contact_sink = c.num("pcm.contact_sink", m.contact_sink);
  m.wall_sink = c.num("pcm.wall_sink", m.wall_sink);
  m.driver_resistance = c.num("pcm.driver_resistance", m.driver_resistance);
  return m;
}

PulseParams read_pulse(Config& c, PulseParams p) {
  p.v_prog = c.num("pcm.v_prog", p.v_prog);
  p.steps = c.count("pcm.steps", p.steps);
  p.dt = c.num("pcm.dt", p.dt);
  p.v_read = c.num("pcm.v_read", p.v_read);
  return p;
}

ReadParams read_read(Config& c) {
  ReadParams r;
  r.v_read = c.num("pcm.v_read", r.v_read);
  r.contrast_min = c.num("pcm.contrast_min", r.contrast_min);
  return r;
}

SourceParams read_source_params(Config& c) {
  SourceParams p;
  p.surface = read_surface(c);
  p.litho.rows = c.count("litho.rows", p.litho.rows);
  p.litho.cols = c.count("litho.cols", p.litho.cols);
  p.litho.length_nm = c.num("litho.length_nm", p.litho.length_nm);
  p.litho.width_nm = c.num("litho.width_nm", p.litho.width_nm);
  p.litho.p_void = c.num("litho.p_void", p.litho.p_void);

  PcmArrayParams& a = p.pcm;
  a.cells = c.count("pcm.cells", a.cells);
  a.rows = c.count("pcm.device_rows", a.rows);
  a.cols = c.count("pcm.device_cols", a.cols);
  a.nucleation_density = c.num("pcm.device_density", a.nucleation_density);
  a.material = read_material(c);
  a.pulse = read_pulse(c, a.pulse);
  a.pulse.v_prog = c.num("pcm.device_v_prog", a.pulse.v_prog);
  a.read = read_read(c);
  a.attempts = c.count("pcm.attempts", a.attempts);

  p.noisy.bits = c.count("noisy.bits", p.noisy.bits);
  p.noisy.p1 = c.num("noisy.p1", p.noisy.p1);
  p.noisy.p_err = c.num("noisy.p_err", p.noisy.p_err);
  return p;
}

EnrollParams read_enroll_params(Config& c) {
  EnrollParams e;
  e.pipeline = parse_pipeline(c.str("pipeline", "fe"));
  e.code = LinearBlockCode::by_name(c.str("code", "rep3"));
  e.key_bits = c.count("key_bits", e.key_bits);
  e.group_size = c.count("xor.group_size", e.group_size);
  const std::string grouping = c.str("xor.grouping", "consecutive");
  if (grouping == "consecutive")
    e.grouping = Grouping::consecutive;
  else if (grouping == "strided")
    e.grouping = Grouping::strided;
  else
    throw ConfigError("xor.grouping must be consecutive or strided");
  return e;
}

std::string hex(std::span<const std::uint8_t> bytes) { return to_hex(bytes); }

fs::path enrollment_path(const Context& ctx, const Flags& f) {
  return f.enrollment.empty() ? ctx.out / "enrollment.pok" : fs::path(f.enrollment);
}

int cmd_litho_map(const Flags& f) {
  Context ctx = make_context(f);
  const YieldSurface surface = read_surface(ctx.cfg);
  YieldMapRequest req;
  req.w_min = ctx.cfg.num("map.w_min", req.w_min);
  req.w_max = ctx.cfg.num("map.w_max", req.w_max);
  req.w_step = ctx.cfg.num("map.w_step", req.w_step);
  req.l_min = ctx.cfg.num("map.l_min", req.l_min);
  req.l_max = ctx.cfg.num("map.l_max", req.l_max);
  req.l_step = ctx.cfg.num("map.l_step", req.l_step);
  req.cells_per_group = ctx.cfg.count("map.cells_per_group", req.cells_per_group);
  req.dies = ctx.cfg.count("map.dies", req.dies);
  req.p_void = ctx.cfg.num("litho.p_void", req.p_void);
  ctx.cfg.reject_unused();
  const YieldMap map = build_yield_map(surface, req, ctx.seed);
  const fs::path path = ctx.out / "yield_map.csv";
  write_atomic(path, map.to_csv(ctx.provenance()));
  std::cout << "wrote " << path.string() << "\n";
  return kOk;
}

int cmd_pcm_sim(const Flags& f) {
  Context ctx = make_context(f);
  const std::size_t rows = ctx.cfg.count("pcm.rows", 32);
  const std::size_t cols = ctx.cfg.count("pcm.cols", 64);
  const double density = ctx.cfg.num("pcm.density", 0.01);
  const MaterialParams material = read_material(ctx.cfg);
  const PulseParams pulse = read_pulse(ctx.cfg, PulseParams{});
  const ReadParams read = read_read(ctx.cfg);
  ctx.cfg.reject_unused();

  PcmCell cell = make_cell(generate_grain_map(rows, cols, density, ctx.seed), material, default_contacts(cols));
  write_atomic(ctx.out / "grain_map.pgm", to_pgm(cell.grains, ctx.provenance()));
  const ProgramResult result = program_pulse(cell, pulse);
  write_atomic(ctx.out / "trace.csv", trace_csv(result.trace, ctx.provenance()));
  const ReadOutcome outcome = read_cell(cell, read);
  std::cout << "plugged_side=" << to_string(result.plugged_side) << " bit=" << result.bit
            << " contrast=" << result.resistance_contrast << " read_bit=" << outcome.bit
            << (outcome.weak ? " weak" : "") << "\n";
  return kOk;
}

int cmd_enroll(const Flags& f) {
  Context ctx = make_context(f);
  const SourceKind kind = parse_source_kind(ctx.cfg.str("source", "litho"));
  const SourceParams params = read_source_params(ctx.cfg);
  const EnrollParams ep = read_enroll_params(ctx.cfg);
  ctx.cfg.reject_unused();

  DeviceHandle device(kind, params, ctx.seed);
  Rng rng(derive_seed(ctx.seed, kEnrollStream));
  const EnrollOutput out = enroll(device, ep, rng);
  const fs::path path = ctx.out / "enrollment.pok";
  const auto bytes = out.enrollment.serialize();
  write_atomic(path, std::string(bytes.begin(), bytes.end()));
  std::cout << "wrote " << path.string() << "\n";
  std::cout << "key_bits=" << out.key.size() << " fingerprint=" << hex(out.enrollment.key_check) << "\n";
  if (f.emit_key) std::cout << "key=" << hex(out.key.packed()) << "\n";
  return kOk;
}

BitString reconstruct_key(Context& ctx, const Flags& f) {
  const Enrollment enrollment = Enrollment::deserialize(read_file(enrollment_path(ctx, f)));
  // Enrollment-time settings are fixed by the record; accept them so one
  // config file serves every command.
  ctx.cfg.accept({"source", "pipeline", "code", "key_bits", "xor.group_size", "xor.grouping"});
  const SourceParams params = read_source_params(ctx.cfg);
  ctx.cfg.reject_unused();
  DeviceHandle device(enrollment.source, params, ctx.seed);
  return reconstruct(device, enrollment);
}

int cmd_reconstruct(const Flags& f) {
  Context ctx = make_context(f);
  const BitString key = reconstruct_key(ctx, f);
  std::cout << "ok fingerprint=" << hex(key_check(key)) << "\n";
  if (f.emit_key) std::cout << "key=" << hex(key.packed()) << "\n";
  return kOk;
}

int cmd_respond(const Flags& f) {
  Context ctx = make_context(f);
  const BitString key = reconstruct_key(ctx, f);
  std::vector<std::uint8_t> challenge;
  try {
    challenge = from_hex(f.challenge);
  } catch (const Error& e) {
    throw ConfigError(std::string("challenge: ") + e.what());
  }
  const BitString c = BitString::from_packed(challenge, challenge.size() * 8);
  std::cout << hex(respond(key, c).packed()) << "\n";
  return kOk;
}

int cmd_analyze(const Flags& f) {
  Context ctx = make_context(f);
  const SourceKind kind = parse_source_kind(ctx.cfg.str("source", "litho"));
  const SourceParams params = read_source_params(ctx.cfg);
  const std::size_t devices = ctx.cfg.count("analyze.devices", 20);
  const std::size_t reads = ctx.cfg.count("analyze.reads", 5);
  ctx.cfg.reject_unused();
  if (devices < 2 || reads < 1) throw ConfigError("analyze needs at least 2 devices and 1 read");

  std::vector<std::vector<BitString>> all(devices);
  for (std::size_t d = 0; d < devices; ++d) {
    DeviceHandle device(kind, params, derive_seed(ctx.seed, d));
    for (std::size_t r = 0; r < reads; ++r) all[d].push_back(device.read());
  }
  const PokReport report = build_report(all);
  std::string json = report.to_json();
  // Provenance as the first member so the file stays valid JSON.
  json = "{\n  \"provenance\": {\"config_hash\": \"" + ctx.cfg.hash() + "\", \"seed\": " + std::to_string(ctx.seed) +
         "},\n" + json.substr(2);
  write_atomic(ctx.out / "report.json", json);
  write_atomic(ctx.out / "bias.csv", report.bias_csv(ctx.provenance()));
  std::cout << "mean_intra=" << report.mean_intra << " mean_inter=" << report.mean_inter;
  if (report.mcv_min_entropy) std::cout << " mcv_min_entropy=" << *report.mcv_min_entropy;
  std::cout << "\n";
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"pokforge: physical obfuscated key simulation and key derivation"};
  app.require_subcommand(1);
  Flags flags;

  auto common = [&](CLI::App* sub) {
    sub->add_option("--config", flags.config_path, "config file (key=value or JSON)");
    sub->add_option("--seed", flags.seed, "global seed (falls back to POKFORGE_SEED)");
    sub->add_option("--out", flags.out, "output directory");
    sub->add_option("--pipeline", flags.pipeline, "fe or xor")->check(CLI::IsMember({"fe", "xor"}));
    sub->add_option("--code", flags.code, "rep3, rep5 or hamming74")
        ->check(CLI::IsMember({"rep3", "rep5", "hamming74"}));
    sub->add_flag("--emit-key", flags.emit_key, "print the secret key");
    return sub;
  };

  auto* litho = common(app.add_subcommand("litho-map", "write a connectivity yield map CSV"));
  auto* pcm = common(app.add_subcommand("pcm-sim", "program and read one PCM cell"));
  auto* enr = common(app.add_subcommand("enroll", "enroll a device"));
  auto* rec = common(app.add_subcommand("reconstruct", "reconstruct and verify a device key"));
  auto* rsp = common(app.add_subcommand("respond", "answer a challenge with the device key"));
  auto* ana = common(app.add_subcommand("analyze", "population metrics report"));
  for (auto* sub : {enr, ana}) sub->add_option("--source", flags.source, "litho, pcm or generic-noisy");
  for (auto* sub : {rec, rsp}) sub->add_option("--enrollment", flags.enrollment, "enrollment file");
  rsp->add_option("--challenge", flags.challenge, "challenge bytes in hex")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  try {
    if (*litho) return cmd_litho_map(flags);
    if (*pcm) return cmd_pcm_sim(flags);
    if (*enr) return cmd_enroll(flags);
    if (*rec) return cmd_reconstruct(flags);
    if (*rsp) return cmd_respond(flags);
    if (*ana) return cmd_analyze(flags);
  } catch (const KeyMismatchError& e) {
    std::cerr << "key mismatch: " << e.what() << "\n";
    return kKeyMismatch;
  } catch (const OverProgramError& e) {
    std::cerr << "over-programmed: " << e.what() << "\n";
    return kProgramming;
  } catch (const UnderProgramError& e) {
    std::cerr << "under-programmed: " << e.what() << "\n";
    return kProgramming;
  } catch (const EnrollError& e) {
    std::cerr << "enrollment failed: " << e.what() << "\n";
    return kProgramming;
  } catch (const ConfigError& e) {
    std::cerr << "config: " << e.what() << "\n";
    return kUsage;
  } catch (const DomainError& e) {
    std::cerr << "invalid parameter: " << e.what() << "\n";
    return kUsage;
  } catch (const FormatError& e) {
    std::cerr << "malformed input: " << e.what() << "\n";
    return kUsage;
  } catch (const LengthError& e) {
    std::cerr << "length mismatch: " << e.what() << "\n";
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kFailure;
  }
  return kUsage;
}
