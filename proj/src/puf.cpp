#include "pokforge/puf.hpp"

#include <string>

#include "pokforge/bytes.hpp"
#include "pokforge/errors.hpp"
#include "pokforge/grain_map.hpp"

namespace pokforge {

namespace {

constexpr std::uint64_t kReferenceStream = 0;
constexpr std::uint64_t kCellStreamBase = 1ULL << 32;

void put_plan(std::vector<std::uint8_t>& out, const XorPlan& plan) {
  put_be(out, plan.group_size, 4);
  put_be(out, plan.input_len, 4);
  put_be(out, plan.output_len, 4);
  out.push_back(static_cast<std::uint8_t>(plan.grouping));
  out.insert(out.end(), 3, 0);
}

XorPlan read_plan(ByteReader& in) {
  XorPlan plan;
  plan.group_size = in.be(4);
  plan.input_len = in.be(4);
  plan.output_len = in.be(4);
  const auto grouping = in.be(1);
  if (grouping > 1) throw FormatError("unknown grouping " + std::to_string(grouping));
  plan.grouping = static_cast<Grouping>(grouping);
  if (in.be(3) != 0) throw FormatError("nonzero reserved bytes in fold plan");
  if (plan.group_size == 0 || plan.output_len != plan.input_len / plan.group_size)
    throw FormatError("inconsistent fold plan");
  return plan;
}

}  // namespace

SourceKind parse_source_kind(std::string_view name) {
  if (name == "litho") return SourceKind::litho;
  if (name == "pcm") return SourceKind::pcm;
  if (name == "generic-noisy" || name == "noisy") return SourceKind::generic_noisy;
  throw DomainError("unknown source kind: " + std::string(name));
}

std::string_view source_kind_name(SourceKind kind) {
  switch (kind) {
    case SourceKind::litho: return "litho";
    case SourceKind::pcm: return "pcm";
    case SourceKind::generic_noisy: return "generic-noisy";
  }
  return "unknown";
}

Pipeline parse_pipeline(std::string_view name) {
  if (name == "fe") return Pipeline::fe;
  if (name == "xor" || name == "xor-only") return Pipeline::xor_only;
  throw DomainError("unknown pipeline: " + std::string(name));
}

DeviceHandle::DeviceHandle(SourceKind kind, SourceParams params, std::uint64_t device_seed)
    : kind_(kind), params_(std::move(params)), seed_(device_seed) {
  switch (kind_) {
    case SourceKind::litho:
      litho_ = fabricate_array(params_.surface, params_.litho, seed_);
      break;
    case SourceKind::generic_noisy: {
      Rng rng(derive_seed(seed_, kReferenceStream));
      reference_ = random_bits(params_.noisy.bits, params_.noisy.p1, rng);
      if (!(params_.noisy.p_err >= 0.0 && params_.noisy.p_err <= 1.0))
        throw DomainError("read error probability outside [0,1]");
      break;
    }
    case SourceKind::pcm:
      if (params_.pcm.cells == 0) throw DomainError("pcm device needs at least one cell");
      break;
  }
}

void DeviceHandle::program_pcm() {
  const PcmArrayParams& p = params_.pcm;
  const ContactGeometry contacts = default_contacts(p.cols);
  pcm_.reserve(p.cells);
  for (std::size_t i = 0; i < p.cells; ++i) {
    GrainMap grains = generate_grain_map(p.rows, p.cols, p.nucleation_density,
                                         derive_seed(seed_, kCellStreamBase + i));
    const PcmCell pristine = make_cell(std::move(grains), p.material, contacts);
    PcmCell cell = pristine;
    PulseParams pulse = p.pulse;
    double step = p.boost;  // direction of the last voltage change
    bool done = false;
    std::string last_error;
    for (std::size_t attempt = 0; attempt < p.attempts && !done; ++attempt) {
      try {
        const ProgramResult r = program_pulse(cell, pulse);
        if (r.resistance_contrast >= p.read.contrast_min) {
          done = true;
        } else {
          // Too weak to read back reliably. Contrast is not monotonic in the
          // voltage, so keep moving the way the last failure pointed.
          cell = pristine;
          last_error = "resistance contrast " + std::to_string(r.resistance_contrast) + " below read floor";
        }
      } catch (const OverProgramError& e) {
        step = p.backoff;
        last_error = e.what();
      } catch (const UnderProgramError& e) {
        step = p.boost;
        last_error = e.what();
      }
      pulse.v_prog *= step;
    }
    if (!done)
      throw EnrollError("pcm cell " + std::to_string(i) + " could not be programmed: " + last_error);
    pcm_.push_back(std::move(cell));
  }
}

std::span<const PcmCell> DeviceHandle::pcm_cells() {
  if (kind_ != SourceKind::pcm) throw DomainError("device has no pcm cells");
  if (pcm_.empty()) program_pcm();
  return pcm_;
}

BitString DeviceHandle::enrollment_read() {
  if (kind_ == SourceKind::generic_noisy) return reference_;
  return read();
}

BitString DeviceHandle::read() {
  switch (kind_) {
    case SourceKind::litho:
      return litho_->read_bits();
    case SourceKind::pcm:
      return read_word(pcm_cells(), params_.pcm.read);
    case SourceKind::generic_noisy: {
      ++read_count_;
      Rng rng(derive_seed(seed_, read_count_));
      const BitString noise = random_bits(reference_.size(), params_.noisy.p_err, rng);
      return xor_bits(reference_, noise);
    }
  }
  throw DomainError("unknown source kind");
}

std::vector<std::uint8_t> Enrollment::serialize() const {
  std::vector<std::uint8_t> out = {'P', 'O', 'K', 'E', kVersion, static_cast<std::uint8_t>(pipeline),
                                   static_cast<std::uint8_t>(source)};
  put_be(out, device_id, 8);
  if (pipeline == Pipeline::fe) {
    if (!helper || plan) throw FormatError("fe enrollment must carry helper data only");
    const auto blob = helper->serialize();
    put_be(out, blob.size(), 4);
    put_bytes(out, blob);
  } else {
    if (!plan || helper) throw FormatError("xor-only enrollment must carry a fold plan only");
    put_plan(out, *plan);
  }
  put_bytes(out, key_check);
  append_crc32(out);
  return out;
}

Enrollment Enrollment::deserialize(std::span<const std::uint8_t> bytes) {
  ByteReader in(check_crc32(bytes));
  auto magic = in.take(4);
  if (std::string(magic.begin(), magic.end()) != "POKE") throw FormatError("not an enrollment record");
  if (in.be(1) != kVersion) throw FormatError("unsupported enrollment version");
  Enrollment e;
  const auto pipeline = in.be(1);
  const auto source = in.be(1);
  if (pipeline < 1 || pipeline > 2) throw FormatError("unknown pipeline id " + std::to_string(pipeline));
  if (source < 1 || source > 3) throw FormatError("unknown source id " + std::to_string(source));
  e.pipeline = static_cast<Pipeline>(pipeline);
  e.source = static_cast<SourceKind>(source);
  e.device_id = in.be(8);
  if (e.pipeline == Pipeline::fe) {
    const std::size_t len = in.be(4);
    e.helper = HelperData::deserialize(in.take(len));
  } else {
    e.plan = read_plan(in);
  }
  auto kcv = in.take(e.key_check.size());
  std::copy(kcv.begin(), kcv.end(), e.key_check.begin());
  if (!in.done()) throw FormatError("trailing bytes in enrollment record");
  return e;
}

EnrollOutput enroll(DeviceHandle& device, const EnrollParams& params, Rng& rng) {
  BitString w;
  try {
    w = device.enrollment_read();
  } catch (const EnrollError&) {
    throw;
  } catch (const Error& e) {
    throw EnrollError(std::string("source read failed: ") + e.what());
  }

  EnrollOutput out;
  out.enrollment.device_id = device.seed();
  out.enrollment.source = device.kind();
  out.enrollment.pipeline = params.pipeline;
  if (params.pipeline == Pipeline::fe) {
    const std::size_t usable = w.size() - w.size() % params.code.n();
    if (usable == 0)
      throw EnrollError("reading of " + std::to_string(w.size()) + " bits is shorter than one code block");
    GenOutput gen = fe_gen(params.code, w.slice(0, usable), params.key_bits, rng);
    out.enrollment.helper = std::move(gen.helper);
    out.key = std::move(gen.key);
  } else {
    if (w.size() < params.group_size)
      throw EnrollError("reading of " + std::to_string(w.size()) + " bits is shorter than one fold group");
    const XorPlan plan = XorPlan::make(params.group_size, w.size(), params.grouping);
    out.key = xor_fold(plan, w);
    out.enrollment.plan = plan;
  }
  out.enrollment.key_check = key_check(out.key);
  return out;
}

BitString reconstruct(DeviceHandle& device, const Enrollment& enrollment) {
  BitString w;
  try {
    w = device.read();
  } catch (const EnrollError&) {
    throw;
  } catch (const Error& e) {
    throw EnrollError(std::string("source read failed: ") + e.what());
  }

  BitString key;
  if (enrollment.pipeline == Pipeline::fe) {
    if (!enrollment.helper) throw FormatError("fe enrollment without helper data");
    const std::size_t need = enrollment.helper->h.size();
    if (w.size() < need)
      throw LengthError("reading of " + std::to_string(w.size()) + " bits is shorter than the enrolled " +
                        std::to_string(need));
    key = fe_rep(w.slice(0, need), *enrollment.helper);
  } else {
    if (!enrollment.plan) throw FormatError("xor-only enrollment without fold plan");
    key = xor_fold(*enrollment.plan, w);
  }
  if (key_check(key) != enrollment.key_check) throw KeyMismatchError("key check value mismatch");
  return key;
}

}  // namespace pokforge
