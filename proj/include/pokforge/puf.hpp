#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "pokforge/bitstring.hpp"
#include "pokforge/fuzzy.hpp"
#include "pokforge/litho.hpp"
#include "pokforge/pcm.hpp"
#include "pokforge/prf.hpp"
#include "pokforge/rng.hpp"
#include "pokforge/xor_fold.hpp"

namespace pokforge {

enum class SourceKind : std::uint8_t { litho = 0x01, pcm = 0x02, generic_noisy = 0x03 };
enum class Pipeline : std::uint8_t { fe = 0x01, xor_only = 0x02 };

SourceKind parse_source_kind(std::string_view name);
std::string_view source_kind_name(SourceKind kind);
Pipeline parse_pipeline(std::string_view name);

struct PcmArrayParams {
  std::size_t cells = 32;
  std::size_t rows = 16;
  std::size_t cols = 32;
  double nucleation_density = 0.03;
  MaterialParams material;
  PulseParams pulse{.v_prog = 7.5};
  ReadParams read;
  /// Programming attempts per cell. After an over-programmed attempt the
  /// voltage is scaled by `backoff`, after an under-programmed one by `boost`.
  /// A programmed cell below the read contrast floor is reset and retried with
  /// the most recent scale factor (`boost` if there was none).
  std::size_t attempts = 6;
  double backoff = 0.9;
  double boost = 1.1;
};

struct NoisyParams {
  std::size_t bits = 20;
  double p1 = 0.5;
  double p_err = 0.05;
};

struct SourceParams {
  YieldSurface surface;
  LithoDesign litho;
  PcmArrayParams pcm;
  NoisyParams noisy;
};

/// A simulated key source. Reads on one handle must not run concurrently.
class DeviceHandle {
 public:
  DeviceHandle(SourceKind kind, SourceParams params, std::uint64_t device_seed);

  SourceKind kind() const noexcept { return kind_; }
  std::uint64_t seed() const noexcept { return seed_; }
  const SourceParams& params() const noexcept { return params_; }

  /// Reading taken at enrollment. For the noisy source this is the
  /// noise-free reference pattern.
  BitString enrollment_read();
  /// One field read. Litho and PCM reads are repeatable; the noisy source
  /// flips each bit independently with probability p_err.
  BitString read();

  /// PCM cells after programming (programs them on first use).
  std::span<const PcmCell> pcm_cells();

 private:
  void program_pcm();

  SourceKind kind_;
  SourceParams params_;
  std::uint64_t seed_;
  std::optional<LithoArray> litho_;
  std::vector<PcmCell> pcm_;
  BitString reference_;
  std::uint64_t read_count_ = 0;
};

/// Public enrollment record; contains helper data (fe) or a fold plan
/// (xor-only), never the key.
struct Enrollment {
  static constexpr std::uint8_t kVersion = 0x01;

  std::uint64_t device_id = 0;
  SourceKind source = SourceKind::litho;
  Pipeline pipeline = Pipeline::fe;
  std::optional<HelperData> helper;
  std::optional<XorPlan> plan;
  KeyCheck key_check{};

  std::vector<std::uint8_t> serialize() const;
  static Enrollment deserialize(std::span<const std::uint8_t> bytes);

  friend bool operator==(const Enrollment&, const Enrollment&) = default;
};

struct EnrollParams {
  Pipeline pipeline = Pipeline::fe;
  LinearBlockCode code = LinearBlockCode::repetition(3);
  std::size_t key_bits = 128;
  std::size_t group_size = 4;
  Grouping grouping = Grouping::consecutive;
};

struct EnrollOutput {
  Enrollment enrollment;
  BitString key;
};

/// Source failures (programming, weak cells, geometry) surface as EnrollError.
EnrollOutput enroll(DeviceHandle& device, const EnrollParams& params, Rng& rng);

/// Throws KeyMismatchError when the recomputed key check differs.
BitString reconstruct(DeviceHandle& device, const Enrollment& enrollment);

}  // namespace pokforge
