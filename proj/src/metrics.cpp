#include "pokforge/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <json.hpp>
#include <string>

#include "pokforge/errors.hpp"

namespace pokforge {

namespace {

constexpr double kZ99 = 2.576;
constexpr double kTestThreshold = 3.29;

template <typename F>
void for_each_pair(std::span<const BitString> xs, F&& f) {
  if (xs.size() < 2) throw DomainError("need at least two bit strings, got " + std::to_string(xs.size()));
  for (std::size_t i = 0; i < xs.size(); ++i)
    for (std::size_t j = i + 1; j < xs.size(); ++j) {
      if (xs[i].empty()) throw LengthError("empty bit string");
      f(static_cast<double>(hamming_distance(xs[i], xs[j])) / static_cast<double>(xs[i].size()));
    }
}

double mean_pairwise(std::span<const BitString> xs) {
  double sum = 0.0;
  std::size_t count = 0;
  for_each_pair(xs, [&](double d) {
    sum += d;
    ++count;
  });
  return sum / static_cast<double>(count);
}

}  // namespace

double intra_distance(std::span<const BitString> reads) { return mean_pairwise(reads); }
double inter_distance(std::span<const BitString> devices) { return mean_pairwise(devices); }

double max_pairwise_distance(std::span<const BitString> reads) {
  double worst = 0.0;
  for_each_pair(reads, [&](double d) { worst = std::max(worst, d); });
  return worst;
}

double mcv_min_entropy(const BitString& bits) {
  const std::size_t n = bits.size();
  if (n < kMinEntropySamples)
    throw SampleSizeError("min-entropy estimate needs at least " + std::to_string(kMinEntropySamples) +
                          " bits, got " + std::to_string(n));
  const double ones = static_cast<double>(bits.popcount());
  const double nn = static_cast<double>(n);
  const double p = std::max(ones, nn - ones) / nn;
  const double pu = std::min(1.0, p + kZ99 * std::sqrt(p * (1.0 - p) / nn));
  return pu >= 1.0 ? 0.0 : -std::log2(pu);
}

RandomnessTests monobit_runs(const BitString& bits) {
  const std::size_t n = bits.size();
  if (n < kMinTestSamples)
    throw SampleSizeError("randomness tests need at least " + std::to_string(kMinTestSamples) +
                          " bits, got " + std::to_string(n));
  RandomnessTests r;
  const double nn = static_cast<double>(n);
  const double n1 = static_cast<double>(bits.popcount());
  const double n0 = nn - n1;
  r.monobit_z = (2.0 * n1 - nn) / std::sqrt(nn);
  r.monobit_pass = std::fabs(r.monobit_z) <= kTestThreshold;

  r.runs = 1;
  for (std::size_t i = 1; i < n; ++i)
    if (bits[i] != bits[i - 1]) ++r.runs;
  if (n0 == 0.0 || n1 == 0.0) {
    r.runs_z = 0.0;
    r.runs_pass = false;
    return r;
  }
  const double mean = 2.0 * n0 * n1 / nn + 1.0;
  const double var = 2.0 * n0 * n1 * (2.0 * n0 * n1 - nn) / (nn * nn * (nn - 1.0));
  r.runs_z = var > 0.0 ? (static_cast<double>(r.runs) - mean) / std::sqrt(var) : 0.0;
  r.runs_pass = var > 0.0 && std::fabs(r.runs_z) <= kTestThreshold;
  return r;
}

PokReport build_report(const std::vector<std::vector<BitString>>& reads) {
  if (reads.size() < 2) throw DomainError("report needs at least two devices");
  PokReport rep;
  rep.n_devices = reads.size();
  rep.n_reads = reads.front().size();
  if (rep.n_reads == 0) throw DomainError("device without reads");
  rep.n_bits = reads.front().front().size();

  std::vector<BitString> firsts;
  double intra_sum = 0.0;
  for (const auto& dev : reads) {
    if (dev.size() != rep.n_reads) throw DomainError("devices have different read counts");
    for (const auto& r : dev)
      if (r.size() != rep.n_bits) throw LengthError("reads have different lengths");
    firsts.push_back(dev.front());
    if (dev.size() >= 2) {
      intra_sum += intra_distance(dev);
      rep.max_intra = std::max(rep.max_intra, max_pairwise_distance(dev));
    }
  }
  rep.mean_intra = intra_sum / static_cast<double>(reads.size());
  rep.mean_inter = inter_distance(firsts);

  rep.bias.assign(rep.n_bits, 0.0);
  for (const auto& f : firsts)
    for (std::size_t i = 0; i < rep.n_bits; ++i) rep.bias[i] += f[i];
  for (double& b : rep.bias) b /= static_cast<double>(firsts.size());

  std::vector<std::uint8_t> all;
  for (const auto& f : firsts) all.insert(all.end(), f.bits().begin(), f.bits().end());
  const BitString pooled(std::move(all));
  if (pooled.size() >= kMinEntropySamples) rep.mcv_min_entropy = mcv_min_entropy(pooled);
  if (pooled.size() >= kMinTestSamples) rep.tests = monobit_runs(pooled);
  return rep;
}

std::string PokReport::to_json() const {
  nlohmann::ordered_json j;
  j["n_devices"] = n_devices;
  j["n_reads"] = n_reads;
  j["n_bits"] = n_bits;
  j["mean_intra_distance"] = mean_intra;
  j["max_intra_distance"] = max_intra;
  j["mean_inter_distance"] = mean_inter;
  j["bias"] = bias;
  j["mcv_min_entropy"] = mcv_min_entropy ? nlohmann::ordered_json(*mcv_min_entropy) : nullptr;
  if (tests) {
    j["monobit_z"] = tests->monobit_z;
    j["monobit_pass"] = tests->monobit_pass;
    j["runs"] = tests->runs;
    j["runs_z"] = tests->runs_z;
    j["runs_pass"] = tests->runs_pass;
  } else {
    j["monobit_z"] = nullptr;
    j["monobit_pass"] = nullptr;
    j["runs"] = nullptr;
    j["runs_z"] = nullptr;
    j["runs_pass"] = nullptr;
  }
  return j.dump(2) + "\n";
}

PokReport PokReport::from_json(const std::string& text) {
  try {
    const auto j = nlohmann::json::parse(text);
    PokReport r;
    r.n_devices = j.at("n_devices").get<std::size_t>();
    r.n_reads = j.at("n_reads").get<std::size_t>();
    r.n_bits = j.at("n_bits").get<std::size_t>();
    r.mean_intra = j.at("mean_intra_distance").get<double>();
    r.max_intra = j.at("max_intra_distance").get<double>();
    r.mean_inter = j.at("mean_inter_distance").get<double>();
    r.bias = j.at("bias").get<std::vector<double>>();
    if (!j.at("mcv_min_entropy").is_null()) r.mcv_min_entropy = j.at("mcv_min_entropy").get<double>();
    if (!j.at("monobit_z").is_null()) {
      RandomnessTests t;
      t.monobit_z = j.at("monobit_z").get<double>();
      t.monobit_pass = j.at("monobit_pass").get<bool>();
      t.runs = j.at("runs").get<std::size_t>();
      t.runs_z = j.at("runs_z").get<double>();
      t.runs_pass = j.at("runs_pass").get<bool>();
      r.tests = t;
    }
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("malformed report: ") + e.what());
  }
}

std::string PokReport::bias_csv(const std::string& header_comment) const {
  std::string out;
  if (!header_comment.empty()) out += "# " + header_comment + "\n";
  out += "bit,p1\n";
  char buf[64];
  for (std::size_t i = 0; i < bias.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%zu,%.6f\n", i, bias[i]);
    out += buf;
  }
  return out;
}

}  // namespace pokforge
