/*
 * Copyright 2026 The ptest Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "ptest/oracle.hpp"

#include <bit>
#include <charconv>
#include <cmath>
#include <numbers>

#include "ptest/error.hpp"
#include "ptest/permanent.hpp"
#include "ptest/remote.hpp"

namespace ptest {

OracleFamily::OracleFamily(int max_dim) : max_dim_(max_dim), counts_(static_cast<std::size_t>(max_dim) + 1) {
  if (max_dim < 1) throw Error(ErrorCode::kInvalidSpec, "oracle max_dim must be positive");
}

Complex OracleFamily::query(int k, const ComplexMatrix& m) {
  if (k < 1 || k > max_dim_) {
    throw Error(ErrorCode::kDimensionTooLarge,
                "oracle queried at k = " + std::to_string(k) + ", max_dim = " + std::to_string(max_dim_));
  }
  if (m.dim() != k) throw Error(ErrorCode::kInvalidParams, "matrix dimension does not match k");
  counts_[static_cast<std::size_t>(k)].fetch_add(1, std::memory_order_relaxed);
  return evaluate(k, m);
}

std::uint64_t OracleFamily::query_count(int k) const {
  if (k < 1 || k > max_dim_) return 0;
  return counts_[static_cast<std::size_t>(k)].load(std::memory_order_relaxed);
}

std::uint64_t OracleFamily::total_queries() const {
  std::uint64_t total = 0;
  for (const auto& c : counts_) total += c.load(std::memory_order_relaxed);
  return total;
}

void OracleFamily::reset_counts() {
  for (auto& c : counts_) c.store(0, std::memory_order_relaxed);
}

std::uint64_t hash_matrix(std::uint64_t seed, const ComplexMatrix& m) noexcept {
  std::uint64_t h = mix64(seed ^ static_cast<std::uint64_t>(m.dim()));
  for (const Complex& z : m.entries()) {
    h = mix64(h ^ std::bit_cast<std::uint64_t>(z.real()));
    h = mix64(h ^ std::bit_cast<std::uint64_t>(z.imag()));
  }
  return h;
}

double hash_uniform(std::uint64_t hash, std::uint64_t salt) noexcept {
  return static_cast<double>(mix64(hash + mix64(salt)) >> 11) * 0x1.0p-53;
}

namespace {

constexpr std::uint64_t kSaltSelect = 1;
constexpr std::uint64_t kSaltRadius = 2;
constexpr std::uint64_t kSaltAngle = 3;

class ExactOracle final : public OracleFamily {
 public:
  explicit ExactOracle(int max_dim) : OracleFamily(max_dim) {}
  std::string describe() const override { return "exact"; }

 protected:
  Complex evaluate(int, const ComplexMatrix& m) override { return permanent_ryser(m); }
};

class ZeroOracle final : public OracleFamily {
 public:
  explicit ZeroOracle(int max_dim) : OracleFamily(max_dim) {}
  std::string describe() const override { return "zero"; }

 protected:
  Complex evaluate(int, const ComplexMatrix&) override { return {}; }
};

// Every other built-in: Per_k(X) perturbed by a hash-driven rule.
class PerturbedOracle final : public OracleFamily {
 public:
  PerturbedOracle(const OracleSpec& spec, std::uint64_t seed)
      : OracleFamily(spec.max_dim), spec_(spec), seed_(seed) {}

  std::string describe() const override { return to_string(spec_); }

 protected:
  Complex evaluate(int k, const ComplexMatrix& m) override {
    const double scale = std::sqrt(factorial(k));
    switch (spec_.kind) {
      case OracleKind::kAdditiveNoise: {
        const std::uint64_t h = hash_matrix(seed_, m);
        // Uniform on the closed unit disk, or on the unit circle when worst_case.
        const double radius = spec_.worst_case ? 1.0 : std::sqrt(hash_uniform(h, kSaltRadius));
        const double angle = 2.0 * std::numbers::pi * hash_uniform(h, kSaltAngle);
        const Complex u = std::polar(radius, angle);
        return permanent_ryser(m) + spec_.noise_delta * scale * u;
      }
      case OracleKind::kScaled:
        return spec_.alpha * permanent_ryser(m);
      case OracleKind::kCorruptedFraction:
        if (hash_uniform(hash_matrix(seed_, m), kSaltSelect) < spec_.eta) return spec_.magnitude * scale;
        return permanent_ryser(m);
      case OracleKind::kHeavyTail:
        if (hash_uniform(hash_matrix(seed_, m), kSaltSelect) < spec_.probability) {
          return spec_.magnitude * spec_.tail_T * scale;
        }
        return permanent_ryser(m);
      case OracleKind::kAffineShift:
        return permanent_ryser(m) + spec_.beta * scale;
      default:
        throw Error(ErrorCode::kInvalidSpec, "unsupported perturbed oracle kind");
    }
  }

 private:
  OracleSpec spec_;
  std::uint64_t seed_;
};

double parse_number(std::string_view field, std::string_view what) {
  double value = 0.0;
  const auto* begin = field.data();
  const auto* end = field.data() + field.size();
  auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc{} || ptr != end) {
    throw Error(ErrorCode::kInvalidSpec, "cannot parse " + std::string(what) + " from '" + std::string(field) + "'");
  }
  return value;
}

std::vector<std::string_view> split_fields(std::string_view text) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t colon = text.find(':', start);
    if (colon == std::string_view::npos) {
      fields.push_back(text.substr(start));
      break;
    }
    fields.push_back(text.substr(start, colon - start));
    start = colon + 1;
  }
  return fields;
}

void expect_fields(const std::vector<std::string_view>& fields, std::size_t lo, std::size_t hi, std::string_view text) {
  if (fields.size() < lo || fields.size() > hi) {
    throw Error(ErrorCode::kInvalidSpec, "wrong number of fields in oracle spec '" + std::string(text) + "'");
  }
}

// Shortest text that parses back to the same double.
std::string format_number(double x) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

}  // namespace

void OracleSpec::validate() const {
  auto fail = [](const std::string& msg) { throw Error(ErrorCode::kInvalidSpec, msg); };
  auto finite = [](double x) { return std::isfinite(x); };
  if (max_dim < 1) fail("max_dim must be positive");
  switch (kind) {
    case OracleKind::kExact:
    case OracleKind::kZero:
      break;
    case OracleKind::kAdditiveNoise:
      if (!finite(noise_delta) || noise_delta < 0.0) fail("additive_noise: delta must be finite and >= 0");
      break;
    case OracleKind::kScaled:
      if (!finite(alpha)) fail("scaled: alpha must be finite");
      break;
    case OracleKind::kCorruptedFraction:
      if (!(eta >= 0.0 && eta <= 1.0)) fail("corrupted_fraction: eta must lie in [0, 1]");
      if (!finite(magnitude)) fail("corrupted_fraction: M must be finite");
      break;
    case OracleKind::kHeavyTail:
      if (!(probability >= 0.0 && probability <= 1.0)) fail("heavy_tail: p must lie in [0, 1]");
      if (!finite(magnitude)) fail("heavy_tail: M must be finite");
      // 0 means "not yet bound"; the CLI fills it from the tester's T.
      if (!finite(tail_T) || tail_T < 0.0) fail("heavy_tail: T must be finite and non-negative");
      break;
    case OracleKind::kAffineShift:
      if (!finite(beta)) fail("affine_shift: beta must be finite");
      break;
    case OracleKind::kRemote:
      if (endpoint.empty()) fail("remote: endpoint must not be empty");
      if (timeout.count() <= 0) fail("remote: timeout must be positive");
      break;
  }
  if (kind != OracleKind::kRemote && kind != OracleKind::kZero && max_dim > kMaxDim) {
    fail("max_dim above 24 needs exact permanents beyond the supported range");
  }
}

std::string_view to_string(OracleKind kind) {
  switch (kind) {
    case OracleKind::kExact: return "exact";
    case OracleKind::kAdditiveNoise: return "additive_noise";
    case OracleKind::kZero: return "zero";
    case OracleKind::kScaled: return "scaled";
    case OracleKind::kCorruptedFraction: return "corrupted_fraction";
    case OracleKind::kHeavyTail: return "heavy_tail";
    case OracleKind::kAffineShift: return "affine_shift";
    case OracleKind::kRemote: return "remote";
  }
  return "unknown";
}

OracleSpec parse_oracle_spec(std::string_view text) {
  OracleSpec spec;
  const std::size_t colon = text.find(':');
  const std::string_view head = text.substr(0, colon);
  if (head == "remote") {
    if (colon == std::string_view::npos) throw Error(ErrorCode::kInvalidSpec, "remote oracle needs an endpoint");
    spec.kind = OracleKind::kRemote;
    spec.endpoint = std::string(text.substr(colon + 1));
    spec.validate();
    return spec;
  }
  const auto fields = split_fields(text);
  if (head == "exact") {
    expect_fields(fields, 1, 1, text);
    spec.kind = OracleKind::kExact;
  } else if (head == "zero") {
    expect_fields(fields, 1, 1, text);
    spec.kind = OracleKind::kZero;
  } else if (head == "noise" || head == "noise-worst") {
    expect_fields(fields, 2, 2, text);
    spec.kind = OracleKind::kAdditiveNoise;
    spec.worst_case = head == "noise-worst";
    spec.noise_delta = parse_number(fields[1], "delta");
  } else if (head == "scaled") {
    expect_fields(fields, 2, 2, text);
    spec.kind = OracleKind::kScaled;
    spec.alpha = parse_number(fields[1], "alpha");
  } else if (head == "corrupt") {
    expect_fields(fields, 3, 3, text);
    spec.kind = OracleKind::kCorruptedFraction;
    spec.eta = parse_number(fields[1], "eta");
    spec.magnitude = parse_number(fields[2], "M");
  } else if (head == "heavy") {
    expect_fields(fields, 3, 4, text);
    spec.kind = OracleKind::kHeavyTail;
    spec.probability = parse_number(fields[1], "p");
    spec.magnitude = parse_number(fields[2], "M");
    spec.tail_T = fields.size() == 4 ? parse_number(fields[3], "T") : 0.0;
  } else if (head == "shift") {
    expect_fields(fields, 2, 2, text);
    spec.kind = OracleKind::kAffineShift;
    spec.beta = parse_number(fields[1], "beta");
  } else {
    throw Error(ErrorCode::kInvalidSpec, "unknown oracle kind '" + std::string(head) + "'");
  }
  spec.validate();
  return spec;
}

std::string to_string(const OracleSpec& spec) {
  switch (spec.kind) {
    case OracleKind::kExact: return "exact";
    case OracleKind::kZero: return "zero";
    case OracleKind::kAdditiveNoise:
      return std::string(spec.worst_case ? "noise-worst:" : "noise:") + format_number(spec.noise_delta);
    case OracleKind::kScaled: return "scaled:" + format_number(spec.alpha);
    case OracleKind::kCorruptedFraction:
      return "corrupt:" + format_number(spec.eta) + ":" + format_number(spec.magnitude);
    case OracleKind::kHeavyTail:
      return "heavy:" + format_number(spec.probability) + ":" + format_number(spec.magnitude) + ":" +
             format_number(spec.tail_T);
    case OracleKind::kAffineShift: return "shift:" + format_number(spec.beta);
    case OracleKind::kRemote: return "remote:" + spec.endpoint;
  }
  return "unknown";
}

std::unique_ptr<OracleFamily> make_oracle(const OracleSpec& spec, const EnsembleSampler& sampler) {
  spec.validate();
  if (spec.kind == OracleKind::kHeavyTail && spec.tail_T <= 0.0) {
    throw Error(ErrorCode::kInvalidSpec, "heavy_tail: threshold T must be bound before construction");
  }
  const std::uint64_t seed = mix64(sampler.seed() ^ mix64(sampler.stream_id() ^ 0x0A4C1E5ULL));
  switch (spec.kind) {
    case OracleKind::kExact: return std::make_unique<ExactOracle>(spec.max_dim);
    case OracleKind::kZero: return std::make_unique<ZeroOracle>(spec.max_dim);
    case OracleKind::kRemote: return connect_remote(spec.endpoint, RemoteOptions{spec.timeout});
    default: return std::make_unique<PerturbedOracle>(spec, seed);
  }
}

}  // namespace ptest
