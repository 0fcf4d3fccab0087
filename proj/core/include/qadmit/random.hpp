#pragma once

#include <cstdint>
#include <random>
#include <stdexcept>
#include <string_view>
#include <variant>

namespace qadmit {

/// Invalid user-supplied parameters or config file contents.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Filesystem failure (unreadable input, unwritable output directory).
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Gamma distribution parameterized by rate and squared coefficient of
/// variation: mean = 1/rate, SCV = variance/mean^2. The induced shape/scale
/// are shape = 1/scv and scale = scv/rate, so shape*scale = 1/rate exactly.
struct GammaSpec {
  double rate = 1.0;
  double scv = 1.0;

  double shape() const { return 1.0 / scv; }
  double scale() const { return scv / rate; }
  double mean() const { return 1.0 / rate; }
};

/// Fixed positive duration; every sample equals `value`.
struct DeterministicSpec {
  double value = 1.0;

  double mean() const { return value; }
};

GammaSpec gamma_from_rate_scv(double rate, double scv);
DeterministicSpec deterministic_from_value(double value);

using DistributionSpec = std::variant<GammaSpec, DeterministicSpec>;

double mean(const DistributionSpec& spec);

/// Seeded random stream. Equal (seed, stream_id) pairs produce identical
/// sample sequences; distinct stream ids give independent sequences, so
/// arrival, per-node service, routing and shadow draws never perturb each
/// other. All variates are generated from the raw engine output by our own
/// code, keeping sequences stable across standard libraries.
class RngStream {
 public:
  RngStream(std::uint64_t seed, std::string_view stream_id);

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform on [0, 1).
  double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  /// Standard normal via Box-Muller (two uniforms per draw).
  double standard_normal();

 private:
  std::mt19937_64 engine_;
};

double sample(const GammaSpec& spec, RngStream& stream);
double sample(const DeterministicSpec& spec, RngStream& stream);
double sample(const DistributionSpec& spec, RngStream& stream);

}  // namespace qadmit
