#include "qadmit/random.hpp"

#include <cmath>
#include <numbers>
#include <string>

namespace qadmit {
namespace {

std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

}  // namespace

GammaSpec gamma_from_rate_scv(double rate, double scv) {
  if (!(rate > 0.0)) {
    throw ConfigError("gamma rate must be > 0, got " + std::to_string(rate));
  }
  if (!(scv > 0.0)) {
    throw ConfigError("gamma scv must be > 0, got " + std::to_string(scv));
  }
  return GammaSpec{rate, scv};
}

DeterministicSpec deterministic_from_value(double value) {
  if (!(value > 0.0)) {
    throw ConfigError("deterministic duration must be > 0, got " +
                      std::to_string(value));
  }
  return DeterministicSpec{value};
}

double mean(const DistributionSpec& spec) {
  return std::visit([](const auto& s) { return s.mean(); }, spec);
}

RngStream::RngStream(std::uint64_t seed, std::string_view stream_id) {
  const std::uint64_t label = fnv1a64(stream_id);
  std::seed_seq seq{
      static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
      static_cast<std::uint32_t>(label), static_cast<std::uint32_t>(label >> 32)};
  engine_.seed(seq);
}

double RngStream::standard_normal() {
  // 1 - U keeps the argument of log strictly positive.
  const double u1 = 1.0 - uniform01();
  const double u2 = uniform01();
  return std::sqrt(-2.0 * std::log(u1)) *
         std::cos(2.0 * std::numbers::pi * u2);
}

namespace {

// Marsaglia-Tsang squeeze method, valid for shape >= 1.
double gamma_variate_shape_ge1(double shape, RngStream& stream) {
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double x;
    double v;
    do {
      x = stream.standard_normal();
      v = 1.0 + c * x;
    } while (v <= 0.0);
    v = v * v * v;
    const double u = stream.uniform01();
    if (u < 1.0 - 0.0331 * x * x * x * x) {
      return d * v;
    }
    if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) {
      return d * v;
    }
  }
}

}  // namespace

double sample(const GammaSpec& spec, RngStream& stream) {
  const double shape = spec.shape();
  if (shape >= 1.0) {
    return gamma_variate_shape_ge1(shape, stream) * spec.scale();
  }
  // Shape augmentation: draw Gamma(shape+1) and scale by U^(1/shape).
  const double g = gamma_variate_shape_ge1(shape + 1.0, stream);
  const double u = 1.0 - stream.uniform01();  // (0, 1]
  return g * std::pow(u, 1.0 / shape) * spec.scale();
}

double sample(const DeterministicSpec& spec, RngStream&) { return spec.value; }

double sample(const DistributionSpec& spec, RngStream& stream) {
  return std::visit([&](const auto& s) { return sample(s, stream); }, spec);
}

}  // namespace qadmit
