#include "aerodesign/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "aerodesign/error.hpp"
#include "aerodesign/util.hpp"

namespace aerodesign {

namespace {

// Draws are built from raw mt19937_64 output rather than the standard
// distributions, whose algorithms are implementation-defined.
double unit_draw(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

std::uint64_t bounded_draw(std::mt19937_64& rng, std::uint64_t bound) {
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              std::numeric_limits<std::uint64_t>::max() % bound;
  std::uint64_t v = 0;
  do {
    v = rng();
  } while (v >= limit);
  return v % bound;
}

std::vector<UnitPoint> latin_hypercube(std::uint64_t seed, std::size_t n) {
  std::mt19937_64 rng(seed);
  std::vector<UnitPoint> pts(n);
  std::vector<std::size_t> perm(n);
  for (std::size_t d = 0; d < 3; ++d) {
    for (std::size_t i = 0; i < n; ++i) perm[i] = i;
    for (std::size_t i = n; i > 1; --i) {
      std::swap(perm[i - 1], perm[bounded_draw(rng, i)]);
    }
    for (std::size_t i = 0; i < n; ++i) {
      pts[i][d] = (static_cast<double>(perm[i]) + unit_draw(rng)) / static_cast<double>(n);
    }
  }
  return pts;
}

std::vector<UnitPoint> uniform_random(std::uint64_t seed, std::size_t n) {
  std::mt19937_64 rng(seed);
  std::vector<UnitPoint> pts(n);
  for (auto& p : pts) {
    for (auto& c : p) c = unit_draw(rng);
  }
  return pts;
}

// Joe-Kuo (new-joe-kuo-6.21201) parameters for dimensions 2 and 3; the first
// dimension is the base-2 van der Corput sequence.
struct SobolDim {
  unsigned s;
  unsigned a;
  std::array<std::uint32_t, 2> m;
};
constexpr std::array<SobolDim, 2> kJoeKuo{{{1, 0, {1, 0}}, {2, 1, {1, 3}}}};
constexpr unsigned kBits = 32;

using Directions = std::array<std::array<std::uint32_t, kBits + 1>, 3>;

Directions sobol_directions() {
  Directions v{};
  for (unsigned i = 1; i <= kBits; ++i) v[0][i] = 1U << (kBits - i);
  for (std::size_t d = 1; d < 3; ++d) {
    const auto& jk = kJoeKuo[d - 1];
    for (unsigned i = 1; i <= kBits; ++i) {
      if (i <= jk.s) {
        v[d][i] = jk.m[i - 1] << (kBits - i);
      } else {
        std::uint32_t x = v[d][i - jk.s] ^ (v[d][i - jk.s] >> jk.s);
        for (unsigned k = 1; k < jk.s; ++k) {
          if ((jk.a >> (jk.s - 1 - k)) & 1U) x ^= v[d][i - k];
        }
        v[d][i] = x;
      }
    }
  }
  return v;
}

std::vector<UnitPoint> sobol(std::uint64_t skip, std::size_t n) {
  if (skip + n >= (std::uint64_t{1} << kBits)) {
    throw Error(errc::sampling_invalid, "Sobol index exceeds 2^32");
  }
  const auto v = sobol_directions();
  // Direct evaluation at the first index via its Gray code, then the
  // standard one-bit update for every following index.
  std::uint64_t index = skip + 1;
  const std::uint64_t gray = index ^ (index >> 1);
  std::array<std::uint32_t, 3> x{};
  for (unsigned bit = 0; bit < kBits; ++bit) {
    if ((gray >> bit) & 1U) {
      for (std::size_t d = 0; d < 3; ++d) x[d] ^= v[d][bit + 1];
    }
  }
  std::vector<UnitPoint> pts(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (i > 0) {
      // Rightmost zero bit of (index - 1), 1-based.
      std::uint64_t prev = index - 1;
      unsigned c = 1;
      while (prev & 1U) {
        prev >>= 1;
        ++c;
      }
      for (std::size_t d = 0; d < 3; ++d) x[d] ^= v[d][c];
    }
    for (std::size_t d = 0; d < 3; ++d) {
      pts[i][d] = static_cast<double>(x[d]) * 0x1.0p-32;
    }
    ++index;
  }
  return pts;
}

double radical_inverse(std::uint64_t index, std::uint64_t base) {
  double inv = 1.0 / static_cast<double>(base);
  double f = inv;
  double r = 0.0;
  while (index > 0) {
    r += f * static_cast<double>(index % base);
    index /= base;
    f *= inv;
  }
  return r;
}

std::vector<UnitPoint> halton(std::uint64_t skip, std::size_t n) {
  static constexpr std::array<std::uint64_t, 3> kBases{2, 3, 5};
  std::vector<UnitPoint> pts(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::uint64_t index = skip + i + 1;
    for (std::size_t d = 0; d < 3; ++d) pts[i][d] = radical_inverse(index, kBases[d]);
  }
  return pts;
}

}  // namespace

DesignSpace::DesignSpace() : DesignSpace({0.01, 0.05, 0.01}, {0.095, 0.9, 0.40}) {}

DesignSpace::DesignSpace(std::array<double, 3> lower, std::array<double, 3> upper)
    : lower_(lower), upper_(upper) {
  for (std::size_t d = 0; d < 3; ++d) {
    if (!std::isfinite(lower_[d]) || !std::isfinite(upper_[d]) || !(lower_[d] < upper_[d])) {
      throw Error(errc::config_invalid, "design space needs finite lower < upper on every axis");
    }
  }
}

DesignSpace DesignSpace::unit_cube() { return DesignSpace({0, 0, 0}, {1, 1, 1}); }

bool DesignSpace::contains(const DesignParams& p) const noexcept {
  const auto v = p.as_array();
  for (std::size_t d = 0; d < 3; ++d) {
    if (v[d] < lower_[d] || v[d] > upper_[d]) return false;
  }
  return true;
}

double DesignSpace::relative_violation(const DesignParams& p) const noexcept {
  const auto v = p.as_array();
  double worst = 0.0;
  for (std::size_t d = 0; d < 3; ++d) {
    const double width = upper_[d] - lower_[d];
    const double over = std::max({0.0, lower_[d] - v[d], v[d] - upper_[d]});
    worst = std::max(worst, over / width);
  }
  return worst;
}

DesignParams DesignSpace::clamp(const DesignParams& p) const {
  const auto v = p.as_array();
  return DesignParams(std::clamp(v[0], lower_[0], upper_[0]),
                      std::clamp(v[1], lower_[1], upper_[1]),
                      std::clamp(v[2], lower_[2], upper_[2]));
}

std::string to_string(SampleKind kind) {
  switch (kind) {
    case SampleKind::latin_hypercube: return "latin_hypercube";
    case SampleKind::sobol: return "sobol";
    case SampleKind::halton: return "halton";
    case SampleKind::uniform_random: return "uniform_random";
  }
  return "unknown";
}

SampleKind sample_kind_from_string(const std::string& name) {
  if (name == "latin_hypercube") return SampleKind::latin_hypercube;
  if (name == "sobol") return SampleKind::sobol;
  if (name == "halton") return SampleKind::halton;
  if (name == "uniform_random") return SampleKind::uniform_random;
  throw Error(errc::config_invalid, "unknown sample strategy '" + name + "'");
}

std::vector<UnitPoint> sample_unit(const SampleStrategy& strategy, std::size_t n) {
  if (n == 0) {
    throw Error(errc::sampling_invalid, "sample count must be at least 1");
  }
  switch (strategy.kind) {
    case SampleKind::latin_hypercube:
    case SampleKind::uniform_random:
      if (!strategy.seed) {
        throw Error(errc::sampling_invalid, to_string(strategy.kind) + " requires a seed");
      }
      return strategy.kind == SampleKind::latin_hypercube ? latin_hypercube(*strategy.seed, n)
                                                           : uniform_random(*strategy.seed, n);
    case SampleKind::sobol:
      return sobol(strategy.skip, n);
    case SampleKind::halton:
      return halton(strategy.skip, n);
  }
  throw Error(errc::sampling_invalid, "unknown strategy");
}

std::vector<DesignParams> sample(const DesignSpace& space, const SampleStrategy& strategy,
                                 std::size_t n) {
  const auto unit = sample_unit(strategy, n);
  std::vector<DesignParams> out;
  out.reserve(n);
  const auto& lo = space.lower();
  const auto& hi = space.upper();
  for (const auto& u : unit) {
    std::array<double, 3> v{};
    for (std::size_t d = 0; d < 3; ++d) {
      v[d] = std::clamp(lo[d] + u[d] * (hi[d] - lo[d]), lo[d], hi[d]);
    }
    out.emplace_back(v[0], v[1], v[2]);
  }
  return out;
}

std::string samples_to_csv(std::span<const DesignParams> samples) {
  std::string out = "id,max_camber,camber_location,max_thickness\n";
  for (std::size_t i = 0; i < samples.size(); ++i) {
    out += std::to_string(i) + "," + format_double(samples[i].max_camber()) + "," +
           format_double(samples[i].camber_location()) + "," +
           format_double(samples[i].max_thickness()) + "\n";
  }
  return out;
}

double l2_star_discrepancy(std::span<const UnitPoint> points) {
  const double n = static_cast<double>(points.size());
  if (points.empty()) return 0.0;
  double single = 0.0;
  for (const auto& p : points) {
    double prod = 1.0;
    for (double c : p) prod *= (1.0 - c * c);
    single += prod;
  }
  double pair = 0.0;
  for (const auto& p : points) {
    for (const auto& q : points) {
      double prod = 1.0;
      for (std::size_t d = 0; d < 3; ++d) prod *= 1.0 - std::max(p[d], q[d]);
      pair += prod;
    }
  }
  const double d2 = 1.0 / 27.0 - (2.0 / 8.0) / n * single + pair / (n * n);
  return std::sqrt(std::max(0.0, d2));
}

}  // namespace aerodesign
