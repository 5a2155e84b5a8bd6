#include "flyq/spacetime.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <stdexcept>
#include <tuple>
#include <utility>

#include "flyq/errors.hpp"

namespace flyq::spacetime {
namespace {

__extension__ typedef __int128 Wide;

// Coordinate differences beyond this make the squared interval unrepresentable.
constexpr std::int64_t kMaxDelta = std::int64_t{1} << 62;

// Denominator scale of the rational approximations used for direction sets.
constexpr std::int64_t kCircleScale = 1024;
constexpr std::int64_t kSphereScale = 512;

std::int64_t checked_delta(std::int64_t from, std::int64_t to) {
  std::int64_t d = 0;
  if (__builtin_sub_overflow(to, from, &d) || d > kMaxDelta || d < -kMaxDelta) {
    throw ConfigError("coordinate difference too large for the configured resolution");
  }
  return d;
}

std::int64_t checked_add(std::int64_t a, std::int64_t b) {
  std::int64_t r = 0;
  if (__builtin_add_overflow(a, b, &r)) {
    throw ConfigError("coordinate overflow: coordinates too large for the configured resolution");
  }
  return r;
}

std::int64_t checked_mul(std::int64_t a, std::int64_t b) {
  std::int64_t r = 0;
  if (__builtin_mul_overflow(a, b, &r)) {
    throw ConfigError("coordinate overflow: coordinates too large for the configured resolution");
  }
  return r;
}

struct Deltas {
  Wide dt, dx, dy, dz;
};

Deltas deltas(const Event& a, const Event& b) {
  return {checked_delta(a.t, b.t), checked_delta(a.x, b.x), checked_delta(a.y, b.y),
          checked_delta(a.z, b.z)};
}

Wide wide_interval(const Deltas& d) {
  return d.dt * d.dt - d.dx * d.dx - d.dy * d.dy - d.dz * d.dz;
}

// Smallest n >= 0 with n * n >= v.
std::int64_t isqrt_ceil(Wide v) {
  if (v <= 0) return 0;
  auto n = static_cast<std::int64_t>(std::sqrt(static_cast<long double>(v)));
  while (static_cast<Wide>(n) * n < v) ++n;
  while (n > 0 && static_cast<Wide>(n - 1) * (n - 1) >= v) --n;
  return n;
}

LightDirection circle_direction(int index, double angle, Plane plane) {
  const double quarter = std::numbers::pi / 2.0;
  const long k = std::lround(angle / quarter);
  const double residual = angle - static_cast<double>(k) * quarter;
  const std::int64_t q = kCircleScale;
  const std::int64_t p = std::llround(static_cast<double>(q) * std::tan(residual / 2.0));
  std::int64_t c = q * q - p * p;
  std::int64_t s = 2 * p * q;
  const std::int64_t den = q * q + p * p;
  switch (((k % 4) + 4) % 4) {
    case 1: std::tie(c, s) = std::pair{-s, c}; break;
    case 2: std::tie(c, s) = std::pair{-c, -s}; break;
    case 3: std::tie(c, s) = std::pair{s, -c}; break;
    default: break;
  }
  if (plane == Plane::XY) return LightDirection(index, c, s, 0, den);
  return LightDirection(index, 0, c, s, den);
}

LightDirection sphere_direction(int index, double x, double y, double z) {
  // Inverse stereographic projection of a rational point gives an exact
  // rational unit vector; project from the pole farther from the target.
  const std::int64_t k = kSphereScale;
  const double denom = z >= 0.0 ? (1.0 + z) : (1.0 - z);
  const std::int64_t a = std::llround(static_cast<double>(k) * x / denom);
  const std::int64_t b = std::llround(static_cast<double>(k) * y / denom);
  const std::int64_t r2 = a * a + b * b;
  const std::int64_t nz = z >= 0.0 ? k * k - r2 : r2 - k * k;
  return LightDirection(index, 2 * a * k, 2 * b * k, nz, k * k + r2);
}

}  // namespace

std::string to_string(const Event& e) {
  return "(" + std::to_string(e.t) + ", " + std::to_string(e.x) + ", " + std::to_string(e.y) +
         ", " + std::to_string(e.z) + ")";
}

std::string_view to_string(CausalRelation r) {
  switch (r) {
    case CausalRelation::TimelikeFuture: return "timelike-future";
    case CausalRelation::LightlikeFuture: return "lightlike-future";
    case CausalRelation::Spacelike: return "spacelike";
    case CausalRelation::LightlikePast: return "lightlike-past";
    case CausalRelation::TimelikePast: return "timelike-past";
    case CausalRelation::Coincident: return "coincident";
  }
  return "unknown";
}

CausalRelation mirror(CausalRelation r) {
  switch (r) {
    case CausalRelation::TimelikeFuture: return CausalRelation::TimelikePast;
    case CausalRelation::LightlikeFuture: return CausalRelation::LightlikePast;
    case CausalRelation::LightlikePast: return CausalRelation::LightlikeFuture;
    case CausalRelation::TimelikePast: return CausalRelation::TimelikeFuture;
    default: return r;
  }
}

bool is_future(CausalRelation r) {
  return r == CausalRelation::TimelikeFuture || r == CausalRelation::LightlikeFuture;
}

bool is_past(CausalRelation r) {
  return r == CausalRelation::TimelikePast || r == CausalRelation::LightlikePast;
}

LightDirection::LightDirection(int index, std::int64_t nx, std::int64_t ny, std::int64_t nz,
                               std::int64_t den)
    : index_(index), nx_(nx), ny_(ny), nz_(nz), den_(den) {
  if (den_ < 0) {
    nx_ = -nx_;
    ny_ = -ny_;
    nz_ = -nz_;
    den_ = -den_;
  }
  if (den_ == 0 || (nx_ == 0 && ny_ == 0 && nz_ == 0)) {
    throw ConfigError("light direction must be nonzero");
  }
  const Wide norm = Wide{nx_} * nx_ + Wide{ny_} * ny_ + Wide{nz_} * nz_;
  if (norm != Wide{den_} * den_) {
    throw ConfigError("light direction (" + std::to_string(nx) + ", " + std::to_string(ny) + ", " +
                      std::to_string(nz) + ")/" + std::to_string(den) +
                      " is not a rational unit vector");
  }
  const std::int64_t g = std::gcd(std::gcd(std::gcd(nx_, ny_), nz_), den_);
  nx_ /= g;
  ny_ /= g;
  nz_ /= g;
  den_ /= g;
}

LightDirection LightDirection::one_dimensional(int index, int sign) {
  if (sign == 0) throw ConfigError("1D direction sign must be nonzero");
  return LightDirection(index, sign > 0 ? 1 : -1, 0, 0, 1);
}

bool LightDirection::same_direction(const LightDirection& o) const {
  return nx_ == o.nx_ && ny_ == o.ny_ && nz_ == o.nz_ && den_ == o.den_;
}

double LightDirection::cos_angle(const LightDirection& o) const {
  const long double dot = static_cast<long double>(nx_) * o.nx_ +
                          static_cast<long double>(ny_) * o.ny_ +
                          static_cast<long double>(nz_) * o.nz_;
  return static_cast<double>(dot / (static_cast<long double>(den_) * o.den_));
}

std::int64_t interval_squared(const Event& a, const Event& b) {
  const Wide v = wide_interval(deltas(a, b));
  if (v > std::numeric_limits<std::int64_t>::max() || v < std::numeric_limits<std::int64_t>::min()) {
    throw ConfigError("interval overflow: coordinates too large for the configured resolution");
  }
  return static_cast<std::int64_t>(v);
}

CausalRelation causal_order(const Event& a, const Event& b) {
  const Deltas d = deltas(a, b);
  const Wide s = wide_interval(d);
  if (s < 0) return CausalRelation::Spacelike;
  if (d.dt == 0) return CausalRelation::Coincident;  // s >= 0 with dt == 0 forces dx == 0
  if (s == 0) return d.dt > 0 ? CausalRelation::LightlikeFuture : CausalRelation::LightlikePast;
  return d.dt > 0 ? CausalRelation::TimelikeFuture : CausalRelation::TimelikePast;
}

Event point_on_ray(const Event& origin, const LightDirection& dir, std::int64_t steps) {
  if (steps <= 0) throw std::invalid_argument("ray parameter must be positive");
  return Event{checked_add(origin.t, checked_mul(steps, dir.den())),
               checked_add(origin.x, checked_mul(steps, dir.nx())),
               checked_add(origin.y, checked_mul(steps, dir.ny())),
               checked_add(origin.z, checked_mul(steps, dir.nz()))};
}

std::int64_t steps_for_duration(const LightDirection& dir, std::int64_t duration) {
  if (duration <= 0) return 1;
  return std::max<std::int64_t>(1, (duration + dir.den() - 1) / dir.den());
}

double min_pairwise_angle(std::span<const LightDirection> dirs) {
  double best = std::numbers::pi;
  for (std::size_t i = 0; i < dirs.size(); ++i) {
    for (std::size_t j = i + 1; j < dirs.size(); ++j) {
      const double c = std::clamp(dirs[i].cos_angle(dirs[j]), -1.0, 1.0);
      best = std::min(best, std::acos(c));
    }
  }
  return best;
}

DirectionSet generate_directions(int m, DirectionMode mode, Plane plane) {
  if (m < 2) throw std::invalid_argument("direction set needs m >= 2");
  DirectionSet set;
  set.directions.reserve(static_cast<std::size_t>(m));
  if (mode == DirectionMode::Planar) {
    for (int i = 0; i < m; ++i) {
      const double angle = std::numbers::pi + 2.0 * std::numbers::pi * i / m;
      set.directions.push_back(circle_direction(i, angle, plane));
    }
  } else {
    const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
    for (int i = 0; i < m; ++i) {
      const double z = 1.0 - (2.0 * i + 1.0) / m;
      const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
      const double phi = golden * i;
      set.directions.push_back(sphere_direction(i, r * std::cos(phi), r * std::sin(phi), z));
    }
  }
  for (std::size_t i = 0; i < set.directions.size(); ++i) {
    for (std::size_t j = i + 1; j < set.directions.size(); ++j) {
      if (set.directions[i].same_direction(set.directions[j])) {
        throw CapExceeded("direction set of size " + std::to_string(m) +
                          " exceeds the rational resolution");
      }
    }
  }
  set.min_separation = min_pairwise_angle(set.directions);
  return set;
}

bool committed_at(const Event& p, std::span<const Event> receipt_points) {
  if (receipt_points.empty()) throw std::invalid_argument("receipt point list is empty");
  return std::none_of(receipt_points.begin(), receipt_points.end(), [&](const Event& q) {
    const CausalRelation r = causal_order(p, q);
    return is_future(r) || r == CausalRelation::Coincident;
  });
}

Event earliest_common_future(const Event& a, const Event& b) {
  if (a.y != 0 || a.z != 0 || b.y != 0 || b.z != 0) {
    throw ConfigError("earliest_common_future needs events on the x axis");
  }
  const CausalRelation r = causal_order(a, b);
  if (is_future(r) || r == CausalRelation::Coincident) return b;
  if (is_past(r)) return a;
  const Event& left = a.x <= b.x ? a : b;
  const Event& right = a.x <= b.x ? b : a;
  const std::int64_t twice_t = (right.x - left.x) + left.t + right.t;
  const std::int64_t twice_x = left.x + right.x + right.t - left.t;
  if (twice_t % 2 != 0) {
    throw ConfigError("common-future apex lies between lattice points; double the resolution");
  }
  return Event{twice_t / 2, twice_x / 2, 0, 0};
}

Event earliest_at_site(const Event& site, std::span<const Event> sources) {
  std::int64_t t = site.t;
  for (const Event& s : sources) {
    const Deltas d = deltas(s, site);
    const std::int64_t reach = isqrt_ceil(d.dx * d.dx + d.dy * d.dy + d.dz * d.dz);
    t = std::max(t, checked_add(s.t, reach));
  }
  return Event{t, site.x, site.y, site.z};
}

}  // namespace flyq::spacetime
