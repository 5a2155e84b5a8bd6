#pragma once

// Exact Minkowski geometry in the agreed inertial frame, with c = 1.
//
// Coordinates are integers in units of a global resolution chosen by the
// scenario; one unit of t equals one unit of distance. Every causal
// classification is computed in exact integer arithmetic.

#include <compare>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace flyq::spacetime {

struct Event {
  std::int64_t t = 0;
  std::int64_t x = 0;
  std::int64_t y = 0;
  std::int64_t z = 0;

  friend auto operator<=>(const Event&, const Event&) = default;
};

std::string to_string(const Event& e);

enum class CausalRelation {
  TimelikeFuture,
  LightlikeFuture,
  Spacelike,
  LightlikePast,
  TimelikePast,
  Coincident,
};

std::string_view to_string(CausalRelation r);

/// The relation seen from the other event.
CausalRelation mirror(CausalRelation r);

/// TimelikeFuture or LightlikeFuture.
bool is_future(CausalRelation r);
/// TimelikePast or LightlikePast.
bool is_past(CausalRelation r);

/// A future-directed lightlike direction with exact rational spatial part.
///
/// The spatial unit vector is (nx, ny, nz) / den with nx^2 + ny^2 + nz^2 == den^2,
/// stored in lowest terms. One ray step is the integer lightlike displacement
/// (den, nx, ny, nz).
class LightDirection {
 public:
  /// Throws ConfigError if the vector is zero or not a rational unit vector.
  LightDirection(int index, std::int64_t nx, std::int64_t ny, std::int64_t nz, std::int64_t den);

  /// The 1D directions v_0 = (-1) and v_1 = (+1).
  static LightDirection one_dimensional(int index, int sign);

  int index() const { return index_; }
  std::int64_t nx() const { return nx_; }
  std::int64_t ny() const { return ny_; }
  std::int64_t nz() const { return nz_; }
  std::int64_t den() const { return den_; }

  bool is_one_dimensional() const { return ny_ == 0 && nz_ == 0; }
  bool same_direction(const LightDirection& other) const;

  /// Cosine of the angle to another direction.
  double cos_angle(const LightDirection& other) const;

 private:
  int index_;
  std::int64_t nx_, ny_, nz_, den_;
};

/// Minkowski interval (dt)^2 - |dx|^2. Throws ConfigError when the exact
/// value does not fit in 64 bits.
std::int64_t interval_squared(const Event& a, const Event& b);

/// Relation of `b` as seen from `a` (for example TimelikeFuture if b lies
/// inside the future cone of a). Exact even when the interval exceeds 64 bits.
CausalRelation causal_order(const Event& a, const Event& b);

/// The point reached after `steps` ray steps from `origin` along `dir`.
/// Throws std::invalid_argument when steps <= 0 and ConfigError on overflow.
Event point_on_ray(const Event& origin, const LightDirection& dir, std::int64_t steps);

/// The smallest step count whose elapsed coordinate time is at least `duration`.
std::int64_t steps_for_duration(const LightDirection& dir, std::int64_t duration);

enum class DirectionMode { Planar, Spherical };

/// Coordinate plane used by planar direction sets.
enum class Plane { XY, YZ };

struct DirectionSet {
  std::vector<LightDirection> directions;
  /// Smallest pairwise angle, radians.
  double min_separation = 0.0;
};

/// m pairwise-distinct directions: equal angles in a plane (rational
/// approximations where the angle is not a multiple of 90 degrees) or a
/// Fibonacci-lattice sphere covering. For m = 2 in the XY plane this is
/// exactly {v_0 = (-1, 0, 0), v_1 = (+1, 0, 0)}.
DirectionSet generate_directions(int m, DirectionMode mode, Plane plane = Plane::XY);

/// Smallest pairwise angle of a direction list, by brute force.
double min_pairwise_angle(std::span<const LightDirection> dirs);

/// True iff `p` lies outside the causal past (including the cone itself and
/// coincidence) of every receipt point, i.e. Bob may count p as a point where
/// the committer was already bound. Throws std::invalid_argument on an empty list.
bool committed_at(const Event& p, std::span<const Event> receipt_points);

/// Earliest event in the intersection of the causal futures of two events
/// that lie on the x axis. Throws ConfigError if the apex falls between
/// lattice points (double the resolution to fix).
Event earliest_common_future(const Event& a, const Event& b);

/// Earliest event at the spatial site of `site` that is in the causal future
/// (or coincident) of `site` and of every source. Exact in 3D.
Event earliest_at_site(const Event& site, std::span<const Event> sources);

}  // namespace flyq::spacetime
