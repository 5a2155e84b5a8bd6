#pragma once

// Declarative scenario files (TOML) and their expansion over parameter grids.

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "flyq/spacetime.hpp"

namespace flyq::cli {

enum class Mode { Ideal, NonIdeal, Redundant, Chained, Dual, EpsilonTable };

std::string_view to_string(Mode m);
/// Throws ConfigError on an unknown name.
Mode parse_mode(std::string_view s);

struct LegBlock {
  double loss = 0.0;
  double depolarizing = 0.0;
  bool operator==(const LegBlock&) const = default;
};

using GridValue = std::variant<std::int64_t, double, bool, std::string>;
std::string to_string(const GridValue& v);

struct Scenario {
  std::string name = "scenario";
  Mode mode = Mode::Ideal;
  std::int64_t trials = 1000;
  std::int64_t seed = 0;

  struct Geometry {
    /// 1d | planar | spherical
    std::string layout = "1d";
    /// xy | yz, for planar layouts.
    std::string plane = "xy";
    /// secured | teleport
    std::string transport = "secured";
    spacetime::Event commit_point{};
    /// Coordinate time from P to each Q_i along its ray.
    std::int64_t reach = 8;
    std::int64_t receipt_lag = 1;
    std::int64_t bob_lead = 1;
    std::int64_t processing_delay = 0;
    /// Non-ideal geometry: extra coordinate time added to every ray point.
    std::int64_t slack = 1;
    /// Explicit rational directions (nx, ny, nz, den); override the layout.
    std::vector<std::array<std::int64_t, 4>> directions;
    /// Explicit Q_i and Q'_i; override reach and receipt_lag.
    std::vector<spacetime::Event> unveil_points;
    std::vector<spacetime::Event> receipt_points;
    bool operator==(const Geometry&) const = default;
  } geometry;

  struct Quantum {
    int d = 2;
    int m = 2;
    bool operator==(const Quantum&) const = default;
  } quantum;

  struct Adversary {
    std::string strategy = "honest";
    int value = 0;
    double p0 = 0.5;
    /// Unset means the symmetric point of the constraint curve.
    std::optional<double> asymmetry_a;
    /// haar | computational
    std::string basis = "haar";
    /// Points at which the committer unveils; empty means all of them.
    std::vector<int> unveil_at;
    bool operator==(const Adversary&) const = default;
  } adversary;

  struct Noise {
    LegBlock bob_to_p;
    LegBlock p_to_q;
    LegBlock q_to_receipt;
    double detector_efficiency = 1.0;
    bool operator==(const Noise&) const = default;
    bool is_none() const;
  } noise;

  struct Redundancy {
    int copies = 1;
    int threshold = 1;
    bool operator==(const Redundancy&) const = default;
  } redundancy;

  struct Chain {
    int depth = 1;
    /// secure | compact
    std::string sizing = "secure";
    std::int64_t interval = 8;
    int bit = 0;
    /// Level at which the committer routes a wrong value; 0 for none.
    int tamper = 0;
    bool operator==(const Chain&) const = default;
  } chain;

  struct Dual {
    /// honest | temporary-cheat
    std::string strategy = "honest";
    int bit = 0;
    int point = 0;
    int claim = 0;
    bool return_opposite = true;
    bool operator==(const Dual&) const = default;
  } dual;

  /// Dotted field path -> values, in file order.
  std::vector<std::pair<std::string, std::vector<GridValue>>> sweep;

  bool operator==(const Scenario&) const = default;
};

/// Throws ConfigError listing every problem with its line and field.
Scenario parse_scenario(std::string_view text, std::string_view source = "<scenario>");
Scenario load_scenario(const std::string& path);

/// TOML text that parses back to an equal Scenario.
std::string to_toml(const Scenario& s);

/// Returns a copy with the dotted field set to `value`. Throws ConfigError if
/// the field is unknown or the value has the wrong type.
Scenario with_field(const Scenario& s, std::string_view path, const GridValue& value);

struct GridPoint {
  Scenario scenario;
  /// The (path, value) assignments of this point, in grid order.
  std::vector<std::pair<std::string, std::string>> assignments;
};

/// Cartesian product of the sweep block, first key slowest. The sweep block
/// of each point is cleared. A scenario without a sweep block expands to itself.
std::vector<GridPoint> expand_grid(const Scenario& s);

}  // namespace flyq::cli
