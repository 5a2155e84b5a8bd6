#pragma once

// Executes scenarios and formats their result rows.

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "flyq/adversary.hpp"
#include "flyq/protocol.hpp"
#include "flyq/robustness.hpp"
#include "flyq/scenario.hpp"

namespace flyq::cli {

struct Metric {
  std::string name;
  double value = 0.0;
  /// 3 sigma radius for statistical metrics.
  std::optional<double> radius;
};

struct ResultRow {
  std::string scenario;
  std::vector<std::pair<std::string, std::string>> params;
  std::vector<Metric> metrics;
  double runtime_s = 0.0;

  const Metric* find(std::string_view name) const;
};

struct RunResult {
  std::vector<ResultRow> rows;
  /// Transcript of trial 0 of every grid point.
  nlohmann::json archive = nlohmann::json::array();
  bool causality_violation = false;
  /// Some empirical metric exceeded its bound by more than its 3 sigma radius.
  bool bound_violation = false;
};

/// Throws ConfigError when the geometry does not validate.
protocol::ValidatedConfig build_config(const Scenario& s);
adversary::StrategyParams strategy_params(const Scenario& s);
robustness::NoiseModel build_noise(const Scenario& s);

/// One grid point. threads = 0 uses every hardware thread.
RunResult run_point(const Scenario& s, unsigned threads = 0);

/// Every point of the scenario's grid, in grid order; points run in parallel.
RunResult run_scenario(const Scenario& s, unsigned threads = 0);

/// Columns are the union over rows in first-seen order; missing cells are empty.
std::string to_csv(const std::vector<ResultRow>& rows, bool timing = false);
nlohmann::json to_json(const std::vector<ResultRow>& rows, bool timing = false);

/// Shortest round-trip decimal form.
std::string format_number(double v);

}  // namespace flyq::cli
