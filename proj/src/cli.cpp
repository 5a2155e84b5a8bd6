#include "flyq/cli.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>

#include "flyq/chaining.hpp"
#include "flyq/cloning.hpp"
#include "flyq/errors.hpp"
#include "flyq/runner.hpp"
#include "flyq/scenario.hpp"

namespace flyq::cli {

namespace {

constexpr double kBoundTol = 1e-9;
constexpr std::size_t kLagrangePoints = 10001;

GridValue parse_grid_value(const std::string& s) {
  if (s == "true") return true;
  if (s == "false") return false;
  std::int64_t i = 0;
  if (auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), i); ec == std::errc{} && p == s.data() + s.size()) {
    return i;
  }
  double d = 0.0;
  if (auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), d); ec == std::errc{} && p == s.data() + s.size()) {
    return d;
  }
  return s;
}

/// path=v1,v2,...
std::pair<std::string, std::vector<GridValue>> parse_grid_flag(const std::string& flag) {
  const auto eq = flag.find('=');
  if (eq == std::string::npos || eq == 0 || eq + 1 == flag.size()) {
    throw ConfigError("--grid expects path=v1,v2,... (got '" + flag + "')");
  }
  std::vector<GridValue> values;
  std::stringstream ss(flag.substr(eq + 1));
  for (std::string item; std::getline(ss, item, ',');) {
    if (item.empty()) throw ConfigError("--grid '" + flag + "' has an empty value");
    values.push_back(parse_grid_value(item));
  }
  return {flag.substr(0, eq), std::move(values)};
}

struct OutputFlags {
  std::string format = "csv";
  std::string out;
  std::string archive;
  bool timing = false;
  unsigned threads = 0;
};

void add_output_flags(CLI::App* cmd, OutputFlags& f) {
  cmd->add_option("--format", f.format, "Result format")->check(CLI::IsMember({"csv", "json"}));
  cmd->add_option("--out", f.out, "Write results to this file instead of stdout");
  cmd->add_option("--archive", f.archive, "Write the transcript archive (JSON) to this file");
  cmd->add_flag("--timing", f.timing, "Include wall-clock runtime (makes output nondeterministic)");
  cmd->add_option("--threads", f.threads, "Worker threads (0 = all cores)");
}

void write_text(const std::string& path, const std::string& text, std::ostream& out) {
  if (path.empty()) {
    out << text;
    return;
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw ConfigError("cannot write '" + path + "'");
  f << text;
}

int emit(const RunResult& r, const OutputFlags& f, std::ostream& out) {
  const std::string text = f.format == "json" ? to_json(r.rows, f.timing).dump(2) + "\n" : to_csv(r.rows, f.timing);
  write_text(f.out, text, out);
  if (!f.archive.empty()) write_text(f.archive, r.archive.dump(2) + "\n", out);
  if (r.causality_violation) return kCausalityViolation;
  if (r.bound_violation) return kBoundViolation;
  return kOk;
}

Scenario apply_overrides(Scenario s, const std::optional<std::int64_t>& seed, const std::optional<std::int64_t>& trials) {
  if (seed) s = with_field(s, "seed", *seed);
  if (trials) s = with_field(s, "trials", *trials);
  return s;
}

std::string fmt(double v, int prec = 12) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.*f", prec, v);
  return buf;
}

std::string bounds_table(const std::vector<BoundCheck>& rows, const std::string& format) {
  std::ostringstream os;
  if (format == "json") {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& r : rows) {
      nlohmann::json j{{"d", r.d},         {"m", r.m},         {"bound", r.bound}, {"achieved", r.achieved},
                       {"gap", r.gap},     {"envelope", r.envelope}, {"pass", r.pass}};
      if (r.lagrange_peak) j["lagrange_peak"] = *r.lagrange_peak;
      if (r.lagrange_asymmetry) j["lagrange_asymmetry"] = *r.lagrange_asymmetry;
      arr.push_back(std::move(j));
    }
    os << nlohmann::json{{"bounds", std::move(arr)}}.dump(2) << "\n";
    return os.str();
  }
  if (format == "csv") {
    os << "d,m,bound,achieved,gap,envelope,lagrange_peak,status\n";
    for (const auto& r : rows) {
      os << r.d << ',' << r.m << ',' << format_number(r.bound) << ',' << format_number(r.achieved) << ','
         << format_number(r.gap) << ',' << format_number(r.envelope) << ','
         << (r.lagrange_peak ? format_number(*r.lagrange_peak) : "") << ',' << (r.pass ? "PASS" : "FAIL") << "\n";
    }
    return os.str();
  }
  char line[160];
  std::snprintf(line, sizeof line, "%3s %3s %16s %16s %10s %10s %16s  %s\n", "d", "m", "bound", "achieved", "gap",
                "envelope", "lagrange_peak", "status");
  os << line;
  for (const auto& r : rows) {
    std::snprintf(line, sizeof line, "%3d %3d %16.12f %16.12f %10.2e %10.6f %16s  %s\n", r.d, r.m, r.bound,
                  r.achieved, r.gap, r.envelope, r.lagrange_peak ? fmt(*r.lagrange_peak).c_str() : "-",
                  r.pass ? "PASS" : "FAIL");
    os << line;
  }
  const auto failed = std::count_if(rows.begin(), rows.end(), [](const auto& r) { return !r.pass; });
  os << rows.size() << " checks, " << failed << " failed\n";
  return os.str();
}

std::string chain_report(const chaining::Chain& chain, const chaining::ChainVerdict& v) {
  std::ostringstream os;
  os << "chained commitment: depth " << chain.config.depth << ", " << to_string(chain.config.sizing)
     << " sizing, committed bit " << chain.bit << "\n";
  os << "level  d      m      bound            sessions\n";
  for (const auto& lp : chain.levels) {
    const auto n = std::count_if(chain.sessions.begin(), chain.sessions.end(),
                                 [&](const auto& s) { return s.level == lp.level; });
    char line[96];
    std::snprintf(line, sizeof line, "%-6d %-6d %-6d %-16.12f %ld\n", lp.level, lp.d, lp.m, lp.bound,
                  static_cast<long>(n));
    os << line;
  }
  os << "causally consistent: " << (chaining::causally_consistent(chain) ? "yes" : "no") << "\n";
  os << "decoded bit: " << v.bit << "\n";
  for (std::size_t k = 0; k < v.levels.size(); ++k) {
    os << "level " << k << " verdict: " << protocol::to_string(v.levels[k]) << "\n";
  }
  os << "outcome: " << (v.all_pass ? "all levels pass" : "cheat suspected at level " + std::to_string(*v.failing_level))
     << "\n";
  os << "decision point: " << spacetime::to_string(v.decision_point) << "\n";
  return os.str();
}

}  // namespace

std::vector<BoundCheck> verify_bounds(int d_max, int m_max) {
  if (d_max < 2 || d_max > 32) throw ConfigError("--d-max must lie in [2, 32]");
  if (m_max < 2 || m_max > 8) throw ConfigError("--m-max must lie in [2, 8]");
  std::vector<BoundCheck> rows;
  for (int d = 2; d <= d_max; ++d) {
    for (int m = 2; m <= m_max; ++m) {
      const auto rep = cloning::bound_sum_fidelity(d, m);
      BoundCheck c;
      c.d = d;
      c.m = m;
      c.bound = rep.bound;
      c.achieved = rep.achieved;
      c.gap = rep.gap;
      c.envelope = rep.envelope;
      c.pass = std::abs(rep.gap) <= kBoundTol && rep.achieved <= rep.envelope + kBoundTol;
      if (m == 2) {
        const auto sw = cloning::sweep_constraint(d, kLagrangePoints);
        c.lagrange_peak = sw.max_sum;
        c.lagrange_asymmetry = std::abs(sw.at_max.a - sw.at_max.b);
        c.pass = c.pass && std::abs(sw.max_sum - rep.bound) <= kBoundTol && *c.lagrange_asymmetry <= 1e-6;
      }
      rows.push_back(c);
    }
  }
  return rows;
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Simulator for relativistic commitments with flying qudits", "flyq"};
  app.require_subcommand(1);

  std::string scenario_path;
  std::optional<std::int64_t> seed, trials;
  OutputFlags of;
  std::vector<std::string> grid;

  auto* run = app.add_subcommand("run", "Run a scenario file (and its [sweep] grid, if any)");
  run->add_option("scenario", scenario_path, "Scenario TOML file")->required();
  run->add_option("--seed", seed, "Override the scenario seed");
  run->add_option("--trials", trials, "Override the trial count");
  add_output_flags(run, of);

  auto* sweep = app.add_subcommand("sweep", "Run a scenario over a parameter grid");
  sweep->add_option("scenario", scenario_path, "Scenario TOML file")->required();
  sweep->add_option("--grid", grid, "Grid axis path=v1,v2,... (repeatable; adds to [sweep])");
  sweep->add_option("--seed", seed, "Override the scenario seed");
  sweep->add_option("--trials", trials, "Override the trial count");
  add_output_flags(sweep, of);

  int d_max = 8, m_max = 3;
  std::string bounds_format = "table", bounds_out;
  auto* vb = app.add_subcommand("verify-bounds", "Compare constructive cloner sums with the closed-form bounds");
  vb->add_option("--d-max", d_max, "Largest dimension");
  vb->add_option("--m-max", m_max, "Largest number of unveil points");
  vb->add_option("--format", bounds_format, "Output format")->check(CLI::IsMember({"table", "csv", "json"}));
  vb->add_option("--out", bounds_out, "Write the report to this file");

  int depth = 1, bit = 0, d0 = 2, tamper = 0;
  std::int64_t interval = 8;
  std::int64_t chain_seed = 0;
  std::string sizing = "secure", chain_format = "text", chain_out;
  auto* cd = app.add_subcommand("chain-demo", "Commit a bit through a chain of masked commitments and unveil it");
  cd->add_option("--depth", depth, "Number of masked levels");
  cd->add_option("--bit", bit, "Committed bit")->check(CLI::Range(0, 1));
  cd->add_option("--d0", d0, "Dimension of the first level");
  cd->add_option("--interval", interval, "Coordinate time per level");
  cd->add_option("--sizing", sizing, "Level sizing")->check(CLI::IsMember({"secure", "compact"}));
  cd->add_option("--tamper", tamper, "Route a wrong value at this level (0 = honest)");
  cd->add_option("--seed", chain_seed, "Seed");
  cd->add_option("--format", chain_format, "Output format")->check(CLI::IsMember({"text", "json"}));
  cd->add_option("--out", chain_out, "Write the report to this file");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kConfigError;
  }

  try {
    if (run->parsed() || sweep->parsed()) {
      Scenario s = apply_overrides(load_scenario(scenario_path), seed, trials);
      if (sweep->parsed()) {
        for (const auto& g : grid) {
          auto axis = parse_grid_flag(g);
          auto it = std::find_if(s.sweep.begin(), s.sweep.end(), [&](const auto& a) { return a.first == axis.first; });
          if (it != s.sweep.end()) it->second = std::move(axis.second);
          else s.sweep.push_back(std::move(axis));
        }
        if (s.sweep.empty()) throw ConfigError("sweep needs a nonempty grid ([sweep] block or --grid)");
      }
      return emit(run_scenario(s, of.threads), of, out);
    }
    if (vb->parsed()) {
      const auto rows = verify_bounds(d_max, m_max);
      write_text(bounds_out, bounds_table(rows, bounds_format), out);
      return std::all_of(rows.begin(), rows.end(), [](const auto& r) { return r.pass; }) ? kOk : kBoundViolation;
    }
    if (cd->parsed()) {
      chaining::ChainConfig cfg;
      cfg.d0 = d0;
      cfg.depth = depth;
      cfg.interval = interval;
      cfg.sizing = sizing == "compact" ? chaining::LevelSizing::Compact : chaining::LevelSizing::Secure;
      cfg.seed = static_cast<std::uint64_t>(chain_seed);
      const auto chain = chaining::chain_commit(bit, cfg, {tamper == 0 ? -1 : tamper});
      Rng nature = make_rng(cfg.seed, "unveil");
      const auto v = chaining::unveil_chain(chain, nature);
      std::string text;
      if (chain_format == "json") {
        nlohmann::json verdict{{"bit", v.bit},
                               {"all_pass", v.all_pass},
                               {"decision_point", spacetime::to_string(v.decision_point)}};
        verdict["failing_level"] = v.failing_level ? nlohmann::json(*v.failing_level) : nlohmann::json();
        nlohmann::json levels = nlohmann::json::array();
        for (auto l : v.levels) levels.push_back(std::string(protocol::to_string(l)));
        verdict["levels"] = std::move(levels);
        text = nlohmann::json{{"chain", chain.to_json()}, {"verdict", std::move(verdict)}}.dump(2) + "\n";
      } else {
        text = chain_report(chain, v);
      }
      write_text(chain_out, text, out);
      return kOk;
    }
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << "\n";
    return kConfigError;
  } catch (const CausalityViolation& e) {
    err << "causality violation: " << e.what() << "\n";
    return kCausalityViolation;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << "\n";
    return kInternalError;
  }
  return kInternalError;
}

}  // namespace flyq::cli
