#include "flyq/scenario.hpp"

#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include <toml.hpp>

#include "flyq/errors.hpp"

namespace flyq::cli {

namespace {

using spacetime::Event;

constexpr std::string_view kModes[] = {"ideal", "non-ideal", "redundant", "chained", "dual", "epsilon-table"};

class Errors {
 public:
  explicit Errors(std::string source) : source_(std::move(source)) {}

  void add(const toml::node* at, std::string_view field, std::string_view msg) {
    std::string line;
    if (at && at->source().begin.line > 0) line = ":" + std::to_string(at->source().begin.line);
    list_.push_back(source_ + line + ": " + std::string(field) + ": " + std::string(msg));
  }

  void raise_if_any() const {
    if (list_.empty()) return;
    std::string all = "invalid scenario";
    for (const auto& e : list_) all += "\n  " + e;
    throw ConfigError(all);
  }

 private:
  std::string source_;
  std::vector<std::string> list_;
};

/// Reads typed fields from one table and reports keys nobody asked for.
class Reader {
 public:
  Reader(const toml::table& t, std::string prefix, Errors& errors)
      : t_(t), prefix_(std::move(prefix)), errors_(errors) {}

  std::string field(std::string_view key) const {
    return prefix_.empty() ? std::string(key) : prefix_ + "." + std::string(key);
  }

  const toml::node* take(std::string_view key) {
    seen_.insert(std::string(key));
    return t_.get(key);
  }

  void read(std::string_view key, std::int64_t& out) {
    if (const auto* n = take(key)) {
      if (auto v = n->value_exact<std::int64_t>()) out = *v;
      else errors_.add(n, field(key), "expected an integer");
    }
  }

  void read(std::string_view key, int& out) {
    std::int64_t v = out;
    const auto* n = t_.get(key);
    read(key, v);
    if (v < INT32_MIN || v > INT32_MAX) errors_.add(n, field(key), "integer out of range");
    else out = static_cast<int>(v);
  }

  void read(std::string_view key, double& out) {
    if (const auto* n = take(key)) {
      if (auto v = n->value_exact<double>()) out = *v;
      else if (auto i = n->value_exact<std::int64_t>()) out = static_cast<double>(*i);
      else errors_.add(n, field(key), "expected a number");
    }
  }

  void read(std::string_view key, std::optional<double>& out) {
    if (t_.get(key)) {
      double v = 0.0;
      read(key, v);
      out = v;
    } else {
      seen_.insert(std::string(key));
    }
  }

  void read(std::string_view key, bool& out) {
    if (const auto* n = take(key)) {
      if (auto v = n->value_exact<bool>()) out = *v;
      else errors_.add(n, field(key), "expected true or false");
    }
  }

  void read(std::string_view key, std::string& out) {
    if (const auto* n = take(key)) {
      if (auto v = n->value_exact<std::string>()) out = *v;
      else errors_.add(n, field(key), "expected a string");
    }
  }

  void read_choice(std::string_view key, std::string& out, std::initializer_list<std::string_view> allowed) {
    const auto* n = t_.get(key);
    read(key, out);
    for (auto a : allowed) {
      if (out == a) return;
    }
    std::string msg = "must be one of";
    for (auto a : allowed) msg += " '" + std::string(a) + "'";
    errors_.add(n, field(key), msg);
  }

  void read(std::string_view key, Event& out) {
    if (const auto* n = take(key)) {
      if (auto e = event(n, field(key))) out = *e;
    }
  }

  void read(std::string_view key, std::vector<Event>& out) {
    const auto* n = take(key);
    if (!n) return;
    const auto* arr = n->as_array();
    if (!arr) {
      errors_.add(n, field(key), "expected an array of [t, x, y, z]");
      return;
    }
    out.clear();
    for (std::size_t i = 0; i < arr->size(); ++i) {
      if (auto e = event(arr->get(i), field(key) + "[" + std::to_string(i) + "]")) out.push_back(*e);
    }
  }

  void read(std::string_view key, std::vector<int>& out) {
    const auto* n = take(key);
    if (!n) return;
    const auto* arr = n->as_array();
    if (!arr) {
      errors_.add(n, field(key), "expected an array of integers");
      return;
    }
    out.clear();
    for (const auto& el : *arr) {
      if (auto v = el.value_exact<std::int64_t>(); v && *v >= INT32_MIN && *v <= INT32_MAX) {
        out.push_back(static_cast<int>(*v));
      } else {
        errors_.add(&el, field(key), "expected an array of integers");
      }
    }
  }

  void read(std::string_view key, std::vector<std::array<std::int64_t, 4>>& out) {
    const auto* n = take(key);
    if (!n) return;
    const auto* arr = n->as_array();
    if (!arr) {
      errors_.add(n, field(key), "expected an array of [nx, ny, nz, den]");
      return;
    }
    out.clear();
    for (std::size_t i = 0; i < arr->size(); ++i) {
      if (auto q = quad(arr->get(i))) out.push_back(*q);
      else errors_.add(arr->get(i), field(key) + "[" + std::to_string(i) + "]", "expected [nx, ny, nz, den]");
    }
  }

  std::optional<Reader> sub(std::string_view key) {
    const auto* n = take(key);
    if (!n) return std::nullopt;
    if (const auto* t = n->as_table()) return Reader(*t, field(key), errors_);
    errors_.add(n, field(key), "expected a table");
    return std::nullopt;
  }

  void finish() const {
    for (auto&& [k, v] : t_) {
      if (!seen_.count(std::string(k.str()))) errors_.add(&v, field(k.str()), "unknown field");
    }
  }

 private:
  static std::optional<std::array<std::int64_t, 4>> quad(const toml::node* n) {
    const auto* a = n ? n->as_array() : nullptr;
    if (!a || a->size() != 4) return std::nullopt;
    std::array<std::int64_t, 4> out{};
    for (std::size_t i = 0; i < 4; ++i) {
      auto v = a->get(i)->value_exact<std::int64_t>();
      if (!v) return std::nullopt;
      out[i] = *v;
    }
    return out;
  }

  std::optional<Event> event(const toml::node* n, const std::string& f) {
    auto q = quad(n);
    if (!q) {
      errors_.add(n, f, "expected [t, x, y, z] integers");
      return std::nullopt;
    }
    return Event{(*q)[0], (*q)[1], (*q)[2], (*q)[3]};
  }

  const toml::table& t_;
  std::string prefix_;
  Errors& errors_;
  std::set<std::string> seen_;
};

void read_leg(Reader& r, std::string_view key, LegBlock& leg) {
  if (auto s = r.sub(key)) {
    s->read("loss", leg.loss);
    s->read("depolarizing", leg.depolarizing);
    s->finish();
  }
}

Scenario from_table(const toml::table& root, Errors& errors) {
  Scenario s;
  Reader r(root, "", errors);
  r.read("name", s.name);
  std::string mode = std::string(to_string(s.mode));
  const auto* mode_node = root.get("mode");
  r.read("mode", mode);
  try {
    s.mode = parse_mode(mode);
  } catch (const ConfigError& e) {
    errors.add(mode_node, "mode", e.what());
  }
  r.read("trials", s.trials);
  if (s.trials < 0) errors.add(root.get("trials"), "trials", "must be nonnegative");
  r.read("seed", s.seed);

  if (auto g = r.sub("geometry")) {
    auto& G = s.geometry;
    g->read_choice("layout", G.layout, {"1d", "planar", "spherical"});
    g->read_choice("plane", G.plane, {"xy", "yz"});
    g->read_choice("transport", G.transport, {"secured", "teleport"});
    g->read("commit_point", G.commit_point);
    g->read("reach", G.reach);
    g->read("receipt_lag", G.receipt_lag);
    g->read("bob_lead", G.bob_lead);
    g->read("processing_delay", G.processing_delay);
    g->read("slack", G.slack);
    g->read("directions", G.directions);
    g->read("unveil_points", G.unveil_points);
    g->read("receipt_points", G.receipt_points);
    g->finish();
  }
  if (auto q = r.sub("quantum")) {
    q->read("d", s.quantum.d);
    q->read("m", s.quantum.m);
    q->finish();
  }
  if (auto a = r.sub("adversary")) {
    auto& A = s.adversary;
    a->read("strategy", A.strategy);
    a->read("value", A.value);
    a->read("p0", A.p0);
    a->read("asymmetry_a", A.asymmetry_a);
    a->read_choice("basis", A.basis, {"haar", "computational"});
    a->read("unveil_at", A.unveil_at);
    a->finish();
  }
  if (auto n = r.sub("noise")) {
    auto& N = s.noise;
    // Shorthand for loss and error on the committer's leg.
    double loss = 0.0, dep = 0.0;
    const bool shorthand = root["noise"]["loss"] || root["noise"]["depolarizing"];
    n->read("loss", loss);
    n->read("depolarizing", dep);
    read_leg(*n, "bob_to_p", N.bob_to_p);
    read_leg(*n, "p_to_q", N.p_to_q);
    read_leg(*n, "q_to_receipt", N.q_to_receipt);
    n->read("detector_efficiency", N.detector_efficiency);
    if (shorthand) {
      if (root["noise"]["p_to_q"]) {
        errors.add(root["noise"]["p_to_q"].node(), "noise.p_to_q", "conflicts with noise.loss / noise.depolarizing");
      }
      N.p_to_q = {loss, dep};
    }
    n->finish();
  }
  if (auto red = r.sub("redundancy")) {
    red->read("copies", s.redundancy.copies);
    red->read("threshold", s.redundancy.threshold);
    red->finish();
  }
  if (auto c = r.sub("chain")) {
    c->read("depth", s.chain.depth);
    c->read_choice("sizing", s.chain.sizing, {"secure", "compact"});
    c->read("interval", s.chain.interval);
    c->read("bit", s.chain.bit);
    c->read("tamper", s.chain.tamper);
    c->finish();
  }
  if (auto d = r.sub("dual")) {
    d->read_choice("strategy", s.dual.strategy, {"honest", "temporary-cheat"});
    d->read("bit", s.dual.bit);
    d->read("point", s.dual.point);
    d->read("claim", s.dual.claim);
    d->read("return_opposite", s.dual.return_opposite);
    d->finish();
  }
  if (const auto* sw = r.take("sweep")) {
    if (const auto* t = sw->as_table()) {
      for (auto&& [k, v] : *t) {
        const std::string path(k.str());
        const auto* arr = v.as_array();
        if (!arr || arr->empty()) {
          errors.add(&v, "sweep." + path, "expected a nonempty array");
          continue;
        }
        if (path.rfind("sweep", 0) == 0) {
          errors.add(&v, "sweep." + path, "cannot sweep the sweep block");
          continue;
        }
        std::vector<GridValue> values;
        for (const auto& el : *arr) {
          if (auto i = el.value_exact<std::int64_t>()) values.emplace_back(*i);
          else if (auto f = el.value_exact<double>()) values.emplace_back(*f);
          else if (auto b = el.value_exact<bool>()) values.emplace_back(*b);
          else if (auto str = el.value_exact<std::string>()) values.emplace_back(*str);
          else errors.add(&el, "sweep." + path, "grid values must be scalars");
        }
        s.sweep.emplace_back(path, std::move(values));
      }
    } else {
      errors.add(sw, "sweep", "expected a table");
    }
  }
  r.finish();
  return s;
}

toml::array event_array(const Event& e) { return toml::array{e.t, e.x, e.y, e.z}; }

toml::node_view<toml::node> insert_value(toml::table& t, std::string_view key, const GridValue& v) {
  std::visit([&](const auto& x) { t.insert_or_assign(key, x); }, v);
  return t[key];
}

toml::table to_table(const Scenario& s) {
  toml::table root;
  root.insert_or_assign("name", s.name);
  root.insert_or_assign("mode", std::string(to_string(s.mode)));
  root.insert_or_assign("trials", s.trials);
  root.insert_or_assign("seed", s.seed);

  const auto& G = s.geometry;
  toml::table g{{"layout", G.layout},
                {"plane", G.plane},
                {"transport", G.transport},
                {"commit_point", event_array(G.commit_point)},
                {"reach", G.reach},
                {"receipt_lag", G.receipt_lag},
                {"bob_lead", G.bob_lead},
                {"processing_delay", G.processing_delay},
                {"slack", G.slack}};
  if (!G.directions.empty()) {
    toml::array dirs;
    for (const auto& q : G.directions) dirs.push_back(toml::array{q[0], q[1], q[2], q[3]});
    g.insert_or_assign("directions", std::move(dirs));
  }
  auto events = [](const std::vector<Event>& es) {
    toml::array a;
    for (const auto& e : es) a.push_back(event_array(e));
    return a;
  };
  if (!G.unveil_points.empty()) g.insert_or_assign("unveil_points", events(G.unveil_points));
  if (!G.receipt_points.empty()) g.insert_or_assign("receipt_points", events(G.receipt_points));
  root.insert_or_assign("geometry", std::move(g));

  root.insert_or_assign("quantum", toml::table{{"d", s.quantum.d}, {"m", s.quantum.m}});

  const auto& A = s.adversary;
  toml::table a{{"strategy", A.strategy}, {"value", A.value}, {"p0", A.p0}, {"basis", A.basis}};
  if (A.asymmetry_a) a.insert_or_assign("asymmetry_a", *A.asymmetry_a);
  if (!A.unveil_at.empty()) {
    toml::array u;
    for (int i : A.unveil_at) u.push_back(i);
    a.insert_or_assign("unveil_at", std::move(u));
  }
  root.insert_or_assign("adversary", std::move(a));

  auto leg = [](const LegBlock& l) { return toml::table{{"loss", l.loss}, {"depolarizing", l.depolarizing}}; };
  root.insert_or_assign("noise", toml::table{{"bob_to_p", leg(s.noise.bob_to_p)},
                                             {"p_to_q", leg(s.noise.p_to_q)},
                                             {"q_to_receipt", leg(s.noise.q_to_receipt)},
                                             {"detector_efficiency", s.noise.detector_efficiency}});
  root.insert_or_assign("redundancy",
                        toml::table{{"copies", s.redundancy.copies}, {"threshold", s.redundancy.threshold}});
  root.insert_or_assign("chain", toml::table{{"depth", s.chain.depth},
                                             {"sizing", s.chain.sizing},
                                             {"interval", s.chain.interval},
                                             {"bit", s.chain.bit},
                                             {"tamper", s.chain.tamper}});
  root.insert_or_assign("dual", toml::table{{"strategy", s.dual.strategy},
                                            {"bit", s.dual.bit},
                                            {"point", s.dual.point},
                                            {"claim", s.dual.claim},
                                            {"return_opposite", s.dual.return_opposite}});
  if (!s.sweep.empty()) {
    toml::table sw;
    for (const auto& [path, values] : s.sweep) {
      toml::array arr;
      for (const auto& v : values) std::visit([&](const auto& x) { arr.push_back(x); }, v);
      sw.insert_or_assign(path, std::move(arr));
    }
    root.insert_or_assign("sweep", std::move(sw));
  }
  return root;
}

}  // namespace

std::string_view to_string(Mode m) { return kModes[static_cast<int>(m)]; }

Mode parse_mode(std::string_view s) {
  for (std::size_t i = 0; i < std::size(kModes); ++i) {
    if (kModes[i] == s) return static_cast<Mode>(i);
  }
  std::string msg = "unknown mode '" + std::string(s) + "'; expected one of";
  for (auto k : kModes) msg += " '" + std::string(k) + "'";
  throw ConfigError(msg);
}

std::string to_string(const GridValue& v) {
  return std::visit(
      [](const auto& x) -> std::string {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, std::string>) {
          return x;
        } else if constexpr (std::is_same_v<T, bool>) {
          return x ? "true" : "false";
        } else if constexpr (std::is_same_v<T, double>) {
          char buf[32];
          std::snprintf(buf, sizeof buf, "%.10g", x);
          return buf;
        } else {
          return std::to_string(x);
        }
      },
      v);
}

bool Scenario::Noise::is_none() const {
  const LegBlock zero{};
  return bob_to_p == zero && p_to_q == zero && q_to_receipt == zero && detector_efficiency == 1.0;
}

Scenario parse_scenario(std::string_view text, std::string_view source) {
  toml::table root;
  try {
    root = toml::parse(text, source);
  } catch (const toml::parse_error& e) {
    throw ConfigError(std::string(source) + ":" + std::to_string(e.source().begin.line) + ": " +
                      std::string(e.description()));
  }
  Errors errors{std::string(source)};
  Scenario s = from_table(root, errors);
  errors.raise_if_any();
  return s;
}

Scenario load_scenario(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open scenario file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_scenario(ss.str(), path);
}

std::string to_toml(const Scenario& s) {
  std::ostringstream os;
  os << to_table(s) << '\n';
  return os.str();
}

Scenario with_field(const Scenario& s, std::string_view path, const GridValue& value) {
  if (path.empty() || path.rfind("sweep", 0) == 0) {
    throw ConfigError("cannot set field '" + std::string(path) + "'");
  }
  toml::table root = to_table(s);
  toml::table* t = &root;
  std::string_view rest = path;
  for (auto dot = rest.find('.'); dot != std::string_view::npos; dot = rest.find('.')) {
    const auto part = rest.substr(0, dot);
    auto* next = t->get_as<toml::table>(part);
    if (!next) throw ConfigError("unknown field '" + std::string(path) + "'");
    t = next;
    rest = rest.substr(dot + 1);
  }
  if (!t->contains(rest) && !(path == "adversary.asymmetry_a")) {
    throw ConfigError("unknown field '" + std::string(path) + "'");
  }
  insert_value(*t, rest, value);
  Errors errors{"<grid>"};
  Scenario out = from_table(root, errors);
  errors.raise_if_any();
  return out;
}

std::vector<GridPoint> expand_grid(const Scenario& s) {
  Scenario base = s;
  base.sweep.clear();
  std::vector<GridPoint> points{{base, {}}};
  for (const auto& [path, values] : s.sweep) {
    std::vector<GridPoint> next;
    for (const auto& p : points) {
      for (const auto& v : values) {
        GridPoint q{with_field(p.scenario, path, v), p.assignments};
        q.assignments.emplace_back(path, to_string(v));
        next.push_back(std::move(q));
      }
    }
    points = std::move(next);
  }
  return points;
}

}  // namespace flyq::cli
