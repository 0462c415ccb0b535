#include <cmath>
#include <set>

#include "config.hpp"
#include "surfdyn/error.hpp"
#include "surfdyn/maps.hpp"

namespace surfdyn::cli {

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& what) {
  throw Error(ErrorCode::ConfigError, path + ": " + what);
}

}  // namespace

Node::Node(const json& j, std::string path) : path_(std::move(path)) {
  if (j.is_null()) {
    src_ = json::object();
  } else if (!j.is_object()) {
    fail(path_, "expected a table");
  } else {
    src_ = j;
  }
  echo_ = json::object();
}

std::string Node::field(const std::string& key) const {
  return path_.empty() ? key : path_ + "." + key;
}

const json* Node::find(const std::string& key) {
  seen_.insert(key);
  const auto it = src_.find(key);
  if (it == src_.end() || it->is_null()) return nullptr;
  return &*it;
}

double Node::number(const std::string& key, double def) {
  const json* v = find(key);
  double out = def;
  if (v) {
    if (!v->is_number()) fail(field(key), "expected a number");
    out = v->get<double>();
    if (!std::isfinite(out)) fail(field(key), "must be finite");
  }
  echo_[key] = out;
  return out;
}

std::optional<double> Node::maybe_number(const std::string& key) {
  const json* v = find(key);
  if (!v) {
    echo_[key] = nullptr;
    return std::nullopt;
  }
  if (!v->is_number()) fail(field(key), "expected a number");
  const double out = v->get<double>();
  if (!std::isfinite(out)) fail(field(key), "must be finite");
  echo_[key] = out;
  return out;
}

long Node::integer(const std::string& key, long def) {
  const json* v = find(key);
  long out = def;
  if (v) {
    if (!v->is_number_integer()) fail(field(key), "expected an integer");
    out = v->get<long>();
  }
  echo_[key] = out;
  return out;
}

std::string Node::string(const std::string& key, const std::string& def) {
  const json* v = find(key);
  std::string out = def;
  if (v) {
    if (!v->is_string()) fail(field(key), "expected a string");
    out = v->get<std::string>();
  }
  echo_[key] = out;
  return out;
}

std::vector<double> Node::numbers(const json& v, const std::string& path) {
  if (!v.is_array()) fail(path, "expected an array of numbers");
  std::vector<double> out;
  for (const auto& x : v) {
    if (!x.is_number()) fail(path, "expected an array of numbers");
    out.push_back(x.get<double>());
    if (!std::isfinite(out.back())) fail(path, "entries must be finite");
  }
  return out;
}

Vec2 Node::point(const std::string& key, Vec2 def) {
  const json* v = find(key);
  Vec2 out = def;
  if (v) {
    const auto xs = numbers(*v, field(key));
    if (xs.size() != 2) fail(field(key), "expected [x, y]");
    out = {xs[0], xs[1]};
  }
  echo_[key] = json::array({out.x, out.y});
  return out;
}

Region Node::region(const std::string& key, const Region& def) {
  const json* v = find(key);
  Region out = def;
  if (v) {
    const auto xs = numbers(*v, field(key));
    if (xs.size() != 4) fail(field(key), "expected [xmin, xmax, ymin, ymax]");
    out = {xs[0], xs[1], xs[2], xs[3]};
  }
  if (!(out.xmax > out.xmin) || !(out.ymax > out.ymin)) fail(field(key), "empty region");
  echo_[key] = json::array({out.xmin, out.xmax, out.ymin, out.ymax});
  return out;
}

std::optional<std::vector<double>> Node::maybe_numbers(const std::string& key) {
  const json* v = find(key);
  if (!v) {
    echo_[key] = nullptr;
    return std::nullopt;
  }
  auto xs = numbers(*v, field(key));
  echo_[key] = xs;
  return xs;
}

std::optional<std::vector<Vec2>> Node::maybe_points(const std::string& key) {
  const json* v = find(key);
  if (!v) {
    echo_[key] = nullptr;
    return std::nullopt;
  }
  if (!v->is_array()) fail(field(key), "expected an array of [x, y] points");
  std::vector<Vec2> out;
  json e = json::array();
  for (std::size_t i = 0; i < v->size(); ++i) {
    const auto xs = numbers((*v)[i], field(key) + "[" + std::to_string(i) + "]");
    if (xs.size() != 2) fail(field(key) + "[" + std::to_string(i) + "]", "expected [x, y]");
    out.push_back({xs[0], xs[1]});
    e.push_back(json::array({xs[0], xs[1]}));
  }
  echo_[key] = e;
  return out;
}

bool Node::present(const std::string& key) const {
  const auto it = src_.find(key);
  return it != src_.end() && !it->is_null();
}

Node Node::child(const std::string& key) {
  seen_.insert(key);
  const auto it = src_.find(key);
  return Node(it == src_.end() ? json() : *it, field(key));
}

void Node::put(const std::string& key, Node& child) {
  child.finish();
  echo_[key] = child.echo();
}

void Node::finish() {
  for (const auto& [key, value] : src_.items()) {
    if (!seen_.count(key)) fail(field(key), "unknown key");
  }
}

void Node::positive(double v, const std::string& key) const {
  if (!(v > 0.0)) fail(field(key), "must be positive");
}

void Node::at_least(long v, long lo, const std::string& key) const {
  if (v < lo) fail(field(key), "must be at least " + std::to_string(lo));
}

void Node::one_of(const std::string& v, std::initializer_list<const char*> options,
                  const std::string& key) const {
  std::string all;
  for (const char* o : options) {
    if (v == o) return;
    all += all.empty() ? o : std::string(", ") + o;
  }
  fail(field(key), "must be one of " + all);
}

std::string block_name(const std::string& command) {
  std::string b = command;
  for (auto& c : b)
    if (c == '-') c = '_';
  return b;
}

namespace {

Vec2 default_seed(const std::string& family) {
  if (family == "henon") return {0.6, 0.2};
  if (family == "cat" || family == "standard") return {0.01, 0.01};
  return {0.1, 0.1};
}

void orbit_block(Node& parent, const std::string& family) {
  Node o = parent.child("orbit");
  o.point("seed", default_seed(family));
  o.at_least(o.integer("period", 1), 1, "period");
  parent.put("orbit", o);
}

void attractor_block(Node& parent, const std::string& family) {
  if (!parent.present("attractor")) {
    parent.child("attractor").finish();
    parent.null("attractor");
    return;
  }
  Node a = parent.child("attractor");
  a.point("seed", default_seed(family));
  a.at_least(a.integer("transient", 1000), 0, "transient");
  a.at_least(a.integer("count", 20000), 1, "count");
  parent.put("attractor", a);
}

void manifold_growth(Node& b) {
  b.positive(b.number("r0", 0.1), "r0");
  b.positive(b.number("h_max", 1e-3), "h_max");
  b.positive(b.number("alpha_max", 0.2), "alpha_max");
  b.at_least(b.integer("point_budget", 1000000), 2, "point_budget");
}

}  // namespace

json resolve_config(const std::string& command, const json& raw, std::optional<std::uint64_t> seed) {
  const auto cmds = subcommands();
  if (std::find(cmds.begin(), cmds.end(), command) == cmds.end()) {
    throw Error(ErrorCode::ConfigError, "command: unknown subcommand '" + command + "'");
  }
  Node top(raw, "");
  const long version = top.integer("schema_version", kSchemaVersion);
  if (version != kSchemaVersion) {
    throw Error(ErrorCode::ConfigError,
                "schema_version: unsupported version " + std::to_string(version));
  }
  {
    const long s = top.integer("seed", 0);
    if (s < 0) throw Error(ErrorCode::ConfigError, "seed: must be non-negative");
    if (seed) top.echo()["seed"] = *seed;
  }
  top.at_least(top.integer("threads", 0), 0, "threads");

  // map: family plus parameters, checked by the map factory
  Node m = top.child("map");
  const std::string family = m.string("family", "henon");
  MapSpec spec{family, {}};
  if (m.present("params")) {
    Node p = m.child("params");
    for (const auto& [key, value] : p.source().items()) spec.params[key] = p.number(key, 0.0);
    p.finish();
  } else {
    m.child("params").finish();
  }
  const SurfaceMap built = make_map(spec);
  json params = json::object();
  for (const auto& [key, value] : built.spec().params) params[key] = value;
  m.echo()["params"] = params;
  top.put("map", m);

  // threshold ladder 0 < lambda < lambda1 < lambda2 < lambda3 < 1
  Node t = top.child("thresholds");
  const double lam = t.number("lambda", 0.25);
  if (!(lam > 0.0 && lam < 1.0)) {
    throw Error(ErrorCode::ConfigError, "thresholds.lambda: must lie in (0, 1)");
  }
  const double l1 = t.number("lambda1", std::sqrt(lam));
  const double l2 = t.number("lambda2", std::pow(l1, 2.0 / 3.0));
  const double l3 = t.number("lambda3", std::pow(l1, 1.0 / 3.0));
  if (!(lam < l1 && l1 < l2 && l2 < l3 && l3 < 1.0)) {
    throw Error(ErrorCode::ConfigError,
                "thresholds: need 0 < lambda < lambda1 < lambda2 < lambda3 < 1");
  }
  const double g1 = t.number("gamma1", l1);
  const double g2 = t.number("gamma2", l2);
  if (!(g1 > 0.0 && g1 < g2 && g2 < 1.0)) {
    throw Error(ErrorCode::ConfigError, "thresholds: need 0 < gamma1 < gamma2 < 1");
  }
  top.put("thresholds", t);

  const bool torus = built.is_torus();
  const Region home = torus ? Region{0.0, 1.0, 0.0, 1.0} : Region{-2.0, 2.0, -2.0, 2.0};
  const std::string bname = block_name(command);
  Node b = top.child(bname);
  if (command == "periodic-scan") {
    b.region("region", home);
    b.at_least(b.integer("n_max", 1), 1, "n_max");
    b.at_least(b.integer("nx", 64), 1, "nx");
    b.at_least(b.integer("ny", 64), 1, "ny");
    b.at_least(b.integer("m1", 10), 1, "m1");
  } else if (command == "domination-certify") {
    b.region("region", home);
    b.at_least(b.integer("nx", 64), 1, "nx");
    b.at_least(b.integer("ny", 64), 1, "ny");
    b.at_least(b.integer("T", 20), 1, "T");
    const double a = b.number("a", 0.5);
    if (!(a > 0.0 && a <= 1.0)) throw Error(ErrorCode::ConfigError, b.field("a") + ": must lie in (0, 1]");
    b.at_least(b.integer("samples_per_box", 4), 1, "samples_per_box");
    attractor_block(b, family);
  } else if (command == "pliss") {
    const auto norms = b.maybe_numbers("norms");
    if (norms && norms->empty()) throw Error(ErrorCode::ConfigError, b.field("norms") + ": empty");
    Node o = b.child("orbit");
    o.point("seed", default_seed(family));
    o.at_least(o.integer("n", 200), 1, "n");
    o.at_least(o.integer("T", 20), 1, "T");
    o.one_of(o.string("bundle", "E"), {"E", "F"}, "bundle");
    b.put("orbit", o);
    b.maybe_number("A");
  } else if (command == "manifolds") {
    orbit_block(b, family);
    manifold_growth(b);
    b.positive(b.number("target_arclength", 3.0), "target_arclength");
    b.positive(b.number("tangency_tol", 1e-6), "tangency_tol");
    b.positive(b.number("approach_tol", 1e-9), "approach_tol");
    b.positive(b.number("anchor_exclusion", 1e-7), "anchor_exclusion");
    b.at_least(b.integer("orbit_iterates", 30), 1, "orbit_iterates");
  } else if (command == "forge-tangency") {
    orbit_block(b, family);
    b.positive(b.number("eps", 0.1), "eps");
    const auto x1 = b.maybe_number("x1");
    if (x1) b.positive(*x1, "x1");
    b.at_least(b.integer("c1_samples", 512), 2, "c1_samples");
  } else if (command == "distortion") {
    orbit_block(b, family);
    manifold_growth(b);
    b.positive(b.number("target_arclength", 2.0), "target_arclength");
    const double s0 = b.number("s0", 0.5), s1 = b.number("s1", 0.7);
    if (!(s1 > s0) || s0 < 0.0) throw Error(ErrorCode::ConfigError, b.field("s1") + ": need 0 <= s0 < s1");
    b.at_least(b.integer("n", 10), 1, "n");
    b.positive(b.number("decay_seed_length", 0.1), "decay_seed_length");
    b.at_least(b.integer("decay_n", 10), 1, "decay_n");
  } else if (command == "verdict") {
    b.maybe_points("samples");
    attractor_block(b, family);
    b.region("region", home);
    b.at_least(b.integer("random", 16), 1, "random");
    b.one_of(b.string("splitting", "finite"), {"finite", "exact"}, "splitting");
    b.at_least(b.integer("T", 20), 1, "T");
    b.at_least(b.integer("horizon", 50), 1, "horizon");
  }
  top.put(bname, b);
  // blocks of other subcommands are tolerated but must be tables
  for (const auto& c : cmds) {
    const std::string other = block_name(c);
    if (other == bname || !top.present(other)) continue;
    if (!top.source()[other].is_object()) {
      throw Error(ErrorCode::ConfigError, other + ": expected a table");
    }
    top.child(other);
  }
  top.finish();
  return top.echo();
}

}  // namespace surfdyn::cli
