#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <sstream>

#include "config.hpp"
#include "surfdyn/cli.hpp"
#include "surfdyn/domination.hpp"
#include "surfdyn/forge.hpp"
#include "surfdyn/manifolds.hpp"
#include "surfdyn/parallel.hpp"
#include "surfdyn/periodic.hpp"
#include "surfdyn/pliss.hpp"

namespace surfdyn::cli {

namespace fs = std::filesystem;

std::vector<std::string> subcommands() {
  return {"periodic-scan", "domination-certify", "pliss", "manifolds",
          "forge-tangency", "distortion", "verdict"};
}

json number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return v;
}

namespace {

json vec(Vec2 v) { return json::array({number(v.x), number(v.y)}); }

json numbers(const std::vector<double>& xs) {
  json out = json::array();
  for (double x : xs) out.push_back(number(x));
  return out;
}

std::string fmt(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string quoted(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

// CSV file with a fixed header; rows are written as they come.
class Csv {
 public:
  Csv(const fs::path& path, const std::string& header) : path_(path), out_(path) {
    if (!out_) throw Error(ErrorCode::IoError, "cannot write " + path.string());
    out_ << header << '\n';
  }
  template <class... T>
  void row(const T&... cells) {
    bool first = true;
    ((out_ << (first ? "" : ",") << cell(cells), first = false), ...);
    out_ << '\n';
  }
  ~Csv() = default;
  void close() {
    out_.close();
    if (!out_) throw Error(ErrorCode::IoError, "failed writing " + path_.string());
  }

 private:
  static std::string cell(double v) { return fmt(v); }
  static std::string cell(int v) { return std::to_string(v); }
  static std::string cell(long v) { return std::to_string(v); }
  static std::string cell(std::size_t v) { return std::to_string(v); }
  static std::string cell(bool v) { return v ? "1" : "0"; }
  static std::string cell(const std::string& v) { return quoted(v); }
  static std::string cell(std::string_view v) { return quoted(std::string(v)); }
  static std::string cell(const char* v) { return quoted(v); }

  fs::path path_;
  std::ofstream out_;
};

struct Context {
  const json& cfg;
  const json& block;
  SurfaceMap map;
  fs::path out;
  unsigned threads;
  std::uint64_t seed;
  double gamma1, gamma2;
};

json complex_pair(std::complex<double> z) { return json::array({number(z.real()), number(z.imag())}); }

json orbit_json(const PeriodicOrbit& o) {
  json pts = json::array();
  for (const auto& p : o.points) pts.push_back(vec(p));
  return {{"period", o.period},
          {"points", pts},
          {"classification", std::string(to_string(o.classification))},
          {"lambda", complex_pair(o.lambda)},
          {"sigma", complex_pair(o.sigma)},
          {"angles", numbers(o.angles)},
          {"residual", number(o.residual)},
          {"newton_steps", o.newton_steps}};
}

PeriodicOrbit block_orbit(const Context& c) {
  const auto& o = c.block.at("orbit");
  const Vec2 seed{o.at("seed")[0].get<double>(), o.at("seed")[1].get<double>()};
  return classify_and_split(c.map, find_periodic(c.map, seed, o.at("period").get<int>()));
}

Vec2 point_of(const json& j) { return {j[0].get<double>(), j[1].get<double>()}; }

Region region_of(const json& j) {
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>(), j[3].get<double>()};
}

std::vector<Vec2> attractor_of(const Context& c, const json& a) {
  return attractor_orbit(c.map, point_of(a.at("seed")), a.at("transient").get<long>(),
                         a.at("count").get<long>());
}

void polyline_csv(const Context& c, const Polyline& p, const std::string& name) {
  Csv f(c.out / name, "x,y,arclength,tangent_x,tangent_y");
  for (std::size_t i = 0; i < p.size(); ++i) {
    const Vec2 x = c.map.reduce(p.points[i]);
    f.row(x.x, x.y, p.arclength[i], p.tangents[i].x(), p.tangents[i].y());
  }
  f.close();
}

// Each command fills result and returns the status string.
std::string periodic_scan(const Context& c, json& result) {
  const auto& b = c.block;
  ScanOptions so;
  so.region = region_of(b.at("region"));
  so.n_max = b.at("n_max").get<int>();
  so.nx = b.at("nx").get<int>();
  so.ny = b.at("ny").get<int>();
  so.threads = c.threads;
  const auto orbits = scan_periodic(c.map, so);
  std::vector<PeriodicOrbit> saddles;
  for (const auto& o : orbits)
    if (o.classification == OrbitClass::saddle) saddles.push_back(o);
  const auto dom = domination_scan(c.map, saddles, b.at("m1").get<int>());
  json list = json::array();
  Csv f(c.out / "orbits.csv",
        "orbit,period,index,x,y,classification,lambda_re,lambda_im,sigma_re,sigma_im,domination_m");
  std::size_t si = 0;
  for (std::size_t k = 0; k < orbits.size(); ++k) {
    const auto& o = orbits[k];
    json j = orbit_json(o);
    std::optional<int> m;
    if (o.classification == OrbitClass::saddle) m = dom[si++].m;
    j["domination_m"] = m ? json(*m) : json(nullptr);
    list.push_back(j);
    for (std::size_t i = 0; i < o.points.size(); ++i) {
      f.row(k, o.period, i, o.points[i].x, o.points[i].y, to_string(o.classification),
            o.lambda.real(), o.lambda.imag(), o.sigma.real(), o.sigma.imag(),
            m ? std::to_string(*m) : std::string());
    }
  }
  f.close();
  result = {{"orbits", list}, {"count", orbits.size()}, {"saddles", saddles.size()}};
  return "ok";
}

std::string domination_certify(const Context& c, json& result) {
  const auto& b = c.block;
  CertifyOptions o;
  o.region = region_of(b.at("region"));
  o.nx = b.at("nx").get<int>();
  o.ny = b.at("ny").get<int>();
  o.T = b.at("T").get<int>();
  o.a = b.at("a").get<double>();
  o.samples_per_box = b.at("samples_per_box").get<int>();
  o.threads = c.threads;
  if (!b.at("attractor").is_null()) o.attractor = attractor_of(c, b.at("attractor"));
  const auto cert = certify_cones(c.map, o);
  Csv f(c.out / "boxes.csv", "id,xmin,xmax,ymin,ymax,e_x,e_y,f_x,f_y,lambda,padding,pass,note");
  long passed = 0;
  for (const auto& box : cert.boxes) {
    passed += box.pass;
    const Vec2 e = box.splitting ? box.splitting->e().vec() : Vec2{NAN, NAN};
    const Vec2 fv = box.splitting ? box.splitting->f().vec() : Vec2{NAN, NAN};
    f.row(box.id, box.box.xmin, box.box.xmax, box.box.ymin, box.box.ymax, e.x, e.y, fv.x, fv.y,
          box.lambda, box.padding, box.pass, box.note);
  }
  f.close();
  result = {{"pass", cert.pass},
            {"lambda_worst", number(cert.lambda_worst)},
            {"padding_worst", number(cert.padding_worst)},
            {"fail_box", cert.fail_box ? json(*cert.fail_box) : json(nullptr)},
            {"witness", vec(cert.witness)},
            {"nx", cert.nx},
            {"ny", cert.ny},
            {"a", cert.a},
            {"T", cert.T},
            {"samples", cert.samples},
            {"active_boxes", cert.boxes.size()},
            {"passed_boxes", passed}};
  return cert.pass ? "pass" : "fail";
}

std::string pliss(const Context& c, json& result) {
  const auto& b = c.block;
  std::vector<double> a;
  std::string source = "norms";
  if (!b.at("norms").is_null()) {
    a = b.at("norms").get<std::vector<double>>();
  } else {
    source = "orbit";
    const auto& o = b.at("orbit");
    const auto bundles = orbit_bundles(c.map, point_of(o.at("seed")),
                                       SplittingSource::finite(o.at("T").get<int>()),
                                       o.at("n").get<int>());
    a = o.at("bundle").get<std::string>() == "E" ? bundles.e_norms : bundles.f_inv_norms;
  }
  std::optional<double> A;
  if (!b.at("A").is_null()) A = b.at("A").get<double>();
  const auto rep = pliss_times(a, c.gamma1, c.gamma2, A);
  Csv f(c.out / "times.csv", "index,norm,cumulative_product,is_pliss_time");
  double prod = 1.0;
  std::size_t t = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    prod *= a[i];
    const bool is_time = t < rep.times.size() && rep.times[t] == static_cast<long>(i);
    if (is_time) ++t;
    f.row(i, a[i], prod, is_time);
  }
  f.close();
  result = {{"source", source},      {"gamma1", rep.gamma1},   {"gamma2", rep.gamma2},
            {"A", number(rep.A)},    {"c", number(rep.c)},     {"N", rep.N},
            {"n", rep.n},            {"times", rep.times},     {"count", rep.times.size()},
            {"hypothesis", rep.hypothesis}, {"density_holds", rep.density_holds}};
  return "ok";
}

GrowOptions grow_options(const json& b) {
  GrowOptions g;
  g.target_arclength = b.at("target_arclength").get<double>();
  g.h_max = b.at("h_max").get<double>();
  g.alpha_max = b.at("alpha_max").get<double>();
  g.point_budget = b.at("point_budget").get<std::size_t>();
  return g;
}

json polyline_summary(const Polyline& p) {
  return {{"label", std::string(to_string(p.label))},
          {"vertices", p.size()},
          {"length", number(p.length())},
          {"r0", number(p.r0)},
          {"direction", vec(p.direction)}};
}

std::string manifolds(const Context& c, json& result) {
  const auto& b = c.block;
  const auto orbit = block_orbit(c);
  const GrowOptions g = grow_options(b);
  const double r0 = b.at("r0").get<double>();
  std::vector<Polyline> w(2);
  parallel_for(
      2,
      [&](std::size_t i) {
        const Branch br = i == 0 ? Branch::unstable : Branch::stable;
        w[i] = grow(c.map, local_seed(c.map, orbit, br, r0, g.h_max), g);
      },
      c.threads);
  IntersectOptions io;
  io.tangency_tol = b.at("tangency_tol").get<double>();
  io.approach_tol = b.at("approach_tol").get<double>();
  io.anchor_exclusion = b.at("anchor_exclusion").get<double>();
  const auto res = intersections(w[0], w[1], io);
  const int iters = b.at("orbit_iterates").get<int>();

  json events = json::array();
  long transversal = 0;
  Csv f(c.out / "events.csv",
        "x,y,s_u,s_s,angle,tangency_residual,kind,forward_min_distance,backward_min_distance");
  for (const auto& e : res.events) {
    transversal += e.kind == EventKind::transversal;
    const auto fw = orbit_distances(c.map, e.point, orbit.points, iters, true);
    const auto bw = orbit_distances(c.map, e.point, orbit.points, iters, false);
    const double fmin = *std::min_element(fw.begin(), fw.end());
    const double bmin = *std::min_element(bw.begin(), bw.end());
    events.push_back({{"point", vec(e.point)},
                      {"s_u", number(e.s_u)},
                      {"s_s", number(e.s_s)},
                      {"angle", number(e.angle)},
                      {"tangency_residual", number(e.tangency_residual)},
                      {"kind", std::string(to_string(e.kind))},
                      {"forward_min_distance", number(fmin)},
                      {"backward_min_distance", number(bmin)}});
    f.row(e.point.x, e.point.y, e.s_u, e.s_s, e.angle, e.tangency_residual, to_string(e.kind), fmin,
          bmin);
  }
  f.close();
  polyline_csv(c, w[0], "wu.csv");
  polyline_csv(c, w[1], "ws.csv");
  result = {{"orbit", orbit_json(orbit)},
            {"wu", polyline_summary(w[0])},
            {"ws", polyline_summary(w[1])},
            {"overlap", res.overlap},
            {"events", events},
            {"transversal_count", transversal},
            {"tangency_candidates", static_cast<long>(res.events.size()) - transversal},
            {"invariance_defect_u", number(invariance_defect(c.map, w[0]))},
            {"invariance_defect_s", number(invariance_defect(c.map, w[1]))}};
  return "ok";
}

std::string forge(const Context& c, json& result) {
  const auto& b = c.block;
  const auto orbit = block_orbit(c);
  ForgeOptions o;
  o.eps = b.at("eps").get<double>();
  if (!b.at("x1").is_null()) o.x1 = b.at("x1").get<double>();
  o.c1_samples = b.at("c1_samples").get<int>();
  const auto r = forge_tangency(c.map, orbit, o);
  const auto& g = r.geometry;
  Csv f(c.out / "forge_curve.csv", "xi,eta");
  for (const auto& p : r.curve) f.row(p.x, p.y);
  f.close();
  result = {{"orbit", orbit_json(orbit)},
            {"eps", r.eps},
            {"geometry",
             {{"x1", number(g.x1)},
              {"x0", number(g.x0)},
              {"a", number(g.a)},
              {"t0", number(g.t0)},
              {"gamma", number(g.gamma)},
              {"threshold", number(g.threshold)},
              {"a_eps", number(g.a_eps)},
              {"gamma_x0", number(g.gamma_x0)},
              {"reaches_stable", g.reaches_stable},
              {"lambda", number(g.lambda)},
              {"sigma", number(g.sigma)},
              {"doubled", g.doubled},
              {"manifold_deviation", number(g.manifold_deviation)}}},
            {"tangency_point", vec(r.tangency_point)},
            {"tangency_chart", vec(r.tangency_chart)},
            {"tangency_residual", number(r.tangency_residual)},
            {"tangency_gap", number(r.tangency_gap)},
            {"c1_distance", number(r.c1_distance)},
            {"c1_distance_raw", number(r.c1_distance_raw)},
            {"p_fixed", r.p_fixed},
            {"derivative_unchanged", r.derivative_unchanged},
            {"support",
             json::array({number(r.support.xmin), number(r.support.xmax), number(r.support.ymin),
                          number(r.support.ymax)})}};
  return "ok";
}

std::string distortion(const Context& c, json& result) {
  const auto& b = c.block;
  const auto orbit = block_orbit(c);
  const GrowOptions g = grow_options(b);
  const auto wu =
      grow(c.map, local_seed(c.map, orbit, Branch::unstable, b.at("r0").get<double>(), g.h_max), g);
  const auto J = slice(wu, b.at("s0").get<double>(), b.at("s1").get<double>());
  const auto d = distortion_check(c.map, J, b.at("n").get<int>());
  const auto s = stable_decay_check(c.map, orbit, b.at("decay_seed_length").get<double>(),
                                    b.at("decay_n").get<int>());
  Csv fd(c.out / "distortion.csv", "i,length");
  for (std::size_t i = 0; i < d.lengths.size(); ++i) fd.row(i, d.lengths[i]);
  fd.close();
  Csv fs(c.out / "decay.csv", "k,length");
  for (std::size_t k = 0; k < s.lengths.size(); ++k) fs.row(k, s.lengths[k]);
  fs.close();
  result = {{"orbit", orbit_json(orbit)},
            {"segment", {{"vertices", J.size()}, {"length", number(J.length())}}},
            {"distortion",
             {{"n", d.n},
              {"K0", number(d.K0)},
              {"lengths", numbers(d.lengths)},
              {"lhs_ratio", number(d.lhs_ratio)},
              {"rhs_ratio", number(d.rhs_ratio)},
              {"lhs_norm", number(d.lhs_norm)},
              {"rhs_norm", number(d.rhs_norm)},
              {"ratio_holds", d.ratio_holds},
              {"norm_holds", d.norm_holds}}},
            {"stable_decay",
             {{"lengths", numbers(s.lengths)},
              {"rate", number(s.rate)},
              {"bound", number(s.bound)},
              {"c", number(s.c)},
              {"within_bound", s.within_bound}}}};
  return d.ratio_holds && d.norm_holds && s.within_bound ? "pass" : "fail";
}

std::string verdict(const Context& c, json& result) {
  const auto& b = c.block;
  std::vector<Vec2> samples;
  std::string source;
  if (!b.at("samples").is_null()) {
    source = "samples";
    for (const auto& p : b.at("samples")) samples.push_back(point_of(p));
  } else if (!b.at("attractor").is_null()) {
    source = "attractor";
    samples = attractor_of(c, b.at("attractor"));
  } else {
    source = "random";
    const Region r = region_of(b.at("region"));
    std::mt19937_64 rng(c.seed);
    // 53-bit uniforms straight from the engine, identical on every platform
    auto u = [&]() { return static_cast<double>(rng() >> 11) * 0x1.0p-53; };
    for (long i = 0; i < b.at("random").get<long>(); ++i) {
      const double x = r.xmin + u() * r.width();
      samples.push_back({x, r.ymin + u() * r.height()});
    }
  }
  const auto src = b.at("splitting").get<std::string>() == "exact"
                       ? SplittingSource::exact()
                       : SplittingSource::finite(b.at("T").get<int>());
  const auto v = hyperbolicity_verdict(c.map, samples, src, b.at("horizon").get<int>(), c.gamma1,
                                       c.gamma2);
  json pts = json::array();
  Csv f(c.out / "verdict.csv", "x,y,verdict,e_rate,f_rate,e_pliss_times,f_pliss_times,note");
  for (const auto& p : v.points) {
    const long et = p.e_pliss ? static_cast<long>(p.e_pliss->times.size()) : -1;
    const long ft = p.f_pliss ? static_cast<long>(p.f_pliss->times.size()) : -1;
    pts.push_back({{"point", vec(p.point)},
                   {"verdict", std::string(to_string(p.verdict))},
                   {"e_rate", number(p.e_rate)},
                   {"f_rate", number(p.f_rate)},
                   {"e_pliss_times", p.e_pliss ? json(et) : json(nullptr)},
                   {"f_pliss_times", p.f_pliss ? json(ft) : json(nullptr)},
                   {"note", p.note}});
    f.row(p.point.x, p.point.y, to_string(p.verdict), p.e_rate, p.f_rate, et, ft, p.note);
  }
  f.close();
  result = {{"verdict", std::string(to_string(v.verdict))}, {"source", source}, {"points", pts}};
  return std::string(to_string(v.verdict));
}

json error_json(ErrorCode code, const std::string& message, std::optional<long> index) {
  return {{"code", std::string(to_string(code))},
          {"message", message},
          {"index", index ? json(*index) : json(nullptr)}};
}

void write_report(const fs::path& out, const json& report) {
  std::ofstream f(out / "report.json");
  f << report.dump(2) << '\n';
  f.close();
  if (!f) throw Error(ErrorCode::IoError, "cannot write " + (out / "report.json").string());
}

Outcome finish(const std::string& command, const json& config, const fs::path& out,
               const std::function<std::string(json&)>& body) {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome o;
  json result = nullptr;
  json error = nullptr;
  std::string status = "error";
  try {
    status = body(result);
  } catch (const Error& e) {
    error = error_json(e.code(), e.what(), e.index());
    result = nullptr;
  } catch (const std::exception& e) {
    error = {{"code", "InternalError"}, {"message", e.what()}, {"index", nullptr}};
    result = nullptr;
  }
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  o.report = {{"command", command},  {"schema_version", kSchemaVersion},
              {"version", kVersion}, {"config", config},
              {"result", result},    {"status", status},
              {"error", error},      {"wall_time_s", wall}};
  if (!error.is_null()) {
    o.exit_code = 1;
  } else if (status == "fail" || status == "contradicted") {
    o.exit_code = 2;
  }
  write_report(out, o.report);
  return o;
}

}  // namespace

Outcome run(const std::string& command, const json& raw, const fs::path& out_dir,
            std::optional<std::uint64_t> seed) {
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw Error(ErrorCode::IoError, "cannot create " + out_dir.string() + ": " + ec.message());

  json config;
  try {
    config = resolve_config(command, raw, seed);
  } catch (const Error& e) {
    return finish(command, raw, out_dir, [&](json&) -> std::string { throw e; });
  }
  return finish(command, config, out_dir, [&](json& result) {
    const json& thr = config.at("thresholds");
    const json& m = config.at("map");
    MapSpec spec{m.at("family").get<std::string>(), {}};
    for (const auto& [k, v] : m.at("params").items()) spec.params[k] = v.get<double>();
    Context c{config,
              config.at(block_name(command)),
              make_map(spec),
              out_dir,
              config.at("threads").get<unsigned>(),
              config.at("seed").get<std::uint64_t>(),
              thr.at("gamma1").get<double>(),
              thr.at("gamma2").get<double>()};
    if (command == "periodic-scan") return periodic_scan(c, result);
    if (command == "domination-certify") return domination_certify(c, result);
    if (command == "pliss") return pliss(c, result);
    if (command == "manifolds") return manifolds(c, result);
    if (command == "forge-tangency") return forge(c, result);
    if (command == "distortion") return distortion(c, result);
    return verdict(c, result);
  });
}

Outcome run_file(const std::string& command, const fs::path& config, const fs::path& out_dir,
                 std::optional<std::uint64_t> seed) {
  json raw;
  std::string problem;
  std::ifstream f(config);
  if (!f) {
    problem = "cannot read config " + config.string();
  } else {
    try {
      raw = json::parse(f);
    } catch (const json::parse_error& e) {
      problem = std::string("config is not valid JSON: ") + e.what();
    }
  }
  if (!problem.empty()) {
    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (ec) throw Error(ErrorCode::IoError, "cannot create " + out_dir.string());
    const ErrorCode code = raw.is_null() && problem.rfind("cannot", 0) == 0 ? ErrorCode::IoError
                                                                            : ErrorCode::ConfigError;
    return finish(command, nullptr, out_dir, [&](json&) -> std::string {
      throw Error(code, problem);
    });
  }
  return run(command, raw, out_dir, seed);
}

}  // namespace surfdyn::cli
