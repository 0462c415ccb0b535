#include "surfdyn/domination.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "surfdyn/parallel.hpp"

namespace surfdyn {

std::string_view to_string(SplittingSource::Kind k) {
  switch (k) {
    case SplittingSource::Kind::finite_time: return "finite_time";
    case SplittingSource::Kind::exact: return "exact";
    case SplittingSource::Kind::given: return "given";
  }
  return "finite_time";
}

std::string_view to_string(Verdict v) {
  switch (v) {
    case Verdict::hyperbolic_evidence: return "hyperbolic-evidence";
    case Verdict::inconclusive: return "inconclusive";
    case Verdict::contradicted: return "contradicted";
  }
  return "inconclusive";
}

namespace {

constexpr double kDegenerateGap = 1e-12;

SingularValues checked_svd(const Mat2& m, const char* which) {
  const auto sv = singular_values(m);
  if (!(sv.max > 0.0) || (sv.max - sv.min) / sv.max < kDegenerateGap) {
    throw Error(ErrorCode::DegenerateSingularValues,
                std::string("singular values of the ") + which + " window coincide");
  }
  return sv;
}

Mat2 window_product(const SurfaceMap& map, const std::vector<Vec2>& pts, std::size_t from,
                    std::size_t to) {
  Mat2 p = Mat2::identity();
  for (std::size_t i = from; i < to; ++i) p = map.jacobian(pts[i]) * p;
  return p;
}

// pts is a consecutive forward orbit; splitting at pts[k] from the windows
// [k-T, k] and [k, k+T].
Splitting window_splitting(const SurfaceMap& map, const std::vector<Vec2>& pts, std::size_t k,
                           int T) {
  const Mat2 fwd = window_product(map, pts, k, k + T);
  const Mat2 past = window_product(map, pts, k - T, k);
  const auto sf = checked_svd(fwd, "forward");
  const auto sp = checked_svd(past, "backward");
  const Vec2 image = past * sp.major;
  return Splitting(Direction::from(sf.minor), Direction::from(image));
}

std::vector<Vec2> forward_orbit(const SurfaceMap& map, Vec2 x, long n) {
  std::vector<Vec2> pts;
  pts.reserve(static_cast<std::size_t>(n) + 1);
  pts.push_back(x);
  for (long i = 0; i < n; ++i) {
    x = map.eval_lift(x);
    if (map.escaped(x)) throw Error(ErrorCode::OrbitEscape, "orbit left the admissible region", i + 1);
    pts.push_back(x);
  }
  return pts;
}

}  // namespace

Splitting finite_time_splitting(const SurfaceMap& map, Vec2 x, int T) {
  if (T < 1) throw Error(ErrorCode::InvalidArgument, "splitting horizon must be positive");
  const auto fwd = cocycle(map, x, T);
  const auto bwd = cocycle(map, x, -T);
  const auto sf = checked_svd(fwd.product, "forward");
  const auto sb = checked_svd(bwd.product, "backward");
  return Splitting(Direction::from(sf.minor), Direction::from(sb.minor));
}

Splitting finite_time_splitting_past(const SurfaceMap& map, const std::vector<Vec2>& past, int T) {
  if (T < 1 || past.size() != static_cast<std::size_t>(T) + 1) {
    throw Error(ErrorCode::InvalidArgument, "past window must hold T+1 points");
  }
  const auto fwd = cocycle(map, past.back(), T);
  const Mat2 p = window_product(map, past, 0, static_cast<std::size_t>(T));
  const auto sf = checked_svd(fwd.product, "forward");
  const auto sp = checked_svd(p, "backward");
  return Splitting(Direction::from(sf.minor), Direction::from(p * sp.major));
}

EnvelopeFit fit_envelope(const std::vector<double>& r) {
  if (r.size() < 2) throw Error(ErrorCode::InvalidArgument, "envelope fit needs a horizon >= 1");
  const std::size_t n = r.size() - 1;
  const std::size_t kmin = n >= 5 ? 5 : 1;
  EnvelopeFit fit;
  fit.rate = 0.0;
  for (std::size_t k = kmin; k <= n; ++k) {
    fit.rate = std::max(fit.rate, std::pow(r[k], 1.0 / static_cast<double>(k)));
  }
  fit.C = 0.0;
  for (std::size_t k = 0; k <= n; ++k) {
    fit.C = std::max(fit.C, r[k] / std::pow(fit.rate, static_cast<double>(k)));
  }
  fit.decays = fit.rate < 1.0;
  fit.unit_C = fit.C <= 1.0 + 1e-12;
  return fit;
}

OrbitBundles orbit_bundles(const SurfaceMap& map, Vec2 x, const SplittingSource& source, int n) {
  if (n < 1) throw Error(ErrorCode::InvalidArgument, "horizon must be positive");
  OrbitBundles out;
  switch (source.kind) {
    case SplittingSource::Kind::finite_time: {
      const int T = source.T;
      if (T < 1) throw Error(ErrorCode::InvalidArgument, "splitting horizon must be positive");
      // One consecutive lifted orbit x_{-T} .. x_{n+T}.
      const auto back = cocycle(map, x, -T);
      const Vec2 start = back.orbit.back();
      const auto pts = forward_orbit(map, start, n + 2L * T);
      for (int k = 0; k <= n; ++k) {
        out.orbit.push_back(pts[k + T]);
        out.splitting.push_back(window_splitting(map, pts, static_cast<std::size_t>(k + T), T));
      }
      break;
    }
    case SplittingSource::Kind::exact: {
      if (!map.constant_jacobian()) {
        throw Error(ErrorCode::InvalidArgument, "exact splitting needs a constant-Jacobian map");
      }
      const Splitting s = eigen_splitting(map.jacobian(x));
      out.orbit = forward_orbit(map, x, n);
      out.splitting.assign(out.orbit.size(), s);
      break;
    }
    case SplittingSource::Kind::given: {
      if (!source.given) throw Error(ErrorCode::InvalidArgument, "given splitting missing");
      out.orbit = forward_orbit(map, x, n);
      out.splitting.push_back(*source.given);
      for (int k = 0; k < n; ++k) {
        const Mat2 J = map.jacobian(out.orbit[k]);
        const auto& s = out.splitting.back();
        out.splitting.emplace_back(Direction::from(J * s.e().vec()), Direction::from(J * s.f().vec()));
      }
      break;
    }
  }
  for (int k = 0; k < n; ++k) {
    const Mat2 J = map.jacobian(out.orbit[k]);
    out.e_norms.push_back(restricted_norm(J, out.splitting[k].e()));
    out.f_inv_norms.push_back(restricted_norm(J.inverse(), out.splitting[k + 1].f()));
  }
  return out;
}

DominationEstimate orbit_domination(const SurfaceMap& map, Vec2 x, const SplittingSource& source,
                                    int n) {
  const auto b = orbit_bundles(map, x, source, n);
  DominationEstimate est;
  est.base = x;
  est.horizon = n;
  // For one-dimensional bundles the restricted norm of the product is the
  // product of the one-step restricted norms.
  double r = 1.0;
  est.ratios.push_back(r);
  for (int k = 0; k < n; ++k) {
    r *= b.e_norms[k] * b.f_inv_norms[k];
    est.ratios.push_back(r);
  }
  est.fit = fit_envelope(est.ratios);
  est.dominated = est.fit.decays;
  return est;
}

TwoDomination two_domination_check(const SurfaceMap& map, Vec2 x, const SplittingSource& source,
                                   int n) {
  const auto b = orbit_bundles(map, x, source, n);
  TwoDomination out;
  double e = 1.0, f = 1.0;
  out.e_f2.push_back(1.0);
  out.e2_f.push_back(1.0);
  for (int k = 0; k < n; ++k) {
    e *= b.e_norms[k];
    f *= b.f_inv_norms[k];
    out.e_f2.push_back(e * f * f);
    out.e2_f.push_back(e * e * f);
  }
  out.fit_e_f2 = fit_envelope(out.e_f2);
  out.fit_e2_f = fit_envelope(out.e2_f);
  return out;
}

std::vector<Vec2> attractor_orbit(const SurfaceMap& map, Vec2 seed, long transient, long count) {
  Vec2 x = seed;
  for (long i = 0; i < transient; ++i) {
    x = map.eval_lift(x);
    if (map.escaped(x)) throw Error(ErrorCode::OrbitEscape, "transient left the admissible region", i + 1);
  }
  return forward_orbit(map, x, count - 1);
}

namespace {

struct Grid {
  Region region;
  int nx, ny;

  // Fractional box coordinates of a point (reduced first on the torus).
  std::pair<double, double> locate(Vec2 p) const {
    return {(p.x - region.xmin) / region.width() * nx, (p.y - region.ymin) / region.height() * ny};
  }
  Region box(long id) const {
    const long i = id % nx, j = id / nx;
    const double w = region.width() / nx, h = region.height() / ny;
    return {region.xmin + i * w, region.xmin + (i + 1) * w, region.ymin + j * h,
            region.ymin + (j + 1) * h};
  }
};

// Image coordinate bound under a derivative perturbation of size delta:
// ray r moved by at most delta*|r|, measured in splitting coordinates.
double coordinate_gain(const Splitting& s) {
  const Mat2 basis = Mat2::columns(s.e().vec(), s.f().vec());
  return basis.inverse().norm();
}

struct ConeStep {
  double factor = 0.0;
  double padded = 0.0;
  Vec2 worst_ray;
};

ConeStep cone_step(const Mat2& m, const Cone& c, const Splitting& image, double delta) {
  ConeStep out;
  out.factor = cone_image_halfwidth(m, c, image) / c.half_width();
  const Vec2 e = c.splitting().e().vec();
  const Vec2 f = c.splitting().f().vec();
  const double a = c.half_width();
  const bool cu = c.flavor() == ConeFlavor::cu;
  const Vec2 rays[2] = {cu ? a * e + f : e + a * f, cu ? -a * e + f : e - a * f};
  const double gain = coordinate_gain(image);
  double worst = -1.0;
  for (const Vec2& ray : rays) {
    const Vec2 st = image.coordinates(m * ray);
    const double num = std::abs(cu ? st.x : st.y);
    const double den = std::abs(cu ? st.y : st.x);
    const double eta = delta * ray.norm() * gain;
    const double padded = den > eta ? (num + eta) / (den - eta) / a
                                    : std::numeric_limits<double>::infinity();
    const double plain = num / den / a;
    if (plain > worst) {
      worst = plain;
      out.worst_ray = ray;
    }
    out.padded = std::max(out.padded, padded);
  }
  return out;
}

}  // namespace

ConeCertificate certify_cones(const SurfaceMap& map, const CertifyOptions& opts) {
  if (opts.nx < 1 || opts.ny < 1) throw Error(ErrorCode::InvalidArgument, "grid must be nonempty");
  if (!(opts.a > 0.0 && opts.a <= 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "cone half-width must lie in (0, 1]");
  }
  if (opts.samples_per_box < 1 || opts.T < 1) {
    throw Error(ErrorCode::InvalidArgument, "samples and horizon must be positive");
  }
  const Grid grid{opts.region, opts.nx, opts.ny};
  const long nboxes = static_cast<long>(opts.nx) * opts.ny;
  const auto box_of = [&](Vec2 p) -> long {
    const auto [fx, fy] = grid.locate(map.reduce(p));
    if (fx < 0.0 || fy < 0.0 || fx >= opts.nx || fy >= opts.ny) return -1;
    return static_cast<long>(fy) * opts.nx + static_cast<long>(fx);
  };

  // Active boxes and the points their splittings are estimated at.
  std::vector<long> anchor(nboxes, -1);  // attractor index, or -2 for the box center
  if (opts.attractor) {
    const auto& pts = *opts.attractor;
    for (std::size_t k = opts.T; k + opts.T < pts.size(); ++k) {
      const long id = box_of(pts[k]);
      if (id >= 0 && anchor[id] == -1) anchor[id] = static_cast<long>(k);
    }
  } else {
    std::fill(anchor.begin(), anchor.end(), -2);
  }

  std::vector<std::optional<Splitting>> split(nboxes);
  std::vector<std::string> split_note(nboxes);
  parallel_for(
      static_cast<std::size_t>(nboxes),
      [&](std::size_t id) {
        if (anchor[id] == -1) return;
        try {
          if (anchor[id] == -2) {
            split[id] = finite_time_splitting(map, grid.box(static_cast<long>(id)).center(), opts.T);
          } else {
            split[id] = window_splitting(map, *opts.attractor, static_cast<std::size_t>(anchor[id]),
                                         opts.T);
          }
        } catch (const Error& e) {
          split_note[id] = std::string(to_string(e.code())) + ": " + e.what();
        }
      },
      opts.threads);

  // Splitting of the box containing p, falling back to the nearest active box
  // within two cells.
  const auto image_splitting = [&](Vec2 p) -> const std::optional<Splitting>* {
    const auto [fx, fy] = grid.locate(map.reduce(p));
    if (fx < -2.0 || fy < -2.0 || fx >= opts.nx + 2.0 || fy >= opts.ny + 2.0) return nullptr;
    const long i0 = std::clamp(static_cast<long>(std::floor(fx)), 0L, static_cast<long>(opts.nx) - 1);
    const long j0 = std::clamp(static_cast<long>(std::floor(fy)), 0L, static_cast<long>(opts.ny) - 1);
    for (long r = 0; r <= 2; ++r) {
      for (long dj = -r; dj <= r; ++dj) {
        for (long di = -r; di <= r; ++di) {
          if (std::max(std::abs(di), std::abs(dj)) != r) continue;
          const long i = i0 + di, j = j0 + dj;
          if (i < 0 || j < 0 || i >= opts.nx || j >= opts.ny) continue;
          const long id = j * opts.nx + i;
          if (split[id]) return &split[id];
        }
      }
    }
    return nullptr;
  };

  const int k = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(opts.samples_per_box))));
  std::vector<BoxRecord> records(nboxes);
  parallel_for(
      static_cast<std::size_t>(nboxes),
      [&](std::size_t uid) {
        const long id = static_cast<long>(uid);
        if (anchor[id] == -1) return;
        BoxRecord& rec = records[id];
        rec.id = id;
        rec.box = grid.box(id);
        rec.splitting = split[id];
        const auto fail = [&](const std::string& why) {
          rec.pass = false;
          rec.lambda = std::numeric_limits<double>::infinity();
          rec.note = why;
        };
        if (!rec.splitting) {
          fail(split_note[id]);
          return;
        }
        std::vector<Vec2> samples;
        std::vector<Mat2> jac, jinv;
        for (int sj = 0; sj < k; ++sj) {
          for (int si = 0; si < k; ++si) {
            const Vec2 p{rec.box.xmin + (si + 0.5) / k * rec.box.width(),
                         rec.box.ymin + (sj + 0.5) / k * rec.box.height()};
            samples.push_back(p);
            jac.push_back(map.jacobian(p));
            jinv.push_back(map.inverse_jacobian(p));
          }
        }
        // Lipschitz estimate of Df and Df^-1 over the samples and the centre.
        const Vec2 c = rec.box.center();
        samples.push_back(c);
        jac.push_back(map.jacobian(c));
        jinv.push_back(map.inverse_jacobian(c));
        double lip = 0.0, lip_inv = 0.0;
        for (std::size_t p = 0; p < samples.size(); ++p) {
          for (std::size_t q = p + 1; q < samples.size(); ++q) {
            const double d = (samples[p] - samples[q]).norm();
            if (d <= 0.0) continue;
            lip = std::max(lip, (jac[p] - jac[q]).norm() / d);
            lip_inv = std::max(lip_inv, (jinv[p] - jinv[q]).norm() / d);
          }
        }
        const double diam = rec.box.diameter();
        const Cone cu(*rec.splitting, opts.a, ConeFlavor::cu);
        const Cone cs(*rec.splitting, opts.a, ConeFlavor::cs);
        double worst = 0.0, worst_padded = 0.0;
        try {
          for (std::size_t p = 0; p + 1 < samples.size(); ++p) {
            const auto* fwd = image_splitting(map.eval_lift(samples[p]));
            const auto* bwd = image_splitting(map.inverse_lift(samples[p]));
            if (!fwd || !bwd) {
              fail("sample image leaves the covering");
              return;
            }
            const auto su = cone_step(jac[p], cu, **fwd, lip * diam);
            const auto ss = cone_step(jinv[p], cs, **bwd, lip_inv * diam);
            if (su.factor > worst) {
              worst = su.factor;
              rec.witness = su.worst_ray;
            }
            if (ss.factor > worst) {
              worst = ss.factor;
              rec.witness = ss.worst_ray;
            }
            worst_padded = std::max({worst_padded, su.padded, ss.padded});
          }
        } catch (const Error& e) {
          fail(std::string(to_string(e.code())) + ": " + e.what());
          return;
        }
        rec.lambda = worst;
        rec.padding = std::max(0.0, worst_padded - worst);
        rec.pass = worst + rec.padding < 1.0;
        if (!rec.pass) rec.note = "no strict cone contraction";
      },
      opts.threads);

  ConeCertificate cert;
  cert.nx = opts.nx;
  cert.ny = opts.ny;
  cert.a = opts.a;
  cert.T = opts.T;
  cert.samples = k * k;
  cert.pass = true;
  for (long id = 0; id < nboxes; ++id) {
    if (anchor[id] == -1) continue;
    const BoxRecord& rec = records[id];
    cert.lambda_worst = std::max(cert.lambda_worst, rec.lambda);
    cert.padding_worst = std::max(cert.padding_worst, rec.padding);
    if (!rec.pass && cert.pass) {
      cert.pass = false;
      cert.fail_box = id;
      cert.witness = rec.witness;
    }
    cert.boxes.push_back(rec);
  }
  if (cert.boxes.empty()) cert.pass = false;
  return cert;
}

HyperbolicityVerdict hyperbolicity_verdict(const SurfaceMap& map,
                                           const std::vector<Vec2>& samples,
                                           const SplittingSource& source, int horizon,
                                           double gamma1, double gamma2) {
  if (horizon < 1) throw Error(ErrorCode::InvalidArgument, "horizon must be positive");
  // thresholds are validated up front so bad configs fail loudly
  pliss_constants(gamma1, gamma2, 2.0);
  HyperbolicityVerdict out;
  bool all_evidence = !samples.empty();
  bool any_contradiction = false;
  for (const Vec2& x : samples) {
    PointVerdict pv;
    pv.point = x;
    try {
      const auto b = orbit_bundles(map, x, source, horizon);
      std::vector<double> e{1.0}, f{1.0};
      for (int k = 0; k < horizon; ++k) {
        e.push_back(e.back() * b.e_norms[k]);
        f.push_back(f.back() * b.f_inv_norms[k]);
      }
      pv.e_rate = fit_envelope(e).rate;
      pv.f_rate = fit_envelope(f).rate;
      pv.e_pliss = pliss_times(b.e_norms, gamma1, gamma2);
      pv.f_pliss = pliss_times(b.f_inv_norms, gamma1, gamma2);
      const double one = 1.0 - 1e-12;
      if (pv.e_rate >= one || pv.f_rate >= one) {
        pv.verdict = Verdict::contradicted;
        pv.note = pv.e_rate >= one ? "no contraction along E" : "no contraction of F backward";
      } else if (pv.e_pliss->hypothesis && pv.e_pliss->density_holds &&
                 pv.f_pliss->hypothesis && pv.f_pliss->density_holds) {
        pv.verdict = Verdict::hyperbolic_evidence;
      } else {
        pv.verdict = Verdict::inconclusive;
        pv.note = "decay without Pliss density";
      }
    } catch (const Error& err) {
      const bool degenerate = err.code() == ErrorCode::DegenerateSingularValues ||
                              err.code() == ErrorCode::ParallelDirections ||
                              err.code() == ErrorCode::NotASaddle;
      pv.verdict = degenerate ? Verdict::contradicted : Verdict::inconclusive;
      pv.note = std::string(to_string(err.code())) + ": " + err.what();
    }
    any_contradiction |= pv.verdict == Verdict::contradicted;
    all_evidence &= pv.verdict == Verdict::hyperbolic_evidence;
    out.points.push_back(std::move(pv));
  }
  out.verdict = any_contradiction ? Verdict::contradicted
                : all_evidence    ? Verdict::hyperbolic_evidence
                                  : Verdict::inconclusive;
  return out;
}

}  // namespace surfdyn
