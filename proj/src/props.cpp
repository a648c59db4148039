#include "rfi/props.hpp"

#include <cmath>
#include <limits>

#include "rfi/builders.hpp"
#include "rfi/errors.hpp"
#include "rfi/inversion.hpp"
#include "rfi/transport.hpp"
#include "rfi/zoo.hpp"

namespace rfi::props {

int PropertySummary::total_failures() const {
  int total = 0;
  for (const auto& c : checks) total += c.failures;
  return total;
}

std::vector<ZooEntry> property_zoo() {
  using zoo::RevolutionProfile;
  return {
      {"euclidean(2)", zoo::euclidean(2)},
      {"flat_torus(1,1)", zoo::flat_torus({1.0, 1.0})},
      {"sphere2(1)", zoo::sphere2(1.0)},
      {"poincare_disk", zoo::poincare_disk()},
      {"catenoid(1)", zoo::surface_of_revolution(RevolutionProfile::catenoid, 1.0)},
      {"cylinder(1)", zoo::surface_of_revolution(RevolutionProfile::cylinder, 1.0)},
  };
}

Sampler::Sampler(std::uint64_t seed, std::uint64_t manifold, std::uint64_t check) {
  std::seed_seq seq{seed, manifold, check};
  rng_.seed(seq);
}

double Sampler::uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }

std::uint64_t Sampler::next_seed() { return rng_(); }

ChartPoint Sampler::point(const ManifoldChart& chart, double inset) {
  const int n = chart.dim();
  ChartPoint p{Vec(n)};
  // Box sampling, rejecting points closer than `inset` to a curved chart edge
  // (the Poincare chart is a disk inside its box).
  do {
    draw_box(chart, inset, p);
  } while (!(chart.chart_margin_at(p) >= inset));
  return p;
}

void Sampler::draw_box(const ManifoldChart& chart, double inset, ChartPoint& p) {
  for (int i = 0; i < chart.dim(); ++i) {
    const double lo = chart.bounds().lo[i], hi = chart.bounds().hi[i];
    const auto& period = chart.periods()[static_cast<std::size_t>(i)];
    if (period)
      p.coords[i] = uniform(lo, lo + *period);
    else if (!std::isfinite(lo) || !std::isfinite(hi))
      p.coords[i] = uniform(-1.0, 1.0);
    else
      p.coords[i] = uniform(lo + inset, hi - inset);
  }
}

Vec Sampler::unit_vector(const ManifoldChart& chart, const ChartPoint& x) {
  const int n = chart.dim();
  std::normal_distribution<double> normal;
  Vec c(n);
  do {
    for (int i = 0; i < n; ++i) c[i] = normal(rng_);
  } while (c.norm() < 1e-3);
  c.normalize();
  return orthonormal_frame_at(chart, x).to_chart_vector(c);
}

FiberValue Sampler::fiber(TensorType type, int n) {
  FiberValue v(type, n);
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = Complex(uniform(-1.0, 1.0), uniform(-1.0, 1.0));
  return v;
}

Mat Sampler::orthogonal(int n) {
  std::normal_distribution<double> normal;
  Mat a(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) a(i, j) = normal(rng_);
  Eigen::HouseholderQR<Mat> qr(a);
  Mat q = qr.householderQ();
  // Sign fix makes the draw Haar distributed.
  const Mat r = qr.matrixQR().template triangularView<Eigen::Upper>();
  for (int j = 0; j < n; ++j)
    if (r(j, j) < 0.0) q.col(j) *= -1.0;
  return q;
}

double safe_radius(const ManifoldChart& chart, const ChartPoint& x) {
  return 0.9 * admissible_window(chart, x, 1.0).support_radius();
}

namespace {

constexpr double kTiny = std::numeric_limits<double>::min();

// Runs `residual(i)` for every sample; library errors count as failures.
template <typename F>
CheckResult run_check(std::string name, const ZooEntry& m, int samples, double tolerance, F&& residual) {
  CheckResult out{std::move(name), m.label, samples, 0, 0.0, tolerance};
  for (int i = 0; i < samples; ++i) {
    try {
      const double r = residual(i);
      if (std::isfinite(r)) out.worst = std::max(out.worst, r);
      if (!(r <= tolerance)) ++out.failures;
    } catch (const Error&) {
      ++out.failures;
    }
  }
  return out;
}

double relative(double diff, double scale) { return diff / std::max(1.0, scale); }

TensorType sample_type(int i) {
  static const TensorType types[] = {{0, 0}, {1, 0}, {0, 1}};
  return types[i % 3];
}

// The exp-derivative checks and their polarization need second differences of exp-pulled-back
// fields; a smaller t-step keeps the 2 pi harmonics of the unit torus well
// inside the 1e-4 budget.
DerivativeConfig derivative_config() {
  DerivativeConfig cfg;
  cfg.h_exp = 1e-4;
  return cfg;
}

}  // namespace

CheckResult check_semigroup(const ZooEntry& m, Sampler& s, int samples, int steps) {
  return run_check("semigroup", m, samples, 1e-8, [&](int) {
    const ChartPoint x = s.point(m.chart);
    const Vec eta = s.unit_vector(m.chart, x);
    const double r = safe_radius(m.chart, x);
    const double t = s.uniform(0.0, 0.5 * r), sp = s.uniform(0.0, 0.5 * r);
    return geodesic_flow_compose_check(m.chart, x, TangentVector{x, eta}, t, sp, steps);
  });
}

CheckResult check_exp_derivative(const ZooEntry& m, Sampler& s, int p, int samples) {
  const DerivativeConfig cfg = derivative_config();
  return run_check("exp_derivative_p" + std::to_string(p), m, samples, 1e-4, [&](int i) {
    const ChartPoint x = s.point(m.chart);
    const TensorSection u = builders::random_trig_section(m.chart, sample_type(i), s.next_seed());
    std::vector<Vec> etas;
    for (int k = 0; k < p; ++k) etas.push_back(s.unit_vector(m.chart, x));
    const FiberValue via_exp = symmetrized_derivative_via_exp(m.chart, u, x, etas, cfg);
    const FiberValue stencil = symmetrize_derivative(nth_covariant_derivative(m.chart, u, x, p, cfg), etas);
    return max_abs_difference(via_exp, stencil);
  });
}

CheckResult check_polarization(const ZooEntry& m, Sampler& s, int p, int samples) {
  const DerivativeConfig cfg = derivative_config();
  return run_check("polarization_p" + std::to_string(p), m, samples, 1e-4, [&](int i) {
    const ChartPoint x = s.point(m.chart);
    const TensorSection u = builders::random_trig_section(m.chart, sample_type(i), s.next_seed());
    const Vec eta = s.unit_vector(m.chart, x);
    const std::vector<Vec> etas(static_cast<std::size_t>(p), eta);
    const FiberValue stencil = contract_derivative(nth_covariant_derivative(m.chart, u, x, p, cfg), etas);
    return max_abs_difference(radial_derivative_via_exp(m.chart, u, x, eta, p, cfg), stencil);
  });
}

CheckResult check_transport_isometry(const ZooEntry& m, Sampler& s, TensorType type, int samples) {
  const std::string name =
      "transport_isometry_" + std::to_string(type.contravariant) + std::to_string(type.covariant);
  return run_check(name, m, samples, 1e-8, [&](int) {
    const ChartPoint x = s.point(m.chart);
    const Vec xi = s.uniform(0.2, 1.0) * safe_radius(m.chart, x) * s.unit_vector(m.chart, x);
    const FlowEndpoint flow = flow_with_transport(m.chart, x, xi, 256);
    const TransportOperator op = transport_from_flow(x, flow);
    const FiberValue v = s.fiber(type, m.chart.dim());
    const double before = fiber_norm(v, m.chart.metric_at(flow.position));
    const double after = fiber_norm(apply_transport(op, v), m.chart.metric_at(x));
    return std::abs(after - before) / std::max(before, kTiny);
  });
}

CheckResult check_metric_compatibility(const ZooEntry& m, Sampler& s, int samples) {
  return run_check("metric_compatibility", m, samples, 1e-6,
                   [&](int) { return m.chart.metric_compatibility_residual(s.point(m.chart)); });
}

double sphere_holonomy_residual(int steps) {
  const ManifoldChart chart = zoo::sphere2(1.0);
  using V3 = Eigen::Vector3d;
  // Octant triangle rotated so its centroid sits on the equator at phi = 0,
  // well away from the excluded pole caps.
  const V3 c = V3(1.0, 1.0, 1.0).normalized();
  const V3 u = V3(1.0, -1.0, 0.0).normalized();
  Eigen::Matrix3d rot;
  rot.row(0) = c.transpose();
  rot.row(1) = u.transpose();
  rot.row(2) = c.cross(u).transpose();
  const V3 verts[3] = {rot * V3::UnitX(), rot * V3::UnitY(), rot * V3::UnitZ()};

  const auto to_chart = [&](const V3& p) {
    ChartPoint q{Vec(2)};
    q.coords << std::acos(p.z()), std::atan2(p.y(), p.x());
    return chart.wrap(q);
  };
  Mat holonomy = Mat::Identity(2, 2);
  for (int e = 0; e < 3; ++e) {
    const V3& a = verts[e];
    const V3& b = verts[(e + 1) % 3];
    const ChartPoint pa = to_chart(a);
    const double th = pa.coords[0], ph = pa.coords[1];
    const V3 tangent = (b - a.dot(b) * a).normalized() * std::acos(std::clamp(a.dot(b), -1.0, 1.0));
    const V3 e_theta(std::cos(th) * std::cos(ph), std::cos(th) * std::sin(ph), -std::sin(th));
    const V3 e_phi(-std::sin(ph), std::cos(ph), 0.0);
    Vec xi(2);
    xi << tangent.dot(e_theta), tangent.dot(e_phi) / std::sin(th);
    const GeodesicPath path = exp_map(chart, pa, TangentVector{pa, xi}, steps);
    // transport_along maps end -> start; the loop needs start -> end.
    holonomy = transport_along(chart, path).inverse().vector_matrix * holonomy;
  }
  const OrthonormalFrame frame = orthonormal_frame_at(chart, to_chart(verts[0]));
  const Mat in_frame = frame.frame.inverse() * holonomy * frame.frame;
  // Enclosed area pi/2, counterclockwise about the outward normal when the
  // vertex triple is positively oriented; (e_theta, e_phi) is positively
  // oriented too.
  const double angle = (verts[0].cross(verts[1]).dot(verts[2]) > 0.0 ? 1.0 : -1.0) * kPi / 2.0;
  Mat expected(2, 2);
  expected << std::cos(angle), -std::sin(angle), std::sin(angle), std::cos(angle);
  return (in_frame - expected).cwiseAbs().maxCoeff();
}

PropertySummary run_property_suite(const SuiteOptions& options) {
  PropertySummary summary;
  summary.seed = options.seed;
  summary.fault_injected = options.inject_fault;
  std::vector<ZooEntry> zoo_list = property_zoo();
  if (options.inject_fault)
    for (auto& m : zoo_list) m.chart = m.chart.with_corrupted_christoffels(0.1);

  for (std::size_t mi = 0; mi < zoo_list.size(); ++mi) {
    const ZooEntry& m = zoo_list[mi];
    const int n = m.chart.dim();
    std::uint64_t check_id = 0;
    auto add = [&](auto&& make) {
      Sampler s(options.seed, mi, check_id++);
      summary.checks.push_back(make(s));
    };
    const int g = options.generic_samples;

    // geometry-core
    add([&](Sampler& s) {
      return run_check("metric_spd_symmetric", m, g, 1e-12, [&](int) {
        const Mat gm = m.chart.metric_at(s.point(m.chart));
        return (gm - gm.transpose()).cwiseAbs().maxCoeff();
      });
    });
    add([&](Sampler& s) {
      return run_check("christoffel_symmetry", m, g, 0.0,
                       [&](int) { return m.chart.christoffel_at(s.point(m.chart)).symmetry_residual(); });
    });
    add([&](Sampler& s) {
      const ManifoldChart fd = m.chart.with_finite_difference_christoffels(1e-4);
      return run_check("christoffel_fd_agreement", m, g, 1e-6, [&](int) {
        const ChartPoint x = s.point(m.chart);
        return fd.christoffel_at(x).max_abs_difference(m.chart.christoffel_at(x));
      });
    });
    add([&](Sampler& s) { return check_metric_compatibility(m, s, g); });
    add([&](Sampler& s) {
      return run_check("frame_orthonormality", m, g, 1e-12, [&](int) {
        const ChartPoint x = s.point(m.chart);
        const OrthonormalFrame f = orthonormal_frame_at(m.chart, x);
        const OrthonormalFrame again = orthonormal_frame_at(m.chart, x);
        if (f.frame != again.frame || f.coframe != again.coframe) return 1.0;  // determinism is bitwise
        const Mat gram = f.frame.transpose() * m.chart.metric_at(x) * f.frame;
        return (gram - Mat::Identity(n, n)).cwiseAbs().maxCoeff();
      });
    });

    // geodesics
    add([&](Sampler& s) { return check_semigroup(m, s, options.semigroup_samples); });
    add([&](Sampler& s) {
      return run_check("speed_conservation", m, g, 1e-8, [&](int) {
        const ChartPoint x = s.point(m.chart);
        const Vec xi = safe_radius(m.chart, x) * s.unit_vector(m.chart, x);
        const GeodesicPath path = exp_map(m.chart, x, TangentVector{x, xi}, 256);
        const double speed0 = norm(m.chart, TangentVector{x, xi});
        double worst = 0.0;
        for (const auto& st : path.states)
          worst = std::max(worst, std::abs(norm(m.chart, TangentVector{st.position, st.velocity}) - speed0));
        return worst;
      });
    });
    add([&](Sampler& s) {
      return run_check("window_support", m, g, 0.0, [&](int) {
        const ChartPoint x = s.point(m.chart);
        const CutoffWindow w = admissible_window(m.chart, x, s.uniform(0.1, 1.0));
        const QuadraturePlan plan = QuadraturePlan::make(orthonormal_frame_at(m.chart, x), w, 16);
        double bad = 0.0;
        for (std::size_t k = 0; k < plan.node_count(); ++k) {
          const double r = plan.xi_node(k).norm();
          if (r > w.support_radius()) bad = std::max(bad, w.value(r));
          if (r <= w.epsilon) bad = std::max(bad, std::abs(1.0 - w.value(r)));
        }
        return bad;
      });
    });

    // transport
    for (const TensorType t : {TensorType{0, 0}, TensorType{1, 0}, TensorType{0, 1}, TensorType{1, 1},
                               TensorType{0, 2}})
      add([&](Sampler& s) { return check_transport_isometry(m, s, t, options.transport_samples); });
    add([&](Sampler& s) {
      return run_check("transport_tensor_product", m, g, 1e-12, [&](int) {
        const ChartPoint x = s.point(m.chart);
        const Vec xi = safe_radius(m.chart, x) * s.unit_vector(m.chart, x);
        const TransportOperator op = transport_from_flow(x, flow_with_transport(m.chart, x, xi, 256));
        const FiberValue v = s.fiber({1, 0}, n), w = s.fiber({0, 1}, n);
        const FiberValue lhs = apply_transport(op, tensor_product(v, w));
        const FiberValue rhs = tensor_product(apply_transport(op, v), apply_transport(op, w));
        return relative(max_abs_difference(lhs, rhs), rhs.max_abs());
      });
    });
    add([&](Sampler& s) {
      return run_check("transport_duality", m, g, 1e-10, [&](int) {
        const ChartPoint x = s.point(m.chart);
        const Vec xi = safe_radius(m.chart, x) * s.unit_vector(m.chart, x);
        const TransportOperator op = transport_from_flow(x, flow_with_transport(m.chart, x, xi, 256));
        const FiberValue v = s.fiber({1, 0}, n), a = s.fiber({0, 1}, n);
        const Complex before = contract(a, v);
        return relative(std::abs(contract(apply_transport(op, a), apply_transport(op, v)) - before),
                        std::abs(before));
      });
    });
    add([&](Sampler& s) {
      return run_check("transport_zero_vector", m, g, 0.0, [&](int) {
        const ChartPoint x = s.point(m.chart);
        const TransportOperator op = transport_from_flow(x, flow_with_transport(m.chart, x, Vec::Zero(n), 64));
        const FiberValue v = s.fiber({1, 1}, n);
        return max_abs_difference(apply_transport(op, v), v);
      });
    });

    // operators
    for (int p : {1, 2}) {
      add([&](Sampler& s) { return check_exp_derivative(m, s, p, options.derivative_samples); });
      add([&](Sampler& s) { return check_polarization(m, s, p, options.derivative_samples); });
    }
    add([&](Sampler& s) {
      return run_check("leibniz", m, g, 1e-7, [&](int) {
        const ChartPoint x = s.point(m.chart);
        const TensorSection f = builders::random_trig_section(m.chart, {0, 0}, s.next_seed());
        const TensorSection u = builders::random_trig_section(m.chart, {1, 0}, s.next_seed());
        TensorSection fu;
        fu.type = u.type;
        fu.dim = n;
        fu.eval = [&](const ChartPoint& p) { return f(p)[0] * u(p); };
        const FiberValue lhs = covariant_derivative(m.chart, fu, x);
        const FiberValue df = f.partials(x), uv = u(x), du = covariant_derivative(m.chart, u, x);
        FiberValue rhs = f(x)[0] * du;
        for (int i = 0; i < n; ++i)
          for (int k = 0; k < n; ++k)
            rhs[static_cast<std::size_t>(i * n + k)] += df[static_cast<std::size_t>(k)] * uv[static_cast<std::size_t>(i)];
        return relative(max_abs_difference(lhs, rhs), rhs.max_abs());
      });
    });
    add([&](Sampler& s) {
      return run_check("symbol_polynomiality", m, g, 1e-10, [&](int) {
        const ChartPoint x = s.point(m.chart);
        const Vec eta = s.unit_vector(m.chart, x);
        const DifferentialOperator a = DifferentialOperator::linear_combination(
            1.0, DifferentialOperator::laplace_beltrami(m.chart, {0, 0}), Complex(0.7, -0.2),
            DifferentialOperator::covariant_derivative_along(n, {0, 0}, [eta](const ChartPoint&) { return eta; }));
        const SymbolEvaluator sym(a, x);
        Vec l0(n), mu(n);
        for (int i = 0; i < n; ++i) l0[i] = s.uniform(-3.0, 3.0), mu[i] = s.uniform(-3.0, 3.0);
        CMat vals[4];
        for (int k = 0; k < 4; ++k) vals[k] = sym(Vec(l0 + k * mu));
        // Third forward difference of a quadratic vanishes.
        const CMat third = vals[3] - 3.0 * vals[2] + 3.0 * vals[1] - vals[0];
        double scale = 0.0;
        for (const auto& v : vals) scale = std::max(scale, v.cwiseAbs().maxCoeff());
        return relative(third.cwiseAbs().maxCoeff(), scale);
      });
    });
    add([&](Sampler& s) {
      return run_check("direct_apply_linearity", m, g, 1e-12, [&](int) {
        const ChartPoint x = s.point(m.chart);
        const TensorSection u1 = builders::random_trig_section(m.chart, {0, 0}, s.next_seed());
        const TensorSection u2 = builders::random_trig_section(m.chart, {0, 0}, s.next_seed());
        const Complex c(s.uniform(-2.0, 2.0), s.uniform(-2.0, 2.0));
        TensorSection sum;
        sum.type = u1.type;
        sum.dim = n;
        sum.eval = [&](const ChartPoint& p) { return u1(p) + c * u2(p); };
        sum.partials = [&](const ChartPoint& p) { return u1.partials(p) + c * u2.partials(p); };
        const DifferentialOperator lap = DifferentialOperator::laplace_beltrami(m.chart, {0, 0});
        const FiberValue lhs = direct_apply(m.chart, lap, sum, x);
        const FiberValue rhs = direct_apply(m.chart, lap, u1, x) + c * direct_apply(m.chart, lap, u2, x);
        return relative(max_abs_difference(lhs, rhs), rhs.max_abs());
      });
    });

    // inversion
    add([&](Sampler& s) {
      return run_check("inversion_linearity", m, options.inversion_samples, 1e-10, [&](int) {
        const ChartPoint x = s.point(m.chart);
        const TensorSection u = builders::random_trig_section(m.chart, {0, 0}, s.next_seed());
        const Vec eta = s.unit_vector(m.chart, x);
        const DifferentialOperator a = DifferentialOperator::laplace_beltrami(m.chart, {0, 0});
        const DifferentialOperator b =
            DifferentialOperator::covariant_derivative_along(n, {0, 0}, [eta](const ChartPoint&) { return eta; });
        const Complex alpha(s.uniform(-2.0, 2.0), 0.5), beta(s.uniform(-2.0, 2.0), -1.0);
        const CutoffWindow w = admissible_window(m.chart, x, 1.0);
        const QuadraturePlan plan = QuadraturePlan::make(orthonormal_frame_at(m.chart, x), w, 32);
        const FiberValue lhs =
            invert(m.chart, DifferentialOperator::linear_combination(alpha, a, beta, b), u, x, w, plan, 128);
        const FiberValue rhs =
            alpha * invert(m.chart, a, u, x, w, plan, 128) + beta * invert(m.chart, b, u, x, w, plan, 128);
        return relative(max_abs_difference(lhs, rhs), rhs.max_abs());
      });
    });
    add([&](Sampler& s) {
      // Rotating the grid moves the quadrature nodes, so the two results can
      // only agree to within their own discretization errors.
      return run_check("inversion_frame_independence", m, options.inversion_samples, 1.0, [&](int) {
        const ChartPoint x = s.point(m.chart);
        const TensorSection u = builders::random_trig_section(m.chart, {0, 0}, s.next_seed());
        const DifferentialOperator a = DifferentialOperator::laplace_beltrami(m.chart, {0, 0});
        const CutoffWindow w = admissible_window(m.chart, x, 1.0);
        const OrthonormalFrame f = orthonormal_frame_at(m.chart, x);
        const FiberValue base = invert(m.chart, a, u, x, w, QuadraturePlan::make(f, w, 64), 128);
        const FiberValue turned =
            invert(m.chart, a, u, x, w, QuadraturePlan::make(f.rotated(s.orthogonal(n)), w, 64), 128);
        const FiberValue direct = direct_apply(m.chart, a, u, x);
        const double budget = std::max(1e-10, 2.0 * std::max(max_abs_difference(base, direct),
                                                             max_abs_difference(turned, direct)));
        return max_abs_difference(base, turned) / budget;
      });
    });
    add([&](Sampler& s) {
      return run_check("serial_parallel_identity", m, options.inversion_samples, 0.0, [&](int) {
        const ChartPoint x = s.point(m.chart);
        const TensorSection u = builders::random_trig_section(m.chart, {1, 0}, s.next_seed());
        const DifferentialOperator a = DifferentialOperator::laplace_beltrami(m.chart, {1, 0});
        const CutoffWindow w = admissible_window(m.chart, x, 1.0);
        const QuadraturePlan plan = QuadraturePlan::make(orthonormal_frame_at(m.chart, x), w, 16);
        const FiberValue ser = invert(m.chart, a, u, x, w, plan, 64, {Execution::serial, false});
        const FiberValue par = invert(m.chart, a, u, x, w, plan, 64, {Execution::parallel, false});
        for (std::size_t k = 0; k < ser.size(); ++k)
          if (ser[k] != par[k]) return 1.0;
        return 0.0;
      });
    });
  }

  // Gauss-Bonnet holonomy on the unit sphere.
  {
    const ZooEntry sphere{"sphere2(1)", zoo::sphere2(1.0)};
    summary.checks.push_back(run_check("holonomy_octant", sphere, 1, 1e-3,
                                       [](int) { return sphere_holonomy_residual(256); }));
  }
  return summary;
}

}  // namespace rfi::props
