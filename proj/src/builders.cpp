#include "rfi/builders.hpp"

#include <cmath>
#include <random>

#include "rfi/errors.hpp"

namespace rfi::builders {

namespace {

void require_params(const BuilderSpec& spec, std::size_t count) {
  if (spec.params.size() != count)
    throw ConfigError("params", spec.name + " expects " + std::to_string(count) + " parameters, got " +
                                    std::to_string(spec.params.size()));
}

Vec params_vec(const BuilderSpec& spec, std::size_t first, int n) {
  Vec v(n);
  for (int i = 0; i < n; ++i) v[i] = spec.params[first + static_cast<std::size_t>(i)];
  return v;
}

}  // namespace

TensorSection scalar_section(int dim, std::function<double(const Vec&)> f, std::function<Vec(const Vec&)> grad,
                             std::string label) {
  TensorSection s;
  s.type = TensorType{0, 0};
  s.dim = dim;
  s.eval = [f, dim](const ChartPoint& p) { return FiberValue::scalar(f(p.coords), dim); };
  s.partials = [grad](const ChartPoint& p) { return FiberValue::covector(grad(p.coords)); };
  s.label = std::move(label);
  return s;
}

TensorSection make_section(const BuilderSpec& spec, const ManifoldChart& chart) {
  const int n = chart.dim();
  const std::string& name = spec.name;
  if (name == "constant") {
    require_params(spec, 1);
    const double c = spec.params[0];
    return scalar_section(n, [c](const Vec&) { return c; }, [n](const Vec&) { return Vec(Vec::Zero(n)); },
                          "constant");
  }
  if (name == "zero") {
    require_params(spec, 0);
    TensorSection s = scalar_section(n, [](const Vec&) { return 0.0; },
                                     [n](const Vec&) { return Vec(Vec::Zero(n)); }, "zero");
    s.identically_zero = true;
    return s;
  }
  if (name == "gaussian_bump") {
    require_params(spec, static_cast<std::size_t>(n) + 1);
    const Vec c = params_vec(spec, 0, n);
    const double w = spec.params.back();
    if (!(w > 0.0)) throw ConfigError("params", "gaussian_bump width must be positive");
    return scalar_section(
        n, [c, w](const Vec& x) { return std::exp(-(x - c).squaredNorm() / (w * w)); },
        [c, w](const Vec& x) {
          const double e = std::exp(-(x - c).squaredNorm() / (w * w));
          return Vec(-2.0 * e / (w * w) * (x - c));
        },
        "gaussian_bump");
  }
  if (name == "sine_wave") {
    require_params(spec, static_cast<std::size_t>(n));
    const Vec k = kTwoPi * params_vec(spec, 0, n);
    return scalar_section(
        n, [k](const Vec& x) { return std::sin(k.dot(x)); },
        [k](const Vec& x) { return Vec(std::cos(k.dot(x)) * k); }, "sine_wave");
  }
  if (name == "sin_cos" || name == "cos_theta" || name == "quadratic") {
    require_params(spec, 0);
    if (name != "quadratic" && n != 2) throw ConfigError("name", name + " needs a 2-dimensional chart");
    if (name == "sin_cos")
      return scalar_section(
          n, [](const Vec& x) { return std::sin(x[0]) * std::cos(x[1]); },
          [](const Vec& x) {
            Vec g(2);
            g << std::cos(x[0]) * std::cos(x[1]), -std::sin(x[0]) * std::sin(x[1]);
            return g;
          },
          "sin_cos");
    if (name == "cos_theta")
      return scalar_section(
          n, [](const Vec& x) { return std::cos(x[0]); },
          [](const Vec& x) {
            Vec g(2);
            g << -std::sin(x[0]), 0.0;
            return g;
          },
          "cos_theta");
    return scalar_section(n, [](const Vec& x) { return x.squaredNorm(); }, [](const Vec& x) { return Vec(2.0 * x); },
                          "quadratic");
  }
  if (name == "coordinate_vector") {
    require_params(spec, 1);
    const int axis = static_cast<int>(spec.params[0]);
    if (axis < 0 || axis >= n) throw ConfigError("params", "coordinate_vector axis out of range");
    TensorSection s;
    s.type = TensorType{1, 0};
    s.dim = n;
    s.eval = [n, axis](const ChartPoint&) { return FiberValue::vector(Vec(Vec::Unit(n, axis))); };
    s.partials = [n](const ChartPoint&) { return FiberValue(TensorType{1, 1}, n); };
    s.label = "coordinate_vector";
    return s;
  }
  if (name == "random_trig") {
    require_params(spec, 3);
    const int a = static_cast<int>(spec.params[0]);
    const int b = static_cast<int>(spec.params[1]);
    if (a < 0 || b < 0 || a + b > 3) throw ConfigError("params", "random_trig tensor rank must be in [0, 3]");
    return random_trig_section(chart, TensorType{a, b}, static_cast<std::uint64_t>(spec.params[2]));
  }
  throw ConfigError("name", "unknown section builder '" + name + "'");
}

TensorSection random_trig_section(const ManifoldChart& chart, TensorType type, std::uint64_t seed) {
  const int n = chart.dim();
  const std::size_t m = type.fiber_dim(n);
  // Per component: three sine terms, two feeding the real part, one the
  // imaginary part.
  struct Term {
    double amp;
    Vec freq;
    double phase;
    bool imaginary;
  };
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> amp(-1.0, 1.0), phase(0.0, kTwoPi), freq(-1.5, 1.5);
  std::uniform_int_distribution<int> harmonic(-1, 1);
  std::vector<std::vector<Term>> terms(m);
  for (auto& comp : terms)
    for (int t = 0; t < 3; ++t) {
      Term term{amp(rng), Vec(n), phase(rng), t == 2};
      for (int k = 0; k < n; ++k) {
        const auto& period = chart.periods()[static_cast<std::size_t>(k)];
        term.freq[k] = period ? kTwoPi * harmonic(rng) / *period : freq(rng);
      }
      comp.push_back(std::move(term));
    }
  const Complex i_unit(0.0, 1.0);
  TensorSection s;
  s.type = type;
  s.dim = n;
  s.eval = [terms, type, n, i_unit](const ChartPoint& p) {
    FiberValue v(type, n);
    for (std::size_t c = 0; c < terms.size(); ++c)
      for (const Term& t : terms[c]) {
        const double val = t.amp * std::sin(t.freq.dot(p.coords) + t.phase);
        v[c] += t.imaginary ? i_unit * val : Complex(val);
      }
    return v;
  };
  s.partials = [terms, type, n, i_unit](const ChartPoint& p) {
    FiberValue v(TensorType{type.contravariant, type.covariant + 1}, n);
    for (std::size_t c = 0; c < terms.size(); ++c)
      for (const Term& t : terms[c]) {
        const double d = t.amp * std::cos(t.freq.dot(p.coords) + t.phase);
        for (int k = 0; k < n; ++k) {
          const double val = d * t.freq[k];
          v[c * static_cast<std::size_t>(n) + static_cast<std::size_t>(k)] += t.imaginary ? i_unit * val : Complex(val);
        }
      }
    return v;
  };
  s.label = "random_trig";
  return s;
}

DifferentialOperator make_operator(const BuilderSpec& spec, const ManifoldChart& chart, TensorType in_type,
                                   const ChartPoint& x) {
  const int n = chart.dim();
  const std::string& name = spec.name;
  if (name == "identity") {
    require_params(spec, 0);
    return DifferentialOperator::identity(n, in_type);
  }
  if (name == "covariant_derivative") {
    require_params(spec, static_cast<std::size_t>(n));
    const Vec eta = params_vec(spec, 0, n);
    return DifferentialOperator::covariant_derivative_along(n, in_type, [eta](const ChartPoint&) { return eta; });
  }
  if (name == "laplace_beltrami") {
    require_params(spec, 0);
    return DifferentialOperator::laplace_beltrami(chart, in_type);
  }
  if (name == "third_derivative") {
    require_params(spec, 3 * static_cast<std::size_t>(n));
    const OrthonormalFrame frame = orthonormal_frame_at(chart, x);
    const auto leg = [&](std::size_t i) { return frame.to_chart_vector(params_vec(spec, i * n, n)); };
    return DifferentialOperator::third_derivative_along(n, in_type, leg(0), leg(1), leg(2));
  }
  throw ConfigError("name", "unknown operator builder '" + name + "'");
}

}  // namespace rfi::builders
