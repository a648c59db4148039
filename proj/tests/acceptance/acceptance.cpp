// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any
// criterion fails. Expected values come from closed forms written here.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "rfi/builders.hpp"
#include "rfi/inversion.hpp"
#include "rfi/props.hpp"
#include "rfi/report.hpp"
#include "rfi/zoo.hpp"

using namespace rfi;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

ChartPoint pt(double a, double b) {
  Vec c(2);
  c << a, b;
  return ChartPoint{c};
}

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

struct Timed {
  FiberValue value;
  double seconds;
};

Timed timed_invert(const ManifoldChart& m, const DifferentialOperator& a, const TensorSection& u, const ChartPoint& x,
                   int n, int steps, const CutoffWindow& w) {
  const auto t0 = Clock::now();
  const QuadraturePlan plan = QuadraturePlan::make(orthonormal_frame_at(m, x), w, n);
  FiberValue v = invert(m, a, u, x, w, plan, steps);
  return {std::move(v), seconds_since(t0)};
}

const std::vector<double> kThetas = {0.5, 0.9, 1.2, 2.0, 2.6};

// Sphere Laplacian of cos(theta) against -2 cos(theta).
double sphere_lb_rel_error(double theta, int n, int steps, const CutoffWindow* window = nullptr,
                           double* seconds = nullptr, Complex* value = nullptr) {
  const ManifoldChart s = zoo::sphere2(1.0);
  const ChartPoint x = pt(theta, 1.0);
  const TensorSection ct = builders::make_section({"cos_theta", {}, {}}, s);
  const CutoffWindow w = window ? *window : admissible_window(s, x, 1.0);
  const Timed t = timed_invert(s, DifferentialOperator::laplace_beltrami(s, TensorType{}), ct, x, n, steps, w);
  if (seconds) *seconds = t.seconds;
  if (value) *value = t.value[0];
  const double want = -2.0 * std::cos(theta);
  return std::abs(t.value[0] - want) / std::abs(want);
}

Outcome criterion1() {
  const ManifoldChart e = zoo::euclidean(2);
  const double c0 = 0.1, c1 = -0.2, w = 0.7;
  const TensorSection g = builders::make_section({"gaussian_bump", {c0, c1, w}, {}}, e);
  double worst = 0.0, slowest = 0.0;
  for (const ChartPoint& x : {pt(0.0, 0.0), pt(0.3, -0.4), pt(-0.5, 0.2)}) {
    const Timed t = timed_invert(e, DifferentialOperator::identity(2, TensorType{}), g, x, 64, 64,
                                 admissible_window(e, x, 1.0));
    const double dx = x.coords[0] - c0, dy = x.coords[1] - c1;
    worst = std::max(worst, std::abs(t.value[0] - std::exp(-(dx * dx + dy * dy) / (w * w))));
    slowest = std::max(slowest, t.seconds);
  }
  return {worst < 1e-9 && slowest < 1.0, fmt("abs_error %.3e (< 1e-9), slowest point %.3f s (< 1 s)", worst, slowest)};
}

Outcome criterion2() {
  const ManifoldChart t = zoo::flat_torus({1.0, 1.0});
  const TensorSection u = builders::make_section({"sine_wave", {1.0, 0.0}, {}}, t);
  const double eta1 = 1.0;
  const DifferentialOperator d = DifferentialOperator::covariant_derivative_along(
      2, TensorType{}, [eta1](const ChartPoint&) {
        Vec v(2);
        v << eta1, 0.0;
        return v;
      });
  double worst = 0.0, slowest = 0.0;
  // Base points where the oracle is nonzero, so rel_error is well defined.
  for (const ChartPoint& x : {pt(0.0, 0.5), pt(0.1, 0.3), pt(0.4, 0.7)}) {
    const Timed r = timed_invert(t, d, u, x, 64, 64, admissible_window(t, x, 1.0));
    const double want = kTwoPi * std::cos(kTwoPi * x.coords[0]) * eta1;
    worst = std::max(worst, std::abs(r.value[0] - want) / std::abs(want));
    slowest = std::max(slowest, r.seconds);
  }
  return {worst < 1e-6 && slowest < 2.0,
          fmt("rel_error %.3e (< 1e-6) at N=64 steps=64, slowest point %.3f s (< 2 s)", worst, slowest)};
}

Outcome criterion3() {
  double worst = 0.0, slowest = 0.0;
  std::string per;
  for (double th : kThetas) {
    double sec = 0.0;
    const double rel = sphere_lb_rel_error(th, 64, 256, nullptr, &sec);
    worst = std::max(worst, rel);
    slowest = std::max(slowest, sec);
    per += fmt(" %.2f:%.2e", th, rel);
  }
  return {worst < 1e-3 && slowest < 30.0,
          fmt("max rel_error %.3e (< 1e-3), slowest %.2f s (< 30 s); theta:rel%s", worst, slowest, per.c_str())};
}

Outcome criterion4() {
  const double th = kPi / 3;
  std::vector<double> err;
  for (int n : {32, 64, 128}) err.push_back(sphere_lb_rel_error(th, n, 1024) * 2.0 * std::cos(th));
  // Integrator floor at N = 128: change of the result when steps halve.
  Complex v1024, v512;
  sphere_lb_rel_error(th, 128, 1024, nullptr, nullptr, &v1024);
  sphere_lb_rel_error(th, 128, 512, nullptr, nullptr, &v512);
  const double floor = std::abs(v1024 - v512);
  bool n_ok = true;
  std::string ratios;
  for (std::size_t i = 0; i + 1 < err.size(); ++i) {
    const double ratio = err[i] / err[i + 1];
    ratios += fmt(" %.1f", ratio);
    if (!(ratio > 10.0) && err[i + 1] > 10.0 * floor) n_ok = false;
  }
  const std::vector<int> steps = {8, 16, 32, 64};
  std::vector<double> serr;
  for (int s : steps) serr.push_back(sphere_lb_rel_error(th, 128, s) * 2.0 * std::cos(th));
  double min_order = 1e300;
  std::string orders;
  for (std::size_t i = 0; i + 1 < serr.size(); ++i) {
    const double order = std::log2(serr[i] / serr[i + 1]);
    min_order = std::min(min_order, order);
    orders += fmt(" %.2f", order);
  }
  const bool s_ok = min_order >= 3.5;
  return {n_ok && s_ok,
          fmt("N sweep errors %.2e %.2e %.2e ratios%s (need > 10 above floor %.1e): %s; steps sweep at N=128 "
              "errors %.3e..%.3e orders%s (need >= 3.5): %s",
              err[0], err[1], err[2], ratios.c_str(), floor, n_ok ? "ok" : "not met", serr.front(), serr.back(),
              orders.c_str(), s_ok ? "ok" : "not met")};
}

// Runs one property check on every zoo manifold.
Outcome zoo_check(const std::function<props::CheckResult(const props::ZooEntry&, props::Sampler&)>& check,
                  std::uint64_t check_id) {
  const auto zoo = props::property_zoo();
  int failures = 0, samples = 0;
  double worst = 0.0, tol = 0.0;
  std::string name;
  for (std::size_t i = 0; i < zoo.size(); ++i) {
    props::Sampler s(1, i, 100 + check_id);
    const props::CheckResult r = check(zoo[i], s);
    failures += r.failures;
    samples += r.samples;
    worst = std::max(worst, r.worst);
    tol = r.tolerance;
    name = r.name;
  }
  return {failures == 0, fmt("%s: %d samples over %zu manifolds, %d failures, worst %.3e (tol %.0e)", name.c_str(),
                             samples, zoo.size(), failures, worst, tol)};
}

Outcome merge(const std::vector<Outcome>& parts) {
  Outcome o{true, ""};
  for (const auto& p : parts) {
    o.pass = o.pass && p.pass;
    o.detail += (o.detail.empty() ? "" : "; ") + p.detail;
  }
  return o;
}

Outcome criterion5() {
  return zoo_check([](const props::ZooEntry& m, props::Sampler& s) { return props::check_semigroup(m, s, 50, 512); }, 5);
}

Outcome criterion6() {
  return merge({zoo_check([](const props::ZooEntry& m, props::Sampler& s) { return props::check_exp_derivative(m, s, 1, 20); }, 61),
                zoo_check([](const props::ZooEntry& m, props::Sampler& s) { return props::check_exp_derivative(m, s, 2, 20); }, 62)});
}

Outcome criterion7() {
  std::vector<Outcome> parts;
  std::uint64_t id = 70;
  for (TensorType t : {TensorType{0, 0}, TensorType{1, 0}, TensorType{0, 1}, TensorType{1, 1}, TensorType{0, 2}})
    parts.push_back(zoo_check(
        [t](const props::ZooEntry& m, props::Sampler& s) { return props::check_transport_isometry(m, s, t, 20); }, id++));
  const double hol = props::sphere_holonomy_residual(256);
  parts.push_back({hol < 1e-3, fmt("octant holonomy residual %.3e (< 1e-3)", hol)});
  return merge(parts);
}

Outcome criterion8() {
  const ManifoldChart s = zoo::sphere2(1.0);
  bool ok = true;
  std::string per;
  for (double th : kThetas) {
    const ChartPoint x = pt(th, 1.0);
    const CutoffWindow a = admissible_window(s, x, 1.0);
    const CutoffWindow b = admissible_window(s, x, 0.8 * a.epsilon, CutoffProfile(1.0));
    const double ea = sphere_lb_rel_error(th, 64, 256, &a) * 2.0 * std::abs(std::cos(th));
    const double eb = sphere_lb_rel_error(th, 64, 256, &b) * 2.0 * std::abs(std::cos(th));
    const TensorSection ct = builders::make_section({"cos_theta", {}, {}}, s);
    const double diff = chi_independence_check(s, DifferentialOperator::laplace_beltrami(s, TensorType{}), ct, x, a, b, 64, 256);
    ok = ok && diff < 2.0 * std::max(ea, eb);
    per += fmt(" [theta %.2f eps %.3f/%.3f: diff %.2e, errors %.2e %.2e]", th, a.epsilon, b.epsilon, diff, ea, eb);
  }
  return {ok, "residual < 2 x max oracle error at every point:" + per};
}

Outcome criterion9() {
  const report::RunConfig cfg = report::load_config(std::string(RFI_SOURCE_DIR) + "/configs/breakdown.json");
  const auto rows = report::run_breakdown_demo(cfg);
  double flat = 1e300, sphere_min = 1e300, control = 0.0;
  int flat_n = 0;
  std::string sphere_series;
  for (const auto& r : rows) {
    if (r.status != "ok") return {false, r.experiment + ": " + r.status};
    if (r.experiment == "torus-third-order" && r.nodes_per_axis > flat_n) {
      flat_n = r.nodes_per_axis;
      flat = r.abs_error;
    }
    if (r.experiment == "sphere-third-order") {
      sphere_min = std::min(sphere_min, r.abs_error);
      sphere_series += fmt(" N=%d:%.4f", r.nodes_per_axis, r.abs_error);
    }
    if (r.experiment == "sphere-second-order") control = std::max(control, r.rel_error);
  }
  const bool ok = flat < 1e-6 && sphere_min > 1e-2 && control < 1e-3;
  return {ok, fmt("flat discrepancy %.3e at N=%d (< 1e-6); sphere discrepancy%s (> 1e-2); p=2 control rel %.3e (< 1e-3)",
                  flat, flat_n, sphere_series.c_str(), control)};
}

Outcome criterion10() {
  const report::RunConfig cfg = report::load_config(std::string(RFI_SOURCE_DIR) + "/configs/verify.json");
  auto csv = [&](int workers) {
    set_worker_count(workers);
    std::ostringstream os;
    report::write_rows_csv(os, report::run_verify(cfg));
    return os.str();
  };
  const std::string a = csv(1), b = csv(1), c = csv(3);
  set_worker_count(0);
  return {a == b && b == c && !a.empty(),
          fmt("verify CSV %zu bytes; repeat run %s, 1 vs 3 workers %s", a.size(), a == b ? "identical" : "differs",
              a == c ? "identical" : "differs")};
}

}  // namespace

int main() {
  const std::vector<std::pair<int, Outcome (*)()>> criteria = {
      {1, criterion1}, {2, criterion2}, {3, criterion3}, {4, criterion4}, {5, criterion5},
      {6, criterion6}, {7, criterion7}, {8, criterion8}, {9, criterion9}, {10, criterion10},
  };
  int failed = 0;
  for (const auto& [id, fn] : criteria) {
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    failed += o.pass ? 0 : 1;
    std::printf("criterion %d: %s: %s\n", id, o.pass ? "PASS" : "FAIL", o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
