#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

#include "doctest.h"
#include "rfi/builders.hpp"
#include "rfi/errors.hpp"
#include "rfi/inversion.hpp"
#include "rfi/report.hpp"
#include "rfi/zoo.hpp"

using namespace rfi;
using namespace rfi::report;

namespace {

std::string config_error_path(const std::string& text) {
  try {
    parse_config(text);
  } catch (const ConfigError& e) {
    return e.path();
  }
  FAIL("expected a ConfigError");
  return {};
}

// One experiment object, with `extra` spliced into it.
std::string one(const std::string& extra, const std::string& plan = R"({"N": 16, "steps": 16})") {
  return R"({"experiments": [{"id": "a", "manifold": {"name": "euclidean", "params": [2]},
      "operator": {"name": "identity"}, "section": {"name": "gaussian_bump", "params": [0, 0, 0.5]},
      "base_points": [[0.1, 0.2]], "plan": )" +
         plan + extra + "}]}";
}

const char* kSmall = R"({
  "tolerance": 1e-9,
  "seed": 3,
  "experiments": [
    {"id": "flat", "manifold": {"name": "euclidean", "params": [2]}, "operator": {"name": "identity"},
     "section": {"name": "gaussian_bump", "params": [0.1, -0.2, 0.7]},
     "base_points": [[0.0, 0.0], [0.3, -0.4]], "plan": {"N": 32, "steps": 16}},
    {"id": "sphere-lb", "manifold": {"name": "sphere2", "params": [1.0]}, "operator": {"name": "laplace_beltrami"},
     "section": {"name": "cos_theta"}, "base_points": [[1.0, 0.5]], "plan": {"N": 32, "steps": 32},
     "tolerance": 1e-1, "sweeps": {"N": [16, 32], "steps": [16, 32]}},
    {"id": "order3", "manifold": {"name": "sphere2", "params": [1.0]},
     "operator": {"name": "third_derivative", "params": [1, 0, 0, 1, 1, 0]},
     "section": {"name": "sin_cos"}, "base_points": [[1.2, 0.4]], "plan": {"N": 16, "steps": 16}}
  ]
})";

std::string csv_of(const std::vector<ReportRow>& rows) {
  std::ostringstream os;
  write_rows_csv(os, rows);
  return os.str();
}

struct WorkerGuard {
  ~WorkerGuard() { set_worker_count(0); }
};

}  // namespace

TEST_CASE("config parsing and field paths") {
  const RunConfig cfg = parse_config(kSmall);
  CHECK(cfg.experiments.size() == 3);
  CHECK(cfg.tolerance == 1e-9);
  CHECK(cfg.seed == 3);
  CHECK(cfg.experiments[1].tolerance.value() == 1e-1);
  CHECK(cfg.experiments[1].sweeps.nodes_per_axis == std::vector<int>{16, 32});
  CHECK(cfg.experiments[0].plan.h_fd == 1e-5);

  CHECK(config_error_path(one("", R"({"N": 15, "steps": 16})")) == "experiments[0].plan.N");
  CHECK(config_error_path(one("", R"({"N": 16, "steps": 4})")) == "experiments[0].plan.steps");
  CHECK(config_error_path(one("", R"({"N": 16, "steps": 16, "Nx": 3})")) == "experiments[0].plan.Nx");
  CHECK(config_error_path(one(R"(, "colour": 1)")) == "experiments[0].colour");
  CHECK(config_error_path(one(R"(, "expect": "maybe")")) == "experiments[0].expect");
  CHECK(config_error_path(R"({"experiments": [{"id": "a", "manifold": {"name": "euclidean", "params": [2]},
      "operator": {"name": "curl"}, "section": {"name": "zero"}, "base_points": [[0, 0]],
      "plan": {"N": 16, "steps": 16}}]})") == "experiments[0].operator.name");
  CHECK(config_error_path(R"({"experiments": [{"id": "a", "manifold": {"name": "euclidean", "params": [2]},
      "operator": {"name": "identity"}, "section": {"name": "constant", "params": []}, "base_points": [[0, 0]],
      "plan": {"N": 16, "steps": 16}}]})") == "experiments[0].section.params");
  CHECK(config_error_path(R"({"experiments": [{"id": "a", "manifold": {"name": "mobius"},
      "operator": {"name": "identity"}, "section": {"name": "zero"}, "base_points": [[0, 0]],
      "plan": {"N": 16, "steps": 16}}]})") == "experiments[0].manifold");
  CHECK(config_error_path(one("", R"({"N": 16, "steps": 16})").replace(0, 1, "{\"seed\": -1, ")) == "seed");
  CHECK(config_error_path("{not json") == "$");

  const std::string dup = R"({"experiments": [)" + one("").substr(17, one("").size() - 19) + "," +
                          one("").substr(17, one("").size() - 19) + "]}";
  CHECK(config_error_path(dup) == "experiments[1].id");
  CHECK_THROWS_AS(load_config("/nonexistent/config.json"), ConfigError);
}

TEST_CASE("verify rows, refusal of order three, CSV round trip") {
  const RunConfig cfg = parse_config(kSmall);
  const std::vector<ReportRow> rows = run_verify(cfg);
  REQUIRE(rows.size() == 4);
  CHECK(rows[0].experiment == "flat");
  CHECK(rows[0].rel_error < 1e-9);
  CHECK_FALSE(rows[0].violation);
  CHECK(rows[2].experiment == "sphere-lb");
  CHECK(rows[2].nodes_per_axis == 32);
  CHECK(rows[3].status.rfind("OrderTooHigh", 0) == 0);
  CHECK(rows[3].violation);
  CHECK(rows[0].abs_error == row_abs_error(rows[0].inverted, rows[0].direct));

  const std::string csv = csv_of(rows);
  CHECK(csv.find("\r\n") != std::string::npos);
  CHECK(csv.find("\"(0.29999999999999999, -0.40000000000000002)\"") != std::string::npos);
  CHECK(check_csv_consistency(csv) == 0);

  const auto table = parse_csv(csv);
  REQUIRE(table.size() == 5);
  const auto& header = table[0];
  const auto col = [&](const std::string& name) {
    return static_cast<std::size_t>(std::find(header.begin(), header.end(), name) - header.begin());
  };
  CHECK(table[3][col("x")] == "(1, 0.5)");
  CHECK(std::strtod(table[3][col("inv_re_0")].c_str(), nullptr) == rows[2].inverted[0].real());
  CHECK(std::strtod(table[3][col("dir_re_0")].c_str(), nullptr) == rows[2].direct[0].real());
  CHECK(std::strtod(table[3][col("abs_error")].c_str(), nullptr) == rows[2].abs_error);

  // Tampered abs_error is caught on reload.
  std::string bad = csv;
  const std::string stored = format_double(rows[0].abs_error);
  bad.replace(bad.find(stored), stored.size(), "0.5");
  CHECK(check_csv_consistency(bad) == 1);
}

TEST_CASE("RFC 4180 quoting round trip") {
  const std::string text = "a,b\r\n\"x, \"\"y\"\"\",\"line\r\nbreak\"\r\n";
  const auto t = parse_csv(text);
  REQUIRE(t.size() == 2);
  CHECK(t[1][0] == "x, \"y\"");
  CHECK(t[1][1] == "line\r\nbreak");
  CHECK(format_double(0.1) == "0.10000000000000001");
  CHECK(std::strtod(format_double(1.0 / 3.0).c_str(), nullptr) == 1.0 / 3.0);
}

TEST_CASE("reports are byte-identical across runs and worker counts") {
  WorkerGuard guard;
  const RunConfig cfg = parse_config(kSmall);
  set_worker_count(1);
  const std::string a = csv_of(run_verify(cfg));
  set_worker_count(3);
  const std::string b = csv_of(run_verify(cfg));
  const std::string c = csv_of(run_verify(cfg));
  CHECK(a == b);
  CHECK(b == c);
}

TEST_CASE("convergence sweeps and observed orders") {
  const RunConfig cfg = parse_config(kSmall);
  RunConfig only;
  only.experiments = {cfg.experiments[1]};
  const std::vector<ReportRow> rows = run_convergence(only);
  // (16, 32) x steps 32 and N 32 x (16, 32), the nominal row shared.
  REQUIRE(rows.size() == 3);
  std::set<std::pair<int, int>> seen;
  for (const auto& r : rows) seen.insert({r.nodes_per_axis, r.steps});
  CHECK(seen == std::set<std::pair<int, int>>{{16, 32}, {32, 16}, {32, 32}});
  for (std::size_t i = 0; i + 1 < rows.size(); ++i)
    CHECK(std::make_pair(rows[i].nodes_per_axis, rows[i].steps) < std::make_pair(rows[i + 1].nodes_per_axis, rows[i + 1].steps));
  const auto orders = convergence_orders(rows, only);
  REQUIRE(orders.size() == 2);
  CHECK(orders[0].knob == "N");
  CHECK(orders[0].ratio == doctest::Approx(rows[0].abs_error / rows[2].abs_error));
  CHECK(rows_summary_json("converge", rows, orders).find("\"orders\"") != std::string::npos);
}

TEST_CASE("breakdown demo with a flat control") {
  const char* text = R"({"gap_threshold": 1e-2, "experiments": [
    {"id": "flat", "manifold": {"name": "flat_torus", "params": [6.283185307179586, 6.283185307179586]},
     "operator": {"name": "third_derivative", "params": [1, 0, 0, 1, 1, 0]}, "section": {"name": "sin_cos"},
     "base_points": [[1.2, 0.4]], "plan": {"N": 32, "steps": 16}, "tolerance": 1.0, "expect": "vanish"},
    {"id": "curved", "manifold": {"name": "sphere2", "params": [1.0]},
     "operator": {"name": "third_derivative", "params": [1, 0, 0, 1, 1, 0]}, "section": {"name": "sin_cos"},
     "base_points": [[1.2, 0.4]], "plan": {"N": 32, "steps": 64}, "expect": "persist"}]})";
  const RunConfig cfg = parse_config(text);
  const auto rows = run_breakdown_demo(cfg);
  REQUIRE(rows.size() == 2);
  CHECK(rows[0].status == "ok");
  CHECK(rows[0].expected_gap.value() < 1e-6);
  CHECK(rows[1].expected_gap.value() > 1e-2);
  CHECK(rows[1].abs_error > 1e-2);
  CHECK_FALSE(rows[1].violation);
}

TEST_CASE("property suite is seed-reproducible and catches faults") {
  props::SuiteOptions o;
  o.seed = 42;
  o.semigroup_samples = 2;
  o.derivative_samples = 1;
  o.transport_samples = 2;
  o.generic_samples = 1;
  o.inversion_samples = 0;
  const auto a = props::run_property_suite(o);
  const auto b = props::run_property_suite(o);
  CHECK(property_summary_json(a) == property_summary_json(b));
  CHECK(a.total_failures() == 0);

  o.inject_fault = true;
  const auto f = props::run_property_suite(o);
  int compat = 0;
  for (const auto& c : f.checks)
    if (c.name == "metric_compatibility") compat += c.failures;
  CHECK(compat > 0);
  CHECK(f.fault_injected);
}

TEST_CASE("builders") {
  const ManifoldChart t = zoo::flat_torus({1.0, 2.0});
  CHECK_THROWS_AS(builders::make_section({"spiral", {}, {}}, t), ConfigError);
  CHECK_THROWS_AS(builders::make_section({"gaussian_bump", {0.0, 0.0, -1.0}, {}}, t), ConfigError);
  CHECK_THROWS_AS(builders::make_operator({"curl", {}, {}}, t, TensorType{}, ChartPoint{Vec::Zero(2)}), ConfigError);

  // Random sections on tori are periodic.
  const TensorSection u = builders::random_trig_section(t, TensorType{1, 1}, 77);
  Vec p(2), q(2);
  p << 0.3, 0.7;
  q << 1.3, -1.3;
  CHECK(max_abs_difference(u.eval(ChartPoint{p}), u.eval(ChartPoint{q})) < 1e-12);
  const TensorSection v = builders::random_trig_section(t, TensorType{1, 1}, 77);
  CHECK(max_abs_difference(u.eval(ChartPoint{p}), v.eval(ChartPoint{p})) == 0.0);

  // Closed-form partials agree with central differences.
  const double h = 1e-6;
  const FiberValue d = u.partials(ChartPoint{p});
  for (int k = 0; k < 2; ++k) {
    Vec e = Vec::Zero(2);
    e[k] = h;
    const FiberValue fd = (1.0 / (2 * h)) * (u.eval(ChartPoint{p + e}) - u.eval(ChartPoint{p - e}));
    for (std::size_t i = 0; i < fd.size(); ++i) CHECK(std::abs(d[i * 2 + static_cast<std::size_t>(k)] - fd[i]) < 1e-7);
  }
}
