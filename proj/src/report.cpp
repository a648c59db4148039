#include "rfi/report.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <ostream>
#include <set>
#include <sstream>

#include "json.hpp"
#include "rfi/errors.hpp"
#include "rfi/inversion.hpp"
#include "rfi/zoo.hpp"

namespace rfi::report {

using nlohmann::json;

// --- config -----------------------------------------------------------------

namespace {

std::string join(const std::string& path, const std::string& key) { return path.empty() ? key : path + "." + key; }
std::string index_path(const std::string& path, std::size_t i) { return path + "[" + std::to_string(i) + "]"; }

void require_keys(const json& obj, const std::string& path, std::initializer_list<const char*> allowed) {
  if (!obj.is_object()) throw ConfigError(path.empty() ? "$" : path, "expected an object");
  for (const auto& item : obj.items()) {
    bool known = false;
    for (const char* k : allowed) known = known || item.key() == k;
    if (!known) throw ConfigError(join(path, item.key()), "unknown field");
  }
}

const json& field(const json& obj, const std::string& path, const char* key) {
  const auto it = obj.find(key);
  if (it == obj.end()) throw ConfigError(join(path, key), "missing required field");
  return *it;
}

double as_number(const json& v, const std::string& path) {
  if (!v.is_number()) throw ConfigError(path, "expected a number");
  return v.get<double>();
}

int as_int(const json& v, const std::string& path) {
  if (!v.is_number_integer()) throw ConfigError(path, "expected an integer");
  return v.get<int>();
}

std::string as_string(const json& v, const std::string& path) {
  if (!v.is_string()) throw ConfigError(path, "expected a string");
  return v.get<std::string>();
}

std::vector<double> as_numbers(const json& v, const std::string& path) {
  if (!v.is_array()) throw ConfigError(path, "expected an array of numbers");
  std::vector<double> out;
  for (std::size_t i = 0; i < v.size(); ++i) out.push_back(as_number(v[i], index_path(path, i)));
  return out;
}

void require_even_n(int n, const std::string& path) {
  if (n < 4 || n % 2 != 0) throw ConfigError(path, "N must be even and at least 4");
}

void require_steps(int steps, const std::string& path) {
  if (steps < kMinGeodesicSteps) throw ConfigError(path, "steps must be at least 8");
}

builders::BuilderSpec parse_builder(const json& obj, const std::string& path) {
  require_keys(obj, path, {"name", "params", "variant"});
  builders::BuilderSpec spec;
  spec.name = as_string(field(obj, path, "name"), join(path, "name"));
  if (obj.contains("params")) spec.params = as_numbers(obj["params"], join(path, "params"));
  if (obj.contains("variant")) spec.variant = as_string(obj["variant"], join(path, "variant"));
  return spec;
}

PlanConfig parse_plan(const json& obj, const std::string& path) {
  require_keys(obj, path, {"N", "steps", "epsilon_cap", "h_fd", "sharpness"});
  PlanConfig plan;
  if (obj.contains("N")) plan.nodes_per_axis = as_int(obj["N"], join(path, "N"));
  if (obj.contains("steps")) plan.steps = as_int(obj["steps"], join(path, "steps"));
  if (obj.contains("epsilon_cap")) plan.epsilon_cap = as_number(obj["epsilon_cap"], join(path, "epsilon_cap"));
  if (obj.contains("h_fd")) plan.h_fd = as_number(obj["h_fd"], join(path, "h_fd"));
  if (obj.contains("sharpness")) plan.sharpness = as_number(obj["sharpness"], join(path, "sharpness"));
  require_even_n(plan.nodes_per_axis, join(path, "N"));
  require_steps(plan.steps, join(path, "steps"));
  if (!(plan.epsilon_cap > 0.0)) throw ConfigError(join(path, "epsilon_cap"), "must be positive");
  if (!(plan.h_fd > 0.0)) throw ConfigError(join(path, "h_fd"), "must be positive");
  if (!(plan.sharpness > 0.0)) throw ConfigError(join(path, "sharpness"), "must be positive");
  return plan;
}

SweepConfig parse_sweeps(const json& obj, const std::string& path) {
  require_keys(obj, path, {"N", "steps"});
  SweepConfig s;
  for (const char* key : {"N", "steps"}) {
    if (!obj.contains(key)) continue;
    const std::string p = join(path, key);
    if (!obj[key].is_array()) throw ConfigError(p, "expected an array of integers");
    const bool is_n = std::string(key) == "N";
    auto& dest = is_n ? s.nodes_per_axis : s.steps;
    for (std::size_t i = 0; i < obj[key].size(); ++i) {
      const int v = as_int(obj[key][i], index_path(p, i));
      if (is_n)
        require_even_n(v, index_path(p, i));
      else
        require_steps(v, index_path(p, i));
      dest.push_back(v);
    }
  }
  return s;
}

// Builds every named object once so unknown names and bad parameters surface
// as config errors rather than per-row failures.
void validate_builders(const ExperimentConfig& e, const std::string& path) {
  ManifoldChart chart = [&] {
    try {
      return zoo::by_name(e.manifold.name, e.manifold.params, e.manifold.variant);
    } catch (const Error& err) {
      throw ConfigError(join(path, "manifold"), err.what());
    }
  }();
  for (std::size_t i = 0; i < e.base_points.size(); ++i)
    if (e.base_points[i].size() != chart.dim())
      throw ConfigError(index_path(join(path, "base_points"), i), "dimension differs from the manifold");
  TensorSection u;
  try {
    u = builders::make_section(e.section, chart);
  } catch (const ConfigError& err) {
    throw ConfigError(join(join(path, "section"), err.path()), err.what());
  }
  try {
    (void)builders::make_operator(e.op, chart, u.type, ChartPoint{e.base_points.front()});
  } catch (const ConfigError& err) {
    throw ConfigError(join(join(path, "operator"), err.path()), err.what());
  } catch (const Error&) {
    // Frame construction at an invalid point is a per-row failure.
  }
}

ExperimentConfig parse_experiment(const json& obj, const std::string& path) {
  require_keys(obj, path,
               {"id", "manifold", "operator", "section", "base_points", "plan", "sweeps", "tolerance", "expect"});
  ExperimentConfig e;
  e.id = as_string(field(obj, path, "id"), join(path, "id"));
  e.manifold = parse_builder(field(obj, path, "manifold"), join(path, "manifold"));
  e.op = parse_builder(field(obj, path, "operator"), join(path, "operator"));
  e.section = parse_builder(field(obj, path, "section"), join(path, "section"));
  const json& pts = field(obj, path, "base_points");
  const std::string pts_path = join(path, "base_points");
  if (!pts.is_array() || pts.empty()) throw ConfigError(pts_path, "expected a non-empty array of points");
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const std::vector<double> c = as_numbers(pts[i], index_path(pts_path, i));
    if (c.empty() || c.size() > static_cast<std::size_t>(kMaxDim))
      throw ConfigError(index_path(pts_path, i), "point dimension out of range");
    e.base_points.push_back(Eigen::Map<const Eigen::VectorXd>(c.data(), static_cast<Eigen::Index>(c.size())));
  }
  if (obj.contains("plan")) e.plan = parse_plan(obj["plan"], join(path, "plan"));
  if (obj.contains("sweeps")) e.sweeps = parse_sweeps(obj["sweeps"], join(path, "sweeps"));
  if (obj.contains("tolerance")) e.tolerance = as_number(obj["tolerance"], join(path, "tolerance"));
  if (obj.contains("expect")) {
    const std::string v = as_string(obj["expect"], join(path, "expect"));
    if (v == "agree") e.expect = Expectation::agree;
    else if (v == "vanish") e.expect = Expectation::vanish;
    else if (v == "persist") e.expect = Expectation::persist;
    else if (v == "refuse") e.expect = Expectation::refuse;
    else throw ConfigError(join(path, "expect"), "expected one of agree, vanish, persist, refuse");
  }
  validate_builders(e, path);
  return e;
}

}  // namespace

RunConfig parse_config(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& err) {
    throw ConfigError("$", std::string("invalid JSON: ") + err.what());
  }
  require_keys(root, "", {"experiments", "tolerance", "gap_threshold", "seed", "inject_fault"});
  RunConfig cfg;
  if (root.contains("tolerance")) cfg.tolerance = as_number(root["tolerance"], "tolerance");
  if (root.contains("gap_threshold")) cfg.gap_threshold = as_number(root["gap_threshold"], "gap_threshold");
  if (root.contains("seed")) {
    if (!root["seed"].is_number_unsigned()) throw ConfigError("seed", "expected a nonnegative integer");
    cfg.seed = root["seed"].get<std::uint64_t>();
  }
  if (root.contains("inject_fault")) {
    if (!root["inject_fault"].is_boolean()) throw ConfigError("inject_fault", "expected true or false");
    cfg.inject_fault = root["inject_fault"].get<bool>();
  }
  if (root.contains("experiments")) {
    const json& list = root["experiments"];
    if (!list.is_array()) throw ConfigError("experiments", "expected an array");
    std::set<std::string> ids;
    for (std::size_t i = 0; i < list.size(); ++i) {
      const std::string path = index_path("experiments", i);
      cfg.experiments.push_back(parse_experiment(list[i], path));
      if (!ids.insert(cfg.experiments.back().id).second) throw ConfigError(join(path, "id"), "duplicate experiment id");
    }
  }
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("$", "cannot read config file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

// --- running ------------------------------------------------------------------

double row_abs_error(const std::vector<Complex>& inverted, const std::vector<Complex>& direct) {
  if (inverted.size() != direct.size()) return std::numeric_limits<double>::quiet_NaN();
  double worst = 0.0;
  for (std::size_t k = 0; k < inverted.size(); ++k) worst = std::max(worst, std::abs(inverted[k] - direct[k]));
  return worst;
}

double row_rel_error(double abs_error, const std::vector<Complex>& direct) {
  double scale = 0.0;
  for (const Complex& v : direct) scale = std::max(scale, std::abs(v));
  return scale > 0.0 ? abs_error / scale : abs_error;
}

namespace {

std::vector<Complex> to_vector(const FiberValue& v) { return {v.comps().begin(), v.comps().end()}; }

struct Context {
  const ExperimentConfig& exp;
  ManifoldChart chart;
  TensorSection section;
};

Context make_context(const ExperimentConfig& e) {
  ManifoldChart chart = zoo::by_name(e.manifold.name, e.manifold.params, e.manifold.variant);
  TensorSection u = builders::make_section(e.section, chart);
  return Context{e, std::move(chart), std::move(u)};
}

InversionConfig inversion_config(const PlanConfig& plan, int n, int steps, bool allow_high_order) {
  InversionConfig c;
  c.nodes_per_axis = n;
  c.steps = steps;
  c.epsilon_cap = plan.epsilon_cap;
  c.profile = CutoffProfile(plan.sharpness);
  c.derivatives.h_fd = plan.h_fd;
  c.options.allow_order_above_two = allow_high_order;
  return c;
}

double tolerance_for(const ExperimentConfig& e, const RunConfig& cfg) { return e.tolerance.value_or(cfg.tolerance); }

void judge(ReportRow& row, const ExperimentConfig& e, const RunConfig& cfg) {
  if (e.expect == Expectation::refuse) {
    row.violation = row.status.rfind(std::string(to_string(ErrorCode::OrderTooHigh)), 0) != 0;
    return;
  }
  if (row.status != "ok") {
    row.violation = true;
    return;
  }
  switch (e.expect) {
    case Expectation::agree: row.violation = !(row.rel_error <= tolerance_for(e, cfg)); break;
    case Expectation::vanish: row.violation = !(row.abs_error <= tolerance_for(e, cfg)); break;
    case Expectation::persist: row.violation = !(row.abs_error >= cfg.gap_threshold); break;
    case Expectation::refuse: break;
  }
}

// One inversion plus (cached) direct application at base point `xi`.
ReportRow evaluate(const Context& ctx, std::size_t xi, int n, int steps, bool allow_high_order,
                   std::optional<std::vector<Complex>>& direct_cache) {
  const ExperimentConfig& e = ctx.exp;
  ReportRow row;
  row.experiment = e.id;
  row.x_index = xi;
  row.x = e.base_points[xi];
  row.nodes_per_axis = n;
  row.steps = steps;
  const ChartPoint x{row.x};
  const InversionConfig ic = inversion_config(e.plan, n, steps, allow_high_order);
  try {
    const DifferentialOperator op = builders::make_operator(e.op, ctx.chart, ctx.section.type, x);
    const auto start = std::chrono::steady_clock::now();
    row.inverted = to_vector(invert_at(ctx.chart, op, ctx.section, x, ic));
    row.wall_time_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    if (!direct_cache) direct_cache = to_vector(direct_apply(ctx.chart, op, ctx.section, x, ic.derivatives));
    row.direct = *direct_cache;
    row.abs_error = row_abs_error(row.inverted, row.direct);
    row.rel_error = row_rel_error(row.abs_error, row.direct);
  } catch (const Error& err) {
    row.status = err.what();
    row.inverted.clear();
    row.direct.clear();
  }
  return row;
}

std::vector<int> or_default(const std::vector<int>& values, int fallback) {
  return values.empty() ? std::vector<int>{fallback} : values;
}

}  // namespace

std::vector<ReportRow> run_verify(const RunConfig& cfg) {
  std::vector<ReportRow> rows;
  for (const auto& e : cfg.experiments) {
    const Context ctx = make_context(e);
    for (std::size_t xi = 0; xi < e.base_points.size(); ++xi) {
      std::optional<std::vector<Complex>> direct;
      ReportRow row = evaluate(ctx, xi, e.plan.nodes_per_axis, e.plan.steps, false, direct);
      judge(row, e, cfg);
      rows.push_back(std::move(row));
    }
  }
  sort_rows(rows, cfg);
  return rows;
}

std::vector<ReportRow> run_convergence(const RunConfig& cfg) {
  std::vector<ReportRow> rows;
  for (const auto& e : cfg.experiments) {
    const Context ctx = make_context(e);
    std::set<std::pair<int, int>> settings;
    for (int n : or_default(e.sweeps.nodes_per_axis, e.plan.nodes_per_axis)) settings.insert({n, e.plan.steps});
    for (int s : or_default(e.sweeps.steps, e.plan.steps)) settings.insert({e.plan.nodes_per_axis, s});
    for (std::size_t xi = 0; xi < e.base_points.size(); ++xi) {
      std::optional<std::vector<Complex>> direct;
      for (const auto& [n, s] : settings) {
        ReportRow row = evaluate(ctx, xi, n, s, false, direct);
        // Only the nominal plan is held to the tolerance; the sweep is data.
        if (n == e.plan.nodes_per_axis && s == e.plan.steps)
          judge(row, e, cfg);
        else
          row.violation = row.status != "ok";
        rows.push_back(std::move(row));
      }
    }
  }
  sort_rows(rows, cfg);
  return rows;
}

std::vector<ReportRow> run_breakdown_demo(const RunConfig& cfg) {
  std::vector<ReportRow> rows;
  for (const auto& e : cfg.experiments) {
    const Context ctx = make_context(e);
    const int n = ctx.chart.dim();
    for (std::size_t xi = 0; xi < e.base_points.size(); ++xi) {
      std::optional<std::vector<Complex>> direct;
      std::optional<double> gap;
      if (e.op.name == "third_derivative" && e.op.params.size() == 3 * static_cast<std::size_t>(n)) {
        try {
          const ChartPoint x{e.base_points[xi]};
          const OrthonormalFrame frame = orthonormal_frame_at(ctx.chart, x);
          std::vector<Vec> etas;
          for (int k = 0; k < 3; ++k) {
            Vec c(n);
            for (int i = 0; i < n; ++i) c[i] = e.op.params[static_cast<std::size_t>(k * n + i)];
            etas.push_back(frame.to_chart_vector(c));
          }
          DerivativeConfig dc;
          dc.h_fd = e.plan.h_fd;
          const FiberValue d3 = nth_covariant_derivative(ctx.chart, ctx.section, x, 3, dc);
          gap = max_abs_difference(contract_derivative(d3, etas), symmetrize_derivative(d3, etas));
        } catch (const Error&) {
          gap.reset();
        }
      }
      const std::vector<int> sweep = or_default(e.sweeps.nodes_per_axis, e.plan.nodes_per_axis);
      const int finest = *std::max_element(sweep.begin(), sweep.end());
      for (int nodes : sweep) {
        ReportRow row = evaluate(ctx, xi, nodes, e.plan.steps, true, direct);
        row.expected_gap = gap;
        // A vanishing discrepancy is a quadrature error: only the finest grid
        // is held to the tolerance. A persisting one must show on every grid.
        if (e.expect != Expectation::vanish || nodes == finest)
          judge(row, e, cfg);
        else
          row.violation = row.status != "ok";
        rows.push_back(std::move(row));
      }
    }
  }
  sort_rows(rows, cfg);
  return rows;
}

props::PropertySummary run_property_suite(const RunConfig& cfg) {
  props::SuiteOptions options;
  options.seed = cfg.seed;
  options.inject_fault = cfg.inject_fault;
  return props::run_property_suite(options);
}

void sort_rows(std::vector<ReportRow>& rows, const RunConfig& cfg) {
  std::map<std::string, std::size_t> order;
  for (std::size_t i = 0; i < cfg.experiments.size(); ++i) order[cfg.experiments[i].id] = i;
  std::stable_sort(rows.begin(), rows.end(), [&](const ReportRow& a, const ReportRow& b) {
    return std::tuple(order[a.experiment], a.x_index, a.nodes_per_axis, a.steps) <
           std::tuple(order[b.experiment], b.x_index, b.nodes_per_axis, b.steps);
  });
}

// --- output -------------------------------------------------------------------

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

namespace {

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

void write_record(std::ostream& os, const std::vector<std::string>& fields) {
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) os << ',';
    os << csv_field(fields[i]);
  }
  os << "\r\n";
}

std::string format_point(const Vec& x) {
  std::string s = "(";
  for (Eigen::Index i = 0; i < x.size(); ++i) s += (i ? ", " : "") + format_double(x[i]);
  return s + ")";
}

}  // namespace

void write_rows_csv(std::ostream& os, const std::vector<ReportRow>& rows) {
  std::size_t width = 0;
  for (const auto& r : rows) width = std::max({width, r.inverted.size(), r.direct.size()});
  std::vector<std::string> header = {"experiment", "x_index", "x",         "N",           "steps", "status",
                                     "abs_error",  "rel_error", "expected_gap", "fiber_size", "violation"};
  for (const char* prefix : {"inv", "dir"})
    for (std::size_t k = 0; k < width; ++k) {
      header.push_back(std::string(prefix) + "_re_" + std::to_string(k));
      header.push_back(std::string(prefix) + "_im_" + std::to_string(k));
    }
  write_record(os, header);
  for (const auto& r : rows) {
    const bool ok = r.status == "ok";
    std::vector<std::string> f = {r.experiment,
                                  std::to_string(r.x_index),
                                  format_point(r.x),
                                  std::to_string(r.nodes_per_axis),
                                  std::to_string(r.steps),
                                  r.status,
                                  ok ? format_double(r.abs_error) : "",
                                  ok ? format_double(r.rel_error) : "",
                                  r.expected_gap ? format_double(*r.expected_gap) : "",
                                  std::to_string(r.inverted.size()),
                                  r.violation ? "1" : "0"};
    for (const auto* values : {&r.inverted, &r.direct})
      for (std::size_t k = 0; k < width; ++k) {
        const bool have = k < values->size();
        f.push_back(have ? format_double((*values)[k].real()) : "");
        f.push_back(have ? format_double((*values)[k].imag()) : "");
      }
    write_record(os, f);
  }
}

void write_timings_csv(std::ostream& os, const std::vector<ReportRow>& rows) {
  write_record(os, {"experiment", "x_index", "N", "steps", "wall_time_ms"});
  for (const auto& r : rows)
    write_record(os, {r.experiment, std::to_string(r.x_index), std::to_string(r.nodes_per_axis),
                      std::to_string(r.steps), format_double(r.wall_time_ms)});
}

std::vector<OrderEstimate> convergence_orders(const std::vector<ReportRow>& rows, const RunConfig& cfg) {
  std::vector<OrderEstimate> out;
  for (const auto& e : cfg.experiments) {
    for (std::size_t xi = 0; xi < e.base_points.size(); ++xi) {
      for (const bool over_n : {true, false}) {
        std::vector<std::pair<int, double>> series;
        for (const auto& r : rows) {
          if (r.experiment != e.id || r.x_index != xi || r.status != "ok") continue;
          if (over_n && r.steps == e.plan.steps) series.push_back({r.nodes_per_axis, r.abs_error});
          if (!over_n && r.nodes_per_axis == e.plan.nodes_per_axis) series.push_back({r.steps, r.abs_error});
        }
        std::sort(series.begin(), series.end());
        for (std::size_t i = 0; i + 1 < series.size(); ++i) {
          OrderEstimate est{e.id, xi, over_n ? "N" : "steps", series[i].first, series[i + 1].first, 0.0, 0.0};
          est.ratio = series[i].second / series[i + 1].second;
          est.order = std::log(est.ratio) / std::log(static_cast<double>(est.to) / est.from);
          out.push_back(est);
        }
      }
    }
  }
  return out;
}

namespace {

json finite_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

}  // namespace

std::string rows_summary_json(const std::string& command, const std::vector<ReportRow>& rows,
                              const std::vector<OrderEstimate>& orders) {
  json root;
  root["command"] = command;
  root["rows"] = rows.size();
  std::size_t violations = 0, errors = 0;
  json per_experiment = json::object();
  for (const auto& r : rows) {
    violations += r.violation ? 1 : 0;
    errors += r.status != "ok" ? 1 : 0;
    json& e = per_experiment[r.experiment];
    if (e.is_null()) e = {{"rows", 0}, {"violations", 0}, {"errors", 0}, {"max_abs_error", 0.0}, {"max_rel_error", 0.0}};
    e["rows"] = e["rows"].get<int>() + 1;
    e["violations"] = e["violations"].get<int>() + (r.violation ? 1 : 0);
    e["errors"] = e["errors"].get<int>() + (r.status != "ok" ? 1 : 0);
    if (r.status == "ok") {
      e["max_abs_error"] = finite_or_null(std::max(e["max_abs_error"].is_null() ? 0.0 : e["max_abs_error"].get<double>(), r.abs_error));
      e["max_rel_error"] = finite_or_null(std::max(e["max_rel_error"].is_null() ? 0.0 : e["max_rel_error"].get<double>(), r.rel_error));
    }
  }
  root["violations"] = violations;
  root["errors"] = errors;
  root["experiments"] = per_experiment;
  json ord = json::array();
  for (const auto& o : orders)
    ord.push_back({{"experiment", o.experiment},
                   {"x_index", o.x_index},
                   {"knob", o.knob},
                   {"from", o.from},
                   {"to", o.to},
                   {"ratio", finite_or_null(o.ratio)},
                   {"order", finite_or_null(o.order)}});
  root["orders"] = ord;
  return root.dump(2) + "\n";
}

std::string property_summary_json(const props::PropertySummary& summary) {
  json root;
  root["seed"] = summary.seed;
  root["fault_injected"] = summary.fault_injected;
  root["total_failures"] = summary.total_failures();
  json checks = json::array();
  for (const auto& c : summary.checks)
    checks.push_back({{"name", c.name},
                      {"manifold", c.manifold},
                      {"samples", c.samples},
                      {"failures", c.failures},
                      {"worst", finite_or_null(c.worst)},
                      {"tolerance", c.tolerance}});
  root["checks"] = checks;
  return root.dump(2) + "\n";
}

// --- loading --------------------------------------------------------------------

std::vector<std::vector<std::string>> parse_csv(const std::string& text) {
  std::vector<std::vector<std::string>> records;
  std::vector<std::string> record;
  std::string fieldv;
  bool quoted = false, any = false;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          fieldv += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        fieldv += c;
      }
      continue;
    }
    if (c == '"') {
      quoted = true;
      any = true;
    } else if (c == ',') {
      record.push_back(std::move(fieldv));
      fieldv.clear();
      any = true;
    } else if (c == '\r' || c == '\n') {
      if (c == '\r' && i + 1 < text.size() && text[i + 1] == '\n') ++i;
      record.push_back(std::move(fieldv));
      fieldv.clear();
      records.push_back(std::move(record));
      record.clear();
      any = false;
    } else {
      fieldv += c;
      any = true;
    }
  }
  if (any || !fieldv.empty()) {
    record.push_back(std::move(fieldv));
    records.push_back(std::move(record));
  }
  return records;
}

std::size_t check_csv_consistency(const std::string& text) {
  const auto records = parse_csv(text);
  if (records.empty()) return 0;
  std::map<std::string, std::size_t> col;
  for (std::size_t i = 0; i < records[0].size(); ++i) col[records[0][i]] = i;
  std::size_t mismatches = 0;
  for (std::size_t r = 1; r < records.size(); ++r) {
    const auto& rec = records[r];
    if (rec.at(col.at("status")) != "ok") continue;
    const std::size_t fiber = std::stoul(rec.at(col.at("fiber_size")));
    std::vector<Complex> inv, dir;
    for (std::size_t k = 0; k < fiber; ++k) {
      const auto get = [&](const std::string& name) { return std::strtod(rec.at(col.at(name)).c_str(), nullptr); };
      const std::string ks = std::to_string(k);
      inv.emplace_back(get("inv_re_" + ks), get("inv_im_" + ks));
      dir.emplace_back(get("dir_re_" + ks), get("dir_im_" + ks));
    }
    const double stored = std::strtod(rec.at(col.at("abs_error")).c_str(), nullptr);
    if (row_abs_error(inv, dir) != stored) ++mismatches;
  }
  return mismatches;
}

}  // namespace rfi::report
