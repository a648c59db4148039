// Batch driver: verify, converge, breakdown and props subcommands.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "rfi/errors.hpp"
#include "rfi/report.hpp"

namespace {

namespace fs = std::filesystem;
using namespace rfi;

struct Options {
  std::string config;
  std::string out = ".";
  std::optional<double> tolerance;
  std::optional<std::uint64_t> seed;
  bool inject_fault = false;
};

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot write " + path.string());
  os << text;
}

report::RunConfig load(const Options& o) {
  report::RunConfig cfg = o.config.empty() ? report::RunConfig{} : report::load_config(o.config);
  if (o.tolerance) {
    cfg.tolerance = *o.tolerance;
    for (auto& e : cfg.experiments) e.tolerance.reset();
  }
  if (o.seed) cfg.seed = *o.seed;
  if (o.inject_fault) cfg.inject_fault = true;
  return cfg;
}

int emit_rows(const std::string& command, const Options& o, const report::RunConfig& cfg,
              const std::vector<report::ReportRow>& rows) {
  fs::create_directories(o.out);
  std::ostringstream csv, timings;
  report::write_rows_csv(csv, rows);
  report::write_timings_csv(timings, rows);
  const auto orders = command == "converge" ? report::convergence_orders(rows, cfg) : std::vector<report::OrderEstimate>{};
  write_file(fs::path(o.out) / (command + ".csv"), csv.str());
  write_file(fs::path(o.out) / (command + "_timings.csv"), timings.str());
  write_file(fs::path(o.out) / (command + "_summary.json"), report::rows_summary_json(command, rows, orders));
  std::size_t violations = 0;
  for (const auto& r : rows) {
    violations += r.violation;
    std::printf("%-24s x%-2zu N=%-4d steps=%-5d %s abs=%.3e rel=%.3e%s\n", r.experiment.c_str(), r.x_index,
                r.nodes_per_axis, r.steps, r.status == "ok" ? "ok " : "ERR", r.abs_error, r.rel_error,
                r.violation ? "  VIOLATION" : "");
    if (r.status != "ok") std::printf("    %s\n", r.status.c_str());
  }
  for (const auto& est : orders)
    std::printf("order %-20s x%-2zu %-5s %d->%d ratio=%.3e order=%.2f\n", est.experiment.c_str(), est.x_index,
                est.knob.c_str(), est.from, est.to, est.ratio, est.order);
  std::printf("%zu rows, %zu violations\n", rows.size(), violations);
  return violations ? 1 : 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Fourier inversion on Riemannian manifolds: verification and convergence reports"};
  app.require_subcommand(1);
  Options o;
  const auto add_common = [&](CLI::App* sub, bool config_required) {
    auto* c = sub->add_option("--config", o.config, "experiment config (JSON)");
    if (config_required) c->required();
    sub->add_option("--out", o.out, "output directory")->capture_default_str();
    sub->add_option("--tolerance", o.tolerance, "override every tolerance in the config");
    sub->add_option("--seed", o.seed, "seed for randomized suites");
  };
  auto* verify = app.add_subcommand("verify", "invert vs direct application at every base point");
  auto* converge = app.add_subcommand("converge", "N and steps sweeps with observed orders");
  auto* breakdown = app.add_subcommand("breakdown", "order-3 breakdown demonstration");
  auto* props = app.add_subcommand("props", "seeded randomized property suite");
  add_common(verify, true);
  add_common(converge, true);
  add_common(breakdown, true);
  add_common(props, false);
  props->add_flag("--inject-fault", o.inject_fault, "corrupt the connection coefficients before checking");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    const report::RunConfig cfg = load(o);
    if (verify->parsed()) return emit_rows("verify", o, cfg, report::run_verify(cfg));
    if (converge->parsed()) return emit_rows("converge", o, cfg, report::run_convergence(cfg));
    if (breakdown->parsed()) return emit_rows("breakdown", o, cfg, report::run_breakdown_demo(cfg));
    const props::PropertySummary summary = report::run_property_suite(cfg);
    fs::create_directories(o.out);
    write_file(fs::path(o.out) / "props_summary.json", report::property_summary_json(summary));
    for (const auto& c : summary.checks)
      if (c.failures)
        std::printf("FAIL %-30s %-18s %d/%d worst=%.3e tol=%.1e\n", c.name.c_str(), c.manifold.c_str(), c.failures,
                    c.samples, c.worst, c.tolerance);
    std::printf("%zu checks, %d failures\n", summary.checks.size(), summary.total_failures());
    return summary.total_failures() ? 1 : 0;
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error at %s: %s\n", e.path().c_str(), e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
}
