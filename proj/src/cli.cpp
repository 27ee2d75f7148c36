#include "modfix/cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <limits>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>

#include "modfix/errors.hpp"

namespace modfix::cli {

namespace fs = std::filesystem;
using io::Json;

// ---------------------------------------------------------------------------
// Configuration

std::string default_out_dir() {
  const char* env = std::getenv("MODFIX_OUT_DIR");
  return env && *env ? env : "modfix_out";
}

namespace {

Json resolve_spec(const Json& j, const std::string& base_dir) {
  if (j.is_string()) {
    fs::path p(j.get<std::string>());
    if (p.is_relative()) p = fs::path(base_dir) / p;
    return io::load_json_file(p.string());
  }
  return j;
}

std::optional<double> opt_number(const Json& j, const std::string& key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  if (!j.at(key).is_number()) throw PreconditionError("constant '" + key + "' must be a number");
  return j.at(key).get<double>();
}

double require(const std::optional<double>& v, const std::string& name, const std::string& solver) {
  if (!v) throw PreconditionError(solver + " needs the constant '" + name + "'");
  return *v;
}

}  // namespace

RunConfig config_from_json(const Json& j, const std::string& base_dir) {
  if (!j.is_object()) throw PreconditionError("config must be a JSON object");
  RunConfig c;
  try {
    if (j.contains("modular")) c.modular = resolve_spec(j.at("modular"), base_dir);
    if (!j.contains("problem")) throw PreconditionError("config needs a 'problem'");
    c.problem = resolve_spec(j.at("problem"), base_dir);
    c.solver = j.value("solver", c.solver);
    c.mode = j.value("mode", c.mode);
    if (j.contains("constants")) {
      const Json& k = j.at("constants");
      c.constants = {opt_number(k, "c"),     opt_number(k, "k"), opt_number(k, "l"), opt_number(k, "s"),
                     opt_number(k, "delta"), opt_number(k, "L"), opt_number(k, "M"), opt_number(k, "beta")};
    }
    if (j.contains("certify")) c.certify = j.at("certify").get<std::vector<std::string>>();
    if (j.contains("schedule")) {
      const Json& s = j.at("schedule");
      c.schedule.rule = s.value("rule", c.schedule.rule);
      c.schedule.length = s.value("length", c.schedule.length);
      if (s.contains("values")) c.schedule.values = s.at("values").get<std::vector<double>>();
    }
    if (j.contains("x0")) c.x0 = io::vector_from_json(j.at("x0"), "x0");
    c.tol = j.value("tol", c.tol);
    c.max_iter = j.value("max_iter", c.max_iter);
    c.seed = j.value("seed", c.seed);
    c.out = j.value("out", default_out_dir());
    c.pairs = j.value("pairs", c.pairs);
    c.samples = j.value("samples", c.samples);
  } catch (const nlohmann::json::exception& e) {
    throw PreconditionError(std::string("invalid config: ") + e.what());
  }
  return c;
}

RunConfig load_config(const std::string& path) {
  const Json j = io::load_json_file(path);
  return config_from_json(j, fs::path(path).parent_path().string().empty() ? "." : fs::path(path).parent_path().string());
}

// ---------------------------------------------------------------------------
// Shared setup

namespace {

struct Setup {
  io::Problem problem;
  ModularFunctional rho;
  Element x0;
};

Setup build(const RunConfig& config) {
  if (!(config.tol > 0.0)) throw PreconditionError("tol must be positive");
  io::Problem problem = io::problem_from_json(config.problem);
  std::optional<ModularFunctional> rho;
  if (!config.modular.is_null()) rho = io::modular_from_json(config.modular);
  else if (problem.volterra) rho = volterra_modular(*problem.volterra);
  else throw PreconditionError("config needs a 'modular'");
  if (rho->dimension() != problem.mapping.dimension())
    throw PreconditionError("modular has dimension " + std::to_string(rho->dimension()) + ", problem has " +
                            std::to_string(problem.mapping.dimension()));
  const std::size_t n = problem.mapping.dimension();
  Element x0 = Element::zero(n);
  if (config.x0) {
    if (static_cast<std::size_t>(config.x0->size()) != n) throw PreconditionError("x0 has the wrong dimension");
    x0 = Element(*config.x0);
  } else if (!problem.mapping.domain().member(x0) && problem.mapping.domain().star_center) {
    x0 = *problem.mapping.domain().star_center;
  }
  return {std::move(problem), std::move(*rho), std::move(x0)};
}

Schedule make_schedule(const ScheduleConfig& s) {
  if (!s.values.empty()) return Schedule::explicit_values(s.values);
  return Schedule::from_rule(s.rule, s.length);
}

std::vector<double> growth_grid() {
  std::vector<double> t;
  for (int i = 0; i < 20; ++i) t.push_back(0.05 * i);
  t.push_back(0.99);
  return t;
}

Delta2Certificate delta2_for(const RunConfig& config, const ModularFunctional& rho) {
  const double delta = require(config.constants.delta, "delta", "Delta2 certificate");
  if (config.constants.L) {
    Delta2Certificate cert;
    cert.delta = delta;
    cert.L = *config.constants.L;
    cert.M = config.constants.M.value_or(0.0);
    cert.valid = true;
    if (!replay_delta2(rho, cert, config.samples, config.seed))
      throw PreconditionError("the supplied Delta2 certificate fails on sampled points");
    return cert;
  }
  Delta2Options options;
  if (config.constants.M) {
    options.fixed_m = *config.constants.M;
    options.allow_free_m = false;
  }
  Delta2Certificate cert = estimate_delta2(rho, delta, config.samples, config.seed, options);
  if (!cert.valid) throw Rejection("no Delta2 certificate found at delta = " + io::format_double(delta));
  return cert;
}

struct SolveOutcome {
  FixedPointResult result;
  std::string trace_csv;
  bool bounds_ok = true;
};

std::string csv_of(const IterationTrace& trace) {
  std::ostringstream s;
  io::write_trace_csv(s, trace);
  return s.str();
}

SolveOutcome run_solver(const RunConfig& config, const Setup& setup) {
  const Mapping& T = setup.problem.mapping;
  const ModularFunctional& rho = setup.rho;
  const Constants& k = config.constants;
  SolveOutcome out;

  if (config.solver == "strong") {
    const double c = require(k.c, "c", "strong"), l = require(k.l, "l", "strong");
    const StrongContractionCertificate cert =
        k.k ? StrongContractionCertificate::make(c, l, *k.k, k.s.value_or(rho.s()))
            : certify_strong(T, rho, c, l, config.pairs, config.seed);
    StrongOptions options;
    options.tol = config.tol;
    options.max_iter = config.max_iter;
    options.mode = parse_convergence_mode(config.mode);
    if (options.mode == ConvergenceMode::unscaled_delta2) options.delta2 = delta2_for(config, rho);
    if (T.affine()) {
      try {
        options.reference = brute_force_fixed_point(T, OracleMethod::linear_solve).point;
      } catch (const Rejection&) {
      }
    }
    out.result = solve_strong(T, rho, cert, setup.x0, options);
  } else if (config.solver == "strict_delta2") {
    const double c = require(k.c, "c", "strict_delta2");
    const StrictContractionCertificate cert =
        k.k ? StrictContractionCertificate::make(c, *k.k) : certify_strict(T, rho, c, config.pairs, config.seed);
    const Delta2Certificate d2 = delta2_for(config, rho);
    StrictOptions options;
    options.tol = config.tol;
    options.max_iter = config.max_iter;
    options.seed = config.seed;
    out.result = solve_strict_delta2(T, rho, cert, d2, setup.x0, options);
  } else if (config.solver == "segment") {
    const double beta = require(k.beta, "beta", "segment");
    const GrowthProfile growth = check_regular_growth(rho, growth_grid(), config.samples, config.seed);
    if (!growth.regular_growth_ok) throw Rejection("regular growth condition not observed");
    SegmentOptions options;
    options.max_iter = config.max_iter;
    const SegmentSolution s = solve_segment(T, setup.x0, beta, rho, growth, config.tol, options);
    FixedPointResult& r = out.result;
    r.point = s.point;
    r.residual = s.residual;
    r.iterations = s.iterations;
    r.converged = true;
    r.status = "converged";
    r.trace.scheme = "segment";
    r.trace.residual_label = "rho(x - ((1-beta)z + beta Tx))";
    r.trace.bound_label = "tol";
    r.trace.meta = {{"beta", beta}, {"lambda", s.lambda}, {"k", s.k}, {"tol", config.tol}};
    r.trace.rows.push_back({0, s.residual, config.tol});
  } else if (config.solver == "approx_schedule") {
    const GrowthProfile growth = check_regular_growth(rho, growth_grid(), config.samples, config.seed);
    if (!growth.regular_growth_ok) throw Rejection("regular growth condition not observed");
    const ApproxFixedPointTrace approx =
        approximating_sequence(T, setup.x0, make_schedule(config.schedule), rho, growth, config.tol);
    FixedPointResult& r = out.result;
    r.trace = approx.as_iteration_trace();
    r.point = approx.rows.back().x;
    r.residual = approx.rows.back().residual;
    r.iterations = approx.iterations();
    r.converged = approx.reached_tol || approx.tau_bounded_observed;
    r.status = approx.reached_tol ? "converged"
               : approx.tau_bounded_observed
                   ? "approximating sequence: rho(2(1-k_n)Tx_n) decays, residual follows the bound"
                   : "rho(2(1-k_n)Tx_n) does not decay along the schedule";
    std::ostringstream s;
    io::write_trace_csv(s, approx);
    out.trace_csv = s.str();
  } else if (config.solver == "schauder") {
    const GrowthProfile growth = check_regular_growth(rho, growth_grid(), config.samples, config.seed);
    if (!growth.regular_growth_ok) throw Rejection("regular growth condition not observed");
    out.result = schauder_fixed_point(T, T.domain(), make_schedule(config.schedule), rho, growth, config.tol);
  } else if (config.solver == "prop31") {
    const double kk = require(k.k, "k", "prop31");
    HomotopyOptions options;
    options.max_iter = config.max_iter;
    const HomotopyResult h = solve_by_homotopy(T, rho, kk, make_schedule(config.schedule), config.tol, options);
    out.result = h.result;
    const std::size_t bad = h.pair_violations(rho);
    out.result.trace.meta["pair_violations"] = static_cast<double>(bad);
    out.bounds_ok = bad == 0;
  } else {
    throw PreconditionError("unknown solver '" + config.solver +
                            "' (expected strong, strict_delta2, segment, approx_schedule, schauder or prop31)");
  }
  if (out.trace_csv.empty()) out.trace_csv = csv_of(out.result.trace);
  out.bounds_ok = out.bounds_ok && out.result.trace.within_bounds();
  return out;
}

void write_outputs(const std::string& dir, const Json& result, const std::string& trace_csv) {
  fs::create_directories(dir);
  io::write_text_file((fs::path(dir) / "result.json").string(), result.dump(2) + "\n");
  io::write_text_file((fs::path(dir) / "trace.csv").string(), trace_csv);
}

struct SolveRow {
  int code = ok;
  std::size_t iterations = 0;
  double residual = std::nan("");
  bool bounds_ok = false;
  std::string status;
  std::optional<double> reference_distance;
};

/// Runs one solve and writes result.json + trace.csv to config.out.
SolveRow solve_to_disk(const RunConfig& config, std::ostream& err) {
  SolveRow row;
  Setup setup = build(config);
  Json doc;
  doc["solver"] = config.solver;
  doc["problem"] = setup.problem.type;
  doc["seed"] = config.seed;
  doc["tol"] = config.tol;
  try {
    SolveOutcome outcome = run_solver(config, setup);
    doc["result"] = io::to_json(outcome.result);
    doc["bounds_ok"] = outcome.bounds_ok;
    row.iterations = outcome.result.iterations;
    row.residual = outcome.result.residual;
    row.bounds_ok = outcome.bounds_ok;
    row.status = outcome.result.status;
    row.code = outcome.result.converged && outcome.bounds_ok ? ok : math_failure;
    if (setup.problem.volterra) {
      if (auto ref = volterra_reference(*setup.problem.volterra)) {
        row.reference_distance = evaluate(setup.rho, outcome.result.point - *ref);
        doc["reference_distance"] = *row.reference_distance;
      }
    }
    write_outputs(config.out, doc, outcome.trace_csv);
  } catch (const Rejection& e) {
    row.code = math_failure;
    row.status = e.what();
    doc["rejected"] = true;
    doc["reason"] = e.what();
    Json witness = Json::array();
    for (const auto& w : e.witness()) witness.push_back(io::to_json(w));
    doc["witness"] = witness;
    IterationTrace partial = e.trace() ? *e.trace() : IterationTrace{config.solver, "", "", 0.0, {}, {}};
    write_outputs(config.out, doc, csv_of(partial));
    err << "rejected: " << e.what() << '\n';
  } catch (const ModularOverflow& e) {
    row.code = math_failure;
    row.status = e.what();
    doc["rejected"] = true;
    doc["reason"] = e.what();
    write_outputs(config.out, doc, csv_of(IterationTrace{config.solver, "", "", 0.0, {}, {}}));
    err << "failed: " << e.what() << '\n';
  } catch (const DomainViolation& e) {
    row.code = math_failure;
    row.status = e.what();
    doc["rejected"] = true;
    doc["reason"] = e.what();
    write_outputs(config.out, doc, csv_of(IterationTrace{config.solver, "", "", 0.0, {}, {}}));
    err << "failed: " << e.what() << '\n';
  }
  return row;
}

template <class F>
int guarded(std::ostream& err, F&& body) {
  try {
    return body();
  } catch (const PreconditionError& e) {
    err << "error: " << e.what() << '\n';
    return usage_error;
  } catch (const nlohmann::json::exception& e) {
    err << "error: invalid spec: " << e.what() << '\n';
    return usage_error;
  } catch (const Rejection& e) {
    err << "rejected: " << e.what() << '\n';
    return math_failure;
  } catch (const std::exception& e) {
    err << "failed: " << e.what() << '\n';
    return math_failure;
  }
}

}  // namespace

// ---------------------------------------------------------------------------
// certify

int cmd_certify(const RunConfig& config, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    if (config.certify.empty()) throw PreconditionError("certify needs a nonempty 'certify' list");
    const Setup setup = build(config);
    const Mapping& T = setup.problem.mapping;
    const ModularFunctional& rho = setup.rho;
    Json report;
    report["problem"] = setup.problem.type;
    report["modular"] = io::to_json(rho);
    report["seed"] = config.seed;
    Json checks = Json::array();
    bool all = true;
    for (const std::string& name : config.certify) {
      Json entry;
      entry["name"] = name;
      bool passed = false;
      try {
        if (name == "axioms") {
          const AxiomReport r = verify_modular_axioms(rho, config.samples, config.seed);
          passed = r.all_passed();
          entry["report"] = io::to_json(r);
        } else if (name == "strong") {
          const double c = require(config.constants.c, "c", "strong"), l = require(config.constants.l, "l", "strong");
          const auto cert = certify_strong(T, rho, c, l, config.pairs, config.seed);
          passed = true;
          entry["certificate"] = io::to_json(cert);
        } else if (name == "strict") {
          const auto cert = certify_strict(T, rho, require(config.constants.c, "c", "strict"), config.pairs,
                                           config.seed);
          passed = true;
          entry["certificate"] = io::to_json(cert);
        } else if (name == "nonexpansive") {
          const auto r = certify_nonexpansive(T, rho, config.pairs, config.seed);
          passed = r.passed;
          entry["margin"] = r.margin;
          Json w = Json::array();
          for (const auto& x : r.witness) w.push_back(io::to_json(x));
          entry["witness"] = w;
        } else if (name == "delta2") {
          const Delta2Certificate cert = delta2_for(config, rho);
          passed = cert.valid;
          entry["certificate"] = io::to_json(cert);
        } else if (name == "regular_growth") {
          const GrowthProfile g = check_regular_growth(rho, growth_grid(), config.samples, config.seed);
          passed = g.regular_growth_ok;
          entry["profile"] = io::to_json(g);
        } else {
          throw PreconditionError("unknown certification '" + name + "'");
        }
      } catch (const Rejection& e) {
        entry["reason"] = e.what();
        Json w = Json::array();
        for (const auto& x : e.witness()) w.push_back(io::to_json(x));
        entry["witness"] = w;
      }
      entry["passed"] = passed;
      all = all && passed;
      out << name << ": " << (passed ? "pass" : "FAIL");
      if (entry.contains("certificate") && entry["certificate"].contains("k_estimate"))
        out << " (k_hat = " << io::format_double(entry["certificate"]["k_estimate"].get<double>()) << ")";
      if (entry.contains("reason")) out << " (" << entry["reason"].get<std::string>() << ")";
      out << '\n';
      checks.push_back(entry);
    }
    report["checks"] = checks;
    report["all_passed"] = all;
    fs::create_directories(config.out);
    io::write_text_file((fs::path(config.out) / "certify_report.json").string(), report.dump(2) + "\n");
    return all ? ok : math_failure;
  });
}

// ---------------------------------------------------------------------------
// solve

int cmd_solve(const RunConfig& config, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const SolveRow row = solve_to_disk(config, err);
    out << config.solver << ": " << row.status << " (iterations " << row.iterations << ", residual "
        << io::format_double(row.residual) << ", bounds " << (row.bounds_ok ? "ok" : "violated") << ")\n";
    return row.code;
  });
}

// ---------------------------------------------------------------------------
// sweep

int cmd_sweep(const RunConfig& config, const std::string& parameter, const std::vector<double>& values,
              std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    static const std::vector<std::string> allowed = {"k", "c", "l", "beta", "schedule_length", "grid_size"};
    if (std::find(allowed.begin(), allowed.end(), parameter) == allowed.end())
      throw PreconditionError("sweep parameter must be one of k, c, l, beta, schedule_length, grid_size");
    if (values.empty()) throw PreconditionError("sweep needs at least one value");

    std::ostringstream table;
    table << "value,iterations,residual,within_bounds,exit,reference_distance,status\n";
    bool any_failed = false;
    for (std::size_t i = 0; i < values.size(); ++i) {
      RunConfig row_config = config;
      const double v = values[i];
      if (parameter == "k") row_config.constants.k = v;
      else if (parameter == "c") row_config.constants.c = v;
      else if (parameter == "l") row_config.constants.l = v;
      else if (parameter == "beta") row_config.constants.beta = v;
      else if (parameter == "schedule_length") row_config.schedule.length = static_cast<std::size_t>(v);
      else if (parameter == "grid_size") {
        if (row_config.problem.value("type", "") != "volterra")
          throw PreconditionError("grid_size sweeps need a volterra problem");
        row_config.problem["grid_size"] = static_cast<std::size_t>(v);
      }
      std::ostringstream dir;
      dir << "row_" << std::setw(3) << std::setfill('0') << i;
      row_config.out = (fs::path(config.out) / dir.str()).string();

      SolveRow row;
      try {
        row = solve_to_disk(row_config, err);
      } catch (const PreconditionError& e) {
        row.code = usage_error;
        row.status = e.what();
      }
      any_failed = any_failed || row.code != ok;
      std::string status = row.status;
      std::replace(status.begin(), status.end(), ',', ';');
      table << io::format_double(v) << ',' << row.iterations << ',' << io::format_double(row.residual) << ','
            << (row.bounds_ok ? 1 : 0) << ',' << row.code << ','
            << (row.reference_distance ? io::format_double(*row.reference_distance) : "") << ',' << status << '\n';
      out << parameter << " = " << io::format_double(v) << ": " << row.status << " (iterations " << row.iterations
          << ")\n";
    }
    fs::create_directories(config.out);
    io::write_text_file((fs::path(config.out) / "sweep.csv").string(), table.str());
    return any_failed ? math_failure : ok;
  });
}

// ---------------------------------------------------------------------------
// report

int cmd_report(const std::vector<std::string>& trace_paths, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    if (trace_paths.empty()) throw PreconditionError("report needs at least one trace file");
    bool all_ok = true;
    for (const std::string& path : trace_paths) {
      std::ifstream in(path);
      if (!in) throw PreconditionError("cannot read " + path);
      const IterationTrace trace = io::read_trace_csv(in);
      const auto bad = trace.violations();
      const std::size_t n = trace.rows.size();
      out << path << " (" << (trace.scheme.empty() ? "unknown scheme" : trace.scheme) << ", " << n << " rows)\n";
      if (n == 0) {
        out << "  no rows\n";
        continue;
      }
      const double pct = 100.0 * static_cast<double>(n - bad.size()) / static_cast<double>(n);
      std::ostringstream p;
      p << std::setprecision(bad.empty() ? 3 : 4) << pct;
      out << "  " << p.str() << "% rows within bound\n";

      std::size_t worst = 0;
      double worst_margin = -std::numeric_limits<double>::infinity();
      for (std::size_t i = 0; i < n; ++i) {
        const TraceRow& r = trace.rows[i];
        double margin = r.residual - r.bound;
        if (!std::isnan(r.error) && !std::isnan(r.error_bound)) margin = std::max(margin, r.error - r.error_bound);
        if (margin > worst_margin) {
          worst_margin = margin;
          worst = i;
        }
      }
      out << "  worst margin row " << trace.rows[worst].index << ": margin " << io::format_double(worst_margin)
          << " (residual " << io::format_double(trace.rows[worst].residual) << ", bound "
          << io::format_double(trace.rows[worst].bound) << ")\n";
      for (std::size_t i : bad)
        out << "  violated row " << trace.rows[i].index << ": residual " << io::format_double(trace.rows[i].residual)
            << " > bound " << io::format_double(trace.rows[i].bound) << '\n';
      all_ok = all_ok && bad.empty();

      // Least-squares slope of log residual against the row index.
      double peak = 0.0;
      for (const auto& r : trace.rows) peak = std::max(peak, r.residual);
      std::vector<std::pair<double, double>> pts;
      for (const auto& r : trace.rows)
        if (r.residual > peak * 1e-12 && r.residual > 0.0)
          pts.emplace_back(static_cast<double>(r.index), std::log(r.residual));
      if (pts.size() >= 3) {
        double sx = 0, sy = 0, sxx = 0, sxy = 0;
        for (const auto& [x, y] : pts) {
          sx += x;
          sy += y;
          sxx += x * x;
          sxy += x * y;
        }
        const double m = static_cast<double>(pts.size());
        const double slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
        out << "  log-residual slope " << io::format_double(slope);
        auto it = trace.meta.find("k");
        if (it != trace.meta.end() && it->second > 0.0) {
          const double logk = std::log(it->second);
          out << " vs log k " << io::format_double(logk) << " (relative gap "
              << io::format_double(std::abs(slope - logk) / std::abs(logk)) << ")";
        }
        out << '\n';
      }
    }
    return all_ok ? ok : math_failure;
  });
}

// ---------------------------------------------------------------------------
// entry point

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"modfix: certified fixed-point iteration in modular spaces"};
  app.require_subcommand(1);

  std::string config_path, out_dir, param, values_csv;
  std::optional<std::uint64_t> seed;
  std::optional<double> tol;
  std::optional<std::size_t> max_iter;
  std::vector<std::string> traces;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "run configuration (JSON)")->required();
    sub->add_option("--seed", seed, "seed for every random draw");
    sub->add_option("--out", out_dir, "output directory");
    sub->add_option("--tol", tol, "solver tolerance");
    sub->add_option("--max-iter", max_iter, "iteration budget");
  };
  CLI::App* certify = app.add_subcommand("certify", "check the hypotheses listed in the config");
  CLI::App* solve = app.add_subcommand("solve", "run the configured solver and write result.json + trace.csv");
  CLI::App* sweep = app.add_subcommand("sweep", "one solve per parameter value, aggregated into sweep.csv");
  CLI::App* report = app.add_subcommand("report", "summarize bound compliance of trace files");
  for (CLI::App* sub : {certify, solve, sweep}) add_common(sub);
  sweep->add_option("--param", param, "k, c, l, beta, schedule_length or grid_size")->required();
  sweep->add_option("--values", values_csv, "comma-separated values")->required();
  report->add_option("traces", traces, "trace files")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      out << app.help();
      return ok;
    }
    err << "error: " << e.what() << '\n';
    return usage_error;
  }

  if (report->parsed()) return cmd_report(traces, out, err);

  RunConfig config;
  const int loaded = guarded(err, [&] {
    config = load_config(config_path);
    if (seed) config.seed = *seed;
    if (tol) config.tol = *tol;
    if (max_iter) config.max_iter = *max_iter;
    if (!out_dir.empty()) config.out = out_dir;
    return ok;
  });
  if (loaded != ok) return loaded;

  if (certify->parsed()) return cmd_certify(config, out, err);
  if (solve->parsed()) return cmd_solve(config, out, err);

  std::vector<double> values;
  std::stringstream ss(values_csv);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    if (cell.empty()) continue;
    try {
      values.push_back(std::stod(cell));
    } catch (const std::exception&) {
      err << "error: --values entry '" << cell << "' is not a number\n";
      return usage_error;
    }
  }
  return cmd_sweep(config, param, values, out, err);
}

}  // namespace modfix::cli
