#include "modfix/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "modfix/errors.hpp"

namespace modfix::io {

Json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw PreconditionError("cannot read " + path);
  try {
    return Json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw PreconditionError("cannot parse " + path + ": " + e.what());
  }
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw PreconditionError("cannot write " + path);
  out << text;
}

std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

namespace {

double number(const Json& j, const std::string& key, const std::string& owner) {
  if (!j.contains(key)) throw PreconditionError(owner + ": missing '" + key + "'");
  if (!j.at(key).is_number()) throw PreconditionError(owner + ": '" + key + "' must be a number");
  return j.at(key).get<double>();
}

Params params_from_json(const Json& j) {
  Params out;
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (it.key() == "name") continue;
    if (!it.value().is_number()) throw PreconditionError("parameter '" + it.key() + "' must be a number");
    out[it.key()] = it.value().get<double>();
  }
  return out;
}

std::string name_of(const Json& j, const std::string& owner) {
  if (j.is_string()) return j.get<std::string>();
  if (!j.is_object() || !j.contains("name") || !j.at("name").is_string())
    throw PreconditionError(owner + " needs a 'name'");
  return j.at("name").get<std::string>();
}

Json double_or_null(double x) { return std::isfinite(x) ? Json(x) : Json(nullptr); }

}  // namespace

// ---------------------------------------------------------------------------

OrliczGenerator generator_from_json(const Json& j) {
  if (!j.is_object() || !j.contains("kind")) throw PreconditionError("generator needs a 'kind'");
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "power") {
    const double p = number(j, "p", "power generator");
    return j.contains("s") ? OrliczGenerator::power(p, number(j, "s", "power generator")) : OrliczGenerator::power(p);
  }
  if (kind == "exponential") return OrliczGenerator::exponential();
  if (kind == "piecewise_linear") {
    if (!j.contains("knots") || !j.at("knots").is_array()) throw PreconditionError("piecewise_linear needs 'knots'");
    std::vector<OrliczGenerator::Knot> knots;
    for (const auto& k : j.at("knots")) {
      if (!k.is_array() || k.size() != 2) throw PreconditionError("each knot must be a [t, phi] pair");
      knots.emplace_back(k[0].get<double>(), k[1].get<double>());
    }
    return OrliczGenerator::piecewise_linear(std::move(knots), j.value("s", 1.0));
  }
  throw PreconditionError("unknown generator kind '" + kind + "'");
}

Json to_json(const OrliczGenerator& g) {
  Json j;
  j["kind"] = to_string(g.kind());
  if (g.kind() == OrliczGenerator::Kind::power) j["p"] = g.exponent();
  if (g.kind() == OrliczGenerator::Kind::piecewise_linear) {
    Json knots = Json::array();
    for (const auto& [t, v] : g.knots()) knots.push_back({t, v});
    j["knots"] = knots;
  }
  j["s"] = g.s();
  return j;
}

ModularFunctional modular_from_json(const Json& j) {
  if (!j.is_object()) throw PreconditionError("modular spec must be an object");
  if (j.contains("entries")) {
    std::vector<ModularFunctional::Entry> entries;
    for (const auto& e : j.at("entries"))
      entries.push_back({e.value("weight", 1.0), generator_from_json(e.at("generator"))});
    if (j.contains("dimension") && j.at("dimension").get<std::size_t>() != entries.size())
      throw PreconditionError("modular spec: dimension does not match the number of entries");
    return ModularFunctional(std::move(entries));
  }
  const auto n = static_cast<std::size_t>(number(j, "dimension", "modular spec"));
  if (!j.contains("generator")) throw PreconditionError("modular spec needs 'generator' or 'entries'");
  const OrliczGenerator g = generator_from_json(j.at("generator"));
  if (j.contains("weights")) {
    const auto w = j.at("weights").get<std::vector<double>>();
    if (w.size() != n) throw PreconditionError("modular spec: weights do not match the dimension");
    return ModularFunctional::weighted(w, g);
  }
  return ModularFunctional::uniform(n, g, j.value("weight", 1.0));
}

Json to_json(const ModularFunctional& rho) {
  Json j;
  j["dimension"] = rho.dimension();
  Json entries = Json::array();
  for (const auto& e : rho.entries()) entries.push_back({{"weight", e.weight}, {"generator", to_json(e.generator)}});
  j["entries"] = entries;
  return j;
}

Vector vector_from_json(const Json& j, const std::string& what) {
  if (!j.is_array()) throw PreconditionError(what + " must be an array of numbers");
  Vector v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number()) throw PreconditionError(what + " must be an array of numbers");
    v[static_cast<Eigen::Index>(i)] = j[i].get<double>();
  }
  return v;
}

Matrix matrix_from_json(const Json& j, const std::string& what) {
  if (!j.is_array() || j.empty()) throw PreconditionError(what + " must be a nonempty array of rows");
  const std::size_t rows = j.size(), cols = j[0].size();
  Matrix M(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (std::size_t r = 0; r < rows; ++r) {
    const Vector row = vector_from_json(j[r], what);
    if (static_cast<std::size_t>(row.size()) != cols) throw PreconditionError(what + " has ragged rows");
    M.row(static_cast<Eigen::Index>(r)) = row.transpose();
  }
  return M;
}

Json to_json(const Vector& v) {
  Json j = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) j.push_back(double_or_null(v[i]));
  return j;
}

Json to_json(const Element& x) { return to_json(x.coords()); }

// ---------------------------------------------------------------------------

VolterraSpec volterra_from_json(const Json& j) {
  VolterraSpec spec;
  spec.horizon = number(j, "horizon", "volterra problem");
  spec.grid_size = static_cast<std::size_t>(number(j, "grid_size", "volterra problem"));
  const Json kernel = j.value("kernel", Json("zero"));
  const Json f = j.value("nonlinearity", Json("identity"));
  const Json g = j.value("forcing", Json("zero"));
  spec.kernel = make_kernel(name_of(kernel, "kernel"), kernel.is_object() ? params_from_json(kernel) : Params{});
  spec.nonlinearity = make_nonlinearity(name_of(f, "nonlinearity"), f.is_object() ? params_from_json(f) : Params{});
  spec.forcing = make_forcing(name_of(g, "forcing"), g.is_object() ? params_from_json(g) : Params{});
  return spec;
}

Problem problem_from_json(const Json& j) {
  if (!j.is_object() || !j.contains("type")) throw PreconditionError("problem spec needs a 'type'");
  const std::string type = j.at("type").get<std::string>();
  if (type == "affine" || type == "translation") {
    AffineMapSpec spec;
    spec.b = vector_from_json(j.at("b"), "b");
    spec.A = type == "affine" ? matrix_from_json(j.at("A"), "A") : Matrix::Identity(spec.b.size(), spec.b.size());
    if (j.contains("lo")) spec.lo = vector_from_json(j.at("lo"), "lo");
    if (j.contains("hi")) spec.hi = vector_from_json(j.at("hi"), "hi");
    return {type, make_affine_map(spec), spec, std::nullopt};
  }
  if (type == "rotation") {
    const Vector b = vector_from_json(j.at("b"), "b");
    Mapping T = make_rotation_map(number(j, "theta", "rotation problem"), b);
    AffineMapSpec spec{T.affine()->A, b, std::nullopt, std::nullopt};
    return {type, std::move(T), spec, std::nullopt};
  }
  if (type == "volterra") {
    VolterraSpec spec = volterra_from_json(j);
    return {type, make_volterra_operator(spec), std::nullopt, spec};
  }
  throw PreconditionError("unknown problem type '" + type + "'");
}

// ---------------------------------------------------------------------------

Json to_json(const StrongContractionCertificate& cert) {
  Json j;
  j["kind"] = "strong";
  j["c"] = cert.c;
  j["l"] = cert.l;
  j["k"] = cert.k;
  j["s"] = cert.s;
  j["k_estimate"] = double_or_null(cert.k_estimate);
  j["alpha"] = cert.alpha();
  return j;
}

Json to_json(const StrictContractionCertificate& cert) {
  Json j;
  j["kind"] = "strict";
  j["c"] = cert.c;
  j["k"] = cert.k;
  j["k_estimate"] = double_or_null(cert.k_estimate);
  return j;
}

Json to_json(const Delta2Certificate& cert) {
  Json j;
  j["delta"] = cert.delta;
  j["L"] = double_or_null(cert.L);
  j["M"] = double_or_null(cert.M);
  j["empirical_margin"] = double_or_null(cert.empirical_margin);
  j["worst_ratio"] = double_or_null(cert.worst_ratio);
  j["samples_used"] = cert.samples_used;
  j["valid"] = cert.valid;
  return j;
}

Json to_json(const GrowthProfile& profile) {
  Json j;
  j["regular_growth_ok"] = profile.regular_growth_ok;
  j["margin"] = profile.margin;
  j["worst_gap"] = profile.worst_gap;
  j["sample_count"] = profile.sample_count;
  j["seed"] = profile.seed;
  if (profile.s) j["s"] = *profile.s;
  Json table = Json::array();
  for (std::size_t i = 0; i < profile.samples.size(); ++i) {
    Json row;
    row["t"] = profile.samples[i].t;
    row["W"] = profile.samples[i].estimate;
    if (i < profile.analytic_bound.size()) row["t_pow_s"] = profile.analytic_bound[i];
    table.push_back(row);
  }
  j["table"] = table;
  return j;
}

Json to_json(const AxiomReport& report) {
  Json j;
  j["all_passed"] = report.all_passed();
  Json checks = Json::array();
  for (const auto& c : report.checks) {
    Json w = Json::array();
    for (const auto& x : c.witness) w.push_back(to_json(x));
    checks.push_back({{"name", c.name}, {"passed", c.passed}, {"worst_violation", c.worst_violation}, {"witness", w}});
  }
  j["checks"] = checks;
  return j;
}

Json to_json(const FixedPointResult& result) {
  Json j;
  j["converged"] = result.converged;
  j["status"] = result.status;
  j["point"] = to_json(result.point);
  j["residual"] = double_or_null(result.residual);
  j["iterations"] = result.iterations;
  if (const auto* s = std::get_if<StrongContractionCertificate>(&result.certificate)) j["certificate"] = to_json(*s);
  if (const auto* s = std::get_if<StrictContractionCertificate>(&result.certificate)) j["certificate"] = to_json(*s);
  if (result.reference) j["reference"] = to_json(*result.reference);
  if (result.uniqueness_gap) j["uniqueness_gap"] = double_or_null(*result.uniqueness_gap);
  Json trace;
  trace["scheme"] = result.trace.scheme;
  trace["rows"] = result.trace.rows.size();
  trace["violations"] = result.trace.violations();
  Json meta;
  for (const auto& [k, v] : result.trace.meta) meta[k] = double_or_null(v);
  trace["meta"] = meta;
  j["trace"] = trace;
  j["notes"] = result.notes;
  return j;
}

// ---------------------------------------------------------------------------

void write_trace_csv(std::ostream& out, const IterationTrace& trace) {
  out << "# scheme=" << trace.scheme << '\n';
  out << "# residual=" << trace.residual_label << '\n';
  out << "# bound=" << trace.bound_label << '\n';
  out << "# initial_r=" << format_double(trace.initial_r) << '\n';
  for (const auto& [k, v] : trace.meta) out << "# meta." << k << '=' << format_double(v) << '\n';
  const bool errors = trace.has_error_columns();
  out << "index,residual,bound" << (errors ? ",error,error_bound" : "") << '\n';
  for (const auto& r : trace.rows) {
    out << r.index << ',' << format_double(r.residual) << ',' << format_double(r.bound);
    if (errors) out << ',' << format_double(r.error) << ',' << format_double(r.error_bound);
    out << '\n';
  }
}

void write_trace_csv(std::ostream& out, const ApproxFixedPointTrace& trace) {
  out << "# scheme=approx_schedule\n";
  out << "# residual=rho(Tx_n - x_n)\n";
  out << "# bound=rho(2(1-k_n)Tx_n) + rho(2(1-k_n)z)\n";
  out << "n,k_n,residual,bound\n";
  for (const auto& r : trace.rows)
    out << r.n << ',' << format_double(r.k_n) << ',' << format_double(r.residual) << ',' << format_double(r.bound)
        << '\n';
}

namespace {

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double parse_number(const std::string& text, std::size_t line) {
  try {
    std::size_t used = 0;
    const double v = std::stod(text, &used);
    if (used != text.size()) throw std::invalid_argument(text);
    return v;
  } catch (const std::exception&) {
    throw PreconditionError("malformed trace: line " + std::to_string(line) + ": '" + text + "' is not a number");
  }
}

}  // namespace

IterationTrace read_trace_csv(std::istream& in) {
  IterationTrace trace;
  std::string line;
  std::vector<std::string> header;
  std::size_t lineno = 0;
  int idx = -1, res = -1, bnd = -1, err = -1, errb = -1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line[0] == '#') {
      const auto eq = line.find('=');
      if (eq == std::string::npos) continue;
      std::string key = line.substr(1, eq - 1);
      key.erase(0, key.find_first_not_of(' '));
      const std::string value = line.substr(eq + 1);
      if (key == "scheme") trace.scheme = value;
      else if (key == "residual") trace.residual_label = value;
      else if (key == "bound") trace.bound_label = value;
      else if (key == "initial_r") trace.initial_r = parse_number(value, lineno);
      else if (key.rfind("meta.", 0) == 0) trace.meta[key.substr(5)] = parse_number(value, lineno);
      continue;
    }
    if (header.empty()) {
      header = split(line);
      for (std::size_t i = 0; i < header.size(); ++i) {
        const std::string& h = header[i];
        if (h == "index" || h == "n") idx = static_cast<int>(i);
        else if (h == "residual") res = static_cast<int>(i);
        else if (h == "bound") bnd = static_cast<int>(i);
        else if (h == "error") err = static_cast<int>(i);
        else if (h == "error_bound") errb = static_cast<int>(i);
      }
      if (idx < 0 || res < 0 || bnd < 0)
        throw PreconditionError("malformed trace: header must name index (or n), residual and bound");
      continue;
    }
    const auto cells = split(line);
    if (cells.size() != header.size())
      throw PreconditionError("malformed trace: line " + std::to_string(lineno) + " has " +
                              std::to_string(cells.size()) + " cells, header has " + std::to_string(header.size()));
    TraceRow row;
    row.index = static_cast<std::size_t>(parse_number(cells[static_cast<std::size_t>(idx)], lineno));
    row.residual = parse_number(cells[static_cast<std::size_t>(res)], lineno);
    row.bound = parse_number(cells[static_cast<std::size_t>(bnd)], lineno);
    if (err >= 0) row.error = parse_number(cells[static_cast<std::size_t>(err)], lineno);
    if (errb >= 0) row.error_bound = parse_number(cells[static_cast<std::size_t>(errb)], lineno);
    trace.rows.push_back(row);
  }
  if (header.empty()) throw PreconditionError("malformed trace: no header line");
  return trace;
}

}  // namespace modfix::io
