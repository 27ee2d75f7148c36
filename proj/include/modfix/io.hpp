#pragma once

#include <iosfwd>
#include <optional>
#include <string>

#include <json.hpp>

#include "modfix/contraction.hpp"
#include "modfix/modular.hpp"
#include "modfix/nonexpansive.hpp"
#include "modfix/problems.hpp"

namespace modfix::io {

using Json = nlohmann::ordered_json;

/// Reads and parses a JSON document; PreconditionError when it cannot.
Json load_json_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);

/// %.17g, with "nan"/"inf"/"-inf" spelled out.
std::string format_double(double x);

// Modular spec:
//   {"dimension": n,
//    "generator": {...}, "weight": w}               uniform form, or
//    "entries": [{"weight": w, "generator": {...}}]  one per coordinate
// generator: {"kind": "power", "p": 2, "s": 1} | {"kind": "exponential"}
//            | {"kind": "piecewise_linear", "knots": [[0,0],[1,1]], "s": 1}
OrliczGenerator generator_from_json(const Json& j);
Json to_json(const OrliczGenerator& g);
ModularFunctional modular_from_json(const Json& j);
Json to_json(const ModularFunctional& rho);

Vector vector_from_json(const Json& j, const std::string& what);
Matrix matrix_from_json(const Json& j, const std::string& what);
Json to_json(const Vector& v);
Json to_json(const Element& x);

// Problem spec:
//   {"type": "affine", "A": [[...]], "b": [...], "lo": [...], "hi": [...]}
//   {"type": "rotation", "theta": t, "b": [...]}
//   {"type": "translation", "b": [...]}
//   {"type": "volterra", "horizon": A, "grid_size": m,
//    "kernel": {"name": "constant", "kappa": 1}, "nonlinearity": {"name": "identity"},
//    "forcing": {"name": "constant", "value": 1}}
struct Problem {
  std::string type;
  Mapping mapping;
  std::optional<AffineMapSpec> affine;
  std::optional<VolterraSpec> volterra;
};

Problem problem_from_json(const Json& j);
VolterraSpec volterra_from_json(const Json& j);

Json to_json(const StrongContractionCertificate& cert);
Json to_json(const StrictContractionCertificate& cert);
Json to_json(const Delta2Certificate& cert);
Json to_json(const GrowthProfile& profile);
Json to_json(const AxiomReport& report);
Json to_json(const FixedPointResult& result);

/// Comment lines "# key=value" carrying scheme, labels and meta, then the
/// header "index,residual,bound[,error,error_bound]" and one row per step.
void write_trace_csv(std::ostream& out, const IterationTrace& trace);
/// Columns n,k_n,residual,bound.
void write_trace_csv(std::ostream& out, const ApproxFixedPointTrace& trace);

/// Parses either layout; throws PreconditionError on malformed input.
IterationTrace read_trace_csv(std::istream& in);

}  // namespace modfix::io
