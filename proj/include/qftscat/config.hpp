#pragma once

#include "qftscat/error.hpp"
#include "qftscat/kinematics.hpp"
#include "qftscat/quadrature.hpp"
#include "qftscat/structure.hpp"
#include "qftscat/transfer.hpp"

#include "json.hpp"

#include <cstdint>
#include <string>

namespace qftscat {

using json = nlohmann::json;

inline constexpr const char* kVersion = "0.1.0";

// Malformed or physically invalid configuration. The message names the field (and the
// line for syntax errors).
class ConfigError : public InvalidArgument {
public:
    using InvalidArgument::InvalidArgument;
};

// Field readers; `where` is the JSON path used in diagnostics.
double get_number(const json& j, const std::string& key, const std::string& where, double fallback);
double require_number(const json& j, const std::string& key, const std::string& where);
int get_int(const json& j, const std::string& key, const std::string& where, int fallback);
cplx complex_from_json(const json& j, const std::string& where);
json complex_to_json(cplx c);

ModelParams model_from_json(const json& j, const std::string& where = "model");
json model_to_json(const ModelParams& p);

QuadratureSettings quadrature_from_json(const json& j, const std::string& where = "quadrature");
json quadrature_to_json(const QuadratureSettings& q);

// {"name": "none" | "standard" (c, onset) | "bump" (lo, hi, height)}
SpectralDensity spectral_from_json(const json& j, double m, const std::string& where = "spectral");

// {"center": [...], "width": w, "amplitude": a | [re, im], "shift": [...],
//  "poly": [{"exps": [...], "coeff": c | [re, im]}, ...]}
WavePacket packet_from_json(const json& j, int d, const std::string& where);
json packet_to_json(const WavePacket& f);

// {"n": 3, "terms": [{"degrees": {"q12": 1}, "coeff": 0.5}, ...]}; complex coefficients as [re, im].
TransferPolynomial polynomial_from_json(const json& j, const std::string& where = "transfer");
json polynomial_to_json(const TransferPolynomial& p);

struct RunConfig {
    json raw;
    ModelParams model;
    SpectralDensity rho;
    QuadratureSettings quad;
    std::uint64_t seed = 1;
    unsigned threads = 1;

    StructureEvaluator evaluator() const;
    // Command block (empty object when absent).
    const json& block(const std::string& name) const;
};

RunConfig parse_config(const std::string& text, const std::string& origin = "<config>");
RunConfig load_config(const std::string& path);

// FNV-1a 64-bit hash of the canonical dump, as 16 hex digits.
std::string config_hash(const json& j);

} // namespace qftscat
