#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "metsim/errors.hpp"

namespace metsim {

enum class muscle_group { general, shoulder, elbow, hand, hip_back };

enum class model_family {
    inverse_polynomial,  // c0 + c1/f + c2/f^2 + c3/f^3
    shifted_power,       // c0 * (f - c1)^c2
    power,               // c0 * f^c1
    exponential,         // c0 * exp(c1 * f)
    huijgens_ratio,      // c0 * ((1 - f) / (f - c1))^c2
};

std::string_view to_string(muscle_group g);
std::string_view to_string(model_family f);
muscle_group muscle_group_from_string(std::string_view s);
model_family model_family_from_string(std::string_view s);

/// Number of coefficients each family takes.
std::size_t family_arity(model_family f);

/// One published empirical MET formula, MET in minutes as a function of
/// the relative load f_MVC. Valid domain is the open-below interval
/// (domain_min, 1].
struct met_model {
    std::string id;
    std::string label;  // display name; defaults to id
    muscle_group group = muscle_group::general;
    model_family family = model_family::power;
    std::vector<double> coefficients;
    double domain_min = 0.0;

    /// Throws schema_error on arity mismatch or a domain_min that does not
    /// clear the family's singularity.
    void validate() const;
};

class model_catalog {
public:
    model_catalog() = default;
    model_catalog(std::string version, std::vector<met_model> models);

    const std::string& version() const noexcept { return version_; }
    const std::vector<met_model>& models() const noexcept { return models_; }
    std::size_t size() const noexcept { return models_.size(); }

    /// nullptr when the id is unknown.
    const met_model* find(std::string_view id) const;
    std::vector<const met_model*> by_group(muscle_group g) const;

private:
    std::string version_;
    std::vector<met_model> models_;
};

/// MET in minutes per the model's family formula. Throws
/// model_domain_error when f_mvc is outside (domain_min, 1].
double evaluate(const met_model& model, double f_mvc);

/// Parses a catalog document (JSON text). Schema violations, duplicate
/// ids and arity mismatches are reported with their location.
model_catalog parse_catalog(std::string_view text);

/// Reads and parses a catalog file.
model_catalog load_catalog(const std::string& path);

/// Serializes a catalog back to its document form; coefficients
/// round-trip bit-exactly.
std::string serialize_catalog(const model_catalog& catalog);

}  // namespace metsim
