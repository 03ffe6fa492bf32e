#pragma once

#include <stdexcept>
#include <string>

namespace metsim {

/// Input fails a precondition (non-finite, out of range, malformed).
class invalid_input : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Initial load already exceeds capacity; the endurance problem has no
/// solution and must not be conflated with exhaustion at t = 0.
class infeasible_load : public std::runtime_error {
public:
    infeasible_load(double load, double mvc)
        : std::runtime_error("initial load " + std::to_string(load) +
                             " N exceeds capacity MVC = " + std::to_string(mvc) + " N"),
          load_(load), mvc_(mvc) {}

    double load() const noexcept { return load_; }
    double mvc() const noexcept { return mvc_; }

private:
    double load_;
    double mvc_;
};

/// f_MVC outside the open validity interval of an empirical model.
class model_domain_error : public invalid_input {
public:
    model_domain_error(const std::string& model_id, double f_mvc, double lower_bound)
        : invalid_input("model '" + model_id + "': f_mvc = " + std::to_string(f_mvc) +
                        " outside valid domain (" + std::to_string(lower_bound) + ", 1]"),
          model_id_(model_id), f_mvc_(f_mvc), lower_bound_(lower_bound) {}

    const std::string& model_id() const noexcept { return model_id_; }
    double f_mvc() const noexcept { return f_mvc_; }
    double lower_bound() const noexcept { return lower_bound_; }

private:
    std::string model_id_;
    double f_mvc_;
    double lower_bound_;
};

/// Catalog or golden-data document violates its schema.
class schema_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace metsim
