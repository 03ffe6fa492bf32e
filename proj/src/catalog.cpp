#include "metsim/catalog.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <unordered_set>

#include <json.hpp>

namespace metsim {

namespace {

using nlohmann::json;

}  // namespace

std::string_view to_string(muscle_group g) {
    switch (g) {
        case muscle_group::general: return "general";
        case muscle_group::shoulder: return "shoulder";
        case muscle_group::elbow: return "elbow";
        case muscle_group::hand: return "hand";
        case muscle_group::hip_back: return "hip_back";
    }
    return "?";
}

std::string_view to_string(model_family f) {
    switch (f) {
        case model_family::inverse_polynomial: return "inverse_polynomial";
        case model_family::shifted_power: return "shifted_power";
        case model_family::power: return "power";
        case model_family::exponential: return "exponential";
        case model_family::huijgens_ratio: return "huijgens_ratio";
    }
    return "?";
}

muscle_group muscle_group_from_string(std::string_view s) {
    if (s == "general") return muscle_group::general;
    if (s == "shoulder") return muscle_group::shoulder;
    if (s == "elbow") return muscle_group::elbow;
    if (s == "hand") return muscle_group::hand;
    if (s == "hip_back") return muscle_group::hip_back;
    throw schema_error("unknown muscle group '" + std::string(s) + "'");
}

model_family model_family_from_string(std::string_view s) {
    if (s == "inverse_polynomial") return model_family::inverse_polynomial;
    if (s == "shifted_power") return model_family::shifted_power;
    if (s == "power") return model_family::power;
    if (s == "exponential") return model_family::exponential;
    if (s == "huijgens_ratio") return model_family::huijgens_ratio;
    throw schema_error("unknown model family '" + std::string(s) + "'");
}

std::size_t family_arity(model_family f) {
    switch (f) {
        case model_family::inverse_polynomial: return 4;
        case model_family::shifted_power: return 3;
        case model_family::power: return 2;
        case model_family::exponential: return 2;
        case model_family::huijgens_ratio: return 3;
    }
    return 0;
}

void met_model::validate() const {
    if (id.empty()) throw schema_error("model id must not be empty");
    const std::size_t want = family_arity(family);
    if (coefficients.size() != want) {
        throw schema_error("model '" + id + "': family " + std::string(to_string(family)) +
                           " takes " + std::to_string(want) + " coefficients, got " +
                           std::to_string(coefficients.size()));
    }
    for (double c : coefficients) {
        if (!std::isfinite(c)) throw schema_error("model '" + id + "': non-finite coefficient");
    }
    if (!std::isfinite(domain_min) || domain_min < 0.0 || domain_min >= 1.0) {
        throw schema_error("model '" + id + "': domain_min must be in [0, 1)");
    }
    // Families with a pole at f = c1 need the domain bound to clear it.
    if ((family == model_family::shifted_power && coefficients[2] < 0.0) ||
        family == model_family::huijgens_ratio) {
        if (domain_min < coefficients[1]) {
            throw schema_error("model '" + id + "': domain_min " + std::to_string(domain_min) +
                               " does not clear the singularity at " +
                               std::to_string(coefficients[1]));
        }
    }
}

model_catalog::model_catalog(std::string version, std::vector<met_model> models)
    : version_(std::move(version)), models_(std::move(models)) {
    std::unordered_set<std::string> seen;
    for (const auto& m : models_) {
        m.validate();
        if (!seen.insert(m.id).second) {
            throw schema_error("duplicate model id '" + m.id + "'");
        }
    }
}

const met_model* model_catalog::find(std::string_view id) const {
    for (const auto& m : models_) {
        if (m.id == id) return &m;
    }
    return nullptr;
}

std::vector<const met_model*> model_catalog::by_group(muscle_group g) const {
    std::vector<const met_model*> out;
    for (const auto& m : models_) {
        if (m.group == g) out.push_back(&m);
    }
    return out;
}

double evaluate(const met_model& model, double f_mvc) {
    if (!std::isfinite(f_mvc) || f_mvc <= model.domain_min || f_mvc > 1.0) {
        throw model_domain_error(model.id, f_mvc, model.domain_min);
    }
    const auto& c = model.coefficients;
    switch (model.family) {
        case model_family::inverse_polynomial:
            return c[0] + c[1] / f_mvc + c[2] / (f_mvc * f_mvc) + c[3] / (f_mvc * f_mvc * f_mvc);
        case model_family::shifted_power:
            return c[0] * std::pow(f_mvc - c[1], c[2]);
        case model_family::power:
            return c[0] * std::pow(f_mvc, c[1]);
        case model_family::exponential:
            return c[0] * std::exp(c[1] * f_mvc);
        case model_family::huijgens_ratio:
            return c[0] * std::pow((1.0 - f_mvc) / (f_mvc - c[1]), c[2]);
    }
    throw invalid_input("unreachable model family");
}

namespace {

met_model parse_model(const json& j, std::size_t index) {
    const std::string where = "models[" + std::to_string(index) + "]";
    if (!j.is_object()) throw schema_error(where + ": expected an object");
    met_model m;
    try {
        m.id = j.at("id").get<std::string>();
        m.label = j.value("label", m.id);
        m.group = muscle_group_from_string(j.at("group").get<std::string>());
        m.family = model_family_from_string(j.at("family").get<std::string>());
        const auto& coeffs = j.at("coefficients");
        if (!coeffs.is_array()) throw schema_error("coefficients must be an array");
        for (const auto& c : coeffs) {
            if (!c.is_number()) throw schema_error("coefficients must be numbers");
            m.coefficients.push_back(c.get<double>());
        }
        m.domain_min = j.value("domain_min", 0.0);
    } catch (const json::exception& e) {
        throw schema_error(where + ": " + e.what());
    } catch (const schema_error& e) {
        throw schema_error(where + ": " + e.what());
    }
    try {
        m.validate();
    } catch (const schema_error& e) {
        throw schema_error(where + ": " + e.what());
    }
    return m;
}

}  // namespace

model_catalog parse_catalog(std::string_view text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::exception& e) {
        throw schema_error(std::string("catalog is not valid JSON: ") + e.what());
    }
    if (!doc.is_object()) throw schema_error("catalog root must be an object");
    if (!doc.contains("models") || !doc["models"].is_array()) {
        throw schema_error("catalog must have a 'models' array");
    }
    std::vector<met_model> models;
    std::size_t i = 0;
    for (const auto& jm : doc["models"]) {
        models.push_back(parse_model(jm, i++));
    }
    return model_catalog(doc.value("version", std::string{}), std::move(models));
}

model_catalog load_catalog(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw schema_error("cannot open catalog file '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_catalog(buf.str());
}

std::string serialize_catalog(const model_catalog& catalog) {
    json doc;
    doc["version"] = catalog.version();
    doc["models"] = json::array();
    for (const auto& m : catalog.models()) {
        json jm;
        jm["id"] = m.id;
        jm["label"] = m.label;
        jm["group"] = std::string(to_string(m.group));
        jm["family"] = std::string(to_string(m.family));
        jm["coefficients"] = m.coefficients;
        if (m.domain_min > 0.0) jm["domain_min"] = m.domain_min;
        doc["models"].push_back(std::move(jm));
    }
    return doc.dump(2) + "\n";
}

}  // namespace metsim
