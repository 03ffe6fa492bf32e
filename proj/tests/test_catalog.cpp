#include <cmath>
#include <cstring>
#include <limits>
#include <string>

#include <doctest.h>

#include "metsim/analysis.hpp"
#include "metsim/catalog.hpp"

using namespace metsim;

namespace {

const char* kCatalogPath = METSIM_DATA_DIR "/met_catalog.json";

model_catalog reference_catalog() { return load_catalog(kCatalogPath); }

}  // namespace

TEST_CASE("reference catalog loads with the expected composition") {
    const auto catalog = reference_catalog();
    CHECK(catalog.size() == 24);
    CHECK(catalog.by_group(muscle_group::general).size() == 7);
    CHECK(catalog.by_group(muscle_group::shoulder).size() == 4);
    CHECK(catalog.by_group(muscle_group::elbow).size() == 6);
    CHECK(catalog.by_group(muscle_group::hand).size() == 1);
    CHECK(catalog.by_group(muscle_group::hip_back).size() == 6);

    const met_model* sjogaard = catalog.find("sjogaard");
    REQUIRE(sjogaard != nullptr);
    CHECK(sjogaard->family == model_family::power);
    CHECK(sjogaard->coefficients == std::vector<double>{0.2997, -2.14});
    CHECK(catalog.find("no_such_model") == nullptr);
}

TEST_CASE("evaluate computes each family formula") {
    const auto catalog = reference_catalog();
    const auto at = [&](const char* id, double f) { return evaluate(*catalog.find(id), f); };

    CHECK(at("sjogaard", 0.5) == doctest::Approx(1.3209638529128813).epsilon(1e-14));
    CHECK(at("manenica_general", 1.0) == doctest::Approx(0.16864118774145073).epsilon(1e-14));
    CHECK(at("huijgens", 1.0) == 0.0);
    CHECK(at("huijgens", 0.5) == doctest::Approx(1.1159901581395222).epsilon(1e-14));
    CHECK(at("monod_scherrer", 0.5) == doctest::Approx(4.8383524192148393).epsilon(1e-14));
    CHECK(at("rohmert_general", 0.5) == doctest::Approx(1.1).epsilon(1e-14));
}

TEST_CASE("evaluate rejects out-of-domain input with the model id and bound") {
    const auto catalog = reference_catalog();

    CHECK_THROWS_AS(evaluate(*catalog.find("huijgens"), 0.15), model_domain_error);
    CHECK_THROWS_AS(evaluate(*catalog.find("huijgens"), 0.10), model_domain_error);
    CHECK_THROWS_AS(evaluate(*catalog.find("monod_scherrer"), 0.14), model_domain_error);
    CHECK_THROWS_AS(evaluate(*catalog.find("sato_general"), 0.04), model_domain_error);
    CHECK_THROWS_AS(evaluate(*catalog.find("sjogaard"), 0.0), model_domain_error);
    CHECK_THROWS_AS(evaluate(*catalog.find("sjogaard"), 1.0001), model_domain_error);

    try {
        evaluate(*catalog.find("monod_scherrer"), 0.10);
        FAIL("expected model_domain_error");
    } catch (const model_domain_error& e) {
        CHECK(e.model_id() == "monod_scherrer");
        CHECK(e.lower_bound() == 0.14);
        CHECK(std::string(e.what()).find("monod_scherrer") != std::string::npos);
    }
}

TEST_CASE("every catalog model is positive, finite and strictly decreasing on the grid") {
    const auto catalog = reference_catalog();
    const auto xs = evaluation_grid{}.points();
    for (const auto& model : catalog.models()) {
        double prev = std::numeric_limits<double>::infinity();
        for (double x : xs) {
            const double met = evaluate(model, x);
            CHECK(std::isfinite(met));
            CHECK(met > 0.0);
            CHECK(met < prev);
            prev = met;
        }
    }
}

TEST_CASE("catalog schema violations are reported") {
    SUBCASE("duplicate id names the offender") {
        const char* doc = R"({"version":"x","models":[
            {"id":"a","group":"general","family":"power","coefficients":[1.0,-1.0]},
            {"id":"a","group":"general","family":"power","coefficients":[2.0,-1.0]}]})";
        CHECK_THROWS_WITH_AS(parse_catalog(doc), "duplicate model id 'a'", schema_error);
    }
    SUBCASE("family arity mismatch") {
        const char* doc = R"({"models":[
            {"id":"a","group":"general","family":"power","coefficients":[1.0,-1.0,3.0]}]})";
        CHECK_THROWS_AS(parse_catalog(doc), schema_error);
        try {
            parse_catalog(doc);
        } catch (const schema_error& e) {
            CHECK(std::string(e.what()).find("models[0]") != std::string::npos);
            CHECK(std::string(e.what()).find("2 coefficients, got 3") != std::string::npos);
        }
    }
    SUBCASE("unknown group and family") {
        CHECK_THROWS_AS(parse_catalog(R"({"models":[
            {"id":"a","group":"torso","family":"power","coefficients":[1.0,-1.0]}]})"),
                        schema_error);
        CHECK_THROWS_AS(parse_catalog(R"({"models":[
            {"id":"a","group":"general","family":"cubic","coefficients":[1.0,-1.0]}]})"),
                        schema_error);
    }
    SUBCASE("missing required keys") {
        CHECK_THROWS_AS(parse_catalog(R"({"models":[{"id":"a"}]})"), schema_error);
        CHECK_THROWS_AS(parse_catalog(R"({"version":"1.0"})"), schema_error);
    }
    SUBCASE("not JSON at all") {
        CHECK_THROWS_AS(parse_catalog("version: 1.0"), schema_error);
    }
    SUBCASE("domain_min below a pole is rejected") {
        const char* doc = R"({"models":[
            {"id":"a","group":"general","family":"shifted_power",
             "coefficients":[0.4,0.2,-2.0],"domain_min":0.1}]})";
        CHECK_THROWS_AS(parse_catalog(doc), schema_error);
    }
    SUBCASE("missing file") {
        CHECK_THROWS_AS(load_catalog("/no/such/catalog.json"), schema_error);
    }
}

TEST_CASE("serialize-parse round trip preserves coefficients bit-exactly") {
    const auto catalog = reference_catalog();
    const std::string text = serialize_catalog(catalog);
    const auto reparsed = parse_catalog(text);
    REQUIRE(reparsed.size() == catalog.size());
    for (std::size_t i = 0; i < catalog.size(); ++i) {
        const auto& a = catalog.models()[i];
        const auto& b = reparsed.models()[i];
        CHECK(a.id == b.id);
        CHECK(a.group == b.group);
        CHECK(a.family == b.family);
        CHECK(a.domain_min == b.domain_min);
        REQUIRE(a.coefficients.size() == b.coefficients.size());
        for (std::size_t j = 0; j < a.coefficients.size(); ++j) {
            CHECK(std::memcmp(&a.coefficients[j], &b.coefficients[j], sizeof(double)) == 0);
        }
    }
    // serialization is a fixed point
    CHECK(serialize_catalog(reparsed) == text);
}
