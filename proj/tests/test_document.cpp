#include "doctest.h"

#include "gmech/catalog.hpp"
#include "gmech/system_document.hpp"

using namespace gmech::doc;
using gmech::catalog::build;

namespace {

const char* kHyperboloidJson = R"({
  "name": "hyperboloid",
  "coordinates": ["x", "y", "z"],
  "parameters": {},
  "bivector": {
    "kind": "expressions",
    "entries": {"1,2": "z", "1,3": "-2*x", "2,3": "2*y"}
  },
  "hamiltonian": "x",
  "casimirs": {"C": "4*x*y + z^2"},
  "integrals": {}
})";

} // namespace

TEST_CASE("document parse, render, reparse is the identity") {
    auto doc = parseDocument(kHyperboloidJson);
    CHECK(doc.name == "hyperboloid");
    CHECK(doc.coordinates == std::vector<std::string>{"x", "y", "z"});
    CHECK(doc.entries.size() == 3);

    auto round1 = parseDocument(renderDocument(doc));
    CHECK(round1 == doc);
    auto round2 = parseDocument(renderDocument(round1));
    CHECK(round2 == round1);
}

TEST_CASE("all three bivector kinds round-trip") {
    SystemDefinitionDocument canonical;
    canonical.name = "osc";
    canonical.coordinates = {"q", "p"};
    canonical.parameters = {{"w", 2.0}};
    canonical.kind = SystemDefinitionDocument::BivectorKind::Canonical;
    canonical.canonicalHalfDim = 1;
    canonical.hamiltonian = "p^2/2 + w^2*q^2/2";
    CHECK(parseDocument(renderDocument(canonical)) == canonical);

    SystemDefinitionDocument lie;
    lie.name = "spin";
    lie.coordinates = {"L1", "L2", "L3"};
    lie.kind = SystemDefinitionDocument::BivectorKind::LiePoisson;
    auto so3 = gmech::poisson::StructureConstants::so3(-1.0);
    lie.constants.assign(3, std::vector<std::vector<double>>(3, std::vector<double>(3, 0.0)));
    for (int k = 0; k < 3; ++k)
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) lie.constants[k][i][j] = so3.at(k, i, j);
    lie.hamiltonian = "(L1^2 + L2^2/2 + L3^2/3)/2";
    lie.casimirs = {{"C", "(L1^2 + L2^2 + L3^2)/2"}};
    CHECK(parseDocument(renderDocument(lie)) == lie);
}

TEST_CASE("document validation rejects malformed input") {
    CHECK_THROWS_AS(parseDocument("not json"), DocumentError);
    CHECK_THROWS_AS(parseDocument("{}"), DocumentError);

    auto mutate = [&](const std::string& from, const std::string& to) {
        std::string text = kHyperboloidJson;
        auto at = text.find(from);
        REQUIRE(at != std::string::npos);
        text.replace(at, from.size(), to);
        return text;
    };

    // entry keys must satisfy 1 <= i < j <= dim
    CHECK_THROWS_AS(parseDocument(mutate("\"1,2\"", "\"2,1\"")), DocumentError);
    CHECK_THROWS_AS(parseDocument(mutate("\"1,2\"", "\"0,2\"")), DocumentError);
    CHECK_THROWS_AS(parseDocument(mutate("\"1,2\"", "\"1,4\"")), DocumentError);
    CHECK_THROWS_AS(parseDocument(mutate("\"1,2\"", "\"12\"")), DocumentError);
    CHECK_THROWS_AS(parseDocument(mutate("expressions", "tensor")), DocumentError);

    // expression fields are parsed against the chart
    CHECK_THROWS_AS(systemFromDocument(parseDocument(mutate("\"x\",", "\"sin(\","))),
                    DocumentError);
    CHECK_THROWS_AS(systemFromDocument(parseDocument(mutate("4*x*y + z^2", "4*x*w"))),
                    DocumentError);
}

TEST_CASE("declared invariants are verified when a document is loaded") {
    std::string text = kHyperboloidJson;
    auto at = text.find("4*x*y + z^2");
    text.replace(at, std::string("4*x*y + z^2").size(), "x + y");
    auto doc = parseDocument(text);  // structurally fine
    CHECK_THROWS_AS(systemFromDocument(doc), std::invalid_argument);  // x + y is no casimir
}

TEST_CASE("a document system behaves like the builtin it mirrors") {
    auto specimen = build("euler_top", {{"I1", 1.0}, {"I2", 2.0}, {"I3", 3.0}});
    auto doc = documentFromSpecimen(specimen);
    auto rebuilt = systemFromDocument(doc);

    CHECK(rebuilt.chart() == specimen.system.chart());
    CHECK(rebuilt.parameters() == specimen.system.parameters());

    const std::vector<std::vector<double>> probes = {
        {1.0, 1.0, 1.0}, {0.3, -0.7, 2.0}, {-1.5, 0.2, 0.9}};
    for (const auto& x : probes) {
        auto a = specimen.system.vectorField(x);
        auto b = rebuilt.vectorField(x);
        CHECK(a == b);  // bitwise: the rendered expressions evaluate identically
        CHECK(specimen.system.invariantValue("C", x) == rebuilt.invariantValue("C", x));
    }
}

TEST_CASE("canonical-separable survives the document round trip") {
    auto pend = build("pendulum", {});
    REQUIRE(pend.system.canonicalSeparable());
    auto rebuilt = systemFromDocument(documentFromSpecimen(pend));
    CHECK(rebuilt.canonicalSeparable());

    auto sph = build("spherical_pendulum", {});
    auto rebuiltSph = systemFromDocument(documentFromSpecimen(sph));
    CHECK_FALSE(rebuiltSph.canonicalSeparable());
}

TEST_CASE("sampling box and positivity survive the round trip") {
    auto lv = build("lotka_volterra", {{"a12", 1.0}, {"eps1", -1.0}, {"eps2", 2.0}});
    auto doc = documentFromSpecimen(lv);
    CHECK(doc.positiveDomain);
    REQUIRE(doc.samplingBox.has_value());

    auto rebuilt = systemFromDocument(doc);
    CHECK(rebuilt.positiveDomain());
    CHECK(rebuilt.samplingBox().lo == lv.system.samplingBox().lo);
    CHECK(rebuilt.samplingBox().hi == lv.system.samplingBox().hi);

    // and its own JSON round trip is still the identity
    CHECK(parseDocument(renderDocument(doc)) == doc);
}

TEST_CASE("every builtin exports and re-ingests cleanly") {
    for (const auto& name : gmech::catalog::specimenNames()) {
        CAPTURE(name);
        auto specimen = build(name);
        auto doc = documentFromSpecimen(specimen);
        auto rebuilt = systemFromDocument(doc);  // re-runs construction checks
        CHECK(rebuilt.dim() == specimen.system.dim());
        CHECK(parseDocument(renderDocument(doc)) == doc);
    }
}

TEST_CASE("check report serialization carries the full record") {
    auto spec = build("r3_hyperboloid");
    auto report = spec.system.checkCasimir(spec.system.casimirs()[0].expression, 50, 7, 1e-10);
    auto text = renderCheckReport(report, "r3_hyperboloid");
    CHECK(text.find("\"check\": \"casimir\"") != std::string::npos);
    CHECK(text.find("\"passed\": true") != std::string::npos);
    CHECK(text.find("\"seed\": 7") != std::string::npos);
    CHECK(text.find("\"samples\": 50") != std::string::npos);
}
