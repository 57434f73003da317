// System-definition documents: the on-disk JSON schema for charts, bivectors,
// Hamiltonians and declared invariants, plus check-report serialization.
#pragma once

#include <optional>
#include <string>

#include "gmech/catalog.hpp"
#include "gmech/poisson_system.hpp"

namespace gmech::doc {

struct DocumentError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Mirrors the file schema. Entry keys are 1-based "i,j" strings with i < j.
struct SystemDefinitionDocument {
    enum class BivectorKind { Canonical, Expressions, LiePoisson };

    std::string name;
    std::vector<std::string> coordinates;
    std::map<std::string, double> parameters;

    BivectorKind kind = BivectorKind::Expressions;
    int canonicalHalfDim = 0;                                    // kind == Canonical
    std::map<std::string, std::string> entries;                  // kind == Expressions
    std::vector<std::vector<std::vector<double>>> constants;     // kind == LiePoisson, c[k][i][j]

    std::string hamiltonian;
    std::map<std::string, std::string> casimirs;
    std::map<std::string, std::string> integrals;
    std::optional<std::string> singularLocus;

    // auxiliary, emitted only when they differ from the defaults: the seeded
    // sampling box for stochastic checks and the strict-positivity domain flag
    std::optional<std::pair<std::vector<double>, std::vector<double>>> samplingBox;
    bool positiveDomain = false;

    bool operator==(const SystemDefinitionDocument&) const = default;
};

SystemDefinitionDocument parseDocument(const std::string& jsonText);
SystemDefinitionDocument loadDocument(const std::string& path);
std::string renderDocument(const SystemDefinitionDocument& doc);

// Builds the runtime system; expression fields are parsed against the
// document's chart and parameter names.
poisson::PoissonSystem systemFromDocument(const SystemDefinitionDocument& doc);

SystemDefinitionDocument documentFromSpecimen(const catalog::SystemSpecimen& specimen);

std::string renderCheckReport(const poisson::CheckReport& report, const std::string& system);

} // namespace gmech::doc
