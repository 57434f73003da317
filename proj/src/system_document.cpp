#include "gmech/system_document.hpp"

#include <fstream>
#include <sstream>

#include "json.hpp"

namespace gmech::doc {

using nlohmann::json;
using poisson::BivectorField;
using poisson::PoissonSystem;

namespace {

const char* kindName(SystemDefinitionDocument::BivectorKind k) {
    switch (k) {
    case SystemDefinitionDocument::BivectorKind::Canonical: return "canonical";
    case SystemDefinitionDocument::BivectorKind::Expressions: return "expressions";
    case SystemDefinitionDocument::BivectorKind::LiePoisson: return "lie_poisson";
    }
    return "?";
}

SystemDefinitionDocument::BivectorKind kindFromName(const std::string& name) {
    if (name == "canonical") return SystemDefinitionDocument::BivectorKind::Canonical;
    if (name == "expressions") return SystemDefinitionDocument::BivectorKind::Expressions;
    if (name == "lie_poisson") return SystemDefinitionDocument::BivectorKind::LiePoisson;
    throw DocumentError("unknown bivector kind '" + name + "'");
}

std::pair<int, int> parseEntryKey(const std::string& key, int dim) {
    auto comma = key.find(',');
    if (comma == std::string::npos)
        throw DocumentError("bivector entry key '" + key + "' is not of the form \"i,j\"");
    int i, j;
    try {
        i = std::stoi(key.substr(0, comma));
        j = std::stoi(key.substr(comma + 1));
    } catch (const std::exception&) {
        throw DocumentError("bivector entry key '" + key + "' is not numeric");
    }
    if (i < 1 || j < 1 || i >= j || j > dim)
        throw DocumentError("bivector entry key '" + key + "' must satisfy 1 <= i < j <= " +
                            std::to_string(dim));
    return {i - 1, j - 1};
}

void validateDocument(const SystemDefinitionDocument& doc) {
    if (doc.coordinates.empty()) throw DocumentError("document declares no coordinates");
    const int dim = static_cast<int>(doc.coordinates.size());

    switch (doc.kind) {
    case SystemDefinitionDocument::BivectorKind::Canonical:
        if (2 * doc.canonicalHalfDim != dim)
            throw DocumentError("canonical bivector needs an even chart with n = dim/2");
        break;
    case SystemDefinitionDocument::BivectorKind::Expressions:
        for (const auto& [key, text] : doc.entries) parseEntryKey(key, dim);
        break;
    case SystemDefinitionDocument::BivectorKind::LiePoisson: {
        const auto& c = doc.constants;
        if (static_cast<int>(c.size()) != dim)
            throw DocumentError("structure-constant tensor has wrong outer dimension");
        for (const auto& plane : c) {
            if (static_cast<int>(plane.size()) != dim)
                throw DocumentError("structure-constant tensor is not cubic");
            for (const auto& row : plane)
                if (static_cast<int>(row.size()) != dim)
                    throw DocumentError("structure-constant tensor is not cubic");
        }
        break;
    }
    }
    if (doc.hamiltonian.empty()) throw DocumentError("document declares no hamiltonian");
}

} // namespace

SystemDefinitionDocument parseDocument(const std::string& jsonText) {
    json j;
    try {
        j = json::parse(jsonText);
    } catch (const json::parse_error& err) {
        throw DocumentError(std::string("invalid JSON: ") + err.what());
    }

    SystemDefinitionDocument doc;
    try {
        doc.name = j.at("name").get<std::string>();
        doc.coordinates = j.at("coordinates").get<std::vector<std::string>>();
        if (j.contains("parameters"))
            doc.parameters = j.at("parameters").get<std::map<std::string, double>>();

        const json& biv = j.at("bivector");
        doc.kind = kindFromName(biv.at("kind").get<std::string>());
        switch (doc.kind) {
        case SystemDefinitionDocument::BivectorKind::Canonical:
            doc.canonicalHalfDim = biv.at("n").get<int>();
            break;
        case SystemDefinitionDocument::BivectorKind::Expressions:
            doc.entries = biv.at("entries").get<std::map<std::string, std::string>>();
            break;
        case SystemDefinitionDocument::BivectorKind::LiePoisson:
            doc.constants =
                biv.at("constants").get<std::vector<std::vector<std::vector<double>>>>();
            break;
        }

        doc.hamiltonian = j.at("hamiltonian").get<std::string>();
        if (j.contains("casimirs"))
            doc.casimirs = j.at("casimirs").get<std::map<std::string, std::string>>();
        if (j.contains("integrals"))
            doc.integrals = j.at("integrals").get<std::map<std::string, std::string>>();
        if (j.contains("singular_locus"))
            doc.singularLocus = j.at("singular_locus").get<std::string>();
        if (j.contains("sampling_box")) {
            auto lo = j.at("sampling_box").at("lo").get<std::vector<double>>();
            auto hi = j.at("sampling_box").at("hi").get<std::vector<double>>();
            doc.samplingBox = std::make_pair(std::move(lo), std::move(hi));
        }
        if (j.contains("positive_domain")) doc.positiveDomain = j.at("positive_domain").get<bool>();
    } catch (const json::exception& err) {
        throw DocumentError(std::string("malformed document: ") + err.what());
    }

    validateDocument(doc);
    return doc;
}

SystemDefinitionDocument loadDocument(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DocumentError("cannot open '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parseDocument(buf.str());
}

std::string renderDocument(const SystemDefinitionDocument& doc) {
    validateDocument(doc);
    json j;
    j["name"] = doc.name;
    j["coordinates"] = doc.coordinates;
    j["parameters"] = doc.parameters;

    json biv;
    biv["kind"] = kindName(doc.kind);
    switch (doc.kind) {
    case SystemDefinitionDocument::BivectorKind::Canonical:
        biv["n"] = doc.canonicalHalfDim;
        break;
    case SystemDefinitionDocument::BivectorKind::Expressions:
        biv["entries"] = doc.entries;
        break;
    case SystemDefinitionDocument::BivectorKind::LiePoisson:
        biv["constants"] = doc.constants;
        break;
    }
    j["bivector"] = biv;

    j["hamiltonian"] = doc.hamiltonian;
    j["casimirs"] = doc.casimirs;
    j["integrals"] = doc.integrals;
    if (doc.singularLocus) j["singular_locus"] = *doc.singularLocus;
    if (doc.samplingBox) {
        j["sampling_box"]["lo"] = doc.samplingBox->first;
        j["sampling_box"]["hi"] = doc.samplingBox->second;
    }
    if (doc.positiveDomain) j["positive_domain"] = true;
    return j.dump(2) + "\n";
}

PoissonSystem systemFromDocument(const SystemDefinitionDocument& doc) {
    validateDocument(doc);
    const auto& chart = doc.coordinates;
    std::set<std::string> paramNames;
    for (const auto& [k, v] : doc.parameters) paramNames.insert(k);

    auto parseField = [&](const std::string& text, const std::string& what) {
        try {
            return expr::Expression::parse(text, chart, paramNames);
        } catch (const expr::ParseError& err) {
            throw DocumentError(what + ": " + err.what());
        } catch (const std::invalid_argument& err) {
            throw DocumentError(what + ": " + err.what());  // bad coordinate/parameter names
        }
    };

    std::optional<BivectorField> bivector;
    switch (doc.kind) {
    case SystemDefinitionDocument::BivectorKind::Canonical: {
        const int n = doc.canonicalHalfDim;
        BivectorField::EntryMap entries;
        for (int i = 0; i < n; ++i)
            entries.emplace(std::make_pair(i, n + i), expr::Expression::constant(1.0, chart));
        bivector.emplace(chart, std::move(entries));
        break;
    }
    case SystemDefinitionDocument::BivectorKind::Expressions: {
        BivectorField::EntryMap entries;
        for (const auto& [key, text] : doc.entries)
            entries.emplace(parseEntryKey(key, static_cast<int>(chart.size())),
                            parseField(text, "bivector entry " + key));
        bivector.emplace(chart, std::move(entries));
        break;
    }
    case SystemDefinitionDocument::BivectorKind::LiePoisson: {
        const int m = static_cast<int>(chart.size());
        std::vector<double> flat;
        flat.reserve(static_cast<std::size_t>(m) * m * m);
        for (const auto& plane : doc.constants)
            for (const auto& row : plane)
                for (double v : row) flat.push_back(v);
        bivector = poisson::liePoissonFromConstants(poisson::StructureConstants(m, std::move(flat)),
                                                    chart);
        break;
    }
    }

    PoissonSystem::Config cfg{std::move(*bivector),
                              parseField(doc.hamiltonian, "hamiltonian"),
                              doc.parameters,
                              {},
                              {},
                              std::nullopt,
                              std::nullopt,
                              false};
    for (const auto& [name, text] : doc.casimirs)
        cfg.casimirs.push_back({name, parseField(text, "casimir '" + name + "'")});
    for (const auto& [name, text] : doc.integrals)
        cfg.integrals.push_back({name, parseField(text, "integral '" + name + "'")});
    if (doc.singularLocus) cfg.singularLocus = parseField(*doc.singularLocus, "singular_locus");
    if (doc.samplingBox) {
        if (doc.samplingBox->first.size() != chart.size() ||
            doc.samplingBox->second.size() != chart.size())
            throw DocumentError("sampling_box dimension does not match the chart");
        cfg.samplingBox = poisson::SamplingBox{doc.samplingBox->first, doc.samplingBox->second};
    }
    cfg.positiveDomain = doc.positiveDomain;
    return PoissonSystem(std::move(cfg));
}

SystemDefinitionDocument documentFromSpecimen(const catalog::SystemSpecimen& specimen) {
    const PoissonSystem& sys = specimen.system;
    SystemDefinitionDocument doc;
    doc.name = specimen.name;
    doc.coordinates = sys.chart();
    doc.parameters = sys.parameters();

    if (sys.bivector().isCanonical()) {
        doc.kind = SystemDefinitionDocument::BivectorKind::Canonical;
        doc.canonicalHalfDim = sys.dim() / 2;
    } else {
        doc.kind = SystemDefinitionDocument::BivectorKind::Expressions;
        for (const auto& [key, e] : sys.bivector().entries()) {
            auto [i, j] = key;
            doc.entries.emplace(std::to_string(i + 1) + "," + std::to_string(j + 1), e.text());
        }
    }

    doc.hamiltonian = sys.hamiltonian().text();
    for (const auto& ne : sys.casimirs()) doc.casimirs.emplace(ne.name, ne.expression.text());
    for (const auto& ne : sys.integrals()) doc.integrals.emplace(ne.name, ne.expression.text());
    if (sys.singularLocus()) doc.singularLocus = sys.singularLocus()->text();
    auto defaultBox = poisson::SamplingBox::cube(sys.dim());
    if (sys.samplingBox().lo != defaultBox.lo || sys.samplingBox().hi != defaultBox.hi)
        doc.samplingBox = std::make_pair(sys.samplingBox().lo, sys.samplingBox().hi);
    doc.positiveDomain = sys.positiveDomain();
    return doc;
}

std::string renderCheckReport(const poisson::CheckReport& report, const std::string& system) {
    json j;
    j["check"] = report.check;
    j["system"] = system;
    j["passed"] = report.passed;
    j["tolerance"] = report.tolerance;
    j["samples"] = report.samples;
    j["seed"] = report.seed;
    j["max_residual"] = report.maxResidual;
    j["worst_point"] = report.worstPoint;
    j["skipped"] = report.skipped;
    if (!report.detail.empty()) j["detail"] = report.detail;
    return j.dump(2) + "\n";
}

} // namespace gmech::doc
