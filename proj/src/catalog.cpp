#include "gmech/catalog.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

#include "gmech/symplectic.hpp"

namespace gmech::catalog {

using expr::Expression;
using poisson::BivectorField;
using poisson::NamedExpression;
using poisson::SamplingBox;
using poisson::StructureConstants;

namespace {

// canonical pairing {chart[i], chart[n+i]} = 1 on a named chart
BivectorField canonicalOnChart(std::vector<std::string> chart) {
    const int n = static_cast<int>(chart.size()) / 2;
    BivectorField::EntryMap entries;
    for (int i = 0; i < n; ++i)
        entries.emplace(std::make_pair(i, n + i), Expression::constant(1.0, chart));
    return {std::move(chart), std::move(entries)};
}

void requireParams(const std::map<std::string, double>& params,
                   const std::vector<std::string>& allowed, const std::string& specimen) {
    for (const auto& [key, value] : params)
        if (std::find(allowed.begin(), allowed.end(), key) == allowed.end())
            throw std::invalid_argument("specimen '" + specimen + "' has no parameter '" + key +
                                        "'");
}

SystemSpecimen finishSpecimen(std::string name, PoissonSystem::Config cfg, std::string notes) {
    PoissonSystem system(std::move(cfg));

    std::vector<CheckReport> checks;
    checks.push_back(system.jacobiCheck());
    for (const auto& c : system.casimirs())
        checks.push_back(system.checkCasimir(c.expression));
    if (system.integrals().size() > 1)
        checks.push_back(system.involutionCheck(system.integrals()));
    for (const auto& report : checks)
        if (!report.passed)
            throw std::logic_error("specimen '" + name + "': reference check '" + report.check +
                                   "' failed (max residual " + std::to_string(report.maxResidual) +
                                   ")");

    bool separable = system.canonicalSeparable();
    return {std::move(name), std::move(system), separable, std::move(notes), std::move(checks)};
}

SystemSpecimen buildPendulum(const std::map<std::string, double>& params) {
    requireParams(params, {"g", "L"}, "pendulum");
    std::vector<std::string> chart{"theta", "p"};
    auto biv = canonicalOnChart(chart);
    auto h = Expression::parse("p^2/(2*L^2) - g*L*cos(theta)", chart, {"g", "L"});
    PoissonSystem::Config cfg{std::move(biv), h, params, {}, {{"H", h}},
                              std::nullopt, std::nullopt, false};
    return finishSpecimen(
        "pendulum", std::move(cfg),
        "Planar pendulum in the canonical chart (theta, p) with p = L^2 * omega. "
        "The sign of the potential term is fixed so that H is conserved along "
        "thetaddot = -(g/L) sin(theta); the +g*L*cos(theta) variant is not.");
}

SystemSpecimen buildHarmonic(const std::map<std::string, double>& params) {
    requireParams(params, {"w"}, "harmonic");
    std::vector<std::string> chart{"q", "p"};
    auto biv = canonicalOnChart(chart);
    auto h = Expression::parse("p^2/2 + w^2*q^2/2", chart, {"w"});
    PoissonSystem::Config cfg{std::move(biv), h, params, {}, {{"H", h}},
                              std::nullopt, std::nullopt, false};
    return finishSpecimen("harmonic", std::move(cfg),
                          "Harmonic oscillator; level curves of H are ellipses and the "
                          "action-angle chart linearizes the flow.");
}

SystemSpecimen buildEulerTop(const std::map<std::string, double>& params) {
    requireParams(params, {"I1", "I2", "I3"}, "euler_top");
    for (const char* key : {"I1", "I2", "I3"})
        if (params.at(key) <= 0.0)
            throw std::invalid_argument("euler_top: moments of inertia must be positive");

    auto biv = poisson::liePoissonFromConstants(StructureConstants::so3(kSo3StructureSign),
                                                {"L1", "L2", "L3"});
    auto chart = biv.chart();
    auto h = Expression::parse("(L1^2/I1 + L2^2/I2 + L3^2/I3)/2", chart, {"I1", "I2", "I3"});
    PoissonSystem::Config cfg{std::move(biv),
                              h,
                              params,
                              {{"C", Expression::parse("(L1^2 + L2^2 + L3^2)/2", chart)}},
                              {{"H", h}},
                              std::nullopt,
                              std::nullopt,
                              false};
    return finishSpecimen(
        "euler_top", std::move(cfg),
        "Free rigid body on so(3)*: angular momentum in the body frame. The "
        "structure-constant sign is -eps_ijk so that xdot = {x, H} reproduces the "
        "textbook Euler equations; ||L||^2/2 is a Casimir.");
}

SystemSpecimen buildSphericalPendulum(const std::map<std::string, double>& params) {
    requireParams(params, {"g"}, "spherical_pendulum");
    std::vector<std::string> chart{"theta", "psi", "p_theta", "p_psi"};
    auto biv = canonicalOnChart(chart);
    auto h = Expression::parse("p_psi^2/2 + p_theta^2/sin(psi)^2 - g*cos(psi)", chart, {"g"});
    SamplingBox box{{-2.0, 0.5, -2.0, -2.0}, {2.0, 2.6, 2.0, 2.0}};
    PoissonSystem::Config cfg{std::move(biv),
                              h,
                              params,
                              {},
                              {{"H", h}, {"p_theta", Expression::parse("p_theta", chart)}},
                              Expression::parse("sin(psi)", chart),
                              box,
                              false};
    return finishSpecimen(
        "spherical_pendulum", std::move(cfg),
        "Spherical pendulum on T*S^2 in coordinates (theta, psi, p_theta, p_psi). "
        "H is kept exactly in the printed form (no 1/2 on the p_theta^2/sin^2 term); "
        "rotational symmetry makes p_theta an integral of motion either way.");
}

SystemSpecimen buildHyperboloid(const std::map<std::string, double>& params) {
    requireParams(params, {}, "r3_hyperboloid");
    std::vector<std::string> chart{"x", "y", "z"};
    BivectorField::EntryMap entries;
    entries.emplace(std::make_pair(0, 1), Expression::parse("z", chart));
    entries.emplace(std::make_pair(0, 2), Expression::parse("-2*x", chart));
    entries.emplace(std::make_pair(1, 2), Expression::parse("2*y", chart));
    PoissonSystem::Config cfg{BivectorField(chart, std::move(entries)),
                              Expression::parse("x", chart),
                              {},
                              {{"C", Expression::parse("4*x*y + z^2", chart)}},
                              {},
                              std::nullopt,
                              std::nullopt,
                              false};
    return finishSpecimen(
        "r3_hyperboloid", std::move(cfg),
        "R^3 foliated by the level sets of 4xy + z^2: one-sheeted hyperboloids "
        "(c > 0), the cone (c = 0) and two-sheeted hyperboloids (c < 0). Any "
        "Hamiltonian flow stays inside a leaf; the default H = x.");
}

SystemSpecimen buildCylinder(const std::map<std::string, double>& params) {
    requireParams(params, {}, "r3_cylinder");
    std::vector<std::string> chart{"r", "theta", "z"};
    BivectorField::EntryMap entries;
    entries.emplace(std::make_pair(1, 2), Expression::parse("r", chart));
    SamplingBox box{{0.3, -2.0, -2.0}, {2.0, 2.0, 2.0}};
    PoissonSystem::Config cfg{BivectorField(chart, std::move(entries)),
                              Expression::parse("z", chart),
                              {},
                              {{"C", Expression::parse("r", chart)}},
                              {},
                              Expression::parse("r", chart),
                              box,
                              false};
    return finishSpecimen("r3_cylinder", std::move(cfg),
                          "Cylindrical-chart structure pi = r d/dtheta ^ d/dz, degenerate along "
                          "r = 0; any function of r alone is a Casimir, so the leaves are "
                          "cylinders plus the points of the z-axis.");
}

// ---------------------------------------------------------------------------
// Lotka-Volterra: keys a{i}{j} (skew interactions), eps{i}, optional q{i}.
// ---------------------------------------------------------------------------

struct LotkaVolterraInput {
    int n = 0;
    Eigen::MatrixXd a;
    Eigen::VectorXd eps;
    std::optional<Eigen::VectorXd> explicitEquilibrium;
};

LotkaVolterraInput parseLotkaVolterraParams(const std::map<std::string, double>& params) {
    LotkaVolterraInput in;
    for (const auto& [key, value] : params) {
        if (key.size() >= 4 && key.compare(0, 3, "eps") == 0) {
            int i = std::stoi(key.substr(3));
            in.n = std::max(in.n, i);
        } else if (key.size() == 3 && key[0] == 'a') {
            in.n = std::max({in.n, key[1] - '0', key[2] - '0'});
        } else if (key.size() >= 2 && key[0] == 'q') {
            in.n = std::max(in.n, std::stoi(key.substr(1)));
        } else {
            throw std::invalid_argument("lotka_volterra: unrecognized parameter '" + key + "'");
        }
    }
    if (in.n < 2) throw std::invalid_argument("lotka_volterra: needs at least two species");

    in.a = Eigen::MatrixXd::Zero(in.n, in.n);
    in.eps = Eigen::VectorXd::Zero(in.n);
    Eigen::VectorXd q = Eigen::VectorXd::Constant(in.n, std::nan(""));

    for (const auto& [key, value] : params) {
        if (key.compare(0, 3, "eps") == 0) {
            in.eps(std::stoi(key.substr(3)) - 1) = value;
        } else if (key[0] == 'a') {
            int i = key[1] - '0', j = key[2] - '0';
            if (i < 1 || j < 1 || i > in.n || j > in.n)
                throw std::invalid_argument("lotka_volterra: bad index in '" + key + "'");
            if (i == j && value != 0.0)
                throw std::invalid_argument("lotka_volterra: diagonal interaction must vanish");
            // skewness is an input contract: a_ji is forced to -a_ij, and a
            // contradictory explicit value is rejected
            double& slot = in.a(i - 1, j - 1);
            double& mirror = in.a(j - 1, i - 1);
            if (slot != 0.0 && slot != value)
                throw std::invalid_argument("lotka_volterra: interaction matrix is not skew ('" +
                                            key + "')");
            slot = value;
            mirror = -value;
        } else {
            q(std::stoi(key.substr(1)) - 1) = value;
        }
    }

    if (!q.hasNaN()) in.explicitEquilibrium = q;
    else if ((q.array() == q.array()).any())
        throw std::invalid_argument("lotka_volterra: equilibrium override must set every q_i");
    return in;
}

Eigen::VectorXd solveEquilibrium(const LotkaVolterraInput& in) {
    if (in.explicitEquilibrium) {
        const auto& q = *in.explicitEquilibrium;
        if ((in.eps + in.a * q).cwiseAbs().maxCoeff() > 1e-9)
            throw std::invalid_argument("lotka_volterra: the given q is not an equilibrium");
        if (q.minCoeff() <= 0.0)
            throw std::invalid_argument("lotka_volterra: equilibrium must be strictly positive");
        return q;
    }

    // minimum-norm least-squares solution of a q = -eps
    Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(in.a);
    Eigen::VectorXd q = cod.solve(-in.eps);
    if ((in.eps + in.a * q).cwiseAbs().maxCoeff() > 1e-9)
        throw std::invalid_argument("lotka_volterra: no equilibrium exists for these parameters");

    if (q.minCoeff() > 0.0) return q;

    // a singular interaction matrix leaves kernel freedom; for a
    // one-dimensional kernel the best min-coordinate is at a crossing of two
    // of the lines t -> q_i + t k_i
    Eigen::MatrixXd kernel = symplin::kernelOf(in.a);
    if (kernel.cols() == 1) {
        Eigen::VectorXd k = kernel.col(0);
        double bestT = 0.0, bestMin = q.minCoeff();
        auto minAt = [&](double t) { return (q + t * k).minCoeff(); };
        std::vector<double> candidates;
        for (int i = 0; i < in.n; ++i) {
            if (k(i) != 0.0) candidates.push_back(-q(i) / k(i));
            for (int j = i + 1; j < in.n; ++j)
                if (k(i) != k(j)) candidates.push_back((q(j) - q(i)) / (k(i) - k(j)));
        }
        for (double t : candidates)
            if (minAt(t) > bestMin) { bestMin = minAt(t); bestT = t; }
        if (bestMin > 1e-9) return q + bestT * k;
    }
    throw std::invalid_argument("lotka_volterra: no strictly positive equilibrium found");
}

SystemSpecimen buildLotkaVolterra(const std::map<std::string, double>& params) {
    LotkaVolterraInput in = parseLotkaVolterraParams(params);
    Eigen::VectorXd q = solveEquilibrium(in);
    const int n = in.n;

    std::vector<std::string> chart;
    for (int i = 1; i <= n; ++i) chart.push_back("x" + std::to_string(i));

    BivectorField::EntryMap entries;
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) {
            if (in.a(i, j) == 0.0) continue;
            auto xixj = Expression::product(Expression::coordinate(i, chart),
                                            Expression::coordinate(j, chart));
            entries.emplace(std::make_pair(i, j), Expression::scaled(in.a(i, j), std::move(xixj)));
        }

    std::string hText;
    for (int i = 0; i < n; ++i) {
        char term[96];
        std::snprintf(term, sizeof(term), "x%d - %.17g*log(x%d)", i + 1, q(i), i + 1);
        hText += (i == 0 ? std::string(term) : " + " + std::string(term));
    }
    auto h = Expression::parse(hText, chart);

    std::string locusText = "x1";
    for (int i = 2; i <= n; ++i) locusText += "*x" + std::to_string(i);

    PoissonSystem::Config cfg{BivectorField(chart, std::move(entries)),
                              h,
                              params,
                              {},
                              {{"h", h}},
                              Expression::parse(locusText, chart),
                              SamplingBox::cube(n, 0.5, 2.5),
                              true};
    return finishSpecimen(
        "lotka_volterra", std::move(cfg),
        "n-species Lotka-Volterra with skew interactions a_ij and growth rates "
        "eps_i, written as xdot_i = {x_i, h} for pi^ij = a_ij x_i x_j and "
        "h = sum(x_i - q_i log x_i) around the positive equilibrium q.");
}

} // namespace

std::vector<std::string> specimenNames() {
    return {"pendulum",       "harmonic",      "euler_top",     "lotka_volterra",
            "spherical_pendulum", "r3_hyperboloid", "r3_cylinder"};
}

bool isSpecimenName(const std::string& name) {
    auto names = specimenNames();
    return std::find(names.begin(), names.end(), name) != names.end();
}

std::map<std::string, double> defaultParams(const std::string& name) {
    if (name == "pendulum") return {{"g", 1.0}, {"L", 1.0}};
    if (name == "harmonic") return {{"w", 1.0}};
    if (name == "euler_top") return {{"I1", 1.0}, {"I2", 2.0}, {"I3", 3.0}};
    if (name == "lotka_volterra") return {{"a12", 1.0}, {"eps1", -1.0}, {"eps2", 2.0}};
    if (name == "spherical_pendulum") return {{"g", 1.0}};
    if (name == "r3_hyperboloid" || name == "r3_cylinder") return {};
    throw std::invalid_argument("unknown specimen '" + name + "'");
}

SystemSpecimen build(const std::string& name, std::map<std::string, double> params) {
    std::map<std::string, double> merged;
    if (name == "lotka_volterra" && !params.empty()) {
        merged = std::move(params);  // interaction keys define the dimension; no mixing
    } else {
        merged = defaultParams(name);
        for (const auto& [k, v] : params) merged[k] = v;
    }

    if (name == "pendulum") return buildPendulum(merged);
    if (name == "harmonic") return buildHarmonic(merged);
    if (name == "euler_top") return buildEulerTop(merged);
    if (name == "lotka_volterra") return buildLotkaVolterra(merged);
    if (name == "spherical_pendulum") return buildSphericalPendulum(merged);
    if (name == "r3_hyperboloid") return buildHyperboloid(merged);
    if (name == "r3_cylinder") return buildCylinder(merged);
    throw std::invalid_argument("unknown specimen '" + name + "'");
}

// ---------------------------------------------------------------------------
// Action-angle chart for the harmonic oscillator
// ---------------------------------------------------------------------------

ActionAngle actionAngle(double q, double p, double w) {
    if (w <= 0.0) throw std::invalid_argument("actionAngle: w must be positive");
    if (q == 0.0 && p == 0.0)
        throw ActionAngleDomainError("actionAngle: the origin is excluded");

    const double energy = p * p / 2.0 + w * w * q * q / 2.0;
    const double action = energy / w;
    const double radicand = 2.0 * action - q * q;
    if (radicand < 0.0)
        throw ActionAngleDomainError(
            "actionAngle: negative radicand in the printed formula (w != 1)");

    const double root = std::sqrt(radicand);
    const double base = root == 0.0 ? (q > 0.0 ? M_PI / 2.0 : -M_PI / 2.0) : std::atan(q / root);

    double angle;
    if (p >= 0.0) angle = w * base;
    else angle = q >= 0.0 ? w * (M_PI - base) : w * (-M_PI - base);
    return {energy, action, angle};
}

std::array<double, 2> actionAngleInverse(double phi, double psi) {
    if (psi < 0.0) throw std::invalid_argument("actionAngleInverse: negative action");
    const double amplitude = std::sqrt(2.0 * psi);
    return {amplitude * std::sin(phi), amplitude * std::cos(phi)};
}

} // namespace gmech::catalog
