#include "gmech/poisson_system.hpp"

#include <algorithm>
#include <cmath>

namespace gmech::poisson {

// ---------------------------------------------------------------------------
// Separability scan: label each node with the set of coordinate halves it
// touches, then require that +,- (and unary minus) are the only operations
// combining q-terms with p-terms.
// ---------------------------------------------------------------------------

bool isSeparableHamiltonian(const Expression& h, int halfDim) {
    enum Mask { None = 0, Q = 1, P = 2, Mixed = 3 };
    const int count = h.nodeCount();
    std::vector<int> mask(static_cast<std::size_t>(count), None);
    std::vector<bool> separable(static_cast<std::size_t>(count), true);

    for (int id = 0; id < count; ++id) {
        auto n = h.node(id);
        switch (n.kind) {
        case 0:
        case 2:
            mask[id] = None;
            break;
        case 1:
            mask[id] = n.sym < halfDim ? Q : P;
            break;
        case 3: {
            mask[id] = mask[n.a];
            if (n.uop == expr::UnaryOp::Neg)
                separable[id] = separable[n.a];   // negation distributes over terms
            else
                separable[id] = mask[n.a] != Mixed;
            break;
        }
        case 4: {
            mask[id] = mask[n.a] | mask[n.b];
            switch (n.bop) {
            case expr::BinaryOp::Add:
            case expr::BinaryOp::Sub:
                separable[id] = separable[n.a] && separable[n.b];
                break;
            case expr::BinaryOp::Mul:
                // scaling by a coordinate-free factor preserves separability
                if (mask[n.a] == None) separable[id] = separable[n.b];
                else if (mask[n.b] == None) separable[id] = separable[n.a];
                else separable[id] = mask[id] != Mixed;
                break;
            case expr::BinaryOp::Div:
                if (mask[n.b] == None) separable[id] = separable[n.a];
                else separable[id] = mask[id] != Mixed;
                break;
            default:
                separable[id] = mask[id] != Mixed;
                break;
            }
            break;
        }
        }
    }
    return separable[static_cast<std::size_t>(h.rootId())];
}

// ---------------------------------------------------------------------------
// PoissonSystem
// ---------------------------------------------------------------------------

PoissonSystem::PoissonSystem(Config cfg)
    : bivector_(std::move(cfg.bivector)),
      hamiltonian_(std::move(cfg.hamiltonian)),
      parameters_(std::move(cfg.parameters)),
      casimirs_(std::move(cfg.casimirs)),
      integrals_(std::move(cfg.integrals)),
      singularLocus_(std::move(cfg.singularLocus)),
      box_(cfg.samplingBox ? std::move(*cfg.samplingBox) : SamplingBox::cube(bivector_.dim())),
      positiveDomain_(cfg.positiveDomain) {
    const auto& chart = bivector_.chart();
    auto requireChart = [&](const Expression& e, const std::string& what) {
        if (e.chart() != chart)
            throw std::invalid_argument("PoissonSystem: " + what + " uses a different chart");
    };
    requireChart(hamiltonian_, "hamiltonian");
    for (const auto& ne : casimirs_) requireChart(ne.expression, "casimir '" + ne.name + "'");
    for (const auto& ne : integrals_) requireChart(ne.expression, "integral '" + ne.name + "'");
    if (singularLocus_) requireChart(*singularLocus_, "singular locus");
    if (box_.lo.size() != chart.size() || box_.hi.size() != chart.size())
        throw std::invalid_argument("PoissonSystem: sampling box dimension mismatch");

    hamiltonianParams_ = hamiltonian_.bindParameters(parameters_);
    for (const auto& [key, e] : bivector_.entries())
        entryParams_.push_back(e.bindParameters(parameters_));
    if (singularLocus_) singularLocusParams_ = singularLocus_->bindParameters(parameters_);

    canonicalSeparable_ =
        bivector_.isCanonical() && isSeparableHamiltonian(hamiltonian_, bivector_.dim() / 2);

    for (const auto& ne : casimirs_) {
        CheckReport report = checkCasimir(ne.expression);
        if (!report.passed)
            throw std::invalid_argument("PoissonSystem: declared casimir '" + ne.name +
                                        "' fails its check (max residual " +
                                        std::to_string(report.maxResidual) + ")");
    }
}

double PoissonSystem::hamiltonianValue(std::span<const double> x) const {
    return hamiltonian_.eval(x, hamiltonianParams_);
}

std::vector<double> PoissonSystem::hamiltonianGradient(std::span<const double> x) const {
    return hamiltonian_.gradient(x, hamiltonianParams_);
}

std::vector<double> PoissonSystem::vectorField(std::span<const double> x) const {
    auto grad = hamiltonianGradient(x);
    std::vector<double> field(static_cast<std::size_t>(dim()), 0.0);
    std::size_t idx = 0;
    for (const auto& [key, e] : bivector_.entries()) {
        auto [i, j] = key;
        double pij = e.eval(x, entryParams_[idx++]);
        field[static_cast<std::size_t>(i)] += pij * grad[static_cast<std::size_t>(j)];
        field[static_cast<std::size_t>(j)] -= pij * grad[static_cast<std::size_t>(i)];
    }
    return field;
}

Eigen::MatrixXd PoissonSystem::bivectorMatrix(std::span<const double> x) const {
    return bivector_.matrixAt(x, parameters_);
}

std::vector<std::string> PoissonSystem::invariantNames() const {
    std::vector<std::string> names;
    for (const auto& ne : casimirs_) names.push_back(ne.name);
    for (const auto& ne : integrals_) names.push_back(ne.name);
    return names;
}

const Expression* PoissonSystem::findInvariant(const std::string& name) const {
    for (const auto& ne : casimirs_)
        if (ne.name == name) return &ne.expression;
    for (const auto& ne : integrals_)
        if (ne.name == name) return &ne.expression;
    return nullptr;
}

double PoissonSystem::invariantValue(const std::string& name, std::span<const double> x) const {
    const Expression* e = findInvariant(name);
    if (!e) throw std::invalid_argument("unknown invariant '" + name + "'");
    return e->eval(x, e->bindParameters(parameters_));
}

Point PoissonSystem::makePoint(std::span<const double> x) const {
    return Point(std::vector<double>(x.begin(), x.end()), parameters_);
}

bool PoissonSystem::admissible(std::span<const double> x) const {
    if (positiveDomain_)
        for (double v : x)
            if (!(v > 0.0)) return false;
    if (singularLocus_) {
        double locus;
        try {
            locus = singularLocus_->eval(x, singularLocusParams_);
        } catch (const expr::DomainError&) {
            return false;
        }
        if (std::fabs(locus) <= kSingularLocusMargin) return false;
    }
    return true;
}

std::vector<double> PoissonSystem::samplePoint(SplitMix64& rng) const {
    const std::size_t n = static_cast<std::size_t>(dim());
    std::vector<double> x(n);
    for (int attempt = 0; attempt < 1000; ++attempt) {
        for (std::size_t i = 0; i < n; ++i) x[i] = rng.uniform(box_.lo[i], box_.hi[i]);
        if (admissible(x)) return x;
    }
    throw CheckSkipError("sampling box yields no admissible points");
}

CheckReport PoissonSystem::checkCasimir(const Expression& c, int samples, std::uint64_t seed,
                                        double tol) const {
    if (c.chart() != chart())
        throw std::invalid_argument("checkCasimir: expression uses a different chart");
    auto cParams = c.bindParameters(parameters_);

    CheckReport report;
    report.check = "casimir";
    report.tolerance = tol;
    report.samples = samples;
    report.seed = seed;

    SplitMix64 rng(seed);
    for (int k = 0; k < samples; ++k) {
        auto x = samplePoint(rng);
        double residual;
        try {
            auto grad = c.gradient(x, cParams);
            std::vector<double> sharp(static_cast<std::size_t>(dim()), 0.0);
            std::size_t idx = 0;
            for (const auto& [key, e] : bivector_.entries()) {
                auto [i, j] = key;
                double pij = e.eval(x, entryParams_[idx++]);
                sharp[static_cast<std::size_t>(i)] += pij * grad[static_cast<std::size_t>(j)];
                sharp[static_cast<std::size_t>(j)] -= pij * grad[static_cast<std::size_t>(i)];
            }
            residual = 0.0;
            for (double v : sharp) residual = std::max(residual, std::fabs(v));
        } catch (const expr::DomainError&) {
            ++report.skipped;
            continue;
        }
        if (residual > report.maxResidual) {
            report.maxResidual = residual;
            report.worstPoint = x;
        }
    }
    if (report.skipped > samples / 2)
        throw CheckSkipError("checkCasimir: more than half of the sample points were skipped");
    report.passed = report.maxResidual <= tol;
    return report;
}

CheckReport PoissonSystem::involutionCheck(const std::vector<NamedExpression>& functions,
                                           int samples, std::uint64_t seed, double tol) const {
    CheckReport report;
    report.check = "involution";
    report.tolerance = tol;
    report.samples = samples;
    report.seed = seed;

    for (const auto& ne : functions)
        if (ne.expression.chart() != chart())
            throw std::invalid_argument("involutionCheck: '" + ne.name +
                                        "' uses a different chart");

    SplitMix64 rng(seed);
    for (int k = 0; k < samples; ++k) {
        auto x = samplePoint(rng);
        Point p = makePoint(x);
        bool skippedPoint = false;
        for (std::size_t a = 0; a < functions.size() && !skippedPoint; ++a) {
            for (std::size_t b = a + 1; b < functions.size(); ++b) {
                double residual;
                try {
                    residual = std::fabs(
                        bracketEval(bivector_, functions[a].expression, functions[b].expression, p));
                } catch (const expr::DomainError&) {
                    ++report.skipped;
                    skippedPoint = true;
                    break;
                }
                if (residual > report.maxResidual) {
                    report.maxResidual = residual;
                    report.worstPoint = x;
                    report.detail = "{" + functions[a].name + ", " + functions[b].name + "}";
                }
            }
        }
    }
    if (report.skipped > samples / 2)
        throw CheckSkipError("involutionCheck: more than half of the sample points were skipped");
    report.passed = report.maxResidual <= tol;
    return report;
}

CheckReport PoissonSystem::jacobiCheck(int samples, std::uint64_t seed, double tol) const {
    CheckReport report;
    report.check = "jacobi";
    report.tolerance = tol;
    report.samples = samples;
    report.seed = seed;

    const int n = dim();
    if (n < 3) {
        report.passed = true;
        report.detail = "fewer than three coordinates; jacobiator vanishes identically";
        return report;
    }

    std::vector<Expression> coords;
    coords.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) coords.push_back(Expression::coordinate(i, chart()));

    SplitMix64 rng(seed);
    for (int s = 0; s < samples; ++s) {
        auto x = samplePoint(rng);
        Point p = makePoint(x);
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j)
                for (int k = j + 1; k < n; ++k) {
                    double residual = std::fabs(jacobiator(bivector_, coords[static_cast<std::size_t>(i)],
                                                           coords[static_cast<std::size_t>(j)],
                                                           coords[static_cast<std::size_t>(k)], p));
                    if (residual > report.maxResidual) {
                        report.maxResidual = residual;
                        report.worstPoint = x;
                        report.detail = "(" + chart()[static_cast<std::size_t>(i)] + ", " +
                                        chart()[static_cast<std::size_t>(j)] + ", " +
                                        chart()[static_cast<std::size_t>(k)] + ")";
                    }
                }
    }
    report.passed = report.maxResidual <= tol;
    return report;
}

} // namespace gmech::poisson
