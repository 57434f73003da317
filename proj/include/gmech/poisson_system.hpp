// A bivector field paired with a Hamiltonian, bound parameter values and
// declared invariants, plus the seeded verification checks (Casimir,
// involution, Jacobi) that certify the declarations.
#pragma once

#include <cstdint>
#include <optional>

#include "gmech/bivector.hpp"
#include "gmech/rng.hpp"

namespace gmech::poisson {

struct NamedExpression {
    std::string name;
    Expression expression;
};

struct SamplingBox {
    std::vector<double> lo, hi;

    static SamplingBox cube(int dim, double a = -2.0, double b = 2.0) {
        return {std::vector<double>(static_cast<std::size_t>(dim), a),
                std::vector<double>(static_cast<std::size_t>(dim), b)};
    }
};

// Result of a stochastic check. passed <=> maxResidual <= tolerance.
struct CheckReport {
    std::string check;
    bool passed = false;
    double tolerance = 0.0;
    int samples = 0;
    std::uint64_t seed = 0;
    double maxResidual = 0.0;
    std::vector<double> worstPoint;
    int skipped = 0;
    std::string detail;
};

struct CheckSkipError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

inline constexpr double kDefaultCheckTol = 1e-8;
inline constexpr std::uint64_t kDefaultSeed = 42;
inline constexpr int kDefaultSamples = 100;

// Points where the singular-locus predicate vanishes within this margin are
// excluded from sampling.
inline constexpr double kSingularLocusMargin = 1e-6;

class PoissonSystem {
public:
    struct Config {
        BivectorField bivector;
        Expression hamiltonian;
        std::map<std::string, double> parameters;
        std::vector<NamedExpression> casimirs;
        std::vector<NamedExpression> integrals;
        std::optional<Expression> singularLocus;
        std::optional<SamplingBox> samplingBox;
        bool positiveDomain = false;  // all coordinates must stay strictly positive
    };

    // Validates that the Hamiltonian and every declared expression live on
    // the bivector's chart, and that every declared Casimir actually passes
    // checkCasimir at the default tolerance.
    explicit PoissonSystem(Config cfg);

    int dim() const { return bivector_.dim(); }
    const std::vector<std::string>& chart() const { return bivector_.chart(); }
    const BivectorField& bivector() const { return bivector_; }
    const Expression& hamiltonian() const { return hamiltonian_; }
    const std::map<std::string, double>& parameters() const { return parameters_; }
    const std::vector<NamedExpression>& casimirs() const { return casimirs_; }
    const std::vector<NamedExpression>& integrals() const { return integrals_; }
    const std::optional<Expression>& singularLocus() const { return singularLocus_; }
    const SamplingBox& samplingBox() const { return box_; }
    bool positiveDomain() const { return positiveDomain_; }

    // Canonical bivector with an additively separable Hamiltonian H = T(p) + V(q);
    // the explicit symplectic steppers require this.
    bool canonicalSeparable() const { return canonicalSeparable_; }

    double hamiltonianValue(std::span<const double> x) const;
    std::vector<double> hamiltonianGradient(std::span<const double> x) const;

    // X_H(x), the generator of xdot_i = {x_i, H}.
    std::vector<double> vectorField(std::span<const double> x) const;

    Eigen::MatrixXd bivectorMatrix(std::span<const double> x) const;

    // Declared invariants: casimirs first, then integrals.
    std::vector<std::string> invariantNames() const;
    const Expression* findInvariant(const std::string& name) const;
    double invariantValue(const std::string& name, std::span<const double> x) const;

    Point makePoint(std::span<const double> x) const;

    // True when x avoids the singular locus and the positivity domain.
    bool admissible(std::span<const double> x) const;

    // Draws an admissible sample from the sampling box; throws CheckSkipError
    // after too many rejections.
    std::vector<double> samplePoint(SplitMix64& rng) const;

    // residual = max over samples of || pi#(dC) ||_inf
    CheckReport checkCasimir(const Expression& c, int samples = kDefaultSamples,
                             std::uint64_t seed = kDefaultSeed,
                             double tol = kDefaultCheckTol) const;

    // pairwise {f_i, f_j} residuals over the given functions
    CheckReport involutionCheck(const std::vector<NamedExpression>& functions,
                                int samples = kDefaultSamples, std::uint64_t seed = kDefaultSeed,
                                double tol = kDefaultCheckTol) const;

    // jacobiator over all coordinate triples
    CheckReport jacobiCheck(int samples = kDefaultSamples, std::uint64_t seed = kDefaultSeed,
                            double tol = 1e-9) const;

private:
    BivectorField bivector_;
    Expression hamiltonian_;
    std::map<std::string, double> parameters_;
    std::vector<NamedExpression> casimirs_;
    std::vector<NamedExpression> integrals_;
    std::optional<Expression> singularLocus_;
    SamplingBox box_;
    bool positiveDomain_ = false;
    bool canonicalSeparable_ = false;

    // parameter vectors resolved once for the hot paths
    std::vector<double> hamiltonianParams_;
    std::vector<std::vector<double>> entryParams_;
    std::vector<double> singularLocusParams_;
};

// Additive separability of H over a canonical chart (q1..qn, p1..pn):
// every additive term references only q's or only p's.
bool isSeparableHamiltonian(const Expression& h, int halfDim);

} // namespace gmech::poisson
