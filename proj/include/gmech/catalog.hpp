// The worked-example catalog: pendulum, harmonic oscillator, Euler's top,
// Lotka-Volterra, spherical pendulum, and the two R^3 foliations
// (hyperboloids and cylinders), each with its declared invariants verified
// at construction. Also the harmonic-oscillator action-angle map.
#pragma once

#include "gmech/poisson_system.hpp"

namespace gmech::catalog {

using poisson::CheckReport;
using poisson::PoissonSystem;

// so(3)* structure constants are taken as c^k_ij = kSo3StructureSign * eps_ijk.
// With the dynamics convention xdot_i = {x_i, H} this sign reproduces the
// rigid-body equations exactly as printed:
//   L1dot = (I2 - I3)/(I2 I3) L2 L3   (and cyclic)
inline constexpr double kSo3StructureSign = -1.0;

struct SystemSpecimen {
    std::string name;
    PoissonSystem system;
    bool canonicalSeparable;
    std::string notes;                        // description and conventions
    std::vector<CheckReport> referenceChecks; // construction-time certifications
};

std::vector<std::string> specimenNames();
bool isSpecimenName(const std::string& name);

// Default parameter values; build() fills in whatever the caller omits.
std::map<std::string, double> defaultParams(const std::string& name);

// Constructs a specimen by name. Throws std::invalid_argument for unknown
// names or invalid parameters (e.g. a Lotka-Volterra interaction matrix with
// no strictly positive equilibrium).
SystemSpecimen build(const std::string& name, std::map<std::string, double> params = {});

// Harmonic-oscillator action-angle chart, with the angle formula evaluated
// exactly as printed: phi = w arctan(q / sqrt(2 psi - q^2)), principal branch,
// the sign of p resolving the quadrant. psi = E / w.
struct ActionAngle {
    double energy;
    double action;  // psi
    double angle;   // phi
};

struct ActionAngleDomainError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

ActionAngle actionAngle(double q, double p, double w);

// Inverse chart for w = 1: q = sqrt(2 psi) sin(phi), p = sqrt(2 psi) cos(phi).
std::array<double, 2> actionAngleInverse(double phi, double psi);

} // namespace gmech::catalog
