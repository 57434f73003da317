// Fixed-step time integration for Poisson dynamics xdot = X_H(x):
// classical RK4 as the baseline, symplectic Euler and Stormer-Verlet for
// canonical separable systems, and the implicit midpoint rule, which
// preserves quadratic invariants to solver tolerance.
#pragma once

#include <string>

#include "gmech/poisson_system.hpp"

namespace gmech::integrate {

using poisson::PoissonSystem;

enum class Method { Rk4, SymplecticEuler, Verlet, ImplicitMidpoint };

Method methodFromName(const std::string& name);
const char* methodName(Method m);

struct StepperConfig {
    Method method = Method::Rk4;
    double step = 0.0;
    double solveTol = 1e-12;   // implicit midpoint residual target
    int maxIterations = 100;

    StepperConfig() = default;
    StepperConfig(Method m, double h) : method(m), step(h) {}
};

struct Trajectory {
    std::vector<double> times;                       // t_k = k * h, uniform
    std::vector<std::vector<double>> states;
    std::vector<std::string> invariantNames;
    std::vector<std::vector<double>> invariantTraces;  // one series per name

    std::size_t size() const { return times.size(); }
};

struct DriftReport {
    double maxAbsDrift = 0.0;
    double finalDrift = 0.0;
    std::vector<double> series;  // I(x_k) - I(x_0)
};

// Stepper aborted mid-run; carries the last accepted step index and the
// partial trajectory up to it.
struct IntegrationAbort : std::runtime_error {
    long stepIndex;
    Trajectory partial;
    IntegrationAbort(const std::string& msg, long step, Trajectory traj)
        : std::runtime_error(msg + " (step " + std::to_string(step) + ")"),
          stepIndex(step), partial(std::move(traj)) {}
};

// Fixed-point / Newton solve did not reach the residual target.
struct ConvergenceError : std::runtime_error {
    double lastResidual;
    ConvergenceError(const std::string& msg, double residual)
        : std::runtime_error(msg), lastResidual(residual) {}
};

struct MethodRequirementError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::vector<double> rk4Step(const PoissonSystem& sys, std::span<const double> x, double h);

// p' = p - h dV/dq(q);  q' = q + h dT/dp(p')   [requires canonical separable]
std::vector<double> symplecticEulerStep(const PoissonSystem& sys, std::span<const double> x,
                                        double h);

// half kick / drift / half kick                 [requires canonical separable]
std::vector<double> verletStep(const PoissonSystem& sys, std::span<const double> x, double h);

// solves x' = x + h X_H((x + x')/2) by fixed-point iteration with a
// finite-difference Newton fallback
std::vector<double> implicitMidpointStep(const PoissonSystem& sys, std::span<const double> x,
                                         double h, double tol = 1e-12, int maxIter = 100);

// Applies the configured stepper n times, tracing the named invariants at
// every state. Missing names throw; an aborting step rethrows
// IntegrationAbort with the partial trajectory attached.
Trajectory integrate(const PoissonSystem& sys, std::span<const double> x0,
                     const StepperConfig& config, long nSteps,
                     const std::vector<std::string>& tracedInvariants);

DriftReport invariantDrift(const Trajectory& traj, const std::string& name);

// CSV with header t,<coordinates...>,<invariants...> at full double precision.
void writeTrajectoryCsv(std::ostream& out, const Trajectory& traj,
                        const std::vector<std::string>& coordinateNames);

} // namespace gmech::integrate
