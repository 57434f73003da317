#include "gmech/integrators.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>

namespace gmech::integrate {

Method methodFromName(const std::string& name) {
    if (name == "rk4") return Method::Rk4;
    if (name == "symplectic_euler") return Method::SymplecticEuler;
    if (name == "verlet") return Method::Verlet;
    if (name == "implicit_midpoint") return Method::ImplicitMidpoint;
    throw std::invalid_argument("unknown method '" + name + "'");
}

const char* methodName(Method m) {
    switch (m) {
    case Method::Rk4: return "rk4";
    case Method::SymplecticEuler: return "symplectic_euler";
    case Method::Verlet: return "verlet";
    case Method::ImplicitMidpoint: return "implicit_midpoint";
    }
    return "?";
}

namespace {

std::vector<double> axpy(std::span<const double> x, double a, std::span<const double> d) {
    std::vector<double> out(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) out[i] = x[i] + a * d[i];
    return out;
}

void requireCanonicalSeparable(const PoissonSystem& sys) {
    if (!sys.canonicalSeparable())
        throw MethodRequirementError("method requires canonical separable structure");
}

} // namespace

std::vector<double> rk4Step(const PoissonSystem& sys, std::span<const double> x, double h) {
    auto k1 = sys.vectorField(x);
    auto k2 = sys.vectorField(axpy(x, h / 2, k1));
    auto k3 = sys.vectorField(axpy(x, h / 2, k2));
    auto k4 = sys.vectorField(axpy(x, h, k3));
    std::vector<double> out(x.size());
    for (std::size_t i = 0; i < x.size(); ++i)
        out[i] = x[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    return out;
}

std::vector<double> symplecticEulerStep(const PoissonSystem& sys, std::span<const double> x,
                                        double h) {
    requireCanonicalSeparable(sys);
    const std::size_t n = x.size() / 2;
    std::vector<double> out(x.begin(), x.end());

    // kick: p' = p - h dH/dq(q, .); separability makes dH/dq independent of p
    auto grad = sys.hamiltonianGradient(out);
    for (std::size_t i = 0; i < n; ++i) out[n + i] -= h * grad[i];

    // drift: q' = q + h dH/dp(., p')
    grad = sys.hamiltonianGradient(out);
    for (std::size_t i = 0; i < n; ++i) out[i] += h * grad[n + i];
    return out;
}

std::vector<double> verletStep(const PoissonSystem& sys, std::span<const double> x, double h) {
    requireCanonicalSeparable(sys);
    const std::size_t n = x.size() / 2;
    std::vector<double> out(x.begin(), x.end());

    auto grad = sys.hamiltonianGradient(out);
    for (std::size_t i = 0; i < n; ++i) out[n + i] -= 0.5 * h * grad[i];   // half kick

    grad = sys.hamiltonianGradient(out);
    for (std::size_t i = 0; i < n; ++i) out[i] += h * grad[n + i];         // drift

    grad = sys.hamiltonianGradient(out);
    for (std::size_t i = 0; i < n; ++i) out[n + i] -= 0.5 * h * grad[i];   // half kick
    return out;
}

std::vector<double> implicitMidpointStep(const PoissonSystem& sys, std::span<const double> x,
                                         double h, double tol, int maxIter) {
    const std::size_t n = x.size();

    auto residualOf = [&](std::span<const double> y, std::vector<double>& field) {
        std::vector<double> mid(n);
        for (std::size_t i = 0; i < n; ++i) mid[i] = 0.5 * (x[i] + y[i]);
        field = sys.vectorField(mid);
        double r = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            r = std::max(r, std::fabs(y[i] - x[i] - h * field[i]));
        return r;
    };

    // The residual bottoms out at the round-off floor of the state magnitude,
    // so acceptance is measured relative to it.
    double scale = 1.0;
    for (double v : x) scale = std::max(scale, std::fabs(v));
    const double target = tol * scale;

    std::vector<double> y(x.begin(), x.end());
    std::vector<double> field;
    double residual = residualOf(y, field);
    int iter = 0;

    // Fixed-point iteration, contracting once h * Lipschitz < 1. Iterations
    // continue below `target` while they still improve, so the committed
    // state sits at the round-off floor; quadratic-invariant drift would
    // otherwise accumulate tol-sized errors every step.
    for (; iter < maxIter / 2; ++iter) {
        if (residual == 0.0) return y;
        std::vector<double> yNext(n);
        for (std::size_t i = 0; i < n; ++i) yNext[i] = x[i] + h * field[i];
        std::vector<double> fieldNext;
        double residualNext = residualOf(yNext, fieldNext);
        if (residualNext >= residual) break;  // stalled at the floor
        y = std::move(yNext);
        field = std::move(fieldNext);
        residual = residualNext;
    }
    if (residual <= target) return y;

    // Newton on G(y) = y - x - h X_H((x+y)/2) with a finite-difference Jacobian
    const double fdStep = 1e-7;
    for (; iter < maxIter; ++iter) {
        Eigen::MatrixXd jac = Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(n),
                                                        static_cast<Eigen::Index>(n));
        std::vector<double> mid(n);
        for (std::size_t i = 0; i < n; ++i) mid[i] = 0.5 * (x[i] + y[i]);
        for (std::size_t j = 0; j < n; ++j) {
            std::vector<double> mp = mid, mm = mid;
            mp[j] += fdStep;
            mm[j] -= fdStep;
            auto fp = sys.vectorField(mp);
            auto fm = sys.vectorField(mm);
            for (std::size_t i = 0; i < n; ++i)
                jac(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) -=
                    h * 0.5 * (fp[i] - fm[i]) / (2 * fdStep);
        }
        Eigen::VectorXd g(static_cast<Eigen::Index>(n));
        for (std::size_t i = 0; i < n; ++i)
            g(static_cast<Eigen::Index>(i)) = y[i] - x[i] - h * field[i];
        Eigen::VectorXd delta = jac.partialPivLu().solve(g);
        std::vector<double> yNext = y;
        for (std::size_t i = 0; i < n; ++i) yNext[i] -= delta(static_cast<Eigen::Index>(i));
        std::vector<double> fieldNext;
        double residualNext = residualOf(yNext, fieldNext);
        if (residualNext >= residual) break;  // stalled
        y = std::move(yNext);
        field = std::move(fieldNext);
        residual = residualNext;
    }
    if (residual <= target) return y;
    throw ConvergenceError("implicit midpoint did not converge (residual " +
                               std::to_string(residual) + ")",
                           residual);
}

Trajectory integrate(const PoissonSystem& sys, std::span<const double> x0,
                     const StepperConfig& config, long nSteps,
                     const std::vector<std::string>& tracedInvariants) {
    if (static_cast<int>(x0.size()) != sys.dim())
        throw std::invalid_argument("integrate: initial state has wrong dimension");
    if (config.step <= 0.0) throw std::invalid_argument("integrate: step must be positive");
    if (config.solveTol <= 0.0) throw std::invalid_argument("integrate: solve tolerance must be positive");
    if (config.maxIterations < 1) throw std::invalid_argument("integrate: max iterations must be >= 1");
    if (nSteps < 0) throw std::invalid_argument("integrate: negative step count");

    std::vector<const expr::Expression*> traced;
    for (const auto& name : tracedInvariants) {
        const expr::Expression* e = sys.findInvariant(name);
        if (!e) throw std::invalid_argument("integrate: unknown invariant '" + name + "'");
        traced.push_back(e);
    }
    std::vector<std::vector<double>> tracedParams;
    for (const auto* e : traced) tracedParams.push_back(e->bindParameters(sys.parameters()));

    Trajectory traj;
    traj.invariantNames = tracedInvariants;
    traj.invariantTraces.resize(traced.size());
    traj.times.reserve(static_cast<std::size_t>(nSteps) + 1);
    traj.states.reserve(static_cast<std::size_t>(nSteps) + 1);

    auto record = [&](long k, const std::vector<double>& state) {
        traj.times.push_back(static_cast<double>(k) * config.step);
        traj.states.push_back(state);
        for (std::size_t t = 0; t < traced.size(); ++t)
            traj.invariantTraces[t].push_back(traced[t]->eval(state, tracedParams[t]));
    };

    std::vector<double> state(x0.begin(), x0.end());
    try {
        record(0, state);
        for (long k = 1; k <= nSteps; ++k) {
            switch (config.method) {
            case Method::Rk4: state = rk4Step(sys, state, config.step); break;
            case Method::SymplecticEuler: state = symplecticEulerStep(sys, state, config.step); break;
            case Method::Verlet: state = verletStep(sys, state, config.step); break;
            case Method::ImplicitMidpoint:
                state = implicitMidpointStep(sys, state, config.step, config.solveTol,
                                             config.maxIterations);
                break;
            }
            if (sys.positiveDomain())
                for (double v : state)
                    if (!(v > 0.0))
                        throw expr::DomainError("state left the positive domain",
                                                "coordinate <= 0");
            record(k, state);
        }
    } catch (const expr::DomainError& err) {
        const long lastAccepted = static_cast<long>(traj.times.size()) - 1;
        throw IntegrationAbort(std::string("domain error: ") + err.what(), lastAccepted,
                               std::move(traj));
    } catch (const ConvergenceError& err) {
        const long lastAccepted = static_cast<long>(traj.times.size()) - 1;
        throw IntegrationAbort(std::string("solver failure: ") + err.what(), lastAccepted,
                               std::move(traj));
    }
    return traj;
}

DriftReport invariantDrift(const Trajectory& traj, const std::string& name) {
    auto it = std::find(traj.invariantNames.begin(), traj.invariantNames.end(), name);
    if (it == traj.invariantNames.end())
        throw std::invalid_argument("invariantDrift: '" + name + "' was not traced");
    const auto& series = traj.invariantTraces[static_cast<std::size_t>(
        it - traj.invariantNames.begin())];

    DriftReport report;
    if (series.empty()) return report;
    const double base = series.front();
    report.series.reserve(series.size());
    for (double v : series) {
        double drift = v - base;
        report.series.push_back(drift);
        report.maxAbsDrift = std::max(report.maxAbsDrift, std::fabs(drift));
    }
    report.finalDrift = report.series.back();
    return report;
}

void writeTrajectoryCsv(std::ostream& out, const Trajectory& traj,
                        const std::vector<std::string>& coordinateNames) {
    out << "t";
    for (const auto& c : coordinateNames) out << ',' << c;
    for (const auto& n : traj.invariantNames) out << ',' << n;
    out << '\n';

    char buf[40];
    auto emit = [&](double v) {
        std::snprintf(buf, sizeof(buf), "%.17g", v);
        out << buf;
    };
    for (std::size_t k = 0; k < traj.size(); ++k) {
        emit(traj.times[k]);
        for (double v : traj.states[k]) {
            out << ',';
            emit(v);
        }
        for (const auto& series : traj.invariantTraces) {
            out << ',';
            emit(series[k]);
        }
        out << '\n';
    }
}

} // namespace gmech::integrate
