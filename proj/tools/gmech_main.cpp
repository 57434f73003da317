// gmech: simulate, verify and export Poisson/Hamiltonian systems.
//
// Exit codes: 0 success / check passed, 1 clean check failure,
//             2 usage or input error, 3 numerical abort.
#include <atomic>
#include <filesystem>
#include <fstream>
#include <future>
#include <iostream>
#include <mutex>
#include <sstream>
#include <thread>

#include "CLI11.hpp"

#include "gmech/catalog.hpp"
#include "gmech/integrators.hpp"
#include "gmech/symplectic.hpp"
#include "gmech/system_document.hpp"

namespace {

namespace fs = std::filesystem;
using gmech::integrate::integrate;
using gmech::integrate::StepperConfig;
using gmech::integrate::Trajectory;
using gmech::poisson::CheckReport;
using gmech::poisson::PoissonSystem;

constexpr int kExitOk = 0;
constexpr int kExitCheckFailed = 1;
constexpr int kExitUsage = 2;
constexpr int kExitNumerical = 3;

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::map<std::string, double> parseParamFlags(const std::vector<std::string>& flags) {
    std::map<std::string, double> params;
    for (const auto& flag : flags) {
        auto eq = flag.find('=');
        if (eq == std::string::npos)
            throw UsageError("--param expects key=value, got '" + flag + "'");
        std::string key = flag.substr(0, eq);
        try {
            std::size_t used = 0;
            std::string tail = flag.substr(eq + 1);
            double value = std::stod(tail, &used);
            if (used != tail.size()) throw std::invalid_argument(tail);
            params[key] = value;
        } catch (const std::exception&) {
            throw UsageError("--param " + key + ": value is not a number");
        }
    }
    return params;
}

// "--system builtin:name" or a document path
struct LoadedSystem {
    std::string label;
    PoissonSystem system;
};

LoadedSystem loadSystem(const std::string& spec, const std::map<std::string, double>& params) {
    if (spec.rfind("builtin:", 0) == 0) {
        std::string name = spec.substr(8);
        auto specimen = gmech::catalog::build(name, params);
        return {name, std::move(specimen.system)};
    }
    if (!params.empty())
        throw UsageError("--param overrides are only supported for builtin systems");
    auto doc = gmech::doc::loadDocument(spec);
    return {doc.name, gmech::doc::systemFromDocument(doc)};
}

std::vector<double> parseStateList(const std::string& text, int expected) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string piece;
    while (std::getline(ss, piece, ',')) {
        try {
            out.push_back(std::stod(piece));
        } catch (const std::exception&) {
            throw UsageError("cannot parse '" + piece + "' as a number in '" + text + "'");
        }
    }
    if (expected >= 0 && static_cast<int>(out.size()) != expected)
        throw UsageError("expected " + std::to_string(expected) + " comma-separated values, got " +
                         std::to_string(out.size()));
    return out;
}

std::vector<std::string> splitNames(const std::string& text) {
    std::vector<std::string> out;
    std::stringstream ss(text);
    std::string piece;
    while (std::getline(ss, piece, ','))
        if (!piece.empty()) out.push_back(piece);
    return out;
}

void writeFile(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw UsageError("cannot open '" + path + "' for writing");
    out << content;
}

// ---------------------------------------------------------------------------
// simulate
// ---------------------------------------------------------------------------

struct SimulateArgs {
    std::string system;
    std::vector<std::string> params;
    std::string x0;
    std::string method = "rk4";
    double h = 0.0;
    long steps = 0;
    std::string trace;
    std::string out;
};

int runSimulate(const SimulateArgs& args) {
    auto loaded = loadSystem(args.system, parseParamFlags(args.params));
    auto x0 = parseStateList(args.x0, loaded.system.dim());
    if (args.h <= 0.0) throw UsageError("--h must be positive");
    if (args.steps < 0) throw UsageError("--steps must be non-negative");

    StepperConfig cfg(gmech::integrate::methodFromName(args.method), args.h);
    std::vector<std::string> traced = args.trace.empty() ? loaded.system.invariantNames()
                                                         : splitNames(args.trace);

    Trajectory traj;
    try {
        traj = integrate(loaded.system, x0, cfg, args.steps, traced);
    } catch (const gmech::integrate::IntegrationAbort& abort) {
        std::cerr << "simulate: " << abort.what() << "\n";
        return kExitNumerical;
    }

    std::ostringstream csv;
    writeTrajectoryCsv(csv, traj, loaded.system.chart());
    writeFile(args.out, csv.str());
    std::cout << "wrote " << traj.size() << " rows to " << args.out << "\n";
    return kExitOk;
}

// ---------------------------------------------------------------------------
// check
// ---------------------------------------------------------------------------

struct CheckArgs {
    std::string system;
    std::vector<std::string> params;
    std::string kind;
    double tol = -1.0;  // per-kind default resolved below
    int samples = gmech::poisson::kDefaultSamples;
    std::uint64_t seed = gmech::poisson::kDefaultSeed;
    std::string target;
    std::string out;
};

int runCheck(const CheckArgs& args) {
    auto loaded = loadSystem(args.system, parseParamFlags(args.params));
    const PoissonSystem& sys = loaded.system;
    auto targets = splitNames(args.target);

    std::vector<CheckReport> reports;
    if (args.kind == "jacobi") {
        double tol = args.tol < 0.0 ? 1e-9 : args.tol;
        reports.push_back(sys.jacobiCheck(args.samples, args.seed, tol));
    } else if (args.kind == "schouten") {
        auto trivector = gmech::poisson::schoutenSelfBracket(sys.bivector(), sys.parameters());
        CheckReport report;
        report.check = "schouten";
        report.samples = 0;
        report.tolerance = 0.0;
        for (const auto& [key, poly] : trivector) {
            if (poly.isZero()) continue;
            report.maxResidual = std::max(report.maxResidual, 1.0);
            report.detail += (report.detail.empty() ? "" : "; ") + std::string("T^{") +
                             std::to_string(key[0] + 1) + "," + std::to_string(key[1] + 1) + "," +
                             std::to_string(key[2] + 1) + "} = " + poly.str(sys.chart());
        }
        report.passed = report.maxResidual == 0.0;
        if (report.detail.empty()) report.detail = "all trivector components vanish";
        reports.push_back(std::move(report));
    } else if (args.kind == "casimir") {
        double tol = args.tol < 0.0 ? gmech::poisson::kDefaultCheckTol : args.tol;
        auto names = targets;
        if (names.empty())
            for (const auto& ne : sys.casimirs()) names.push_back(ne.name);
        if (names.empty()) throw UsageError("no casimirs declared and no --target given");
        for (const auto& name : names) {
            const auto* e = sys.findInvariant(name);
            if (!e) throw UsageError("unknown invariant '" + name + "'");
            auto report = sys.checkCasimir(*e, args.samples, args.seed, tol);
            report.detail = name;
            reports.push_back(std::move(report));
        }
    } else if (args.kind == "involution") {
        double tol = args.tol < 0.0 ? gmech::poisson::kDefaultCheckTol : args.tol;
        std::vector<gmech::poisson::NamedExpression> functions;
        if (targets.empty()) {
            functions = sys.integrals();
        } else {
            for (const auto& name : targets) {
                const auto* e = sys.findInvariant(name);
                if (!e) throw UsageError("unknown invariant '" + name + "'");
                functions.push_back({name, *e});
            }
        }
        reports.push_back(sys.involutionCheck(functions, args.samples, args.seed, tol));
    } else {
        throw UsageError("unknown check kind '" + args.kind + "'");
    }

    bool allPassed = true;
    std::string rendered;
    for (const auto& report : reports) {
        allPassed = allPassed && report.passed;
        rendered += gmech::doc::renderCheckReport(report, loaded.label);
        std::cout << loaded.label << " " << report.check
                  << (report.detail.empty() ? "" : " [" + report.detail + "]") << ": "
                  << (report.passed ? "passed" : "FAILED")
                  << " (max residual " << report.maxResidual << ")\n";
    }
    if (!args.out.empty()) writeFile(args.out, rendered);
    return allPassed ? kExitOk : kExitCheckFailed;
}

// ---------------------------------------------------------------------------
// portrait
// ---------------------------------------------------------------------------

struct PortraitArgs {
    std::string system;
    std::vector<std::string> params;
    std::string grid;
    std::string method = "rk4";
    double h = 0.0;
    long steps = 0;
    std::string outDir;
};

struct GridAxis {
    std::string name;
    double lo = 0.0, hi = 0.0;
    int count = 0;
};

GridAxis parseAxis(const std::string& text) {
    auto eq = text.find('=');
    if (eq == std::string::npos) throw UsageError("grid axis '" + text + "' lacks '='");
    GridAxis axis;
    axis.name = text.substr(0, eq);
    auto spec = text.substr(eq + 1);
    auto c1 = spec.find(':');
    auto c2 = spec.find(':', c1 == std::string::npos ? 0 : c1 + 1);
    if (c1 == std::string::npos || c2 == std::string::npos)
        throw UsageError("grid axis '" + text + "' must be name=lo:hi:count");
    try {
        axis.lo = std::stod(spec.substr(0, c1));
        axis.hi = std::stod(spec.substr(c1 + 1, c2 - c1 - 1));
        axis.count = std::stoi(spec.substr(c2 + 1));
    } catch (const std::exception&) {
        throw UsageError("grid axis '" + text + "': cannot parse numbers");
    }
    if (axis.count < 1) throw UsageError("grid axis '" + text + "': count must be >= 1");
    return axis;
}

int runPortrait(const PortraitArgs& args) {
    auto loaded = loadSystem(args.system, parseParamFlags(args.params));
    const PoissonSystem& sys = loaded.system;
    if (sys.dim() != 2) throw UsageError("portrait requires a 2-dimensional chart");
    if (args.h <= 0.0) throw UsageError("--h must be positive");

    std::vector<GridAxis> axes;
    for (const auto& piece : splitNames(args.grid)) axes.push_back(parseAxis(piece));
    if (axes.size() != 2) throw UsageError("portrait needs exactly two grid axes");
    for (const auto& axis : axes)
        if (std::find(sys.chart().begin(), sys.chart().end(), axis.name) == sys.chart().end())
            throw UsageError("grid axis '" + axis.name + "' is not a chart coordinate");
    if (axes[0].name == axes[1].name) throw UsageError("grid axes must differ");

    auto values = [](const GridAxis& axis) {
        std::vector<double> v;
        for (int i = 0; i < axis.count; ++i)
            v.push_back(axis.count == 1
                            ? axis.lo
                            : axis.lo + (axis.hi - axis.lo) * i / (axis.count - 1));
        return v;
    };
    auto v0 = values(axes[0]);
    auto v1 = values(axes[1]);

    const bool axisFirstIsChartFirst = axes[0].name == sys.chart()[0];

    fs::create_directories(args.outDir);
    StepperConfig cfg(gmech::integrate::methodFromName(args.method), args.h);
    auto traced = sys.invariantNames();

    struct Seed {
        int index;
        std::vector<double> x0;
        std::string file;
    };
    std::vector<Seed> seeds;
    int index = 0;
    for (double a : v0) {
        for (double b : v1) {
            std::vector<double> x0(2);
            x0[axisFirstIsChartFirst ? 0 : 1] = a;
            x0[axisFirstIsChartFirst ? 1 : 0] = b;
            char name[32];
            std::snprintf(name, sizeof(name), "seed_%04d.csv", index);
            seeds.push_back({index, std::move(x0), name});
            ++index;
        }
    }

    // trajectories are independent; fan them out and let each worker own its
    // file. the content of each file depends only on its seed, so the output
    // is identical whatever the scheduling.
    std::atomic<bool> aborted{false};
    std::string abortMessage;
    std::mutex abortMutex;
    auto worker = [&](const Seed& seed) {
        try {
            auto traj = integrate(sys, seed.x0, cfg, args.steps, traced);
            std::ostringstream csv;
            writeTrajectoryCsv(csv, traj, sys.chart());
            writeFile((fs::path(args.outDir) / seed.file).string(), csv.str());
        } catch (const gmech::integrate::IntegrationAbort& abort) {
            std::lock_guard<std::mutex> lock(abortMutex);
            aborted = true;
            abortMessage = "seed " + std::to_string(seed.index) + ": " + abort.what();
        }
    };

    const std::size_t hardware = std::max(1u, std::thread::hardware_concurrency());
    for (std::size_t begin = 0; begin < seeds.size(); begin += hardware) {
        std::vector<std::future<void>> batch;
        for (std::size_t k = begin; k < std::min(seeds.size(), begin + hardware); ++k)
            batch.push_back(std::async(std::launch::async, worker, std::cref(seeds[k])));
        for (auto& f : batch) f.get();
    }
    if (aborted) {
        std::cerr << "portrait: " << abortMessage << "\n";
        return kExitNumerical;
    }

    // index file last, by the coordinator
    std::ostringstream indexCsv;
    indexCsv << "index," << axes[0].name << "," << axes[1].name << ",file\n";
    char buf[40];
    for (const auto& seed : seeds) {
        double a = seed.x0[axisFirstIsChartFirst ? 0 : 1];
        double b = seed.x0[axisFirstIsChartFirst ? 1 : 0];
        indexCsv << seed.index << ',';
        std::snprintf(buf, sizeof(buf), "%.17g", a);
        indexCsv << buf << ',';
        std::snprintf(buf, sizeof(buf), "%.17g", b);
        indexCsv << buf << ',' << seed.file << '\n';
    }
    writeFile((fs::path(args.outDir) / "index.csv").string(), indexCsv.str());
    std::cout << "wrote " << seeds.size() << " trajectories to " << args.outDir << "\n";
    return kExitOk;
}

// ---------------------------------------------------------------------------
// darboux
// ---------------------------------------------------------------------------

int runDarboux(const std::string& formPath, const std::string& outPath) {
    std::ifstream in(formPath);
    if (!in) throw UsageError("cannot open '" + formPath + "'");
    std::vector<std::vector<double>> rows;
    std::string line;
    while (std::getline(in, line)) {
        std::istringstream ss(line);
        std::vector<double> row;
        double v;
        while (ss >> v) row.push_back(v);
        if (!row.empty()) rows.push_back(std::move(row));
    }
    if (rows.empty()) throw UsageError("matrix file '" + formPath + "' is empty");
    const auto d = rows.size();
    Eigen::MatrixXd omega(d, d);
    for (std::size_t i = 0; i < d; ++i) {
        if (rows[i].size() != d) throw UsageError("matrix file is not square");
        for (std::size_t j = 0; j < d; ++j)
            omega(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
    }

    if (!gmech::symplin::isSymplecticForm(omega)) {
        std::cerr << "darboux: not symplectic (degenerate or non-skew input)\n";
        return kExitCheckFailed;
    }
    // text input may carry rounded entries; the validated type wants exact skew
    Eigen::MatrixXd skew = 0.5 * (omega - omega.transpose().eval());
    gmech::symplin::SymplecticForm form(skew);
    Eigen::MatrixXd basis = gmech::symplin::darbouxBasis(form);
    double residual = (basis.transpose() * skew * basis -
                       gmech::symplin::standardForm(static_cast<int>(d) / 2))
                          .cwiseAbs()
                          .maxCoeff();

    std::ostringstream out;
    char buf[40];
    for (Eigen::Index i = 0; i < basis.rows(); ++i) {
        for (Eigen::Index j = 0; j < basis.cols(); ++j) {
            std::snprintf(buf, sizeof(buf), "%.17g", basis(i, j));
            out << (j ? " " : "") << buf;
        }
        out << '\n';
    }
    std::snprintf(buf, sizeof(buf), "%.17g", residual);
    out << "residual " << buf << '\n';
    writeFile(outPath, out.str());
    std::cout << "darboux residual " << residual << "\n";
    return kExitOk;
}

// ---------------------------------------------------------------------------
// export
// ---------------------------------------------------------------------------

int runExport(const std::string& systemSpec, const std::vector<std::string>& params,
              const std::string& outPath) {
    if (systemSpec.rfind("builtin:", 0) != 0)
        throw UsageError("export expects --system builtin:<name>");
    auto specimen = gmech::catalog::build(systemSpec.substr(8), parseParamFlags(params));
    writeFile(outPath, gmech::doc::renderDocument(gmech::doc::documentFromSpecimen(specimen)));
    std::cout << "exported " << specimen.name << " to " << outPath << "\n";
    return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"gmech: Poisson and symplectic structure toolkit"};
    // --h is a step-size flag here, so help must not claim -h
    app.set_help_flag("--help", "print help");
    app.require_subcommand(1);

    SimulateArgs sim;
    auto* simulateCmd =
        app.add_subcommand("simulate", "integrate a system and write a CSV trajectory");
    simulateCmd->set_help_flag("--help", "print help");
    simulateCmd->add_option("--system", sim.system, "builtin:<name> or a definition file")
        ->required();
    simulateCmd->add_option("--param", sim.params, "parameter override key=value (repeatable)");
    simulateCmd->add_option("--x0", sim.x0, "initial state, comma separated")->required();
    simulateCmd->add_option("--method", sim.method,
                            "rk4 | symplectic_euler | verlet | implicit_midpoint");
    simulateCmd->add_option("--h", sim.h, "step size")->required();
    simulateCmd->add_option("--steps", sim.steps, "number of steps")->required();
    simulateCmd->add_option("--trace", sim.trace, "invariants to trace (default: all declared)");
    simulateCmd->add_option("--out", sim.out, "output CSV path")->required();

    CheckArgs chk;
    auto* checkCmd = app.add_subcommand("check", "run a structural verification");
    checkCmd->set_help_flag("--help", "print help");
    checkCmd->add_option("--system", chk.system, "builtin:<name> or a definition file")->required();
    checkCmd->add_option("--param", chk.params, "parameter override key=value (repeatable)");
    checkCmd->add_option("--kind", chk.kind, "jacobi | schouten | casimir | involution")
        ->required();
    checkCmd->add_option("--tol", chk.tol, "residual tolerance");
    checkCmd->add_option("--samples", chk.samples, "sample count");
    checkCmd->add_option("--seed", chk.seed, "PRNG seed");
    checkCmd->add_option("--target", chk.target, "invariant names, comma separated");
    checkCmd->add_option("--out", chk.out, "write the JSON report here");

    PortraitArgs por;
    auto* portraitCmd = app.add_subcommand("portrait", "grid of trajectories on a 2D chart");
    portraitCmd->set_help_flag("--help", "print help");
    portraitCmd->add_option("--system", por.system, "builtin:<name> or a definition file")
        ->required();
    portraitCmd->add_option("--param", por.params, "parameter override key=value (repeatable)");
    portraitCmd->add_option("--grid", por.grid, "axis=lo:hi:count,axis=lo:hi:count")->required();
    portraitCmd->add_option("--method", por.method, "stepper");
    portraitCmd->add_option("--h", por.h, "step size")->required();
    portraitCmd->add_option("--steps", por.steps, "number of steps")->required();
    portraitCmd->add_option("--out", por.outDir, "output directory")->required();

    std::string darbouxForm, darbouxOut;
    auto* darbouxCmd = app.add_subcommand("darboux", "Darboux basis of a symplectic matrix");
    darbouxCmd->add_option("--form", darbouxForm, "whitespace-separated matrix file")->required();
    darbouxCmd->add_option("--out", darbouxOut, "output path")->required();

    std::string exportSystem, exportOut;
    std::vector<std::string> exportParams;
    auto* exportCmd = app.add_subcommand("export", "write a builtin as a definition file");
    exportCmd->add_option("--system", exportSystem, "builtin:<name>")->required();
    exportCmd->add_option("--param", exportParams, "parameter override key=value (repeatable)");
    exportCmd->add_option("--out", exportOut, "output path")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);  // --help and friends
        app.exit(e);
        return kExitUsage;
    }

    try {
        if (simulateCmd->parsed()) return runSimulate(sim);
        if (checkCmd->parsed()) return runCheck(chk);
        if (portraitCmd->parsed()) return runPortrait(por);
        if (darbouxCmd->parsed()) return runDarboux(darbouxForm, darbouxOut);
        if (exportCmd->parsed()) return runExport(exportSystem, exportParams, exportOut);
    } catch (const UsageError& err) {
        std::cerr << "gmech: " << err.what() << "\n";
        return kExitUsage;
    } catch (const gmech::doc::DocumentError& err) {
        std::cerr << "gmech: " << err.what() << "\n";
        return kExitUsage;
    } catch (const gmech::symplin::NotSymplecticError& err) {
        std::cerr << "gmech: " << err.what() << "\n";
        return kExitCheckFailed;
    } catch (const gmech::poisson::JacobiViolationError& err) {
        std::cerr << "gmech: " << err.what() << "\n";
        return kExitCheckFailed;
    } catch (const gmech::poisson::CheckSkipError& err) {
        std::cerr << "gmech: " << err.what() << "\n";
        return kExitNumerical;
    } catch (const gmech::poisson::NonPolynomialError& err) {
        std::cerr << "gmech: " << err.what() << "\n";
        return kExitUsage;
    } catch (const std::invalid_argument& err) {
        std::cerr << "gmech: " << err.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& err) {
        std::cerr << "gmech: " << err.what() << "\n";
        return kExitNumerical;
    }
    return kExitUsage;
}
