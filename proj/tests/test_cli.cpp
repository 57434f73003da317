// End-to-end tests of the gmech binary: flags, exit codes, file outputs and
// byte-level determinism. The binary path comes from the build system.
#include "doctest.h"

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#ifndef GMECH_CLI_PATH
#error "GMECH_CLI_PATH must point at the gmech binary"
#endif

namespace {

namespace fs = std::filesystem;

struct CliResult {
    int exitCode;
    std::string output;  // stdout + stderr
};

fs::path scratchDir() {
    static fs::path dir = [] {
        fs::path d = fs::temp_directory_path() / "gmech_cli_tests";
        fs::remove_all(d);
        fs::create_directories(d);
        return d;
    }();
    return dir;
}

CliResult runCli(const std::string& args) {
    fs::path capture = scratchDir() / "capture.txt";
    std::string command = std::string(GMECH_CLI_PATH) + " " + args + " > " + capture.string() +
                          " 2>&1";
    int status = std::system(command.c_str());
    CliResult result;
    result.exitCode = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    std::ifstream in(capture);
    std::ostringstream buf;
    buf << in.rdbuf();
    result.output = buf.str();
    return result;
}

std::string slurp(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

int countDataLines(const fs::path& path) {
    std::ifstream in(path);
    REQUIRE(in.good());
    std::string line;
    int lines = -1;  // skip the header
    while (std::getline(in, line))
        if (!line.empty()) ++lines;
    return lines;
}

std::vector<std::vector<double>> readCsv(const fs::path& path, std::vector<std::string>* header) {
    std::ifstream in(path);
    REQUIRE(in.good());
    std::string line;
    std::getline(in, line);
    if (header) {
        header->clear();
        std::stringstream hs(line);
        std::string cell;
        while (std::getline(hs, cell, ',')) header->push_back(cell);
    }
    std::vector<std::vector<double>> rows;
    while (std::getline(in, line)) {
        std::stringstream ls(line);
        std::string cell;
        std::vector<double> row;
        while (std::getline(ls, cell, ',')) row.push_back(std::stod(cell));
        rows.push_back(std::move(row));
    }
    return rows;
}

} // namespace

TEST_CASE("simulate: euler top casimir column stays flat") {
    fs::path out = scratchDir() / "top.csv";
    auto r = runCli("simulate --system builtin:euler_top --param I1=1 --param I2=2 --param I3=3 "
                    "--x0 1,1,1 --method implicit_midpoint --h 0.01 --steps 10000 --out " +
                    out.string());
    REQUIRE(r.exitCode == 0);

    std::vector<std::string> header;
    auto rows = readCsv(out, &header);
    REQUIRE(header == std::vector<std::string>{"t", "L1", "L2", "L3", "C", "H"});
    REQUIRE(rows.size() == 10001);
    double c0 = rows.front()[4];
    double worst = 0.0;
    for (const auto& row : rows) worst = std::max(worst, std::fabs(row[4] - c0));
    CHECK(worst <= 1e-10);
}

TEST_CASE("simulate: harmonic oscillator near one period") {
    // 6284 steps of h = 0.001 overshoot 2*pi by 8.1e-4 in time, which is the
    // dominant error; the verlet method error itself is ~1e-7
    fs::path out = scratchDir() / "harm.csv";
    auto r = runCli("simulate --system builtin:harmonic --param w=1 --x0 1,0 --method verlet "
                    "--h 0.001 --steps 6284 --out " + out.string());
    REQUIRE(r.exitCode == 0);
    auto rows = readCsv(out, nullptr);
    const auto& last = rows.back();
    double dist = std::hypot(last[1] - 1.0, last[2]);
    CHECK(dist <= 1e-3);
}

TEST_CASE("simulate: argument errors exit 2") {
    auto r = runCli("simulate --system builtin:harmonic --method verlet --h 0.001 --steps 10 "
                    "--out /tmp/x.csv");
    CHECK(r.exitCode == 2);  // missing --x0
    CHECK(r.output.find("--x0") != std::string::npos);

    CHECK(runCli("simulate --system builtin:harmonic --x0 1,0 --method nope --h 0.1 --steps 1 "
                 "--out /tmp/x.csv").exitCode == 2);
    CHECK(runCli("simulate --system builtin:harmonic --x0 1,0,0 --method rk4 --h 0.1 --steps 1 "
                 "--out /tmp/x.csv").exitCode == 2);
    CHECK(runCli("nonsense").exitCode == 2);
}

TEST_CASE("simulate: numerical aborts exit 3 and name the step") {
    auto r = runCli("simulate --system builtin:lotka_volterra --x0 0.1,5 --method rk4 --h 50 "
                    "--steps 100 --out " + (scratchDir() / "lv.csv").string());
    CHECK(r.exitCode == 3);
    CHECK(r.output.find("step") != std::string::npos);
}

TEST_CASE("check: builtin jacobi passes, helicity counterexample fails") {
    CHECK(runCli("check --system builtin:r3_hyperboloid --kind jacobi").exitCode == 0);

    fs::path def = scratchDir() / "helicity.json";
    std::ofstream(def) << R"({
      "name": "helicity",
      "coordinates": ["x", "y", "z"],
      "bivector": {"kind": "expressions",
                   "entries": {"1,2": "y", "1,3": "-x", "2,3": "z"}},
      "hamiltonian": "x"
    })";
    fs::path report = scratchDir() / "helicity_report.json";
    auto r = runCli("check --system " + def.string() + " --kind jacobi --out " + report.string());
    CHECK(r.exitCode == 1);
    auto reportText = slurp(report);
    CHECK(reportText.find("\"passed\": false") != std::string::npos);
    CHECK(reportText.find("worst_point") != std::string::npos);

    // the same structure also fails the exact schouten test
    auto rs = runCli("check --system " + def.string() + " --kind schouten");
    CHECK(rs.exitCode == 1);
}

TEST_CASE("check: schouten passes for polynomial poisson structures") {
    CHECK(runCli("check --system builtin:r3_hyperboloid --kind schouten").exitCode == 0);
    CHECK(runCli("check --system builtin:euler_top --kind schouten").exitCode == 0);
    CHECK(runCli("check --system builtin:lotka_volterra --kind schouten").exitCode == 0);
}

TEST_CASE("check: involution certificate for the spherical pendulum") {
    auto r = runCli("check --system builtin:spherical_pendulum --kind involution "
                    "--target H,p_theta");
    CHECK(r.exitCode == 0);
}

TEST_CASE("check: casimir failure is a clean exit 1") {
    // q is not a casimir of the canonical structure
    fs::path def = scratchDir() / "free.json";
    std::ofstream(def) << R"({
      "name": "free",
      "coordinates": ["q", "p"],
      "bivector": {"kind": "canonical", "n": 1},
      "hamiltonian": "p^2/2",
      "integrals": {"q": "q", "p": "p"}
    })";
    auto r = runCli("check --system " + def.string() + " --kind involution --target q,p");
    CHECK(r.exitCode == 1);
}

TEST_CASE("portrait: pendulum separatrix picture") {
    fs::path dir = scratchDir() / "portrait_pend";
    auto r = runCli("portrait --system builtin:pendulum --param g=1 --param L=1 "
                    "--grid theta=-3:3:7,p=-2:2:5 --method verlet --h 0.01 --steps 3000 --out " +
                    dir.string());
    REQUIRE(r.exitCode == 0);

    REQUIRE(countDataLines(dir / "index.csv") == 35);

    int bounded = 0, rotating = 0;
    for (int i = 0; i < 35; ++i) {
        char name[32];
        std::snprintf(name, sizeof(name), "seed_%04d.csv", i);
        auto rows = readCsv(dir / name, nullptr);
        REQUIRE(rows.size() == 3001);
        double theta0 = rows.front()[1];
        double p0 = rows.front()[2];
        double energy = p0 * p0 / 2.0 - std::cos(theta0);  // g = L = 1
        double maxExcursion = 0.0;
        bool monotone = true;
        for (std::size_t k = 0; k < rows.size(); ++k) {
            maxExcursion = std::max(maxExcursion, std::fabs(rows[k][1] - theta0));
            if (k > 0 && (rows[k][1] - rows[k - 1][1]) * (p0 >= 0 ? 1.0 : -1.0) < 0.0)
                monotone = false;
        }
        if (energy < -0.05) {
            ++bounded;  // librations around the stable equilibrium
            CHECK(maxExcursion < M_PI);
        } else if (energy > 1.05 && std::fabs(p0) > 0.1) {
            ++rotating;  // above the separatrix theta advances monotonically
            CHECK(monotone);
        }
    }
    CHECK(bounded >= 5);
    CHECK(rotating >= 8);
}

TEST_CASE("portrait: count=1 grids produce exactly one trajectory") {
    fs::path dir = scratchDir() / "portrait_single";
    auto r = runCli("portrait --system builtin:harmonic --grid q=1:1:1,p=0:0:1 "
                    "--method rk4 --h 0.1 --steps 10 --out " + dir.string());
    REQUIRE(r.exitCode == 0);
    CHECK(fs::exists(dir / "seed_0000.csv"));
    CHECK_FALSE(fs::exists(dir / "seed_0001.csv"));
    CHECK(countDataLines(dir / "index.csv") == 1);
}

TEST_CASE("portrait: harmonic level curves are preserved") {
    fs::path dir = scratchDir() / "portrait_harm";
    auto r = runCli("portrait --system builtin:harmonic --grid q=-1:1:3,p=-1:1:3 "
                    "--method implicit_midpoint --h 0.01 --steps 2000 --out " + dir.string());
    REQUIRE(r.exitCode == 0);
    for (int i = 0; i < 9; ++i) {
        char name[32];
        std::snprintf(name, sizeof(name), "seed_%04d.csv", i);
        auto rows = readCsv(dir / name, nullptr);
        double h0 = rows.front()[3];  // traced H column
        for (const auto& row : rows) CHECK(std::fabs(row[3] - h0) <= 1e-6);
    }
}

TEST_CASE("portrait: non-2D charts are rejected") {
    auto r = runCli("portrait --system builtin:euler_top --grid L1=0:1:2,L2=0:1:2 "
                    "--method rk4 --h 0.01 --steps 10 --out " + (scratchDir() / "p3").string());
    CHECK(r.exitCode == 2);
}

TEST_CASE("darboux: fixtures and degeneracy") {
    fs::path j0 = scratchDir() / "j0.txt";
    std::ofstream(j0) << "0 1\n-1 0\n";
    fs::path out = scratchDir() / "j0_basis.txt";
    auto r = runCli("darboux --form " + j0.string() + " --out " + out.string());
    REQUIRE(r.exitCode == 0);
    CHECK(slurp(out).find("residual 0") != std::string::npos);

    fs::path scaled = scratchDir() / "scaled.txt";
    std::ofstream(scaled) << "0 2\n-2 0\n";
    fs::path out2 = scratchDir() / "scaled_basis.txt";
    auto r2 = runCli("darboux --form " + scaled.string() + " --out " + out2.string());
    REQUIRE(r2.exitCode == 0);
    // parse the residual line
    auto text = slurp(out2);
    auto at = text.rfind("residual ");
    double residual = std::stod(text.substr(at + 9));
    CHECK(residual <= 1e-12);

    fs::path odd = scratchDir() / "odd.txt";
    std::ofstream(odd) << "0 1 -2\n-1 0 3\n2 -3 0\n";
    auto r3 = runCli("darboux --form " + odd.string() + " --out /tmp/unused.txt");
    CHECK(r3.exitCode == 1);
    CHECK(r3.output.find("not symplectic") != std::string::npos);
}

TEST_CASE("determinism: identical command lines give byte-identical outputs") {
    fs::path a = scratchDir() / "det_a.csv";
    fs::path b = scratchDir() / "det_b.csv";
    std::string flags = "simulate --system builtin:euler_top --x0 1,0.5,0.25 "
                        "--method implicit_midpoint --h 0.01 --steps 500 --out ";
    REQUIRE(runCli(flags + a.string()).exitCode == 0);
    REQUIRE(runCli(flags + b.string()).exitCode == 0);
    CHECK(slurp(a) == slurp(b));

    fs::path ra = scratchDir() / "rep_a.json";
    fs::path rb = scratchDir() / "rep_b.json";
    std::string check = "check --system builtin:lotka_volterra --kind involution --seed 42 --out ";
    REQUIRE(runCli(check + ra.string()).exitCode == 0);
    REQUIRE(runCli(check + rb.string()).exitCode == 0);
    CHECK(slurp(ra) == slurp(rb));

    // portrait determinism across runs with concurrent workers
    fs::path pa = scratchDir() / "det_port_a";
    fs::path pb = scratchDir() / "det_port_b";
    std::string portrait = "portrait --system builtin:harmonic --grid q=-1:1:4,p=-1:1:4 "
                           "--method verlet --h 0.05 --steps 200 --out ";
    REQUIRE(runCli(portrait + pa.string()).exitCode == 0);
    REQUIRE(runCli(portrait + pb.string()).exitCode == 0);
    for (const auto& entry : fs::directory_iterator(pa))
        CHECK(slurp(entry.path()) == slurp(pb / entry.path().filename()));
}

TEST_CASE("export round trip: file system matches the builtin bit for bit") {
    fs::path def = scratchDir() / "top_export.json";
    REQUIRE(runCli("export --system builtin:euler_top --param I1=1 --param I2=2 --param I3=3 "
                   "--out " + def.string()).exitCode == 0);

    // checks agree
    CHECK(runCli("check --system " + def.string() + " --kind jacobi").exitCode == 0);
    CHECK(runCli("check --system " + def.string() + " --kind casimir --tol 1e-12").exitCode == 0);

    // one pinned trajectory, byte for byte
    fs::path fromBuiltin = scratchDir() / "traj_builtin.csv";
    fs::path fromFile = scratchDir() / "traj_file.csv";
    std::string tail = " --x0 1,1,1 --method implicit_midpoint --h 0.01 --steps 200 --out ";
    REQUIRE(runCli("simulate --system builtin:euler_top --param I1=1 --param I2=2 --param I3=3" +
                   tail + fromBuiltin.string()).exitCode == 0);
    REQUIRE(runCli("simulate --system " + def.string() + tail + fromFile.string()).exitCode == 0);
    CHECK(slurp(fromBuiltin) == slurp(fromFile));
}

TEST_CASE("simulate honors an explicit --trace subset") {
    fs::path out = scratchDir() / "trace.csv";
    auto r = runCli("simulate --system builtin:euler_top --x0 1,1,1 --method rk4 --h 0.01 "
                    "--steps 5 --trace C --out " + out.string());
    REQUIRE(r.exitCode == 0);
    std::vector<std::string> header;
    readCsv(out, &header);
    CHECK(header == std::vector<std::string>{"t", "L1", "L2", "L3", "C"});

    auto bad = runCli("simulate --system builtin:euler_top --x0 1,1,1 --method rk4 --h 0.01 "
                      "--steps 5 --trace nope --out " + out.string());
    CHECK(bad.exitCode == 2);
}

TEST_CASE("export round trip holds for the positive-domain specimen too") {
    fs::path def = scratchDir() / "lv_export.json";
    REQUIRE(runCli("export --system builtin:lotka_volterra --param a12=1 --param eps1=-1 "
                   "--param eps2=2 --out " + def.string()).exitCode == 0);
    CHECK(slurp(def).find("positive_domain") != std::string::npos);

    // the re-ingested system samples its positive box, so the checks run
    CHECK(runCli("check --system " + def.string() + " --kind involution").exitCode == 0);
    CHECK(runCli("check --system " + def.string() + " --kind jacobi").exitCode == 0);

    fs::path a = scratchDir() / "lv_builtin.csv";
    fs::path b = scratchDir() / "lv_file.csv";
    std::string tail = " --x0 1,1 --method implicit_midpoint --h 0.001 --steps 500 --out ";
    REQUIRE(runCli("simulate --system builtin:lotka_volterra --param a12=1 --param eps1=-1 "
                   "--param eps2=2" + tail + a.string()).exitCode == 0);
    REQUIRE(runCli("simulate --system " + def.string() + tail + b.string()).exitCode == 0);
    CHECK(slurp(a) == slurp(b));
}
