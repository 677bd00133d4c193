#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <random>
#include <sstream>

#include "psc/functionals.hpp"
#include "psc/io_util.hpp"
#include "psc/run.hpp"
#include "psc/snapshot.hpp"

using namespace psc;

namespace {

std::filesystem::path fresh_dir(const std::string& tag) {
    auto p = std::filesystem::temp_directory_path() / ("psc_test_" + tag);
    std::filesystem::remove_all(p);
    std::filesystem::create_directories(p);
    return p;
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream is(p, std::ios::binary);
    REQUIRE(is.good());
    std::stringstream ss;
    ss << is.rdbuf();
    return ss.str();
}
}  // namespace

TEST_CASE("presets parse and regenerate") {
    Preset p = parse_preset("cosgap:0.1");
    CHECK(p.name == "cosgap");
    REQUIRE(p.params.size() == 1);
    CHECK(p.params[0] == 0.1);
    CHECK(preset_to_string(p) == "cosgap:0.10000000000000001");
    CHECK(parse_preset(preset_to_string(p)).params[0] == 0.1);

    CHECK_THROWS_AS(parse_preset(""), std::invalid_argument);
    CHECK_THROWS_AS(parse_preset("cosgap:zed"), std::invalid_argument);

    TorusGrid g(3, 16);
    CHECK_THROWS_AS(make_preset_field(g, parse_preset("nosuch:1")), std::invalid_argument);
    CHECK_THROWS_AS(make_preset_field(g, parse_preset("cosgap:1.5")), std::invalid_argument);
}

TEST_CASE("every built-in preset is admissible in range") {
    TorusGrid g(3, 16);
    for (const char* text : {"cosgap:0.1", "cosgap:0.5", "bumpneg:0.3:0.1",
                             "bumpneg:0.1:0.05", "twopeak:0.5", "twopeak:1.5"}) {
        ScalarField f = make_preset_field(g, parse_preset(text));
        AdmissibilityReport r = admissibility(f);
        CHECK_MESSAGE(r.admissible, text);
    }
}

TEST_CASE("flag parsing and file precedence") {
    auto dir = fresh_dir("cfg");
    {
        std::ofstream os(dir / "run.cfg");
        os << "# comment line\n"
           << "mode = solve\n"
           << "res = 32\n"
           << "tol = 1e-5\n";
    }
    RunConfig a = parse_config({"--config", (dir / "run.cfg").string()});
    CHECK(a.mode == RunMode::solve);
    CHECK(a.res == 32);
    CHECK(a.tol == 1e-5);

    // flags override the file
    RunConfig b = parse_config({"solve", "--res", "16", "--config",
                                (dir / "run.cfg").string()});
    CHECK(b.res == 16);
    CHECK(b.tol == 1e-5);

    // unknown key is named in the error
    {
        std::ofstream os(dir / "bad.cfg");
        os << "rez = 16\n";
    }
    try {
        parse_config({"solve", "--config", (dir / "bad.cfg").string()});
        FAIL("expected unknown-key error");
    } catch (const std::invalid_argument& e) {
        CHECK(std::string(e.what()).find("rez") != std::string::npos);
    }

    CHECK_THROWS_AS(parse_config({}), std::invalid_argument);  // mode required
    CHECK_THROWS_AS(parse_config({"fly"}), std::invalid_argument);
    CHECK_THROWS_AS(parse_config({"solve", "--res", "15"}), std::invalid_argument);
}

TEST_CASE("schedule flag") {
    RunConfig c = parse_config({"continue", "--schedule", "3,4,5,5.5,5.8"});
    REQUIRE(c.schedule.size() == 5);
    CHECK(c.schedule[0] == 3.0);
    CHECK(c.schedule[4] == 5.8);
    CHECK_THROWS_AS(parse_config({"continue", "--schedule", "3,,4"}),
                    std::invalid_argument);
}

TEST_CASE("snapshot bytes are pinned") {
    // golden file: n = 1, res = 4, values {0, -1, 0.5, 3}; little-endian
    auto dir = fresh_dir("golden");
    TorusGrid g(1, 4);
    write_snapshot(dir / "g.pscf", ScalarField(g, {0.0, -1.0, 0.5, 3.0}));
    std::string bytes = slurp(dir / "g.pscf");
    static const unsigned char expect[] = {
        'P',  'S',  'C',  'F',                          // magic
        0x01, 0x00, 0x00, 0x00,                         // version 1
        0x01, 0x00, 0x00, 0x00,                         // n = 1
        0x04, 0x00, 0x00, 0x00,                         // extent 4
        0,    0,    0,    0,    0,    0,    0,    0,     // 0.0
        0,    0,    0,    0,    0,    0,    0xf0, 0xbf,  // -1.0
        0,    0,    0,    0,    0,    0,    0xe0, 0x3f,  // 0.5
        0,    0,    0,    0,    0,    0,    0x08, 0x40,  // 3.0
    };
    REQUIRE(bytes.size() == sizeof expect);
    for (std::size_t i = 0; i < sizeof expect; ++i)
        CHECK(static_cast<unsigned char>(bytes[i]) == expect[i]);
}

TEST_CASE("snapshot round trip and layout") {
    auto dir = fresh_dir("snap");
    TorusGrid g(3, 8);
    std::mt19937_64 gen(4);
    std::vector<double> v(g.point_count());
    for (double& x : v) x = 2.0 * (double(gen() >> 11) * 0x1.0p-53) - 1.0;
    ScalarField u(g, v);
    write_snapshot(dir / "u.pscf", u);

    std::string bytes = slurp(dir / "u.pscf");
    REQUIRE(bytes.size() == 4 + 4 + 4 + 3 * 4 + 512 * 8);
    CHECK(bytes.substr(0, 4) == "PSCF");
    CHECK(static_cast<unsigned char>(bytes[4]) == 1);  // version, little-endian

    ScalarField back = read_snapshot(dir / "u.pscf");
    CHECK(back.grid() == g);
    for (std::size_t i = 0; i < v.size(); ++i) CHECK(back[i] == v[i]);

    std::ofstream(dir / "junk.pscf") << "not a snapshot at all";
    CHECK_THROWS(read_snapshot(dir / "junk.pscf"));
}

TEST_CASE("solve mode writes artifacts and reports success") {
    auto dir = fresh_dir("solve");
    RunConfig cfg = parse_config({"solve", "--dim", "3", "--res", "16", "--preset",
                                  "cosgap:0.1", "--q", "4", "--tol", "1e-7", "--out",
                                  (dir / "run").string()});
    CHECK(run(cfg) == 0);
    CHECK(std::filesystem::exists(dir / "run" / "u.pscf"));
    CHECK(std::filesystem::exists(dir / "run" / "summary.csv"));
    CHECK(std::filesystem::exists(dir / "run" / "manifest.txt"));
    CHECK(!std::filesystem::exists(dir / "run" / ".failed"));

    // summary CSV parses back with full precision
    std::string body = slurp(dir / "run" / "summary.csv");
    CHECK(body.find("lambda,") != std::string::npos);
    std::istringstream is(body);
    std::string line;
    std::getline(is, line);
    CHECK(line == "key,value");
    bool saw_lambda = false;
    while (std::getline(is, line)) {
        auto comma = line.find(',');
        REQUIRE(comma != std::string::npos);
        if (line.substr(0, comma) == "lambda") {
            double lam = std::strtod(line.c_str() + comma + 1, nullptr);
            CHECK(lam > 0.0);
            CHECK(g17(lam) == line.substr(comma + 1));  // 17-digit round trip
            saw_lambda = true;
        }
    }
    CHECK(saw_lambda);
}

TEST_CASE("failed runs leave a marker") {
    auto dir = fresh_dir("fail");
    RunConfig cfg = parse_config({"solve", "--res", "16", "--preset", "cosgap:0.1",
                                  "--q", "4", "--max-iters", "3", "--out",
                                  (dir / "run").string()});
    CHECK_THROWS(run(cfg));
    CHECK(std::filesystem::exists(dir / "run" / ".failed"));
}

TEST_CASE("verify mode passes its identity battery") {
    auto dir = fresh_dir("verify");
    RunConfig cfg = parse_config({"verify", "--out", (dir / "run").string()});
    CHECK(run(cfg) == 0);
    std::string body = slurp(dir / "run" / "verification.csv");
    CHECK(body.find("name,measured,expected,tolerance,pass") == 0);
    CHECK(body.find(",0\n") == std::string::npos);  // no failing row

    // the constants table dumps alongside and carries exact doubles
    std::string consts = slurp(dir / "run" / "constants.csv");
    CHECK(consts.find("n,omega_n,omega_n_minus_1,k_n_2_sq,bubble_mass,two_star") == 0);
    CHECK(consts.find("\n3,") != std::string::npos);
    CHECK(consts.find("\n10,") != std::string::npos);
}

TEST_CASE("emitted CSV doubles round-trip at 17 digits") {
    auto dir = fresh_dir("roundtrip");
    RunConfig cfg = parse_config({"continue", "--res", "8", "--preset", "cosgap:0.1",
                                  "--schedule", "4,5", "--out", (dir / "run").string()});
    CHECK(run(cfg) == 0);
    for (const char* name : {"trace.csv", "report.csv"}) {
        std::istringstream is(slurp(dir / "run" / name));
        std::string line;
        std::getline(is, line);  // header
        while (std::getline(is, line)) {
            std::stringstream row(line);
            std::string cell;
            while (std::getline(row, cell, ',')) {
                if (cell.find('.') == std::string::npos &&
                    cell.find('e') == std::string::npos &&
                    cell.find("nan") == std::string::npos)
                    continue;  // integer column
                double v = std::strtod(cell.c_str(), nullptr);
                if (std::isnan(v))
                    CHECK(cell == "nan");
                else
                    CHECK(g17(v) == cell);
            }
        }
    }
}

TEST_CASE("verify mode can include the gap experiment") {
    auto dir = fresh_dir("verifygap");
    RunConfig cfg = parse_config({"verify", "--gap", "--res", "8", "--schedule",
                                  "4,5", "--out", (dir / "run").string()});
    CHECK(run(cfg) == 0);
    std::string body = slurp(dir / "run" / "verification.csv");
    CHECK(body.find("strict_gap_margin") != std::string::npos);
    CHECK(body.find(",0\n") == std::string::npos);
}

TEST_CASE("continue then report round trip") {
    auto dir = fresh_dir("cont");
    RunConfig cfg = parse_config({"continue", "--res", "8", "--preset", "cosgap:0.1",
                                  "--schedule", "4,5", "--out", (dir / "run").string()});
    CHECK(run(cfg) == 0);
    std::string trace = slurp(dir / "run" / "trace.csv");
    CHECK(trace.find("q,lambda,u_max,x_max_i0,x_max_i1,x_max_i2,mu_q,eta_q,el_residual") == 0);
    // strictly increasing q column
    std::istringstream is(trace);
    std::string line;
    std::getline(is, line);
    double prev_q = 0.0;
    int rows = 0;
    while (std::getline(is, line)) {
        double qv = std::strtod(line.c_str(), nullptr);
        CHECK(qv > prev_q);
        prev_q = qv;
        ++rows;
    }
    CHECK(rows == 2);
    CHECK(std::filesystem::exists(dir / "run" / "report.csv"));

    // solve, then re-analyze the stored snapshot
    RunConfig s = parse_config({"solve", "--res", "8", "--preset", "cosgap:0.1", "--q",
                                "4", "--out", (dir / "solverun").string()});
    CHECK(run(s) == 0);
    RunConfig r = parse_config({"report", "--in", (dir / "solverun").string(), "--out",
                                (dir / "rep").string()});
    CHECK(run(r) == 0);
    CHECK(std::filesystem::exists(dir / "rep" / "report.csv"));
    CHECK(std::filesystem::exists(dir / "rep" / "green_checks.csv"));
    CHECK(std::filesystem::exists(dir / "rep" / "green_xmax.pscf"));
    std::string checks = slurp(dir / "rep" / "green_checks.csv");
    CHECK(checks.find(",0\n") == std::string::npos);  // all hard identities hold
}

TEST_CASE("identical config and seed reproduce identical bytes") {
    auto dir = fresh_dir("repro");
    for (const char* sub : {"a", "b"}) {
        RunConfig cfg = parse_config({"solve", "--res", "8", "--preset", "cosgap:0.1",
                                      "--q", "4", "--seed", "777", "--out",
                                      (dir / sub).string()});
        CHECK(run(cfg) == 0);
    }
    CHECK(slurp(dir / "a" / "summary.csv") == slurp(dir / "b" / "summary.csv"));
    CHECK(slurp(dir / "a" / "u.pscf") == slurp(dir / "b" / "u.pscf"));
    CHECK(slurp(dir / "a" / "manifest.txt") == slurp(dir / "b" / "manifest.txt"));
}
