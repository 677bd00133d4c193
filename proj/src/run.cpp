#include "psc/run.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <fstream>
#include <map>
#include <numbers>
#include <sstream>

#include "psc/blowup.hpp"
#include "psc/green.hpp"
#include "psc/io_util.hpp"
#include "psc/snapshot.hpp"
#include "psc/verify.hpp"

namespace psc {

namespace {

constexpr double two_pi = 2.0 * std::numbers::pi;

std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    std::size_t e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

std::vector<double> parse_schedule_list(const std::string& text) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        tok = trim(tok);
        if (tok.empty()) throw std::invalid_argument("empty schedule entry");
        std::size_t used = 0;
        out.push_back(std::stod(tok, &used));
        if (used != tok.size())
            throw std::invalid_argument("bad schedule entry '" + tok + "'");
    }
    if (out.empty()) throw std::invalid_argument("empty schedule");
    return out;
}

std::string schedule_to_string(const std::vector<double>& s) {
    std::string out;
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (i) out += ',';
        out += g17(s[i]);
    }
    return out;
}

RunMode parse_mode(const std::string& s) {
    if (s == "solve") return RunMode::solve;
    if (s == "continue") return RunMode::cont;
    if (s == "verify") return RunMode::verify;
    if (s == "report") return RunMode::report;
    throw std::invalid_argument("unknown mode '" + s + "'");
}

std::string mode_to_string(RunMode m) {
    switch (m) {
        case RunMode::solve: return "solve";
        case RunMode::cont: return "continue";
        case RunMode::verify: return "verify";
        case RunMode::report: return "report";
    }
    return "?";
}

long parse_long(const std::string& v, const std::string& key) {
    try {
        std::size_t used = 0;
        long out = std::stol(v, &used);
        if (used != v.size()) throw std::invalid_argument("trailing characters");
        return out;
    } catch (const std::exception&) {
        throw std::invalid_argument("bad value for '" + key + "': " + v);
    }
}

double parse_double(const std::string& v, const std::string& key) {
    try {
        std::size_t used = 0;
        double out = std::stod(v, &used);
        if (used != v.size()) throw std::invalid_argument("trailing characters");
        return out;
    } catch (const std::exception&) {
        throw std::invalid_argument("bad value for '" + key + "': " + v);
    }
}

bool parse_bool(const std::string& v, const std::string& key) {
    if (v == "1" || v == "true") return true;
    if (v == "0" || v == "false") return false;
    throw std::invalid_argument("bad boolean for '" + key + "'");
}

std::vector<std::pair<std::string, std::string>> read_config_file(
    const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) throw std::invalid_argument("cannot open config file " + path.string());
    std::vector<std::pair<std::string, std::string>> entries;
    std::string line;
    while (std::getline(is, line)) {
        std::size_t hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        std::size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("config line without '=': " + line);
        entries.emplace_back(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    }
    return entries;
}

// --- CSV sink with deterministic formatting -----------------------------
class Csv {
public:
    Csv(const std::filesystem::path& path, const std::string& header) : os_(path) {
        if (!os_) throw std::runtime_error("cannot open " + path.string());
        os_ << header << "\n";
    }
    void row(const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i) os_ << ',';
            os_ << cells[i];
        }
        os_ << "\n";
    }
    void close() { os_.close(); }

private:
    std::ofstream os_;
};

std::vector<std::pair<std::string, std::string>> config_echo(const RunConfig& cfg) {
    std::vector<std::pair<std::string, std::string>> kv;
    kv.emplace_back("mode", mode_to_string(cfg.mode));
    kv.emplace_back("dim", std::to_string(cfg.dim));
    kv.emplace_back("res", std::to_string(cfg.res));
    kv.emplace_back("preset", preset_to_string(cfg.preset));
    kv.emplace_back("q", g17(cfg.q));
    if (!cfg.schedule.empty())
        kv.emplace_back("schedule", schedule_to_string(cfg.schedule));
    kv.emplace_back("q_start", g17(cfg.q_start));
    kv.emplace_back("q_end", g17(cfg.q_end));
    kv.emplace_back("q_steps", std::to_string(cfg.q_steps));
    kv.emplace_back("tol", g17(cfg.tol));
    kv.emplace_back("max_iters", std::to_string(cfg.max_iters));
    kv.emplace_back("step", g17(cfg.step));
    kv.emplace_back("seed", std::to_string(cfg.seed));
    kv.emplace_back("delta", g17(cfg.delta));
    kv.emplace_back("gap", cfg.gap ? "1" : "0");
    if (!cfg.in.empty()) kv.emplace_back("in", cfg.in.string());
    return kv;
}

void write_manifest(const RunConfig& cfg, const std::vector<std::string>& artifacts) {
    std::ofstream os(cfg.out / "manifest.txt");
    if (!os) throw std::runtime_error("cannot write manifest");
    os << "# config\n";
    for (const auto& [k, v] : config_echo(cfg)) os << k << " = " << v << "\n";
    os << "# artifacts\n";
    char buf[32];
    for (const std::string& a : artifacts) {
        std::uint64_t h = fnv1a64_file(cfg.out / a);
        std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
        os << buf << "  " << a << "\n";
    }
}

SolverConfig solver_config(const RunConfig& cfg) {
    SolverConfig s;
    s.step = cfg.step;
    s.tol = cfg.tol;
    s.max_iters = cfg.max_iters;
    return s;
}

std::vector<double> effective_schedule(const RunConfig& cfg, int n) {
    if (!cfg.schedule.empty()) return cfg.schedule;
    const double two_star = 2.0 * n / (n - 2.0);
    double q0 = cfg.q_start > 0.0 ? cfg.q_start : 0.5 * (2.0 + two_star);
    double qe = cfg.q_end > 0.0 ? cfg.q_end : two_star;
    return default_schedule(q0, qe, cfg.q_steps);
}

std::vector<std::string> report_row(double q, const BlowupReport& r) {
    return {g17(q),        g17(r.mu_q),        g17(r.profile_sup_err),
            g17(r.w_max),  g17(r.w_tail),      g17(r.eta_q),
            g17(r.A_est),  r.envelope_ok ? "1" : "0",
            g17(r.fitted_C_eps), g17(r.expansion_residual)};
}

const std::string kReportHeader =
    "q,mu_q,profile_sup_err,w_max,w_tail,eta_q,A_est,envelope_ok,C_eps,"
    "expansion_residual";

// ------------------------------------------------------------------ solve
int do_solve(const RunConfig& cfg) {
    TorusGrid grid(cfg.dim, cfg.res);
    ScalarField f = make_preset_field(grid, cfg.preset);
    SubcriticalSolution sol = minimize(f, cfg.q, solver_config(cfg));

    write_snapshot(cfg.out / "u.pscf", sol.u);

    const double energy = dirichlet_energy(sol.u);
    const double cval = constraint_value(f, sol.u, cfg.q);
    AdmissibilityReport rep = admissibility(f);

    Csv csv(cfg.out / "summary.csv", "key,value");
    csv.row({"mode", "solve"});
    csv.row({"preset", preset_to_string(cfg.preset)});
    csv.row({"dim", std::to_string(cfg.dim)});
    csv.row({"res", std::to_string(cfg.res)});
    csv.row({"q", g17(cfg.q)});
    csv.row({"seed", std::to_string(cfg.seed)});
    csv.row({"tol", g17(cfg.tol)});
    csv.row({"max_iters", std::to_string(cfg.max_iters)});
    csv.row({"lambda", g17(sol.lam)});
    csv.row({"energy", g17(energy)});
    csv.row({"el_residual", g17(sol.el_residual)});
    csv.row({"iters", std::to_string(sol.iters)});
    csv.row({"u_max", g17(sol.u_max)});
    csv.row({"u_min", g17(sol.u.min())});
    csv.row({"constraint", g17(cval)});
    csv.row({"mean_f", g17(rep.mean_f)});
    csv.row({"max_f", g17(rep.max_f)});
    for (int a = 0; a < cfg.dim; ++a)
        csv.row({"x_max_i" + std::to_string(a),
                 std::to_string(sol.x_max.index[static_cast<std::size_t>(a)])});
    csv.close();

    write_manifest(cfg, {"u.pscf", "summary.csv"});

    bool ok = sol.lam > 0.0 && std::abs(cval - 1.0) <= 1e-9 &&
              std::abs(energy - sol.lam) <= 1e-8 * sol.lam &&
              sol.el_residual <= cfg.tol && sol.u.min() >= 0.0;
    return ok ? 0 : 1;
}

// --------------------------------------------------------------- continue
int do_continue(const RunConfig& cfg) {
    TorusGrid grid(cfg.dim, cfg.res);
    ScalarField f = make_preset_field(grid, cfg.preset);
    std::vector<double> schedule = effective_schedule(cfg, cfg.dim);
    GreenContext ctx(grid, sharp_constants(cfg.dim));

    BlowupParams params;
    params.delta = cfg.delta;
    std::vector<std::pair<double, BlowupReport>> reports;
    std::optional<SubcriticalSolution> last;
    ContinuationTrace trace = continuation(
        f, schedule, solver_config(cfg), [&](const SubcriticalSolution& s) {
            reports.emplace_back(s.q, analyze(s, f, &ctx, params));
            last = s;
        });

    std::string header = "q,lambda,u_max";
    for (int a = 0; a < cfg.dim; ++a) header += ",x_max_i" + std::to_string(a);
    header += ",mu_q,eta_q,el_residual";
    Csv tcsv(cfg.out / "trace.csv", header);
    for (const ContinuationEntry& e : trace.entries) {
        std::vector<std::string> cells{g17(e.q), g17(e.lam), g17(e.u_max)};
        for (int a = 0; a < cfg.dim; ++a)
            cells.push_back(std::to_string(e.x_max.index[static_cast<std::size_t>(a)]));
        cells.push_back(g17(e.mu_q));
        cells.push_back(g17(e.eta_q));
        cells.push_back(g17(e.el_residual));
        tcsv.row(cells);
    }
    tcsv.close();

    Csv rcsv(cfg.out / "report.csv", kReportHeader);
    for (const auto& [q, r] : reports) rcsv.row(report_row(q, r));
    rcsv.close();

    if (last) write_snapshot(cfg.out / "u.pscf", last->u);
    write_manifest(cfg, {"trace.csv", "report.csv", "u.pscf"});

    bool ok = true;
    for (const ContinuationEntry& e : trace.entries)
        ok = ok && e.lam > 0.0 && e.el_residual <= cfg.tol;
    return ok ? 0 : 1;
}

// ----------------------------------------------------------------- verify
int do_verify(const RunConfig& cfg) {
    std::vector<VerificationOutcome> rows;

    // spectral calculus on T^3
    {
        TorusGrid g(3, cfg.res);
        ScalarField mode = ScalarField::from_function(g, [](std::span<const double> x) {
            return std::cos(two_pi * (x[0] + 2.0 * x[1]));
        });
        ScalarField lap = laplacian(mode);
        const double ev = two_pi * two_pi * 5.0;
        double worst = 0.0;
        for (std::size_t i = 0; i < mode.size(); ++i)
            worst = std::max(worst, std::abs(lap[i] - ev * mode[i]) / ev);
        rows.push_back(make_outcome("laplacian_eigenmode", worst, 0.0, 1e-12));

        ScalarField u = ScalarField::from_function(g, [](std::span<const double> x) {
            return std::sin(two_pi * x[0]) * std::cos(2.0 * two_pi * x[1]) + 0.25;
        });
        ScalarField v = ScalarField::from_function(g, [](std::span<const double> x) {
            return std::cos(two_pi * x[2]) + 0.5 * std::sin(two_pi * (x[0] + x[2]));
        });
        double lhs = integrate_product(u, laplacian(v));
        double rhs = integrate_product(v, laplacian(u));
        double scale = std::max(std::abs(lhs), 1.0);
        rows.push_back(
            make_outcome("integration_by_parts", std::abs(lhs - rhs) / scale, 0.0, 1e-12));

        ScalarField w0 = ScalarField::from_function(g, [](std::span<const double> x) {
            return std::cos(two_pi * x[0]) * std::cos(two_pi * x[1]) +
                   0.5 * std::sin(2.0 * two_pi * x[2]);
        });
        ScalarField back = solve_poisson(laplacian(w0));
        double num = 0.0, den = 0.0;
        for (std::size_t i = 0; i < w0.size(); ++i) {
            num += (back[i] - w0[i]) * (back[i] - w0[i]);
            den += w0[i] * w0[i];
        }
        rows.push_back(make_outcome("poisson_round_trip", std::sqrt(num / den), 0.0, 1e-12));
    }

    // closed-form constants
    for (int n : {3, 4, 10}) rows.push_back(bound_consistency(n));
    {
        SharpConstants c3 = sharp_constants(3);
        rows.push_back(make_outcome("k_3_2_squared", c3.k_n_2_sq,
                                    0.18255157148718099, 1e-12));
        rows.push_back(make_outcome("omega_3", c3.omega_n,
                                    2.0 * std::numbers::pi * std::numbers::pi, 1e-12));
        rows.push_back(make_outcome("bubble_mass_3", c3.bubble_mass,
                                    std::numbers::pi * std::numbers::pi / 4.0, 1e-12));
        TorusGrid g(3, 8);
        ScalarField ones = ScalarField::constant(g, 1.0);
        rows.push_back(
            make_outcome("sobolev_slack_constant", sobolev_check(ones, 2.0, c3), -1.0, 1e-12));
    }

    // stable limit expression
    rows.push_back(make_outcome("limit_s2", limit_expression(2.0, 1e-6), 0.5, 1e-2));
    rows.push_back(make_outcome("limit_s0.5", limit_expression(0.5, 1e-6), 2.0, 2e-2));
    for (double s : {0.5, 2.0, 10.0}) {
        double prev = std::numeric_limits<double>::infinity();
        double worst_increase = -std::numeric_limits<double>::infinity();
        for (double x : {1e-3, 1e-4, 1e-6}) {
            double err = std::abs(limit_expression(s, x) - 1.0 / s);
            worst_increase = std::max(worst_increase, err - prev);
            prev = err;
        }
        rows.push_back(make_upper_bound_outcome("limit_error_decreasing_s" + g17(s),
                                                worst_increase, 0.0));
    }
    rows.push_back(make_outcome(
        "limit_reciprocal_product",
        limit_expression(2.0, 1e-6) * limit_expression(0.5, 1e-6), 1.0, 1e-4));

    // comparison-profile algebra for the configured preset
    {
        TorusGrid g(cfg.dim, cfg.res);
        ScalarField f = make_preset_field(g, cfg.preset);
        ScalarField ft = gap_comparison_profile(f);
        rows.push_back(make_outcome("gap_profile_max_preserved",
                                    std::abs(ft.max() - f.max()), 0.0, 0.0));
        rows.push_back(make_outcome("gap_profile_integral",
                                    std::abs(integrate(ft) - (2.0 * integrate(f) - f.max())),
                                    0.0, 1e-12));
        double worst = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < f.size(); ++i)
            worst = std::min(worst, f[i] - ft[i]);
        rows.push_back(make_outcome("gap_profile_domination_min", worst, 0.0, 0.0));
    }

    if (cfg.gap) {
        TorusGrid g(cfg.dim, cfg.res);
        ScalarField f = make_preset_field(g, cfg.preset);
        GapExperiment gx =
            strict_gap_experiment(f, solver_config(cfg), effective_schedule(cfg, cfg.dim));
        rows.push_back(gx.outcome);
        rows.push_back(make_outcome("gap_constraint_integral", gx.constraint_integral,
                                    std::max(gx.constraint_integral, 1.0), 0.0));
        rows.push_back(make_outcome("gap_rayleigh_below_bound",
                                    gx.rayleigh, std::min(gx.rayleigh, gx.bound), 0.0));
    }

    Csv csv(cfg.out / "verification.csv", "name,measured,expected,tolerance,pass");
    int fails = 0;
    for (const VerificationOutcome& o : rows) {
        csv.row({o.name, g17(o.measured), g17(o.expected), g17(o.tolerance),
                 o.pass ? "1" : "0"});
        if (!o.pass) ++fails;
    }
    csv.close();

    Csv ccsv(cfg.out / "constants.csv",
             "n,omega_n,omega_n_minus_1,k_n_2_sq,bubble_mass,two_star");
    for (int n = 3; n <= 10; ++n) {
        SharpConstants c = sharp_constants(n);
        ccsv.row({std::to_string(n), g17(c.omega_n), g17(c.omega_n_minus_1),
                  g17(c.k_n_2_sq), g17(c.bubble_mass), g17(c.two_star)});
    }
    ccsv.close();

    write_manifest(cfg, {"verification.csv", "constants.csv"});
    return fails == 0 ? 0 : 1;
}

// ----------------------------------------------------------------- report
int do_report(const RunConfig& cfg) {
    if (cfg.in.empty())
        throw std::invalid_argument("report mode needs --in <solve output directory>");
    std::map<std::string, std::string> kv;
    {
        std::ifstream is(cfg.in / "summary.csv");
        if (!is)
            throw std::invalid_argument("cannot open " + (cfg.in / "summary.csv").string());
        std::string line;
        std::getline(is, line);  // header
        while (std::getline(is, line)) {
            std::size_t comma = line.find(',');
            if (comma == std::string::npos) continue;
            kv[line.substr(0, comma)] = trim(line.substr(comma + 1));
        }
    }
    const int dim = static_cast<int>(parse_long(kv.at("dim"), "dim"));
    const int res = static_cast<int>(parse_long(kv.at("res"), "res"));
    const double q = parse_double(kv.at("q"), "q");
    const double lam = parse_double(kv.at("lambda"), "lambda");
    TorusGrid grid(dim, res);
    ScalarField f = make_preset_field(grid, parse_preset(kv.at("preset")));
    ScalarField u = read_snapshot(cfg.in / "u.pscf");
    if (u.grid() != grid) throw std::invalid_argument("snapshot grid mismatch");

    std::size_t am = u.argmax();
    const double umax = u[am];
    SubcriticalSolution sol{u,  q, lam, el_residual(u, lam, f, q), dirichlet_energy(u),
                            0,  GridPoint(grid, am), umax};

    GreenContext ctx(grid, sharp_constants(dim));
    BlowupParams params;
    params.delta = cfg.delta;
    BlowupReport rep = analyze(sol, f, &ctx, params);

    Csv rcsv(cfg.out / "report.csv", kReportHeader);
    rcsv.row(report_row(q, rep));
    rcsv.close();

    // hard Green identities
    const ScalarField& G = ctx.column(sol.x_max);
    ScalarField lapG = laplacian(G);
    double eq_worst = 0.0;
    for (std::size_t i = 0; i < lapG.size(); ++i) {
        double expect = (i == sol.x_max.flat())
                            ? static_cast<double>(grid.point_count()) - 1.0
                            : -1.0;
        eq_worst = std::max(eq_worst, std::abs(lapG[i] - expect));
    }
    double mean_G = std::abs(integrate(G));
    GridPoint other(grid, grid.point_count() / 2 + 1);
    double sym = std::abs(ctx.column(sol.x_max)[other.flat()] -
                          ctx.column(other)[sol.x_max.flat()]);
    double rc = representation_check(ctx, sol, f);
    double lam_star = lambda_upper_bound(f, ctx.consts());
    ScalarField phi = phi_field(ctx, f, lam_star);
    ScalarField lap_phi = laplacian(phi);
    const double fbar = integrate(f);
    double phi_worst = 0.0;
    for (std::size_t i = 0; i < phi.size(); ++i)
        phi_worst = std::max(phi_worst,
                             std::abs(lap_phi[i] - lam_star * (1.0 - f[i] / fbar)));

    std::vector<VerificationOutcome> checks;
    checks.push_back(make_outcome("green_defining_equation", eq_worst, 0.0, 1e-10));
    checks.push_back(make_outcome("green_zero_mean", mean_G, 0.0, 1e-12));
    checks.push_back(make_outcome("green_symmetry", sym, 0.0, 1e-10));
    checks.push_back(
        make_upper_bound_outcome("representation_residual", rc, 10.0 * sol.el_residual));
    checks.push_back(make_outcome("phi_defining_equation", phi_worst, 0.0, 1e-10));

    Csv gcsv(cfg.out / "green_checks.csv", "name,measured,expected,tolerance,pass");
    int fails = 0;
    for (const VerificationOutcome& o : checks) {
        gcsv.row({o.name, g17(o.measured), g17(o.expected), g17(o.tolerance),
                  o.pass ? "1" : "0"});
        if (!o.pass) ++fails;
    }
    gcsv.close();

    write_snapshot(cfg.out / "green_xmax.pscf", G);
    write_manifest(cfg, {"report.csv", "green_checks.csv", "green_xmax.pscf"});
    return fails == 0 ? 0 : 1;
}

}  // namespace

RunConfig parse_config(const std::vector<std::string>& args) {
    CLI::App app{"constrained curvature minimization on the flat torus"};
    app.name("psc");

    std::string mode_s, preset_s, schedule_s, out_s, in_s, config_s;
    RunConfig cfg;
    long seed_l = static_cast<long>(cfg.seed);

    auto* o_mode =
        app.add_option("mode", mode_s, "solve | continue | verify | report");
    auto* o_dim = app.add_option("--dim", cfg.dim, "spatial dimension");
    auto* o_res = app.add_option("--res", cfg.res, "points per axis (even)");
    auto* o_preset = app.add_option("--preset", preset_s, "profile, e.g. cosgap:0.1");
    auto* o_q = app.add_option("--q", cfg.q, "exponent for solve mode");
    auto* o_sched = app.add_option("--schedule", schedule_s,
                                   "comma list of exponents for continue mode");
    auto* o_qs = app.add_option("--q-start", cfg.q_start, "schedule start");
    auto* o_qe = app.add_option("--q-end", cfg.q_end, "schedule limit");
    auto* o_qn = app.add_option("--q-steps", cfg.q_steps, "schedule length");
    auto* o_tol = app.add_option("--tol", cfg.tol, "relative residual target");
    auto* o_mi = app.add_option("--max-iters", cfg.max_iters, "iteration budget");
    auto* o_step = app.add_option("--step", cfg.step, "initial descent step");
    auto* o_out = app.add_option("--out", out_s, "output directory");
    auto* o_in = app.add_option("--in", in_s, "input directory (report mode)");
    auto* o_seed = app.add_option("--seed", seed_l, "sampling seed");
    auto* o_gap = app.add_flag("--gap", cfg.gap, "include the strict-gap experiment");
    auto* o_delta = app.add_option("--delta", cfg.delta, "exclusion radius for eta");
    app.add_option("--config", config_s, "flat key = value file; flags win");

    std::vector<const char*> argv;
    argv.push_back("psc");
    for (const std::string& a : args) argv.push_back(a.c_str());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp&) {
        std::printf("%s", app.help().c_str());
        std::exit(0);
    } catch (const CLI::ParseError& e) {
        throw std::invalid_argument(std::string("argument error: ") + e.what());
    }

    bool mode_set = o_mode->count() > 0;
    if (!config_s.empty()) {
        for (const auto& [key, value] : read_config_file(config_s)) {
            if (key == "mode") {
                if (!mode_set) { mode_s = value; mode_set = true; }
            } else if (key == "dim") {
                if (!o_dim->count()) cfg.dim = static_cast<int>(parse_long(value, key));
            } else if (key == "res") {
                if (!o_res->count()) cfg.res = static_cast<int>(parse_long(value, key));
            } else if (key == "preset") {
                if (!o_preset->count()) preset_s = value;
            } else if (key == "q") {
                if (!o_q->count()) cfg.q = parse_double(value, key);
            } else if (key == "schedule") {
                if (!o_sched->count()) schedule_s = value;
            } else if (key == "q_start") {
                if (!o_qs->count()) cfg.q_start = parse_double(value, key);
            } else if (key == "q_end") {
                if (!o_qe->count()) cfg.q_end = parse_double(value, key);
            } else if (key == "q_steps") {
                if (!o_qn->count()) cfg.q_steps = static_cast<int>(parse_long(value, key));
            } else if (key == "tol") {
                if (!o_tol->count()) cfg.tol = parse_double(value, key);
            } else if (key == "max_iters") {
                if (!o_mi->count()) cfg.max_iters = parse_long(value, key);
            } else if (key == "step") {
                if (!o_step->count()) cfg.step = parse_double(value, key);
            } else if (key == "out") {
                if (!o_out->count()) out_s = value;
            } else if (key == "in") {
                if (!o_in->count()) in_s = value;
            } else if (key == "seed") {
                if (!o_seed->count()) seed_l = parse_long(value, key);
            } else if (key == "gap") {
                if (!o_gap->count()) cfg.gap = parse_bool(value, key);
            } else if (key == "delta") {
                if (!o_delta->count()) cfg.delta = parse_double(value, key);
            } else {
                throw std::invalid_argument("unknown config key '" + key + "'");
            }
        }
    }

    if (!mode_set) throw std::invalid_argument("mode is required");
    cfg.mode = parse_mode(mode_s);
    if (!preset_s.empty()) cfg.preset = parse_preset(preset_s);
    if (!schedule_s.empty()) cfg.schedule = parse_schedule_list(schedule_s);
    if (!out_s.empty()) cfg.out = out_s;
    if (!in_s.empty()) cfg.in = in_s;
    if (seed_l < 0) throw std::invalid_argument("seed must be nonnegative");
    cfg.seed = static_cast<std::uint64_t>(seed_l);

    if (cfg.dim < 1) throw std::invalid_argument("dim out of range");
    if (cfg.res < 4 || cfg.res % 2 != 0) throw std::invalid_argument("res out of range");
    if (!(cfg.tol > 0.0)) throw std::invalid_argument("tol out of range");
    if (cfg.max_iters < 1) throw std::invalid_argument("max_iters out of range");
    if (cfg.q_steps < 1) throw std::invalid_argument("q_steps out of range");
    return cfg;
}

int run(const RunConfig& cfg) {
    std::filesystem::create_directories(cfg.out);
    try {
        switch (cfg.mode) {
            case RunMode::solve: return do_solve(cfg);
            case RunMode::cont: return do_continue(cfg);
            case RunMode::verify: return do_verify(cfg);
            case RunMode::report: return do_report(cfg);
        }
        return 1;
    } catch (const std::exception& e) {
        std::ofstream marker(cfg.out / ".failed");
        marker << e.what() << "\n";
        throw;
    }
}

}  // namespace psc
