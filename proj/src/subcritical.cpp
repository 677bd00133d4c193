#include "psc/subcritical.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "psc/blowup.hpp"

namespace psc {

namespace {

constexpr double two_pi = 2.0 * std::numbers::pi;

double l2_raw(const TorusGrid& g, std::span<const double> v) {
    double s = 0.0, comp = 0.0;
    for (double x : v) {
        double y = x * x - comp;
        double t = s + y;
        comp = (t - s) - y;
        s = t;
    }
    return std::sqrt(g.cell_volume() * s);
}

// Bump centered where f peaks, already scaled into the constraint set.
// The width shrinks until the constraint integral turns positive: f is
// positive at the peak, so a narrow enough bump always qualifies.
ScalarField positive_cone_init(const ScalarField& f, double q, double width_cells) {
    const TorusGrid& g = f.grid();
    GridPoint center(g, f.argmax());
    const auto c = center.coords();
    double sigma = width_cells / static_cast<double>(g.res());
    for (int attempt = 0; attempt < 8; ++attempt) {
        ScalarField bump =
            ScalarField::from_function(g, [&](std::span<const double> x) {
                double d = torus_distance(x, std::span<const double>(c));
                return std::exp(-(d * d) / (sigma * sigma));
            });
        if (constraint_value(f, bump, q) > 0.0)
            return normalize_to_constraint(f, bump, q);
        sigma *= 0.5;
    }
    throw OutsidePositiveConeError();
}

}  // namespace

double el_residual(const ScalarField& u, double lam, const ScalarField& f, double q) {
    if (u.grid() != f.grid()) throw std::invalid_argument("grid mismatch");
    const TorusGrid& g = u.grid();
    ScalarField lap = laplacian(u);
    std::vector<double> nl(u.size()), grad(u.size());
    for (std::size_t i = 0; i < u.size(); ++i) {
        nl[i] = f[i] * std::pow(std::abs(u[i]), q - 1.0);
        grad[i] = lap[i] - lam * nl[i];
    }
    double denom = lam * l2_raw(g, nl);
    if (denom == 0.0) throw std::domain_error("residual denominator vanishes (u == 0?)");
    return l2_raw(g, grad) / denom;
}

SubcriticalSolution minimize(const ScalarField& f, double q, const SolverConfig& cfg) {
    const TorusGrid& g = f.grid();
    const int n = g.dim();
    if (n < 3) throw std::invalid_argument("the minimization requires dimension >= 3");
    const double two_star = 2.0 * n / (n - 2.0);
    if (!(q > 2.0 && q < two_star))
        throw std::invalid_argument("exponent must lie strictly between 2 and 2*");
    if (!(cfg.backtrack > 0.0 && cfg.backtrack < 1.0))
        throw std::invalid_argument("backtracking factor must lie in (0,1)");
    if (!(cfg.tol > 0.0)) throw std::invalid_argument("tolerance must be positive");
    if (cfg.max_iters < 1) throw std::invalid_argument("iteration budget must be positive");
    AdmissibilityReport rep = admissibility(f);
    if (!rep.admissible)
        throw std::domain_error("f is not admissible (needs negative integral and positive max)");

    const double tau0 =
        cfg.step > 0.0
            ? cfg.step
            : 1.0 / (two_pi * two_pi * n * 0.25 * g.res() * g.res());
    double tau = tau0;

    ScalarField u = cfg.warm_start
                        ? normalize_to_constraint(f, *cfg.warm_start, q)
                        : positive_cone_init(f, q, cfg.bump_width_cells);
    double energy = dirichlet_energy(u);
    if (cfg.energy_trace) cfg.energy_trace->push_back(energy);

    // monotone acceptance up to the roundoff of the energy sum itself
    const double accept_slack = 32.0 * std::numeric_limits<double>::epsilon();

    std::vector<double> prev_u, prev_grad;
    bool relocalized = false;
    int plain_phase = 0;  // plain tau0 steps after a backtracking exhaustion
    int exhausted = 0;

    double best_res = std::numeric_limits<double>::infinity();
    std::vector<double> best_u;
    double best_energy = 0.0;

    auto make_solution = [&](std::vector<double> uv, double lam, double res,
                             long iters) {
        ScalarField uf(g, std::move(uv));
        std::size_t am = uf.argmax();
        double umax = uf[am];
        return SubcriticalSolution{std::move(uf), q,    lam,  res,
                                   lam,           iters, GridPoint(g, am), umax};
    };

    for (long it = 0; it < cfg.max_iters; ++it) {
        ScalarField lap = laplacian(u);
        std::vector<double> nl(u.size()), grad(u.size());
        for (std::size_t i = 0; i < u.size(); ++i) {
            nl[i] = f[i] * std::pow(u[i], q - 1.0);
            grad[i] = lap[i] - energy * nl[i];
        }
        double res = l2_raw(g, grad) / (energy * l2_raw(g, nl));
        if (res < best_res) {
            best_res = res;
            best_u.assign(u.values().begin(), u.values().end());
            best_energy = energy;
        }
        if (res <= cfg.tol) return make_solution(std::move(best_u), best_energy, best_res, it);

        if (plain_phase > 0) {
            --plain_phase;
            tau = tau0;
        } else if (!prev_u.empty()) {
            // two-point step from the last accepted move
            double ss = 0.0, sy = 0.0, yy = 0.0;
            for (std::size_t i = 0; i < u.size(); ++i) {
                double du = u[i] - prev_u[i];
                double dg = grad[i] - prev_grad[i];
                ss += du * du;
                sy += du * dg;
                yy += dg * dg;
            }
            if (ss > 0.0 && sy > 1e-10 * std::sqrt(ss * yy)) {
                double t = (it % 2 == 0) ? ss / sy : sy / yy;
                tau = std::clamp(t, 0.1 * tau0, 1e5 * tau0);
            } else {
                tau = tau0;
            }
        }

        bool accepted = false;
        for (int bt = 0; bt < 60; ++bt) {
            std::vector<double> cand(u.size());
            for (std::size_t i = 0; i < u.size(); ++i)
                cand[i] = std::max(u[i] - tau * grad[i], 0.0);
            ScalarField cf(g, std::move(cand));
            double c = constraint_value(f, cf, q);
            if (!(c > 0.0)) {
                tau *= cfg.backtrack;
                continue;
            }
            double t = std::pow(c, -1.0 / q);
            std::vector<double> scaled(cf.values().begin(), cf.values().end());
            for (double& x : scaled) x *= t;
            ScalarField v(g, std::move(scaled));
            double ev = dirichlet_energy(v);
            if (ev <= energy * (1.0 + accept_slack)) {
                prev_u.assign(u.values().begin(), u.values().end());
                prev_grad = std::move(grad);
                u = std::move(v);
                energy = ev;
                if (cfg.energy_trace) cfg.energy_trace->push_back(energy);
                accepted = true;
                exhausted = 0;
                break;
            }
            tau *= cfg.backtrack;
        }
        if (!accepted) {
            // constraint integral may have left the positive cone entirely
            double c_now = constraint_value(f, u, q);
            if (!(c_now > 0.0)) {
                if (relocalized) throw OutsidePositiveConeError();
                relocalized = true;
                u = positive_cone_init(f, q, cfg.bump_width_cells);
                energy = dirichlet_energy(u);
                prev_u.clear();
                prev_grad.clear();
                continue;
            }
            ++exhausted;
            plain_phase = 50;
            prev_u.clear();
            prev_grad.clear();
            tau = tau0;
            if (exhausted >= 40)
                throw NonConvergenceError(
                    "descent stalled above tolerance",
                    make_solution(std::move(best_u), best_energy, best_res, it));
        }
    }
    throw NonConvergenceError("iteration budget exhausted above tolerance",
                              make_solution(std::move(best_u), best_energy, best_res,
                                            cfg.max_iters));
}

std::vector<double> default_schedule(double q_start, double q_end, int steps) {
    if (!(q_end > q_start)) throw std::invalid_argument("schedule must increase");
    if (steps < 1) throw std::invalid_argument("schedule needs at least one step");
    std::vector<double> s(static_cast<std::size_t>(steps));
    double gap = q_end - q_start;
    for (int k = 0; k < steps; ++k)
        s[static_cast<std::size_t>(k)] = q_end - gap / std::pow(2.0, k);
    return s;
}

ContinuationTrace continuation(
    const ScalarField& f, std::vector<double> schedule, const SolverConfig& cfg,
    const std::function<void(const SubcriticalSolution&)>& on_solution) {
    const int n = f.grid().dim();
    if (n < 3) throw std::invalid_argument("continuation requires dimension >= 3");
    const double two_star = 2.0 * n / (n - 2.0);
    for (std::size_t i = 0; i < schedule.size(); ++i) {
        if (!(schedule[i] > 2.0 && schedule[i] < two_star))
            throw std::invalid_argument("schedule entries must lie in (2, 2*)");
        if (i > 0 && !(schedule[i] > schedule[i - 1]))
            throw std::invalid_argument("schedule must be strictly increasing");
    }
    SharpConstants consts = sharp_constants(n);
    ContinuationTrace trace;
    trace.schedule = schedule;
    trace.bound = lambda_upper_bound(f, consts);

    SolverConfig step_cfg = cfg;
    for (double q : schedule) {
        SubcriticalSolution sol = [&] {
            try {
                return minimize(f, q, step_cfg);
            } catch (const NonConvergenceError& e) {
                throw NonConvergenceError(
                    "continuation failed at q=" + std::to_string(q) + ": " + e.what(),
                    e.best);
            }
        }();
        double mu = std::numeric_limits<double>::quiet_NaN();
        try {
            mu = concentration_scale(sol, f);
        } catch (const std::domain_error&) {
            // f nonpositive at the maximum: scale undefined, recorded as NaN
        }
        ContinuationEntry e{q,  sol.lam, sol.u_max, sol.x_max,
                            mu, eta(sol), sol.el_residual};
        trace.entries.push_back(std::move(e));
        step_cfg.warm_start = sol.u;
        if (on_solution) on_solution(sol);
    }
    return trace;
}

IdentityResiduals necessary_condition_identities(const SubcriticalSolution& sol,
                                                 const ScalarField& f,
                                                 double positivity_floor) {
    const TorusGrid& g = f.grid();
    const double q = sol.q;
    IdentityResiduals out;
    {
        double s = 0.0, comp = 0.0;
        for (std::size_t i = 0; i < f.size(); ++i) {
            double y = f[i] * std::pow(sol.u[i], q - 1.0) - comp;
            double t = s + y;
            comp = (t - s) - y;
            s = t;
        }
        out.integral_balance = std::abs(g.cell_volume() * s);
    }
    if (sol.u.min() <= positivity_floor) {
        out.singular_weight_valid = false;
        return out;
    }
    std::vector<double> grad2(sol.u.size(), 0.0);
    for (int a = 0; a < g.dim(); ++a) {
        ScalarField da = partial_derivative(sol.u, a);
        for (std::size_t i = 0; i < grad2.size(); ++i) grad2[i] += da[i] * da[i];
    }
    double s = 0.0, comp = 0.0;
    for (std::size_t i = 0; i < grad2.size(); ++i) {
        double y = std::pow(sol.u[i], -q) * grad2[i] - comp;
        double t = s + y;
        comp = (t - s) - y;
        s = t;
    }
    double weighted = g.cell_volume() * s;
    out.singular_weight = std::abs(integrate(f) + (q - 1.0) / sol.lam * weighted);
    out.singular_weight_valid = true;
    return out;
}

}  // namespace psc
