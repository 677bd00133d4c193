#include "psc/blowup.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace psc {

namespace {

// squared torus distance from the point c to every grid node
std::vector<double> distance_field(const TorusGrid& g, const std::vector<double>& c) {
    std::vector<double> d(g.point_count());
    const int n = g.dim();
    const int res = g.res();
    std::vector<std::int32_t> idx(static_cast<std::size_t>(n), 0);
    for (std::size_t fidx = 0; fidx < d.size(); ++fidx) {
        double d2 = 0.0;
        for (int a = 0; a < n; ++a) {
            double x = static_cast<double>(idx[static_cast<std::size_t>(a)]) / res;
            double dd = std::abs(x - c[static_cast<std::size_t>(a)]);
            dd = std::min(dd, 1.0 - dd);
            d2 += dd * dd;
        }
        d[fidx] = std::sqrt(d2);
        for (int a = n - 1; a >= 0; --a) {
            if (++idx[static_cast<std::size_t>(a)] < res) break;
            idx[static_cast<std::size_t>(a)] = 0;
        }
    }
    return d;
}

void check_exclusion_radius(double delta) {
    if (!(delta > 0.0 && delta < 0.5))
        throw std::invalid_argument("exclusion radius must lie in (0, period/2)");
}

}  // namespace

double BubbleProfile::operator()(double r) const {
    return std::pow(1.0 + r * r, 1.0 - 0.5 * n);
}

double concentration_scale(const SubcriticalSolution& sol, const ScalarField& f) {
    const int n = f.grid().dim();
    const double fx = f[sol.x_max.flat()];
    if (!(fx > 0.0))
        throw std::domain_error("f is nonpositive at the peak; the scale is undefined");
    return std::sqrt(n * (n - 2.0) / (sol.lam * fx)) *
           std::pow(sol.u_max, -0.5 * (sol.q - 2.0));
}

double bubble_residual(int n, std::span<const double> radii, double h) {
    if (n < 3) throw std::invalid_argument("profile requires dimension >= 3");
    BubbleProfile U{n};
    const double coef = n * (n - 2.0);
    const double p = (2.0 * n / (n - 2.0)) - 1.0;
    double worst = 0.0;
    for (double r : radii) {
        if (r < 0.0 || r > 10.0)
            throw std::invalid_argument("sample radii must lie in [0, 10]");
        double lap;
        if (r < 0.5 * h) {
            // radial limit at the origin: -div grad = -n f''(0)
            lap = -n * 2.0 * (U(h) - U(0.0)) / (h * h);
        } else {
            double fpp = (U(r + h) - 2.0 * U(r) + U(r - h)) / (h * h);
            double fp = (U(r + h) - U(r - h)) / (2.0 * h);
            lap = -(fpp + (n - 1.0) / r * fp);
        }
        double rhs = coef * std::pow(U(r), p);
        worst = std::max(worst, std::abs(lap - rhs) / rhs);
    }
    return worst;
}

ProfileResult rescaled_profile(const SubcriticalSolution& sol, const ScalarField& f,
                               double window_R, int pts_per_axis) {
    const TorusGrid& g = f.grid();
    const int n = g.dim();
    const double mu = concentration_scale(sol, f);
    if (!(window_R > 0.0)) throw std::invalid_argument("window radius must be positive");
    if (window_R * mu > 0.25)
        throw std::invalid_argument("window exceeds period/4; it would self-overlap");
    if (mu * g.res() < 1.0)
        throw std::domain_error("concentration scale is below one grid cell");
    if (pts_per_axis < 3) throw std::invalid_argument("need at least 3 points per axis");

    BubbleProfile U{n};
    SpectralInterpolator interp(sol.u);
    const auto center = sol.x_max.coords();
    std::vector<int> idx(static_cast<std::size_t>(n), 0);
    std::vector<double> y(static_cast<std::size_t>(n));
    std::vector<double> pt(static_cast<std::size_t>(n));
    ProfileResult out;
    bool done = false;
    while (!done) {
        double r2 = 0.0;
        for (int a = 0; a < n; ++a) {
            double t = -window_R +
                       2.0 * window_R * idx[static_cast<std::size_t>(a)] /
                           (pts_per_axis - 1.0);
            y[static_cast<std::size_t>(a)] = t;
            r2 += t * t;
        }
        if (r2 <= window_R * window_R * (1.0 + 1e-12)) {
            for (int a = 0; a < n; ++a) {
                double c = center[static_cast<std::size_t>(a)] +
                           mu * y[static_cast<std::size_t>(a)];
                c -= std::floor(c);
                pt[static_cast<std::size_t>(a)] = c;
            }
            double v = interp(pt) / sol.u_max;
            out.sup_err = std::max(out.sup_err, std::abs(v - U(std::sqrt(r2))));
            out.radii.push_back(std::sqrt(r2));
            out.values.push_back(v);
            ++out.samples;
        }
        done = true;
        for (int a = n - 1; a >= 0; --a) {
            if (++idx[static_cast<std::size_t>(a)] < pts_per_axis) { done = false; break; }
            idx[static_cast<std::size_t>(a)] = 0;
        }
    }
    return out;
}

WeakStats weak_estimate_stats(const SubcriticalSolution& sol, const ScalarField& f,
                              double R) {
    const TorusGrid& g = sol.u.grid();
    const auto center = sol.x_max.coords();
    const std::vector<double> d = distance_field(g, center);
    const double p = 2.0 / (sol.q - 2.0);
    double rmu = std::numeric_limits<double>::quiet_NaN();
    try {
        rmu = R * concentration_scale(sol, f);
    } catch (const std::domain_error&) {
        // tail statistic undefined without a scale; reported as NaN
    }
    WeakStats out;
    out.w_tail = std::isnan(rmu) ? std::numeric_limits<double>::quiet_NaN() : 0.0;
    for (std::size_t i = 0; i < d.size(); ++i) {
        double w = std::pow(d[i], p) * sol.u[i];
        out.w_max = std::max(out.w_max, w);
        if (!std::isnan(rmu) && d[i] > rmu) out.w_tail = std::max(out.w_tail, w);
    }
    return out;
}

EnvelopeResult envelope_check(const SubcriticalSolution& sol, const ScalarField& f,
                              double eps, double C_eps, double R) {
    const TorusGrid& g = sol.u.grid();
    const int n = g.dim();
    if (!(eps > 0.0 && eps < 2.0 / (n + 2.0)))
        throw std::invalid_argument("eps must lie in (0, 2/(n+2))");
    if (C_eps < 0.0) throw std::invalid_argument("C_eps must be nonnegative");
    const double mu = concentration_scale(sol, f);
    const double et = eta(sol);
    const auto center = sol.x_max.coords();
    const std::vector<double> d = distance_field(g, center);
    const double a1 = std::pow(mu, 0.5 * (n - 2.0) * (1.0 - 2.0 * eps));
    const double e1 = (2.0 - n) * (1.0 - eps);
    const double e2 = (2.0 - n) * eps;
    EnvelopeResult out;
    out.worst_ratio = 0.0;
    for (std::size_t i = 0; i < d.size(); ++i) {
        if (d[i] <= R * mu) continue;
        double envelope = C_eps * (a1 * std::pow(d[i], e1) + et * std::pow(d[i], e2));
        double ratio = envelope > 0.0
                           ? sol.u[i] / envelope
                           : (sol.u[i] > 0.0
                                  ? std::numeric_limits<double>::infinity()
                                  : 0.0);
        out.worst_ratio = std::max(out.worst_ratio, ratio);
    }
    out.pass = out.worst_ratio <= 1.0;
    return out;
}

double eta(const SubcriticalSolution& sol, double delta) {
    check_exclusion_radius(delta);
    const TorusGrid& g = sol.u.grid();
    const auto center = sol.x_max.coords();
    const std::vector<double> d = distance_field(g, center);
    double sup = -std::numeric_limits<double>::infinity();
    bool any = false;
    for (std::size_t i = 0; i < d.size(); ++i) {
        if (d[i] > delta) {
            sup = std::max(sup, sol.u[i]);
            any = true;
        }
    }
    if (!any) throw std::domain_error("the exclusion ball covers every grid point");
    return sup;
}

ExpansionCheck expansion_residual(const SubcriticalSolution& sol, const ScalarField& f,
                                  const GreenContext& ctx, double delta) {
    const TorusGrid& g = sol.u.grid();
    if (ctx.grid() != g || f.grid() != g) throw std::invalid_argument("grid mismatch");
    const int n = g.dim();
    const double mu = concentration_scale(sol, f);
    const double fbar = integrate(f);
    const double ubar = integrate(sol.u);
    const double umax = sol.u_max;
    const double om = ctx.consts().omega_n_minus_1;
    const double lam_star = lambda_upper_bound(f, ctx.consts());
    const ScalarField phi = phi_field(ctx, f, lam_star);
    const ScalarField& G = ctx.column(sol.x_max);
    const double kernel_coef = (n - 2.0) * om;
    const auto center = sol.x_max.coords();
    const std::vector<double> d = distance_field(g, center);
    const double phi_coef = std::pow(2.0, n) * om / n / umax;

    double worst = 0.0;
    for (std::size_t i = 0; i < d.size(); ++i) {
        if (d[i] <= 4.0 * mu) continue;
        double cap_phi = kernel_coef * std::pow(d[i], n - 2.0) * G[i];
        double model = ubar + phi_coef * phi[i] +
                       umax *
                           std::pow(1.0 + d[i] * d[i] / (mu * mu), -0.5 * (n - 2.0)) *
                           cap_phi;
        worst = std::max(worst, std::abs(sol.u[i] - model));
    }
    ExpansionCheck out;
    out.model_residual = worst * umax;
    double et = eta(sol, delta);
    out.eta_relation =
        std::abs(std::pow(et, sol.q - 1.0) + std::pow(2.0, n) * om / (n * fbar) / umax) *
        umax;
    return out;
}

BlowupReport analyze(const SubcriticalSolution& sol, const ScalarField& f,
                     const GreenContext* ctx, const BlowupParams& params) {
    const int n = f.grid().dim();
    BlowupReport rep;
    rep.eta_q = eta(sol, params.delta);
    rep.A_est = std::pow(sol.u_max,
                         (2.0 * n / (n - 2.0) - sol.q) * 0.5 * (n - 2.0));
    bool scale_defined = true;
    try {
        rep.mu_q = concentration_scale(sol, f);
    } catch (const std::domain_error&) {
        rep.mu_q = std::numeric_limits<double>::quiet_NaN();
        scale_defined = false;
    }
    WeakStats ws = weak_estimate_stats(sol, f, params.R);
    rep.w_max = ws.w_max;
    rep.w_tail = ws.w_tail;
    if (scale_defined) {
        double window = params.window_R;
        // shrink the window if it would wrap; wider grids keep the default
        window = std::min(window, 0.2499 / rep.mu_q);
        if (rep.mu_q * f.grid().res() >= 1.0 && window > 0.0) {
            ProfileResult pr = rescaled_profile(sol, f, window, params.profile_pts);
            rep.profile_sup_err = pr.sup_err;
        } else {
            rep.profile_sup_err = std::numeric_limits<double>::quiet_NaN();
        }
        EnvelopeResult er = envelope_check(sol, f, params.eps, params.C_eps, params.R);
        rep.envelope_ok = er.pass;
        rep.fitted_C_eps = er.worst_ratio * params.C_eps;
        if (ctx) {
            ExpansionCheck ec = expansion_residual(sol, f, *ctx, params.delta);
            rep.expansion_residual = ec.model_residual;
        } else {
            rep.expansion_residual = std::numeric_limits<double>::quiet_NaN();
        }
    } else {
        rep.profile_sup_err = std::numeric_limits<double>::quiet_NaN();
        rep.envelope_ok = false;
        rep.fitted_C_eps = std::numeric_limits<double>::quiet_NaN();
        rep.expansion_residual = std::numeric_limits<double>::quiet_NaN();
    }
    return rep;
}

}  // namespace psc
