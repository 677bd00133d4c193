#include "psc/functionals.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

namespace psc {

namespace {
constexpr double pi = std::numbers::pi;
}

AdmissibilityReport admissibility(const ScalarField& f) {
    bool all_zero = true;
    for (double x : f.values())
        if (x != 0.0) { all_zero = false; break; }
    if (all_zero) throw ZeroFieldError();

    AdmissibilityReport r{0.0, 0.0, GridPoint(f.grid(), std::size_t{0}), false, false, false};
    r.mean_f = integrate(f);
    std::size_t am = f.argmax();
    r.max_f = f[am];
    r.argmax = GridPoint(f.grid(), am);
    r.integral_negative = r.mean_f < 0.0;
    r.max_positive = r.max_f > 0.0;
    r.admissible = r.integral_negative && r.max_positive;
    return r;
}

SharpConstants sharp_constants(int n) {
    if (n < 3) throw std::invalid_argument("sharp constants require dimension >= 3");
    SharpConstants c;
    c.n = n;
    // volume of the unit m-sphere: 2 pi^{(m+1)/2} / Gamma((m+1)/2)
    auto sphere_volume = [](int m) {
        return 2.0 * std::pow(pi, 0.5 * (m + 1)) / std::tgamma(0.5 * (m + 1));
    };
    c.omega_n = sphere_volume(n);
    c.omega_n_minus_1 = sphere_volume(n - 1);
    double nd = static_cast<double>(n);
    c.k_n_2_sq = 4.0 / (nd * (nd - 2.0)) * std::pow(c.omega_n, -2.0 / nd);
    c.bubble_mass = std::pow(nd * (nd - 2.0), -nd / 2.0) *
                    std::pow(c.k_n_2_sq, -nd / 2.0);
    c.two_star = 2.0 * nd / (nd - 2.0);
    return c;
}

double constraint_value(const ScalarField& f, const ScalarField& u, double q) {
    if (f.grid() != u.grid()) throw std::invalid_argument("grid mismatch");
    if (!(q > 2.0)) throw std::invalid_argument("exponent must exceed 2");
    double s = 0.0, comp = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        double y = f[i] * std::pow(std::abs(u[i]), q) - comp;
        double t = s + y;
        comp = (t - s) - y;
        s = t;
    }
    return f.grid().cell_volume() * s;
}

ScalarField normalize_to_constraint(const ScalarField& f, const ScalarField& u,
                                    double q) {
    double c = constraint_value(f, u, q);
    if (!(c > 0.0)) throw OutsidePositiveConeError();
    double t = std::pow(c, -1.0 / q);
    std::vector<double> v(u.values().begin(), u.values().end());
    for (double& x : v) x *= t;
    return ScalarField(u.grid(), std::move(v));
}

double lambda_upper_bound(const ScalarField& f, const SharpConstants& consts) {
    double mf = f.max();
    if (!(mf > 0.0)) throw std::domain_error("max f must be positive");
    return std::pow(mf, -2.0 / consts.two_star) / consts.k_n_2_sq;
}

ScalarField recovered_curvature(const ScalarField& u, double lam,
                                const ScalarField& f) {
    if (u.grid() != f.grid()) throw std::invalid_argument("grid mismatch");
    if (!(u.min() > 0.0)) throw std::domain_error("u must be strictly positive");
    const int n = u.grid().dim();
    if (n < 3) throw std::invalid_argument("curvature recovery requires dimension >= 3");
    (void)lam;  // the expected comparison value is (4(n-1)/(n-2)) * lam * f
    double coef = 4.0 * (n - 1.0) / (n - 2.0);
    double p = 2.0 * n / (n - 2.0) - 1.0;  // 2* - 1
    ScalarField lap = laplacian(u);
    std::vector<double> v(u.size());
    for (std::size_t i = 0; i < u.size(); ++i)
        v[i] = coef * lap[i] / std::pow(u[i], p);
    return ScalarField(u.grid(), std::move(v));
}

double sobolev_check(const ScalarField& u, double B, const SharpConstants& consts) {
    if (B < 0.0) throw std::invalid_argument("B must be nonnegative");
    bool all_zero = true;
    for (double x : u.values())
        if (x != 0.0) { all_zero = false; break; }
    if (all_zero) throw std::invalid_argument("u must not be identically zero");
    double s = 0.0, comp = 0.0;
    for (double x : u.values()) {
        double y = std::pow(std::abs(x), consts.two_star) - comp;
        double t = s + y;
        comp = (t - s) - y;
        s = t;
    }
    double norm_crit_sq =
        std::pow(u.grid().cell_volume() * s, 2.0 / consts.two_star);
    double l2 = l2_norm(u);
    return norm_crit_sq - consts.k_n_2_sq * dirichlet_energy(u) - B * l2 * l2;
}

}  // namespace psc
