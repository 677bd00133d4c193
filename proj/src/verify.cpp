#include "psc/verify.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace psc {

VerificationOutcome make_outcome(std::string name, double measured, double expected,
                                 double tolerance) {
    VerificationOutcome o{std::move(name), measured, expected, tolerance, false};
    o.pass = std::abs(measured - expected) <= tolerance;
    return o;
}

VerificationOutcome make_upper_bound_outcome(std::string name, double measured,
                                             double bound) {
    return make_outcome(std::move(name), measured, std::min(measured, bound), 0.0);
}

double limit_expression(double s, double x) {
    if (!(s > 0.0)) throw std::invalid_argument("s must be positive");
    if (!(x > 0.0 && x < 0.1)) throw std::invalid_argument("x must lie in (0, 0.1)");
    if (s == 1.0) return 1.0;  // numerator equals denominator
    // With a = x^x - 1 and b = s^{x^2}/x^x - 1 (both expm1 forms):
    //   numerator   1 - x^x        = -a
    //   denominator s^{x^2} - x^x  = (1+a) b
    // and ln(num/den) = log1p((num - den)/den). The direct difference of
    // two logarithms loses seven digits here because ln(num) and ln(den)
    // agree to O(x); the ratio form does not.
    const double xlx = x * std::log(x);             // < 0
    const double a = std::expm1(xlx);
    const double b = std::expm1(x * x * std::log(s) - xlx);
    const double den = (1.0 + a) * b;
    if (!(den > 0.0))
        throw std::domain_error("denominator vanishes; the expression is undefined");
    const double log_ratio = std::log1p((-a - b - a * b) / den);
    const double log_value = (-std::log(x) / x) * log_ratio;
    if (std::abs(log_value) > 700.0)
        throw std::domain_error("value overflows double range; reduce |ln s| or x");
    return std::exp(log_value);
}

ScalarField gap_comparison_profile(const ScalarField& f) {
    const double mf = f.max();
    std::vector<double> v(f.size());
    for (std::size_t i = 0; i < f.size(); ++i) v[i] = 2.0 * f[i] - mf;
    return ScalarField(f.grid(), std::move(v));
}

GapExperiment strict_gap_experiment(const ScalarField& f, const SolverConfig& cfg,
                                    std::vector<double> schedule) {
    AdmissibilityReport rep = admissibility(f);
    if (!rep.admissible) throw std::domain_error("f is not admissible");
    const int n = f.grid().dim();
    const double two_star = 2.0 * n / (n - 2.0);
    ScalarField ft = gap_comparison_profile(f);

    GapExperiment out{make_outcome("strict_gap_margin", 0.0, 0.0, 0.0), 0.0, 0.0, 0.0, {}};
    std::optional<SubcriticalSolution> last;
    ContinuationTrace trace = continuation(
        ft, schedule, cfg, [&](const SubcriticalSolution& s) { last = s; });
    const SubcriticalSolution& sol = *last;

    SharpConstants consts = sharp_constants(n);
    const double bound = lambda_upper_bound(f, consts);
    const double m1 = constraint_value(f, sol.u, two_star);
    if (!(m1 > 0.0))
        throw std::domain_error("critical constraint integral under f is nonpositive");
    const double rayleigh =
        dirichlet_energy(sol.u) * std::pow(m1, -2.0 / two_star);
    out.constraint_integral = m1;
    out.rayleigh = rayleigh;
    out.bound = bound;
    out.trace = std::move(trace);
    double margin = bound - rayleigh;
    out.outcome = make_outcome("strict_gap_margin", margin, std::max(margin, 0.0), 0.0);
    return out;
}

VerificationOutcome bound_consistency(int n) {
    SharpConstants c = sharp_constants(n);
    double worst = 0.0;
    // three-way closed-form identity
    double prod = c.bubble_mass * std::pow(n * (n - 2.0), 0.5 * n) *
                  std::pow(c.k_n_2_sq, 0.5 * n);
    worst = std::max(worst, std::abs(prod - 1.0));
    // sphere volumes against the two-step recursion w_m = 2 pi w_{m-2}/(m-1)
    auto recursive_volume = [](int m) {
        double v0 = 2.0;                      // two points
        double v1 = 2.0 * std::numbers::pi;   // circle length
        double v = (m % 2 == 0) ? v0 : v1;
        for (int k = (m % 2 == 0) ? 2 : 3; k <= m; k += 2)
            v *= 2.0 * std::numbers::pi / (k - 1.0);
        return v;
    };
    worst = std::max(worst, std::abs(c.omega_n / recursive_volume(n) - 1.0));
    worst = std::max(worst,
                     std::abs(c.omega_n_minus_1 / recursive_volume(n - 1) - 1.0));
    // exponent arithmetic
    worst = std::max(worst, std::abs(c.two_star * (n - 2.0) - 2.0 * n) / (2.0 * n));
    return make_outcome("bound_consistency(n=" + std::to_string(n) + ")", worst, 0.0,
                        1e-12);
}

}  // namespace psc
