#pragma once

#include "psc/green.hpp"
#include "psc/subcritical.hpp"

namespace psc {

/** The radial concentration profile U0(x) = (1+|x|^2)^{1-n/2}: the entire
 *  positive solution of laplacian(U0) = n(n-2) U0^{2*-1} with U0(0) = 1. */
struct BubbleProfile {
    int n;
    double operator()(double r) const;
};

/** Concentration length scale
 *  mu = sqrt(n(n-2) / (lam f(x_max))) * u_max^{-(q-2)/2}.
 *  Requires f > 0 at the solution peak. */
double concentration_scale(const SubcriticalSolution& sol, const ScalarField& f);

/** Max relative residual of the profile equation
 *  laplacian(U0) = n(n-2) U0^{2*-1} over the sampled radii, with the radial
 *  Laplacian evaluated by centered finite differences of step h. */
double bubble_residual(int n, std::span<const double> radii, double h = 1e-3);

/** Rescaled profile v(x) = u(x_max + mu x)/u_max sampled by trigonometric
 *  interpolation on a lattice inside the ball |x| <= window_R, compared
 *  against U0. radii and values hold the samples themselves. */
struct ProfileResult {
    double sup_err = 0.0;
    long samples = 0;
    std::vector<double> radii;
    std::vector<double> values;
};
ProfileResult rescaled_profile(const SubcriticalSolution& sol, const ScalarField& f,
                               double window_R, int pts_per_axis = 9);

/** Statistics of w(x) = d(x_max, x)^{2/(q-2)} u(x): the global max and the
 *  max outside the ball of radius R mu around the peak. */
struct WeakStats {
    double w_max = 0.0;
    double w_tail = 0.0;
};
WeakStats weak_estimate_stats(const SubcriticalSolution& sol, const ScalarField& f,
                              double R);

/** Pointwise envelope test outside the ball of radius R mu:
 *  u <= C_eps (mu^{(n-2)(1-2 eps)/2} d^{(2-n)(1-eps)} + eta d^{(2-n) eps}).
 *  Returns the pass flag and the worst ratio of left to right side. */
struct EnvelopeResult {
    bool pass = false;
    double worst_ratio = 0.0;
};
EnvelopeResult envelope_check(const SubcriticalSolution& sol, const ScalarField& f,
                              double eps, double C_eps, double R);

/** Supremum of u outside the ball of radius delta around the peak. */
double eta(const SubcriticalSolution& sol, double delta = 0.25);

/** Residuals of the asymptotic model
 *  u(y) ~ mean(u) + 2^n (omega_{n-1}/n) u_max^{-1} phi(y)
 *         + u_max (1 + d^2/mu^2)^{-(n-2)/2} Phi(x_max, y)
 *  over grid points outside the 4 mu ball, normalized by u_max^{-1}, plus
 *  the companion relation |eta^{q-1} + 2^n omega_{n-1}/(n mean(f)) u_max^{-1}|
 *  in the same normalization. Both are reported findings, not gates. */
struct ExpansionCheck {
    double model_residual = 0.0;
    double eta_relation = 0.0;
};
ExpansionCheck expansion_residual(const SubcriticalSolution& sol, const ScalarField& f,
                                  const GreenContext& ctx, double delta = 0.25);

/** Full diagnostic record for one solution. */
struct BlowupReport {
    double mu_q = 0.0;  // NaN when undefined
    double profile_sup_err = 0.0;
    double w_max = 0.0;
    double w_tail = 0.0;
    double eta_q = 0.0;
    double A_est = 0.0;  // u_max^{(2*-q)(n-2)/2}
    bool envelope_ok = false;
    double fitted_C_eps = 0.0;  // smallest constant that would pass
    double expansion_residual = 0.0;  // NaN when no Green context given
};

struct BlowupParams {
    double R = 4.0;
    double eps = 0.1;
    double C_eps = 100.0;
    double delta = 0.25;
    double window_R = 2.0;
    int profile_pts = 9;
};

BlowupReport analyze(const SubcriticalSolution& sol, const ScalarField& f,
                     const GreenContext* ctx, const BlowupParams& params = {});

}  // namespace psc
