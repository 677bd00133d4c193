#pragma once

#include <stdexcept>

#include "psc/torus.hpp"

namespace psc {

/** Sign data of a candidate curvature profile f. Both conditions together
 *  (negative integral, positive maximum) are required for solvability. */
struct AdmissibilityReport {
    double mean_f = 0.0;  // integral of f; equals the mean on the unit-volume torus
    double max_f = 0.0;
    GridPoint argmax;
    bool integral_negative = false;
    bool max_positive = false;
    bool admissible = false;
};

/** Dimension-dependent constants of the critical problem. */
struct SharpConstants {
    int n = 0;
    double omega_n = 0.0;          // volume of the unit n-sphere in R^{n+1}
    double omega_n_minus_1 = 0.0;  // volume of the unit (n-1)-sphere in R^n
    double k_n_2_sq = 0.0;         // K(n,2)^2 = 4/(n(n-2)) * omega_n^(-2/n)
    double bubble_mass = 0.0;      // integral of U0^{2*} over R^n
    double two_star = 0.0;         // critical exponent 2n/(n-2)
};

/** Thrown by admissibility when f is identically zero (that case belongs
 *  to the constant-curvature problem, solved separately). */
struct ZeroFieldError : std::domain_error {
    ZeroFieldError() : std::domain_error("f is identically zero") {}
};

/** Thrown when a candidate cannot be scaled into the constraint set
 *  because its constraint integral is nonpositive. */
struct OutsidePositiveConeError : std::domain_error {
    OutsidePositiveConeError()
        : std::domain_error("constraint integral is nonpositive; "
                            "re-localize the iterate near the maximum of f") {}
};

AdmissibilityReport admissibility(const ScalarField& f);

SharpConstants sharp_constants(int n);

/** Constraint functional: integral of f * |u|^q. */
double constraint_value(const ScalarField& f, const ScalarField& u, double q);

/** Scale u so the constraint integral equals 1. Requires a positive
 *  constraint value. */
ScalarField normalize_to_constraint(const ScalarField& f, const ScalarField& u,
                                    double q);

/** Sharp upper bound for the critical minimal energy:
 *  K(n,2)^(-2) * (max f)^(-2/2*). */
double lambda_upper_bound(const ScalarField& f, const SharpConstants& consts);

/** Curvature recovered from a positive solution:
 *  (4(n-1)/(n-2)) * laplacian(u) / u^{2*-1}.
 *  For a converged critical solution this equals (4(n-1)/(n-2)) * lam * f
 *  up to the solver residual. */
ScalarField recovered_curvature(const ScalarField& u, double lam,
                                const ScalarField& f);

/** Slack of the Sobolev inequality for a specific pair (u, B):
 *  ||u||_{2*}^2 - K(n,2)^2 ||grad u||_2^2 - B ||u||_2^2.
 *  Nonpositive slack means the inequality holds for this pair. */
double sobolev_check(const ScalarField& u, double B, const SharpConstants& consts);

}  // namespace psc
