#pragma once

#include <functional>
#include <optional>
#include <stdexcept>
#include <vector>

#include "psc/functionals.hpp"
#include "psc/torus.hpp"

namespace psc {

/** Settings for the constrained descent. A zero step requests the
 *  resolution-based default 1/((2 pi)^2 n (res/2)^2), the stability
 *  limit of a plain explicit step. */
struct SolverConfig {
    double step = 0.0;
    double tol = 1e-7;            // relative Euler-Lagrange residual target
    long max_iters = 200000;
    double backtrack = 0.5;       // step shrink factor in (0,1)
    double bump_width_cells = 4.0;
    std::optional<ScalarField> warm_start;
    std::vector<double>* energy_trace = nullptr;  // accepted energies, observability hook
};

/** A converged constrained minimizer at exponent q: the field, the
 *  minimal energy lam (also the Euler-Lagrange multiplier), and
 *  convergence diagnostics. */
struct SubcriticalSolution {
    ScalarField u;
    double q = 0.0;
    double lam = 0.0;
    double el_residual = 0.0;
    double energy = 0.0;
    long iters = 0;
    GridPoint x_max;
    double u_max = 0.0;
};

struct ContinuationEntry {
    double q = 0.0;
    double lam = 0.0;
    double u_max = 0.0;
    GridPoint x_max;
    double mu_q = 0.0;   // NaN when the concentration scale is undefined
    double eta_q = 0.0;
    double el_residual = 0.0;
};

/** Per-exponent summaries of a warm-started sweep toward the critical
 *  exponent, with the sharp upper bound attached for comparison. */
struct ContinuationTrace {
    std::vector<ContinuationEntry> entries;
    std::vector<double> schedule;
    double bound = 0.0;
};

/** Raised when the descent exhausts its iteration budget above tolerance;
 *  carries the best iterate seen. */
struct NonConvergenceError : std::runtime_error {
    SubcriticalSolution best;
    NonConvergenceError(std::string msg, SubcriticalSolution b)
        : std::runtime_error(std::move(msg)), best(std::move(b)) {}
};

/** Relative Euler-Lagrange residual
 *  ||laplacian(u) - lam f u^{q-1}||_2 / (lam ||f u^{q-1}||_2). */
double el_residual(const ScalarField& u, double lam, const ScalarField& f, double q);

/** Minimize the Dirichlet energy over the constraint set at exponent q by
 *  projected gradient descent: clip the stepped iterate at zero,
 *  renormalize into the constraint set, and accept only steps that do not
 *  increase the energy (up to roundoff); the multiplier is the current
 *  energy. Step sizes between accepted iterates follow a safeguarded
 *  two-point (Barzilai-Borwein) rule, which leaves the update and the
 *  acceptance test unchanged but removes the mesh-induced stiffness from
 *  the convergence rate. */
SubcriticalSolution minimize(const ScalarField& f, double q, const SolverConfig& cfg);

/** Solve along a strictly increasing exponent schedule, warm-starting each
 *  solve from the previous minimizer. on_solution, when given, observes
 *  every converged minimizer in schedule order. */
ContinuationTrace continuation(
    const ScalarField& f, std::vector<double> schedule, const SolverConfig& cfg,
    const std::function<void(const SubcriticalSolution&)>& on_solution = {});

/** Default schedule approaching the limit exponent geometrically:
 *  q_k = q_end - (q_end - q_start)/2^k, k = 0..steps-1. */
std::vector<double> default_schedule(double q_start, double q_end, int steps);

/** Residuals of the two integral identities every solution satisfies:
 *  integral_balance = |int f u^{q-1}| (integrating the equation), and
 *  singular_weight = |int f + (q-1)/lam int u^{-q} |grad u|^2| (pairing
 *  the equation with u^{1-q}). The second is skipped when u touches the
 *  positivity floor. */
struct IdentityResiduals {
    double integral_balance = 0.0;
    double singular_weight = 0.0;
    bool singular_weight_valid = false;
};

IdentityResiduals necessary_condition_identities(const SubcriticalSolution& sol,
                                                 const ScalarField& f,
                                                 double positivity_floor = 1e-8);

}  // namespace psc
