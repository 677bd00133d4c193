#pragma once

#include <map>
#include <mutex>

#include "psc/subcritical.hpp"

namespace psc {

/** Green function of the Laplacian on the discrete torus with the
 *  zero-mean normalization: each column G(x,.) solves
 *  laplacian(G) = delta_x - 1 and integrates to zero, where delta_x is the
 *  discrete delta of unit mass (value res^n at x). Columns are cached per
 *  source point; lookups are atomic per key. */
class GreenContext {
public:
    GreenContext(const TorusGrid& grid, const SharpConstants& consts);

    const TorusGrid& grid() const { return grid_; }
    const SharpConstants& consts() const { return consts_; }

    /** Zero-mean column for the given source point (cached). */
    const ScalarField& column(const GridPoint& x) const;

private:
    TorusGrid grid_;
    SharpConstants consts_;
    mutable std::mutex mutex_;
    mutable std::map<std::size_t, ScalarField> cache_;
};

/** Max residual, over the sample points, of the representation formula
 *  u(y) - mean(u) = lam * int G(y,.) f u^{q-1}, normalized by ||u||_inf.
 *  With an empty sample a deterministic default spread is used. */
double representation_check(const GreenContext& ctx, const SubcriticalSolution& sol,
                            const ScalarField& f,
                            const std::vector<GridPoint>& sample = {});

/** Zero-mean solution of laplacian(phi) = lam_star (1 - f / mean(f)).
 *  The right side is mean-free by construction on the unit-volume torus. */
ScalarField phi_field(const GreenContext& ctx, const ScalarField& f, double lam_star,
                      double mean_threshold = 1e-12);

/** Distance-normalized kernel (n-2) omega_{n-1} d(x,y)^{n-2} G(x,y);
 *  tends to 1 at the diagonal in the continuum limit. */
double capital_phi(const GreenContext& ctx, const GridPoint& x, const GridPoint& y);

}  // namespace psc
