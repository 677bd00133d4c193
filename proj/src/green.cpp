#include "psc/green.hpp"

#include <cmath>
#include <stdexcept>

namespace psc {

GreenContext::GreenContext(const TorusGrid& grid, const SharpConstants& consts)
    : grid_(grid), consts_(consts) {
    if (consts.n != grid.dim())
        throw std::invalid_argument("constants dimension does not match the grid");
}

const ScalarField& GreenContext::column(const GridPoint& x) const {
    if (x.grid != grid_) throw std::invalid_argument("source point on a different grid");
    const std::size_t key = x.flat();
    std::lock_guard<std::mutex> lock(mutex_);
    auto it = cache_.find(key);
    if (it != cache_.end()) return it->second;
    std::vector<double> rhs(grid_.point_count(), -1.0);
    rhs[key] += static_cast<double>(grid_.point_count());
    ScalarField col = solve_poisson(ScalarField(grid_, std::move(rhs)));
    return cache_.emplace(key, std::move(col)).first->second;
}

double representation_check(const GreenContext& ctx, const SubcriticalSolution& sol,
                            const ScalarField& f,
                            const std::vector<GridPoint>& sample) {
    const TorusGrid& g = ctx.grid();
    if (f.grid() != g || sol.u.grid() != g)
        throw std::invalid_argument("grid mismatch");
    std::vector<GridPoint> pts = sample;
    if (pts.empty()) {
        // deterministic spread: the origin, the solution peak, and a few
        // stride offsets from it
        pts.emplace_back(g, std::size_t{0});
        pts.push_back(sol.x_max);
        const std::size_t N = g.point_count();
        for (std::size_t k = 1; k <= 4; ++k)
            pts.emplace_back(g, (sol.x_max.flat() + k * (N / 5) + k) % N);
    }
    const double q = sol.q;
    const double ubar = integrate(sol.u);
    const double uinf = sol.u.max();
    std::vector<double> weighted(sol.u.size());
    for (std::size_t i = 0; i < weighted.size(); ++i)
        weighted[i] = f[i] * std::pow(sol.u[i], q - 1.0);
    double worst = 0.0;
    for (const GridPoint& y : pts) {
        const ScalarField& G = ctx.column(y);
        double s = 0.0, comp = 0.0;
        for (std::size_t i = 0; i < weighted.size(); ++i) {
            double t = G[i] * weighted[i] - comp;
            double tt = s + t;
            comp = (tt - s) - t;
            s = tt;
        }
        double integral = g.cell_volume() * s;
        double resid = std::abs(sol.u[y.flat()] - ubar - sol.lam * integral) / uinf;
        worst = std::max(worst, resid);
    }
    return worst;
}

ScalarField phi_field(const GreenContext& ctx, const ScalarField& f, double lam_star,
                      double mean_threshold) {
    if (f.grid() != ctx.grid()) throw std::invalid_argument("grid mismatch");
    const double fbar = integrate(f);
    if (std::abs(fbar) < mean_threshold)
        throw std::domain_error("mean of f is too close to zero");
    std::vector<double> rhs(f.size());
    for (std::size_t i = 0; i < rhs.size(); ++i)
        rhs[i] = lam_star * (1.0 - f[i] / fbar);
    return solve_poisson(ScalarField(f.grid(), std::move(rhs)));
}

double capital_phi(const GreenContext& ctx, const GridPoint& x, const GridPoint& y) {
    if (x.flat() == y.flat())
        throw std::domain_error("the kernel is singular on the diagonal");
    const int n = ctx.grid().dim();
    const double d = torus_distance(x, y);
    const ScalarField& G = ctx.column(x);
    return (n - 2.0) * ctx.consts().omega_n_minus_1 * std::pow(d, n - 2.0) *
           G[y.flat()];
}

}  // namespace psc
