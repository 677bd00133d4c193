#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace psc {

/** Uniform periodic grid on the flat unit-volume torus [0,1)^n.
 *
 * Every axis has length 1 and the same resolution, so the total volume is
 * exactly 1 and the trapezoidal quadrature weight is res^(-n) per cell.
 * The resolution must be even: the real spectral transform then has a
 * single unambiguous Nyquist plane per axis.
 *
 * Sign convention used throughout: the Laplacian is the positive operator
 * Delta = -div(grad), so Delta applied to cos(2 pi k.x) gives
 * +(2 pi |k|)^2 cos(2 pi k.x).
 */
class TorusGrid {
public:
    static constexpr std::size_t default_point_cap = std::size_t{1} << 27;
    static constexpr double period = 1.0;  // every axis; total volume is 1

    TorusGrid(int dim, int res, std::size_t point_cap = default_point_cap);

    int dim() const { return dim_; }
    int res() const { return res_; }
    std::size_t point_count() const { return points_; }
    double cell_volume() const { return cell_volume_; }

    bool operator==(const TorusGrid& o) const { return dim_ == o.dim_ && res_ == o.res_; }
    bool operator!=(const TorusGrid& o) const { return !(*this == o); }

    std::size_t flat_index(std::span<const std::int32_t> multi) const;
    std::vector<std::int32_t> multi_index(std::size_t flat) const;

private:
    int dim_;
    int res_;
    std::size_t points_;
    double cell_volume_;
};

/** A grid node: integer multi-index plus its coordinates in [0,1)^n. */
struct GridPoint {
    TorusGrid grid;
    std::vector<std::int32_t> index;

    GridPoint(const TorusGrid& g, std::vector<std::int32_t> idx);
    GridPoint(const TorusGrid& g, std::size_t flat);

    std::size_t flat() const { return grid.flat_index(index); }
    std::vector<double> coords() const;
};

/** Real scalar field sampled on a TorusGrid, row-major (last axis fastest).
 *  Values are validated finite on construction; all operations below are
 *  pure and produce new fields, so instances are safe to share across
 *  threads once built. */
class ScalarField {
public:
    ScalarField(const TorusGrid& grid, std::vector<double> values);

    static ScalarField constant(const TorusGrid& grid, double value);
    static ScalarField from_function(
        const TorusGrid& grid,
        const std::function<double(std::span<const double>)>& fn);

    const TorusGrid& grid() const { return grid_; }
    std::span<const double> values() const { return values_; }
    double operator[](std::size_t i) const { return values_[i]; }
    std::size_t size() const { return values_.size(); }

    double min() const;
    double max() const;
    /** Index of the maximum value; ties broken by smallest flat index. */
    std::size_t argmax() const;

private:
    TorusGrid grid_;
    std::vector<double> values_;
};

/** Quadrature: cell_volume * sum of values. Exact for trigonometric
 *  polynomials below the Nyquist frequency. */
double integrate(const ScalarField& u);

/** L2(dv) norm, sqrt(integrate(u^2)). */
double l2_norm(const ScalarField& u);

/** integrate(u * v) without materializing the product field. */
double integrate_product(const ScalarField& u, const ScalarField& v);

/** Spectral Laplacian with the geometer's sign: mode k is multiplied by
 *  +(2 pi |k|)^2. */
ScalarField laplacian(const ScalarField& u);

/** Integral of |grad u|^2 via Parseval; agrees with
 *  integrate(u * laplacian(u)) to machine precision. */
double dirichlet_energy(const ScalarField& u);

/** Spectral partial derivative along one axis. The Nyquist mode of that
 *  axis is dropped (its sine samples vanish on the grid). */
ScalarField partial_derivative(const ScalarField& u, int axis);

/** Unique zero-mean w with laplacian(w) = rhs. The right side must have
 *  mean below mean_tol_rel * l2_norm(rhs); otherwise the problem has no
 *  solution and an exception is thrown. */
ScalarField solve_poisson(const ScalarField& rhs, double mean_tol_rel = 1e-10);

/** Geodesic distance on the flat torus: Euclidean distance minimized over
 *  the lattice translates of the unit cell. */
double torus_distance(const GridPoint& x, const GridPoint& y);

/** Same, between arbitrary coordinate tuples in [0,1)^n. */
double torus_distance(std::span<const double> x, std::span<const double> y);

/** Trigonometric interpolation of a grid field at arbitrary points.
 *  Holds the Fourier coefficients; evaluation is an O(point_count) mode
 *  sum per call and is exact for band-limited fields. */
class SpectralInterpolator {
public:
    explicit SpectralInterpolator(const ScalarField& u);
    double operator()(std::span<const double> point) const;

private:
    int dim_;
    int res_;
    std::vector<double> cre_;     // coefficient real parts, half spectrum
    std::vector<double> cim_;     // coefficient imaginary parts
    std::vector<double> weight_;  // 1 or 2 per entry (conjugate folding)
};

}  // namespace psc
