#include "psc/torus.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <stdexcept>
#include <string>

namespace psc {

namespace {

constexpr double two_pi = 2.0 * std::numbers::pi;

double kahan_sum(std::span<const double> v) {
    double s = 0.0, c = 0.0;
    for (double x : v) {
        double y = x - c;
        double t = s + y;
        c = (t - s) - y;
        s = t;
    }
    return s;
}

// FFTW planning mutates global planner state; executing distinct plans on
// distinct buffers is safe without locking.
std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
}

struct FftwDeleter {
    void operator()(void* p) const { fftw_free(p); }
};

// One real<->half-complex transform pair for a fixed (dim, res), with the
// diagonal spectral multipliers precomputed. Kept thread_local so plan
// execution never shares buffers across threads.
struct Workspace {
    int dim = 0;
    int res = 0;
    std::size_t n_real = 0;
    std::size_t n_cplx = 0;
    std::unique_ptr<double, FftwDeleter> rbuf;
    std::unique_ptr<fftw_complex, FftwDeleter> cbuf;
    fftw_plan fwd = nullptr;
    fftw_plan bwd = nullptr;
    std::vector<double> lap_mul;   // (2 pi |k|)^2 per stored entry
    std::vector<double> fold;      // 1 or 2: conjugate-fold weight (last axis)

    Workspace(int d, int r) : dim(d), res(r) {
        n_real = 1;
        for (int a = 0; a < dim; ++a) n_real *= static_cast<std::size_t>(res);
        n_cplx = n_real / static_cast<std::size_t>(res) *
                 static_cast<std::size_t>(res / 2 + 1);
        rbuf.reset(static_cast<double*>(fftw_malloc(sizeof(double) * n_real)));
        cbuf.reset(static_cast<fftw_complex*>(
            fftw_malloc(sizeof(fftw_complex) * n_cplx)));
        if (!rbuf || !cbuf) throw std::bad_alloc();

        std::vector<int> dims(static_cast<std::size_t>(dim), res);
        {
            std::lock_guard<std::mutex> lock(planner_mutex());
            fwd = fftw_plan_dft_r2c(dim, dims.data(), rbuf.get(), cbuf.get(),
                                    FFTW_ESTIMATE);
            bwd = fftw_plan_dft_c2r(dim, dims.data(), cbuf.get(), rbuf.get(),
                                    FFTW_ESTIMATE);
        }
        if (!fwd || !bwd) throw std::runtime_error("fftw plan creation failed");

        lap_mul.resize(n_cplx);
        fold.resize(n_cplx);
        std::vector<int> idx(static_cast<std::size_t>(dim), 0);
        const int last = res / 2 + 1;
        for (std::size_t e = 0; e < n_cplx; ++e) {
            double k2 = 0.0;
            for (int a = 0; a < dim; ++a) {
                int t = idx[static_cast<std::size_t>(a)];
                int k = (a == dim - 1) ? t : (t <= res / 2 ? t : t - res);
                k2 += static_cast<double>(k) * static_cast<double>(k);
            }
            lap_mul[e] = two_pi * two_pi * k2;
            int h = idx[static_cast<std::size_t>(dim - 1)];
            fold[e] = (h == 0 || h == res / 2) ? 1.0 : 2.0;
            for (int a = dim - 1; a >= 0; --a) {
                int lim = (a == dim - 1) ? last : res;
                if (++idx[static_cast<std::size_t>(a)] < lim) break;
                idx[static_cast<std::size_t>(a)] = 0;
            }
        }
    }

    Workspace(const Workspace&) = delete;
    Workspace& operator=(const Workspace&) = delete;

    ~Workspace() {
        std::lock_guard<std::mutex> lock(planner_mutex());
        if (fwd) fftw_destroy_plan(fwd);
        if (bwd) fftw_destroy_plan(bwd);
    }

    void forward(std::span<const double> v) {
        std::copy(v.begin(), v.end(), rbuf.get());
        fftw_execute(fwd);
    }

    std::vector<double> backward_normalized() {
        fftw_execute(bwd);
        std::vector<double> out(rbuf.get(), rbuf.get() + n_real);
        const double s = 1.0 / static_cast<double>(n_real);
        for (double& x : out) x *= s;
        return out;
    }

    // integer frequency along one axis for a stored entry index
    int freq(std::size_t entry, int axis) const {
        std::size_t rem = entry;
        int t = 0;
        for (int a = dim - 1; a >= 0; --a) {
            int lim = (a == dim - 1) ? res / 2 + 1 : res;
            int cur = static_cast<int>(rem % static_cast<std::size_t>(lim));
            rem /= static_cast<std::size_t>(lim);
            if (a == axis) { t = (a == dim - 1) ? cur : (cur <= res / 2 ? cur : cur - res); }
        }
        return t;
    }
};

Workspace& workspace(const TorusGrid& g) {
    thread_local std::map<std::pair<int, int>, std::unique_ptr<Workspace>> cache;
    auto key = std::make_pair(g.dim(), g.res());
    auto it = cache.find(key);
    if (it == cache.end())
        it = cache.emplace(key, std::make_unique<Workspace>(g.dim(), g.res())).first;
    return *it->second;
}

void check_finite(std::span<const double> v) {
    for (double x : v)
        if (!std::isfinite(x))
            throw std::invalid_argument("scalar field contains a non-finite value");
}

}  // namespace

TorusGrid::TorusGrid(int dim, int res, std::size_t point_cap) : dim_(dim), res_(res) {
    if (dim < 1) throw std::invalid_argument("grid dimension must be >= 1");
    if (res < 4) throw std::invalid_argument("grid resolution must be >= 4");
    if (res % 2 != 0) throw std::invalid_argument("grid resolution must be even");
    std::size_t pts = 1;
    for (int a = 0; a < dim; ++a) {
        if (pts > point_cap / static_cast<std::size_t>(res))
            throw std::length_error("grid point count exceeds the memory cap");
        pts *= static_cast<std::size_t>(res);
    }
    points_ = pts;
    cell_volume_ = 1.0 / static_cast<double>(pts);
}

std::size_t TorusGrid::flat_index(std::span<const std::int32_t> multi) const {
    if (static_cast<int>(multi.size()) != dim_)
        throw std::invalid_argument("multi-index rank mismatch");
    std::size_t f = 0;
    for (int a = 0; a < dim_; ++a) {
        std::int32_t i = multi[static_cast<std::size_t>(a)];
        if (i < 0 || i >= res_) throw std::out_of_range("multi-index out of range");
        f = f * static_cast<std::size_t>(res_) + static_cast<std::size_t>(i);
    }
    return f;
}

std::vector<std::int32_t> TorusGrid::multi_index(std::size_t flat) const {
    if (flat >= points_) throw std::out_of_range("flat index out of range");
    std::vector<std::int32_t> idx(static_cast<std::size_t>(dim_));
    for (int a = dim_ - 1; a >= 0; --a) {
        idx[static_cast<std::size_t>(a)] =
            static_cast<std::int32_t>(flat % static_cast<std::size_t>(res_));
        flat /= static_cast<std::size_t>(res_);
    }
    return idx;
}

GridPoint::GridPoint(const TorusGrid& g, std::vector<std::int32_t> idx)
    : grid(g), index(std::move(idx)) {
    grid.flat_index(index);  // validates rank and range
}

GridPoint::GridPoint(const TorusGrid& g, std::size_t flat)
    : grid(g), index(g.multi_index(flat)) {}

std::vector<double> GridPoint::coords() const {
    std::vector<double> c(index.size());
    for (std::size_t a = 0; a < index.size(); ++a)
        c[a] = static_cast<double>(index[a]) / static_cast<double>(grid.res());
    return c;
}

ScalarField::ScalarField(const TorusGrid& grid, std::vector<double> values)
    : grid_(grid), values_(std::move(values)) {
    if (values_.size() != grid_.point_count())
        throw std::invalid_argument("value array length does not match the grid");
    check_finite(values_);
}

ScalarField ScalarField::constant(const TorusGrid& grid, double value) {
    return ScalarField(grid, std::vector<double>(grid.point_count(), value));
}

ScalarField ScalarField::from_function(
    const TorusGrid& grid, const std::function<double(std::span<const double>)>& fn) {
    std::vector<double> v(grid.point_count());
    const int n = grid.dim();
    const int res = grid.res();
    std::vector<std::int32_t> idx(static_cast<std::size_t>(n), 0);
    std::vector<double> x(static_cast<std::size_t>(n), 0.0);
    for (std::size_t f = 0; f < v.size(); ++f) {
        for (int a = 0; a < n; ++a)
            x[static_cast<std::size_t>(a)] =
                static_cast<double>(idx[static_cast<std::size_t>(a)]) / res;
        v[f] = fn(x);
        for (int a = n - 1; a >= 0; --a) {
            if (++idx[static_cast<std::size_t>(a)] < res) break;
            idx[static_cast<std::size_t>(a)] = 0;
        }
    }
    return ScalarField(grid, std::move(v));
}

double ScalarField::min() const { return *std::min_element(values_.begin(), values_.end()); }
double ScalarField::max() const { return *std::max_element(values_.begin(), values_.end()); }

std::size_t ScalarField::argmax() const {
    return static_cast<std::size_t>(
        std::max_element(values_.begin(), values_.end()) - values_.begin());
}

double integrate(const ScalarField& u) {
    return u.grid().cell_volume() * kahan_sum(u.values());
}

double l2_norm(const ScalarField& u) {
    double s = 0.0, c = 0.0;
    for (double x : u.values()) {
        double y = x * x - c;
        double t = s + y;
        c = (t - s) - y;
        s = t;
    }
    return std::sqrt(u.grid().cell_volume() * s);
}

double integrate_product(const ScalarField& u, const ScalarField& v) {
    if (u.grid() != v.grid()) throw std::invalid_argument("grid mismatch");
    double s = 0.0, c = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        double y = u[i] * v[i] - c;
        double t = s + y;
        c = (t - s) - y;
        s = t;
    }
    return u.grid().cell_volume() * s;
}

ScalarField laplacian(const ScalarField& u) {
    Workspace& w = workspace(u.grid());
    w.forward(u.values());
    fftw_complex* c = w.cbuf.get();
    for (std::size_t e = 0; e < w.n_cplx; ++e) {
        c[e][0] *= w.lap_mul[e];
        c[e][1] *= w.lap_mul[e];
    }
    return ScalarField(u.grid(), w.backward_normalized());
}

double dirichlet_energy(const ScalarField& u) {
    Workspace& w = workspace(u.grid());
    w.forward(u.values());
    const fftw_complex* c = w.cbuf.get();
    double s = 0.0, comp = 0.0;
    for (std::size_t e = 0; e < w.n_cplx; ++e) {
        double mag2 = c[e][0] * c[e][0] + c[e][1] * c[e][1];
        double y = w.fold[e] * w.lap_mul[e] * mag2 - comp;
        double t = s + y;
        comp = (t - s) - y;
        s = t;
    }
    double n = static_cast<double>(w.n_real);
    return s / (n * n);
}

ScalarField partial_derivative(const ScalarField& u, int axis) {
    const int n = u.grid().dim();
    if (axis < 0 || axis >= n) throw std::invalid_argument("axis out of range");
    Workspace& w = workspace(u.grid());
    w.forward(u.values());
    fftw_complex* c = w.cbuf.get();
    const int nyq = u.grid().res() / 2;
    for (std::size_t e = 0; e < w.n_cplx; ++e) {
        int k = w.freq(e, axis);
        double m = (k == nyq || k == -nyq) ? 0.0 : two_pi * static_cast<double>(k);
        double re = c[e][0], im = c[e][1];
        c[e][0] = -m * im;
        c[e][1] = m * re;
    }
    return ScalarField(u.grid(), w.backward_normalized());
}

ScalarField solve_poisson(const ScalarField& rhs, double mean_tol_rel) {
    const double mean = integrate(rhs);
    const double scale = l2_norm(rhs);
    if (std::abs(mean) > mean_tol_rel * (scale > 0.0 ? scale : 1.0))
        throw std::domain_error(
            "poisson right side has a nonzero mean; no periodic solution exists");
    Workspace& w = workspace(rhs.grid());
    w.forward(rhs.values());
    fftw_complex* c = w.cbuf.get();
    c[0][0] = 0.0;
    c[0][1] = 0.0;
    for (std::size_t e = 1; e < w.n_cplx; ++e) {
        c[e][0] /= w.lap_mul[e];
        c[e][1] /= w.lap_mul[e];
    }
    return ScalarField(rhs.grid(), w.backward_normalized());
}

double torus_distance(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) throw std::invalid_argument("dimension mismatch");
    double d2 = 0.0;
    for (std::size_t a = 0; a < x.size(); ++a) {
        double d = std::abs(x[a] - y[a]);
        d = std::min(d, 1.0 - d);
        d2 += d * d;
    }
    return std::sqrt(d2);
}

double torus_distance(const GridPoint& x, const GridPoint& y) {
    if (x.grid != y.grid) throw std::invalid_argument("points live on different grids");
    const auto cx = x.coords();
    const auto cy = y.coords();
    return torus_distance(std::span<const double>(cx), std::span<const double>(cy));
}

SpectralInterpolator::SpectralInterpolator(const ScalarField& u)
    : dim_(u.grid().dim()), res_(u.grid().res()) {
    Workspace& w = workspace(u.grid());
    w.forward(u.values());
    const fftw_complex* c = w.cbuf.get();
    const double inv_n = 1.0 / static_cast<double>(w.n_real);
    cre_.resize(w.n_cplx);
    cim_.resize(w.n_cplx);
    weight_ = w.fold;
    for (std::size_t e = 0; e < w.n_cplx; ++e) {
        cre_[e] = c[e][0] * inv_n;
        cim_[e] = c[e][1] * inv_n;
    }
}

double SpectralInterpolator::operator()(std::span<const double> point) const {
    if (static_cast<int>(point.size()) != dim_)
        throw std::invalid_argument("point dimension mismatch");
    const int half = res_ / 2 + 1;
    // per-axis phase tables e^{2 pi i k y} indexed by storage index
    std::vector<double> pre(static_cast<std::size_t>(dim_ * res_));
    std::vector<double> pim(static_cast<std::size_t>(dim_ * res_));
    for (int a = 0; a < dim_; ++a) {
        int lim = (a == dim_ - 1) ? half : res_;
        for (int t = 0; t < lim; ++t) {
            int k = (a == dim_ - 1) ? t : (t <= res_ / 2 ? t : t - res_);
            double ang = two_pi * static_cast<double>(k) * point[static_cast<std::size_t>(a)];
            pre[static_cast<std::size_t>(a * res_ + t)] = std::cos(ang);
            pim[static_cast<std::size_t>(a * res_ + t)] = std::sin(ang);
        }
    }
    std::vector<int> idx(static_cast<std::size_t>(dim_ > 1 ? dim_ - 1 : 0), 0);
    std::size_t outer = cre_.size() / static_cast<std::size_t>(half);
    double acc = 0.0;
    std::size_t e = 0;
    for (std::size_t o = 0; o < outer; ++o) {
        double ore = 1.0, oim = 0.0;
        for (int a = 0; a + 1 < dim_; ++a) {
            std::size_t t = static_cast<std::size_t>(a * res_ + idx[static_cast<std::size_t>(a)]);
            double re = ore * pre[t] - oim * pim[t];
            double im = ore * pim[t] + oim * pre[t];
            ore = re;
            oim = im;
        }
        const std::size_t base = static_cast<std::size_t>((dim_ - 1) * res_);
        for (int h = 0; h < half; ++h, ++e) {
            double phre = ore * pre[base + static_cast<std::size_t>(h)] -
                          oim * pim[base + static_cast<std::size_t>(h)];
            double phim = ore * pim[base + static_cast<std::size_t>(h)] +
                          oim * pre[base + static_cast<std::size_t>(h)];
            acc += weight_[e] * (cre_[e] * phre - cim_[e] * phim);
        }
        for (int a = dim_ - 2; a >= 0; --a) {
            if (++idx[static_cast<std::size_t>(a)] < res_) break;
            idx[static_cast<std::size_t>(a)] = 0;
        }
    }
    return acc;
}

}  // namespace psc
