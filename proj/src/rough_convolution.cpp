#include "roughmill/rough_convolution.hpp"

#include <cmath>
#include <string>

namespace roughmill {

static void check_integrand(const ControlledPath& cp, const GridRoughPath& driver) {
    cp.validate(driver);
    if (cp.width != driver.dim)
        throw dimension_error("integrand needs one Y column per driver direction");
}

ScaleVector rough_convolve_window(const SpectralOperator& op, const ControlledPath& cp,
                                  const GridRoughPath& driver, int s_index,
                                  int t_index, int depth) {
    check_integrand(cp, driver);
    if (s_index < 0 || t_index >= cp.n_points() || s_index > t_index)
        throw index_error("rough_convolve window indices out of range");
    if (depth < 0) throw std::domain_error("depth must be >= 0");
    const int n = op.n_modes();
    ScaleVector acc(n);
    if (s_index == t_index) return acc;
    const long long steps = t_index - s_index;
    const long long cells = 1LL << depth;
    if (cells > steps)
        throw resolution_error("dyadic depth " + std::to_string(depth) +
                               " exceeds grid resolution (" + std::to_string(steps) +
                               " steps available)");
    const double t_end = driver.times[static_cast<size_t>(t_index)];
    const int d = driver.dim;
    std::vector<double> dx(static_cast<size_t>(d));

    int u = s_index;
    for (long long m = 1; m <= cells; ++m) {
        const int v = s_index + static_cast<int>((m * steps) / cells);
        if (v == u) continue; // degenerate cell on a non-divisible grid
        // germ at u: Y_u X_{u,v} + Y'_u A_{u,v}
        ScaleVector germ(n);
        increment(driver, u, v, dx.data());
        for (int j = 0; j < d; ++j) axpy_in(germ, dx[static_cast<size_t>(j)], cp.y(u, j));
        const std::vector<double> area = chen_extend(driver, u, v);
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j)
                axpy_in(germ, area[static_cast<size_t>(i) * d + j], cp.yprime(u, i, j));
        const double lag = t_end - driver.times[static_cast<size_t>(u)];
        for (int q = 0; q < n; ++q)
            acc[q] += std::exp(-op.eigenvalues[static_cast<size_t>(q)] * lag) * germ[q];
        u = v;
    }
    return acc;
}

ScaleVector rough_convolve(const SpectralOperator& op, const ControlledPath& cp,
                           const GridRoughPath& driver, int t_index, int depth) {
    return rough_convolve_window(op, cp, driver, 0, t_index, depth);
}

double sewing_defect(const SpectralOperator& op, const ControlledPath& cp,
                     const GridRoughPath& driver, int s_index, int t_index,
                     double beta) {
    check_integrand(cp, driver);
    if (s_index < 0 || t_index >= cp.n_points() || s_index > t_index)
        throw index_error("sewing_defect indices out of range");
    if (!(beta >= 0.0 && beta < 3.0 * cp.alpha))
        throw std::domain_error("beta must lie in [0, 3 alpha)");
    const int n = op.n_modes();
    if (s_index == t_index) return 0.0;

    int depth = 0;
    while ((2LL << depth) <= (t_index - s_index)) ++depth;
    const ScaleVector integral = rough_convolve_window(op, cp, driver, s_index, t_index, depth);

    // one-cell germ over the whole window
    const int d = driver.dim;
    std::vector<double> dx(static_cast<size_t>(d));
    increment(driver, s_index, t_index, dx.data());
    ScaleVector germ(n);
    for (int j = 0; j < d; ++j) axpy_in(germ, dx[static_cast<size_t>(j)], cp.y(s_index, j));
    const std::vector<double> area = chen_extend(driver, s_index, t_index);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j)
            axpy_in(germ, area[static_cast<size_t>(i) * d + j], cp.yprime(s_index, i, j));
    const double span =
        driver.times[static_cast<size_t>(t_index)] - driver.times[static_cast<size_t>(s_index)];
    ScaleVector defect = integral;
    const std::vector<double> sg = semigroup_factors(op, span);
    for (int q = 0; q < n; ++q) defect[q] -= sg[static_cast<size_t>(q)] * germ[q];
    return norm_gamma(defect, op, cp.gamma - 2.0 * cp.alpha + beta);
}

ScaleVector drift_convolve(const SpectralOperator& op, const std::vector<ScaleVector>& f,
                           const std::vector<double>& times, int t_index) {
    if (t_index < 0 || t_index >= static_cast<int>(times.size()))
        throw index_error("drift_convolve index out of range");
    if (f.size() < static_cast<size_t>(t_index))
        throw dimension_error("drift sequence shorter than the requested window");
    const int n = op.n_modes();
    ScaleVector acc(n);
    const double t_end = times[static_cast<size_t>(t_index)];
    for (int k = 0; k < t_index; ++k) {
        const double dt = times[static_cast<size_t>(k) + 1] - times[static_cast<size_t>(k)];
        const ScaleVector w = drift_weight(op, dt);
        const double lag = t_end - times[static_cast<size_t>(k) + 1];
        const std::vector<double> sg = semigroup_factors(op, lag);
        const ScaleVector& fk = f[static_cast<size_t>(k)];
        if (fk.size() != n) throw dimension_error("drift sequence entry has wrong length");
        for (int q = 0; q < n; ++q) acc[q] += sg[static_cast<size_t>(q)] * w[q] * fk[q];
    }
    return acc;
}

} // namespace roughmill
