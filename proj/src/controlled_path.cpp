#include "roughmill/controlled_path.hpp"

#include <cmath>
#include <string>

namespace roughmill {

void ControlledPath::validate(const GridRoughPath& driver) const {
    if (width < 1 || dim < 1) throw dimension_error("controlled path width/dim must be >= 1");
    if (times.size() != driver.times.size() || dim != driver.dim)
        throw dimension_error("controlled path does not share the driver grid");
    for (size_t k = 0; k < times.size(); ++k)
        if (times[k] != driver.times[k])
            throw dimension_error("controlled path does not share the driver grid");
    if (Y.size() != times.size() * static_cast<size_t>(width))
        throw dimension_error("controlled path Y size mismatch");
    if (Yprime.size() != times.size() * static_cast<size_t>(width) * static_cast<size_t>(dim))
        throw dimension_error("controlled path Yprime size mismatch");
}

ControlledPath make_controlled_path(const GridRoughPath& driver, int n_modes,
                                    double gamma, double alpha, int width) {
    ControlledPath cp;
    cp.times = driver.times;
    cp.width = width;
    cp.dim = driver.dim;
    cp.gamma = gamma;
    cp.alpha = alpha;
    cp.Y.assign(driver.times.size() * static_cast<size_t>(width), ScaleVector(n_modes));
    cp.Yprime.assign(driver.times.size() * static_cast<size_t>(width) *
                         static_cast<size_t>(driver.dim),
                     ScaleVector(n_modes));
    return cp;
}

static ScaleVector remainder_unchecked(const ControlledPath& cp,
                                       const GridRoughPath& driver, int s_index,
                                       int t_index, int column) {
    ScaleVector r = sub(cp.y(t_index, column), cp.y(s_index, column));
    std::vector<double> dx(static_cast<size_t>(driver.dim));
    increment(driver, s_index, t_index, dx.data());
    for (int i = 0; i < driver.dim; ++i)
        axpy_in(r, -dx[static_cast<size_t>(i)], cp.yprime(s_index, i, column));
    return r;
}

ScaleVector remainder(const ControlledPath& cp, const GridRoughPath& driver,
                      int s_index, int t_index, int column) {
    cp.validate(driver);
    if (column < 0 || column >= cp.width) throw index_error("remainder column out of range");
    if (s_index < 0 || t_index >= cp.n_points() || s_index > t_index)
        throw index_error("remainder needs 0 <= s <= t on the grid");
    return remainder_unchecked(cp, driver, s_index, t_index, column);
}

// Frobenius norm over the columns of a node-level object.
static double columns_norm(const SpectralOperator& op,
                           const std::vector<const ScaleVector*>& cols, double gamma) {
    double s = 0.0;
    for (const ScaleVector* c : cols) {
        const double n = norm_gamma(*c, op, gamma);
        s += n * n;
    }
    return std::sqrt(s);
}

double controlled_norm(const ControlledPath& cp, const GridRoughPath& driver,
                       const SpectralOperator& op, double alpha, double gamma) {
    cp.validate(driver);
    const int K = cp.n_points() - 1;
    const int w = cp.width;
    const int d = cp.dim;

    double y_sup = 0.0, yp_sup = 0.0;
    for (int k = 0; k <= K; ++k) {
        std::vector<const ScaleVector*> ycols, ypcols;
        for (int j = 0; j < w; ++j) ycols.push_back(&cp.y(k, j));
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < w; ++j) ypcols.push_back(&cp.yprime(k, i, j));
        y_sup = std::max(y_sup, columns_norm(op, ycols, gamma));
        yp_sup = std::max(yp_sup, columns_norm(op, ypcols, gamma - alpha));
    }

    auto yp_diff = [&](int s, int t) {
        double acc = 0.0;
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < w; ++j) {
                const double n =
                    norm_gamma(sub(cp.yprime(t, i, j), cp.yprime(s, i, j)), op,
                               gamma - 2.0 * alpha);
                acc += n * n;
            }
        return std::sqrt(acc);
    };
    auto rem_mag = [&](int s, int t, double g) {
        double acc = 0.0;
        for (int j = 0; j < w; ++j) {
            const double n = norm_gamma(remainder_unchecked(cp, driver, s, t, j), op, g);
            acc += n * n;
        }
        return std::sqrt(acc);
    };

    const double yp_holder = holder_seminorm_table(cp.times, yp_diff, alpha);
    const double rem_a = holder_seminorm_table(
        cp.times, [&](int s, int t) { return rem_mag(s, t, gamma - alpha); }, alpha);
    const double rem_2a = holder_seminorm_table(
        cp.times, [&](int s, int t) { return rem_mag(s, t, gamma - 2.0 * alpha); },
        2.0 * alpha);

    return y_sup + yp_sup + yp_holder + rem_a + rem_2a;
}

ControlledPath compose_vector_field(const ControlledPath& cp, const VectorField& field) {
    if (cp.width != 1)
        throw dimension_error("compose_vector_field expects a width-1 input path");
    if (!field.value || !field.directional)
        throw config_error("vector field must provide value and directional derivative");

    ControlledPath out;
    out.times = cp.times;
    out.width = field.columns;
    out.dim = cp.dim;
    out.gamma = cp.gamma;
    out.alpha = cp.alpha;
    out.Y.resize(cp.times.size() * static_cast<size_t>(field.columns));
    out.Yprime.resize(cp.times.size() * static_cast<size_t>(field.columns) *
                      static_cast<size_t>(cp.dim));

    for (int k = 0; k < cp.n_points(); ++k) {
        std::vector<ScaleVector> g = field.value(cp.y(k));
        if (static_cast<int>(g.size()) != field.columns)
            throw config_error("vector field returned wrong number of columns");
        for (int j = 0; j < field.columns; ++j)
            out.y_ref(k, j) = g[static_cast<size_t>(j)];
        for (int i = 0; i < cp.dim; ++i) {
            std::vector<ScaleVector> dg = field.directional(cp.y(k), cp.yprime(k, i));
            if (static_cast<int>(dg.size()) != field.columns)
                throw config_error("vector field returned wrong number of columns");
            for (int j = 0; j < field.columns; ++j)
                out.yprime_ref(k, i, j) = dg[static_cast<size_t>(j)];
        }
    }
    return out;
}

} // namespace roughmill
