#include "roughmill/hilbert_scale.hpp"

#include <cmath>
#include <string>

namespace roughmill {

SpectralOperator::SpectralOperator(std::vector<double> lambdas)
    : eigenvalues(std::move(lambdas)) {
    if (eigenvalues.empty())
        throw config_error("SpectralOperator needs at least one eigenvalue");
    double prev = 0.0;
    for (size_t k = 0; k < eigenvalues.size(); ++k) {
        const double l = eigenvalues[k];
        // Zero is admitted so identity-semigroup test operators exist; the
        // model constructor separately demands a positive stability margin,
        // which forces lambda_1 > 0 on any operator actually driving a run.
        if (!std::isfinite(l) || l < 0.0)
            throw config_error("eigenvalue " + std::to_string(k + 1) +
                               " must be finite and nonnegative, got " + std::to_string(l));
        if (l < prev)
            throw config_error("eigenvalues must be nondecreasing; entry " +
                               std::to_string(k + 1) + " decreases");
        prev = l;
    }
}

SpectralOperator dirichlet_laplacian(int n_modes) {
    if (n_modes < 1) throw config_error("n_modes must be >= 1");
    std::vector<double> l(static_cast<size_t>(n_modes));
    for (int n = 1; n <= n_modes; ++n)
        l[static_cast<size_t>(n - 1)] = static_cast<double>(n) * static_cast<double>(n);
    return SpectralOperator(std::move(l));
}

ScaleVector basis_vector(int n_modes, int index) {
    if (index < 0 || index >= n_modes) throw index_error("basis index out of range");
    ScaleVector e(n_modes);
    e[index] = 1.0;
    return e;
}

static void require_same_size(int a, int b, const char* what) {
    if (a != b)
        throw dimension_error(std::string(what) + ": lengths " + std::to_string(a) +
                              " vs " + std::to_string(b));
}

ScaleVector add(const ScaleVector& a, const ScaleVector& b) {
    require_same_size(a.size(), b.size(), "add");
    ScaleVector r(a.size());
    for (int i = 0; i < a.size(); ++i) r[i] = a[i] + b[i];
    return r;
}

ScaleVector sub(const ScaleVector& a, const ScaleVector& b) {
    require_same_size(a.size(), b.size(), "sub");
    ScaleVector r(a.size());
    for (int i = 0; i < a.size(); ++i) r[i] = a[i] - b[i];
    return r;
}

ScaleVector scaled(const ScaleVector& a, double c) {
    ScaleVector r(a.size());
    for (int i = 0; i < a.size(); ++i) r[i] = c * a[i];
    return r;
}

void axpy_in(ScaleVector& y, double c, const ScaleVector& x) {
    require_same_size(y.size(), x.size(), "axpy");
    for (int i = 0; i < y.size(); ++i) y[i] += c * x[i];
}

ScaleVector hadamard(const ScaleVector& w, const ScaleVector& x) {
    require_same_size(w.size(), x.size(), "hadamard");
    ScaleVector r(w.size());
    for (int i = 0; i < w.size(); ++i) r[i] = w[i] * x[i];
    return r;
}

double norm_gamma(const ScaleVector& x, const SpectralOperator& op, double gamma) {
    require_same_size(x.size(), op.n_modes(), "norm_gamma");
    double s = 0.0;
    for (int i = 0; i < x.size(); ++i) {
        const double w = std::pow(op.eigenvalues[static_cast<size_t>(i)], gamma);
        s += (w * x[i]) * (w * x[i]);
    }
    return std::sqrt(s);
}

std::vector<double> semigroup_factors(const SpectralOperator& op, double t) {
    if (t < 0.0) throw std::domain_error("semigroup time must be >= 0");
    std::vector<double> f(op.eigenvalues.size());
    for (size_t i = 0; i < f.size(); ++i) f[i] = std::exp(-op.eigenvalues[i] * t);
    return f;
}

ScaleVector semigroup_apply(const SpectralOperator& op, double t, const ScaleVector& x) {
    require_same_size(x.size(), op.n_modes(), "semigroup_apply");
    if (t < 0.0) throw std::domain_error("semigroup time must be >= 0");
    ScaleVector r(x.size());
    for (int i = 0; i < x.size(); ++i)
        r[i] = std::exp(-op.eigenvalues[static_cast<size_t>(i)] * t) * x[i];
    return r;
}

ScaleVector drift_weight(const SpectralOperator& op, double t) {
    if (t <= 0.0) throw std::domain_error("drift_weight time must be > 0");
    ScaleVector w(op.n_modes());
    for (int i = 0; i < w.size(); ++i) {
        const double l = op.eigenvalues[static_cast<size_t>(i)];
        const double u = l * t;
        // (1 - e^{-u})/lambda; series t*(1 - u/2 + u^2/6) below the
        // cancellation threshold.
        if (u < 1e-8)
            w[i] = t * (1.0 - u / 2.0 + u * u / 6.0);
        else
            w[i] = (1.0 - std::exp(-u)) / l;
    }
    return w;
}

double interpolation_check(const ScaleVector& x, const SpectralOperator& op,
                           double g1, double g2, double g3) {
    if (!(g1 <= g2 && g2 <= g3))
        throw std::domain_error("interpolation_check needs g1 <= g2 <= g3");
    bool all_zero = true;
    for (int i = 0; i < x.size(); ++i)
        if (x[i] != 0.0) { all_zero = false; break; }
    if (all_zero)
        throw std::domain_error("interpolation_check undefined for the zero vector");
    const double n1 = norm_gamma(x, op, g1);
    const double n2 = norm_gamma(x, op, g2);
    const double n3 = norm_gamma(x, op, g3);
    return std::pow(n2, g3 - g1) / (std::pow(n1, g3 - g2) * std::pow(n3, g2 - g1));
}

} // namespace roughmill
