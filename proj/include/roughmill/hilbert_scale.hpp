#ifndef ROUGHMILL_HILBERT_SCALE_HPP
#define ROUGHMILL_HILBERT_SCALE_HPP

#include <vector>

#include "roughmill/errors.hpp"

namespace roughmill {

// Diagonal spectral model of the scale of Hilbert spaces H_gamma.
// -L acts on a fixed orthonormal basis with eigenvalues
// 0 <= lambda_1 <= lambda_2 <= ... and
// |x|_gamma = (sum_n lambda_n^{2 gamma} x_n^2)^{1/2}.
// Zero eigenvalues are allowed (identity-semigroup test operators); such
// operators only support gamma >= 0 norms.  Model construction separately
// requires a positive stability margin, hence lambda_1 > 0 in actual runs.
struct SpectralOperator {
    std::vector<double> eigenvalues;

    explicit SpectralOperator(std::vector<double> lambdas);
    int n_modes() const { return static_cast<int>(eigenvalues.size()); }
};

// Default generator: Dirichlet Laplacian on (0, pi), lambda_n = n^2.
SpectralOperator dirichlet_laplacian(int n_modes);

// Coefficient vector of an element of the scale in the eigenbasis.
struct ScaleVector {
    std::vector<double> coeffs;

    ScaleVector() = default;
    explicit ScaleVector(int n) : coeffs(static_cast<size_t>(n), 0.0) {}
    explicit ScaleVector(std::vector<double> c) : coeffs(std::move(c)) {}

    int size() const { return static_cast<int>(coeffs.size()); }
    double operator[](int i) const { return coeffs[static_cast<size_t>(i)]; }
    double& operator[](int i) { return coeffs[static_cast<size_t>(i)]; }
};

// Basis vector e_{index} (0-based index into the eigenbasis).
ScaleVector basis_vector(int n_modes, int index);

// Elementwise arithmetic used throughout the solvers.
ScaleVector add(const ScaleVector& a, const ScaleVector& b);
ScaleVector sub(const ScaleVector& a, const ScaleVector& b);
ScaleVector scaled(const ScaleVector& a, double c);
void axpy_in(ScaleVector& y, double c, const ScaleVector& x); // y += c*x
ScaleVector hadamard(const ScaleVector& w, const ScaleVector& x);

// |x|_gamma in the spectral model. Throws dimension_error on length mismatch.
double norm_gamma(const ScaleVector& x, const SpectralOperator& op, double gamma);

// S_t x = (e^{-lambda_n t} x_n)_n. Throws std::domain_error for t < 0.
ScaleVector semigroup_apply(const SpectralOperator& op, double t, const ScaleVector& x);

// The factors e^{-lambda_n t} themselves (shared by several steppers).
std::vector<double> semigroup_factors(const SpectralOperator& op, double t);

// Exponential-integrator weights w_n = (1 - e^{-lambda_n t})/lambda_n,
// the exact value of the integral of e^{-lambda_n s} over [0, t].
// Evaluated by a 3-term series when lambda_n*t < 1e-8 to avoid cancellation.
// Throws std::domain_error for t <= 0.
ScaleVector drift_weight(const SpectralOperator& op, double t);

// Multiplicative interpolation ratio
//   |x|_{g2}^{g3-g1} / (|x|_{g1}^{g3-g2} * |x|_{g3}^{g2-g1}).
// In the spectral model the ratio is <= 1 (up to 1e-12 roundoff).
// Requires g1 <= g2 <= g3 and x != 0.
double interpolation_check(const ScaleVector& x, const SpectralOperator& op,
                           double g1, double g2, double g3);

} // namespace roughmill

#endif
