#ifndef ROUGHMILL_AVERAGING_HPP
#define ROUGHMILL_AVERAGING_HPP

#include <cstdint>
#include <functional>
#include <vector>

#include "roughmill/slowfast.hpp"

namespace roughmill {

// Exponential Euler path of the frozen fast equation
//   dY = [L Y + F2(x, Y)] dt + G2(x, Y) dW~
// with the slow argument held at x, on a uniform mesh of `steps` steps of
// size h.  The caller provides the sampler so the noise stream stays under
// its control (the frozen stream is disjoint from the system drivers).
std::vector<ScaleVector> solve_frozen(const SpectralOperator& op, const ModelSpec& m,
                                      const ScaleVector& x, const ScaleVector& y0,
                                      int steps, double h, GaussianSampler& g);

struct FbarEstimate {
    ScaleVector mean;         // time-and-ensemble average of F1(x, Y_s)
    ScaleVector stderr_modes; // per-mode standard error over replicas
    bool horizon_warning = false;
};

// Estimator of the invariant-measure average of F1(x, .): frozen paths from
// y = 0, time-averaged over [burn_in, horizon] and averaged over replicas.
// Flags a warning when horizon leaves fewer than two mixing times of
// averaging window past the burn-in.
FbarEstimate estimate_fbar(const SpectralOperator& op, const ModelSpec& m,
                           const ScaleVector& x, double burn_in, double horizon,
                           int replicas, std::uint64_t master_seed, double h);

// Same estimator for a scalar observable of the frozen state (used by the
// closed-form cross-checks; unbounded observables are allowed here).
struct ScalarEstimate {
    double mean = 0.0;
    double stderr_mean = 0.0;
    bool horizon_warning = false;
};
ScalarEstimate estimate_invariant_observable(
    const SpectralOperator& op, const ModelSpec& m, const ScaleVector& x,
    const std::function<double(const ScaleVector&)>& observable, double burn_in,
    double horizon, int replicas, std::uint64_t master_seed, double h);

// Five theoretical mixing times, the default burn-in.
double default_burn_in(const SpectralOperator& op, const ModelSpec& m);

struct ErgodicityResult {
    std::vector<double> t;      // evaluation times
    std::vector<double> curve;  // |mean F1(x, Y_t) - fbar_hat|_{gamma-alpha}
    std::vector<double> smooth; // 5-point moving average of curve
    double fitted_rate = 0.0;   // least-squares exponential rate
    bool fit_ok = false;
    bool nonincreasing = false; // smoothed curve nonincreasing
    double theoretical_rate = 0.0;
    std::vector<double> phi;    // first-mode two-time correlation, t x t
    int cs_violations = 0;      // Cauchy-Schwarz failures in phi (expect 0)
};

// Decay of the frozen-equation observable toward its invariant average,
// fitted over the given times, with the two-time correlation diagnostic.
ErgodicityResult ergodicity_decay(const SpectralOperator& op, const ModelSpec& m,
                                  const ScaleVector& x, const ScaleVector& y,
                                  const std::vector<double>& t_grid, int replicas,
                                  std::uint64_t master_seed, double h, double gamma,
                                  double alpha, int threads = 1);

// Averaged slow equation dXbar = [L Xbar + fbar(Xbar)] dt + G1(Xbar) dB on
// the macro grid of B, same one-step scheme as the slow component.
std::vector<ScaleVector> solve_averaged(
    const SpectralOperator& op, const ModelSpec& m,
    const std::function<ScaleVector(const ScaleVector&)>& fbar, const SolverConfig& c,
    const GridRoughPath& B, const ScaleVector& x0);

// Closed-form averaged drift for the default coefficient family, computed
// from the stationary density of the scalar fast modes (each mode of the
// frozen equation is an autonomous 1-d diffusion, so its invariant marginal
// has an explicit density up to quadrature).  Cached on a fine table in the
// reachable range of the drift input; cross-checked against estimate_fbar
// in the tests.
std::function<ScaleVector(const ScaleVector&)> make_default_fbar(
    const SpectralOperator& op, const DefaultModelParams& p);

struct SweepRow {
    double epsilon = 0.0;
    double delta = 0.0; // recorded block length epsilon^{1/(2(1+2 alpha))}
    double mean_sq_sup_error = 0.0;
    double stderr_error = 0.0;
    int replicas = 0;
    std::uint64_t seed = 0;
};

// Headline sweep: for each epsilon, mean over replicas of the squared
// sup-norm gap between the coupled slow path and the averaged path under a
// shared driver B per replica.  Refuses replicas < 30.
std::vector<SweepRow> averaging_error_sweep(
    const SpectralOperator& op, const ModelSpec& m, const SolverConfig& base,
    const std::vector<double>& eps_list, int replicas,
    const std::function<ScaleVector(const ScaleVector&)>& fbar, const ScaleVector& x0,
    const ScaleVector& y0, int threads = 1);

} // namespace roughmill

#endif
