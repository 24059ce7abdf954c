#ifndef ROUGHMILL_SLOWFAST_HPP
#define ROUGHMILL_SLOWFAST_HPP

#include <cstdint>
#include <functional>
#include <vector>

#include "roughmill/hilbert_scale.hpp"
#include "roughmill/stochastic_drivers.hpp"

namespace roughmill {

// Coefficient functions of the coupled system
//   dX = [L X + F1(X, Y)] dt + G1(X) dB        (slow, rough driver B)
//   dY = 1/eps [L Y + F2(X, Y)] dt + 1/sqrt(eps) G2(X, Y) dW   (fast)
// together with the declared Lipschitz/bound constants used by the
// hypothesis checks.  G1 is given by d1 columns; DG1G1 supplies the
// second-order coefficients of the slow step, flattened as
// [i*d1 + j] = derivative of column j in the direction of column i,
// matching the (i, j) layout of driver areas.
struct ModelSpec {
    int n_modes = 0;
    int d1 = 1;
    int d2 = 1;
    double L_F2 = 0.25;
    double L_G2 = 0.25;
    double F1_bound = 0.0; // declared sup of |F1|, verified on probes

    std::function<ScaleVector(const ScaleVector&, const ScaleVector&)> F1;
    std::function<ScaleVector(const ScaleVector&, const ScaleVector&)> F2;
    std::function<std::vector<ScaleVector>(const ScaleVector&)> G1;
    std::function<std::vector<ScaleVector>(const ScaleVector&)> DG1G1;
    std::function<std::vector<ScaleVector>(const ScaleVector&, const ScaleVector&)> G2;
};

// Stability margin lambda_1 - L_F2 - 3 L_G2^2 demanded positive at model
// construction, and the slower mixing-rate margin lambda_1 - L_F2 - L_G2^2
// that governs the frozen-equation decay.
double h5_margin(const SpectralOperator& op, const ModelSpec& m);
double mixing_rate(const SpectralOperator& op, const ModelSpec& m);

// Throws config_error naming the violated constraint.
void check_model(const SpectralOperator& op, const ModelSpec& m);

// Parameters of the built-in coefficient family (gamma = 0 scale):
//   F1(x,y)_n = a_n tanh(x_n) + b_n tanh(y_n),        a_n = a_scale/n^2, ...
//   F2(x,y)_n = a_n tanh(x_n) + L_F2 sin(y_n)
//   G1 column m:   g_n tanh(x_n) / sqrt(d1),          g_n = g_scale/n^2
//   G2 column m:  (c_level + L_G2 sin(y_n)) / sqrt(d2)
// The column scalings keep the declared Lipschitz constants exact for any
// d1, d2.  y_independent_f1 drops the tanh(y) term (b = 0), which makes the
// averaged drift coincide with F1.
struct DefaultModelParams {
    int n_modes = 8;
    int d1 = 1;
    int d2 = 1;
    double L_F2 = 0.25;
    double L_G2 = 0.25;
    double a_scale = 0.5;
    double b_scale = 0.5;
    double g_scale = 0.4;
    double c_level = 0.5;
    bool y_independent_f1 = false;
};

ModelSpec make_default_model(const SpectralOperator& op, const DefaultModelParams& p);

// Largest |F1(x,y)|_{gamma-alpha} over random probes; must stay below the
// declared bound (lambda_1 >= 1 makes the level-0 bound dominate).
double probe_f1_bound(const SpectralOperator& op, const ModelSpec& m, double gamma,
                      double alpha, int n_probes, std::uint64_t seed);

// Discretization and experiment parameters.  delta and micro_substeps may
// be left at 0 and are then derived (delta = eps^{1/(2(1+2 alpha))}; micro
// mesh h = eps/40 rounded to divide the macro step).
struct SolverConfig {
    double alpha = 0.45;
    double alpha0 = 0.5;
    double gamma = 0.0;
    double sigma = 0.0;
    double theta = 0.0; // norm bookkeeping only (one of 0, alpha, 2 alpha); no runtime branch
    double zeta = 0.4;
    double epsilon = 0.01;
    double delta = 0.0;
    double T = 0.5;
    int macro_steps = 512;
    int micro_substeps = 0;
    int area_substeps = 32;
    std::uint64_t master_seed = 42;
    std::uint64_t replica_id = 0;
};

// Validates ranges and fills derived fields in place.  Throws config_error
// with the violated constraint named.
void validate_solver_config(SolverConfig& c);

double derived_delta(double epsilon, double alpha);

// One slow macro step of size h from (x_k, y_k):
//   S_h x + drift_weight(h) F1(x, y) + S_h [ G1(x) dB + DG1G1(x) : areaB ].
// dB has d1 entries, areaB is d1*d1 row-major.
ScaleVector step_slow(const SpectralOperator& op, const ModelSpec& m,
                      const ScaleVector& x, const ScaleVector& y, const double* dB,
                      const double* areaB, double h);

// One fast micro step of size h (exponential Euler on the 1/eps-rescaled
// semigroup):
//   S_{h/eps} y + drift_weight(h/eps) F2(x, y) + 1/sqrt(eps) S_{h/eps} G2(x, y) dW.
// Enforces the timescale separation h <= eps/20.
ScaleVector step_fast(const SpectralOperator& op, const ModelSpec& m,
                      const ScaleVector& x, const ScaleVector& y, const double* dW,
                      double h, double eps);

// Sampled drivers for one replica: the lifted macro rough driver B (with
// its substep record for replay/mixing) and the fast micro increments dW.
struct CoupledDrivers {
    GridRoughPath B;
    SubstepRecord recB;
    std::vector<double> micro_times; // macro_steps*micro_substeps + 1
    std::vector<double> dW;          // micro_steps_total * d2
};

CoupledDrivers sample_coupled_drivers(const SolverConfig& c, int d1, int d2);

struct CoupledSolution {
    std::vector<double> macro_times;
    std::vector<ScaleVector> slow; // macro grid
    std::vector<ScaleVector> fast; // micro grid
};

// Slow path on the macro grid, fast path on the micro grid; the slow input
// to the fast coefficients is held at the left macro node, refreshed each
// macro step; the fast input to the slow step is the micro value at the
// macro node.  Deterministic given the drivers.
CoupledSolution solve_coupled(const SpectralOperator& op, const ModelSpec& m,
                              const SolverConfig& c, const CoupledDrivers& drv,
                              const ScaleVector& x0, const ScaleVector& y0);

// Fast path re-integrated with the slow input frozen at X_{t(delta)},
// t(delta) = floor(t/delta) delta, reusing the same micro increments.
// delta must be an integer multiple of the macro step.
std::vector<ScaleVector> solve_auxiliary(const SpectralOperator& op, const ModelSpec& m,
                                         const SolverConfig& c, const CoupledDrivers& drv,
                                         const std::vector<ScaleVector>& slow,
                                         const ScaleVector& y0, double delta);

struct IncrementRow {
    double delta = 0.0;
    double mean_sup4 = 0.0; // mean over replicas of sup_t |X_t - X_{t(delta)}|^4
    double stderr_sup4 = 0.0;
};

// Fourth-moment block-increment table over the supplied deltas; every
// delta must land on the macro grid.
std::vector<IncrementRow> increment_experiment(const SpectralOperator& op,
                                               const ModelSpec& m, const SolverConfig& c,
                                               const std::vector<double>& deltas,
                                               int replicas, const ScaleVector& x0,
                                               const ScaleVector& y0, int threads = 1);

// Default initial data used by experiments: x_n = y_n = 1/n^2.
ScaleVector default_initial(int n_modes);

} // namespace roughmill

#endif
