#include "roughmill/averaging.hpp"

#include <cmath>
#include <string>

#include "roughmill/worker_pool.hpp"

namespace roughmill {

std::vector<ScaleVector> solve_frozen(const SpectralOperator& op, const ModelSpec& m,
                                      const ScaleVector& x, const ScaleVector& y0,
                                      int steps, double h, GaussianSampler& g) {
    check_model(op, m);
    if (steps < 1 || !(h > 0.0)) throw config_error("frozen solve needs steps >= 1, h > 0");
    const int n = op.n_modes();
    const std::vector<double> sg = semigroup_factors(op, h);
    const ScaleVector w = drift_weight(op, h);
    const double sd = std::sqrt(h);

    std::vector<ScaleVector> path;
    path.reserve(static_cast<size_t>(steps) + 1);
    path.push_back(y0);
    std::vector<double> dw(static_cast<size_t>(m.d2));
    for (int k = 0; k < steps; ++k) {
        const ScaleVector& y = path.back();
        ScaleVector noise(n);
        const std::vector<ScaleVector> g2 = m.G2(x, y);
        for (int i = 0; i < m.d2; ++i) {
            dw[static_cast<size_t>(i)] = sd * g();
            axpy_in(noise, dw[static_cast<size_t>(i)], g2[static_cast<size_t>(i)]);
        }
        const ScaleVector f2 = m.F2(x, y);
        ScaleVector yn(n);
        for (int q = 0; q < n; ++q)
            yn[q] = sg[static_cast<size_t>(q)] * (y[q] + noise[q]) + w[q] * f2[q];
        for (int q = 0; q < n; ++q)
            if (!std::isfinite(yn[q]))
                throw instability_error("frozen state became non-finite at step " +
                                        std::to_string(k + 1));
        path.push_back(std::move(yn));
    }
    return path;
}

double default_burn_in(const SpectralOperator& op, const ModelSpec& m) {
    const double rate = mixing_rate(op, m);
    if (!(rate > 0.0)) throw config_error("mixing rate nonpositive; cannot set burn-in");
    return 5.0 / rate;
}

namespace {

struct AverageAccumulator {
    // one slot per replica, each the time average of the observable vector
    std::vector<std::vector<double>> slots;
};

// Shared core: frozen paths from y = 0, time average of `observe` past the
// burn-in, one slot per replica.
void run_time_averages(const SpectralOperator& op, const ModelSpec& m,
                       const ScaleVector& x, double burn_in, double horizon,
                       int replicas, std::uint64_t master_seed, double h, int obs_len,
                       const std::function<void(const ScaleVector&, double*)>& observe,
                       AverageAccumulator& acc, bool* warn) {
    if (!(burn_in >= 0.0) || !(horizon > burn_in))
        throw config_error("need 0 <= burn_in < horizon");
    if (replicas < 1) throw config_error("need replicas >= 1");
    const int steps = std::max(1, static_cast<int>(std::llround(horizon / h)));
    const double h_eff = horizon / steps;
    const int first = static_cast<int>(std::ceil(burn_in / h_eff - 1e-12));
    const double rate = mixing_rate(op, m);
    if (warn) *warn = (horizon - burn_in) < 2.0 / rate;

    acc.slots.assign(static_cast<size_t>(replicas),
                     std::vector<double>(static_cast<size_t>(obs_len), 0.0));
    const ScaleVector y0(m.n_modes);
    std::vector<double> obs(static_cast<size_t>(obs_len));
    for (int r = 0; r < replicas; ++r) {
        GaussianSampler g(master_seed, static_cast<std::uint64_t>(r), Stream::frozen_driver);
        const std::vector<ScaleVector> path = solve_frozen(op, m, x, y0, steps, h_eff, g);
        std::vector<double>& slot = acc.slots[static_cast<size_t>(r)];
        int count = 0;
        for (int k = first; k <= steps; ++k) {
            observe(path[static_cast<size_t>(k)], obs.data());
            for (int q = 0; q < obs_len; ++q) slot[static_cast<size_t>(q)] += obs[static_cast<size_t>(q)];
            ++count;
        }
        for (int q = 0; q < obs_len; ++q) slot[static_cast<size_t>(q)] /= count;
    }
}

void mean_and_stderr(const AverageAccumulator& acc, int obs_len, double* mean,
                     double* se) {
    const int R = static_cast<int>(acc.slots.size());
    for (int q = 0; q < obs_len; ++q) mean[q] = 0.0;
    for (const auto& slot : acc.slots)
        for (int q = 0; q < obs_len; ++q) mean[q] += slot[static_cast<size_t>(q)];
    for (int q = 0; q < obs_len; ++q) mean[q] /= R;
    for (int q = 0; q < obs_len; ++q) {
        double var = 0.0;
        for (const auto& slot : acc.slots) {
            const double d = slot[static_cast<size_t>(q)] - mean[q];
            var += d * d;
        }
        se[q] = R > 1 ? std::sqrt(var / (R - 1) / R) : 0.0;
    }
}

} // namespace

FbarEstimate estimate_fbar(const SpectralOperator& op, const ModelSpec& m,
                           const ScaleVector& x, double burn_in, double horizon,
                           int replicas, std::uint64_t master_seed, double h) {
    const int n = op.n_modes();
    AverageAccumulator acc;
    FbarEstimate est;
    run_time_averages(
        op, m, x, burn_in, horizon, replicas, master_seed, h, n,
        [&](const ScaleVector& y, double* out) {
            const ScaleVector f = m.F1(x, y);
            for (int q = 0; q < n; ++q) out[q] = f[q];
        },
        acc, &est.horizon_warning);
    est.mean = ScaleVector(n);
    est.stderr_modes = ScaleVector(n);
    mean_and_stderr(acc, n, est.mean.coeffs.data(), est.stderr_modes.coeffs.data());
    return est;
}

ScalarEstimate estimate_invariant_observable(
    const SpectralOperator& op, const ModelSpec& m, const ScaleVector& x,
    const std::function<double(const ScaleVector&)>& observable, double burn_in,
    double horizon, int replicas, std::uint64_t master_seed, double h) {
    AverageAccumulator acc;
    ScalarEstimate est;
    run_time_averages(
        op, m, x, burn_in, horizon, replicas, master_seed, h, 1,
        [&](const ScaleVector& y, double* out) { out[0] = observable(y); }, acc,
        &est.horizon_warning);
    mean_and_stderr(acc, 1, &est.mean, &est.stderr_mean);
    return est;
}

ErgodicityResult ergodicity_decay(const SpectralOperator& op, const ModelSpec& m,
                                  const ScaleVector& x, const ScaleVector& y,
                                  const std::vector<double>& t_grid, int replicas,
                                  std::uint64_t master_seed, double h, double gamma,
                                  double alpha, int threads) {
    check_model(op, m);
    if (replicas < 100) throw config_error("ergodicity_decay needs replicas >= 100");
    if (t_grid.empty()) throw config_error("ergodicity_decay needs a time grid");
    for (size_t i = 0; i + 1 < t_grid.size(); ++i)
        if (!(t_grid[i] < t_grid[i + 1]))
            throw config_error("ergodicity time grid must be increasing");

    const int n = op.n_modes();
    const double t_max = t_grid.back();
    const int steps = std::max(1, static_cast<int>(std::llround(t_max / h)));
    const double h_eff = t_max / steps;
    std::vector<int> nodes;
    nodes.reserve(t_grid.size());
    for (double t : t_grid)
        nodes.push_back(std::min(steps, static_cast<int>(std::llround(t / h_eff))));

    // reference invariant average from a disjoint replica block
    const double burn = default_burn_in(op, m);
    const double rate = mixing_rate(op, m);
    const FbarEstimate ref = estimate_fbar(op, m, x, burn, burn + 24.0 / rate,
                                           std::max(64, replicas / 4),
                                           master_seed + 0x517cc1b727220a95ULL, h);

    const size_t P = t_grid.size();
    // per replica, per grid time: F1(x, Y_t) (n modes) -- slot storage
    std::vector<std::vector<double>> samples(
        static_cast<size_t>(replicas), std::vector<double>(P * static_cast<size_t>(n)));
    parallel_replicas(replicas, threads, [&](int r) {
        GaussianSampler g(master_seed, static_cast<std::uint64_t>(r), Stream::frozen_driver);
        const std::vector<ScaleVector> path = solve_frozen(op, m, x, y, steps, h_eff, g);
        std::vector<double>& slot = samples[static_cast<size_t>(r)];
        for (size_t i = 0; i < P; ++i) {
            const ScaleVector f = m.F1(x, path[static_cast<size_t>(nodes[i])]);
            for (int q = 0; q < n; ++q) slot[i * n + q] = f[q];
        }
    });

    ErgodicityResult res;
    res.t = t_grid;
    res.theoretical_rate = rate;
    res.curve.resize(P);
    ScaleVector dev(n);
    std::vector<std::vector<double>> mean_f(P, std::vector<double>(static_cast<size_t>(n), 0.0));
    for (size_t i = 0; i < P; ++i) {
        for (int r = 0; r < replicas; ++r)
            for (int q = 0; q < n; ++q)
                mean_f[i][static_cast<size_t>(q)] += samples[static_cast<size_t>(r)][i * n + q];
        for (int q = 0; q < n; ++q) {
            mean_f[i][static_cast<size_t>(q)] /= replicas;
            dev[q] = mean_f[i][static_cast<size_t>(q)] - ref.mean[q];
        }
        res.curve[i] = norm_gamma(dev, op, gamma - alpha);
    }

    // centered 5-point moving average, window clipped at the ends
    res.smooth.resize(P);
    for (size_t i = 0; i < P; ++i) {
        const size_t lo = i >= 2 ? i - 2 : 0;
        const size_t hi = std::min(P - 1, i + 2);
        double s = 0.0;
        for (size_t j = lo; j <= hi; ++j) s += res.curve[j];
        res.smooth[i] = s / static_cast<double>(hi - lo + 1);
    }
    res.nonincreasing = true;
    for (size_t i = 0; i + 1 < P; ++i)
        if (res.smooth[i + 1] > res.smooth[i] + 1e-12 * res.smooth[0])
            res.nonincreasing = false;

    // least-squares exponential fit on the positive part of the curve
    {
        double sx = 0, sy = 0, sxx = 0, sxy = 0;
        int cnt = 0;
        for (size_t i = 0; i < P; ++i) {
            if (!(res.curve[i] > 0.0)) continue;
            const double lx = t_grid[i], ly = std::log(res.curve[i]);
            sx += lx; sy += ly; sxx += lx * lx; sxy += lx * ly;
            ++cnt;
        }
        if (cnt >= 2) {
            const double slope = (cnt * sxy - sx * sy) / (cnt * sxx - sx * sx);
            res.fitted_rate = -slope;
            res.fit_ok = res.fitted_rate > 0.0;
        }
    }

    // first-mode two-time correlation and its Cauchy-Schwarz sanity check
    res.phi.assign(P * P, 0.0);
    for (size_t i = 0; i < P; ++i)
        for (size_t j = 0; j < P; ++j) {
            double s = 0.0;
            for (int r = 0; r < replicas; ++r) {
                const double a = samples[static_cast<size_t>(r)][i * n + 0] - ref.mean[0];
                const double b = samples[static_cast<size_t>(r)][j * n + 0] - ref.mean[0];
                s += a * b;
            }
            res.phi[i * P + j] = s / replicas;
        }
    res.cs_violations = 0;
    for (size_t i = 0; i < P; ++i)
        for (size_t j = 0; j < P; ++j) {
            const double bound =
                std::sqrt(res.phi[i * P + i] * res.phi[j * P + j]) + 1e-12;
            if (std::fabs(res.phi[i * P + j]) > bound) ++res.cs_violations;
        }
    return res;
}

std::vector<ScaleVector> solve_averaged(
    const SpectralOperator& op, const ModelSpec& m,
    const std::function<ScaleVector(const ScaleVector&)>& fbar, const SolverConfig& c,
    const GridRoughPath& B, const ScaleVector& x0) {
    SolverConfig cfg = c;
    validate_solver_config(cfg);
    check_model(op, m);
    if (!fbar) throw config_error("averaged solve needs an averaged drift");
    if (B.dim != m.d1 || B.n_steps() != cfg.macro_steps)
        throw dimension_error("driver does not match the configuration");

    ModelSpec avg = m;
    avg.F1 = [&fbar](const ScaleVector& xx, const ScaleVector&) { return fbar(xx); };
    const ScaleVector dummy_y(m.n_modes);
    const double h = cfg.T / cfg.macro_steps;
    std::vector<ScaleVector> path;
    path.reserve(static_cast<size_t>(cfg.macro_steps) + 1);
    path.push_back(x0);
    std::vector<double> dB(static_cast<size_t>(m.d1));
    for (int k = 0; k < cfg.macro_steps; ++k) {
        increment(B, k, k + 1, dB.data());
        const double* areaB = &B.step_areas[static_cast<size_t>(k) * m.d1 * m.d1];
        ScaleVector xn = step_slow(op, avg, path.back(), dummy_y, dB.data(), areaB, h);
        for (int q = 0; q < xn.size(); ++q)
            if (!std::isfinite(xn[q]))
                throw instability_error("averaged state became non-finite at step " +
                                        std::to_string(k + 1));
        path.push_back(std::move(xn));
    }
    return path;
}

namespace {

// E[tanh(Y)] under the stationary density of the scalar diffusion
//   dY = (-lambda Y + s + lf sin Y) dt + (c + lg sin Y) dW,
// density ~ exp( int_0^y 2 b/sigma^2 ) / sigma^2 on a wide fixed window.
double stationary_tanh_mean(double lambda, double s, double lf, double c, double lg) {
    const double L = 6.0;
    const int N = 4000; // trapezoid panels over [-L, L]
    const double h = 2.0 * L / N;
    std::vector<double> logw(static_cast<size_t>(N) + 1);
    // cumulative inner integral from 0 outward, trapezoid
    auto ratio = [&](double y) {
        const double sig = c + lg * std::sin(y);
        return 2.0 * (-lambda * y + s + lf * std::sin(y)) / (sig * sig);
    };
    const int mid = N / 2;
    logw[static_cast<size_t>(mid)] = 0.0;
    for (int i = mid + 1; i <= N; ++i) {
        const double y0 = -L + h * (i - 1), y1 = -L + h * i;
        logw[static_cast<size_t>(i)] =
            logw[static_cast<size_t>(i - 1)] + 0.5 * h * (ratio(y0) + ratio(y1));
    }
    for (int i = mid - 1; i >= 0; --i) {
        const double y0 = -L + h * i, y1 = -L + h * (i + 1);
        logw[static_cast<size_t>(i)] =
            logw[static_cast<size_t>(i + 1)] - 0.5 * h * (ratio(y0) + ratio(y1));
    }
    double peak = logw[0];
    for (double v : logw) peak = std::max(peak, v);
    double z = 0.0, acc = 0.0;
    for (int i = 0; i <= N; ++i) {
        const double y = -L + h * i;
        const double sig = c + lg * std::sin(y);
        double w = std::exp(logw[static_cast<size_t>(i)] - peak) / (sig * sig);
        if (i == 0 || i == N) w *= 0.5;
        z += w;
        acc += w * std::tanh(y);
    }
    return acc / z;
}

// local 4-point Lagrange interpolation on a uniform table
struct UniformTable {
    double lo = 0.0, hi = 0.0;
    std::vector<double> v;

    double eval(double s) const {
        const int N = static_cast<int>(v.size()) - 1;
        if (N == 0) return v[0];
        const double h = (hi - lo) / N;
        double u = (s - lo) / h;
        int i = static_cast<int>(std::floor(u)) - 1; // left node of the 4-point stencil
        i = std::max(0, std::min(N - 3, i));
        const double t = u - i;
        const double c0 = -(t - 1) * (t - 2) * (t - 3) / 6.0;
        const double c1 = t * (t - 2) * (t - 3) / 2.0;
        const double c2 = -t * (t - 1) * (t - 3) / 2.0;
        const double c3 = t * (t - 1) * (t - 2) / 6.0;
        return c0 * v[static_cast<size_t>(i)] + c1 * v[static_cast<size_t>(i) + 1] +
               c2 * v[static_cast<size_t>(i) + 2] + c3 * v[static_cast<size_t>(i) + 3];
    }
};

} // namespace

std::function<ScaleVector(const ScaleVector&)> make_default_fbar(
    const SpectralOperator& op, const DefaultModelParams& p) {
    const int n = p.n_modes;
    if (n != op.n_modes()) throw config_error("model n_modes does not match the operator");
    std::vector<double> a(static_cast<size_t>(n)), b(static_cast<size_t>(n));
    for (int q = 0; q < n; ++q) {
        const double inv = 1.0 / (static_cast<double>(q + 1) * static_cast<double>(q + 1));
        a[static_cast<size_t>(q)] = p.a_scale * inv;
        b[static_cast<size_t>(q)] = p.y_independent_f1 ? 0.0 : p.b_scale * inv;
    }
    // Per mode, tabulate E[tanh(Y)] as a function of the drift shift
    // s = a_n tanh(x_n) in [-a_n, a_n].
    std::vector<UniformTable> tables(static_cast<size_t>(n));
    const int nodes = 64;
    for (int q = 0; q < n; ++q) {
        if (b[static_cast<size_t>(q)] == 0.0) continue; // unused
        UniformTable& tb = tables[static_cast<size_t>(q)];
        const double span = std::fabs(a[static_cast<size_t>(q)]) + 1e-3;
        tb.lo = -span;
        tb.hi = span;
        tb.v.resize(static_cast<size_t>(nodes) + 1);
        for (int i = 0; i <= nodes; ++i) {
            const double s = tb.lo + (tb.hi - tb.lo) * i / nodes;
            tb.v[static_cast<size_t>(i)] = stationary_tanh_mean(
                op.eigenvalues[static_cast<size_t>(q)], s, p.L_F2, p.c_level, p.L_G2);
        }
    }
    return [a, b, tables, n](const ScaleVector& x) {
        ScaleVector r(n);
        for (int q = 0; q < n; ++q) {
            const double s = a[static_cast<size_t>(q)] * std::tanh(x[q]);
            r[q] = s;
            if (b[static_cast<size_t>(q)] != 0.0)
                r[q] += b[static_cast<size_t>(q)] * tables[static_cast<size_t>(q)].eval(s);
        }
        return r;
    };
}

std::vector<SweepRow> averaging_error_sweep(
    const SpectralOperator& op, const ModelSpec& m, const SolverConfig& base,
    const std::vector<double>& eps_list, int replicas,
    const std::function<ScaleVector(const ScaleVector&)>& fbar, const ScaleVector& x0,
    const ScaleVector& y0, int threads) {
    if (replicas < 30)
        throw config_error("averaging sweep refuses replicas < 30 (confidence interval too wide), got " +
                           std::to_string(replicas));
    if (eps_list.empty()) throw config_error("averaging sweep needs at least one epsilon");
    if (!fbar) throw config_error("averaging sweep needs an averaged drift");

    std::vector<SweepRow> rows;
    rows.reserve(eps_list.size());
    for (double eps : eps_list) {
        SolverConfig cfg = base;
        cfg.epsilon = eps;
        cfg.delta = 0.0;          // re-derive for this epsilon
        cfg.micro_substeps = 0;   // re-derive the micro mesh
        validate_solver_config(cfg);

        std::vector<double> sq(static_cast<size_t>(replicas), 0.0);
        parallel_replicas(replicas, threads, [&](int r) {
            SolverConfig rc = cfg;
            rc.replica_id = static_cast<std::uint64_t>(r);
            const CoupledDrivers drv = sample_coupled_drivers(rc, m.d1, m.d2);
            const CoupledSolution sol = solve_coupled(op, m, rc, drv, x0, y0);
            const std::vector<ScaleVector> avg =
                solve_averaged(op, m, fbar, rc, drv.B, x0);
            double worst = 0.0;
            for (size_t k = 0; k < sol.slow.size(); ++k)
                worst = std::max(worst,
                                 norm_gamma(sub(sol.slow[k], avg[k]), op, rc.gamma));
            sq[static_cast<size_t>(r)] = worst * worst;
        });

        SweepRow row;
        row.epsilon = eps;
        row.delta = derived_delta(eps, cfg.alpha);
        row.replicas = replicas;
        row.seed = cfg.master_seed;
        double mean = 0.0;
        for (double v : sq) mean += v;
        mean /= replicas;
        double var = 0.0;
        for (double v : sq) var += (v - mean) * (v - mean);
        var = replicas > 1 ? var / (replicas - 1) : 0.0;
        row.mean_sq_sup_error = mean;
        row.stderr_error = std::sqrt(var / replicas);
        rows.push_back(row);
    }
    return rows;
}

} // namespace roughmill
