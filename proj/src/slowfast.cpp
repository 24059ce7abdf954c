#include "roughmill/slowfast.hpp"

#include <cmath>
#include <cstdio>
#include <string>

#include "roughmill/worker_pool.hpp"

namespace roughmill {

double h5_margin(const SpectralOperator& op, const ModelSpec& m) {
    return op.eigenvalues[0] - m.L_F2 - 3.0 * m.L_G2 * m.L_G2;
}

double mixing_rate(const SpectralOperator& op, const ModelSpec& m) {
    return op.eigenvalues[0] - m.L_F2 - m.L_G2 * m.L_G2;
}

static std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%g", v);
    return buf;
}

void check_model(const SpectralOperator& op, const ModelSpec& m) {
    if (m.n_modes != op.n_modes())
        throw config_error("model n_modes does not match the operator");
    if (m.d1 < 1 || m.d2 < 1) throw config_error("driver dimensions must be >= 1");
    if (m.L_F2 < 0.0 || m.L_G2 < 0.0)
        throw config_error("Lipschitz constants must be nonnegative");
    const double margin = h5_margin(op, m);
    if (!(margin > 0.0))
        throw config_error("H5 margin nonpositive: lambda_1 - L_F2 - 3*L_G2^2 = " +
                           fmt(margin));
    if (!m.F1 || !m.F2 || !m.G1 || !m.DG1G1 || !m.G2)
        throw config_error("model coefficient functions are incomplete");
}

ModelSpec make_default_model(const SpectralOperator& op, const DefaultModelParams& p) {
    if (p.n_modes != op.n_modes())
        throw config_error("model n_modes does not match the operator");
    const int n = p.n_modes;
    std::vector<double> a(static_cast<size_t>(n)), b(static_cast<size_t>(n)),
        g(static_cast<size_t>(n));
    for (int q = 0; q < n; ++q) {
        const double inv = 1.0 / (static_cast<double>(q + 1) * static_cast<double>(q + 1));
        a[static_cast<size_t>(q)] = p.a_scale * inv;
        b[static_cast<size_t>(q)] = p.y_independent_f1 ? 0.0 : p.b_scale * inv;
        g[static_cast<size_t>(q)] = p.g_scale * inv;
    }
    const double g1_col = 1.0 / std::sqrt(static_cast<double>(p.d1));
    const double g2_col = 1.0 / std::sqrt(static_cast<double>(p.d2));

    ModelSpec m;
    m.n_modes = n;
    m.d1 = p.d1;
    m.d2 = p.d2;
    m.L_F2 = p.L_F2;
    m.L_G2 = p.L_G2;
    {
        double s = 0.0;
        for (int q = 0; q < n; ++q) {
            const double e = std::fabs(a[static_cast<size_t>(q)]) +
                             std::fabs(b[static_cast<size_t>(q)]);
            s += e * e;
        }
        m.F1_bound = std::sqrt(s);
    }

    m.F1 = [a, b, n](const ScaleVector& x, const ScaleVector& y) {
        ScaleVector r(n);
        for (int q = 0; q < n; ++q)
            r[q] = a[static_cast<size_t>(q)] * std::tanh(x[q]) +
                   b[static_cast<size_t>(q)] * std::tanh(y[q]);
        return r;
    };
    const double lf2 = p.L_F2;
    m.F2 = [a, lf2, n](const ScaleVector& x, const ScaleVector& y) {
        ScaleVector r(n);
        for (int q = 0; q < n; ++q)
            r[q] = a[static_cast<size_t>(q)] * std::tanh(x[q]) + lf2 * std::sin(y[q]);
        return r;
    };
    const int d1 = p.d1;
    m.G1 = [g, g1_col, d1, n](const ScaleVector& x) {
        std::vector<ScaleVector> cols(static_cast<size_t>(d1), ScaleVector(n));
        for (int c = 0; c < d1; ++c)
            for (int q = 0; q < n; ++q)
                cols[static_cast<size_t>(c)][q] =
                    g1_col * g[static_cast<size_t>(q)] * std::tanh(x[q]);
        return cols;
    };
    // column j differentiated in the direction of column i; entries
    // g_n^2 sech^2(x_n) tanh(x_n) / d1 for the tanh family.
    m.DG1G1 = [g, g1_col, d1, n](const ScaleVector& x) {
        std::vector<ScaleVector> cols(static_cast<size_t>(d1) * d1, ScaleVector(n));
        for (int i = 0; i < d1; ++i)
            for (int j = 0; j < d1; ++j)
                for (int q = 0; q < n; ++q) {
                    const double sech = 1.0 / std::cosh(x[q]);
                    cols[static_cast<size_t>(i) * d1 + j][q] =
                        g1_col * g[static_cast<size_t>(q)] * sech * sech *
                        g1_col * g[static_cast<size_t>(q)] * std::tanh(x[q]);
                }
        return cols;
    };
    const int d2 = p.d2;
    const double cl = p.c_level;
    const double lg2 = p.L_G2;
    m.G2 = [cl, lg2, g2_col, d2, n](const ScaleVector&, const ScaleVector& y) {
        std::vector<ScaleVector> cols(static_cast<size_t>(d2), ScaleVector(n));
        for (int c = 0; c < d2; ++c)
            for (int q = 0; q < n; ++q)
                cols[static_cast<size_t>(c)][q] = g2_col * (cl + lg2 * std::sin(y[q]));
        return cols;
    };
    return m;
}

double probe_f1_bound(const SpectralOperator& op, const ModelSpec& m, double gamma,
                      double alpha, int n_probes, std::uint64_t seed) {
    GaussianSampler g(seed, 0, Stream::probe);
    double worst = 0.0;
    for (int p = 0; p < n_probes; ++p) {
        ScaleVector x(m.n_modes), y(m.n_modes);
        for (int q = 0; q < m.n_modes; ++q) {
            x[q] = 3.0 * g();
            y[q] = 3.0 * g();
        }
        worst = std::max(worst, norm_gamma(m.F1(x, y), op, gamma - alpha));
    }
    return worst;
}

double derived_delta(double epsilon, double alpha) {
    return std::pow(epsilon, 1.0 / (2.0 * (1.0 + 2.0 * alpha)));
}

void validate_solver_config(SolverConfig& c) {
    if (!(c.alpha > 1.0 / 3.0 && c.alpha < c.alpha0 && c.alpha0 <= 0.5))
        throw config_error("regularity window violated: need 1/3 < alpha < alpha0 <= 1/2, got alpha = " +
                           fmt(c.alpha) + ", alpha0 = " + fmt(c.alpha0));
    if (!(c.sigma >= 0.0 && c.sigma < c.alpha / 2.0))
        throw config_error("smoothing exponent out of range: need 0 <= sigma < alpha/2 = " +
                           fmt(c.alpha / 2.0) + ", got sigma = " + fmt(c.sigma));
    if (!(c.theta == 0.0 || std::abs(c.theta - c.alpha) < 1e-12 ||
          std::abs(c.theta - 2.0 * c.alpha) < 1e-12))
        throw config_error("theta must be one of 0, alpha, 2*alpha, got theta = " + fmt(c.theta));
    if (!(c.zeta > c.alpha / 2.0 && c.zeta < c.alpha - c.sigma))
        throw config_error("zeta outside (alpha/2, alpha - sigma) = (" + fmt(c.alpha / 2.0) +
                           ", " + fmt(c.alpha - c.sigma) + "), got zeta = " + fmt(c.zeta));
    if (!(c.epsilon > 0.0)) throw config_error("epsilon must be positive");
    if (!(c.T > 0.0)) throw config_error("T must be positive");
    if (c.macro_steps < 1) throw config_error("macro_steps must be >= 1");
    if (c.area_substeps < 1) throw config_error("area_substeps must be >= 1");
    if (c.delta == 0.0) c.delta = derived_delta(c.epsilon, c.alpha);
    if (!(c.delta > 0.0)) throw config_error("delta must be positive");
    const double h_macro = c.T / c.macro_steps;
    if (c.micro_substeps == 0)
        c.micro_substeps = static_cast<int>(std::ceil(h_macro / (c.epsilon / 40.0)));
    if (c.micro_substeps < 1) throw config_error("micro_substeps must be >= 1");
    const double h_micro = h_macro / c.micro_substeps;
    if (h_micro > c.epsilon / 20.0)
        throw config_error("timescale separation violated: micro step " + fmt(h_micro) +
                           " exceeds epsilon/20 = " + fmt(c.epsilon / 20.0));
}

static void check_finite(const ScaleVector& v, const char* what, int step) {
    for (int q = 0; q < v.size(); ++q)
        if (!std::isfinite(v[q]))
            throw instability_error(std::string(what) + " became non-finite at step " +
                                    std::to_string(step));
}

ScaleVector step_slow(const SpectralOperator& op, const ModelSpec& m,
                      const ScaleVector& x, const ScaleVector& y, const double* dB,
                      const double* areaB, double h) {
    if (!(h > 0.0)) throw std::domain_error("slow step size must be positive");
    const int n = op.n_modes();
    // rough increment G1(x) dB + DG1G1(x) : areaB, pushed through S_h
    ScaleVector rough(n);
    const std::vector<ScaleVector> g1 = m.G1(x);
    for (int i = 0; i < m.d1; ++i) axpy_in(rough, dB[i], g1[static_cast<size_t>(i)]);
    const std::vector<ScaleVector> dgg = m.DG1G1(x);
    for (int i = 0; i < m.d1; ++i)
        for (int j = 0; j < m.d1; ++j)
            axpy_in(rough, areaB[i * m.d1 + j], dgg[static_cast<size_t>(i) * m.d1 + j]);

    const std::vector<double> sg = semigroup_factors(op, h);
    const ScaleVector w = drift_weight(op, h);
    const ScaleVector f1 = m.F1(x, y);
    ScaleVector out(n);
    for (int q = 0; q < n; ++q)
        out[q] = sg[static_cast<size_t>(q)] * (x[q] + rough[q]) + w[q] * f1[q];
    return out;
}

ScaleVector step_fast(const SpectralOperator& op, const ModelSpec& m,
                      const ScaleVector& x, const ScaleVector& y, const double* dW,
                      double h, double eps) {
    if (!(h > 0.0) || !(eps > 0.0))
        throw std::domain_error("fast step needs h > 0 and eps > 0");
    if (h > eps / 20.0)
        throw timescale_error("fast step " + fmt(h) + " exceeds epsilon/20 = " +
                              fmt(eps / 20.0));
    const int n = op.n_modes();
    ScaleVector noise(n);
    const std::vector<ScaleVector> g2 = m.G2(x, y);
    for (int i = 0; i < m.d2; ++i) axpy_in(noise, dW[i], g2[static_cast<size_t>(i)]);

    const double hr = h / eps; // rescaled step
    const std::vector<double> sg = semigroup_factors(op, hr);
    const ScaleVector w = drift_weight(op, hr);
    const ScaleVector f2 = m.F2(x, y);
    const double amp = 1.0 / std::sqrt(eps);
    ScaleVector out(n);
    for (int q = 0; q < n; ++q)
        out[q] = sg[static_cast<size_t>(q)] * (y[q] + amp * noise[q]) + w[q] * f2[q];
    return out;
}

CoupledDrivers sample_coupled_drivers(const SolverConfig& c, int d1, int d2) {
    SolverConfig cfg = c;
    validate_solver_config(cfg);
    CoupledDrivers drv;
    const std::vector<double> macro = uniform_grid(cfg.T, cfg.macro_steps);

    GaussianSampler gb(cfg.master_seed, cfg.replica_id, Stream::slow_driver);
    drv.B = sample_ito_brownian_lift(gb, macro, d1, cfg.area_substeps, &drv.recB);

    const int micro_total = cfg.macro_steps * cfg.micro_substeps;
    drv.micro_times = uniform_grid(cfg.T, micro_total);
    const double h_micro = cfg.T / micro_total;
    GaussianSampler gw(cfg.master_seed, cfg.replica_id, Stream::fast_driver);
    drv.dW.assign(static_cast<size_t>(micro_total) * d2, 0.0);
    const double sd = std::sqrt(h_micro);
    for (size_t k = 0; k < drv.dW.size(); ++k) drv.dW[k] = sd * gw();
    return drv;
}

CoupledSolution solve_coupled(const SpectralOperator& op, const ModelSpec& m,
                              const SolverConfig& c, const CoupledDrivers& drv,
                              const ScaleVector& x0, const ScaleVector& y0) {
    SolverConfig cfg = c;
    validate_solver_config(cfg);
    check_model(op, m);
    if (drv.B.dim != m.d1 || drv.B.n_steps() != cfg.macro_steps)
        throw dimension_error("slow driver does not match the configuration");
    const int micro_total = cfg.macro_steps * cfg.micro_substeps;
    if (static_cast<int>(drv.dW.size()) != micro_total * m.d2)
        throw dimension_error("fast increments do not match the configuration");

    const double h_macro = cfg.T / cfg.macro_steps;
    const double h_micro = h_macro / cfg.micro_substeps;
    const int d1 = m.d1;

    CoupledSolution sol;
    sol.macro_times = drv.B.times;
    sol.slow.reserve(static_cast<size_t>(cfg.macro_steps) + 1);
    sol.fast.reserve(static_cast<size_t>(micro_total) + 1);
    sol.slow.push_back(x0);
    sol.fast.push_back(y0);

    std::vector<double> dB(static_cast<size_t>(d1));
    for (int k = 0; k < cfg.macro_steps; ++k) {
        const ScaleVector& xk = sol.slow.back();
        const ScaleVector& yk = sol.fast[static_cast<size_t>(k) * cfg.micro_substeps];
        increment(drv.B, k, k + 1, dB.data());
        const double* areaB = &drv.B.step_areas[static_cast<size_t>(k) * d1 * d1];
        ScaleVector xn = step_slow(op, m, xk, yk, dB.data(), areaB, h_macro);
        check_finite(xn, "slow state", k + 1);

        for (int j = 0; j < cfg.micro_substeps; ++j) {
            const int g = k * cfg.micro_substeps + j;
            const ScaleVector& yg = sol.fast.back();
            ScaleVector yn = step_fast(op, m, xk, yg,
                                       &drv.dW[static_cast<size_t>(g) * m.d2], h_micro,
                                       cfg.epsilon);
            check_finite(yn, "fast state", g + 1);
            sol.fast.push_back(std::move(yn));
        }
        sol.slow.push_back(std::move(xn));
    }
    return sol;
}

// Macro-node index of t(delta) for macro step k when delta spans q macro steps.
static int frozen_index(int k, int q) { return (k / q) * q; }

static int delta_macro_span(double delta, double T, int macro_steps, const char* what) {
    const double h_macro = T / macro_steps;
    const double ratio = delta / h_macro;
    const int q = static_cast<int>(std::llround(ratio));
    if (q < 1 || std::fabs(ratio - q) > 1e-9 * std::max(1.0, ratio))
        throw alignment_error(std::string(what) + ": delta = " + fmt(delta) +
                              " is not a multiple of the macro step " + fmt(h_macro));
    return q;
}

std::vector<ScaleVector> solve_auxiliary(const SpectralOperator& op, const ModelSpec& m,
                                         const SolverConfig& c, const CoupledDrivers& drv,
                                         const std::vector<ScaleVector>& slow,
                                         const ScaleVector& y0, double delta) {
    SolverConfig cfg = c;
    validate_solver_config(cfg);
    check_model(op, m);
    if (static_cast<int>(slow.size()) != cfg.macro_steps + 1)
        throw dimension_error("slow trajectory does not match the configuration");
    const int q = delta_macro_span(delta, cfg.T, cfg.macro_steps, "auxiliary process");

    const int micro_total = cfg.macro_steps * cfg.micro_substeps;
    if (static_cast<int>(drv.dW.size()) != micro_total * m.d2)
        throw dimension_error("fast increments do not match the configuration");
    const double h_micro = cfg.T / micro_total;

    std::vector<ScaleVector> aux;
    aux.reserve(static_cast<size_t>(micro_total) + 1);
    aux.push_back(y0);
    for (int k = 0; k < cfg.macro_steps; ++k) {
        const ScaleVector& x_frozen = slow[static_cast<size_t>(frozen_index(k, q))];
        for (int j = 0; j < cfg.micro_substeps; ++j) {
            const int g = k * cfg.micro_substeps + j;
            ScaleVector yn = step_fast(op, m, x_frozen, aux.back(),
                                       &drv.dW[static_cast<size_t>(g) * m.d2], h_micro,
                                       cfg.epsilon);
            check_finite(yn, "auxiliary state", g + 1);
            aux.push_back(std::move(yn));
        }
    }
    return aux;
}

std::vector<IncrementRow> increment_experiment(const SpectralOperator& op,
                                               const ModelSpec& m, const SolverConfig& c,
                                               const std::vector<double>& deltas,
                                               int replicas, const ScaleVector& x0,
                                               const ScaleVector& y0, int threads) {
    SolverConfig cfg = c;
    validate_solver_config(cfg);
    if (replicas < 1) throw config_error("increment experiment needs replicas >= 1");
    std::vector<int> spans;
    spans.reserve(deltas.size());
    for (double d : deltas)
        spans.push_back(delta_macro_span(d, cfg.T, cfg.macro_steps, "increment experiment"));

    // per replica, per delta: sup_t |X_t - X_{t(delta)}|_gamma^4
    std::vector<std::vector<double>> sup4(deltas.size(),
                                          std::vector<double>(static_cast<size_t>(replicas)));
    parallel_replicas(replicas, threads, [&](int r) {
        SolverConfig rc = cfg;
        rc.replica_id = static_cast<std::uint64_t>(r);
        const CoupledDrivers drv = sample_coupled_drivers(rc, m.d1, m.d2);
        const CoupledSolution sol = solve_coupled(op, m, rc, drv, x0, y0);
        for (size_t di = 0; di < deltas.size(); ++di) {
            const int q = spans[di];
            double worst = 0.0;
            for (int k = 0; k <= cfg.macro_steps; ++k) {
                const int base = (k / q) * q;
                const double dist = norm_gamma(
                    sub(sol.slow[static_cast<size_t>(k)], sol.slow[static_cast<size_t>(base)]),
                    op, cfg.gamma);
                worst = std::max(worst, dist);
            }
            sup4[di][static_cast<size_t>(r)] = worst * worst * worst * worst;
        }
    });

    std::vector<IncrementRow> rows(deltas.size());
    for (size_t di = 0; di < deltas.size(); ++di) {
        double mean = 0.0;
        for (double v : sup4[di]) mean += v;
        mean /= replicas;
        double var = 0.0;
        for (double v : sup4[di]) var += (v - mean) * (v - mean);
        var = replicas > 1 ? var / (replicas - 1) : 0.0;
        rows[di] = {deltas[di], mean, std::sqrt(var / replicas)};
    }
    return rows;
}

ScaleVector default_initial(int n_modes) {
    ScaleVector x(n_modes);
    for (int q = 0; q < n_modes; ++q)
        x[q] = 1.0 / (static_cast<double>(q + 1) * static_cast<double>(q + 1));
    return x;
}

} // namespace roughmill
