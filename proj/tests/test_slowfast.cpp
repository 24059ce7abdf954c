#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "roughmill/errors.hpp"
#include "roughmill/hilbert_scale.hpp"
#include "roughmill/rough_convolution.hpp"
#include "roughmill/rough_path.hpp"
#include "roughmill/slowfast.hpp"
#include "roughmill/stochastic_drivers.hpp"

using namespace roughmill;

namespace {

ModelSpec zero_model(int n, int d1, int d2) {
    ModelSpec m;
    m.n_modes = n;
    m.d1 = d1;
    m.d2 = d2;
    m.L_F2 = 0.0;
    m.L_G2 = 0.0;
    m.F1 = [n](const ScaleVector&, const ScaleVector&) { return ScaleVector(n); };
    m.F2 = m.F1;
    m.G1 = [n, d1](const ScaleVector&) {
        return std::vector<ScaleVector>(static_cast<size_t>(d1), ScaleVector(n));
    };
    m.DG1G1 = [n, d1](const ScaleVector&) {
        return std::vector<ScaleVector>(static_cast<size_t>(d1) * d1, ScaleVector(n));
    };
    m.G2 = [n, d2](const ScaleVector&, const ScaleVector&) {
        return std::vector<ScaleVector>(static_cast<size_t>(d2), ScaleVector(n));
    };
    return m;
}

SolverConfig base_config() {
    SolverConfig c;
    c.alpha = 0.45;
    c.alpha0 = 0.5;
    c.sigma = 0.2;
    c.zeta = 0.24;
    c.epsilon = 0.01;
    c.T = 0.5;
    c.macro_steps = 50;
    return c;
}

} // namespace

TEST_CASE("hypothesis margins of the default coefficient family") {
    const SpectralOperator op = dirichlet_laplacian(8);
    const ModelSpec m = make_default_model(op, DefaultModelParams{});
    CHECK(h5_margin(op, m) == 0.5625);
    CHECK(mixing_rate(op, m) == 0.6875);
    CHECK_NOTHROW(check_model(op, m));
}

TEST_CASE("model checks name the violated constraint") {
    const SpectralOperator op = dirichlet_laplacian(4);
    ModelSpec m = zero_model(4, 1, 1);
    m.L_F2 = 0.6;
    m.L_G2 = 0.4; // margin 1 - 0.6 - 0.48 < 0
    try {
        check_model(op, m);
        FAIL("expected a config_error");
    } catch (const config_error& e) {
        CHECK(std::string(e.what()).find("H5 margin nonpositive") != std::string::npos);
    }
    ModelSpec hollow = zero_model(4, 1, 1);
    hollow.F2 = nullptr;
    CHECK_THROWS_AS(check_model(op, hollow), config_error);
    ModelSpec off = zero_model(3, 1, 1);
    CHECK_THROWS_AS(check_model(op, off), config_error);
}

TEST_CASE("solver configuration windows are enforced") {
    SolverConfig ok = base_config();
    CHECK_NOTHROW(validate_solver_config(ok));
    CHECK(ok.micro_substeps >= 1);
    CHECK(ok.T / ok.macro_steps / ok.micro_substeps <= ok.epsilon / 20.0);

    SolverConfig c = base_config();
    c.alpha = 0.3;
    CHECK_THROWS_AS(validate_solver_config(c), config_error);
    c = base_config();
    c.alpha0 = 0.6;
    CHECK_THROWS_AS(validate_solver_config(c), config_error);
    c = base_config();
    c.sigma = 0.3; // needs sigma < alpha/2
    CHECK_THROWS_AS(validate_solver_config(c), config_error);
    c = base_config();
    c.theta = 0.1;
    CHECK_THROWS_AS(validate_solver_config(c), config_error);
    c = base_config();
    c.theta = 2.0 * c.alpha;
    CHECK_NOTHROW(validate_solver_config(c));
    c = base_config();
    c.zeta = 0.5; // outside (alpha/2, alpha - sigma)
    CHECK_THROWS_AS(validate_solver_config(c), config_error);
    c = base_config();
    c.epsilon = 0.0;
    CHECK_THROWS_AS(validate_solver_config(c), config_error);
    c = base_config();
    c.macro_steps = 0;
    CHECK_THROWS_AS(validate_solver_config(c), config_error);
    c = base_config();
    c.micro_substeps = 1; // leaves the micro step at 0.01 > epsilon/20
    CHECK_THROWS_AS(validate_solver_config(c), config_error);
}

TEST_CASE("the block length is derived from the timescale when left unset") {
    CHECK(derived_delta(0.001, 0.4) == doctest::Approx(0.14678026).epsilon(1e-6));
    SolverConfig c = base_config();
    c.alpha = 0.4;
    c.sigma = 0.15;
    c.zeta = 0.21;
    c.epsilon = 0.001;
    c.macro_steps = 12000; // keeps the micro mesh feasible
    validate_solver_config(c);
    CHECK(c.delta == doctest::Approx(derived_delta(0.001, 0.4)).epsilon(1e-12));
}

TEST_CASE("a coefficient-free slow step is the pure semigroup map") {
    const SpectralOperator op = dirichlet_laplacian(3);
    const ModelSpec m = zero_model(3, 2, 1);
    const ScaleVector x(std::vector<double>{1.0, -2.0, 0.5});
    const double dB[2] = {0.7, -0.3};
    const double areaB[4] = {0.1, 0.2, 0.3, 0.4};
    const ScaleVector out = step_slow(op, m, x, x, dB, areaB, 0.25);
    const ScaleVector want = semigroup_apply(op, 0.25, x);
    for (int q = 0; q < 3; ++q) CHECK(out[q] == doctest::Approx(want[q]).epsilon(1e-15));
    CHECK_THROWS_AS(step_slow(op, m, x, x, dB, areaB, 0.0), std::domain_error);
}

TEST_CASE("constant diffusion columns enter through the semigroup exactly") {
    const SpectralOperator op = dirichlet_laplacian(2);
    ModelSpec m = zero_model(2, 2, 1);
    const ScaleVector c0(std::vector<double>{1.0, 2.0});
    const ScaleVector c1(std::vector<double>{-0.5, 0.25});
    m.G1 = [&](const ScaleVector&) { return std::vector<ScaleVector>{c0, c1}; };
    const ScaleVector x(std::vector<double>{0.3, 0.6});
    const double dB[2] = {0.5, -1.0};
    const double areaB[4] = {0.0, 0.0, 0.0, 0.0};
    const ScaleVector out = step_slow(op, m, x, x, dB, areaB, 0.1);
    ScaleVector shifted = x;
    axpy_in(shifted, dB[0], c0);
    axpy_in(shifted, dB[1], c1);
    const ScaleVector want = semigroup_apply(op, 0.1, shifted);
    for (int q = 0; q < 2; ++q) CHECK(out[q] == doctest::Approx(want[q]).epsilon(1e-14));
}

TEST_CASE("slow stepping on a smooth driver converges at first order or better") {
    const SpectralOperator op = dirichlet_laplacian(4);
    DefaultModelParams mp;
    mp.n_modes = 4;
    const ModelSpec m = make_default_model(op, mp);
    auto f = [](double t) { return std::vector<double>{0.3 * std::sin(2.0 * t)}; };
    auto fp = [](double t) { return std::vector<double>{0.6 * std::cos(2.0 * t)}; };
    const int fine = 4096;
    const GridRoughPath F = canonical_smooth_lift(f, uniform_grid(1.0, fine), 1, 4, fp);

    auto solve_at = [&](int steps) {
        const int stride = fine / steps;
        const double h = 1.0 / steps;
        ScaleVector x = default_initial(4);
        for (int k = 0; k < steps; ++k) {
            double dB;
            increment(F, k * stride, (k + 1) * stride, &dB);
            const std::vector<double> a = chen_extend(F, k * stride, (k + 1) * stride);
            x = step_slow(op, m, x, x, &dB, a.data(), h);
        }
        return x;
    };
    const ScaleVector ref = solve_at(4096);
    double prev = -1.0;
    for (int steps : {256, 512, 1024}) {
        const double err = norm_gamma(sub(solve_at(steps), ref), op, 0.0);
        if (prev > 0.0) CHECK(prev / err >= 1.7);
        prev = err;
    }
}

TEST_CASE("a coefficient-free fast step is the rescaled semigroup map") {
    const SpectralOperator op = dirichlet_laplacian(2);
    const ModelSpec m = zero_model(2, 1, 1);
    const ScaleVector y(std::vector<double>{1.0, -1.0});
    const double dW = 0.2;
    const ScaleVector out = step_fast(op, m, y, y, &dW, 0.001, 0.05);
    const ScaleVector want = semigroup_apply(op, 0.001 / 0.05, y);
    for (int q = 0; q < 2; ++q) CHECK(out[q] == doctest::Approx(want[q]).epsilon(1e-14));
    CHECK_THROWS_AS(step_fast(op, m, y, y, &dW, 0.01, 0.05), timescale_error);
    CHECK_THROWS_AS(step_fast(op, m, y, y, &dW, 0.0, 0.05), std::domain_error);
}

TEST_CASE("the fast process settles at its stationary mode variances") {
    // additive-noise linear fast dynamics: mode variance c^2 / (2 lambda)
    const SpectralOperator op({1.0, 4.0});
    ModelSpec m = zero_model(2, 1, 1);
    m.G2 = [](const ScaleVector&, const ScaleVector&) {
        return std::vector<ScaleVector>{ScaleVector(std::vector<double>{0.5, 0.5})};
    };
    const double eps = 0.01, h = eps / 400.0;
    const int burn = 80000, keep = 320000;
    double acc1 = 0.0, acc2 = 0.0;
    int count = 0;
    for (std::uint64_t rep = 0; rep < 2; ++rep) {
        GaussianSampler g(7, rep, Stream::fast_driver);
        ScaleVector y(2);
        const double sd = std::sqrt(h);
        for (int k = 0; k < burn + keep; ++k) {
            const double dW = sd * g();
            y = step_fast(op, m, y, y, &dW, h, eps);
            if (k >= burn) {
                acc1 += y[0] * y[0];
                acc2 += y[1] * y[1];
                ++count;
            }
        }
    }
    CHECK(acc1 / count == doctest::Approx(0.125).epsilon(0.06));
    CHECK(acc2 / count == doctest::Approx(0.03125).epsilon(0.06));
}

TEST_CASE("fast fourth moments stay comparable across timescales") {
    const SpectralOperator op = dirichlet_laplacian(4);
    DefaultModelParams mp;
    mp.n_modes = 4;
    const ModelSpec m = make_default_model(op, mp);
    const ScaleVector x = default_initial(4);
    auto fourth_moment = [&](double eps) {
        const double h = eps / 40.0;
        const int steps = static_cast<int>(std::lround(2.0 / h));
        double acc = 0.0;
        const int replicas = 60;
        for (int r = 0; r < replicas; ++r) {
            GaussianSampler g(88, static_cast<std::uint64_t>(r), Stream::fast_driver);
            ScaleVector y = default_initial(4);
            const double sd = std::sqrt(h);
            for (int k = 0; k < steps; ++k) {
                const double dW = sd * g();
                y = step_fast(op, m, x, y, &dW, h, eps);
            }
            const double n = norm_gamma(y, op, 0.0);
            acc += n * n * n * n;
        }
        return acc / replicas;
    };
    const double m_coarse = fourth_moment(0.05);
    const double m_fine = fourth_moment(0.01);
    CHECK(m_coarse / m_fine <= 3.0);
    CHECK(m_fine / m_coarse <= 3.0);
}

TEST_CASE("sampled coupled drivers have consistent shapes and replay exactly") {
    SolverConfig c = base_config();
    const CoupledDrivers d1 = sample_coupled_drivers(c, 2, 3);
    SolverConfig c2 = base_config();
    validate_solver_config(c2);
    CHECK(d1.B.dim == 2);
    CHECK(d1.B.n_steps() == c.macro_steps);
    CHECK(d1.recB.substeps == c.area_substeps);
    CHECK(static_cast<int>(d1.micro_times.size()) == c.macro_steps * c2.micro_substeps + 1);
    CHECK(d1.dW.size() == static_cast<size_t>(c.macro_steps) * c2.micro_substeps * 3);

    const CoupledDrivers d2 = sample_coupled_drivers(c, 2, 3);
    CHECK(d1.B.values == d2.B.values);
    CHECK(d1.B.step_areas == d2.B.step_areas);
    CHECK(d1.dW == d2.dW);

    SolverConfig other = c;
    other.replica_id = 9;
    const CoupledDrivers d3 = sample_coupled_drivers(other, 2, 3);
    CHECK(d1.B.values != d3.B.values);
    CHECK(d1.dW != d3.dW);
}

TEST_CASE("without feedback the slow path unrolls into a drift convolution") {
    const SpectralOperator op = dirichlet_laplacian(3);
    DefaultModelParams mp;
    mp.n_modes = 3;
    mp.y_independent_f1 = true; // F1 sees only x
    mp.g_scale = 0.0;           // no rough term
    const ModelSpec m = make_default_model(op, mp);
    SolverConfig c = base_config();
    const CoupledDrivers drv = sample_coupled_drivers(c, 1, 1);
    const ScaleVector x0 = default_initial(3);
    const CoupledSolution sol = solve_coupled(op, m, c, drv, x0, x0);

    // closed rolled-out form of the exponential-integrator recursion
    std::vector<ScaleVector> fvals;
    for (const ScaleVector& xk : sol.slow) fvals.push_back(m.F1(xk, xk));
    const ScaleVector tail = drift_convolve(op, fvals, sol.macro_times, c.macro_steps);
    ScaleVector want = semigroup_apply(op, c.T, x0);
    want = add(want, tail);
    const ScaleVector got = sol.slow.back();
    for (int q = 0; q < 3; ++q) CHECK(got[q] == doctest::Approx(want[q]).epsilon(1e-8));
}

TEST_CASE("solving twice with the same drivers is bit identical") {
    const SpectralOperator op = dirichlet_laplacian(4);
    DefaultModelParams mp;
    mp.n_modes = 4;
    const ModelSpec m = make_default_model(op, mp);
    SolverConfig c = base_config();
    const CoupledDrivers drv = sample_coupled_drivers(c, 1, 1);
    const ScaleVector x0 = default_initial(4);
    const CoupledSolution a = solve_coupled(op, m, c, drv, x0, x0);
    const CoupledSolution b = solve_coupled(op, m, c, drv, x0, x0);
    REQUIRE(a.slow.size() == b.slow.size());
    for (size_t k = 0; k < a.slow.size(); ++k)
        for (int q = 0; q < 4; ++q) CHECK(a.slow[k][q] == b.slow[k][q]);
    for (size_t k = 0; k < a.fast.size(); ++k)
        for (int q = 0; q < 4; ++q) CHECK(a.fast[k][q] == b.fast[k][q]);
}

TEST_CASE("a y-blind slow equation ignores swapped fast noise") {
    const SpectralOperator op = dirichlet_laplacian(4);
    DefaultModelParams mp;
    mp.n_modes = 4;
    mp.y_independent_f1 = true;
    const ModelSpec m = make_default_model(op, mp);
    SolverConfig c = base_config();
    const CoupledDrivers drv = sample_coupled_drivers(c, 1, 1);
    SolverConfig swapped_cfg = c;
    swapped_cfg.replica_id = 31;
    CoupledDrivers swapped = sample_coupled_drivers(swapped_cfg, 1, 1);
    swapped.B = drv.B; // same rough driver, fresh fast noise
    swapped.recB = drv.recB;

    const ScaleVector x0 = default_initial(4);
    const CoupledSolution a = solve_coupled(op, m, c, drv, x0, x0);
    const CoupledSolution b = solve_coupled(op, m, c, swapped, x0, x0);
    for (size_t k = 0; k < a.slow.size(); ++k)
        for (int q = 0; q < 4; ++q) CHECK(a.slow[k][q] == b.slow[k][q]);
    CHECK(norm_gamma(sub(a.fast.back(), b.fast.back()), op, 0.0) > 0.0);
}

TEST_CASE("driver and configuration mismatches are rejected") {
    const SpectralOperator op = dirichlet_laplacian(4);
    DefaultModelParams mp;
    mp.n_modes = 4;
    const ModelSpec m = make_default_model(op, mp);
    SolverConfig c = base_config();
    const CoupledDrivers drv = sample_coupled_drivers(c, 2, 1);
    const ScaleVector x0 = default_initial(4);
    CHECK_THROWS_AS(solve_coupled(op, m, c, drv, x0, x0), dimension_error); // d1 mismatch

    const CoupledDrivers good = sample_coupled_drivers(c, 1, 1);
    CoupledDrivers bad = good;
    bad.dW.pop_back();
    CHECK_THROWS_AS(solve_coupled(op, m, c, bad, x0, x0), dimension_error);

    ScaleVector broken = x0;
    broken[0] = std::numeric_limits<double>::infinity();
    CHECK_THROWS_AS(solve_coupled(op, m, c, good, broken, x0), instability_error);
}

TEST_CASE("auxiliary path with a whole-horizon block freezes at the start") {
    const SpectralOperator op = dirichlet_laplacian(3);
    DefaultModelParams mp;
    mp.n_modes = 3;
    const ModelSpec m = make_default_model(op, mp);
    SolverConfig c = base_config();
    validate_solver_config(c);
    const CoupledDrivers drv = sample_coupled_drivers(c, 1, 1);
    const ScaleVector x0 = default_initial(3);
    const CoupledSolution sol = solve_coupled(op, m, c, drv, x0, x0);
    const std::vector<ScaleVector> aux = solve_auxiliary(op, m, c, drv, sol.slow, x0, c.T);

    // replay the recursion holding the slow input at x0 throughout
    const double h_micro = c.T / (c.macro_steps * c.micro_substeps);
    ScaleVector y = x0;
    for (size_t g = 0; g + 1 < aux.size(); ++g) {
        y = step_fast(op, m, x0, y, &drv.dW[g], h_micro, c.epsilon);
        for (int q = 0; q < 3; ++q) CHECK(aux[g + 1][q] == y[q]);
    }
}

TEST_CASE("an x-blind fast equation makes the auxiliary path coincide") {
    const SpectralOperator op = dirichlet_laplacian(4);
    DefaultModelParams mp;
    mp.n_modes = 4;
    mp.a_scale = 0.0; // fast drift no longer sees the slow state
    const ModelSpec m = make_default_model(op, mp);
    SolverConfig c = base_config();
    validate_solver_config(c);
    const CoupledDrivers drv = sample_coupled_drivers(c, 1, 1);
    const ScaleVector x0 = default_initial(4);
    const CoupledSolution sol = solve_coupled(op, m, c, drv, x0, x0);
    const double h_macro = c.T / c.macro_steps;
    for (double delta : {h_macro, 5.0 * h_macro, c.T}) {
        const std::vector<ScaleVector> aux =
            solve_auxiliary(op, m, c, drv, sol.slow, x0, delta);
        REQUIRE(aux.size() == sol.fast.size());
        for (size_t k = 0; k < aux.size(); ++k)
            for (int q = 0; q < 4; ++q) CHECK(aux[k][q] == sol.fast[k][q]);
    }
}

TEST_CASE("the frozen slow input switches on floor-aligned block starts") {
    // linear probe: F2 copies the frozen slow state, so consecutive
    // auxiliary values reveal exactly which node was used
    const SpectralOperator op({1.0, 4.0});
    ModelSpec m = zero_model(2, 1, 1);
    m.L_F2 = 0.25;
    m.F1 = [](const ScaleVector& x, const ScaleVector&) {
        ScaleVector r(2);
        r[0] = 0.2 * std::tanh(x[0]);
        r[1] = 0.1 * std::tanh(x[1]);
        return r;
    };
    const ScaleVector col(std::vector<double>{0.4, 0.2});
    m.G1 = [&](const ScaleVector&) { return std::vector<ScaleVector>{col}; };
    m.F2 = [](const ScaleVector& x, const ScaleVector&) { return x; };

    SolverConfig c = base_config();
    c.T = 1.0;
    c.macro_steps = 20; // h = 0.05
    c.epsilon = 0.05;
    c.micro_substeps = 40;
    validate_solver_config(c);
    const CoupledDrivers drv = sample_coupled_drivers(c, 1, 1);
    const ScaleVector x0 = default_initial(2);
    const CoupledSolution sol = solve_coupled(op, m, c, drv, x0, x0);
    const std::vector<ScaleVector> aux =
        solve_auxiliary(op, m, c, drv, sol.slow, x0, 0.1);

    const double hr = (c.T / (c.macro_steps * c.micro_substeps)) / c.epsilon;
    const std::vector<double> sg = semigroup_factors(op, hr);
    const ScaleVector w = drift_weight(op, hr);
    auto recovered = [&](int g, int q) {
        return (aux[static_cast<size_t>(g) + 1][q] - sg[static_cast<size_t>(q)] * aux[static_cast<size_t>(g)][q]) / w[q];
    };
    // micro steps inside macro step 7 (t in [0.35, 0.40)) freeze at node 6
    for (int g : {7 * 40, 7 * 40 + 13, 7 * 40 + 39})
        for (int q = 0; q < 2; ++q)
            CHECK(recovered(g, q) == doctest::Approx(sol.slow[6][q]).epsilon(1e-9));
    // and macro step 6 (t in [0.30, 0.35)) already uses node 6
    for (int q = 0; q < 2; ++q)
        CHECK(recovered(6 * 40 + 5, q) == doctest::Approx(sol.slow[6][q]).epsilon(1e-9));
    // block spanning [0.0, 0.1) freezes at the initial node
    for (int q = 0; q < 2; ++q)
        CHECK(recovered(1 * 40 + 3, q) == doctest::Approx(x0[q]).epsilon(1e-9));

    CHECK_THROWS_AS(solve_auxiliary(op, m, c, drv, sol.slow, x0, 0.07), alignment_error);
}

TEST_CASE("auxiliary tracking error shrinks with the block length") {
    const SpectralOperator op = dirichlet_laplacian(4);
    DefaultModelParams mp;
    mp.n_modes = 4;
    const ModelSpec m = make_default_model(op, mp);
    SolverConfig c = base_config();
    validate_solver_config(c);
    const ScaleVector x0 = default_initial(4);
    const double h_macro = c.T / c.macro_steps;

    std::vector<double> gaps;
    for (double delta : {25.0 * h_macro, 5.0 * h_macro, h_macro}) {
        double acc = 0.0;
        for (int r = 0; r < 16; ++r) {
            SolverConfig rc = c;
            rc.replica_id = static_cast<std::uint64_t>(r);
            const CoupledDrivers drv = sample_coupled_drivers(rc, 1, 1);
            const CoupledSolution sol = solve_coupled(op, m, rc, drv, x0, x0);
            const std::vector<ScaleVector> aux =
                solve_auxiliary(op, m, rc, drv, sol.slow, x0, delta);
            double worst = 0.0;
            for (size_t k = 0; k < aux.size(); ++k)
                worst = std::max(worst, norm_gamma(sub(aux[k], sol.fast[k]), op, 0.0));
            acc += worst * worst;
        }
        gaps.push_back(acc / 16.0);
    }
    CHECK(gaps[1] < gaps[0]);
    CHECK(gaps[2] < gaps[1]);
}

TEST_CASE("block increment statistics align with the grid and decrease") {
    const SpectralOperator op = dirichlet_laplacian(4);
    DefaultModelParams mp;
    mp.n_modes = 4;
    const ModelSpec m = make_default_model(op, mp);
    SolverConfig c = base_config();
    c.T = 1.0;
    c.macro_steps = 64;
    const ScaleVector x0 = default_initial(4);

    const std::vector<double> deltas{0.25, 0.0625};
    const std::vector<IncrementRow> rows =
        increment_experiment(op, m, c, deltas, 12, x0, x0, 2);
    REQUIRE(rows.size() == 2);
    CHECK(rows[0].delta == 0.25);
    CHECK(rows[0].mean_sup4 > rows[1].mean_sup4);
    CHECK(rows[0].stderr_sup4 > 0.0);

    CHECK_THROWS_AS(increment_experiment(op, m, c, {0.3}, 4, x0, x0, 1), alignment_error);
    CHECK_THROWS_AS(increment_experiment(op, m, c, deltas, 0, x0, x0, 1), config_error);
}

TEST_CASE("probed drift magnitudes respect the declared bound") {
    const SpectralOperator op = dirichlet_laplacian(8);
    const ModelSpec m = make_default_model(op, DefaultModelParams{});
    const double probed = probe_f1_bound(op, m, 0.0, 0.45, 500, 1234);
    CHECK(probed > 0.0);
    CHECK(probed <= m.F1_bound * (1.0 + 1e-12));
}

TEST_CASE("default initial data decays quadratically in the mode index") {
    const ScaleVector x = default_initial(4);
    CHECK(x[0] == 1.0);
    CHECK(x[1] == 0.25);
    CHECK(x[3] == 0.0625);
}
