#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <vector>

#include "roughmill/errors.hpp"
#include "roughmill/rough_path.hpp"
#include "roughmill/stochastic_drivers.hpp"

using namespace roughmill;

TEST_CASE("gaussian sampler is pinned to exact golden values") {
    GaussianSampler g(42, 0, Stream::slow_driver);
    CHECK(g() == 1.4768283873185697);
    CHECK(g() == -0.75087272841186659);
    CHECK(g() == -1.1174659823229074);
    CHECK(g() == 0.17462782741226388);
}

TEST_CASE("identical seeds reproduce bit-identical sequences") {
    GaussianSampler a(7, 3, Stream::fast_driver);
    GaussianSampler b(7, 3, Stream::fast_driver);
    for (int i = 0; i < 50; ++i) CHECK(a() == b());
}

TEST_CASE("streams, replicas and master seeds decorrelate the draws") {
    GaussianSampler base(7, 3, Stream::slow_driver);
    GaussianSampler stream(7, 3, Stream::fast_driver);
    GaussianSampler frozen(7, 3, Stream::frozen_driver);
    GaussianSampler replica(7, 4, Stream::slow_driver);
    GaussianSampler master(8, 3, Stream::slow_driver);
    int same_stream = 0, same_frozen = 0, same_replica = 0, same_master = 0;
    for (int i = 0; i < 32; ++i) {
        const double x = base();
        same_stream += (stream() == x);
        same_frozen += (frozen() == x);
        same_replica += (replica() == x);
        same_master += (master() == x);
    }
    CHECK(same_stream == 0);
    CHECK(same_frozen == 0);
    CHECK(same_replica == 0);
    CHECK(same_master == 0);
}

TEST_CASE("sampled gaussians have the right first two moments") {
    GaussianSampler g(314, 1, Stream::probe);
    const int n = 40000;
    double sum = 0.0, sumsq = 0.0;
    for (int i = 0; i < n; ++i) {
        const double x = g();
        sum += x;
        sumsq += x * x;
    }
    const double mean = sum / n;
    const double var = sumsq / n - mean * mean;
    CHECK(std::abs(mean) <= 4.0 / std::sqrt(double(n)));
    CHECK(var == doctest::Approx(1.0).epsilon(0.05));
}

TEST_CASE("brownian lift has exact compensated diagonal areas") {
    GaussianSampler g(11, 0, Stream::slow_driver);
    const std::vector<double> times = uniform_grid(1.0, 64);
    const GridRoughPath p = sample_ito_brownian_lift(g, times, 2, 16);
    for (int k = 0; k < 64; ++k) {
        const double dt = times[k + 1] - times[k];
        for (int i = 0; i < 2; ++i) {
            const double dw = p.value(k + 1, i) - p.value(k, i);
            CHECK(p.area(k, i, i) == doctest::Approx((dw * dw - dt) / 2.0).epsilon(1e-13));
        }
    }
    CHECK_NOTHROW(p.validate());
}

TEST_CASE("brownian increments match their mean and variance") {
    GaussianSampler g(2024, 5, Stream::fast_driver);
    const int steps = 20000;
    const double dt = 0.01;
    const GridRoughPath p = sample_ito_brownian_lift(g, uniform_grid(steps * dt, steps), 1, 1);
    double sum = 0.0, sumsq = 0.0;
    for (int k = 0; k < steps; ++k) {
        const double dw = p.value(k + 1, 0) - p.value(k, 0);
        sum += dw;
        sumsq += dw * dw;
    }
    const double mean = sum / steps;
    CHECK(std::abs(mean) <= 4.0 * std::sqrt(dt / steps));
    CHECK(sumsq / steps == doctest::Approx(dt).epsilon(0.05));
}

TEST_CASE("off-diagonal step areas are centered") {
    GaussianSampler g(500, 2, Stream::slow_driver);
    const int steps = 4000;
    const double dt = 0.05;
    const GridRoughPath p = sample_ito_brownian_lift(g, uniform_grid(steps * dt, steps), 2, 32);
    double sum01 = 0.0, sum10 = 0.0;
    for (int k = 0; k < steps; ++k) {
        sum01 += p.area(k, 0, 1);
        sum10 += p.area(k, 1, 0);
    }
    // the step area has variance about dt^2/2
    const double se = 4.0 * dt / std::sqrt(2.0 * steps);
    CHECK(std::abs(sum01 / steps) <= se);
    CHECK(std::abs(sum10 / steps) <= se);
}

TEST_CASE("left-point area refinement halves the error variance per doubling") {
    // group the recorded fine increments into coarser left-point sums and
    // compare error variances against the finest sum; nested martingale
    // increments make Var(a_M - a_4M) / Var(a_2M - a_4M) = 3
    GaussianSampler g(909, 0, Stream::slow_driver);
    const int steps = 4000, fine = 128;
    const double h = 0.25;
    SubstepRecord rec;
    const GridRoughPath p =
        sample_ito_brownian_lift(g, uniform_grid(steps * h, steps), 2, fine, &rec);
    REQUIRE(rec.substeps == fine);

    auto left_sum = [&](int k, int groups) {
        const int per = fine / groups;
        double w1 = 0.0, acc = 0.0;
        for (int m = 0; m < groups; ++m) {
            double dw2 = 0.0, dw1 = 0.0;
            for (int j = 0; j < per; ++j) {
                dw1 += rec.inc(k, m * per + j, 0);
                dw2 += rec.inc(k, m * per + j, 1);
            }
            acc += w1 * dw2;
            w1 += dw1;
        }
        return acc;
    };

    double var_coarse = 0.0, var_mid = 0.0, agree = 0.0;
    for (int k = 0; k < steps; ++k) {
        const double a128 = left_sum(k, 128);
        const double d32 = left_sum(k, 32) - a128;
        const double d64 = left_sum(k, 64) - a128;
        var_coarse += d32 * d32;
        var_mid += d64 * d64;
        agree = std::max(agree, std::abs(a128 - p.area(k, 0, 1)));
    }
    CHECK(agree <= 1e-13); // the published area is exactly the finest left-point sum
    const double ratio = var_coarse / var_mid;
    CHECK(ratio >= 2.4);
    CHECK(ratio <= 3.7);
}

TEST_CASE("canonical lift of constant and linear paths") {
    auto cf = [](double) { return std::vector<double>{2.5}; };
    const GridRoughPath c = canonical_smooth_lift(cf, uniform_grid(1.0, 8), 1, 2);
    CHECK(holder_seminorm_level1(c, 0.5) == 0.0);
    CHECK(holder_seminorm_level2(c, 0.9) == 0.0);

    auto lf = [](double t) { return std::vector<double>{t}; };
    auto lfp = [](double) { return std::vector<double>{1.0}; };
    const GridRoughPath l = canonical_smooth_lift(lf, uniform_grid(2.0, 10), 1, 2, lfp);
    for (int k = 0; k < 10; ++k)
        CHECK(l.area(k, 0, 0) == doctest::Approx(0.2 * 0.2 / 2.0).epsilon(1e-13));
    // whole-interval area of the identity path is span^2 / 2
    CHECK(chen_extend(l, 0, 10)[0] == doctest::Approx(2.0).epsilon(1e-13));

    CHECK_THROWS_AS(canonical_smooth_lift(lf, uniform_grid(1.0, 4), 1, 0), config_error);
}

TEST_CASE("numerical derivative fallback matches a supplied derivative") {
    auto f = [](double t) { return std::vector<double>{std::sin(2.0 * t), std::cos(3.0 * t)}; };
    auto fp = [](double t) {
        return std::vector<double>{2.0 * std::cos(2.0 * t), -3.0 * std::sin(3.0 * t)};
    };
    const std::vector<double> times = uniform_grid(1.0, 16);
    const GridRoughPath a = canonical_smooth_lift(f, times, 2, 8, fp);
    const GridRoughPath b = canonical_smooth_lift(f, times, 2, 8);
    CHECK(distance_alpha(a, b, 0.45) <= 1e-6);
}

TEST_CASE("mixed lift keeps blocks consistent") {
    const std::vector<double> times = uniform_grid(1.0, 32);
    GaussianSampler gb(3, 0, Stream::slow_driver);
    GaussianSampler gw(3, 0, Stream::fast_driver);
    SubstepRecord recB, recW;
    const GridRoughPath B = sample_ito_brownian_lift(gb, times, 1, 32, &recB);
    const GridRoughPath W = sample_ito_brownian_lift(gw, times, 2, 32, &recW);
    const GridRoughPath M = build_mixed_lift(B, W, recB, recW);

    CHECK(M.dim == 3);
    for (int k = 0; k <= 32; ++k) {
        CHECK(M.value(k, 0) == B.value(k, 0));
        CHECK(M.value(k, 1) == W.value(k, 0));
        CHECK(M.value(k, 2) == W.value(k, 1));
    }
    for (int k = 0; k < 32; ++k) {
        CHECK(M.area(k, 0, 0) == B.area(k, 0, 0));
        CHECK(M.area(k, 1, 2) == W.area(k, 0, 1));
        // integration by parts pins the opposite cross block
        const double db = B.value(k + 1, 0) - B.value(k, 0);
        for (int j = 0; j < 2; ++j) {
            const double dw = W.value(k + 1, j) - W.value(k, j);
            CHECK(M.area(k, 1 + j, 0)
                  == doctest::Approx(dw * db - M.area(k, 0, 1 + j)).epsilon(1e-12));
        }
    }
    // structural Chen consistency of the assembled lift
    double worst = 0.0;
    for (int s = 0; s <= 32; s += 4)
        for (int u = s; u <= 32; u += 4)
            for (int t = u; t <= 32; t += 4)
                worst = std::max(worst, chen_residual(M, s, u, t));
    CHECK(worst <= 1e-12);
}

TEST_CASE("mixed lift with a frozen first driver has empty cross areas") {
    const std::vector<double> times = uniform_grid(1.0, 8);
    GaussianSampler gw(5, 0, Stream::fast_driver);
    SubstepRecord recW;
    const GridRoughPath W = sample_ito_brownian_lift(gw, times, 1, 16, &recW);

    GridRoughPath B0;
    B0.times = times;
    B0.dim = 1;
    B0.values.assign(times.size(), 0.0);
    B0.step_areas.assign(times.size() - 1, 0.0);
    SubstepRecord rec0;
    rec0.substeps = 16;
    rec0.dim = 1;
    rec0.increments.assign((times.size() - 1) * 16, 0.0);

    const GridRoughPath M = build_mixed_lift(B0, W, rec0, recW);
    for (int k = 0; k < 8; ++k) {
        CHECK(M.area(k, 0, 1) == 0.0);
        CHECK(M.area(k, 1, 0) == 0.0);
        CHECK(M.area(k, 1, 1) == W.area(k, 0, 0));
    }
}

TEST_CASE("mixed lift validates grids and records") {
    GaussianSampler g1(1, 0, Stream::slow_driver);
    GaussianSampler g2(1, 0, Stream::fast_driver);
    SubstepRecord recB, recW, recW8;
    const GridRoughPath B = sample_ito_brownian_lift(g1, uniform_grid(1.0, 16), 1, 16, &recB);
    const GridRoughPath W = sample_ito_brownian_lift(g2, uniform_grid(1.0, 16), 1, 16, &recW);
    GaussianSampler g3(1, 0, Stream::fast_driver);
    const GridRoughPath W2 = sample_ito_brownian_lift(g3, uniform_grid(2.0, 16), 1, 16, &recW8);
    CHECK_THROWS_AS(build_mixed_lift(B, W2, recB, recW8), dimension_error);
    SubstepRecord coarse = recW;
    coarse.substeps = 8;
    CHECK_THROWS_AS(build_mixed_lift(B, W, recB, coarse), config_error);
    SubstepRecord empty;
    CHECK_THROWS_AS(build_mixed_lift(B, W, recB, empty), config_error);
}

TEST_CASE("substep count below one is rejected") {
    GaussianSampler g(1, 0, Stream::slow_driver);
    CHECK_THROWS_AS(sample_ito_brownian_lift(g, uniform_grid(1.0, 4), 1, 0), config_error);
    CHECK_THROWS_AS(sample_ito_brownian_lift(g, uniform_grid(1.0, 4), 0, 8), dimension_error);
}

TEST_CASE("homogeneous norm moments stabilize with sample size") {
    const std::vector<double> times = uniform_grid(1.0, 32);
    auto batch_mean = [&](int n_samples, double power) {
        double acc = 0.0;
        for (int r = 0; r < n_samples; ++r) {
            GaussianSampler g(600, static_cast<std::uint64_t>(r), Stream::probe);
            const GridRoughPath p = sample_ito_brownian_lift(g, times, 2, 8);
            acc += std::pow(homogeneous_norm(p, 0.45), power);
        }
        return acc / n_samples;
    };
    for (double power : {1.0, 2.0}) {
        const double m1 = batch_mean(1000, power);
        const double m2 = batch_mean(2000, power);
        CHECK(std::abs(m2 - m1) / m2 <= 0.15);
        CHECK(std::isfinite(m1));
    }
}
