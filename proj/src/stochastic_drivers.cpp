#include "roughmill/stochastic_drivers.hpp"

#include <cmath>

namespace roughmill {

std::mt19937_64 make_rng(std::uint64_t master_seed, std::uint64_t replica_id, Stream stream) {
    std::seed_seq seq{
        static_cast<std::uint32_t>(master_seed & 0xffffffffu),
        static_cast<std::uint32_t>(master_seed >> 32),
        static_cast<std::uint32_t>(replica_id & 0xffffffffu),
        static_cast<std::uint32_t>(replica_id >> 32),
        static_cast<std::uint32_t>(static_cast<std::uint64_t>(stream)),
    };
    return std::mt19937_64(seq);
}

double GaussianSampler::operator()() {
    if (has_spare_) {
        has_spare_ = false;
        return spare_;
    }
    // u1 in (0,1], u2 in [0,1); 53-bit mantissas from raw engine words.
    const double u1 = (static_cast<double>(gen_() >> 11) + 1.0) * 0x1p-53;
    const double u2 = static_cast<double>(gen_() >> 11) * 0x1p-53;
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 6.283185307179586476925286766559 * u2;
    spare_ = r * std::sin(a);
    has_spare_ = true;
    return r * std::cos(a);
}

static void check_grid(const std::vector<double>& times) {
    if (times.size() < 2) throw dimension_error("driver grid needs at least two points");
    for (size_t k = 0; k + 1 < times.size(); ++k)
        if (!(times[k] < times[k + 1]))
            throw dimension_error("driver grid must be strictly increasing");
}

GridRoughPath sample_ito_brownian_lift(GaussianSampler& g,
                                       const std::vector<double>& times, int dim,
                                       int substeps, SubstepRecord* record) {
    check_grid(times);
    if (dim < 1) throw dimension_error("driver dim must be >= 1");
    if (substeps < 1) throw config_error("substep count must be >= 1");

    const int K = static_cast<int>(times.size()) - 1;
    GridRoughPath p;
    p.times = times;
    p.dim = dim;
    p.values.assign(static_cast<size_t>(K + 1) * dim, 0.0);
    p.step_areas.assign(static_cast<size_t>(K) * dim * dim, 0.0);

    if (record) {
        record->substeps = substeps;
        record->dim = dim;
        record->increments.assign(static_cast<size_t>(K) * substeps * dim, 0.0);
    }

    std::vector<double> partial(static_cast<size_t>(dim));
    std::vector<double> dw(static_cast<size_t>(dim));
    for (int k = 0; k < K; ++k) {
        const double dt = times[static_cast<size_t>(k) + 1] - times[static_cast<size_t>(k)];
        const double sd = std::sqrt(dt / substeps);
        std::fill(partial.begin(), partial.end(), 0.0);
        for (int j = 0; j < substeps; ++j) {
            for (int i = 0; i < dim; ++i) dw[static_cast<size_t>(i)] = sd * g();
            if (record)
                for (int i = 0; i < dim; ++i)
                    record->increments[(static_cast<size_t>(k) * substeps + j) * dim + i] =
                        dw[static_cast<size_t>(i)];
            // left-point sums of W_{t_k, tau_j} against the substep increment
            for (int i = 0; i < dim; ++i)
                for (int j2 = 0; j2 < dim; ++j2)
                    p.area_ref(k, i, j2) += partial[static_cast<size_t>(i)] * dw[static_cast<size_t>(j2)];
            for (int i = 0; i < dim; ++i) partial[static_cast<size_t>(i)] += dw[static_cast<size_t>(i)];
        }
        for (int i = 0; i < dim; ++i) {
            const double full = partial[static_cast<size_t>(i)];
            p.value_ref(k + 1, i) = p.value(k, i) + full;
            // exact diagonal area from the quadratic-variation identity
            p.area_ref(k, i, i) = (full * full - dt) / 2.0;
        }
    }
    p.validate();
    return p;
}

GridRoughPath canonical_smooth_lift(
    const std::function<std::vector<double>(double)>& f,
    const std::vector<double>& times, int dim, int quad_panels,
    const std::function<std::vector<double>(double)>& fprime) {
    check_grid(times);
    if (dim < 1) throw dimension_error("driver dim must be >= 1");
    if (quad_panels < 1) throw config_error("quadrature panel count must be >= 1");

    const int K = static_cast<int>(times.size()) - 1;
    GridRoughPath p;
    p.times = times;
    p.dim = dim;
    p.values.assign(static_cast<size_t>(K + 1) * dim, 0.0);
    p.step_areas.assign(static_cast<size_t>(K) * dim * dim, 0.0);

    auto deriv = [&](double r) -> std::vector<double> {
        if (fprime) return fprime(r);
        const double h = 1e-6 * std::max(1.0, std::fabs(r));
        std::vector<double> hi = f(r + h), lo = f(r - h);
        for (int i = 0; i < dim; ++i) hi[static_cast<size_t>(i)] =
            (hi[static_cast<size_t>(i)] - lo[static_cast<size_t>(i)]) / (2.0 * h);
        return hi;
    };

    const std::vector<double> f0 = f(times[0]);
    for (int k = 0; k <= K; ++k) {
        const std::vector<double> fk = f(times[static_cast<size_t>(k)]);
        for (int i = 0; i < dim; ++i)
            p.value_ref(k, i) = fk[static_cast<size_t>(i)] - f0[static_cast<size_t>(i)];
    }

    // Composite Simpson per step on g(r) = (f(r) - f(t_k)) (x) f'(r).
    for (int k = 0; k < K; ++k) {
        const double a = times[static_cast<size_t>(k)];
        const double b = times[static_cast<size_t>(k) + 1];
        const std::vector<double> fa = f(a);
        const int nodes = 2 * quad_panels + 1;
        const double h = (b - a) / (nodes - 1);
        for (int m = 0; m < nodes; ++m) {
            const double r = (m == nodes - 1) ? b : a + h * m;
            const double w = (m == 0 || m == nodes - 1) ? 1.0 : (m % 2 == 1 ? 4.0 : 2.0);
            const std::vector<double> fr = f(r);
            const std::vector<double> dv = deriv(r);
            for (int i = 0; i < dim; ++i)
                for (int j = 0; j < dim; ++j)
                    p.area_ref(k, i, j) +=
                        (w * h / 3.0) *
                        (fr[static_cast<size_t>(i)] - fa[static_cast<size_t>(i)]) *
                        dv[static_cast<size_t>(j)];
        }
    }
    p.validate();
    return p;
}

GridRoughPath build_mixed_lift(const GridRoughPath& B, const GridRoughPath& W,
                               const SubstepRecord& recB, const SubstepRecord& recW) {
    if (B.times.size() != W.times.size())
        throw dimension_error("mixed lift needs a shared grid");
    for (size_t k = 0; k < B.times.size(); ++k)
        if (B.times[k] != W.times[k])
            throw dimension_error("mixed lift needs a shared grid");
    if (recB.substeps < 1 || recW.substeps < 1)
        throw config_error("mixed lift needs substep records for both drivers");
    if (recB.substeps != recW.substeps)
        throw config_error("substep records disagree on the refinement");
    const int K = B.n_steps();
    const int d1 = B.dim;
    const int d2 = W.dim;
    const int M = recB.substeps;
    if (recB.dim != d1 || recW.dim != d2 ||
        recB.increments.size() != static_cast<size_t>(K) * M * d1 ||
        recW.increments.size() != static_cast<size_t>(K) * M * d2)
        throw config_error("substep records do not match the lifts");

    GridRoughPath mixed;
    mixed.times = B.times;
    mixed.dim = d1 + d2;
    mixed.values.assign(static_cast<size_t>(K + 1) * mixed.dim, 0.0);
    mixed.step_areas.assign(static_cast<size_t>(K) * mixed.dim * mixed.dim, 0.0);

    for (int k = 0; k <= K; ++k) {
        for (int i = 0; i < d1; ++i) mixed.value_ref(k, i) = B.value(k, i);
        for (int i = 0; i < d2; ++i) mixed.value_ref(k, d1 + i) = W.value(k, i);
    }

    std::vector<double> pb(static_cast<size_t>(d1));
    std::vector<double> cross(static_cast<size_t>(d1) * d2); // sum B_{t_k,tau} (x) dW
    for (int k = 0; k < K; ++k) {
        for (int i = 0; i < d1; ++i)
            for (int j = 0; j < d1; ++j) mixed.area_ref(k, i, j) = B.area(k, i, j);
        for (int i = 0; i < d2; ++i)
            for (int j = 0; j < d2; ++j) mixed.area_ref(k, d1 + i, d1 + j) = W.area(k, i, j);

        std::fill(pb.begin(), pb.end(), 0.0);
        std::fill(cross.begin(), cross.end(), 0.0);
        for (int j = 0; j < M; ++j) {
            for (int p = 0; p < d1; ++p)
                for (int q = 0; q < d2; ++q)
                    cross[static_cast<size_t>(p) * d2 + q] +=
                        pb[static_cast<size_t>(p)] * recW.inc(k, j, q);
            for (int p = 0; p < d1; ++p) pb[static_cast<size_t>(p)] += recB.inc(k, j, p);
        }
        for (int p = 0; p < d1; ++p)
            for (int q = 0; q < d2; ++q) {
                const double ibw = cross[static_cast<size_t>(p) * d2 + q];
                const double wq = W.value(k + 1, q) - W.value(k, q);
                const double bp = B.value(k + 1, p) - B.value(k, p);
                mixed.area_ref(k, p, d1 + q) = ibw;            // B-row, W-column
                mixed.area_ref(k, d1 + q, p) = wq * bp - ibw;  // integration by parts
            }
    }
    mixed.validate();
    return mixed;
}

} // namespace roughmill
