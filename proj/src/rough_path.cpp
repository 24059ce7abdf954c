#include "roughmill/rough_path.hpp"

#include <cmath>
#include <string>

namespace roughmill {

void GridRoughPath::validate() const {
    if (dim < 1) throw dimension_error("rough path dim must be >= 1");
    if (times.size() < 2) throw dimension_error("rough path needs at least two grid points");
    for (size_t k = 0; k + 1 < times.size(); ++k)
        if (!(times[k] < times[k + 1]))
            throw dimension_error("grid times must be strictly increasing at index " +
                                  std::to_string(k));
    const size_t K = times.size() - 1;
    if (values.size() != times.size() * static_cast<size_t>(dim))
        throw dimension_error("values size does not match grid");
    if (step_areas.size() != K * static_cast<size_t>(dim) * static_cast<size_t>(dim))
        throw dimension_error("step_areas size does not match grid");
    for (double v : values)
        if (!std::isfinite(v)) throw dimension_error("non-finite path value");
    for (double a : step_areas)
        if (!std::isfinite(a)) throw dimension_error("non-finite step area");
}

static void check_pair(const GridRoughPath& p, int s_index, int t_index) {
    if (s_index < 0 || t_index >= p.n_points() || s_index > t_index)
        throw index_error("bad grid pair (" + std::to_string(s_index) + ", " +
                          std::to_string(t_index) + ")");
}

void increment(const GridRoughPath& p, int s_index, int t_index, double* out) {
    check_pair(p, s_index, t_index);
    for (int i = 0; i < p.dim; ++i) out[i] = p.value(t_index, i) - p.value(s_index, i);
}

std::vector<double> chen_extend(const GridRoughPath& p, int s_index, int t_index) {
    check_pair(p, s_index, t_index);
    const int d = p.dim;
    std::vector<double> area(static_cast<size_t>(d) * d, 0.0);
    std::vector<double> inc(static_cast<size_t>(d), 0.0); // X_{s, t_k}
    for (int k = s_index; k < t_index; ++k) {
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j) {
                const double dx_j = p.value(k + 1, j) - p.value(k, j);
                area[static_cast<size_t>(i) * d + j] += p.area(k, i, j) + inc[i] * dx_j;
            }
        for (int i = 0; i < d; ++i) inc[i] += p.value(k + 1, i) - p.value(k, i);
    }
    return area;
}

static double max_abs(const std::vector<double>& m) {
    double r = 0.0;
    for (double v : m) r = std::max(r, std::fabs(v));
    return r;
}

double chen_residual(const GridRoughPath& p, int s_index, int u_index, int t_index) {
    if (!(s_index <= u_index && u_index <= t_index))
        throw index_error("chen_residual needs s <= u <= t");
    check_pair(p, s_index, t_index);
    const int d = p.dim;
    std::vector<double> a_st = chen_extend(p, s_index, t_index);
    std::vector<double> a_su = chen_extend(p, s_index, u_index);
    std::vector<double> a_ut = chen_extend(p, u_index, t_index);
    std::vector<double> x_su(static_cast<size_t>(d)), x_ut(static_cast<size_t>(d));
    increment(p, s_index, u_index, x_su.data());
    increment(p, u_index, t_index, x_ut.data());
    double r = 0.0;
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) {
            const size_t ij = static_cast<size_t>(i) * d + j;
            r = std::max(r, std::fabs(a_st[ij] - a_su[ij] - a_ut[ij] - x_su[i] * x_ut[j]));
        }
    return r;
}

static void check_exponent(double exponent) {
    if (!(exponent > 0.0 && exponent <= 1.0))
        throw std::domain_error("Hoelder exponent must lie in (0, 1]");
}

double holder_seminorm_level1(const GridRoughPath& p, double exponent) {
    check_exponent(exponent);
    const int K = p.n_steps();
    const int d = p.dim;
    double best = 0.0;
    for (int s = 0; s < K; ++s)
        for (int t = s + 1; t <= K; ++t) {
            double m = 0.0;
            for (int i = 0; i < d; ++i)
                m = std::max(m, std::fabs(p.value(t, i) - p.value(s, i)));
            best = std::max(best, m / std::pow(p.times[t] - p.times[s], exponent));
        }
    return best;
}

double holder_seminorm_level2(const GridRoughPath& p, double exponent) {
    check_exponent(exponent);
    const int K = p.n_steps();
    const int d = p.dim;
    double best = 0.0;
    std::vector<double> area(static_cast<size_t>(d) * d);
    std::vector<double> inc(static_cast<size_t>(d));
    for (int s = 0; s < K; ++s) {
        std::fill(area.begin(), area.end(), 0.0);
        std::fill(inc.begin(), inc.end(), 0.0);
        for (int t = s + 1; t <= K; ++t) {
            const int k = t - 1;
            for (int i = 0; i < d; ++i)
                for (int j = 0; j < d; ++j)
                    area[static_cast<size_t>(i) * d + j] +=
                        p.area(k, i, j) + inc[i] * (p.value(k + 1, j) - p.value(k, j));
            for (int i = 0; i < d; ++i) inc[i] += p.value(k + 1, i) - p.value(k, i);
            best = std::max(best, max_abs(area) /
                                      std::pow(p.times[t] - p.times[s], exponent));
        }
    }
    return best;
}

double holder_seminorm_table(const std::vector<double>& times,
                             const std::function<double(int, int)>& magnitude,
                             double exponent) {
    check_exponent(exponent);
    const int K = static_cast<int>(times.size()) - 1;
    double best = 0.0;
    for (int s = 0; s < K; ++s)
        for (int t = s + 1; t <= K; ++t)
            best = std::max(best,
                            magnitude(s, t) / std::pow(times[t] - times[s], exponent));
    return best;
}

static void check_same_grid(const GridRoughPath& p, const GridRoughPath& q) {
    if (p.dim != q.dim || p.times.size() != q.times.size())
        throw dimension_error("rough paths live on different grids");
    for (size_t k = 0; k < p.times.size(); ++k)
        if (p.times[k] != q.times[k])
            throw dimension_error("rough paths live on different grids");
}

double distance_alpha(const GridRoughPath& p, const GridRoughPath& q, double alpha) {
    check_same_grid(p, q);
    check_exponent(alpha);
    const int K = p.n_steps();
    const int d = p.dim;

    double lvl1 = 0.0;
    for (int s = 0; s < K; ++s)
        for (int t = s + 1; t <= K; ++t) {
            double m = 0.0;
            for (int i = 0; i < d; ++i) {
                const double diff = (p.value(t, i) - p.value(s, i)) -
                                    (q.value(t, i) - q.value(s, i));
                m = std::max(m, std::fabs(diff));
            }
            lvl1 = std::max(lvl1, m / std::pow(p.times[t] - p.times[s], alpha));
        }

    double lvl2 = 0.0;
    std::vector<double> ap(static_cast<size_t>(d) * d), aq(ap.size());
    std::vector<double> ip(static_cast<size_t>(d)), iq(ip.size());
    for (int s = 0; s < K; ++s) {
        std::fill(ap.begin(), ap.end(), 0.0);
        std::fill(aq.begin(), aq.end(), 0.0);
        std::fill(ip.begin(), ip.end(), 0.0);
        std::fill(iq.begin(), iq.end(), 0.0);
        for (int t = s + 1; t <= K; ++t) {
            const int k = t - 1;
            for (int i = 0; i < d; ++i)
                for (int j = 0; j < d; ++j) {
                    const size_t ij = static_cast<size_t>(i) * d + j;
                    ap[ij] += p.area(k, i, j) + ip[i] * (p.value(k + 1, j) - p.value(k, j));
                    aq[ij] += q.area(k, i, j) + iq[i] * (q.value(k + 1, j) - q.value(k, j));
                }
            for (int i = 0; i < d; ++i) {
                ip[i] += p.value(k + 1, i) - p.value(k, i);
                iq[i] += q.value(k + 1, i) - q.value(k, i);
            }
            double m = 0.0;
            for (size_t ij = 0; ij < ap.size(); ++ij)
                m = std::max(m, std::fabs(ap[ij] - aq[ij]));
            lvl2 = std::max(lvl2, m / std::pow(p.times[t] - p.times[s], 2.0 * alpha));
        }
    }
    return lvl1 + lvl2;
}

double homogeneous_norm(const GridRoughPath& p, double alpha) {
    return holder_seminorm_level1(p, alpha) +
           std::sqrt(holder_seminorm_level2(p, 2.0 * alpha));
}

std::vector<double> uniform_grid(double horizon, int steps) {
    if (steps < 1 || !(horizon > 0.0)) throw config_error("bad uniform grid request");
    std::vector<double> t(static_cast<size_t>(steps) + 1);
    for (int k = 0; k <= steps; ++k)
        t[static_cast<size_t>(k)] = horizon * static_cast<double>(k) / steps;
    return t;
}

} // namespace roughmill
