#ifndef ROUGHMILL_ROUGH_PATH_HPP
#define ROUGHMILL_ROUGH_PATH_HPP

#include <functional>
#include <vector>

#include "roughmill/errors.hpp"

namespace roughmill {

// Two-level rough path sampled on a time grid.
//
// Only per-step second-level areas are stored; the area over any pair of
// grid points is reconstructed with chen_extend, so the Chen consistency
// relation holds by construction instead of by storage.
//
// Index convention for areas: entry (i, j) of the area over [s, t]
// approximates the iterated integral of X^i_{s,.} against dX^j, so Chen
// reads  A_{s,t} - A_{s,u} - A_{u,t} = X_{s,u} (x) X_{u,t}  with
// (X_{s,u} (x) X_{u,t})_{ij} = X^i_{s,u} X^j_{u,t}.
struct GridRoughPath {
    std::vector<double> times;      // K+1 strictly increasing points
    int dim = 0;                    // d
    std::vector<double> values;     // (K+1)*d, node-major
    std::vector<double> step_areas; // K*d*d, step-major, row-major (i,j)

    int n_points() const { return static_cast<int>(times.size()); }
    int n_steps() const { return static_cast<int>(times.size()) - 1; }

    double value(int k, int i) const {
        return values[static_cast<size_t>(k) * dim + i];
    }
    double& value_ref(int k, int i) {
        return values[static_cast<size_t>(k) * dim + i];
    }
    double area(int k, int i, int j) const {
        return step_areas[(static_cast<size_t>(k) * dim + i) * dim + j];
    }
    double& area_ref(int k, int i, int j) {
        return step_areas[(static_cast<size_t>(k) * dim + i) * dim + j];
    }

    // Checks sizes, strict time monotonicity, finiteness.
    void validate() const;
};

// Increment X_t - X_s written into out[0..dim), computed from absolute
// values so additivity over intermediate points is exact.
void increment(const GridRoughPath& p, int s_index, int t_index, double* out);

// Area over [t_s, t_t] assembled from per-step areas via the Chen relation.
// Returns a dim*dim row-major matrix; the empty interval gives zeros.
std::vector<double> chen_extend(const GridRoughPath& p, int s_index, int t_index);

// Max-abs-entry of A_{s,t} - A_{s,u} - A_{u,t} - X_{s,u} (x) X_{u,t}.
double chen_residual(const GridRoughPath& p, int s_index, int u_index, int t_index);

// Grid Hoelder seminorm sup_{s<t} |F_{s,t}| / (t-s)^exponent.  Grid pairs
// only, so this is a lower proxy for the continuous-time supremum.
// Level one uses increments, level two uses chen_extend areas; pass the
// exponent you want applied (alpha for level one, 2*alpha for level two).
// Magnitudes are max-abs over coordinates/entries.
double holder_seminorm_level1(const GridRoughPath& p, double exponent);
double holder_seminorm_level2(const GridRoughPath& p, double exponent);

// Same grid supremum for an arbitrary two-parameter magnitude table.
double holder_seminorm_table(const std::vector<double>& times,
                             const std::function<double(int, int)>& magnitude,
                             double exponent);

// Pseudometric |X - Xbar|_alpha + |A - Abar|_{2 alpha} on a shared grid.
double distance_alpha(const GridRoughPath& p, const GridRoughPath& q, double alpha);

// |X|_alpha + sqrt(|A|_{2 alpha}).
double homogeneous_norm(const GridRoughPath& p, double alpha);

// Uniform grid 0 = t_0 < ... < t_K = horizon with K = steps.
std::vector<double> uniform_grid(double horizon, int steps);

} // namespace roughmill

#endif
