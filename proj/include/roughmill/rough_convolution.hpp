#ifndef ROUGHMILL_ROUGH_CONVOLUTION_HPP
#define ROUGHMILL_ROUGH_CONVOLUTION_HPP

#include "roughmill/controlled_path.hpp"
#include "roughmill/hilbert_scale.hpp"
#include "roughmill/rough_path.hpp"

namespace roughmill {

// Semigroup-weighted compensated left-point sum
//   sum_{[u,v] in pi} S_{t-u} ( Y_u X_{u,v} + Y'_u A_{u,v} )
// over the dyadic partition pi of [t_0, t_{t_index}] with 2^depth cells;
// for growing depth this converges to the rough convolution integral.
// The integrand must have one Y column per driver direction
// (cp.width == driver.dim).  Partition nodes are grid indices
// floor(m * t_index / 2^depth); if 2^depth exceeds the available steps a
// resolution_error is thrown.
ScaleVector rough_convolve(const SpectralOperator& op, const ControlledPath& cp,
                           const GridRoughPath& driver, int t_index, int depth);

// Same sum restricted to [t_s, t_t].
ScaleVector rough_convolve_window(const SpectralOperator& op, const ControlledPath& cp,
                                  const GridRoughPath& driver, int s_index,
                                  int t_index, int depth);

// | I_{s,t} - S_{t-s}(Y_s X_{s,t}) - S_{t-s}(Y'_s A_{s,t}) |_{gamma-2 alpha+beta}
// with I_{s,t} the window integral at the maximal depth the grid supports.
// Requires 0 <= beta < 3 alpha.  Raw diagnostic; no constant is attached.
double sewing_defect(const SpectralOperator& op, const ControlledPath& cp,
                     const GridRoughPath& driver, int s_index, int t_index,
                     double beta);

// Exponential-integrator quadrature of the drift convolution
//   sum_k S_{t - t_{k+1}} drift_weight(t_{k+1}-t_k) f(t_k),
// exact for piecewise-constant f on the grid.
ScaleVector drift_convolve(const SpectralOperator& op, const std::vector<ScaleVector>& f,
                           const std::vector<double>& times, int t_index);

} // namespace roughmill

#endif
