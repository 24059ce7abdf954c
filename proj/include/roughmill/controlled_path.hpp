#ifndef ROUGHMILL_CONTROLLED_PATH_HPP
#define ROUGHMILL_CONTROLLED_PATH_HPP

#include <functional>
#include <vector>

#include "roughmill/hilbert_scale.hpp"
#include "roughmill/rough_path.hpp"

namespace roughmill {

// Path Y controlled by a d-dimensional driver X together with its
// derivative path Y': locally Y_{s,t} = Y'_s X_{s,t} + R_{s,t} with the
// remainder R one Hoelder order better than Y itself.
//
// `width` is the number of H-valued columns of Y: 1 for state paths, and
// equal to the driver dimension for rough-integral integrands produced by
// compose_vector_field.  Storage is node-major:
//   Y      [k*width + j]            column j at node k
//   Yprime [(k*dim + i)*width + j]  derivative of column j in driver
//                                   direction i at node k
// The (i, j) layout of Yprime matches the (i, j) entries of driver areas,
// so a compensated sum contracts Yprime flat against the area matrix.
struct ControlledPath {
    std::vector<double> times;
    int width = 1;
    int dim = 1;
    double gamma = 0.0;
    double alpha = 0.45;
    std::vector<ScaleVector> Y;
    std::vector<ScaleVector> Yprime;

    int n_points() const { return static_cast<int>(times.size()); }

    const ScaleVector& y(int k, int j = 0) const {
        return Y[static_cast<size_t>(k) * width + j];
    }
    ScaleVector& y_ref(int k, int j = 0) {
        return Y[static_cast<size_t>(k) * width + j];
    }
    const ScaleVector& yprime(int k, int i, int j = 0) const {
        return Yprime[(static_cast<size_t>(k) * dim + i) * width + j];
    }
    ScaleVector& yprime_ref(int k, int i, int j = 0) {
        return Yprime[(static_cast<size_t>(k) * dim + i) * width + j];
    }

    // Sizes consistent and grid shared with the driver.
    void validate(const GridRoughPath& driver) const;
};

// Convenience constructor: width-1 controlled path on the driver's grid
// with all entries zero-initialized to n_modes coefficients.
ControlledPath make_controlled_path(const GridRoughPath& driver, int n_modes,
                                    double gamma, double alpha, int width = 1);

// R_{s,t} = Y_t - Y_s - sum_i Y'_s[i] X^i_{s,t} for one column of Y.
ScaleVector remainder(const ControlledPath& cp, const GridRoughPath& driver,
                      int s_index, int t_index, int column = 0);

// ||Y||_{inf,g} + ||Y'||_{inf,g-a} + |Y'|_{a,g-2a} + |R|_{a,g-a} + |R|_{2a,g-2a},
// all grid suprema; multi-column objects are measured in the Frobenius norm
// over columns.
double controlled_norm(const ControlledPath& cp, const GridRoughPath& driver,
                       const SpectralOperator& op, double alpha, double gamma);

// A vector field H -> L(R^columns, H) given by its columns and the
// directional derivative of each column.
struct VectorField {
    int columns = 1;
    // value(x)[j] = column j at x
    std::function<std::vector<ScaleVector>(const ScaleVector&)> value;
    // directional(x, v)[j] = derivative of column j at x in direction v
    std::function<std::vector<ScaleVector>(const ScaleVector&, const ScaleVector&)> directional;
};

// (Y, Y') -> (G(Y), DG(Y) Y') for a width-1 input path; the result has
// width = field.columns and is controlled by the same driver.
ControlledPath compose_vector_field(const ControlledPath& cp, const VectorField& field);

} // namespace roughmill

#endif
