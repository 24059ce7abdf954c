#ifndef ROUGHMILL_STOCHASTIC_DRIVERS_HPP
#define ROUGHMILL_STOCHASTIC_DRIVERS_HPP

#include <cstdint>
#include <functional>
#include <random>
#include <vector>

#include "roughmill/rough_path.hpp"

namespace roughmill {

// Named sub-streams of the counter-based seeding scheme
// (master_seed, replica_id, stream_id).  The auxiliary averaging noise is
// kept disjoint from the system drivers by construction.
enum class Stream : std::uint64_t {
    slow_driver = 1,   // B
    fast_driver = 2,   // W
    frozen_driver = 3, // W-tilde of the frozen equation
    probe = 4,         // model probing / property-test inputs
};

std::mt19937_64 make_rng(std::uint64_t master_seed, std::uint64_t replica_id, Stream stream);

// Standard normal sampler with a fully pinned-down algorithm (Box-Muller on
// mt19937_64 words) so replays are bit-identical across standard libraries.
class GaussianSampler {
public:
    explicit GaussianSampler(std::mt19937_64 gen) : gen_(gen) {}
    GaussianSampler(std::uint64_t master_seed, std::uint64_t replica_id, Stream stream)
        : gen_(make_rng(master_seed, replica_id, stream)) {}

    double operator()();

private:
    std::mt19937_64 gen_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

// Fine increments underlying a sampled lift: substeps-per-step Gaussian
// increments kept so that cross areas against another driver can be formed
// on the same refinement.
struct SubstepRecord {
    int substeps = 0;               // M
    int dim = 0;
    std::vector<double> increments; // n_steps * M * dim

    double inc(int step, int j, int i) const {
        return increments[(static_cast<size_t>(step) * substeps + j) * dim + i];
    }
};

// Ito lift of a d-dimensional Brownian motion on the given grid.
// Level one: Gaussian increments of variance (t_{k+1}-t_k) per coordinate.
// Level two per step: off-diagonal entries by left-point substep sums over
// M substeps; diagonal entries set exactly to ((dW^i)^2 - dt)/2.
GridRoughPath sample_ito_brownian_lift(GaussianSampler& g,
                                       const std::vector<double>& times, int dim,
                                       int substeps, SubstepRecord* record = nullptr);

// Canonical lift of a smooth path: level one from point values, step areas
// by composite Simpson quadrature (quad_panels panels per step) of the
// iterated integral; derivative supplied or by central differences.
GridRoughPath canonical_smooth_lift(
    const std::function<std::vector<double>(double)>& f,
    const std::vector<double>& times, int dim, int quad_panels,
    const std::function<std::vector<double>(double)>& fprime = nullptr);

// Joint lift over R^{d1+d2} from two lifts sharing a grid and substep
// refinement.  Diagonal blocks reuse the per-step areas of B and W; the
// B-rows/W-columns block is the left-point substep sum of B against dW and
// the opposite block is fixed by integration by parts:
//   area(W^i, B^j) = W^i_{s,t} B^j_{s,t} - area(B^j, W^i).
GridRoughPath build_mixed_lift(const GridRoughPath& B, const GridRoughPath& W,
                               const SubstepRecord& recB, const SubstepRecord& recW);

} // namespace roughmill

#endif
