#ifndef ROUGHMILL_CONFIG_HPP
#define ROUGHMILL_CONFIG_HPP

#include <string>

#include "roughmill/slowfast.hpp"

namespace roughmill {

struct ExperimentParams {
    int replicas = 100;
    int threads = 4;
};

// Full run configuration: built-in model family parameters, discretization,
// and experiment-level knobs.  Serialized as flat dotted key = value lines.
struct Config {
    DefaultModelParams model;
    SolverConfig solver;
    ExperimentParams experiment;
};

// Parses "key = value" lines ('#' starts a comment, blank lines ignored).
// Unknown keys and malformed values throw config_error naming the key.
// The result is validated: solver ranges are checked and derived fields
// (delta, micro_substeps) are filled, and the model constraints are checked.
Config parse_config_text(const std::string& text);
Config parse_config_file(const std::string& path);

// Emits every key in a fixed order with full precision, so that
// parse(emit(c)) == c and emit is a fixed point after one round trip.
std::string emit_config(const Config& c);

// Conveniences building the spectral pieces a Config describes.
SpectralOperator make_operator(const Config& c);
ModelSpec make_model(const SpectralOperator& op, const Config& c);

} // namespace roughmill

#endif
