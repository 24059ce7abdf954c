#ifndef ROUGHMILL_ERRORS_HPP
#define ROUGHMILL_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace roughmill {

// Shape/grid mismatches between vectors, paths, or operators.
struct dimension_error : std::runtime_error {
    explicit dimension_error(const std::string& msg) : std::runtime_error(msg) {}
};

// Grid indices out of range or reversed.
struct index_error : std::out_of_range {
    explicit index_error(const std::string& msg) : std::out_of_range(msg) {}
};

// Invalid configuration value or violated named constraint.
struct config_error : std::runtime_error {
    explicit config_error(const std::string& msg) : std::runtime_error(msg) {}
};

// Non-finite state detected while stepping; message carries the step index.
struct instability_error : std::runtime_error {
    explicit instability_error(const std::string& msg) : std::runtime_error(msg) {}
};

// Block length delta does not land on the macro grid.
struct alignment_error : std::runtime_error {
    explicit alignment_error(const std::string& msg) : std::runtime_error(msg) {}
};

// Requested dyadic depth exceeds the available grid resolution.
struct resolution_error : std::runtime_error {
    explicit resolution_error(const std::string& msg) : std::runtime_error(msg) {}
};

// Fast micro step too large relative to the timescale separation.
struct timescale_error : std::runtime_error {
    explicit timescale_error(const std::string& msg) : std::runtime_error(msg) {}
};

} // namespace roughmill

#endif
