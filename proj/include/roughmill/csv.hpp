#ifndef ROUGHMILL_CSV_HPP
#define ROUGHMILL_CSV_HPP

#include <fstream>
#include <string>
#include <vector>

#include "roughmill/hilbert_scale.hpp"
#include "roughmill/rough_path.hpp"

namespace roughmill {

// Every CSV this project emits starts with this schema tag.
inline constexpr const char* kCsvHeader = "# roughmill-csv v1";

// %.*g with enough digits for exact double round-trips when sig = 17.
std::string format_double(double v, int sig = 12);

// Minimal deterministic CSV emitter: schema tag, one header row, data rows.
class CsvWriter {
public:
    CsvWriter(const std::string& path, const std::vector<std::string>& columns);
    void row(const std::vector<std::string>& cells);
    void row(const std::vector<double>& values, int sig = 12);

private:
    std::ofstream out_;
    size_t columns_ = 0;
};

// Replay serialization of a lifted driver.  Layout: schema tag, then
//   kind,rough-path-v1
//   dim,<d>
//   points,<K+1>
// then a data header and one row per grid point: time, d values, and for
// k >= 1 the d*d step areas of the step ending at that point (zeros on the
// first row).  Doubles are written with 17 significant digits so a load
// reproduces the path bit-exactly.
void save_rough_path_csv(const GridRoughPath& p, const std::string& path);
GridRoughPath load_rough_path_csv(const std::string& path);

// Trajectory emission: time plus the mode coefficients per row.
void write_trajectory_csv(const std::string& path, const std::vector<double>& times,
                          const std::vector<ScaleVector>& states);

} // namespace roughmill

#endif
