#pragma once

#include <string>
#include <vector>

#include "ihgp/linalg.hpp"

namespace ihgp {

struct TimeSeries {
  Vector t;
  Vector y;  // NaN = missing
};

/// Read a `t,y` CSV (header required; empty/nan y fields are missing).
TimeSeries read_series(const std::string& path);

/// Verify t is equidistant within the relative jitter tolerance and return
/// the step. Throws InputError naming the first offending row.
double check_equidistant(const Vector& t, double rel_tol = 1e-6);

/// Timestamps from a one-column CSV (extra columns ignored, header optional).
std::vector<double> read_timestamps(const std::string& path);

/// Shortest round-trip decimal representation; NaN renders empty.
std::string format_double(double value);

void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<Vector>& columns);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);

}  // namespace ihgp
