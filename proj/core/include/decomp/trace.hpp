#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace decomp {

struct TraceRecord {
  double time_s = 0.0;
  int iteration = 0;
  double lower_bound = 0.0;
  double upper_bound = 0.0;
  long oracle_calls = 0;
  std::string method;
};

struct BoundTrace {
  std::vector<TraceRecord> records;
  std::string termination;  // "converged", "time_limit", ...
};

struct TraceFormatError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// CSV with a fixed header, 12 significant digits, and a trailing
/// "# terminated: <reason>" comment line.
void write_trace_csv(const BoundTrace& trace, std::ostream& out);
BoundTrace read_trace_csv(std::istream& in);

void save_trace(const BoundTrace& trace, const std::string& path);
BoundTrace load_trace(const std::string& path);

struct ResampledPoint {
  double time_s = 0.0;
  double lower_bound = 0.0;
  double upper_bound = 0.0;
};

/// Piecewise-linear resampling of the bound curves on a uniform grid
/// (clamped before the first and after the last record); the final record's
/// timestamp is always included.
std::vector<ResampledPoint> resample_trace(const BoundTrace& trace,
                                           double interval);

struct ConfidenceInterval {
  double mean = 0.0;
  double lower = 0.0;
  double upper = 0.0;
};

inline constexpr int kBootstrapResamples = 1000;
inline constexpr double kBootstrapLevel = 0.95;

/// Percentile bootstrap for the mean of `samples`.
ConfidenceInterval bootstrap_ci(std::span<const double> samples,
                                int resamples = kBootstrapResamples,
                                double level = kBootstrapLevel,
                                std::uint64_t seed = 0);

}  // namespace decomp
