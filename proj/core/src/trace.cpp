#include "decomp/trace.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>

namespace decomp {

namespace {

constexpr const char* kHeader =
    "time_s,iteration,lower_bound,upper_bound,oracle_calls,method";

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::stringstream ss(line);
  while (std::getline(ss, field, ',')) out.push_back(field);
  return out;
}

}  // namespace

void write_trace_csv(const BoundTrace& trace, std::ostream& out) {
  out << kHeader << '\n';
  for (const auto& r : trace.records) {
    out << fmt(r.time_s) << ',' << r.iteration << ',' << fmt(r.lower_bound)
        << ',' << fmt(r.upper_bound) << ',' << r.oracle_calls << ','
        << r.method << '\n';
  }
  out << "# terminated: " << trace.termination << '\n';
}

BoundTrace read_trace_csv(std::istream& in) {
  BoundTrace trace;
  std::string line;
  if (!std::getline(in, line)) throw TraceFormatError("empty trace file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kHeader) throw TraceFormatError("unexpected trace header");
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line[0] == '#') {
      const std::string tag = "# terminated: ";
      if (line.rfind(tag, 0) == 0) trace.termination = line.substr(tag.size());
      continue;
    }
    auto fields = split_csv(line);
    if (fields.size() != 6) throw TraceFormatError("malformed trace row");
    TraceRecord r;
    try {
      r.time_s = std::stod(fields[0]);
      r.iteration = std::stoi(fields[1]);
      r.lower_bound = std::stod(fields[2]);
      r.upper_bound = std::stod(fields[3]);
      r.oracle_calls = std::stol(fields[4]);
    } catch (const std::exception&) {
      throw TraceFormatError("malformed trace row");
    }
    r.method = fields[5];
    trace.records.push_back(std::move(r));
  }
  return trace;
}

void save_trace(const BoundTrace& trace, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw TraceFormatError("cannot open trace file for writing: " + path);
  write_trace_csv(trace, out);
}

BoundTrace load_trace(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw TraceFormatError("cannot open trace file: " + path);
  return read_trace_csv(in);
}

std::vector<ResampledPoint> resample_trace(const BoundTrace& trace,
                                           double interval) {
  if (!(interval > 0)) throw std::invalid_argument("interval must be positive");
  const auto& rs = trace.records;
  std::vector<ResampledPoint> out;
  if (rs.empty()) return out;

  auto at = [&](double t) {
    if (t <= rs.front().time_s)
      return ResampledPoint{t, rs.front().lower_bound, rs.front().upper_bound};
    if (t >= rs.back().time_s)
      return ResampledPoint{t, rs.back().lower_bound, rs.back().upper_bound};
    size_t i = 1;
    while (rs[i].time_s < t) ++i;
    const auto& a = rs[i - 1];
    const auto& b = rs[i];
    const double span = b.time_s - a.time_s;
    const double w = span > 0 ? (t - a.time_s) / span : 1.0;
    return ResampledPoint{t, a.lower_bound + w * (b.lower_bound - a.lower_bound),
                          a.upper_bound + w * (b.upper_bound - a.upper_bound)};
  };

  const double end = rs.back().time_s;
  double t = 0.0;
  for (long i = 0; t < end; t = ++i * interval) out.push_back(at(t));
  out.push_back(at(end));
  return out;
}

ConfidenceInterval bootstrap_ci(std::span<const double> samples, int resamples,
                                double level, std::uint64_t seed) {
  if (samples.empty()) throw std::invalid_argument("no samples");
  if (resamples < 1) throw std::invalid_argument("resamples must be >= 1");
  if (!(level > 0 && level < 1)) throw std::invalid_argument("level in (0,1)");

  const size_t n = samples.size();
  ConfidenceInterval ci;
  ci.mean = std::accumulate(samples.begin(), samples.end(), 0.0) /
            static_cast<double>(n);

  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<size_t> pick(0, n - 1);
  std::vector<double> means(resamples);
  for (int b = 0; b < resamples; ++b) {
    double s = 0.0;
    for (size_t i = 0; i < n; ++i) s += samples[pick(rng)];
    means[b] = s / static_cast<double>(n);
  }
  std::sort(means.begin(), means.end());
  auto quantile = [&](double q) {
    const double pos = q * (resamples - 1);
    const size_t lo = static_cast<size_t>(std::floor(pos));
    const size_t hi = std::min<size_t>(lo + 1, resamples - 1);
    const double w = pos - static_cast<double>(lo);
    return means[lo] + w * (means[hi] - means[lo]);
  };
  const double alpha = 1.0 - level;
  ci.lower = quantile(alpha / 2);
  ci.upper = quantile(1.0 - alpha / 2);
  return ci;
}

}  // namespace decomp
