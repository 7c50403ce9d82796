#pragma once

// Output formatting and file handling for the command-line tools.
//
//  * Doubles are rendered with std::to_chars (shortest representation
//    that round-trips exactly).
//  * CSV schemas are fixed and documented next to each builder; fields
//    never need quoting (no commas or newlines occur in any cell).
//  * Files are written atomically: content goes to a sibling temp file
//    which is then renamed over the target, so readers never observe a
//    partially written file.

#include <array>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <span>
#include <string>
#include <vector>

#include "clocksync/analytics.hpp"
#include "clocksync/common.hpp"
#include "clocksync/model.hpp"
#include "clocksync/phase.hpp"
#include "clocksync/stats.hpp"

namespace clocksync::io {

// Shortest decimal string that parses back to exactly the same double.
inline std::string format_double(double v) {
  std::array<char, 64> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  require(res.ec == std::errc(), errc::io, "format_double: conversion failed");
  return std::string(buf.data(), res.ptr);
}

// Renders NaN (and infinities) as an empty field; used for standard
// errors of single-replica ensembles and undefined z-scores.
inline std::string format_optional(double v) {
  return std::isfinite(v) ? format_double(v) : std::string();
}

// ---------------------------------------------------------------------------
// CSV builders. All return the complete file content including the header
// line; rows end with '\n'.
// ---------------------------------------------------------------------------

// Schema: t,R_mean,R_se,D_mean,D_se,d_mean,d_se,replicas
// SE fields are empty when the ensemble has a single replica.
inline std::string ensemble_csv(const EnsembleStats& st) {
  std::string out = "t,R_mean,R_se,D_mean,D_se,d_mean,d_se,replicas\n";
  for (std::size_t i = 0; i < st.size(); ++i) {
    out += format_double(st.times[i]);
    out += ',';
    out += format_double(st.R_mean[i]);
    out += ',';
    out += format_optional(st.R_se[i]);
    out += ',';
    out += format_double(st.D_mean[i]);
    out += ',';
    out += format_optional(st.D_se[i]);
    out += ',';
    out += format_double(st.d_mean[i]);
    out += ',';
    out += format_optional(st.d_se[i]);
    out += ',';
    out += std::to_string(st.replicas);
    out += '\n';
  }
  return out;
}

// Schema: t,R,D,d
// With `limits` non-null, two extra rows are appended whose t column holds
// the literals stationary_exact and stationary_asymptotic.
inline std::string moments_csv(std::span<const double> times,
                               std::span<const MomentVector> moments,
                               const StationaryLimits* limits = nullptr) {
  require(times.size() == moments.size(), errc::invalid_input,
          "moments_csv: size mismatch");
  std::string out = "t,R,D,d\n";
  for (std::size_t i = 0; i < times.size(); ++i) {
    out += format_double(times[i]);
    out += ',';
    out += format_double(moments[i].R);
    out += ',';
    out += format_double(moments[i].D);
    out += ',';
    out += format_double(moments[i].d);
    out += '\n';
  }
  if (limits != nullptr) {
    const auto row = [&out](const char* kind, const MomentVector& m) {
      out += kind;
      out += ',';
      out += format_double(m.R);
      out += ',';
      out += format_double(m.D);
      out += ',';
      out += format_double(m.d);
      out += '\n';
    };
    row("stationary_exact", limits->exact);
    row("stationary_asymptotic", limits->asymptotic);
  }
  return out;
}

// Schema: kind,R,D,d  with kind in {exact, asymptotic}.
inline std::string limits_csv(const StationaryLimits& lim) {
  std::string out = "kind,R,D,d\n";
  const auto row = [&out](const char* kind, const MomentVector& m) {
    out += kind;
    out += ',';
    out += format_double(m.R);
    out += ',';
    out += format_double(m.D);
    out += ',';
    out += format_double(m.d);
    out += '\n';
  };
  row("exact", lim.exact);
  row("asymptotic", lim.asymptotic);
  return out;
}

// Schema: t,metric,sim_mean,sim_se,closed,z  with metric in {R, D, d}.
// One row per observation time and metric; z is empty when no finite
// standard error exists (single replica).
inline std::string compare_csv(const EnsembleStats& st,
                               std::span<const MomentVector> closed) {
  require(closed.size() == st.size(), errc::invalid_input,
          "compare_csv: size mismatch");
  std::string out = "t,metric,sim_mean,sim_se,closed,z\n";
  for (std::size_t i = 0; i < st.size(); ++i) {
    const auto row = [&](const char* metric, double mean, double se,
                         double cl) {
      out += format_double(st.times[i]);
      out += ',';
      out += metric;
      out += ',';
      out += format_double(mean);
      out += ',';
      out += format_optional(se);
      out += ',';
      out += format_double(cl);
      out += ',';
      out += format_optional((mean - cl) / se);
      out += '\n';
    };
    row("R", st.R_mean[i], st.R_se[i], closed[i].R);
    row("D", st.D_mean[i], st.D_se[i], closed[i].D);
    row("d", st.d_mean[i], st.d_se[i], closed[i].d);
  }
  return out;
}

// Schema: gamma,N,t,D_closed,predicted_psi,fitted_slope,label
// The predicted exponent, fitted slope, and phase label describe the whole
// curve and repeat on every row.
inline std::string phase_scan_csv(double gamma,
                                  std::span<const ScalePoint> points,
                                  double predicted_psi, double fitted_slope,
                                  const std::string& label) {
  std::string out = "gamma,N,t,D_closed,predicted_psi,fitted_slope,label\n";
  for (const auto& pt : points) {
    out += format_double(gamma);
    out += ',';
    out += std::to_string(pt.N);
    out += ',';
    out += format_double(pt.t);
    out += ',';
    out += format_double(pt.closed.D);
    out += ',';
    out += format_double(predicted_psi);
    out += ',';
    out += format_double(fitted_slope);
    out += ',';
    out += label;
    out += '\n';
  }
  return out;
}

// ---------------------------------------------------------------------------
// File output.
// ---------------------------------------------------------------------------

// Atomic write: temp file in the same directory, flushed, then renamed
// over the target.
inline void write_file_atomic(const std::string& path,
                              const std::string& content) {
  require(!path.empty(), errc::io, "write_file_atomic: empty path");
  const std::string tmp = path + ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    require(f.good(), errc::io, "write_file_atomic: cannot open " + tmp);
    f.write(content.data(), static_cast<std::streamsize>(content.size()));
    f.flush();
    require(f.good(), errc::io, "write_file_atomic: write failed for " + tmp);
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    fail(errc::io, "write_file_atomic: rename failed for " + path);
  }
}

// Writes to the given path atomically, or to stdout when the path is empty.
inline void write_output(const std::string& path, const std::string& content) {
  if (path.empty()) {
    std::fputs(content.c_str(), stdout);
    return;
  }
  write_file_atomic(path, content);
}

}  // namespace clocksync::io
