#pragma once

#include <complex>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include <Eigen/Dense>

// Small I/O and runtime helpers shared by the CLI and the studies: CSV tables,
// float64 rasters with JSON sidecars, content hashing for run manifests, and a
// plain thread-pool parallel_for.

namespace wgf::io {

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
  void write(const std::string& path) const;
};

/// Complex field as two little-endian float64 rasters (real, imag) plus a
/// JSON sidecar describing the grid.
void write_raster(const std::string& stem, const Eigen::MatrixXcd& field,
                  const std::string& meta_json);
void write_raster(const std::string& path, const Eigen::MatrixXd& values);

/// SHA-256 of a file's contents, lowercase hex.
std::string sha256_file(const std::string& path);
std::string sha256_bytes(const void* data, size_t n);

/// Least-squares slope of y vs x.
double fit_slope(const std::vector<double>& x, const std::vector<double>& y);

/// Parallel loop over [0, n); worker count from WAVEGREEN_THREADS or
/// hardware_concurrency.  Deterministic as long as iterations are independent.
void parallel_for(std::int64_t n, const std::function<void(std::int64_t)>& body);

}  // namespace wgf::io
