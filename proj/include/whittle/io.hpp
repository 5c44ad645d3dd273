#ifndef WHITTLE_IO_HPP
#define WHITTLE_IO_HPP

#include <cstdint>
#include <string>

#include <nlohmann/json.hpp>

#include "whittle/estimator.hpp"
#include "whittle/grid.hpp"

namespace whittle {

inline constexpr int kSchemaVersion = 1;
inline constexpr const char* kSoftwareVersion = "0.1.0";

struct GridFile {
  GridSpec spec;
  std::string units = "unknown";
  Eigen::ArrayXXd values;  // n rows by m cols, row-major on disk
};

/// Read a grid from a JSON sidecar plus payload. Binary payloads are raw
/// little-endian f64, row-major; a ".csv" payload is parsed as n rows of m
/// comma-separated values. Non-finite samples are an error unless
/// `fill_nonfinite`, which replaces them by the mean of the finite samples.
GridFile read_grid(const std::string& data_path, const std::string& meta_path,
                   bool fill_nonfinite = false);

/// Write the binary payload and its sidecar.
void write_grid(const GridFile& grid, const std::string& data_path,
                const std::string& meta_path);

std::string sha256_bytes(const void* data, std::size_t size);
std::string sha256_file(const std::string& path);

/// Full result document: provenance, estimates, uncertainty, residual test.
nlohmann::json result_to_json(const FitResult& fit, const std::string& input_hash,
                              const std::string& input_path,
                              std::uint64_t seed, double wall_seconds);

/// Schema and internal-consistency check (std errors, correlations, interval
/// bounds and percent uncertainties against the covariance, 1e-9).
bool validate_result(const nlohmann::json& doc, std::string* error = nullptr);

}  // namespace whittle

#endif
