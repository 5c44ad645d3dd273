#include "whittle/io.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <iomanip>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "whittle/stats.hpp"

namespace whittle {

namespace {
using nlohmann::json;

// Compact SHA-256 (FIPS 180-4), enough for file provenance hashes.
struct Sha256 {
  std::array<std::uint32_t, 8> h{0x6a09e667u, 0xbb67ae85u, 0x3c6ef372u,
                                 0xa54ff53au, 0x510e527fu, 0x9b05688cu,
                                 0x1f83d9abu, 0x5be0cd19u};
  std::array<std::uint8_t, 64> block{};
  std::uint64_t total = 0;
  std::size_t fill = 0;

  static std::uint32_t rotr(std::uint32_t x, int n) {
    return (x >> n) | (x << (32 - n));
  }

  void compress(const std::uint8_t* p) {
    static constexpr std::uint32_t k[64] = {
        0x428a2f98, 0x71374491, 0xb5c0fbcf, 0xe9b5dba5, 0x3956c25b,
        0x59f111f1, 0x923f82a4, 0xab1c5ed5, 0xd807aa98, 0x12835b01,
        0x243185be, 0x550c7dc3, 0x72be5d74, 0x80deb1fe, 0x9bdc06a7,
        0xc19bf174, 0xe49b69c1, 0xefbe4786, 0x0fc19dc6, 0x240ca1cc,
        0x2de92c6f, 0x4a7484aa, 0x5cb0a9dc, 0x76f988da, 0x983e5152,
        0xa831c66d, 0xb00327c8, 0xbf597fc7, 0xc6e00bf3, 0xd5a79147,
        0x06ca6351, 0x14292967, 0x27b70a85, 0x2e1b2138, 0x4d2c6dfc,
        0x53380d13, 0x650a7354, 0x766a0abb, 0x81c2c92e, 0x92722c85,
        0xa2bfe8a1, 0xa81a664b, 0xc24b8b70, 0xc76c51a3, 0xd192e819,
        0xd6990624, 0xf40e3585, 0x106aa070, 0x19a4c116, 0x1e376c08,
        0x2748774c, 0x34b0bcb5, 0x391c0cb3, 0x4ed8aa4a, 0x5b9cca4f,
        0x682e6ff3, 0x748f82ee, 0x78a5636f, 0x84c87814, 0x8cc70208,
        0x90befffa, 0xa4506ceb, 0xbef9a3f7, 0xc67178f2};
    std::uint32_t w[64];
    for (int i = 0; i < 16; ++i)
      w[i] = (std::uint32_t(p[4 * i]) << 24) |
             (std::uint32_t(p[4 * i + 1]) << 16) |
             (std::uint32_t(p[4 * i + 2]) << 8) | std::uint32_t(p[4 * i + 3]);
    for (int i = 16; i < 64; ++i) {
      const std::uint32_t s0 =
          rotr(w[i - 15], 7) ^ rotr(w[i - 15], 18) ^ (w[i - 15] >> 3);
      const std::uint32_t s1 =
          rotr(w[i - 2], 17) ^ rotr(w[i - 2], 19) ^ (w[i - 2] >> 10);
      w[i] = w[i - 16] + s0 + w[i - 7] + s1;
    }
    auto v = h;
    for (int i = 0; i < 64; ++i) {
      const std::uint32_t s1 = rotr(v[4], 6) ^ rotr(v[4], 11) ^ rotr(v[4], 25);
      const std::uint32_t ch = (v[4] & v[5]) ^ (~v[4] & v[6]);
      const std::uint32_t t1 = v[7] + s1 + ch + k[i] + w[i];
      const std::uint32_t s0 = rotr(v[0], 2) ^ rotr(v[0], 13) ^ rotr(v[0], 22);
      const std::uint32_t mj = (v[0] & v[1]) ^ (v[0] & v[2]) ^ (v[1] & v[2]);
      const std::uint32_t t2 = s0 + mj;
      v[7] = v[6];
      v[6] = v[5];
      v[5] = v[4];
      v[4] = v[3] + t1;
      v[3] = v[2];
      v[2] = v[1];
      v[1] = v[0];
      v[0] = t1 + t2;
    }
    for (int i = 0; i < 8; ++i) h[i] += v[i];
  }

  void update(const void* data, std::size_t size) {
    const auto* p = static_cast<const std::uint8_t*>(data);
    total += size;
    while (size > 0) {
      const std::size_t take = std::min(size, block.size() - fill);
      std::memcpy(block.data() + fill, p, take);
      fill += take;
      p += take;
      size -= take;
      if (fill == block.size()) {
        compress(block.data());
        fill = 0;
      }
    }
  }

  std::string hex() {
    const std::uint64_t bits = total * 8;
    const std::uint8_t one = 0x80;
    update(&one, 1);
    const std::uint8_t zero = 0;
    while (fill != 56) update(&zero, 1);
    std::uint8_t len[8];
    for (int i = 0; i < 8; ++i) len[i] = std::uint8_t(bits >> (56 - 8 * i));
    update(len, 8);
    std::ostringstream out;
    out << std::hex << std::setfill('0');
    for (std::uint32_t word : h) out << std::setw(8) << word;
    return out.str();
  }
};

bool ends_with(const std::string& s, const std::string& suffix) {
  return s.size() >= suffix.size() &&
         s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

const char* detrend_name(DetrendMode mode) {
  switch (mode) {
    case DetrendMode::none: return "none";
    case DetrendMode::mean: return "mean";
    case DetrendMode::plane: return "plane";
  }
  return "unknown";
}

json matrix_json(const Eigen::Matrix3d& m) {
  json rows = json::array();
  for (int i = 0; i < 3; ++i)
    rows.push_back({m(i, 0), m(i, 1), m(i, 2)});
  return rows;
}

bool close9(double a, double b) {
  return std::abs(a - b) <= 1e-9 * (1.0 + std::max(std::abs(a), std::abs(b)));
}
}  // namespace

std::string sha256_bytes(const void* data, std::size_t size) {
  Sha256 s;
  s.update(data, size);
  return s.hex();
}

std::string sha256_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("sha256_file: cannot open " + path);
  Sha256 s;
  char buf[65536];
  while (in.read(buf, sizeof buf) || in.gcount() > 0)
    s.update(buf, static_cast<std::size_t>(in.gcount()));
  return s.hex();
}

GridFile read_grid(const std::string& data_path, const std::string& meta_path,
                   bool fill_nonfinite) {
  std::ifstream meta_in(meta_path);
  if (!meta_in)
    throw std::runtime_error("read_grid: cannot open sidecar " + meta_path);
  json meta;
  try {
    meta = json::parse(meta_in);
  } catch (const json::parse_error& e) {
    throw std::runtime_error("read_grid: malformed sidecar: " +
                             std::string(e.what()));
  }
  for (const char* field : {"m", "n", "dx", "dy"})
    if (!meta.contains(field))
      throw std::runtime_error(std::string("read_grid: sidecar missing \"") +
                               field + "\"");
  GridFile grid;
  grid.spec = GridSpec{meta.at("m").get<Eigen::Index>(),
                       meta.at("n").get<Eigen::Index>(),
                       meta.at("dx").get<double>(), meta.at("dy").get<double>()};
  grid.spec.require_valid();
  grid.units = meta.value("units", "unknown");
  if (meta.value("value_type", "f64") != "f64")
    throw std::runtime_error("read_grid: only f64 payloads supported");
  if (meta.value("byte_order", "little") != "little")
    throw std::runtime_error("read_grid: only little-endian payloads supported");
  if (meta.value("layout", "row-major") != "row-major")
    throw std::runtime_error("read_grid: only row-major payloads supported");

  const Eigen::Index m = grid.spec.m, n = grid.spec.n;
  grid.values.resize(n, m);
  if (ends_with(data_path, ".csv")) {
    std::ifstream in(data_path);
    if (!in) throw std::runtime_error("read_grid: cannot open " + data_path);
    std::string line;
    for (Eigen::Index j = 0; j < n; ++j) {
      if (!std::getline(in, line))
        throw std::runtime_error("read_grid: csv row count mismatch");
      std::istringstream row(line);
      std::string cell;
      for (Eigen::Index i = 0; i < m; ++i) {
        if (!std::getline(row, cell, ','))
          throw std::runtime_error("read_grid: csv column count mismatch");
        grid.values(j, i) = std::stod(cell);
      }
    }
  } else {
    std::ifstream in(data_path, std::ios::binary | std::ios::ate);
    if (!in) throw std::runtime_error("read_grid: cannot open " + data_path);
    const auto bytes = static_cast<std::uint64_t>(in.tellg());
    if (bytes != 8ull * static_cast<std::uint64_t>(m * n))
      throw std::runtime_error(
          "read_grid: payload length does not match 8*m*n bytes");
    in.seekg(0);
    std::vector<double> buf(static_cast<std::size_t>(m * n));
    in.read(reinterpret_cast<char*>(buf.data()),
            static_cast<std::streamsize>(bytes));
    for (Eigen::Index j = 0; j < n; ++j)
      for (Eigen::Index i = 0; i < m; ++i)
        grid.values(j, i) = buf[static_cast<std::size_t>(j * m + i)];
  }

  if (!grid.values.isFinite().all()) {
    if (!fill_nonfinite)
      throw std::runtime_error(
          "read_grid: non-finite samples present; pass the masking flag to "
          "fill them");
    double sum = 0.0;
    Eigen::Index cnt = 0;
    for (Eigen::Index j = 0; j < n; ++j)
      for (Eigen::Index i = 0; i < m; ++i)
        if (std::isfinite(grid.values(j, i))) {
          sum += grid.values(j, i);
          ++cnt;
        }
    if (cnt == 0)
      throw std::runtime_error("read_grid: no finite samples to fill from");
    const double mean = sum / static_cast<double>(cnt);
    for (Eigen::Index j = 0; j < n; ++j)
      for (Eigen::Index i = 0; i < m; ++i)
        if (!std::isfinite(grid.values(j, i))) grid.values(j, i) = mean;
  }
  return grid;
}

void write_grid(const GridFile& grid, const std::string& data_path,
                const std::string& meta_path) {
  grid.spec.require_valid();
  const Eigen::Index m = grid.spec.m, n = grid.spec.n;
  if (grid.values.rows() != n || grid.values.cols() != m)
    throw std::invalid_argument("write_grid: values shape mismatch");
  {
    std::ofstream out(data_path, std::ios::binary);
    if (!out) throw std::runtime_error("write_grid: cannot open " + data_path);
    std::vector<double> buf(static_cast<std::size_t>(m * n));
    for (Eigen::Index j = 0; j < n; ++j)
      for (Eigen::Index i = 0; i < m; ++i)
        buf[static_cast<std::size_t>(j * m + i)] = grid.values(j, i);
    out.write(reinterpret_cast<const char*>(buf.data()),
              static_cast<std::streamsize>(8ull * buf.size()));
  }
  json meta{{"m", m},
            {"n", n},
            {"dx", grid.spec.dx},
            {"dy", grid.spec.dy},
            {"units", grid.units},
            {"value_type", "f64"},
            {"byte_order", "little"},
            {"layout", "row-major"}};
  std::ofstream out(meta_path);
  if (!out) throw std::runtime_error("write_grid: cannot open " + meta_path);
  out << meta.dump(2) << "\n";
}

nlohmann::json result_to_json(const FitResult& fit,
                              const std::string& input_hash,
                              const std::string& input_path,
                              std::uint64_t seed, double wall_seconds) {
  const double z = normal_quantile(0.5 * (1.0 + fit.level));
  const Eigen::Vector3d center(fit.theta_hat.sigma2, fit.theta_hat.nu,
                               fit.theta_hat.rho);
  json uncertainty{{"available", fit.has_uncertainty}};
  if (fit.has_uncertainty) {
    uncertainty["covariance"] = matrix_json(fit.cov_theta);
    uncertainty["correlations"] = matrix_json(fit.correlations);
    uncertainty["std_errors"] = {fit.std_errors[0], fit.std_errors[1],
                                 fit.std_errors[2]};
    json ci = json::array();
    json pct = json::array();
    for (int i = 0; i < 3; ++i) {
      ci.push_back({fit.ci(i, 0), fit.ci(i, 1)});
      pct.push_back(100.0 * z * fit.std_errors[i] / std::abs(center[i]));
    }
    uncertainty["ci"] = ci;
    uncertainty["percent"] = pct;
    uncertainty["degenerate"] = {fit.ci_degenerate[0], fit.ci_degenerate[1],
                                 fit.ci_degenerate[2]};
  }
  return json{
      {"schema_version", kSchemaVersion},
      {"software", {{"name", "whittle"}, {"version", kSoftwareVersion}}},
      {"input",
       {{"path", input_path},
        {"sha256", input_hash},
        {"detrend", detrend_name(fit.detrend)},
        {"taper_fraction", fit.taper_fraction},
        {"mask", fit.use_disk_mask ? "disk" : "all"}}},
      {"theta_hat",
       {{"sigma2", fit.theta_hat.sigma2},
        {"nu", fit.theta_hat.nu},
        {"rho", fit.theta_hat.rho}}},
      {"loglik", fit.loglik},
      {"score_norm", fit.score_norm},
      {"converged", fit.converged},
      {"level", fit.level},
      {"uncertainty", uncertainty},
      {"residual_test",
       {{"count", fit.residual_test.count},
        {"mean_x", fit.residual_test.mean_x},
        {"var_x", fit.residual_test.var_x},
        {"s2x", fit.residual_test.s2x},
        {"null_sd", fit.residual_test.null_sd},
        {"z", fit.residual_test.z},
        {"p_value", fit.residual_test.p_value},
        {"reject", fit.residual_test.reject},
        {"one_sided", fit.residual_test.one_sided},
        {"normal_guard_ok", fit.residual_test.normal_guard_ok}}},
      {"seed", seed},
      {"wall_seconds", wall_seconds}};
}

bool validate_result(const nlohmann::json& doc, std::string* error) {
  auto fail = [&](const std::string& msg) {
    if (error) *error = msg;
    return false;
  };
  for (const char* field :
       {"schema_version", "software", "input", "theta_hat", "loglik",
        "score_norm", "converged", "level", "uncertainty", "residual_test",
        "seed", "wall_seconds"})
    if (!doc.contains(field))
      return fail(std::string("missing field \"") + field + "\"");
  if (doc.at("schema_version").get<int>() != kSchemaVersion)
    return fail("unsupported schema_version");
  const auto& th = doc.at("theta_hat");
  for (const char* field : {"sigma2", "nu", "rho"})
    if (!th.contains(field) || !th.at(field).is_number())
      return fail(std::string("theta_hat missing \"") + field + "\"");
  const auto& unc = doc.at("uncertainty");
  if (!unc.value("available", false)) return true;
  for (const char* field :
       {"covariance", "correlations", "std_errors", "ci", "percent"})
    if (!unc.contains(field))
      return fail(std::string("uncertainty missing \"") + field + "\"");

  Eigen::Matrix3d cov;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      cov(i, j) = unc.at("covariance").at(i).at(j).get<double>();
  const Eigen::Vector3d center(th.at("sigma2").get<double>(),
                               th.at("nu").get<double>(),
                               th.at("rho").get<double>());
  const double z = normal_quantile(0.5 * (1.0 + doc.at("level").get<double>()));
  for (int i = 0; i < 3; ++i) {
    const double se = std::sqrt(std::max(cov(i, i), 0.0));
    if (!close9(unc.at("std_errors").at(i).get<double>(), se))
      return fail("std_errors inconsistent with covariance");
    if (!close9(unc.at("ci").at(i).at(0).get<double>(), center[i] - z * se) ||
        !close9(unc.at("ci").at(i).at(1).get<double>(), center[i] + z * se))
      return fail("interval bounds inconsistent with covariance");
    if (!close9(unc.at("percent").at(i).get<double>(),
                100.0 * z * se / std::abs(center[i])))
      return fail("percent uncertainties inconsistent with covariance");
    for (int j = 0; j < 3; ++j) {
      const double denom = std::sqrt(cov(i, i) * cov(j, j));
      if (denom > 0.0 &&
          !close9(unc.at("correlations").at(i).at(j).get<double>(),
                  cov(i, j) / denom))
        return fail("correlations inconsistent with covariance");
    }
  }
  return true;
}

}  // namespace whittle
