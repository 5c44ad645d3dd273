#include <chrono>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "whittle/diagnostics.hpp"
#include "whittle/estimator.hpp"
#include "whittle/io.hpp"
#include "whittle/parallel.hpp"
#include "whittle/simulate.hpp"

namespace {

using whittle::BiasMethod;
using whittle::DetrendMode;
using whittle::FitConfig;
using whittle::GridFile;
using whittle::GridSpec;
using whittle::MaternParams;
using whittle::SimConfig;
using whittle::UqMethod;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitNoConvergence = 2;

bool g_quiet = false;

void info(const std::string& msg) {
  if (!g_quiet) std::cerr << msg << "\n";
}

std::vector<double> parse_doubles(const std::string& s, char sep = ',') {
  std::vector<double> out;
  std::istringstream in(s);
  std::string cell;
  while (std::getline(in, cell, sep)) out.push_back(std::stod(cell));
  return out;
}

MaternParams parse_params(const std::string& s) {
  const auto v = parse_doubles(s);
  if (v.size() != 3)
    throw CLI::ValidationError("--params", "expected sigma2,nu,rho");
  MaternParams p{v[0], v[1], v[2]};
  p.require_valid();
  return p;
}

DetrendMode parse_detrend(const std::string& s) {
  if (s == "none") return DetrendMode::none;
  if (s == "mean") return DetrendMode::mean;
  if (s == "plane") return DetrendMode::plane;
  throw CLI::ValidationError("--detrend", "expected none|mean|plane");
}

double parse_taper(const std::string& s) {
  if (s == "none") return 0.0;
  if (s.rfind("cosine:", 0) == 0) return std::stod(s.substr(7));
  throw CLI::ValidationError("--taper", "expected none|cosine:FRACTION");
}

void write_text(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open output " + path);
  out << text;
}

struct FitFlags {
  std::string input, meta, output;
  std::string detrend = "mean", taper = "none", mask = "all";
  std::string winsorize, init = "auto", uq = "diagonal";
  double level = 0.95;
  std::uint64_t seed = 0;
  bool fill_nonfinite = false;
  int threads = whittle::default_threads();
};

int run_fit(const FitFlags& f) {
  const auto t0 = std::chrono::steady_clock::now();
  GridFile grid = whittle::read_grid(f.input, f.meta, f.fill_nonfinite);

  if (!f.winsorize.empty()) {
    const auto pct = parse_doubles(f.winsorize);
    if (pct.size() != 2)
      throw CLI::ValidationError("--winsorize", "expected LO,HI percentiles");
    grid.values = whittle::winsorize(grid.values, pct[0], pct[1]);
  }

  FitConfig config;
  config.detrend = parse_detrend(f.detrend);
  config.taper_fraction = parse_taper(f.taper);
  if (f.mask == "disk")
    config.use_disk_mask = true;
  else if (f.mask != "all")
    throw CLI::ValidationError("--mask", "expected all|disk");
  if (f.init != "auto") config.init = parse_params(f.init);
  if (f.uq == "diagonal")
    config.uq = UqMethod::per_diagonal;
  else if (f.uq == "dftmtx")
    config.uq = UqMethod::dft_matrix;
  else if (f.uq == "none")
    config.uq = UqMethod::none;
  else if (f.uq.rfind("sampling:", 0) == 0) {
    config.uq = UqMethod::sampling;
    config.sampling_replicates = std::stol(f.uq.substr(9));
  } else
    throw CLI::ValidationError("--uq",
                               "expected diagonal|dftmtx|sampling:R|none");
  config.level = f.level;
  config.seed = f.seed;

  if (config.uq == UqMethod::dft_matrix && grid.spec.size() > 64 * 64) {
    std::cerr << "error: --uq dftmtx exceeds the dense-method size guard "
                 "(64x64); use --uq diagonal\n";
    return kExitUsage;
  }

  info("fitting " + std::to_string(grid.spec.m) + "x" +
       std::to_string(grid.spec.n) + " grid");
  const whittle::FitResult result = whittle::fit(grid.values, grid.spec,
                                                 config);
  const double wall =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  const nlohmann::json doc = whittle::result_to_json(
      result, whittle::sha256_file(f.input), f.input, f.seed, wall);
  write_text(f.output, doc.dump(2) + "\n");
  if (!result.converged) {
    std::cerr << "error: optimizer did not converge (grad norm "
              << result.trace.final_grad_norm << " after "
              << result.trace.iterations << " iterations, "
              << result.trace.restarts_used << " restarts)\n";
    return kExitNoConvergence;
  }
  info(std::string("model ") +
       (result.residual_test.reject ? "rejected" : "accepted") +
       " at level " + std::to_string(f.level));
  return kExitOk;
}

struct SimulateFlags {
  std::string params, grid, spacing = "1,1", method = "spectral";
  std::string output, meta_out, policy = "error";
  std::uint64_t seed = 0;
  int oversample = 4;
};

int run_simulate(const SimulateFlags& f) {
  const MaternParams theta = parse_params(f.params);
  const auto xpos = f.grid.find('x');
  if (xpos == std::string::npos)
    throw CLI::ValidationError("--grid", "expected MxN");
  GridSpec spec;
  spec.m = std::stol(f.grid.substr(0, xpos));
  spec.n = std::stol(f.grid.substr(xpos + 1));
  const auto sp = parse_doubles(f.spacing);
  if (sp.size() == 1) {
    spec.dx = spec.dy = sp[0];
  } else if (sp.size() == 2) {
    spec.dx = sp[0];
    spec.dy = sp[1];
  } else
    throw CLI::ValidationError("--spacing", "expected dx[,dy]");
  spec.require_valid();

  SimConfig config;
  config.seed = f.seed;
  config.oversample = f.oversample;
  if (f.method == "spectral")
    config.method = SimConfig::Method::spectral;
  else if (f.method == "circulant")
    config.method = SimConfig::Method::circulant;
  else
    throw CLI::ValidationError("--method", "expected spectral|circulant");
  if (f.policy == "clip")
    config.policy = SimConfig::EmbeddingPolicy::clip_eigenvalues;
  else if (f.policy != "error")
    throw CLI::ValidationError("--policy", "expected error|clip");

  const whittle::FieldSample sample = whittle::simulate(theta, spec, config);
  if (sample.clipped_mass > 0.0)
    info("embedding eigenvalues clipped, relative mass " +
         std::to_string(sample.clipped_mass));
  GridFile grid{spec, "unknown", sample.values};
  const std::string meta =
      f.meta_out.empty() ? f.output + ".json" : f.meta_out;
  whittle::write_grid(grid, f.output, meta);
  info("wrote " + f.output + " and " + meta);
  return kExitOk;
}

struct TestFlags {
  std::string input, meta, result, params;
  std::string detrend = "mean", taper = "none", mask = "all";
  std::string output, csv_prefix;
  double level = 0.95;
  bool one_sided = false;
  bool fill_nonfinite = false;
};

int run_test(const TestFlags& f) {
  MaternParams theta;
  if (!f.params.empty()) {
    theta = parse_params(f.params);
  } else if (!f.result.empty()) {
    std::ifstream in(f.result);
    if (!in) throw std::runtime_error("cannot open result file " + f.result);
    const nlohmann::json doc = nlohmann::json::parse(in);
    theta = MaternParams{doc.at("theta_hat").at("sigma2").get<double>(),
                         doc.at("theta_hat").at("nu").get<double>(),
                         doc.at("theta_hat").at("rho").get<double>()};
  } else {
    std::cerr << "error: supply --params or --result\n";
    return kExitUsage;
  }

  GridFile grid = whittle::read_grid(f.input, f.meta, f.fill_nonfinite);
  const Eigen::ArrayXXd prepared =
      whittle::detrend(grid.values, grid.spec, parse_detrend(f.detrend));
  const double taper = parse_taper(f.taper);
  const whittle::Window w =
      taper > 0.0 ? whittle::cosine_squared_taper(grid.spec, taper)
                  : whittle::unit_window(grid.spec);
  std::optional<whittle::MaskArray> mask;
  if (f.mask == "disk") mask = whittle::disk_mask(grid.spec);
  const whittle::LikelihoodContext ctx(prepared, w, mask);
  const whittle::ResidualReport rep =
      whittle::model_test(theta, ctx, f.level, f.one_sided);

  const nlohmann::json doc{{"count", rep.count},
                           {"mean_x", rep.mean_x},
                           {"var_x", rep.var_x},
                           {"s2x", rep.s2x},
                           {"null_sd", rep.null_sd},
                           {"z", rep.z},
                           {"p_value", rep.p_value},
                           {"level", rep.level},
                           {"reject", rep.reject},
                           {"one_sided", rep.one_sided},
                           {"normal_guard_ok", rep.normal_guard_ok}};
  write_text(f.output, doc.dump(2) + "\n");

  if (!f.csv_prefix.empty()) {
    std::vector<double> values;
    for (Eigen::Index j = 0; j < rep.x.rows(); ++j)
      for (Eigen::Index i = 0; i < rep.x.cols(); ++i)
        if (ctx.mask()(j, i)) values.push_back(rep.x(j, i));
    Eigen::VectorXd samples =
        Eigen::Map<Eigen::VectorXd>(values.data(),
                                    static_cast<Eigen::Index>(values.size()));
    const whittle::HistogramQQ hq = whittle::distribution_products(
        samples, whittle::ReferenceDistribution::chi2_2);
    {
      std::ofstream out(f.csv_prefix + "_hist.csv");
      out << "bin_center,density\n";
      for (Eigen::Index b = 0; b < hq.histogram.rows(); ++b)
        out << hq.histogram(b, 0) << "," << hq.histogram(b, 1) << "\n";
    }
    {
      std::ofstream out(f.csv_prefix + "_qq.csv");
      out << "theoretical,empirical\n";
      for (Eigen::Index i = 0; i < hq.qq.rows(); ++i)
        out << hq.qq(i, 0) << "," << hq.qq(i, 1) << "\n";
    }
    {
      std::ofstream out(f.csv_prefix + "_map.csv");
      for (Eigen::Index j = 0; j < rep.x.rows(); ++j) {
        for (Eigen::Index i = 0; i < rep.x.cols(); ++i)
          out << rep.x(j, i) << (i + 1 < rep.x.cols() ? "," : "");
        out << "\n";
      }
    }
    info("wrote " + f.csv_prefix + "_{hist,qq,map}.csv");
  }
  return kExitOk;
}

struct BiasFlags {
  std::string params, sizes, methods = "full-covariance,blurred-likelihood,full-likelihood";
  std::string output;
  double spacing = 1.0;
};

int run_bias_predict(const BiasFlags& f) {
  const MaternParams theta = parse_params(f.params);
  std::vector<Eigen::Index> sizes;
  if (!f.sizes.empty())
    for (double v : parse_doubles(f.sizes))
      sizes.push_back(static_cast<Eigen::Index>(v));
  std::vector<std::pair<std::string, BiasMethod>> methods;
  {
    std::istringstream in(f.methods);
    std::string name;
    while (std::getline(in, name, ',')) {
      if (name == "full-covariance")
        methods.emplace_back(name, BiasMethod::full_covariance);
      else if (name == "blurred-likelihood")
        methods.emplace_back(name, BiasMethod::blurred_likelihood);
      else if (name == "full-likelihood")
        methods.emplace_back(name, BiasMethod::full_likelihood);
      else
        throw CLI::ValidationError("--methods", "unknown method " + name);
    }
  }
  std::ostringstream out;
  out << "size";
  for (const auto& [name, method] : methods) out << "," << name;
  out << "\n";
  out.precision(17);
  for (Eigen::Index size : sizes) {
    const GridSpec spec{size, size, f.spacing, f.spacing};
    out << size;
    for (const auto& [name, method] : methods)
      out << "," << whittle::sample_variance_bias(theta, spec, method);
    out << "\n";
  }
  write_text(f.output, out.str());
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Spectral Matern estimation for gridded fields"};
  app.require_subcommand(1);
  app.add_flag("--quiet", g_quiet, "suppress progress logs on stderr");

  FitFlags fit;
  auto* cfit = app.add_subcommand("fit", "estimate parameters from a grid");
  cfit->add_option("--input", fit.input)->required();
  cfit->add_option("--meta", fit.meta)->required();
  cfit->add_option("--detrend", fit.detrend);
  cfit->add_option("--taper", fit.taper);
  cfit->add_option("--mask", fit.mask);
  cfit->add_option("--winsorize", fit.winsorize);
  cfit->add_option("--init", fit.init);
  cfit->add_option("--uq", fit.uq);
  cfit->add_option("--level", fit.level);
  cfit->add_option("--output", fit.output);
  cfit->add_option("--seed", fit.seed);
  cfit->add_option("--threads", fit.threads);
  cfit->add_flag("--fill-nonfinite", fit.fill_nonfinite);

  SimulateFlags sim;
  auto* csim = app.add_subcommand("simulate", "draw a random field");
  csim->add_option("--params", sim.params)->required();
  csim->add_option("--grid", sim.grid)->required();
  csim->add_option("--spacing", sim.spacing);
  csim->add_option("--method", sim.method);
  csim->add_option("--seed", sim.seed);
  csim->add_option("--oversample", sim.oversample);
  csim->add_option("--policy", sim.policy);
  csim->add_option("--output", sim.output)->required();
  csim->add_option("--meta-out", sim.meta_out);

  TestFlags test;
  auto* ctest = app.add_subcommand("test", "residual model test");
  ctest->add_option("--input", test.input)->required();
  ctest->add_option("--meta", test.meta)->required();
  ctest->add_option("--result", test.result);
  ctest->add_option("--params", test.params);
  ctest->add_option("--detrend", test.detrend);
  ctest->add_option("--taper", test.taper);
  ctest->add_option("--mask", test.mask);
  ctest->add_option("--level", test.level);
  ctest->add_flag("--one-sided", test.one_sided);
  ctest->add_option("--output", test.output);
  ctest->add_option("--csv-prefix", test.csv_prefix);
  ctest->add_flag("--fill-nonfinite", test.fill_nonfinite);

  BiasFlags bias;
  auto* cbias =
      app.add_subcommand("bias-predict", "sample-variance bias table");
  cbias->add_option("--params", bias.params)->required();
  cbias->add_option("--sizes", bias.sizes);
  cbias->add_option("--spacing", bias.spacing);
  cbias->add_option("--methods", bias.methods);
  cbias->add_option("--output", bias.output);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (cfit->parsed()) return run_fit(fit);
    if (csim->parsed()) return run_simulate(sim);
    if (ctest->parsed()) return run_test(test);
    if (cbias->parsed()) return run_bias_predict(bias);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  return kExitUsage;
}
