#pragma once

#include "ttrb/rom.hpp"

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace ttrb {

/// Benchmark configuration, read from `key = value` lines:
///   case, M, Nt, T, eps (comma list), n_offline, n_online, seed,
///   method (ttrb | strb | both), theta, out
struct BenchConfig {
  std::string problem = "poisson2d";
  std::size_t cells = 30;
  std::size_t n_steps = 10;
  double final_time = 0.1;
  std::vector<double> eps{1e-2, 1e-3, 1e-4};
  std::size_t n_offline = 20;
  std::size_t n_online = 5;
  std::uint64_t seed = 1;
  std::string method = "both";
  double theta = 0.5;
  std::string out = "out";

  std::vector<Method> methods() const;
  void validate() const;
};

BenchConfig parse_bench_config(const std::string& text);
BenchConfig load_bench_config(const std::string& path);

struct BenchRow {
  std::string problem;
  std::string method;
  double eps = 0.0;
  std::size_t cells = 0;
  std::size_t n_steps = 0;
  double error = 0.0;
  double reduction = 0.0;
  double offline_s = 0.0;
  double online_s = 0.0;
  double fom_s = 0.0;
  std::size_t dim = 0;
  double basis_s = 0.0;   ///< subspace construction only
  std::string failure;    ///< "stage: message" when a stage failed
};

/// Parameters used by the benchmark: Halton points from index 1 offline,
/// seeded uniform points online.
std::vector<Parameter> offline_parameters(const BenchConfig& cfg, const ParameterBox& box);
std::vector<Parameter> online_parameters(const BenchConfig& cfg, const ParameterBox& box);

/// Number of snapshots used for hyper-reduction.
std::size_t hyper_count(const BenchConfig& cfg);

std::vector<BenchRow> run_bench(const BenchConfig& cfg, std::ostream* log = nullptr);

std::string format_number(double x);
std::string csv_header();
void write_csv(std::ostream& os, const std::vector<BenchRow>& rows);
void emit_csv(const std::string& path, const std::vector<BenchRow>& rows);
std::vector<BenchRow> read_csv(std::istream& is);

}  // namespace ttrb
