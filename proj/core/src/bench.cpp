#include "ttrb/bench.hpp"

#include "ttrb/io.hpp"
#include "ttrb/problems.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace ttrb {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::size_t parse_size(const std::string& key, const std::string& v) {
  std::size_t pos = 0;
  const unsigned long long x = std::stoull(v, &pos);
  if (pos != v.size() || v.front() == '-') throw std::invalid_argument("bad integer for '" + key + "': " + v);
  return static_cast<std::size_t>(x);
}

double parse_real(const std::string& key, const std::string& v) {
  std::size_t pos = 0;
  const double x = std::stod(v, &pos);
  if (pos != v.size()) throw std::invalid_argument("bad number for '" + key + "': " + v);
  return x;
}

std::vector<double> parse_list(const std::string& key, const std::string& v) {
  std::vector<double> out;
  std::istringstream is(v);
  std::string item;
  while (std::getline(is, item, ',')) {
    const auto b = item.find_first_not_of(" \t");
    const auto e = item.find_last_not_of(" \t");
    if (b == std::string::npos) throw std::invalid_argument("empty entry in '" + key + "'");
    out.push_back(parse_real(key, item.substr(b, e - b + 1)));
  }
  return out;
}

}  // namespace

std::vector<Method> BenchConfig::methods() const {
  if (method == "ttrb") return {Method::TT};
  if (method == "strb") return {Method::ST};
  if (method == "both") return {Method::ST, Method::TT};
  throw std::invalid_argument("method must be ttrb, strb or both");
}

void BenchConfig::validate() const {
  if (problem != "poisson1d" && problem != "poisson2d" && problem != "poisson3d" && problem != "heat3d")
    throw std::invalid_argument("unknown case '" + problem + "'");
  if (cells < 4) throw std::invalid_argument("M must be at least 4");
  if (eps.empty()) throw std::invalid_argument("eps list is empty");
  for (double e : eps)
    if (!(e > 0.0)) throw std::invalid_argument("eps values must be positive");
  if (n_offline == 0 || n_online == 0) throw std::invalid_argument("n_offline and n_online must be positive");
  if (problem == "heat3d" && (n_steps == 0 || !(final_time > 0.0)))
    throw std::invalid_argument("heat3d needs Nt > 0 and T > 0");
  if (!(theta > 0.0 && theta <= 1.0)) throw std::invalid_argument("theta must lie in (0, 1]");
  (void)methods();
}

BenchConfig parse_bench_config(const std::string& text) {
  std::istringstream is(text);
  const Manifest m = parse_manifest(is);
  BenchConfig c;
  for (const auto& [k, v] : m) {
    if (k == "case")
      c.problem = v;
    else if (k == "M")
      c.cells = parse_size(k, v);
    else if (k == "Nt")
      c.n_steps = parse_size(k, v);
    else if (k == "T")
      c.final_time = parse_real(k, v);
    else if (k == "eps")
      c.eps = parse_list(k, v);
    else if (k == "n_offline")
      c.n_offline = parse_size(k, v);
    else if (k == "n_online")
      c.n_online = parse_size(k, v);
    else if (k == "seed")
      c.seed = parse_size(k, v);
    else if (k == "method")
      c.method = v;
    else if (k == "theta")
      c.theta = parse_real(k, v);
    else if (k == "out")
      c.out = v;
    else
      throw std::invalid_argument("unknown configuration key '" + k + "'");
  }
  c.validate();
  return c;
}

BenchConfig load_bench_config(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open configuration " + path);
  std::stringstream ss;
  ss << is.rdbuf();
  return parse_bench_config(ss.str());
}

std::vector<Parameter> offline_parameters(const BenchConfig& cfg, const ParameterBox& box) {
  return halton_points(cfg.n_offline, box, 1);
}

std::vector<Parameter> online_parameters(const BenchConfig& cfg, const ParameterBox& box) {
  return uniform_points(cfg.n_online, box, cfg.seed);
}

std::size_t hyper_count(const BenchConfig& cfg) { return std::min<std::size_t>(30, cfg.n_offline); }

std::vector<BenchRow> run_bench(const BenchConfig& cfg, std::ostream* log) {
  cfg.validate();
  const ProblemSpec spec = make_problem(cfg.problem, cfg.cells, cfg.n_steps, cfg.final_time, cfg.theta);
  const FullOrderModel fom(spec);
  const auto train = offline_parameters(cfg, spec.box);
  const auto test = online_parameters(cfg, spec.box);
  const std::size_t full_dim = fom.spec().space.n_free() * fom.n_time();
  const std::size_t nt = spec.transient() ? spec.n_steps : 0;

  auto t0 = Clock::now();
  const SnapshotSet snaps = generate_snapshots(fom, train, hyper_count(cfg));
  const double snapshot_s = seconds_since(t0);
  if (log) *log << "[offline] " << train.size() << " snapshots in " << snapshot_s << " s\n";

  std::vector<Tensor> reference;
  t0 = Clock::now();
  for (const auto& mu : test) reference.push_back(fom.solve(mu).solution);
  const double fom_s = seconds_since(t0) / static_cast<double>(test.size());

  std::vector<BenchRow> rows;
  for (Method m : cfg.methods()) {
    for (double eps : cfg.eps) {
      BenchRow row;
      row.problem = cfg.problem;
      row.method = m == Method::TT ? "ttrb" : "strb";
      row.eps = eps;
      row.cells = cfg.cells;
      row.n_steps = nt;
      row.fom_s = fom_s;
      const char* stage = "offline";
      try {
        const ReducedModel rom = build_rom(m, fom, snaps, RomOptions{eps, true});
        row.basis_s = rom.basis_seconds;
        row.offline_s = rom.basis_seconds + rom.hyper_seconds + rom.projection_seconds;
        row.dim = rom.dimension();
        row.reduction = reduction_factor(full_dim, row.dim);
        stage = "online";
        std::vector<Tensor> approx;
        t0 = Clock::now();
        for (const auto& mu : test) approx.push_back(online_solve(rom, fom, mu).state);
        row.online_s = seconds_since(t0) / static_cast<double>(test.size());
        stage = "error";
        row.error = error_metric(reference, approx, fom.norm());
      } catch (const std::exception& e) {
        row.failure = std::string(stage) + ": " + e.what();
        row.error = std::numeric_limits<double>::quiet_NaN();
        if (log) *log << "[" << stage << "] " << row.method << " eps=" << eps << " failed: " << e.what() << "\n";
      }
      if (log && row.failure.empty())
        *log << "[online] " << row.method << " eps=" << eps << " dim=" << row.dim << " E=" << row.error << "\n";
      rows.push_back(row);
    }
  }
  return rows;
}

std::string format_number(double x) {
  if (x == 0.0) return "0.000000";
  if (std::isnan(x)) return "nan";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", x);
  return buf;
}

std::string csv_header() { return "case,method,eps,M,Nt,E,RF,offline_s,online_s,fom_s,dim"; }

void write_csv(std::ostream& os, const std::vector<BenchRow>& rows) {
  os << csv_header() << '\n';
  for (const auto& r : rows)
    os << r.problem << ',' << r.method << ',' << format_number(r.eps) << ',' << r.cells << ',' << r.n_steps << ','
       << format_number(r.error) << ',' << format_number(r.reduction) << ',' << format_number(r.offline_s) << ','
       << format_number(r.online_s) << ',' << format_number(r.fom_s) << ',' << r.dim << '\n';
}

void emit_csv(const std::string& path, const std::vector<BenchRow>& rows) {
  if (rows.empty()) throw std::invalid_argument("emit_csv: empty table");
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot write " + path);
  write_csv(os, rows);
  if (!os) throw std::runtime_error("write failed: " + path);
}

std::vector<BenchRow> read_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || line != csv_header()) throw FormatError("unexpected CSV header");
  std::vector<BenchRow> rows;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::istringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) f.push_back(cell);
    if (f.size() != 11) throw FormatError("CSV row with " + std::to_string(f.size()) + " fields");
    BenchRow r;
    r.problem = f[0];
    r.method = f[1];
    r.eps = std::stod(f[2]);
    r.cells = std::stoul(f[3]);
    r.n_steps = std::stoul(f[4]);
    r.error = std::stod(f[5]);
    r.reduction = std::stod(f[6]);
    r.offline_s = std::stod(f[7]);
    r.online_s = std::stod(f[8]);
    r.fom_s = std::stod(f[9]);
    r.dim = std::stoul(f[10]);
    rows.push_back(r);
  }
  return rows;
}

}  // namespace ttrb
