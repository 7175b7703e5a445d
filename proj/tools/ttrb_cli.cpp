#include "ttrb/bench.hpp"
#include "ttrb/problems.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <iomanip>
#include <iostream>

namespace fs = std::filesystem;
using namespace ttrb;

namespace {

struct StageError : std::runtime_error {
  StageError(const std::string& stage, const std::string& what) : std::runtime_error(what), stage(stage) {}
  std::string stage;
};

struct Overrides {
  std::string config;
  std::string out;
  std::uint64_t seed = 0;
  bool has_seed = false;
  std::string eps;
};

BenchConfig resolve(const Overrides& o) {
  BenchConfig c;
  try {
    if (!o.config.empty()) c = load_bench_config(o.config);
    if (!o.out.empty()) c.out = o.out;
    if (o.has_seed) c.seed = o.seed;
    if (!o.eps.empty()) {
      c.eps = parse_bench_config("eps = " + o.eps).eps;
    }
    c.validate();
  } catch (const std::exception& e) {
    throw StageError("config", e.what());
  }
  return c;
}

std::string model_dir(const BenchConfig& c, Method m, double eps) {
  return (fs::path(c.out) / (std::string(m == Method::TT ? "ttrb" : "strb") + "_eps" + format_number(eps))).string();
}

void run_offline(const BenchConfig& c) {
  const ProblemSpec spec = make_problem(c.problem, c.cells, c.n_steps, c.final_time, c.theta);
  const FullOrderModel fom(spec);
  SnapshotSet snaps;
  try {
    snaps = generate_snapshots(fom, offline_parameters(c, spec.box), hyper_count(c));
    save_snapshots((fs::path(c.out) / "snapshots").string(), snaps);
  } catch (const std::exception& e) {
    throw StageError("snapshots", e.what());
  }
  for (Method m : c.methods())
    for (double eps : c.eps) {
      try {
        const ReducedModel rom = build_rom(m, fom, snaps, RomOptions{eps, true});
        save_model(model_dir(c, m, eps), rom);
        std::cout << to_string(m) << " eps=" << format_number(eps) << " dim=" << rom.dimension() << " -> "
                  << model_dir(c, m, eps) << "\n";
      } catch (const std::exception& e) {
        throw StageError("offline", e.what());
      }
    }
}

void run_online(const BenchConfig& c) {
  const ProblemSpec spec = make_problem(c.problem, c.cells, c.n_steps, c.final_time, c.theta);
  const FullOrderModel fom(spec);
  const auto test = online_parameters(c, spec.box);
  std::vector<Tensor> reference;
  for (const auto& mu : test) reference.push_back(fom.solve(mu).solution);
  for (Method m : c.methods())
    for (double eps : c.eps) {
      try {
        const ReducedModel rom = load_model(model_dir(c, m, eps));
        std::vector<Tensor> approx;
        for (const auto& mu : test) approx.push_back(online_solve(rom, fom, mu).state);
        std::cout << to_string(m) << " eps=" << format_number(eps) << " dim=" << rom.dimension()
                  << " E=" << format_number(error_metric(reference, approx, fom.norm())) << "\n";
      } catch (const std::exception& e) {
        throw StageError("online", e.what());
      }
    }
}

std::vector<BenchRow> run_and_write(const BenchConfig& c) {
  std::vector<BenchRow> rows;
  try {
    rows = run_bench(c, &std::cerr);
  } catch (const std::exception& e) {
    throw StageError("bench", e.what());
  }
  try {
    fs::create_directories(c.out);
    emit_csv((fs::path(c.out) / "metrics.csv").string(), rows);
  } catch (const std::exception& e) {
    throw StageError("csv", e.what());
  }
  write_csv(std::cout, rows);
  for (const auto& r : rows)
    if (!r.failure.empty()) std::cerr << "[" << r.method << " eps=" << format_number(r.eps) << "] " << r.failure << "\n";
  return rows;
}

void run_compare(BenchConfig c) {
  c.method = "both";
  const auto rows = run_and_write(c);
  std::cout << "\n" << std::setw(8) << "eps" << std::setw(12) << "E(ST)" << std::setw(12) << "E(TT)" << std::setw(10)
            << "dim(ST)" << std::setw(10) << "dim(TT)" << std::setw(12) << "basis ST" << std::setw(12) << "basis TT"
            << "\n";
  for (double eps : c.eps) {
    const BenchRow* st = nullptr;
    const BenchRow* tt = nullptr;
    for (const auto& r : rows)
      if (r.eps == eps) (r.method == "ttrb" ? tt : st) = &r;
    if (!st || !tt) continue;
    std::cout << std::setw(8) << format_number(eps) << std::setw(12) << format_number(st->error) << std::setw(12)
              << format_number(tt->error) << std::setw(10) << st->dim << std::setw(10) << tt->dim << std::setw(12)
              << format_number(st->basis_s) << std::setw(12) << format_number(tt->basis_s) << "\n";
    if (tt->basis_s >= st->basis_s)
      std::cout << "  note: TT basis construction was not faster than TPOD at eps=" << format_number(eps) << "\n";
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Tensor-train reduced basis toolkit"};
  app.require_subcommand(1);
  Overrides o;
  auto add_common = [&o](CLI::App* sub) {
    sub->add_option("--config", o.config, "configuration file (key = value)");
    sub->add_option("--out", o.out, "output directory");
    sub->add_option("--seed", o.seed, "seed for online parameters")->each([&o](const std::string&) { o.has_seed = true; });
    sub->add_option("--eps", o.eps, "comma-separated tolerance list");
  };
  auto* offline = app.add_subcommand("offline", "generate snapshots and reduced models");
  auto* online = app.add_subcommand("online", "evaluate saved reduced models on online parameters");
  auto* bench = app.add_subcommand("bench", "full offline/online benchmark, writes metrics.csv");
  auto* compare = app.add_subcommand("compare", "ST-RB versus TT-RB comparison");
  for (auto* s : {offline, online, bench, compare}) add_common(s);

  CLI11_PARSE(app, argc, argv);
  std::string stage = "config";
  try {
    const BenchConfig c = resolve(o);
    if (offline->parsed()) {
      stage = "offline";
      run_offline(c);
    } else if (online->parsed()) {
      stage = "online";
      run_online(c);
    } else if (bench->parsed()) {
      stage = "bench";
      run_and_write(c);
    } else {
      stage = "compare";
      run_compare(c);
    }
  } catch (const StageError& e) {
    std::cerr << "error [" << e.stage << "]: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error [" << stage << "]: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
