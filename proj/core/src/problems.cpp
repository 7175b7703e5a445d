#include "ttrb/problems.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace ttrb {

namespace {

constexpr double pi = std::numbers::pi;

CartesianSpace dirichlet_left_space(std::size_t d, std::size_t cells) {
  if (d == 0 || cells == 0) throw std::invalid_argument("need at least one direction and one cell");
  std::vector<Grid1D> grids(d, Grid1D{0.0, 1.0, cells, false, false});
  grids[0].dirichlet_lo = true;
  return CartesianSpace(std::move(grids), {Facet{0, true}});
}

ParameterBox unit_box(std::size_t p) { return {std::vector<double>(p, 1.0), std::vector<double>(p, 5.0)}; }

double x2(std::span<const double> x) { return x.size() > 1 ? x[1] : 0.0; }

}  // namespace

ProblemSpec poisson_problem(std::size_t d, std::size_t cells) {
  ProblemSpec p;
  p.name = "poisson" + std::to_string(d) + "d";
  p.space = dirichlet_left_space(d, cells);
  p.box = unit_box(5);
  p.alpha = [](std::span<const double> x, double, std::span<const double> mu) { return mu[0] + mu[1] * x[0]; };
  p.f = [](std::span<const double>, double, std::span<const double> mu) { return mu[2]; };
  if (d == 1)
    p.g = [](std::span<const double>, double, std::span<const double> mu) { return mu[3]; };
  else
    p.g = [](std::span<const double> x, double, std::span<const double> mu) { return std::exp(-mu[3] * x2(x)); };
  p.h = [](std::span<const double>, double, std::span<const double> mu) { return mu[4]; };
  p.u0 = [](std::span<const double>, double, std::span<const double>) { return 0.0; };
  return p;
}

ProblemSpec heat3d_problem(std::size_t cells, std::size_t n_steps, double final_time, double theta) {
  if (n_steps == 0 || final_time <= 0.0) throw std::invalid_argument("heat3d needs N_t > 0 and T > 0");
  ProblemSpec p;
  p.name = "heat3d";
  p.space = dirichlet_left_space(3, cells);
  p.box = unit_box(6);
  const double tf = final_time;
  p.alpha = [](std::span<const double> x, double, std::span<const double> mu) { return mu[0] + mu[1] * x[0]; };
  p.f = [](std::span<const double>, double, std::span<const double> mu) { return mu[2]; };
  p.g = [tf](std::span<const double> x, double t, std::span<const double> mu) {
    const double w = 2.0 * pi * t / tf;
    return std::exp(-mu[3] * x2(x)) * (1.0 - std::cos(w) + std::sin(w) / mu[4]);
  };
  p.h = [tf](std::span<const double>, double t, std::span<const double> mu) {
    return std::sin(2.0 * pi * t / tf) / mu[5];
  };
  p.u0 = [](std::span<const double>, double, std::span<const double>) { return 0.0; };
  p.final_time = final_time;
  p.n_steps = n_steps;
  p.theta = theta;
  return p;
}

ProblemSpec heat1d_decay_problem(std::size_t cells, std::size_t n_steps, double final_time, double theta) {
  ProblemSpec p;
  p.name = "heat1d";
  p.space = CartesianSpace({Grid1D{0.0, 1.0, cells, true, true}});
  p.box = {{1.0}, {1.0}};
  p.alpha = [](std::span<const double>, double, std::span<const double>) { return 1.0; };
  p.f = [](std::span<const double>, double, std::span<const double>) { return 0.0; };
  p.g = p.f;
  p.h = p.f;
  p.u0 = [](std::span<const double> x, double, std::span<const double>) { return std::sin(pi * x[0]); };
  p.final_time = final_time;
  p.n_steps = n_steps;
  p.theta = theta;
  return p;
}

ProblemSpec affine_poisson_problem(std::size_t d, std::size_t cells) {
  ProblemSpec p;
  p.name = "affine_poisson" + std::to_string(d) + "d";
  p.space = dirichlet_left_space(d, cells);
  p.box = unit_box(2);
  p.alpha = [](std::span<const double>, double, std::span<const double> mu) { return mu[0]; };
  p.f = [](std::span<const double>, double, std::span<const double> mu) { return mu[1]; };
  p.g = [](std::span<const double>, double, std::span<const double>) { return 0.0; };
  p.h = p.g;
  p.u0 = p.g;
  return p;
}

ProblemSpec make_problem(const std::string& name, std::size_t cells, std::size_t n_steps, double final_time,
                         double theta) {
  if (name == "poisson1d") return poisson_problem(1, cells);
  if (name == "poisson2d") return poisson_problem(2, cells);
  if (name == "poisson3d") return poisson_problem(3, cells);
  if (name == "heat3d") return heat3d_problem(cells, n_steps, final_time, theta);
  throw std::invalid_argument("unknown case '" + name + "'");
}

}  // namespace ttrb
