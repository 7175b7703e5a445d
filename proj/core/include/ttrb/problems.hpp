#pragma once

#include "ttrb/fom.hpp"

#include <string>

namespace ttrb {

/// Poisson on [0,1]^d: Dirichlet at x_1 = 0, Neumann h at x_1 = 1, remaining
/// faces homogeneous Neumann. alpha = mu_1 + mu_2 x_1, f = mu_3,
/// g = exp(-mu_4 x_2), h = mu_5, mu in [1,5]^5. For d = 1, g = mu_4.
ProblemSpec poisson_problem(std::size_t d, std::size_t cells);

/// Heat equation on [0,1]^3 with the Poisson boundaries, time-periodic
/// Dirichlet and Neumann data, u0 = 0 and mu in [1,5]^6.
ProblemSpec heat3d_problem(std::size_t cells, std::size_t n_steps = 10, double final_time = 0.1, double theta = 0.5);

/// u_t - u_xx = 0 on [0,1], homogeneous Dirichlet, u0 = sin(pi x).
/// Exact solution exp(-pi^2 t) sin(pi x). One dummy parameter.
ProblemSpec heat1d_decay_problem(std::size_t cells, std::size_t n_steps, double final_time, double theta);

/// Exactly affine Poisson: alpha = mu_1, f = mu_2, homogeneous Dirichlet data.
ProblemSpec affine_poisson_problem(std::size_t d, std::size_t cells);

/// "poisson1d", "poisson2d", "poisson3d" or "heat3d".
ProblemSpec make_problem(const std::string& name, std::size_t cells, std::size_t n_steps, double final_time,
                         double theta);

}  // namespace ttrb
