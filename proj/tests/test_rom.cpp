#include "galerkin_oracle.hpp"

#include "ttrb/fom.hpp"
#include "ttrb/problems.hpp"
#include "ttrb/rom.hpp"

#include <doctest.h>

#include <filesystem>

using namespace ttrb;

namespace {

CartesianSpace tiny_space(std::size_t d, std::size_t cells) {
  std::vector<Grid1D> g;
  for (std::size_t i = 0; i < d; ++i) g.push_back(Grid1D{0.0, 1.0, cells + i % 2, i == 0, false});
  return CartesianSpace(g, {Facet{0, true}});
}

Matrix dense_state_norm(const FullOrderModel& fom) {
  const Matrix xs = fom.norm().expand().to_dense();
  return oracle::kron(xs, Matrix::Identity(static_cast<Eigen::Index>(fom.n_time()), static_cast<Eigen::Index>(fom.n_time())));
}

Vector flat(const Tensor& t) { return Eigen::Map<const Vector>(t.data().data(), static_cast<Eigen::Index>(t.size())); }

}  // namespace

TEST_CASE("core-wise TT projections match dense Galerkin products") {
  std::mt19937_64 rng(1);
  for (std::size_t d = 1; d <= 3; ++d)
    for (std::size_t nt : {1u, 3u}) {
      const CartesianSpace sp = tiny_space(d, 4);
      const SparsityMap map = sparsity_map(sp);
      std::vector<std::size_t> lens = sp.free_dims(), zl = map.split_dims();
      std::vector<std::size_t> br{1}, kr{1};
      for (std::size_t i = 0; i < d; ++i) {
        br.push_back(2 + i % 2);
        kr.push_back(2);
      }
      if (nt > 1) {
        lens.push_back(nt);
        zl.push_back(nt);
        br.push_back(3);
        kr.push_back(2);
      }
      const TTBasis basis = oracle::random_tt(lens, br, rng);
      const TTBasis op = oracle::random_tt(zl, kr, rng);
      const TTBasis rhs = oracle::random_tt(lens, kr, rng);
      const Matrix phi = basis.merged(), q = op.merged();
      const auto ns = static_cast<Eigen::Index>(sp.n_free()), nti = static_cast<Eigen::Index>(nt);
      const auto terms = oracle::split_terms(q, map, ns, nti);

      const Tensor core = project_jacobian_tt(basis, op, map, d, false);
      const Tensor dense = oracle::dense_jacobian_projection(phi, nti, q.cols(), terms, false);
      CHECK(oracle::rel_diff(core.unfold(2), dense.unfold(2)) < 1e-10);
      CHECK(oracle::rel_diff(project_residual_tt(basis, rhs), phi.transpose() * rhs.merged()) < 1e-10);
      if (nt > 1) {
        const Tensor cs = project_jacobian_tt(basis, op, map, d, true);
        const Tensor ds = oracle::dense_jacobian_projection(phi, nti, q.cols(), terms, true);
        CHECK(oracle::rel_diff(cs.unfold(2), ds.unfold(2)) < 1e-10);
        std::vector<SparseMatrix> mass;
        std::vector<Matrix> md;
        for (const auto& g : sp.grids()) {
          mass.push_back(mass_1d(g));
          md.push_back(mass.back().to_dense());
        }
        CHECK(oracle::rel_diff(project_mass_shift_tt(basis, mass, map), oracle::dense_mass_shift(phi, nti, oracle::kron_all(md))) < 1e-10);
      } else {
        CHECK_THROWS(project_jacobian_tt(basis, op, map, d, true));
      }
    }
}

TEST_CASE("projection of the identity operator onto an orthonormal basis") {
  // Operator cores that reproduce the identity on the free dofs.
  const CartesianSpace sp = tiny_space(2, 4);
  const SparsityMap map = sparsity_map(sp);
  std::vector<TTCore> op;
  for (std::size_t i = 0; i < 2; ++i) {
    Tensor t({1, map.split_dims()[i], 1});
    for (std::size_t z = 0; z < t.dim(1); ++z) {
      const auto [r, c] = map.entry_1d(i, z);
      t[z] = r == c ? 1.0 : 0.0;
    }
    op.emplace_back(std::move(t));
  }
  TTBasis ob;
  ob.cores = op;
  std::mt19937_64 rng(2);
  const FullOrderModel fom(poisson_problem(2, 4));
  const SnapshotSet s = generate_snapshots(fom, halton_points(6, fom.spec().box), 0);
  const TTBasis b = tt_svd(s.solutions, 1e-6);
  const Tensor p = project_jacobian_tt(b, ob, fom.sparsity(), 2, false);
  const auto r = static_cast<Eigen::Index>(b.dimension());
  CHECK((p.reshaped({p.dim(0), p.dim(2)}).unfold(1) - Matrix::Identity(r, r)).norm() < 1e-12);
}

TEST_CASE("ST projections match dense Galerkin products") {
  std::mt19937_64 rng(3);
  const CartesianSpace sp = tiny_space(2, 3);
  const Assembler a(sp);
  const SparseMatrix& pattern = a.pattern();
  const Eigen::Index ns = static_cast<Eigen::Index>(sp.n_free()), nt = 4;
  STBasis basis, op, rhs;
  basis.spatial = oracle::random_matrix(ns, 3, rng);
  basis.temporal = oracle::random_matrix(nt, 2, rng);
  op.spatial = oracle::random_matrix(static_cast<Eigen::Index>(pattern.nnz()), 2, rng);
  op.temporal = oracle::random_matrix(nt, 3, rng);
  rhs.spatial = oracle::random_matrix(ns, 2, rng);
  rhs.temporal = oracle::random_matrix(nt, 2, rng);
  const Matrix phi = basis.merged(), q = op.merged();
  const auto terms = oracle::global_terms(q, pattern, nt);
  for (bool shifted : {false, true}) {
    const Tensor c = project_jacobian_st(basis, op, pattern, shifted);
    const Tensor d = oracle::dense_jacobian_projection(phi, nt, q.cols(), terms, shifted);
    CHECK(oracle::rel_diff(c.unfold(2), d.unfold(2)) < 1e-10);
  }
  CHECK(oracle::rel_diff(project_residual_st(basis, rhs), phi.transpose() * rhs.merged()) < 1e-10);
  CHECK(oracle::rel_diff(project_mass_shift_st(basis, a.mass()), oracle::dense_mass_shift(phi, nt, a.mass().to_dense())) < 1e-10);
}

TEST_CASE("error metric") {
  const FullOrderModel fom(poisson_problem(2, 4));
  std::mt19937_64 rng(4);
  Tensor u(fom.state_dims()), v(fom.state_dims());
  for (std::size_t i = 0; i < u.size(); ++i) {
    u[i] = std::normal_distribution<double>()(rng);
    v[i] = std::normal_distribution<double>()(rng);
  }
  CHECK(relative_error(u, u, fom.norm()) == 0.0);
  Tensor two = u;
  for (auto& x : two.storage()) x *= 2.0;
  CHECK(relative_error(u, two, fom.norm()) == doctest::Approx(1.0));
  const Matrix x = fom.norm().expand().to_dense();
  const Vector e = flat(u) - flat(v);
  const double expect = std::sqrt(e.dot(x * e) / flat(u).dot(x * flat(u)));
  CHECK(relative_error(u, v, fom.norm()) == doctest::Approx(expect).epsilon(1e-12));
  CHECK(error_metric({u, u}, {u, two}, fom.norm()) == doctest::Approx(0.5));
}

TEST_CASE("stability constants") {
  std::mt19937_64 rng(5);
  const Matrix a = oracle::random_matrix(6, 6, rng);
  const Matrix x = a * a.transpose() + 6.0 * Matrix::Identity(6, 6);
  const StabilityConstants c = stability_constants(x, x);
  CHECK(c.sigma_min == doctest::Approx(1.0));
  CHECK(c.sigma_max == doctest::Approx(1.0));
}

TEST_CASE("TT-RB reproduces training solutions") {
  const FullOrderModel fom(poisson_problem(2, 8));
  const auto train = halton_points(12, fom.spec().box);
  const SnapshotSet s = generate_snapshots(fom, train, 12);
  for (Method m : {Method::TT, Method::ST}) {
    const ReducedModel rom = build_rom(m, fom, s, RomOptions{1e-10, true});
    for (std::size_t j : {0u, 5u, 11u}) {
      const Tensor u = fom.solve(train[j]).solution;
      CHECK(relative_error(u, online_solve(rom, fom, train[j]).state, fom.norm()) < 1e-6);
    }
  }
}

TEST_CASE("exactly affine problem gives the X-orthogonal projection") {
  const FullOrderModel fom(affine_poisson_problem(2, 8));
  const SnapshotSet s = generate_snapshots(fom, halton_points(6, fom.spec().box), 6);
  const ReducedModel rom = build_tt_rom(fom, s, RomOptions{1e-12, true});
  const Matrix x = fom.norm().expand().to_dense();
  const Matrix phi = rom.basis_matrix();
  for (const auto& mu : uniform_points(3, fom.spec().box, 3)) {
    const Vector u = flat(fom.solve(mu).solution);
    const Vector proj = oracle::x_projector(phi, x) * u;
    CHECK(oracle::rel_diff(flat(online_solve(rom, fom, mu).state), proj) < 1e-8);
  }
  // f = 0 with homogeneous boundary data: the reduced solution vanishes.
  const std::vector<double> zero_load{2.0, 0.0};
  CHECK(online_solve(rom, fom, zero_load).state.norm() < 1e-12);
}

TEST_CASE("transient ROM and model files") {
  const FullOrderModel fom(heat3d_problem(4, 5, 0.1, 0.5));
  const auto train = halton_points(8, fom.spec().box);
  const SnapshotSet s = generate_snapshots(fom, train, 8);
  const auto mu = uniform_points(1, fom.spec().box, 9)[0];
  for (Method m : {Method::TT, Method::ST}) {
    const ReducedModel rom = build_rom(m, fom, s, RomOptions{1e-4, true});
    const OnlineResult on = online_solve(rom, fom, mu);
    CHECK(on.state.dims() == fom.state_dims());
    CHECK(relative_error(fom.solve(mu).solution, on.state, fom.norm()) < 0.1);

    const auto dir = std::filesystem::temp_directory_path() / ("ttrb_test_model_" + std::string(to_string(m)));
    save_model(dir.string(), rom);
    const ReducedModel back = load_model(dir.string());
    CHECK(back.dimension() == rom.dimension());
    CHECK(back.jac_entries.size() == rom.jac_entries.size());
    const OnlineResult on2 = online_solve(back, fom, mu);
    CHECK(oracle::rel_diff(on2.coeffs, on.coeffs) < 1e-13);
    std::filesystem::remove_all(dir);
  }
  CHECK(parse_method("ttrb") == Method::TT);
  CHECK(parse_method("ST-RB") == Method::ST);
  CHECK_THROWS(parse_method("pod"));
}

TEST_CASE("a-posteriori estimate") {
  const FullOrderModel fom(poisson_problem(1, 40));
  const auto train = halton_points(10, fom.spec().box);
  const SnapshotSet s = generate_snapshots(fom, train, 10);
  const ReducedModel exact = build_tt_rom(fom, s, RomOptions{1e-12, true});
  const AposterioriEstimate e0 = aposteriori_estimate(exact, fom, train[3], fom.solve(train[3]).solution);
  CHECK(e0.residual_term <= 1e-8);

  const ReducedModel rom = build_tt_rom(fom, s, RomOptions{1e-3, true});
  const Matrix x = dense_state_norm(fom);
  for (const auto& mu : uniform_points(3, fom.spec().box, 4)) {
    const Tensor u = fom.solve(mu).solution;
    const AposterioriEstimate e = aposteriori_estimate(rom, fom, mu, u);
    const Vector diff = flat(u) - flat(online_solve(rom, fom, mu).state);
    CHECK(e.error == doctest::Approx(std::sqrt(diff.dot(x * diff))).epsilon(1e-8));
    CHECK(e.bound >= e.error);
    CHECK(e.stability.sigma_min > 0.0);
  }
}
