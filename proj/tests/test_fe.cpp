#include "oracles.hpp"

#include "ttrb/fe.hpp"

#include <doctest.h>

using namespace ttrb;

namespace {

const Field one = [](std::span<const double>, double, std::span<const double>) { return 1.0; };
const Field zero = [](std::span<const double>, double, std::span<const double>) { return 0.0; };

/// Free-node indices (in full-grid flat numbering) of a space.
std::vector<Eigen::Index> free_nodes(const CartesianSpace& s) {
  std::vector<Eigen::Index> out;
  for (std::size_t f = 0; f < s.n_free(); ++f) {
    const auto node = s.free_to_node(f);
    out.push_back(static_cast<Eigen::Index>(kron_index(s.node_dims(), node)));
  }
  return out;
}

std::vector<Eigen::Index> dirichlet_nodes(const CartesianSpace& s) {
  std::vector<Eigen::Index> out;
  const auto dims = s.node_dims();
  for (std::size_t n = 0; n < product(dims); ++n)
    if (s.node_to_free(kron_index_inv(dims, n)) == CartesianSpace::npos) out.push_back(static_cast<Eigen::Index>(n));
  return out;
}

Matrix pick(const Matrix& m, const std::vector<Eigen::Index>& r, const std::vector<Eigen::Index>& c) {
  Matrix out(static_cast<Eigen::Index>(r.size()), static_cast<Eigen::Index>(c.size()));
  for (std::size_t i = 0; i < r.size(); ++i)
    for (std::size_t j = 0; j < c.size(); ++j) out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = m(r[i], c[j]);
  return out;
}

CartesianSpace space2d(std::size_t m0, std::size_t m1) {
  return CartesianSpace({Grid1D{0.0, 1.0, m0, true, false}, Grid1D{0.0, 2.0, m1, false, true}}, {Facet{0, true}});
}

}  // namespace

TEST_CASE("1-D P1 matrices") {
  const Grid1D g{0.0, 2.0, 2, false, false};
  const Matrix m = mass_1d(g).to_dense();
  CHECK(m(0, 0) == doctest::Approx(1.0 / 3.0));
  CHECK(m(1, 1) == doctest::Approx(2.0 / 3.0));
  CHECK(m(2, 2) == doctest::Approx(1.0 / 3.0));
  CHECK(m(0, 1) == doctest::Approx(1.0 / 6.0));
  CHECK(m(0, 2) == 0.0);
  const Matrix k = stiffness_1d(g).to_dense();
  CHECK(k(0, 0) == doctest::Approx(1.0));
  CHECK(k(1, 1) == doctest::Approx(2.0));
  CHECK(k(1, 0) == doctest::Approx(-1.0));

  const Grid1D g5{0.0, 1.0, 5, false, false};
  const Vector rows = mass_1d(g5).to_dense().rowwise().sum();
  CHECK(rows[0] == doctest::Approx(0.1));
  CHECK(rows[2] == doctest::Approx(0.2));

  const Grid1D gd{0.0, 1.0, 4, true, true};
  CHECK(mass_1d(gd).rows() == 3);
  CHECK(oracle::rel_diff(stiffness_1d(gd).to_dense(), oracle::restrict(oracle::p1_stiffness(4, 0.25), 1, 3)) < 1e-15);
  CHECK(pattern_1d(gd).nnz() == 7);
}

TEST_CASE("H1 norm as a Kronecker sum") {
  const CartesianSpace s1({Grid1D{0.0, 1.0, 6, true, false}});
  const KroneckerSum x1 = assemble_norm_matrix(s1);
  CHECK(x1.n_terms() == 1);
  CHECK((x1.expand().to_dense() - stiffness_1d(s1.grid(0)).to_dense()).norm() == 0.0);

  const CartesianSpace s2 = space2d(3, 4);
  const KroneckerSum x2 = assemble_norm_matrix(s2);
  const Matrix xd = x2.expand().to_dense();
  const auto fn = free_nodes(s2);
  const Matrix k0 = oracle::p1_stiffness(3, 1.0 / 3.0), m0 = oracle::p1_mass(3, 1.0 / 3.0);
  const Matrix k1 = oracle::p1_stiffness(4, 0.5), m1 = oracle::p1_mass(4, 0.5);
  const Matrix full = oracle::kron(k0, m1) + oracle::kron(m0, k1);
  CHECK(oracle::rel_diff(xd, pick(full, fn, fn)) < 1e-12);
  CHECK((xd - xd.transpose()).norm() == 0.0);

  // The assembled Laplacian coincides with the Kronecker sum.
  const Assembler a(s2);
  CHECK(oracle::rel_diff(a.stiffness(one, 0.0, {}).to_dense(), xd) < 1e-12);

  // apply() against the expanded matrix.
  std::mt19937_64 rng(1);
  const Matrix u = oracle::random_matrix(static_cast<Eigen::Index>(s2.n_free()), 3, rng);
  Tensor ut({3, 4, 3});
  for (Eigen::Index i = 0; i < u.rows(); ++i)
    for (Eigen::Index j = 0; j < 3; ++j) ut[static_cast<std::size_t>(i * 3 + j)] = u(i, j);
  const Tensor xu = x2.apply(ut);
  CHECK(oracle::rel_diff(xu.unfold(2), xd * u) < 1e-13);
  const auto ns = x2.column_norms_sq(ut);
  for (Eigen::Index j = 0; j < 3; ++j) CHECK(ns[static_cast<std::size_t>(j)] == doctest::Approx(u.col(j).dot(xd * u.col(j))));
}

TEST_CASE("variable-coefficient stiffness and mass") {
  const CartesianSpace line({Grid1D{0.0, 2.0, 2, false, false}});
  const Field lin = [](std::span<const double> x, double, std::span<const double>) { return 1.0 + x[0]; };
  const Matrix k = Assembler(line).stiffness(lin, 0.0, {}).to_dense();
  Matrix expect(3, 3);
  expect << 1.5, -1.5, 0, -1.5, 4.0, -2.5, 0, -2.5, 2.5;
  CHECK(oracle::rel_diff(k, expect) < 1e-14);

  const CartesianSpace s = space2d(4, 3);
  const Assembler a(s);
  const std::vector<double> mu{2.0, 3.0};
  const Field alpha = [](std::span<const double> x, double, std::span<const double> p) { return p[0] + p[1] * x[0]; };
  const double h0 = 0.25, h1 = 2.0 / 3.0;
  const Matrix full = oracle::kron(oracle::p1_weighted_stiffness(4, h0, 0.0, 2.0, 3.0), oracle::p1_mass(3, h1)) +
                      oracle::kron(oracle::p1_weighted_mass(4, h0, 0.0, 2.0, 3.0), oracle::p1_stiffness(3, h1));
  const auto fn = free_nodes(s);
  const SparseMatrix ka = a.stiffness(alpha, 0.0, mu);
  CHECK(oracle::rel_diff(ka.to_dense(), pick(full, fn, fn)) < 1e-12);
  CHECK(ka.same_pattern(a.pattern()));

  const Matrix mfull = oracle::kron(oracle::p1_mass(4, h0), oracle::p1_mass(3, h1));
  CHECK(oracle::rel_diff(a.mass().to_dense(), pick(mfull, fn, fn)) < 1e-12);

  // Dirichlet lifting: A_{free, dir} g_dir.
  const Field g = [](std::span<const double> x, double, std::span<const double>) { return 1.0 + x[1] * x[1]; };
  const auto dn = dirichlet_nodes(s);
  const Tensor gi = a.interpolate(g, 0.0, mu);
  Vector gd(static_cast<Eigen::Index>(dn.size()));
  for (std::size_t i = 0; i < dn.size(); ++i) gd[static_cast<Eigen::Index>(i)] = gi[static_cast<std::size_t>(dn[i])];
  CHECK(oracle::rel_diff(a.stiffness_lifting(alpha, g, 0.0, mu), pick(full, fn, dn) * gd) < 1e-12);
  CHECK(oracle::rel_diff(a.mass_lifting(g, 0.0, mu), pick(mfull, fn, dn) * gd) < 1e-12);

  // Sampled variants agree with full assembly.
  std::vector<Assembler::Entry> entries;
  const auto cols = ka.col_indices();
  for (std::size_t p = 0; p < ka.nnz(); p += 5) entries.emplace_back(ka.row_indices()[p], cols[p]);
  const auto ke = a.stiffness_entries(alpha, 0.0, mu, entries);
  const auto me = a.mass_entries(entries);
  const SparseMatrix ma = a.mass();
  for (std::size_t i = 0; i < entries.size(); ++i) {
    CHECK(ke[i] == doctest::Approx(ka.coeff(entries[i].first, entries[i].second)).epsilon(1e-13));
    CHECK(me[i] == doctest::Approx(ma.coeff(entries[i].first, entries[i].second)).epsilon(1e-13));
  }
  const Field f = [](std::span<const double> x, double, std::span<const double>) { return x[0] * x[1]; };
  const Field hh = [](std::span<const double> x, double, std::span<const double>) { return 2.0 + x[1]; };
  const Vector load = a.load(f, hh, 0.0, mu);
  const Vector lift = a.stiffness_lifting(alpha, g, 0.0, mu);
  const Vector mlift = a.mass_lifting(g, 0.0, mu);
  const std::vector<std::size_t> rows{0, 3, 7, s.n_free() - 1};
  const auto lr = a.load_rows(f, hh, 0.0, mu, rows);
  const auto sr = a.stiffness_lifting_rows(alpha, g, 0.0, mu, rows);
  const auto mr = a.mass_lifting_rows(g, 0.0, mu, rows);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto r = static_cast<Eigen::Index>(rows[i]);
    CHECK(lr[i] == doctest::Approx(load[r]).epsilon(1e-13));
    CHECK(sr[i] == doctest::Approx(lift[r]).epsilon(1e-13));
    CHECK(mr[i] == doctest::Approx(mlift[r]).epsilon(1e-13));
  }
}

TEST_CASE("load integrates forcing and Neumann data") {
  const CartesianSpace s({Grid1D{0.0, 1.0, 3, false, false}, Grid1D{0.0, 2.0, 4, false, false}}, {Facet{0, true}});
  const Field f = [](std::span<const double>, double, std::span<const double>) { return 3.0; };
  const Field h = [](std::span<const double>, double, std::span<const double>) { return 0.5; };
  const Vector l = Assembler(s).load(f, h, 0.0, {});
  // 3 * area + 0.5 * length of the facet x_0 = 1
  CHECK(l.sum() == doctest::Approx(3.0 * 2.0 + 0.5 * 2.0));
  const Vector l0 = Assembler(s).load(zero, h, 0.0, {});
  for (std::size_t n = 0; n < s.n_free(); ++n)
    if (s.free_to_node(n)[0] != 3) CHECK(l0[static_cast<Eigen::Index>(n)] == 0.0);
}

TEST_CASE("sparsity map between split and global nonzeros") {
  const CartesianSpace s1({Grid1D{0.0, 1.0, 5, true, false}});
  const SparsityMap m1 = sparsity_map(s1);
  for (std::size_t z = 0; z < m1.size(); ++z) CHECK(m1.global(z) == z);

  // 3 x 3 free dofs.
  const CartesianSpace s2({Grid1D{0.0, 1.0, 4, true, true}, Grid1D{0.0, 1.0, 4, true, true}});
  const SparsityMap m2 = sparsity_map(s2);
  CHECK(m2.split_dims() == std::vector<std::size_t>{7, 7});
  CHECK(m2.size() == 49);
  CHECK(m2.global_nnz() == Assembler(s2).pattern().nnz());
  for (std::size_t f = 0; f < m2.size(); ++f) {
    CHECK(m2.split(m2.global(f)) == f);
    CHECK(m2.entry_of_split(f) == m2.entry_of_global(m2.global(f)));
  }
  // Entry of a split tuple is the Kronecker combination of the 1-D entries.
  const auto [r0, c0] = m2.entry_1d(0, 2);
  const auto [r1, c1] = m2.entry_1d(1, 5);
  CHECK(m2.entry_of_split(2 * 7 + 5) == std::pair<std::size_t, std::size_t>{r0 * 3 + r1, c0 * 3 + c1});

  // Laplacian values on the split axes reproduce the Kronecker-sum structure.
  const Assembler a(s2);
  const SparseMatrix k = a.stiffness(one, 0.0, {});
  const KroneckerSum x = assemble_norm_matrix(s2);
  for (std::size_t z0 = 0; z0 < 7; ++z0)
    for (std::size_t z1 = 0; z1 < 7; ++z1) {
      const auto [i0, j0] = m2.entry_1d(0, z0);
      const auto [i1, j1] = m2.entry_1d(1, z1);
      const double expect = x.factor(0, 0).coeff(i0, j0) * x.factor(0, 1).coeff(i1, j1) +
                            x.factor(1, 0).coeff(i0, j0) * x.factor(1, 1).coeff(i1, j1);
      CHECK(k.values()[m2.global(z0 * 7 + z1)] == doctest::Approx(expect).epsilon(1e-13));
    }
}
