#include "oracles.hpp"

#include "ttrb/fom.hpp"
#include "ttrb/hyper.hpp"
#include "ttrb/problems.hpp"
#include "ttrb/rom.hpp"

#include <doctest.h>

using namespace ttrb;

namespace {

Matrix rows_at(const Matrix& m, const std::vector<std::size_t>& idx) {
  Matrix out(static_cast<Eigen::Index>(idx.size()), m.cols());
  for (std::size_t i = 0; i < idx.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = m.row(static_cast<Eigen::Index>(idx[i]));
  return out;
}

std::vector<double> column(const Tensor& t, std::size_t j) {
  const Matrix c = t.unfold(t.order() - 1);
  return {c.col(static_cast<Eigen::Index>(j)).data(), c.col(static_cast<Eigen::Index>(j)).data() + c.rows()};
}

std::vector<double> sample(const std::vector<double>& v, const std::vector<std::size_t>& idx) {
  std::vector<double> out;
  for (auto i : idx) out.push_back(v[i]);
  return out;
}

double rel(const std::vector<double>& a, const Tensor& b) {
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    num += (a[i] - b[i]) * (a[i] - b[i]);
    den += a[i] * a[i];
  }
  return std::sqrt(num / den);
}

}  // namespace

TEST_CASE("EIM point selection") {
  Matrix id = Matrix::Zero(5, 3);
  id(3, 0) = 1.0;
  id(0, 1) = 1.0;
  id(4, 2) = 1.0;
  CHECK(eim_loop(id) == std::vector<std::size_t>{3, 0, 4});

  Matrix m(3, 2);
  m << 1, 0, 0, 2, 0.5, 0.5;
  CHECK(eim_loop(m) == std::vector<std::size_t>{0, 1});

  std::mt19937_64 rng(1);
  const Matrix r = oracle::random_matrix(30, 8, rng);
  const auto idx = eim_loop(r);
  CHECK(std::abs(rows_at(r, idx).determinant()) > 1e-12);
}

TEST_CASE("ST-MDEIM") {
  std::mt19937_64 rng(2);
  // Exact affine rank 2 over the parameter axis.
  const Matrix a = oracle::random_matrix(40, 2, rng), c = oracle::random_matrix(2, 7, rng);
  const Matrix data = a * c;
  Tensor t({8, 5, 7});
  for (Eigen::Index i = 0; i < 40; ++i)
    for (Eigen::Index j = 0; j < 7; ++j) t[static_cast<std::size_t>(i * 7 + j)] = data(i, j);
  const AffineDecomposition d = st_mdeim(t, 1, 1e-10);
  for (std::size_t j = 0; j < 7; ++j) {
    const auto col = column(t, j);
    CHECK(rel(col, d.reconstruct(d.coefficients(sample(col, d.flat)))) < 1e-8);
  }
  CHECK(std::isfinite(d.chi));

  const Tensor single = oracle::low_rank_tensor({6, 3, 1}, 1, 0.0, rng);
  const AffineDecomposition s = st_mdeim(single, 1, 1e-8);
  CHECK(s.n_terms() == 1);
  const auto col = column(single, 0);
  CHECK(rel(col, s.reconstruct(s.coefficients(sample(col, s.flat)))) < 1e-12);

  // Error bound on reducible data.
  const Tensor u = oracle::low_rank_tensor({10, 6, 12}, 3, 1e-3, rng);
  for (double eps : {1e-2, 1e-3}) {
    const AffineDecomposition e = st_mdeim(u, 1, eps);
    CHECK(oracle::rel_diff(e.interp, rows_at(e.basis_matrix(), e.flat)) < 1e-12);
    for (std::size_t j = 0; j < 12; ++j) {
      const auto col2 = column(u, j);
      const Tensor rec = e.reconstruct(e.coefficients(sample(col2, e.flat)));
      double err = 0.0;
      for (std::size_t i = 0; i < col2.size(); ++i) err += (col2[i] - rec[i]) * (col2[i] - rec[i]);
      CHECK(std::sqrt(err) <= eps * e.chi * std::sqrt(2.0) * u.norm());
    }
  }
}

TEST_CASE("TT-MDEIM") {
  std::mt19937_64 rng(3);
  const Tensor r1 = oracle::low_rank_tensor({4, 5, 3, 1}, 1, 0.0, rng);
  const AffineDecomposition a1 = tt_mdeim(r1, 1e-8);
  CHECK(a1.n_terms() == 1);
  for (const auto& ax : a1.axis_indices) CHECK(ax.size() == 1);
  const auto c1 = column(r1, 0);
  CHECK(rel(c1, a1.reconstruct(a1.coefficients(sample(c1, a1.flat)))) < 1e-12);

  const Tensor u = oracle::low_rank_tensor({7, 6, 10}, 3, 1e-3, rng);
  for (double eps : {1e-2, 1e-3}) {
    const AffineDecomposition a = tt_mdeim(u, eps);
    // Interpolation matrix from the sweep equals rows of the merged basis.
    CHECK((a.interp - rows_at(a.basis_matrix(), a.flat)).cwiseAbs().maxCoeff() < 1e-11);
    for (std::size_t j = 0; j < a.flat.size(); ++j)
      CHECK(a.flat[j] == a.axis_indices[0][j] * 6 + a.axis_indices[1][j]);
    for (std::size_t j = 0; j < 10; ++j) {
      const auto col = column(u, j);
      const Tensor rec = a.reconstruct(a.coefficients(sample(col, a.flat)));
      double err = 0.0;
      for (std::size_t i = 0; i < col.size(); ++i) err += (col[i] - rec[i]) * (col[i] - rec[i]);
      CHECK(std::sqrt(err) <= eps * std::sqrt(2.0) * a.chi * u.norm());
    }
  }
}

TEST_CASE("affine Jacobians are interpolated exactly") {
  ProblemSpec p = affine_poisson_problem(2, 5);
  p.n_steps = 2;
  p.final_time = 0.1;
  const FullOrderModel fom(p);
  const SnapshotSet s = generate_snapshots(fom, halton_points(5, p.box), 5);
  const Tensor split = jacobian_snapshots_to_split_axes(s.jacobians, fom.sparsity());
  CHECK(split.dims() == std::vector<std::size_t>{fom.sparsity().split_dims()[0], fom.sparsity().split_dims()[1], 2, 5});
  const AffineDecomposition a = tt_mdeim(split, 1e-10);
  CHECK(a.n_terms() == 2);
  const auto entries = jacobian_sample_entries(a, fom);
  for (const auto& mu : uniform_points(4, p.box, 11)) {
    const auto samples = fom.jacobian_entries(mu, entries);
    const Tensor rec = a.reconstruct(a.coefficients(samples));
    for (std::size_t step = 0; step < 2; ++step) {
      const SparseMatrix j = fom.jacobian(mu, step);
      double num = 0.0, den = 0.0;
      for (std::size_t f = 0; f < fom.sparsity().size(); ++f) {
        const auto g = fom.sparsity().global(f);
        if (g == SparsityMap::npos) continue;
        const double diff = rec[f * 2 + step] - j.values()[g];
        num += diff * diff;
        den += j.values()[g] * j.values()[g];
      }
      CHECK(std::sqrt(num / den) < 1e-10);
    }
  }
}

TEST_CASE("split-axes Jacobian relabeling") {
  const FullOrderModel fom(poisson_problem(1, 6));
  const SnapshotSet s = generate_snapshots(fom, halton_points(3, fom.spec().box), 3);
  const Tensor split = jacobian_snapshots_to_split_axes(s.jacobians, fom.sparsity());
  CHECK(split.storage() == s.jacobians.storage());

  const FullOrderModel f2(poisson_problem(2, 4));
  const SnapshotSet s2 = generate_snapshots(f2, halton_points(2, f2.spec().box), 2);
  const Tensor sp2 = jacobian_snapshots_to_split_axes(s2.jacobians, f2.sparsity());
  const std::size_t rest = 2;
  for (std::size_t g = 0; g < f2.sparsity().global_nnz(); ++g)
    for (std::size_t j = 0; j < rest; ++j) CHECK(sp2[f2.sparsity().split(g) * rest + j] == s2.jacobians[g * rest + j]);
  CHECK_THROWS_AS(jacobian_snapshots_to_split_axes(Tensor({3, 2}), f2.sparsity()), ShapeError);
}
