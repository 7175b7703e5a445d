#pragma once

// Dense Galerkin projections from merged basis matrices, for checking the
// core-wise projections.

#include "oracles.hpp"

#include "ttrb/fe.hpp"
#include "ttrb/reduce.hpp"

#include <functional>

namespace oracle {

/// K_{q, m}: dense operator of hyper-term q at time step m.
using TermMatrix = std::function<Matrix(Eigen::Index q, Eigen::Index m)>;

/// D[a, q, b] = sum_n Phi_n^T K_{q, n'} Phi_{n'}, n' = n (diagonal) or n - 1 (shifted),
/// where Phi_n holds the rows of the merged basis at step n (time fastest).
inline ttrb::Tensor dense_jacobian_projection(const Matrix& phi, Eigen::Index nt, Eigen::Index n_terms,
                                              const TermMatrix& k, bool shifted) {
  const Eigen::Index ns = phi.rows() / nt, r = phi.cols();
  auto block = [&](Eigen::Index n) {
    Matrix b(ns, r);
    for (Eigen::Index i = 0; i < ns; ++i) b.row(i) = phi.row(i * nt + n);
    return b;
  };
  ttrb::Tensor out({static_cast<std::size_t>(r), static_cast<std::size_t>(n_terms), static_cast<std::size_t>(r)});
  for (Eigen::Index q = 0; q < n_terms; ++q) {
    Matrix acc = Matrix::Zero(r, r);
    for (Eigen::Index n = shifted ? 1 : 0; n < nt; ++n) {
      const Eigen::Index m = shifted ? n - 1 : n;
      acc += block(n).transpose() * k(q, m) * block(m);
    }
    for (Eigen::Index a = 0; a < r; ++a)
      for (Eigen::Index b = 0; b < r; ++b)
        out[(static_cast<std::size_t>(a) * static_cast<std::size_t>(n_terms) + static_cast<std::size_t>(q)) *
                static_cast<std::size_t>(r) +
            static_cast<std::size_t>(b)] = acc(a, b);
  }
  return out;
}

/// Term matrices of a split-axes TT hyper-basis: value of split nonzero f at
/// step m is row f * nt + m of the merged basis.
inline TermMatrix split_terms(const Matrix& merged_op, const ttrb::SparsityMap& map, Eigen::Index ns, Eigen::Index nt) {
  return [&merged_op, &map, ns, nt](Eigen::Index q, Eigen::Index m) {
    Matrix k = Matrix::Zero(ns, ns);
    for (std::size_t f = 0; f < map.size(); ++f) {
      if (map.global(f) == ttrb::SparsityMap::npos) continue;
      const auto [r, c] = map.entry_of_split(f);
      k(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = merged_op(static_cast<Eigen::Index>(f) * nt + m, q);
    }
    return k;
  };
}

/// Term matrices of a global-nonzero hyper-basis (rows z * nt + m).
inline TermMatrix global_terms(const Matrix& merged_op, const ttrb::SparseMatrix& pattern, Eigen::Index nt) {
  return [&merged_op, &pattern, nt](Eigen::Index q, Eigen::Index m) {
    Matrix k = Matrix::Zero(static_cast<Eigen::Index>(pattern.rows()), static_cast<Eigen::Index>(pattern.cols()));
    const auto cols = pattern.col_indices();
    for (std::size_t p = 0; p < pattern.nnz(); ++p)
      k(static_cast<Eigen::Index>(pattern.row_indices()[p]), static_cast<Eigen::Index>(cols[p])) =
          merged_op(static_cast<Eigen::Index>(p) * nt + m, q);
    return k;
  };
}

inline Matrix dense_mass_shift(const Matrix& phi, Eigen::Index nt, const Matrix& mass) {
  return dense_jacobian_projection(phi, nt, 1, [&mass](Eigen::Index, Eigen::Index) { return mass; }, true)
      .reshaped({static_cast<std::size_t>(phi.cols()), static_cast<std::size_t>(phi.cols())})
      .unfold(1);
}

/// Random TT cores with the given axis lengths and ranks (ranks.size() == lens.size() + 1).
inline ttrb::TTBasis random_tt(const std::vector<std::size_t>& lens, const std::vector<std::size_t>& ranks,
                               std::mt19937_64& rng) {
  ttrb::TTBasis b;
  for (std::size_t i = 0; i < lens.size(); ++i) {
    const Matrix c = random_matrix(static_cast<Eigen::Index>(ranks[i] * lens[i]), static_cast<Eigen::Index>(ranks[i + 1]), rng);
    b.cores.emplace_back(ttrb::fold(c, {ranks[i], lens[i], ranks[i + 1]}));
  }
  return b;
}

}  // namespace oracle
