#include "oracles.hpp"

#include "ttrb/io.hpp"
#include "ttrb/reduce.hpp"
#include "ttrb/tensor.hpp"

#include <doctest.h>

#include <numeric>
#include <sstream>

using namespace ttrb;

namespace {

Tensor random_tensor(std::vector<std::size_t> dims, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd;
  Tensor t(std::move(dims));
  for (auto& v : t.storage()) v = nd(rng);
  return t;
}

double rel(const Tensor& a, const Tensor& b) {
  REQUIRE(a.dims() == b.dims());
  double num = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) num += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(num) / std::max(a.norm(), 1e-300);
}

}  // namespace

TEST_CASE("tensor layout is first-axis-major") {
  Tensor t({2, 3, 4});
  CHECK(t.offset({1, 2, 3}) == (1 * 3 + 2) * 4 + 3);
  CHECK_THROWS(t.offset({2, 0, 0}));
  CHECK_THROWS_AS(Tensor({2, 2}, {1.0}), ShapeError);
}

TEST_CASE("permute_axes") {
  const Tensor t = random_tensor({2, 3, 4}, 1);
  const std::vector<std::size_t> id{0, 1, 2};
  CHECK(permute_axes(t, id).storage() == t.storage());

  const Tensor m = random_tensor({2, 3}, 2);
  const std::vector<std::size_t> sw{1, 0};
  const Tensor mt = permute_axes(m, sw);
  CHECK(mt.dims() == std::vector<std::size_t>{3, 2});
  for (std::size_t i = 0; i < 2; ++i)
    for (std::size_t j = 0; j < 3; ++j) CHECK(mt.at({j, i}) == m.at({i, j}));

  const std::vector<std::size_t> p{2, 0, 1}, inv{1, 2, 0};
  const Tensor back = permute_axes(permute_axes(t, p), inv);
  CHECK(back.storage() == t.storage());
  CHECK_THROWS_AS(permute_axes(t, std::vector<std::size_t>{0, 0, 1}), ShapeError);
}

TEST_CASE("merge and split axes") {
  const Tensor m = random_tensor({2, 3}, 3);
  const Tensor v = merge_axes(m, {{0, 1}});
  REQUIRE(v.dims() == std::vector<std::size_t>{6});
  for (std::size_t i = 0; i < 2; ++i)
    for (std::size_t j = 0; j < 3; ++j) CHECK(v[i * 3 + j] == m.at({i, j}));
  CHECK(merge_axes(m, {{0}, {1}}).storage() == m.storage());

  const Tensor t = random_tensor({2, 3, 4}, 4);
  const Tensor merged = merge_axes(t, {{0}, {1, 2}});
  CHECK(merged.dims() == std::vector<std::size_t>{2, 12});
  const std::vector<std::size_t> parts{3, 4};
  CHECK(split_axis(merged, 1, parts).storage() == t.storage());
  CHECK(split_axis(merged, 1, parts).dims() == t.dims());
  CHECK_THROWS_AS(merge_axes(t, {{1, 0}, {2}}), ShapeError);
}

TEST_CASE("contract") {
  const Tensor id({2, 2}, {1, 0, 0, 1});
  const Tensor s = random_tensor({2, 5}, 5);
  CHECK(contract(id, s).storage() == s.storage());

  const Tensor u({3}, {1, 2, 3}), w({3}, {4, 5, 6});
  const Tensor dot = contract(u, w);
  CHECK(dot.size() == 1);
  CHECK(dot[0] == doctest::Approx(32.0));

  const Tensor r = random_tensor({2, 3, 4}, 6);
  const Tensor q = random_tensor({4, 5}, 7);
  const Matrix expect = r.unfold(2) * q.unfold(1);
  const Tensor got = contract(r, q);
  CHECK(got.dims() == std::vector<std::size_t>{2, 3, 5});
  CHECK(oracle::rel_diff(got.unfold(2), expect) < 1e-13);

  // General axis version against an explicit loop.
  const Tensor a = random_tensor({3, 4, 2}, 8);
  const Tensor b = random_tensor({5, 4}, 9);
  const Tensor c = contract(a, 1, b, 1);
  REQUIRE(c.dims() == std::vector<std::size_t>{3, 2, 5});
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t k = 0; k < 2; ++k)
      for (std::size_t m = 0; m < 5; ++m) {
        double sum = 0.0;
        for (std::size_t j = 0; j < 4; ++j) sum += a.at({i, j, k}) * b.at({m, j});
        CHECK(c.at({i, k, m}) == doctest::Approx(sum).epsilon(1e-13));
      }
  CHECK_THROWS_AS(contract(a, 0, b, 1), ShapeError);
}

TEST_CASE("mode_contract") {
  const Tensor t = random_tensor({3, 4, 5}, 10);
  for (std::size_t mode = 0; mode < 3; ++mode) {
    const auto n = static_cast<Eigen::Index>(t.dim(mode));
    CHECK(mode_contract(Matrix::Identity(n, n), t, mode).storage() == t.storage());
  }
  const Tensor b = random_tensor({4, 6}, 11);
  std::mt19937_64 rng(12);
  const Matrix a = oracle::random_matrix(3, 4, rng);
  CHECK(oracle::rel_diff(mode_contract(a, b, 0).unfold(1), a * b.unfold(1)) < 1e-13);

  // Oracle: bring the mode to the front, multiply, move it back.
  const Matrix m = oracle::random_matrix(7, 4, rng);
  const std::vector<std::size_t> front{1, 0, 2}, back{1, 0, 2};
  const Tensor moved = permute_axes(t, front);
  const Tensor prod = fold(m * moved.unfold(1), {7, 3, 5});
  const Tensor expect = permute_axes(prod, back);
  CHECK(rel(mode_contract(m, t, 1), expect) < 1e-13);
}

TEST_CASE("KronMap") {
  const KronMap k{4, 3};
  CHECK(k(1, 0) == 3);
  CHECK(k(0, 0) == 0);
  const KronMap e{4, 5};
  std::vector<bool> seen(20, false);
  for (std::size_t a = 0; a < 4; ++a)
    for (std::size_t b = 0; b < 5; ++b) {
      const auto f = e(a, b);
      CHECK_FALSE(seen[f]);
      seen[f] = true;
      CHECK(e.inverse(f) == std::pair<std::size_t, std::size_t>{a, b});
    }
  const std::vector<std::size_t> dims{2, 3, 4}, idx{1, 2, 3};
  CHECK(kron_index(dims, idx) == 23);
  CHECK(kron_index_inv(dims, 23) == idx);
  CHECK_THROWS(e(4, 0));
}

TEST_CASE("TT cores and reconstruction") {
  const TTCore single(Tensor({1, 3, 1}, {1, 2, 3}));
  const std::vector<TTCore> one{single};
  CHECK(tt_reconstruct(one).storage() == std::vector<double>{1, 2, 3});

  const std::vector<double> u{1, 2}, v{3, 4, 5}, w{6, 7};
  const std::vector<TTCore> r1{TTCore(Tensor({1, 2, 1}, u)), TTCore(Tensor({1, 3, 1}, v)), TTCore(Tensor({1, 2, 1}, w))};
  const Tensor outer = tt_reconstruct(r1);
  REQUIRE(outer.dims() == std::vector<std::size_t>{2, 3, 2, 1});
  for (std::size_t i = 0; i < 2; ++i)
    for (std::size_t j = 0; j < 3; ++j)
      for (std::size_t k = 0; k < 2; ++k) CHECK(outer.at({i, j, k, 0}) == u[i] * v[j] * w[k]);

  const Tensor t = random_tensor({4, 4, 4}, 14);
  const TTBasis b = tt_svd(t.reshaped({4, 4, 4, 1}), 0.0);
  const Matrix rec = tt_reconstruct(b.cores).unfold(3) * b.remainder;
  CHECK(oracle::rel_diff(rec, t.reshaped({64, 1}).unfold(1)) < 1e-12);

  std::vector<TTCore> bad{TTCore(Tensor({1, 2, 2})), TTCore(Tensor({3, 2, 1}))};
  CHECK_THROWS_AS(validate_chain(bad), ShapeError);
  CHECK_THROWS_AS(TTCore(Tensor({2, 2})), ShapeError);
}

TEST_CASE("binary tensor round trip") {
  const Tensor t = random_tensor({3, 1, 4}, 15);
  std::stringstream ss;
  write_tensor(ss, t);
  const std::string bytes = ss.str();
  CHECK(bytes.substr(0, 4) == "TTRB");
  CHECK(bytes.size() == 4 + 1 + 1 + 3 * 8 + t.size() * 8);
  const Tensor back = read_tensor(ss);
  CHECK(back.dims() == t.dims());
  CHECK(back.storage() == t.storage());

  std::stringstream bad("TTRX....");
  CHECK_THROWS_AS(read_tensor(bad), FormatError);
  std::stringstream truncated(bytes.substr(0, bytes.size() - 3));
  CHECK_THROWS_AS(read_tensor(truncated), FormatError);
}

TEST_CASE("manifest parsing") {
  std::istringstream is("# comment\na = 1\n\n b =  two words \n");
  const Manifest m = parse_manifest(is);
  CHECK(m.at("a") == "1");
  CHECK(m.at("b") == "two words");
  std::istringstream dup("a = 1\na = 2\n");
  CHECK_THROWS(parse_manifest(dup));
  std::istringstream junk("no equals sign\n");
  CHECK_THROWS(parse_manifest(junk));
}
