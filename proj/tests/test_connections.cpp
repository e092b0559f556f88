#include "common.hpp"

#include <set>

using namespace ahcat;
using fixture::kappa;
using fixture::pol;

TEST_CASE("kappa connection is biunitary") {
  const Connection& k = kappa();
  BiunitarityReport r = check_biunitarity(k, pol());
  CHECK(r.pass);
  CHECK(r.square_blocks);
  CHECK(r.unitarity <= 1e-12);
  CHECK(r.renormalization <= 1e-12);
  CHECK(solver_residual(k) <= pol().solver_tol);
}

TEST_CASE("A3 connection is biunitary") {
  BiunitarityReport r = check_biunitarity(fixture::a3(), pol());
  CHECK(r.pass);
}

TEST_CASE("corner blocks are unitary one by one") {
  const Connection& k = kappa();
  for (auto& b : k.W) {
    if (b.M.size() == 0) continue;
    REQUIRE(b.M.rows() == b.M.cols());
    MatrixC I = MatrixC::Identity(b.M.rows(), b.M.cols());
    CHECK((b.M * b.M.adjoint() - I).cwiseAbs().maxCoeff() <= 1e-12);
  }
}

TEST_CASE("a sign on one simple edge flips exactly the cells through it") {
  const Connection& k = kappa();
  GaugeTransform g = GaugeTransform::identity(k);
  int target = -1;
  size_t pair_id = 0;
  for (size_t p = 0; p < k.left.pair.size(); ++p)
    if (k.left.pair[p].size() == 1) {
      target = k.left.pair[p][0];
      pair_id = p;
      break;
    }
  REQUIRE(target >= 0);
  g.left[pair_id](0, 0) = -1;
  Connection h = apply_gauge(k, g);
  size_t flipped = 0;
  for (size_t b = 0; b < k.W.size(); ++b) {
    const Block& B = k.W[b];
    for (int i = 0; i < B.M.rows(); ++i)
      for (int j = 0; j < B.M.cols(); ++j) {
        cplx want = B.rows[i] == target ? -B.M(i, j) : B.M(i, j);
        CHECK(std::abs(h.W[b].M(i, j) - want) <= 1e-15);
        if (B.rows[i] == target && std::abs(B.M(i, j)) > 0) ++flipped;
      }
  }
  CHECK(flipped > 0);
  CHECK(check_biunitarity(h, pol()).pass);
}

TEST_CASE("gauge shape mismatch is rejected") {
  GaugeTransform g = GaugeTransform::identity(kappa());
  g.left.pop_back();
  CHECK_THROWS_AS(apply_gauge(kappa(), g), StructuralError);
}

TEST_CASE("identity and composition") {
  const Connection& k = fixture::strand("k");
  const Connection& kb = fixture::strand("kb");
  Connection id = identity_connection(k.top);
  CHECK(check_biunitarity(id, pol()).pass);
  Connection kk = compose(k, kb);
  CHECK(check_biunitarity(kk, pol()).pass);
  CHECK(kk.left.size() == [&] {
    // paths of length two through the vertical graphs
    size_t n = 0;
    for (auto& e : k.left.edges)
      for (auto& f : kb.left.edges) n += e.b == f.a;
    return n;
  }());
  CHECK_THROWS_AS(compose(k, k), StructuralError);
}

TEST_CASE("conjugate of conjugate") {
  const Connection& k = fixture::strand("k");
  Connection cc = conjugate(conjugate(k));
  CHECK(cc.name == k.name);
  CHECK(hom_dim(cc, k) == 1);
  CHECK(check_biunitarity(conjugate(k), pol()).pass);
}

TEST_CASE("direct sum needs matching rows") {
  const Connection& k = fixture::strand("k");
  const Connection& a = fixture::strand("a");
  CHECK_THROWS_AS(direct_sum(k, a), StructuralError);
  Connection s = direct_sum(a, a);
  CHECK(s.left.size() == 2 * a.left.size());
  CHECK(check_biunitarity(s, pol()).pass);
}

TEST_CASE("connection text round trip") {
  const Connection& k = kappa();
  std::string text = format_connection(fixture::kappa_square().square, k);
  FourGraphSquare sq;
  Connection back = parse_connection(text, pol(), &sq);
  CHECK(validate_square(sq).valid);
  REQUIRE(back.W.size() == k.W.size());
  double worst = 0;
  for (size_t b = 0; b < k.W.size(); ++b)
    if (k.W[b].M.size()) worst = std::max(worst, (k.W[b].M - back.W[b].M).cwiseAbs().maxCoeff());
  CHECK(worst <= 1e-15);
  auto x = gauge_invariants(back), y = gauge_invariants(k);
  REQUIRE(x.size() == y.size());
  for (size_t i = 0; i < x.size(); ++i) CHECK(std::abs(x[i] - y[i]) <= 1e-14);
}

TEST_CASE("malformed connection files") {
  std::string text = format_connection(fixture::kappa_square().square, kappa());
  auto pos = text.find("CELL ");
  REQUIRE(pos != std::string::npos);
  std::string broken = text.substr(0, pos) + "CELL a b\n" + text.substr(pos);
  CHECK_THROWS_AS(parse_connection(broken, pol()), StructuralError);
}

TEST_CASE("solver is deterministic per seed") {
  Connection a = solve_connection(fixture::kappa_square().square, 3, pol());
  Connection b = solve_connection(fixture::kappa_square().square, 3, pol());
  for (size_t i = 0; i < a.W.size(); ++i)
    if (a.W[i].M.size()) CHECK((a.W[i].M - b.W[i].M).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("different seeds agree on gauge invariants") {
  Connection b = solve_connection(fixture::kappa_square().square, 11, pol());
  auto x = gauge_invariants(kappa()), y = gauge_invariants(b);
  REQUIRE(x.size() == y.size());
  double worst = 0;
  for (size_t i = 0; i < x.size(); ++i) worst = std::max(worst, std::abs(x[i] - y[i]));
  CHECK(worst <= 1e-9);
}

TEST_CASE("conjugation keeps parallel edges apart") {
  const Connection& r = fixture::strand("r");
  Connection rb = conjugate(r);
  std::set<std::string> seen;
  for (auto& e : rb.right.edges) CHECK(seen.insert(e.label).second);
  Connection back = conjugate(rb);
  REQUIRE(back.right.size() == r.right.size());
  for (size_t i = 0; i < r.right.size(); ++i) CHECK(back.right.edges[i].label == r.right.edges[i].label);
  CHECK_NOTHROW(compose(compose(r, r), rb));
}
