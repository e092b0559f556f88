#include "common.hpp"

using namespace ahcat;
using fixture::num;
using fixture::pol;
using fixture::strand;

namespace {

Connection sigma() {
  Connection s = compose({&strand("kb"), &strand("a"), &strand("k")});
  s.name = "sigma";
  return s;
}

}  // namespace

TEST_CASE("hom dimensions on the kappa strands") {
  const Connection &k = strand("k"), &kb = strand("kb"), &a = strand("a"), &r = strand("r");
  Connection kkb = compose(k, kb);
  CHECK(hom_dim(kkb, kkb) == 2);
  Connection s = sigma();
  CHECK(hom_dim(s, s) == 1);
  CHECK(hom_dim(s, compose(s, s)) == 1);
  CHECK(hom_dim(compose({&k, &kb, &a, &k, &kb}), compose({&a, &k, &kb, &a, &k, &kb, &a})) == 4);
  CHECK(hom_dim(r, compose({&a, &r, &a, &r, &a})) == 1);
}

TEST_CASE("hom basis is orthonormal and intertwines") {
  const Connection &k = strand("k"), &kb = strand("kb");
  Connection kkb = compose(k, kb);
  auto basis = hom_space(kkb, kkb);
  REQUIRE(basis.size() == 2);
  for (size_t i = 0; i < basis.size(); ++i) {
    CHECK(intertwiner_residual(kkb, kkb, basis[i]) <= 1e-10);
    for (size_t j = 0; j < basis.size(); ++j)
      CHECK(std::abs(inner(basis[i], basis[j]) - cplx(i == j ? 1 : 0)) <= 1e-10);
  }
  // the identity lies in the span
  EdgeMap id = identity_map(kkb);
  EdgeMap proj = inner(basis[0], id) * basis[0] + inner(basis[1], id) * basis[1];
  CHECK(std::abs(proj.norm2() - id.norm2()) <= 1e-9);
}

TEST_CASE("a non-intertwiner has a residual") {
  const Connection &k = strand("k"), &kb = strand("kb");
  Connection kkb = compose(k, kb);
  EdgeMap T = identity_map(kkb);
  T.left[0] *= 2.0;
  bool changed = T.left[0].size() > 0;
  if (changed) CHECK(intertwiner_residual(kkb, kkb, T) > 1e-3);
}

TEST_CASE("fusion facts") {
  const Connection &a = strand("a"), &r = strand("r");
  CHECK(hom_dim(compose(a, a), identity_connection(a.top)) == 1);
  CHECK(hom_dim(compose(a, r), compose(r, a)) == 0);
  auto parts = decompose(compose({&r, &a, &r}));
  REQUIRE(parts.size() == 2);
  Connection ara = compose({&a, &r, &a});
  int with_ara = 0;
  double total = 0;
  for (auto& p : parts) {
    CHECK(p.multiplicity == 1);
    with_ara += hom_dim(p.conn, ara) == 1;
    total += quantum_dimension(p.conn);
  }
  CHECK(with_ara == 1);
  double b2 = num("beta*beta");
  CHECK(total == doctest::Approx((b2 - 1) * (b2 - 1)).epsilon(1e-10));
  CHECK(quantum_dimension(a) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(quantum_dimension(r) == doctest::Approx(b2 - 1).epsilon(1e-12));
  CHECK(quantum_dimension(strand("k")) == doctest::Approx(num("beta")).epsilon(1e-12));
}

TEST_CASE("quantum_dimension rejects reducible input") {
  const Connection &k = strand("k"), &kb = strand("kb");
  CHECK_THROWS_AS(quantum_dimension(compose(k, kb)), std::domain_error);
  CHECK(pf_dimension(compose(k, kb)) == doctest::Approx(num("beta*beta")).epsilon(1e-12));
}

TEST_CASE("decompose kappa kappabar") {
  const Connection &k = strand("k"), &kb = strand("kb");
  Connection kkb = compose(k, kb);
  auto parts = decompose(kkb);
  REQUIRE(parts.size() == 2);
  double dims = 0;
  for (auto& p : parts) {
    CHECK(p.multiplicity == 1);
    CHECK(intertwiner_residual(p.conn, kkb, p.embedding) <= 1e-9);
    CHECK(check_biunitarity(p.conn, pol()).pass);
    dims += quantum_dimension(p.conn);
  }
  CHECK(dims == doctest::Approx(num("beta*beta")).epsilon(1e-10));
}

TEST_CASE("fusion ring of sigma") {
  FusionResult fr = fusion_ring({sigma()}, 8);
  const BasedRing& R = fr.ring;
  CHECK(R.labels.size() == 6);
  CHECK(R.labels[R.unit] == "Id");
  // associativity of the structure constants
  int n = static_cast<int>(R.labels.size());
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      for (int c = 0; c < n; ++c)
        for (int d = 0; d < n; ++d) {
          int lhs = 0, rhs = 0;
          for (int e = 0; e < n; ++e) {
            lhs += R.mult(a, b, e) * R.mult(e, c, d);
            rhs += R.mult(b, c, e) * R.mult(a, e, d);
          }
          CHECK(lhs == rhs);
        }
  // dimensions multiply
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) {
      double s = 0;
      for (int c = 0; c < n; ++c) s += R.mult(a, b, c) * R.dims[c];
      CHECK(s == doctest::Approx(R.dims[a] * R.dims[b]).epsilon(1e-9));
    }
  BasedRing back = parse_ring(format_ring(R));
  CHECK(back.labels == R.labels);
  CHECK(back.N == R.N);
}

TEST_CASE("fusion ring depth exhaustion reports the frontier") {
  try {
    fusion_ring({sigma()}, 1);
    FAIL("depth 1 should not saturate");
  } catch (const PartialRingError& e) {
    CHECK_FALSE(e.frontier.empty());
  }
}

TEST_CASE("principal graph of Id + sigma") {
  FusionResult fr = fusion_ring({sigma()}, 8);
  AlgebraObject g = parse_algebra(fr.ring, "Id+sigma");
  PrincipalGraph pg = principal_graph_from_algebra(g);
  CHECK(pg.graph.left.size() == 6);
  CHECK(pg.graph.right.size() == 5);
  for (size_t i = 0; i < pg.L.size(); ++i)
    for (size_t j = 0; j < pg.L.size(); ++j) {
      int s = 0;
      for (size_t o = 0; o < pg.Lambda[i].size(); ++o) s += pg.Lambda[i][o] * pg.Lambda[j][o];
      CHECK(s == pg.L[i][j]);
    }
  CHECK(pg.norm * pg.norm == doctest::Approx((7 + std::sqrt(17.0)) / 2).epsilon(1e-10));
}

TEST_CASE("principal graph search on small matrices") {
  PrincipalGraph p = principal_graph_from_matrix({{2, 1}, {1, 2}}, {"x", "y"});
  CHECK(p.graph.right.size() == 3);
  CHECK(p.norm * p.norm == doctest::Approx(3.0));
  // rows of norm 1 with overlap 2 cannot exist
  CHECK_THROWS_AS(principal_graph_from_matrix({{1, 2}, {2, 1}}, {"x", "y"}), SynthesisFailure);
}

TEST_CASE("algebra objects must contain the unit once and be self-dual") {
  FusionResult fr = fusion_ring({sigma()}, 8);
  CHECK_THROWS_AS(principal_graph_from_algebra(parse_algebra(fr.ring, "sigma")), SynthesisFailure);
  CHECK_THROWS_AS(principal_graph_from_algebra(parse_algebra(fr.ring, "2*Id+sigma")), SynthesisFailure);
  CHECK_THROWS(parse_algebra(fr.ring, "Id+nothing"));
}
