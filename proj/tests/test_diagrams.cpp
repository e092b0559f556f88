#include "common.hpp"

using namespace ahcat;
using fixture::num;
using fixture::pol;
using fixture::registry;

namespace {

Diagram load(const std::string& rel) { return read_diagram(data_dir() + "/diagrams/" + rel, registry()); }

// State sum entry by entry against the composed matrix.
double state_sum_gap(const Diagram& d) {
  DenseMap m = evaluate(d, registry());
  double worst = 0;
  for (size_t j = 0; j < m.src->size(); ++j)
    for (size_t i = 0; i < m.dst->size(); ++i) {
      auto c = coefficient(d, registry(), m.src->sp.edges[j].label, m.dst->sp.edges[i].label);
      worst = std::max(worst, std::abs(c.value - m.M(i, j)));
    }
  return worst;
}

}  // namespace

TEST_CASE("layer parser") {
  auto layers = parse_layers("# comment\nid:k cup:kb\n\ncap:k id:k  # trailing\n");
  REQUIRE(layers.size() == 2);
  CHECK(layers[0].size() == 2);
  CHECK(layers[0][1].kind == Element::Kind::Cup);
  CHECK(layers[1][0].kind == Element::Kind::Cap);
  auto s = parse_layers("scale:1/beta id:k\n");
  CHECK(s[0][0].factor.real() == doctest::Approx(1 / num("beta")));
  CHECK_THROWS_AS(parse_layers("id\n"), StructuralError);
  CHECK_THROWS_AS(parse_layers("foo:k\n"), StructuralError);
  CHECK_THROWS_AS(parse_layers("scale:beta+\n"), StructuralError);
  CHECK_THROWS_AS(parse_layers("# nothing\n"), StructuralError);
}

TEST_CASE("boundary mismatch names the layer") {
  CHECK_THROWS_WITH_AS(parse_diagram("id:k\nid:kb\n", registry()), doctest::Contains("layer"), StructuralError);
  CHECK_THROWS_AS(parse_diagram("v:nonexistent\n", registry()), RegistryError);
  CHECK_THROWS_AS(parse_diagram("id:zz\n", registry()), RegistryError);
}

TEST_CASE("zig-zag through the unnormalized cups") {
  Diagram d = load("lemmas/zigzag_k.dgm");
  CHECK(d.top == std::vector<std::string>{"k"});
  CHECK(d.bottom == std::vector<std::string>{"k"});
  DenseMap m = evaluate(d, registry());
  cplx c = m.M(0, 0);
  CHECK(max_diff(m, c * registry().id({"k"})) <= 1e-10);
  CHECK(std::abs(c) == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("state sum equals composition on bundled diagrams") {
  for (auto f : {"lemmas/zigzag_k.dgm", "lemmas/zigzag_kb.dgm", "lemmas/skein_k.dgm", "lemmas/skein_kb_tri.dgm",
                 "vertices/rho3.dgm", "vertices/rkk.dgm", "vertices/ara.dgm", "lemmas/alpha_rho_bubble_left.dgm"}) {
    CAPTURE(f);
    CHECK(state_sum_gap(load(f)) <= 1e-10);
  }
}

TEST_CASE("unique-state coefficients") {
  Diagram d = load("vertices/r_rho.dgm");
  auto c = coefficient(d, registry(), "*", "*.b.*", true);
  CHECK(c.states == 1);
  CHECK(c.value.real() == doctest::Approx(num("beta1")).epsilon(1e-10));
  // several states contribute here
  Diagram z = load("lemmas/alpha_rho_bubble_left.dgm");
  CHECK(coefficient(z, registry(), "b.b~.f", "b.b~.f").states == 2);
  CHECK_THROWS_AS(coefficient(z, registry(), "b.b~.f", "b.b~.f", true), VerificationError);
}

TEST_CASE("vertex values") {
  const VertexRegistry& R = registry();
  auto rho3 = R.get("rho3");
  CHECK(rho3.at("*.b", "*.b.b").real() == doctest::Approx(-num("beta2") * std::sqrt(num("beta1") / 2)).epsilon(1e-10));
  CHECK(rho3.at("h.f", "h.b~.f").real() == doctest::Approx(std::sqrt(num("beta1") / 2)).epsilon(1e-10));
  auto ara = R.get("ara");
  CHECK(ara.at("b.b~.h.h~", "b.*.*~.h~").real() == doctest::Approx(1 / std::sqrt(num("beta1"))).epsilon(1e-10));
  CHECK(ara.at("*.*~.h~.h", "*.b.b~.h").real() == doctest::Approx(std::sqrt(num("beta1"))).epsilon(1e-10));
  CHECK(std::abs(ara.at("b.b~.f.f", "b.b.b~.f")) == doctest::Approx(std::sqrt(num("beta1")) / num("beta2")).epsilon(1e-10));
}

TEST_CASE("rotation is the adjoint") {
  for (auto f : {"vertices/rkk.dgm", "vertices/rho3.dgm", "lemmas/skein_k_tri.dgm"}) {
    CAPTURE(f);
    Diagram d = load(f);
    Diagram r = rotate(d, registry());
    CHECK(r.top == d.bottom);
    CHECK(r.bottom == d.top);
    CHECK(max_diff(evaluate(r, registry()), evaluate(d, registry()).adjoint()) <= 1e-10);
  }
}

TEST_CASE("bending and unbending") {
  Diagram d = load("vertices/rkk.dgm");  // [r k] -> [k]
  Diagram b = bend(d, Side::Left, registry());
  CHECK(b.top.size() == d.top.size() - 1);
  CHECK(b.bottom.size() == d.bottom.size() + 1);
  CHECK(state_sum_gap(b) <= 1e-10);
  CHECK_THROWS_AS(bend(load("vertices/r_rho.dgm"), Side::Left, registry()), std::domain_error);
}

TEST_CASE("then, pad and trace") {
  const VertexRegistry& R = registry();
  Diagram d = load("vertices/rho3.dgm");  // [r] -> [r r]
  Diagram dd = then(d, rotate(d, R), R);
  CHECK(max_diff(evaluate(dd, R), evaluate(d, R).adjoint() * evaluate(d, R)) <= 1e-10);
  Diagram p = pad(d, {"a"}, {"a"}, R);
  CHECK(max_diff(evaluate(p, R), R.T({R.id({"a"}), evaluate(d, R), R.id({"a"})})) <= 1e-10);
  CHECK_THROWS_AS(trace_closure(d, R), StructuralError);
  CHECK_THROWS_AS(closed_scalars(d, R), StructuralError);
  Diagram closed = trace_closure(dd, R);
  auto vals = closed_scalars(closed, R);
  double sum = 0;
  for (auto v : vals) {
    CHECK(std::abs(v.imag()) <= 1e-10);
    sum += std::abs(v);
  }
  CHECK(sum > 0);
}

TEST_CASE("registry vertices and isometry defects") {
  const VertexRegistry& R = registry();
  for (auto key : {"r_kappa", "rbar_kappa", "v", "w", "rho3", "r_rho", "ara", "rkk", "kbr"}) {
    CAPTURE(key);
    REQUIRE(R.has(key));
    CHECK(isometry_defect(R.vertices.at(key)) <= 1e-9);
  }
  CHECK(R.has("rho3*"));
  CHECK(max_diff(R.get("rho3*"), R.get("rho3").adjoint()) == 0.0);
  CHECK_FALSE(R.has("unknown"));
  CHECK_THROWS_AS(R.get("unknown"), RegistryError);
}

TEST_CASE("lemma suite") {
  auto sections = run_lemma_suite(registry(), pol());
  CHECK(sections.size() == 26);
  for (auto& s : sections) {
    CAPTURE(s.str());
    CHECK(s.status == Section::Status::Pass);
  }
}

TEST_CASE("identity decomposition of kappa kappabar") {
  Section s = check_identity_split(registry(), pol());
  CHECK(s.status == Section::Status::Pass);
  CHECK(s.residual <= 1e-9);
}

TEST_CASE("table registry") {
  VertexRegistry t = registry_from_tables(fixture::kappa(), pol());
  CHECK(t.source == "tables");
  REQUIRE_FALSE(t.notes.empty());
  bool aa = false, gg = false;
  for (auto& n : t.notes) {
    aa = aa || n.find("a.2.a") != std::string::npos;
    gg = gg || n.find("g.6.g") != std::string::npos;
  }
  CHECK(aa);
  CHECK(gg);
  auto sections = run_lemma_suite(t, pol());
  for (auto& s : sections) {
    CAPTURE(s.str());
    CHECK(s.status == Section::Status::Pass);
  }
}

TEST_CASE("AH structure detection") {
  CHECK(has_ah_structure(fixture::kappa()));
  CHECK_FALSE(has_ah_structure(fixture::a3()));
}
