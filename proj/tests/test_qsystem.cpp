#include "common.hpp"

using namespace ahcat;
using fixture::num;
using fixture::pol;
using fixture::registry;

namespace {

const QSystemCandidate& candidate() {
  static QSystemCandidate qc = build_R_S(registry());
  return qc;
}

const Section& find(const std::vector<Section>& v, const std::string& name) {
  for (auto& s : v)
    if (s.name == name) return s;
  throw std::runtime_error("no section " + name);
}

}  // namespace

TEST_CASE("report formatting") {
  Report r;
  r.add("one", "anchor-one", true, 1e-12, "fine");
  r.skip("two", "anchor-two", "not applicable");
  r.notes.push_back("a note");
  CHECK(r.pass());
  std::string s = r.str();
  CHECK(s.find("SECTION one PASS") != std::string::npos);
  CHECK(s.find("SECTION two SKIP") != std::string::npos);
  CHECK(s.find("anchor=anchor-one") != std::string::npos);
  CHECK(s.find("NOTE a note") < s.find("RESULT PASS"));
  r.add("three", "anchor-three", false, 0.5);
  CHECK_FALSE(r.pass());
  CHECK(r.str().find("RESULT FAIL") != std::string::npos);
}

TEST_CASE("zig-zags of the isometric cups equal 1/beta") {
  double inv_beta = 1 / num("beta");
  Section s = check_conjugacy(registry(), num("beta"), pol());
  CHECK(s.status == Section::Status::Pass);
  CHECK(s.detail.find(format_double(inv_beta).substr(0, 6)) != std::string::npos);
  // with d = beta^2 the residual is |1/beta - 1/beta^2|
  Section t = check_conjugacy(registry(), num("beta*beta"), pol());
  CHECK(t.residual == doctest::Approx(inv_beta - inv_beta * inv_beta).epsilon(1e-8));
}

TEST_CASE("skein fit") {
  SkeinFit k = fit_skein(registry(), true), b = fit_skein(registry(), false);
  CHECK(k.residual <= 1e-10);
  CHECK(b.residual <= 1e-10);
  double b1 = num("beta1");
  CHECK(std::abs(b.c_cup) == doctest::Approx(1 / b1).epsilon(1e-10));
  CHECK(std::abs(b.c_tri) == doctest::Approx(std::sqrt(2.0) / b1).epsilon(1e-10));
  CHECK(k.c_cup == doctest::Approx(b.c_cup).epsilon(1e-10));
  CHECK(check_skein(registry(), b.c_cup, b.c_tri, pol()).status == Section::Status::Pass);
  CHECK(check_skein(registry(), b.c_cup, num("beta2/beta1"), pol()).status == Section::Status::Fail);
}

TEST_CASE("reduced Q-system") {
  const QSystemCandidate& qc = candidate();
  CHECK(qc.d == doctest::Approx(num("beta*beta")).epsilon(1e-12));
  ReducedReport r = check_reduced(qc, registry(), pol());
  for (auto name : {"R-isometry", "S-isometry", "condition-1", "condition-1-bent", "condition-2-fit"}) {
    CAPTURE(name);
    CHECK(find(r.sections, name).status == Section::Status::Pass);
  }
  // oracle: beta / beta1^2
  CHECK(r.lambda == doctest::Approx(num("beta") / (num("beta*beta") - 1)).epsilon(1e-10));
  CHECK(r.lambda_residual <= 1e-9);
}

TEST_CASE("full Q-system on Id + sigma") {
  FullReport f = check_full(assemble_full(candidate(), registry()), registry(), pol());
  for (auto& s : f.sections) {
    CAPTURE(s.str());
    CHECK(s.status == Section::Status::Pass);
  }
  CHECK(f.index == doctest::Approx((7 + std::sqrt(17.0)) / 2).epsilon(1e-10));
  CHECK(f.unit_scalar == doctest::Approx(1 / std::sqrt(f.index)).epsilon(1e-12));
}

TEST_CASE("negating R breaks associativity") {
  QSystemCandidate q = candidate();
  q.R = cplx(-1) * q.R;
  FullReport f = check_full(assemble_full(q, registry()), registry(), pol());
  CHECK(find(f.sections, "associativity").status == Section::Status::Fail);
}

TEST_CASE("negating S is absorbed by the grading automorphism") {
  // 1 (+) -1 on gamma conjugates the -S triple onto the +S triple, so both pass.
  QSystemCandidate q = candidate();
  q.S = cplx(-1) * q.S;
  FullReport f = check_full(assemble_full(q, registry()), registry(), pol());
  CHECK(Report{f.sections, {}}.pass());
}

TEST_CASE("canonical Q-system of kappa") {
  FullQSystem q = canonical_qsystem(registry());
  FullReport f = check_full(q, registry(), pol());
  CHECK(Report{f.sections, {}}.pass());
  CHECK(f.index == doctest::Approx(num("beta*beta")).epsilon(1e-10));
  // rescaling the unit breaks the isometry condition
  for (auto& row : q.T.blocks)
    for (auto& b : row)
      if (b) *b = cplx(2) * *b;
  FullReport g = check_full(q, registry(), pol());
  CHECK(find(g.sections, "T-isometry").status == Section::Status::Fail);
}

TEST_CASE("graded algebra") {
  FullQSystem q = canonical_qsystem(registry());
  GradedMap id = graded_identity(*registry().strands, q.gamma);
  CHECK(graded_diff(id * q.T, q.T) <= 1e-14);
  cplx c;
  CHECK(graded_fit(q.T, q.T, c) <= 1e-14);
  CHECK(std::abs(c - cplx(1)) <= 1e-12);
  GradedMap adj = q.T.adjoint();
  CHECK(adj.src.size() == q.T.dst.size());
}

TEST_CASE("A3 canonical Q-system") {
  VertexRegistry r = registry_from_connection(fixture::a3(), pol());
  FullReport f = check_full(canonical_qsystem(r), r, pol());
  CHECK(Report{f.sections, {}}.pass());
  CHECK(f.index == doctest::Approx(2.0).epsilon(1e-10));
}
