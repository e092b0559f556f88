#include "common.hpp"

#include <Eigen/Dense>

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace ahcat;
using fixture::num;
using fixture::pol;

namespace {

// Independent oracle: largest singular value of the adjacency matrix.
double spectral_norm(const BipartiteGraph& g) {
  auto a = g.adjacency();
  Eigen::MatrixXd A(g.left.size(), g.right.size());
  for (size_t i = 0; i < g.left.size(); ++i)
    for (size_t j = 0; j < g.right.size(); ++j) A(i, j) = a[i][j];
  return Eigen::JacobiSVD<Eigen::MatrixXd>(A).singularValues()(0);
}

BipartiteGraph path_graph(int n) {
  BipartiteGraph g;
  for (int i = 0; i < n; i += 2) g.add_left("v" + std::to_string(i));
  for (int i = 1; i < n; i += 2) g.add_right("v" + std::to_string(i));
  for (int i = 0; i + 1 < n; ++i) {
    std::string a = "v" + std::to_string(i), b = "v" + std::to_string(i + 1);
    if (i % 2 == 0) g.add_edge(a, b);
    else g.add_edge(b, a);
  }
  return g;
}

}  // namespace

TEST_CASE("Dynkin A_n norms") {
  for (int n = 2; n <= 9; ++n) {
    PFData pf = perron_frobenius(path_graph(n), pol());
    CHECK(pf.eigenvalue.to_double() == doctest::Approx(2 * std::cos(M_PI / (n + 1))).epsilon(1e-12));
  }
}

TEST_CASE("PF weights satisfy the eigen-equation and are positive") {
  BipartiteGraph g = path_graph(7);
  PFData pf = perron_frobenius(g, pol());
  double lam = pf.eigenvalue.to_double();
  auto a = g.adjacency();
  for (size_t i = 0; i < g.left.size(); ++i) {
    double s = 0;
    for (size_t j = 0; j < g.right.size(); ++j) s += a[i][j] * pf.right(j);
    CHECK(s == doctest::Approx(lam * pf.left(i)).epsilon(1e-12));
    CHECK(pf.left(i) > 0);
  }
  CHECK(pf.left(0) == doctest::Approx(1.0));
}

TEST_CASE("PF rejects disconnected graphs") {
  BipartiteGraph g;
  g.add_left("a");
  g.add_left("b");
  g.add_right("x");
  g.add_right("y");
  g.add_edge("a", "x");
  g.add_edge("b", "y");
  CHECK_FALSE(g.connected());
  CHECK_THROWS_AS(perron_frobenius(g, pol()), std::domain_error);
}

TEST_CASE("graph construction errors") {
  BipartiteGraph g;
  g.add_left("a");
  CHECK_THROWS_AS(g.add_left("a"), StructuralError);
  CHECK_THROWS_AS(g.add_edge("a", "x"), StructuralError);
  g.add_right("x");
  g.add_edge("a", "x");
  g.add_edge("a", "x");  // a second parallel edge gets the next ordinal
  CHECK(g.adjacency()[0][0] == 2);
  CHECK_THROWS_AS(parse_graph("L a\nQ b\n"), StructuralError);
  CHECK_THROWS_AS(parse_graph("L a\nE a\n"), StructuralError);
}

TEST_CASE("graph text round trip") {
  BipartiteGraph g = path_graph(6);
  BipartiteGraph h = parse_graph(format_graph(g));
  CHECK(h.left == g.left);
  CHECK(h.right == g.right);
  CHECK(h.adjacency() == g.adjacency());
  CHECK(g.transpose().transpose().adjacency() == g.adjacency());
}

TEST_CASE("kappa vertical graph") {
  BipartiteGraph v = reconstruct_kappa_vertical();
  CHECK(v.left.size() == 15);
  CHECK(v.right.size() == 12);
  CHECK(v.edges.size() == 25);
  CHECK(spectral_norm(v) * spectral_norm(v) == doctest::Approx((5 + std::sqrt(17.0)) / 2).epsilon(1e-12));
}

TEST_CASE("table disagreement is a data-integrity error") {
  std::string dir = std::filesystem::temp_directory_path().string();
  std::string rb = slurp(data_dir() + "/kappa_rbar.coef");
  // drop the first record of the rbar table
  std::istringstream in(rb);
  std::string out, line;
  bool dropped = false;
  while (std::getline(in, line)) {
    if (!dropped && line.rfind("C ", 0) == 0) {
      dropped = true;
      continue;
    }
    out += line + "\n";
  }
  std::string path = dir + "/ahcat_rbar_broken.coef";
  std::ofstream(path) << out;
  CHECK_THROWS_WITH_AS(reconstruct_kappa_vertical("", path), doctest::Contains("data-integrity"), StructuralError);
  std::filesystem::remove(path);
}

TEST_CASE("kappa square closes and carries the PF norms") {
  const KappaSquare& ks = fixture::kappa_square();
  SquareReport r = validate_square(ks.square);
  CHECK(r.valid);
  CHECK(r.cells > 0);
  CHECK(ks.closing_splits >= 1);
  CHECK(ks.alpha_compatible >= 1);
  double beta = num("beta");
  CHECK(perron_frobenius(ks.square.G0, pol()).eigenvalue.to_double() == doctest::Approx(beta).epsilon(1e-12));
  CHECK(perron_frobenius(ks.square.G2, pol()).eigenvalue.to_double() == doctest::Approx(beta).epsilon(1e-12));
  CHECK(spectral_norm(ks.square.G1) == doctest::Approx(beta).epsilon(1e-12));
  CHECK(spectral_norm(ks.square.G3) == doctest::Approx(beta).epsilon(1e-12));
}

TEST_CASE("square validation") {
  FourGraphSquare sq = fixture::a3_square();
  CHECK(validate_square(sq).valid);
  CHECK(validate_square(parse_square(format_square(sq))).cells == validate_square(sq).cells);
  FourGraphSquare bad = sq;
  bad.G1.add_left("lonely");
  bad.V1.push_back("lonely");
  bad.G0.add_right("lonely");
  CHECK_THROWS_WITH_AS(validate_square(bad), doctest::Contains("degree 0"), StructuralError);
  bad = sq;
  bad.V2.push_back("w9");
  CHECK_THROWS_AS(validate_square(bad), StructuralError);
  CHECK_THROWS_AS(parse_square("G0\nL a\n"), StructuralError);
}

TEST_CASE("tilde involution") {
  std::vector<std::string> u{"a", "a~", "b"};
  CHECK(tilde("a", u) == "a~");
  CHECK(tilde("a~", u) == "a");
  CHECK(tilde("b", u) == "b");
}
