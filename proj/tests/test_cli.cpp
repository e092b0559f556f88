// Runs the ahcat binary and checks exit codes and report lines.
#include "common.hpp"

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>

using namespace ahcat;

namespace {

namespace fs = std::filesystem;

struct Run {
  int code = -1;
  std::string out;
};

fs::path scratch() {
  static fs::path dir = [] {
    fs::path p = fs::temp_directory_path() / ("ahcat_cli_" + std::to_string(::getpid()));
    fs::create_directories(p);
    return p;
  }();
  return dir;
}

Run run(const std::string& args) {
  fs::path out = scratch() / "stdout.txt";
  std::string cmd = std::string(AHCAT_BIN) + " " + args + " > " + out.string() + " 2>&1";
  int status = std::system(cmd.c_str());
  Run r;
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.out = slurp(out.string());
  return r;
}

void write(const fs::path& p, const std::string& text) { std::ofstream(p) << text; }

bool has_line(const std::string& out, const std::string& prefix) {
  std::istringstream in(out);
  for (std::string line; std::getline(in, line);)
    if (line.rfind(prefix, 0) == 0) return true;
  return false;
}

}  // namespace

TEST_CASE("cli: usage errors exit 2") {
  CHECK(run("").code == 2);
  CHECK(run("frobnicate").code == 2);
  CHECK(run("check").code == 2);
  CHECK(run("--tol -1 solve").code == 2);
}

TEST_CASE("cli: solve then check") {
  fs::path conn = scratch() / "kappa.conn";
  Run s = run("solve --out " + conn.string());
  CHECK(s.code == 0);
  CHECK(has_line(s.out, "SECTION solve PASS"));
  Run c = run("check --connection " + conn.string());
  CHECK(c.code == 0);
  CHECK(has_line(c.out, "SECTION biunitarity PASS"));
}

TEST_CASE("cli: a corrupted connection file exits 2") {
  fs::path conn = scratch() / "kappa.conn";
  REQUIRE(run("solve --out " + conn.string()).code == 0);
  std::string text = slurp(conn.string());
  auto pos = text.find("CELL ");
  REQUIRE(pos != std::string::npos);
  write(scratch() / "broken.conn", text.substr(0, pos) + "CELL x y z\n" + text.substr(pos));
  CHECK(run("check --connection " + (scratch() / "broken.conn").string()).code == 2);
  CHECK(run("check --connection " + (scratch() / "missing.conn").string()).code == 2);
}

TEST_CASE("cli: a non-unitary connection fails verification") {
  fs::path conn = scratch() / "kappa.conn";
  REQUIRE(run("solve --out " + conn.string()).code == 0);
  std::string text = slurp(conn.string());
  // double the value of the first cell
  auto pos = text.find("CELL ");
  auto eol = text.find('\n', pos);
  std::istringstream ls(text.substr(pos, eol - pos));
  std::string tag, e0, e1, e2, e3, re;
  ls >> tag >> e0 >> e1 >> e2 >> e3 >> re;
  double v = std::stod(re);
  std::string rest;
  std::getline(ls, rest);
  std::string line = tag + " " + e0 + " " + e1 + " " + e2 + " " + e3 + " " + format_double(2 * v + 0.5) + rest;
  write(scratch() / "skewed.conn", text.substr(0, pos) + line + text.substr(eol));
  Run r = run("check --connection " + (scratch() / "skewed.conn").string());
  CHECK(r.code == 1);
  CHECK(has_line(r.out, "SECTION biunitarity FAIL"));
}

TEST_CASE("cli: eval prints matrix entries and single coefficients") {
  std::string dgm = data_dir() + "/diagrams/vertices/r_rho.dgm";
  Run r = run("eval --diagram " + dgm);
  CHECK(r.code == 0);
  CHECK(has_line(r.out, "DIAGRAM [] -> [r r]"));
  CHECK(has_line(r.out, "E * *.b.* "));
  Run c = run("eval --diagram " + dgm + " --coef '*' '*.b.*'");
  CHECK(c.code == 0);
  CHECK(c.out.find("COEF * *.b.* 1.8872") != std::string::npos);
  Run t = run("eval --registry tables --diagram " + dgm + " --coef '*' '*.b.*'");
  CHECK(t.code == 0);
  CHECK(run("eval --registry nonsense --diagram " + dgm).code == 2);
}

TEST_CASE("cli: fusion and principal graph") {
  fs::path ring = scratch() / "sigma.ring";
  Run f = run("fusion --generators sigma --out " + ring.string());
  CHECK(f.code == 0);
  CHECK(has_line(f.out, "SECTION fusion-ring PASS"));
  Run p = run("principal-graph --ring " + ring.string() + " --algebra Id+sigma");
  CHECK(p.code == 0);
  CHECK(has_line(p.out, "SECTION principal-graph PASS"));
  Run shallow = run("fusion --generators sigma --depth 1");
  CHECK(shallow.code == 1);
  CHECK(has_line(shallow.out, "SECTION fusion-ring FAIL"));
}

TEST_CASE("cli: an unsatisfiable principal graph exits 1") {
  // Z/2 with gamma = Id + 2x: L = [[1,2],[2,1]] has no integer factorization.
  write(scratch() / "z2.ring",
        "S Id dual=Id dim=1\nS x dual=x dim=1\nN Id Id Id 1\nN Id x x 1\nN x Id x 1\nN x x Id 1\n");
  Run r = run("principal-graph --ring " + (scratch() / "z2.ring").string() + " --algebra Id+2*x");
  CHECK(r.code == 1);
  CHECK(has_line(r.out, "SECTION synthesis FAIL"));
  CHECK(run("principal-graph --ring " + (scratch() / "z2.ring").string() + " --algebra Id+y").code == 2);
}

TEST_CASE("cli: verify-paper on the A3 square") {
  std::string sq = data_dir() + "/squares/a3.square";
  Run r = run("verify-paper --square " + sq);
  CHECK(has_line(r.out, "SECTION solve PASS"));
  CHECK(has_line(r.out, "SECTION canonical-associativity PASS"));
  CHECK(has_line(r.out, "SECTION canonical-index PASS"));
  CHECK(has_line(r.out, "SECTION hom-dimensions SKIP"));
  // the zig-zag equals 1/dim(kappa), not 1/dim(kappa)^2
  CHECK(has_line(r.out, "SECTION conjugacy FAIL"));
  CHECK(r.code == 1);
  CHECK(run("verify-paper --registry tables --square " + sq).code == 2);
}

TEST_CASE("cli: report file") {
  fs::path rep = scratch() / "report.txt";
  Run r = run("--report " + rep.string() + " solve");
  CHECK(r.code == 0);
  CHECK(slurp(rep.string()) == r.out);
}
