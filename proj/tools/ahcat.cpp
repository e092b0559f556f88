// Command-line front end. Exit codes: 0 pass, 1 verification failure, 2 structural or usage error.
#include "ahcat/qsystem.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

using namespace ahcat;

namespace {

struct Globals {
  double tol = 1e-9;
  unsigned seed = 0;
  int precision = 0;
  std::string report;
};

TolerancePolicy policy(const Globals& g) {
  TolerancePolicy pol = TolerancePolicy::from_env();
  pol.eq_tol = g.tol;
  if (g.precision > 0) pol.precision_digits = g.precision;
  pol.validate();
  set_precision(pol.precision_digits);
  return pol;
}

void emit(const std::string& text, const Globals& g) {
  std::cout << text;
  if (!g.report.empty()) {
    std::ofstream f(g.report);
    if (!f) throw StructuralError("cannot write " + g.report);
    f << text;
  }
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream f(path);
  if (!f) throw StructuralError("cannot write " + path);
  f << text;
}

Connection kappa_connection(const Globals& g, const TolerancePolicy& pol, const std::string& file) {
  if (!file.empty()) return read_connection(file, pol);
  KappaSquare ks = assemble_kappa_square(reconstruct_kappa_vertical(), pol);
  return solve_connection(ks.square, g.seed, pol);
}

// Connections addressable by name on the command line.
Connection named(const VertexRegistry& reg, const std::string& name) {
  const StrandSet& S = *reg.strands;
  if (name == "sigma") {
    Connection s = compose({&S.get("kb").conn, &S.get("a").conn, &S.get("k").conn});
    s.name = "sigma";
    return s;
  }
  std::vector<std::string> parts;
  std::stringstream ss(name);
  for (std::string p; std::getline(ss, p, '.');) parts.push_back(p);
  std::vector<const Connection*> cs;
  for (auto& p : parts) cs.push_back(&S.get(p).conn);
  Connection c = cs.size() == 1 ? *cs[0] : compose(cs);
  c.name = name;
  return c;
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  for (std::string p; std::getline(ss, p, ',');)
    if (!p.empty()) out.push_back(p);
  return out;
}

int run_solve(const Globals& g, const std::string& square, const std::string& out) {
  TolerancePolicy pol = policy(g);
  FourGraphSquare sq;
  if (square.empty()) {
    sq = assemble_kappa_square(reconstruct_kappa_vertical(), pol).square;
  } else {
    sq = read_square(square);
    SquareReport sr = validate_square(sq);
    if (!sr.valid) throw StructuralError("invalid square: " + sr.message);
  }
  SolveInfo info;
  Connection c = solve_connection(sq, g.seed, pol, {}, &info);
  if (!out.empty()) write_file(out, format_connection(sq, c));
  Report rep;
  double res = solver_residual(c);
  rep.add("solve", "biunitary-connection", res <= pol.solver_tol, res,
          "attempts=" + std::to_string(info.attempts) + " cells=" + std::to_string(c.cell_count()));
  emit(rep.str(), g);
  return rep.pass() ? 0 : 1;
}

int run_check(const Globals& g, const std::string& file) {
  TolerancePolicy pol = policy(g);
  FourGraphSquare sq;
  Connection c = read_connection(file, pol, &sq);
  BiunitarityReport bu = check_biunitarity(c, pol);
  Report rep;
  rep.add("biunitarity", "biunitary-connection", bu.pass, std::max(bu.unitarity, bu.renormalization), bu.str());
  emit(rep.str(), g);
  return rep.pass() ? 0 : 1;
}

int run_eval(const Globals& g, const std::string& diagram, const std::vector<std::string>& registry,
             const std::vector<std::string>& coef) {
  TolerancePolicy pol = policy(g);
  std::string source = registry.empty() ? "connection" : registry[0];
  std::string file = registry.size() > 1 ? registry[1] : "";
  if (source != "connection" && source != "tables") throw StructuralError("--registry must be tables or connection");
  Connection K = kappa_connection(g, pol, file);
  VertexRegistry reg = source == "tables" ? registry_from_tables(K, pol) : registry_from_connection(K, pol);
  Diagram d = read_diagram(diagram, reg);
  std::ostringstream os;
  os << "DIAGRAM [" << word_key(d.top) << "] -> [" << word_key(d.bottom) << "]\n";
  if (coef.size() == 2) {
    CoefficientResult c = coefficient(d, reg, coef[0], coef[1]);
    os << "COEF " << coef[0] << " " << coef[1] << " " << format_double(c.value.real());
    if (std::abs(c.value.imag()) > pol.eq_tol) os << " " << format_double(c.value.imag()) << "i";
    os << " states=" << c.states << "\n";
  } else {
    DenseMap m = evaluate(d, reg);
    for (size_t j = 0; j < m.src->size(); ++j)
      for (size_t i = 0; i < m.dst->size(); ++i) {
        cplx v = m.M(i, j);
        if (std::abs(v) <= pol.eq_tol) continue;
        os << "E " << m.src->sp.edges[j].label << " " << m.dst->sp.edges[i].label << " " << format_double(v.real());
        if (std::abs(v.imag()) > pol.eq_tol) os << " " << format_double(v.imag()) << "i";
        os << "\n";
      }
  }
  emit(os.str(), g);
  return 0;
}

int run_fusion(const Globals& g, const std::string& generators, int depth, const std::string& out,
               const std::string& file) {
  TolerancePolicy pol = policy(g);
  Connection K = kappa_connection(g, pol, file);
  VertexRegistry reg = registry_from_connection(K, pol);
  std::vector<Connection> gens;
  for (auto& n : split_list(generators)) gens.push_back(named(reg, n));
  if (gens.empty()) throw StructuralError("--generators is empty");
  Report rep;
  try {
    FusionResult fr = fusion_ring(gens, depth);
    std::string text = format_ring(fr.ring);
    if (!out.empty()) write_file(out, text);
    rep.add("fusion-ring", "fusion-facts", true, 0.0, std::to_string(fr.ring.labels.size()) + " sectors");
    emit(text + rep.str(), g);
  } catch (const PartialRingError& e) {
    std::string frontier;
    for (auto& f : e.frontier) frontier += (frontier.empty() ? "" : ",") + f;
    rep.add("fusion-ring", "fusion-facts", false, INFINITY, std::string(e.what()) + " frontier=" + frontier);
    emit(rep.str(), g);
  }
  return rep.pass() ? 0 : 1;
}

int run_principal_graph(const Globals& g, const std::string& ring_file, const std::string& algebra, const std::string& out) {
  TolerancePolicy pol = policy(g);
  BasedRing ring = parse_ring(slurp(ring_file));
  AlgebraObject a = parse_algebra(ring, algebra);
  Report rep;
  try {
    PrincipalGraph pg = principal_graph_from_algebra(a);
    std::string text = format_graph(pg.graph);
    if (!out.empty()) write_file(out, text);
    rep.add("principal-graph", "principal-graph", true, 0.0,
            std::to_string(pg.graph.right.size()) + " odd vertices, norm^2=" + format_double(pg.norm * pg.norm));
    emit(text + rep.str(), g);
  } catch (const SynthesisFailure& e) {
    rep.add("synthesis", "principal-graph", false, INFINITY, e.what());
    emit(rep.str(), g);
  }
  (void)pol;
  return rep.pass() ? 0 : 1;
}

int run_verify(const Globals& g, const std::vector<std::string>& registry, const std::string& square) {
  PipelineOptions opt;
  opt.pol = policy(g);
  opt.seed = g.seed;
  if (!registry.empty()) opt.registry = registry[0];
  if (opt.registry != "connection" && opt.registry != "tables") throw StructuralError("--registry must be tables or connection");
  if (registry.size() > 1) opt.connection_file = registry[1];
  opt.square_file = square;
  Report rep = verify_paper(opt);
  emit(rep.str(), g);
  return rep.pass() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"ahcat: connections, intertwiner diagrams and Q-systems for the AH subfactor"};
  app.require_subcommand(1);
  Globals g;
  app.add_option("--tol", g.tol, "equality tolerance")->check(CLI::PositiveNumber);
  app.add_option("--seed", g.seed, "solver seed");
  app.add_option("--precision", g.precision, "working precision in decimal digits");
  app.add_option("--report", g.report, "also write the report to this file");

  std::string square, out, connection, diagram, generators = "a,r", ring, algebra;
  std::vector<std::string> registry, coef;
  int depth = 8;

  auto* solve = app.add_subcommand("solve", "solve a square for a biunitary connection");
  solve->add_option("--square", square, "square file (default: the kappa square)");
  solve->add_option("--out", out, "write the connection here");

  auto* check = app.add_subcommand("check", "check biunitarity of a connection file");
  check->add_option("--connection", connection, "connection file")->required();

  auto* eval = app.add_subcommand("eval", "evaluate a diagram");
  eval->add_option("--diagram", diagram, "diagram file")->required();
  eval->add_option("--registry", registry, "tables | connection [FILE]")->expected(1, 2);
  eval->add_option("--coef", coef, "single coefficient TOP BOTTOM")->expected(2);

  auto* fusion = app.add_subcommand("fusion", "saturate a fusion ring from generators");
  fusion->add_option("--generators", generators, "comma separated strand words (k, kb, a, r, sigma, k.kb, ...)");
  fusion->add_option("--depth", depth, "saturation depth");
  fusion->add_option("--out", out, "write the ring here");
  fusion->add_option("--connection", connection, "connection file (default: solve the kappa square)");

  auto* pg = app.add_subcommand("principal-graph", "principal graph of an algebra object");
  pg->add_option("--ring", ring, "ring file")->required();
  pg->add_option("--algebra", algebra, "algebra object, e.g. Id+sigma")->required();
  pg->add_option("--out", out, "write the graph here");

  auto* verify = app.add_subcommand("verify-paper", "end-to-end verification report");
  verify->add_option("--registry", registry, "tables | connection [FILE]")->expected(1, 2);
  verify->add_option("--square", square, "run on another square (AH sections are skipped)");

  for (auto* sub : {solve, check, eval, fusion, pg, verify}) sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*solve) return run_solve(g, square, out);
    if (*check) return run_check(g, connection);
    if (*eval) return run_eval(g, diagram, registry, coef);
    if (*fusion) return run_fusion(g, generators, depth, out, connection);
    if (*pg) return run_principal_graph(g, ring, algebra, out);
    if (*verify) return run_verify(g, registry, square);
  } catch (const StructuralError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::domain_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const VerificationError& e) {
    std::cerr << "verification failure: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}
