#include "ahcat/graphs.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <fstream>
#include <functional>
#include <numeric>
#include <set>
#include <sstream>

namespace ahcat {

int BipartiteGraph::left_index(const std::string& label) const {
  auto it = std::find(left.begin(), left.end(), label);
  return it == left.end() ? -1 : static_cast<int>(it - left.begin());
}

int BipartiteGraph::right_index(const std::string& label) const {
  auto it = std::find(right.begin(), right.end(), label);
  return it == right.end() ? -1 : static_cast<int>(it - right.begin());
}

void BipartiteGraph::add_left(const std::string& label) {
  if (left_index(label) >= 0) throw StructuralError("duplicate left vertex " + label);
  left.push_back(label);
}

void BipartiteGraph::add_right(const std::string& label) {
  if (right_index(label) >= 0) throw StructuralError("duplicate right vertex " + label);
  right.push_back(label);
}

void BipartiteGraph::add_edge(const std::string& l, const std::string& r, int ordinal) {
  int li = left_index(l), ri = right_index(r);
  if (li < 0 || ri < 0) throw StructuralError("edge " + l + " " + r + " references an absent vertex");
  if (ordinal < 0) {
    ordinal = 0;
    for (auto& e : edges)
      if (e.l == li && e.r == ri) ordinal = std::max(ordinal, e.ordinal + 1);
  }
  for (auto& e : edges)
    if (e.l == li && e.r == ri && e.ordinal == ordinal) throw StructuralError("duplicate edge " + l + " " + r);
  edges.push_back({li, ri, ordinal});
}

std::vector<std::vector<int>> BipartiteGraph::adjacency() const {
  std::vector<std::vector<int>> a(left.size(), std::vector<int>(right.size(), 0));
  for (auto& e : edges) a[e.l][e.r]++;
  return a;
}

std::vector<std::string> BipartiteGraph::neighbors(const std::string& label) const {
  std::vector<std::string> out;
  int li = left_index(label), ri = right_index(label);
  for (auto& e : edges) {
    if (li >= 0 && e.l == li) out.push_back(right[e.r]);
    else if (li < 0 && ri >= 0 && e.r == ri) out.push_back(left[e.l]);
  }
  return out;
}

BipartiteGraph BipartiteGraph::transpose() const {
  BipartiteGraph t;
  t.left = right;
  t.right = left;
  for (auto& e : edges) t.edges.push_back({e.r, e.l, e.ordinal});
  return t;
}

bool BipartiteGraph::connected() const {
  size_t n = left.size() + right.size();
  if (n == 0) return false;
  std::vector<std::vector<int>> nb(n);
  for (auto& e : edges) {
    int a = e.l, b = static_cast<int>(left.size()) + e.r;
    nb[a].push_back(b);
    nb[b].push_back(a);
  }
  std::vector<char> seen(n, 0);
  std::vector<int> stack{0};
  seen[0] = 1;
  size_t count = 1;
  while (!stack.empty()) {
    int v = stack.back();
    stack.pop_back();
    for (int w : nb[v])
      if (!seen[w]) {
        seen[w] = 1;
        ++count;
        stack.push_back(w);
      }
  }
  return count == n;
}

void BipartiteGraph::validate() const {
  std::set<std::string> l(left.begin(), left.end()), r(right.begin(), right.end());
  if (l.size() != left.size() || r.size() != right.size()) throw StructuralError("duplicate vertex labels");
  std::set<std::tuple<int, int, int>> ids;
  for (auto& e : edges) {
    if (e.l < 0 || e.r < 0 || e.l >= static_cast<int>(left.size()) || e.r >= static_cast<int>(right.size()))
      throw StructuralError("edge references an absent vertex");
    if (!ids.insert({e.l, e.r, e.ordinal}).second) throw StructuralError("duplicate edge identifier");
  }
}

namespace {

// Solves A x = b in place by Gaussian elimination with partial pivoting.
std::vector<Real> solve_dense(std::vector<std::vector<Real>> a, std::vector<Real> b) {
  size_t n = b.size();
  for (size_t c = 0; c < n; ++c) {
    size_t p = c;
    for (size_t r = c + 1; r < n; ++r)
      if (abs(a[r][c]) > abs(a[p][c])) p = r;
    std::swap(a[c], a[p]);
    std::swap(b[c], b[p]);
    if (a[c][c] == 0) a[c][c] = Real("1e-80");
    for (size_t r = c + 1; r < n; ++r) {
      Real f = a[r][c] / a[c][c];
      if (f == 0) continue;
      for (size_t k = c; k < n; ++k) a[r][k] -= f * a[c][k];
      b[r] -= f * b[c];
    }
  }
  std::vector<Real> x(n);
  for (size_t i = n; i-- > 0;) {
    Real s = b[i];
    for (size_t k = i + 1; k < n; ++k) s -= a[i][k] * x[k];
    x[i] = s / a[i][i];
  }
  return x;
}

}  // namespace

PFData perron_frobenius(const BipartiteGraph& g, const TolerancePolicy& pol) {
  g.validate();
  if (g.left.empty() || g.right.empty() || !g.connected()) throw std::domain_error("perron_frobenius needs a connected nonempty graph");
  auto adj = g.adjacency();
  size_t n = g.left.size(), m = g.right.size();
  // left block of the squared adjacency operator
  Eigen::MatrixXd B(n, m);
  for (size_t i = 0; i < n; ++i)
    for (size_t j = 0; j < m; ++j) B(i, j) = adj[i][j];
  Eigen::MatrixXd BBt = B * B.transpose();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(BBt);
  double lam2 = es.eigenvalues()(n - 1);
  Eigen::VectorXd u0 = es.eigenvectors().col(n - 1).cwiseAbs();

  std::vector<std::vector<Real>> M(n, std::vector<Real>(n));
  for (size_t i = 0; i < n; ++i)
    for (size_t k = 0; k < n; ++k) M[i][k] = Real(static_cast<int>(std::lround(BBt(i, k))));
  std::vector<Real> u(n);
  for (size_t i = 0; i < n; ++i) u[i] = Real(u0(i));
  Real mu = Real(lam2) * Real(1 + 1e-11);
  Real rq = Real(lam2);
  // shifted inverse iteration converges by ~11 digits per step
  for (int it = 0; it < 12; ++it) {
    auto A = M;
    for (size_t i = 0; i < n; ++i) A[i][i] -= mu;
    auto x = solve_dense(A, u);
    Real norm = 0;
    for (auto& xi : x) norm += xi * xi;
    norm = sqrt(norm);
    for (size_t i = 0; i < n; ++i) u[i] = abs(x[i] / norm);
    Real num = 0;
    for (size_t i = 0; i < n; ++i) {
      Real s = 0;
      for (size_t k = 0; k < n; ++k) s += M[i][k] * u[k];
      num += u[i] * s;
    }
    rq = num;
  }
  Real lam = sqrt(rq);
  std::vector<Real> v(m);
  for (size_t j = 0; j < m; ++j) {
    Real s = 0;
    for (size_t i = 0; i < n; ++i) s += Real(adj[i][j]) * u[i];
    v[j] = s / lam;
  }
  int star = g.left_index("*");
  if (star < 0) star = 0;
  Real norm = u[star];
  PFData pf;
  pf.eigenvalue = Scalar(lam);
  for (size_t i = 0; i < n; ++i) pf.left_weights.push_back(Scalar(Real(u[i] / norm)));
  for (size_t j = 0; j < m; ++j) pf.right_weights.push_back(Scalar(Real(v[j] / norm)));
  // eigen-equation residual gate
  double worst = 0;
  for (size_t i = 0; i < n; ++i) {
    Real s = 0;
    for (size_t j = 0; j < m; ++j) s += Real(adj[i][j]) * pf.right_weights[j].value();
    worst = std::max(worst, abs(s - lam * pf.left_weights[i].value()).convert_to<double>());
  }
  if (worst > pol.eq_tol) throw std::domain_error("perron_frobenius failed to converge");
  return pf;
}

BipartiteGraph parse_graph(const std::string& text) {
  BipartiteGraph g;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::istringstream ls(line);
    std::string tag;
    if (!(ls >> tag) || tag[0] == '#') continue;
    if (tag == "L" || tag == "R") {
      std::string label;
      if (!(ls >> label)) throw StructuralError("line " + std::to_string(lineno) + ": missing label");
      if (tag == "L") g.add_left(label);
      else g.add_right(label);
    } else if (tag == "E") {
      std::string l, r;
      int ord = -1;
      if (!(ls >> l >> r)) throw StructuralError("line " + std::to_string(lineno) + ": malformed edge");
      if (!(ls >> ord)) ord = -1;
      g.add_edge(l, r, ord);
    } else {
      throw StructuralError("line " + std::to_string(lineno) + ": unknown record '" + tag + "'");
    }
  }
  return g;
}

std::string slurp(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw StructuralError("cannot open " + path);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

BipartiteGraph read_graph(const std::string& path) { return parse_graph(slurp(path)); }

std::string format_graph(const BipartiteGraph& g) {
  std::ostringstream os;
  for (auto& l : g.left) os << "L " << l << "\n";
  for (auto& r : g.right) os << "R " << r << "\n";
  for (auto& e : g.edges) os << "E " << g.left[e.l] << " " << g.right[e.r] << " " << e.ordinal << "\n";
  return os.str();
}

std::vector<CoefficientRecord> read_coefficients(const std::string& path) {
  std::istringstream in(slurp(path));
  std::vector<CoefficientRecord> out;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::istringstream ls(line);
    std::string tag;
    if (!(ls >> tag) || tag[0] == '#') continue;
    if (tag != "C") throw StructuralError(path + ":" + std::to_string(lineno) + ": expected C record");
    CoefficientRecord rec;
    if (!(ls >> rec.row >> rec.col)) throw StructuralError(path + ":" + std::to_string(lineno) + ": malformed record");
    std::getline(ls, rec.expr);
    rec.value = parse_expression(rec.expr);
    out.push_back(std::move(rec));
  }
  return out;
}

std::string data_dir() {
  if (const char* env = std::getenv("AHCAT_DATA")) return env;
  return AHCAT_DATA_DIR;
}

namespace {
std::vector<std::string> split_path(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == '.') {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}
}  // namespace

BipartiteGraph reconstruct_kappa_vertical(const std::string& r_table, const std::string& rbar_table) {
  auto r = read_coefficients(r_table.empty() ? data_dir() + "/kappa_r.coef" : r_table);
  auto rb = read_coefficients(rbar_table.empty() ? data_dir() + "/kappa_rbar.coef" : rbar_table);
  BipartiteGraph g;
  std::set<std::pair<std::string, std::string>> from_r, from_rb;
  for (auto& rec : r) {
    if (g.left_index(rec.row) < 0) g.add_left(rec.row);
    auto p = split_path(rec.col);
    if (p.size() != 3 || p[0] != rec.row || p[2] != rec.row) throw StructuralError("r table: malformed column " + rec.col);
    from_r.insert({p[0], p[1]});
  }
  for (auto& rec : rb) {
    if (g.right_index(rec.row) < 0) g.add_right(rec.row);
    auto p = split_path(rec.col);
    if (p.size() != 3 || p[0] != rec.row || p[2] != rec.row) throw StructuralError("rbar table: malformed column " + rec.col);
    from_rb.insert({p[1], p[0]});
  }
  std::vector<std::string> bad;
  for (auto& e : from_r)
    if (!from_rb.count(e)) bad.push_back(e.first + "-" + e.second + " (only in r table)");
  for (auto& e : from_rb)
    if (!from_r.count(e)) bad.push_back(e.first + "-" + e.second + " (only in rbar table)");
  if (!bad.empty()) {
    std::string msg = "data-integrity error: tables disagree on edges:";
    for (auto& b : bad) msg += " " + b;
    throw StructuralError(msg);
  }
  for (auto& rec : r) {
    auto p = split_path(rec.col);
    if (g.right_index(p[1]) < 0) throw StructuralError("data-integrity error: vertex " + p[1] + " has no rbar row");
    g.add_edge(p[0], p[1]);
  }
  return g;
}

SquareReport validate_square(const FourGraphSquare& sq) {
  SquareReport rep;
  auto same = [](const std::vector<std::string>& a, const std::vector<std::string>& b) {
    return std::set<std::string>(a.begin(), a.end()) == std::set<std::string>(b.begin(), b.end()) && a.size() == b.size();
  };
  for (auto* g : {&sq.G0, &sq.G1, &sq.G2, &sq.G3}) g->validate();
  if (!same(sq.G0.left, sq.V0) || !same(sq.G3.left, sq.V0)) throw StructuralError("V0 mismatch between G0 and G3");
  if (!same(sq.G0.right, sq.V1) || !same(sq.G1.left, sq.V1)) throw StructuralError("V1 mismatch between G0 and G1");
  if (!same(sq.G1.right, sq.V2) || !same(sq.G2.right, sq.V2)) throw StructuralError("V2 mismatch between G1 and G2");
  if (!same(sq.G2.left, sq.V3) || !same(sq.G3.right, sq.V3)) throw StructuralError("V3 mismatch between G2 and G3");
  // degree-zero vertices are rejected
  auto check_deg = [](const BipartiteGraph& g) {
    auto a = g.adjacency();
    for (size_t i = 0; i < g.left.size(); ++i)
      if (std::accumulate(a[i].begin(), a[i].end(), 0) == 0) throw StructuralError("vertex " + g.left[i] + " has degree 0");
    for (size_t j = 0; j < g.right.size(); ++j) {
      int d = 0;
      for (auto& row : a) d += row[j];
      if (d == 0) throw StructuralError("vertex " + g.right[j] + " has degree 0");
    }
  };
  for (auto* g : {&sq.G0, &sq.G1, &sq.G2, &sq.G3}) check_deg(*g);
  auto a0 = sq.G0.adjacency(), a1 = sq.G1.adjacency(), a2 = sq.G2.adjacency(), a3 = sq.G3.adjacency();
  for (auto& x : sq.V0) {
    int xi0 = sq.G0.left_index(x), xi3 = sq.G3.left_index(x);
    for (auto& z : sq.V2) {
      int zi1 = sq.G1.right_index(z), zi2 = sq.G2.right_index(z);
      size_t top = 0, bot = 0;
      for (size_t y = 0; y < sq.V1.size(); ++y) top += a0[xi0][sq.G0.right_index(sq.V1[y])] * a1[sq.G1.left_index(sq.V1[y])][zi1];
      for (size_t w = 0; w < sq.V3.size(); ++w) bot += a3[xi3][sq.G3.right_index(sq.V3[w])] * a2[sq.G2.left_index(sq.V3[w])][zi2];
      size_t cells = top * bot;
      if (cells) rep.cells_per_corner[{x, z}] = cells;
      rep.cells += cells;
    }
  }
  if (rep.cells == 0) throw StructuralError("square supports no based loop");
  rep.valid = true;
  rep.message = "valid square with " + std::to_string(rep.cells) + " cells";
  return rep;
}

FourGraphSquare read_square(const std::string& path) { return parse_square(slurp(path)); }

FourGraphSquare parse_square(const std::string& text) {
  const std::string path = "square";
  std::istringstream in(text);
  std::string line, current;
  std::map<std::string, std::string> sections;
  while (std::getline(in, line)) {
    std::istringstream ls(line);
    std::string tag;
    if (!(ls >> tag) || tag[0] == '#') continue;
    if (tag == "G0" || tag == "G1" || tag == "G2" || tag == "G3") {
      current = tag;
      sections[current];
      continue;
    }
    if (current.empty()) throw StructuralError(path + ": graph record before any G0..G3 header");
    sections[current] += line + "\n";
  }
  if (sections.size() != 4) throw StructuralError(path + ": a square needs sections G0, G1, G2, G3");
  FourGraphSquare sq;
  sq.G0 = parse_graph(sections["G0"]);
  sq.G1 = parse_graph(sections["G1"]);
  sq.G2 = parse_graph(sections["G2"]);
  sq.G3 = parse_graph(sections["G3"]);
  sq.V0 = sq.G0.left;
  sq.V1 = sq.G0.right;
  sq.V2 = sq.G1.right;
  sq.V3 = sq.G3.right;
  return sq;
}

std::string format_square(const FourGraphSquare& sq) {
  std::ostringstream os;
  os << "G0\n" << format_graph(sq.G0) << "G1\n" << format_graph(sq.G1) << "G2\n" << format_graph(sq.G2) << "G3\n" << format_graph(sq.G3);
  return os.str();
}

std::string tilde(const std::string& label, const std::vector<std::string>& universe) {
  std::string partner;
  if (label.size() > 1 && label.back() == '~') partner = label.substr(0, label.size() - 1);
  else partner = label + "~";
  if (std::find(universe.begin(), universe.end(), partner) != universe.end()) return partner;
  return label;
}

namespace {

// Splits a bipartite graph into the component containing `seed` (left side) and the rest.
std::pair<BipartiteGraph, BipartiteGraph> split_components(const BipartiteGraph& g, const std::string& seed) {
  size_t n = g.left.size();
  std::vector<std::vector<int>> nb(n + g.right.size());
  for (auto& e : g.edges) {
    nb[e.l].push_back(static_cast<int>(n) + e.r);
    nb[n + e.r].push_back(e.l);
  }
  std::vector<char> in(nb.size(), 0);
  int s = g.left_index(seed);
  if (s < 0) throw StructuralError("seed vertex " + seed + " absent");
  std::vector<int> st{s};
  in[s] = 1;
  while (!st.empty()) {
    int v = st.back();
    st.pop_back();
    for (int w : nb[v])
      if (!in[w]) {
        in[w] = 1;
        st.push_back(w);
      }
  }
  BipartiteGraph a, b;
  for (size_t i = 0; i < n; ++i) (in[i] ? a : b).add_left(g.left[i]);
  for (size_t j = 0; j < g.right.size(); ++j) (in[n + j] ? a : b).add_right(g.right[j]);
  for (auto& e : g.edges) (in[e.l] ? a : b).add_edge(g.left[e.l], g.right[e.r], e.ordinal);
  return {a, b};
}

// Groups indices by equal weight (relative tolerance).
std::vector<std::vector<int>> weight_classes(const std::vector<double>& w) {
  std::vector<std::vector<int>> cls;
  for (size_t i = 0; i < w.size(); ++i) {
    bool placed = false;
    for (auto& c : cls)
      if (std::abs(w[c[0]] - w[i]) < 1e-8 * std::max(1.0, w[i])) {
        c.push_back(static_cast<int>(i));
        placed = true;
        break;
      }
    if (!placed) cls.push_back({static_cast<int>(i)});
  }
  return cls;
}

// Enumerates all permutations that map each weight class onto itself.
void class_perms(const std::vector<std::vector<int>>& cls, size_t k, std::vector<int>& cur,
                 std::vector<std::vector<int>>& out) {
  if (k == cls.size()) {
    out.push_back(cur);
    return;
  }
  std::vector<int> img = cls[k];
  std::sort(img.begin(), img.end());
  do {
    for (size_t i = 0; i < img.size(); ++i) cur[cls[k][i]] = img[i];
    class_perms(cls, k + 1, cur, out);
  } while (std::next_permutation(img.begin(), img.end()));
}

}  // namespace

KappaSquare assemble_kappa_square(const BipartiteGraph& vertical, const TolerancePolicy& pol) {
  auto [left_part, right_part] = split_components(vertical, vertical.left_index("*") >= 0 ? "*" : vertical.left[0]);
  if (right_part.left.empty() || right_part.right.empty()) throw StructuralError("vertical graph must have two components");
  const BipartiteGraph& G3 = left_part;   // V0 -> V3
  const BipartiteGraph& G1 = right_part;  // V1 -> V2
  auto pf3 = perron_frobenius(G3, pol);
  auto pf1 = perron_frobenius(G1, pol);
  if (std::abs(pf3.eigenvalue.to_double() - pf1.eigenvalue.to_double()) > pol.eq_tol)
    throw StructuralError("vertical components have different norms");
  size_t n0 = G3.left.size(), n3 = G3.right.size(), n1 = G1.left.size(), n2 = G1.right.size();
  if (n1 != n3) throw StructuralError("cannot match V1 with V3: sizes differ");
  std::vector<double> w0(n0), w3(n3), w1(n1);
  for (size_t i = 0; i < n0; ++i) w0[i] = pf3.left(i);
  for (size_t i = 0; i < n3; ++i) w3[i] = pf3.right(i);
  double m3 = *std::max_element(w3.begin(), w3.end());
  double m1 = 0;
  for (size_t i = 0; i < n1; ++i) m1 = std::max(m1, pf1.left(i));
  for (size_t i = 0; i < n1; ++i) w1[i] = pf1.left(i) * m3 / m1;

  std::vector<std::vector<int>> perms0, bij;
  {
    auto cls = weight_classes(w0);
    std::vector<int> cur(n0);
    class_perms(cls, 0, cur, perms0);
  }
  {
    // bijections V1 -> V3 preserving weights: classes of the joint list
    std::vector<std::vector<int>> choices(n1);
    for (size_t y = 0; y < n1; ++y)
      for (size_t w = 0; w < n3; ++w)
        if (std::abs(w1[y] - w3[w]) < 1e-8 * std::max(1.0, w3[w])) choices[y].push_back(static_cast<int>(w));
    std::vector<int> cur(n1, -1);
    std::vector<char> used(n3, 0);
    std::function<void(size_t)> rec = [&](size_t y) {
      if (y == n1) {
        bij.push_back(cur);
        return;
      }
      for (int w : choices[y])
        if (!used[w]) {
          used[w] = 1;
          cur[y] = w;
          rec(y + 1);
          used[w] = 0;
        }
    };
    rec(0);
  }
  auto a3 = G3.adjacency(), a1 = G1.adjacency();
  std::vector<std::string> all_top = G3.left;
  all_top.insert(all_top.end(), G1.left.begin(), G1.left.end());

  KappaSquare best;
  int best_cost = -1;
  for (auto& pi : perms0) {
    for (auto& phi : bij) {
      // G0[x][y] = G3[pi x][phi y];  G2[w][z] = G1[phi^-1 w][z]
      std::vector<int> phinv(n3);
      for (size_t y = 0; y < n1; ++y) phinv[phi[y]] = static_cast<int>(y);
      bool ok = true;
      for (size_t x = 0; x < n0 && ok; ++x)
        for (size_t z = 0; z < n2 && ok; ++z) {
          int top = 0, bot = 0;
          for (size_t y = 0; y < n1; ++y) top += a3[pi[x]][phi[y]] * a1[y][z];
          for (size_t w = 0; w < n3; ++w) bot += a3[x][w] * a1[phinv[w]][z];
          ok = top == bot;
        }
      for (size_t y = 0; y < n1 && ok; ++y)
        for (size_t w = 0; w < n3 && ok; ++w) {
          int top = 0, bot = 0;
          for (size_t x = 0; x < n0; ++x) top += a3[pi[x]][phi[y]] * a3[x][w];
          for (size_t z = 0; z < n2; ++z) bot += a1[y][z] * a1[phinv[w]][z];
          ok = top == bot;
        }
      if (!ok) continue;
      ++best.closing_splits;
      // the involution x <-> x~ must be an automorphism of the top horizontal graph
      bool alpha_ok = true;
      for (size_t x = 0; x < n0 && alpha_ok; ++x)
        for (size_t y = 0; y < n1 && alpha_ok; ++y) {
          int tx = G3.left_index(tilde(G3.left[x], all_top));
          int ty = G1.left_index(tilde(G1.left[y], all_top));
          if (tx < 0 || ty < 0) alpha_ok = false;
          else alpha_ok = a3[pi[x]][phi[y]] == a3[pi[tx]][phi[ty]];
        }
      if (!alpha_ok) continue;
      ++best.alpha_compatible;
      // prefer the relabeling closest to the naming convention (a -> A, fixed left labels)
      int cost = 0;
      for (size_t x = 0; x < n0; ++x) cost += pi[x] != static_cast<int>(x);
      for (size_t y = 0; y < n1; ++y) {
        std::string up = G1.left[y];
        for (auto& c : up) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
        cost += up != G3.right[phi[y]];
      }
      if (best_cost >= 0 && cost >= best_cost) continue;
      best_cost = cost;
      FourGraphSquare sq;
      sq.V0 = G3.left;
      sq.V3 = G3.right;
      sq.V1 = G1.left;
      sq.V2 = G1.right;
      sq.G3 = G3;
      sq.G1 = G1;
      sq.G0 = BipartiteGraph{};
      sq.G0.left = sq.V0;
      sq.G0.right = sq.V1;
      for (size_t x = 0; x < n0; ++x)
        for (size_t y = 0; y < n1; ++y)
          for (int k = 0; k < a3[pi[x]][phi[y]]; ++k) sq.G0.add_edge(sq.V0[x], sq.V1[y], k);
      sq.G2 = BipartiteGraph{};
      sq.G2.left = sq.V3;
      sq.G2.right = sq.V2;
      for (size_t w = 0; w < n3; ++w)
        for (size_t z = 0; z < n2; ++z)
          for (int k = 0; k < a1[phinv[w]][z]; ++k) sq.G2.add_edge(sq.V3[w], sq.V2[z], k);
      best.square = sq;
      best.left_relabel.clear();
      best.right_bijection.clear();
      for (size_t x = 0; x < n0; ++x) best.left_relabel[G3.left[x]] = G3.left[pi[x]];
      for (size_t y = 0; y < n1; ++y) best.right_bijection[G1.left[y]] = G3.right[phi[y]];
    }
  }
  if (best.alpha_compatible == 0) throw StructuralError("no relabeling closes the kappa square");
  validate_square(best.square);
  return best;
}

}  // namespace ahcat
