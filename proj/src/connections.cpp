#include "ahcat/connections.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <numeric>
#include <random>
#include <sstream>

namespace ahcat {

RowPtr Row::make(std::string name, const BipartiteGraph& g, std::vector<double> muL, std::vector<double> muR) {
  auto row = std::make_shared<Row>();
  row->name = std::move(name);
  row->L = g.left;
  row->R = g.right;
  row->muL = std::move(muL);
  row->muR = std::move(muR);
  row->adj = g.adjacency();
  row->nbrR.assign(g.left.size(), {});
  row->nbrL.assign(g.right.size(), {});
  for (size_t x = 0; x < g.left.size(); ++x)
    for (size_t y = 0; y < g.right.size(); ++y) {
      if (row->adj[x][y] > 1) throw StructuralError("horizontal graphs must be simple");
      if (row->adj[x][y]) {
        row->nbrR[x].push_back(static_cast<int>(y));
        row->nbrL[y].push_back(static_cast<int>(x));
      }
    }
  return row;
}

int Row::l(const std::string& s) const {
  auto it = std::find(L.begin(), L.end(), s);
  return it == L.end() ? -1 : static_cast<int>(it - L.begin());
}

int Row::r(const std::string& s) const {
  auto it = std::find(R.begin(), R.end(), s);
  return it == R.end() ? -1 : static_cast<int>(it - R.begin());
}

bool same_row(const RowPtr& a, const RowPtr& b) { return a == b || (a->name == b->name && a->L == b->L && a->R == b->R && a->adj == b->adj); }

int VSpace::find(const std::string& label) const {
  auto it = index.find(label);
  return it == index.end() ? -1 : it->second;
}

std::vector<int> VSpace::finalize() {
  std::vector<int> order(edges.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int i, int j) {
    const auto &a = edges[i], &b = edges[j];
    if (a.a != b.a) return a.a < b.a;
    if (a.b != b.b) return a.b < b.b;
    return a.label < b.label;
  });
  std::vector<Edge> sorted;
  sorted.reserve(edges.size());
  std::vector<int> oldToNew(edges.size());
  for (size_t k = 0; k < order.size(); ++k) {
    oldToNew[order[k]] = static_cast<int>(k);
    sorted.push_back(edges[order[k]]);
  }
  edges = std::move(sorted);
  pair.assign(static_cast<size_t>(nA) * nB, {});
  pos.assign(edges.size(), 0);
  index.clear();
  for (size_t k = 0; k < edges.size(); ++k) {
    auto& p = pair[static_cast<size_t>(edges[k].a) * nB + edges[k].b];
    pos[k] = static_cast<int>(p.size());
    p.push_back(static_cast<int>(k));
    if (!index.emplace(edges[k].label, static_cast<int>(k)).second) throw StructuralError("duplicate edge label " + edges[k].label);
  }
  return oldToNew;
}

VSpace identity_space(int n, const std::vector<std::string>& labels) {
  VSpace v;
  v.nA = v.nB = n;
  for (int i = 0; i < n; ++i) v.edges.push_back({i, i, labels[i]});
  v.finalize();
  return v;
}

std::string join_labels(const std::string& a, const std::string& b) {
  auto p = b.find('.');
  if (p == std::string::npos) return a;
  return a + b.substr(p);
}

VSpace compose_spaces(const VSpace& A, const VSpace& B, std::vector<std::pair<int, int>>* parts) {
  if (A.nB != B.nA) throw StructuralError("vertical spaces do not compose");
  VSpace v;
  v.nA = A.nA;
  v.nB = B.nB;
  std::vector<std::pair<int, int>> pp;
  for (int a = 0; a < A.nA; ++a)
    for (int b = 0; b < A.nB; ++b)
      for (int e : A.at(a, b))
        for (int c = 0; c < B.nB; ++c)
          for (int f : B.at(b, c)) {
            v.edges.push_back({a, c, join_labels(A.edges[e].label, B.edges[f].label)});
            pp.push_back({e, f});
          }
  auto map = v.finalize();
  if (parts) {
    parts->assign(pp.size(), {});
    for (size_t k = 0; k < pp.size(); ++k) (*parts)[map[k]] = pp[k];
  }
  return v;
}

namespace {

// A parallel-edge ordinal "#k" sits on the vertex a step arrives at; reversing the path
// moves it to the vertex the reversed step arrives at, one position earlier.
std::string reverse_label(const std::string& s) {
  std::vector<std::string> name, tag;
  std::stringstream in(s);
  for (std::string t; std::getline(in, t, '.');) {
    auto h = t.find('#');
    name.push_back(t.substr(0, h));
    tag.push_back(h == std::string::npos ? "" : t.substr(h));
  }
  size_t n = name.size();
  std::string out;
  for (size_t j = 0; j < n; ++j) {
    if (j) out += '.';
    out += name[n - 1 - j];
    if (j) out += tag[n - j];
  }
  return out;
}

// Reverses a space and reports, for each new edge, the original edge id.
VSpace reverse_with_map(const VSpace& a, std::vector<int>& orig) {
  VSpace v;
  v.nA = a.nB;
  v.nB = a.nA;
  for (auto& e : a.edges) v.edges.push_back({e.b, e.a, reverse_label(e.label)});
  auto map = v.finalize();
  orig.assign(a.edges.size(), 0);
  for (size_t k = 0; k < map.size(); ++k) orig[map[k]] = static_cast<int>(k);
  return v;
}

}  // namespace

VSpace reverse_space(const VSpace& a) {
  std::vector<int> orig;
  return reverse_with_map(a, orig);
}

void Connection::build_blocks() {
  size_t nx = top->L.size(), nz = bot->R.size();
  W.assign(nx * nz, {});
  for (size_t x = 0; x < nx; ++x)
    for (size_t z = 0; z < nz; ++z) {
      Block& b = W[x * nz + z];
      b.rowOff.assign(bot->L.size(), -1);
      b.colOff.assign(top->R.size(), -1);
      for (int w : bot->nbrL[z]) {
        b.rowOff[w] = static_cast<int>(b.rows.size());
        for (int e : left.at(static_cast<int>(x), w)) b.rows.push_back(e);
      }
      for (int y : top->nbrR[x]) {
        b.colOff[y] = static_cast<int>(b.cols.size());
        for (int f : right.at(y, static_cast<int>(z))) b.cols.push_back(f);
      }
      b.M = MatrixC::Zero(b.rows.size(), b.cols.size());
    }
}

cplx Connection::cell(int x, int z, int eL, int eR) const {
  const Block& b = block(x, z);
  int w = left.edges[eL].b, y = right.edges[eR].a;
  int ro = b.rowOff[w], co = b.colOff[y];
  if (ro < 0 || co < 0) return 0;
  return b.M(ro + left.pos[eL], co + right.pos[eR]);
}

size_t Connection::cell_count() const {
  size_t n = 0;
  for (auto& b : W) n += b.rows.size() * b.cols.size();
  return n;
}

std::string BiunitarityReport::str() const {
  std::ostringstream os;
  os << "unitarity " << std::scientific << std::setprecision(3) << unitarity << " renormalization " << renormalization
     << (square_blocks ? "" : " (non-square block)") << (pass ? " PASS" : " FAIL");
  return os.str();
}

MatrixC reflected_block(const Connection& c, int y, int w, std::vector<std::pair<int, int>>* rows,
                        std::vector<std::pair<int, int>>* cols) {
  std::vector<std::pair<int, int>> r, k;
  for (int x : c.top->nbrL[y])
    for (int e : c.left.at(x, w)) r.push_back({x, e});
  for (int z : c.bot->nbrR[w])
    for (int f : c.right.at(y, z)) k.push_back({z, f});
  MatrixC U = MatrixC::Zero(r.size(), k.size());
  double my = c.top->muR[y], mw = c.bot->muL[w];
  for (size_t i = 0; i < r.size(); ++i)
    for (size_t j = 0; j < k.size(); ++j) {
      int x = r[i].first, z = k[j].first;
      double s = std::sqrt(c.top->muL[x] * c.bot->muR[z] / (my * mw));
      U(i, j) = s * std::conj(c.cell(x, z, r[i].second, k[j].second));
    }
  if (rows) *rows = r;
  if (cols) *cols = k;
  return U;
}

namespace {
double unitarity_defect(const MatrixC& M) {
  if (M.rows() == 0 && M.cols() == 0) return 0;
  return (M * M.adjoint() - MatrixC::Identity(M.rows(), M.rows())).cwiseAbs().maxCoeff();
}
}  // namespace

BiunitarityReport check_biunitarity(const Connection& c, const TolerancePolicy& pol) {
  BiunitarityReport rep;
  for (auto& b : c.W) {
    if (b.rows.size() != b.cols.size()) {
      rep.square_blocks = false;
      continue;
    }
    rep.unitarity = std::max(rep.unitarity, unitarity_defect(b.M));
  }
  for (size_t y = 0; y < c.top->R.size(); ++y)
    for (size_t w = 0; w < c.bot->L.size(); ++w) {
      MatrixC U = reflected_block(c, static_cast<int>(y), static_cast<int>(w));
      if (U.rows() != U.cols()) {
        rep.square_blocks = false;
        continue;
      }
      rep.renormalization = std::max(rep.renormalization, unitarity_defect(U));
    }
  rep.pass = rep.square_blocks && rep.unitarity <= pol.eq_tol && rep.renormalization <= pol.eq_tol;
  return rep;
}

Connection identity_connection(const RowPtr& row) {
  Connection c;
  c.name = "Id_" + row->name;
  c.top = c.bot = row;
  c.left = identity_space(static_cast<int>(row->L.size()), row->L);
  c.right = identity_space(static_cast<int>(row->R.size()), row->R);
  c.build_blocks();
  for (auto& b : c.W)
    if (b.M.size()) b.M.setIdentity();
  return c;
}

Connection permutation_connection(const RowPtr& row, const std::vector<int>& permL, const std::vector<int>& permR,
                                  const std::string& name) {
  size_t nL = row->L.size(), nR = row->R.size();
  if (permL.size() != nL || permR.size() != nR) throw StructuralError("permutation size mismatch");
  for (size_t x = 0; x < nL; ++x)
    for (size_t y = 0; y < nR; ++y)
      if (row->adj[x][y] != row->adj[permL[x]][permR[y]]) throw StructuralError("permutation is not a graph automorphism");
  Connection c;
  c.name = name;
  c.top = c.bot = row;
  c.left.nA = c.left.nB = static_cast<int>(nL);
  c.right.nA = c.right.nB = static_cast<int>(nR);
  for (size_t x = 0; x < nL; ++x) c.left.edges.push_back({static_cast<int>(x), permL[x], row->L[x] + "." + row->L[permL[x]]});
  for (size_t y = 0; y < nR; ++y) c.right.edges.push_back({static_cast<int>(y), permR[y], row->R[y] + "." + row->R[permR[y]]});
  c.left.finalize();
  c.right.finalize();
  c.build_blocks();
  for (auto& b : c.W)
    if (b.M.size()) b.M.setIdentity();
  return c;
}

Connection compose(const Connection& a, const Connection& b) {
  if (!same_row(a.bot, b.top)) throw StructuralError("compose: " + a.name + " and " + b.name + " do not share a row");
  Connection c;
  c.name = a.name + "." + b.name;
  c.top = a.top;
  c.bot = b.bot;
  std::vector<std::pair<int, int>> pl, pr;
  c.left = compose_spaces(a.left, b.left, &pl);
  c.right = compose_spaces(a.right, b.right, &pr);
  c.build_blocks();
  size_t nz = c.bot->R.size();
  for (size_t x = 0; x < c.top->L.size(); ++x)
    for (size_t t = 0; t < nz; ++t) {
      Block& bl = c.W[x * nz + t];
      for (size_t i = 0; i < bl.rows.size(); ++i) {
        auto [e, e2] = pl[bl.rows[i]];
        int w = a.left.edges[e].b;
        for (size_t j = 0; j < bl.cols.size(); ++j) {
          auto [f, f2] = pr[bl.cols[j]];
          int z = a.right.edges[f].b;
          if (!a.bot->adj[w][z]) continue;
          cplx va = a.cell(static_cast<int>(x), z, e, f);
          if (va == cplx(0)) continue;
          bl.M(i, j) = va * b.cell(w, static_cast<int>(t), e2, f2);
        }
      }
    }
  return c;
}

Connection compose(const std::vector<const Connection*>& parts) {
  if (parts.empty()) throw StructuralError("compose of an empty word");
  Connection c = *parts[0];
  for (size_t i = 1; i < parts.size(); ++i) c = compose(c, *parts[i]);
  return c;
}

Connection conjugate(const Connection& c) {
  Connection r;
  r.name = c.name.size() > 3 && c.name.compare(c.name.size() - 3, 3, "bar") == 0 ? c.name.substr(0, c.name.size() - 3)
                                                                                : c.name + "bar";
  r.top = c.bot;
  r.bot = c.top;
  std::vector<int> ol, orr;
  r.left = reverse_with_map(c.left, ol);
  r.right = reverse_with_map(c.right, orr);
  r.build_blocks();
  size_t nz = r.bot->R.size();
  for (size_t w = 0; w < r.top->L.size(); ++w)
    for (size_t y = 0; y < nz; ++y) {
      Block& bl = r.W[w * nz + y];
      for (size_t i = 0; i < bl.rows.size(); ++i) {
        int e = ol[bl.rows[i]];
        int x = c.left.edges[e].a;
        for (size_t j = 0; j < bl.cols.size(); ++j) {
          int f = orr[bl.cols[j]];
          int z = c.right.edges[f].b;
          double s = std::sqrt(c.top->muL[x] * c.bot->muR[z] / (c.top->muR[y] * c.bot->muL[w]));
          bl.M(i, j) = s * std::conj(c.cell(x, z, e, f));
        }
      }
    }
  return r;
}

Connection direct_sum(const Connection& a, const Connection& b) {
  if (!same_row(a.top, b.top) || !same_row(a.bot, b.bot)) throw StructuralError("direct_sum: horizontal graphs differ");
  Connection c;
  c.name = a.name + "+" + b.name;
  c.top = a.top;
  c.bot = a.bot;
  auto merge = [](const VSpace& x, const VSpace& y, std::vector<int>& fromA, std::vector<int>& fromB) {
    VSpace v;
    v.nA = x.nA;
    v.nB = x.nB;
    for (auto& e : x.edges) v.edges.push_back(e);
    for (auto& e : y.edges) {
      auto ed = e;
      while (x.index.count(ed.label)) ed.label += "'";
      v.edges.push_back(ed);
    }
    auto map = v.finalize();
    fromA.assign(v.size(), -1);
    fromB.assign(v.size(), -1);
    for (size_t k = 0; k < x.size(); ++k) fromA[map[k]] = static_cast<int>(k);
    for (size_t k = 0; k < y.size(); ++k) fromB[map[x.size() + k]] = static_cast<int>(k);
    return v;
  };
  std::vector<int> la, lb, ra, rb;
  c.left = merge(a.left, b.left, la, lb);
  c.right = merge(a.right, b.right, ra, rb);
  c.build_blocks();
  size_t nz = c.bot->R.size();
  for (size_t x = 0; x < c.top->L.size(); ++x)
    for (size_t z = 0; z < nz; ++z) {
      Block& bl = c.W[x * nz + z];
      for (size_t i = 0; i < bl.rows.size(); ++i)
        for (size_t j = 0; j < bl.cols.size(); ++j) {
          int e = bl.rows[i], f = bl.cols[j];
          if (la[e] >= 0 && ra[f] >= 0) bl.M(i, j) = a.cell(static_cast<int>(x), static_cast<int>(z), la[e], ra[f]);
          else if (lb[e] >= 0 && rb[f] >= 0) bl.M(i, j) = b.cell(static_cast<int>(x), static_cast<int>(z), lb[e], rb[f]);
        }
    }
  return c;
}

GaugeTransform GaugeTransform::identity(const Connection& c) {
  GaugeTransform g;
  for (auto& p : c.left.pair) g.left.push_back(MatrixC::Identity(p.size(), p.size()));
  for (auto& p : c.right.pair) g.right.push_back(MatrixC::Identity(p.size(), p.size()));
  return g;
}

namespace {
MatrixC random_unitary(size_t n, std::mt19937_64& rng) {
  std::normal_distribution<double> nd;
  MatrixC A(n, n);
  for (size_t i = 0; i < n; ++i)
    for (size_t j = 0; j < n; ++j) A(i, j) = cplx(nd(rng), nd(rng));
  Eigen::HouseholderQR<MatrixC> qr(A);
  MatrixC Q = qr.householderQ();
  return Q;
}
}  // namespace

GaugeTransform GaugeTransform::random(const Connection& c, unsigned seed) {
  std::mt19937_64 rng(seed);
  GaugeTransform g;
  for (auto& p : c.left.pair) g.left.push_back(random_unitary(p.size(), rng));
  for (auto& p : c.right.pair) g.right.push_back(random_unitary(p.size(), rng));
  return g;
}

Connection apply_gauge(const Connection& c, const GaugeTransform& g) {
  if (g.left.size() != c.left.pair.size() || g.right.size() != c.right.pair.size()) throw StructuralError("gauge shape mismatch");
  for (size_t k = 0; k < c.left.pair.size(); ++k)
    if (static_cast<size_t>(g.left[k].rows()) != c.left.pair[k].size() || g.left[k].rows() != g.left[k].cols())
      throw StructuralError("gauge block shape mismatch");
  for (size_t k = 0; k < c.right.pair.size(); ++k)
    if (static_cast<size_t>(g.right[k].rows()) != c.right.pair[k].size() || g.right[k].rows() != g.right[k].cols())
      throw StructuralError("gauge block shape mismatch");
  Connection r = c;
  size_t nz = c.bot->R.size();
  for (size_t x = 0; x < c.top->L.size(); ++x)
    for (size_t z = 0; z < nz; ++z) {
      Block& bl = r.W[x * nz + z];
      if (bl.M.size() == 0) continue;
      MatrixC DL = MatrixC::Zero(bl.rows.size(), bl.rows.size());
      MatrixC DR = MatrixC::Zero(bl.cols.size(), bl.cols.size());
      for (size_t w = 0; w < bl.rowOff.size(); ++w)
        if (bl.rowOff[w] >= 0) {
          auto& G = g.left[x * c.left.nB + w];
          DL.block(bl.rowOff[w], bl.rowOff[w], G.rows(), G.cols()) = G;
        }
      for (size_t y = 0; y < bl.colOff.size(); ++y)
        if (bl.colOff[y] >= 0) {
          auto& G = g.right[y * c.right.nB + z];
          DR.block(bl.colOff[y], bl.colOff[y], G.rows(), G.cols()) = G;
        }
      bl.M = DL * bl.M * DR.adjoint();
    }
  return r;
}

Connection canonical_gauge(const Connection& c) {
  size_t nl = c.left.size(), nr = c.right.size();
  std::vector<double> th(nl + nr, 0);
  std::vector<char> fixed(nl + nr, 0);
  auto simpleL = [&](int e) { return c.left.at(c.left.edges[e].a, c.left.edges[e].b).size() == 1; };
  auto simpleR = [&](int f) { return c.right.at(c.right.edges[f].a, c.right.edges[f].b).size() == 1; };
  for (size_t e = 0; e < nl; ++e)
    if (!simpleL(static_cast<int>(e))) fixed[e] = 1;
  for (size_t f = 0; f < nr; ++f)
    if (!simpleR(static_cast<int>(f))) fixed[nl + f] = 1;
  // cells in lexicographic order of (corner, row, column)
  struct Link {
    int u, v;
    double arg;
  };
  std::vector<Link> links;
  for (auto& b : c.W)
    for (size_t i = 0; i < b.rows.size(); ++i)
      for (size_t j = 0; j < b.cols.size(); ++j)
        if (std::abs(b.M(i, j)) > 1e-9) links.push_back({b.rows[i], static_cast<int>(nl) + b.cols[j], std::arg(b.M(i, j))});
  // phase of cell after gauge: arg + th[u] - th[v]; make it zero along a spanning forest
  for (;;) {
    bool progress = true;
    while (progress) {
      progress = false;
      for (auto& l : links) {
        if (fixed[l.u] && !fixed[l.v]) {
          th[l.v] = l.arg + th[l.u];
          fixed[l.v] = 1;
          progress = true;
        } else if (!fixed[l.u] && fixed[l.v]) {
          th[l.u] = th[l.v] - l.arg;
          fixed[l.u] = 1;
          progress = true;
        }
      }
    }
    auto it = std::find(fixed.begin(), fixed.end(), 0);
    if (it == fixed.end()) break;
    *it = 1;
  }
  GaugeTransform g = GaugeTransform::identity(c);
  for (size_t e = 0; e < nl; ++e)
    if (simpleL(static_cast<int>(e))) g.left[c.left.edges[e].a * c.left.nB + c.left.edges[e].b](0, 0) = std::polar(1.0, th[e]);
  for (size_t f = 0; f < nr; ++f)
    if (simpleR(static_cast<int>(f)))
      g.right[c.right.edges[f].a * c.right.nB + c.right.edges[f].b](0, 0) = std::polar(1.0, th[nl + f]);
  return apply_gauge(c, g);
}

namespace {
void minor_products(const MatrixC& M, std::vector<double>& out) {
  for (int i = 0; i < M.rows(); ++i)
    for (int j = i + 1; j < M.rows(); ++j)
      for (int k = 0; k < M.cols(); ++k)
        for (int l = k + 1; l < M.cols(); ++l) {
          cplx q = M(i, k) * M(j, l) * std::conj(M(i, l) * M(j, k));
          out.push_back(q.real());
          out.push_back(q.imag());
        }
}
}  // namespace

std::vector<double> gauge_invariants(const Connection& c) {
  std::vector<double> out;
  for (auto& b : c.W)
    for (int i = 0; i < b.M.rows(); ++i)
      for (int j = 0; j < b.M.cols(); ++j) out.push_back(std::norm(b.M(i, j)));
  for (auto& b : c.W) minor_products(b.M, out);
  for (size_t y = 0; y < c.top->R.size(); ++y)
    for (size_t w = 0; w < c.bot->L.size(); ++w) minor_products(reflected_block(c, static_cast<int>(y), static_cast<int>(w)), out);
  return out;
}

namespace {

std::vector<double> to_doubles(const std::vector<Scalar>& v) {
  std::vector<double> out;
  for (auto& s : v) out.push_back(s.to_double());
  return out;
}

// Rescales `v` so that it matches `ref` on the shared vertex list; returns max relative mismatch.
double match_scale(const std::vector<double>& ref, const std::vector<std::string>& refLabels, std::vector<double>& v,
                   const std::vector<std::string>& vLabels, std::vector<double>* other = nullptr) {
  std::vector<double> aligned(refLabels.size());
  for (size_t i = 0; i < refLabels.size(); ++i) {
    auto it = std::find(vLabels.begin(), vLabels.end(), refLabels[i]);
    if (it == vLabels.end()) throw StructuralError("vertex " + refLabels[i] + " missing");
    aligned[i] = v[it - vLabels.begin()];
  }
  double s = ref[0] / aligned[0];
  double worst = 0;
  for (size_t i = 0; i < ref.size(); ++i) worst = std::max(worst, std::abs(aligned[i] * s - ref[i]) / ref[i]);
  for (auto& x : v) x *= s;
  if (other)
    for (auto& x : *other) x *= s;
  return worst;
}

std::string edge_label(const std::string& a, const std::string& b, int ord) {
  std::string s = a + "." + b;
  if (ord > 0) s += "#" + std::to_string(ord);
  return s;
}

}  // namespace

Connection connection_on_square(const FourGraphSquare& sq, const TolerancePolicy& pol) {
  validate_square(sq);
  auto pf3 = perron_frobenius(sq.G3, pol);
  auto pf0 = perron_frobenius(sq.G0, pol);
  auto pf1 = perron_frobenius(sq.G1, pol);
  auto pf2 = perron_frobenius(sq.G2, pol);
  if (std::abs(pf0.eigenvalue.to_double() - pf2.eigenvalue.to_double()) > pol.eq_tol ||
      std::abs(pf1.eigenvalue.to_double() - pf3.eigenvalue.to_double()) > pol.eq_tol)
    throw SolverFailure("PF eigenvalue mismatch between opposite graphs: no biunitary connection exists", INFINITY);
  std::vector<double> mu0 = to_doubles(pf3.left_weights), mu3 = to_doubles(pf3.right_weights);
  std::vector<double> l0 = to_doubles(pf0.left_weights), mu1 = to_doubles(pf0.right_weights);
  double bad = match_scale(mu0, sq.G3.left, l0, sq.G0.left, &mu1);
  std::vector<double> l1 = to_doubles(pf1.left_weights), mu2 = to_doubles(pf1.right_weights);
  bad = std::max(bad, match_scale(mu1, sq.G0.right, l1, sq.G1.left, &mu2));
  std::vector<double> l2 = to_doubles(pf2.left_weights), r2 = to_doubles(pf2.right_weights);
  bad = std::max(bad, match_scale(mu3, sq.G3.right, l2, sq.G2.left, &r2));
  {
    std::vector<double> tmp = r2;
    bad = std::max(bad, match_scale(mu2, sq.G1.right, tmp, sq.G2.right));
  }
  if (bad > 1e-8) throw SolverFailure("PF weights of the four graphs are incompatible", INFINITY);

  // rows use the vertex order of the horizontal graphs
  auto reorder = [](const std::vector<double>& w, const std::vector<std::string>& from, const std::vector<std::string>& to) {
    std::vector<double> out;
    for (auto& s : to) out.push_back(w[std::find(from.begin(), from.end(), s) - from.begin()]);
    return out;
  };
  RowPtr N = Row::make("N", sq.G0, reorder(mu0, sq.G3.left, sq.G0.left), reorder(mu1, sq.G0.right, sq.G0.right));
  RowPtr M = Row::make("M", sq.G2, reorder(mu3, sq.G3.right, sq.G2.left), reorder(mu2, sq.G1.right, sq.G2.right));
  Connection c;
  c.name = "k";
  c.top = N;
  c.bot = M;
  c.left.nA = static_cast<int>(N->L.size());
  c.left.nB = static_cast<int>(M->L.size());
  for (auto& e : sq.G3.edges)
    c.left.edges.push_back({N->l(sq.G3.left[e.l]), M->l(sq.G3.right[e.r]), edge_label(sq.G3.left[e.l], sq.G3.right[e.r], e.ordinal)});
  c.right.nA = static_cast<int>(N->R.size());
  c.right.nB = static_cast<int>(M->R.size());
  for (auto& e : sq.G1.edges)
    c.right.edges.push_back({N->r(sq.G1.left[e.l]), M->r(sq.G1.right[e.r]), edge_label(sq.G1.left[e.l], sq.G1.right[e.r], e.ordinal)});
  c.left.finalize();
  c.right.finalize();
  c.build_blocks();
  return c;
}

namespace {
std::pair<std::string, int> split_ordinal(const std::string& label, std::string& a, std::string& b) {
  auto h = label.find('#');
  int ord = 0;
  std::string core = label;
  if (h != std::string::npos) {
    ord = std::stoi(label.substr(h + 1));
    core = label.substr(0, h);
  }
  auto d = core.find('.');
  a = core.substr(0, d);
  b = core.substr(d + 1);
  return {core, ord};
}
}  // namespace

std::string format_connection(const FourGraphSquare& sq, const Connection& c) {
  std::ostringstream os;
  os << "# connection " << c.name << "\n" << format_square(sq);
  os << std::setprecision(17);
  size_t nz = c.bot->R.size();
  for (size_t x = 0; x < c.top->L.size(); ++x)
    for (size_t z = 0; z < nz; ++z) {
      const Block& b = c.W[x * nz + z];
      for (size_t i = 0; i < b.rows.size(); ++i)
        for (size_t j = 0; j < b.cols.size(); ++j) {
          std::string xa, wa, yb, zb;
          int ol = split_ordinal(c.left.edges[b.rows[i]].label, xa, wa).second;
          int orr = split_ordinal(c.right.edges[b.cols[j]].label, yb, zb).second;
          cplx v = b.M(i, j);
          os << "CELL " << xa << ":" << yb << ":0 " << yb << ":" << zb << ":" << orr << " " << wa << ":" << zb << ":0 " << xa << ":"
             << wa << ":" << ol << " " << format_double(v.real()) << " " << format_double(v.imag()) << "\n";
        }
    }
  return os.str();
}

Connection parse_connection(const std::string& text, const TolerancePolicy& pol, FourGraphSquare* sq_out) {
  std::istringstream in(text);
  std::string line, graphs;
  std::vector<std::string> cells;
  while (std::getline(in, line)) {
    std::istringstream ls(line);
    std::string tag;
    if (ls >> tag && tag == "CELL") cells.push_back(line);
    else graphs += line + "\n";
  }
  FourGraphSquare sq = parse_square(graphs);
  Connection c = connection_on_square(sq, pol);
  auto parse_edge = [](const std::string& s, std::string& a, std::string& b, int& ord) {
    auto p1 = s.find(':'), p2 = s.rfind(':');
    if (p1 == std::string::npos || p1 == p2) throw StructuralError("malformed edge id " + s);
    a = s.substr(0, p1);
    b = s.substr(p1 + 1, p2 - p1 - 1);
    try {
      ord = std::stoi(s.substr(p2 + 1));
    } catch (...) {
      throw StructuralError("malformed edge ordinal in " + s);
    }
  };
  for (auto& cl : cells) {
    std::istringstream ls(cl);
    std::string tag, e0, e1, e2, e3, re, im = "0";
    if (!(ls >> tag >> e0 >> e1 >> e2 >> e3 >> re)) throw StructuralError("malformed CELL record: " + cl);
    ls >> im;
    std::string x, y, y2, z, w, z2, x2, w2;
    int o0, o1, o2, o3;
    parse_edge(e0, x, y, o0);
    parse_edge(e1, y2, z, o1);
    parse_edge(e2, w, z2, o2);
    parse_edge(e3, x2, w2, o3);
    if (y != y2 || z != z2 || x != x2 || w != w2) throw StructuralError("CELL edges do not form a loop: " + cl);
    int xi = c.top->l(x), zi = c.bot->r(z);
    int eL = c.left.find(edge_label(x, w, o3)), eR = c.right.find(edge_label(y, z, o1));
    if (xi < 0 || zi < 0 || eL < 0 || eR < 0 || c.top->r(y) < 0 || !c.top->adj[xi][c.top->r(y)] || c.bot->l(w) < 0 ||
        !c.bot->adj[c.bot->l(w)][zi])
      throw StructuralError("CELL references edges outside the square: " + cl);
    double vr, vi;
    try {
      size_t used = 0;
      vr = std::stod(re, &used);
      if (used != re.size()) throw 0;
      vi = std::stod(im, &used);
      if (used != im.size()) throw 0;
    } catch (...) {
      throw StructuralError("malformed cell value: " + cl);
    }
    Block& b = c.block(xi, zi);
    b.M(b.rowOff[c.left.edges[eL].b] + c.left.pos[eL], b.colOff[c.right.edges[eR].a] + c.right.pos[eR]) = cplx(vr, vi);
  }
  if (sq_out) *sq_out = sq;
  return c;
}

Connection read_connection(const std::string& path, const TolerancePolicy& pol, FourGraphSquare* sq_out) {
  return parse_connection(slurp(path), pol, sq_out);
}

}  // namespace ahcat
