#include "ahcat/homspaces.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <sstream>

namespace ahcat {

int BasedRing::index(const std::string& label) const {
  auto it = std::find(labels.begin(), labels.end(), label);
  return it == labels.end() ? -1 : static_cast<int>(it - labels.begin());
}

int BasedRing::mult(int a, int b, int c) const {
  auto it = N.find({a, b, c});
  return it == N.end() ? 0 : it->second;
}

std::vector<std::vector<int>> BasedRing::multiplication_matrix(const std::vector<int>& coef) const {
  size_t n = labels.size();
  std::vector<std::vector<int>> L(n, std::vector<int>(n, 0));
  for (size_t a = 0; a < n; ++a)
    for (size_t b = 0; b < n; ++b)
      for (size_t k = 0; k < n; ++k)
        if (coef[k]) L[a][b] += coef[k] * mult(static_cast<int>(a), static_cast<int>(k), static_cast<int>(b));
  return L;
}

FusionResult fusion_ring(const std::vector<Connection>& generators, int depth) {
  if (generators.empty()) throw StructuralError("fusion_ring needs at least one generator");
  RowPtr row = generators[0].top;
  for (auto& g : generators)
    if (!same_row(g.top, row) || !same_row(g.bot, row)) throw StructuralError("generators must be endomorphisms of one row");
  FusionResult res;
  std::vector<Connection>& S = res.sectors;
  std::vector<double> dims;
  Connection unit = identity_connection(row);
  unit.name = "Id";
  S.push_back(unit);
  dims.push_back(1.0);
  auto intern = [&](const Connection& c) -> std::pair<int, bool> {
    double d = pf_dimension(c);
    for (size_t i = 0; i < S.size(); ++i)
      if (std::abs(dims[i] - d) < 1e-6 && hom_dim(S[i], c) == 1) return {static_cast<int>(i), false};
    S.push_back(c);
    dims.push_back(d);
    return {static_cast<int>(S.size() - 1), true};
  };
  std::vector<int> frontier{0};
  for (auto& g : generators) {
    auto parts = decompose(g);
    for (auto& s : parts) {
      Connection c = s.conn;
      if (parts.size() == 1 && s.multiplicity == 1) c.name = g.name;
      auto [i, fresh] = intern(c);
      if (fresh) frontier.push_back(i);
    }
  }
  int round = 0;
  for (; round < depth && !frontier.empty(); ++round) {
    std::vector<int> next;
    for (int i : frontier)
      for (auto& g : generators) {
        Connection p = compose(S[i], g);
        p.name = (S[i].name == "Id" ? g.name : S[i].name + "." + g.name);
        auto parts = decompose(p);
        for (size_t k = 0; k < parts.size(); ++k) {
          Connection c = parts[k].conn;
          c.name = parts.size() == 1 && parts[k].multiplicity == 1 ? p.name : p.name + "#" + std::to_string(k);
          auto [j, fresh] = intern(c);
          if (fresh) next.push_back(j);
        }
      }
    frontier = next;
  }
  if (!frontier.empty()) {
    std::vector<std::string> names;
    for (int i : frontier) names.push_back(S[i].name);
    throw PartialRingError("fusion ring not saturated after depth " + std::to_string(depth), names);
  }
  BasedRing& R = res.ring;
  for (auto& s : S) R.labels.push_back(s.name);
  R.dims = dims;
  R.unit = 0;
  size_t n = S.size();
  for (size_t a = 0; a < n; ++a)
    for (size_t b = 0; b < n; ++b) {
      Connection p = compose(S[a], S[b]);
      double target = dims[a] * dims[b], acc = 0;
      for (size_t c = 0; c < n && acc < target - 1e-6; ++c) {
        if (dims[c] > target - acc + 1e-6) continue;
        int m = static_cast<int>(hom_dim(p, S[c]));
        if (m) {
          R.N[{static_cast<int>(a), static_cast<int>(b), static_cast<int>(c)}] = m;
          acc += m * dims[c];
        }
      }
      if (std::abs(acc - target) > 1e-6) throw VerificationError("fusion ring: product " + S[a].name + " " + S[b].name + " not exhausted");
    }
  R.dual.assign(n, -1);
  for (size_t a = 0; a < n; ++a)
    for (size_t b = 0; b < n; ++b)
      if (R.mult(static_cast<int>(a), static_cast<int>(b), 0) == 1) R.dual[a] = static_cast<int>(b);
  return res;
}

std::string format_ring(const BasedRing& r) {
  std::ostringstream os;
  for (size_t i = 0; i < r.labels.size(); ++i)
    os << "S " << r.labels[i] << " dual=" << (r.dual[i] >= 0 ? r.labels[r.dual[i]] : "?") << " dim=" << format_double(r.dims[i]) << "\n";
  for (auto& [k, v] : r.N)
    os << "N " << r.labels[std::get<0>(k)] << " " << r.labels[std::get<1>(k)] << " " << r.labels[std::get<2>(k)] << " " << v << "\n";
  return os.str();
}

BasedRing parse_ring(const std::string& text) {
  BasedRing r;
  std::istringstream in(text);
  std::string line;
  std::vector<std::string> duals;
  int lineno = 0;
  auto bad = [&](const std::string& why) { return StructuralError("ring line " + std::to_string(lineno) + ": " + why); };
  while (std::getline(in, line)) {
    ++lineno;
    std::istringstream ls(line);
    std::string tag;
    if (!(ls >> tag) || tag[0] == '#') continue;
    if (tag == "S") {
      std::string label, d, m;
      if (!(ls >> label >> d >> m) || d.rfind("dual=", 0) != 0 || m.rfind("dim=", 0) != 0) throw bad("malformed S record");
      r.labels.push_back(label);
      duals.push_back(d.substr(5));
      try {
        r.dims.push_back(std::stod(m.substr(4)));
      } catch (...) {
        throw bad("bad dimension");
      }
    } else if (tag == "N") {
      std::string a, b, c;
      int v;
      if (!(ls >> a >> b >> c >> v) || v < 0) throw bad("malformed N record");
      int ia = r.index(a), ib = r.index(b), ic = r.index(c);
      if (ia < 0 || ib < 0 || ic < 0) throw bad("unknown sector");
      if (v) r.N[{ia, ib, ic}] = v;
    } else {
      throw bad("unknown record " + tag);
    }
  }
  if (r.labels.empty()) throw StructuralError("ring has no sectors");
  for (auto& d : duals) {
    int i = r.index(d);
    if (i < 0) throw StructuralError("unknown dual " + d);
    r.dual.push_back(i);
  }
  int u = r.index("Id");
  r.unit = u < 0 ? 0 : u;
  return r;
}

AlgebraObject parse_algebra(const BasedRing& ring, const std::string& text) {
  AlgebraObject g;
  g.ring = &ring;
  g.coef.assign(ring.labels.size(), 0);
  std::string s;
  for (char c : text)
    if (!std::isspace(static_cast<unsigned char>(c))) s += c;
  size_t pos = 0;
  while (pos <= s.size()) {
    size_t plus = s.find('+', pos);
    std::string term = s.substr(pos, plus == std::string::npos ? std::string::npos : plus - pos);
    if (term.empty()) throw StructuralError("empty term in algebra object '" + text + "'");
    int m = 1;
    auto star = term.find('*');
    if (star != std::string::npos && std::all_of(term.begin(), term.begin() + star, ::isdigit) && star > 0) {
      m = std::stoi(term.substr(0, star));
      term = term.substr(star + 1);
    }
    int i = ring.index(term);
    if (i < 0) throw StructuralError("unknown sector '" + term + "' in algebra object");
    g.coef[i] += m;
    if (plus == std::string::npos) break;
    pos = plus + 1;
  }
  return g;
}

PrincipalGraph principal_graph_from_matrix(const std::vector<std::vector<int>>& L, const std::vector<std::string>& labels) {
  const int n = static_cast<int>(L.size());
  if (n == 0 || static_cast<int>(labels.size()) != n) throw StructuralError("principal graph: empty or mislabelled matrix");
  Eigen::MatrixXd Ld(n, n);
  for (int i = 0; i < n; ++i) {
    if (static_cast<int>(L[i].size()) != n) throw StructuralError("principal graph: matrix not square");
    for (int j = 0; j < n; ++j) {
      if (L[i][j] != L[j][i]) throw SynthesisFailure("L_gamma is not symmetric");
      if (L[i][j] < 0) throw SynthesisFailure("L_gamma has a negative entry");
      Ld(i, j) = L[i][j];
    }
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(Ld);
  if (es.eigenvalues().minCoeff() < -1e-9) throw SynthesisFailure("L_gamma has a negative eigenvalue; no factorization exists");
  int rank = 0;
  for (int i = 0; i < n; ++i)
    if (es.eigenvalues()[i] > 1e-9) ++rank;
  int trace = 0;
  for (int i = 0; i < n; ++i) trace += L[i][i];

  std::vector<std::vector<int>> cols;
  std::vector<std::vector<int>> Rm = L;
  std::function<bool(int)> search = [&](int left) -> bool {
    int i = 0;
    while (i < n && Rm[i][i] == 0) ++i;
    if (i == n) {
      for (auto& r : Rm)
        for (int v : r)
          if (v) return false;
      return true;
    }
    if (left == 0) return false;
    std::vector<int> v(n, 0);
    std::function<bool(int)> fill = [&](int j) -> bool {
      if (j == n) {
        for (int a = 0; a < n; ++a)
          for (int b = 0; b < n; ++b) Rm[a][b] -= v[a] * v[b];
        cols.push_back(v);
        if (search(left - 1)) return true;
        cols.pop_back();
        for (int a = 0; a < n; ++a)
          for (int b = 0; b < n; ++b) Rm[a][b] += v[a] * v[b];
        return false;
      }
      if (j < i) {
        v[j] = 0;
        return fill(j + 1);
      }
      int hi = static_cast<int>(std::floor(std::sqrt(static_cast<double>(Rm[j][j])) + 1e-9));
      for (int val = (j == i ? 1 : 0); val <= hi; ++val) {
        bool ok = true;
        for (int l = i; l < j && ok; ++l)
          if (v[l] * val > Rm[l][j]) ok = false;
        if (!ok) break;
        v[j] = val;
        if (fill(j + 1)) return true;
      }
      v[j] = 0;
      return false;
    };
    return fill(0);
  };
  bool found = false;
  for (int m = std::max(rank, 1); m <= trace && !found; ++m) {
    cols.clear();
    Rm = L;
    found = search(m);
  }
  if (!found) throw SynthesisFailure("no integer factorization Lambda Lambda^T = L_gamma");
  PrincipalGraph pg;
  pg.L = L;
  pg.Lambda.assign(n, std::vector<int>(cols.size(), 0));
  for (size_t j = 0; j < cols.size(); ++j)
    for (int i = 0; i < n; ++i) pg.Lambda[i][j] = cols[j][i];
  for (auto& l : labels) pg.graph.add_left(l);
  for (size_t j = 0; j < cols.size(); ++j) pg.graph.add_right("P" + std::to_string(j + 1));
  for (int i = 0; i < n; ++i)
    for (size_t j = 0; j < cols.size(); ++j)
      for (int k = 0; k < pg.Lambda[i][j]; ++k) pg.graph.add_edge(labels[i], "P" + std::to_string(j + 1), k);
  pg.norm = std::sqrt(std::max(0.0, es.eigenvalues().maxCoeff()));
  return pg;
}

PrincipalGraph principal_graph_from_algebra(const AlgebraObject& g) {
  const BasedRing& R = *g.ring;
  int n = static_cast<int>(R.labels.size());
  if (g.coef[R.unit] != 1) throw SynthesisFailure("algebra object must contain the unit exactly once");
  for (int k = 0; k < n; ++k)
    if (g.coef[k] != g.coef[R.dual[k]]) throw SynthesisFailure("algebra object is not self-dual");
  auto L = R.multiplication_matrix(g.coef);
  std::vector<int> order{R.unit};
  std::vector<char> seen(n, 0);
  seen[R.unit] = 1;
  for (size_t q = 0; q < order.size(); ++q)
    for (int b = 0; b < n; ++b)
      if (!seen[b] && L[order[q]][b] > 0) {
        seen[b] = 1;
        order.push_back(b);
      }
  std::vector<std::vector<int>> Lr(order.size(), std::vector<int>(order.size()));
  std::vector<std::string> labels;
  for (size_t i = 0; i < order.size(); ++i) {
    labels.push_back(R.labels[order[i]]);
    for (size_t j = 0; j < order.size(); ++j) Lr[i][j] = L[order[i]][order[j]];
  }
  return principal_graph_from_matrix(Lr, labels);
}

}  // namespace ahcat
