#include "ahcat/diagrams.hpp"

#include <functional>
#include <sstream>
#include <stdexcept>

namespace ahcat {

std::string word_key(const std::vector<std::string>& word) {
  std::string s;
  for (size_t i = 0; i < word.size(); ++i) s += (i ? " " : "") + word[i];
  return s;
}

int PathSpace::find(const std::string& label) const {
  int i = sp.find(label);
  if (i < 0) throw std::domain_error("edge " + label + " is not in the space [" + word_key(word) + "]");
  return i;
}

std::string PathSpace::key() const { return word.empty() ? "@" + start->name : word_key(word); }

void StrandSet::add(const std::string& name, const std::string& dual, Connection c) {
  rows_[c.top->name] = c.top;
  rows_[c.bot->name] = c.bot;
  strands_[name] = Strand{name, dual, std::move(c)};
  std::lock_guard lock(*mu_);
  cache_.clear();
}

const Strand& StrandSet::get(const std::string& name) const {
  auto it = strands_.find(name);
  if (it == strands_.end()) throw RegistryError("unknown strand " + name);
  return it->second;
}

RowPtr StrandSet::row(const std::string& name) const {
  auto it = rows_.find(name);
  if (it == rows_.end()) throw RegistryError("unknown row " + name);
  return it->second;
}

SpacePtr StrandSet::empty(const RowPtr& row) const {
  std::lock_guard lock(*mu_);
  std::string key = "@" + row->name;
  auto it = cache_.find(key);
  if (it != cache_.end()) return it->second;
  auto p = std::make_shared<PathSpace>();
  p->start = p->finish = row;
  p->sp = identity_space(static_cast<int>(row->L.size()), row->L);
  for (size_t i = 0; i < p->sp.size(); ++i) p->tuples.push_back({});
  cache_[key] = p;
  return p;
}

SpacePtr StrandSet::space(const std::vector<std::string>& word) const {
  if (word.empty()) throw StructuralError("empty word needs a row");
  std::lock_guard lock(*mu_);
  std::string key = word_key(word);
  auto it = cache_.find(key);
  if (it != cache_.end()) return it->second;
  auto p = std::make_shared<PathSpace>();
  p->word = word;
  const Strand& last = get(word.back());
  if (word.size() == 1) {
    p->start = last.conn.top;
    p->sp = last.conn.left;
    for (size_t e = 0; e < p->sp.size(); ++e) p->tuples.push_back({static_cast<int>(e)});
  } else {
    auto prev = space(std::vector<std::string>(word.begin(), word.end() - 1));
    if (!same_row(prev->finish, last.conn.top)) throw StructuralError("strands do not compose in [" + key + "]");
    p->start = prev->start;
    std::vector<std::pair<int, int>> parts;
    p->sp = compose_spaces(prev->sp, last.conn.left, &parts);
    for (auto [a, b] : parts) {
      auto t = prev->tuples[a];
      t.push_back(b);
      p->tuples.push_back(std::move(t));
    }
  }
  p->finish = last.conn.bot;
  for (size_t i = 0; i < p->tuples.size(); ++i) p->lookup[p->tuples[i]] = static_cast<int>(i);
  cache_[key] = p;
  return p;
}

bool same_space(const SpacePtr& a, const SpacePtr& b) { return a == b || a->key() == b->key(); }

DenseMap DenseMap::adjoint() const { return {dst, src, M.adjoint()}; }

cplx DenseMap::at(const std::string& from, const std::string& to) const { return M(dst->find(to), src->find(from)); }

DenseMap operator*(const DenseMap& a, const DenseMap& b) {
  if (!same_space(a.src, b.dst))
    throw StructuralError("cannot compose [" + a.src->key() + "] after [" + b.dst->key() + "]");
  return {b.src, a.dst, a.M * b.M};
}

namespace {

void check_shape(const DenseMap& a, const DenseMap& b) {
  if (!same_space(a.src, b.src) || !same_space(a.dst, b.dst))
    throw StructuralError("maps [" + a.src->key() + "]->[" + a.dst->key() + "] and [" + b.src->key() + "]->[" +
                          b.dst->key() + "] have different shapes");
}

}  // namespace

DenseMap operator+(const DenseMap& a, const DenseMap& b) {
  check_shape(a, b);
  return {a.src, a.dst, a.M + b.M};
}

DenseMap operator-(const DenseMap& a, const DenseMap& b) {
  check_shape(a, b);
  return {a.src, a.dst, a.M - b.M};
}

DenseMap operator*(cplx s, const DenseMap& a) { return {a.src, a.dst, s * a.M}; }

double max_diff(const DenseMap& a, const DenseMap& b) {
  check_shape(a, b);
  return a.M.size() ? (a.M - b.M).cwiseAbs().maxCoeff() : 0.0;
}

DenseMap identity_on(const StrandSet&, const SpacePtr& sp) {
  return {sp, sp, MatrixC::Identity(sp->size(), sp->size())};
}

DenseMap identity_on(const StrandSet& S, const std::vector<std::string>& word) {
  return identity_on(S, S.space(word));
}

namespace {

// Vertex after k letters of a path.
int vertex_at(const StrandSet& S, const PathSpace& P, int path, size_t k) {
  if (k == 0) return P.first_vertex(path);
  return S.get(P.word[k - 1]).conn.left.edges[P.tuples[path][k - 1]].b;
}

// Index of a sub-path (letters [lo, hi)) inside the space of that sub-word.
int sub_index(const StrandSet& S, const PathSpace& P, int path, size_t lo, size_t hi, const PathSpace& sub) {
  if (lo == hi) return vertex_at(S, P, path, lo);
  std::vector<int> t(P.tuples[path].begin() + lo, P.tuples[path].begin() + hi);
  return sub.lookup.at(t);
}

// Index of the concatenation of two paths, or -1 when they do not meet.
int join_index(const PathSpace& A, int i, const PathSpace& B, int j, const PathSpace& out) {
  if (A.last_vertex(i) != B.first_vertex(j)) return -1;
  if (out.word.empty()) return A.first_vertex(i);
  if (A.word.empty()) return j;
  if (B.word.empty()) return i;
  std::vector<int> t = A.tuples[i];
  t.insert(t.end(), B.tuples[j].begin(), B.tuples[j].end());
  return out.lookup.at(t);
}

SpacePtr concat_space(const StrandSet& S, const SpacePtr& a, const SpacePtr& b) {
  if (!same_row(a->finish, b->start))
    throw StructuralError("cannot juxtapose [" + a->key() + "] and [" + b->key() + "]: rows differ");
  std::vector<std::string> w = a->word;
  w.insert(w.end(), b->word.begin(), b->word.end());
  return w.empty() ? S.empty(a->start) : S.space(w);
}

}  // namespace

DenseMap tensor(const StrandSet& S, const DenseMap& a, const DenseMap& b) {
  DenseMap out;
  out.src = concat_space(S, a.src, b.src);
  out.dst = concat_space(S, a.dst, b.dst);
  out.M = MatrixC::Zero(out.dst->size(), out.src->size());
  size_t la = a.src->word.size(), n = out.src->word.size();
  for (size_t j = 0; j < out.src->size(); ++j) {
    int ja = sub_index(S, *out.src, static_cast<int>(j), 0, la, *a.src);
    int jb = sub_index(S, *out.src, static_cast<int>(j), la, n, *b.src);
    for (Eigen::Index ia = 0; ia < a.M.rows(); ++ia) {
      cplx ca = a.M(ia, ja);
      if (ca == cplx(0)) continue;
      for (Eigen::Index ib = 0; ib < b.M.rows(); ++ib) {
        cplx cb = b.M(ib, jb);
        if (cb == cplx(0)) continue;
        int i = join_index(*a.dst, static_cast<int>(ia), *b.dst, static_cast<int>(ib), *out.dst);
        if (i >= 0) out.M(i, j) += ca * cb;
      }
    }
  }
  return out;
}

DenseMap tensor(const StrandSet& S, const std::vector<DenseMap>& parts) {
  if (parts.empty()) throw StructuralError("empty tensor product");
  DenseMap r = parts[0];
  for (size_t i = 1; i < parts.size(); ++i) r = tensor(S, r, parts[i]);
  return r;
}

DenseMap from_edge_map(const EdgeMap& T, const SpacePtr& src, const SpacePtr& dst) {
  return {src, dst, T.dense_left(src->sp, dst->sp)};
}

bool VertexRegistry::has(const std::string& key) const {
  std::string k = !key.empty() && key.back() == '*' ? key.substr(0, key.size() - 1) : key;
  return vertices.count(k) > 0;
}

DenseMap VertexRegistry::get(const std::string& key) const {
  bool adj = !key.empty() && key.back() == '*';
  std::string k = adj ? key.substr(0, key.size() - 1) : key;
  auto it = vertices.find(k);
  if (it == vertices.end()) throw RegistryError("unknown vertex key " + key);
  return adj ? it->second.map.adjoint() : it->second.map;
}

DenseMap VertexRegistry::cup(const std::string& strand) const {
  auto it = cups.find(strand);
  if (it == cups.end()) throw RegistryError("no cup registered for strand " + strand);
  return get(it->second);
}

std::string Element::str() const {
  switch (kind) {
    case Kind::Id: return "id:" + name;
    case Kind::Vertex: return "v:" + name;
    case Kind::Cup: return "cup:" + name;
    case Kind::Cap: return "cap:" + name;
    case Kind::Scale: return "scale:" + expr;
  }
  return "";
}

std::string Diagram::str() const {
  std::string s;
  for (auto& layer : layers) {
    for (size_t i = 0; i < layer.size(); ++i) s += (i ? " " : "") + layer[i].str();
    s += "\n";
  }
  return s;
}

std::vector<std::vector<Element>> parse_layers(const std::string& text) {
  std::vector<std::vector<Element>> layers;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto h = line.find('#');
    if (h != std::string::npos) line = line.substr(0, h);
    std::istringstream ls(line);
    std::string tok;
    std::vector<Element> layer;
    while (ls >> tok) {
      auto c = tok.find(':');
      if (c == std::string::npos || c + 1 == tok.size())
        throw StructuralError("line " + std::to_string(lineno) + ": malformed token '" + tok + "'");
      std::string kind = tok.substr(0, c), arg = tok.substr(c + 1);
      Element e;
      e.name = arg;
      if (kind == "id") e.kind = Element::Kind::Id;
      else if (kind == "v") e.kind = Element::Kind::Vertex;
      else if (kind == "cup") e.kind = Element::Kind::Cup;
      else if (kind == "cap") e.kind = Element::Kind::Cap;
      else if (kind == "scale") {
        e.kind = Element::Kind::Scale;
        e.name.clear();
        e.expr = arg;
        try {
          e.factor = cplx(parse_expression(arg).to_double(), 0);
        } catch (const std::exception& ex) {
          throw StructuralError("line " + std::to_string(lineno) + ": bad scale '" + arg + "': " + ex.what());
        }
      } else {
        throw StructuralError("line " + std::to_string(lineno) + ": unknown element kind '" + kind + "'");
      }
      layer.push_back(std::move(e));
    }
    if (!layer.empty()) layers.push_back(std::move(layer));
  }
  if (layers.empty()) throw StructuralError("diagram has no layers");
  return layers;
}

namespace {

struct Io {
  std::vector<std::string> in, out;
  RowPtr in_start, in_end, out_start, out_end;
};

Io element_io(const Element& e, const VertexRegistry& reg) {
  Io io;
  const StrandSet& S = *reg.strands;
  switch (e.kind) {
    case Element::Kind::Id: {
      auto& s = S.get(e.name);
      io.in = io.out = {e.name};
      io.in_start = io.out_start = s.conn.top;
      io.in_end = io.out_end = s.conn.bot;
      break;
    }
    case Element::Kind::Vertex: {
      auto m = reg.get(e.name);
      io.in = m.src->word;
      io.out = m.dst->word;
      io.in_start = m.src->start;
      io.in_end = m.src->finish;
      io.out_start = m.dst->start;
      io.out_end = m.dst->finish;
      break;
    }
    case Element::Kind::Cup:
    case Element::Kind::Cap: {
      auto& s = S.get(e.name);
      std::vector<std::string> pair{e.name, s.dual};
      (e.kind == Element::Kind::Cup ? io.out : io.in) = pair;
      io.in_start = io.in_end = io.out_start = io.out_end = s.conn.top;
      break;
    }
    case Element::Kind::Scale: break;
  }
  return io;
}

struct LayerIo {
  std::vector<std::string> in, out;
  RowPtr in_row, out_row;
};

LayerIo layer_io(const std::vector<Element>& layer, const VertexRegistry& reg, size_t index) {
  LayerIo L;
  RowPtr in_end, out_end;
  auto where = [&](const std::string& m) { return StructuralError("layer " + std::to_string(index) + ": " + m); };
  for (auto& e : layer) {
    if (e.kind == Element::Kind::Scale) continue;
    Io io;
    try {
      io = element_io(e, reg);
    } catch (const RegistryError& ex) {
      throw RegistryError("layer " + std::to_string(index) + ": " + ex.what());
    }
    if (!L.in_row) {
      L.in_row = io.in_start;
      L.out_row = io.out_start;
    } else {
      if (!same_row(in_end, io.in_start)) throw where("element " + e.str() + " does not attach on its input side");
      if (!same_row(out_end, io.out_start)) throw where("element " + e.str() + " does not attach on its output side");
    }
    in_end = io.in_end;
    out_end = io.out_end;
    L.in.insert(L.in.end(), io.in.begin(), io.in.end());
    L.out.insert(L.out.end(), io.out.begin(), io.out.end());
  }
  if (!L.in_row) throw where("layer carries no strands");
  return L;
}

}  // namespace

Diagram build_diagram(const std::vector<std::vector<Element>>& layers, const VertexRegistry& reg) {
  if (layers.empty()) throw StructuralError("diagram has no layers");
  Diagram d;
  d.layers = layers;
  LayerIo prev;
  for (size_t i = 0; i < layers.size(); ++i) {
    LayerIo L = layer_io(layers[i], reg, i);
    if (i == 0) {
      d.top = L.in;
      d.top_row = L.in_row;
    } else if (L.in != prev.out || !same_row(L.in_row, prev.out_row)) {
      throw StructuralError("layer " + std::to_string(i) + ": input [" + word_key(L.in) +
                            "] does not match the output [" + word_key(prev.out) + "] of layer " +
                            std::to_string(i - 1));
    }
    prev = L;
  }
  d.bottom = prev.out;
  d.bottom_row = prev.out_row;
  return d;
}

Diagram parse_diagram(const std::string& text, const VertexRegistry& reg) {
  return build_diagram(parse_layers(text), reg);
}

Diagram read_diagram(const std::string& path, const VertexRegistry& reg) { return parse_diagram(slurp(path), reg); }

namespace {

DenseMap element_map(const Element& e, const VertexRegistry& reg) {
  switch (e.kind) {
    case Element::Kind::Id: return reg.id({e.name});
    case Element::Kind::Vertex: return reg.get(e.name);
    case Element::Kind::Cup: return reg.cup(e.name);
    case Element::Kind::Cap: return reg.cup(e.name).adjoint();
    case Element::Kind::Scale: break;
  }
  throw StructuralError("scale element has no map");
}

}  // namespace

DenseMap evaluate_layer(const std::vector<Element>& layer, const VertexRegistry& reg) {
  std::vector<DenseMap> parts;
  cplx f = 1;
  for (auto& e : layer) {
    if (e.kind == Element::Kind::Scale) f *= e.factor;
    else parts.push_back(element_map(e, reg));
  }
  DenseMap m = reg.T(parts);
  if (f != cplx(1)) m.M *= f;
  return m;
}

DenseMap evaluate(const Diagram& d, const VertexRegistry& reg) {
  DenseMap acc = evaluate_layer(d.layers[0], reg);
  for (size_t i = 1; i < d.layers.size(); ++i) acc = evaluate_layer(d.layers[i], reg) * acc;
  return acc;
}

CoefficientResult coefficient(const Diagram& d, const VertexRegistry& reg, const std::string& top_edge,
                              const std::string& bottom_edge, bool unique_state) {
  const StrandSet& S = *reg.strands;
  auto top = d.top.empty() ? S.empty(d.top_row) : S.space(d.top);
  auto bot = d.bottom.empty() ? S.empty(d.bottom_row) : S.space(d.bottom);
  int start = top->find(top_edge);
  int target = bot->find(bottom_edge);

  // Per layer: element maps, their input offsets and the layer output space.
  struct Piece {
    DenseMap map;
    size_t lo = 0, hi = 0;
  };
  std::vector<std::vector<Piece>> pieces(d.layers.size());
  std::vector<cplx> scale(d.layers.size(), 1);
  std::vector<SpacePtr> outs(d.layers.size());
  for (size_t li = 0; li < d.layers.size(); ++li) {
    size_t pos = 0;
    std::vector<std::string> out;
    for (auto& e : d.layers[li]) {
      if (e.kind == Element::Kind::Scale) {
        scale[li] *= e.factor;
        continue;
      }
      Piece p;
      p.map = element_map(e, reg);
      p.lo = pos;
      pos += p.map.src->word.size();
      p.hi = pos;
      out.insert(out.end(), p.map.dst->word.begin(), p.map.dst->word.end());
      pieces[li].push_back(std::move(p));
    }
    outs[li] = out.empty() ? S.empty(pieces[li].front().map.dst->start) : S.space(out);
  }

  CoefficientResult res;
  // The state is built string by string: `partial` holds the output strand edges chosen so far in
  // the current layer, `region` the vertex of the region to the right of them.
  std::function<void(size_t, int, const PathSpace&, size_t, std::vector<int>&, int, cplx)> walk;
  walk = [&](size_t li, int path, const PathSpace& in, size_t k, std::vector<int>& partial, int region, cplx w) {
    if (li == d.layers.size()) {
      if (path == target) {
        ++res.states;
        res.value += w;
      }
      return;
    }
    auto& ps = pieces[li];
    if (k == ps.size()) {
      const PathSpace& out = *outs[li];
      int next = out.word.empty() ? region : out.lookup.at(partial);
      if (out.last_vertex(next) != in.last_vertex(path)) return;  // rightmost region must persist
      std::vector<int> fresh;
      walk(li + 1, next, out, 0, fresh, out.first_vertex(next), w * scale[li]);
      return;
    }
    const Piece& p = ps[k];
    int col = sub_index(S, in, path, p.lo, p.hi, *p.map.src);
    if (k == 0) region = in.first_vertex(path);
    for (Eigen::Index r = 0; r < p.map.M.rows(); ++r) {
      cplx c = p.map.M(r, col);
      if (c == cplx(0)) continue;
      const PathSpace& o = *p.map.dst;
      if (o.first_vertex(static_cast<int>(r)) != region) continue;
      size_t mark = partial.size();
      partial.insert(partial.end(), o.tuples[r].begin(), o.tuples[r].end());
      walk(li, path, in, k + 1, partial, o.last_vertex(static_cast<int>(r)), w * c);
      partial.resize(mark);
    }
  };
  std::vector<int> partial;
  walk(0, start, *top, 0, partial, top->first_vertex(start), 1);
  if (unique_state && res.states > 1)
    throw VerificationError("coefficient " + top_edge + " -> " + bottom_edge + " has " + std::to_string(res.states) +
                            " contributing states");
  return res;
}

Diagram bend(const Diagram& d, Side side, const VertexRegistry& reg) {
  if (d.top.empty()) throw std::domain_error("bend needs a nonempty top boundary");
  std::vector<std::vector<Element>> layers;
  auto id = [](const std::string& s) {
    Element e;
    e.kind = Element::Kind::Id;
    e.name = s;
    return e;
  };
  Element cup;
  cup.kind = Element::Kind::Cup;
  std::vector<Element> first;
  if (side == Side::Right) {
    const std::string& y = d.top.back();
    cup.name = y;
    for (size_t i = 0; i + 1 < d.top.size(); ++i) first.push_back(id(d.top[i]));
    first.push_back(cup);
    layers.push_back(first);
    std::string yb = reg.strands->get(y).dual;
    for (auto layer : d.layers) {
      layer.push_back(id(yb));
      layers.push_back(std::move(layer));
    }
  } else {
    const std::string& x = d.top.front();
    std::string xb = reg.strands->get(x).dual;
    cup.name = xb;
    first.push_back(cup);
    for (size_t i = 1; i < d.top.size(); ++i) first.push_back(id(d.top[i]));
    layers.push_back(first);
    for (auto layer : d.layers) {
      layer.insert(layer.begin(), id(xb));
      layers.push_back(std::move(layer));
    }
  }
  return build_diagram(layers, reg);
}

Diagram rotate(const Diagram& d, const VertexRegistry& reg) {
  std::vector<std::vector<Element>> layers(d.layers.rbegin(), d.layers.rend());
  for (auto& layer : layers)
    for (auto& e : layer) switch (e.kind) {
        case Element::Kind::Vertex:
          if (!e.name.empty() && e.name.back() == '*') e.name.pop_back();
          else e.name += '*';
          break;
        case Element::Kind::Cup: e.kind = Element::Kind::Cap; break;
        case Element::Kind::Cap: e.kind = Element::Kind::Cup; break;
        case Element::Kind::Scale: e.factor = std::conj(e.factor); break;
        case Element::Kind::Id: break;
      }
  return build_diagram(layers, reg);
}

namespace {

Element make(Element::Kind k, const std::string& name) {
  Element e;
  e.kind = k;
  e.name = name;
  return e;
}

}  // namespace

Diagram then(const Diagram& first, const Diagram& second, const VertexRegistry& reg) {
  auto layers = first.layers;
  layers.insert(layers.end(), second.layers.begin(), second.layers.end());
  return build_diagram(layers, reg);
}

Diagram pad(const Diagram& d, const std::vector<std::string>& left, const std::vector<std::string>& right,
            const VertexRegistry& reg) {
  auto layers = d.layers;
  for (auto& layer : layers) {
    std::vector<Element> l;
    for (auto& s : left) l.push_back(make(Element::Kind::Id, s));
    l.insert(l.end(), layer.begin(), layer.end());
    for (auto& s : right) l.push_back(make(Element::Kind::Id, s));
    layer = std::move(l);
  }
  return build_diagram(layers, reg);
}

Diagram trace_closure(const Diagram& d, const VertexRegistry& reg) {
  if (d.top != d.bottom) throw StructuralError("trace closure needs equal boundaries");
  const auto& X = d.top;
  if (X.empty()) return d;
  std::vector<std::string> duals;
  for (auto it = X.rbegin(); it != X.rend(); ++it) duals.push_back(reg.strands->get(*it).dual);
  std::vector<std::vector<Element>> layers;
  size_t n = X.size();
  for (size_t i = 0; i < n; ++i) {
    std::vector<Element> l;
    for (size_t j = 0; j < i; ++j) l.push_back(make(Element::Kind::Id, X[j]));
    l.push_back(make(Element::Kind::Cup, X[i]));
    for (size_t j = n - i; j < n; ++j) l.push_back(make(Element::Kind::Id, duals[j]));
    layers.push_back(std::move(l));
  }
  for (auto layer : d.layers) {
    for (auto& s : duals) layer.push_back(make(Element::Kind::Id, s));
    layers.push_back(std::move(layer));
  }
  for (size_t i = n; i-- > 0;) {
    std::vector<Element> l;
    for (size_t j = 0; j < i; ++j) l.push_back(make(Element::Kind::Id, X[j]));
    l.push_back(make(Element::Kind::Cap, X[i]));
    for (size_t j = n - i; j < n; ++j) l.push_back(make(Element::Kind::Id, duals[j]));
    layers.push_back(std::move(l));
  }
  return build_diagram(layers, reg);
}

std::vector<cplx> closed_scalars(const Diagram& d, const VertexRegistry& reg) {
  if (!d.top.empty() || !d.bottom.empty()) throw StructuralError("diagram is not closed");
  DenseMap m = evaluate(d, reg);
  std::vector<cplx> out;
  for (Eigen::Index i = 0; i < m.M.rows(); ++i) out.push_back(m.M(i, i));
  return out;
}

}  // namespace ahcat
