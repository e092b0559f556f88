#include "properties.hpp"

#include "fixture.hpp"

#include <optional>
#include <random>

namespace props {

using namespace ahcat;
using fixture::pol;
using fixture::registry;

namespace {

void note(Result& r, const std::string& what) {
  ++r.failures;
  if (r.first.empty()) r.first = what;
}

constexpr double kTol = 1e-9;

const std::vector<std::string> kStrands{"k", "kb", "a", "r"};

// Random composable word of the given length starting at a row.
std::vector<std::string> random_word(std::mt19937& rng, RowPtr start, int len) {
  const StrandSet& S = *registry().strands;
  std::vector<std::string> w;
  RowPtr at = start;
  for (int i = 0; i < len; ++i) {
    std::vector<std::string> ok;
    for (auto& s : kStrands)
      if (same_row(S.get(s).conn.top, at)) ok.push_back(s);
    std::string pick = ok[std::uniform_int_distribution<size_t>(0, ok.size() - 1)(rng)];
    w.push_back(pick);
    at = S.get(pick).conn.bot;
  }
  return w;
}

Connection word_connection(const std::vector<std::string>& w) {
  const StrandSet& S = *registry().strands;
  std::vector<const Connection*> cs;
  for (auto& s : w) cs.push_back(&S.get(s).conn);
  return cs.size() == 1 ? *cs[0] : compose(cs);
}

RowPtr row_after(RowPtr start, const std::vector<std::string>& w) {
  for (auto& s : w) start = registry().strands->get(s).conn.bot;
  return start;
}

// Cheap diagrams whose traced squares serve as gauge-invariant scalars.
const std::vector<std::string> kGaugeProbes{"lemmas/zigzag_k.dgm",  "lemmas/zigzag_kb.dgm", "lemmas/skein_k.dgm",
                                            "lemmas/skein_kb_tri.dgm", "vertices/rho3.dgm",   "vertices/rkk.dgm",
                                            "vertices/kbr.dgm",     "vertices/ara.dgm"};

std::vector<double> probe_scalars(const VertexRegistry& reg) {
  std::vector<double> out;
  for (auto& f : kGaugeProbes) {
    Diagram d = read_diagram(data_dir() + "/diagrams/" + f, reg);
    for (auto v : closed_scalars(trace_closure(then(d, rotate(d, reg), reg), reg), reg)) out.push_back(v.real());
  }
  return out;
}

Element elem(Element::Kind k, const std::string& name) {
  Element e;
  e.kind = k;
  e.name = name;
  return e;
}

// Random layered diagram grown from a short top word by cups, caps and registry vertices.
// Returns false when the sampled moves never produced a valid diagram.
bool random_diagram(std::mt19937& rng, const std::vector<std::string>& vertex_keys, Diagram& out) {
  const VertexRegistry& R = registry();
  const StrandSet& S = *R.strands;
  RowPtr base = S.get("a").conn.top;
  auto word = random_word(rng, base, std::uniform_int_distribution<int>(0, 2)(rng));
  std::vector<std::vector<Element>> layers;
  std::vector<std::string> cur = word;
  int target = std::uniform_int_distribution<int>(1, 4)(rng);
  for (int attempt = 0; attempt < 40 && static_cast<int>(layers.size()) < target; ++attempt) {
    int move = std::uniform_int_distribution<int>(0, 2)(rng);
    size_t pos = std::uniform_int_distribution<size_t>(0, cur.size())(rng);
    std::vector<Element> layer;
    std::vector<std::string> next;
    auto ids = [&](size_t from, size_t to) {
      for (size_t i = from; i < to; ++i) {
        layer.push_back(elem(Element::Kind::Id, cur[i]));
        next.push_back(cur[i]);
      }
    };
    if (move == 0) {
      if (cur.size() >= 4) continue;
      std::string s = kStrands[std::uniform_int_distribution<size_t>(0, kStrands.size() - 1)(rng)];
      ids(0, pos);
      layer.push_back(elem(Element::Kind::Cup, s));
      next.push_back(s);
      next.push_back(S.get(s).dual);
      ids(pos, cur.size());
    } else if (move == 1) {
      if (pos + 1 >= cur.size()) continue;
      if (S.get(cur[pos]).dual != cur[pos + 1]) continue;
      ids(0, pos);
      layer.push_back(elem(Element::Kind::Cap, cur[pos]));
      ids(pos + 2, cur.size());
    } else {
      std::string key = vertex_keys[std::uniform_int_distribution<size_t>(0, vertex_keys.size() - 1)(rng)];
      if (std::uniform_int_distribution<int>(0, 1)(rng)) key += "*";
      DenseMap m = R.get(key);
      const auto& src = m.src->word;
      const auto& dst = m.dst->word;
      if (pos + src.size() > cur.size()) continue;
      if (!std::equal(src.begin(), src.end(), cur.begin() + pos)) continue;
      if (cur.size() - src.size() + dst.size() > 5) continue;
      ids(0, pos);
      layer.push_back(elem(Element::Kind::Vertex, key));
      next.insert(next.end(), dst.begin(), dst.end());
      ids(pos + src.size(), cur.size());
    }
    if (layer.empty()) continue;
    auto trial = layers;
    trial.push_back(layer);
    try {
      out = build_diagram(trial, R);
    } catch (const StructuralError&) {
      continue;  // rows do not line up
    }
    layers = std::move(trial);
    cur = next;
  }
  if (layers.empty()) return false;
  out = build_diagram(layers, R);
  return true;
}

}  // namespace

Result gauge_invariance(int trials) {
  Result res;
  const Connection& K = fixture::kappa();
  std::vector<double> base = probe_scalars(registry());
  for (int t = 0; t < trials; ++t) {
    Connection g = apply_gauge(K, GaugeTransform::random(K, 1000 + t));
    ++res.trials;
    if (!check_biunitarity(g, pol()).pass) {
      note(res, "gauge " + std::to_string(t) + " broke biunitarity");
      continue;
    }
    VertexRegistry reg = registry_from_connection(g, pol());
    std::vector<double> x = probe_scalars(reg);
    if (x.size() != base.size()) {
      note(res, "gauge " + std::to_string(t) + " changed the number of scalars");
      continue;
    }
    for (size_t i = 0; i < x.size(); ++i) res.worst = std::max(res.worst, std::abs(x[i] - base[i]));
  }
  return res;
}

Result state_sum_equivalence(int trials) {
  Result res;
  std::vector<std::string> keys;
  for (auto& [k, v] : registry().vertices) keys.push_back(k);
  std::mt19937 rng(2024);
  std::uniform_real_distribution<double> coin(0, 1);
  for (int tries = 0; res.trials < trials && tries < 50 * trials; ++tries) {
    Diagram d;
    if (!random_diagram(rng, keys, d)) continue;
    DenseMap m = evaluate(d, registry());
    if (m.M.size() == 0) continue;
    // every nonzero entry plus a sample of the rest
    for (size_t j = 0; j < m.src->size(); ++j)
      for (size_t i = 0; i < m.dst->size(); ++i) {
        if (std::abs(m.M(i, j)) == 0 && coin(rng) > 0.1) continue;
        auto c = coefficient(d, registry(), m.src->sp.edges[j].label, m.dst->sp.edges[i].label);
        double gap = std::abs(c.value - m.M(i, j));
        if (gap > kTol && res.first.empty()) res.first = d.str();
        res.worst = std::max(res.worst, gap);
      }
    ++res.trials;
  }
  if (res.trials < trials) note(res, "only " + std::to_string(res.trials) + " diagrams sampled");
  return res;
}

Result frobenius_reciprocity(int trials) {
  Result res;
  std::mt19937 rng(7);
  const StrandSet& S = *registry().strands;
  RowPtr P = S.get("a").conn.top, Q = S.get("k").conn.bot;
  for (int tries = 0; res.trials < trials && tries < 100 * trials; ++tries) {
    RowPtr start = std::uniform_int_distribution<int>(0, 1)(rng) ? P : Q;
    auto x = random_word(rng, start, std::uniform_int_distribution<int>(1, 2)(rng));
    auto y = random_word(rng, row_after(start, x), std::uniform_int_distribution<int>(1, 2)(rng));
    auto z = random_word(rng, start, std::uniform_int_distribution<int>(1, 3)(rng));
    if (!same_row(row_after(start, z), row_after(row_after(start, x), y))) continue;
    Connection X = word_connection(x), Y = word_connection(y), Z = word_connection(z);
    size_t d0 = hom_dim(compose(X, Y), Z);
    size_t d1 = hom_dim(Y, compose(conjugate(X), Z));
    size_t d2 = hom_dim(X, compose(Z, conjugate(Y)));
    if (d0 != d1 || d0 != d2)
      note(res, "[" + word_key(x) + "][" + word_key(y) + "] vs [" + word_key(z) + "]: " + std::to_string(d0) + " " +
                    std::to_string(d1) + " " + std::to_string(d2));
    ++res.trials;
  }
  if (res.trials < trials) note(res, "only " + std::to_string(res.trials) + " triples sampled");
  return res;
}

Result decompose_round_trip(int trials) {
  Result res;
  std::mt19937 rng(99);
  const StrandSet& S = *registry().strands;
  RowPtr P = S.get("a").conn.top;
  for (int tries = 0; res.trials < trials && tries < 100 * trials; ++tries) {
    auto u = random_word(rng, P, std::uniform_int_distribution<int>(1, 2)(rng));
    auto v = random_word(rng, P, std::uniform_int_distribution<int>(1, 2)(rng));
    if (!same_row(row_after(P, u), P) || !same_row(row_after(P, v), P)) continue;
    std::string tag = "[" + word_key(u) + "]+[" + word_key(v) + "]";
    Connection X = direct_sum(word_connection(u), word_connection(v));
    auto parts = decompose(X, static_cast<unsigned>(res.trials));
    ++res.trials;
    if (parts.empty()) {
      note(res, tag + ": no summands");
      continue;
    }
    size_t msq = 0;
    double dim = 0;
    std::optional<Connection> Y;
    for (auto& p : parts) {
      msq += static_cast<size_t>(p.multiplicity) * p.multiplicity;
      dim += p.multiplicity * quantum_dimension(p.conn);
      res.worst = std::max(res.worst, intertwiner_residual(p.conn, X, p.embedding));
      EdgeMap gram = p.embedding.adjoint() * p.embedding;
      res.worst = std::max(res.worst, std::sqrt((gram + cplx(-1) * identity_map(p.conn)).norm2()));
      for (int m = 0; m < p.multiplicity; ++m) Y = Y ? direct_sum(*Y, p.conn) : p.conn;
    }
    for (size_t i = 0; i < parts.size(); ++i)
      for (size_t j = i + 1; j < parts.size(); ++j)
        if (hom_dim(parts[i].conn, parts[j].conn) != 0) note(res, tag + ": two summands are isomorphic");
    size_t end = hom_dim(X, X);
    res.worst = std::max(res.worst, std::abs(dim - pf_dimension(X)));
    if (msq != end || hom_dim(X, *Y) != end || hom_dim(*Y, *Y) != end) note(res, tag + ": reassembly is not isomorphic");
  }
  if (res.trials < trials) note(res, "only " + std::to_string(res.trials) + " sums sampled");
  return res;
}

}  // namespace props
