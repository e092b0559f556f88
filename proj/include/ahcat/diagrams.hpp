#pragma once

#include "ahcat/homspaces.hpp"

#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

namespace ahcat {

/// A connection used as a string type in diagrams, together with the name of its conjugate.
struct Strand {
  std::string name, dual;
  Connection conn;
};

/// Left edge paths along a word of strands. Empty words are the vertex set of a row.
struct PathSpace {
  std::vector<std::string> word;
  RowPtr start, finish;  // rows at the two ends of the word
  VSpace sp;
  std::vector<std::vector<int>> tuples;  // per path, one strand edge id per letter
  std::map<std::vector<int>, int> lookup;

  size_t size() const { return sp.size(); }
  int first_vertex(int path) const { return sp.edges[path].a; }
  int last_vertex(int path) const { return sp.edges[path].b; }
  /// Path by dotted vertex label; throws std::domain_error when absent.
  int find(const std::string& label) const;
  std::string key() const;
};
using SpacePtr = std::shared_ptr<const PathSpace>;

std::string word_key(const std::vector<std::string>& word);

/// Strand table with a cache of path spaces.
class StrandSet {
 public:
  void add(const std::string& name, const std::string& dual, Connection c);
  bool has(const std::string& name) const { return strands_.count(name) > 0; }
  const Strand& get(const std::string& name) const;
  const std::map<std::string, Strand>& all() const { return strands_; }
  RowPtr row(const std::string& name) const;

  SpacePtr space(const std::vector<std::string>& word) const;
  /// Space of the empty word over a row.
  SpacePtr empty(const RowPtr& row) const;

 private:
  std::map<std::string, Strand> strands_;
  std::map<std::string, RowPtr> rows_;
  mutable std::map<std::string, SpacePtr> cache_;
  std::shared_ptr<std::recursive_mutex> mu_ = std::make_shared<std::recursive_mutex>();
};

/// Linear map between two path spaces (rows: target paths, columns: source paths).
struct DenseMap {
  SpacePtr src, dst;
  MatrixC M;

  DenseMap adjoint() const;
  /// Entry for a source and a target label.
  cplx at(const std::string& from, const std::string& to) const;
  double max_abs() const { return M.size() ? M.cwiseAbs().maxCoeff() : 0.0; }
};

bool same_space(const SpacePtr& a, const SpacePtr& b);
DenseMap operator*(const DenseMap& a, const DenseMap& b);  // a after b
DenseMap operator+(const DenseMap& a, const DenseMap& b);
DenseMap operator-(const DenseMap& a, const DenseMap& b);
DenseMap operator*(cplx s, const DenseMap& a);
/// Largest entrywise difference; throws StructuralError on shape mismatch.
double max_diff(const DenseMap& a, const DenseMap& b);

DenseMap identity_on(const StrandSet& S, const std::vector<std::string>& word);
DenseMap identity_on(const StrandSet& S, const SpacePtr& sp);
/// Horizontal juxtaposition (a on the left).
DenseMap tensor(const StrandSet& S, const DenseMap& a, const DenseMap& b);
DenseMap tensor(const StrandSet& S, const std::vector<DenseMap>& parts);

/// Dense map of an intertwiner between two connections whose left spaces are the given path spaces.
DenseMap from_edge_map(const EdgeMap& T, const SpacePtr& src, const SpacePtr& dst);

struct RegistryError : StructuralError {
  using StructuralError::StructuralError;
};

struct Vertex {
  DenseMap map;
  Scalar normalization{1};  // map* map = normalization^2 on the support
  std::string anchor;
};

/// Named elementary intertwiners. Keys ending in '*' resolve to adjoints.
struct VertexRegistry {
  std::shared_ptr<StrandSet> strands;
  std::map<std::string, Vertex> vertices;
  std::map<std::string, std::string> cups;  // strand -> vertex key of its cup
  std::string source;                       // "connection" or "tables"
  std::vector<std::string> notes;

  bool has(const std::string& key) const;
  DenseMap get(const std::string& key) const;
  DenseMap cup(const std::string& strand) const;
  DenseMap id(const std::vector<std::string>& word) const { return identity_on(*strands, word); }
  DenseMap T(const std::vector<DenseMap>& parts) const { return tensor(*strands, parts); }
};

struct Element {
  enum class Kind { Id, Vertex, Cup, Cap, Scale };
  Kind kind = Kind::Id;
  std::string name;  // strand or vertex key (adjoints end in '*')
  std::string expr;  // scale factor text
  cplx factor{1};
  std::string str() const;
};

struct Diagram {
  std::vector<std::vector<Element>> layers;
  std::vector<std::string> top, bottom;
  RowPtr top_row, bottom_row;  // leftmost rows of the two boundaries
  std::string str() const;
};

/// Layers of the text format; registry-independent.
std::vector<std::vector<Element>> parse_layers(const std::string& text);
/// Validates boundaries layer by layer; StructuralError names the first bad layer.
Diagram build_diagram(const std::vector<std::vector<Element>>& layers, const VertexRegistry& reg);
Diagram parse_diagram(const std::string& text, const VertexRegistry& reg);
Diagram read_diagram(const std::string& path, const VertexRegistry& reg);

DenseMap evaluate(const Diagram& d, const VertexRegistry& reg);
/// Map of one layer.
DenseMap evaluate_layer(const std::vector<Element>& layer, const VertexRegistry& reg);

struct CoefficientResult {
  cplx value{0};
  size_t states = 0;  // states with nonzero weight
};

/// State sum for one matrix entry. With unique_state set, more than one contributing state
/// raises VerificationError.
CoefficientResult coefficient(const Diagram& d, const VertexRegistry& reg, const std::string& top_edge,
                              const std::string& bottom_edge, bool unique_state = false);

enum class Side { Left, Right };
/// Moves the outer top strand on the given side to the bottom boundary with a cup.
Diagram bend(const Diagram& d, Side side, const VertexRegistry& reg);
/// Rotation by pi, which is the adjoint.
Diagram rotate(const Diagram& d, const VertexRegistry& reg);

/// `first` followed by `second` (first is applied first).
Diagram then(const Diagram& first, const Diagram& second, const VertexRegistry& reg);
/// Tensor with identity strands on both sides.
Diagram pad(const Diagram& d, const std::vector<std::string>& left, const std::vector<std::string>& right,
            const VertexRegistry& reg);
/// Right trace of an endomorphism diagram: nested cups above, caps below. The result is closed.
Diagram trace_closure(const Diagram& d, const VertexRegistry& reg);
/// Scalars of a closed diagram, one per vertex of its row.
std::vector<cplx> closed_scalars(const Diagram& d, const VertexRegistry& reg);

/// True when the connection carries the labelled AH graphs (vertices *, *~ and the x <-> x~ symmetry).
bool has_ah_structure(const Connection& k);

/// Cups of k and kbar from the solved connection; on AH input also alpha, rho, v, w and the
/// derived vertices of data/diagrams/vertices. With gauge_fix set, w is phase-gauged onto the
/// listed coefficients of data/kappa_w.coef.
VertexRegistry registry_from_connection(const Connection& k, const TolerancePolicy& pol, bool gauge_fix = true);

/// Same strands, with r and rbar loaded from the bundled tables and v completed from them.
/// Rows whose squared coefficients do not sum to 1 are recorded in the notes.
VertexRegistry registry_from_tables(const Connection& k, const TolerancePolicy& pol, const std::string& r_table = "",
                                    const std::string& rbar_table = "");

/// Largest defect of map* map / normalization^2 being an orthogonal projection.
double isometry_defect(const Vertex& v);

}  // namespace ahcat
