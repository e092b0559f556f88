#pragma once

#include "ahcat/numerics.hpp"

#include <map>
#include <string>
#include <vector>

namespace ahcat {

struct BipartiteGraph {
  struct Edge {
    int l = 0, r = 0;
    int ordinal = 0;
  };
  std::vector<std::string> left, right;
  std::vector<Edge> edges;

  int left_index(const std::string& label) const;   // -1 when absent
  int right_index(const std::string& label) const;
  void add_left(const std::string& label);
  void add_right(const std::string& label);
  void add_edge(const std::string& l, const std::string& r, int ordinal = -1);

  /// Multiplicity matrix, rows indexed by left vertices.
  std::vector<std::vector<int>> adjacency() const;
  std::vector<std::string> neighbors(const std::string& label) const;
  BipartiteGraph transpose() const;
  bool connected() const;
  /// Throws StructuralError on dangling references or duplicate labels.
  void validate() const;
};

struct PFData {
  Scalar eigenvalue;
  std::vector<Scalar> left_weights, right_weights;

  double left(int i) const { return left_weights[i].to_double(); }
  double right(int i) const { return right_weights[i].to_double(); }
};

/// Perron-Frobenius pair; weights normalized to 1 at the left vertex "*" (or the first left vertex).
PFData perron_frobenius(const BipartiteGraph& g, const TolerancePolicy& pol);

BipartiteGraph read_graph(const std::string& path);
BipartiteGraph parse_graph(const std::string& text);
std::string format_graph(const BipartiteGraph& g);

/// Coefficient record `C <row-edge> <column-edge> <expr>`; edges are dot-separated vertex paths.
struct CoefficientRecord {
  std::string row, col, expr;
  Scalar value;
};
std::vector<CoefficientRecord> read_coefficients(const std::string& path);

/// Whole file as a string; throws StructuralError when unreadable.
std::string slurp(const std::string& path);

std::string data_dir();

/// Vertical graph of kappa read off the two conjugation tables; throws StructuralError
/// (data-integrity) when the tables disagree.
BipartiteGraph reconstruct_kappa_vertical(const std::string& r_table = "", const std::string& rbar_table = "");

struct FourGraphSquare {
  std::vector<std::string> V0, V1, V2, V3;
  BipartiteGraph G0, G1, G2, G3;  // (V0,V1) (V1,V2) (V3,V2) (V0,V3)
};

struct SquareReport {
  bool valid = false;
  std::string message;
  size_t cells = 0;
  std::map<std::pair<std::string, std::string>, size_t> cells_per_corner;  // (V0 vertex, V2 vertex)
};

SquareReport validate_square(const FourGraphSquare& sq);

/// Square file: four graph sections introduced by `G0`..`G3` lines.
FourGraphSquare read_square(const std::string& path);
FourGraphSquare parse_square(const std::string& text);
std::string format_square(const FourGraphSquare& sq);

struct KappaSquare {
  FourGraphSquare square;
  size_t closing_splits = 0;     // relabelings that close every cell
  size_t alpha_compatible = 0;   // of those, how many the involution x <-> x~ preserves
  std::map<std::string, std::string> left_relabel, right_bijection;
};

/// Assembles the kappa square from the reconstructed vertical graph (see README for the search).
KappaSquare assemble_kappa_square(const BipartiteGraph& vertical, const TolerancePolicy& pol);

/// Label involution x <-> x~ ("x~~ = x"; labels without a tilde partner are fixed).
std::string tilde(const std::string& label, const std::vector<std::string>& universe);

}  // namespace ahcat
