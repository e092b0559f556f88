#pragma once

#include "ahcat/graphs.hpp"

#include <Eigen/Dense>

#include <memory>
#include <string>
#include <unordered_map>
#include <vector>

namespace ahcat {

using MatrixC = Eigen::MatrixXcd;

/// One horizontal graph together with the PF weights of its two vertex sets.
struct Row {
  std::string name;
  std::vector<std::string> L, R;
  std::vector<double> muL, muR;
  std::vector<std::vector<int>> adj;   // L x R, 0/1 (horizontal edges are simple)
  std::vector<std::vector<int>> nbrR;  // neighbours of each L vertex
  std::vector<std::vector<int>> nbrL;  // neighbours of each R vertex

  static std::shared_ptr<const Row> make(std::string name, const BipartiteGraph& g, std::vector<double> muL,
                                         std::vector<double> muR);
  int l(const std::string& s) const;
  int r(const std::string& s) const;
};
using RowPtr = std::shared_ptr<const Row>;

bool same_row(const RowPtr& a, const RowPtr& b);

/// Vertical graph between two vertex sets; edges grouped by vertex pair and labelled by
/// dot-separated vertex paths.
struct VSpace {
  struct Edge {
    int a = 0, b = 0;
    std::string label;
  };
  int nA = 0, nB = 0;
  std::vector<Edge> edges;
  std::vector<std::vector<int>> pair;  // a*nB + b -> edge ids
  std::vector<int> pos;                 // position of an edge inside its pair list
  std::unordered_map<std::string, int> index;

  const std::vector<int>& at(int a, int b) const { return pair[static_cast<size_t>(a) * nB + b]; }
  size_t size() const { return edges.size(); }
  int find(const std::string& label) const;
  /// Sorts each pair list by label, renumbers edges pair-major, rebuilds lookups.
  /// Returns the old-id -> new-id map.
  std::vector<int> finalize();
};

VSpace identity_space(int n, const std::vector<std::string>& labels);
/// Path composition; `parts` receives, per new edge, the pair of component edge ids.
VSpace compose_spaces(const VSpace& a, const VSpace& b, std::vector<std::pair<int, int>>* parts = nullptr);
VSpace reverse_space(const VSpace& a);
std::string join_labels(const std::string& a, const std::string& b);

/// Cell matrix at a corner (x in top.L, z in bot.R): rows are left edges x->w with w~z,
/// columns are right edges y->z with x~y.
struct Block {
  std::vector<int> rows, cols;
  std::vector<int> rowOff;  // per bottom-left vertex w: offset of its edges, -1 when w is not adjacent to z
  std::vector<int> colOff;  // per top-right vertex y
  MatrixC M;
};

struct Connection {
  std::string name;
  RowPtr top, bot;
  VSpace left, right;      // left: top.L -> bot.L; right: top.R -> bot.R
  std::vector<Block> W;    // index x * |bot.R| + z

  Block& block(int x, int z) { return W[static_cast<size_t>(x) * bot->R.size() + z]; }
  const Block& block(int x, int z) const { return W[static_cast<size_t>(x) * bot->R.size() + z]; }
  /// Allocates zero blocks with the row/column bases implied by the vertical spaces.
  void build_blocks();
  cplx cell(int x, int z, int eL, int eR) const;
  size_t cell_count() const;
};

struct BiunitarityReport {
  double unitarity = 0;        // max |W W* - 1| over corner blocks
  double renormalization = 0;  // max |U U* - 1| over the reflected blocks
  bool square_blocks = true;
  bool pass = false;
  std::string str() const;
};

BiunitarityReport check_biunitarity(const Connection& c, const TolerancePolicy& pol);

/// Reflected block at (y in top.R, w in bot.L) with the PF renormalization applied.
MatrixC reflected_block(const Connection& c, int y, int w, std::vector<std::pair<int, int>>* rows = nullptr,
                        std::vector<std::pair<int, int>>* cols = nullptr);

Connection identity_connection(const RowPtr& row);
/// Connection with permutation vertical graphs x -> perm(x) on both sides, every cell 1.
Connection permutation_connection(const RowPtr& row, const std::vector<int>& permL, const std::vector<int>& permR,
                                  const std::string& name);
Connection compose(const Connection& a, const Connection& b);
Connection compose(const std::vector<const Connection*>& parts);
Connection conjugate(const Connection& c);
Connection direct_sum(const Connection& a, const Connection& b);

struct GaugeTransform {
  std::vector<MatrixC> left, right;  // per vertex pair, indexed like VSpace::pair
  static GaugeTransform identity(const Connection& c);
  static GaugeTransform random(const Connection& c, unsigned seed);
};

Connection apply_gauge(const Connection& c, const GaugeTransform& g);
/// Phase gauge making a spanning set of cells real and positive (simple vertical edges only).
Connection canonical_gauge(const Connection& c);

/// Gauge-invariant data: |cell|^2 per cell and the 2x2 minor cross products of every block.
std::vector<double> gauge_invariants(const Connection& c);

/// Builds the primitive connection on a validated square (weights from PF data), cells zero.
Connection connection_on_square(const FourGraphSquare& sq, const TolerancePolicy& pol);

struct SolverOptions {
  int restarts = 64;
  int polar_sweeps = 200;
  int lm_iterations = 400;
};

struct SolverFailure : VerificationError {
  double best_residual;
  SolverFailure(const std::string& what, double best) : VerificationError(what), best_residual(best) {}
};

struct SolveInfo {
  int attempts = 0;
  double residual = 0;
};

Connection solve_connection(const FourGraphSquare& sq, unsigned seed, const TolerancePolicy& pol,
                            const SolverOptions& opt = {}, SolveInfo* info = nullptr);

/// Largest residual of the biunitarity equations and the realness conditions used by the solver.
double solver_residual(const Connection& c);

std::string format_connection(const FourGraphSquare& sq, const Connection& c);
/// Parses a connection file; the square's graphs come first, then CELL records.
Connection read_connection(const std::string& path, const TolerancePolicy& pol, FourGraphSquare* sq_out = nullptr);
Connection parse_connection(const std::string& text, const TolerancePolicy& pol, FourGraphSquare* sq_out = nullptr);

}  // namespace ahcat
