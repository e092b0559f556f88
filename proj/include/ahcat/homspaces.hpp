#pragma once

#include "ahcat/connections.hpp"

#include <map>
#include <string>
#include <vector>

namespace ahcat {

/// Intertwiner between two connections on the same rows. Blocks are indexed like
/// VSpace::pair; a block maps the source edge space of a vertex pair into the target's.
struct EdgeMap {
  std::vector<MatrixC> left, right;

  /// Dense matrix on the left edge spaces (rows: target edges, columns: source edges).
  MatrixC dense_left(const VSpace& src, const VSpace& dst) const;
  MatrixC dense_right(const VSpace& src, const VSpace& dst) const;
  EdgeMap adjoint() const;
  /// Sum of squared Frobenius norms of the left blocks.
  double norm2() const;
};

/// Inner product over the left blocks.
cplx inner(const EdgeMap& a, const EdgeMap& b);
EdgeMap operator*(const EdgeMap& a, const EdgeMap& b);  // a after b
EdgeMap operator+(const EdgeMap& a, const EdgeMap& b);
EdgeMap operator*(cplx s, const EdgeMap& a);

EdgeMap identity_map(const Connection& c);

/// Largest defect of the commutation relation W_Y (1 (x) T_R) = (T_L (x) 1) W_X.
double intertwiner_residual(const Connection& X, const Connection& Y, const EdgeMap& T);

/// Orthonormal basis of Hom(X, Y). Unknowns are seeded at the first top-left vertex and
/// propagated through both families of corner blocks; the remaining equations are solved
/// for their null space.
std::vector<EdgeMap> hom_space(const Connection& X, const Connection& Y);
size_t hom_dim(const Connection& X, const Connection& Y);

struct Summand {
  Connection conn;
  int multiplicity = 1;
  EdgeMap embedding;  // isometry from conn into the decomposed connection
};

/// Irreducible summands, one representative per isomorphism class.
std::vector<Summand> decompose(const Connection& c, unsigned seed = 7);

/// Restriction of c to the range of a projection in End(c).
Connection sub_connection(const Connection& c, const EdgeMap& projection, const std::string& name, EdgeMap* embedding = nullptr);

/// Bimodule dimension read off the PF weights at the first top-left vertex.
double pf_dimension(const Connection& c);
/// pf_dimension of an irreducible connection; throws domain_error otherwise.
double quantum_dimension(const Connection& c);

struct BasedRing {
  std::vector<std::string> labels;
  std::vector<int> dual;
  std::vector<double> dims;
  int unit = 0;
  std::map<std::tuple<int, int, int>, int> N;  // (a, b, c) -> multiplicity of c in a b

  int index(const std::string& label) const;
  int mult(int a, int b, int c) const;
  /// Left multiplication matrix by the object sum_k coef[k] * k: (L)_{ab} = sum_k coef[k] N^b_{a k}.
  std::vector<std::vector<int>> multiplication_matrix(const std::vector<int>& coef) const;
};

struct PartialRingError : VerificationError {
  std::vector<std::string> frontier;
  PartialRingError(const std::string& w, std::vector<std::string> f) : VerificationError(w), frontier(std::move(f)) {}
};

struct FusionResult {
  BasedRing ring;
  std::vector<Connection> sectors;  // irreducible representatives, same order as ring.labels
};

/// Saturates products of the generators starting from the unit, interning irreducibles up to
/// isomorphism (dim Hom = 1); throws PartialRingError if depth runs out.
FusionResult fusion_ring(const std::vector<Connection>& generators, int depth = 8);

std::string format_ring(const BasedRing& r);
BasedRing parse_ring(const std::string& text);

struct AlgebraObject {
  const BasedRing* ring = nullptr;
  std::vector<int> coef;
};

/// Parses "Id+kbar.a.k" style sums (optional integer prefixes "2*x") against a ring.
AlgebraObject parse_algebra(const BasedRing& ring, const std::string& text);

struct SynthesisFailure : VerificationError {
  using VerificationError::VerificationError;
};

struct PrincipalGraph {
  BipartiteGraph graph;
  std::vector<std::vector<int>> L;      // L_gamma on the reachable sectors
  std::vector<std::vector<int>> Lambda;  // even x odd
  double norm = 0;
};

/// Integer factorization Lambda Lambda^T = L_gamma with the fewest odd vertices.
PrincipalGraph principal_graph_from_algebra(const AlgebraObject& g);
/// Same search on an explicit symmetric matrix (row labels used for the even vertices).
PrincipalGraph principal_graph_from_matrix(const std::vector<std::vector<int>>& L, const std::vector<std::string>& labels);

}  // namespace ahcat
