#pragma once

#include "ahcat/diagrams.hpp"

#include <optional>
#include <string>
#include <vector>

namespace ahcat {

struct Section {
  enum class Status { Pass, Fail, Skip };
  std::string name, anchor;
  Status status = Status::Pass;
  double residual = 0;
  std::string detail;

  std::string str() const;
};

struct Report {
  std::vector<Section> sections;
  std::vector<std::string> notes;

  Section& add(std::string name, std::string anchor, bool pass, double residual, std::string detail = "");
  void skip(std::string name, std::string anchor, std::string reason);
  bool pass() const;
  std::string str() const;
};

struct QSystemFailure : VerificationError {
  using VerificationError::VerificationError;
};

/// Zig-zag identities on the isometric conjugation intertwiners, compared with (1/d) Id.
/// The detail carries the scalar the zig-zags actually equal.
Section check_conjugacy(const VertexRegistry& reg, double d, const TolerancePolicy& pol);

struct SkeinFit {
  double c_cup = 0, c_tri = 0;  // coefficients of the cup and trivalent terms
  double residual = 0;
};

/// Least-squares expansion of the double-trivalent diagram on the kbar side (or the k side).
SkeinFit fit_skein(const VertexRegistry& reg, bool kappa_side);
/// Checks the expansion with the given coefficients on both sides.
Section check_skein(const VertexRegistry& reg, double c_cup, double c_tri, const TolerancePolicy& pol);

/// Runs data/lemmas.suite (or the given file); one section per entry.
std::vector<Section> run_lemma_suite(const VertexRegistry& reg, const TolerancePolicy& pol, const std::string& path = "");

/// Id_{k kbar} = (1/beta) cup cap + (beta1/beta) V V*.
Section check_identity_split(const VertexRegistry& reg, const TolerancePolicy& pol);

struct QSystemCandidate {
  Connection sigma;
  DenseMap R, S;
  double d = 0;  // dimension of sigma
  Diagram R_diagram, S_diagram;
};

/// R and S from the bundled diagrams; sigma = kbar alpha kappa.
QSystemCandidate build_R_S(const VertexRegistry& reg);

struct ReducedReport {
  std::vector<Section> sections;
  double lambda = 0, lambda_residual = 0;
};

/// Isometries, condition (1) directly and after bending, and the fitted scalar of condition (2).
ReducedReport check_reduced(const QSystemCandidate& qc, const VertexRegistry& reg, const TolerancePolicy& pol);

/// Map between direct sums of path spaces, one block per pair of summands.
struct GradedMap {
  std::vector<SpacePtr> src, dst;
  std::vector<std::vector<std::optional<DenseMap>>> blocks;  // [dst][src]

  GradedMap adjoint() const;
};

GradedMap graded_identity(const StrandSet& S, const std::vector<SpacePtr>& summands);
GradedMap operator*(const GradedMap& a, const GradedMap& b);
GradedMap graded_tensor(const StrandSet& S, const GradedMap& a, const GradedMap& b);
double graded_diff(const GradedMap& a, const GradedMap& b);
/// Largest |a - c b| over all blocks after fitting the scalar c.
double graded_fit(const GradedMap& a, const GradedMap& b, cplx& c);

struct FullQSystem {
  std::vector<SpacePtr> gamma;
  GradedMap T, S;
};

struct FullReport {
  std::vector<Section> sections;
  double unit_scalar = 0;  // (T* x 1) S = unit_scalar Id
  double index = 0;        // 1 / unit_scalar^2
};

FullReport check_full(const FullQSystem& q, const VertexRegistry& reg, const TolerancePolicy& pol);

/// gamma = Id + sigma with T the unit inclusion and S assembled from R and S.
FullQSystem assemble_full(const QSystemCandidate& qc, const VertexRegistry& reg);
/// (k kbar, r, 1 (x) rbar (x) 1) with isometric r and rbar.
FullQSystem canonical_qsystem(const VertexRegistry& reg);

/// Gauge-invariant closed scalars: every bundled lemma and vertex diagram the registry can evaluate,
/// composed with its rotation and traced. Labelled "file@vertex".
std::vector<std::pair<std::string, double>> invariant_scalars(const VertexRegistry& reg);

struct PipelineOptions {
  std::string registry = "connection";  // or "tables"
  std::string connection_file;          // solved connection to load instead of solving
  std::string square_file;              // square to solve instead of the kappa square
  unsigned seed = 0;
  TolerancePolicy pol;
};

/// End-to-end run; sections for the AH-specific checks are skipped on other squares.
Report verify_paper(const PipelineOptions& opt);

}  // namespace ahcat
