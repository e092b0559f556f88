#pragma once

#include <string>

namespace props {

struct Result {
  int trials = 0;
  int failures = 0;      // trials with a discrete mismatch
  double worst = 0;      // largest numeric deviation
  std::string first;     // description of the first failure
  bool pass(double tol) const { return failures == 0 && worst <= tol; }
};

// Closed scalars of cheap diagrams under random unitary gauges of the kappa connection.
Result gauge_invariance(int trials);
// Random layered diagrams: state sum against the composed matrix.
Result state_sum_equivalence(int trials);
// dim hom(xy, z) = dim hom(y, xbar z) = dim hom(x, z ybar) on random words.
Result frobenius_reciprocity(int trials);
// Summands of random direct sums reassemble to an isomorphic connection.
Result decompose_round_trip(int trials);

}  // namespace props
