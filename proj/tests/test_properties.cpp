// Randomized property suites, 100 trials each.
#include "common.hpp"
#include "properties.hpp"

namespace {

constexpr int kTrials = 100;
constexpr double kTol = 1e-9;

void require(const props::Result& r) {
  CAPTURE(r.first);
  CHECK(r.trials == kTrials);
  CHECK(r.failures == 0);
  CHECK(r.worst <= kTol);
}

}  // namespace

TEST_CASE("property: gauge invariance of closed-diagram scalars") { require(props::gauge_invariance(kTrials)); }

TEST_CASE("property: state sum equals composition") { require(props::state_sum_equivalence(kTrials)); }

TEST_CASE("property: Frobenius reciprocity of hom dimensions") { require(props::frobenius_reciprocity(kTrials)); }

TEST_CASE("property: decompose and direct_sum round trip") { require(props::decompose_round_trip(kTrials)); }
