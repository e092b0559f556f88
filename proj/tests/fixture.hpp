#pragma once

#include "ahcat/qsystem.hpp"

#include <cmath>

namespace fixture {

using namespace ahcat;

inline const TolerancePolicy& pol() {
  static TolerancePolicy p;
  return p;
}

inline double num(const std::string& expr) { return parse_expression(expr).to_double(); }

inline const KappaSquare& kappa_square() {
  static KappaSquare ks = assemble_kappa_square(reconstruct_kappa_vertical(), pol());
  return ks;
}

// Solved once per process; seed 0.
inline const Connection& kappa() {
  static Connection k = solve_connection(kappa_square().square, 0, pol());
  return k;
}

inline const VertexRegistry& registry() {
  static VertexRegistry r = registry_from_connection(kappa(), pol());
  return r;
}

inline const Connection& strand(const std::string& name) { return registry().strands->get(name).conn; }

inline const FourGraphSquare& a3_square() {
  static FourGraphSquare sq = read_square(data_dir() + "/squares/a3.square");
  return sq;
}

inline const Connection& a3() {
  static Connection c = solve_connection(a3_square(), 0, pol());
  return c;
}

}  // namespace fixture
