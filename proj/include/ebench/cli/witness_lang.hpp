#pragma once
// Witness mini-language.
//
//   terms:     [c *] A[ref] [(bd^m b^n)] {(+|-) ...}
//              c is a real number or (re, im); ref is I, a, ad, n or a path
//              to a JSON matrix file
//   built-ins: fidelity_witness(X, u, v)   with u^2 + v^2 = 1
//              schmidt_witness(k, d)

#include <string>
#include <vector>

#include "ebench/core.hpp"
#include "ebench/fock.hpp"
#include "ebench/witness.hpp"

namespace ebench::cli {

struct TermExpr {
  Complex coeff{1.0, 0.0};
  std::string ref;
  int m = 0;  // power of b^dagger
  int n = 0;  // power of b
};

struct WitnessExpr {
  enum class Kind { terms, fidelity, schmidt };
  Kind kind = Kind::terms;
  std::vector<TermExpr> terms;
  double X = 0.0, u = 1.0, v = 0.0;
  int k = 1, d = 2;
};

/// Throws InvalidArgument with the column of the offending token.
WitnessExpr parse_witness(const std::string& text);

/// Resolves operator references on the A space.
witness::WitnessSpec materialize(const WitnessExpr& expr, const fock::Space& a);

}  // namespace ebench::cli
