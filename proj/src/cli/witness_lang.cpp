#include "ebench/cli/witness_lang.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "ebench/cli/config.hpp"
#include "ebench/cv_benchmark.hpp"
#include "ebench/dv_benchmark.hpp"

namespace ebench::cli {
namespace {

class Parser {
 public:
  explicit Parser(const std::string& s) : s_(s) {}

  [[noreturn]] void fail(const std::string& what) const {
    throw InvalidArgument("witness: column " + std::to_string(pos_ + 1) + ": " + what);
  }

  void skip() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }

  bool eat(const std::string& tok) {
    skip();
    if (s_.compare(pos_, tok.size(), tok) == 0) {
      pos_ += tok.size();
      return true;
    }
    return false;
  }

  void expect(const std::string& tok) {
    if (!eat(tok)) fail("expected '" + tok + "'");
  }

  bool at_end() {
    skip();
    return pos_ >= s_.size();
  }

  bool peek_number() {
    skip();
    return pos_ < s_.size() && (std::isdigit(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '.');
  }

  double number() {
    skip();
    const char* begin = s_.c_str() + pos_;
    char* end = nullptr;
    const double v = std::strtod(begin, &end);
    if (end == begin || !std::isfinite(v)) fail("expected a number");
    pos_ += static_cast<std::size_t>(end - begin);
    return v;
  }

  int integer() {
    const double v = number();
    if (v != std::floor(v) || std::abs(v) > 1e6) fail("expected an integer");
    return static_cast<int>(v);
  }

  std::string until(char close) {
    const auto end = s_.find(close, pos_);
    if (end == std::string::npos) fail(std::string("missing '") + close + "'");
    std::string out = s_.substr(pos_, end - pos_);
    pos_ = end + 1;
    return out;
  }

  std::size_t pos() const { return pos_; }

 private:
  const std::string& s_;
  std::size_t pos_ = 0;
};

TermExpr parse_term(Parser& p, double sign) {
  TermExpr t;
  Complex c(1.0, 0.0);
  if (p.peek_number()) {
    c = p.number();
    p.expect("*");
  } else if (p.eat("(")) {
    const double re = p.number();
    p.expect(",");
    const double im = p.number();
    p.expect(")");
    p.expect("*");
    c = Complex(re, im);
  }
  t.coeff = sign * c;
  p.expect("A[");
  t.ref = p.until(']');
  if (t.ref.empty()) p.fail("empty operator reference");
  if (p.eat("(")) {
    if (p.eat("bd")) t.m = p.eat("^") ? p.integer() : 1;
    if (p.eat("b")) t.n = p.eat("^") ? p.integer() : 1;
    p.expect(")");
  }
  if (t.m < 0 || t.n < 0) p.fail("powers must be >= 0");
  if (t.m + t.n > 32) p.fail("n + m above 32 is not supported");
  return t;
}

CMatrix named_operator(const std::string& ref, const fock::Space& a) {
  if (ref == "I") return CMatrix::Identity(a.dim, a.dim);
  if (ref == "a" || ref == "ad" || ref == "n") {
    if (!a.is_fock) throw InvalidArgument("witness: A[" + ref + "] needs a Fock space A");
    const auto ladder = fock::mode_operators(a);
    if (ref == "a") return ladder.annihilation.op.matrix;
    if (ref == "ad") return ladder.creation.op.matrix;
    return ladder.creation.op.matrix * ladder.annihilation.op.matrix;
  }
  std::ifstream in(ref);
  if (!in) throw InvalidArgument("witness: A[" + ref + "] is neither a named operator nor a readable file");
  std::stringstream ss;
  ss << in.rdbuf();
  const json j = parse_document(ss.str(), "witness: " + ref);
  CMatrix m = matrix_from_json(j, ref);
  if (m.rows() != a.dim || m.cols() != a.dim) {
    throw InvalidArgument("witness: A[" + ref + "] must be " + std::to_string(a.dim) + "x" + std::to_string(a.dim));
  }
  return m;
}

}  // namespace

WitnessExpr parse_witness(const std::string& text) {
  Parser p(text);
  WitnessExpr w;
  if (p.eat("fidelity_witness")) {
    w.kind = WitnessExpr::Kind::fidelity;
    p.expect("(");
    w.X = p.number();
    p.expect(",");
    w.u = p.number();
    p.expect(",");
    w.v = p.number();
    p.expect(")");
    if (!p.at_end()) p.fail("trailing input");
    if (w.X < 0) throw InvalidArgument("witness: fidelity_witness X must be >= 0");
    if (!(w.u > 0.0) || w.v < 0.0 || std::abs(w.u * w.u + w.v * w.v - 1.0) > 1e-9) {
      throw InvalidArgument("witness: fidelity_witness needs u > 0, v >= 0 and u^2 + v^2 = 1");
    }
    return w;
  }
  if (p.eat("schmidt_witness")) {
    w.kind = WitnessExpr::Kind::schmidt;
    p.expect("(");
    w.k = p.integer();
    p.expect(",");
    w.d = p.integer();
    p.expect(")");
    if (!p.at_end()) p.fail("trailing input");
    if (w.d < 2 || w.k < 1 || w.k > w.d - 1) throw InvalidArgument("witness: schmidt_witness needs d >= 2 and 1 <= k <= d-1");
    return w;
  }
  double sign = 1.0;
  if (p.eat("-")) sign = -1.0;
  else p.eat("+");
  w.terms.push_back(parse_term(p, sign));
  while (!p.at_end()) {
    if (p.eat("+")) sign = 1.0;
    else if (p.eat("-")) sign = -1.0;
    else p.fail("expected '+' or '-'");
    w.terms.push_back(parse_term(p, sign));
  }
  return w;
}

witness::WitnessSpec materialize(const WitnessExpr& expr, const fock::Space& a) {
  switch (expr.kind) {
    case WitnessExpr::Kind::fidelity: {
      const double u2 = expr.u * expr.u;
      return cv::fidelity_witness(expr.X, u2, 1.0 - u2);
    }
    case WitnessExpr::Kind::schmidt:
      if (a.dim != expr.d) throw InvalidArgument("witness: schmidt_witness d does not match the channel dimension");
      return dv::schmidt_witness_pairs(expr.k, expr.d);
    case WitnessExpr::Kind::terms: {
      witness::PolynomialWitness pw;
      for (const auto& t : expr.terms) pw.terms.push_back({named_operator(t.ref, a), t.n, t.m, t.coeff});
      return pw;
    }
  }
  throw InvalidArgument("witness: unknown form");
}

}  // namespace ebench::cli
