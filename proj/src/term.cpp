#include "pdediscover/term.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <optional>

namespace pdediscover {

namespace {

constexpr int kMaxSpaceOrder = 4;

std::string factor_base(const Factor& f) {
  switch (f.wrapper) {
    case Wrapper::modulus:
      return "|" + f.field + "|";
    case Wrapper::sin:
      return "sin(" + f.field + ")";
    case Wrapper::cos:
      return "cos(" + f.field + ")";
    case Wrapper::none:
      break;
  }
  if (f.derivative == 0) return f.field;
  return f.field + "_" + std::string(static_cast<std::size_t>(f.derivative), 'x');
}

class Parser {
public:
  Parser(std::string_view text, const std::vector<std::string>& known)
      : text_(text), known_(known) {}

  CandidateTerm term() {
    std::vector<Factor> factors;
    while (true) {
      if (auto f = factor()) factors.push_back(*f);
      skip_ws();
      if (at_end()) break;
      if (peek() != '*') fail("expected '*' or end of expression");
      ++pos_;
    }
    return CandidateTerm(std::move(factors));
  }

  OutputTerm output() {
    skip_ws();
    const std::size_t start = pos_;
    std::string name = ident();
    check_known(name, start);
    if (at_end() || peek() != '_') fail("output must be a time derivative such as u_t");
    ++pos_;
    const std::size_t suffix_start = pos_;
    std::string suffix = letters();
    OutputTerm out{name, 0};
    if (suffix == "t") {
      out.time_order = 1;
    } else if (suffix == "tt") {
      out.time_order = 2;
    } else {
      pos_ = suffix_start;
      fail("output must be _t or _tt");
    }
    skip_ws();
    if (!at_end()) fail("unexpected trailing input after output term");
    return out;
  }

private:
  // nullopt for the factor "1"
  std::optional<Factor> factor() {
    skip_ws();
    if (at_end()) fail("expected a factor");
    std::optional<Factor> base;
    const char c = peek();
    if (c == '1') {
      ++pos_;
      if (!at_end() && std::isdigit(static_cast<unsigned char>(peek()))) {
        fail("numeric literals other than 1 are not terms");
      }
    } else if (c == '|') {
      ++pos_;
      skip_ws();
      const std::size_t start = pos_;
      std::string name = ident();
      check_known(name, start);
      skip_ws();
      expect('|');
      base = Factor{name, Wrapper::modulus, 0, 1};
    } else if (std::isalpha(static_cast<unsigned char>(c))) {
      const std::size_t start = pos_;
      std::string name = ident();
      const std::size_t after_ident = pos_;
      skip_ws();
      if ((name == "sin" || name == "cos") && !at_end() && peek() == '(') {
        ++pos_;
        skip_ws();
        const std::size_t arg_start = pos_;
        std::string arg = ident();
        check_known(arg, arg_start);
        skip_ws();
        expect(')');
        base = Factor{arg, name == "sin" ? Wrapper::sin : Wrapper::cos, 0, 1};
      } else {
        pos_ = after_ident;
        check_known(name, start);
        int order = 0;
        if (!at_end() && peek() == '_') {
          ++pos_;
          const std::size_t suffix_start = pos_;
          std::string suffix = letters();
          if (suffix.empty()) fail("expected derivative suffix after '_'");
          if (suffix == "t" || suffix == "tt") {
            pos_ = suffix_start;
            fail("time derivatives are only allowed as the output term");
          }
          if (suffix.find_first_not_of('x') != std::string::npos) {
            pos_ = suffix_start;
            fail("derivative suffix must be x, xx, xxx or xxxx");
          }
          order = static_cast<int>(suffix.size());
          if (order > kMaxSpaceOrder) {
            pos_ = suffix_start;
            fail("derivative order " + std::to_string(order) + " exceeds 4");
          }
        }
        base = Factor{name, Wrapper::none, order, 1};
      }
    } else {
      fail(std::string("unexpected character '") + c + "'");
    }

    skip_ws();
    if (!at_end() && peek() == '^') {
      ++pos_;
      skip_ws();
      const int e = integer();
      if (base) base->exponent = e;
    }
    return base;
  }

  int integer() {
    const std::size_t start = pos_;
    while (!at_end() && std::isdigit(static_cast<unsigned char>(peek()))) ++pos_;
    if (start == pos_) fail("expected an integer exponent");
    if (pos_ - start > 3) fail("exponent too large");
    const int value = std::stoi(std::string(text_.substr(start, pos_ - start)));
    if (value < 1) {
      pos_ = start;
      fail("exponent must be at least 1");
    }
    return value;
  }

  std::string ident() {
    if (at_end() || !std::isalpha(static_cast<unsigned char>(peek()))) fail("expected an identifier");
    const std::size_t start = pos_;
    while (!at_end() && std::isalnum(static_cast<unsigned char>(peek()))) ++pos_;
    return std::string(text_.substr(start, pos_ - start));
  }

  std::string letters() {
    const std::size_t start = pos_;
    while (!at_end() && std::isalpha(static_cast<unsigned char>(peek()))) ++pos_;
    return std::string(text_.substr(start, pos_ - start));
  }

  void check_known(const std::string& name, std::size_t at) {
    if (known_.empty()) return;
    if (std::find(known_.begin(), known_.end(), name) == known_.end()) {
      pos_ = at;
      fail("unknown field name '" + name + "'");
    }
  }

  void expect(char c) {
    if (at_end() || peek() != c) fail(std::string("expected '") + c + "'");
    ++pos_;
  }

  void skip_ws() {
    while (!at_end() && std::isspace(static_cast<unsigned char>(peek()))) ++pos_;
  }
  bool at_end() const { return pos_ >= text_.size(); }
  char peek() const { return text_[pos_]; }
  [[noreturn]] void fail(const std::string& message) const { throw ParseError(message, pos_); }

  std::string_view text_;
  const std::vector<std::string>& known_;
  std::size_t pos_ = 0;
};

template <typename Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, 1> evaluate_impl(const CandidateTerm& term, Eigen::Index rows,
                                                       const FactorLookup<Scalar>& lookup) {
  using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  Vec out = Vec::Ones(rows);
  for (const auto& f : term.factors()) {
    const Vec& v = lookup(f.field, f.derivative);
    Vec base(rows);
    switch (f.wrapper) {
      case Wrapper::none:
        base = v;
        break;
      case Wrapper::modulus:
        base = v.unaryExpr([](Scalar z) { return Scalar(std::abs(z)); });
        break;
      case Wrapper::sin:
        base = v.unaryExpr([](Scalar z) { return Scalar(std::sin(z)); });
        break;
      case Wrapper::cos:
        base = v.unaryExpr([](Scalar z) { return Scalar(std::cos(z)); });
        break;
    }
    for (int e = 0; e < f.exponent; ++e) out.array() *= base.array();
  }
  return out;
}

}  // namespace

CandidateTerm::CandidateTerm(std::vector<Factor> factors) {
  for (auto& f : factors) {
    if (f.wrapper != Wrapper::none) f.derivative = 0;
  }
  std::stable_sort(factors.begin(), factors.end(),
                   [](const Factor& a, const Factor& b) { return a.key() < b.key(); });
  for (auto& f : factors) {
    if (!factors_.empty() && factors_.back().key() == f.key()) {
      factors_.back().exponent += f.exponent;
    } else {
      factors_.push_back(std::move(f));
    }
  }
}

std::string CandidateTerm::name() const {
  if (factors_.empty()) return "1";
  std::string out;
  for (const auto& f : factors_) {
    if (!out.empty()) out += '*';
    out += factor_base(f);
    if (f.exponent >= 2) out += "^" + std::to_string(f.exponent);
  }
  return out;
}

int CandidateTerm::max_derivative() const {
  int d = 0;
  for (const auto& f : factors_) d = std::max(d, f.derivative);
  return d;
}

CandidateTerm parse_term(std::string_view expr, const std::vector<std::string>& known_fields) {
  return Parser(expr, known_fields).term();
}

OutputTerm parse_output(std::string_view expr, const std::vector<std::string>& known_fields) {
  return Parser(expr, known_fields).output();
}

Eigen::VectorXd evaluate_term(const CandidateTerm& term, Eigen::Index rows,
                              const FactorLookup<double>& lookup) {
  return evaluate_impl<double>(term, rows, lookup);
}

Eigen::VectorXcd evaluate_term(const CandidateTerm& term, Eigen::Index rows,
                               const FactorLookup<std::complex<double>>& lookup) {
  return evaluate_impl<std::complex<double>>(term, rows, lookup);
}

}  // namespace pdediscover
