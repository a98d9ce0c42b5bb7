#pragma once

#include <algorithm>
#include <cctype>
#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "xdt/errors.hpp"

namespace xdt {

/// A finite ranked alphabet: symbol names with fixed arities.
class RankedAlphabet {
 public:
  void add(const std::string& name, int rank) {
    if (name.empty()) throw TypeError("empty symbol name");
    if (rank < 0) throw TypeError("negative rank for symbol " + name);
    if (is_reserved_name(name))
      throw TypeError("reserved name cannot be an output symbol: " + name);
    auto it = ranks_.find(name);
    if (it != ranks_.end()) {
      if (it->second != rank)
        throw TypeError("symbol " + name + " redeclared with a different rank");
      return;
    }
    ranks_.emplace(name, rank);
  }

  bool contains(const std::string& name) const { return ranks_.count(name) > 0; }

  int rank(const std::string& name) const {
    auto it = ranks_.find(name);
    if (it == ranks_.end()) throw TypeError("unknown symbol: " + name);
    return it->second;
  }

  // Ground terms exist iff some symbol has rank 0.
  bool has_nullary() const {
    for (auto& [n, r] : ranks_)
      if (r == 0) return true;
    return false;
  }

  const std::map<std::string, int>& symbols() const { return ranks_; }
  bool empty() const { return ranks_.empty(); }

  // xN and yN are variable and parameter spellings, "_" is a placeholder.
  static bool is_reserved_name(const std::string& s) {
    if (s == "_") return true;
    if (s.size() >= 2 && (s[0] == 'x' || s[0] == 'y') && s[1] != '0') {
      bool digits = true;
      for (std::size_t i = 1; i < s.size(); ++i)
        if (!std::isdigit(static_cast<unsigned char>(s[i]))) digits = false;
      if (digits) return true;
    }
    return false;
  }

 private:
  std::map<std::string, int> ranks_;
};

/// How variable leaves are spelled in canonical text.
enum class VarStyle { X, Y, Placeholder };

/// A finite tree over a ranked alphabet, possibly with variable leaves.
/// Variables are positional: var index i stands for x_i (or a parameter y_i,
/// or the i-th placeholder, depending on context).
class Term {
 public:
  Term() = default;

  static Term var(int index) {
    if (index <= 0) throw TypeError("variable index must be positive");
    Term t;
    t.var_ = index;
    return t;
  }

  static Term app(std::string symbol, std::vector<Term> children = {}) {
    if (symbol.empty()) throw TypeError("empty symbol");
    Term t;
    t.sym_ = std::move(symbol);
    t.kids_ = std::move(children);
    return t;
  }

  bool is_var() const { return var_ > 0; }
  int var_index() const { return var_; }
  const std::string& symbol() const { return sym_; }
  const std::vector<Term>& children() const { return kids_; }

  bool operator==(const Term& o) const {
    return var_ == o.var_ && sym_ == o.sym_ && kids_ == o.kids_;
  }
  bool operator!=(const Term& o) const { return !(*this == o); }
  bool operator<(const Term& o) const {
    if (var_ != o.var_) return var_ < o.var_;
    if (sym_ != o.sym_) return sym_ < o.sym_;
    return kids_ < o.kids_;
  }

  int size() const {
    int n = 1;
    for (auto& k : kids_) n += k.size();
    return n;
  }

  int max_var() const {
    int m = var_;
    for (auto& k : kids_) m = std::max(m, k.max_var());
    return m;
  }

  bool is_ground() const {
    if (is_var()) return false;
    for (auto& k : kids_)
      if (!k.is_ground()) return false;
    return true;
  }

  // Appends variable indices in left-to-right leaf order.
  void collect_vars(std::vector<int>& out) const {
    if (is_var()) {
      out.push_back(var_);
      return;
    }
    for (auto& k : kids_) k.collect_vars(out);
  }

  bool contains_var(int index) const {
    if (is_var()) return var_ == index;
    for (auto& k : kids_)
      if (k.contains_var(index)) return true;
    return false;
  }

  // Subterm at a path of child indices (0-based); throws when out of range.
  const Term& at(const std::vector<int>& path) const {
    const Term* t = this;
    for (int i : path) {
      if (i < 0 || i >= static_cast<int>(t->kids_.size()))
        throw TypeError("path out of range");
      t = &t->kids_[i];
    }
    return *t;
  }

  std::string render(VarStyle style = VarStyle::X) const {
    std::string out;
    render_to(out, style);
    return out;
  }

 private:
  void render_to(std::string& out, VarStyle style) const {
    if (is_var()) {
      switch (style) {
        case VarStyle::X: out += 'x'; out += std::to_string(var_); break;
        case VarStyle::Y: out += 'y'; out += std::to_string(var_); break;
        case VarStyle::Placeholder: out += '_'; break;
      }
      return;
    }
    out += sym_;
    if (!kids_.empty()) {
      out += '(';
      for (std::size_t i = 0; i < kids_.size(); ++i) {
        if (i) out += ',';
        kids_[i].render_to(out, style);
      }
      out += ')';
    }
  }

  std::string sym_;
  int var_ = 0;
  std::vector<Term> kids_;
};

/// Simultaneous first-order substitution: every x_i in t is replaced by
/// u[i-1]. Requires every variable index in t to be <= u.size().
inline Term substitute(const Term& t, const std::vector<Term>& u) {
  if (t.is_var()) {
    int i = t.var_index();
    if (i > static_cast<int>(u.size()))
      throw TypeError("variable x" + std::to_string(i) +
                      " out of range for substitution of width " +
                      std::to_string(u.size()));
    return u[i - 1];
  }
  std::vector<Term> kids;
  kids.reserve(t.children().size());
  for (auto& k : t.children()) kids.push_back(substitute(k, u));
  return Term::app(t.symbol(), std::move(kids));
}

/// Verdict of the linearity scan over a term with placeholder leaves.
struct LinearCheck {
  bool linear = false;
  int count = 0;
  std::string reason;
};

/// A term is linear when its placeholders occur only at leaves (structural),
/// without repetition, numbered 1..n in left-to-right order.
inline LinearCheck check_linear(const Term& t) {
  std::vector<int> occ;
  t.collect_vars(occ);
  for (std::size_t i = 0; i < occ.size(); ++i) {
    if (occ[i] != static_cast<int>(i) + 1) {
      std::string why = occ[i] <= static_cast<int>(i)
                            ? "placeholder repeated or order violated"
                            : "placeholder order violated";
      return {false, 0, why + " at position " + std::to_string(i + 1)};
    }
  }
  return {true, static_cast<int>(occ.size()), ""};
}

/// A term whose variable leaves are ordered anonymous placeholders.
/// `count` is the number of placeholders (the term's type).
struct LinearTerm {
  Term skeleton;
  int count = 0;

  LinearTerm() = default;
  explicit LinearTerm(Term t) : skeleton(std::move(t)) {
    LinearCheck c = check_linear(skeleton);
    if (!c.linear) throw TypeError("not a linear term: " + c.reason);
    count = c.count;
  }

  static LinearTerm placeholder() { return LinearTerm(Term::var(1)); }

  bool operator==(const LinearTerm& o) const { return skeleton == o.skeleton; }
  bool operator!=(const LinearTerm& o) const { return !(*this == o); }
  bool operator<(const LinearTerm& o) const { return skeleton < o.skeleton; }

  std::string render() const { return skeleton.render(VarStyle::Placeholder); }
};

namespace detail {
inline Term shift_vars(const Term& t, int shift) {
  if (t.is_var()) return Term::var(t.var_index() + shift);
  std::vector<Term> kids;
  kids.reserve(t.children().size());
  for (auto& k : t.children()) kids.push_back(shift_vars(k, shift));
  return Term::app(t.symbol(), std::move(kids));
}

// Splices u[i-1] for placeholder i, shifting spliced placeholders so the
// result is numbered left-to-right. `offsets[i]` = total placeholder count
// of u[0..i-1].
inline Term leaf_splice(const Term& t, const std::vector<LinearTerm>& u,
                        const std::vector<int>& offsets) {
  if (t.is_var()) {
    int i = t.var_index();
    return shift_vars(u[i - 1].skeleton, offsets[i - 1]);
  }
  std::vector<Term> kids;
  kids.reserve(t.children().size());
  for (auto& k : t.children()) kids.push_back(leaf_splice(k, u, offsets));
  return Term::app(t.symbol(), std::move(kids));
}
}  // namespace detail

/// Extends t at its leaves: the i-th placeholder is replaced by u[i-1] and
/// the placeholders of the result are renumbered left-to-right.
inline LinearTerm leaf_substitute(const LinearTerm& t,
                                  const std::vector<LinearTerm>& u) {
  if (static_cast<int>(u.size()) != t.count)
    throw TypeError("leaf substitution arity mismatch: term has " +
                    std::to_string(t.count) + " placeholders, got " +
                    std::to_string(u.size()) + " arguments");
  std::vector<int> offsets(u.size() + 1, 0);
  for (std::size_t i = 0; i < u.size(); ++i)
    offsets[i + 1] = offsets[i] + u[i].count;
  LinearTerm out;
  out.skeleton = detail::leaf_splice(t.skeleton, u, offsets);
  out.count = offsets[u.size()];
  return out;
}

// ---------------------------------------------------------------------------
// Term parsing.  Grammar:  TERM := NAME | NAME '(' TERM {',' TERM} ')'
//                                 | 'xN' | '_'
// Placeholders are numbered by order of appearance; xN and '_' cannot be
// mixed in one term.
// ---------------------------------------------------------------------------

enum class TermSyntax { Vars, Placeholders, Ground };

class TermParser {
 public:
  TermParser(std::string_view text, TermSyntax syntax,
             const RankedAlphabet* alphabet = nullptr)
      : text_(text), syntax_(syntax), alphabet_(alphabet) {}

  Term parse() {
    Term t = parse_term();
    skip_ws();
    if (pos_ != text_.size()) fail("trailing input");
    return t;
  }

  // Parses one term and stops; exposes the cursor for tuple parsing.
  Term parse_term() {
    skip_ws();
    if (pos_ >= text_.size()) fail("expected a term");
    char c = text_[pos_];
    if (c == '_') {
      if (syntax_ != TermSyntax::Placeholders)
        fail("placeholder not allowed here");
      ++pos_;
      return Term::var(++placeholders_);
    }
    std::string name = parse_name();
    if (int v = var_spelling(name)) {
      if (syntax_ != TermSyntax::Vars) fail("variable not allowed here");
      if (placeholders_ > 0) fail("cannot mix placeholders and variables");
      return Term::var(v);
    }
    if (name.size() >= 2 && name[0] == 'y' &&
        std::isdigit(static_cast<unsigned char>(name[1])))
      fail("parameter names are reserved");
    std::vector<Term> kids;
    skip_ws();
    if (pos_ < text_.size() && text_[pos_] == '(') {
      ++pos_;
      while (true) {
        kids.push_back(parse_term());
        skip_ws();
        if (pos_ >= text_.size()) fail("unterminated argument list");
        if (text_[pos_] == ',') {
          ++pos_;
          continue;
        }
        if (text_[pos_] == ')') {
          ++pos_;
          break;
        }
        fail("expected ',' or ')'");
      }
    }
    if (alphabet_) {
      if (!alphabet_->contains(name)) fail("unknown symbol " + name);
      if (alphabet_->rank(name) != static_cast<int>(kids.size()))
        fail("symbol " + name + " has rank " +
             std::to_string(alphabet_->rank(name)) + ", got " +
             std::to_string(kids.size()) + " arguments");
    }
    return Term::app(name, std::move(kids));
  }

  std::size_t pos() const { return pos_; }
  void skip_ws() {
    while (pos_ < text_.size() &&
           std::isspace(static_cast<unsigned char>(text_[pos_])))
      ++pos_;
  }
  bool at_end() {
    skip_ws();
    return pos_ == text_.size();
  }
  bool eat(char c) {
    skip_ws();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }
  [[noreturn]] void fail(const std::string& why) {
    throw ParseError("syntax error at offset " + std::to_string(pos_) + ": " +
                         why,
                     pos_);
  }

 private:
  std::string parse_name() {
    skip_ws();
    std::size_t start = pos_;
    while (pos_ < text_.size()) {
      char c = text_[pos_];
      if (std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '#') {
        if (c == '_' && pos_ == start) break;  // lone '_' handled by caller
        ++pos_;
      } else {
        break;
      }
    }
    if (pos_ == start) fail("expected a symbol or variable");
    return std::string(text_.substr(start, pos_ - start));
  }

  static int var_spelling(const std::string& s) {
    if (s.size() < 2 || s[0] != 'x' || s[1] == '0') return 0;
    for (std::size_t i = 1; i < s.size(); ++i)
      if (!std::isdigit(static_cast<unsigned char>(s[i]))) return 0;
    return std::stoi(s.substr(1));
  }

  std::string_view text_;
  TermSyntax syntax_;
  const RankedAlphabet* alphabet_;
  std::size_t pos_ = 0;
  int placeholders_ = 0;
};

inline Term parse_term(std::string_view text, TermSyntax syntax,
                       const RankedAlphabet* alphabet = nullptr) {
  return TermParser(text, syntax, alphabet).parse();
}

inline LinearTerm parse_linear_term(std::string_view text,
                                    const RankedAlphabet* alphabet = nullptr) {
  return LinearTerm(parse_term(text, TermSyntax::Placeholders, alphabet));
}

}  // namespace xdt
