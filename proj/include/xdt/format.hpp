#pragma once

#include <map>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "xdt/minimize.hpp"
#include "xdt/transducer.hpp"

namespace xdt {

// ---------------------------------------------------------------------------
// Line-oriented transducer files:
//
//   algebra (sequential|leaf-subst|free-term)
//   input { a, b }
//   output { c/2, a/0, d/0 }        # sequential: plain single letters
//   state NAME : NAT [where EQ and EQ ...]
//   init -> NAME [ UPDATE ]
//   NAME -LETTER-> NAME [ UPDATE ]
//   halt NAME [ UPDATE ]
//
// '#' outside quotes and brackets starts a comment. Updates are quoted
// append strings (sequential), tuples of linear terms with '_' placeholders
// (leaf-subst), or tuples of terms over x1..xN (free-term).
// ---------------------------------------------------------------------------

namespace detail {

inline std::string strip_comment(const std::string& line) {
  int depth = 0;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    char c = line[i];
    if (c == '"') quoted = !quoted;
    if (quoted) continue;
    if (c == '{' || c == '[' || c == '(') ++depth;
    if (c == '}' || c == ']' || c == ')') --depth;
    if (c == '#' && depth == 0) return line.substr(0, i);
  }
  return line;
}

inline std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

struct LineCursor {
  std::string text;
  std::size_t pos = 0;
  int line = 0;

  void skip_ws() {
    while (pos < text.size() &&
           std::isspace(static_cast<unsigned char>(text[pos])))
      ++pos;
  }
  bool at_end() {
    skip_ws();
    return pos == text.size();
  }
  [[noreturn]] void fail(const std::string& why) {
    throw ParseError("line " + std::to_string(line) + ": " + why, pos, line);
  }
  void expect(const std::string& lit) {
    skip_ws();
    if (text.compare(pos, lit.size(), lit) != 0)
      fail("expected '" + lit + "'");
    pos += lit.size();
  }
  bool peek(const std::string& lit) {
    skip_ws();
    return text.compare(pos, lit.size(), lit) == 0;
  }
  std::string word() {
    skip_ws();
    std::size_t b = pos;
    while (pos < text.size()) {
      char c = text[pos];
      if (std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '#')
        ++pos;
      else
        break;
    }
    if (pos == b) fail("expected a name");
    return text.substr(b, pos - b);
  }
  // text between the next balanced pair of the given delimiters
  std::string bracketed(char open, char close) {
    skip_ws();
    if (pos >= text.size() || text[pos] != open)
      fail(std::string("expected '") + open + "'");
    int depth = 0;
    bool quoted = false;
    std::size_t b = ++pos;
    for (; pos < text.size(); ++pos) {
      char c = text[pos];
      if (c == '"') quoted = !quoted;
      if (quoted) continue;
      if (c == open) ++depth;
      if (c == close) {
        if (depth == 0) {
          std::string inner = text.substr(b, pos - b);
          ++pos;
          return inner;
        }
        --depth;
      }
    }
    fail(std::string("missing closing '") + close + "'");
  }
};

inline std::vector<std::string> split_top_commas(const std::string& s) {
  std::vector<std::string> out;
  int depth = 0;
  bool quoted = false;
  std::string cur;
  for (char c : s) {
    if (c == '"') quoted = !quoted;
    if (!quoted) {
      if (c == '(' || c == '[' || c == '{') ++depth;
      if (c == ')' || c == ']' || c == '}') --depth;
      if (c == ',' && depth == 0) {
        out.push_back(trim(cur));
        cur.clear();
        continue;
      }
    }
    cur += c;
  }
  std::string last = trim(cur);
  if (!last.empty()) out.push_back(last);
  return out;
}

inline Update parse_update_text(const std::string& text, AlgebraKind kind,
                                int source_type, const RankedAlphabet& output,
                                LineCursor& where) {
  std::string body = trim(text);
  if (kind == AlgebraKind::Sequential) {
    if (body.size() < 2 || body.front() != '"' || body.back() != '"')
      where.fail("sequential update must be a quoted string");
    std::string w = body.substr(1, body.size() - 2);
    for (char c : w)
      if (!output.contains(std::string(1, c)))
        where.fail("unknown output letter '" + std::string(1, c) + "'");
    return Update::append(w);
  }
  if (body.size() < 2 || body.front() != '(' || body.back() != ')')
    where.fail("update must be a parenthesized tuple");
  std::vector<std::string> parts =
      split_top_commas(body.substr(1, body.size() - 2));
  try {
    if (kind == AlgebraKind::LeafSubst) {
      std::vector<LinearTerm> payload;
      for (auto& p : parts) payload.push_back(parse_linear_term(p, &output));
      return Update::leaf(std::move(payload));
    }
    std::vector<Term> payload;
    for (auto& p : parts)
      payload.push_back(parse_term(p, TermSyntax::Vars, &output));
    return Update::free(source_type, std::move(payload));
  } catch (const ParseError& e) {
    where.fail(e.what());
  } catch (const TypeError& e) {
    where.fail(e.what());
  }
}

}  // namespace detail

/// Parses and validates one transducer; all violations surface as errors
/// with the offending line number.
inline Transducer parse_transducer(const std::string& text) {
  Transducer A;
  bool have_algebra = false, have_input = false, have_output = false;
  std::istringstream in(text);
  std::string raw;
  int lineno = 0;
  while (std::getline(in, raw)) {
    ++lineno;
    std::string line = detail::trim(detail::strip_comment(raw));
    if (line.empty()) continue;
    detail::LineCursor cur{line, 0, lineno};

    if (cur.peek("algebra")) {
      cur.expect("algebra");
      std::string k = detail::trim(line.substr(cur.pos));
      if (have_algebra) cur.fail("duplicate algebra line");
      if (k == "sequential") A.kind = AlgebraKind::Sequential;
      else if (k == "leaf-subst") A.kind = AlgebraKind::LeafSubst;
      else if (k == "free-term") A.kind = AlgebraKind::FreeTerm;
      else cur.fail("unknown algebra '" + k + "'");
      have_algebra = true;
      continue;
    }
    if (!have_algebra) cur.fail("the algebra line must come first");

    if (cur.peek("input")) {
      cur.expect("input");
      for (auto& a : detail::split_top_commas(cur.bracketed('{', '}'))) {
        if (a.empty()) cur.fail("empty input letter");
        if (A.has_letter(a)) cur.fail("duplicate input letter " + a);
        A.letters.push_back(a);
      }
      have_input = true;
      continue;
    }
    if (cur.peek("output")) {
      cur.expect("output");
      for (auto& s : detail::split_top_commas(cur.bracketed('{', '}'))) {
        std::string name = s;
        int rank = 0;
        auto slash = s.find('/');
        if (slash != std::string::npos) {
          name = detail::trim(s.substr(0, slash));
          try {
            rank = std::stoi(s.substr(slash + 1));
          } catch (...) {
            cur.fail("bad rank in '" + s + "'");
          }
        } else if (A.kind != AlgebraKind::Sequential) {
          cur.fail("ranked output symbols are written name/rank");
        }
        if (A.kind == AlgebraKind::Sequential &&
            (name.size() != 1 || rank != 0))
          cur.fail("sequential output symbols are single letters");
        try {
          A.output.add(name, rank);
        } catch (const TypeError& e) {
          cur.fail(e.what());
        }
      }
      have_output = true;
      continue;
    }
    if (cur.peek("state")) {
      if (!have_input || !have_output)
        cur.fail("input and output must be declared before states");
      cur.expect("state");
      StateInfo s;
      s.name = cur.word();
      cur.expect(":");
      cur.skip_ws();
      std::size_t b = cur.pos;
      while (cur.pos < line.size() &&
             std::isdigit(static_cast<unsigned char>(line[cur.pos])))
        ++cur.pos;
      if (cur.pos == b) cur.fail("expected a numeric type");
      s.type = std::stoi(line.substr(b, cur.pos - b));
      if (A.state_index(s.name) >= 0) cur.fail("duplicate state " + s.name);
      if (cur.peek("where")) {
        cur.expect("where");
        if (A.kind != AlgebraKind::FreeTerm)
          cur.fail("where clauses require the free-term algebra");
        EquationSystem sys;
        sys.arity = s.type;
        std::string rest = detail::trim(line.substr(cur.pos));
        std::size_t start = 0;
        std::vector<std::string> eqs;
        while (true) {
          std::size_t sep = rest.find(" and ", start);
          if (sep == std::string::npos) {
            eqs.push_back(detail::trim(rest.substr(start)));
            break;
          }
          eqs.push_back(detail::trim(rest.substr(start, sep - start)));
          start = sep + 5;
        }
        for (auto& eq : eqs) {
          auto e = eq.find('=');
          if (e == std::string::npos) cur.fail("expected '=' in equation");
          try {
            Term lhs = parse_term(detail::trim(eq.substr(0, e)),
                                  TermSyntax::Vars, &A.output);
            Term rhs = parse_term(detail::trim(eq.substr(e + 1)),
                                  TermSyntax::Vars, &A.output);
            if (lhs.max_var() > s.type || rhs.max_var() > s.type)
              cur.fail("equation variable exceeds the state type");
            sys.equations.emplace_back(std::move(lhs), std::move(rhs));
          } catch (const ParseError& pe) {
            cur.fail(pe.what());
          }
        }
        s.domain = ConstrainedDomain::of_system(std::move(sys), A.output);
      } else if (!cur.at_end()) {
        cur.fail("trailing input after state declaration");
      }
      A.states.push_back(std::move(s));
      continue;
    }
    if (cur.peek("init")) {
      cur.expect("init");
      cur.expect("->");
      std::string target = cur.word();
      int q = A.state_index(target);
      if (q < 0) cur.fail("unknown state " + target);
      if (A.init) cur.fail("duplicate init line");
      std::string upd = cur.bracketed('[', ']');
      A.init = {q, detail::parse_update_text(upd, A.kind,
                                             initial_type(A.kind), A.output,
                                             cur)};
      if (!cur.at_end()) cur.fail("trailing input");
      continue;
    }
    if (cur.peek("halt")) {
      cur.expect("halt");
      std::string name = cur.word();
      int q = A.state_index(name);
      if (q < 0) cur.fail("unknown state " + name);
      if (A.halts.count(q)) cur.fail("duplicate halt for state " + name);
      std::string upd = cur.bracketed('[', ']');
      A.halts.emplace(q, detail::parse_update_text(upd, A.kind,
                                                   A.states[q].type, A.output,
                                                   cur));
      if (!cur.at_end()) cur.fail("trailing input");
      continue;
    }

    // transition: NAME -LETTER-> NAME [ UPDATE ]
    {
      std::string src = cur.word();
      int q = A.state_index(src);
      if (q < 0) cur.fail("unknown state or directive '" + src + "'");
      cur.expect("-");
      std::size_t arrow = line.find("->", cur.pos);
      if (arrow == std::string::npos) cur.fail("expected '-LETTER->'");
      std::string letter = detail::trim(line.substr(cur.pos, arrow - cur.pos));
      if (letter.empty()) cur.fail("empty letter");
      cur.pos = arrow + 2;
      if (!A.has_letter(letter)) cur.fail("undeclared letter " + letter);
      std::string dst = cur.word();
      int r = A.state_index(dst);
      if (r < 0) cur.fail("unknown state " + dst);
      if (A.transitions.count({q, letter}))
        cur.fail("duplicate transition " + src + " -" + letter + "->");
      std::string upd = cur.bracketed('[', ']');
      A.transitions[{q, letter}] = {
          r, detail::parse_update_text(upd, A.kind, A.states[q].type, A.output,
                                       cur)};
      if (!cur.at_end()) cur.fail("trailing input");
      continue;
    }
  }
  if (!have_algebra) throw ParseError("missing algebra line", 0, 1);
  ValidationReport rep = validate(A);
  if (!rep.ok()) throw TypeError("invalid transducer: " + rep.issues.front());
  return A;
}

namespace detail {

// Equational presentation of a solved form: one equation per non-anchor
// component, parameters replaced by the variable of their first bare
// occurrence.
inline std::vector<std::pair<Term, Term>> solved_to_equations(
    const SolvedForm& s) {
  std::vector<std::pair<Term, Term>> out;
  if (s.status == SolveStatus::Unsat)
    throw InternalError("rendering an unsatisfiable domain");
  std::vector<int> anchor(s.param_count + 1, -1);
  for (std::size_t k = 0; k < s.unifier.size(); ++k)
    if (s.unifier[k].is_var() && anchor[s.unifier[k].var_index()] < 0)
      anchor[s.unifier[k].var_index()] = static_cast<int>(k);
  std::vector<Term> anchor_vars;
  for (int j = 1; j <= s.param_count; ++j) {
    if (anchor[j] < 0)
      throw InternalError("solved form has a parameter without bare occurrence");
    anchor_vars.push_back(Term::var(anchor[j] + 1));
  }
  for (std::size_t k = 0; k < s.unifier.size(); ++k) {
    const Term& u = s.unifier[k];
    if (u.is_var() && anchor[u.var_index()] == static_cast<int>(k)) continue;
    Term rhs = substitute(u, anchor_vars);
    Term lhs = Term::var(static_cast<int>(k) + 1);
    if (rhs.is_var() && rhs.var_index() < lhs.var_index()) std::swap(lhs, rhs);
    out.emplace_back(std::move(lhs), std::move(rhs));
  }
  return out;
}

}  // namespace detail

/// Canonical text: states in breadth-first-then-name order, transitions
/// sorted by state and letter, domains emitted as where clauses over the
/// solved form.
inline std::string render_transducer(const Transducer& A) {
  std::vector<int> order = canonical_state_order(A);
  std::vector<int> pos(A.states.size());
  for (std::size_t i = 0; i < order.size(); ++i) pos[order[i]] = static_cast<int>(i);

  std::ostringstream out;
  out << "algebra " << kind_name(A.kind) << "\n";
  std::vector<std::string> letters = A.letters;
  std::sort(letters.begin(), letters.end());
  out << "input {";
  for (std::size_t i = 0; i < letters.size(); ++i)
    out << (i ? ", " : " ") << letters[i];
  out << " }\n";
  out << "output {";
  std::size_t i = 0;
  for (auto& [name, rank] : A.output.symbols()) {
    out << (i++ ? ", " : " ") << name;
    if (A.kind != AlgebraKind::Sequential) out << "/" << rank;
  }
  out << " }\n";
  for (int q : order) {
    out << "state " << A.states[q].name << " : " << A.states[q].type;
    if (A.states[q].domain && !A.states[q].domain->is_full()) {
      auto eqs = detail::solved_to_equations(A.states[q].domain->solved());
      if (!eqs.empty()) {
        out << " where ";
        for (std::size_t e = 0; e < eqs.size(); ++e) {
          if (e) out << " and ";
          out << eqs[e].first.render(VarStyle::X) << " = "
              << eqs[e].second.render(VarStyle::X);
        }
      }
    }
    out << "\n";
  }
  if (A.init)
    out << "init -> " << A.states[A.init->first].name << " [ "
        << A.init->second.render() << " ]\n";
  std::vector<std::pair<std::pair<int, std::string>, std::pair<int, Update>>>
      trans(A.transitions.begin(), A.transitions.end());
  std::sort(trans.begin(), trans.end(), [&](auto& a, auto& b) {
    if (pos[a.first.first] != pos[b.first.first])
      return pos[a.first.first] < pos[b.first.first];
    return a.first.second < b.first.second;
  });
  for (auto& [key, val] : trans)
    out << A.states[key.first].name << " -" << key.second << "-> "
        << A.states[val.first].name << " [ " << val.second.render() << " ]\n";
  std::vector<int> hs;
  for (auto& [q, u] : A.halts) hs.push_back(q);
  std::sort(hs.begin(), hs.end(), [&](int a, int b) { return pos[a] < pos[b]; });
  for (int q : hs)
    out << "halt " << A.states[q].name << " [ " << A.halts.at(q).render()
        << " ]\n";
  return out.str();
}

// ---------------------------------------------------------------------------
// Equation system files (for the mgu command):
//
//   alphabet { a/3, b/1, c/1 }
//   vars 3
//   a(b(x1),x2,x3) = a(x2,b(x1),x3)
// ---------------------------------------------------------------------------

struct EquationFile {
  RankedAlphabet alphabet;
  EquationSystem system;
};

inline EquationFile parse_equation_file(const std::string& text) {
  EquationFile out;
  bool have_vars = false;
  std::istringstream in(text);
  std::string raw;
  int lineno = 0;
  while (std::getline(in, raw)) {
    ++lineno;
    std::string line = detail::trim(detail::strip_comment(raw));
    if (line.empty()) continue;
    detail::LineCursor cur{line, 0, lineno};
    if (cur.peek("alphabet")) {
      cur.expect("alphabet");
      for (auto& s : detail::split_top_commas(cur.bracketed('{', '}'))) {
        auto slash = s.find('/');
        if (slash == std::string::npos)
          cur.fail("alphabet symbols are written name/rank");
        try {
          out.alphabet.add(detail::trim(s.substr(0, slash)),
                           std::stoi(s.substr(slash + 1)));
        } catch (const TypeError& e) {
          cur.fail(e.what());
        } catch (...) {
          cur.fail("bad rank in '" + s + "'");
        }
      }
      continue;
    }
    if (cur.peek("vars")) {
      cur.expect("vars");
      try {
        out.system.arity = std::stoi(detail::trim(line.substr(cur.pos)));
      } catch (...) {
        cur.fail("expected a variable count");
      }
      have_vars = true;
      continue;
    }
    auto e = line.find('=');
    if (e == std::string::npos) cur.fail("expected an equation");
    try {
      Term lhs = parse_term(detail::trim(line.substr(0, e)), TermSyntax::Vars,
                            &out.alphabet);
      Term rhs = parse_term(detail::trim(line.substr(e + 1)), TermSyntax::Vars,
                            &out.alphabet);
      if (lhs.max_var() > out.system.arity ||
          rhs.max_var() > out.system.arity)
        cur.fail("equation variable exceeds the declared count");
      out.system.equations.emplace_back(std::move(lhs), std::move(rhs));
    } catch (const ParseError& pe) {
      cur.fail(pe.what());
    }
  }
  if (!have_vars) throw ParseError("missing vars line", 0, 1);
  return out;
}

}  // namespace xdt
