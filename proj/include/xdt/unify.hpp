#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "xdt/update.hpp"

namespace xdt {

/// A finite system of term equations over x1..x_arity. Terms inside
/// equations are unrestricted: variables may repeat or be absent.
struct EquationSystem {
  int arity = 0;
  std::vector<std::pair<Term, Term>> equations;
};

enum class SolveStatus { Solved, Unsat };

/// Solved parametric form of an equation system: when Solved, the solution
/// set is { unifier[y <- w] : w ground }, with parameters numbered by first
/// occurrence across the tuple.
struct SolvedForm {
  SolveStatus status = SolveStatus::Solved;
  std::vector<Term> unifier;  // over parameters, rendered y1,y2,...
  int param_count = 0;

  bool operator==(const SolvedForm& o) const {
    return status == o.status && unifier == o.unifier &&
           param_count == o.param_count;
  }

  std::string render() const {
    if (status == SolveStatus::Unsat) return "UNSAT";
    std::string s = "(";
    for (std::size_t i = 0; i < unifier.size(); ++i) {
      if (i) s += ",";
      s += unifier[i].render(VarStyle::Y);
    }
    return s + ")";
  }
};

namespace detail {

// Triangular substitution: bindings[i] is the term bound to x_{i+1}, if any.
struct Bindings {
  std::vector<std::optional<Term>> slot;

  explicit Bindings(int arity) : slot(arity) {}

  const Term* walk(const Term& t) const {
    const Term* cur = &t;
    while (cur->is_var() && slot[cur->var_index() - 1])
      cur = &*slot[cur->var_index() - 1];
    return cur;
  }

  bool occurs(int var, const Term& t) const {
    const Term* r = walk(t);
    if (r->is_var()) return r->var_index() == var;
    for (auto& k : r->children())
      if (occurs(var, k)) return true;
    return false;
  }

  bool unify(const Term& a, const Term& b) {
    const Term* ra = walk(a);
    const Term* rb = walk(b);
    if (ra->is_var() && rb->is_var() && ra->var_index() == rb->var_index())
      return true;
    if (ra->is_var()) {
      if (occurs(ra->var_index(), *rb)) return false;
      slot[ra->var_index() - 1] = *rb;
      return true;
    }
    if (rb->is_var()) {
      if (occurs(rb->var_index(), *ra)) return false;
      slot[rb->var_index() - 1] = *ra;
      return true;
    }
    if (ra->symbol() != rb->symbol() ||
        ra->children().size() != rb->children().size())
      return false;
    // copies: child unification may rebind variables inside ra/rb
    std::vector<Term> ka = ra->children(), kb = rb->children();
    for (std::size_t i = 0; i < ka.size(); ++i)
      if (!unify(ka[i], kb[i])) return false;
    return true;
  }

  Term resolve(const Term& t) const {
    const Term* r = walk(t);
    if (r->is_var()) return *r;
    std::vector<Term> kids;
    kids.reserve(r->children().size());
    for (auto& k : r->children()) kids.push_back(resolve(k));
    return Term::app(r->symbol(), std::move(kids));
  }
};

inline Term renumber_params(const Term& t, std::map<int, int>& names,
                            int& next) {
  if (t.is_var()) {
    auto it = names.find(t.var_index());
    if (it == names.end()) it = names.emplace(t.var_index(), ++next).first;
    return Term::var(it->second);
  }
  std::vector<Term> kids;
  kids.reserve(t.children().size());
  for (auto& k : t.children()) kids.push_back(renumber_params(k, names, next));
  return Term::app(t.symbol(), std::move(kids));
}

}  // namespace detail

/// Most general unifier of E, canonicalized by first-occurrence parameter
/// numbering. Reports Unsat when no ground solution exists; in particular,
/// a solved form with parameters is Unsat over an alphabet without rank-0
/// symbols, since no ground instantiation of the parameters exists.
inline SolvedForm mgu(const EquationSystem& E, const RankedAlphabet& alphabet) {
  detail::Bindings env(E.arity);
  for (auto& [lhs, rhs] : E.equations) {
    if (lhs.max_var() > E.arity || rhs.max_var() > E.arity)
      throw TypeError("equation uses a variable beyond the system arity");
    if (!env.unify(lhs, rhs)) return {SolveStatus::Unsat, {}, 0};
  }
  SolvedForm out;
  std::map<int, int> names;
  int next = 0;
  for (int i = 1; i <= E.arity; ++i) {
    Term r = env.resolve(Term::var(i));
    out.unifier.push_back(detail::renumber_params(r, names, next));
  }
  out.param_count = next;
  if (next > 0 && !alphabet.has_nullary()) return {SolveStatus::Unsat, {}, 0};
  return out;
}

/// Substitutes the solved form into both sides of a tuple equation and
/// compares syntactically; an Unsat system entails everything.
inline bool entails(const SolvedForm& solved,
                    const std::vector<Term>& lhs,
                    const std::vector<Term>& rhs) {
  if (solved.status == SolveStatus::Unsat) return true;
  if (lhs.size() != rhs.size()) throw TypeError("entailment arity mismatch");
  for (std::size_t i = 0; i < lhs.size(); ++i)
    if (substitute(lhs[i], solved.unifier) !=
        substitute(rhs[i], solved.unifier))
      return false;
  return true;
}

inline bool entails(const EquationSystem& E, const std::pair<Term, Term>& eq,
                    const RankedAlphabet& alphabet) {
  return entails(mgu(E, alphabet), {eq.first}, {eq.second});
}

/// A tuple domain carved out by a finite equation system, cached in solved
/// form. Unsat means the empty domain.
class ConstrainedDomain {
 public:
  ConstrainedDomain() = default;

  static ConstrainedDomain of_system(EquationSystem system,
                                     const RankedAlphabet& alphabet) {
    ConstrainedDomain d;
    d.arity_ = system.arity;
    d.solved_ = mgu(system, alphabet);
    d.system_ = std::move(system);
    return d;
  }

  static ConstrainedDomain full(int arity) {
    ConstrainedDomain d;
    d.arity_ = arity;
    for (int i = 1; i <= arity; ++i) d.solved_.unifier.push_back(Term::var(i));
    d.solved_.param_count = arity;
    return d;
  }

  static ConstrainedDomain empty(int arity) {
    ConstrainedDomain d;
    d.arity_ = arity;
    d.solved_.status = SolveStatus::Unsat;
    return d;
  }

  int arity() const { return arity_; }
  bool unsat() const { return solved_.status == SolveStatus::Unsat; }
  bool is_full() const {
    if (unsat()) return false;
    for (int i = 0; i < arity_; ++i) {
      const Term& t = solved_.unifier[i];
      if (!t.is_var() || t.var_index() != i + 1) return false;
    }
    return true;
  }
  const EquationSystem& system() const { return system_; }
  const SolvedForm& solved() const { return solved_; }

  bool entails_eq(const Term& lhs, const Term& rhs) const {
    return entails(solved_, {lhs}, {rhs});
  }
  bool entails_eq(const std::vector<Term>& lhs,
                  const std::vector<Term>& rhs) const {
    return entails(solved_, lhs, rhs);
  }

  /// Solution-set equality, decided by mutual entailment of the systems.
  bool same_solutions(const ConstrainedDomain& o) const {
    if (arity_ != o.arity_) return false;
    if (unsat() || o.unsat()) return unsat() == o.unsat();
    for (auto& [l, r] : o.system_.equations)
      if (!entails_eq(l, r)) return false;
    for (auto& [l, r] : system_.equations)
      if (!o.entails_eq(l, r)) return false;
    return true;
  }

 private:
  int arity_ = 0;
  EquationSystem system_;
  SolvedForm solved_;
};

/// Pulls an equation system over f's output type back along a free-term
/// update f: solutions of the result are exactly the data whose image under
/// f solves E. Realized by substituting f's payload into each equation.
inline EquationSystem inverse_constraint(const Update& f,
                                         const EquationSystem& E) {
  if (f.kind() != AlgebraKind::FreeTerm)
    throw TypeError("inverse_constraint expects a free-term update");
  if (E.arity != f.out_type())
    throw TypeError("inverse_constraint arity mismatch");
  EquationSystem out;
  out.arity = f.in_type();
  for (auto& [l, r] : E.equations)
    out.equations.emplace_back(substitute(l, f.free_payload()),
                               substitute(r, f.free_payload()));
  return out;
}

inline ConstrainedDomain intersect(const ConstrainedDomain& a,
                                   const ConstrainedDomain& b,
                                   const RankedAlphabet& alphabet) {
  if (a.arity() != b.arity()) throw TypeError("intersection arity mismatch");
  if (a.unsat() || b.unsat()) return ConstrainedDomain::empty(a.arity());
  EquationSystem sys;
  sys.arity = a.arity();
  sys.equations = a.system().equations;
  sys.equations.insert(sys.equations.end(), b.system().equations.begin(),
                       b.system().equations.end());
  return ConstrainedDomain::of_system(std::move(sys), alphabet);
}

namespace detail {

// All terms a over x1..|v| with a[x <- v] == s ("carvings" of s): either a
// variable x_i with v_i == s, or a symbol application carved child-wise.
inline void carvings(const Term& s, const std::vector<Term>& v,
                     std::vector<Term>& out) {
  for (std::size_t i = 0; i < v.size(); ++i)
    if (v[i] == s) out.push_back(Term::var(static_cast<int>(i) + 1));
  if (s.is_var()) return;  // a bare parameter has no symbol decomposition
  std::vector<std::vector<Term>> kid_choices;
  for (auto& k : s.children()) {
    std::vector<Term> c;
    carvings(k, v, c);
    if (c.empty()) return;  // some child cannot be expressed
    kid_choices.push_back(std::move(c));
  }
  std::vector<Term> pick(kid_choices.size(), Term());
  std::size_t total = 1;
  for (auto& c : kid_choices) total *= c.size();
  for (std::size_t n = 0; n < total; ++n) {
    std::size_t rest = n;
    for (std::size_t j = 0; j < kid_choices.size(); ++j) {
      pick[j] = kid_choices[j][rest % kid_choices[j].size()];
      rest /= kid_choices[j].size();
    }
    out.push_back(Term::app(s.symbol(), pick));
  }
}

// The strongest equation system over x1..|v| valid on every instance of the
// parametric tuple v. It is enough to list equations with a variable on one
// side: every valid equation decomposes, at the mismatch positions of its
// two sides, into such pairs.
inline EquationSystem closure_system_of_parametric(
    const std::vector<Term>& v,
    const std::optional<std::vector<Term>>& also_unified_by = std::nullopt) {
  EquationSystem out;
  out.arity = static_cast<int>(v.size());
  std::set<std::pair<Term, Term>> seen;
  for (std::size_t k = 0; k < v.size(); ++k) {
    std::vector<Term> cands;
    carvings(v[k], v, cands);
    Term xk = Term::var(static_cast<int>(k) + 1);
    for (auto& a : cands) {
      if (a == xk) continue;
      if (also_unified_by &&
          substitute(a, *also_unified_by) != (*also_unified_by)[k])
        continue;
      auto key = a < xk ? std::make_pair(a, xk) : std::make_pair(xk, a);
      if (seen.insert(key).second) out.equations.push_back(key);
    }
  }
  return out;
}

}  // namespace detail

/// Smallest constrained domain containing the union of two constrained
/// domains: its system collects the equations valid on both, enumerated
/// over one-variable-sided candidate pairs drawn from the two solved forms.
/// An unsat input passes the other argument through.
inline ConstrainedDomain closure_union(const ConstrainedDomain& a,
                                       const ConstrainedDomain& b,
                                       const RankedAlphabet& alphabet) {
  if (a.arity() != b.arity()) throw TypeError("closure_union arity mismatch");
  if (a.unsat()) return b;
  if (b.unsat()) return a;
  EquationSystem sys = detail::closure_system_of_parametric(
      a.solved().unifier, b.solved().unifier);
  return ConstrainedDomain::of_system(std::move(sys), alphabet);
}

/// Smallest constrained domain containing the image of D under a free-term
/// update f. The image itself has the parametric form payload[x <- mgu(D)];
/// the result collects all equations valid on that form.
inline ConstrainedDomain closure_image(const Update& f,
                                       const ConstrainedDomain& D,
                                       const RankedAlphabet& alphabet) {
  if (f.kind() != AlgebraKind::FreeTerm)
    throw TypeError("closure_image expects a free-term update");
  if (f.in_type() != D.arity()) throw TypeError("closure_image type mismatch");
  if (D.unsat()) return ConstrainedDomain::empty(f.out_type());
  std::vector<Term> image;
  image.reserve(f.free_payload().size());
  for (auto& c : f.free_payload())
    image.push_back(substitute(c, D.solved().unifier));
  EquationSystem sys = detail::closure_system_of_parametric(image);
  return ConstrainedDomain::of_system(std::move(sys), alphabet);
}

}  // namespace xdt
