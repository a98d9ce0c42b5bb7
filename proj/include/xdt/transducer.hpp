#pragma once

#include <algorithm>
#include <map>
#include <mutex>
#include <optional>
#include <queue>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "xdt/gcd.hpp"
#include "xdt/unify.hpp"
#include "xdt/update.hpp"

namespace xdt {

struct StateInfo {
  std::string name;
  int type = 1;
  std::optional<ConstrainedDomain> domain;  // absent = full
};

/// A deterministic streaming transducer: typed control states, one optional
/// initial step, one internal step per letter, and a final step. Every step
/// is a partial map on states paired with a typed update.
struct Transducer {
  AlgebraKind kind = AlgebraKind::Sequential;
  std::vector<std::string> letters;
  RankedAlphabet output;
  std::vector<StateInfo> states;
  std::optional<std::pair<int, Update>> init;
  std::map<std::pair<int, std::string>, std::pair<int, Update>> transitions;
  std::map<int, Update> halts;

  int state_index(const std::string& name) const {
    for (std::size_t i = 0; i < states.size(); ++i)
      if (states[i].name == name) return static_cast<int>(i);
    return -1;
  }

  bool has_letter(const std::string& a) const {
    return std::find(letters.begin(), letters.end(), a) != letters.end();
  }

  const std::pair<int, Update>* transition(int q, const std::string& a) const {
    auto it = transitions.find({q, a});
    return it == transitions.end() ? nullptr : &it->second;
  }

  const Update* halt(int q) const {
    auto it = halts.find(q);
    return it == halts.end() ? nullptr : &it->second;
  }
};

struct ValidationReport {
  std::vector<std::string> issues;
  bool ok() const { return issues.empty(); }
};

namespace detail {

inline bool symbols_well_ranked(const Term& t, const RankedAlphabet& alpha,
                                std::string& why) {
  if (t.is_var()) return true;
  if (!alpha.contains(t.symbol())) {
    why = "unknown output symbol " + t.symbol();
    return false;
  }
  if (alpha.rank(t.symbol()) != static_cast<int>(t.children().size())) {
    why = "symbol " + t.symbol() + " has rank " +
          std::to_string(alpha.rank(t.symbol())) + ", used with " +
          std::to_string(t.children().size()) + " children";
    return false;
  }
  for (auto& k : t.children())
    if (!symbols_well_ranked(k, alpha, why)) return false;
  return true;
}

inline void check_update(const Transducer& A, const Update& u, int in_type,
                         int out_type, const std::string& where,
                         ValidationReport& rep) {
  if (u.kind() != A.kind) {
    rep.issues.push_back(where + ": update kind mismatch");
    return;
  }
  if (u.in_type() != in_type)
    rep.issues.push_back(where + ": update input type " +
                         std::to_string(u.in_type()) + ", expected " +
                         std::to_string(in_type));
  if (u.out_type() != out_type)
    rep.issues.push_back(where + ": update output type " +
                         std::to_string(u.out_type()) + ", expected " +
                         std::to_string(out_type));
  std::string why;
  switch (A.kind) {
    case AlgebraKind::Sequential:
      for (char c : u.seq_payload())
        if (!A.output.contains(std::string(1, c)))
          rep.issues.push_back(where + ": unknown output letter '" +
                               std::string(1, c) + "'");
      break;
    case AlgebraKind::LeafSubst:
      for (auto& t : u.leaf_payload())
        if (!symbols_well_ranked(t.skeleton, A.output, why))
          rep.issues.push_back(where + ": " + why);
      break;
    case AlgebraKind::FreeTerm: {
      for (auto& t : u.free_payload())
        if (!symbols_well_ranked(t, A.output, why))
          rep.issues.push_back(where + ": " + why);
      UpdateClass c = classify(u);
      if (!c.copyless)
        rep.issues.push_back(where + ": copyful update " + u.render());
      else if (!c.non_erasing)
        rep.issues.push_back(where + ": erasing update " + u.render());
      break;
    }
  }
}

}  // namespace detail

/// Checks the typing discipline, the per-kind payload restrictions, and a
/// one-step invariance of declared state domains.
inline ValidationReport validate(const Transducer& A) {
  ValidationReport rep;
  std::set<std::string> seen;
  for (auto& s : A.states) {
    if (!seen.insert(s.name).second)
      rep.issues.push_back("duplicate state " + s.name);
    if (s.type < 0) rep.issues.push_back("state " + s.name + ": negative type");
    if (A.kind == AlgebraKind::Sequential && s.type != 1)
      rep.issues.push_back("state " + s.name + ": sequential states have type 1");
    if (s.domain) {
      if (A.kind != AlgebraKind::FreeTerm)
        rep.issues.push_back("state " + s.name +
                             ": constrained domains require the free-term algebra");
      else if (s.domain->arity() != s.type)
        rep.issues.push_back("state " + s.name + ": domain arity " +
                             std::to_string(s.domain->arity()) +
                             " differs from type " + std::to_string(s.type));
    }
  }
  std::set<std::string> ls(A.letters.begin(), A.letters.end());
  if (ls.size() != A.letters.size())
    rep.issues.push_back("duplicate input letter");
  for (auto& a : A.letters)
    if (a.empty()) rep.issues.push_back("empty input letter");
  if (A.kind == AlgebraKind::Sequential)
    for (auto& [n, r] : A.output.symbols())
      if (n.size() != 1 || r != 0)
        rep.issues.push_back("sequential output symbols are single letters: " + n);
  if (A.kind != AlgebraKind::Sequential && !A.output.has_nullary() &&
      !A.states.empty())
    rep.issues.push_back("output alphabet has no rank-0 symbol");

  auto type_of = [&](int q) { return A.states[q].type; };
  if (A.init) {
    auto& [q, u] = *A.init;
    if (q < 0 || q >= static_cast<int>(A.states.size()))
      rep.issues.push_back("init targets an unknown state");
    else
      detail::check_update(A, u, initial_type(A.kind), type_of(q), "init", rep);
  }
  for (auto& [key, val] : A.transitions) {
    auto& [q, a] = key;
    auto& [r, u] = val;
    std::string where = A.states[q].name + " -" + a + "->";
    if (!A.has_letter(a))
      rep.issues.push_back(where + ": undeclared letter " + a);
    if (r < 0 || r >= static_cast<int>(A.states.size()))
      rep.issues.push_back(where + ": unknown target");
    else
      detail::check_update(A, u, type_of(q), type_of(r), where, rep);
  }
  for (auto& [q, u] : A.halts)
    detail::check_update(A, u, type_of(q), halt_type(A.kind),
                         "halt " + A.states[q].name, rep);

  // One-step invariance of declared domains (free-term pipeline outputs).
  if (A.kind == AlgebraKind::FreeTerm && rep.ok()) {
    auto domain_of = [&](int q) {
      return A.states[q].domain ? *A.states[q].domain
                                : ConstrainedDomain::full(type_of(q));
    };
    auto check_flow = [&](const Update& u, int from, int to,
                          const std::string& where) {
      ConstrainedDomain img = closure_image(u, domain_of(from), A.output);
      ConstrainedDomain target = domain_of(to);
      for (auto& [l, r] : target.system().equations)
        if (!img.entails_eq(l, r))
          rep.issues.push_back(where + ": domain of " + A.states[to].name +
                               " is not invariant");
    };
    if (A.init) {
      ConstrainedDomain img =
          closure_image(A.init->second, ConstrainedDomain::full(0), A.output);
      ConstrainedDomain target = domain_of(A.init->first);
      for (auto& [l, r] : target.system().equations)
        if (!img.entails_eq(l, r))
          rep.issues.push_back("init: domain of " +
                               A.states[A.init->first].name +
                               " is not invariant");
    }
    for (auto& [key, val] : A.transitions)
      check_flow(val.second, key.first, val.first,
                 A.states[key.first].name + " -" + key.second + "->");
  }
  return rep;
}

/// Runs A on w. Undefined runs yield nullopt; an unknown letter is misuse.
inline std::optional<Data> evaluate(const Transducer& A,
                                    const std::vector<std::string>& w) {
  for (auto& a : w)
    if (!A.has_letter(a)) throw UsageError("letter not in input alphabet: " + a);
  if (!A.init) return std::nullopt;
  int q = A.init->first;
  Data d = apply(A.init->second, initial_data(A.kind));
  for (auto& a : w) {
    const auto* t = A.transition(q, a);
    if (!t) return std::nullopt;
    d = apply(t->second, d);
    q = t->first;
  }
  const Update* h = A.halt(q);
  if (!h) return std::nullopt;
  return apply(*h, d);
}

/// The update composed along the unique run from q over t, optionally
/// extended with the final step; nullopt when the run leaves the domain.
inline std::optional<Update> induced_update(const Transducer& A, int q,
                                            const std::vector<std::string>& t,
                                            bool with_halt) {
  Update u = identity_update(A.kind, A.states[q].type);
  int cur = q;
  for (auto& a : t) {
    const auto* tr = A.transition(cur, a);
    if (!tr) return std::nullopt;
    u = compose(u, tr->second);
    cur = tr->first;
  }
  if (with_halt) {
    const Update* h = A.halt(cur);
    if (!h) return std::nullopt;
    u = compose(u, *h);
  }
  return u;
}

/// Lazy, memoized view of the family of updates induced by maximal runs
/// departing from one state; entries are indexed by input words. Safe to
/// share across threads.
class UpdateVector {
 public:
  UpdateVector(const Transducer& A, int base) : a_(&A), base_(base) {}

  std::optional<Update> at(const std::vector<std::string>& t) const {
    std::lock_guard<std::mutex> lock(mu_);
    auto it = cache_.find(t);
    if (it == cache_.end())
      it = cache_.emplace(t, induced_update(*a_, base_, t, true)).first;
    return it->second;
  }

  int base_state() const { return base_; }

 private:
  const Transducer* a_;
  int base_;
  mutable std::map<std::vector<std::string>, std::optional<Update>> cache_;
  mutable std::mutex mu_;
};

struct EquivalenceResult {
  bool equivalent = true;
  std::optional<std::vector<std::string>> counterexample;
};

/// Compares realized transductions on every word of length <= maxlen,
/// including definedness; reports the first mismatch in length-then-lex
/// order.
inline EquivalenceResult equivalence_bounded(const Transducer& A,
                                             const Transducer& B, int maxlen) {
  if (A.kind != B.kind) throw TypeError("comparing transducers of different kinds");
  std::set<std::string> la(A.letters.begin(), A.letters.end());
  std::set<std::string> lb(B.letters.begin(), B.letters.end());
  if (la != lb) throw TypeError("input alphabets differ");
  std::vector<std::string> sigma(la.begin(), la.end());

  std::vector<std::vector<std::string>> layer{{}};
  for (int len = 0; len <= maxlen; ++len) {
    for (auto& w : layer) {
      auto da = evaluate(A, w);
      auto db = evaluate(B, w);
      bool same = da.has_value() == db.has_value() &&
                  (!da.has_value() || *da == *db);
      if (!same) return {false, w};
    }
    if (len == maxlen) break;
    std::vector<std::vector<std::string>> next;
    next.reserve(layer.size() * sigma.size());
    for (auto& w : layer)
      for (auto& a : sigma) {
        auto w2 = w;
        w2.push_back(a);
        next.push_back(std::move(w2));
      }
    layer = std::move(next);
  }
  return {true, std::nullopt};
}

/// A transformation between the configuration spaces of two transducers,
/// given by a partial state map and a matching update map.
struct Transformation {
  std::map<int, int> state_map;
  std::map<int, Update> update_map;
};

struct StrongFactorization {
  Transducer image;            // B restricted to the reach of the morphism
  Transformation epi;          // the morphism with its codomain restricted
  Transformation inclusion;    // identity embedding of the image into B
  std::map<int, int> image_state_of_b;  // B state index -> image state index
};

/// Checks that h is a transducer morphism from A to B (total, commuting
/// with the initial, internal, and final steps, with matching domains of
/// definition) and factorizes it through the pruning of B to the closure of
/// h's range.
inline StrongFactorization strong_factorize(const Transducer& A,
                                            const Transducer& B,
                                            const Transformation& h) {
  if (A.kind != B.kind) throw TypeError("morphism across different kinds");
  if (h.state_map.size() != h.update_map.size())
    throw TypeError("morphism state map and update map have different domains");
  for (std::size_t q = 0; q < A.states.size(); ++q)
    if (!h.state_map.count(static_cast<int>(q)))
      throw TypeError("morphism is not total: state " + A.states[q].name +
                      " unmapped");
  auto hu = [&](int q) -> const Update& { return h.update_map.at(q); };
  auto hs = [&](int q) { return h.state_map.at(q); };

  // Initial square.
  if (A.init.has_value() != B.init.has_value())
    throw TypeError("initial square does not commute: definedness differs");
  if (A.init) {
    if (hs(A.init->first) != B.init->first)
      throw TypeError("initial square does not commute on states");
    if (compose(A.init->second, hu(A.init->first)) != B.init->second)
      throw TypeError("initial square does not commute on updates");
  }
  // Internal squares.
  for (std::size_t qi = 0; qi < A.states.size(); ++qi) {
    int q = static_cast<int>(qi);
    for (auto& a : A.letters) {
      const auto* ta = A.transition(q, a);
      const auto* tb = B.transition(hs(q), a);
      if ((ta == nullptr) != (tb == nullptr))
        throw TypeError("square for letter " + a + " at state " +
                        A.states[q].name + " does not commute: definedness");
      if (!ta) continue;
      if (hs(ta->first) != tb->first)
        throw TypeError("square for letter " + a + " at state " +
                        A.states[q].name + " does not commute on states");
      if (compose(hu(q), tb->second) != compose(ta->second, hu(ta->first)))
        throw TypeError("square for letter " + a + " at state " +
                        A.states[q].name + " does not commute on updates");
    }
    const Update* ha = A.halt(q);
    const Update* hb = B.halt(hs(q));
    if ((ha == nullptr) != (hb == nullptr))
      throw TypeError("final square at state " + A.states[q].name +
                      " does not commute: definedness");
    if (ha && compose(hu(q), *hb) != *ha)
      throw TypeError("final square at state " + A.states[q].name +
                      " does not commute on updates");
  }

  // Build the image: B pruned to the range of the state map, each surviving
  // state constrained to the closure of the union of per-preimage ranges.
  StrongFactorization out;
  out.image.kind = B.kind;
  out.image.letters = B.letters;
  out.image.output = B.output;
  std::set<int> range;
  for (auto& [q, r] : h.state_map) range.insert(r);
  for (std::size_t r = 0; r < B.states.size(); ++r) {
    if (!range.count(static_cast<int>(r))) continue;
    StateInfo s = B.states[r];
    if (B.kind == AlgebraKind::FreeTerm) {
      ConstrainedDomain dom = ConstrainedDomain::empty(s.type);
      for (auto& [q, rr] : h.state_map) {
        if (rr != static_cast<int>(r)) continue;
        ConstrainedDomain src = A.states[q].domain
                                    ? *A.states[q].domain
                                    : ConstrainedDomain::full(A.states[q].type);
        dom = closure_union(dom, closure_image(hu(q), src, B.output), B.output);
      }
      if (!dom.is_full()) s.domain = dom;
    }
    out.image_state_of_b[static_cast<int>(r)] =
        static_cast<int>(out.image.states.size());
    out.image.states.push_back(std::move(s));
  }
  auto img = [&](int r) { return out.image_state_of_b.at(r); };
  if (B.init && range.count(B.init->first))
    out.image.init = {img(B.init->first), B.init->second};
  for (auto& [key, val] : B.transitions) {
    if (!range.count(key.first)) continue;
    if (!range.count(val.first))
      throw InternalError("morphism range is not transition-closed");
    out.image.transitions[{img(key.first), key.second}] = {img(val.first),
                                                           val.second};
  }
  for (auto& [q, u] : B.halts)
    if (range.count(q)) out.image.halts[img(q)] = u;

  for (auto& [q, r] : h.state_map) {
    out.epi.state_map[q] = img(r);
    out.epi.update_map.emplace(q, hu(q));
  }
  for (auto& [r, c] : out.image_state_of_b) {
    out.inclusion.state_map[c] = r;
    out.inclusion.update_map.emplace(
        c, identity_update(B.kind, B.states[r].type));
  }
  return out;
}

/// States ordered by breadth-first distance from the initial target (letters
/// scanned in sorted order), ties and unreachable states by name.
inline std::vector<int> canonical_state_order(const Transducer& A) {
  int n = static_cast<int>(A.states.size());
  std::vector<std::string> sorted_letters = A.letters;
  std::sort(sorted_letters.begin(), sorted_letters.end());
  std::vector<int> dist(n, -1);
  if (A.init && A.init->first >= 0) {
    std::queue<int> bfs;
    dist[A.init->first] = 0;
    bfs.push(A.init->first);
    while (!bfs.empty()) {
      int q = bfs.front();
      bfs.pop();
      for (auto& a : sorted_letters) {
        const auto* t = A.transition(q, a);
        if (t && dist[t->first] < 0) {
          dist[t->first] = dist[q] + 1;
          bfs.push(t->first);
        }
      }
    }
  }
  std::vector<int> order(n);
  for (int i = 0; i < n; ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    bool ra = dist[a] >= 0, rb = dist[b] >= 0;
    if (ra != rb) return ra;
    if (ra && dist[a] != dist[b]) return dist[a] < dist[b];
    return A.states[a].name < A.states[b].name;
  });
  return order;
}

}  // namespace xdt
