#pragma once

// Shared test utilities: deterministic random generators for terms, updates
// and transducers, plus small independent oracles used to cross-check the
// library implementations.

#include <algorithm>
#include <functional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "xdt/xdt.hpp"

namespace testutil {

using xdt::AlgebraKind;
using xdt::LinearTerm;
using xdt::RankedAlphabet;
using xdt::Term;
using xdt::Update;

inline RankedAlphabet small_alphabet() {
  RankedAlphabet g;
  g.add("a", 2);
  g.add("b", 1);
  g.add("c", 0);
  return g;
}

inline RankedAlphabet wide_alphabet() {
  RankedAlphabet g;
  g.add("a", 2);
  g.add("b", 1);
  g.add("c", 0);
  g.add("d", 0);
  return g;
}

using Rng = std::mt19937;

inline int pick(Rng& rng, int lo, int hi) {
  return std::uniform_int_distribution<int>(lo, hi)(rng);
}

// Random ground term of depth <= depth.
inline Term ground_term(Rng& rng, const RankedAlphabet& g, int depth) {
  std::vector<std::pair<std::string, int>> syms(g.symbols().begin(),
                                                g.symbols().end());
  while (true) {
    auto& [name, rank] = syms[pick(rng, 0, static_cast<int>(syms.size()) - 1)];
    if (depth <= 0 && rank > 0) continue;
    std::vector<Term> kids;
    for (int i = 0; i < rank; ++i)
      kids.push_back(ground_term(rng, g, depth - 1));
    return Term::app(name, std::move(kids));
  }
}

// Random term carrying exactly the given variables, one occurrence each.
// `depth` is a soft budget: once exhausted, the tree still shrinks because
// every step splits the variable list strictly (using a rank>=2 symbol).
inline Term term_with_vars(Rng& rng, const RankedAlphabet& g,
                           std::vector<int> vars, int depth) {
  if (vars.empty()) return ground_term(rng, g, std::max(depth, 0));
  if (vars.size() == 1 && (depth <= 0 || pick(rng, 0, 2) == 0))
    return Term::var(vars[0]);
  std::vector<std::pair<std::string, int>> syms;
  for (auto& [name, rank] : g.symbols()) {
    if (rank == 0) continue;
    if (depth <= 0 && vars.size() > 1 && rank < 2) continue;
    syms.emplace_back(name, rank);
  }
  if (syms.empty())
    throw xdt::UsageError("alphabet cannot host this many variables");
  auto& [name, rank] = syms[pick(rng, 0, static_cast<int>(syms.size()) - 1)];
  std::vector<std::vector<int>> split(rank);
  if (depth <= 0 && vars.size() > 1) {
    // round-robin so that no child receives the whole list
    for (std::size_t i = 0; i < vars.size(); ++i)
      split[i % rank].push_back(vars[i]);
  } else {
    for (int v : vars) split[pick(rng, 0, rank - 1)].push_back(v);
  }
  std::vector<Term> kids;
  for (int i = 0; i < rank; ++i)
    kids.push_back(term_with_vars(rng, g, split[i], depth - 1));
  return Term::app(name, std::move(kids));
}

// Random copyless non-erasing free-term update in_type -> out_type.
inline Update free_update(Rng& rng, const RankedAlphabet& g, int in_type,
                          int out_type, int depth) {
  while (true) {
    std::vector<std::vector<int>> split(out_type);
    for (int v = 1; v <= in_type; ++v)
      split[pick(rng, 0, out_type - 1)].push_back(v);
    std::vector<Term> payload;
    bool ok = true;
    for (int j = 0; j < out_type && ok; ++j) {
      if (split[j].empty())
        payload.push_back(ground_term(rng, g, depth));
      else
        payload.push_back(term_with_vars(rng, g, split[j], depth));
    }
    if (!ok) continue;
    return Update::free(in_type, std::move(payload));
  }
}

// Random linear term with the given placeholder count, depth <= depth.
inline LinearTerm linear_term(Rng& rng, const RankedAlphabet& g, int count,
                              int depth) {
  std::vector<int> vars;
  for (int i = 1; i <= count; ++i) vars.push_back(i);
  if (count == 0) return LinearTerm(ground_term(rng, g, depth));
  // keep left-to-right order by sorting variable labels into the tree:
  // term_with_vars distributes arbitrarily, so relabel afterwards.
  Term t = term_with_vars(rng, g, vars, depth);
  // renumber placeholders in left-to-right order
  struct Renumber {
    int next = 0;
    Term walk(const Term& t) {
      if (t.is_var()) return Term::var(++next);
      std::vector<Term> kids;
      for (auto& k : t.children()) kids.push_back(walk(k));
      return Term::app(t.symbol(), std::move(kids));
    }
  } ren;
  return LinearTerm(ren.walk(t));
}

// Random leaf-subst update with the given input type.
inline Update leaf_update(Rng& rng, const RankedAlphabet& g, int in_type,
                          int depth) {
  std::vector<LinearTerm> payload;
  for (int i = 0; i < in_type; ++i)
    payload.push_back(linear_term(rng, g, pick(rng, 0, 2), depth));
  return Update::leaf(std::move(payload));
}

// --- shared example transducers ---------------------------------------------

// Sequential transducer inserting a separator before every second consumed
// letter: init -> q0 [""], q0 -s-> q1 ["#s"], q1 -s-> q0 ["s"], halt q0 "#",
// halt q1 "".
inline xdt::Transducer separator_transducer() {
  xdt::Transducer A;
  A.kind = AlgebraKind::Sequential;
  A.letters = {"a", "b", "c"};
  for (auto* s : {"#", "a", "b", "c"}) A.output.add(s, 0);
  A.states.push_back({"q0", 1, std::nullopt});
  A.states.push_back({"q1", 1, std::nullopt});
  A.init = {0, Update::append("")};
  for (auto& s : A.letters) {
    A.transitions[{0, s}] = {1, Update::append("#" + s)};
    A.transitions[{1, s}] = {0, Update::append(s)};
  }
  A.halts.emplace(0, Update::append("#"));
  A.halts.emplace(1, Update::append(""));
  return A;
}

// The equivalent transducer that emits each separator one step earlier.
inline xdt::Transducer separator_anticipating() {
  xdt::Transducer B;
  B.kind = AlgebraKind::Sequential;
  B.letters = {"a", "b", "c"};
  for (auto* s : {"#", "a", "b", "c"}) B.output.add(s, 0);
  B.states.push_back({"q0", 1, std::nullopt});
  B.states.push_back({"q1", 1, std::nullopt});
  B.init = {0, Update::append("#")};
  for (auto& s : B.letters) {
    B.transitions[{0, s}] = {1, Update::append(s)};
    B.transitions[{1, s}] = {0, Update::append(s + "#")};
  }
  B.halts.emplace(0, Update::append(""));
  B.halts.emplace(1, Update::append(""));
  return B;
}

inline std::vector<std::string> word(const std::string& chars) {
  std::vector<std::string> w;
  for (char c : chars) w.push_back(std::string(1, c));
  return w;
}

// Free-term transducer whose pair state is fed (a,a) and (b,b) and keeps
// swapping them: its reachable pairs are exactly the diagonal.
inline xdt::Transducer swap_feed_transducer() {
  using namespace xdt;
  Transducer A;
  A.kind = AlgebraKind::FreeTerm;
  A.letters = {"a", "b"};
  A.output.add("c", 2);
  A.output.add("a", 0);
  A.output.add("b", 0);
  A.states.push_back({"p", 0, std::nullopt});
  A.states.push_back({"q", 2, std::nullopt});
  A.init = {0, Update::free(0, {})};
  auto t = [](const char* s) { return parse_term(s, TermSyntax::Vars); };
  A.transitions[{0, "a"}] = {1, Update::free(0, {t("a"), t("a")})};
  A.transitions[{0, "b"}] = {1, Update::free(0, {t("b"), t("b")})};
  A.transitions[{1, "a"}] = {1, Update::free(2, {t("x2"), t("x1")})};
  A.halts.emplace(1, Update::free(2, {t("c(x1,x2)")}));
  return A;
}

// Free-term transducer with two pair states that mirror one another; they
// merge under the component swap.
inline xdt::Transducer mirrored_pair_transducer() {
  using namespace xdt;
  Transducer A;
  A.kind = AlgebraKind::FreeTerm;
  A.letters = {"a", "b"};
  A.output.add("c", 2);
  A.output.add("a", 0);
  A.output.add("b", 0);
  A.states.push_back({"p0", 0, std::nullopt});
  A.states.push_back({"s1", 2, std::nullopt});
  A.states.push_back({"s2", 2, std::nullopt});
  auto t = [](const char* s) { return parse_term(s, TermSyntax::Vars); };
  A.init = {0, Update::free(0, {})};
  A.transitions[{0, "a"}] = {1, Update::free(0, {t("a"), t("b")})};
  A.transitions[{0, "b"}] = {2, Update::free(0, {t("b"), t("a")})};
  A.transitions[{1, "a"}] = {1, Update::free(2, {t("c(x1,a)"), t("c(x2,b)")})};
  A.transitions[{2, "a"}] = {2, Update::free(2, {t("c(x1,b)"), t("c(x2,a)")})};
  A.halts.emplace(1, Update::free(2, {t("c(x1,x2)")}));
  A.halts.emplace(2, Update::free(2, {t("c(x2,x1)")}));
  return A;
}

// --- random transducers and semantics-preserving paddings --------------------

inline xdt::Transducer random_sequential(Rng& rng, int max_states) {
  using namespace xdt;
  Transducer A;
  A.kind = AlgebraKind::Sequential;
  A.letters = {"a", "b"};
  A.output.add("a", 0);
  A.output.add("b", 0);
  int n = pick(rng, 1, max_states);
  for (int i = 0; i < n; ++i)
    A.states.push_back({"s" + std::to_string(i), 1, std::nullopt});
  auto rand_str = [&] {
    std::string w;
    for (int i = pick(rng, 0, 2); i > 0; --i)
      w += static_cast<char>('a' + pick(rng, 0, 1));
    return w;
  };
  A.init = {pick(rng, 0, n - 1), Update::append(rand_str())};
  for (int q = 0; q < n; ++q) {
    for (auto& a : A.letters)
      if (pick(rng, 0, 3) != 0)
        A.transitions[{q, a}] = {pick(rng, 0, n - 1), Update::append(rand_str())};
    if (pick(rng, 0, 4) != 0) A.halts.emplace(q, Update::append(rand_str()));
  }
  return A;
}

inline xdt::Transducer random_leafsubst(Rng& rng, int max_states) {
  using namespace xdt;
  RankedAlphabet g = small_alphabet();
  Transducer A;
  A.kind = AlgebraKind::LeafSubst;
  A.letters = {"a", "b"};
  A.output = g;
  int n = pick(rng, 1, max_states);
  for (int i = 0; i < n; ++i)
    A.states.push_back({"s" + std::to_string(i), pick(rng, 0, 2), std::nullopt});
  // a tuple of `width` linear terms with `total` placeholders overall
  auto rand_tuple = [&](int width, int total) {
    std::vector<int> counts(width, 0);
    for (int i = 0; i < total; ++i) counts[pick(rng, 0, width - 1)]++;
    std::vector<LinearTerm> payload;
    for (int i = 0; i < width; ++i)
      payload.push_back(linear_term(rng, g, counts[i], 2));
    return Update::leaf(std::move(payload));
  };
  int t0 = pick(rng, 0, n - 1);
  A.init = {t0, rand_tuple(1, A.states[t0].type)};
  for (int q = 0; q < n; ++q) {
    for (auto& a : A.letters)
      if (pick(rng, 0, 3) != 0) {
        int r = pick(rng, 0, n - 1);
        // a width-0 tuple has no placeholders: type-0 states only reach
        // type-0 states
        if (A.states[q].type == 0 && A.states[r].type != 0) continue;
        A.transitions[{q, a}] = {r, rand_tuple(A.states[q].type,
                                                A.states[r].type)};
      }
    if (pick(rng, 0, 4) != 0)
      A.halts.emplace(q, rand_tuple(A.states[q].type, 0));
  }
  return A;
}

inline xdt::Transducer random_freeterm(Rng& rng, int max_states) {
  using namespace xdt;
  RankedAlphabet g = small_alphabet();
  Transducer A;
  A.kind = AlgebraKind::FreeTerm;
  A.letters = {"a", "b"};
  A.output = g;
  int n = pick(rng, 1, max_states);
  for (int i = 0; i < n; ++i)
    A.states.push_back({"s" + std::to_string(i), pick(rng, 0, 2), std::nullopt});
  auto upd = [&](int in, int out) { return free_update(rng, g, in, out, 1); };
  int t0 = pick(rng, 0, n - 1);
  A.init = {t0, upd(0, A.states[t0].type)};
  for (int q = 0; q < n; ++q) {
    int tq = A.states[q].type;
    for (auto& a : A.letters)
      if (pick(rng, 0, 3) != 0) {
        int r = pick(rng, 0, n - 1);
        int tr = A.states[r].type;
        // non-erasing updates cannot shrink to width 0 from a wider state
        if (tq > 0 && tr == 0) continue;
        A.transitions[{q, a}] = {r, upd(tq, tr)};
      }
    if (pick(rng, 0, 4) != 0) A.halts.emplace(q, upd(tq, 1));
  }
  return A;
}

// Splits one state into two exact copies, rerouting a random subset of its
// incoming steps to the copy. Realizes the same transduction by definition.
inline xdt::Transducer pad_duplicate(const xdt::Transducer& A, Rng& rng) {
  using namespace xdt;
  if (A.states.empty()) return A;
  Transducer B = A;
  int q = pick(rng, 0, static_cast<int>(A.states.size()) - 1);
  int copy = static_cast<int>(B.states.size());
  StateInfo s = B.states[q];
  do s.name += "x";
  while (B.state_index(s.name) >= 0);
  B.states.push_back(std::move(s));
  for (auto& a : B.letters) {
    const auto* t = A.transition(q, a);
    if (t) B.transitions[{copy, a}] = *t;
  }
  if (const Update* h = A.halt(q)) B.halts.emplace(copy, *h);
  for (auto& [key, val] : B.transitions)
    if (val.first == q && pick(rng, 0, 1)) val.first = copy;
  if (B.init && B.init->first == q && pick(rng, 0, 1)) B.init->first = copy;
  return B;
}

// Delays part of the emitted output: strips a common suffix of the steps
// entering one sequential state and prepends it to the departing steps.
inline xdt::Transducer pad_suffix(const xdt::Transducer& A, Rng& rng) {
  using namespace xdt;
  if (A.kind != AlgebraKind::Sequential || A.states.empty()) return A;
  int n = static_cast<int>(A.states.size());
  int q = pick(rng, 0, n - 1);
  for (auto& [key, val] : A.transitions)
    if (key.first == q && val.first == q) return A;  // self-loop: skip
  std::vector<const std::string*> incoming;
  if (A.init && A.init->first == q) incoming.push_back(&A.init->second.seq_payload());
  for (auto& [key, val] : A.transitions)
    if (val.first == q) incoming.push_back(&val.second.seq_payload());
  if (incoming.empty()) return A;
  std::size_t k = incoming[0]->size();
  for (auto* w : incoming) {
    std::size_t m = 0;
    while (m < k && m < w->size() &&
           (*w)[w->size() - 1 - m] == (*incoming[0])[incoming[0]->size() - 1 - m])
      ++m;
    k = m;
  }
  if (k == 0) return A;
  std::string suffix = incoming[0]->substr(incoming[0]->size() - k);
  Transducer B = A;
  auto strip = [&](Update& u) {
    const std::string& w = u.seq_payload();
    u = Update::append(w.substr(0, w.size() - k));
  };
  if (B.init && B.init->first == q) strip(B.init->second);
  for (auto& [key, val] : B.transitions)
    if (val.first == q) strip(val.second);
  for (auto& [key, val] : B.transitions)
    if (key.first == q) val.second = Update::append(suffix + val.second.seq_payload());
  if (B.halts.count(q))
    B.halts.at(q) = Update::append(suffix + B.halts.at(q).seq_payload());
  return B;
}

// Re-labels one free-term state's registers through a random permutation.
inline xdt::Transducer pad_permute(const xdt::Transducer& A, Rng& rng) {
  using namespace xdt;
  if (A.kind != AlgebraKind::FreeTerm || A.states.empty()) return A;
  int q = pick(rng, 0, static_cast<int>(A.states.size()) - 1);
  int tau = A.states[q].type;
  if (tau < 2) return A;
  std::vector<int> perm(tau);
  for (int i = 0; i < tau; ++i) perm[i] = i;
  std::shuffle(perm.begin(), perm.end(), rng);
  Update j = xdt::detail::perm_update(AlgebraKind::FreeTerm, tau, perm);
  Update jinv = xdt::detail::perm_update(AlgebraKind::FreeTerm, tau,
                                         xdt::detail::inverse_perm(perm));
  Transducer B = A;
  for (auto& [key, val] : B.transitions) {
    bool in = val.first == q, out = key.first == q;
    if (in && out)
      val.second = compose(jinv, compose(val.second, j));
    else if (in)
      val.second = compose(val.second, j);
    else if (out)
      val.second = compose(jinv, val.second);
  }
  if (B.init && B.init->first == q) B.init->second = compose(B.init->second, j);
  if (B.halts.count(q)) B.halts.at(q) = compose(jinv, B.halts.at(q));
  if (B.states[q].domain) {
    B.states[q].domain =
        closure_image(j, *B.states[q].domain, B.output);
  }
  return B;
}

// --- independent oracles ---------------------------------------------------

// Substitution re-implemented by direct recursion (no sharing with the
// library beyond the Term type).
inline Term oracle_substitute(const Term& t, const std::vector<Term>& u) {
  if (t.is_var()) return u.at(t.var_index() - 1);
  std::vector<Term> kids;
  for (auto& k : t.children()) kids.push_back(oracle_substitute(k, u));
  return Term::app(t.symbol(), std::move(kids));
}

// All ground terms of depth <= depth (depth 1 = constants).
inline void enumerate_ground(const RankedAlphabet& g, int depth,
                             std::vector<Term>& out) {
  if (depth <= 0) return;
  std::vector<Term> smaller;
  enumerate_ground(g, depth - 1, smaller);
  std::set<std::string> seen;
  for (auto& t : smaller) seen.insert(t.render());
  out = smaller;
  for (auto& [name, rank] : g.symbols()) {
    if (rank == 0) {
      Term t = Term::app(name);
      if (seen.insert(t.render()).second) out.push_back(t);
      continue;
    }
    if (smaller.empty()) continue;
    std::vector<int> idx(rank, 0);
    while (true) {
      std::vector<Term> kids;
      for (int i : idx) kids.push_back(smaller[i]);
      Term t = Term::app(name, std::move(kids));
      if (seen.insert(t.render()).second) out.push_back(t);
      int p = rank - 1;
      while (p >= 0 && ++idx[p] == static_cast<int>(smaller.size())) {
        idx[p] = 0;
        --p;
      }
      if (p < 0) break;
    }
  }
}

// All tuples of the given width over a base list.
inline std::vector<std::vector<Term>> tuples_over(const std::vector<Term>& base,
                                                  int width) {
  std::vector<std::vector<Term>> out{{}};
  for (int i = 0; i < width; ++i) {
    std::vector<std::vector<Term>> next;
    for (auto& t : out)
      for (auto& b : base) {
        auto t2 = t;
        t2.push_back(b);
        next.push_back(std::move(t2));
      }
    out = std::move(next);
  }
  return out;
}

// Exhaustive occurrence-assignment check: does the multiset S embed into T
// with disjoint occurrences covering all of T's variables? Written directly
// against Term, independent of the library's divisor machinery.
struct NaiveOccurrence {
  int element;
  std::vector<int> path;
};

inline void naive_collect(const Term& hay, const Term& needle, int element,
                          std::vector<int>& path,
                          std::vector<NaiveOccurrence>& out) {
  if (hay == needle) out.push_back({element, path});
  for (std::size_t i = 0; i < hay.children().size(); ++i) {
    path.push_back(static_cast<int>(i));
    naive_collect(hay.children()[i], needle, element, path, out);
    path.pop_back();
  }
}

inline bool naive_embeds(const std::vector<Term>& S,
                         const std::vector<Term>& T) {
  int vars_total = 0;
  for (auto& t : T) {
    std::vector<int> occ;
    t.collect_vars(occ);
    vars_total += static_cast<int>(occ.size());
  }
  std::vector<std::vector<NaiveOccurrence>> options;
  for (auto& s : S) {
    std::vector<NaiveOccurrence> occs;
    std::vector<int> path;
    for (std::size_t e = 0; e < T.size(); ++e)
      naive_collect(T[e], s, static_cast<int>(e), path, occs);
    if (occs.empty()) return false;
    options.push_back(std::move(occs));
  }
  auto prefix = [](const std::vector<int>& a, const std::vector<int>& b) {
    return a.size() <= b.size() && std::equal(a.begin(), a.end(), b.begin());
  };
  std::vector<NaiveOccurrence> chosen;
  std::function<bool(std::size_t, int)> go = [&](std::size_t i, int covered) {
    if (i == options.size()) return covered == vars_total;
    for (auto& occ : options[i]) {
      bool ok = true;
      for (auto& c : chosen)
        if (c.element == occ.element &&
            (prefix(c.path, occ.path) || prefix(occ.path, c.path)))
          ok = false;
      if (!ok) continue;
      std::vector<int> vs;
      S[i].collect_vars(vs);
      chosen.push_back(occ);
      if (go(i + 1, covered + static_cast<int>(vs.size()))) return true;
      chosen.pop_back();
    }
    return false;
  };
  return go(0, 0);
}

inline void all_subterms(const Term& t, std::vector<Term>& out) {
  out.push_back(t);
  for (auto& k : t.children()) all_subterms(k, out);
}

inline bool occurs_somewhere(const Term& s, const std::vector<Term>& T) {
  std::vector<NaiveOccurrence> occs;
  std::vector<int> path;
  for (std::size_t e = 0; e < T.size(); ++e)
    naive_collect(T[e], s, static_cast<int>(e), path, occs);
  return !occs.empty();
}

// All common divisors of U in the copyless non-erasing free-term algebra,
// enumerated over multisets of common subterms (capped element count).
// Occurrence lists are precomputed per update so the backtracking check
// never re-walks the payload terms.
inline std::vector<std::vector<Term>> enumerate_common_divisors(
    const std::vector<Update>& U, int max_elems) {
  std::vector<Term> pool;
  {
    std::set<std::string> seen;
    std::vector<Term> subs;
    for (auto& t : U[0].free_payload()) all_subterms(t, subs);
    for (auto& s : subs) {
      if (!seen.insert(s.render()).second) continue;
      bool everywhere = true;
      for (auto& u : U)
        if (!occurs_somewhere(s, u.free_payload())) everywhere = false;
      if (everywhere) pool.push_back(s);
    }
  }
  std::vector<int> pool_vars(pool.size());
  for (std::size_t i = 0; i < pool.size(); ++i) {
    std::vector<int> vs;
    pool[i].collect_vars(vs);
    pool_vars[i] = static_cast<int>(vs.size());
  }
  // occ[u][i] = occurrences of pool[i] in U[u]'s payload
  std::vector<std::vector<std::vector<NaiveOccurrence>>> occ(U.size());
  std::vector<int> vars_total(U.size(), 0);
  for (std::size_t u = 0; u < U.size(); ++u) {
    occ[u].resize(pool.size());
    for (std::size_t i = 0; i < pool.size(); ++i) {
      std::vector<int> path;
      for (std::size_t e = 0; e < U[u].free_payload().size(); ++e)
        naive_collect(U[u].free_payload()[e], pool[i], static_cast<int>(e),
                      path, occ[u][i]);
    }
    std::vector<int> vs;
    for (auto& t : U[u].free_payload()) t.collect_vars(vs);
    vars_total[u] = static_cast<int>(vs.size());
  }
  auto prefix = [](const std::vector<int>& a, const std::vector<int>& b) {
    return a.size() <= b.size() && std::equal(a.begin(), a.end(), b.begin());
  };
  auto embeds_by_index = [&](const std::vector<int>& elems, std::size_t u) {
    std::vector<NaiveOccurrence> chosen;
    std::function<bool(std::size_t, int)> assign = [&](std::size_t i,
                                                       int covered) {
      if (i == elems.size()) return covered == vars_total[u];
      for (auto& o : occ[u][elems[i]]) {
        bool free_slot = true;
        for (auto& c : chosen)
          if (c.element == o.element &&
              (prefix(c.path, o.path) || prefix(o.path, c.path)))
            free_slot = false;
        if (!free_slot) continue;
        chosen.push_back(o);
        if (assign(i + 1, covered + pool_vars[elems[i]])) return true;
        chosen.pop_back();
      }
      return false;
    };
    return assign(0, 0);
  };

  int alpha = U[0].in_type();
  std::vector<std::vector<Term>> found;
  std::vector<int> cur;
  std::function<void(std::size_t, unsigned)> go = [&](std::size_t i,
                                                      unsigned used_vars) {
    if (used_vars == (1u << alpha) - 1) {
      bool all = true;
      for (std::size_t u = 0; u < U.size() && all; ++u)
        all = embeds_by_index(cur, u);
      if (all) {
        std::vector<Term> ts;
        for (int e : cur) ts.push_back(pool[e]);
        found.push_back(std::move(ts));
      }
    }
    if (i == pool.size() || static_cast<int>(cur.size()) >= max_elems) return;
    go(i + 1, used_vars);
    std::vector<int> vs;
    pool[i].collect_vars(vs);
    unsigned mask = 0;
    bool dup = false;
    for (int v : vs) {
      if (mask & (1u << (v - 1))) dup = true;
      mask |= 1u << (v - 1);
    }
    if (dup || (mask & used_vars)) return;
    cur.push_back(static_cast<int>(i));
    go(i, used_vars | mask);
    cur.pop_back();
  };
  go(0, 0);
  return found;
}

}  // namespace testutil
