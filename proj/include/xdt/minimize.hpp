#pragma once

#include <algorithm>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "xdt/gcd.hpp"
#include "xdt/transducer.hpp"

namespace xdt {

/// Per-state greatest common divisors of the departing update families.
/// f[q] is absent exactly when no halting run leaves q; codomain[q] is the
/// closure of f[q]'s range, the constraint that makes it epi.
struct DivisorAssignment {
  std::vector<std::optional<Update>> f;
  std::vector<std::optional<ConstrainedDomain>> codomain;
};

/// Solves, by a greatest fixpoint sweep, the per-state system
///   f_q = GCD({halt update of q} ∪ {transition update ⨟ f_target}),
/// with absent operands skipped. Sweeps are simultaneous, so the result does
/// not depend on state order.
inline DivisorAssignment gcd_fixpoint(const Transducer& A) {
  int n = static_cast<int>(A.states.size());
  std::vector<std::string> sorted_letters = A.letters;
  std::sort(sorted_letters.begin(), sorted_letters.end());
  std::vector<std::optional<Update>> f(n);
  for (int round = 0;; ++round) {
    if (round > 10000) throw InternalError("divisor fixpoint did not stabilize");
    std::vector<std::optional<Update>> next(n);
    for (int q = 0; q < n; ++q) {
      std::vector<Update> ops;
      if (const Update* h = A.halt(q)) ops.push_back(*h);
      for (auto& a : sorted_letters) {
        const auto* t = A.transition(q, a);
        if (t && f[t->first]) ops.push_back(compose(t->second, *f[t->first]));
      }
      if (!ops.empty()) next[q] = gcd_of_updates(ops, A.output).gcd;
    }
    if (next == f) break;
    f = std::move(next);
  }
  DivisorAssignment out;
  out.f = std::move(f);
  out.codomain.resize(n);
  for (int q = 0; q < n; ++q) {
    if (!out.f[q]) continue;
    if (A.kind == AlgebraKind::FreeTerm)
      out.codomain[q] = closure_image(
          *out.f[q], ConstrainedDomain::full(out.f[q]->in_type()), A.output);
    else
      out.codomain[q] = ConstrainedDomain::full(out.f[q]->out_type());
  }
  return out;
}

/// Pushes each state's divisor backwards: the initial update absorbs the
/// divisor of its target, every transition update is replaced by the
/// residual of (update ⨟ target divisor) via the source divisor, and halt
/// updates by their residuals. States without halting runs are dropped.
/// The result is equivalent to A and the divisor of every departing family
/// becomes (an isomorphic copy of) the identity.
inline Transducer normalize(const Transducer& A, const DivisorAssignment& D) {
  Transducer B;
  B.kind = A.kind;
  B.letters = A.letters;
  B.output = A.output;
  std::vector<int> renum(A.states.size(), -1);
  for (std::size_t q = 0; q < A.states.size(); ++q) {
    if (!D.f[q]) continue;
    renum[q] = static_cast<int>(B.states.size());
    StateInfo s;
    s.name = A.states[q].name;
    s.type = D.f[q]->out_type();
    B.states.push_back(std::move(s));
  }
  auto residual = [&](int q, const Update& u) {
    auto r = residual_via_epi(*D.f[q], u);
    if (!r) throw InternalError("state divisor fails to divide a departing update");
    return *r;
  };
  if (A.init && renum[A.init->first] >= 0)
    B.init = {renum[A.init->first],
              compose(A.init->second, *D.f[A.init->first])};
  for (auto& [key, val] : A.transitions) {
    auto& [q, a] = key;
    auto& [r, u] = val;
    if (renum[q] < 0 || renum[r] < 0) continue;
    B.transitions[{renum[q], a}] = {renum[r],
                                    residual(q, compose(u, *D.f[r]))};
  }
  for (auto& [q, u] : A.halts)
    if (renum[q] >= 0) B.halts[renum[q]] = residual(q, u);
  return B;
}

/// Restricts B to the closure of its reachable configurations. Control
/// states outside the graph reach are dropped; in the free-term algebra the
/// surviving states additionally carry the least invariant constrained
/// domains, computed by iterating
///   S_q := cl(S_q ∪ initial image ∪ per-letter images)
/// until the solution sets stabilize.
inline Transducer reach(const Transducer& B) {
  int n = static_cast<int>(B.states.size());
  std::vector<bool> keep(n, false);
  std::vector<ConstrainedDomain> dom;

  if (B.kind == AlgebraKind::FreeTerm) {
    dom.reserve(n);
    for (int q = 0; q < n; ++q)
      dom.push_back(ConstrainedDomain::empty(B.states[q].type));
    for (int round = 0;; ++round) {
      if (round > 10000) throw InternalError("reach fixpoint did not stabilize");
      std::vector<ConstrainedDomain> next = dom;
      if (B.init) {
        ConstrainedDomain img = closure_image(
            B.init->second, ConstrainedDomain::full(0), B.output);
        next[B.init->first] =
            closure_union(next[B.init->first], img, B.output);
      }
      for (auto& [key, val] : B.transitions) {
        if (dom[key.first].unsat()) continue;
        ConstrainedDomain img =
            closure_image(val.second, dom[key.first], B.output);
        next[val.first] = closure_union(next[val.first], img, B.output);
      }
      bool stable = true;
      for (int q = 0; q < n; ++q)
        if (!next[q].same_solutions(dom[q])) stable = false;
      dom = std::move(next);
      if (stable) break;
    }
    for (int q = 0; q < n; ++q) keep[q] = !dom[q].unsat();
  } else {
    if (B.init) {
      std::vector<int> stack{B.init->first};
      keep[B.init->first] = true;
      while (!stack.empty()) {
        int q = stack.back();
        stack.pop_back();
        for (auto& a : B.letters) {
          const auto* t = B.transition(q, a);
          if (t && !keep[t->first]) {
            keep[t->first] = true;
            stack.push_back(t->first);
          }
        }
      }
    }
  }

  Transducer C;
  C.kind = B.kind;
  C.letters = B.letters;
  C.output = B.output;
  std::vector<int> renum(n, -1);
  for (int q = 0; q < n; ++q) {
    if (!keep[q]) continue;
    renum[q] = static_cast<int>(C.states.size());
    StateInfo s = B.states[q];
    s.domain.reset();
    if (B.kind == AlgebraKind::FreeTerm && !dom[q].is_full())
      s.domain = dom[q];
    C.states.push_back(std::move(s));
  }
  if (B.init && renum[B.init->first] >= 0)
    C.init = {renum[B.init->first], B.init->second};
  for (auto& [key, val] : B.transitions)
    if (renum[key.first] >= 0 && renum[val.first] >= 0)
      C.transitions[{renum[key.first], key.second}] = {renum[val.first],
                                                       val.second};
  for (auto& [q, u] : B.halts)
    if (renum[q] >= 0) C.halts[renum[q]] = u;
  return C;
}

namespace detail {

inline Update perm_update(AlgebraKind kind, int type,
                          const std::vector<int>& perm) {
  if (kind != AlgebraKind::FreeTerm) return identity_update(kind, type);
  std::vector<Term> payload;
  payload.reserve(perm.size());
  for (int p : perm) payload.push_back(Term::var(p + 1));
  return Update::free(type, std::move(payload));
}

inline std::vector<int> inverse_perm(const std::vector<int>& perm) {
  std::vector<int> inv(perm.size());
  for (std::size_t k = 0; k < perm.size(); ++k) inv[perm[k]] = k;
  return inv;
}

inline ConstrainedDomain domain_of(const Transducer& C, int q) {
  return C.states[q].domain ? *C.states[q].domain
                            : ConstrainedDomain::full(C.states[q].type);
}

// Update equality relative to the data actually reachable at `state`.
inline bool equal_mod_domain(const Transducer& C, int state, const Update& u,
                             const Update& v) {
  if (u.in_type() != v.in_type() || u.out_type() != v.out_type()) return false;
  if (C.kind != AlgebraKind::FreeTerm) return u == v;
  return domain_of(C, state).entails_eq(u.free_payload(), v.free_payload());
}

constexpr int kMaxIsoArity = 6;

// Candidate register isomorphisms between the data spaces of q and q2: all
// component permutations for the free-term algebra, the identity elsewhere
// (placeholder order is fixed there).
inline std::vector<std::vector<int>> candidate_isos(const Transducer& C, int q,
                                                    int q2) {
  std::vector<std::vector<int>> out;
  int tau = C.states[q].type;
  if (C.states[q2].type != tau) return out;
  std::vector<int> perm(tau);
  for (int i = 0; i < tau; ++i) perm[i] = i;
  if (C.kind != AlgebraKind::FreeTerm) {
    out.push_back(perm);
    return out;
  }
  if (tau > kMaxIsoArity)
    throw TypeError("state arity " + std::to_string(tau) +
                    " exceeds the isomorphism enumeration cap of " +
                    std::to_string(kMaxIsoArity));
  do out.push_back(perm);
  while (std::next_permutation(perm.begin(), perm.end()));
  return out;
}

using Triple = std::tuple<int, int, std::vector<int>>;

// Largest family of triples (p, p2, perm) such that the update families
// departing from p and from p2 agree up to the permutation, checked modulo
// the reachable domains: a coinductive partition refinement.
inline std::set<Triple> bisimulation_triples(const Transducer& C) {
  std::vector<std::string> sorted_letters = C.letters;
  std::sort(sorted_letters.begin(), sorted_letters.end());
  std::set<Triple> alive;
  int n = static_cast<int>(C.states.size());
  for (int p = 0; p < n; ++p)
    for (int p2 = 0; p2 < n; ++p2)
      for (auto& perm : candidate_isos(C, p, p2)) {
        const Update* h = C.halt(p);
        const Update* h2 = C.halt(p2);
        if ((h == nullptr) != (h2 == nullptr)) continue;
        if (h) {
          Update rhs = compose(
              perm_update(C.kind, C.states[p].type, perm), *h2);
          if (!equal_mod_domain(C, p, *h, rhs)) continue;
        }
        alive.insert({p, p2, perm});
      }
  bool changed = true;
  while (changed) {
    changed = false;
    for (auto it = alive.begin(); it != alive.end();) {
      auto& [p, p2, perm] = *it;
      Update j = perm_update(C.kind, C.states[p].type, perm);
      bool ok = true;
      for (auto& a : sorted_letters) {
        const auto* t = C.transition(p, a);
        const auto* t2 = C.transition(p2, a);
        if ((t == nullptr) != (t2 == nullptr)) {
          ok = false;
          break;
        }
        if (!t) continue;
        Update rhs = compose(j, t2->second);
        bool found = false;
        for (auto& perm_a : candidate_isos(C, t->first, t2->first)) {
          if (!alive.count({t->first, t2->first, perm_a})) continue;
          Update lhs = compose(
              t->second,
              perm_update(C.kind, C.states[t->first].type, perm_a));
          if (equal_mod_domain(C, p, lhs, rhs)) {
            found = true;
            break;
          }
        }
        if (!found) {
          ok = false;
          break;
        }
      }
      if (!ok) {
        it = alive.erase(it);
        changed = true;
      } else {
        ++it;
      }
    }
  }
  return alive;
}

}  // namespace detail

/// Do the update families departing from q and q2 agree as vectors through
/// the candidate component isomorphism, on every datum reachable at q?
inline bool mergeable(const Transducer& C, int q, int q2,
                      const std::vector<int>& perm) {
  if (C.states[q].type != C.states[q2].type) return false;
  return detail::bisimulation_triples(C).count({q, q2, perm}) > 0;
}

/// Record of the folds performed by merge_observational: `from` was folded
/// into `into`, with the permutation witnessing that every behavior
/// departing from `from` factors through `into`.
struct MergeWitness {
  struct Fold {
    std::string from, into;
    std::vector<int> perm;
  };
  std::vector<Fold> folds;
};

namespace detail {

// Folds state x into y: every step entering x is redirected into y through
// the witness permutation, and x is dropped with its departing steps.
inline Transducer fold_state(const Transducer& C, int x, int y,
                             const std::vector<int>& perm) {
  Update j = perm_update(C.kind, C.states[x].type, perm);
  Transducer M;
  M.kind = C.kind;
  M.letters = C.letters;
  M.output = C.output;
  std::vector<int> renum(C.states.size(), -1);
  for (std::size_t q = 0; q < C.states.size(); ++q) {
    if (static_cast<int>(q) == x) continue;
    renum[q] = static_cast<int>(M.states.size());
    M.states.push_back(C.states[q]);
  }
  auto retarget = [&](int r, const Update& u) {
    if (r == x) return std::make_pair(renum[y], compose(u, j));
    return std::make_pair(renum[r], u);
  };
  if (C.init) M.init = retarget(C.init->first, C.init->second);
  for (auto& [key, val] : C.transitions) {
    if (key.first == x) continue;
    M.transitions[{renum[key.first], key.second}] =
        retarget(val.first, val.second);
  }
  for (auto& [q, u] : C.halts)
    if (q != x) M.halts[renum[q]] = u;
  return M;
}

}  // namespace detail

/// Merges states with isomorphic departing families. States are folded one
/// at a time: x goes into y when the behaviors departing from x agree, on
/// all data reachable at x, with those of y through some register
/// permutation. Earlier states in canonical order are preferred as
/// survivors, and reachable domains are recomputed after every fold so that
/// later folds are decided against fresh invariants.
inline Transducer merge_observational(const Transducer& C0,
                                      MergeWitness* witness = nullptr) {
  Transducer C = C0;
  for (;;) {
    std::set<detail::Triple> alive = detail::bisimulation_triples(C);
    std::vector<int> order = canonical_state_order(C);
    int n = static_cast<int>(C.states.size());
    int fx = -1, fy = -1;
    std::vector<int> fperm;
    for (int yi = 0; yi < n && fx < 0; ++yi)
      for (int xi = yi + 1; xi < n && fx < 0; ++xi) {
        int y = order[yi], x = order[xi];
        // prefer folding the later state into the earlier one
        for (auto& perm : detail::candidate_isos(C, x, y))
          if (alive.count({x, y, perm})) {
            fx = x;
            fy = y;
            fperm = perm;
            break;
          }
        if (fx >= 0) break;
        for (auto& perm : detail::candidate_isos(C, y, x))
          if (alive.count({y, x, perm})) {
            fx = y;
            fy = x;
            fperm = perm;
            break;
          }
      }
    if (fx < 0) break;
    if (witness)
      witness->folds.push_back(
          {C.states[fx].name, C.states[fy].name, fperm});
    C = reach(detail::fold_state(C, fx, fy, fperm));
  }
  return C;
}

struct InvarianceReport {
  bool ok = true;
  int checked = 0;
  std::vector<std::string> issues;
};

/// Diagnostic recomputation of the prefix divisors G[s] and their letter
/// derivatives: checks that G[s] divides every defined whole-word update
/// H[s,t], and that G[s] ⨟ (G[s] \ G[sa]) recovers G[sa] for every defined
/// extension. Both facts follow from divisor right-invariance, so failures
/// indicate a broken greatest-divisor computation.
inline InvarianceReport right_invariance_check(const Transducer& A,
                                               int maxlen) {
  InvarianceReport out;
  DivisorAssignment D = gcd_fixpoint(A);
  if (!A.init) return out;
  std::vector<std::string> sorted_letters = A.letters;
  std::sort(sorted_letters.begin(), sorted_letters.end());

  struct Node {
    std::vector<std::string> word;
    int state;
    Update accumulated;  // init ⨟ letters, from the initial type
  };
  std::vector<Node> layer{{{}, A.init->first, A.init->second}};
  auto word_str = [](const std::vector<std::string>& w) {
    std::string s;
    for (auto& a : w) s += a;
    return s.empty() ? std::string("<empty>") : s;
  };

  for (int len = 0; len <= maxlen && !layer.empty(); ++len) {
    for (auto& node : layer) {
      if (!D.f[node.state]) continue;
      Update g = compose(node.accumulated, *D.f[node.state]);
      ++out.checked;
      // G[s] divides every defined H[s,t] with |st| <= maxlen.
      std::vector<std::pair<int, Update>> suffix{{node.state,
          identity_update(A.kind, A.states[node.state].type)}};
      for (int tl = 0; tl + len <= maxlen && !suffix.empty(); ++tl) {
        for (auto& [q, acc] : suffix) {
          const Update* h = A.halt(q);
          if (!h) continue;
          Update whole = compose(node.accumulated, compose(acc, *h));
          auto res = residual_via_epi(g, whole);
          if (!res || compose(g, *res) != whole) {
            out.ok = false;
            out.issues.push_back("G[" + word_str(node.word) +
                                 "] does not divide a defined row entry");
          }
        }
        std::vector<std::pair<int, Update>> nxt;
        for (auto& [q, acc] : suffix)
          for (auto& a : sorted_letters) {
            const auto* t = A.transition(q, a);
            if (t) nxt.emplace_back(t->first, compose(acc, t->second));
          }
        suffix = std::move(nxt);
      }
      // G[sa] factors through G[s].
      for (auto& a : sorted_letters) {
        const auto* t = A.transition(node.state, a);
        if (!t || !D.f[t->first]) continue;
        Update g2 = compose(compose(node.accumulated, t->second), *D.f[t->first]);
        auto res = residual_via_epi(g, g2);
        if (!res || compose(g, *res) != g2) {
          out.ok = false;
          out.issues.push_back("G[" + word_str(node.word) + "] -" + a +
                               "-> derivative identity fails");
        }
      }
    }
    std::vector<Node> next;
    for (auto& node : layer)
      for (auto& a : sorted_letters) {
        const auto* t = A.transition(node.state, a);
        if (!t) continue;
        Node m;
        m.word = node.word;
        m.word.push_back(a);
        m.state = t->first;
        m.accumulated = compose(node.accumulated, t->second);
        next.push_back(std::move(m));
      }
    layer = std::move(next);
  }
  return out;
}

/// Structural isomorphism of transducers: a state bijection together with
/// per-state data isomorphisms commuting with all steps. Decided by a
/// backtracking match that grows outward from the initial states.
inline bool isomorphic(const Transducer& A, const Transducer& B) {
  if (A.kind != B.kind) return false;
  std::set<std::string> la(A.letters.begin(), A.letters.end());
  std::set<std::string> lb(B.letters.begin(), B.letters.end());
  if (la != lb) return false;
  if (A.states.size() != B.states.size()) return false;
  if (A.init.has_value() != B.init.has_value()) return false;
  if (!A.init) return true;

  std::vector<std::string> sorted_letters(la.begin(), la.end());
  int n = static_cast<int>(A.states.size());
  std::vector<int> sigma(n, -1), taken(n, 0);
  std::vector<std::vector<int>> iso(n);

  auto identity_perm = [](int tau) {
    std::vector<int> p(tau);
    for (int i = 0; i < tau; ++i) p[i] = i;
    return p;
  };

  // Data isomorphisms from A-state r onto B-state r2: permutations (identity
  // outside the free-term algebra) carrying the one domain onto the other.
  auto cross_isos = [&](int r, int r2) {
    std::vector<std::vector<int>> out;
    int tau = A.states[r].type;
    if (B.states[r2].type != tau) return out;
    if (A.kind != AlgebraKind::FreeTerm) {
      out.push_back(identity_perm(tau));
      return out;
    }
    if (tau > detail::kMaxIsoArity)
      throw TypeError("state arity " + std::to_string(tau) +
                      " exceeds the isomorphism enumeration cap of " +
                      std::to_string(detail::kMaxIsoArity));
    ConstrainedDomain dr = detail::domain_of(A, r);
    ConstrainedDomain dr2 = detail::domain_of(B, r2);
    std::vector<int> perm = identity_perm(tau);
    do {
      Update j = detail::perm_update(A.kind, tau, perm);
      if (closure_image(j, dr, A.output).same_solutions(dr2)) out.push_back(perm);
    } while (std::next_permutation(perm.begin(), perm.end()));
    return out;
  };

  // Square check at a matched state p, restricted to edges whose target is
  // already matched.
  auto squares_ok = [&](int p) {
    Update jp = detail::perm_update(A.kind, A.states[p].type, iso[p]);
    const Update* h = A.halt(p);
    const Update* h2 = B.halt(sigma[p]);
    if ((h == nullptr) != (h2 == nullptr)) return false;
    if (h && !detail::equal_mod_domain(A, p, *h, compose(jp, *h2))) return false;
    for (auto& a : sorted_letters) {
      const auto* t = A.transition(p, a);
      const auto* t2 = B.transition(sigma[p], a);
      if ((t == nullptr) != (t2 == nullptr)) return false;
      if (!t || sigma[t->first] < 0) continue;
      if (sigma[t->first] != t2->first) return false;
      Update lhs = compose(t->second,
                           detail::perm_update(A.kind, A.states[t->first].type,
                                               iso[t->first]));
      if (!detail::equal_mod_domain(A, p, lhs, compose(jp, t2->second)))
        return false;
    }
    return true;
  };

  auto all_squares_ok = [&]() {
    for (int p = 0; p < n; ++p)
      if (sigma[p] < 0 || !squares_ok(p)) return false;
    return true;
  };

  std::function<bool(std::vector<int>&)> extend =
      [&](std::vector<int>& matched) -> bool {
    for (int p : matched)
      for (auto& a : sorted_letters) {
        const auto* t = A.transition(p, a);
        if (!t || sigma[t->first] >= 0) continue;
        const auto* t2 = B.transition(sigma[p], a);
        if (!t2) return false;
        int r = t->first, r2 = t2->first;
        if (taken[r2]) return false;
        for (auto& perm : cross_isos(r, r2)) {
          sigma[r] = r2;
          taken[r2] = 1;
          iso[r] = perm;
          if (squares_ok(p) && squares_ok(r)) {
            matched.push_back(r);
            if (extend(matched)) return true;
            matched.pop_back();
          }
          sigma[r] = -1;
          taken[r2] = 0;
        }
        return false;  // this successor admits no witness
      }
    return static_cast<int>(matched.size()) == n && all_squares_ok();
  };

  int t0 = A.init->first, t0b = B.init->first;
  for (auto& perm : cross_isos(t0, t0b)) {
    Update j = detail::perm_update(A.kind, A.states[t0].type, perm);
    if (compose(A.init->second, j) != B.init->second) continue;
    sigma.assign(n, -1);
    taken.assign(n, 0);
    sigma[t0] = t0b;
    taken[t0b] = 1;
    iso[t0] = perm;
    std::vector<int> matched{t0};
    if (squares_ok(t0) && extend(matched)) return true;
  }
  return false;
}


/// Algebraic minimization: divisors, normalization, reachability closure,
/// then observational merging, iterated until the structure stabilizes. One
/// round is not always enough: merging states can pin registers to constant
/// values, and the next divisor pass then anticipates those constants. The
/// output realizes the same transduction, never has more states, and is
/// idempotent up to isomorphism.
inline Transducer minimize(const Transducer& A) {
  ValidationReport rep = validate(A);
  if (!rep.ok()) throw TypeError("invalid transducer: " + rep.issues.front());
  Transducer cur = merge_observational(reach(normalize(A, gcd_fixpoint(A))));
  for (int round = 0; round < 50; ++round) {
    Transducer next =
        merge_observational(reach(normalize(cur, gcd_fixpoint(cur))));
    if (isomorphic(next, cur)) return next;
    cur = std::move(next);
  }
  throw InternalError("minimization did not stabilize");
}

}  // namespace xdt
