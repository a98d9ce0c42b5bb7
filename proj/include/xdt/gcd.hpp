#pragma once

#include <algorithm>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "xdt/unify.hpp"
#include "xdt/update.hpp"

namespace xdt {

/// A common divisor of a set of updates together with the residuals that
/// recover each input: compose(gcd, residuals[i]) == U[i].
struct GcdResult {
  Update gcd;
  std::vector<Update> residuals;
};

/// Greatest common divisor of sequential updates: the longest common prefix
/// of the appended strings.
inline GcdResult lcp_gcd(const std::vector<Update>& U) {
  if (U.empty()) throw UsageError("gcd of an empty set");
  for (auto& u : U)
    if (u.kind() != AlgebraKind::Sequential)
      throw TypeError("lcp_gcd expects sequential updates");
  std::string lcp = U[0].seq_payload();
  for (auto& u : U) {
    const std::string& w = u.seq_payload();
    std::size_t n = 0;
    while (n < lcp.size() && n < w.size() && lcp[n] == w[n]) ++n;
    lcp.resize(n);
  }
  GcdResult out{Update::append(lcp), {}};
  for (auto& u : U)
    out.residuals.push_back(Update::append(u.seq_payload().substr(lcp.size())));
  return out;
}

namespace detail {

// Positionwise structural meet of n linear-term slices. Where all inputs
// carry the same symbol the meet keeps it; anywhere else it opens a
// placeholder and records each input's subterm as a residual slice.
inline Term lgg_meet(const std::vector<const Term*>& ts, int& next_placeholder,
                     std::vector<std::vector<Term>>& slices) {
  bool agree = !ts[0]->is_var();
  for (auto* t : ts)
    if (t->is_var() || t->symbol() != ts[0]->symbol() ||
        t->children().size() != ts[0]->children().size())
      agree = false;
  if (!agree) {
    ++next_placeholder;
    for (std::size_t j = 0; j < ts.size(); ++j) slices[j].push_back(*ts[j]);
    return Term::var(next_placeholder);
  }
  std::vector<Term> kids;
  for (std::size_t i = 0; i < ts[0]->children().size(); ++i) {
    std::vector<const Term*> sub;
    sub.reserve(ts.size());
    for (auto* t : ts) sub.push_back(&t->children()[i]);
    kids.push_back(lgg_meet(sub, next_placeholder, slices));
  }
  return Term::app(ts[0]->symbol(), std::move(kids));
}

inline LinearTerm as_linear_slice(const Term& t) {
  std::vector<int> occ;
  t.collect_vars(occ);
  int base = occ.empty() ? 0 : occ.front() - 1;
  return LinearTerm(shift_vars(t, -base));
}

}  // namespace detail

/// Least general generalization of leaf-substitution updates; it is their
/// greatest common divisor, and it is unique because placeholders are
/// anonymous and ordered.
inline GcdResult lgg(const std::vector<Update>& U) {
  if (U.empty()) throw UsageError("gcd of an empty set");
  for (auto& u : U) {
    if (u.kind() != AlgebraKind::LeafSubst)
      throw TypeError("lgg expects leaf-subst updates");
    if (u.in_type() != U[0].in_type())
      throw TypeError("lgg input types differ");
  }
  std::vector<LinearTerm> gcd_payload;
  std::vector<std::vector<Term>> slices(U.size());
  for (int i = 0; i < U[0].in_type(); ++i) {
    std::vector<const Term*> column;
    column.reserve(U.size());
    for (auto& u : U) column.push_back(&u.leaf_payload()[i].skeleton);
    int local = 0;
    Term skel = detail::lgg_meet(column, local, slices);
    LinearTerm comp;
    comp.skeleton = std::move(skel);
    comp.count = local;
    gcd_payload.push_back(std::move(comp));
  }
  GcdResult out{Update::leaf(std::move(gcd_payload)), {}};
  for (std::size_t j = 0; j < U.size(); ++j) {
    std::vector<LinearTerm> r;
    r.reserve(slices[j].size());
    for (auto& piece : slices[j]) r.push_back(detail::as_linear_slice(piece));
    out.residuals.push_back(Update::leaf(std::move(r)));
  }
  return out;
}

/// Embedding of the payload multiset of S into that of T; witnesses that S
/// divides T among copyless non-erasing free-term updates. When several
/// embeddings exist the leftmost-outermost one is returned.
inline std::optional<EmbeddingWitness> subterm_embedding(const Update& S,
                                                         const Update& T) {
  if (S.kind() != AlgebraKind::FreeTerm || T.kind() != AlgebraKind::FreeTerm)
    throw TypeError("subterm_embedding expects free-term updates");
  if (S.in_type() != T.in_type())
    throw TypeError("subterm_embedding input types differ");
  return detail::embed_multiset(S.free_payload(), T.free_payload());
}

namespace detail {

inline bool embeds_into_all(const std::vector<Term>& S,
                            const std::vector<Update>& U) {
  for (auto& u : U)
    if (!embed_multiset(S, u.free_payload())) return false;
  return true;
}

inline void collect_subterms(const Term& t, std::set<Term>& out) {
  out.insert(t);
  for (auto& k : t.children()) collect_subterms(k, out);
}

struct RenderLess {
  bool operator()(const Term& a, const Term& b) const {
    return a.render() < b.render();
  }
};

}  // namespace detail

/// Greatest common divisor of copyless non-erasing free-term updates with a
/// common input type. Starting from the identity, the divisor is repeatedly
/// extended — adding a shared ground element or wrapping existing elements
/// under a symbol — while it still divides every input; all maximal results
/// agree up to a permutation of components, and the returned one is
/// canonicalized by sorting components by their rendering.
inline GcdResult multiset_gcd(const std::vector<Update>& U,
                              const RankedAlphabet& alphabet) {
  if (U.empty()) throw UsageError("gcd of an empty set");
  for (auto& u : U) {
    if (u.kind() != AlgebraKind::FreeTerm)
      throw TypeError("multiset_gcd expects free-term updates");
    if (u.in_type() != U[0].in_type())
      throw TypeError("multiset_gcd input types differ");
    UpdateClass c = classify(u);
    if (!c.copyless || !c.non_erasing)
      throw TypeError("multiset_gcd requires copyless non-erasing updates");
  }
  const int alpha = U[0].in_type();

  // Ground candidate pool: ground subterms present in every input.
  std::set<Term> pool0;
  for (auto& t : U[0].free_payload()) detail::collect_subterms(t, pool0);
  std::vector<Term> pool;
  for (auto& t : pool0) {
    if (!t.is_ground()) continue;
    bool everywhere = true;
    for (auto& u : U)
      if (detail::occurrences(u.free_payload(), t).empty()) everywhere = false;
    if (everywhere) pool.push_back(t);
  }
  std::sort(pool.begin(), pool.end(), [](const Term& a, const Term& b) {
    if (a.size() != b.size()) return a.size() < b.size();
    return a.render() < b.render();
  });

  std::vector<Term> S;
  for (int i = 1; i <= alpha; ++i) S.push_back(Term::var(i));

  bool moved = true;
  while (moved) {
    moved = false;
    for (auto& t : pool) {
      std::vector<Term> ext = S;
      ext.push_back(t);
      if (detail::embeds_into_all(ext, U)) {
        S = std::move(ext);
        moved = true;
        break;
      }
    }
    if (moved) continue;
    for (auto& [name, rank] : alphabet.symbols()) {
      if (rank < 1 || rank > static_cast<int>(S.size())) continue;
      std::vector<int> idx(rank, 0);
      // ordered tuples of distinct element indices, in lexicographic order
      auto advance = [&]() {
        for (int p = rank - 1; p >= 0; --p) {
          if (++idx[p] < static_cast<int>(S.size())) return true;
          idx[p] = 0;
        }
        return false;
      };
      do {
        std::set<int> distinct(idx.begin(), idx.end());
        if (static_cast<int>(distinct.size()) != rank) continue;
        std::vector<Term> kids;
        for (int p : idx) kids.push_back(S[p]);
        std::vector<Term> ext;
        for (int e = 0; e < static_cast<int>(S.size()); ++e)
          if (!distinct.count(e)) ext.push_back(S[e]);
        ext.push_back(Term::app(name, std::move(kids)));
        if (detail::embeds_into_all(ext, U)) {
          S = std::move(ext);
          moved = true;
          break;
        }
      } while (advance());
      if (moved) break;
    }
  }

  std::stable_sort(S.begin(), S.end(), detail::RenderLess{});
  GcdResult out{Update::free(alpha, S), {}};
  for (auto& u : U) {
    auto r = residual_via_epi(out.gcd, u);
    if (!r) throw InternalError("gcd does not divide an input");
    out.residuals.push_back(*r);
  }
  return out;
}

/// Least common extension of two updates over the same input type: both S
/// and T divide it, and it divides every update divided by both. Built as a
/// two-level forest over the listed elements of S and T, largest first,
/// nesting each element into an earlier root of opposite origin whenever a
/// disjoint unused occurrence exists.
inline Update interpolant(const Update& S, const Update& T) {
  if (S.kind() != AlgebraKind::FreeTerm || T.kind() != AlgebraKind::FreeTerm)
    throw TypeError("interpolant expects free-term updates");
  if (S.in_type() != T.in_type())
    throw TypeError("interpolant input types differ");

  struct Item {
    Term t;
    int origin;  // 0 = S, 1 = T
  };
  std::vector<Item> items;
  for (auto& t : S.free_payload()) items.push_back({t, 0});
  for (auto& t : T.free_payload()) items.push_back({t, 1});
  std::stable_sort(items.begin(), items.end(), [](const Item& a, const Item& b) {
    if (a.t.size() != b.t.size()) return a.t.size() > b.t.size();
    return a.t.render() < b.t.render();
  });

  struct Root {
    std::size_t item;
    std::vector<std::vector<int>> used;  // occupied child occurrence paths
  };
  std::vector<Root> roots;
  auto disjoint_from_used = [](const std::vector<std::vector<int>>& used,
                               const std::vector<int>& path) {
    for (auto& p : used)
      if (detail::path_prefix(p, path) || detail::path_prefix(path, p))
        return false;
    return true;
  };

  for (std::size_t i = 0; i < items.size(); ++i) {
    bool attached = false;
    for (auto& r : roots) {
      if (items[r.item].origin == items[i].origin) continue;
      std::vector<Occurrence> occs =
          detail::occurrences({items[r.item].t}, items[i].t);
      for (auto& o : occs) {
        if (!disjoint_from_used(r.used, o.path)) continue;
        r.used.push_back(o.path);
        attached = true;
        break;
      }
      if (attached) break;
    }
    if (!attached) roots.push_back({i, {}});
  }

  std::vector<Term> payload;
  for (auto& r : roots) payload.push_back(items[r.item].t);
  std::stable_sort(payload.begin(), payload.end(), detail::RenderLess{});
  Update out = Update::free(S.in_type(), std::move(payload));
  UpdateClass c = classify(out);
  if (!c.copyless)
    throw TypeError("updates have no common extension");
  return out;
}

/// Kind dispatcher for greatest common divisors of finite update sets.
/// Inputs must share the kind and the input type; output types may differ,
/// as happens for the departing updates of one transducer state.
inline GcdResult gcd_of_updates(const std::vector<Update>& U,
                                const RankedAlphabet& alphabet) {
  if (U.empty()) throw UsageError("gcd of an empty set");
  switch (U[0].kind()) {
    case AlgebraKind::Sequential: return lcp_gcd(U);
    case AlgebraKind::LeafSubst: return lgg(U);
    case AlgebraKind::FreeTerm: return multiset_gcd(U, alphabet);
  }
  throw InternalError("bad kind");
}

/// A GCD made epi by constraining its codomain to the closure of its range.
/// Sequential and leaf-subst updates are epis onto the full type already;
/// for free-term updates the codomain is the closure of the payload's
/// parametric image.
struct EgcdResult {
  GcdResult g;
  ConstrainedDomain codomain;
};

inline EgcdResult egcd(const std::vector<Update>& U,
                       const RankedAlphabet& alphabet) {
  GcdResult g = gcd_of_updates(U, alphabet);
  if (g.gcd.kind() == AlgebraKind::FreeTerm) {
    ConstrainedDomain cod = closure_image(
        g.gcd, ConstrainedDomain::full(g.gcd.in_type()), alphabet);
    return {std::move(g), std::move(cod)};
  }
  return {std::move(g), ConstrainedDomain::full(g.gcd.out_type())};
}

}  // namespace xdt
