#pragma once

#include <algorithm>
#include <optional>
#include <string>
#include <vector>

#include "xdt/term.hpp"

namespace xdt {

enum class AlgebraKind { Sequential, LeafSubst, FreeTerm };

inline const char* kind_name(AlgebraKind k) {
  switch (k) {
    case AlgebraKind::Sequential: return "sequential";
    case AlgebraKind::LeafSubst: return "leaf-subst";
    case AlgebraKind::FreeTerm: return "free-term";
  }
  return "?";
}

/// A typed memory operation. Composition is in diagrammatic order: the
/// payload of compose(u, v) applies u first, then v.
///
///  - sequential:  in = out = 1, payload is the appended string
///  - leaf-subst:  payload is an in_type-tuple of linear terms with
///                 out_type placeholders in total
///  - free-term:   payload is an out_type-tuple of terms over x1..x_in;
///                 transducers restrict payloads to use each variable
///                 exactly once (copyless and non-erasing)
class Update {
 public:
  static Update append(std::string w) {
    Update u;
    u.kind_ = AlgebraKind::Sequential;
    u.in_ = u.out_ = 1;
    u.seq_ = std::move(w);
    return u;
  }

  static Update leaf(std::vector<LinearTerm> payload) {
    Update u;
    u.kind_ = AlgebraKind::LeafSubst;
    u.in_ = static_cast<int>(payload.size());
    u.out_ = 0;
    for (auto& t : payload) u.out_ += t.count;
    u.leaf_ = std::move(payload);
    return u;
  }

  static Update free(int in_type, std::vector<Term> payload) {
    Update u;
    u.kind_ = AlgebraKind::FreeTerm;
    u.in_ = in_type;
    u.out_ = static_cast<int>(payload.size());
    for (auto& t : payload)
      if (t.max_var() > in_type)
        throw TypeError("free-term payload uses x" +
                        std::to_string(t.max_var()) + " but input type is " +
                        std::to_string(in_type));
    u.free_ = std::move(payload);
    return u;
  }

  AlgebraKind kind() const { return kind_; }
  int in_type() const { return in_; }
  int out_type() const { return out_; }
  const std::string& seq_payload() const { return seq_; }
  const std::vector<LinearTerm>& leaf_payload() const { return leaf_; }
  const std::vector<Term>& free_payload() const { return free_; }

  bool operator==(const Update& o) const {
    return kind_ == o.kind_ && in_ == o.in_ && out_ == o.out_ &&
           seq_ == o.seq_ && leaf_ == o.leaf_ && free_ == o.free_;
  }
  bool operator!=(const Update& o) const { return !(*this == o); }
  bool operator<(const Update& o) const {
    if (kind_ != o.kind_) return kind_ < o.kind_;
    if (in_ != o.in_) return in_ < o.in_;
    if (out_ != o.out_) return out_ < o.out_;
    if (seq_ != o.seq_) return seq_ < o.seq_;
    if (leaf_ != o.leaf_) return leaf_ < o.leaf_;
    return free_ < o.free_;
  }

  std::string render() const {
    switch (kind_) {
      case AlgebraKind::Sequential: return "\"" + seq_ + "\"";
      case AlgebraKind::LeafSubst: {
        std::string s = "(";
        for (std::size_t i = 0; i < leaf_.size(); ++i) {
          if (i) s += ",";
          s += leaf_[i].render();
        }
        return s + ")";
      }
      case AlgebraKind::FreeTerm: {
        std::string s = "(";
        for (std::size_t i = 0; i < free_.size(); ++i) {
          if (i) s += ",";
          s += free_[i].render(VarStyle::X);
        }
        return s + ")";
      }
    }
    return "";
  }

 private:
  AlgebraKind kind_ = AlgebraKind::Sequential;
  int in_ = 1, out_ = 1;
  std::string seq_;
  std::vector<LinearTerm> leaf_;
  std::vector<Term> free_;
};

inline Update identity_update(AlgebraKind kind, int type) {
  switch (kind) {
    case AlgebraKind::Sequential:
      if (type != 1) throw TypeError("sequential data has type 1");
      return Update::append("");
    case AlgebraKind::LeafSubst: {
      std::vector<LinearTerm> payload(type, LinearTerm::placeholder());
      return Update::leaf(std::move(payload));
    }
    case AlgebraKind::FreeTerm: {
      std::vector<Term> payload;
      for (int i = 1; i <= type; ++i) payload.push_back(Term::var(i));
      return Update::free(type, std::move(payload));
    }
  }
  throw InternalError("bad kind");
}

/// One stored memory value.
///  - sequential: a string (type 1)
///  - leaf-subst: a linear term of type = placeholder count
///  - free-term:  a tuple of ground terms, type = arity
struct Data {
  AlgebraKind kind = AlgebraKind::Sequential;
  std::string str;
  LinearTerm lin;
  std::vector<Term> tup;

  static Data string(std::string s) {
    Data d;
    d.kind = AlgebraKind::Sequential;
    d.str = std::move(s);
    return d;
  }
  static Data linear(LinearTerm t) {
    Data d;
    d.kind = AlgebraKind::LeafSubst;
    d.lin = std::move(t);
    return d;
  }
  static Data tuple(std::vector<Term> ts) {
    for (auto& t : ts)
      if (!t.is_ground()) throw TypeError("free-term data must be ground");
    Data d;
    d.kind = AlgebraKind::FreeTerm;
    d.tup = std::move(ts);
    return d;
  }

  int type() const {
    switch (kind) {
      case AlgebraKind::Sequential: return 1;
      case AlgebraKind::LeafSubst: return lin.count;
      case AlgebraKind::FreeTerm: return static_cast<int>(tup.size());
    }
    return 0;
  }

  bool operator==(const Data& o) const {
    return kind == o.kind && str == o.str && lin == o.lin && tup == o.tup;
  }
  bool operator!=(const Data& o) const { return !(*this == o); }

  std::string render() const {
    switch (kind) {
      case AlgebraKind::Sequential: return str;
      case AlgebraKind::LeafSubst: return lin.render();
      case AlgebraKind::FreeTerm: {
        if (tup.size() == 1) return tup[0].render(VarStyle::X);
        std::string s = "(";
        for (std::size_t i = 0; i < tup.size(); ++i) {
          if (i) s += ",";
          s += tup[i].render(VarStyle::X);
        }
        return s + ")";
      }
    }
    return "";
  }
};

/// The initial datum of each algebra, together with its type.
inline Data initial_data(AlgebraKind kind) {
  switch (kind) {
    case AlgebraKind::Sequential: return Data::string("");
    case AlgebraKind::LeafSubst: return Data::linear(LinearTerm::placeholder());
    case AlgebraKind::FreeTerm: return Data::tuple({});
  }
  throw InternalError("bad kind");
}

inline int initial_type(AlgebraKind kind) {
  return kind == AlgebraKind::FreeTerm ? 0 : 1;
}

inline int halt_type(AlgebraKind kind) {
  return kind == AlgebraKind::LeafSubst ? 0 : 1;
}

inline Data apply(const Update& u, const Data& d) {
  if (u.kind() != d.kind) throw TypeError("update/data kind mismatch");
  if (u.in_type() != d.type())
    throw TypeError("update expects type " + std::to_string(u.in_type()) +
                    ", data has type " + std::to_string(d.type()));
  switch (u.kind()) {
    case AlgebraKind::Sequential: return Data::string(d.str + u.seq_payload());
    case AlgebraKind::LeafSubst:
      return Data::linear(leaf_substitute(d.lin, u.leaf_payload()));
    case AlgebraKind::FreeTerm: {
      std::vector<Term> out;
      out.reserve(u.free_payload().size());
      for (auto& c : u.free_payload()) out.push_back(substitute(c, d.tup));
      return Data::tuple(std::move(out));
    }
  }
  throw InternalError("bad kind");
}

inline Update compose(const Update& u, const Update& v) {
  if (u.kind() != v.kind()) throw TypeError("composing updates of different kinds");
  if (u.out_type() != v.in_type())
    throw TypeError("composition type mismatch: " + std::to_string(u.out_type()) +
                    " vs " + std::to_string(v.in_type()));
  switch (u.kind()) {
    case AlgebraKind::Sequential:
      return Update::append(u.seq_payload() + v.seq_payload());
    case AlgebraKind::LeafSubst: {
      // compose(u, v) maps d to (d[u])[v]; its payload extends each component
      // of u at the leaves by the matching slice of v.
      std::vector<LinearTerm> out;
      out.reserve(u.leaf_payload().size());
      int offset = 0;
      for (auto& comp : u.leaf_payload()) {
        std::vector<LinearTerm> slice(
            v.leaf_payload().begin() + offset,
            v.leaf_payload().begin() + offset + comp.count);
        out.push_back(leaf_substitute(comp, slice));
        offset += comp.count;
      }
      return Update::leaf(std::move(out));
    }
    case AlgebraKind::FreeTerm: {
      std::vector<Term> out;
      out.reserve(v.free_payload().size());
      for (auto& c : v.free_payload())
        out.push_back(substitute(c, u.free_payload()));
      return Update::free(u.in_type(), std::move(out));
    }
  }
  throw InternalError("bad kind");
}

struct UpdateClass {
  bool copyless = false;
  bool non_erasing = false;
  bool linear = false;
};

inline UpdateClass classify(const Update& u) {
  UpdateClass c;
  switch (u.kind()) {
    case AlgebraKind::Sequential:
      // The unary view: the single implicit variable occurs exactly once.
      c.copyless = c.non_erasing = c.linear = true;
      break;
    case AlgebraKind::LeafSubst:
      // Placeholders are ordered and occur exactly once by construction.
      c.copyless = c.non_erasing = c.linear = true;
      break;
    case AlgebraKind::FreeTerm: {
      std::vector<int> occ;
      for (auto& t : u.free_payload()) t.collect_vars(occ);
      std::vector<int> count(u.in_type() + 1, 0);
      for (int v : occ) count[v]++;
      c.copyless = c.non_erasing = true;
      for (int i = 1; i <= u.in_type(); ++i) {
        if (count[i] > 1) c.copyless = false;
        if (count[i] == 0) c.non_erasing = false;
      }
      c.linear = c.copyless && c.non_erasing;
      if (c.linear)
        for (std::size_t i = 0; i < occ.size(); ++i)
          if (occ[i] != static_cast<int>(i) + 1) c.linear = false;
      break;
    }
  }
  return c;
}

// ---------------------------------------------------------------------------
// Occurrence embeddings of one term multiset into another. An embedding
// maps every element of S to an occurrence of it inside T such that the
// occurrences are pairwise disjoint and jointly cover every variable of T.
// It witnesses that S divides T in the free term algebra.
// ---------------------------------------------------------------------------

struct Occurrence {
  int element = 0;          // index into T
  std::vector<int> path;    // child indices from the root of T[element]

  bool operator==(const Occurrence& o) const {
    return element == o.element && path == o.path;
  }
  bool operator<(const Occurrence& o) const {
    if (element != o.element) return element < o.element;
    return path < o.path;
  }
};

struct EmbeddingWitness {
  std::vector<Occurrence> assignment;  // one occurrence per element of S
};

namespace detail {

inline bool path_prefix(const std::vector<int>& a, const std::vector<int>& b) {
  if (a.size() > b.size()) return false;
  return std::equal(a.begin(), a.end(), b.begin());
}

inline bool occurrences_disjoint(const Occurrence& a, const Occurrence& b) {
  if (a.element != b.element) return true;
  return !path_prefix(a.path, b.path) && !path_prefix(b.path, a.path);
}

inline void all_occurrences_in(const Term& hay, const Term& needle,
                               int element, std::vector<int>& path,
                               std::vector<Occurrence>& out) {
  if (hay == needle) out.push_back({element, path});
  const auto& kids = hay.children();
  for (std::size_t i = 0; i < kids.size(); ++i) {
    path.push_back(static_cast<int>(i));
    all_occurrences_in(kids[i], needle, element, path, out);
    path.pop_back();
  }
}

// Occurrences of `needle` inside the multiset T, in (element, path)
// lexicographic order: leftmost-outermost within each element.
inline std::vector<Occurrence> occurrences(const std::vector<Term>& T,
                                           const Term& needle) {
  std::vector<Occurrence> out;
  std::vector<int> path;
  for (std::size_t e = 0; e < T.size(); ++e)
    all_occurrences_in(T[e], needle, static_cast<int>(e), path, out);
  return out;
}

inline int count_vars(const std::vector<Term>& ts) {
  std::vector<int> occ;
  for (auto& t : ts) t.collect_vars(occ);
  return static_cast<int>(occ.size());
}

// Backtracking search for an embedding of S into T over precomputed
// occurrence lists. Elements are assigned in order; candidates are scanned
// in (element, path) order, so the first witness found is the
// leftmost-outermost one. Equal elements of S are forced into increasing
// occurrence order, which breaks the permutation symmetry between them.
inline bool embed_search(const std::vector<std::vector<Occurrence>>& options,
                         const std::vector<int>& var_counts,
                         const std::vector<int>& prev_equal, std::size_t next,
                         int vars_needed, int vars_covered,
                         std::vector<Occurrence>& chosen) {
  if (next == options.size()) return vars_covered == vars_needed;
  for (const Occurrence& occ : options[next]) {
    if (prev_equal[next] >= 0 && !(chosen[prev_equal[next]] < occ)) continue;
    bool ok = true;
    for (const Occurrence& prev : chosen)
      if (!occurrences_disjoint(prev, occ)) {
        ok = false;
        break;
      }
    if (!ok) continue;
    chosen.push_back(occ);
    if (embed_search(options, var_counts, prev_equal, next + 1, vars_needed,
                     vars_covered + var_counts[next], chosen))
      return true;
    chosen.pop_back();
  }
  return false;
}

inline std::optional<EmbeddingWitness> embed_multiset(
    const std::vector<Term>& S, const std::vector<Term>& T) {
  std::vector<std::vector<Occurrence>> options;
  std::vector<int> var_counts, prev_equal;
  options.reserve(S.size());
  for (std::size_t i = 0; i < S.size(); ++i) {
    options.push_back(occurrences(T, S[i]));
    if (options.back().empty()) return std::nullopt;
    std::vector<int> vs;
    S[i].collect_vars(vs);
    var_counts.push_back(static_cast<int>(vs.size()));
    int pe = -1;
    for (int j = static_cast<int>(i) - 1; j >= 0; --j)
      if (S[j] == S[i]) {
        pe = j;
        break;
      }
    prev_equal.push_back(pe);
  }
  // Disjoint occurrences cannot share variable leaves, so coverage of all
  // of T's variables is equivalent to a count match.
  std::vector<Occurrence> chosen;
  if (embed_search(options, var_counts, prev_equal, 0, count_vars(T), 0,
                   chosen))
    return EmbeddingWitness{std::move(chosen)};
  return std::nullopt;
}

// Replaces, in each component of T, the chosen occurrence of S-element k by
// the variable x_{k+1}; the result is the residual payload.
inline Term residual_of_element(const Term& t, int element,
                                const std::vector<Occurrence>& chosen,
                                std::vector<int>& path) {
  for (std::size_t k = 0; k < chosen.size(); ++k)
    if (chosen[k].element == element && chosen[k].path == path)
      return Term::var(static_cast<int>(k) + 1);
  std::vector<Term> kids;
  kids.reserve(t.children().size());
  for (std::size_t i = 0; i < t.children().size(); ++i) {
    path.push_back(static_cast<int>(i));
    kids.push_back(residual_of_element(t.children()[i], element, chosen, path));
    path.pop_back();
  }
  return Term::app(t.symbol(), std::move(kids));
}

}  // namespace detail

/// Unique residual of u via an epi divisor g: the v with compose(g, v) == u,
/// or nullopt when g does not divide u.
inline std::optional<Update> residual_via_epi(const Update& g, const Update& u) {
  if (g.kind() != u.kind()) throw TypeError("residual kind mismatch");
  if (g.in_type() != u.in_type())
    throw TypeError("residual input type mismatch");
  switch (g.kind()) {
    case AlgebraKind::Sequential: {
      const std::string& a = g.seq_payload();
      const std::string& b = u.seq_payload();
      if (b.size() < a.size() || b.compare(0, a.size(), a) != 0)
        return std::nullopt;
      return Update::append(b.substr(a.size()));
    }
    case AlgebraKind::LeafSubst: {
      // Component-wise top-down match of g against u; the subterms of u at
      // g's placeholder positions, in order, form the residual tuple.
      // Placeholders of g are numbered per component; slot offset makes the
      // numbering global across the tuple.
      std::vector<LinearTerm> out(g.out_type());
      struct Walk {
        std::vector<LinearTerm>* out;
        int offset = 0;
        bool match(const Term& gt, const Term& ut) {
          if (gt.is_var()) {
            // u's placeholders inside this slice form a contiguous
            // left-to-right block; shift them down to 1..k.
            std::vector<int> occ;
            ut.collect_vars(occ);
            int base = occ.empty() ? 0 : occ.front() - 1;
            (*out)[offset + gt.var_index() - 1] =
                LinearTerm(detail::shift_vars(ut, -base));
            return true;
          }
          if (ut.is_var() || gt.symbol() != ut.symbol() ||
              gt.children().size() != ut.children().size())
            return false;
          for (std::size_t i = 0; i < gt.children().size(); ++i)
            if (!match(gt.children()[i], ut.children()[i])) return false;
          return true;
        }
      } walk{&out};
      if (g.leaf_payload().size() != u.leaf_payload().size()) return std::nullopt;
      for (std::size_t i = 0; i < g.leaf_payload().size(); ++i) {
        if (!walk.match(g.leaf_payload()[i].skeleton,
                        u.leaf_payload()[i].skeleton))
          return std::nullopt;
        walk.offset += g.leaf_payload()[i].count;
      }
      return Update::leaf(std::move(out));
    }
    case AlgebraKind::FreeTerm: {
      auto emb = detail::embed_multiset(g.free_payload(), u.free_payload());
      if (!emb) return std::nullopt;
      std::vector<Term> payload;
      payload.reserve(u.free_payload().size());
      std::vector<int> path;
      for (std::size_t e = 0; e < u.free_payload().size(); ++e)
        payload.push_back(detail::residual_of_element(
            u.free_payload()[e], static_cast<int>(e), emb->assignment, path));
      return Update::free(g.out_type(), std::move(payload));
    }
  }
  throw InternalError("bad kind");
}

}  // namespace xdt
