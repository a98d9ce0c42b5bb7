#include <catch2/catch_amalgamated.hpp>

#include "helpers.hpp"
#include "xdt/term.hpp"

using namespace xdt;
using testutil::Rng;

TEST_CASE("substitution replaces every occurrence simultaneously", "[term]") {
  // t = a(x1,x2,x1), u = (b, c(x3))
  Term t = parse_term("a(x1,x2,x1)", TermSyntax::Vars);
  std::vector<Term> u{parse_term("b", TermSyntax::Vars),
                      parse_term("c(x3)", TermSyntax::Vars)};
  CHECK(substitute(t, u).render() == "a(b,c(x3),b)");

  CHECK(substitute(parse_term("x1", TermSyntax::Vars),
                   {parse_term("c(d)", TermSyntax::Vars)})
            .render() == "c(d)");

  Term ground = parse_term("a(b,b)", TermSyntax::Vars);
  CHECK(substitute(ground, {}) == ground);

  CHECK_THROWS_AS(substitute(parse_term("x2", TermSyntax::Vars),
                             {parse_term("b", TermSyntax::Vars)}),
                  TypeError);
}

TEST_CASE("substitution agrees with a direct recursive oracle", "[term]") {
  Rng rng(7);
  RankedAlphabet g = testutil::wide_alphabet();
  for (int i = 0; i < 200; ++i) {
    Term t = testutil::term_with_vars(rng, g, {1, 2}, 3);
    std::vector<Term> u{testutil::ground_term(rng, g, 2),
                        testutil::ground_term(rng, g, 2)};
    CHECK(substitute(t, u) == testutil::oracle_substitute(t, u));
  }
}

TEST_CASE("substitution composition law", "[term]") {
  Rng rng(11);
  RankedAlphabet g = testutil::wide_alphabet();
  for (int i = 0; i < 100; ++i) {
    Term t = testutil::term_with_vars(rng, g, {1, 2}, 2);
    std::vector<Term> u{testutil::term_with_vars(rng, g, {1}, 2),
                        testutil::term_with_vars(rng, g, {2}, 2)};
    std::vector<Term> w{testutil::ground_term(rng, g, 2),
                        testutil::ground_term(rng, g, 2)};
    std::vector<Term> uw;
    for (auto& ui : u) uw.push_back(substitute(ui, w));
    CHECK(substitute(substitute(t, u), w) == substitute(t, uw));
  }
}

TEST_CASE("distinct tuples substitute to distinct terms", "[term]") {
  // non-overlap: t[u] = t[v] forces u = v whenever t mentions every variable
  Rng rng(13);
  RankedAlphabet g = testutil::wide_alphabet();
  for (int i = 0; i < 300; ++i) {
    Term t = testutil::term_with_vars(rng, g, {1, 2}, 3);
    std::vector<Term> u{testutil::ground_term(rng, g, 2),
                        testutil::ground_term(rng, g, 2)};
    std::vector<Term> v{testutil::ground_term(rng, g, 2),
                        testutil::ground_term(rng, g, 2)};
    if (u == v) continue;
    CHECK(substitute(t, u) != substitute(t, v));
  }
}

TEST_CASE("leaf substitution splices and renumbers", "[term]") {
  LinearTerm t = parse_linear_term("c(_,_)");
  LinearTerm a = parse_linear_term("a");
  LinearTerm hole = parse_linear_term("_");
  LinearTerm r = leaf_substitute(t, {a, hole});
  CHECK(r.render() == "c(a,_)");
  CHECK(r.count == 1);

  CHECK(leaf_substitute(parse_linear_term("_"), {parse_linear_term("s")})
            .render() == "s");

  LinearTerm keep = parse_linear_term("c(_,d)");
  CHECK(leaf_substitute(keep, {hole}) == keep);

  CHECK_THROWS_AS(leaf_substitute(t, {a}), TypeError);
}

TEST_CASE("leaf substitution agrees with recursive splicing oracle", "[term]") {
  // oracle: substitute into the skeleton with shifted placeholder blocks
  Rng rng(17);
  RankedAlphabet g = testutil::wide_alphabet();
  for (int i = 0; i < 200; ++i) {
    LinearTerm t = testutil::linear_term(rng, g, testutil::pick(rng, 0, 3), 2);
    std::vector<LinearTerm> u;
    int total = 0;
    for (int k = 0; k < t.count; ++k) {
      u.push_back(testutil::linear_term(rng, g, testutil::pick(rng, 0, 2), 2));
      total += u.back().count;
    }
    LinearTerm got = leaf_substitute(t, u);
    std::vector<Term> pieces;
    int off = 0;
    for (auto& ui : u) {
      pieces.push_back(xdt::detail::shift_vars(ui.skeleton, off));
      off += ui.count;
    }
    CHECK(got.count == total);
    if (t.count > 0)
      CHECK(got.skeleton == testutil::oracle_substitute(t.skeleton, pieces));
  }
}

TEST_CASE("leaf substitution is associative", "[term]") {
  Rng rng(19);
  RankedAlphabet g = testutil::wide_alphabet();
  for (int i = 0; i < 150; ++i) {
    LinearTerm t = testutil::linear_term(rng, g, testutil::pick(rng, 1, 3), 2);
    std::vector<LinearTerm> u;
    for (int k = 0; k < t.count; ++k)
      u.push_back(testutil::linear_term(rng, g, testutil::pick(rng, 0, 2), 2));
    LinearTerm tu = leaf_substitute(t, u);
    std::vector<LinearTerm> w;
    for (int k = 0; k < tu.count; ++k)
      w.push_back(testutil::linear_term(rng, g, testutil::pick(rng, 0, 1), 2));
    // (t[u])[w] = t[u[w sliced]]
    std::vector<LinearTerm> uw;
    int off = 0;
    for (auto& ui : u) {
      std::vector<LinearTerm> slice(w.begin() + off, w.begin() + off + ui.count);
      uw.push_back(leaf_substitute(ui, slice));
      off += ui.count;
    }
    CHECK(leaf_substitute(tu, w) == leaf_substitute(t, uw));
  }
}

TEST_CASE("linearity scan", "[term]") {
  CHECK(check_linear(parse_term("c(_,_)", TermSyntax::Placeholders)).linear);
  CHECK(check_linear(parse_term("c(_,_)", TermSyntax::Placeholders)).count == 2);

  LinearCheck bad = check_linear(parse_term("c(x2,x1)", TermSyntax::Vars));
  CHECK_FALSE(bad.linear);

  LinearCheck deep = check_linear(parse_term("c(_,c(_,_))", TermSyntax::Placeholders));
  CHECK(deep.linear);
  CHECK(deep.count == 3);

  CHECK_FALSE(check_linear(parse_term("c(x1,x1)", TermSyntax::Vars)).linear);
}

TEST_CASE("term parsing and rendering round-trip", "[term]") {
  RankedAlphabet g;
  g.add("a", 3);
  g.add("b", 0);
  g.add("c", 1);
  Term t = parse_term("a(b,c(x3),b)", TermSyntax::Vars, &g);
  CHECK(t.symbol() == "a");
  CHECK(t.children().size() == 3);
  CHECK(t.render() == "a(b,c(x3),b)");
  CHECK(parse_term(t.render(), TermSyntax::Vars, &g) == t);

  Term hole = parse_term("_", TermSyntax::Placeholders);
  CHECK(hole.is_var());
  CHECK(LinearTerm(hole).count == 1);

  try {
    parse_term("a(b,", TermSyntax::Vars);
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.offset == 4);
  }

  CHECK_THROWS_AS(parse_term("a(b)", TermSyntax::Vars, &g), ParseError);
  CHECK_THROWS_AS(parse_term("z", TermSyntax::Vars, &g), ParseError);
  CHECK_THROWS_AS(parse_term("y1", TermSyntax::Vars), ParseError);
  CHECK_THROWS_AS(parse_term("c(_,x1)", TermSyntax::Vars), ParseError);
}

TEST_CASE("alphabet invariants", "[term]") {
  RankedAlphabet g;
  g.add("f", 2);
  CHECK_THROWS_AS(g.add("f", 1), TypeError);
  g.add("f", 2);  // same rank is fine
  CHECK_THROWS_AS(g.add("x1", 0), TypeError);
  CHECK_THROWS_AS(g.add("_", 0), TypeError);
  CHECK_FALSE(g.has_nullary());
  g.add("e", 0);
  CHECK(g.has_nullary());
}
