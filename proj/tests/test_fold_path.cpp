#include <doctest.h>

#include <cmath>

#include "corpus.hpp"
#include "fzkit/fold_path.hpp"
#include "fzkit/stallings.hpp"
#include "oracles.hpp"

using namespace fzkit;

namespace {

QuadraticNumber q(long a, long b, long d, long den = 1) { return QuadraticNumber(Rational(a, den), Rational(b, den), d); }

Real mu_sum(const std::vector<Real>& lengths, const EdgePath& p) {
  Real s(0);
  for (int oe : p.letters()) s += lengths[static_cast<std::size_t>(edge_index(oe))];
  return s;
}

std::vector<Word> test_words(int rank) {
  std::vector<Word> out;
  for (const char* w : {"a", "b", "ab", "aB", "Ab", "abAB", "aab", "baa", "abb", "aBaB"}) out.push_back(Word::parse(w));
  if (rank >= 4) {
    out[5] = Word::parse("abcd");
    out[9] = Word::parse("cd");
  }
  return out;
}

// Legal paths of top edges with at most n edges starting with direction d.
void legal_paths(const GraphSelfMap& f, const CollapsedGraph& t, const GateStructure& gs, EdgePath cur, int n,
                 std::vector<EdgePath>& out) {
  out.push_back(cur);
  if (static_cast<int>(cur.size()) == n) return;
  int last = cur[cur.size() - 1];
  for (int e : t.edges)
    for (int d : {e + 1, -(e + 1)}) {
      if (f.graph().origin(d) != f.graph().terminus(last) || d == -last || gs.same_gate(-last, d)) continue;
      legal_paths(f, t, gs, cur * Word::reduce({d}), n, out);
    }
}

// Longest common image prefix over pairs of legal paths leaving an illegal turn.
Real bbt_brute(const GraphSelfMap& f, const CollapsedGraph& t, int n) {
  GateStructure gs = gates(f);
  Real best(0);
  std::vector<int> dirs;
  for (int e : t.edges) dirs.insert(dirs.end(), {e + 1, -(e + 1)});
  for (int a : dirs)
    for (int b : dirs) {
      if (a >= b || f.graph().origin(a) != f.graph().origin(b) || !gs.same_gate(a, b)) continue;
      std::vector<EdgePath> pa, pb;
      legal_paths(f, t, gs, Word::reduce({a}), n, pa);
      legal_paths(f, t, gs, Word::reduce({b}), n, pb);
      for (const auto& x : pa)
        for (const auto& y : pb) {
          EdgePath fx = f.map_path(x), fy = f.map_path(y);
          Real common(0);
          for (std::size_t i = 0; i < fx.size() && i < fy.size() && fx[i] == fy[i]; ++i)
            common += t.lengths[static_cast<std::size_t>(edge_index(fx[i]))];
          best = std::max(best, common);
        }
    }
  return best;
}

}  // namespace

TEST_CASE("quadratic numbers") {
  QuadraticNumber phi = q(1, 1, 5, 2);
  CHECK(phi * phi == phi + QuadraticNumber(1));
  CHECK(QuadraticNumber(1) / phi == phi - QuadraticNumber(1));
  CHECK(phi.norm() == -1);
  CHECK(pow(phi, -3) * pow(phi, 3) == QuadraticNumber(1));
  CHECK(phi.str() == "1/2 + 1/2*sqrt(5)");
  CHECK(q(0, -1, 2).str() == "-sqrt(2)");
  CHECK_THROWS_AS(q(1, 1, 2) + q(1, 1, 3), PreconditionFailed);
  CHECK_THROWS_AS(QuadraticNumber(1) / QuadraticNumber(0), PreconditionFailed);

  SUBCASE("arithmetic and order agree with doubles") {
    for (int t = 0; t < 2000; ++t) {
      long d = oracle::uniform(0, 1) ? 2 : 7;
      auto x = q(oracle::uniform(-20, 20), oracle::uniform(-20, 20), d, oracle::uniform(1, 6));
      auto y = q(oracle::uniform(-20, 20), oracle::uniform(-20, 20), d, oracle::uniform(1, 6));
      double xd = x.to_double(), yd = y.to_double();
      CHECK(std::abs((x + y).to_double() - (xd + yd)) < 1e-9);
      CHECK(std::abs((x * y).to_double() - xd * yd) < 1e-7);
      if (std::abs(xd - yd) > 1e-9) CHECK((x < y) == (xd < yd));
      if (y.sign() != 0) CHECK((x / y) * y == x);
      CHECK(x.sign() == (xd > 1e-12 ? 1 : xd < -1e-12 ? -1 : 0));
    }
  }
  SUBCASE("reals") {
    Real a(phi), b = Real::floating(phi.to_double());
    CHECK((a * a).is_exact());
    CHECK_FALSE((a * b).is_exact());
    CHECK(agree(a * a, b * b + Real::floating(1e-15)));
    CHECK_FALSE(agree(a, Real(phi + QuadraticNumber(Rational(1, 1000000)))));
  }
}

TEST_CASE("mu metric") {
  auto f = corpus::rose("examples_phi");
  auto s = compute_stratification(f);
  auto mu = mu_metric(f, s);
  REQUIRE(mu.mode == Arithmetic::Exact);
  CHECK(mu.lambda.exact() == q(3, 1, 5, 2));
  CHECK((mu.min_poly == std::vector<boost::multiprecision::cpp_int>{1, -3, 1}));
  // a and b on top, c and d below
  CHECK(mu.mu[2].exact() == QuadraticNumber(0));
  CHECK(mu.mu[3].exact() == QuadraticNumber(0));
  CHECK(mu.mu[0].exact() / mu.mu[1].exact() == q(-1, 1, 5, 2));
  // left eigenvector of the transition block, checked entry by entry
  IntMatrix m = f.transition_matrix();
  for (int j : {0, 1}) {
    Real lhs(0);
    for (int i : {0, 1}) lhs += Real(m[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)]) * mu.mu[static_cast<std::size_t>(i)];
    CHECK(agree(lhs, mu.lambda * mu.mu[static_cast<std::size_t>(j)]));
  }

  auto fl = mu_metric(f, s, Arithmetic::Float);
  CHECK(fl.mode == Arithmetic::Float);
  for (std::size_t e = 0; e < 4; ++e) CHECK(std::abs(fl.mu[e].to_double() - mu.mu[e].to_double()) < 1e-9);

  auto fib = corpus::rose("fibonacci");
  auto fm = mu_metric(fib, compute_stratification(fib));
  for (const auto& x : fm.mu) CHECK(x.exact().sign() > 0);

  auto twist = corpus::rose("dehn_twist");
  CHECK_THROWS_AS(mu_metric(twist, compute_stratification(twist)), PreconditionFailed);
}

TEST_CASE("collapse to T0 and translation lengths") {
  auto setup = fold_path_setup(corpus::rose("examples_phi"));
  const auto& t = setup.t0;
  REQUIRE(t.num_vertices() == 1);
  auto cd = CoreGraph::from_generators({Word::parse("c"), Word::parse("d")}, 4);
  CHECK(same_subgroup(CoreGraph::from_generators(t.vertex_groups[0], 4), cd));
  CHECK(translation_length(t, Word::parse("cdC")).exact() == QuadraticNumber(0));
  CHECK(translation_length(t, Word::parse("a")).exact() == QuadraticNumber(1));
  CHECK(translation_length(t, Word::parse("acA")).exact() == QuadraticNumber(0));
  CHECK(translation_length(t, Word::parse("acbd")).exact() == QuadraticNumber(1) + setup.mu.mu[1].exact());

  SUBCASE("zero exactly on vertex-group conjugates, bounded by word length") {
    double top = setup.mu.mu[1].to_double();
    for (int trial = 0; trial < 500; ++trial) {
      Word g = oracle::random_reduced(4, oracle::uniform(1, 10));
      Real l = translation_length(t, g);
      CHECK((l.exact().sign() == 0) == cd.contains_conjugate(CyclicWord(g)));
      CHECK(l.to_double() <= static_cast<double>(g.size()) * top + 1e-12);
    }
  }
  SUBCASE("a lower forest leaves trivial vertex groups") {
    auto forest = fold_path_setup(corpus::gmap("fibonacci_forest"));
    REQUIRE(forest.t0.num_vertices() == 1);
    CHECK(forest.t0.vertex_groups[0].empty());
    auto rose = fold_path_setup(corpus::rose("fibonacci"));
    for (const char* w : {"a", "b", "abAB", "aab"})
      CHECK(translation_length(forest.t0, Word::parse(w)).exact() ==
            translation_length(rose.t0, Word::parse(w)).exact());
  }
}

TEST_CASE("induced map on T0") {
  auto setup = fold_path_setup(corpus::rose("examples_phi"));
  CHECK((setup.f0.transition == IntMatrix{{1, 1}, {1, 2}}));
  CHECK(setup.f0.audit.size() == 4);

  auto bad = corpus::rose("rtt_iii_violator");
  auto s = compute_stratification(bad);
  auto mu = mu_metric(bad, s);
  auto t0 = collapse_T0(bad, s, mu);
  try {
    induced_f0(bad, s, t0, mu);
    FAIL("audit passed");
  } catch (const AuditFailed& e) {
    CHECK(std::string(e.what()).find("illegal turn (~a, b)") != std::string::npos);
  }

  SUBCASE("legal top paths stretch by exactly lambda") {
    auto gs = gates(setup.f);
    for (int trial = 0; trial < 100; ++trial) {
      std::vector<Letter> raw{oracle::uniform(0, 1) ? 1 : -1};
      while (static_cast<int>(raw.size()) < oracle::uniform(1, 12)) {
        std::vector<int> next;
        for (int d : {1, -1, 2, -2})
          if (d != -raw.back() && !gs.same_gate(-raw.back(), d)) next.push_back(d);
        if (next.empty()) break;
        raw.push_back(next[static_cast<std::size_t>(oracle::uniform(0, static_cast<int>(next.size()) - 1))]);
      }
      EdgePath p = Word::reduce(raw);
      CHECK(mu_sum(setup.t0.lengths, setup.f.map_path(p)).exact() ==
            (setup.mu.lambda * mu_sum(setup.t0.lengths, p)).exact());
    }
  }
}

TEST_CASE("bounded backtracking") {
  auto fib = fold_path_setup(corpus::rose("fibonacci"));
  CHECK(fib.bbt0.value.exact() == QuadraticNumber(1));
  CHECK(fib.bbt0.value.exact() == bbt_brute(fib.f, fib.t0, 5).exact());

  auto ex = fold_path_setup(corpus::rose("examples_phi"));
  CHECK(ex.bbt0.value.exact() == ex.mu.lambda.exact());
  CHECK(ex.bbt0.value.exact() == bbt_brute(ex.f, ex.t0, 4).exact());

  auto forest = fold_path_setup(corpus::gmap("fibonacci_forest"));
  CHECK(forest.bbt0.value.exact() == bbt_brute(forest.f, forest.t0, 5).exact());
}

TEST_CASE("fold path identity") {
  auto setup = fold_path_setup(corpus::rose("examples_phi"));
  auto words = test_words(4);
  auto st = fold_path_start(setup, words);
  std::vector<Word> images = words;
  Real lambda_i(1);
  for (int i = 1; i <= 12; ++i) {
    st = fold_path_advance(setup, st);
    lambda_i = lambda_i * setup.mu.lambda;
    for (auto& w : images) w = setup.phi.apply(w);
    for (std::size_t k = 0; k < words.size(); ++k) {
      REQUIRE(st.lengths[k].is_exact());
      CHECK((st.lengths[k] * lambda_i).exact() == translation_length(setup.t0, images[k]).exact());
    }
  }

  SUBCASE("float mode within 1e-9") {
    auto fs = fold_path_setup(corpus::rose("examples_phi"), Arithmetic::Float);
    auto fst = fold_path_start(fs, words);
    for (int i = 0; i < 12; ++i) fst = fold_path_advance(fs, fst);
    for (std::size_t k = 0; k < words.size(); ++k) {
      double want = translation_length(setup.t0, images[k]).to_double() / lambda_i.to_double();
      if (want == 0) CHECK(fst.lengths[k].to_double() == 0);
      else CHECK(std::abs(fst.lengths[k].to_double() / want - 1) < 1e-9);
    }
  }
}

TEST_CASE("fold path time") {
  auto setup = fold_path_setup(corpus::rose("fibonacci"));
  auto st = fold_path_start(setup, test_words(2));
  Real bound = time_bound(setup);
  const Real& lam = setup.mu.lambda;
  Real half_bbt = setup.bbt0.value / Real(2);
  std::vector<std::string> trace;
  for (int i = 1; i <= 20; ++i) {
    Real before = st.time;
    st = fold_path_advance(setup, st);
    CHECK(before < st.time);
    CHECK(st.time < bound);
    // |L - L_i| = half BBT lambda^(1-i) / (lambda - 1)
    CHECK((bound - st.time).exact() == (half_bbt * pow(lam, 1 - i) / (lam - Real(1))).exact());
    trace.push_back(st.time.str());
  }
  auto again = fold_path_start(setup, test_words(2));
  for (int i = 1; i <= 20; ++i) {
    again = fold_path_advance(setup, again);
    CHECK(again.time.str() == trace[static_cast<std::size_t>(i - 1)]);
  }
  for (std::size_t k = 0; k < st.lengths.size(); ++k) CHECK(st.lengths[k].str() == again.lengths[k].str());
}

TEST_CASE("limit diagnostics") {
  auto setup = fold_path_setup(corpus::rose("examples_phi"));
  auto d = limit_diagnostics(setup, {Word::parse("a"), Word::parse("cd"), Word::parse("bcA")});
  CHECK(d.repelling_decay_confirmed);
  double va24 = 0, va25 = 0;
  for (const auto& r : d.limit) {
    if (r.word == "cd") CHECK(r.value == 0);
    if (r.word == "a" && r.step == 24) va24 = r.value;
    if (r.word == "a" && r.step == 25) va25 = r.value;
  }
  CHECK(va25 > 0);
  CHECK(std::abs(va25 - va24) <= 1e-6 * va25);
  bool noted = false;
  for (const auto& n : d.notes) noted = noted || n == "cd: elliptic in T0";
  CHECK(noted);
  // decay rows fall geometrically
  double prev = 1e300;
  for (const auto& r : d.decay)
    if (r.word == "a") {
      CHECK(r.value < prev);
      prev = r.value;
    }
}
