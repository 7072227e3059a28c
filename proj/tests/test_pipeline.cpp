#include <doctest.h>

#include "corpus.hpp"
#include "fzkit/pipeline.hpp"

using namespace fzkit;

namespace {

OneEdgeSplitting split(const std::string& name) { return OneEdgeSplitting::parse(corpus::read(name + ".split")); }

PipelineCaps small_caps() {
  PipelineCaps c;
  c.filling.fixed_length = 8;
  return c;
}

}  // namespace

TEST_CASE("classify proves twists elliptic") {
  auto rep = classify(corpus::rose("dehn_twist"));
  CHECK(rep.verdict == Verdict::EllipticProven);
  REQUIRE(rep.splitting.found);
  CHECK(rep.reverified);
  CHECK(rep.splitting.found->power == 1);
  const auto& s = rep.splitting.found->splitting;
  CHECK(CyclicWord(s.edge) == CyclicWord::parse("a"));
  CHECK(equivalent(apply_aut(s, corpus::aut("dehn_twist")), s));
  CHECK(rep.filling.overall == FillingVerdict::NotFilling);
  CHECK(rep.strata.size() >= 2);

  auto partner = classify(corpus::rose("twist_partner"));
  CHECK(partner.verdict == Verdict::EllipticProven);
  REQUIRE(partner.splitting.found);
  CHECK(equivalent(partner.splitting.found->splitting, split("chain_bc")));
}

TEST_CASE("classify uses supplied splittings") {
  auto rep = classify(corpus::rose("fixed_splitting"), {}, {split("fixed_splitting")});
  CHECK(rep.filling.overall == FillingVerdict::NotZFilling);
  CHECK(rep.verdict == Verdict::EllipticProven);
  REQUIRE(rep.splitting.found);
  CHECK(equivalent(rep.splitting.found->splitting, split("fixed_splitting")));
}

TEST_CASE("classify evidence verdicts") {
  SUBCASE("bounded orbit analog") {
    auto rep = classify(corpus::rose("bounded_orbit_analog"), small_caps());
    CHECK(rep.verdict == Verdict::BoundedOrbitEvidence);
    CHECK_FALSE(rep.splitting.found);
    CHECK(rep.caps.filling.fixed_length == 8);
    CHECK(rep.reason.rfind("NotFilling", 0) == 0);
  }
  SUBCASE("periodic commutators keep the Examples map undecided") {
    auto rep = classify(corpus::rose("examples_phi"), small_caps());
    CHECK(rep.verdict == Verdict::Inconclusive);
    CHECK(rep.filling.overall == FillingVerdict::FillingEvidence);
    CHECK(rep.disintegration_rank == 1);
    CHECK(rep.reason.find("periodic classes") != std::string::npos);
    auto again = classify(corpus::rose("examples_phi"), small_caps());
    CHECK(again.reason == rep.reason);
    CHECK(again.input == rep.input);
  }
  SUBCASE("preconditions") {
    CHECK_THROWS_AS(classify(corpus::rose("fibonacci")), PreconditionFailed);
    CHECK_THROWS_AS(classify(corpus::rose("swap")), NotARepresentative);
  }
}

TEST_CASE("proven verdicts survive other caps") {
  for (int probe : {1, 2, 4})
    for (int len : {4, 6, 8}) {
      PipelineCaps c;
      c.probe_length = probe;
      c.filling.fixed_length = len;
      for (const char* name : {"dehn_twist", "twist_partner", "linear_abc"}) {
        CAPTURE(name);
        auto rep = classify(corpus::rose(name), c);
        CHECK(rep.verdict == Verdict::EllipticProven);
        REQUIRE(rep.splitting.found);
        CHECK(reverify(corpus::aut(name), *rep.splitting.found));
      }
    }
}

TEST_CASE("centralizer probe") {
  auto rep = centralizer_probe(corpus::rose("twist_partner"));
  REQUIRE(rep.twist);
  REQUIRE(rep.conjugator);
  auto phi = corpus::aut("twist_partner");
  int k = rep.splitting->power;
  auto comm = compose(compose(*rep.twist, power(phi, k)), compose(invert(*rep.twist), invert(power(phi, k))));
  CHECK(comm == conjugation(3, *rep.conjugator));
  CHECK(rep.disintegration_rank == 2);

  auto id = centralizer_probe(GraphSelfMap::rose(FreeAutomorphism::identity(3)));
  CHECK(id.trivial);
  CHECK_FALSE(id.twist);

  auto ex = centralizer_probe(corpus::rose("examples_phi"), small_caps());
  CHECK(ex.disintegration_rank == 1);
  CHECK_FALSE(ex.twist);
}
