#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "fzkit/automorphism.hpp"
#include "fzkit/errors.hpp"
#include "fzkit/word.hpp"

namespace fzkit {

enum class SplitVariant { Amalgam, HNN };
enum class EdgeClass { Free, Cyclic, MaximalCyclic };
const char* to_string(SplitVariant v);
const char* to_string(EdgeClass c);

// Amalgam: F = <v1> *_<edge> <v2>. HNN: F = <v1, stable> with edge and
// stable^-1 edge stable both in <v1>. An empty edge word is a free splitting.
struct OneEdgeSplitting {
  SplitVariant variant = SplitVariant::Amalgam;
  int rank = 0;
  std::vector<Word> v1, v2;
  Word edge;
  Word stable;

  static OneEdgeSplitting amalgam(int rank, std::vector<Word> v1, std::vector<Word> v2, Word edge);
  static OneEdgeSplitting hnn(int rank, std::vector<Word> v, Word stable, Word edge);
  static OneEdgeSplitting parse(std::string_view text);  // .split
  std::string serialize() const;

  // Edge word in the vertex groups, generation of F, and the Euler
  // characteristic count; throws PreconditionFailed.
  void validate() const;
  EdgeClass tag() const;
  // No edge-group inclusion is onto its vertex group.
  bool reduced() const;
  // Invariant under conjugating the whole splitting and re-choosing generators.
  std::string canonical() const;
};

// Fold a free splitting along w in vertex group `side` (0 or 1; HNN ignores it).
OneEdgeSplitting edge_fold(const OneEdgeSplitting& s, const Word& w, int side = 0);

bool is_elliptic(const CyclicWord& c, const OneEdgeSplitting& s);

enum class PairType { HH, EE, HE, EH };
const char* to_string(PairType p);
// First letter: s relative to t; second: t relative to s.
PairType pair_type(const OneEdgeSplitting& s, const OneEdgeSplitting& t);

OneEdgeSplitting apply_aut(const OneEdgeSplitting& s, const FreeAutomorphism& phi);
bool equivalent(const OneEdgeSplitting& s, const OneEdgeSplitting& t);

struct InvariantSplitting {
  int power = 0;
  OneEdgeSplitting splitting;
};

// Smallest k <= power_cap with phi^k(seed) equivalent to seed.
std::optional<InvariantSplitting> invariant_splitting_search(const FreeAutomorphism& phi, const OneEdgeSplitting& seed,
                                                             int power_cap);

// Cyclic splittings over the root of w when that root is primitive: the
// amalgams and HNN extensions read off a basis containing it.
std::vector<OneEdgeSplitting> seeds_from_class(const CyclicWord& w, int rank);

// Each standard generator as a word in gens (letter k stands for gens[k-1]);
// nullopt if gens do not generate F.
std::optional<std::vector<Word>> express_generators(const std::vector<Word>& gens, int rank);

// Amalgam: conjugation by the edge word on v1, identity on v2.
// HNN: identity on v1, stable -> edge * stable.
FreeAutomorphism dehn_twist(const OneEdgeSplitting& s);

// ---- graphs of groups -------------------------------------------------------

// Edge with cyclic group: alpha in G_from, omega in G_to, omega = stable^-1 alpha stable.
struct GoGEdge {
  int from = 0, to = 0;
  Word alpha, omega, stable;
};

struct GraphOfGroups {
  int rank = 0;
  std::vector<std::vector<Word>> vertex_groups;
  std::vector<GoGEdge> edges;

  static GraphOfGroups from_splitting(const OneEdgeSplitting& s);
  void validate() const;
  bool reduced() const;
  bool is_elliptic(const CyclicWord& c) const;
  // Edge data up to conjugacy inside the vertex groups, edge reversal and
  // inversion of the edge generator. Vertex groups are taken as given.
  std::string canonical() const;
};

// Slide the `f_end` end of f (0 = from, 1 = to) across e, leaving e at its
// `e_end` end. Throws PreconditionFailed.
GraphOfGroups slide(const GraphOfGroups& g, int e, int e_end, int f, int f_end);

struct SlideOrbit {
  std::vector<GraphOfGroups> members;  // first is the input
  bool capped = false;
};

SlideOrbit enumerate_slides(const GraphOfGroups& g, std::size_t cap = 10000);

}  // namespace fzkit
