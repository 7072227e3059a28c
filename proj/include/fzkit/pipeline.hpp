#pragma once

#include <optional>
#include <string>
#include <vector>

#include "fzkit/automorphism.hpp"
#include "fzkit/disintegration.hpp"
#include "fzkit/graph_map.hpp"
#include "fzkit/lamination.hpp"
#include "fzkit/splitting.hpp"

namespace fzkit {

enum class Verdict { LoxodromicCandidate, EllipticProven, BoundedOrbitEvidence, Inconclusive };
const char* to_string(Verdict v);

struct PipelineCaps {
  FillingCaps filling;
  int probe_length = 4;  // short fixed-class search tried before the full one
  BCaps disintegration;
};

struct StratumSummary {
  int index = 0;
  StratumKind kind = StratumKind::Zero;
  double lambda = 0;
  std::vector<std::string> edges;
};

std::vector<StratumSummary> summarize(const GraphSelfMap& f, const Stratification& s);

struct SplittingSearch {
  std::optional<InvariantSplitting> found;
  std::size_t candidates = 0;   // distinct splittings tested
  std::vector<int> lengths;     // fixed-class search lengths used for seeds
  std::vector<std::string> notes;
};

// Supplied splittings first, then seeds from periodic classes found at
// probe_length and, when that fails, at the full fixed-class length.
SplittingSearch find_invariant_splitting(const FreeAutomorphism& phi, const std::vector<OneEdgeSplitting>& supplied,
                                         const PipelineCaps& caps, const FixedClassSearch* known = nullptr);

// phi^k(S) equivalent to S, recomputed from scratch.
bool reverify(const FreeAutomorphism& phi, const InvariantSplitting& s);

struct ClassificationReport {
  std::string input;  // the map as given
  int rank = 0;
  std::vector<StratumSummary> strata;
  FillingReport filling;
  SplittingSearch splitting;
  bool reverified = false;
  int disintegration_rank = 0;
  Status disintegration_status = Status::unknown;
  Verdict verdict = Verdict::Inconclusive;
  std::string reason;
  PipelineCaps caps;
};

// Throws PreconditionFailed for rank < 3 and NotARepresentative when the
// map cannot be stratified.
ClassificationReport classify(const GraphSelfMap& f, const PipelineCaps& caps = {},
                              const std::vector<OneEdgeSplitting>& splittings = {});

struct CentralizerReport {
  int disintegration_rank = 0;
  Status disintegration_status = Status::unknown;
  bool trivial = false;  // phi is inner
  std::optional<InvariantSplitting> splitting;
  std::optional<FreeAutomorphism> twist;
  std::optional<Word> conjugator;  // D phi^k D^-1 phi^-k is conjugation by this word
  std::vector<std::string> notes;
};

CentralizerReport centralizer_probe(const GraphSelfMap& f, const PipelineCaps& caps = {},
                                    const std::vector<OneEdgeSplitting>& splittings = {});

}  // namespace fzkit
