#pragma once

#include <string>
#include <vector>

#include "fzkit/errors.hpp"
#include "fzkit/graph_map.hpp"

namespace fzkit {

// Directions are oriented edges; direction d sits at origin(d).
inline std::size_t dir_slot(int d) { return static_cast<std::size_t>(2 * edge_index(d) + (d < 0 ? 1 : 0)); }

struct GateStructure {
  std::vector<int> gate;  // per dir_slot; equal ids <=> same gate (ids are vertex-local)
  int refinements = 0;    // iterations of Df until the partition stopped changing
  bool same_gate(int d1, int d2) const { return gate[dir_slot(d1)] == gate[dir_slot(d2)]; }
  int num_gates_at(const MarkedGraph& g, int v) const;
};

GateStructure gates(const GraphSelfMap& f);
// One more refinement step leaves the partition unchanged.
bool gates_stable(const GraphSelfMap& f, const GateStructure& gs);

// Turn crossed between letters i and i+1 of p: (reverse of p[i], p[i+1]).
bool is_legal(const EdgePath& p, const GateStructure& gs);
// Only turns with both directions in stratum r count as illegal.
bool is_r_legal(const EdgePath& p, const GateStructure& gs, const Stratification& s, int r);
// Index of the first illegal turn (between letters i and i+1), -1 if none.
int first_illegal_turn(const EdgePath& p, const GateStructure& gs, const Stratification* s = nullptr, int r = -1);

struct AxiomResult {
  Status status = Status::unknown;
  std::string witness;  // always set on fail
  std::string note;
};

struct RttReport {
  struct PerStratum {
    int stratum = 0;
    AxiomResult rtt_i, rtt_ii, rtt_iii;
  };
  std::vector<PerStratum> strata;  // EG strata only
  bool all_pass() const;
};

struct RttCaps {
  int iterates = 4;
};

RttReport rtt_audit(const GraphSelfMap& f, const Stratification& s, const RttCaps& caps = {});

enum class NielsenKind { FixedEdge, EG, NEGFamily };
const char* to_string(NielsenKind k);

struct NielsenPathRecord {
  EdgePath path;
  int period = 1;
  bool indivisible = true;
  int height = -1;  // stratum index
  NielsenKind kind = NielsenKind::EG;
  std::string note;  // NEG families: "E w^k ~E for every k != 0"
};

struct InpCaps {
  int depth = 32;         // unfolding rounds per branch
  int path_length = 512;  // edges in either half
  int period = 4;
};

struct InpSearch {
  std::vector<NielsenPathRecord> records;
  std::vector<std::string> unknown;  // turns whose search hit a cap
  Status status = Status::pass;      // pass: every illegal turn resolved
};

InpSearch find_inps(const GraphSelfMap& f, const Stratification& s, const InpCaps& caps = {});

struct CtCaps {
  int iterates = 8;
  int split_iterates = 3;
  InpCaps inp;
};

struct CtAuditReport {
  AxiomResult rotationless, completely_split, filtration, vertices, periodic_edges, zero_strata, linear_edges,
      neg_nielsen_paths;
  RttReport rtt;
  std::vector<std::pair<std::string, const AxiomResult*>> axioms() const;
  bool all_pass() const;
};

CtAuditReport ct_audit(const GraphSelfMap& f, const Stratification& s, const CtCaps& caps = {});

struct ImproveResult {
  GraphSelfMap map;
  std::vector<std::string> moves;
  bool train_track = false;  // every vertex has at least two gates and no EG edge image is illegal
  bool budget_exhausted = false;
  std::string reducible;  // nonempty when an invariant subgraph stopped the process
};

// Valence-two erasure, invariant-forest collapse and folds of illegal turns,
// each accepted only when (lambda, edge count) strictly drops.
ImproveResult bh_improve(const GraphSelfMap& f, int budget = 50);

}  // namespace fzkit
