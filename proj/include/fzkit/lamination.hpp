#pragma once

#include <optional>
#include <string>
#include <vector>

#include "fzkit/graph_map.hpp"
#include "fzkit/splitting.hpp"
#include "fzkit/stallings.hpp"
#include "fzkit/whitehead.hpp"

namespace fzkit {

// f^k_#(E) for an edge E of an EG stratum.
struct LeafSegment {
  EdgePath path;
  int seed_edge = -1;
  int iterate = 0;
  int stratum = -1;
};

// First edge of the top EG stratum, -1 if there is none.
int default_seed_edge(const Stratification& s);
LeafSegment leaf_segment(const GraphSelfMap& f, const Stratification& s, int edge, int k);
// Largest iterate k <= max_iterate whose segment stays within max_length.
LeafSegment longest_leaf_segment(const GraphSelfMap& f, const Stratification& s, int edge, int max_iterate,
                                 std::size_t max_length);

// Every subsegment immerses into the cyclic core of G_A; read through the marking.
bool carried_by(const CoreGraph& ga, const MarkedGraph& g, const LeafSegment& seg);

struct FixedClass {
  int power = 0;  // least k with [phi^k(w)] = [w]
  CyclicWord word;
};

struct FixedClassSearch {
  std::vector<FixedClass> classes;  // by length, then letter order
  int length_cap = 0;
  int power_cap = 0;
  std::size_t candidates = 0;  // words reaching the conjugacy test
  std::size_t nodes = 0;
  bool complete = true;        // false when the node budget stopped the enumeration
};

// Every cyclic word of length <= length_cap (each orientation separately)
// with [phi^k(w)] = [w] for some 1 <= k <= power_cap.
FixedClassSearch fixed_class_search(const FreeAutomorphism& phi, int length_cap, int power_cap,
                                    std::size_t node_budget = 200000000);

enum class FillingVerdict { FillingEvidence, NotFilling, ZFillingEvidence, NotZFilling, Inconclusive };
const char* to_string(FillingVerdict v);

struct FillingCaps {
  int leaf_iterate = 10;
  std::size_t leaf_length = 4096;
  int fixed_length = 12;
  int fixed_power = 2;
  std::size_t fixed_nodes = 200000000;
  int splitting_power = 6;
  std::size_t seed_classes = 16;
  WhiteheadCaps whitehead{64, 100000};
};

struct VertexGroupCarrying {
  OneEdgeSplitting splitting;
  bool carried = false;
  std::optional<int> invariant_power;
};

struct FillingReport {
  FillingVerdict overall = FillingVerdict::Inconclusive;
  std::string witness;
  std::vector<Word> factor_basis;                  // NotFilling witness
  std::optional<OneEdgeSplitting> splitting;       // NotZFilling witness
  LeafSegment leaf;
  std::optional<CarrierVerdict> free_factor;
  std::vector<VertexGroupCarrying> vertex_groups;  // supplied and seeded splittings
  FixedClassSearch fixed;
  std::vector<EdgePath> closed_inps;               // closed Nielsen loops of the top stratum
  std::vector<std::string> notes;
  FillingCaps caps;
};

FillingReport filling_report(const GraphSelfMap& f, const FreeAutomorphism& phi,
                             const std::vector<OneEdgeSplitting>& splittings = {}, const FillingCaps& caps = {});

}  // namespace fzkit
