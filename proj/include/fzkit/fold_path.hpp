#pragma once

#include <string>
#include <vector>

#include "fzkit/automorphism.hpp"
#include "fzkit/graph_map.hpp"
#include "fzkit/quadratic.hpp"
#include "fzkit/train_track.hpp"

namespace fzkit {

enum class Arithmetic { Exact, Float };
const char* to_string(Arithmetic a);

// Edge lengths from the PF data of the top EG stratum, zero below it.
struct MuMeasure {
  int stratum = -1;
  Arithmetic mode = Arithmetic::Float;
  Real lambda;
  std::vector<Real> mu;                                // per edge, first top edge normalized to 1
  std::vector<boost::multiprecision::cpp_int> min_poly;  // of lambda, leading coefficient first; exact mode
  std::string note;                                    // why an exact request fell back to floats
};

// Exact mode needs lambda of degree <= 2; otherwise the result is in floats
// and says so. Throws PreconditionFailed without an EG stratum on top.
MuMeasure mu_metric(const GraphSelfMap& f, const Stratification& s, Arithmetic mode = Arithmetic::Exact);

// The graph of groups left after collapsing every edge below the top stratum.
struct CollapsedGraph {
  MarkedGraph graph;                              // the uncollapsed graph
  int stratum = -1;
  std::vector<int> component;                     // per vertex of graph: vertex of T0
  std::vector<int> edges;                         // top edges, the edges of T0
  std::vector<std::vector<Word>> vertex_groups;   // per vertex of T0, as subgroups of F
  std::vector<Real> lengths;                      // per edge of graph
  std::vector<EdgePath> generator_loops;          // loop at the base reading each generator
  int num_vertices() const { return static_cast<int>(vertex_groups.size()); }
};

CollapsedGraph collapse_T0(const GraphSelfMap& f, const Stratification& s, const MuMeasure& mu);

// Loops at the base whose markings read the standard generators.
std::vector<EdgePath> generator_loops(const MarkedGraph& g);

// Sum of lengths along the cyclically tightened loop of g; vertex-group
// letters cost nothing.
Real translation_length(const CollapsedGraph& t, const Word& g);

struct InducedMap {
  std::vector<EdgePath> images;   // f(E) for each top edge, collapsed edges dropped
  IntMatrix transition;           // on top edges
  std::vector<std::string> audit; // checks that passed
};

// f0 on T0. Throws AuditFailed with a witness when an edge image is not
// lambda times as long, the transition matrix differs from the top block,
// a vertex of T0 has fewer than two gates, or an iterated edge image crosses
// an illegal turn of the top stratum.
InducedMap induced_f0(const GraphSelfMap& f, const Stratification& s, const CollapsedGraph& t0, const MuMeasure& mu,
                      int iterates = 3);

struct BbtReport {
  Real value;
  std::pair<int, int> turn{0, 0};  // directions realizing it
  std::size_t states = 0;
};

// Longest common image prefix of two legal top-edge paths leaving an
// illegal turn, by synchronized traversal; throws AuditFailed on a cycle that
// gains length.
BbtReport bbt(const GraphSelfMap& f, const CollapsedGraph& t0, const GateStructure& gs);

struct FoldPathSetup {
  GraphSelfMap f;
  FreeAutomorphism phi;
  Stratification strata;
  MuMeasure mu;
  CollapsedGraph t0;
  InducedMap f0;
  BbtReport bbt0;
};

FoldPathSetup fold_path_setup(const GraphSelfMap& f, Arithmetic mode = Arithmetic::Exact);

// T_i = lambda^-i T0 phi^i with its marking carried by f^i.
struct FoldPathState {
  int index = 0;
  Real scale;                        // lambda^-i
  Real time;                         // L_i
  std::vector<EdgePath> marking;     // generator -> f^i_#(generator loop)
  std::vector<Word> test_words;
  std::vector<Word> images;          // phi^i(test word), for the independent check
  std::vector<Real> lengths;         // translation lengths in T_i
};

FoldPathState fold_path_start(const FoldPathSetup& setup, std::vector<Word> test_words);
Real translation_length(const FoldPathSetup& setup, const FoldPathState& state, const Word& g);
// One step; asserts l(T_{i+1}, g) = lambda^-(i+1) l(T0, phi^(i+1) g) on every
// test word (AuditFailed) and throws NumericUnderflow once a float scale
// drops below 1e-280.
FoldPathState fold_path_advance(const FoldPathSetup& setup, const FoldPathState& state);
// Upper bound for L: L_0 + BBT(f0) lambda / (2 (lambda - 1)).
Real time_bound(const FoldPathSetup& setup);

struct LimitRow {
  int step = 0;
  std::string word;
  double value = 0;
};

struct LimitDiagnostics {
  double lambda = 0;
  std::vector<LimitRow> limit;   // lambda^-i l0(phi^i g)
  std::vector<LimitRow> cauchy;  // |v_i - v_(i-1)|
  std::vector<LimitRow> decay;   // lambda^-m v(g) / |phi^-m g|
  std::vector<std::string> notes;
  bool repelling_decay_confirmed = false;
};

// Float diagnostics; once an iterate is a legal loop, later lengths come
// from the transition matrix. Throws InversionUnavailable if phi does not invert.
LimitDiagnostics limit_diagnostics(const FoldPathSetup& setup, const std::vector<Word>& words, int i_max = 25,
                                   int m_max = 12, double tolerance = 1e-3, std::size_t word_cap = 2000000);

}  // namespace fzkit
