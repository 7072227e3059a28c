#pragma once

#include <boost/multiprecision/cpp_int.hpp>
#include <string>
#include <vector>

#include "fzkit/errors.hpp"
#include "fzkit/graph_map.hpp"
#include "fzkit/train_track.hpp"

namespace fzkit {

enum class UnitKind { SingleEdge, INP, ExceptionalPath, QEP, TakenConnecting, FixedEdge };
const char* to_string(UnitKind k);

struct SplittingUnit {
  UnitKind kind = UnitKind::SingleEdge;
  EdgePath path;
  int stratum = -1;  // SingleEdge, FixedEdge, TakenConnecting
  int record = -1;   // INP: index into the inventory
  // ExceptionalPath / QEP: path = first w^power ~last, first and last are the
  // oriented linear edges E_i and E_j.
  int first_stratum = -1, last_stratum = -1;
  long power = 0;
};

struct SplitCaps {
  int verify_iterates = 3;
  int retries = 2;  // further attempts on f_#(p), f_#^2(p), ...
  std::size_t max_length = 8192;
};

struct SplitResult {
  Status status = Status::unknown;  // pass: a verified splitting was found
  EdgePath path;                    // the path actually split (p or an iterate)
  int retries_used = 0;
  std::vector<SplittingUnit> units;
  int position = -1;  // where matching or verification broke down
  std::string note;
};

// Greedy left-to-right matching of maximal units, then verification that
// f^k_# of the path is the unreduced concatenation of f^k_# of the units.
SplitResult complete_split(const GraphSelfMap& f, const Stratification& s, const InpSearch& inps, const EdgePath& p,
                           const SplitCaps& caps = {});
// Unit images concatenate without cancellation for k = 1..iterates.
bool is_splitting(const GraphSelfMap& f, const std::vector<SplittingUnit>& units, int iterates);

// Merge E_i w^k ~E_j runs with exponents of opposite sign into QEP units.
std::vector<SplittingUnit> qe_coarsen(const std::vector<SplittingUnit>& units, const Stratification& s);

struct InteractionGraph {
  std::vector<int> vertices;  // stratum index of each vertex
  struct Arrow {
    int from = 0, to = 0;  // vertex indices
    EdgePath witness;      // kappa
    int iterate = 1;
  };
  std::vector<Arrow> arrows;
  std::vector<int> component;  // per vertex
  int num_components = 0;
  int main_component = -1;  // component of the highest vertex
  bool stable_under_iterate = true;
  Status status = Status::pass;  // unknown if some image did not split
  std::vector<std::string> notes;

  int vertex_of_stratum(int r) const;
};

struct BCaps {
  int iterate = 1;
  SplitCaps split;
  InpCaps inp;
};

InteractionGraph build_B(const GraphSelfMap& f, const Stratification& s, const InpSearch& inps, const BCaps& caps = {});

// Edge sets X_s, one per component of B.
std::vector<std::vector<int>> almost_invariant_subgraphs(const InteractionGraph& b, const Stratification& s,
                                                         const GraphSelfMap& f);

using BigInt = boost::multiprecision::cpp_int;

struct LatticeConstraint {
  int r = 0, s = 0, t = 0;  // components
  long di = 0, dj = 0;
  EdgePath witness;         // the QEP term
  // a_r (di - dj) = a_s di - a_t dj
  bool satisfied_by(const std::vector<BigInt>& a) const;
};

struct AdmissibleLattice {
  int dimension = 0;  // number of components
  std::vector<LatticeConstraint> constraints;
  std::vector<std::vector<BigInt>> basis;  // Hermite normal form rows
  int rank() const { return static_cast<int>(basis.size()); }
};

AdmissibleLattice admissible_lattice(const GraphSelfMap& f, const Stratification& s, const InpSearch& inps,
                                     const InteractionGraph& b, const SplitCaps& caps = {});
// Z-basis of {x : A x = 0} in Hermite normal form.
std::vector<std::vector<BigInt>> integer_kernel(const std::vector<std::vector<BigInt>>& rows, int columns);

// f_a: edges of X_i go to f_#^{a_i}(E), fixed edges stay. Throws
// InversionUnavailable for negative entries.
GraphSelfMap synthesize_generator(const GraphSelfMap& f, const Stratification& s, const InteractionGraph& b,
                                  const std::vector<long>& a);

struct DisintegrationReport {
  int rank = 0;
  Status status = Status::pass;
  InteractionGraph graph;
  std::vector<std::vector<int>> subgraphs;
  AdmissibleLattice lattice;
  std::vector<std::string> notes;
};

DisintegrationReport disintegration_rank(const GraphSelfMap& f, const BCaps& caps = {});

}  // namespace fzkit
