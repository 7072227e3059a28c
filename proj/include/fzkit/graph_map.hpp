#pragma once

#include <boost/multiprecision/cpp_int.hpp>
#include <string>
#include <string_view>
#include <vector>

#include "fzkit/automorphism.hpp"
#include "fzkit/word.hpp"

namespace fzkit {

// Edge paths are Words whose letters are oriented edges: +(i+1) is edge i,
// -(i+1) its reverse. Free reduction of a composable sequence is tightening.
using EdgePath = Word;

inline int edge_index(int oe) { return gen_index(oe); }
inline int oriented(int e, bool reversed = false) { return reversed ? -(e + 1) : e + 1; }

struct GraphEdge {
  std::string name;
  int tail = 0;
  int head = 0;
  Word marking;  // image of the edge in the rose
};

class MarkedGraph {
 public:
  MarkedGraph() = default;
  // Rejects dangling edge endpoints and valence-1 vertices; checks that the
  // marking sends a spanning-tree loop basis to a basis of F_rank.
  MarkedGraph(int rank, int num_vertices, std::vector<GraphEdge> edges, int base = 0);
  static MarkedGraph rose(int rank);

  int rank() const { return rank_; }
  int num_vertices() const { return nv_; }
  int num_edges() const { return static_cast<int>(edges_.size()); }
  int base() const { return base_; }
  const GraphEdge& edge(int i) const { return edges_[static_cast<std::size_t>(i)]; }
  const std::vector<GraphEdge>& edges() const { return edges_; }

  int origin(int oe) const { return oe > 0 ? edge(edge_index(oe)).tail : edge(edge_index(oe)).head; }
  int terminus(int oe) const { return origin(-oe); }
  // Oriented edges whose origin is v (the directions at v).
  std::vector<int> directions(int v) const;
  int valence(int v) const { return static_cast<int>(directions(v).size()); }

  std::string edge_name(int oe) const;  // "~name" for the reverse
  int parse_edge(std::string_view token) const;
  std::string path_str(const EdgePath& p) const;
  EdgePath parse_path(std::string_view text) const;

  // Composability check followed by free reduction; throws NonComposable.
  EdgePath tighten(const std::vector<int>& raw) const;
  bool composable(const std::vector<int>& raw) const;
  int path_origin(const EdgePath& p, int fallback) const { return p.empty() ? fallback : origin(p.front()); }
  int path_terminus(const EdgePath& p, int fallback) const { return p.empty() ? fallback : terminus(p.back()); }

  // Word in F read along a path through the marking.
  Word read(const EdgePath& p) const;
  // Tree path from the base to v in a fixed BFS spanning tree.
  EdgePath tree_path(int v) const;
  // Loops at the base, one per non-tree edge, in edge order.
  std::vector<EdgePath> loop_basis() const;
  bool in_tree(int e) const { return tree_edge_[static_cast<std::size_t>(e)]; }

 private:
  void build_tree();
  int rank_ = 0;
  int nv_ = 0;
  int base_ = 0;
  std::vector<GraphEdge> edges_;
  std::vector<int> parent_edge_;  // oriented edge from the BFS parent, 0 at the base
  std::vector<bool> tree_edge_;
};

using IntMatrix = std::vector<std::vector<long>>;

class GraphSelfMap {
 public:
  GraphSelfMap() = default;
  // Edge images must be tight with endpoints matching the vertex map. Empty
  // images are rejected unless allow_collapse is set.
  GraphSelfMap(MarkedGraph g, std::vector<int> vertex_images, std::vector<EdgePath> edge_images, bool allow_collapse = false);
  static GraphSelfMap rose(const FreeAutomorphism& phi);
  static GraphSelfMap parse(std::string_view text);  // .gmap
  std::string serialize() const;

  const MarkedGraph& graph() const { return g_; }
  int vertex_image(int v) const { return vmap_[static_cast<std::size_t>(v)]; }
  const std::vector<int>& vertex_images() const { return vmap_; }
  EdgePath image(int oe) const;
  const std::vector<EdgePath>& edge_images() const { return images_; }
  bool is_collapse_map() const { return collapse_; }

  std::vector<int> image_raw(const EdgePath& p) const;
  // f^k_#(p).
  EdgePath map_path(const EdgePath& p, int k = 1) const;
  // Number of letters cancelled when tightening f(p).
  std::size_t cancellation(const EdgePath& p) const;
  // Df on directions: first edge of the image of an oriented edge, 0 if collapsed.
  int direction_image(int oe) const;

  IntMatrix transition_matrix() const;
  FreeAutomorphism induced_automorphism() const;
  GraphSelfMap compose(const GraphSelfMap& g) const;  // this o g
  GraphSelfMap power(int k) const;

 private:
  MarkedGraph g_;
  std::vector<int> vmap_;
  std::vector<EdgePath> images_;
  bool collapse_ = false;
};

// True iff f induces phi up to inner automorphisms.
bool realizes(const GraphSelfMap& f, const FreeAutomorphism& phi);

struct PFData {
  double lambda = 0;
  std::vector<double> vec;  // positive, l1-normalized right eigenvector
  double residual = 0;      // ||Mv - lambda v||_1
  int iterations = 0;
};

bool is_irreducible(const IntMatrix& m);
// Power iteration on M + I; throws NotIrreducible.
PFData pf_eigen(const IntMatrix& m, double tol = 1e-12);
IntMatrix transpose(const IntMatrix& m);
IntMatrix multiply(const IntMatrix& a, const IntMatrix& b);
// Faddeev-LeVerrier; coefficients of det(xI - M) from x^n down to x^0.
std::vector<boost::multiprecision::cpp_int> characteristic_polynomial(const IntMatrix& m);

enum class StratumKind { Zero, NEGFixed, NEGLinear, NEGNonlinear, EG };
const char* to_string(StratumKind k);

struct Stratum {
  std::vector<int> edges;  // sorted edge indices
  StratumKind kind = StratumKind::Zero;
  double lambda = 0;
  std::vector<double> lengths;  // EG: left PF eigenvector aligned with edges
  // NEG data: f(E) = E . suffix where E = oriented_edge.
  int oriented_edge = 0;
  EdgePath suffix;
  // Linear data: suffix = axis^exponent; axis is a closed root-free Nielsen
  // path oriented so its unoriented cyclic class is canonical.
  EdgePath axis;
  long exponent = 0;

  bool is_neg() const { return kind == StratumKind::NEGFixed || kind == StratumKind::NEGLinear || kind == StratumKind::NEGNonlinear; }
};

struct Stratification {
  std::vector<Stratum> strata;  // bottom to top
  std::vector<int> stratum_of_edge;
  int top_eg() const;  // index of the highest EG stratum, -1 if none
  // Edges in G_i (the union of strata 0..i).
  std::vector<int> filtration_edges(int i) const;
};

// Throws UnclassifiableStratum for blocks that are not zero, [1] or EG.
Stratification compute_stratification(const GraphSelfMap& f);

// Unoriented cyclic class of a closed edge path (for axis comparison).
CyclicWord axis_class(const EdgePath& closed);

}  // namespace fzkit
