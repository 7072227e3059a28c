#pragma once

#include <optional>
#include <string>
#include <vector>

#include "fzkit/word.hpp"

namespace fzkit {

// Folded labeled graph; vertex 0 is the base. Arrays are indexed by letter_key,
// so an x-edge u->v is stored as out(u)[key x] = v and out(v)[key x^-1] = u.
class CoreGraph {
 public:
  CoreGraph() = default;
  static CoreGraph from_generators(const std::vector<Word>& gens, int rank);
  // Folded graph given directly; out[v][key] = target or -1. Checks the involution.
  static CoreGraph from_adjacency(int rank, std::vector<std::vector<int>> out);

  int rank_alphabet() const { return rank_; }
  int num_vertices() const { return static_cast<int>(out_.size()); }
  int num_edges() const;  // unoriented
  int target(int v, Letter x) const { return out_[static_cast<std::size_t>(v)][static_cast<std::size_t>(letter_key(x))]; }
  int degree(int v) const;
  const std::vector<std::vector<int>>& adjacency() const { return out_; }

  // End vertex of reading w from v, or -1.
  int read(int v, const Word& w) const;
  bool contains(const Word& w) const { return read(0, w) == 0; }
  bool contains_conjugate(const CyclicWord& c) const;
  bool immerses_segment(const Word& w) const;
  int rank() const { return num_edges() - num_vertices() + 1; }

  // Strip valence-1 vertices other than the base.
  CoreGraph core() const;
  // Also strip the base; the result represents the conjugacy class.
  CoreGraph cyclic_core() const;
  CoreGraph rebased(int v) const;

  // Breadth-first relabelling from the base in letter order.
  std::string canonical() const;
  // Minimum canonical form over all base points of the cyclic core.
  std::string conjugacy_canonical() const;
  // Label of a shortest path from the base to v.
  Word path_to(int v) const;
  std::vector<Word> basis() const;  // free basis read off a BFS spanning tree
  bool is_whole_group() const;      // single vertex carrying every letter
  std::string str() const;          // deterministic adjacency listing

 private:
  int rank_ = 0;
  std::vector<std::vector<int>> out_;
  friend class Folder;
};

// H <= K for based subgroups.
bool is_subgroup(const CoreGraph& h, const CoreGraph& k);
bool same_subgroup(const CoreGraph& h, const CoreGraph& k);
// g with g H g^-1 = K, if the subgroups are conjugate.
std::optional<Word> conjugator_between(const CoreGraph& h, const CoreGraph& k);
bool generates_free_group(const std::vector<Word>& gens, int rank);

}  // namespace fzkit
