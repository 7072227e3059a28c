#pragma once

#include <string>
#include <vector>

#include "fzkit/automorphism.hpp"
#include "fzkit/errors.hpp"
#include "fzkit/word.hpp"

namespace fzkit {

// Type-II Whitehead automorphism (A, a): a is fixed; a generator x != a^{+-1}
// gets a on the right when x is in A and a^-1 on the left when x^-1 is in A.
struct WhiteheadMove {
  Letter multiplier = 1;
  std::vector<bool> in_set;  // indexed by letter_key
  FreeAutomorphism automorphism(int rank) const;
};

std::vector<WhiteheadMove> whitehead_moves(int rank);

struct WhiteheadCaps {
  int depth = 12;
  std::size_t frontier = 100000;
};

struct WhiteheadResult {
  std::vector<CyclicWord> minimal;
  std::vector<FreeAutomorphism> sequence;  // applied in order
  FreeAutomorphism composite;              // minimal = composite(input)
  bool certified = true;                   // false when the depth cap stopped the descent
};

std::size_t total_length(const std::vector<CyclicWord>& s);
std::vector<CyclicWord> apply_all(const FreeAutomorphism& phi, const std::vector<CyclicWord>& s);

WhiteheadResult whitehead_minimize(const std::vector<CyclicWord>& s, int rank, const WhiteheadCaps& caps = {});

// Whitehead graph on the 2n letters: an edge {x^-1, y} per cyclic subword xy.
struct WhiteheadGraph {
  int rank = 0;
  std::vector<std::pair<int, int>> edges;  // letter keys
  bool connected() const;
  std::vector<int> cut_vertices() const;
};

WhiteheadGraph whitehead_graph(const std::vector<CyclicWord>& s, int rank);

enum class CarrierKind { CarriedByProperFactor, NotCarried, Inconclusive };
const char* to_string(CarrierKind k);

struct CarrierVerdict {
  CarrierKind kind = CarrierKind::Inconclusive;
  std::vector<Word> factor_basis;  // for CarriedByProperFactor, up to conjugacy
  std::vector<CyclicWord> certificate_words;  // set whose Whitehead graph was inspected
  std::string note;
};

CarrierVerdict free_factor_carrier_test(const std::vector<CyclicWord>& s, int rank, const WhiteheadCaps& caps = {});

}  // namespace fzkit
