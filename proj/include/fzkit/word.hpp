#pragma once

#include <compare>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace fzkit {

// Letter k > 0 is the k-th generator, -k its inverse.
using Letter = int;

inline int gen_index(Letter x) { return (x > 0 ? x : -x) - 1; }
// a < A < b < B < ...; used for every lexicographic comparison.
inline int letter_key(Letter x) { return 2 * gen_index(x) + (x < 0 ? 1 : 0); }
inline Letter letter_from_key(int k) { return (k % 2 == 0) ? (k / 2 + 1) : -(k / 2 + 1); }
char letter_char(Letter x);
Letter letter_from_char(char c);

class Word {
 public:
  Word() = default;

  // Free reduction of an arbitrary letter sequence. rank > 0 enables range checks.
  static Word reduce(const std::vector<Letter>& raw, int rank = 0);
  static Word parse(std::string_view text, int rank = 0);
  static Word generator(int i) { return Word(std::vector<Letter>{i + 1}, true); }

  const std::vector<Letter>& letters() const { return v_; }
  std::size_t size() const { return v_.size(); }
  bool empty() const { return v_.empty(); }
  Letter operator[](std::size_t i) const { return v_[i]; }
  Letter front() const { return v_.front(); }
  Letter back() const { return v_.back(); }

  Word inverse() const;
  Word operator*(const Word& o) const;
  Word pow(long k) const;
  Word subword(std::size_t pos, std::size_t len) const;
  int max_generator() const;  // highest generator index used, -1 if empty

  std::string str() const;

  friend bool operator==(const Word& a, const Word& b) { return a.v_ == b.v_; }
  friend std::strong_ordering operator<=>(const Word& a, const Word& b);

 private:
  Word(std::vector<Letter> v, bool) : v_(std::move(v)) {}
  std::vector<Letter> v_;
};

class CyclicWord;

struct CyclicReduction {
  Word core;
  Word conjugator;  // w = conjugator * core * conjugator^-1
};

CyclicReduction cyclic_reduce(const Word& w);
std::size_t cyclic_length(const Word& w);

// Conjugacy class in canonical form: the least rotation of the cyclic core.
class CyclicWord {
 public:
  CyclicWord() = default;
  explicit CyclicWord(const Word& w);
  static CyclicWord parse(std::string_view text, int rank = 0) { return CyclicWord(Word::parse(text, rank)); }

  const Word& word() const { return w_; }
  std::size_t size() const { return w_.size(); }
  bool empty() const { return w_.empty(); }
  CyclicWord inverse() const { return CyclicWord(w_.inverse()); }
  // Class of w and of w^-1 identified.
  CyclicWord unoriented() const;
  bool same_unoriented(const CyclicWord& o) const { return unoriented() == o.unoriented(); }
  // Least d with w = u^(n/d); returns the root u and the exponent.
  std::pair<CyclicWord, int> root() const;
  bool is_proper_power() const { return root().second > 1; }
  std::string str() const { return w_.str(); }

  friend bool operator==(const CyclicWord& a, const CyclicWord& b) { return a.w_ == b.w_; }
  friend std::strong_ordering operator<=>(const CyclicWord& a, const CyclicWord& b) { return a.w_ <=> b.w_; }

 private:
  Word w_;
};

// Index of the lexicographically least rotation of a letter sequence.
std::size_t least_rotation(const std::vector<Letter>& v);
bool is_cyclically_reduced(const std::vector<Letter>& v);

// Exponent sums per generator.
std::vector<long> exponent_vector(const Word& w, int rank);

}  // namespace fzkit
