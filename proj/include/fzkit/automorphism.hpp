#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "fzkit/word.hpp"

namespace fzkit {

class FreeAutomorphism {
 public:
  FreeAutomorphism() = default;
  // Images are not checked here; invert() is the generation test.
  FreeAutomorphism(int rank, std::vector<Word> images);
  static FreeAutomorphism identity(int rank);
  // "a -> ab" per line, '#' comments; throws ParseError with line/column.
  static FreeAutomorphism parse(std::string_view text);
  // Compact form "ab,bcab,d,cd" (images in generator order).
  static FreeAutomorphism from_images(std::string_view csv);

  int rank() const { return rank_; }
  const std::vector<Word>& images() const { return images_; }
  const Word& image(int i) const { return images_[static_cast<std::size_t>(i)]; }

  Word apply(const Word& w) const;
  CyclicWord apply(const CyclicWord& c) const { return CyclicWord(apply(c.word())); }
  // Raw concatenation of images before reduction.
  std::vector<Letter> apply_raw(const Word& w) const;

  std::string str() const;  // one "a -> image" line per generator
  friend bool operator==(const FreeAutomorphism& a, const FreeAutomorphism& b) {
    return a.rank_ == b.rank_ && a.images_ == b.images_;
  }

 private:
  int rank_ = 0;
  std::vector<Word> images_;
};

// compose(phi, psi) = phi o psi.
FreeAutomorphism compose(const FreeAutomorphism& phi, const FreeAutomorphism& psi);
FreeAutomorphism power(const FreeAutomorphism& phi, int k);
// Nielsen reduction of the image tuple; throws NotAnAutomorphism.
FreeAutomorphism invert(const FreeAutomorphism& phi);
FreeAutomorphism conjugation(int rank, const Word& w);  // x -> w x w^-1
std::optional<Word> is_inner(const FreeAutomorphism& phi);
// Rows are images, columns generator exponent sums.
std::vector<std::vector<long>> abelianize(const FreeAutomorphism& phi);
// True iff phi and psi agree in Out(F).
bool outer_equal(const FreeAutomorphism& phi, const FreeAutomorphism& psi);

}  // namespace fzkit
