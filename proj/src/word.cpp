#include "fzkit/word.hpp"

#include <algorithm>

#include "fzkit/errors.hpp"

namespace fzkit {

char letter_char(Letter x) {
  int g = gen_index(x);
  if (g < 0 || g >= 26) throw AlphabetError("letter index out of printable range");
  return static_cast<char>(x > 0 ? 'a' + g : 'A' + g);
}

Letter letter_from_char(char c) {
  if (c >= 'a' && c <= 'z') return c - 'a' + 1;
  if (c >= 'A' && c <= 'Z') return -(c - 'A' + 1);
  throw AlphabetError(std::string("not a letter: '") + c + "'");
}

Word Word::reduce(const std::vector<Letter>& raw, int rank) {
  std::vector<Letter> out;
  out.reserve(raw.size());
  for (Letter x : raw) {
    if (x == 0 || (rank > 0 && gen_index(x) >= rank)) throw AlphabetError("letter index out of alphabet range");
    if (!out.empty() && out.back() == -x)
      out.pop_back();
    else
      out.push_back(x);
  }
  return Word(std::move(out), true);
}

Word Word::parse(std::string_view text, int rank) {
  std::vector<Letter> raw;
  for (char c : text) {
    if (c == ' ' || c == '1') continue;
    raw.push_back(letter_from_char(c));
  }
  return reduce(raw, rank);
}

Word Word::inverse() const {
  std::vector<Letter> r(v_.rbegin(), v_.rend());
  for (auto& x : r) x = -x;
  return Word(std::move(r), true);
}

Word Word::operator*(const Word& o) const {
  std::size_t k = 0;
  while (k < v_.size() && k < o.v_.size() && v_[v_.size() - 1 - k] == -o.v_[k]) ++k;
  std::vector<Letter> r(v_.begin(), v_.end() - static_cast<long>(k));
  r.insert(r.end(), o.v_.begin() + static_cast<long>(k), o.v_.end());
  return Word(std::move(r), true);
}

Word Word::pow(long k) const {
  Word base = k < 0 ? inverse() : *this;
  Word r;
  for (long i = 0; i < (k < 0 ? -k : k); ++i) r = r * base;
  return r;
}

Word Word::subword(std::size_t pos, std::size_t len) const {
  return Word(std::vector<Letter>(v_.begin() + static_cast<long>(pos), v_.begin() + static_cast<long>(pos + len)), true);
}

int Word::max_generator() const {
  int m = -1;
  for (Letter x : v_) m = std::max(m, gen_index(x));
  return m;
}

std::string Word::str() const {
  std::string s;
  for (Letter x : v_) s += letter_char(x);
  return s;
}

std::strong_ordering operator<=>(const Word& a, const Word& b) {
  std::size_t n = std::min(a.v_.size(), b.v_.size());
  for (std::size_t i = 0; i < n; ++i) {
    int ka = letter_key(a.v_[i]), kb = letter_key(b.v_[i]);
    if (ka != kb) return ka <=> kb;
  }
  return a.v_.size() <=> b.v_.size();
}

CyclicReduction cyclic_reduce(const Word& w) {
  const auto& v = w.letters();
  std::size_t i = 0, j = v.size();
  while (j - i >= 2 && v[i] == -v[j - 1]) {
    ++i;
    --j;
  }
  return {w.subword(i, j - i), w.subword(0, i)};
}

std::size_t cyclic_length(const Word& w) { return cyclic_reduce(w).core.size(); }

bool is_cyclically_reduced(const std::vector<Letter>& v) {
  for (std::size_t i = 0; i + 1 < v.size(); ++i)
    if (v[i] == -v[i + 1]) return false;
  return v.size() < 2 || v.front() != -v.back();
}

std::size_t least_rotation(const std::vector<Letter>& v) {
  // Booth's algorithm on letter keys.
  std::size_t n = v.size();
  if (n == 0) return 0;
  std::vector<long> f(2 * n, -1);
  std::size_t k = 0;
  auto key = [&](std::size_t i) { return letter_key(v[i % n]); };
  for (std::size_t j = 1; j < 2 * n; ++j) {
    int sj = key(j);
    long i = f[j - k - 1];
    while (i != -1 && sj != key(k + static_cast<std::size_t>(i) + 1)) {
      if (sj < key(k + static_cast<std::size_t>(i) + 1)) k = j - static_cast<std::size_t>(i) - 1;
      i = f[static_cast<std::size_t>(i)];
    }
    if (sj != key(k + static_cast<std::size_t>(i) + 1)) {
      if (sj < key(k)) k = j;
      f[j - k] = -1;
    } else {
      f[j - k] = i + 1;
    }
  }
  return k % n;
}

CyclicWord::CyclicWord(const Word& w) {
  Word core = cyclic_reduce(w).core;
  const auto& v = core.letters();
  std::size_t r = least_rotation(v);
  std::vector<Letter> rot(v.begin() + static_cast<long>(r), v.end());
  rot.insert(rot.end(), v.begin(), v.begin() + static_cast<long>(r));
  w_ = Word::reduce(rot);
}

CyclicWord CyclicWord::unoriented() const {
  CyclicWord inv = inverse();
  return inv < *this ? inv : *this;
}

std::pair<CyclicWord, int> CyclicWord::root() const {
  const auto& v = w_.letters();
  std::size_t n = v.size();
  if (n == 0) return {*this, 1};
  for (std::size_t p = 1; p <= n; ++p) {
    if (n % p) continue;
    bool ok = true;
    for (std::size_t i = p; i < n && ok; ++i) ok = v[i] == v[i - p];
    if (ok) return {CyclicWord(w_.subword(0, p)), static_cast<int>(n / p)};
  }
  return {*this, 1};
}

std::vector<long> exponent_vector(const Word& w, int rank) {
  std::vector<long> e(static_cast<std::size_t>(rank), 0);
  for (Letter x : w.letters()) e[static_cast<std::size_t>(gen_index(x))] += x > 0 ? 1 : -1;
  return e;
}

}  // namespace fzkit
