#include "fzkit/automorphism.hpp"

#include <algorithm>
#include <map>
#include <queue>
#include <set>
#include <sstream>

#include "fzkit/errors.hpp"

namespace fzkit {

FreeAutomorphism::FreeAutomorphism(int rank, std::vector<Word> images) : rank_(rank), images_(std::move(images)) {
  if (rank_ < 1 || static_cast<int>(images_.size()) != rank_) throw AlphabetError("image count does not match rank");
  for (const auto& w : images_)
    if (w.max_generator() >= rank_) throw AlphabetError("image uses a letter outside the alphabet");
}

FreeAutomorphism FreeAutomorphism::identity(int rank) {
  std::vector<Word> im;
  for (int i = 0; i < rank; ++i) im.push_back(Word::generator(i));
  return FreeAutomorphism(rank, im);
}

FreeAutomorphism FreeAutomorphism::parse(std::string_view text) {
  std::map<int, Word> images;
  std::map<int, int> first_line;
  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    std::string_view line = text.substr(pos, nl - pos);
    ++line_no;
    pos = nl + 1;
    std::size_t hash = line.find('#');
    if (hash != std::string_view::npos) line = line.substr(0, hash);
    std::size_t i = 0;
    auto skip = [&] {
      while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
    };
    skip();
    if (i == line.size()) continue;
    char g = line[i];
    if (g < 'a' || g > 'z') throw ParseError("expected a lowercase generator", line_no, static_cast<int>(i) + 1);
    int gi = g - 'a';
    ++i;
    skip();
    if (line.substr(i, 2) != "->") throw ParseError("expected '->'", line_no, static_cast<int>(i) + 1);
    i += 2;
    skip();
    std::vector<Letter> raw;
    for (; i < line.size(); ++i) {
      char c = line[i];
      if (c == ' ' || c == '\t' || c == '\r') continue;
      if (c == '1') continue;
      if (!((c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z')))
        throw ParseError(std::string("unexpected character '") + c + "'", line_no, static_cast<int>(i) + 1);
      raw.push_back(letter_from_char(c));
    }
    if (images.count(gi)) throw ParseError(std::string("duplicate image for ") + g, line_no, 1);
    images[gi] = Word::reduce(raw);
    first_line[gi] = line_no;
  }
  if (images.empty()) throw ParseError("no images", line_no, 1);
  int rank = images.rbegin()->first + 1;
  std::vector<Word> im;
  for (int k = 0; k < rank; ++k) {
    auto it = images.find(k);
    if (it == images.end())
      throw ParseError(std::string("missing image for generator ") + static_cast<char>('a' + k), line_no, 1);
    if (it->second.max_generator() >= rank)
      throw ParseError("image uses a letter outside the alphabet", first_line[k], 1);
    im.push_back(it->second);
  }
  return FreeAutomorphism(rank, im);
}

FreeAutomorphism FreeAutomorphism::from_images(std::string_view csv) {
  std::vector<Word> im;
  std::size_t pos = 0;
  while (true) {
    std::size_t c = csv.find(',', pos);
    im.push_back(Word::parse(csv.substr(pos, c == std::string_view::npos ? std::string_view::npos : c - pos)));
    if (c == std::string_view::npos) break;
    pos = c + 1;
  }
  return FreeAutomorphism(static_cast<int>(im.size()), im);
}

std::vector<Letter> FreeAutomorphism::apply_raw(const Word& w) const {
  std::vector<Letter> raw;
  for (Letter x : w.letters()) {
    const Word& im = images_[static_cast<std::size_t>(gen_index(x))];
    if (x > 0)
      raw.insert(raw.end(), im.letters().begin(), im.letters().end());
    else
      for (auto it = im.letters().rbegin(); it != im.letters().rend(); ++it) raw.push_back(-*it);
  }
  return raw;
}

Word FreeAutomorphism::apply(const Word& w) const { return Word::reduce(apply_raw(w)); }

std::string FreeAutomorphism::str() const {
  std::ostringstream os;
  for (int i = 0; i < rank_; ++i) os << static_cast<char>('a' + i) << " -> " << images_[static_cast<std::size_t>(i)].str() << "\n";
  return os.str();
}

FreeAutomorphism compose(const FreeAutomorphism& phi, const FreeAutomorphism& psi) {
  if (phi.rank() != psi.rank()) throw AlphabetError("rank mismatch in compose");
  std::vector<Word> im;
  for (const auto& w : psi.images()) im.push_back(phi.apply(w));
  return FreeAutomorphism(phi.rank(), im);
}

FreeAutomorphism power(const FreeAutomorphism& phi, int k) {
  FreeAutomorphism base = k < 0 ? invert(phi) : phi;
  FreeAutomorphism r = FreeAutomorphism::identity(phi.rank());
  for (int i = 0; i < std::abs(k); ++i) r = compose(base, r);
  return r;
}

namespace {

std::size_t total_length(const std::vector<Word>& u) {
  std::size_t s = 0;
  for (const auto& w : u) s += w.size();
  return s;
}

struct NielsenState {
  std::vector<Word> u;  // current tuple
  std::vector<Word> t;  // u[i] = phi(t[i])
};

// Elementary moves u_i <- u_i u_j^e or u_j^e u_i, in a fixed order.
template <class F>
bool for_each_move(const NielsenState& s, F&& f) {
  std::size_t n = s.u.size();
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      for (int side = 0; side < 2; ++side)
        for (int e = 0; e < 2; ++e) {
          Word uj = e ? s.u[j].inverse() : s.u[j];
          Word tj = e ? s.t[j].inverse() : s.t[j];
          NielsenState next = s;
          next.u[i] = side ? uj * s.u[i] : s.u[i] * uj;
          next.t[i] = side ? tj * s.t[i] : s.t[i] * tj;
          if (f(next)) return true;
        }
    }
  return false;
}

}  // namespace

FreeAutomorphism invert(const FreeAutomorphism& phi) {
  int n = phi.rank();
  NielsenState s{phi.images(), FreeAutomorphism::identity(n).images()};
  for (const auto& w : s.u)
    if (w.empty()) throw NotAnAutomorphism("an image is trivial");
  while (total_length(s.u) > static_cast<std::size_t>(n)) {
    std::size_t cur = total_length(s.u);
    bool moved = for_each_move(s, [&](const NielsenState& next) {
      if (total_length(next.u) < cur) {
        s = next;
        return true;
      }
      return false;
    });
    if (moved) continue;
    // Plateau: search equal-length tuples for one admitting a strict descent.
    std::set<std::vector<Word>> seen{s.u};
    std::queue<NielsenState> q;
    q.push(s);
    bool found = false;
    while (!q.empty() && !found && seen.size() < 20000) {
      NielsenState cs = q.front();
      q.pop();
      for_each_move(cs, [&](const NielsenState& next) {
        std::size_t len = total_length(next.u);
        if (len < cur) {
          s = next;
          found = true;
          return true;
        }
        if (len == cur && seen.insert(next.u).second) q.push(next);
        return false;
      });
    }
    if (!found) throw NotAnAutomorphism("Nielsen reduction stalls above total length n");
  }
  std::vector<Word> inv(static_cast<std::size_t>(n));
  std::vector<bool> hit(static_cast<std::size_t>(n), false);
  for (int i = 0; i < n; ++i) {
    const Word& u = s.u[static_cast<std::size_t>(i)];
    if (u.size() != 1) throw NotAnAutomorphism("images do not generate");
    int g = gen_index(u[0]);
    if (hit[static_cast<std::size_t>(g)]) throw NotAnAutomorphism("images do not generate");
    hit[static_cast<std::size_t>(g)] = true;
    inv[static_cast<std::size_t>(g)] = u[0] > 0 ? s.t[static_cast<std::size_t>(i)] : s.t[static_cast<std::size_t>(i)].inverse();
  }
  return FreeAutomorphism(n, inv);
}

FreeAutomorphism conjugation(int rank, const Word& w) {
  std::vector<Word> im;
  for (int i = 0; i < rank; ++i) im.push_back(w * Word::generator(i) * w.inverse());
  return FreeAutomorphism(rank, im);
}

std::optional<Word> is_inner(const FreeAutomorphism& phi) {
  int n = phi.rank();
  auto works = [&](const Word& w) {
    for (int i = 0; i < n; ++i)
      if (phi.image(i) != w * Word::generator(i) * w.inverse()) return false;
    return true;
  };
  CyclicReduction cr = cyclic_reduce(phi.image(0));
  if (cr.core != Word::generator(0)) return std::nullopt;
  // w a w^-1 = c a c^-1 forces w in c<a>.
  long bound = 1;
  for (const auto& im : phi.images()) bound = std::max(bound, static_cast<long>(im.size()) + 1);
  Word a = Word::generator(0);
  for (long k = 0; k <= bound; ++k)
    for (long s : {k, -k}) {
      Word w = cr.conjugator * a.pow(s);
      if (works(w)) return w;
      if (k == 0) break;
    }
  return std::nullopt;
}

std::vector<std::vector<long>> abelianize(const FreeAutomorphism& phi) {
  std::vector<std::vector<long>> m;
  for (const auto& w : phi.images()) m.push_back(exponent_vector(w, phi.rank()));
  return m;
}

bool outer_equal(const FreeAutomorphism& phi, const FreeAutomorphism& psi) {
  if (phi.rank() != psi.rank()) return false;
  if (abelianize(phi) != abelianize(psi)) return false;
  return is_inner(compose(phi, invert(psi))).has_value();
}

}  // namespace fzkit
