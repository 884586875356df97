#include "layerprop/internal.hpp"

#include <algorithm>
#include <cstdint>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#include "layerprop/error.hpp"

namespace layerprop {

namespace {

const GeneratorDecl& require_gen(const LayerPresentation& layer, const std::string& name) {
  const GeneratorDecl* g = layer.find_generator(name);
  if (!g) throw Error(ErrorCode::UnknownGenerator, "generator '" + name + "' in layer " + layer.id);
  return *g;
}

struct Shaped {
  Slice slice;
  std::size_t dom;
  std::size_t cod;
  int id;  // position in the original sequence
};

std::vector<Shaped> shapes(const LayerPresentation& layer, const std::vector<Slice>& slices) {
  std::vector<Shaped> out;
  out.reserve(slices.size());
  int id = 0;
  for (const auto& s : slices) {
    const auto& g = require_gen(layer, s.gen);
    out.push_back({s, g.dom.size(), g.cod.size(), id++});
  }
  return out;
}

// Swaps adjacent slices a;b into b';a' when the interchange law allows it.
bool try_swap(Shaped& a, Shaped& b) {
  const std::size_t o1 = a.slice.offset, o2 = b.slice.offset;
  if (o2 + b.dom <= o1) {
    a.slice.offset = o1 + b.cod - b.dom;
    std::swap(a, b);
    return true;
  }
  if (o2 >= o1 + a.cod) {
    b.slice.offset = o2 - a.cod + a.dom;
    std::swap(a, b);
    return true;
  }
  return false;
}

// Moves seq[j] to position i by adjacent swaps. Returns false if blocked.
bool bubble_to(std::vector<Shaped>& seq, std::size_t j, std::size_t i) {
  for (std::size_t k = j; k > i; --k) {
    if (!try_swap(seq[k - 1], seq[k])) return false;
  }
  return true;
}

std::vector<Slice> plain(const std::vector<Shaped>& seq) {
  std::vector<Slice> out;
  out.reserve(seq.size());
  for (const auto& s : seq) out.push_back(s.slice);
  return out;
}

Word apply_shape(const Word& cur, const Shaped& s, const GeneratorDecl& g) {
  Word next(cur.begin(), cur.begin() + static_cast<std::ptrdiff_t>(s.slice.offset));
  next.insert(next.end(), g.cod.begin(), g.cod.end());
  next.insert(next.end(), cur.begin() + static_cast<std::ptrdiff_t>(s.slice.offset + g.dom.size()),
              cur.end());
  return next;
}

}  // namespace

Word apply_slice(const LayerPresentation& layer, const Word& current, const Slice& s) {
  const auto& g = require_gen(layer, s.gen);
  if (s.offset + g.dom.size() > current.size()) {
    throw Error(ErrorCode::SortMismatch, "slice " + s.gen + "@" + std::to_string(s.offset) +
                                             " out of bounds on " + word_to_string(current));
  }
  for (std::size_t k = 0; k < g.dom.size(); ++k) {
    if (current[s.offset + k] != g.dom[k]) {
      throw Error(ErrorCode::SortMismatch, "slice " + s.gen + "@" + std::to_string(s.offset) +
                                               " does not fit " + word_to_string(current));
    }
  }
  Word next(current.begin(), current.begin() + static_cast<std::ptrdiff_t>(s.offset));
  next.insert(next.end(), g.cod.begin(), g.cod.end());
  next.insert(next.end(), current.begin() + static_cast<std::ptrdiff_t>(s.offset + g.dom.size()),
              current.end());
  return next;
}

std::vector<Word> internal_words(const SystemOfLayers& sys, const InternalDiagram& d) {
  const auto& layer = sys.require_layer(d.layer);
  for (const auto& sym : d.dom) {
    if (!layer.has_object(sym)) throw Error(ErrorCode::UnknownSymbol, sym + " in layer " + d.layer);
  }
  std::vector<Word> words{d.dom};
  for (const auto& s : d.slices) words.push_back(apply_slice(layer, words.back(), s));
  if (words.back() != d.cod) {
    throw Error(ErrorCode::SortMismatch, "internal diagram ends at " + word_to_string(words.back()) +
                                             " but declares " + word_to_string(d.cod));
  }
  return words;
}

void check_internal(const SystemOfLayers& sys, const InternalDiagram& d) { internal_words(sys, d); }

InternalDiagram internal_identity(const std::string& layer, Word w) {
  InternalDiagram d;
  d.layer = layer;
  d.dom = w;
  d.cod = std::move(w);
  return d;
}

InternalDiagram internal_generator(const SystemOfLayers& sys, const std::string& layer,
                                   const std::string& gen) {
  const auto& g = require_gen(sys.require_layer(layer), gen);
  return InternalDiagram{layer, g.dom, g.cod, {Slice{0, gen}}};
}

InternalDiagram internal_seq(const InternalDiagram& a, const InternalDiagram& b) {
  if (a.layer != b.layer || a.cod != b.dom) {
    throw Error(ErrorCode::SortMismatch, "cannot compose " + a.layer + ":" + word_to_string(a.cod) +
                                             " with " + b.layer + ":" + word_to_string(b.dom));
  }
  InternalDiagram out{a.layer, a.dom, b.cod, a.slices};
  out.slices.insert(out.slices.end(), b.slices.begin(), b.slices.end());
  return out;
}

InternalDiagram internal_whisker(const InternalDiagram& d, const Word& left, const Word& right) {
  InternalDiagram out;
  out.layer = d.layer;
  out.dom = left;
  out.dom.insert(out.dom.end(), d.dom.begin(), d.dom.end());
  out.dom.insert(out.dom.end(), right.begin(), right.end());
  out.cod = left;
  out.cod.insert(out.cod.end(), d.cod.begin(), d.cod.end());
  out.cod.insert(out.cod.end(), right.begin(), right.end());
  for (const auto& s : d.slices) out.slices.push_back({s.offset + left.size(), s.gen});
  return out;
}

InternalDiagram internal_tensor(const SystemOfLayers& sys, const InternalDiagram& a,
                                const InternalDiagram& b) {
  if (a.layer != b.layer) {
    throw Error(ErrorCode::SortMismatch, "tensor across layers " + a.layer + " and " + b.layer);
  }
  (void)sys;
  return internal_seq(internal_whisker(a, {}, b.dom), internal_whisker(b, a.cod, {}));
}

namespace {

// Leftmost-first from position i on. Equal candidates can only be copies of
// one nullary generator; those branches are all finished and compared.
std::vector<Shaped> canonical_from(std::vector<Shaped> seq, std::size_t i) {
  for (; i < seq.size(); ++i) {
    std::vector<std::size_t> best;
    Slice best_slice;
    for (std::size_t j = i; j < seq.size(); ++j) {
      auto trial = seq;
      if (!bubble_to(trial, j, i)) continue;
      if (best.empty() || trial[i].slice < best_slice) {
        best = {j};
        best_slice = trial[i].slice;
      } else if (trial[i].slice == best_slice) {
        best.push_back(j);
      }
    }
    if (best.size() == 1) {
      bubble_to(seq, best[0], i);
      continue;
    }
    std::vector<Shaped> winner;
    std::vector<Slice> winner_key;
    for (std::size_t j : best) {
      auto trial = seq;
      bubble_to(trial, j, i);
      auto done = canonical_from(std::move(trial), i + 1);
      auto key = plain(done);
      if (winner.empty() || key < winner_key) {
        winner = std::move(done);
        winner_key = std::move(key);
      }
    }
    return winner;
  }
  return seq;
}

}  // namespace

InternalDiagram canonical_internal(const SystemOfLayers& sys, const InternalDiagram& d) {
  const auto& layer = sys.require_layer(d.layer);
  return InternalDiagram{d.layer, d.dom, d.cod, plain(canonical_from(shapes(layer, d.slices), 0))};
}

std::string internal_key(const InternalDiagram& c) {
  std::ostringstream os;
  os << c.layer << '|' << word_to_string(c.dom) << '|' << word_to_string(c.cod) << '|';
  for (const auto& s : c.slices) os << s.gen << '@' << s.offset << ';';
  return os.str();
}

bool internal_equal(const SystemOfLayers& sys, const InternalDiagram& a, const InternalDiagram& b) {
  if (a.layer != b.layer || a.dom != b.dom || a.cod != b.cod) return false;
  if (a.slices.size() != b.slices.size()) return false;
  return canonical_internal(sys, a).slices == canonical_internal(sys, b).slices;
}

InternalDiagram translate_internal(const SystemOfLayers& sys, const TranslationFunctor& f,
                                   const InternalDiagram& d) {
  if (d.layer != f.source) {
    throw Error(ErrorCode::SortMismatch, "functor " + f.name + " does not act on layer " + d.layer);
  }
  const auto& src = sys.require_layer(f.source);
  InternalDiagram out = internal_identity(f.target, translate_word(f, d.dom));
  Word cur = d.dom;
  for (const auto& s : d.slices) {
    const auto& g = require_gen(src, s.gen);
    auto it = f.morphism_map.find(s.gen);
    if (it == f.morphism_map.end()) {
      throw Error(ErrorCode::UnknownGenerator, "functor " + f.name + " has no image for " + s.gen);
    }
    Word left(cur.begin(), cur.begin() + static_cast<std::ptrdiff_t>(s.offset));
    Word right(cur.begin() + static_cast<std::ptrdiff_t>(s.offset + g.dom.size()), cur.end());
    out = internal_seq(out, internal_whisker(it->second, translate_word(f, left),
                                             translate_word(f, right)));
    cur = apply_slice(src, cur, s);
  }
  out.cod = translate_word(f, d.cod);
  return out;
}

std::vector<Factorization> factorizations(const SystemOfLayers& sys, const InternalDiagram& d,
                                          std::size_t cap, bool* truncated) {
  const auto& layer = sys.require_layer(d.layer);
  internal_words(sys, d);
  std::vector<Factorization> out;
  if (truncated) *truncated = false;
  std::set<std::vector<int>> seen;

  // State: slices taken so far (in order) and the remaining sequence.
  std::function<void(std::vector<Shaped>&, std::vector<Shaped>&, const Word&)> go;
  go = [&](std::vector<Shaped>& taken, std::vector<Shaped>& rest, const Word& mid) {
    if (out.size() >= cap) {
      if (truncated) *truncated = true;
      return;
    }
    std::vector<int> ids;
    for (const auto& s : taken) ids.push_back(s.id);
    std::sort(ids.begin(), ids.end());
    if (!seen.insert(ids).second) return;
    out.push_back({InternalDiagram{d.layer, d.dom, mid, plain(taken)},
                   InternalDiagram{d.layer, mid, d.cod, plain(rest)}});
    for (std::size_t j = 0; j < rest.size(); ++j) {
      auto trial = rest;
      if (!bubble_to(trial, j, 0)) continue;
      Shaped head = trial.front();
      trial.erase(trial.begin());
      Word next = apply_shape(mid, head, require_gen(layer, head.slice.gen));
      taken.push_back(head);
      go(taken, trial, next);
      taken.pop_back();
    }
  };
  std::vector<Shaped> taken;
  auto rest = shapes(layer, d.slices);
  go(taken, rest, d.dom);
  return out;
}

std::optional<InternalDiagram> strip_prefix(const SystemOfLayers& sys, const InternalDiagram& d,
                                            const InternalDiagram& prefix) {
  if (d.layer != prefix.layer || d.dom != prefix.dom) return std::nullopt;
  const auto& layer = sys.require_layer(d.layer);
  auto rest = shapes(layer, d.slices);
  Word mid = d.dom;
  for (const auto& want : prefix.slices) {
    bool found = false;
    for (std::size_t j = 0; j < rest.size(); ++j) {
      auto trial = rest;
      if (!bubble_to(trial, j, 0)) continue;
      if (trial.front().slice == want) {
        mid = apply_shape(mid, trial.front(), require_gen(layer, want.gen));
        trial.erase(trial.begin());
        rest = std::move(trial);
        found = true;
        break;
      }
    }
    if (!found) return std::nullopt;
  }
  if (mid != prefix.cod) return std::nullopt;
  return InternalDiagram{d.layer, mid, d.cod, plain(rest)};
}

std::vector<Occurrence> find_occurrences(const SystemOfLayers& sys, const InternalDiagram& d,
                                         const InternalDiagram& pattern, std::size_t cap) {
  std::vector<Occurrence> out;
  if (pattern.layer != d.layer || pattern.slices.empty()) return out;
  if (pattern.slices.size() > d.slices.size()) return out;
  const auto pat = canonical_internal(sys, pattern);
  std::set<std::string> seen;
  for (const auto& f : factorizations(sys, d, 4096)) {
    const Word& mid = f.pre.cod;
    if (mid.size() < pat.dom.size()) continue;
    for (std::size_t at = 0; at + pat.dom.size() <= mid.size(); ++at) {
      if (!std::equal(pat.dom.begin(), pat.dom.end(), mid.begin() + static_cast<std::ptrdiff_t>(at)))
        continue;
      Word left(mid.begin(), mid.begin() + static_cast<std::ptrdiff_t>(at));
      Word right(mid.begin() + static_cast<std::ptrdiff_t>(at + pat.dom.size()), mid.end());
      auto rest = strip_prefix(sys, f.post, internal_whisker(pat, left, right));
      if (!rest) continue;
      // The same occurrence reappears under every pre that is interchange
      // compatible with it; keep the leftmost-first representative.
      std::string key = internal_key(canonical_internal(sys, f.pre)) + "#" +
                        std::to_string(left.size()) + "#" +
                        internal_key(canonical_internal(sys, *rest));
      if (!seen.insert(key).second) continue;
      out.push_back({f.pre, left, right, *rest});
      if (out.size() >= cap) return out;
    }
  }
  return out;
}

std::vector<Word> word_preimages(const SystemOfLayers& sys, const TranslationFunctor& f,
                                 const Word& v, std::size_t cap, bool* complete) {
  const auto& src = sys.require_layer(f.source);
  if (complete) *complete = true;
  std::vector<Word> out;
  Word cur;
  std::function<void(std::size_t)> go = [&](std::size_t pos) {
    if (out.size() >= cap) {
      if (complete) *complete = false;
      return;
    }
    if (pos == v.size()) {
      out.push_back(cur);
      return;
    }
    for (const auto& obj : src.objects) {
      auto it = f.object_map.find(obj);
      if (it == f.object_map.end()) continue;
      const Word& img = it->second;
      if (img.empty()) {
        if (complete) *complete = false;
        continue;
      }
      if (pos + img.size() > v.size()) continue;
      if (!std::equal(img.begin(), img.end(), v.begin() + static_cast<std::ptrdiff_t>(pos))) continue;
      cur.push_back(obj);
      go(pos + img.size());
      cur.pop_back();
    }
  };
  go(0);
  return out;
}

PreimageResult preimages(const SystemOfLayers& sys, const TranslationFunctor& f,
                         const InternalDiagram& target, std::size_t cap) {
  PreimageResult res;
  if (target.layer != f.target) return res;
  const auto& src = sys.require_layer(f.source);
  bool words_complete = true;
  auto doms = word_preimages(sys, f, target.dom, cap, &words_complete);
  if (!words_complete) res.complete = false;

  std::set<std::string> found;
  std::set<std::string> visited;
  // Generators sent to identities can be inserted anywhere; at most one per
  // preimage is tried and the result is marked incomplete.
  constexpr int kMaxCollapsed = 1;
  for (const auto& dom : doms) {
    InternalDiagram partial = internal_identity(f.source, dom);
    std::function<void(const InternalDiagram&, const InternalDiagram&, int)> go;
    go = [&](const InternalDiagram& sigma, const InternalDiagram& remaining, int collapsed) {
      if (res.diagrams.size() >= cap) {
        res.complete = false;
        return;
      }
      std::string vkey = internal_key(canonical_internal(sys, sigma)) + "##" +
                         internal_key(canonical_internal(sys, remaining));
      if (!visited.insert(vkey).second) return;
      if (remaining.slices.empty() && translate_word(f, sigma.cod) == remaining.cod) {
        auto c = canonical_internal(sys, sigma);
        if (found.insert(internal_key(c)).second) res.diagrams.push_back(c);
      }
      const Word& cur = sigma.cod;
      for (std::size_t o = 0; o <= cur.size(); ++o) {
        for (const auto& g : src.generators) {
          if (o + g.dom.size() > cur.size()) continue;
          if (!std::equal(g.dom.begin(), g.dom.end(), cur.begin() + static_cast<std::ptrdiff_t>(o)))
            continue;
          auto it = f.morphism_map.find(g.name);
          if (it == f.morphism_map.end()) continue;
          InternalDiagram next = sigma;
          next.slices.push_back({o, g.name});
          next.cod = apply_slice(src, cur, {o, g.name});
          if (it->second.slices.empty()) {
            res.complete = false;
            if (collapsed < kMaxCollapsed) go(next, remaining, collapsed + 1);
            continue;
          }
          if (it->second.slices.size() > remaining.slices.size()) continue;
          Word left(cur.begin(), cur.begin() + static_cast<std::ptrdiff_t>(o));
          Word right(cur.begin() + static_cast<std::ptrdiff_t>(o + g.dom.size()), cur.end());
          auto step = internal_whisker(it->second, translate_word(f, left), translate_word(f, right));
          auto rest = strip_prefix(sys, remaining, step);
          if (!rest) continue;
          go(next, *rest, collapsed);
        }
      }
    };
    go(partial, target, 0);
  }
  std::sort(res.diagrams.begin(), res.diagrams.end(), [](const auto& a, const auto& b) {
    return internal_key(a) < internal_key(b);
  });
  return res;
}

std::optional<std::pair<InternalDiagram, InternalDiagram>> split_tensor(
    const SystemOfLayers& sys, const InternalDiagram& d, std::size_t at) {
  if (at > d.dom.size()) return std::nullopt;
  const auto& layer = sys.require_layer(d.layer);
  std::size_t seam = at;
  InternalDiagram left = internal_identity(d.layer, Word(d.dom.begin(), d.dom.begin() + static_cast<std::ptrdiff_t>(at)));
  InternalDiagram right = internal_identity(d.layer, Word(d.dom.begin() + static_cast<std::ptrdiff_t>(at), d.dom.end()));
  for (const auto& s : d.slices) {
    const auto& g = require_gen(layer, s.gen);
    if (s.offset + g.dom.size() <= seam) {
      left.slices.push_back(s);
      left.cod = apply_slice(layer, left.cod, s);
      seam = seam + g.cod.size() - g.dom.size();
    } else if (s.offset >= seam) {
      Slice shifted{s.offset - seam, s.gen};
      right.slices.push_back(shifted);
      right.cod = apply_slice(layer, right.cod, shifted);
    } else {
      return std::nullopt;
    }
  }
  return std::make_pair(left, right);
}

std::vector<std::pair<InternalDiagram, InternalDiagram>> tensor_splits(const SystemOfLayers& sys,
                                                                      const InternalDiagram& d, std::size_t at) {
  std::vector<std::pair<InternalDiagram, InternalDiagram>> out;
  if (at > d.dom.size()) return out;
  const auto& layer = sys.require_layer(d.layer);
  std::function<void(std::size_t, InternalDiagram, InternalDiagram, std::size_t)> go =
      [&](std::size_t i, InternalDiagram left, InternalDiagram right, std::size_t seam) {
        if (i == d.slices.size()) {
          out.emplace_back(std::move(left), std::move(right));
          return;
        }
        const auto& s = d.slices[i];
        const auto& g = require_gen(layer, s.gen);
        const bool to_left = s.offset + g.dom.size() <= seam;
        const bool to_right = s.offset >= seam;
        if (to_right) {
          InternalDiagram r = right;
          Slice shifted{s.offset - seam, s.gen};
          r.slices.push_back(shifted);
          r.cod = apply_slice(layer, r.cod, shifted);
          go(i + 1, left, std::move(r), seam);
        }
        if (to_left) {
          left.slices.push_back(s);
          left.cod = apply_slice(layer, left.cod, s);
          go(i + 1, std::move(left), std::move(right), seam + g.cod.size() - g.dom.size());
        }
      };
  go(0, internal_identity(d.layer, Word(d.dom.begin(), d.dom.begin() + static_cast<std::ptrdiff_t>(at))),
     internal_identity(d.layer, Word(d.dom.begin() + static_cast<std::ptrdiff_t>(at), d.dom.end())), at);
  return out;
}

std::optional<std::pair<InternalDiagram, InternalDiagram>> split_tensor_cod(
    const SystemOfLayers& sys, const InternalDiagram& d, std::size_t at) {
  if (at > d.cod.size()) return std::nullopt;
  const auto& layer = sys.require_layer(d.layer);
  std::size_t seam = at;
  // Walk backwards to find the dom seam, then reuse the forward split.
  for (auto it = d.slices.rbegin(); it != d.slices.rend(); ++it) {
    const auto& g = require_gen(layer, it->gen);
    if (it->offset + g.cod.size() <= seam) {
      seam = seam + g.dom.size() - g.cod.size();
    } else if (it->offset >= seam) {
      continue;
    } else {
      return std::nullopt;
    }
  }
  auto split = split_tensor(sys, d, seam);
  if (!split || split->first.cod.size() != at) return std::nullopt;
  return split;
}

}  // namespace layerprop
