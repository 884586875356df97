#pragma once

// Morphisms inside a single strict monoidal layer, represented as slice
// sequences and compared modulo the interchange law.

#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "layerprop/theory.hpp"

namespace layerprop {

struct SliceShape {
  std::size_t offset;
  std::size_t dom;
  std::size_t cod;
};

/// Word after applying one slice. Throws SortMismatch on a typing failure.
Word apply_slice(const LayerPresentation& layer, const Word& current, const Slice& s);

/// Intermediate words w_0 = dom, ..., w_n = cod. Throws on any typing failure
/// including a mismatch with the declared cod.
std::vector<Word> internal_words(const SystemOfLayers& sys, const InternalDiagram& d);

void check_internal(const SystemOfLayers& sys, const InternalDiagram& d);

InternalDiagram internal_identity(const std::string& layer, Word w);
InternalDiagram internal_generator(const SystemOfLayers& sys, const std::string& layer,
                                   const std::string& gen);
InternalDiagram internal_seq(const InternalDiagram& a, const InternalDiagram& b);
/// Monoidal product inside one layer: a on the left, b on the right.
InternalDiagram internal_tensor(const SystemOfLayers& sys, const InternalDiagram& a,
                                const InternalDiagram& b);
/// id_left (x) d (x) id_right.
InternalDiagram internal_whisker(const InternalDiagram& d, const Word& left, const Word& right);

/// Leftmost-first normal form modulo interchange.
InternalDiagram canonical_internal(const SystemOfLayers& sys, const InternalDiagram& d);
std::string internal_key(const InternalDiagram& canonical);
bool internal_equal(const SystemOfLayers& sys, const InternalDiagram& a, const InternalDiagram& b);

InternalDiagram translate_internal(const SystemOfLayers& sys, const TranslationFunctor& f,
                                   const InternalDiagram& d);

struct Factorization {
  InternalDiagram pre;
  InternalDiagram post;
};

/// All ways of writing d = pre ; post up to interchange, pre ranging over
/// prefixes of the slice poset. Includes the trivial splits.
std::vector<Factorization> factorizations(const SystemOfLayers& sys, const InternalDiagram& d,
                                          std::size_t cap, bool* truncated = nullptr);

/// If `prefix` is a prefix of `d` up to interchange, returns the remainder.
std::optional<InternalDiagram> strip_prefix(const SystemOfLayers& sys, const InternalDiagram& d,
                                            const InternalDiagram& prefix);

struct Occurrence {
  InternalDiagram pre;
  Word left;
  Word right;
  InternalDiagram post;
};

/// Occurrences of `pattern` inside `d`: d = pre ; (id_left (x) pattern (x) id_right) ; post.
std::vector<Occurrence> find_occurrences(const SystemOfLayers& sys, const InternalDiagram& d,
                                         const InternalDiagram& pattern, std::size_t cap);

struct PreimageResult {
  std::vector<InternalDiagram> diagrams;
  bool complete = true;
};

/// Source words w with f(w) = v. Objects sent to the empty word are skipped
/// and make the result incomplete.
std::vector<Word> word_preimages(const SystemOfLayers& sys, const TranslationFunctor& f,
                                 const Word& v, std::size_t cap, bool* complete = nullptr);

/// Source diagrams s with f(s) equal to `target` up to interchange.
PreimageResult preimages(const SystemOfLayers& sys, const TranslationFunctor& f,
                         const InternalDiagram& target, std::size_t cap);

/// Splits d as (left (x) right) when its dom splits at `at` and no slice
/// straddles the seam.
std::optional<std::pair<InternalDiagram, InternalDiagram>> split_tensor(
    const SystemOfLayers& sys, const InternalDiagram& d, std::size_t at);

/// Every such split: a nullary slice at the seam may go to either side.
std::vector<std::pair<InternalDiagram, InternalDiagram>> tensor_splits(const SystemOfLayers& sys,
                                                                      const InternalDiagram& d, std::size_t at);

/// Same, with the seam fixed by the cod position instead.
std::optional<std::pair<InternalDiagram, InternalDiagram>> split_tensor_cod(
    const SystemOfLayers& sys, const InternalDiagram& d, std::size_t at);

}  // namespace layerprop
