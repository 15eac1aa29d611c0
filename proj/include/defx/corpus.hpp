#pragma once

#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "defx/rng.hpp"
#include "defx/tensor.hpp"

namespace defx {

// Inclusive token range, 0-based. The corpus format is 1-based; the parser
// and renderer convert at the boundary.
struct Span {
  int start = 0;
  int end = 0;
  bool operator==(const Span&) const = default;
  int length() const { return end - start + 1; }
};

struct Sentence {
  std::vector<std::string> tokens;
  std::vector<std::string> pos;
  // 0-based index of the syntactic head; -1 for the root token.
  std::vector<int> parent;
  // BIO tags; empty when the sentence is unlabeled (tag column "_").
  std::vector<std::string> tags;
  std::optional<bool> definitional;
  // First term/definition span when present. Additional pairs remain visible
  // in the tags; only the first pair drives the path and consistency losses.
  std::optional<Span> term;
  std::optional<Span> definition;
  std::vector<Span> qualifiers;

  int size() const { return static_cast<int>(tokens.size()); }
  bool labeled() const { return !tags.empty(); }
  bool operator==(const Sentence&) const = default;
};

// BIO label inventory plus the synthetic start state used by the CRF.
class TagSet {
 public:
  static TagSet term_definition();  // 5 tags
  static TagSet with_qualifier();   // 7 tags (DEFT-style)

  int size() const { return static_cast<int>(tags_.size()); }
  int start_state() const { return size(); }
  int index(const std::string& tag) const;      // throws on unknown tag
  bool contains(const std::string& tag) const;
  const std::string& name(int i) const { return tags_[static_cast<std::size_t>(i)]; }
  const std::vector<std::string>& tags() const { return tags_; }
  int outside_index() const { return index("O"); }
  bool has_qualifier() const { return size() == 7; }

  // "B-Term" -> "Term", "O" -> "".
  static std::string class_of(const std::string& tag);

 private:
  explicit TagSet(std::vector<std::string> tags) : tags_(std::move(tags)) {}
  std::vector<std::string> tags_;
};

// Word and POS index maps with reserved entries.
class Vocab {
 public:
  static constexpr int kWordUnk = 0;
  static constexpr int kWordPad = 1;
  static constexpr int kPosUnk = 0;

  static Vocab build(std::span<const Sentence> corpus);

  // Lookup is lowercased; unseen words map to the UNK index.
  int word(const std::string& form) const;
  int pos_tag(const std::string& tag) const;
  int word_count() const { return static_cast<int>(words_.size()); }
  int pos_count() const { return static_cast<int>(pos_.size()); }

  const std::vector<std::string>& words() const { return words_; }
  const std::vector<std::string>& pos_tags() const { return pos_; }

  // Rebuild from serialized lists (index = position).
  static Vocab from_lists(std::vector<std::string> words, std::vector<std::string> pos);

  bool operator==(const Vocab& other) const {
    return words_ == other.words_ && pos_ == other.pos_;
  }

 private:
  Vocab() = default;
  std::vector<std::string> words_;  // index -> form (lowercased)
  std::vector<std::string> pos_;
  std::map<std::string, int> word_index_;
  std::map<std::string, int> pos_index_;
};

struct ParseError : std::runtime_error {
  ParseError(int line, const std::string& msg)
      : std::runtime_error("line " + std::to_string(line) + ": " + msg), line(line) {}
  int line;
};

// Corpus TSV: blocks separated by blank lines; each block starts with
// "# label: 0|1" followed by one token per line,
// index<TAB>form<TAB>pos<TAB>head<TAB>tag (1-based index, head 0 = root,
// tag "_" for unlabeled input). Extra "#" comment lines after the header are
// skipped.
std::vector<Sentence> parse_corpus(std::string_view text);
std::string render_corpus(std::span<const Sentence> corpus);

// Checks the structural invariants of a parsed or constructed sentence:
// parallel lengths, single-rooted tree, consistent spans/tags/label. Throws
// std::invalid_argument naming the violation.
void validate_sentence(const Sentence& s);

// Templated definitional and non-definitional sentences, roughly 50/50,
// with valid trees, spans and BIO tags. Deterministic in the seed.
std::vector<Sentence> make_synthetic_corpus(std::uint64_t seed, int n_sentences);

struct EmbeddingCoverage {
  int found = 0;
  int total = 0;  // vocab words
  int dim = 0;
};

// Plain-text embeddings: "word v1 ... vdim" per line. Rows for in-vocab
// words are copied from the file; the rest are sampled uniformly from
// [-0.05, 0.05]. Throws on inconsistent dimensions.
std::pair<Tensor, EmbeddingCoverage> load_embeddings(std::string_view text, const Vocab& vocab,
                                                     Rng& rng);

std::string lowercase(std::string_view s);

}  // namespace defx
