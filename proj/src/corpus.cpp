#include "defx/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>

namespace defx {

std::string lowercase(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

// ---------------------------------------------------------------- TagSet

TagSet TagSet::term_definition() {
  return TagSet({"B-Term", "I-Term", "B-Definition", "I-Definition", "O"});
}

TagSet TagSet::with_qualifier() {
  return TagSet({"B-Term", "I-Term", "B-Definition", "I-Definition", "B-Qualifier", "I-Qualifier", "O"});
}

int TagSet::index(const std::string& tag) const {
  for (std::size_t i = 0; i < tags_.size(); ++i)
    if (tags_[i] == tag) return static_cast<int>(i);
  throw std::invalid_argument("unknown tag: " + tag);
}

bool TagSet::contains(const std::string& tag) const {
  return std::find(tags_.begin(), tags_.end(), tag) != tags_.end();
}

std::string TagSet::class_of(const std::string& tag) {
  if (tag.size() > 2 && (tag[0] == 'B' || tag[0] == 'I') && tag[1] == '-') return tag.substr(2);
  return "";
}

// ---------------------------------------------------------------- Vocab

Vocab Vocab::build(std::span<const Sentence> corpus) {
  Vocab v;
  v.words_ = {"<unk>", "<pad>"};
  v.word_index_ = {{"<unk>", kWordUnk}, {"<pad>", kWordPad}};
  v.pos_ = {"<unk>"};
  v.pos_index_ = {{"<unk>", kPosUnk}};
  for (const Sentence& s : corpus) {
    for (const std::string& form : s.tokens) {
      const std::string key = lowercase(form);
      if (!v.word_index_.count(key)) {
        v.word_index_[key] = static_cast<int>(v.words_.size());
        v.words_.push_back(key);
      }
    }
    for (const std::string& p : s.pos) {
      if (!v.pos_index_.count(p)) {
        v.pos_index_[p] = static_cast<int>(v.pos_.size());
        v.pos_.push_back(p);
      }
    }
  }
  return v;
}

Vocab Vocab::from_lists(std::vector<std::string> words, std::vector<std::string> pos) {
  Vocab v;
  v.words_ = std::move(words);
  v.pos_ = std::move(pos);
  for (std::size_t i = 0; i < v.words_.size(); ++i) v.word_index_[v.words_[i]] = static_cast<int>(i);
  for (std::size_t i = 0; i < v.pos_.size(); ++i) v.pos_index_[v.pos_[i]] = static_cast<int>(i);
  return v;
}

int Vocab::word(const std::string& form) const {
  auto it = word_index_.find(lowercase(form));
  return it == word_index_.end() ? kWordUnk : it->second;
}

int Vocab::pos_tag(const std::string& tag) const {
  auto it = pos_index_.find(tag);
  return it == pos_index_.end() ? kPosUnk : it->second;
}

// ---------------------------------------------------------------- parsing

namespace {

std::vector<std::string> split_tabs(const std::string& line) {
  std::vector<std::string> cols;
  std::size_t start = 0;
  while (true) {
    std::size_t pos = line.find('\t', start);
    if (pos == std::string::npos) {
      cols.push_back(line.substr(start));
      break;
    }
    cols.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
  return cols;
}

int parse_int(const std::string& s, int line, const char* what) {
  try {
    std::size_t used = 0;
    int v = std::stoi(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ParseError(line, std::string("malformed ") + what + " '" + s + "'");
  }
}

void check_tree(const std::vector<int>& parent, int line) {
  const int n = static_cast<int>(parent.size());
  int roots = 0;
  for (int i = 0; i < n; ++i) {
    if (parent[i] == -1) ++roots;
    else if (parent[i] < 0 || parent[i] >= n || parent[i] == i)
      throw ParseError(line, "head array is not a tree");
  }
  if (roots != 1) throw ParseError(line, "head array is not a tree");
  for (int i = 0; i < n; ++i) {
    int node = i;
    int steps = 0;
    while (parent[node] != -1) {
      node = parent[node];
      if (++steps > n) throw ParseError(line, "head array is not a tree");
    }
  }
}

// Reconstructs typed spans from BIO tags; tag_lines holds the source line of
// each token for error reporting.
std::vector<std::pair<std::string, Span>> spans_from_tags(const std::vector<std::string>& tags,
                                                          const std::vector<int>& tag_lines) {
  std::vector<std::pair<std::string, Span>> spans;
  std::string open;
  int open_start = -1;
  auto close = [&](int end) {
    if (!open.empty()) spans.push_back({open, Span{open_start, end}});
    open.clear();
  };
  for (int i = 0; i < static_cast<int>(tags.size()); ++i) {
    const std::string& tag = tags[static_cast<std::size_t>(i)];
    const int line = tag_lines[static_cast<std::size_t>(i)];
    if (tag == "O") {
      close(i - 1);
    } else if (tag.rfind("B-", 0) == 0) {
      close(i - 1);
      open = tag.substr(2);
      open_start = i;
    } else if (tag.rfind("I-", 0) == 0) {
      if (open != tag.substr(2))
        throw ParseError(line, "BIO inconsistency: " + tag + " not preceded by B-" + tag.substr(2) +
                                   " or I-" + tag.substr(2));
      // continues the open span
    } else {
      throw ParseError(line, "malformed tag '" + tag + "'");
    }
    if (!open.empty() && open != "Term" && open != "Definition" && open != "Qualifier")
      throw ParseError(line, "unknown span type '" + open + "'");
  }
  close(static_cast<int>(tags.size()) - 1);
  return spans;
}

void assign_spans(Sentence& s, const std::vector<std::pair<std::string, Span>>& spans) {
  for (const auto& [type, span] : spans) {
    if (type == "Term") {
      if (!s.term) s.term = span;
    } else if (type == "Definition") {
      if (!s.definition) s.definition = span;
    } else {
      s.qualifiers.push_back(span);
    }
  }
}

}  // namespace

std::vector<Sentence> parse_corpus(std::string_view text) {
  std::vector<Sentence> corpus;

  std::vector<std::string> lines;
  {
    std::string cur;
    for (char c : text) {
      if (c == '\n') {
        lines.push_back(cur);
        cur.clear();
      } else if (c != '\r') {
        cur += c;
      }
    }
    if (!cur.empty()) lines.push_back(cur);
  }

  int i = 0;
  const int n_lines = static_cast<int>(lines.size());
  while (i < n_lines) {
    if (lines[static_cast<std::size_t>(i)].empty()) {
      ++i;
      continue;
    }
    // Block header.
    const std::string& header = lines[static_cast<std::size_t>(i)];
    const int header_line = i + 1;
    bool label = false;
    {
      std::istringstream ss(header);
      std::string hash, key, value;
      ss >> hash >> key >> value;
      if (hash != "#" || key != "label:" || (value != "0" && value != "1"))
        throw ParseError(header_line, "expected '# label: 0|1' block header");
      label = value == "1";
    }
    ++i;
    Sentence s;
    std::vector<int> tag_lines;
    int expected_index = 1;
    while (i < n_lines && !lines[static_cast<std::size_t>(i)].empty()) {
      const std::string& line = lines[static_cast<std::size_t>(i)];
      const int line_no = i + 1;
      if (line[0] == '#') {  // auxiliary comment, e.g. extracted pairs
        ++i;
        continue;
      }
      std::vector<std::string> cols = split_tabs(line);
      if (cols.size() != 5)
        throw ParseError(line_no, "expected 5 tab-separated columns, got " + std::to_string(cols.size()));
      const int index = parse_int(cols[0], line_no, "token index");
      if (index != expected_index)
        throw ParseError(line_no, "token index " + std::to_string(index) + " out of order");
      ++expected_index;
      if (cols[1].empty()) throw ParseError(line_no, "empty token form");
      if (cols[2].empty()) throw ParseError(line_no, "empty POS tag");
      s.tokens.push_back(cols[1]);
      s.pos.push_back(cols[2]);
      const int head = parse_int(cols[3], line_no, "head");
      s.parent.push_back(head - 1);  // 0 (root) becomes -1
      s.tags.push_back(cols[4]);
      tag_lines.push_back(line_no);
      ++i;
    }
    if (s.tokens.empty()) throw ParseError(header_line, "empty sentence block");
    for (std::size_t t = 0; t < s.parent.size(); ++t) {
      if (s.parent[t] < -1 || s.parent[t] >= s.size())
        throw ParseError(tag_lines[t], "head out of range");
    }
    check_tree(s.parent, tag_lines[0]);

    const bool unlabeled =
        std::all_of(s.tags.begin(), s.tags.end(), [](const std::string& t) { return t == "_"; });
    if (unlabeled) {
      s.tags.clear();
    } else {
      assign_spans(s, spans_from_tags(s.tags, tag_lines));
      s.definitional = label;
    }
    corpus.push_back(std::move(s));
  }
  return corpus;
}

std::string render_corpus(std::span<const Sentence> corpus) {
  std::string out;
  bool first = true;
  for (const Sentence& s : corpus) {
    if (!first) out += "\n";
    first = false;
    out += "# label: ";
    out += s.definitional.value_or(false) ? "1" : "0";
    out += "\n";
    for (int i = 0; i < s.size(); ++i) {
      out += std::to_string(i + 1);
      out += "\t";
      out += s.tokens[static_cast<std::size_t>(i)];
      out += "\t";
      out += s.pos[static_cast<std::size_t>(i)];
      out += "\t";
      out += std::to_string(s.parent[static_cast<std::size_t>(i)] + 1);
      out += "\t";
      out += s.labeled() ? s.tags[static_cast<std::size_t>(i)] : "_";
      out += "\n";
    }
  }
  return out;
}

void validate_sentence(const Sentence& s) {
  const int n = s.size();
  if (n < 1) throw std::invalid_argument("sentence: empty");
  if (static_cast<int>(s.pos.size()) != n || static_cast<int>(s.parent.size()) != n)
    throw std::invalid_argument("sentence: parallel lists differ in length");
  if (s.labeled() && static_cast<int>(s.tags.size()) != n)
    throw std::invalid_argument("sentence: tag list length mismatch");

  try {
    check_tree(s.parent, 0);
  } catch (const ParseError&) {
    throw std::invalid_argument("sentence: head array is not a tree");
  }

  auto check_span = [&](const Span& sp, const char* what) {
    if (sp.start < 0 || sp.end >= n || sp.start > sp.end)
      throw std::invalid_argument(std::string("sentence: bad ") + what + " span");
  };
  if (s.term) check_span(*s.term, "term");
  if (s.definition) check_span(*s.definition, "definition");
  for (const Span& q : s.qualifiers) check_span(q, "qualifier");

  if (s.labeled()) {
    std::vector<int> lines(static_cast<std::size_t>(n), 0);
    std::vector<std::pair<std::string, Span>> spans;
    try {
      spans = spans_from_tags(s.tags, lines);
    } catch (const ParseError& e) {
      throw std::invalid_argument(std::string("sentence: ") + e.what());
    }
    Sentence probe;
    assign_spans(probe, spans);
    if (probe.term != s.term || probe.definition != s.definition || probe.qualifiers != s.qualifiers)
      throw std::invalid_argument("sentence: spans inconsistent with tags");
    if (!s.definitional)
      throw std::invalid_argument("sentence: labeled sentence missing sentence label");
    const bool has_pair = s.term && s.definition;
    if (*s.definitional != has_pair)
      throw std::invalid_argument("sentence: sentence label inconsistent with spans");
  } else {
    if (s.term || s.definition || !s.qualifiers.empty())
      throw std::invalid_argument("sentence: spans present without tags");
  }
}

// ------------------------------------------------------- synthetic corpus

namespace {

const std::vector<std::string> kTermNouns = {
    "gravity", "photosynthesis", "entropy", "osmosis",  "inertia",  "catalysis",
    "neuron",  "algorithm",      "polymer", "enzyme",   "ecosystem", "molecule"};
const std::vector<std::string> kTermMods = {"kinetic", "chemical", "neural", "thermal"};
const std::vector<std::string> kDefAdjs = {"natural", "physical",   "gradual",
                                           "complex", "fundamental", "biological"};
const std::vector<std::string> kDefNouns = {"force",  "process",   "tendency", "measure",  "reaction",
                                            "structure", "system", "procedure", "substance", "network"};
const std::vector<std::string> kTails = {"attraction", "disorder", "computation", "change",
                                         "cells",      "energy",   "matter",      "molecules"};
const std::vector<std::string> kPlainNouns = {"student", "engine", "valve",  "garden",
                                              "river",   "signal", "market", "sample"};
const std::vector<std::string> kVerbs = {"moves", "changes", "contains", "absorbs", "crosses"};
const std::vector<std::string> kStudyVerbs = {"study", "measure", "observe", "record"};
const std::vector<std::string> kAdverbs = {"quickly", "slowly", "carefully"};

struct Builder {
  Sentence s;
  int add(const std::string& form, const std::string& pos, int parent, const std::string& tag) {
    s.tokens.push_back(form);
    s.pos.push_back(pos);
    s.parent.push_back(parent);
    s.tags.push_back(tag);
    return s.size() - 1;
  }
};

Sentence make_definitional(Rng& rng) {
  Builder b;
  const int kind = static_cast<int>(rng.below(3));
  const bool with_mod = rng.below(2) == 0;

  if (kind == 0) {
    // [mod] TERM is a ADJ NOUN [of TAIL] [.]
    const bool with_tail = rng.below(2) == 0;
    const bool with_stop = rng.below(2) == 0;
    const int t0 = 0;
    const int term_noun = with_mod ? 1 : 0;
    const int verb = term_noun + 1;
    const int noun = verb + 3;
    if (with_mod) b.add(rng.pick(kTermMods), "JJ", term_noun, "B-Term");
    b.add(rng.pick(kTermNouns), "NN", verb, with_mod ? "I-Term" : "B-Term");
    b.add("is", "VBZ", -1, "O");
    b.add("a", "DT", noun, "O");
    b.add(rng.pick(kDefAdjs), "JJ", noun, "B-Definition");
    b.add(rng.pick(kDefNouns), "NN", verb, "I-Definition");
    if (with_tail) {
      const int of = b.add("of", "IN", noun, "I-Definition");
      b.add(rng.pick(kTails), "NN", of, "I-Definition");
    }
    if (with_stop) b.add(".", ".", verb, "O");
    b.s.term = Span{t0, term_noun};
    b.s.definition = Span{noun - 1, with_tail ? noun + 2 : noun};
  } else if (kind == 1) {
    // TERM means the NOUN of TAIL
    b.add(rng.pick(kTermNouns), "NN", 1, "B-Term");
    b.add("means", "VBZ", -1, "O");
    b.add("the", "DT", 3, "O");
    b.add(rng.pick(kDefNouns), "NN", 1, "B-Definition");
    b.add("of", "IN", 3, "I-Definition");
    b.add(rng.pick(kTails), "NN", 4, "I-Definition");
    b.s.term = Span{0, 0};
    b.s.definition = Span{3, 5};
  } else {
    // [mod] TERM denotes a ADJ NOUN
    const int term_noun = with_mod ? 1 : 0;
    const int verb = term_noun + 1;
    const int noun = verb + 3;
    if (with_mod) b.add(rng.pick(kTermMods), "JJ", term_noun, "B-Term");
    b.add(rng.pick(kTermNouns), "NN", verb, with_mod ? "I-Term" : "B-Term");
    b.add("denotes", "VBZ", -1, "O");
    b.add("a", "DT", noun, "O");
    b.add(rng.pick(kDefAdjs), "JJ", noun, "B-Definition");
    b.add(rng.pick(kDefNouns), "NN", verb, "I-Definition");
    b.s.term = Span{0, term_noun};
    b.s.definition = Span{noun - 1, noun};
  }
  b.s.definitional = true;
  return std::move(b.s);
}

Sentence make_non_definitional(Rng& rng) {
  Builder b;
  const int kind = static_cast<int>(rng.below(3));
  if (kind == 0) {
    // the NOUN VERB the NOUN [.]
    const bool with_stop = rng.below(2) == 0;
    b.add("the", "DT", 1, "O");
    b.add(rng.pick(kPlainNouns), "NN", 2, "O");
    b.add(rng.pick(kVerbs), "VBZ", -1, "O");
    b.add("the", "DT", 4, "O");
    b.add(rng.pick(kPlainNouns), "NN", 2, "O");
    if (with_stop) b.add(".", ".", 2, "O");
  } else if (kind == 1) {
    // NOUN and NOUN VERB ADV
    b.add(rng.pick(kPlainNouns), "NN", 3, "O");
    b.add("and", "CC", 0, "O");
    b.add(rng.pick(kPlainNouns), "NN", 0, "O");
    b.add(rng.pick(kVerbs), "VBZ", -1, "O");
    b.add(rng.pick(kAdverbs), "RB", 3, "O");
  } else {
    // researchers VERB the NOUN
    b.add("researchers", "NNS", 1, "O");
    b.add(rng.pick(kStudyVerbs), "VBP", -1, "O");
    b.add("the", "DT", 3, "O");
    b.add(rng.pick(kPlainNouns), "NN", 1, "O");
  }
  b.s.definitional = false;
  return std::move(b.s);
}

}  // namespace

std::vector<Sentence> make_synthetic_corpus(std::uint64_t seed, int n_sentences) {
  if (n_sentences < 1) throw std::invalid_argument("make_synthetic_corpus: n_sentences < 1");
  Rng rng(seed);
  std::vector<Sentence> corpus;
  corpus.reserve(static_cast<std::size_t>(n_sentences));
  for (int i = 0; i < n_sentences; ++i) {
    corpus.push_back(i % 2 == 0 ? make_definitional(rng) : make_non_definitional(rng));
  }
  return corpus;
}

// ------------------------------------------------------------ embeddings

std::pair<Tensor, EmbeddingCoverage> load_embeddings(std::string_view text, const Vocab& vocab,
                                                     Rng& rng) {
  std::map<std::string, std::vector<double>> loaded;
  int dim = -1;
  int line_no = 0;
  std::istringstream stream{std::string(text)};
  std::string line;
  while (std::getline(stream, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string word;
    ls >> word;
    std::vector<double> values;
    double v;
    while (ls >> v) values.push_back(v);
    if (values.empty()) throw ParseError(line_no, "embedding line has no values");
    if (dim == -1) dim = static_cast<int>(values.size());
    if (static_cast<int>(values.size()) != dim)
      throw ParseError(line_no, "inconsistent embedding dimension: expected " + std::to_string(dim) +
                                    ", got " + std::to_string(values.size()));
    loaded[lowercase(word)] = std::move(values);
  }
  if (dim <= 0) throw std::invalid_argument("load_embeddings: empty embedding file");

  Tensor table = Tensor::zeros({vocab.word_count(), dim});
  EmbeddingCoverage cov;
  cov.total = vocab.word_count();
  cov.dim = dim;
  for (int r = 0; r < vocab.word_count(); ++r) {
    auto it = loaded.find(vocab.words()[static_cast<std::size_t>(r)]);
    if (it != loaded.end()) {
      for (int j = 0; j < dim; ++j) table.at(r, j) = it->second[static_cast<std::size_t>(j)];
      ++cov.found;
    } else {
      for (int j = 0; j < dim; ++j) table.at(r, j) = rng.uniform(-0.05, 0.05);
    }
  }
  return {std::move(table), cov};
}

}  // namespace defx
