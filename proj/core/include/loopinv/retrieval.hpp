#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "loopinv/problem.hpp"
#include "loopinv/verifier.hpp"

namespace loopinv {

/// Ordered labeled tree used for structural comparison of formulas.
struct LabeledTree {
  std::string label;
  std::vector<LabeledTree> children;

  std::size_t size() const;
  bool operator==(const LabeledTree&) const = default;
};

/// Atoms become leaves labeled with their printed token. A list becomes a node
/// labeled with its head token and the remaining elements as children; when the
/// head is itself a list the label is "@app" and every element is a child. The
/// empty list is the leaf "()".
LabeledTree to_labeled_tree(const SExpr& e);

/// Exact ordered tree edit distance with unit insert/delete/relabel costs
/// (Zhang and Shasha's keyroot dynamic program).
std::size_t tree_edit_distance(const LabeledTree& a, const LabeledTree& b);

enum class SimilarityMetric { Syntactic, Semantic };
std::string_view to_string(SimilarityMetric m);
std::optional<SimilarityMetric> parse_metric(std::string_view name);

struct SimilarityScore {
  double value = 0.0;
  SimilarityMetric metric = SimilarityMetric::Syntactic;
};

/// Average over PreF, TransF and PostF of 1 - d / max(|T_p|, |T_q|).
SimilarityScore syntactic_similarity(const SynthesisProblem& p, const SynthesisProblem& q);

class EmbedderFailure : public Error {
 public:
  using Error::Error;
};

/// Maps a problem's printed text to a vector of fixed dimension.
class Embedder {
 public:
  virtual ~Embedder() = default;
  virtual std::vector<double> embed(std::string_view text) const = 0;
};

/// Term-frequency vectors over a vocabulary fitted on a set of texts. Tokens
/// are parentheses-free S-expression atoms; unknown tokens are ignored.
class LexicalEmbedder : public Embedder {
 public:
  LexicalEmbedder() = default;
  explicit LexicalEmbedder(const std::vector<std::string>& texts) { fit(texts); }

  void fit(const std::vector<std::string>& texts);
  std::size_t dimension() const { return vocabulary_.size(); }
  std::vector<double> embed(std::string_view text) const override;

  static std::vector<std::string> tokenize(std::string_view text);

 private:
  std::vector<std::string> vocabulary_;  // sorted
};

/// The printed PreF, TransF and PostF bodies, one per line. This is the
/// text handed to embedders.
std::string problem_text(const SynthesisProblem& p);

/// Cosine similarity of the two embeddings, clamped to [0, 1]. Identical
/// texts score 1; a zero vector scores 0 against anything else.
SimilarityScore semantic_similarity(const SynthesisProblem& p, const SynthesisProblem& q,
                                    const Embedder& embedder);

/// Convenience overload fitting a LexicalEmbedder on the two problems.
SimilarityScore semantic_similarity(const SynthesisProblem& p, const SynthesisProblem& q);

struct CorpusSolution {
  CandidateInvariant invariant;
  /// Absent for a valid solution.
  std::optional<Condition> violated;
  /// Why the invariant fails; empty for valid ones.
  std::string reason;

  bool valid() const { return !violated.has_value(); }
};

struct CorpusEntry {
  SynthesisProblem problem;
  std::vector<CorpusSolution> solutions;

  bool has_valid() const;
  bool has_violated() const;
};

class CorpusError : public Error {
 public:
  using Error::Error;
};

/// Reads every `.sl` problem of `dir` plus `solutions.jsonl` (one object per
/// line with "problem", "invariant", "status" = valid|violated, and for
/// violated entries "condition" and "reason"). Entries are sorted by id.
std::vector<CorpusEntry> load_corpus(const std::filesystem::path& dir);

class EmptyCorpus : public Error {
 public:
  EmptyCorpus() : Error("corpus is empty") {}
};

struct RankedEntry {
  const CorpusEntry* entry = nullptr;
  SimilarityScore score;
};

/// Ranks the corpus (minus any entry sharing the query's id) by descending
/// score, ties by ascending id, and keeps the first min(k, size) entries. For
/// the semantic metric a null embedder means a LexicalEmbedder fitted on the
/// query and the corpus. The returned pointers alias `corpus`.
std::vector<RankedEntry> top_k_examples(const SynthesisProblem& query,
                                        const std::vector<CorpusEntry>& corpus, std::size_t k,
                                        SimilarityMetric metric,
                                        const Embedder* embedder = nullptr);

}  // namespace loopinv
