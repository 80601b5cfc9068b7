#include <filesystem>
#include <fstream>
#include <random>

#include <gtest/gtest.h>

#include "loopinv/retrieval.hpp"
#include "test_support.hpp"

using namespace loopinv;
using loopinv::testing::data_dir;
using loopinv::testing::load_named;

namespace {

LabeledTree T(std::string label, std::vector<LabeledTree> kids = {}) {
  return LabeledTree{std::move(label), std::move(kids)};
}

LabeledTree random_tree(std::mt19937& rng, int budget) {
  LabeledTree t{std::string(1, "abc"[rng() % 3]), {}};
  int kids = budget > 1 ? static_cast<int>(rng() % 3) : 0;
  for (int i = 0; i < kids && budget > 1; ++i) {
    int share = 1 + static_cast<int>(rng() % static_cast<unsigned>(budget - 1));
    t.children.push_back(random_tree(rng, share));
    budget -= share;
  }
  return t;
}

class FixedEmbedder : public Embedder {
 public:
  std::vector<double> embed(std::string_view text) const override {
    return {static_cast<double>(text.size()), 1.0};
  }
};

}  // namespace

TEST(LabeledTree, Conventions) {
  auto t = to_labeled_tree(parse_sexprs("(and (>= x 1) true)")[0]);
  EXPECT_EQ(t, T("and", {T(">=", {T("x"), T("1")}), T("true")}));
  EXPECT_EQ(t.size(), 5u);
  EXPECT_EQ(to_labeled_tree(parse_sexprs("((f a) b)")[0]),
            T("@app", {T("f", {T("a")}), T("b")}));
  EXPECT_EQ(to_labeled_tree(SExpr::list()), T("()"));
  EXPECT_EQ(to_labeled_tree(parse_sexprs("-3")[0]), T("-3"));
}

TEST(TreeEditDistance, KnownValues) {
  EXPECT_EQ(tree_edit_distance(T("a"), T("a")), 0u);
  EXPECT_EQ(tree_edit_distance(T("a"), T("b")), 1u);
  EXPECT_EQ(tree_edit_distance(T("a", {T("b"), T("c")}), T("a")), 2u);
  // The classic example: f(d(a c(b)) e) vs f(c(d(a b)) e).
  auto t1 = T("f", {T("d", {T("a"), T("c", {T("b")})}), T("e")});
  auto t2 = T("f", {T("c", {T("d", {T("a"), T("b")})}), T("e")});
  EXPECT_EQ(tree_edit_distance(t1, t2), 2u);
}

TEST(TreeEditDistanceProperty, MatchesBruteForceOnRandomTrees) {
  std::mt19937 rng(3);
  for (int i = 0; i < 300; ++i) {
    auto a = random_tree(rng, 1 + static_cast<int>(rng() % 6));
    auto b = random_tree(rng, 1 + static_cast<int>(rng() % 6));
    ASSERT_EQ(tree_edit_distance(a, b), loopinv::testing::brute_force_edit_distance(a, b));
  }
}

TEST(TreeEditDistanceProperty, BoundedBySizes) {
  std::mt19937 rng(5);
  for (int i = 0; i < 300; ++i) {
    auto a = random_tree(rng, 10), b = random_tree(rng, 10);
    auto d = tree_edit_distance(a, b);
    EXPECT_LE(d, std::max(a.size(), b.size()) + std::min(a.size(), b.size()));
    EXPECT_GE(d, a.size() > b.size() ? a.size() - b.size() : b.size() - a.size());
    EXPECT_EQ(d, tree_edit_distance(b, a));
  }
}

TEST(Similarity, SyntacticBasics) {
  auto p = load_named("problems/p02_fig1.sl");
  auto q = load_named("problems/p03_two_counters.sl");
  EXPECT_DOUBLE_EQ(syntactic_similarity(p, p).value, 1.0);
  auto s = syntactic_similarity(p, q);
  EXPECT_EQ(s.metric, SimilarityMetric::Syntactic);
  EXPECT_GE(s.value, 0.0);
  EXPECT_LT(s.value, 1.0);
  EXPECT_DOUBLE_EQ(s.value, syntactic_similarity(q, p).value);
}

TEST(Similarity, SemanticBasics) {
  auto p = load_named("problems/p02_fig1.sl");
  auto q = load_named("problems/p06_even.sl");
  EXPECT_DOUBLE_EQ(semantic_similarity(p, p).value, 1.0);
  auto s = semantic_similarity(p, q);
  EXPECT_EQ(s.metric, SimilarityMetric::Semantic);
  EXPECT_GE(s.value, 0.0);
  EXPECT_LE(s.value, 1.0);
  FixedEmbedder fixed;
  EXPECT_GT(semantic_similarity(p, q, fixed).value, 0.5);
}

TEST(LexicalEmbedder, TokensAndVocabulary) {
  EXPECT_EQ(LexicalEmbedder::tokenize("(and (>= x! 1))"),
            (std::vector<std::string>{"and", ">=", "x!", "1"}));
  LexicalEmbedder e({"(a b)", "(b c)"});
  EXPECT_EQ(e.dimension(), 3u);
  auto v = e.embed("(b b zzz)");
  EXPECT_EQ(v, (std::vector<double>{0.0, 2.0, 0.0}));
  EXPECT_EQ(problem_text(load_named("problems/p02_fig1.sl")),
            "(and (= x 1) (= y 0))\n(and (= x! (+ x y)) (= y! (+ y 1)))\n(>= x y)");
}

TEST(Metric, Names) {
  EXPECT_EQ(parse_metric("semantic"), SimilarityMetric::Semantic);
  EXPECT_EQ(to_string(SimilarityMetric::Syntactic), "syntactic");
  EXPECT_FALSE(parse_metric("cosine"));
}

TEST(Corpus, LoadsSolutions) {
  auto corpus = load_corpus(data_dir() / "corpus");
  ASSERT_EQ(corpus.size(), 12u);
  for (const auto& e : corpus) EXPECT_TRUE(e.has_valid()) << e.problem.id;
  const auto& fig = corpus[1];
  EXPECT_EQ(fig.problem.id, "p02_fig1");
  EXPECT_TRUE(fig.has_violated());
  for (const auto& s : fig.solutions)
    if (!s.valid()) EXPECT_FALSE(s.reason.empty());
}

TEST(Corpus, RejectsBadManifest) {
  auto dir = std::filesystem::temp_directory_path() / "loopinv_bad_corpus";
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  std::filesystem::copy_file(data_dir() / "problems/p01_count_up.sl", dir / "p01_count_up.sl");
  auto write = [&](const std::string& line) {
    std::ofstream(dir / "solutions.jsonl") << line << "\n";
  };
  write(R"j({"problem": "nope", "invariant": "true", "status": "valid"})j");
  EXPECT_THROW(load_corpus(dir), CorpusError);
  write(R"j({"problem": "p01_count_up", "invariant": "(>= q 0)", "status": "valid"})j");
  EXPECT_THROW(load_corpus(dir), CorpusError);
  write(R"j({"problem": "p01_count_up", "invariant": "(>= x 0)", "status": "violated"})j");
  EXPECT_THROW(load_corpus(dir), CorpusError);
  write("{not json");
  EXPECT_THROW(load_corpus(dir), CorpusError);
  write(R"j({"problem": "p01_count_up", "invariant": "(>= x 0)", "status": "valid"})j");
  EXPECT_EQ(load_corpus(dir).at(0).solutions.size(), 1u);
  std::filesystem::remove_all(dir);
}

TEST(TopK, ExcludesQueryAndOrders) {
  auto corpus = load_corpus(data_dir() / "corpus");
  auto query = load_named("problems/p02_fig1.sl");
  for (auto metric : {SimilarityMetric::Syntactic, SimilarityMetric::Semantic}) {
    auto ranked = top_k_examples(query, corpus, 100, metric);
    ASSERT_EQ(ranked.size(), 11u);
    for (std::size_t i = 0; i < ranked.size(); ++i) {
      EXPECT_NE(ranked[i].entry->problem.id, "p02_fig1");
      if (i > 0) {
        const auto& a = ranked[i - 1];
        const auto& b = ranked[i];
        EXPECT_TRUE(a.score.value > b.score.value ||
                    (a.score.value == b.score.value && a.entry->problem.id < b.entry->problem.id));
      }
    }
    EXPECT_EQ(top_k_examples(query, corpus, 2, metric).size(), 2u);
  }
}

TEST(TopK, TiesBreakById) {
  auto corpus = load_corpus(data_dir() / "corpus");
  FixedEmbedder same;  // every text of equal length scores identically
  std::vector<CorpusEntry> twins{corpus[3], corpus[3]};
  twins[0].problem.id = "b_twin";
  twins[1].problem.id = "a_twin";
  auto ranked = top_k_examples(corpus[0].problem, twins, 2, SimilarityMetric::Semantic, &same);
  EXPECT_EQ(ranked[0].entry->problem.id, "a_twin");
}

TEST(TopK, EmptyCorpus) {
  auto query = load_named("problems/p02_fig1.sl");
  EXPECT_THROW(top_k_examples(query, {}, 2, SimilarityMetric::Syntactic), EmptyCorpus);
  std::vector<CorpusEntry> only_self{{query, {}}};
  EXPECT_THROW(top_k_examples(query, only_self, 2, SimilarityMetric::Syntactic), EmptyCorpus);
}

// Renamed identifiers keep the shape; reshaped formulas keep the vocabulary.
TEST(TopK, SimilarityFixtureSeparatesMetrics) {
  auto corpus = load_corpus(data_dir() / "similarity");
  auto query = load_named("similarity/query.sl");
  EXPECT_EQ(top_k_examples(query, corpus, 1, SimilarityMetric::Syntactic)[0].entry->problem.id,
            "renamed");
  EXPECT_EQ(top_k_examples(query, corpus, 1, SimilarityMetric::Semantic)[0].entry->problem.id,
            "reshaped");
  EXPECT_EQ(top_k_examples(query, corpus, 3, SimilarityMetric::Semantic)[2].entry->problem.id,
            "unrelated");
}
