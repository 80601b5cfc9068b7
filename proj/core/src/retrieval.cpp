#include "loopinv/retrieval.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>

#include <nlohmann/json.hpp>

#include "loopinv/extractor.hpp"

namespace loopinv {

std::size_t LabeledTree::size() const {
  std::size_t n = 1;
  for (const auto& c : children) n += c.size();
  return n;
}

LabeledTree to_labeled_tree(const SExpr& e) {
  if (!e.is_list()) return {print_sexpr(e), {}};
  const auto& kids = e.children();
  if (kids.empty()) return {"()", {}};
  LabeledTree node;
  std::size_t first_child = 1;
  if (kids.front().is_list()) {
    node.label = "@app";
    first_child = 0;
  } else {
    node.label = print_sexpr(kids.front());
  }
  for (std::size_t i = first_child; i < kids.size(); ++i)
    node.children.push_back(to_labeled_tree(kids[i]));
  return node;
}

namespace {

// Postorder view of a tree: labels, leftmost-leaf indices and keyroots.
struct Postorder {
  std::vector<const std::string*> labels;
  std::vector<std::size_t> leftmost;
  std::vector<std::size_t> keyroots;

  explicit Postorder(const LabeledTree& t) {
    visit(t);
    std::vector<bool> seen(labels.size() + 1, false);
    for (std::size_t i = labels.size(); i-- > 0;) {
      if (!seen[leftmost[i]]) {
        keyroots.push_back(i);
        seen[leftmost[i]] = true;
      }
    }
    std::reverse(keyroots.begin(), keyroots.end());
  }

  std::size_t visit(const LabeledTree& t) {
    std::size_t lm = 0;
    bool have_lm = false;
    for (const auto& c : t.children) {
      std::size_t child_lm = visit(c);
      if (!have_lm) {
        lm = child_lm;
        have_lm = true;
      }
    }
    labels.push_back(&t.label);
    leftmost.push_back(have_lm ? lm : labels.size() - 1);
    return leftmost.back();
  }
};

}  // namespace

std::size_t tree_edit_distance(const LabeledTree& a, const LabeledTree& b) {
  Postorder pa(a), pb(b);
  const std::size_t n = pa.labels.size(), m = pb.labels.size();
  std::vector<std::vector<std::size_t>> tree_dist(n, std::vector<std::size_t>(m, 0));
  std::vector<std::vector<std::size_t>> forest(n + 1, std::vector<std::size_t>(m + 1, 0));

  for (std::size_t i : pa.keyroots) {
    for (std::size_t j : pb.keyroots) {
      const std::size_t li = pa.leftmost[i], lj = pb.leftmost[j];
      // forest[x - li + 1][y - lj + 1] is the distance between the postorder
      // prefixes li..x and lj..y; row/column 0 is the empty forest.
      forest[0][0] = 0;
      for (std::size_t x = li; x <= i; ++x) forest[x - li + 1][0] = forest[x - li][0] + 1;
      for (std::size_t y = lj; y <= j; ++y) forest[0][y - lj + 1] = forest[0][y - lj] + 1;
      for (std::size_t x = li; x <= i; ++x) {
        for (std::size_t y = lj; y <= j; ++y) {
          const std::size_t fx = x - li + 1, fy = y - lj + 1;
          std::size_t del = forest[fx - 1][fy] + 1;
          std::size_t ins = forest[fx][fy - 1] + 1;
          if (pa.leftmost[x] == li && pb.leftmost[y] == lj) {
            std::size_t rel = forest[fx - 1][fy - 1] + (*pa.labels[x] == *pb.labels[y] ? 0 : 1);
            forest[fx][fy] = std::min({del, ins, rel});
            tree_dist[x][y] = forest[fx][fy];
          } else {
            std::size_t sub = forest[pa.leftmost[x] - li][pb.leftmost[y] - lj] + tree_dist[x][y];
            forest[fx][fy] = std::min({del, ins, sub});
          }
        }
      }
    }
  }
  return tree_dist[n - 1][m - 1];
}

std::string_view to_string(SimilarityMetric m) {
  return m == SimilarityMetric::Syntactic ? "syntactic" : "semantic";
}

std::optional<SimilarityMetric> parse_metric(std::string_view name) {
  if (name == "syntactic") return SimilarityMetric::Syntactic;
  if (name == "semantic") return SimilarityMetric::Semantic;
  return std::nullopt;
}

SimilarityScore syntactic_similarity(const SynthesisProblem& p, const SynthesisProblem& q) {
  double total = 0.0;
  for (Role r : {Role::PreF, Role::TransF, Role::PostF}) {
    LabeledTree tp = to_labeled_tree(p.function(r).body);
    LabeledTree tq = to_labeled_tree(q.function(r).body);
    double d = static_cast<double>(tree_edit_distance(tp, tq));
    double size = static_cast<double>(std::max(tp.size(), tq.size()));
    total += 1.0 - d / size;
  }
  return {total / 3.0, SimilarityMetric::Syntactic};
}

std::vector<std::string> LexicalEmbedder::tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  std::string current;
  for (char c : text) {
    if (c == '(' || c == ')' || std::isspace(static_cast<unsigned char>(c))) {
      if (!current.empty()) tokens.push_back(std::move(current));
      current.clear();
    } else {
      current.push_back(c);
    }
  }
  if (!current.empty()) tokens.push_back(std::move(current));
  return tokens;
}

void LexicalEmbedder::fit(const std::vector<std::string>& texts) {
  vocabulary_.clear();
  for (const auto& t : texts)
    for (auto& tok : tokenize(t)) vocabulary_.push_back(std::move(tok));
  std::sort(vocabulary_.begin(), vocabulary_.end());
  vocabulary_.erase(std::unique(vocabulary_.begin(), vocabulary_.end()), vocabulary_.end());
}

std::vector<double> LexicalEmbedder::embed(std::string_view text) const {
  std::vector<double> v(vocabulary_.size(), 0.0);
  for (const auto& tok : tokenize(text)) {
    auto it = std::lower_bound(vocabulary_.begin(), vocabulary_.end(), tok);
    if (it != vocabulary_.end() && *it == tok) v[static_cast<std::size_t>(it - vocabulary_.begin())] += 1.0;
  }
  return v;
}

std::string problem_text(const SynthesisProblem& p) {
  return print_sexpr(p.pre_f.body) + "\n" + print_sexpr(p.trans_f.body) + "\n" +
         print_sexpr(p.post_f.body);
}

namespace {

double cosine(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size())
    throw EmbedderFailure("embedding dimensions differ: " + std::to_string(a.size()) + " vs " +
                          std::to_string(b.size()));
  double dot = std::inner_product(a.begin(), a.end(), b.begin(), 0.0);
  double na = std::sqrt(std::inner_product(a.begin(), a.end(), a.begin(), 0.0));
  double nb = std::sqrt(std::inner_product(b.begin(), b.end(), b.begin(), 0.0));
  if (na == 0.0 || nb == 0.0) return 0.0;
  return std::clamp(dot / (na * nb), 0.0, 1.0);
}

double semantic_value(const std::string& tp, const std::string& tq, const Embedder& embedder) {
  if (tp == tq) return 1.0;
  return cosine(embedder.embed(tp), embedder.embed(tq));
}

}  // namespace

SimilarityScore semantic_similarity(const SynthesisProblem& p, const SynthesisProblem& q,
                                    const Embedder& embedder) {
  return {semantic_value(problem_text(p), problem_text(q), embedder), SimilarityMetric::Semantic};
}

SimilarityScore semantic_similarity(const SynthesisProblem& p, const SynthesisProblem& q) {
  LexicalEmbedder embedder({problem_text(p), problem_text(q)});
  return semantic_similarity(p, q, embedder);
}

bool CorpusEntry::has_valid() const {
  return std::any_of(solutions.begin(), solutions.end(),
                     [](const CorpusSolution& s) { return s.valid(); });
}

bool CorpusEntry::has_violated() const {
  return std::any_of(solutions.begin(), solutions.end(),
                     [](const CorpusSolution& s) { return !s.valid(); });
}

std::vector<CorpusEntry> load_corpus(const std::filesystem::path& dir) {
  std::vector<CorpusEntry> entries;
  std::map<std::string, std::size_t> by_id;
  for (auto& problem : load_problem_dir(dir)) {
    by_id[problem.id] = entries.size();
    entries.push_back({std::move(problem), {}});
  }

  const auto manifest = dir / "solutions.jsonl";
  std::ifstream in(manifest);
  if (!in) return entries;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    auto where = manifest.string() + ":" + std::to_string(line_no);
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw CorpusError(where + ": " + e.what());
    }
    const std::string id = j.value("problem", "");
    auto it = by_id.find(id);
    if (it == by_id.end()) throw CorpusError(where + ": unknown problem '" + id + "'");
    CorpusEntry& entry = entries[it->second];

    auto report = extract_invariant(j.value("invariant", ""), entry.problem, SanitizeOptions{{}});
    if (!report.candidate)
      throw CorpusError(where + ": bad invariant: " + report.failure->message());
    CorpusSolution sol{*report.candidate, std::nullopt, {}};
    const std::string status = j.value("status", "");
    if (status == "violated") {
      auto cond = parse_condition(j.value("condition", ""));
      if (!cond) throw CorpusError(where + ": violated entry needs a condition");
      sol.violated = cond;
      sol.reason = j.value("reason", "");
    } else if (status != "valid") {
      throw CorpusError(where + ": status must be valid or violated");
    }
    entry.solutions.push_back(std::move(sol));
  }
  return entries;
}

std::vector<RankedEntry> top_k_examples(const SynthesisProblem& query,
                                        const std::vector<CorpusEntry>& corpus, std::size_t k,
                                        SimilarityMetric metric, const Embedder* embedder) {
  std::vector<RankedEntry> ranked;
  for (const auto& e : corpus)
    if (e.problem.id != query.id) ranked.push_back({&e, {0.0, metric}});
  if (ranked.empty()) throw EmptyCorpus();

  std::optional<LexicalEmbedder> fitted;
  if (metric == SimilarityMetric::Semantic && embedder == nullptr) {
    std::vector<std::string> texts{problem_text(query)};
    for (const auto& r : ranked) texts.push_back(problem_text(r.entry->problem));
    fitted.emplace(texts);
    embedder = &*fitted;
  }
  for (auto& r : ranked) {
    r.score = metric == SimilarityMetric::Syntactic
                  ? syntactic_similarity(query, r.entry->problem)
                  : semantic_similarity(query, r.entry->problem, *embedder);
  }
  std::stable_sort(ranked.begin(), ranked.end(), [](const RankedEntry& a, const RankedEntry& b) {
    if (a.score.value != b.score.value) return a.score.value > b.score.value;
    return a.entry->problem.id < b.entry->problem.id;
  });
  if (ranked.size() > k) ranked.resize(k);
  return ranked;
}

}  // namespace loopinv
