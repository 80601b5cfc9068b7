#include "test_support.hpp"

#include <algorithm>
#include <fstream>
#include <functional>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace loopinv::testing {

std::filesystem::path data_dir() { return LOOPINV_TEST_DATA_DIR; }
std::filesystem::path golden_dir() { return LOOPINV_TEST_GOLDEN_DIR; }
std::filesystem::path cli_path() { return LOOPINV_TEST_CLI; }

std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<FixtureCase> load_fixture_suite() {
  auto problems = load_problem_dir(data_dir() / "problems");
  auto candidates = nlohmann::json::parse(slurp(data_dir() / "candidates.json"));
  std::vector<FixtureCase> out;
  for (auto& p : problems) {
    FixtureCase fc{std::move(p), {}};
    for (const auto& c : candidates.at(fc.problem.id)) fc.candidates.push_back(c.get<std::string>());
    out.push_back(std::move(fc));
  }
  return out;
}

SynthesisProblem load_named(const std::string& relative) {
  return load_problem_file(data_dir() / relative);
}

CandidateInvariant candidate_for(const SynthesisProblem& p, const std::string& body) {
  auto parsed = parse_sexprs(body);
  if (parsed.size() != 1) throw std::runtime_error("expected one expression: " + body);
  return CandidateInvariant{parsed.front(), p.inv_params, {}};
}

// ---------------------------------------------------------------------------
// Bounded reference evaluator

namespace {

struct V {
  bool is_bool = false;
  bool b = false;
  std::int64_t i = 0;
};

using OracleEnv = std::map<std::string, std::int64_t>;

std::int64_t as_int(const V& v) {
  if (v.is_bool) throw std::runtime_error("oracle: expected Int");
  return v.i;
}
bool as_bool(const V& v) {
  if (!v.is_bool) throw std::runtime_error("oracle: expected Bool");
  return v.b;
}
V mk_int(std::int64_t i) { return V{false, false, i}; }
V mk_bool(bool b) { return V{true, b, 0}; }

V eval(const SExpr& e, const OracleEnv& env) {
  if (e.is_bool()) return mk_bool(e.bool_value());
  if (e.is_int()) return mk_int(e.int_value().convert_to<std::int64_t>());
  if (e.is_symbol()) {
    auto it = env.find(e.symbol_name());
    if (it == env.end()) throw std::runtime_error("oracle: unbound " + e.symbol_name());
    return mk_int(it->second);
  }
  const auto& xs = e.children();
  const std::string op(e.head());
  std::vector<V> a;
  for (std::size_t k = 1; k < xs.size(); ++k) a.push_back(eval(xs[k], env));

  if (op == "and") {
    for (const auto& v : a)
      if (!as_bool(v)) return mk_bool(false);
    return mk_bool(true);
  }
  if (op == "or") {
    for (const auto& v : a)
      if (as_bool(v)) return mk_bool(true);
    return mk_bool(false);
  }
  if (op == "not") return mk_bool(!as_bool(a.at(0)));
  if (op == "=>") return mk_bool(!as_bool(a.at(0)) || as_bool(a.at(1)));
  if (op == "ite") return as_bool(a.at(0)) ? a.at(1) : a.at(2);
  if (op == "=") {
    for (std::size_t k = 1; k < a.size(); ++k) {
      bool eq = a[0].is_bool ? as_bool(a[k]) == a[0].b : as_int(a[k]) == a[0].i;
      if (!eq) return mk_bool(false);
    }
    return mk_bool(true);
  }
  if (op == "<" || op == "<=" || op == ">" || op == ">=") {
    for (std::size_t k = 1; k < a.size(); ++k) {
      std::int64_t l = as_int(a[k - 1]), r = as_int(a[k]);
      bool ok = op == "<" ? l < r : op == "<=" ? l <= r : op == ">" ? l > r : l >= r;
      if (!ok) return mk_bool(false);
    }
    return mk_bool(true);
  }
  if (op == "+") {
    std::int64_t s = 0;
    for (const auto& v : a) s += as_int(v);
    return mk_int(s);
  }
  if (op == "*") {
    std::int64_t s = 1;
    for (const auto& v : a) s *= as_int(v);
    return mk_int(s);
  }
  if (op == "-") {
    if (a.size() == 1) return mk_int(-as_int(a[0]));
    std::int64_t s = as_int(a[0]);
    for (std::size_t k = 1; k < a.size(); ++k) s -= as_int(a[k]);
    return mk_int(s);
  }
  if (op == "mod" || op == "div") {
    std::int64_t x = as_int(a.at(0)), y = as_int(a.at(1));
    if (y == 0) throw std::runtime_error("oracle: division by zero");
    std::int64_t r = x % y;
    if (r < 0) r += y < 0 ? -y : y;
    return mk_int(op == "mod" ? r : (x - r) / y);
  }
  throw std::runtime_error("oracle: unsupported operator " + op);
}

bool holds(const SExpr& e, const OracleEnv& env) { return as_bool(eval(e, env)); }

// Calls fn for every assignment of `names` over [lo, hi]; stops when fn
// returns false. Returns false iff stopped early.
bool for_all(const std::vector<std::string>& names, std::int64_t lo, std::int64_t hi,
             OracleEnv& env, const std::function<bool(OracleEnv&)>& fn, std::size_t at = 0) {
  if (at == names.size()) return fn(env);
  for (std::int64_t v = lo; v <= hi; ++v) {
    env[names[at]] = v;
    if (!for_all(names, lo, hi, env, fn, at + 1)) return false;
  }
  return true;
}

}  // namespace

BoundedVerdict bounded_classify(const SynthesisProblem& p, const SExpr& inv_body, std::int64_t lo,
                                std::int64_t hi) {
  std::vector<std::string> vars, next;
  for (const auto& v : p.inv_params) {
    vars.push_back(v.name);
    next.push_back(primed(v));
  }

  OracleEnv env;
  bool init = for_all(vars, lo, hi, env, [&](OracleEnv& e) {
    return !holds(p.pre_f.body, e) || holds(inv_body, e);
  });
  if (!init) return {false, Condition::Initiation};

  bool consec = for_all(vars, lo, hi, env, [&](OracleEnv& e) {
    if (!holds(inv_body, e)) return true;
    return for_all(next, lo, hi, e, [&](OracleEnv& full) {
      if (!holds(p.trans_f.body, full)) return true;
      OracleEnv after;
      for (std::size_t k = 0; k < vars.size(); ++k) after[vars[k]] = full.at(next[k]);
      return holds(inv_body, after);
    });
  });
  if (!consec) return {false, Condition::Consecution};

  bool safe = for_all(vars, lo, hi, env, [&](OracleEnv& e) {
    return !holds(inv_body, e) || holds(p.post_f.body, e);
  });
  if (!safe) return {false, Condition::Safety};
  return {true, std::nullopt};
}

// ---------------------------------------------------------------------------
// Tree edit distance by exhaustive mapping search

namespace {

struct Flat {
  std::vector<std::string> label;
  std::vector<int> parent;  // preorder indices
};

void flatten(const LabeledTree& t, int parent, Flat& f) {
  f.label.push_back(t.label);
  f.parent.push_back(parent);
  int me = static_cast<int>(f.label.size()) - 1;
  for (const auto& c : t.children) flatten(c, me, f);
}

bool is_ancestor(const Flat& f, int a, int d) {
  for (int x = f.parent[d]; x >= 0; x = f.parent[x])
    if (x == a) return true;
  return false;
}

}  // namespace

std::size_t brute_force_edit_distance(const LabeledTree& a, const LabeledTree& b) {
  Flat fa, fb;
  flatten(a, -1, fa);
  flatten(b, -1, fb);
  const int na = static_cast<int>(fa.label.size()), nb = static_cast<int>(fb.label.size());

  std::vector<int> map_to(na, -1);
  std::vector<bool> used(nb, false);
  std::size_t best = static_cast<std::size_t>(na + nb);

  std::function<void(int, std::size_t, int)> go = [&](int i, std::size_t relabels, int mapped) {
    if (i == na) {
      best = std::min(best, relabels + static_cast<std::size_t>(na - mapped) +
                                static_cast<std::size_t>(nb - mapped));
      return;
    }
    go(i + 1, relabels, mapped);
    for (int j = 0; j < nb; ++j) {
      if (used[j]) continue;
      bool ok = true;
      for (int k = 0; k < i && ok; ++k) {
        int l = map_to[k];
        if (l < 0) continue;
        ok = is_ancestor(fa, k, i) == is_ancestor(fb, l, j) &&
             is_ancestor(fa, i, k) == is_ancestor(fb, j, l) && ((k < i) == (l < j));
      }
      if (!ok) continue;
      map_to[i] = j;
      used[j] = true;
      go(i + 1, relabels + (fa.label[i] != fb.label[j] ? 1 : 0), mapped + 1);
      map_to[i] = -1;
      used[j] = false;
    }
  };
  go(0, 0, 0);
  return best;
}

namespace {

std::vector<LabeledTree> trees_of_size(std::size_t n, const std::vector<std::string>& alphabet);

std::vector<std::vector<LabeledTree>> forests_of_size(std::size_t n,
                                                      const std::vector<std::string>& alphabet) {
  if (n == 0) return {{}};
  std::vector<std::vector<LabeledTree>> out;
  for (std::size_t first = 1; first <= n; ++first)
    for (const auto& t : trees_of_size(first, alphabet))
      for (auto rest : forests_of_size(n - first, alphabet)) {
        rest.insert(rest.begin(), t);
        out.push_back(std::move(rest));
      }
  return out;
}

std::vector<LabeledTree> trees_of_size(std::size_t n, const std::vector<std::string>& alphabet) {
  std::vector<LabeledTree> out;
  for (const auto& children : forests_of_size(n - 1, alphabet))
    for (const auto& l : alphabet) out.push_back(LabeledTree{l, children});
  return out;
}

}  // namespace

std::vector<LabeledTree> enumerate_trees(std::size_t max_nodes,
                                         const std::vector<std::string>& alphabet) {
  std::vector<LabeledTree> all;
  for (std::size_t n = 1; n <= max_nodes; ++n)
    for (auto& t : trees_of_size(n, alphabet)) all.push_back(std::move(t));
  return all;
}

}  // namespace loopinv::testing
