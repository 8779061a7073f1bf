#include "taskrec/forest.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace taskrec::help {

void ForestConfig::validate() const {
  if (n_trees == 0) throw ValidationError("forest needs at least one tree");
  if (min_leaf == 0) throw ValidationError("min_leaf must be at least 1");
}

nlohmann::json ForestConfig::to_json() const {
  return {{"n_trees", n_trees}, {"min_leaf", min_leaf}, {"max_features", max_features}, {"seed", seed}};
}

ForestConfig ForestConfig::from_json(const nlohmann::json& j) {
  ForestConfig c;
  c.n_trees = j.value("n_trees", c.n_trees);
  c.min_leaf = j.value("min_leaf", c.min_leaf);
  c.max_features = j.value("max_features", c.max_features);
  c.seed = j.value("seed", c.seed);
  return c;
}

double DecisionTree::predict(std::span<const double> x) const {
  int n = 0;
  while (nodes[static_cast<std::size_t>(n)].feature >= 0) {
    const TreeNode& node = nodes[static_cast<std::size_t>(n)];
    n = x[static_cast<std::size_t>(node.feature)] <= node.threshold ? node.left : node.right;
  }
  return nodes[static_cast<std::size_t>(n)].p_help;
}

std::size_t DecisionTree::depth() const {
  std::vector<std::pair<int, std::size_t>> stack{{0, 0}};
  std::size_t best = 0;
  while (!stack.empty()) {
    auto [n, d] = stack.back();
    stack.pop_back();
    best = std::max(best, d);
    const TreeNode& node = nodes[static_cast<std::size_t>(n)];
    if (node.feature >= 0) {
      stack.push_back({node.left, d + 1});
      stack.push_back({node.right, d + 1});
    }
  }
  return best;
}

namespace {

struct Builder {
  const std::vector<std::vector<double>>& X;
  const std::vector<int>& y;
  std::size_t min_leaf;
  std::size_t max_features;
  Rng& rng;
  DecisionTree tree;

  struct Split {
    int feature = -1;
    double threshold = 0.0;
    double impurity = 0.0;  // weighted child Gini
  };

  static double gini(double pos, double n) {
    if (n <= 0.0) return 0.0;
    const double p = pos / n;
    return 2.0 * p * (1.0 - p);
  }

  Split best_split_on(std::vector<std::size_t>& idx, std::size_t f, double total_pos) const {
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return X[a][f] < X[b][f]; });
    Split best;
    best.impurity = std::numeric_limits<double>::infinity();
    const auto n = static_cast<double>(idx.size());
    double left_pos = 0.0;
    for (std::size_t i = 0; i + 1 < idx.size(); ++i) {
      left_pos += y[idx[i]];
      const double lo = X[idx[i]][f];
      const double hi = X[idx[i + 1]][f];
      if (lo == hi) continue;
      const std::size_t nl = i + 1;
      const std::size_t nr = idx.size() - nl;
      if (nl < min_leaf || nr < min_leaf) continue;
      const auto l = static_cast<double>(nl);
      const auto r = static_cast<double>(nr);
      const double imp = (l * gini(left_pos, l) + r * gini(total_pos - left_pos, r)) / n;
      if (imp < best.impurity) {
        best.impurity = imp;
        best.feature = static_cast<int>(f);
        best.threshold = lo + (hi - lo) / 2.0;
        if (!(best.threshold < hi)) best.threshold = lo;  // adjacent doubles
      }
    }
    return best;
  }

  int grow(std::vector<std::size_t> idx) {
    const int id = static_cast<int>(tree.nodes.size());
    tree.nodes.emplace_back();
    double pos = 0.0;
    for (std::size_t i : idx) pos += y[i];
    const auto n = static_cast<double>(idx.size());
    tree.nodes[static_cast<std::size_t>(id)].p_help = pos / n;
    const double parent = gini(pos, n);
    if (parent == 0.0 || idx.size() < 2 * min_leaf) return id;

    // Try a random subset of features first; keep drawing from the rest
    // only when none of them yields a useful split.
    const std::size_t d = X.front().size();
    std::vector<std::size_t> features(d);
    std::iota(features.begin(), features.end(), 0);
    std::shuffle(features.begin(), features.end(), rng);
    Split best;
    best.impurity = std::numeric_limits<double>::infinity();
    for (std::size_t tried = 0; tried < d; ++tried) {
      if (tried >= max_features && best.feature >= 0) break;
      Split s = best_split_on(idx, features[tried], pos);
      if (s.feature >= 0 && s.impurity < best.impurity) best = s;
    }
    if (best.feature < 0 || !(best.impurity < parent)) return id;

    std::vector<std::size_t> left, right;
    for (std::size_t i : idx) {
      (X[i][static_cast<std::size_t>(best.feature)] <= best.threshold ? left : right).push_back(i);
    }
    idx.clear();
    idx.shrink_to_fit();
    const int l = grow(std::move(left));
    const int r = grow(std::move(right));
    TreeNode& node = tree.nodes[static_cast<std::size_t>(id)];
    node.feature = best.feature;
    node.threshold = best.threshold;
    node.left = l;
    node.right = r;
    return id;
  }
};

}  // namespace

RandomForest RandomForest::fit(const std::vector<std::vector<double>>& features, const std::vector<int>& labels,
                               const ForestConfig& cfg) {
  cfg.validate();
  if (features.size() != labels.size()) throw ValidationError("features and labels differ in length");
  if (features.size() < 2) throw ValidationError("forest needs at least 2 examples");
  const std::size_t d = features.front().size();
  if (d == 0) throw ValidationError("forest needs at least one feature");
  for (const auto& row : features) {
    if (row.size() != d) throw ValidationError("feature rows differ in width");
  }
  std::size_t pos = 0;
  for (int l : labels) {
    if (l != 0 && l != 1) throw ValidationError("labels must be 0 or 1");
    pos += static_cast<std::size_t>(l);
  }
  if (pos == 0 || pos == labels.size()) throw ValidationError("forest needs both classes");

  RandomForest forest;
  forest.cfg_ = cfg;
  forest.num_features_ = d;
  const std::size_t max_features =
      cfg.max_features ? std::min(cfg.max_features, d)
                       : std::max<std::size_t>(1, static_cast<std::size_t>(std::lround(std::sqrt(static_cast<double>(d)))));
  const std::size_t n = features.size();
  for (std::size_t t = 0; t < cfg.n_trees; ++t) {
    Rng rng = make_rng(cfg.seed, t);
    std::uniform_int_distribution<std::size_t> pick(0, n - 1);
    std::vector<std::size_t> sample(n);
    for (auto& s : sample) s = pick(rng);
    Builder b{features, labels, cfg.min_leaf, max_features, rng, {}};
    b.grow(std::move(sample));
    forest.trees_.push_back(std::move(b.tree));
  }
  return forest;
}

double RandomForest::predict(std::span<const double> x) const {
  if (trees_.empty()) throw ValidationError("forest is not fitted");
  if (x.size() != num_features_) throw ValidationError("feature vector has the wrong width");
  double sum = 0.0;
  for (const auto& t : trees_) sum += t.predict(x);
  return sum / static_cast<double>(trees_.size());
}

nlohmann::json RandomForest::to_json() const {
  nlohmann::json trees = nlohmann::json::array();
  for (const auto& t : trees_) {
    nlohmann::json nodes = nlohmann::json::array();
    for (const auto& n : t.nodes) {
      if (n.feature < 0) {
        nodes.push_back({{"p", n.p_help}});
      } else {
        nodes.push_back({{"f", n.feature}, {"t", n.threshold}, {"l", n.left}, {"r", n.right}, {"p", n.p_help}});
      }
    }
    trees.push_back(std::move(nodes));
  }
  return {{"config", cfg_.to_json()}, {"num_features", num_features_}, {"trees", trees}};
}

RandomForest RandomForest::from_json(const nlohmann::json& j) {
  RandomForest f;
  f.cfg_ = ForestConfig::from_json(j.at("config"));
  f.num_features_ = j.at("num_features").get<std::size_t>();
  for (const auto& tj : j.at("trees")) {
    DecisionTree t;
    for (const auto& nj : tj) {
      TreeNode n;
      n.p_help = nj.at("p").get<double>();
      if (nj.contains("f")) {
        n.feature = nj.at("f").get<int>();
        n.threshold = nj.at("t").get<double>();
        n.left = nj.at("l").get<int>();
        n.right = nj.at("r").get<int>();
      }
      t.nodes.push_back(n);
    }
    const auto count = static_cast<int>(t.nodes.size());
    for (const auto& n : t.nodes) {
      if (n.feature >= 0 && (static_cast<std::size_t>(n.feature) >= f.num_features_ || n.left <= 0 ||
                             n.right <= 0 || n.left >= count || n.right >= count)) {
        throw ValidationError("forest file has a malformed tree");
      }
    }
    if (t.nodes.empty()) throw ValidationError("forest file has an empty tree");
    f.trees_.push_back(std::move(t));
  }
  if (f.trees_.empty()) throw ValidationError("forest file has no trees");
  return f;
}

}  // namespace taskrec::help
