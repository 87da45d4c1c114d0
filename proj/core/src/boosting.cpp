#include <algorithm>
#include <cmath>
#include <numeric>

#include <json.hpp>

#include "eventcube/analyze.hpp"
#include "eventcube/error.hpp"

namespace eventcube {

using nlohmann::json;

namespace {

struct Split {
  double gain = 0.0;
  int feature = -1;
  double threshold = 0.0;
};

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

struct TreeBuilder {
  const Eigen::MatrixXd& x;
  const std::vector<double>& grad;
  const std::vector<double>& hess;
  const HeadConfig& cfg;
  RegressionTree tree;

  static double score(double g, double h) { return h > 0.0 ? g * g / h : 0.0; }

  Split best_split(const std::vector<std::size_t>& rows, double g_total, double h_total) const {
    Split best;
    const double parent = score(g_total, h_total);
    std::vector<std::size_t> order(rows);
    for (Eigen::Index f = 0; f < x.cols(); ++f) {
      std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        const double va = x(static_cast<Eigen::Index>(a), f);
        const double vb = x(static_cast<Eigen::Index>(b), f);
        return va < vb || (va == vb && a < b);
      });
      double g_left = 0.0, h_left = 0.0;
      for (std::size_t i = 0; i + 1 < order.size(); ++i) {
        g_left += grad[order[i]];
        h_left += hess[order[i]];
        const double lo = x(static_cast<Eigen::Index>(order[i]), f);
        const double hi = x(static_cast<Eigen::Index>(order[i + 1]), f);
        if (!(hi > lo)) continue;
        const double h_right = h_total - h_left;
        if (h_left < cfg.min_child_weight || h_right < cfg.min_child_weight) continue;
        const double gain = score(g_left, h_left) + score(g_total - g_left, h_right) - parent;
        if (gain > best.gain) {
          double thr = lo + 0.5 * (hi - lo);
          if (!(thr > lo)) thr = hi;
          best = {gain, static_cast<int>(f), thr};
        }
      }
    }
    return best;
  }

  int grow(const std::vector<std::size_t>& rows, std::size_t depth) {
    double g = 0.0, h = 0.0;
    for (std::size_t r : rows) {
      g += grad[r];
      h += hess[r];
    }
    const int id = static_cast<int>(tree.nodes.size());
    tree.nodes.push_back({});
    tree.nodes[static_cast<std::size_t>(id)].value = h > 0.0 ? -g / h : 0.0;
    if (depth >= cfg.max_depth || rows.size() < 2) return id;

    const Split split = best_split(rows, g, h);
    if (split.feature < 0) return id;
    std::vector<std::size_t> left, right;
    for (std::size_t r : rows) {
      (x(static_cast<Eigen::Index>(r), split.feature) < split.threshold ? left : right).push_back(r);
    }
    const int l = grow(left, depth + 1);
    const int rt = grow(right, depth + 1);
    auto& node = tree.nodes[static_cast<std::size_t>(id)];
    node.feature = split.feature;
    node.threshold = split.threshold;
    node.left = l;
    node.right = rt;
    return id;
  }
};

double training_loss(HeadKind kind, const std::vector<double>& margin, std::span<const double> y) {
  double s = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (kind == HeadKind::Regressor) {
      const double r = margin[i] - y[i];
      s += r * r;
    } else {
      // log(1 + e^m) - y m, computed stably
      const double m = margin[i];
      s += std::max(m, 0.0) + std::log1p(std::exp(-std::abs(m))) - y[i] * m;
    }
  }
  return s / static_cast<double>(y.size());
}

}  // namespace

std::string_view head_kind_name(HeadKind kind) noexcept {
  return kind == HeadKind::Classifier ? "classifier" : "regressor";
}

HeadKind parse_head_kind(std::string_view name) {
  if (name == "classifier") return HeadKind::Classifier;
  if (name == "regressor") return HeadKind::Regressor;
  throw Error(Errc::InvalidConfig, "unknown head kind '" + std::string(name) + "'");
}

double RegressionTree::predict(const double* row, Eigen::Index stride) const {
  if (nodes.empty()) return 0.0;
  std::size_t i = 0;
  while (!nodes[i].leaf()) {
    const auto& n = nodes[i];
    i = static_cast<std::size_t>(row[n.feature * stride] < n.threshold ? n.left : n.right);
  }
  return nodes[i].value;
}

std::size_t RegressionTree::depth() const {
  std::size_t deepest = 0;
  std::vector<std::pair<std::size_t, std::size_t>> stack;
  if (!nodes.empty()) stack.push_back({0, 0});
  while (!stack.empty()) {
    auto [i, d] = stack.back();
    stack.pop_back();
    deepest = std::max(deepest, d);
    if (!nodes[i].leaf()) {
      stack.push_back({static_cast<std::size_t>(nodes[i].left), d + 1});
      stack.push_back({static_cast<std::size_t>(nodes[i].right), d + 1});
    }
  }
  return deepest;
}

void HeadConfig::validate() const {
  if (n_estimators < 1) throw Error(Errc::InvalidConfig, "n_estimators must be at least 1");
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) throw Error(Errc::InvalidConfig, "learning_rate must be positive");
  if (!(min_child_weight >= 0.0)) throw Error(Errc::InvalidConfig, "min_child_weight must be non-negative");
}

HeadModel fit_head(const Eigen::MatrixXd& features, std::span<const double> labels, HeadKind kind,
                   const HeadConfig& cfg, std::vector<double>* train_loss) {
  cfg.validate();
  const auto n = static_cast<std::size_t>(features.rows());
  if (n == 0) throw Error(Errc::EmptyInput, "no training rows");
  if (labels.size() != n) throw Error(Errc::DimMismatch, "labels do not match feature rows");
  if (!features.allFinite()) throw Error(Errc::NonFiniteValue, "features contain non-finite values");

  HeadModel model;
  model.kind = kind;
  model.learning_rate = cfg.learning_rate;
  model.n_features = static_cast<std::size_t>(features.cols());

  if (kind == HeadKind::Classifier) {
    std::size_t positives = 0;
    for (double y : labels) {
      if (y != 0.0 && y != 1.0) throw Error(Errc::DegenerateLabels, "classifier labels must be 0 or 1");
      positives += y == 1.0;
    }
    if (positives == 0 || positives == n) throw Error(Errc::DegenerateLabels, "classifier labels contain a single class");
    const double prior = static_cast<double>(positives) / static_cast<double>(n);
    model.base_score = std::log(prior / (1.0 - prior));
  } else {
    for (double y : labels) {
      if (!std::isfinite(y)) throw Error(Errc::NonFiniteValue, "regression labels contain non-finite values");
    }
    model.base_score = std::accumulate(labels.begin(), labels.end(), 0.0) / static_cast<double>(n);
  }

  std::vector<double> margin(n, model.base_score);
  std::vector<double> grad(n), hess(n);
  std::vector<std::size_t> all(n);
  std::iota(all.begin(), all.end(), std::size_t{0});
  const double* data = features.data();
  const Eigen::Index stride = features.rows();

  for (std::size_t round = 0; round < cfg.n_estimators; ++round) {
    for (std::size_t i = 0; i < n; ++i) {
      if (kind == HeadKind::Regressor) {
        grad[i] = margin[i] - labels[i];
        hess[i] = 1.0;
      } else {
        const double p = sigmoid(margin[i]);
        grad[i] = p - labels[i];
        hess[i] = p * (1.0 - p);
      }
    }
    TreeBuilder builder{features, grad, hess, cfg, {}};
    builder.grow(all, 0);
    for (std::size_t i = 0; i < n; ++i) {
      margin[i] += cfg.learning_rate * builder.tree.predict(data + i, stride);
    }
    model.trees.push_back(std::move(builder.tree));
    if (train_loss) train_loss->push_back(training_loss(kind, margin, labels));
  }
  model.n_estimators = model.trees.size();
  return model;
}

std::vector<double> predict_head(const HeadModel& model, const Eigen::MatrixXd& features) {
  if (static_cast<std::size_t>(features.cols()) != model.n_features) {
    throw Error(Errc::DimMismatch, "model expects " + std::to_string(model.n_features) + " features, got " +
                                       std::to_string(features.cols()));
  }
  const auto n = static_cast<std::size_t>(features.rows());
  std::vector<double> out(n, model.base_score);
  const double* data = features.data();
  const Eigen::Index stride = features.rows();
  for (std::size_t i = 0; i < n; ++i) {
    double m = model.base_score;
    for (const auto& tree : model.trees) m += model.learning_rate * tree.predict(data + i, stride);
    out[i] = model.kind == HeadKind::Classifier ? sigmoid(m) : m;
  }
  return out;
}

std::string head_to_json(const HeadModel& model) {
  json trees = json::array();
  for (const auto& t : model.trees) {
    json nodes = json::array();
    for (const auto& n : t.nodes) nodes.push_back({n.feature, n.threshold, n.left, n.right, n.value});
    trees.push_back(std::move(nodes));
  }
  json j = {{"kind", head_kind_name(model.kind)},
            {"learning_rate", model.learning_rate},
            {"base_score", model.base_score},
            {"n_features", model.n_features},
            {"trees", std::move(trees)}};
  return j.dump();
}

HeadModel head_from_json(std::string_view text) {
  try {
    const json j = json::parse(text);
    HeadModel m;
    m.kind = parse_head_kind(j.at("kind").get<std::string>());
    m.learning_rate = j.at("learning_rate").get<double>();
    m.base_score = j.at("base_score").get<double>();
    m.n_features = j.at("n_features").get<std::size_t>();
    for (const auto& t : j.at("trees")) {
      RegressionTree tree;
      for (const auto& n : t) {
        TreeNode node{n.at(0).get<int>(), n.at(1).get<double>(), n.at(2).get<int>(), n.at(3).get<int>(),
                      n.at(4).get<double>()};
        const int count = static_cast<int>(t.size());
        if (node.feature >= static_cast<int>(m.n_features) ||
            (!node.leaf() && (node.left <= 0 || node.right <= 0 || node.left >= count || node.right >= count))) {
          throw Error(Errc::InvalidConfig, "head model has an invalid tree node");
        }
        tree.nodes.push_back(node);
      }
      m.trees.push_back(std::move(tree));
    }
    m.n_estimators = m.trees.size();
    return m;
  } catch (const json::exception& e) {
    throw Error(Errc::InvalidConfig, std::string("head model JSON: ") + e.what());
  }
}

}  // namespace eventcube
