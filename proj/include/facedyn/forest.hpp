// Random Forest classifier: CART trees, Gini impurity with balanced class
// weights in both split scoring and leaf votes, bootstrap resampling,
// sqrt-feature subsampling, unrestricted depth. Deterministic given the
// seed; trees use independent derived streams so the build parallelizes
// without changing results.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <vector>

#include "facedyn/common.hpp"
#include "facedyn/parallel.hpp"
#include "facedyn/rng.hpp"

namespace facedyn {

struct ForestConfig {
    int n_trees = 300;
    std::uint64_t seed = 0;

    void validate() const {
        if (n_trees < 1) throw InvalidParams("n_trees must be >= 1");
    }
};

// Row-major numeric matrix view over contiguous storage.
struct DataView {
    const double* data = nullptr;
    std::size_t rows = 0;
    std::size_t cols = 0;

    double at(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
};

// Balanced weights: w_c = n / (k * n_c) over the labels the forest is fit on.
inline std::vector<double> balanced_class_weights(const std::vector<int>& y,
                                                  int n_classes) {
    std::vector<double> counts(n_classes, 0.0);
    for (int label : y) {
        if (label < 0 || label >= n_classes)
            throw InvalidParams("label outside [0, n_classes)");
        counts[label] += 1.0;
    }
    std::vector<double> w(n_classes, 0.0);
    const double n = static_cast<double>(y.size());
    for (int c = 0; c < n_classes; ++c)
        if (counts[c] > 0.0)
            w[c] = n / (static_cast<double>(n_classes) * counts[c]);
    return w;
}

class DecisionTree {
  public:
    struct Node {
        int feature = -1;  // -1 marks a leaf
        double threshold = 0.0;
        std::int32_t left = -1;
        std::int32_t right = -1;
        std::vector<double> dist;  // leaf: weighted class distribution
    };

    // rows: bootstrap sample indices (with repetition) into X/y.
    void fit(const DataView& X, const std::vector<int>& y,
             const std::vector<double>& class_weights, int n_classes,
             std::vector<std::size_t> rows, int features_per_split, Rng rng) {
        n_classes_ = n_classes;
        nodes_.clear();
        build(X, y, class_weights, std::move(rows), features_per_split, rng);
    }

    const std::vector<double>& predict_dist(const double* row) const {
        std::size_t idx = 0;
        while (nodes_[idx].feature >= 0) {
            const Node& n = nodes_[idx];
            idx = (row[n.feature] <= n.threshold)
                      ? static_cast<std::size_t>(n.left)
                      : static_cast<std::size_t>(n.right);
        }
        return nodes_[idx].dist;
    }

    const std::vector<Node>& nodes() const { return nodes_; }

    static DecisionTree from_nodes(std::vector<Node> nodes, int n_classes) {
        DecisionTree t;
        t.nodes_ = std::move(nodes);
        t.n_classes_ = n_classes;
        return t;
    }

  private:
    std::int32_t build(const DataView& X, const std::vector<int>& y,
                       const std::vector<double>& w,
                       std::vector<std::size_t> rows, int mtry, Rng& rng) {
        // Weighted class totals at this node.
        std::vector<double> totals(n_classes_, 0.0);
        for (std::size_t r : rows) totals[y[r]] += w[y[r]];
        double wsum = 0.0;
        int present = 0;
        for (double t : totals) {
            wsum += t;
            if (t > 0.0) ++present;
        }

        if (present <= 1 || rows.size() < 2) return make_leaf(totals, wsum);

        // Sample mtry features without replacement (Fisher-Yates prefix).
        std::vector<int> feats(X.cols);
        for (std::size_t f = 0; f < X.cols; ++f) feats[f] = static_cast<int>(f);
        const int k = std::min<int>(mtry, static_cast<int>(X.cols));
        for (int i = 0; i < k; ++i) {
            const auto j = i + static_cast<int>(rng.below(X.cols - i));
            std::swap(feats[i], feats[j]);
        }

        const double parent_gini = gini(totals, wsum);
        double best_gain = 1e-12;  // require a strictly positive gain
        int best_feat = -1;
        double best_thr = 0.0;

        std::vector<std::size_t> order(rows);
        std::vector<double> left_tot(n_classes_);
        for (int fi = 0; fi < k; ++fi) {
            const int f = feats[fi];
            std::sort(order.begin(), order.end(),
                      [&](std::size_t a, std::size_t b) {
                          const double va = X.at(a, f), vb = X.at(b, f);
                          if (va != vb) return va < vb;
                          return a < b;  // stable total order for determinism
                      });
            std::fill(left_tot.begin(), left_tot.end(), 0.0);
            double wl = 0.0;
            for (std::size_t i = 0; i + 1 < order.size(); ++i) {
                const int c = y[order[i]];
                left_tot[c] += w[c];
                wl += w[c];
                const double v = X.at(order[i], f);
                const double vn = X.at(order[i + 1], f);
                if (v == vn) continue;
                const double wr = wsum - wl;
                double gl = 0.0, gr = 0.0;
                for (int cc = 0; cc < n_classes_; ++cc) {
                    const double l = left_tot[cc];
                    const double r = totals[cc] - l;
                    gl += l * l;
                    gr += r * r;
                }
                const double child =
                    (wl - gl / wl + wr - gr / wr) / wsum;
                const double gain = parent_gini - child;
                if (gain > best_gain) {
                    best_gain = gain;
                    best_feat = f;
                    best_thr = v + 0.5 * (vn - v);
                }
            }
        }

        if (best_feat < 0) return make_leaf(totals, wsum);

        std::vector<std::size_t> left_rows, right_rows;
        for (std::size_t r : rows) {
            if (X.at(r, best_feat) <= best_thr)
                left_rows.push_back(r);
            else
                right_rows.push_back(r);
        }
        if (left_rows.empty() || right_rows.empty())
            return make_leaf(totals, wsum);

        rows.clear();
        rows.shrink_to_fit();
        const auto idx = static_cast<std::int32_t>(nodes_.size());
        nodes_.emplace_back();
        nodes_[idx].feature = best_feat;
        nodes_[idx].threshold = best_thr;
        const std::int32_t l =
            build(X, y, w, std::move(left_rows), mtry, rng);
        const std::int32_t r =
            build(X, y, w, std::move(right_rows), mtry, rng);
        nodes_[idx].left = l;
        nodes_[idx].right = r;
        return idx;
    }

    std::int32_t make_leaf(const std::vector<double>& totals, double wsum) {
        const auto idx = static_cast<std::int32_t>(nodes_.size());
        nodes_.emplace_back();
        nodes_[idx].dist.resize(n_classes_);
        for (int c = 0; c < n_classes_; ++c)
            nodes_[idx].dist[c] = wsum > 0.0 ? totals[c] / wsum : 0.0;
        return idx;
    }

    static double gini(const std::vector<double>& totals, double wsum) {
        double s = 0.0;
        for (double t : totals) s += t * t;
        return 1.0 - s / (wsum * wsum);
    }

    std::vector<Node> nodes_;
    int n_classes_ = 0;
};

class RandomForest {
  public:
    // Throws SingleClassTraining when y holds fewer than two classes.
    void fit(const DataView& X, const std::vector<int>& y, int n_classes,
             const ForestConfig& cfg) {
        cfg.validate();
        if (X.rows != y.size() || X.rows == 0)
            throw InvalidParams("matrix/label size mismatch");
        {
            std::vector<bool> seen(n_classes, false);
            int distinct = 0;
            for (int label : y)
                if (!seen[label]) {
                    seen[label] = true;
                    ++distinct;
                }
            if (distinct < 2)
                throw SingleClassTraining("training labels hold one class");
        }
        n_classes_ = n_classes;
        const std::vector<double> w = balanced_class_weights(y, n_classes);
        const int mtry = std::max(
            1, static_cast<int>(std::sqrt(static_cast<double>(X.cols))));

        trees_.assign(cfg.n_trees, DecisionTree());
        const Rng base(cfg.seed);
        parallel_for(trees_.size(), [&](std::size_t t) {
            Rng rng = base.fork(t);
            std::vector<std::size_t> rows(X.rows);
            for (auto& r : rows) r = rng.below(X.rows);
            trees_[t].fit(X, y, w, n_classes_, std::move(rows), mtry, rng);
        });
    }

    // Summed leaf distributions; ties resolve to the lowest class index.
    std::vector<double> predict_proba(const double* row) const {
        std::vector<double> acc(n_classes_, 0.0);
        for (const auto& t : trees_) {
            const auto& d = t.predict_dist(row);
            for (int c = 0; c < n_classes_; ++c) acc[c] += d[c];
        }
        const double total = static_cast<double>(trees_.size());
        for (auto& v : acc) v /= total;
        return acc;
    }

    int predict(const double* row) const {
        const auto p = predict_proba(row);
        int best = 0;
        for (int c = 1; c < n_classes_; ++c)
            if (p[c] > p[best]) best = c;
        return best;
    }

    std::vector<int> predict(const DataView& X) const {
        std::vector<int> out(X.rows);
        for (std::size_t r = 0; r < X.rows; ++r)
            out[r] = predict(X.data + r * X.cols);
        return out;
    }

    int n_classes() const { return n_classes_; }
    const std::vector<DecisionTree>& trees() const { return trees_; }

    static RandomForest from_trees(std::vector<DecisionTree> trees,
                                   int n_classes) {
        RandomForest f;
        f.trees_ = std::move(trees);
        f.n_classes_ = n_classes;
        return f;
    }

  private:
    std::vector<DecisionTree> trees_;
    int n_classes_ = 0;
};

}  // namespace facedyn
