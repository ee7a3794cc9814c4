#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include "atucker/errors.hpp"
#include "atucker/solver_kind.hpp"

namespace atucker::selector {

inline constexpr int kFeatureOrderVersion = 1;

/// Names of the ten shape features, in the fixed model order.
inline const std::array<const char*, 10> kFeatureNames = {
    "I_n", "R_n", "J_n", "I_n^2", "R_n^2", "I_n*R_n", "R_n^2/I_n", "R_n^2/J_n", "I_n/J_n", "R_n/J_n"};

using FeatureVector = std::array<double, 10>;

/// The ten shape-derived features for one mode: the raw shape (I, R, J), the
/// pairwise products that scale the dense factorizations, and the shape
/// ratios that separate the two solvers' dominant cost terms.
inline FeatureVector extract_features(double i, double r, double j) {
    return {i, r, j, i * i, r * r, i * r, r * r / i, r * r / j, i / j, r / j};
}

struct CostModelParams {
    int num_iters = 5;  // ALS iteration count charged by the cost model
};

// Flop approximations for the dense factorizations the cost model charges.
inline double f_eig(double i) { return 9.0 * i * i * i; }
inline double f_qr(double i, double r) { return 2.0 * i * r * r - (2.0 / 3.0) * r * r * r; }
inline double f_inv(double r) { return 2.0 * r * r * r; }

/// Flop estimate of the Gram-eigendecomposition solver for one mode.
inline double cost_eig(double i, double r, double j, const CostModelParams& = {}) {
    return i * i * j + 2.0 * i * r * j + f_eig(i);
}

/// Flop estimate of the ALS solver for one mode.
inline double cost_als(double i, double r, double j, const CostModelParams& params = {}) {
    const double per_iter = 2.0 * i * j * r + 2.0 * j * r * r   // TTM
                            + 2.0 * i * j * r + 2.0 * j * r * r  // TTT
                            + 4.0 * i * r * r                    // GEMM
                            + 2.0 * f_inv(r);                    // matrix inversion
    return per_iter * params.num_iters + 2.0 * j * r * r + f_qr(i, r);
}

/// Cost-model fallback when no trained model is available; ties go to EIG.
inline SolverKind heuristic_choice(double i, double r, double j, const CostModelParams& params = {}) {
    return cost_eig(i, r, j, params) <= cost_als(i, r, j, params) ? SolverKind::Eig
                                                                  : SolverKind::Als;
}

/// Threshold tree over FeatureVector entries. Internal nodes route left when
/// feature <= threshold; leaves carry the solver label (0 = EIG, 1 = ALS).
struct DecisionTreeModel {
    struct Node {
        bool leaf = false;
        int feature_index = -1;
        double threshold = 0.0;
        int left = -1;
        int right = -1;
        int label = 0;
        std::array<long long, 2> class_counts{0, 0};
    };

    std::vector<Node> nodes;
    int root = -1;

    // metadata
    int max_depth = 0;
    double train_accuracy = 0.0;
    double cv_accuracy = 0.0;
    int feature_order_version = kFeatureOrderVersion;
    std::string class_weight = "uniform";
    int cv_folds = 0;
    std::uint64_t seed = 0;
    bool degenerate_labels = false;  // set when training saw a single class
};

/// Deterministic root-to-leaf descent.
inline SolverKind predict(const DecisionTreeModel& model, const FeatureVector& f) {
    if (model.feature_order_version != kFeatureOrderVersion)
        throw FeatureVersionMismatch("model was trained with feature order version " +
                                     std::to_string(model.feature_order_version));
    if (model.root < 0 || model.root >= static_cast<int>(model.nodes.size()))
        throw SchemaMismatch("decision tree has no valid root");
    int id = model.root;
    for (std::size_t steps = 0; steps <= model.nodes.size(); ++steps) {
        const DecisionTreeModel::Node& node = model.nodes[static_cast<std::size_t>(id)];
        if (node.leaf) return node.label == 0 ? SolverKind::Eig : SolverKind::Als;
        id = f[static_cast<std::size_t>(node.feature_index)] <= node.threshold ? node.left
                                                                               : node.right;
        if (id < 0 || id >= static_cast<int>(model.nodes.size()))
            throw SchemaMismatch("decision tree child id out of range");
    }
    throw SchemaMismatch("decision tree descent did not reach a leaf");
}

/// One benchmark-labeled record: features of a mode plus both solver timings.
struct TrainingSample {
    FeatureVector features{};
    double time_eig = 0.0;
    double time_als = 0.0;
    int label = 0;  // 0 iff time_eig <= time_als
    bool tie = false;  // times within 5% relative; labels are noise-dominated
    struct Provenance {
        std::vector<std::size_t> dims;
        std::vector<std::size_t> ranks;
        std::size_t mode = 0;
        std::uint64_t seed = 0;
    } provenance;
};

enum class ClassWeight { Uniform, Balanced };

inline const char* to_string(ClassWeight w) {
    return w == ClassWeight::Uniform ? "uniform" : "balanced";
}

struct TrainOptions {
    int max_depth_lo = 1;
    int max_depth_hi = 10;
    int cv_folds = 5;
    std::vector<ClassWeight> class_weight_grid = {ClassWeight::Uniform, ClassWeight::Balanced};
    std::uint64_t seed = 0;
};

namespace detail {

struct WeightedSet {
    const std::vector<TrainingSample>* samples = nullptr;
    std::array<double, 2> class_w{1.0, 1.0};
    double weight(std::size_t idx) const {
        return class_w[static_cast<std::size_t>((*samples)[idx].label)];
    }
};

inline double gini(double w0, double w1) {
    const double w = w0 + w1;
    if (w <= 0.0) return 0.0;
    const double p0 = w0 / w;
    const double p1 = w1 / w;
    return 1.0 - p0 * p0 - p1 * p1;
}

struct Split {
    bool found = false;
    int feature = -1;
    double threshold = 0.0;
    double score = -1.0;  // weighted impurity decrease
};

/// Exhaustive Gini split search. Candidates are midpoints between consecutive
/// distinct values; ties break toward the smallest feature index and then the
/// smallest threshold, which makes training deterministic. Zero-gain splits
/// are admitted (a node may need two levels to separate, as with XOR labels).
inline Split best_split(const WeightedSet& set, const std::vector<std::size_t>& idx) {
    double w0 = 0.0, w1 = 0.0;
    for (std::size_t s : idx) ((*set.samples)[s].label == 0 ? w0 : w1) += set.weight(s);
    const double parent = gini(w0, w1);
    const double total = w0 + w1;

    Split best;
    std::vector<std::size_t> order(idx);
    for (int f = 0; f < 10; ++f) {
        const std::size_t fi = static_cast<std::size_t>(f);
        std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            return (*set.samples)[a].features[fi] < (*set.samples)[b].features[fi];
        });
        double l0 = 0.0, l1 = 0.0;
        for (std::size_t k = 0; k + 1 < order.size(); ++k) {
            const TrainingSample& s = (*set.samples)[order[k]];
            (s.label == 0 ? l0 : l1) += set.weight(order[k]);
            const double v = s.features[fi];
            const double vn = (*set.samples)[order[k + 1]].features[fi];
            if (vn <= v) continue;  // no boundary between equal values
            const double score =
                parent - (l0 + l1) / total * gini(l0, l1) - (total - l0 - l1) / total * gini(w0 - l0, w1 - l1);
            if (score > best.score + 1e-15 && score >= -1e-12) {
                best.found = true;
                best.feature = f;
                best.threshold = 0.5 * (v + vn);
                best.score = score;
            }
        }
    }
    return best;
}

inline int build_node(DecisionTreeModel& model, const WeightedSet& set,
                      const std::vector<std::size_t>& idx, int depth_left) {
    long long c0 = 0, c1 = 0;
    double w0 = 0.0, w1 = 0.0;
    for (std::size_t s : idx) {
        if ((*set.samples)[s].label == 0) {
            ++c0;
            w0 += set.weight(s);
        } else {
            ++c1;
            w1 += set.weight(s);
        }
    }

    const bool pure = (c0 == 0 || c1 == 0);
    Split split;
    if (!pure && depth_left > 0) split = best_split(set, idx);

    DecisionTreeModel::Node node;
    node.class_counts = {c0, c1};
    if (pure || depth_left == 0 || !split.found) {
        node.leaf = true;
        node.label = w1 > w0 ? 1 : 0;  // weighted majority, ties to EIG
        model.nodes.push_back(node);
        return static_cast<int>(model.nodes.size()) - 1;
    }

    std::vector<std::size_t> left, right;
    for (std::size_t s : idx) {
        const double v = (*set.samples)[s].features[static_cast<std::size_t>(split.feature)];
        (v <= split.threshold ? left : right).push_back(s);
    }
    node.feature_index = split.feature;
    node.threshold = split.threshold;
    node.left = build_node(model, set, left, depth_left - 1);
    node.right = build_node(model, set, right, depth_left - 1);
    model.nodes.push_back(node);
    return static_cast<int>(model.nodes.size()) - 1;
}

inline DecisionTreeModel fit_tree(const std::vector<TrainingSample>& samples,
                                  const std::vector<std::size_t>& idx, int max_depth,
                                  ClassWeight cw) {
    WeightedSet set;
    set.samples = &samples;
    if (cw == ClassWeight::Balanced) {
        double n0 = 0.0, n1 = 0.0;
        for (std::size_t s : idx) ((samples[s].label == 0) ? n0 : n1) += 1.0;
        const double n = n0 + n1;
        set.class_w = {n0 > 0.0 ? n / (2.0 * n0) : 1.0, n1 > 0.0 ? n / (2.0 * n1) : 1.0};
    }
    DecisionTreeModel model;
    model.root = build_node(model, set, idx, max_depth);
    model.max_depth = max_depth;
    model.class_weight = to_string(cw);
    return model;
}

inline double accuracy(const DecisionTreeModel& model, const std::vector<TrainingSample>& samples,
                       const std::vector<std::size_t>& idx) {
    if (idx.empty()) return 0.0;
    std::size_t correct = 0;
    for (std::size_t s : idx) {
        const SolverKind p = predict(model, samples[s].features);
        if ((p == SolverKind::Als ? 1 : 0) == samples[s].label) ++correct;
    }
    return static_cast<double>(correct) / static_cast<double>(idx.size());
}

}  // namespace detail

/// CART trainer with Gini impurity: exhaustive grid over max_depth and class
/// weight, scored by k-fold cross-validated accuracy, then refit on all data
/// with the winning hyperparameters. A single-class dataset yields a constant
/// tree with the degenerate_labels flag set.
inline DecisionTreeModel train(const std::vector<TrainingSample>& samples,
                               const TrainOptions& opts = {}) {
    if (samples.empty()) throw EmptyDataset("no training samples");

    std::vector<std::size_t> all(samples.size());
    std::iota(all.begin(), all.end(), 0);

    bool has0 = false, has1 = false;
    for (const TrainingSample& s : samples) (s.label == 0 ? has0 : has1) = true;
    if (!has0 || !has1) {
        DecisionTreeModel model = detail::fit_tree(samples, all, 0, ClassWeight::Uniform);
        model.degenerate_labels = true;
        model.train_accuracy = 1.0;
        model.cv_accuracy = 1.0;
        model.cv_folds = opts.cv_folds;
        model.seed = opts.seed;
        return model;
    }

    std::vector<std::size_t> shuffled(all);
    std::mt19937_64 rng(opts.seed);
    std::shuffle(shuffled.begin(), shuffled.end(), rng);
    const int folds = std::max(2, std::min<int>(opts.cv_folds, static_cast<int>(samples.size())));

    int best_depth = opts.max_depth_lo;
    ClassWeight best_cw = ClassWeight::Uniform;
    double best_score = -1.0;
    for (int depth = opts.max_depth_lo; depth <= opts.max_depth_hi; ++depth) {
        for (ClassWeight cw : opts.class_weight_grid) {
            double score_sum = 0.0;
            int scored = 0;
            for (int f = 0; f < folds; ++f) {
                std::vector<std::size_t> tr, va;
                for (std::size_t k = 0; k < shuffled.size(); ++k)
                    (static_cast<int>(k % static_cast<std::size_t>(folds)) == f ? va : tr)
                        .push_back(shuffled[k]);
                if (tr.empty() || va.empty()) continue;
                const DecisionTreeModel m = detail::fit_tree(samples, tr, depth, cw);
                score_sum += detail::accuracy(m, samples, va);
                ++scored;
            }
            const double score = scored > 0 ? score_sum / scored : 0.0;
            if (score > best_score) {  // first-seen wins ties: smaller depth, uniform first
                best_score = score;
                best_depth = depth;
                best_cw = cw;
            }
        }
    }

    DecisionTreeModel model = detail::fit_tree(samples, all, best_depth, best_cw);
    model.train_accuracy = detail::accuracy(model, samples, all);
    model.cv_accuracy = best_score;
    model.cv_folds = folds;
    model.seed = opts.seed;
    return model;
}

}  // namespace atucker::selector
