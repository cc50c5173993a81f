#ifndef LAMPINN_AFFINITY_HPP
#define LAMPINN_AFFINITY_HPP

#include "lampinn/doe.hpp"
#include "lampinn/train.hpp"

#include <iosfwd>

namespace lampinn {

/// Loss statistics from a brief transfer session: initial, final, and
/// epoch-averaged total loss.
struct LossMetrics {
    double l1 = 0.0;
    double l2 = 0.0;
    double l3 = 0.0;
    bool diverged = false;
};

struct ShortSessionConfig {
    int budget_epochs = 50;
    int m_interior = 400;
    int n_data = 80;
    double lr = 2e-3;
    double divergence_threshold = 1e12;
    std::uint64_t colloc_seed = 0;
};

/// Clone the pretrained reference net and run a short transfer session on
/// the task's PINN loss; the pretrained net itself is never modified.
LossMetrics short_transfer_session(const DenseNet& pretrained, const PdeProblem& problem,
                                   const ShortSessionConfig& cfg);

/// Task feature vector: raw Z = [mu..., L1, L2, L3] and its log1p +
/// feature-standardized form.
struct TaskEmbedding {
    std::uint64_t task_id = 0;
    Vec raw;
    Vec normalized;
};

/// Embedding ablation switches. Parameter-only drops the loss metrics;
/// random metrics replaces them with seeded uniform noise.
struct EmbeddingOptions {
    bool parameter_only = false;
    bool random_metrics = false;
    std::uint64_t random_seed = 0;
};

std::vector<TaskEmbedding> build_embedding(
    const std::vector<std::pair<TaskConfig, LossMetrics>>& tasks,
    const EmbeddingOptions& opts = {});

struct Clustering {
    int k = 0;
    std::vector<int> assignments;
    Mat centroids;  // k x dim
    double objective = 0.0;
    std::uint64_t seed = 0;
};

Clustering kmeans(const std::vector<TaskEmbedding>& embeddings, int k, std::uint64_t seed,
                  int max_iter = 300, double tol = 1e-8);
Clustering kmeans_points(const Mat& points, int k, std::uint64_t seed, int max_iter = 300,
                         double tol = 1e-8);

double silhouette(const Mat& points, const std::vector<int>& assignments, int k);
double silhouette(const std::vector<TaskEmbedding>& embeddings, const Clustering& clustering);

double adjusted_rand_index(const std::vector<int>& labels_a, const std::vector<int>& labels_b);

/// Percent of tasks whose labels differ after optimal one-to-one label
/// alignment (assignment problem on the confusion matrix).
double hungarian_disagreement(const std::vector<int>& labels_short,
                              const std::vector<int>& labels_full);

struct StabilityRow {
    int k = 0;
    double silhouette_mean = 0.0;
    double silhouette_sd = 0.0;
    double ari_mean = 0.0;
};

/// For each k: silhouette mean/SD over n_seeds k-means runs and the mean
/// pairwise ARI over all seed pairs.
std::vector<StabilityRow> stability_report(const std::vector<TaskEmbedding>& embeddings,
                                           const std::vector<int>& k_range, int n_seeds,
                                           std::uint64_t base_seed = 0);

/// Among k with mean pairwise ARI >= 0.95, the one with the highest mean
/// silhouette; otherwise max ARI, ties to smaller k.
int select_k(const std::vector<StabilityRow>& report);

void write_clustering(std::ostream& os, const std::vector<TaskEmbedding>& embeddings,
                      const Clustering& clustering);

}  // namespace lampinn

#endif
