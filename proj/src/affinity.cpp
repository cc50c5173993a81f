#include "lampinn/affinity.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>
#include <random>

namespace lampinn {

LossMetrics short_transfer_session(const DenseNet& pretrained, const PdeProblem& problem,
                                   const ShortSessionConfig& cfg) {
    if (cfg.budget_epochs < 0) throw std::invalid_argument("short_transfer_session: budget must be >= 0");
    DenseNet net = pretrained;
    CollocationSet colloc = sample_collocation(problem, cfg.m_interior, cfg.n_data, cfg.colloc_seed);
    TrainOptions opts;
    opts.epochs = cfg.budget_epochs;
    opts.lr = cfg.lr;
    opts.divergence_threshold = cfg.divergence_threshold;
    TrainLog log = train_dense(net, problem, colloc, opts);
    LossMetrics m;
    m.l1 = log.initial_loss();
    m.l2 = log.final_loss();
    m.l3 = std::accumulate(log.losses.begin(), log.losses.end(), 0.0) /
           static_cast<double>(log.losses.size());
    m.diverged = log.diverged;
    return m;
}

std::vector<TaskEmbedding> build_embedding(
    const std::vector<std::pair<TaskConfig, LossMetrics>>& tasks, const EmbeddingOptions& opts) {
    if (tasks.size() < 2) throw std::invalid_argument("build_embedding: need at least 2 tasks");
    const int p = static_cast<int>(tasks.front().first.values.size());
    const int dim = opts.parameter_only ? p : p + 3;
    const int n = static_cast<int>(tasks.size());

    std::mt19937_64 rng(opts.random_seed);
    std::uniform_real_distribution<double> unif(0.0, 1.0);

    Mat raw(n, dim);
    for (int a = 0; a < n; ++a) {
        const auto& [task, metrics] = tasks[a];
        if (!metrics.diverged && !(std::isfinite(metrics.l1) && std::isfinite(metrics.l2) &&
                                   std::isfinite(metrics.l3)))
            throw std::invalid_argument("build_embedding: non-finite metrics");
        for (int j = 0; j < p; ++j) raw(a, j) = task.values[j];
        if (!opts.parameter_only) {
            if (opts.random_metrics) {
                raw(a, p) = unif(rng);
                raw(a, p + 1) = unif(rng);
                raw(a, p + 2) = unif(rng);
            } else {
                raw(a, p) = metrics.l1;
                raw(a, p + 1) = metrics.l2;
                raw(a, p + 2) = metrics.l3;
            }
        }
    }

    // signed log1p for parameter features (mu may be negative); loss
    // features are nonnegative so the plain transform applies there.
    Mat trans(n, dim);
    for (int a = 0; a < n; ++a)
        for (int j = 0; j < dim; ++j) {
            const double z = raw(a, j);
            if (j >= p && z < 0.0)
                throw std::domain_error("build_embedding: negative loss metric");
            trans(a, j) = (z >= 0.0) ? std::log1p(z) : -std::log1p(-z);
        }

    std::vector<TaskEmbedding> out(n);
    for (int a = 0; a < n; ++a) {
        out[a].task_id = tasks[a].first.id;
        out[a].raw = raw.row(a).transpose();
        out[a].normalized = Vec::Zero(dim);
    }
    for (int j = 0; j < dim; ++j) {
        const double mean = trans.col(j).mean();
        const double var = (trans.col(j).array() - mean).square().mean();  // population
        const double sd = std::sqrt(var);
        for (int a = 0; a < n; ++a)
            out[a].normalized[j] = (sd > 0.0) ? (trans(a, j) - mean) / sd : 0.0;
    }
    return out;
}

namespace {

Mat embedding_matrix(const std::vector<TaskEmbedding>& embeddings) {
    const int n = static_cast<int>(embeddings.size());
    const int dim = static_cast<int>(embeddings.front().normalized.size());
    Mat pts(n, dim);
    for (int a = 0; a < n; ++a) pts.row(a) = embeddings[a].normalized.transpose();
    return pts;
}

double wcss(const Mat& points, const std::vector<int>& assign, const Mat& centroids) {
    double acc = 0.0;
    for (int a = 0; a < points.rows(); ++a)
        acc += (points.row(a) - centroids.row(assign[a])).squaredNorm();
    return acc;
}

}  // namespace

Clustering kmeans_points(const Mat& points, int k, std::uint64_t seed, int max_iter, double tol) {
    const int n = static_cast<int>(points.rows());
    if (k < 1 || k > n) throw std::invalid_argument("kmeans: need 1 <= k <= n");
    std::mt19937_64 rng(seed);

    // k-means++ seeding
    Mat centroids(k, points.cols());
    std::vector<double> d2(n, std::numeric_limits<double>::infinity());
    {
        std::uniform_int_distribution<int> pick(0, n - 1);
        centroids.row(0) = points.row(pick(rng));
        for (int c = 1; c < k; ++c) {
            double total = 0.0;
            for (int a = 0; a < n; ++a) {
                d2[a] = std::min(d2[a], (points.row(a) - centroids.row(c - 1)).squaredNorm());
                total += d2[a];
            }
            int chosen = n - 1;
            if (total > 0.0) {
                std::uniform_real_distribution<double> u(0.0, total);
                double r = u(rng), cum = 0.0;
                for (int a = 0; a < n; ++a) {
                    cum += d2[a];
                    if (cum >= r) { chosen = a; break; }
                }
            }
            centroids.row(c) = points.row(chosen);
        }
    }

    std::vector<int> assign(n, 0);
    for (int iter = 0; iter < max_iter; ++iter) {
        // assignment, ties to the lowest cluster index
        for (int a = 0; a < n; ++a) {
            double best = std::numeric_limits<double>::infinity();
            int best_c = 0;
            for (int c = 0; c < k; ++c) {
                const double d = (points.row(a) - centroids.row(c)).squaredNorm();
                if (d < best) { best = d; best_c = c; }
            }
            assign[a] = best_c;
        }
        // update
        Mat next = Mat::Zero(k, points.cols());
        std::vector<int> count(k, 0);
        for (int a = 0; a < n; ++a) {
            next.row(assign[a]) += points.row(a);
            ++count[assign[a]];
        }
        for (int c = 0; c < k; ++c) {
            if (count[c] > 0) {
                next.row(c) /= count[c];
            } else {
                // re-seed empty cluster at the farthest point
                int far = 0;
                double far_d = -1.0;
                for (int a = 0; a < n; ++a) {
                    const double d = (points.row(a) - centroids.row(assign[a])).squaredNorm();
                    if (d > far_d) { far_d = d; far = a; }
                }
                next.row(c) = points.row(far);
            }
        }
        const double shift = (next - centroids).rowwise().norm().maxCoeff();
        centroids = next;
        if (shift < tol) break;
    }
    // final assignment consistent with returned centroids
    for (int a = 0; a < n; ++a) {
        double best = std::numeric_limits<double>::infinity();
        int best_c = 0;
        for (int c = 0; c < k; ++c) {
            const double d = (points.row(a) - centroids.row(c)).squaredNorm();
            if (d < best) { best = d; best_c = c; }
        }
        assign[a] = best_c;
    }

    Clustering out;
    out.k = k;
    out.assignments = assign;
    out.centroids = centroids;
    out.objective = wcss(points, assign, centroids);
    out.seed = seed;
    return out;
}

Clustering kmeans(const std::vector<TaskEmbedding>& embeddings, int k, std::uint64_t seed,
                  int max_iter, double tol) {
    return kmeans_points(embedding_matrix(embeddings), k, seed, max_iter, tol);
}

double silhouette(const Mat& points, const std::vector<int>& assign, int k) {
    if (k < 2) throw std::invalid_argument("silhouette: undefined for k < 2");
    const int n = static_cast<int>(points.rows());
    std::vector<int> count(k, 0);
    for (int a : assign) ++count[a];

    double total = 0.0;
    for (int a = 0; a < n; ++a) {
        if (count[assign[a]] <= 1) continue;  // singleton contributes 0
        std::vector<double> mean_dist(k, 0.0);
        for (int b = 0; b < n; ++b) {
            if (b == a) continue;
            mean_dist[assign[b]] += (points.row(a) - points.row(b)).norm();
        }
        const double own = mean_dist[assign[a]] / (count[assign[a]] - 1);
        double nearest = std::numeric_limits<double>::infinity();
        for (int c = 0; c < k; ++c) {
            if (c == assign[a] || count[c] == 0) continue;
            nearest = std::min(nearest, mean_dist[c] / count[c]);
        }
        const double denom = std::max(own, nearest);
        total += (denom > 0.0) ? (nearest - own) / denom : 0.0;
    }
    return total / n;
}

double silhouette(const std::vector<TaskEmbedding>& embeddings, const Clustering& clustering) {
    return silhouette(embedding_matrix(embeddings), clustering.assignments, clustering.k);
}

double adjusted_rand_index(const std::vector<int>& la, const std::vector<int>& lb) {
    if (la.size() != lb.size() || la.size() < 2)
        throw std::invalid_argument("adjusted_rand_index: need equal lengths >= 2");
    const int n = static_cast<int>(la.size());
    const int ka = 1 + *std::max_element(la.begin(), la.end());
    const int kb = 1 + *std::max_element(lb.begin(), lb.end());
    Mat table = Mat::Zero(ka, kb);
    for (int i = 0; i < n; ++i) table(la[i], lb[i]) += 1.0;

    auto choose2 = [](double m) { return m * (m - 1.0) / 2.0; };
    double sum_ij = 0.0;
    for (int i = 0; i < ka; ++i)
        for (int j = 0; j < kb; ++j) sum_ij += choose2(table(i, j));
    double sum_a = 0.0, sum_b = 0.0;
    for (int i = 0; i < ka; ++i) sum_a += choose2(table.row(i).sum());
    for (int j = 0; j < kb; ++j) sum_b += choose2(table.col(j).sum());
    const double expected = sum_a * sum_b / choose2(static_cast<double>(n));
    const double max_index = 0.5 * (sum_a + sum_b);
    if (max_index == expected) return 1.0;  // both labelings degenerate
    return (sum_ij - expected) / (max_index - expected);
}

namespace {

// Min-cost assignment on a square cost matrix (potentials method, O(n^3)).
std::vector<int> assignment(const Mat& cost) {
    const int n = static_cast<int>(cost.rows());
    std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
    std::vector<int> p(n + 1, 0), way(n + 1, 0);
    for (int i = 1; i <= n; ++i) {
        p[0] = i;
        int j0 = 0;
        std::vector<double> minv(n + 1, std::numeric_limits<double>::infinity());
        std::vector<bool> used(n + 1, false);
        do {
            used[j0] = true;
            const int i0 = p[j0];
            double delta = std::numeric_limits<double>::infinity();
            int j1 = 0;
            for (int j = 1; j <= n; ++j) {
                if (used[j]) continue;
                const double cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
                if (cur < minv[j]) { minv[j] = cur; way[j] = j0; }
                if (minv[j] < delta) { delta = minv[j]; j1 = j; }
            }
            for (int j = 0; j <= n; ++j) {
                if (used[j]) { u[p[j]] += delta; v[j] -= delta; }
                else minv[j] -= delta;
            }
            j0 = j1;
        } while (p[j0] != 0);
        do {
            const int j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
        } while (j0);
    }
    std::vector<int> row_to_col(n, -1);
    for (int j = 1; j <= n; ++j)
        if (p[j] > 0) row_to_col[p[j] - 1] = j - 1;
    return row_to_col;
}

}  // namespace

double hungarian_disagreement(const std::vector<int>& ls, const std::vector<int>& lf) {
    if (ls.size() != lf.size() || ls.empty())
        throw std::invalid_argument("hungarian_disagreement: length mismatch");
    const int n = static_cast<int>(ls.size());
    const int ka = 1 + *std::max_element(ls.begin(), ls.end());
    const int kb = 1 + *std::max_element(lf.begin(), lf.end());
    const int k = std::max(ka, kb);
    Mat agree = Mat::Zero(k, k);
    for (int i = 0; i < n; ++i) agree(ls[i], lf[i]) += 1.0;
    const std::vector<int> match = assignment(-agree);
    double matched = 0.0;
    for (int i = 0; i < k; ++i) matched += agree(i, match[i]);
    return 100.0 * (n - matched) / n;
}

std::vector<StabilityRow> stability_report(const std::vector<TaskEmbedding>& embeddings,
                                           const std::vector<int>& k_range, int n_seeds,
                                           std::uint64_t base_seed) {
    if (n_seeds < 2) throw std::invalid_argument("stability_report: need n_seeds >= 2");
    const Mat pts = embedding_matrix(embeddings);
    std::vector<StabilityRow> report;
    for (int k : k_range) {
        std::vector<Clustering> runs;
        std::vector<double> sils;
        for (int s = 0; s < n_seeds; ++s) {
            runs.push_back(kmeans_points(pts, k, base_seed + static_cast<std::uint64_t>(s)));
            sils.push_back(k >= 2 ? silhouette(pts, runs.back().assignments, k) : 0.0);
        }
        StabilityRow row;
        row.k = k;
        const double mean = std::accumulate(sils.begin(), sils.end(), 0.0) / n_seeds;
        double var = 0.0;
        for (double s : sils) var += (s - mean) * (s - mean);
        row.silhouette_mean = mean;
        row.silhouette_sd = std::sqrt(var / n_seeds);
        double ari_acc = 0.0;
        int pairs = 0;
        for (int a = 0; a < n_seeds; ++a)
            for (int b = a + 1; b < n_seeds; ++b) {
                ari_acc += adjusted_rand_index(runs[a].assignments, runs[b].assignments);
                ++pairs;
            }
        row.ari_mean = ari_acc / pairs;
        report.push_back(row);
    }
    return report;
}

int select_k(const std::vector<StabilityRow>& report) {
    if (report.empty()) throw std::invalid_argument("select_k: empty report");
    const StabilityRow* best = nullptr;
    for (const StabilityRow& row : report) {
        if (row.ari_mean < 0.95) continue;
        if (!best || row.silhouette_mean > best->silhouette_mean) best = &row;
    }
    if (best) return best->k;
    for (const StabilityRow& row : report) {
        if (!best || row.ari_mean > best->ari_mean) best = &row;
    }
    return best->k;
}

void write_clustering(std::ostream& os, const std::vector<TaskEmbedding>& embeddings,
                      const Clustering& clustering) {
    os << "# lampinn clustering v1\n";
    os << "k " << clustering.k << " seed " << clustering.seed << " objective ";
    os.precision(17);
    os << clustering.objective << '\n';
    for (std::size_t a = 0; a < embeddings.size(); ++a) {
        os << embeddings[a].task_id << " assign " << clustering.assignments[a] << " raw";
        for (Eigen::Index j = 0; j < embeddings[a].raw.size(); ++j) os << ' ' << embeddings[a].raw[j];
        os << " norm";
        for (Eigen::Index j = 0; j < embeddings[a].normalized.size(); ++j)
            os << ' ' << embeddings[a].normalized[j];
        os << '\n';
    }
    for (int c = 0; c < clustering.k; ++c) {
        os << "centroid " << c;
        for (Eigen::Index j = 0; j < clustering.centroids.cols(); ++j)
            os << ' ' << clustering.centroids(c, j);
        os << '\n';
    }
}

}  // namespace lampinn
