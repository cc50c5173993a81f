#ifndef LAMPINN_STATS_HPP
#define LAMPINN_STATS_HPP

#include "lampinn/affinity.hpp"

namespace lampinn {

/// Per-task (ours, base) MSE pairs for paired tests.
struct PairedSample {
    std::vector<double> ours;
    std::vector<double> base;

    std::size_t size() const { return ours.size(); }
    void check_valid() const;
};

/// Scalar used to rank unseen tasks into groups A and B.
enum class AffinityScore { L1, L2, L3, EmbeddingNorm };

struct GroupSplit {
    std::vector<std::uint64_t> group_a;  // top half by score, descending
    std::vector<std::uint64_t> group_b;
};

/// Split an even number of tasks by affinity score; ties fall back to
/// ascending task id.
GroupSplit group_split(const std::vector<TaskEmbedding>& embeddings, int n_params,
                       AffinityScore score = AffinityScore::L3);

struct WilcoxonResult {
    double statistic = 0.0;  // min(T+, T-) over midranked |differences|
    double p_value = 1.0;    // two-sided
    int n_used = 0;          // nonzero differences
    bool degenerate = false;
    bool exact = false;
};

/// Two-sided paired Wilcoxon signed-rank test. Zero differences are
/// dropped, ties midranked; exact sign-pattern enumeration for n <= 25,
/// normal approximation with continuity correction above.
WilcoxonResult wilcoxon_signed_rank(const PairedSample& pairs);

struct ReductionCi {
    double reduction_percent = 0.0;
    double ci_low = 0.0;
    double ci_high = 0.0;
};

/// Relative MSE reduction 100*(1 - mean(ours)/mean(base)) with a paired
/// percentile bootstrap 95% interval; deterministic in seed.
ReductionCi bootstrap_reduction_ci(const PairedSample& pairs, int n_resamples = 10000,
                                   std::uint64_t seed = 0);

}  // namespace lampinn

#endif
