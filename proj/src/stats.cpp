#include "lampinn/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

namespace lampinn {

void PairedSample::check_valid() const {
    if (ours.size() != base.size())
        throw std::invalid_argument("PairedSample: length mismatch");
    for (double v : ours)
        if (!(v >= 0.0)) throw std::invalid_argument("PairedSample: negative or NaN value");
    for (double v : base)
        if (!(v >= 0.0)) throw std::invalid_argument("PairedSample: negative or NaN value");
}

GroupSplit group_split(const std::vector<TaskEmbedding>& embeddings, int n_params,
                       AffinityScore score) {
    const std::size_t n = embeddings.size();
    if (n < 2 || n % 2 != 0)
        throw std::invalid_argument("group_split: need an even task count >= 2");

    auto score_of = [&](const TaskEmbedding& e) -> double {
        const Eigen::Index dim = e.normalized.size();
        auto loss_feature = [&](int which) {
            const Eigen::Index idx = n_params + which;
            if (idx < 0 || idx >= dim)
                throw std::invalid_argument("group_split: embedding lacks loss features");
            return e.normalized[idx];
        };
        switch (score) {
            case AffinityScore::L1: return loss_feature(0);
            case AffinityScore::L2: return loss_feature(1);
            case AffinityScore::L3: return loss_feature(2);
            case AffinityScore::EmbeddingNorm: return e.normalized.norm();
        }
        throw std::logic_error("group_split: unknown score");
    };

    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        const double sa = score_of(embeddings[a]), sb = score_of(embeddings[b]);
        if (sa != sb) return sa > sb;
        return embeddings[a].task_id < embeddings[b].task_id;
    });

    GroupSplit split;
    for (std::size_t i = 0; i < n; ++i)
        (i < n / 2 ? split.group_a : split.group_b).push_back(embeddings[order[i]].task_id);
    return split;
}

namespace {

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

}  // namespace

WilcoxonResult wilcoxon_signed_rank(const PairedSample& pairs) {
    pairs.check_valid();
    std::vector<double> diffs;
    for (std::size_t i = 0; i < pairs.size(); ++i) {
        const double d = pairs.ours[i] - pairs.base[i];
        if (d != 0.0) diffs.push_back(d);
    }

    WilcoxonResult result;
    result.n_used = static_cast<int>(diffs.size());
    if (diffs.empty()) {
        result.degenerate = true;
        result.p_value = 1.0;
        return result;
    }
    if (diffs.size() < 5)
        throw std::invalid_argument("wilcoxon_signed_rank: need >= 5 nonzero differences");

    const int n = static_cast<int>(diffs.size());
    std::vector<int> order(diffs.size());
    for (std::size_t i = 0; i < diffs.size(); ++i) order[i] = static_cast<int>(i);
    std::sort(order.begin(), order.end(),
              [&](int a, int b) { return std::abs(diffs[a]) < std::abs(diffs[b]); });

    // midranks over |d|, doubled so tied half-ranks stay integral
    std::vector<long long> rank2(diffs.size());
    for (int i = 0; i < n;) {
        int j = i;
        while (j < n && std::abs(diffs[order[j]]) == std::abs(diffs[order[i]])) ++j;
        // doubled midrank of a tie block spanning sorted positions [i, j)
        for (int t = i; t < j; ++t) rank2[order[t]] = i + 1 + j;
        i = j;
    }

    long long t_plus2 = 0, t_minus2 = 0;
    for (std::size_t i = 0; i < diffs.size(); ++i)
        (diffs[i] > 0 ? t_plus2 : t_minus2) += rank2[i];
    const long long t_min2 = std::min(t_plus2, t_minus2);
    result.statistic = static_cast<double>(t_min2) / 2.0;

    if (n <= 25) {
        result.exact = true;
        // count sign patterns with doubled rank-sum <= t_min2
        const long long total2 = t_plus2 + t_minus2;
        std::vector<double> count(static_cast<std::size_t>(total2) + 1, 0.0);
        count[0] = 1.0;
        for (long long r2 : rank2)
            for (long long s = total2; s >= r2; --s)
                count[static_cast<std::size_t>(s)] += count[static_cast<std::size_t>(s - r2)];
        double tail = 0.0;
        for (long long s = 0; s <= t_min2; ++s) tail += count[static_cast<std::size_t>(s)];
        result.p_value = std::min(1.0, 2.0 * tail / std::ldexp(1.0, n));
    } else {
        const double mean = n * (n + 1) / 4.0;
        double tie_corr = 0.0;
        {
            std::vector<long long> sorted = rank2;
            std::sort(sorted.begin(), sorted.end());
            for (std::size_t i = 0; i < sorted.size();) {
                std::size_t j = i;
                while (j < sorted.size() && sorted[j] == sorted[i]) ++j;
                const double t = static_cast<double>(j - i);
                tie_corr += (t * t * t - t) / 48.0;
                i = j;
            }
        }
        const double var = n * (n + 1) * (2.0 * n + 1) / 24.0 - tie_corr;
        const double z = (result.statistic - mean + 0.5) / std::sqrt(var);
        result.p_value = std::min(1.0, 2.0 * normal_cdf(z));
    }
    return result;
}

ReductionCi bootstrap_reduction_ci(const PairedSample& pairs, int n_resamples,
                                   std::uint64_t seed) {
    pairs.check_valid();
    const std::size_t n = pairs.size();
    if (n < 2) throw std::invalid_argument("bootstrap_reduction_ci: need >= 2 pairs");
    if (n_resamples < 1) throw std::invalid_argument("bootstrap_reduction_ci: need >= 1 resamples");

    auto reduction = [](double mean_ours, double mean_base) {
        return 100.0 * (1.0 - mean_ours / mean_base);
    };
    const double mo = std::accumulate(pairs.ours.begin(), pairs.ours.end(), 0.0) / n;
    const double mb = std::accumulate(pairs.base.begin(), pairs.base.end(), 0.0) / n;
    if (mb <= 0.0)
        throw std::invalid_argument("bootstrap_reduction_ci: base mean must be positive");

    ReductionCi ci;
    ci.reduction_percent = reduction(mo, mb);

    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<std::size_t> pick(0, n - 1);
    std::vector<double> stats;
    stats.reserve(static_cast<std::size_t>(n_resamples));
    while (stats.size() < static_cast<std::size_t>(n_resamples)) {
        double so = 0.0, sb = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const std::size_t j = pick(rng);
            so += pairs.ours[j];
            sb += pairs.base[j];
        }
        if (sb <= 0.0) continue;  // reduction undefined for this resample
        stats.push_back(reduction(so / n, sb / n));
    }
    std::sort(stats.begin(), stats.end());
    const std::size_t b = stats.size();
    const std::size_t lo = static_cast<std::size_t>(std::floor(0.025 * (b - 1)));
    const std::size_t hi = static_cast<std::size_t>(std::ceil(0.975 * (b - 1)));
    ci.ci_low = stats[lo];
    ci.ci_high = stats[hi];
    return ci;
}

}  // namespace lampinn
