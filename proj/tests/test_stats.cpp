#include "doctest.h"

#include "lampinn/stats.hpp"

#include <algorithm>
#include <cmath>
#include <random>

using namespace lampinn;

namespace {

TaskEmbedding scored(std::uint64_t id, double l3, int n_params = 3) {
    TaskEmbedding e;
    e.task_id = id;
    e.normalized = Vec::Zero(n_params + 3);
    e.normalized[n_params + 2] = l3;
    e.raw = e.normalized;
    return e;
}

// exhaustive sign-pattern enumeration with the same midrank convention
double brute_force_wilcoxon_p(const std::vector<double>& diffs) {
    const int n = static_cast<int>(diffs.size());
    std::vector<int> order(diffs.size());
    for (int i = 0; i < n; ++i) order[i] = i;
    std::sort(order.begin(), order.end(),
              [&](int a, int b) { return std::abs(diffs[a]) < std::abs(diffs[b]); });
    std::vector<double> rank(diffs.size());
    for (int i = 0; i < n;) {
        int j = i;
        while (j < n && std::abs(diffs[order[j]]) == std::abs(diffs[order[i]])) ++j;
        for (int t = i; t < j; ++t) rank[order[t]] = (i + 1 + j) / 2.0;
        i = j;
    }
    double t_plus = 0.0, total = 0.0;
    for (int i = 0; i < n; ++i) {
        total += rank[i];
        if (diffs[i] > 0) t_plus += rank[i];
    }
    const double t_obs = std::min(t_plus, total - t_plus);
    long long count = 0;
    for (long long mask = 0; mask < (1LL << n); ++mask) {
        double t = 0.0;
        for (int i = 0; i < n; ++i)
            if (mask & (1LL << i)) t += rank[i];
        if (t <= t_obs) ++count;
    }
    return std::min(1.0, 2.0 * static_cast<double>(count) / std::ldexp(1.0, n));
}

}  // namespace

TEST_CASE("group_split") {
    SUBCASE("scores 1..4 rank descending") {
        std::vector<TaskEmbedding> emb = {scored(10, 1), scored(11, 2), scored(12, 3),
                                          scored(13, 4)};
        GroupSplit s = group_split(emb, 3);
        CHECK(s.group_a == std::vector<std::uint64_t>{13, 12});
        CHECK(s.group_b == std::vector<std::uint64_t>{11, 10});
    }
    SUBCASE("all-equal scores fall back to ascending task id") {
        std::vector<TaskEmbedding> emb = {scored(7, 0), scored(3, 0), scored(9, 0), scored(1, 0)};
        GroupSplit s = group_split(emb, 3);
        CHECK(s.group_a == std::vector<std::uint64_t>{1, 3});
        CHECK(s.group_b == std::vector<std::uint64_t>{7, 9});
    }
    SUBCASE("10 tasks give a 5/5 split") {
        std::vector<TaskEmbedding> emb;
        for (std::uint64_t i = 0; i < 10; ++i) emb.push_back(scored(i, static_cast<double>(i)));
        GroupSplit s = group_split(emb, 3);
        CHECK(s.group_a.size() == 5);
        CHECK(s.group_b.size() == 5);
    }
    SUBCASE("odd count throws") {
        std::vector<TaskEmbedding> emb = {scored(0, 0), scored(1, 1), scored(2, 2)};
        CHECK_THROWS_AS(group_split(emb, 3), std::invalid_argument);
    }
    SUBCASE("embedding-norm score works without loss features") {
        TaskEmbedding big, small;
        big.task_id = 0;
        big.normalized = Vec::Constant(3, 2.0);
        small.task_id = 1;
        small.normalized = Vec::Constant(3, 0.5);
        GroupSplit s = group_split({small, big}, 3, AffinityScore::EmbeddingNorm);
        CHECK(s.group_a == std::vector<std::uint64_t>{0});
    }
}

TEST_CASE("wilcoxon_signed_rank") {
    SUBCASE("identical samples degenerate to p=1") {
        PairedSample p{{1, 2, 3, 4, 5}, {1, 2, 3, 4, 5}};
        WilcoxonResult r = wilcoxon_signed_rank(p);
        CHECK(r.degenerate);
        CHECK(r.p_value == 1.0);
    }
    SUBCASE("all-positive differences 1..5 give the textbook exact p") {
        PairedSample p{{2, 4, 6, 8, 10}, {1, 2, 3, 4, 5}};
        WilcoxonResult r = wilcoxon_signed_rank(p);
        CHECK(r.exact);
        CHECK(r.statistic == 0.0);
        CHECK(r.p_value == doctest::Approx(0.0625).epsilon(1e-12));
    }
    SUBCASE("swapping the samples keeps |p|") {
        PairedSample p{{2, 4, 6, 8, 10}, {1, 2, 3, 4, 5}};
        PairedSample q{{1, 2, 3, 4, 5}, {2, 4, 6, 8, 10}};
        CHECK(wilcoxon_signed_rank(p).p_value == wilcoxon_signed_rank(q).p_value);
        CHECK(wilcoxon_signed_rank(p).statistic == wilcoxon_signed_rank(q).statistic);
    }
    SUBCASE("exact p matches full enumeration for random n <= 12") {
        std::mt19937_64 rng(17);
        std::uniform_int_distribution<int> nd(5, 12);
        std::uniform_int_distribution<int> vd(1, 6);  // small ints force ties
        for (int trial = 0; trial < 30; ++trial) {
            const int n = nd(rng);
            PairedSample p;
            std::vector<double> diffs;
            for (int i = 0; i < n; ++i) {
                const double base = vd(rng);
                double ours = vd(rng);
                if (ours == base) ours += 0.5;  // keep differences nonzero
                p.ours.push_back(ours);
                p.base.push_back(base);
                diffs.push_back(ours - base);
            }
            WilcoxonResult r = wilcoxon_signed_rank(p);
            CHECK(r.exact);
            CHECK(r.p_value == doctest::Approx(brute_force_wilcoxon_p(diffs)).epsilon(1e-12));
        }
    }
    SUBCASE("large n uses the normal approximation sensibly") {
        PairedSample p;
        for (int i = 1; i <= 30; ++i) {
            p.ours.push_back(i + 10.0);
            p.base.push_back(static_cast<double>(i));
        }
        WilcoxonResult r = wilcoxon_signed_rank(p);
        CHECK_FALSE(r.exact);
        CHECK(r.p_value < 1e-4);
        CHECK(r.statistic == 0.0);
    }
    SUBCASE("too few nonzero differences throw") {
        PairedSample p{{1, 2, 3, 4, 5}, {2, 2, 3, 4, 5}};
        CHECK_THROWS_AS(wilcoxon_signed_rank(p), std::invalid_argument);
    }
}

TEST_CASE("bootstrap_reduction_ci") {
    SUBCASE("identical pairs give 0% with CI containing 0") {
        PairedSample p{{1, 2, 3}, {1, 2, 3}};
        ReductionCi c = bootstrap_reduction_ci(p, 200, 1);
        CHECK(c.reduction_percent == doctest::Approx(0.0));
        CHECK(c.ci_low <= 0.0);
        CHECK(c.ci_high >= 0.0);
    }
    SUBCASE("zero numerator gives 100% with degenerate CI") {
        PairedSample p{{0, 0, 0}, {1, 2, 3}};
        ReductionCi c = bootstrap_reduction_ci(p, 200, 1);
        CHECK(c.reduction_percent == doctest::Approx(100.0));
        CHECK(c.ci_low == doctest::Approx(100.0));
        CHECK(c.ci_high == doctest::Approx(100.0));
    }
    SUBCASE("constant pairs are resampling-invariant") {
        PairedSample p;
        p.ours.assign(10, 1.0);
        p.base.assign(10, 2.0);
        ReductionCi c = bootstrap_reduction_ci(p, 500, 7);
        CHECK(c.reduction_percent == doctest::Approx(50.0));
        CHECK(c.ci_low == doctest::Approx(50.0));
        CHECK(c.ci_high == doctest::Approx(50.0));
    }
    SUBCASE("deterministic in seed; CI brackets the point estimate") {
        std::mt19937_64 rng(5);
        std::uniform_real_distribution<double> u(0.1, 4.0);
        PairedSample p;
        for (int i = 0; i < 12; ++i) {
            p.ours.push_back(u(rng));
            p.base.push_back(u(rng) + 1.0);
        }
        ReductionCi a = bootstrap_reduction_ci(p, 2000, 42);
        ReductionCi b = bootstrap_reduction_ci(p, 2000, 42);
        CHECK(a.ci_low == b.ci_low);
        CHECK(a.ci_high == b.ci_high);
        CHECK(a.ci_low <= a.reduction_percent);
        CHECK(a.ci_high >= a.reduction_percent);
        ReductionCi c = bootstrap_reduction_ci(p, 2000, 43);
        CHECK(c.ci_low != a.ci_low);
    }
    SUBCASE("scale invariance") {
        PairedSample p{{1, 2, 3, 4}, {2, 3, 4, 9}};
        PairedSample q{{3, 6, 9, 12}, {6, 9, 12, 27}};
        ReductionCi a = bootstrap_reduction_ci(p, 500, 3);
        ReductionCi b = bootstrap_reduction_ci(q, 500, 3);
        CHECK(a.reduction_percent == doctest::Approx(b.reduction_percent).epsilon(1e-12));
        CHECK(a.ci_low == doctest::Approx(b.ci_low).epsilon(1e-12));
        CHECK(a.ci_high == doctest::Approx(b.ci_high).epsilon(1e-12));
    }
    SUBCASE("zero base mean throws") {
        PairedSample p{{1, 2}, {0, 0}};
        CHECK_THROWS_AS(bootstrap_reduction_ci(p, 100, 0), std::invalid_argument);
    }
}
