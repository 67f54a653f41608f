#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "npr/error.hpp"
#include "npr/metrics.hpp"
#include "npr/rng.hpp"

using namespace npr;

namespace {

// O(n^2) reference: rank every positive by pairwise comparison under the
// (descending score, ascending index) order, then average the precisions.
double oracle_average_precision(const ScoredSet& set) {
    const size_t n = set.scores.size();
    auto before = [&](size_t a, size_t b) {
        if (set.scores[a] != set.scores[b]) return set.scores[a] > set.scores[b];
        return a < b;
    };
    double sum = 0.0;
    size_t positives = 0;
    for (size_t i = 0; i < n; ++i) {
        if (set.labels[i] != 1) continue;
        ++positives;
        size_t rank = 1, pos_at_or_before = 0;
        for (size_t j = 0; j < n; ++j) {
            if (j != i && before(j, i)) ++rank;
            if (set.labels[j] == 1 && (j == i || before(j, i))) ++pos_at_or_before;
        }
        sum += static_cast<double>(pos_at_or_before) / static_cast<double>(rank);
    }
    return 100.0 * sum / static_cast<double>(positives);
}

ScoredSet random_set(Rng& rng, size_t max_n = 50, bool allow_ties = true) {
    for (;;) {
        const size_t n = 2 + rng.below(max_n - 1);
        ScoredSet set;
        for (size_t i = 0; i < n; ++i) {
            float s = allow_ties ? static_cast<float>(rng.below(11)) / 10.0f
                                 : static_cast<float>(rng.uniform01());
            set.scores.push_back(s);
            set.labels.push_back(static_cast<int>(rng.below(2)));
        }
        bool has0 = false, has1 = false;
        for (int y : set.labels) (y ? has1 : has0) = true;
        if (has0 && has1) return set;
    }
}

}  // namespace

TEST_CASE("accuracy examples") {
    CHECK(accuracy({{0.9f, 0.8f, 0.1f, 0.2f}, {1, 1, 0, 0}, ""}) == 100.0);
    CHECK(accuracy({{0.5f, 0.5f, 0.5f, 0.5f}, {1, 1, 0, 0}, ""}) == 50.0);
    CHECK(accuracy({{0.6f, 0.4f, 0.6f, 0.4f}, {1, 1, 0, 0}, ""}) == 50.0);
    CHECK_THROWS_AS(accuracy({{}, {}, ""}), ConfigError);
    CHECK_THROWS_AS(accuracy({{0.5f}, {2}, ""}), ConfigError);
}

TEST_CASE("accuracy threshold symmetry on tie-free data") {
    Rng rng(3);
    for (int rep = 0; rep < 100; ++rep) {
        ScoredSet set = random_set(rng, 30, /*allow_ties=*/false);
        ScoredSet flipped = set;
        for (auto& s : flipped.scores) s = 1.0f - s;
        for (auto& y : flipped.labels) y = 1 - y;
        CHECK(accuracy(set, 0.5) == accuracy(flipped, 0.5));
    }
}

TEST_CASE("average precision examples") {
    CHECK(average_precision({{0.9f, 0.8f, 0.2f, 0.1f}, {1, 1, 0, 0}, ""}) == 100.0);
    double ap = average_precision({{0.9f, 0.8f, 0.7f, 0.6f}, {1, 0, 1, 0}, ""});
    CHECK(std::fabs(ap - 83.33) <= 0.01);
    CHECK_THROWS_AS(average_precision({{0.5f, 0.6f}, {1, 1}, ""}), ConfigError);
    CHECK_THROWS_AS(average_precision({{0.5f, 0.6f}, {0, 0}, ""}), ConfigError);
}

TEST_CASE("average precision equals the quadratic oracle on 1000 random sets") {
    Rng rng(17);
    for (int rep = 0; rep < 1000; ++rep) {
        ScoredSet set = random_set(rng);
        const double got = average_precision(set);
        const double want = oracle_average_precision(set);
        CHECK(std::fabs(got - want) <= 1e-9);
    }
}

TEST_CASE("average precision ignores monotone score transforms") {
    Rng rng(23);
    for (int rep = 0; rep < 200; ++rep) {
        ScoredSet set = random_set(rng);
        ScoredSet warped = set;
        for (auto& s : warped.scores) s = s * s * s;  // strictly increasing on [0,1]
        CHECK(average_precision(set) == average_precision(warped));
    }
}

TEST_CASE("adversarial ordering attains the exact lower bound") {
    // negatives ranked above all positives: precision at the k-th positive is
    // k/(N+k), which lower-bounds AP over all orderings
    for (auto [P, N] : {std::pair{1, 1}, {2, 2}, {3, 7}, {5, 3}}) {
        ScoredSet set;
        for (int i = 0; i < N; ++i) {
            set.scores.push_back(0.9f);
            set.labels.push_back(0);
        }
        for (int i = 0; i < P; ++i) {
            set.scores.push_back(0.1f);
            set.labels.push_back(1);
        }
        double bound = 0.0;
        for (int k = 1; k <= P; ++k)
            bound += static_cast<double>(k) / static_cast<double>(N + k);
        bound *= 100.0 / P;
        CHECK(average_precision(set) == doctest::Approx(bound).epsilon(1e-12));
    }

    Rng rng(29);
    for (int rep = 0; rep < 200; ++rep) {
        ScoredSet set = random_set(rng);
        int P = 0, N = 0;
        for (int y : set.labels) (y ? P : N) += 1;
        double bound = 0.0;
        for (int k = 1; k <= P; ++k)
            bound += static_cast<double>(k) / static_cast<double>(N + k);
        bound *= 100.0 / P;
        CHECK(average_precision(set) >= bound - 1e-9);
        CHECK(average_precision(set) <= 100.0 + 1e-9);
    }
}

TEST_CASE("tie handling is deterministic by original index") {
    ScoredSet set{{0.5f, 0.5f, 0.5f}, {0, 1, 0}, ""};
    // order under ties: indices 0,1,2 -> positive at rank 2
    CHECK(average_precision(set) == doctest::Approx(100.0 / 2.0));
}

TEST_CASE("mean row equals the recomputed mean") {
    EvalReport report;
    report.rows.push_back({"a", 10, 10, 91.25, 97.5, true, ""});
    report.rows.push_back({"b", 10, 10, 80.75, 88.25, true, ""});
    report.rows.push_back({"broken", 10, 0, 0.0, 0.0, false, "missing class 1_fake"});
    report.finalize();
    CHECK(std::fabs(report.mean_acc - (91.25 + 80.75) / 2.0) <= 1e-9);
    CHECK(std::fabs(report.mean_ap - (97.5 + 88.25) / 2.0) <= 1e-9);

    std::string csv = report_to_csv(report);
    CHECK(csv.find("Mean") != std::string::npos);
    CHECK(csv.find("invalid") != std::string::npos);
    std::string text = report_to_text(report);
    CHECK(text.find("missing class 1_fake") != std::string::npos);
}
