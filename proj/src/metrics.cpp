#include "npr/metrics.hpp"

#include <algorithm>
#include <cstdio>
#include <numeric>

#include "npr/error.hpp"

namespace npr {

namespace {

void validate_set(const ScoredSet& set) {
    if (set.scores.empty()) throw ConfigError("scored set is empty");
    if (set.scores.size() != set.labels.size())
        throw ConfigError("scores/labels length mismatch");
    for (int y : set.labels)
        if (y != 0 && y != 1) throw ConfigError("label must be 0 or 1");
}

}  // namespace

double accuracy(const ScoredSet& set, double threshold) {
    validate_set(set);
    size_t correct = 0;
    for (size_t i = 0; i < set.scores.size(); ++i) {
        int predicted = static_cast<double>(set.scores[i]) >= threshold ? 1 : 0;
        if (predicted == set.labels[i]) ++correct;
    }
    return 100.0 * static_cast<double>(correct) / static_cast<double>(set.scores.size());
}

double average_precision(const ScoredSet& set) {
    validate_set(set);
    const size_t n = set.scores.size();
    size_t positives = std::count(set.labels.begin(), set.labels.end(), 1);
    if (positives == 0 || positives == n)
        throw ConfigError("average precision needs both classes in '" + set.source_name + "'");

    std::vector<size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](size_t a, size_t b) {
        if (set.scores[a] != set.scores[b]) return set.scores[a] > set.scores[b];
        return a < b;
    });

    double sum_precision = 0.0;
    size_t seen_positive = 0;
    for (size_t rank = 0; rank < n; ++rank) {
        if (set.labels[order[rank]] == 1) {
            ++seen_positive;
            sum_precision += static_cast<double>(seen_positive) / static_cast<double>(rank + 1);
        }
    }
    return 100.0 * sum_precision / static_cast<double>(positives);
}

void EvalReport::finalize() {
    double acc = 0.0, ap = 0.0;
    int n = 0;
    for (const auto& row : rows) {
        if (!row.valid) continue;
        acc += row.acc;
        ap += row.ap;
        ++n;
    }
    mean_acc = n ? acc / n : 0.0;
    mean_ap = n ? ap / n : 0.0;
}

std::string report_to_csv(const EvalReport& report) {
    std::string out = "source,n_real,n_fake,acc,ap\n";
    char line[256];
    for (const auto& r : report.rows) {
        if (r.valid) {
            std::snprintf(line, sizeof(line), "%s,%d,%d,%.4f,%.4f\n", r.source.c_str(), r.n_real,
                          r.n_fake, r.acc, r.ap);
        } else {
            std::snprintf(line, sizeof(line), "%s,%d,%d,invalid,invalid\n", r.source.c_str(),
                          r.n_real, r.n_fake);
        }
        out += line;
    }
    std::snprintf(line, sizeof(line), "Mean,,,%.4f,%.4f\n", report.mean_acc, report.mean_ap);
    out += line;
    return out;
}

std::string report_to_text(const EvalReport& report) {
    std::string out;
    char line[256];
    std::snprintf(line, sizeof(line), "%-20s %7s %7s %8s %8s\n", "Source", "N_real", "N_fake",
                  "Acc", "AP");
    out += line;
    out += std::string(54, '-') + "\n";
    for (const auto& r : report.rows) {
        if (r.valid) {
            std::snprintf(line, sizeof(line), "%-20s %7d %7d %8.2f %8.2f\n", r.source.c_str(),
                          r.n_real, r.n_fake, r.acc, r.ap);
        } else {
            std::snprintf(line, sizeof(line), "%-20s %7d %7d %8s %8s  (%s)\n", r.source.c_str(),
                          r.n_real, r.n_fake, "-", "-", r.note.c_str());
        }
        out += line;
    }
    out += std::string(54, '-') + "\n";
    std::snprintf(line, sizeof(line), "%-20s %7s %7s %8.2f %8.2f\n", "Mean", "", "",
                  report.mean_acc, report.mean_ap);
    out += line;
    return out;
}

}  // namespace npr
