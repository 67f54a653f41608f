#pragma once

#include <string>
#include <vector>

namespace npr {

struct ScoredSet {
    std::vector<float> scores;  // probabilities in [0,1]
    std::vector<int> labels;    // 0 real, 1 fake
    std::string source_name;
};

// Percent of samples where (score >= threshold) matches the label; ties at
// the threshold classify as fake.
double accuracy(const ScoredSet& set, double threshold = 0.5);

// Mean of precision at each positive in the score-descending ranking, as a
// percent. Ties are broken by ascending original index.
double average_precision(const ScoredSet& set);

struct EvalRow {
    std::string source;
    int n_real = 0;
    int n_fake = 0;
    double acc = 0.0;
    double ap = 0.0;
    bool valid = true;
    std::string note;
};

struct EvalReport {
    std::vector<EvalRow> rows;
    double mean_acc = 0.0;
    double mean_ap = 0.0;

    // unweighted mean over valid rows
    void finalize();
};

std::string report_to_csv(const EvalReport& report);
std::string report_to_text(const EvalReport& report);

}  // namespace npr
