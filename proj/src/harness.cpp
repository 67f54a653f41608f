#include "npr/harness.hpp"

#include <cstdio>
#include <map>

#include "npr/error.hpp"

namespace npr {

std::string make_descriptor(const DetectorSettings& s) {
    char buf[128];
    std::snprintf(buf, sizeof(buf), "detector-v1 rep=%s l=%d pivot=%s crop=%d",
                  representation_to_string(s.rep).c_str(), s.grid.l,
                  pivot_to_string(s.grid).c_str(), s.crop);
    return buf;
}

DetectorSettings parse_descriptor(const std::string& descriptor) {
    char rep[16] = {0}, pivot[32] = {0};
    int l = 0, crop = 0;
    if (std::sscanf(descriptor.c_str(), "detector-v1 rep=%15s l=%d pivot=%31s crop=%d", rep, &l,
                    pivot, &crop) != 4)
        throw ConfigError("checkpoint/architecture mismatch: descriptor '" + descriptor + "'");
    DetectorSettings s;
    s.rep = representation_from_string(rep);
    s.grid = grid_from_strings(l, pivot);
    s.crop = crop;
    if (crop < 1) throw ConfigError("bad crop in descriptor '" + descriptor + "'");
    return s;
}

EvalReport evaluate_sources(const nn::DetectorModel<float>& model, const std::string& corpus_root,
                            const DetectorSettings& settings, int batch_size, int jobs) {
    LoadReport load_report;
    std::vector<Sample> samples = load_dataset(corpus_root, &load_report, /*strict=*/false);

    std::map<std::string, std::vector<Sample>> by_source;
    for (auto& s : samples) by_source[s.source].push_back(s);

    EvalReport report;
    for (auto& [name, group] : by_source) {
        EvalRow row;
        row.source = name;
        for (const auto& s : group) (s.label ? row.n_fake : row.n_real) += 1;
        if (row.n_real == 0 || row.n_fake == 0) {
            row.valid = false;
            row.note = std::string("missing class ") + (row.n_real == 0 ? "0_real" : "1_fake");
            report.rows.push_back(row);
            continue;
        }
        PipelineSpec spec;
        spec.grid = settings.grid;
        spec.rep = settings.rep;
        spec.crop = settings.crop;
        spec.crop_mode = CropMode::Center;
        spec.batch_size = batch_size;
        spec.seed = 0;
        spec.shuffle = false;
        spec.jobs = jobs;
        BatchStream stream(group, spec);
        auto batches = stream.epoch(0);

        ScoredSet set;
        set.source_name = name;
        set.scores = nn::score_batches(model, batches, jobs);
        for (const auto& b : batches) set.labels.insert(set.labels.end(), b.y.begin(), b.y.end());
        row.acc = accuracy(set);
        row.ap = average_precision(set);
        report.rows.push_back(row);
    }
    report.finalize();
    return report;
}

}  // namespace npr
