#pragma once

#include <string>

#include "npr/data.hpp"
#include "npr/metrics.hpp"
#include "npr/nn.hpp"
#include "npr/npr.hpp"

namespace npr {

// Settings a checkpoint was trained with, carried in its descriptor line.
struct DetectorSettings {
    Representation rep = Representation::Npr;
    GridSpec grid;
    int crop = 128;
};

std::string make_descriptor(const DetectorSettings& s);
DetectorSettings parse_descriptor(const std::string& descriptor);

// Scores every source under the corpus root with center-crop preprocessing
// and assembles per-source accuracy / average precision rows plus the
// unweighted mean. Sources missing a class yield invalid rows.
EvalReport evaluate_sources(const nn::DetectorModel<float>& model, const std::string& corpus_root,
                            const DetectorSettings& settings, int batch_size = 32, int jobs = 1);

}  // namespace npr
