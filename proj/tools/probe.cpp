// scratch convergence probe, not part of the shipped build
#include <cstdio>
#include <filesystem>

#include "npr/data.hpp"
#include "npr/harness.hpp"
#include "npr/nn.hpp"
#include "npr/synthgen.hpp"

using namespace npr;
namespace fs = std::filesystem;

int main(int argc, char** argv) {
    const uint64_t seed = argc > 1 ? std::stoull(argv[1]) : 1337;
    const int epochs = argc > 2 ? std::atoi(argv[2]) : 20;
    const double lr = argc > 3 ? std::atof(argv[3]) : 2e-4;
    const int pairs = argc > 4 ? std::atoi(argv[4]) : 250;
    const int size = 64;

    fs::path dir = fs::temp_directory_path() / ("npr_probe_" + std::to_string(seed));
    fs::remove_all(dir);

    synth::CorpusConfig corpus;
    corpus.out_dir = dir.string();
    corpus.image_size = size;
    corpus.jobs = 2;
    corpus.sources.push_back({"nearest", derive_seed(seed, 1),
                              synth::DecoderSpec{derive_seed(seed, 2),
                                                 synth::UpsampleKind::Nearest, 1, 8},
                              pairs});
    corpus.sources.push_back({"bilinear", derive_seed(seed, 3),
                              synth::DecoderSpec{derive_seed(seed, 4),
                                                 synth::UpsampleKind::Bilinear, 1, 8},
                              100});
    synth::build_corpus(corpus);
    std::printf("corpus done\n");

    auto samples = load_dataset(corpus.out_dir);
    std::vector<Sample> near;
    for (auto& s : samples)
        if (s.source == "nearest") near.push_back(s);
    DatasetSplit split = split_dataset(near, 0.2, seed);
    std::printf("train %zu val %zu\n", split.train.size(), split.val.size());

    for (auto rep : {Representation::Npr}) {
        PipelineSpec pipe;
        pipe.grid = GridSpec::index(2, 1);
        pipe.rep = rep;
        pipe.crop = size;
        pipe.batch_size = 32;
        pipe.seed = seed;
        pipe.jobs = 2;
        BatchStream train_stream(split.train, pipe);
        PipelineSpec vp = pipe;
        vp.shuffle = false;
        BatchStream val_stream(split.val, vp);
        auto val_batches = val_stream.epoch(0);

        nn::TrainConfig cfg;
        cfg.batch_size = 32;
        cfg.epochs = epochs;
        cfg.seed = seed;
        cfg.lr = lr;
        cfg.jobs = 2;
        auto t0 = std::chrono::steady_clock::now();
        nn::TrainResult res = nn::train(
            cfg, [&](int e) { return train_stream.epoch(e); }, val_batches,
            [&](const nn::EpochStats& st, const nn::DetectorModel<float>&) {
                std::printf("  ep %2d loss %.4f val_acc %.1f val_ap %.1f\n", st.epoch,
                            st.train_loss, st.val_acc, st.val_ap);
            });
        auto secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        std::printf("rep=%s best_val %.1f at ep %d (%.1f s)\n",
                    representation_to_string(rep).c_str(), res.best_val_acc, res.best_epoch, secs);

        DetectorSettings settings{rep, pipe.grid, size};
        EvalReport ev = evaluate_sources(res.best_model, corpus.out_dir, settings, 32, 2);
        std::printf("%s", report_to_text(ev).c_str());
    }
    fs::remove_all(dir);
    return 0;
}
