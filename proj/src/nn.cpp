#include "npr/nn.hpp"

#include <cstdio>
#include <cstring>
#include <fstream>

#include "npr/metrics.hpp"

namespace npr::nn {

void validate_train_config(const TrainConfig& cfg) {
    if (cfg.batch_size < 1) throw ConfigError("batch_size must be >= 1");
    if (cfg.epochs < 1) throw ConfigError("epochs must be >= 1");
    if (cfg.lr <= 0.0) throw ConfigError("learning rate must be positive");
    if (!(cfg.val_fraction > 0.0 && cfg.val_fraction < 1.0))
        throw ConfigError("validation fraction must be in (0,1)");
}

std::vector<float> score_batches(const DetectorModel<float>& model,
                                 const std::vector<Batch>& batches, int jobs) {
    std::vector<float> scores;
    for (const auto& b : batches) {
        auto logits = detector_forward(model, b.x, static_cast<Trace<float>*>(nullptr), jobs);
        for (float z : logits) scores.push_back(static_cast<float>(sigmoid(z)));
    }
    return scores;
}

namespace {

void check_both_classes(const std::vector<Batch>& batches, const char* what) {
    bool has0 = false, has1 = false;
    for (const auto& b : batches)
        for (int y : b.y) (y ? has1 : has0) = true;
    if (!has0 || !has1)
        throw ConfigError(std::string(what) + " set lacks class " + (has0 ? "1_fake" : "0_real"));
}

}  // namespace

TrainResult train(const TrainConfig& cfg, const EpochBatchFn& epoch_batches,
                  const std::vector<Batch>& val_batches, const EpochCallback& on_epoch) {
    validate_train_config(cfg);
    if (val_batches.empty()) throw ConfigError("validation set is empty");
    check_both_classes(val_batches, "validation");

    std::vector<int> val_labels;
    for (const auto& b : val_batches) val_labels.insert(val_labels.end(), b.y.begin(), b.y.end());

    TrainResult result;
    DetectorModel<float> model = DetectorModel<float>::seeded(cfg.seed);
    AdamState<float> adam;

    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        std::vector<Batch> batches = epoch_batches(epoch);
        if (batches.empty()) throw ConfigError("training set is empty");
        if (epoch == 0) check_both_classes(batches, "training");

        double loss_sum = 0.0;
        size_t sample_count = 0;
        for (const auto& batch : batches) {
            Trace<float> trace;
            auto logits = detector_forward(model, batch.x, &trace, cfg.jobs);
            auto bce = bce_with_logits(logits, batch.y);
            loss_sum += bce.loss * static_cast<double>(batch.y.size());
            sample_count += batch.y.size();
            auto grads = detector_backward(model, trace, batch.x, bce.dlogits, cfg.jobs);
            adam_step(model, grads, adam, cfg.lr);
        }

        ScoredSet val;
        val.scores = score_batches(model, val_batches, cfg.jobs);
        val.labels = val_labels;
        val.source_name = "val";

        EpochStats stats;
        stats.epoch = epoch;
        stats.train_loss = loss_sum / static_cast<double>(sample_count);
        stats.val_acc = accuracy(val);
        stats.val_ap = average_precision(val);
        result.history.push_back(stats);

        if (result.best_epoch < 0 || stats.val_acc > result.best_val_acc) {
            result.best_val_acc = stats.val_acc;
            result.best_epoch = epoch;
            result.best_model = model;
        }
        if (on_epoch) on_epoch(stats, model);
    }
    return result;
}

namespace {

void put_u32(std::ostream& os, uint32_t v) {
    unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                          static_cast<unsigned char>(v >> 16),
                          static_cast<unsigned char>(v >> 24)};
    os.write(reinterpret_cast<const char*>(b), 4);
}

uint32_t get_u32(std::istream& is) {
    unsigned char b[4];
    is.read(reinterpret_cast<char*>(b), 4);
    return static_cast<uint32_t>(b[0]) | (static_cast<uint32_t>(b[1]) << 8) |
           (static_cast<uint32_t>(b[2]) << 16) | (static_cast<uint32_t>(b[3]) << 24);
}

constexpr char kMagic[4] = {'N', 'P', 'R', 'M'};

}  // namespace

void save_checkpoint(const std::string& path, DetectorModel<float>& model,
                     const std::string& descriptor) {
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) throw IoError("cannot open for write: " + path);
    os.write(kMagic, 4);
    put_u32(os, static_cast<uint32_t>(descriptor.size()));
    os.write(descriptor.data(), static_cast<std::streamsize>(descriptor.size()));
    auto params = model.params();
    put_u32(os, static_cast<uint32_t>(params.size()));
    for (const auto& p : params) {
        uint32_t name_len = static_cast<uint32_t>(std::strlen(p.name));
        put_u32(os, name_len);
        os.write(p.name, name_len);
        put_u32(os, static_cast<uint32_t>(p.len));
        os.write(reinterpret_cast<const char*>(p.data),
                 static_cast<std::streamsize>(p.len * sizeof(float)));
    }
    if (!os) throw IoError("short write: " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError("cannot open: " + path);
    char magic[4];
    is.read(magic, 4);
    if (!is || std::memcmp(magic, kMagic, 4) != 0)
        throw ConfigError("not a detector checkpoint: " + path);
    Checkpoint ck;
    uint32_t desc_len = get_u32(is);
    if (desc_len > 4096) throw ConfigError("corrupt checkpoint descriptor: " + path);
    ck.descriptor.resize(desc_len);
    is.read(ck.descriptor.data(), desc_len);
    uint32_t n_params = get_u32(is);
    auto params = ck.model.params();
    if (n_params != params.size())
        throw ConfigError("checkpoint/architecture mismatch: parameter count");
    for (auto& p : params) {
        uint32_t name_len = get_u32(is);
        std::string name(name_len, '\0');
        is.read(name.data(), name_len);
        uint32_t len = get_u32(is);
        if (!is || name != p.name || len != p.len)
            throw ConfigError("checkpoint/architecture mismatch at parameter '" + name + "'");
        is.read(reinterpret_cast<char*>(p.data),
                static_cast<std::streamsize>(p.len * sizeof(float)));
    }
    if (!is) throw ConfigError("truncated checkpoint: " + path);
    return ck;
}

void write_history_csv(const std::string& path, const std::vector<EpochStats>& history) {
    std::ofstream os(path, std::ios::trunc);
    if (!os) throw IoError("cannot open for write: " + path);
    os << "epoch,train_loss,val_acc,val_ap\n";
    char line[128];
    for (const auto& h : history) {
        std::snprintf(line, sizeof(line), "%d,%.6f,%.4f,%.4f\n", h.epoch, h.train_loss, h.val_acc,
                      h.val_ap);
        os << line;
    }
    if (!os) throw IoError("short write: " + path);
}

}  // namespace npr::nn
