#pragma once

#include <limits>
#include <string>

#include "vloc/nn/losses.hpp"
#include "vloc/nn/network.hpp"
#include "vloc/nn/optimizer.hpp"
#include "vloc/nn/schedule.hpp"

namespace vloc::nn {

// Flat in-memory training set: n images of rows x cols plus per-sample label
// vectors.
struct SampleSet {
    int n = 0, rows = 0, cols = 0, label_dim = 0;
    std::vector<float> images;  // n * rows * cols
    std::vector<float> labels;  // n * label_dim

    const float* image(int i) const { return images.data() + static_cast<size_t>(i) * rows * cols; }
    const float* label(int i) const { return labels.data() + static_cast<size_t>(i) * label_dim; }
};

struct TrainConfig {
    int batch = 16;
    int max_epochs = 25;
    int patience = 5;       // epochs past the validation minimum
    uint64_t seed = 7;
    int threads = 1;        // 1 = bit-reproducible mode
    double lr_min = 1e-4, lr_max = 1e-3;
    int cycle_epochs = 2;
    long cycle_iters = 0;   // 0: cycle_epochs per cycle
};

struct EpochStats {
    int epoch = 0;
    double train_loss = 0, val_loss = 0, lr_last = 0;
};

struct TrainResult {
    std::vector<EpochStats> history;
    int best_epoch = -1;         // 1-based
    double best_val = 0;
    int stopped_epoch = 0;
    ParamBank<float> best_params;
};

// Stops once the validation loss has spent `patience` consecutive epochs
// above its running minimum; the checkpoint belongs to the minimum epoch.
class EarlyStopper {
  public:
    explicit EarlyStopper(int patience) : patience_(patience) {}
    // returns true when training should stop after this epoch
    bool observe(double val_loss) {
        ++epoch_;
        if (val_loss < best_val_) {
            best_val_ = val_loss;
            best_epoch_ = epoch_;
        }
        return epoch_ - best_epoch_ >= patience_;
    }
    int best_epoch() const { return best_epoch_; }
    double best_val() const { return best_val_; }

  private:
    int patience_;
    int epoch_ = 0, best_epoch_ = 0;
    double best_val_ = std::numeric_limits<double>::infinity();
};

// Minibatch Adam under a cyclical learning rate with early stopping; the
// returned parameters are the ones at the validation-loss minimum. Throws
// "training-diverged" (with epoch/iteration context) on NaN loss.
TrainResult train(Network<float>& net, LossKind kind, const SampleSet& train_set,
                  const SampleSet& val_set, const TrainConfig& cfg);

double evaluate_loss(const Network<float>& net, LossKind kind, const SampleSet& set, int batch,
                     int threads);

// Eval-mode forward over an image buffer (n images); out is (n, outputs).
void predict_batch(const Network<float>& net, const float* images, int n, int batch,
                   Tensor4<float>& out, int threads = 1);

// Checkpoint: JSON manifest + float32 parameter blob.
void save_checkpoint(const Network<float>& net, const std::string& basename, int epoch,
                     double val_loss, uint64_t seed);
Network<float> load_checkpoint(const std::string& basename);

void write_history_csv(const std::vector<EpochStats>& history, const std::string& path);

}  // namespace vloc::nn
