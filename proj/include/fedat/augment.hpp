#pragma once

#include <cstddef>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "fedat/data.hpp"
#include "fedat/models.hpp"
#include "fedat/nn.hpp"
#include "fedat/rng.hpp"

namespace fedat {

struct GanConfig {
    std::size_t epochs = 200;
    std::size_t batch = 128;
    double sigma = 1.0;  // stddev of the generator's Gaussian noise input
    double eta = 0.001;  // Adam learning rate for generator and both heads
    std::vector<std::size_t> hidden = {32, 64, 128};
};

/// Everything the local adversarial stage mutates: the generator, the
/// classifier acting as the discriminator's class head, and the one-unit
/// source head reading the classifier's last hidden layer.
struct GanTrainState {
    Model generator;
    Model classifier;
    Model source_head;
    OptimizerState gen_opt;
    OptimizerState cls_opt;
    OptimizerState src_opt;
    std::size_t epoch = 0;
    std::size_t latent_dim = 0;
    std::size_t num_classes = 0;
    double noise_sigma = 1.0;
    // Conditioning labels the generator may be asked for (never class 0).
    std::vector<int> condition_classes;
    // Mean combined loss per completed epoch.
    std::vector<double> d_loss_history;
    std::vector<double> g_loss_history;
};

/// Builds the adversarial stage around an existing classifier. `init_rng`
/// seeds the source head; the generator is passed in so it can persist
/// across communication rounds.
GanTrainState make_gan_state(Model classifier, Model generator, const GanConfig& cfg,
                             std::size_t num_classes, const std::set<int>& condition_classes,
                             Rng& init_rng);

enum class BalanceMode { LocalMax, GlobalUnion };

const char* balance_mode_name(BalanceMode m);
BalanceMode balance_mode_from_name(const std::string& name);

struct AugmentationPlan {
    // class index -> desired post-merge count; class 0 never appears.
    std::map<int, std::size_t> targets;
    // current local count per planned class, so target - current is the
    // number of rows to generate
    std::map<int, std::size_t> current;

    std::size_t total_to_generate() const;
};

/// local_max: raise every locally present insider class to the largest local
/// insider count. global_union: additionally request `global_count` samples
/// of every aux class absent locally. Class 0 is never planned.
AugmentationPlan plan_balancing(const ClientDataset& client, BalanceMode mode,
                                const std::set<int>& aux_labels, std::size_t global_count = 0);

/// Alternating per-batch adversarial updates: a discriminator step on real
/// plus generated samples (class cross-entropy and real/fake binary
/// cross-entropy), then a generator step pushing generated samples toward
/// source=real and their conditioned class. Appends one mean loss per epoch
/// to the state histories.
void train_acgan(const ClientDataset& client, GanTrainState& state, std::size_t epochs,
                 std::size_t batch, Rng& rng);

struct SynthBatch {
    Matrix features;          // rows x feature_dim, in the tanh domain [-1,1]
    std::vector<int> labels;  // equals the conditioning labels
};

/// Runs the frozen generator for `count` samples conditioned on `cls`.
Matrix generate_class(const GanTrainState& state, int cls, std::size_t count, Rng& rng);

/// Runs the frozen generator once per missing sample: target - current rows
/// for each planned class, conditioned on that class.
SynthBatch generate_adversarial(const GanTrainState& state, const AugmentationPlan& plan,
                                Rng& rng);

/// Concatenates real and synthetic rows and permutes them. Synthetic rows
/// are flagged in ClientDataset::synthetic for diagnostics only.
ClientDataset merge_and_shuffle(const ClientDataset& real, const SynthBatch& synth, Rng& rng);

}  // namespace fedat
