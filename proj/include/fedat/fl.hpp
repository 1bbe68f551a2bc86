#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "fedat/augment.hpp"
#include "fedat/data.hpp"
#include "fedat/models.hpp"
#include "fedat/nn.hpp"

namespace fedat {

enum class Aggregator { FedAvg, FedProx };
enum class Mode { Centralized, ClassicalFL, FedAT };

const char* aggregator_name(Aggregator a);
Aggregator aggregator_from_name(const std::string& name);
const char* mode_name(Mode m);
Mode mode_from_name(const std::string& name);

struct FedConfig {
    std::size_t clients = 3;  // K
    std::size_t rounds = 60;  // T communication rounds
    std::size_t batch = 128;  // B local batch size
    std::size_t epochs = 1;   // E local epochs per round
    double eta = 0.001;
    double mu = 0.01;  // proximal coefficient, read only under FedProx
    Aggregator aggregator = Aggregator::FedAvg;
    Mode mode = Mode::FedAT;
    std::uint64_t seed = 1;

    void validate() const;
};

struct RoundReport {
    std::size_t round = 0;  // 1-based
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    double mean_train_loss = 0.0;
    double duration_ms = 0.0;
};

// One diagnostic row per (client, round, class): how much was real, how much
// the generator added.
struct AugmentationRecord {
    std::size_t client_id = 0;
    std::size_t round = 0;
    int cls = 0;
    std::size_t real_count = 0;
    std::size_t synth_count = 0;
};

struct WeightedUpdate {
    std::size_t client_id = 0;
    std::size_t n_samples = 0;  // N_k
    ModelWeights weights;
};

/// Sample-weighted average of client weights in ascending client-id order.
/// Computed as w_ref + sum_k (N_k/N) * (w_k - w_ref), so aggregating
/// identical updates returns them bit-exactly.
ModelWeights fedavg_aggregate(std::vector<WeightedUpdate> updates);

/// base + (mu/2) * ||local - global||^2 over every parameter.
double fedprox_local_loss(double base, const ModelWeights& local, const ModelWeights& global,
                          double mu);

struct ClientState {
    std::size_t client_id = 0;
    ClientDataset data;
    Model classifier;  // always shape-identical to the global model
    // Generator persists across rounds; the adversarial heads are rebuilt
    // around the freshly received global weights each round.
    Model generator;
    bool has_generator = false;
    std::size_t gan_invocations = 0;
};

struct ServerState {
    Model global;
    std::set<int> aux_labels;  // union of client label sets; never shrinks
    std::size_t round = 0;     // completed rounds
    const Dataset* test = nullptr;
};

struct AugmentSettings {
    GanConfig gan;
    BalanceMode target = BalanceMode::LocalMax;
    std::size_t global_count = 0;  // for classes known only via aux_labels
};

struct ClientRoundResult {
    bool ok = false;
    std::string failure;  // set when !ok
    std::size_t client_id = 0;
    std::size_t n_samples = 0;
    ModelWeights weights;
    std::set<int> local_classes;
    double mean_train_loss = 0.0;
    std::vector<AugmentationRecord> augmentation;
};

/// One client's round: optionally the adversarial stage (train the GAN
/// against the received weights, generate minority samples, merge), then E
/// epochs of mini-batch SGD with optional proximal gradient correction.
/// Divergence or empty data comes back as ok=false, never as an exception.
ClientRoundResult client_update(ClientState& state, const ModelWeights& w_global,
                                const std::set<int>& aux_labels, const FedConfig& cfg,
                                const AugmentSettings& augment, std::size_t num_classes,
                                std::size_t round);

/// Broadcast, collect, aggregate over responders (weights renormalized if
/// some clients failed), union the label sets, evaluate on the held-out test
/// set. Throws when every client failed. Metrics are macro-averaged unless
/// `weighted_metrics` asks for support weighting.
RoundReport server_round(ServerState& server, std::vector<ClientState>& clients,
                         const FedConfig& cfg, const AugmentSettings& augment,
                         std::vector<AugmentationRecord>& augmentation_log,
                         std::vector<std::string>& warnings, bool weighted_metrics = false);

struct RunSettings {
    FedConfig fed;
    ModelKind model_kind = ModelKind::SnnMlp;
    std::vector<std::size_t> hidden = {64, 32};
    double dropout_rate = 0.2;
    AugmentSettings augment;
    bool weighted_metrics = false;
    // Optional scenario-class -> client pinning for the partition.
    std::map<int, std::size_t> assignment;
    // Called after every completed round (incremental logging).
    std::function<void(const RoundReport&)> on_round;
};

struct FederationRun {
    std::vector<RoundReport> reports;  // one per round
    std::vector<AugmentationRecord> augmentation;
    Model final_model;
    std::size_t gan_invocations = 0;
    std::vector<std::string> warnings;
};

/// The full loop: partition train data across K clients (Centralized mode
/// pools it into a single client instead), build the global classifier over
/// the full class set, run T rounds, score each round on `test`.
FederationRun run_federation(const Dataset& train, const Dataset& test, const RunSettings& s);

}  // namespace fedat
