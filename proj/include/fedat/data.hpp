#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "fedat/matrix.hpp"
#include "fedat/rng.hpp"

namespace fedat {

/// Per-feature affine map fitted on training data: standardized = (x - center) / scale.
/// Constant columns carry scale 0 and map to 0.
struct FeatureScaling {
    std::vector<double> center;
    std::vector<double> scale;

    bool fitted() const { return !center.empty(); }
};

struct Dataset {
    Matrix features;               // N x d
    std::vector<int> labels;       // class indices, one per row
    std::vector<std::string> class_names;  // index 0 is the non-malicious class
    FeatureScaling scaling;
    bool standardized = false;

    std::size_t n() const { return labels.size(); }
    std::size_t dim() const { return features.cols; }
    std::size_t num_classes() const { return class_names.size(); }
    std::vector<std::size_t> class_counts() const;
};

struct ClientDataset {
    std::size_t client_id = 0;
    Matrix features;
    std::vector<int> labels;            // global class indices
    std::set<int> local_classes;        // classes present locally
    // Per-row diagnostic flag set by merge_and_shuffle; empty means all rows
    // are real. The trainer never reads it.
    std::vector<std::uint8_t> synthetic;

    std::size_t n_samples() const { return labels.size(); }
    std::vector<std::size_t> class_counts(std::size_t num_classes) const;
};

/// Parameters for the synthetic, CERT-shaped dataset: Gaussian blobs with a
/// dominant class 0 and small insider-scenario classes.
struct SynthSpec {
    std::size_t num_classes = 4;
    std::vector<std::size_t> counts;          // samples per class
    std::size_t dim = 16;
    double separation = 3.0;                  // distance of each insider mean from the origin
    std::vector<std::vector<double>> means;   // optional explicit per-class means
    std::vector<double> sigmas;               // optional per-class stddevs (default 1.0)
    std::uint64_t seed = 1;
};

/// Reads `f0,...,f{d-1},label` CSV. Label tokens are mapped to indices in
/// first-appearance order; a token "normal" or "0" is forced to index 0.
Dataset load_csv(const std::string& path);

void save_csv(const Dataset& ds, const std::string& path);

/// Fits a per-feature min-max map into [-1,1] on `train` and applies it to
/// train plus every dataset in `others` (those values are clipped to [-1,1]).
void standardize(Dataset& train, const std::vector<Dataset*>& others);

/// Maps standardized rows back into the original feature domain.
Matrix inverse_scaling(const FeatureScaling& s, Matrix x);

Dataset synthesize_cert_like(const SynthSpec& spec, Rng& rng);

/// Scenario classes (index >= 1) go whole to single clients, round-robin:
/// scenario s lands on client (s-1) mod K unless `assignment` pins it
/// elsewhere. Class-0 samples are shuffled into K near-equal shares.
std::vector<ClientDataset> partition_non_iid(const Dataset& ds, std::size_t k, Rng& rng,
                                             const std::map<int, std::size_t>* assignment = nullptr);

struct SplitResult {
    Dataset train;
    Dataset test;
    std::vector<std::string> warnings;  // e.g. singleton classes kept in train
};

/// Stratified split; per class the test count is round-half-up of
/// count * test_fraction, clamped so both splits see every class of size >= 2.
SplitResult train_test_split(const Dataset& ds, double test_fraction, Rng& rng);

}  // namespace fedat
