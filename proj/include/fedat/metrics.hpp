#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace fedat {

struct ConfusionMatrix {
    std::size_t num_classes = 0;
    std::vector<std::int64_t> counts;  // row-major, counts[true * num_classes + pred]

    std::int64_t& at(std::size_t truth, std::size_t pred) {
        return counts[truth * num_classes + pred];
    }
    std::int64_t at(std::size_t truth, std::size_t pred) const {
        return counts[truth * num_classes + pred];
    }
    std::int64_t support(std::size_t truth) const;  // row sum
    std::int64_t total() const;
};

ConfusionMatrix confusion(const std::vector<int>& y_true, const std::vector<int>& y_pred,
                          std::size_t num_classes);

struct PrfResult {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
};

/// Per-class scores with the 0/0 := 0 convention: precision is 0 when the
/// class was never predicted, recall is 0 when it never occurred, f1 is 0
/// when precision + recall is 0.
std::vector<PrfResult> per_class_prf(const ConfusionMatrix& cm);

/// Unweighted mean of per-class scores, averaged only over classes that
/// actually occur in y_true (support > 0). Errors on an all-zero matrix.
PrfResult macro_prf(const ConfusionMatrix& cm);

/// Support-weighted mean over occurring classes.
PrfResult weighted_prf(const ConfusionMatrix& cm);

double accuracy(const ConfusionMatrix& cm);

}  // namespace fedat
