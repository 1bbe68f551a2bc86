#include "fedat/metrics.hpp"

#include <numeric>
#include <stdexcept>
#include <string>

#include "fedat/errors.hpp"

namespace fedat {

std::int64_t ConfusionMatrix::support(std::size_t truth) const {
    std::int64_t n = 0;
    for (std::size_t j = 0; j < num_classes; ++j) n += at(truth, j);
    return n;
}

std::int64_t ConfusionMatrix::total() const {
    return std::accumulate(counts.begin(), counts.end(), std::int64_t{0});
}

ConfusionMatrix confusion(const std::vector<int>& y_true, const std::vector<int>& y_pred,
                          std::size_t num_classes) {
    if (y_true.size() != y_pred.size()) {
        throw DimensionError("confusion: y_true and y_pred differ in length");
    }
    if (num_classes == 0) throw DimensionError("confusion: num_classes must be >= 1");
    ConfusionMatrix cm;
    cm.num_classes = num_classes;
    cm.counts.assign(num_classes * num_classes, 0);
    for (std::size_t i = 0; i < y_true.size(); ++i) {
        const int t = y_true[i];
        const int p = y_pred[i];
        if (t < 0 || static_cast<std::size_t>(t) >= num_classes || p < 0 ||
            static_cast<std::size_t>(p) >= num_classes) {
            throw std::invalid_argument("confusion: label out of range at index " +
                                        std::to_string(i));
        }
        ++cm.at(static_cast<std::size_t>(t), static_cast<std::size_t>(p));
    }
    return cm;
}

std::vector<PrfResult> per_class_prf(const ConfusionMatrix& cm) {
    std::vector<PrfResult> out(cm.num_classes);
    for (std::size_t c = 0; c < cm.num_classes; ++c) {
        const double tp = static_cast<double>(cm.at(c, c));
        double pred = 0.0, truth = 0.0;
        for (std::size_t k = 0; k < cm.num_classes; ++k) {
            pred += static_cast<double>(cm.at(k, c));
            truth += static_cast<double>(cm.at(c, k));
        }
        PrfResult& r = out[c];
        r.precision = pred > 0.0 ? tp / pred : 0.0;
        r.recall = truth > 0.0 ? tp / truth : 0.0;
        r.f1 = (r.precision + r.recall) > 0.0
                   ? 2.0 * r.precision * r.recall / (r.precision + r.recall)
                   : 0.0;
    }
    return out;
}

namespace {

PrfResult averaged_prf(const ConfusionMatrix& cm, bool weighted) {
    if (cm.total() == 0) throw std::invalid_argument("prf: confusion matrix is empty");
    const std::vector<PrfResult> per = per_class_prf(cm);
    PrfResult sum;
    double norm = 0.0;
    for (std::size_t c = 0; c < cm.num_classes; ++c) {
        const double support = static_cast<double>(cm.support(c));
        if (support == 0.0) continue;  // class absent from y_true
        const double w = weighted ? support : 1.0;
        sum.precision += w * per[c].precision;
        sum.recall += w * per[c].recall;
        sum.f1 += w * per[c].f1;
        norm += w;
    }
    sum.precision /= norm;
    sum.recall /= norm;
    sum.f1 /= norm;
    return sum;
}

}  // namespace

PrfResult macro_prf(const ConfusionMatrix& cm) { return averaged_prf(cm, false); }

PrfResult weighted_prf(const ConfusionMatrix& cm) { return averaged_prf(cm, true); }

double accuracy(const ConfusionMatrix& cm) {
    const std::int64_t total = cm.total();
    if (total == 0) throw std::invalid_argument("accuracy: confusion matrix is empty");
    std::int64_t hit = 0;
    for (std::size_t c = 0; c < cm.num_classes; ++c) hit += cm.at(c, c);
    return static_cast<double>(hit) / static_cast<double>(total);
}

}  // namespace fedat
