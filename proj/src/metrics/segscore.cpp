#include "e5sh/metrics/segscore.hpp"

#include <stdexcept>

namespace e5sh::metrics {

void PixelConfusion::accumulate(const PixelConfusion& other) {
    for (size_t c = 0; c < kNumClasses; ++c) {
        per_class[c].tp += other.per_class[c].tp;
        per_class[c].fp += other.per_class[c].fp;
        per_class[c].fn += other.per_class[c].fn;
    }
    total_pixels += other.total_pixels;
}

namespace {

PixelConfusion confusion_counts(const std::vector<ClassId>& pred, const std::vector<ClassId>& gt) {
    PixelConfusion out;
    out.total_pixels = gt.size();
    for (size_t i = 0; i < gt.size(); ++i) {
        size_t p = static_cast<size_t>(pred[i]);
        size_t g = static_cast<size_t>(gt[i]);
        if (p == g) {
            ++out.per_class[p].tp;
        } else {
            ++out.per_class[p].fp;
            ++out.per_class[g].fn;
        }
    }
    return out;
}

}  // namespace

PixelConfusion confusion(const LabeledMask& pred, const LabeledMask& gt) {
    if (pred.width != gt.width || pred.height != gt.height)
        throw std::invalid_argument("confusion: mask dimensions differ");
    pred.validate();
    gt.validate();
    return confusion_counts(pred.classes, gt.classes);
}

PrfScore prf(const ClassCounts& c) {
    PrfScore s;
    uint64_t predicted = c.tp + c.fp;
    uint64_t actual = c.tp + c.fn;
    if (predicted == 0 || actual == 0) s.degenerate = true;
    s.precision = predicted ? static_cast<double>(c.tp) / static_cast<double>(predicted) : 0.0;
    s.recall = actual ? static_cast<double>(c.tp) / static_cast<double>(actual) : 0.0;
    s.f1 = (s.precision + s.recall) > 0.0
               ? 2.0 * s.precision * s.recall / (s.precision + s.recall)
               : 0.0;
    return s;
}

std::array<PrfScore, kNumClasses> scores(const PixelConfusion& conf) {
    std::array<PrfScore, kNumClasses> out;
    for (size_t c = 0; c < kNumClasses; ++c) out[c] = prf(conf.per_class[c]);
    return out;
}

std::vector<double> default_thresholds() {
    std::vector<double> out;
    for (int i = 0; i < 10; ++i) out.push_back(0.50 + 0.05 * i);
    return out;
}

std::array<ApArScore, kNumClasses> ap_ar(const LabeledMask& pred, const LabeledMask& gt,
                                         const std::vector<double>& thresholds) {
    if (thresholds.empty()) throw std::invalid_argument("ap_ar: no thresholds");
    if (pred.width != gt.width || pred.height != gt.height)
        throw std::invalid_argument("ap_ar: mask dimensions differ");
    pred.validate();
    gt.validate();

    std::array<ApArScore, kNumClasses> out{};
    std::vector<ClassId> thresholded(pred.classes.size());
    for (double tau : thresholds) {
        for (size_t i = 0; i < pred.classes.size(); ++i) {
            double conf = pred.confidence[i] / 255.0;
            thresholded[i] = conf < tau ? ClassId::Background : pred.classes[i];
        }
        PixelConfusion c = confusion_counts(thresholded, gt.classes);
        for (size_t k = 0; k < kNumClasses; ++k) {
            PrfScore s = prf(c.per_class[k]);
            out[k].ap += s.precision;
            out[k].ar += s.recall;
        }
    }
    for (auto& s : out) {
        s.ap /= static_cast<double>(thresholds.size());
        s.ar /= static_cast<double>(thresholds.size());
    }
    return out;
}

}  // namespace e5sh::metrics
