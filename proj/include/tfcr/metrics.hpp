#pragma once

// Macro-F1: unweighted mean over ALL classes in the label universe of the
// per-class F1 = 2PR/(P+R). Classes with P+R = 0, or never predicted and
// never gold-positive, contribute 0. This strict averaging changes scores
// on rare classes, which is intended.

#include <stdexcept>
#include <vector>

namespace tfcr {

struct ClassPRF {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

inline std::vector<ClassPRF> per_class_prf(const std::vector<int>& gold,
                                           const std::vector<int>& pred,
                                           int n_classes) {
  if (gold.size() != pred.size() || gold.empty())
    throw std::invalid_argument(
        "per_class_prf: gold and pred must have equal, non-zero length");
  std::vector<std::int64_t> tp(static_cast<std::size_t>(n_classes), 0);
  std::vector<std::int64_t> fp(static_cast<std::size_t>(n_classes), 0);
  std::vector<std::int64_t> fn(static_cast<std::size_t>(n_classes), 0);
  for (std::size_t i = 0; i < gold.size(); ++i) {
    int g = gold[i], p = pred[i];
    if (g < 0 || g >= n_classes || p < 0 || p >= n_classes)
      throw std::out_of_range("per_class_prf: unknown label id");
    if (g == p) {
      ++tp[static_cast<std::size_t>(g)];
    } else {
      ++fn[static_cast<std::size_t>(g)];
      ++fp[static_cast<std::size_t>(p)];
    }
  }
  std::vector<ClassPRF> out(static_cast<std::size_t>(n_classes));
  for (int c = 0; c < n_classes; ++c) {
    auto ci = static_cast<std::size_t>(c);
    double denom_p = static_cast<double>(tp[ci] + fp[ci]);
    double denom_r = static_cast<double>(tp[ci] + fn[ci]);
    double precision = denom_p > 0 ? static_cast<double>(tp[ci]) / denom_p : 0.0;
    double recall = denom_r > 0 ? static_cast<double>(tp[ci]) / denom_r : 0.0;
    double f1 = (precision + recall) > 0
                    ? 2.0 * precision * recall / (precision + recall)
                    : 0.0;
    out[ci] = {precision, recall, f1};
  }
  return out;
}

inline double macro_f1(const std::vector<int>& gold,
                       const std::vector<int>& pred, int n_classes) {
  auto prf = per_class_prf(gold, pred, n_classes);
  double sum = 0.0;
  for (const auto& c : prf) sum += c.f1;
  return sum / static_cast<double>(n_classes);
}

}  // namespace tfcr
