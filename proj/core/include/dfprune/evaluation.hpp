#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "dfprune/dataset.hpp"
#include "dfprune/network.hpp"

namespace dfprune {

enum class CraftTarget { original, pruned };

std::string_view to_string(CraftTarget target);

struct AttackConfig {
  double epsilon = 0.05;  // L-infinity budget
  bool clip = true;       // clip adversarial inputs to the model's input bounds
  CraftTarget craft_on = CraftTarget::pruned;
};

/// Softmax cross-entropy of the logits against label y.
double cross_entropy_loss(const Network& net, std::span<const float> x, std::uint32_t y);

/// Reverse-mode gradient of the softmax cross-entropy loss w.r.t. the input.
std::vector<double> loss_gradient_wrt_input(const Network& net, std::span<const float> x, std::uint32_t y);

/// x + epsilon * sign(grad), optionally clipped to the input bounds.
std::vector<float> fgsm(const Network& net, std::span<const float> x, std::uint32_t y, const AttackConfig& cfg);

/// Fraction of samples whose argmax prediction equals the label.
double accuracy(const Network& net, const LabeledDataset& ds, std::size_t threads = 1);

/// Number of samples with argmax g(x_adv) == argmax g(x) == y, where x_adv is
/// crafted against f or g according to cfg.craft_on.
std::size_t robust_count(const Network& f, const Network& g, const LabeledDataset& ds, const AttackConfig& cfg,
                         std::size_t threads = 1);

/// Fraction of samples whose top-k class set is the same under f and g.
double topk_preservation(const Network& f, const Network& g, const LabeledDataset& ds, std::size_t k = 3,
                         std::size_t threads = 1);

struct EvalReport {
  double accuracy_orig = 0.0;
  double accuracy_pruned = 0.0;
  std::size_t robust_count_orig = 0;
  std::size_t robust_count_pruned = 0;
  double robustness_preservation_ratio = 0.0;
  double topk_preservation = -1.0;  // negative when not requested
  std::size_t n_samples = 0;
  double epsilon = 0.0;
  // The pruned model predicts one class for every sample.
  bool degenerate = false;
};

/// topk == 0 skips the top-k measurement.
EvalReport evaluate_pair(const Network& f, const Network& g, const LabeledDataset& ds, const AttackConfig& cfg,
                         std::size_t topk = 0, std::size_t threads = 1);

inline constexpr std::string_view kReportCsvHeader =
    "model,sparsity,epsilon,acc_orig,acc_pruned,robust_orig,robust_pruned,preservation,topk,n";

/// One CSV row (no trailing newline) in kReportCsvHeader column order.
std::string report_csv_row(std::string_view model, double sparsity, const EvalReport& report);

}  // namespace dfprune
