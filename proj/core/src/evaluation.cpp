#include "dfprune/evaluation.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numeric>
#include <string>

#include "dfprune/error.hpp"
#include "dfprune/parallel.hpp"

namespace dfprune {
namespace {

void check_compatible(const Network& net, const LabeledDataset& ds) {
  if (net.input_dim != ds.n_features) {
    throw ShapeError("dataset has " + std::to_string(ds.n_features) + " features, model expects " +
                     std::to_string(net.input_dim));
  }
  if (net.output_dim() < ds.n_classes) throw ShapeError("model has fewer outputs than the dataset has classes");
}

void check_pair(const Network& f, const Network& g) {
  if (f.input_dim != g.input_dim || f.output_dim() != g.output_dim()) {
    throw ShapeError("original and pruned models have different input/output dimensions");
  }
}

double activation_derivative(ActivationKind kind, double pre) {
  switch (kind) {
    case ActivationKind::relu:
      return pre > 0.0 ? 1.0 : 0.0;
    case ActivationKind::sigmoid: {
      const double s = 1.0 / (1.0 + std::exp(-pre));
      return s * (1.0 - s);
    }
    case ActivationKind::identity:
      return 1.0;
  }
  return 1.0;
}

std::vector<double> softmax(const std::vector<double>& logits) {
  const double top = *std::max_element(logits.begin(), logits.end());
  std::vector<double> p(logits.size());
  double sum = 0.0;
  for (std::size_t k = 0; k < logits.size(); ++k) sum += p[k] = std::exp(logits[k] - top);
  for (auto& v : p) v /= sum;
  return p;
}

std::vector<std::size_t> top_k_set(std::span<const float> logits, std::size_t k) {
  std::vector<std::size_t> order(logits.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return logits[a] > logits[b]; });
  order.resize(k);
  std::sort(order.begin(), order.end());
  return order;
}

void append_number(std::string& out, double v) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  out.append(buf, res.ptr);
}

}  // namespace

std::string_view to_string(CraftTarget target) {
  return target == CraftTarget::original ? "original" : "pruned";
}

double cross_entropy_loss(const Network& net, std::span<const float> x, std::uint32_t y) {
  const auto trace = forward_trace(net, x);
  const auto& logits = trace.post.back();
  if (y >= logits.size()) throw ShapeError("label out of range for the model's outputs");
  const double top = *std::max_element(logits.begin(), logits.end());
  double sum = 0.0;
  for (double o : logits) sum += std::exp(o - top);
  return top + std::log(sum) - logits[y];
}

std::vector<double> loss_gradient_wrt_input(const Network& net, std::span<const float> x, std::uint32_t y) {
  const auto trace = forward_trace(net, x);
  const std::size_t last = net.layers.size() - 1;
  if (y >= net.output_dim()) throw ShapeError("label out of range for the model's outputs");

  // dL/d(output values)
  std::vector<double> grad = softmax(trace.post[last]);
  grad[y] -= 1.0;

  for (std::size_t l = net.layers.size(); l-- > 0;) {
    const auto& layer = net.layers[l];
    std::vector<double> grad_pre(layer.fan_out);
    for (std::size_t j = 0; j < layer.fan_out; ++j) {
      grad_pre[j] = layer.alive[j] ? grad[j] * activation_derivative(layer.activation, trace.pre[l][j]) : 0.0;
    }
    std::vector<double> grad_in(layer.fan_in, 0.0);
    for (std::size_t i = 0; i < layer.fan_in; ++i) {
      const float* row = &layer.weights[i * layer.fan_out];
      double acc = 0.0;
      for (std::size_t j = 0; j < layer.fan_out; ++j) acc += static_cast<double>(row[j]) * grad_pre[j];
      grad_in[i] = acc;
    }
    grad = std::move(grad_in);
  }
  for (double g : grad) {
    if (!std::isfinite(g)) throw NumericError("non-finite input gradient");
  }
  return grad;
}

std::vector<float> fgsm(const Network& net, std::span<const float> x, std::uint32_t y, const AttackConfig& cfg) {
  if (!(cfg.epsilon >= 0.0)) throw Error("epsilon must be non-negative");
  std::vector<float> adv(x.begin(), x.end());
  if (cfg.epsilon == 0.0) return adv;
  const auto grad = loss_gradient_wrt_input(net, x, y);
  for (std::size_t i = 0; i < adv.size(); ++i) {
    const double s = grad[i] > 0.0 ? 1.0 : (grad[i] < 0.0 ? -1.0 : 0.0);
    double v = static_cast<double>(x[i]) + cfg.epsilon * s;
    if (cfg.clip) v = std::clamp(v, static_cast<double>(net.input_lower[i]), static_cast<double>(net.input_upper[i]));
    adv[i] = static_cast<float>(v);
  }
  return adv;
}

double accuracy(const Network& net, const LabeledDataset& ds, std::size_t threads) {
  check_compatible(net, ds);
  if (ds.n_samples == 0) return 0.0;
  std::vector<char> correct(ds.n_samples, 0);
  parallel_for(ds.n_samples, threads, [&](std::size_t i) {
    correct[i] = argmax(forward(net, ds.sample(i))) == ds.labels[i];
  });
  const auto hits = std::count(correct.begin(), correct.end(), 1);
  return static_cast<double>(hits) / static_cast<double>(ds.n_samples);
}

std::size_t robust_count(const Network& f, const Network& g, const LabeledDataset& ds, const AttackConfig& cfg,
                         std::size_t threads) {
  check_pair(f, g);
  check_compatible(g, ds);
  const Network& crafter = cfg.craft_on == CraftTarget::original ? f : g;
  std::vector<char> robust(ds.n_samples, 0);
  parallel_for(ds.n_samples, threads, [&](std::size_t i) {
    const auto x = ds.sample(i);
    const std::uint32_t y = ds.labels[i];
    if (argmax(forward(g, x)) != y) return;
    const auto adv = fgsm(crafter, x, y, cfg);
    robust[i] = argmax(forward(g, adv)) == y;
  });
  return static_cast<std::size_t>(std::count(robust.begin(), robust.end(), 1));
}

double topk_preservation(const Network& f, const Network& g, const LabeledDataset& ds, std::size_t k,
                         std::size_t threads) {
  check_pair(f, g);
  check_compatible(f, ds);
  if (k == 0 || k > f.output_dim()) throw Error("top-k: k must lie in [1, number of classes]");
  if (ds.n_samples == 0) return 0.0;
  std::vector<char> same(ds.n_samples, 0);
  parallel_for(ds.n_samples, threads, [&](std::size_t i) {
    same[i] = top_k_set(forward(f, ds.sample(i)), k) == top_k_set(forward(g, ds.sample(i)), k);
  });
  return static_cast<double>(std::count(same.begin(), same.end(), 1)) / static_cast<double>(ds.n_samples);
}

EvalReport evaluate_pair(const Network& f, const Network& g, const LabeledDataset& ds, const AttackConfig& cfg,
                         std::size_t topk, std::size_t threads) {
  check_pair(f, g);
  EvalReport r;
  r.n_samples = ds.n_samples;
  r.epsilon = cfg.epsilon;
  r.accuracy_orig = accuracy(f, ds, threads);
  r.accuracy_pruned = accuracy(g, ds, threads);
  AttackConfig on_original = cfg;
  on_original.craft_on = CraftTarget::original;
  r.robust_count_orig = robust_count(f, f, ds, on_original, threads);
  r.robust_count_pruned = robust_count(f, g, ds, cfg, threads);
  r.robustness_preservation_ratio =
      static_cast<double>(r.robust_count_pruned) / static_cast<double>(std::max<std::size_t>(r.robust_count_orig, 1));
  if (topk > 0) r.topk_preservation = topk_preservation(f, g, ds, topk, threads);

  if (ds.n_samples > 1) {
    const std::size_t first = argmax(forward(g, ds.sample(0)));
    r.degenerate = true;
    for (std::size_t i = 1; i < ds.n_samples && r.degenerate; ++i) {
      r.degenerate = argmax(forward(g, ds.sample(i))) == first;
    }
  }
  return r;
}

std::string report_csv_row(std::string_view model, double sparsity, const EvalReport& report) {
  std::string out(model);
  out += ',';
  append_number(out, sparsity);
  out += ',';
  append_number(out, report.epsilon);
  out += ',';
  append_number(out, report.accuracy_orig);
  out += ',';
  append_number(out, report.accuracy_pruned);
  out += ',' + std::to_string(report.robust_count_orig) + ',' + std::to_string(report.robust_count_pruned) + ',';
  append_number(out, report.robustness_preservation_ratio);
  out += ',';
  if (report.topk_preservation >= 0.0) append_number(out, report.topk_preservation);
  out += ',' + std::to_string(report.n_samples);
  return out;
}

}  // namespace dfprune
