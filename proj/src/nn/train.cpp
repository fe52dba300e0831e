#include "rising/nn/train.hpp"

#include <cstdio>

#include "rising/random.hpp"

namespace rising::nn {

std::string TrainingLog::to_csv() const {
  std::string out = "epoch,mean_loss,lr\n";
  char line[96];
  for (const auto& e : epochs) {
    std::snprintf(line, sizeof line, "%d,%.17g,%.17g\n", e.epoch, e.mean_loss, e.lr);
    out += line;
  }
  return out;
}

namespace {

Tensor4<float> stack(const std::vector<Sample>& samples, const std::vector<std::size_t>& order, bool targets) {
  if (order.empty()) throw Error("stack: empty batch");
  const auto& first = targets ? samples[order[0]].target : samples[order[0]].input;
  Tensor4<float> t(static_cast<int>(order.size()), 1, static_cast<int>(first.rows()), static_cast<int>(first.cols()));
  for (std::size_t n = 0; n < order.size(); ++n) {
    const auto& m = targets ? samples[order[n]].target : samples[order[n]].input;
    if (m.rows() != first.rows() || m.cols() != first.cols()) throw Error("stack: samples differ in size");
    t.plane(static_cast<int>(n), 0) = m;
  }
  return t;
}

void check_samples(const std::vector<Sample>& samples) {
  if (samples.empty()) throw Error("train: empty dataset");
  const auto rows = samples[0].input.rows(), cols = samples[0].input.cols();
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const auto& s = samples[i];
    if (s.input.rows() != rows || s.input.cols() != cols || s.target.rows() != rows || s.target.cols() != cols)
      throw Error("train: sample " + std::to_string(i) + " has inconsistent dimensions");
    if (!s.input.allFinite() || !s.target.allFinite())
      throw Error("train: sample " + std::to_string(i) + " has non-finite values");
  }
}

std::vector<std::size_t> slice(const std::vector<std::size_t>& v, std::size_t from, std::size_t to) {
  return {v.begin() + static_cast<std::ptrdiff_t>(from), v.begin() + static_cast<std::ptrdiff_t>(to)};
}

}  // namespace

Tensor4<float> stack_inputs(const std::vector<Sample>& samples, const std::vector<std::size_t>& order) {
  return stack(samples, order, false);
}

Tensor4<float> stack_targets(const std::vector<Sample>& samples, const std::vector<std::size_t>& order) {
  return stack(samples, order, true);
}

double dataset_loss(const ResUNet<float>& net, const std::vector<Sample>& samples, int batch_size) {
  std::vector<std::size_t> all(samples.size());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
  double total = 0.0;
  for (std::size_t from = 0; from < all.size(); from += static_cast<std::size_t>(batch_size)) {
    const auto idx = slice(all, from, std::min(all.size(), from + static_cast<std::size_t>(batch_size)));
    const auto y = net.infer(stack_inputs(samples, idx));
    total += mse_forward(y, stack_targets(samples, idx)) * static_cast<double>(idx.size());
  }
  return total / static_cast<double>(samples.size());
}

TrainResult train(const std::vector<Sample>& samples, const NetworkSpec& spec, const TrainConfig& cfg,
                  std::uint64_t init_seed, const TrainResume* resume, const EpochCallback& on_epoch) {
  cfg.validate();
  check_samples(samples);
  const auto n = samples.size();
  const auto bs = static_cast<std::size_t>(cfg.batch_size);
  const long steps_per_epoch = static_cast<long>((n + bs - 1) / bs);
  const long total_steps = steps_per_epoch * cfg.epochs;

  TrainResult result;
  if (resume) {
    if (!(resume->params.spec == spec)) throw Error("train: resume checkpoint has a different network spec");
    result.params = resume->params;
    result.adam = resume->adam;
    result.log = resume->log;
    result.epochs_done = resume->epochs_done;
  } else {
    result.params = NetworkParams<float>::initialize(spec, init_seed);
    result.adam = AdamState<float>::zeros_like(result.params);
  }

  ResUNet<float> net(std::move(result.params));
  if (result.log.epochs.empty()) {
    result.log.epochs.push_back({0, dataset_loss(net, samples, cfg.batch_size), learning_rate(cfg, 0, total_steps)});
  }

  NetworkParams<float> grads = net.params().zeros_like();
  for (int epoch = result.epochs_done + 1; epoch <= cfg.epochs; ++epoch) {
    RandomStream rng{cfg.shuffle_seed, static_cast<std::uint64_t>(epoch)};
    const auto order = rng.permutation(n);
    double loss_sum = 0.0;
    double lr = 0.0;
    for (std::size_t from = 0; from < n; from += bs) {
      const auto idx = slice(order, from, std::min(n, from + bs));
      const auto x = stack_inputs(samples, idx);
      const auto t = stack_targets(samples, idx);
      const auto y = net.forward(x);
      loss_sum += mse_forward(y, t) * static_cast<double>(idx.size());
      grads.set_zero();
      net.backward(mse_backward(y, t), grads);
      const long step = result.adam.step + 1;
      lr = learning_rate(cfg, step, total_steps);
      adam_step(net.params(), grads, result.adam, step, lr, cfg);
    }
    result.epochs_done = epoch;
    result.log.epochs.push_back({epoch, loss_sum / static_cast<double>(n), lr});
    if (on_epoch) {
      result.params = net.params();
      on_epoch(result.log.epochs.back(), result);
    }
  }
  result.params = std::move(net.params());
  return result;
}

}  // namespace rising::nn
