/**
 * Copyright 2026 The PoisonBench Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */
#include "poisonbench/nn.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstring>
#include <numeric>
#include <random>

#include "nn_detail.hpp"
#include "poisonbench/errors.hpp"
#include "poisonbench/kernels.hpp"
#include "poisonbench/rng.hpp"

namespace poisonbench::nn {

void ArchSpec::validate() const {
  if (class_count < 2) throw ConfigError("arch.class_count", "must be >= 2");
  if (input_width <= 0) throw ConfigError("arch.input_width", "must be positive");
  if (input_height <= 0) throw ConfigError("arch.input_height", "must be positive");
  if (hidden_units < 0) throw ConfigError("arch.hidden_units", "must not be negative");
  int h = input_height;
  int w = input_width;
  for (std::size_t b = 0; b < conv_blocks.size(); ++b) {
    const auto& blk = conv_blocks[b];
    const std::string field = "arch.conv_blocks[" + std::to_string(b) + "]";
    if (blk.filters <= 0) throw ConfigError(field + ".filters", "must be positive");
    if (blk.kernel <= 0 || blk.kernel % 2 == 0)
      throw ConfigError(field + ".kernel", "must be a positive odd number");
    if (blk.kernel > std::min(h, w))
      throw ConfigError(field + ".kernel", "exceeds the block input size");
    if (h < 2 || w < 2) throw ConfigError(field, "input too small for 2x2 pooling");
    h /= 2;
    w /= 2;
  }
}

int ArchSpec::flat_features() const {
  int h = input_height;
  int w = input_width;
  int c = 1;
  for (const auto& blk : conv_blocks) {
    h /= 2;
    w /= 2;
    c = blk.filters;
  }
  return h * w * c;
}

std::size_t Model::parameter_count() const noexcept {
  std::size_t n = 0;
  for (const auto& p : params) n += p.size();
  return n;
}

bool bit_identical(const ParamSet& a, const ParamSet& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i].shape != b[i].shape || a[i].values.size() != b[i].values.size()) return false;
    if (std::memcmp(a[i].values.data(), b[i].values.data(), a[i].values.size() * sizeof(double)) != 0)
      return false;
  }
  return true;
}

namespace {

int product(const std::vector<int>& shape) {
  return std::accumulate(shape.begin(), shape.end(), 1, std::multiplies<>());
}

ParamSet layout(const ArchSpec& arch) {
  ParamSet ps;
  auto add = [&ps](std::string name, std::vector<int> shape) {
    const auto n = static_cast<std::size_t>(product(shape));
    ps.push_back(ParamTensor{std::move(name), std::move(shape), std::vector<double>(n, 0.0)});
  };
  int channels = 1;
  for (std::size_t b = 0; b < arch.conv_blocks.size(); ++b) {
    const auto& blk = arch.conv_blocks[b];
    const std::string prefix = "conv" + std::to_string(b);
    add(prefix + ".weight", {blk.filters, channels, blk.kernel, blk.kernel});
    add(prefix + ".bias", {blk.filters});
    channels = blk.filters;
  }
  int features = arch.flat_features();
  if (arch.hidden_units > 0) {
    add("hidden.weight", {arch.hidden_units, features});
    add("hidden.bias", {arch.hidden_units});
    features = arch.hidden_units;
  }
  add("out.weight", {arch.class_count, features});
  add("out.bias", {arch.class_count});
  return ps;
}

}  // namespace

Model zero_model(const ArchSpec& arch, std::uint64_t seed) {
  arch.validate();
  return Model{arch, layout(arch), seed};
}

Model init_model(const ArchSpec& arch, std::uint64_t seed) {
  Model m = zero_model(arch, seed);
  Rng rng = make_rng({seed, 0x1417});
  for (auto& p : m.params) {
    if (p.shape.size() < 2) continue;  // biases stay zero
    const int fan_in = product(p.shape) / p.shape[0];
    const double limit = std::sqrt(6.0 / fan_in);
    std::uniform_real_distribution<double> dist(-limit, limit);
    for (double& v : p.values) v = dist(rng);
  }
  return m;
}

ParamSet zeros_like(const ParamSet& params) {
  ParamSet out = params;
  detail::fill_zero(out);
  return out;
}

std::vector<double> softmax(std::span<const double> logits) {
  std::vector<double> out(logits.size());
  if (logits.empty()) return out;
  const double shift = *std::max_element(logits.begin(), logits.end());
  double sum = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    out[i] = std::exp(logits[i] - shift);
    sum += out[i];
  }
  for (double& v : out) v /= sum;
  return out;
}

std::vector<double> forward_probs(const Model& model, std::span<const float> pixels) {
  detail::check_pixels(model.arch, pixels);
  detail::Workspace ws(model.arch);
  detail::forward(model, pixels, ws);
  return ws.probs;
}

double batch_loss(const Model& model, std::span<const data::Instance> batch) {
  const auto r = kernels::refs(batch);
  return kernels::omp::batch_loss(model, r);
}

ParamSet backward(const Model& model, std::span<const data::Instance> batch) {
  const auto r = kernels::refs(batch);
  return kernels::omp::loss_and_gradient(model, r).grads;
}

Model sgd_step(const Model& model, const ParamSet& grads, double lr) {
  if (grads.size() != model.params.size()) throw ShapeError("gradient set does not match model layout");
  Model out = model;
  for (std::size_t i = 0; i < grads.size(); ++i) {
    auto& p = out.params[i];
    if (grads[i].shape != p.shape || grads[i].values.size() != p.values.size())
      throw ShapeError("gradient tensor " + p.name + " has the wrong shape");
    for (std::size_t j = 0; j < p.values.size(); ++j) p.values[j] -= lr * grads[i].values[j];
  }
  return out;
}

std::pair<Model, EpochRecord> train_epoch(Model model, const data::Dataset& train, double lr,
                                          int batch_size, std::uint64_t epoch_seed) {
  if (train.empty()) throw UsageError("train_epoch: empty dataset");
  if (batch_size < 1) throw UsageError("train_epoch: batch_size must be >= 1");
  const auto start = std::chrono::steady_clock::now();

  std::vector<const data::Instance*> order = kernels::refs(train.instances);
  Rng rng = make_rng({model.seed, epoch_seed});
  std::shuffle(order.begin(), order.end(), rng);

  double loss_sum = 0.0;
  std::size_t batches = 0;
  for (std::size_t begin = 0; begin < order.size(); begin += static_cast<std::size_t>(batch_size)) {
    const std::size_t end = std::min(order.size(), begin + static_cast<std::size_t>(batch_size));
    const kernels::InstanceRefs batch(order.data() + begin, end - begin);
    auto lg = kernels::omp::loss_and_gradient(model, batch);
    loss_sum += lg.loss;
    ++batches;
    for (std::size_t i = 0; i < model.params.size(); ++i) {
      auto& p = model.params[i].values;
      const auto& g = lg.grads[i].values;
      for (std::size_t j = 0; j < p.size(); ++j) p[j] -= lr * g[j];
    }
  }

  EpochRecord rec;
  rec.epoch_index = static_cast<int>(epoch_seed);
  rec.mean_loss = loss_sum / static_cast<double>(batches);
  rec.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return {std::move(model), rec};
}

Prediction predict(const Model& model, std::span<const float> pixels) {
  const auto probs = forward_probs(model, pixels);
  const auto it = std::max_element(probs.begin(), probs.end());  // first maximum
  return Prediction{static_cast<int>(it - probs.begin()), *it};
}

namespace detail {

Workspace::Workspace(const ArchSpec& arch) {
  int c = 1;
  int h = arch.input_height;
  int w = arch.input_width;
  for (const auto& blk : arch.conv_blocks) {
    ConvGeometry g{c, h, w, blk.filters, blk.kernel, h / 2, w / 2};
    conv.push_back(g);
    block_in.emplace_back(static_cast<std::size_t>(c) * h * w);
    pre.emplace_back(static_cast<std::size_t>(g.filters) * h * w);
    pooled.emplace_back(static_cast<std::size_t>(g.filters) * g.out_h * g.out_w);
    pool_src.emplace_back(pooled.back().size());
    d_pre.emplace_back(pre.back().size());
    d_block_in.emplace_back(block_in.back().size());
    c = blk.filters;
    h = g.out_h;
    w = g.out_w;
  }
  flat = c * h * w;
  if (conv.empty()) block_in.emplace_back(static_cast<std::size_t>(flat));
  hidden = arch.hidden_units;
  classes = arch.class_count;
  hidden_pre.resize(static_cast<std::size_t>(hidden));
  hidden_act.resize(static_cast<std::size_t>(hidden));
  logits.resize(static_cast<std::size_t>(classes));
  probs.resize(static_cast<std::size_t>(classes));
  d_flat.resize(static_cast<std::size_t>(flat));
  d_hidden.resize(static_cast<std::size_t>(hidden));
  d_logits.resize(static_cast<std::size_t>(classes));
}

namespace {

void conv_relu_pool(const ConvGeometry& g, const double* weight, const double* bias,
                    const std::vector<double>& in, std::vector<double>& pre,
                    std::vector<double>& pooled, std::vector<int>& src) {
  const int pad = g.kernel / 2;
  const int k = g.kernel;
  for (int f = 0; f < g.filters; ++f) {
    for (int y = 0; y < g.in_h; ++y) {
      for (int x = 0; x < g.in_w; ++x) {
        double z = bias[f];
        for (int c = 0; c < g.in_channels; ++c) {
          const double* wk = weight + ((static_cast<std::size_t>(f) * g.in_channels + c) * k) * k;
          const double* plane = in.data() + static_cast<std::size_t>(c) * g.in_h * g.in_w;
          for (int ky = 0; ky < k; ++ky) {
            const int yy = y + ky - pad;
            if (yy < 0 || yy >= g.in_h) continue;
            for (int kx = 0; kx < k; ++kx) {
              const int xx = x + kx - pad;
              if (xx < 0 || xx >= g.in_w) continue;
              z += wk[ky * k + kx] * plane[yy * g.in_w + xx];
            }
          }
        }
        pre[(static_cast<std::size_t>(f) * g.in_h + y) * g.in_w + x] = z;
      }
    }
    for (int py = 0; py < g.out_h; ++py) {
      for (int px = 0; px < g.out_w; ++px) {
        int best = -1;
        double best_v = 0.0;
        for (int dy = 0; dy < 2; ++dy) {
          for (int dx = 0; dx < 2; ++dx) {
            const int idx = (f * g.in_h + 2 * py + dy) * g.in_w + 2 * px + dx;
            const double v = std::max(pre[static_cast<std::size_t>(idx)], 0.0);
            if (best < 0 || v > best_v) {
              best = idx;
              best_v = v;
            }
          }
        }
        const std::size_t o = (static_cast<std::size_t>(f) * g.out_h + py) * g.out_w + px;
        pooled[o] = best_v;
        src[o] = best;
      }
    }
  }
}

void dense(const double* weight, const double* bias, const double* in, int in_n, double* out,
           int out_n) {
  for (int o = 0; o < out_n; ++o) {
    const double* row = weight + static_cast<std::size_t>(o) * in_n;
    double z = bias[o];
    for (int i = 0; i < in_n; ++i) z += row[i] * in[i];
    out[o] = z;
  }
}

}  // namespace

void forward(const Model& model, std::span<const float> pixels, Workspace& ws) {
  auto& first = ws.block_in.front();
  for (std::size_t i = 0; i < pixels.size(); ++i) first[i] = pixels[i];

  std::size_t pi = 0;
  const double* feat = first.data();
  for (std::size_t b = 0; b < ws.conv.size(); ++b) {
    if (b > 0) ws.block_in[b] = ws.pooled[b - 1];
    conv_relu_pool(ws.conv[b], model.params[pi].values.data(), model.params[pi + 1].values.data(),
                   ws.block_in[b], ws.pre[b], ws.pooled[b], ws.pool_src[b]);
    pi += 2;
    feat = ws.pooled[b].data();
  }
  int features = ws.flat;
  if (ws.hidden > 0) {
    dense(model.params[pi].values.data(), model.params[pi + 1].values.data(), feat, features,
          ws.hidden_pre.data(), ws.hidden);
    for (int i = 0; i < ws.hidden; ++i) ws.hidden_act[i] = std::max(ws.hidden_pre[i], 0.0);
    pi += 2;
    feat = ws.hidden_act.data();
    features = ws.hidden;
  }
  dense(model.params[pi].values.data(), model.params[pi + 1].values.data(), feat, features,
        ws.logits.data(), ws.classes);
  ws.probs = softmax(ws.logits);
}

double instance_loss(const Workspace& ws, int label) {
  return -std::log(std::max(ws.probs[static_cast<std::size_t>(label)], kProbabilityFloor));
}

double accumulate_instance(const Model& model, const data::Instance& inst, Workspace& ws,
                           ParamSet& grads) {
  forward(model, inst.pixels, ws);
  const int label = inst.label;
  const double loss = instance_loss(ws, label);

  // d loss / d logits = p - onehot, or zero where the floor clamps the true-class probability.
  const bool floored = ws.probs[static_cast<std::size_t>(label)] < kProbabilityFloor;
  for (int k = 0; k < ws.classes; ++k)
    ws.d_logits[k] = floored ? 0.0 : ws.probs[k] - (k == label ? 1.0 : 0.0);

  const std::size_t out_i = grads.size() - 2;
  const double* feat = ws.conv.empty() ? ws.block_in.front().data() : ws.pooled.back().data();
  int features = ws.flat;
  if (ws.hidden > 0) {
    feat = ws.hidden_act.data();
    features = ws.hidden;
  }

  // Output layer.
  {
    auto& gw = grads[out_i].values;
    auto& gb = grads[out_i + 1].values;
    const auto& w = model.params[out_i].values;
    double* d_in = ws.hidden > 0 ? ws.d_hidden.data() : ws.d_flat.data();
    std::fill(d_in, d_in + features, 0.0);
    for (int k = 0; k < ws.classes; ++k) {
      const double d = ws.d_logits[k];
      gb[k] += d;
      double* grow = gw.data() + static_cast<std::size_t>(k) * features;
      const double* wrow = w.data() + static_cast<std::size_t>(k) * features;
      for (int i = 0; i < features; ++i) {
        grow[i] += d * feat[i];
        d_in[i] += d * wrow[i];
      }
    }
  }

  // Hidden layer.
  if (ws.hidden > 0) {
    const std::size_t hi = out_i - 2;
    auto& gw = grads[hi].values;
    auto& gb = grads[hi + 1].values;
    const auto& w = model.params[hi].values;
    const double* hin = ws.conv.empty() ? ws.block_in.front().data() : ws.pooled.back().data();
    std::fill(ws.d_flat.begin(), ws.d_flat.end(), 0.0);
    for (int j = 0; j < ws.hidden; ++j) {
      const double d = ws.hidden_pre[j] > 0.0 ? ws.d_hidden[j] : 0.0;
      gb[j] += d;
      double* grow = gw.data() + static_cast<std::size_t>(j) * ws.flat;
      const double* wrow = w.data() + static_cast<std::size_t>(j) * ws.flat;
      for (int i = 0; i < ws.flat; ++i) {
        grow[i] += d * hin[i];
        ws.d_flat[i] += d * wrow[i];
      }
    }
  }

  // Conv blocks, last to first.
  for (std::size_t bi = ws.conv.size(); bi-- > 0;) {
    const auto& g = ws.conv[bi];
    const std::size_t wi = 2 * bi;
    auto& gw = grads[wi].values;
    auto& gb = grads[wi + 1].values;
    const auto& w = model.params[wi].values;
    const std::vector<double>& d_out = (bi + 1 == ws.conv.size()) ? ws.d_flat : ws.d_block_in[bi + 1];

    auto& d_pre = ws.d_pre[bi];
    std::fill(d_pre.begin(), d_pre.end(), 0.0);
    for (std::size_t o = 0; o < ws.pooled[bi].size(); ++o) {
      const int s = ws.pool_src[bi][o];
      if (ws.pre[bi][static_cast<std::size_t>(s)] > 0.0) d_pre[static_cast<std::size_t>(s)] += d_out[o];
    }

    const bool need_input_grad = bi > 0;
    auto& d_in = ws.d_block_in[bi];
    if (need_input_grad) std::fill(d_in.begin(), d_in.end(), 0.0);
    const auto& in = ws.block_in[bi];
    const int pad = g.kernel / 2;
    const int k = g.kernel;
    for (int f = 0; f < g.filters; ++f) {
      for (int y = 0; y < g.in_h; ++y) {
        for (int x = 0; x < g.in_w; ++x) {
          const double d = d_pre[(static_cast<std::size_t>(f) * g.in_h + y) * g.in_w + x];
          gb[f] += d;
          for (int c = 0; c < g.in_channels; ++c) {
            const std::size_t wbase = ((static_cast<std::size_t>(f) * g.in_channels + c) * k) * k;
            const std::size_t plane = static_cast<std::size_t>(c) * g.in_h * g.in_w;
            for (int ky = 0; ky < k; ++ky) {
              const int yy = y + ky - pad;
              if (yy < 0 || yy >= g.in_h) continue;
              for (int kx = 0; kx < k; ++kx) {
                const int xx = x + kx - pad;
                if (xx < 0 || xx >= g.in_w) continue;
                const std::size_t ii = plane + static_cast<std::size_t>(yy) * g.in_w + xx;
                gw[wbase + ky * k + kx] += d * in[ii];
                if (need_input_grad) d_in[ii] += d * w[wbase + ky * k + kx];
              }
            }
          }
        }
      }
    }
  }
  return loss;
}

void add_into(ParamSet& total, const ParamSet& part) {
  for (std::size_t i = 0; i < total.size(); ++i) {
    auto& t = total[i].values;
    const auto& p = part[i].values;
    for (std::size_t j = 0; j < t.size(); ++j) t[j] += p[j];
  }
}

void scale(ParamSet& params, double factor) {
  for (auto& p : params)
    for (double& v : p.values) v *= factor;
}

void fill_zero(ParamSet& params) {
  for (auto& p : params) std::fill(p.values.begin(), p.values.end(), 0.0);
}

void check_pixels(const ArchSpec& arch, std::span<const float> pixels) {
  const auto expected = static_cast<std::size_t>(arch.input_width) * arch.input_height;
  if (pixels.size() != expected)
    throw ShapeError("expected " + std::to_string(expected) + " pixels, got " +
                     std::to_string(pixels.size()));
}

void check_batch(const Model& model, std::span<const data::Instance* const> batch) {
  if (batch.empty()) throw UsageError("empty batch");
  for (const auto* inst : batch) {
    check_pixels(model.arch, inst->pixels);
    if (inst->label >= model.arch.class_count)
      throw UsageError("label " + std::to_string(inst->label) + " >= class_count " +
                       std::to_string(model.arch.class_count));
  }
}

}  // namespace detail
}  // namespace poisonbench::nn
