#include "fadingfl/nn.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "fadingfl/error.hpp"

namespace fadingfl {
namespace {

// Activations and deltas for a batch, row-major (example x width) per layer.
struct Workspace {
  std::size_t rows = 0;
  std::vector<std::vector<double>> act;    // act[0] input, act[l] output of layer l
  std::vector<std::vector<double>> delta;  // dLoss/dz per layer

  Workspace(const std::vector<std::size_t>& sizes, std::size_t batch) : rows(batch) {
    for (const std::size_t n : sizes) {
      act.emplace_back(n * batch, 0.0);
      delta.emplace_back(n * batch, 0.0);
    }
  }
};

// Replaces logits with probabilities.
void softmax_in_place(double* z, std::size_t n) {
  const double peak = *std::max_element(z, z + n);
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    z[i] = std::exp(z[i] - peak);
    sum += z[i];
  }
  for (std::size_t i = 0; i < n; ++i) z[i] /= sum;
}

}  // namespace

bool ModelParams::all_finite() const {
  return std::all_of(values.begin(), values.end(), [](double v) { return std::isfinite(v); });
}

void TrainingHyper::validate() const {
  if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate)) {
    throw std::invalid_argument("learning_rate must be nonnegative");
  }
  if (!(momentum >= 0.0 && momentum < 1.0)) throw std::invalid_argument("momentum must lie in [0, 1)");
  if (local_epochs == 0) throw std::invalid_argument("local_epochs must be positive");
  if (batch_size == 0) throw std::invalid_argument("batch_size must be positive");
}

DenseNetwork::DenseNetwork(std::vector<std::size_t> layer_sizes) : layer_sizes_(std::move(layer_sizes)) {
  if (layer_sizes_.size() < 2) throw std::invalid_argument("network needs input and output layers");
  if (std::find(layer_sizes_.begin(), layer_sizes_.end(), 0u) != layer_sizes_.end()) {
    throw std::invalid_argument("layer widths must be positive");
  }
  for (std::size_t l = 0; l + 1 < layer_sizes_.size(); ++l) {
    offsets_.push_back(parameter_count_);
    parameter_count_ += (layer_sizes_[l] + 1) * layer_sizes_[l + 1];
  }
}

void DenseNetwork::check(const ModelParams& params) const {
  if (params.layer_sizes != layer_sizes_ || params.values.size() != parameter_count_) {
    throw std::invalid_argument("parameters do not match the network shape");
  }
}

ModelParams DenseNetwork::initialize(RandomStream& rng) const {
  ModelParams params{layer_sizes_, std::vector<double>(parameter_count_)};
  for (std::size_t l = 0; l + 1 < layer_sizes_.size(); ++l) {
    const std::size_t in = layer_sizes_[l];
    const std::size_t out = layer_sizes_[l + 1];
    const double bound = 1.0 / std::sqrt(static_cast<double>(in));
    double* w = params.values.data() + offsets_[l];
    for (std::size_t i = 0; i < (in + 1) * out; ++i) w[i] = bound * (2.0 * rng.uniform() - 1.0);
  }
  return params;
}

namespace {

// C[m][n] += sum over k of P(m, k) * Q[k][n], with k ascending for every
// output, so the result matches a plain triple loop bit for bit. P is read
// through strides; Q and C are row-major with row length n_cols. Blocks of
// 4 x 8 outputs stay in registers across the k loop. A k whose four P values
// are all zero is skipped, which is exact for finite Q.
// Built for AVX2 and baseline x86-64 and picked at load time. FMA stays off,
// so both versions round identically.
#if defined(__x86_64__) && defined(__GNUC__) && !defined(__clang__)
__attribute__((target_clones("avx2", "default")))
#endif
void accumulate_products(double* c, const double* p, std::size_t p_m_stride, std::size_t p_k_stride,
                         const double* q, std::size_t m_rows, std::size_t n_cols, std::size_t k_len) {
  constexpr std::size_t kB = 4;
  constexpr std::size_t kN = 8;
  std::size_t m0 = 0;
  for (; m0 + kB <= m_rows; m0 += kB) {
    std::size_t n0 = 0;
    for (; n0 + kN <= n_cols; n0 += kN) {
      double acc[kB][kN];
      for (std::size_t i = 0; i < kB; ++i) {
        for (std::size_t j = 0; j < kN; ++j) acc[i][j] = c[(m0 + i) * n_cols + n0 + j];
      }
      for (std::size_t k = 0; k < k_len; ++k) {
        const double* pk = p + m0 * p_m_stride + k * p_k_stride;
        const double x0 = pk[0];
        const double x1 = pk[p_m_stride];
        const double x2 = pk[2 * p_m_stride];
        const double x3 = pk[3 * p_m_stride];
        if (x0 == 0.0 && x1 == 0.0 && x2 == 0.0 && x3 == 0.0) continue;
        const double* qk = q + k * n_cols + n0;
        for (std::size_t j = 0; j < kN; ++j) {
          acc[0][j] += x0 * qk[j];
          acc[1][j] += x1 * qk[j];
          acc[2][j] += x2 * qk[j];
          acc[3][j] += x3 * qk[j];
        }
      }
      for (std::size_t i = 0; i < kB; ++i) {
        for (std::size_t j = 0; j < kN; ++j) c[(m0 + i) * n_cols + n0 + j] = acc[i][j];
      }
    }
    for (; n0 < n_cols; ++n0) {
      for (std::size_t i = 0; i < kB; ++i) {
        double sum = c[(m0 + i) * n_cols + n0];
        for (std::size_t k = 0; k < k_len; ++k) {
          const double x = p[(m0 + i) * p_m_stride + k * p_k_stride];
          if (x != 0.0) sum += x * q[k * n_cols + n0];
        }
        c[(m0 + i) * n_cols + n0] = sum;
      }
    }
  }
  for (; m0 < m_rows; ++m0) {
    double* cm = c + m0 * n_cols;
    for (std::size_t k = 0; k < k_len; ++k) {
      const double x = p[m0 * p_m_stride + k * p_k_stride];
      if (x == 0.0) continue;
      const double* qk = q + k * n_cols;
      for (std::size_t n = 0; n < n_cols; ++n) cm[n] += x * qk[n];
    }
  }
}

// Forward pass over ws.rows examples already copied into ws.act[0]; leaves
// probabilities in ws.act.back().
void forward(const std::vector<std::size_t>& sizes, const std::vector<std::size_t>& offsets,
             const ModelParams& params, Workspace& ws) {
  const std::size_t layers = sizes.size() - 1;
  const std::size_t rows = ws.rows;
  for (std::size_t l = 0; l < layers; ++l) {
    const std::size_t in = sizes[l];
    const std::size_t out = sizes[l + 1];
    const double* w = params.values.data() + offsets[l];
    const double* b = w + in * out;
    const double* a = ws.act[l].data();
    double* z = ws.act[l + 1].data();
    for (std::size_t r = 0; r < rows; ++r) std::copy(b, b + out, z + r * out);
    accumulate_products(z, a, in, 1, w, rows, out, in);
    if (l + 1 < layers) {
      for (std::size_t k = 0; k < rows * out; ++k) z[k] = std::max(z[k], 0.0);
    }
  }
  const std::size_t classes = sizes.back();
  for (std::size_t r = 0; r < rows; ++r) softmax_in_place(ws.act[layers].data() + r * classes, classes);
}

void load_rows(const Dataset& data, std::span<const std::size_t> indices, Workspace& ws) {
  const std::size_t dim = data.feature_dim;
  for (std::size_t r = 0; r < indices.size(); ++r) {
    const auto x = data.row(indices[r]);
    std::copy(x.begin(), x.end(), ws.act[0].begin() + static_cast<std::ptrdiff_t>(r * dim));
  }
}

constexpr std::size_t kEvalChunk = 64;

}  // namespace

std::vector<double> DenseNetwork::predict_proba(const ModelParams& params,
                                                std::span<const float> x) const {
  check(params);
  if (x.size() != input_dim()) throw std::invalid_argument("input width mismatch");
  Workspace ws(layer_sizes_, 1);
  std::copy(x.begin(), x.end(), ws.act[0].begin());
  forward(layer_sizes_, offsets_, params, ws);
  return ws.act.back();
}

std::size_t DenseNetwork::predict(const ModelParams& params, std::span<const float> x) const {
  const auto probs = predict_proba(params, x);
  return static_cast<std::size_t>(std::max_element(probs.begin(), probs.end()) - probs.begin());
}

double DenseNetwork::loss_and_gradient(const ModelParams& params, const Dataset& data,
                                       std::span<const std::size_t> batch,
                                       std::vector<double>* grad) const {
  check(params);
  if (data.feature_dim != input_dim()) throw std::invalid_argument("dataset width mismatch");
  if (batch.empty()) throw std::invalid_argument("batch must be nonempty");
  if (grad != nullptr) grad->assign(parameter_count_, 0.0);

  const std::size_t layers = layer_sizes_.size() - 1;
  const std::size_t classes = output_dim();
  const std::size_t rows = batch.size();
  for (const std::size_t idx : batch) {
    if (data.labels[idx] >= classes) throw std::invalid_argument("label exceeds output width");
  }
  Workspace ws(layer_sizes_, rows);
  load_rows(data, batch, ws);
  forward(layer_sizes_, offsets_, params, ws);

  double loss = 0.0;
  for (std::size_t r = 0; r < rows; ++r) {
    loss -= std::log(std::max(ws.act[layers][r * classes + data.labels[batch[r]]], 1e-300));
  }
  if (grad != nullptr) {
    auto& top = ws.delta[layers];
    top = ws.act[layers];
    for (std::size_t r = 0; r < rows; ++r) top[r * classes + data.labels[batch[r]]] -= 1.0;
    for (std::size_t l = layers; l-- > 0;) {
      const std::size_t in = layer_sizes_[l];
      const std::size_t out = layer_sizes_[l + 1];
      const double* w = params.values.data() + offsets_[l];
      double* gw = grad->data() + offsets_[l];
      double* gb = gw + in * out;
      const double* d = ws.delta[l + 1].data();
      const double* a = ws.act[l].data();
      for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t o = 0; o < out; ++o) gb[o] += d[r * out + o];
      }
      accumulate_products(gw, a, 1, in, d, in, out, rows);
      if (l == 0) break;
      double* prev = ws.delta[l].data();
      for (std::size_t r = 0; r < rows; ++r) {
        const double* dr = d + r * out;
        for (std::size_t i = 0; i < in; ++i) {
          if (a[r * in + i] <= 0.0) {
            prev[r * in + i] = 0.0;
            continue;
          }
          const double* row = w + i * out;
          double s = 0.0;
          for (std::size_t o = 0; o < out; ++o) s += row[o] * dr[o];
          prev[r * in + i] = s;
        }
      }
    }
  }
  const double scale = 1.0 / static_cast<double>(batch.size());
  if (grad != nullptr) {
    for (double& g : *grad) g *= scale;
  }
  return loss * scale;
}

ModelParams local_train(const DenseNetwork& net, const ModelParams& global, const Dataset& data,
                        const ClientDataset& client, const TrainingHyper& hyper,
                        RandomStream& rng) {
  hyper.validate();
  if (client.empty()) throw std::invalid_argument("local training needs a nonempty dataset");
  ModelParams params = global;
  std::vector<double> velocity(params.size(), 0.0);
  std::vector<double> grad;
  std::vector<std::size_t> order = client.indices;

  for (std::size_t epoch = 0; epoch < hyper.local_epochs; ++epoch) {
    for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng.index(i)]);
    for (std::size_t start = 0; start < order.size(); start += hyper.batch_size) {
      const std::size_t stop = std::min(order.size(), start + hyper.batch_size);
      net.loss_and_gradient(params, data, std::span(order).subspan(start, stop - start), &grad);
      for (std::size_t p = 0; p < params.size(); ++p) {
        velocity[p] = hyper.momentum * velocity[p] + grad[p];
        params.values[p] -= hyper.learning_rate * velocity[p];
      }
    }
    if (!params.all_finite()) {
      throw NumericFailure("local training produced non-finite weights (client " +
                           std::to_string(client.client_id) + ")");
    }
  }
  return params;
}

ModelParams fedavg_aggregate(std::span<const ClientUpdate> updates, const ModelParams& previous) {
  if (updates.empty()) throw std::invalid_argument("aggregation needs at least one entry");
  double total = 0.0;
  for (const auto& u : updates) {
    if (u.params) total += static_cast<double>(u.sample_count);
  }
  if (total == 0.0) return previous;

  ModelParams out{previous.layer_sizes, std::vector<double>(previous.size(), 0.0)};
  for (const auto& u : updates) {
    if (!u.params || u.sample_count == 0) continue;
    if (u.params->values.size() != out.values.size()) {
      throw std::invalid_argument("client update has the wrong parameter count");
    }
    const double weight = static_cast<double>(u.sample_count) / total;
    const auto& v = u.params->values;
    for (std::size_t p = 0; p < v.size(); ++p) out.values[p] += weight * v[p];
  }
  return out;
}

std::size_t DenseNetwork::count_correct(const ModelParams& params, const Dataset& data) const {
  check(params);
  if (data.feature_dim != input_dim()) throw std::invalid_argument("dataset width mismatch");
  const std::size_t classes = output_dim();
  Workspace ws(layer_sizes_, kEvalChunk);
  std::vector<std::size_t> chunk;
  std::size_t correct = 0;
  for (std::size_t start = 0; start < data.size(); start += kEvalChunk) {
    const std::size_t stop = std::min(data.size(), start + kEvalChunk);
    chunk.resize(stop - start);
    std::iota(chunk.begin(), chunk.end(), start);
    ws.rows = chunk.size();
    load_rows(data, chunk, ws);
    forward(layer_sizes_, offsets_, params, ws);
    for (std::size_t r = 0; r < chunk.size(); ++r) {
      const double* probs = ws.act.back().data() + r * classes;
      const auto best = std::max_element(probs, probs + classes) - probs;
      if (static_cast<std::size_t>(best) == data.labels[start + r]) ++correct;
    }
  }
  return correct;
}

double evaluate_accuracy(const DenseNetwork& net, const ModelParams& params, const Dataset& data) {
  if (data.empty()) throw std::invalid_argument("accuracy needs a nonempty dataset");
  return static_cast<double>(net.count_correct(params, data)) / static_cast<double>(data.size());
}

double mean_loss(const DenseNetwork& net, const ModelParams& params, const Dataset& data,
                 std::span<const std::size_t> indices) {
  return net.loss_and_gradient(params, data, indices, nullptr);
}

}  // namespace fadingfl
