#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "fadingfl/dataset.hpp"
#include "fadingfl/random.hpp"

namespace fadingfl {

/// Flat parameter vector plus the layer widths it was built for. Each layer
/// stores its weights input-major (in x out) followed by its biases.
struct ModelParams {
  std::vector<std::size_t> layer_sizes;
  std::vector<double> values;

  std::size_t size() const { return values.size(); }
  bool all_finite() const;
  bool operator==(const ModelParams&) const = default;
};

struct TrainingHyper {
  double learning_rate = 0.01;
  double momentum = 0.5;
  std::size_t local_epochs = 1;
  std::size_t batch_size = 32;

  void validate() const;
  bool operator==(const TrainingHyper&) const = default;
};

/// Fully connected network: ReLU on hidden layers, softmax output,
/// cross-entropy loss.
class DenseNetwork {
 public:
  /// `layer_sizes` runs from input width to class count; needs at least two entries.
  explicit DenseNetwork(std::vector<std::size_t> layer_sizes);

  const std::vector<std::size_t>& layer_sizes() const { return layer_sizes_; }
  std::size_t input_dim() const { return layer_sizes_.front(); }
  std::size_t output_dim() const { return layer_sizes_.back(); }
  std::size_t parameter_count() const { return parameter_count_; }

  /// Weights uniform in +-1/sqrt(fan_in) per layer; biases likewise.
  ModelParams initialize(RandomStream& rng) const;

  /// Softmax probabilities for one example.
  std::vector<double> predict_proba(const ModelParams& params, std::span<const float> x) const;
  std::size_t predict(const ModelParams& params, std::span<const float> x) const;

  /// Mean cross-entropy over `batch` (indices into `data`). When `grad` is
  /// non-null it is resized and overwritten with the gradient of that mean.
  double loss_and_gradient(const ModelParams& params, const Dataset& data,
                           std::span<const std::size_t> batch, std::vector<double>* grad) const;

  /// Number of examples in `data` whose argmax prediction matches the label.
  std::size_t count_correct(const ModelParams& params, const Dataset& data) const;

 private:
  void check(const ModelParams& params) const;

  std::vector<std::size_t> layer_sizes_;
  std::vector<std::size_t> offsets_;  // start of each layer's weights
  std::size_t parameter_count_ = 0;
};

/// Local mini-batch SGD with momentum (v <- mu v + g; w <- w - lr v) over
/// the client's examples, reshuffled each epoch. Throws NumericFailure if any
/// weight becomes NaN or infinite, and std::invalid_argument for empty data.
ModelParams local_train(const DenseNetwork& net, const ModelParams& global, const Dataset& data,
                        const ClientDataset& client, const TrainingHyper& hyper,
                        RandomStream& rng);

/// One entry of a FedAvg round. A lost update is `params == nullopt`; its
/// sample count is ignored (treated as zero).
struct ClientUpdate {
  std::optional<ModelParams> params;
  std::size_t sample_count = 0;
};

/// Dataset-size weighted mean of the present updates, summed in the given
/// order. If no update carries weight, `previous` is returned unchanged.
ModelParams fedavg_aggregate(std::span<const ClientUpdate> updates, const ModelParams& previous);

/// Fraction of examples whose argmax prediction matches the label.
double evaluate_accuracy(const DenseNetwork& net, const ModelParams& params, const Dataset& data);

/// Mean cross-entropy over the given examples.
double mean_loss(const DenseNetwork& net, const ModelParams& params, const Dataset& data,
                 std::span<const std::size_t> indices);

}  // namespace fadingfl
