#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "fadingfl/random.hpp"
#include "fadingfl/scheduler.hpp"

namespace fadingfl {

/// Dense labelled examples, features stored row-major.
struct Dataset {
  std::size_t feature_dim = 0;
  std::size_t class_count = 0;
  std::vector<float> features;
  std::vector<std::uint8_t> labels;

  std::size_t size() const { return labels.size(); }
  bool empty() const { return labels.empty(); }
  std::span<const float> row(std::size_t i) const {
    return {features.data() + i * feature_dim, feature_dim};
  }
  /// Appends one example; throws if the feature width or label is out of range.
  void push_back(std::span<const float> x, std::uint8_t label);
};

/// One client's local dataset, as indices into a shared Dataset.
struct ClientDataset {
  ClientId client_id = 0;
  std::vector<std::size_t> indices;

  std::size_t size() const { return indices.size(); }
  bool empty() const { return indices.empty(); }
};

/// Stratified iid split: every client receives exactly `per_client` examples
/// and a class mix that matches the source up to rounding.
std::vector<ClientDataset> partition_iid(const Dataset& data, std::size_t n_clients,
                                         std::size_t per_client, RandomStream& rng);

struct NonIidOptions {
  std::size_t min_classes = 1;
  std::size_t max_classes = 0;  // 0 means all classes
  std::size_t min_samples = 100;
  std::size_t max_samples = 600;
  bool operator==(const NonIidOptions&) const = default;
};

/// Skewed split: each client draws a class count and a sample count uniformly
/// and takes its samples from those classes only. Samples are never shared, so
/// a client may end up short (or empty) once its classes run dry.
std::vector<ClientDataset> partition_noniid(const Dataset& data, std::size_t n_clients,
                                            const NonIidOptions& options, RandomStream& rng);

std::vector<double> label_distribution(const Dataset& data, const ClientDataset& client);
double total_variation(std::span<const double> p, std::span<const double> q);
/// Mean total-variation distance over all pairs of nonempty clients.
double mean_pairwise_label_tv(const Dataset& data, std::span<const ClientDataset> clients);

struct SyntheticSpec {
  std::size_t classes = 10;
  std::size_t per_class = 100;
  std::size_t dim = 784;
  double separation = 4.0;  // norm of each class mean
  double noise = 1.0;       // per-coordinate std-dev around the mean
  bool operator==(const SyntheticSpec&) const = default;
};

/// Gaussian blobs, one per class, with class means drawn from `rng`. Throws
/// std::invalid_argument for an empty specification.
Dataset make_synthetic(const SyntheticSpec& spec, RandomStream& rng);

/// Train/test pair drawn around the same class means.
struct SyntheticSplit {
  Dataset train;
  Dataset test;
};
SyntheticSplit make_synthetic_split(const SyntheticSpec& spec, std::size_t test_per_class,
                                    std::uint64_t seed);

}  // namespace fadingfl
