#include "fadingfl/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace fadingfl {
namespace {

template <class T>
void shuffle(std::vector<T>& items, RandomStream& rng) {
  for (std::size_t i = items.size(); i > 1; --i) {
    std::swap(items[i - 1], items[rng.index(i)]);
  }
}

std::vector<std::vector<std::size_t>> class_pools(const Dataset& data) {
  std::vector<std::vector<std::size_t>> pools(data.class_count);
  for (std::size_t i = 0; i < data.size(); ++i) pools[data.labels[i]].push_back(i);
  return pools;
}

std::vector<std::vector<double>> draw_means(const SyntheticSpec& spec, RandomStream& rng) {
  std::vector<std::vector<double>> means(spec.classes, std::vector<double>(spec.dim));
  for (auto& mean : means) {
    double norm2 = 0.0;
    for (double& v : mean) {
      v = rng.normal();
      norm2 += v * v;
    }
    const double scale = spec.separation / std::sqrt(norm2);
    for (double& v : mean) v *= scale;
  }
  return means;
}

Dataset draw_samples(const SyntheticSpec& spec, const std::vector<std::vector<double>>& means,
                     std::size_t per_class, RandomStream& rng) {
  Dataset out;
  out.feature_dim = spec.dim;
  out.class_count = spec.classes;
  out.features.reserve(per_class * spec.classes * spec.dim);
  out.labels.reserve(per_class * spec.classes);
  std::vector<float> x(spec.dim);
  // Interleave classes so that any prefix is roughly balanced.
  for (std::size_t n = 0; n < per_class; ++n) {
    for (std::size_t c = 0; c < spec.classes; ++c) {
      for (std::size_t d = 0; d < spec.dim; ++d) {
        x[d] = static_cast<float>(means[c][d] + spec.noise * rng.normal());
      }
      out.push_back(x, static_cast<std::uint8_t>(c));
    }
  }
  return out;
}

void check_spec(const SyntheticSpec& spec, std::size_t per_class) {
  if (spec.classes == 0 || spec.classes > 256) {
    throw std::invalid_argument("synthetic data needs between 1 and 256 classes");
  }
  if (per_class == 0) throw std::invalid_argument("synthetic data needs per_class > 0 (empty dataset)");
  if (spec.dim == 0) throw std::invalid_argument("synthetic data needs dim > 0");
  if (!(spec.noise >= 0.0) || !(spec.separation >= 0.0)) {
    throw std::invalid_argument("synthetic separation and noise must be nonnegative");
  }
}

}  // namespace

void Dataset::push_back(std::span<const float> x, std::uint8_t label) {
  if (x.size() != feature_dim) throw std::invalid_argument("feature width mismatch");
  if (label >= class_count) throw std::invalid_argument("label out of range");
  features.insert(features.end(), x.begin(), x.end());
  labels.push_back(label);
}

std::vector<ClientDataset> partition_iid(const Dataset& data, std::size_t n_clients,
                                         std::size_t per_client, RandomStream& rng) {
  if (n_clients == 0 || per_client == 0) {
    throw std::invalid_argument("partition needs at least one client and one sample each");
  }
  const std::size_t needed = n_clients * per_client;
  if (needed > data.size()) {
    throw std::invalid_argument("insufficient data: need " + std::to_string(needed) +
                                " examples, have " + std::to_string(data.size()));
  }

  // Order examples so that every prefix is class-proportional: within each
  // shuffled class pool, example r of n gets position (r + 0.5) / n.
  auto pools = class_pools(data);
  struct Keyed {
    double position;
    std::size_t label;
    std::size_t index;
  };
  std::vector<Keyed> order;
  order.reserve(data.size());
  for (std::size_t c = 0; c < pools.size(); ++c) {
    shuffle(pools[c], rng);
    const double n = static_cast<double>(pools[c].size());
    for (std::size_t r = 0; r < pools[c].size(); ++r) {
      order.push_back({(static_cast<double>(r) + 0.5) / n, c, pools[c][r]});
    }
  }
  std::sort(order.begin(), order.end(), [](const Keyed& a, const Keyed& b) {
    return a.position != b.position ? a.position < b.position : a.label < b.label;
  });

  // Contiguous blocks of a class-proportional order are class-proportional.
  std::vector<ClientDataset> clients(n_clients);
  for (std::size_t k = 0; k < n_clients; ++k) {
    clients[k].client_id = static_cast<ClientId>(k);
    clients[k].indices.reserve(per_client);
    for (std::size_t i = k * per_client; i < (k + 1) * per_client; ++i) {
      clients[k].indices.push_back(order[i].index);
    }
  }
  return clients;
}

std::vector<ClientDataset> partition_noniid(const Dataset& data, std::size_t n_clients,
                                            const NonIidOptions& options, RandomStream& rng) {
  const std::size_t classes = data.class_count;
  const std::size_t max_classes = options.max_classes == 0 ? classes : options.max_classes;
  if (n_clients == 0) throw std::invalid_argument("partition needs at least one client");
  if (options.min_classes == 0 || options.min_classes > max_classes || max_classes > classes) {
    throw std::invalid_argument("invalid class-count range for non-iid partition");
  }
  if (options.min_samples == 0 || options.min_samples > options.max_samples) {
    throw std::invalid_argument("invalid sample-count range for non-iid partition");
  }
  if (n_clients * options.min_samples > data.size()) {
    throw std::invalid_argument("insufficient data for non-iid partition");
  }

  auto pools = class_pools(data);
  for (auto& pool : pools) shuffle(pool, rng);
  std::vector<std::size_t> cursor(classes, 0);
  std::vector<std::size_t> class_ids(classes);

  std::vector<ClientDataset> clients(n_clients);
  for (std::size_t k = 0; k < n_clients; ++k) {
    ClientDataset& client = clients[k];
    client.client_id = static_cast<ClientId>(k);
    const std::size_t n_classes = rng.between(options.min_classes, max_classes);
    const std::size_t n_samples = rng.between(options.min_samples, options.max_samples);
    std::iota(class_ids.begin(), class_ids.end(), std::size_t{0});
    for (std::size_t i = 0; i < n_classes; ++i) {
      std::swap(class_ids[i], class_ids[i + rng.index(classes - i)]);
    }
    for (std::size_t i = 0; i < n_classes; ++i) {
      const std::size_t c = class_ids[i];
      const std::size_t quota = n_samples / n_classes + (i < n_samples % n_classes ? 1 : 0);
      const std::size_t take = std::min(quota, pools[c].size() - cursor[c]);
      client.indices.insert(client.indices.end(), pools[c].begin() + cursor[c],
                            pools[c].begin() + cursor[c] + take);
      cursor[c] += take;
    }
  }
  return clients;
}

std::vector<double> label_distribution(const Dataset& data, const ClientDataset& client) {
  std::vector<double> hist(data.class_count, 0.0);
  for (const std::size_t i : client.indices) hist[data.labels[i]] += 1.0;
  if (!client.empty()) {
    for (double& v : hist) v /= static_cast<double>(client.size());
  }
  return hist;
}

double total_variation(std::span<const double> p, std::span<const double> q) {
  if (p.size() != q.size()) throw std::invalid_argument("distributions differ in support");
  double sum = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) sum += std::abs(p[i] - q[i]);
  return 0.5 * sum;
}

double mean_pairwise_label_tv(const Dataset& data, std::span<const ClientDataset> clients) {
  std::vector<std::vector<double>> dists;
  for (const auto& client : clients) {
    if (!client.empty()) dists.push_back(label_distribution(data, client));
  }
  double sum = 0.0;
  std::size_t pairs = 0;
  for (std::size_t i = 0; i < dists.size(); ++i) {
    for (std::size_t j = i + 1; j < dists.size(); ++j) {
      sum += total_variation(dists[i], dists[j]);
      ++pairs;
    }
  }
  return pairs == 0 ? 0.0 : sum / static_cast<double>(pairs);
}

Dataset make_synthetic(const SyntheticSpec& spec, RandomStream& rng) {
  check_spec(spec, spec.per_class);
  const auto means = draw_means(spec, rng);
  return draw_samples(spec, means, spec.per_class, rng);
}

SyntheticSplit make_synthetic_split(const SyntheticSpec& spec, std::size_t test_per_class,
                                    std::uint64_t seed) {
  check_spec(spec, spec.per_class);
  check_spec(spec, test_per_class);
  RandomStream mean_rng(derive_seed(seed, 101));
  RandomStream train_rng(derive_seed(seed, 102));
  RandomStream test_rng(derive_seed(seed, 103));
  const auto means = draw_means(spec, mean_rng);
  return {draw_samples(spec, means, spec.per_class, train_rng),
          draw_samples(spec, means, test_per_class, test_rng)};
}

}  // namespace fadingfl
