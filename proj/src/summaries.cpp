#include "wand/summaries.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <numeric>
#include <ostream>
#include <stdexcept>

namespace wand {

void DissimilarityMatrix::set(std::size_t i, std::size_t j, double value) {
  entries_[i * dim_ + j] = value;
  entries_[j * dim_ + i] = value;
}

void DissimilarityMatrix::validate() const {
  for (std::size_t i = 0; i < dim_; ++i) {
    if ((*this)(i, i) != 0.0) throw std::logic_error("dissimilarity diagonal must be zero");
    for (std::size_t j = 0; j < dim_; ++j) {
      const double v = (*this)(i, j);
      if (v != (*this)(j, i)) throw std::logic_error("dissimilarity matrix must be symmetric");
      if (!(v >= 0.0 && v <= 1.0)) throw std::logic_error("dissimilarity entries must lie in [0, 1]");
    }
  }
}

std::vector<int> Dendrogram::cut(double height) const {
  // Union-find over leaves and merge nodes.
  std::vector<std::size_t> parent(leaves + merges.size());
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  for (std::size_t k = 0; k < merges.size(); ++k) {
    if (merges[k].height > height) continue;
    const std::size_t node = leaves + k;
    parent[find(merges[k].a)] = node;
    parent[find(merges[k].b)] = node;
  }
  std::map<std::size_t, int> label_of_root;
  std::vector<int> labels(leaves);
  for (std::size_t i = 0; i < leaves; ++i) {
    const auto root = find(i);
    auto [it, inserted] = label_of_root.emplace(root, static_cast<int>(label_of_root.size()));
    labels[i] = it->second;
  }
  return labels;
}

DissimilarityMatrix ranker_dissimilarity(const Trace& trace) {
  if (trace.empty()) throw std::invalid_argument("trace has no retained samples");
  const std::size_t n = trace.records.front().state.c.size();
  std::vector<std::size_t> apart(n * n, 0);
  for (const auto& rec : trace.records) {
    const auto& c = rec.state.c;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) {
        if (c[i] != c[j]) ++apart[i * n + j];
      }
    }
  }
  DissimilarityMatrix d(n);
  const double total = static_cast<double>(trace.size());
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) d.set(i, j, static_cast<double>(apart[i * n + j]) / total);
  }
  return d;
}

Dendrogram complete_linkage(const DissimilarityMatrix& input) {
  const std::size_t n = input.dim();
  if (n < 2) throw std::invalid_argument("complete linkage needs at least two items");
  constexpr double kInf = std::numeric_limits<double>::infinity();

  std::vector<double> dist(n * n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) dist[i * n + j] = input(i, j);
  }
  std::vector<bool> active(n, true);
  std::vector<std::size_t> node_id(n);
  std::iota(node_id.begin(), node_id.end(), 0);

  // Cached nearest active neighbour with a larger representative index.
  std::vector<std::size_t> nearest(n, n);
  std::vector<double> nearest_dist(n, kInf);
  auto refresh = [&](std::size_t i) {
    nearest[i] = n;
    nearest_dist[i] = kInf;
    for (std::size_t j = i + 1; j < n; ++j) {
      if (active[j] && dist[i * n + j] < nearest_dist[i]) {
        nearest_dist[i] = dist[i * n + j];
        nearest[i] = j;
      }
    }
  };
  for (std::size_t i = 0; i < n; ++i) refresh(i);

  Dendrogram out;
  out.leaves = n;
  for (std::size_t step = 0; step + 1 < n; ++step) {
    std::size_t best = n;
    for (std::size_t i = 0; i < n; ++i) {
      if (active[i] && nearest[i] < n && (best == n || nearest_dist[i] < nearest_dist[best])) best = i;
    }
    const std::size_t i = best;
    const std::size_t j = nearest[i];
    const double height = nearest_dist[i];
    out.merges.push_back(Merge{std::min(node_id[i], node_id[j]), std::max(node_id[i], node_id[j]), height});

    active[j] = false;
    node_id[i] = n + step;
    for (std::size_t k = 0; k < n; ++k) {
      if (!active[k] || k == i) continue;
      const double merged = std::max(dist[i * n + k], dist[j * n + k]);
      dist[i * n + k] = merged;
      dist[k * n + i] = merged;
    }
    // Distances only grow under complete linkage, so only rows whose cached
    // neighbour was i or j, plus i itself, can change.
    refresh(i);
    for (std::size_t k = 0; k < i; ++k) {
      if (active[k] && (nearest[k] == i || nearest[k] == j)) refresh(k);
    }
    for (std::size_t k = i + 1; k < n; ++k) {
      if (active[k] && nearest[k] == j) refresh(k);
    }
  }
  return out;
}

// -----------------------------------------------------------------------------

namespace {

std::vector<int> relabel_by_size(const std::vector<int>& c) {
  const std::size_t k = c.empty() ? 0 : static_cast<std::size_t>(*std::max_element(c.begin(), c.end())) + 1;
  std::vector<std::size_t> size(k, 0);
  std::vector<std::size_t> first(k, c.size());
  for (std::size_t i = 0; i < c.size(); ++i) {
    const auto s = static_cast<std::size_t>(c[i]);
    ++size[s];
    first[s] = std::min(first[s], i);
  }
  std::vector<std::size_t> order(k);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
    if (size[x] != size[y]) return size[x] > size[y];
    return first[x] < first[y];
  });
  std::vector<int> rank(k);
  for (std::size_t r = 0; r < k; ++r) rank[order[r]] = static_cast<int>(r);
  std::vector<int> out(c.size());
  for (std::size_t i = 0; i < c.size(); ++i) out[i] = rank[static_cast<std::size_t>(c[i])];
  return out;
}

}  // namespace

Alignment align_ranker_clusters(const Trace& trace, std::size_t num_ranker_clusters) {
  std::map<std::vector<int>, std::pair<std::size_t, std::size_t>> freq;  // partition -> (count, first record)
  std::vector<std::size_t> eligible;
  for (std::size_t r = 0; r < trace.size(); ++r) {
    const auto& st = trace.records[r].state;
    if (st.num_ranker_clusters() != num_ranker_clusters) continue;
    eligible.push_back(r);
    auto [it, inserted] = freq.emplace(st.c, std::make_pair(std::size_t{0}, r));
    ++it->second.first;
  }
  if (eligible.empty()) {
    throw std::invalid_argument("no retained sample has " + std::to_string(num_ranker_clusters) + " ranker clusters");
  }
  const std::vector<int>* modal = nullptr;
  std::pair<std::size_t, std::size_t> best{0, 0};
  for (const auto& [partition, stats] : freq) {
    if (modal == nullptr || stats.first > best.first || (stats.first == best.first && stats.second < best.second)) {
      modal = &partition;
      best = stats;
    }
  }

  Alignment out;
  out.reference = relabel_by_size(*modal);
  const std::size_t N = num_ranker_clusters;
  const std::size_t n = out.reference.size();
  std::vector<std::size_t> ref_size(N, 0);
  for (int s : out.reference) ++ref_size[static_cast<std::size_t>(s)];

  for (std::size_t r : eligible) {
    const auto& c = trace.records[r].state.c;
    std::vector<std::size_t> overlap(N * N, 0);
    std::vector<std::size_t> size(N, 0);
    for (std::size_t i = 0; i < n; ++i) {
      const auto u = static_cast<std::size_t>(c[i]);
      ++size[u];
      ++overlap[static_cast<std::size_t>(out.reference[i]) * N + u];
    }
    AlignedSample sample;
    sample.record = r;
    sample.cluster_of.assign(N, N);
    std::vector<bool> ref_done(N, false), sample_done(N, false);
    for (std::size_t round = 0; round < N; ++round) {
      double best_j = -1.0;
      std::size_t best_v = N, best_u = N;
      for (std::size_t v = 0; v < N; ++v) {
        if (ref_done[v]) continue;
        for (std::size_t u = 0; u < N; ++u) {
          if (sample_done[u]) continue;
          const double inter = static_cast<double>(overlap[v * N + u]);
          const double uni = static_cast<double>(ref_size[v] + size[u]) - inter;
          const double jac = uni > 0.0 ? inter / uni : 0.0;
          if (jac > best_j) {
            best_j = jac;
            best_v = v;
            best_u = u;
          }
        }
      }
      ref_done[best_v] = true;
      sample_done[best_u] = true;
      sample.cluster_of[best_v] = best_u;
    }
    out.samples.push_back(std::move(sample));
  }
  return out;
}

namespace {

void require_cluster(std::size_t cluster, std::size_t num_ranker_clusters) {
  if (cluster >= num_ranker_clusters) {
    throw std::invalid_argument("cluster index " + std::to_string(cluster) + " out of range for " +
                                std::to_string(num_ranker_clusters) + " ranker clusters");
  }
}

}  // namespace

DissimilarityMatrix entity_dissimilarity(const Trace& trace, std::size_t num_ranker_clusters, std::size_t cluster) {
  require_cluster(cluster, num_ranker_clusters);
  const Alignment align = align_ranker_clusters(trace, num_ranker_clusters);
  const std::size_t K = trace.records[align.samples.front().record].state.D.front().size();
  std::vector<std::size_t> apart(K * K, 0);
  for (const auto& sample : align.samples) {
    const auto& d = trace.records[sample.record].state.D[sample.cluster_of[cluster]];
    for (std::size_t i = 0; i < K; ++i) {
      for (std::size_t j = i + 1; j < K; ++j) {
        if (d[i] != d[j]) ++apart[i * K + j];
      }
    }
  }
  DissimilarityMatrix out(K);
  const double total = static_cast<double>(align.samples.size());
  for (std::size_t i = 0; i < K; ++i) {
    for (std::size_t j = i + 1; j < K; ++j) out.set(i, j, static_cast<double>(apart[i * K + j]) / total);
  }
  return out;
}

namespace {

std::vector<double> normalized_histogram(const std::vector<std::size_t>& values) {
  const std::size_t max_k = *std::max_element(values.begin(), values.end());
  std::vector<double> probs(max_k, 0.0);
  for (std::size_t k : values) probs[k - 1] += 1.0;
  for (double& p : probs) p /= static_cast<double>(values.size());
  return probs;
}

}  // namespace

std::vector<double> ranker_cluster_count_distribution(const Trace& trace) {
  if (trace.empty()) throw std::invalid_argument("trace has no retained samples");
  std::vector<std::size_t> counts;
  for (const auto& rec : trace.records) counts.push_back(rec.state.num_ranker_clusters());
  return normalized_histogram(counts);
}

std::vector<double> entity_cluster_count_distribution(const Trace& trace, std::size_t num_ranker_clusters,
                                                      std::size_t cluster) {
  require_cluster(cluster, num_ranker_clusters);
  const Alignment align = align_ranker_clusters(trace, num_ranker_clusters);
  std::vector<std::size_t> counts;
  for (const auto& sample : align.samples) {
    counts.push_back(trace.records[sample.record].state.num_entity_clusters(sample.cluster_of[cluster]));
  }
  return normalized_histogram(counts);
}

std::vector<AggregateEntry> aggregate_ranking(const Trace& trace, std::size_t num_ranker_clusters,
                                              std::size_t cluster) {
  require_cluster(cluster, num_ranker_clusters);
  const Alignment align = align_ranker_clusters(trace, num_ranker_clusters);
  const std::size_t K = trace.records[align.samples.front().record].state.D.front().size();
  std::vector<double> sums(K, 0.0);
  for (const auto& sample : align.samples) {
    const auto& st = trace.records[sample.record].state;
    const std::size_t u = sample.cluster_of[cluster];
    for (std::size_t l = 0; l < K; ++l) sums[l] += st.Lambda[u][static_cast<std::size_t>(st.D[u][l])];
  }
  std::vector<AggregateEntry> out(K);
  for (std::size_t l = 0; l < K; ++l) {
    out[l] = AggregateEntry{static_cast<EntityId>(l), sums[l] / static_cast<double>(align.samples.size())};
  }
  std::stable_sort(out.begin(), out.end(),
                   [](const AggregateEntry& x, const AggregateEntry& y) { return x.mean_skill > y.mean_skill; });
  return out;
}

std::vector<double> reliability_probabilities(const Trace& trace) {
  if (trace.empty()) throw std::invalid_argument("trace has no retained samples");
  const std::size_t n = trace.records.front().state.w.size();
  std::vector<double> probs(n, 0.0);
  for (const auto& rec : trace.records) {
    for (std::size_t i = 0; i < n; ++i) probs[i] += rec.state.w[i];
  }
  for (double& p : probs) p /= static_cast<double>(trace.size());
  return probs;
}

std::vector<int> map_allocation(const Trace& trace) {
  if (trace.empty()) throw std::invalid_argument("trace has no retained samples");
  std::map<std::vector<int>, std::pair<std::size_t, std::size_t>> freq;
  for (std::size_t r = 0; r < trace.size(); ++r) {
    auto [it, inserted] = freq.emplace(trace.records[r].state.c, std::make_pair(std::size_t{0}, r));
    ++it->second.first;
  }
  const std::vector<int>* best = nullptr;
  std::pair<std::size_t, std::size_t> best_stats{0, 0};
  for (const auto& [partition, stats] : freq) {
    if (best == nullptr || stats.first > best_stats.first ||
        (stats.first == best_stats.first && stats.second < best_stats.second)) {
      best = &partition;
      best_stats = stats;
    }
  }
  return *best;
}

// -----------------------------------------------------------------------------

namespace {

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

}  // namespace

void write_dissimilarity_csv(std::ostream& out, const DissimilarityMatrix& d, const std::vector<std::string>& labels) {
  auto name = [&](std::size_t i) { return i < labels.size() ? labels[i] : std::to_string(i); };
  out << "id";
  for (std::size_t j = 0; j < d.dim(); ++j) out << ',' << name(j);
  out << '\n';
  for (std::size_t i = 0; i < d.dim(); ++i) {
    out << name(i);
    for (std::size_t j = 0; j < d.dim(); ++j) out << ',' << fmt(d(i, j));
    out << '\n';
  }
}

void write_merges_csv(std::ostream& out, const Dendrogram& dendrogram) {
  out << "a,b,height\n";
  for (const auto& m : dendrogram.merges) out << m.a << ',' << m.b << ',' << fmt(m.height) << '\n';
}

void write_count_distribution_csv(std::ostream& out, const std::vector<double>& probs) {
  out << "k,prob\n";
  for (std::size_t k = 0; k < probs.size(); ++k) out << k + 1 << ',' << fmt(probs[k]) << '\n';
}

void write_aggregate_csv(std::ostream& out, const std::vector<AggregateEntry>& ranking, const Dataset* data) {
  out << "entity,label,mean_skill,rank\n";
  for (std::size_t r = 0; r < ranking.size(); ++r) {
    const auto& e = ranking[r];
    const std::string label = data ? data->label(e.entity) : std::to_string(e.entity);
    out << e.entity << ',' << label << ',' << fmt(e.mean_skill) << ',' << r + 1 << '\n';
  }
}

void write_reliability_csv(std::ostream& out, const std::vector<double>& probs) {
  out << "ranker,prob\n";
  for (std::size_t i = 0; i < probs.size(); ++i) out << i << ',' << fmt(probs[i]) << '\n';
}

void write_allocation_csv(std::ostream& out, const std::vector<int>& allocation) {
  out << "ranker,cluster\n";
  for (std::size_t i = 0; i < allocation.size(); ++i) out << i << ',' << allocation[i] << '\n';
}

}  // namespace wand
