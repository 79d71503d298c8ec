#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

#include "wand/chain_state.hpp"
#include "wand/ranking_data.hpp"

namespace wand {

/// Symmetric matrix of pairwise probabilities with a zero diagonal.
class DissimilarityMatrix {
 public:
  explicit DissimilarityMatrix(std::size_t dim = 0) : dim_(dim), entries_(dim * dim, 0.0) {}

  std::size_t dim() const { return dim_; }
  double operator()(std::size_t i, std::size_t j) const { return entries_[i * dim_ + j]; }
  /// Sets both (i, j) and (j, i).
  void set(std::size_t i, std::size_t j, double value);

  /// Throws std::logic_error if asymmetric, the diagonal is non-zero, or an
  /// entry falls outside [0, 1].
  void validate() const;

 private:
  std::size_t dim_;
  std::vector<double> entries_;
};

/// One agglomeration step. Leaves are numbered 0..n-1 and the cluster formed
/// by merge k is numbered n + k; `a` < `b`.
struct Merge {
  std::size_t a = 0;
  std::size_t b = 0;
  double height = 0.0;

  bool operator==(const Merge&) const = default;
};

struct Dendrogram {
  std::size_t leaves = 0;
  std::vector<Merge> merges;

  /// Flat clustering obtained by applying every merge with height <= `height`.
  /// Labels are contiguous in leaf order of first appearance.
  std::vector<int> cut(double height) const;
};

/// Delta_ij = fraction of retained samples with c_i != c_j.
DissimilarityMatrix ranker_dissimilarity(const Trace& trace);

/// Agglomerative complete-linkage (furthest neighbour) clustering. Among
/// equally close pairs the lexicographically smallest pair of cluster
/// representatives (lowest member leaf) is merged first.
Dendrogram complete_linkage(const DissimilarityMatrix& d);

// -----------------------------------------------------------------------------
// Summaries conditioned on the number of ranker clusters.
//
// Ranker-cluster identity is not comparable across samples, so the samples
// with exactly N ranker clusters are aligned to a reference partition: the
// most frequent c among them. Its clusters are numbered by decreasing size
// (ties by first appearance), and each sample's clusters are matched to them
// greedily by largest Jaccard overlap of ranker membership, ties going to the
// lower reference label and then the lower sample label.

struct AlignedSample {
  std::size_t record = 0;
  /// cluster_of[s] = this sample's ranker cluster matched to reference s.
  std::vector<std::size_t> cluster_of;
};

struct Alignment {
  std::vector<int> reference;  // reference partition, relabelled by size
  std::vector<AlignedSample> samples;
};

/// Throws std::invalid_argument if no sample has N ranker clusters.
Alignment align_ranker_clusters(const Trace& trace, std::size_t num_ranker_clusters);

/// Pr(d_{s,l} != d_{s,l'} | data, N^r = N) within reference cluster s.
DissimilarityMatrix entity_dissimilarity(const Trace& trace, std::size_t num_ranker_clusters, std::size_t cluster);

/// probs[k - 1] = Pr(N^r = k).
std::vector<double> ranker_cluster_count_distribution(const Trace& trace);

/// probs[k - 1] = Pr(N^e_s = k | N^r = N).
std::vector<double> entity_cluster_count_distribution(const Trace& trace, std::size_t num_ranker_clusters,
                                                      std::size_t cluster);

struct AggregateEntry {
  EntityId entity = 0;
  double mean_skill = 0.0;
};

/// Posterior-mean skill of every entity within reference cluster s, sorted
/// by decreasing mean (ties by entity id). Means are not normalized.
std::vector<AggregateEntry> aggregate_ranking(const Trace& trace, std::size_t num_ranker_clusters,
                                              std::size_t cluster);

/// Pr(w_i = 1 | data) for every ranker.
std::vector<double> reliability_probabilities(const Trace& trace);

/// The most frequent ranker partition in the trace (first seen wins ties).
/// Supplementary only: a single allocation hides posterior uncertainty.
std::vector<int> map_allocation(const Trace& trace);

// -----------------------------------------------------------------------------
// CSV output

void write_dissimilarity_csv(std::ostream& out, const DissimilarityMatrix& d, const std::vector<std::string>& labels);
void write_merges_csv(std::ostream& out, const Dendrogram& dendrogram);
void write_count_distribution_csv(std::ostream& out, const std::vector<double>& probs);
void write_aggregate_csv(std::ostream& out, const std::vector<AggregateEntry>& ranking, const Dataset* data);
void write_reliability_csv(std::ostream& out, const std::vector<double>& probs);
void write_allocation_csv(std::ostream& out, const std::vector<int>& allocation);

}  // namespace wand
