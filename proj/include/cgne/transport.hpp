#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cgne/morphology.hpp"

namespace cgne {

struct Point2 {
  double x = 0.0;
  double y = 0.0;
  friend bool operator==(const Point2&, const Point2&) = default;
};

/// Uniformly weighted empirical measure on (area, boundary_length).
struct EmpiricalJoint {
  std::vector<Point2> points;

  /// Throws InvalidArgument unless non-empty with finite, nonnegative coordinates.
  void validate() const;
};

/// Optimal assignment for a square row-major cost matrix.
struct Assignment {
  double cost = 0.0;
  std::vector<int> column_of_row;
};

/// Shortest augmenting path (Hungarian with potentials), O(n^3).
Assignment solve_assignment(std::span<const double> cost, std::size_t n);

/// Exact transportation problem with integer supplies and demands (equal
/// totals) on a row-major supply x demand cost matrix. Returns the minimal
/// total cost sum_ij flow_ij * cost_ij. Successive shortest paths with
/// potentials; throws SolverError if the augmentation budget is exhausted.
double solve_transport(std::span<const double> cost, std::span<const std::int64_t> supply,
                       std::span<const std::int64_t> demand);

/// Exact type-2 Wasserstein distance between two uniform empirical measures.
/// Equal sizes solve an assignment problem, unequal sizes a transportation
/// problem with supplies m/g and demands n/g (g = gcd(n, m)).
double w2(const EmpiricalJoint& p, const EmpiricalJoint& q);

/// Equal-width rho bin edges, default 10 bins over the reference range.
std::vector<double> uniform_edges(std::size_t bins = 10, double lo = 0.35, double hi = 0.65);

/// Samples partitioned by rho into [e_k, e_k+1), the last bin closed.
struct BinnedSamples {
  std::vector<double> edges;
  std::vector<std::vector<Point2>> bins;
  /// Indices of bins holding fewer than the requested minimum.
  std::vector<std::size_t> underpopulated;
};

/// Throws InvalidArgument if edges are not strictly increasing, do not cover
/// [0.35, 0.65], or a sample falls outside [edges.front(), edges.back()].
BinnedSamples bin_by_rho(const std::vector<MorphologySample>& samples, std::span<const double> edges,
                         std::size_t min_count = 5);

struct EwdOptions {
  std::size_t min_count = 5;
  /// z-score both coordinates by the pooled reference mean and standard deviation.
  bool standardize = false;
};

struct ConfidenceInterval {
  double low = 0.0;
  double high = 0.0;
  std::size_t resamples = 0;
  std::uint64_t seed = 0;
};

struct EwdReport {
  std::vector<double> bin_edges;
  std::vector<double> weights;
  std::vector<double> per_bin_w2;
  std::vector<std::size_t> model_counts;
  std::vector<std::size_t> reference_counts;
  double ewd = 0.0;
  bool standardized = false;
  std::optional<ConfidenceInterval> ci;

  /// JSON object with bin_edges, per_bin_w2, per_bin_counts, ewd and, when
  /// present, ci.
  std::string to_json() const;
};

/// Expected W2 over rho: per-bin W2 weighted by bin width (rho uniform).
/// Throws UnderpopulatedBin if either side has a bin below min_count.
EwdReport ewd(const std::vector<MorphologySample>& model, const std::vector<MorphologySample>& reference,
              std::span<const double> edges, const EwdOptions& opts = {});

/// 95% basic bootstrap interval of the EWD under within-bin resampling with
/// replacement of both sides, clamped at zero:
/// [max(0, 2*ewd - q97.5), max(0, 2*ewd - q2.5)]. Draws come from the keyed
/// generator, so a fixed seed gives a fixed interval.
ConfidenceInterval bootstrap_ci(const std::vector<MorphologySample>& model,
                                const std::vector<MorphologySample>& reference, std::span<const double> edges,
                                std::size_t resamples, std::uint64_t seed, const EwdOptions& opts = {});

}  // namespace cgne
