#include "cgne/transport.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "json.hpp"

#include "cgne/error.hpp"
#include "cgne/rng.hpp"

namespace cgne {

void EmpiricalJoint::validate() const {
  if (points.empty()) throw InvalidArgument("empirical measure is empty");
  for (const auto& p : points) {
    if (!std::isfinite(p.x) || !std::isfinite(p.y) || p.x < 0 || p.y < 0) {
      throw InvalidArgument("empirical measure coordinates must be finite and nonnegative");
    }
  }
}

Assignment solve_assignment(std::span<const double> cost, std::size_t n) {
  if (cost.size() != n * n) throw InvalidArgument("assignment cost matrix must be n x n");
  constexpr double kInf = std::numeric_limits<double>::infinity();
  // 1-based potentials; column 0 is the virtual start of each augmenting path.
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0), minv(n + 1);
  std::vector<std::size_t> row_of_col(n + 1, 0), way(n + 1, 0);
  std::vector<char> used(n + 1);
  for (std::size_t row = 1; row <= n; ++row) {
    row_of_col[0] = row;
    std::size_t col0 = 0;
    std::fill(minv.begin(), minv.end(), kInf);
    std::fill(used.begin(), used.end(), 0);
    do {
      used[col0] = 1;
      const std::size_t r = row_of_col[col0];
      double delta = kInf;
      std::size_t col1 = 0;
      for (std::size_t c = 1; c <= n; ++c) {
        if (used[c]) continue;
        const double reduced = cost[(r - 1) * n + (c - 1)] - u[r] - v[c];
        if (reduced < minv[c]) {
          minv[c] = reduced;
          way[c] = col0;
        }
        if (minv[c] < delta) {
          delta = minv[c];
          col1 = c;
        }
      }
      if (col1 == 0) throw SolverError("assignment: no augmenting column (non-finite costs?)");
      for (std::size_t c = 0; c <= n; ++c) {
        if (used[c]) {
          u[row_of_col[c]] += delta;
          v[c] -= delta;
        } else {
          minv[c] -= delta;
        }
      }
      col0 = col1;
    } while (row_of_col[col0] != 0);
    do {
      const std::size_t prev = way[col0];
      row_of_col[col0] = row_of_col[prev];
      col0 = prev;
    } while (col0 != 0);
  }

  Assignment out;
  out.column_of_row.assign(n, -1);
  for (std::size_t c = 1; c <= n; ++c) out.column_of_row[row_of_col[c] - 1] = static_cast<int>(c - 1);
  for (std::size_t r = 0; r < n; ++r) out.cost += cost[r * n + static_cast<std::size_t>(out.column_of_row[r])];
  return out;
}

double solve_transport(std::span<const double> cost, std::span<const std::int64_t> supply,
                       std::span<const std::int64_t> demand) {
  const std::size_t n = supply.size(), m = demand.size();
  if (n == 0 || m == 0) throw InvalidArgument("transport: empty side");
  if (cost.size() != n * m) throw InvalidArgument("transport: cost matrix must be supply x demand");
  if (std::any_of(supply.begin(), supply.end(), [](auto s) { return s < 0; }) ||
      std::any_of(demand.begin(), demand.end(), [](auto d) { return d < 0; })) {
    throw InvalidArgument("transport: negative mass");
  }
  const auto total = std::accumulate(supply.begin(), supply.end(), std::int64_t{0});
  if (total != std::accumulate(demand.begin(), demand.end(), std::int64_t{0})) {
    throw InvalidArgument("transport: supply and demand totals differ");
  }

  constexpr double kInf = std::numeric_limits<double>::infinity();
  std::vector<std::int64_t> left(supply.begin(), supply.end()), need(demand.begin(), demand.end());
  std::vector<std::int64_t> flow(n * m, 0);
  // Nodes 0..n-1 are sources, n..n+m-1 sinks. Potentials keep reduced costs
  // nonnegative so Dijkstra applies after every augmentation.
  const std::size_t nodes = n + m;
  std::vector<double> pot(nodes, 0.0), dist(nodes);
  std::vector<std::size_t> parent(nodes);
  std::vector<char> done(nodes);
  const double min_cost = *std::min_element(cost.begin(), cost.end());
  for (std::size_t j = 0; j < m; ++j) pot[n + j] = min_cost;

  std::int64_t shipped = 0;
  const std::size_t budget = 4 * nodes * nodes + 64;
  for (std::size_t iter = 0; shipped < total; ++iter) {
    if (iter >= budget) throw SolverError("transport: augmentation budget exhausted before optimality");
    std::fill(dist.begin(), dist.end(), kInf);
    std::fill(done.begin(), done.end(), 0);
    for (std::size_t i = 0; i < n; ++i) {
      if (left[i] > 0) {
        dist[i] = 0.0;
        parent[i] = i;
      }
    }
    std::size_t target = nodes;
    for (;;) {
      std::size_t best = nodes;
      for (std::size_t v = 0; v < nodes; ++v) {
        if (!done[v] && dist[v] < kInf && (best == nodes || dist[v] < dist[best])) best = v;
      }
      if (best == nodes) break;
      done[best] = 1;
      if (best >= n && need[best - n] > 0) {
        target = best;
        break;
      }
      if (best < n) {
        for (std::size_t j = 0; j < m; ++j) {
          const std::size_t v = n + j;
          if (done[v]) continue;
          const double nd = dist[best] + std::max(0.0, cost[best * m + j] + pot[best] - pot[v]);
          if (nd < dist[v]) {
            dist[v] = nd;
            parent[v] = best;
          }
        }
      } else {
        const std::size_t j = best - n;
        for (std::size_t i = 0; i < n; ++i) {
          if (done[i] || flow[i * m + j] == 0) continue;
          const double nd = dist[best] + std::max(0.0, -cost[i * m + j] + pot[best] - pot[i]);
          if (nd < dist[i]) {
            dist[i] = nd;
            parent[i] = best;
          }
        }
      }
    }
    if (target == nodes) throw SolverError("transport: no augmenting path with unmet demand");

    const double reach = dist[target];
    for (std::size_t v = 0; v < nodes; ++v) pot[v] += std::min(dist[v], reach);

    std::int64_t push = need[target - n];
    std::size_t v = target;
    while (parent[v] != v) {
      const std::size_t u = parent[v];
      if (u >= n) push = std::min(push, flow[v * m + (u - n)]);
      v = u;
    }
    push = std::min(push, left[v]);
    need[target - n] -= push;
    left[v] -= push;
    v = target;
    while (parent[v] != v) {
      const std::size_t u = parent[v];
      if (u < n) {
        flow[u * m + (v - n)] += push;
      } else {
        flow[v * m + (u - n)] -= push;
      }
      v = u;
    }
    shipped += push;
  }

  double total_cost = 0.0;
  for (std::size_t k = 0; k < flow.size(); ++k) total_cost += static_cast<double>(flow[k]) * cost[k];
  return total_cost;
}

namespace {

std::vector<double> squared_distances(const std::vector<Point2>& p, const std::vector<Point2>& q) {
  std::vector<double> c(p.size() * q.size());
  for (std::size_t i = 0; i < p.size(); ++i) {
    for (std::size_t j = 0; j < q.size(); ++j) {
      const double dx = p[i].x - q[j].x, dy = p[i].y - q[j].y;
      c[i * q.size() + j] = dx * dx + dy * dy;
    }
  }
  return c;
}

double w2_points(const std::vector<Point2>& p, const std::vector<Point2>& q) {
  const auto n = p.size(), m = q.size();
  const auto c = squared_distances(p, q);
  double mean_sq;
  if (n == m) {
    mean_sq = solve_assignment(c, n).cost / static_cast<double>(n);
  } else {
    const auto g = std::gcd(n, m);
    const std::vector<std::int64_t> supply(n, static_cast<std::int64_t>(m / g));
    const std::vector<std::int64_t> demand(m, static_cast<std::int64_t>(n / g));
    mean_sq = solve_transport(c, supply, demand) / (static_cast<double>(n) * static_cast<double>(m / g));
  }
  return std::sqrt(std::max(0.0, mean_sq));
}

}  // namespace

double w2(const EmpiricalJoint& p, const EmpiricalJoint& q) {
  p.validate();
  q.validate();
  return w2_points(p.points, q.points);
}

std::vector<double> uniform_edges(std::size_t bins, double lo, double hi) {
  if (bins == 0 || !(hi > lo)) throw InvalidArgument("uniform_edges: need bins >= 1 and hi > lo");
  std::vector<double> e(bins + 1);
  for (std::size_t k = 0; k <= bins; ++k) e[k] = lo + (hi - lo) * static_cast<double>(k) / static_cast<double>(bins);
  e.back() = hi;
  return e;
}

BinnedSamples bin_by_rho(const std::vector<MorphologySample>& samples, std::span<const double> edges,
                         std::size_t min_count) {
  if (edges.size() < 2) throw InvalidArgument("need at least two bin edges");
  for (std::size_t k = 1; k < edges.size(); ++k) {
    if (!(edges[k] > edges[k - 1])) throw InvalidArgument("bin edges must be strictly increasing");
  }
  if (edges.front() > kRhoMin || edges.back() < kRhoMax) {
    throw InvalidArgument("bin edges must cover [0.35, 0.65]");
  }
  BinnedSamples out;
  out.edges.assign(edges.begin(), edges.end());
  out.bins.resize(edges.size() - 1);
  for (const auto& s : samples) {
    if (!(s.rho >= edges.front() && s.rho <= edges.back())) {
      throw InvalidArgument("sample rho " + std::to_string(s.rho) + " outside the bin edges");
    }
    auto k = static_cast<std::size_t>(std::upper_bound(edges.begin(), edges.end(), s.rho) - edges.begin()) - 1;
    k = std::min(k, out.bins.size() - 1);
    out.bins[k].push_back({static_cast<double>(s.area), static_cast<double>(s.boundary_length)});
  }
  for (std::size_t k = 0; k < out.bins.size(); ++k) {
    if (out.bins[k].size() < min_count) out.underpopulated.push_back(k);
  }
  return out;
}

namespace {

struct Prepared {
  BinnedSamples model;
  BinnedSamples reference;
  std::vector<double> weights;
};

Prepared prepare(const std::vector<MorphologySample>& model, const std::vector<MorphologySample>& reference,
                 std::span<const double> edges, const EwdOptions& opts) {
  Prepared p{bin_by_rho(model, edges, opts.min_count), bin_by_rho(reference, edges, opts.min_count), {}};
  auto complain = [](const char* side, const BinnedSamples& b) {
    if (b.underpopulated.empty()) return;
    std::string msg = std::string(side) + " bins below the minimum count:";
    for (auto k : b.underpopulated) msg += " " + std::to_string(k) + "(" + std::to_string(b.bins[k].size()) + ")";
    throw UnderpopulatedBin(msg);
  };
  complain("model", p.model);
  complain("reference", p.reference);

  if (opts.standardize) {
    double sx = 0, sy = 0, n = 0;
    for (const auto& bin : p.reference.bins)
      for (const auto& q : bin) sx += q.x, sy += q.y, n += 1;
    const double mx = sx / n, my = sy / n;
    double vx = 0, vy = 0;
    for (const auto& bin : p.reference.bins)
      for (const auto& q : bin) vx += (q.x - mx) * (q.x - mx), vy += (q.y - my) * (q.y - my);
    double sdx = std::sqrt(vx / n), sdy = std::sqrt(vy / n);
    if (sdx == 0) sdx = 1;
    if (sdy == 0) sdy = 1;
    for (auto* b : {&p.model, &p.reference})
      for (auto& bin : b->bins)
        for (auto& q : bin) q = {(q.x - mx) / sdx, (q.y - my) / sdy};
  }

  const double span_width = edges.back() - edges.front();
  for (std::size_t k = 0; k + 1 < edges.size(); ++k) p.weights.push_back((edges[k + 1] - edges[k]) / span_width);
  return p;
}

double aggregate(const std::vector<std::vector<Point2>>& model, const std::vector<std::vector<Point2>>& reference,
                 const std::vector<double>& weights, std::vector<double>* per_bin) {
  double total = 0.0;
  for (std::size_t k = 0; k < weights.size(); ++k) {
    const double w = w2_points(model[k], reference[k]);
    if (per_bin) per_bin->push_back(w);
    total += weights[k] * w;
  }
  return total;
}

double quantile(std::vector<double> v, double q) {
  std::sort(v.begin(), v.end());
  const double pos = q * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

}  // namespace

EwdReport ewd(const std::vector<MorphologySample>& model, const std::vector<MorphologySample>& reference,
              std::span<const double> edges, const EwdOptions& opts) {
  const auto p = prepare(model, reference, edges, opts);
  EwdReport r;
  r.bin_edges = p.model.edges;
  r.weights = p.weights;
  r.standardized = opts.standardize;
  for (std::size_t k = 0; k < p.weights.size(); ++k) {
    r.model_counts.push_back(p.model.bins[k].size());
    r.reference_counts.push_back(p.reference.bins[k].size());
  }
  r.ewd = aggregate(p.model.bins, p.reference.bins, p.weights, &r.per_bin_w2);
  return r;
}

ConfidenceInterval bootstrap_ci(const std::vector<MorphologySample>& model,
                                const std::vector<MorphologySample>& reference, std::span<const double> edges,
                                std::size_t resamples, std::uint64_t seed, const EwdOptions& opts) {
  if (resamples < 100) throw InvalidArgument("bootstrap needs at least 100 resamples");
  const auto p = prepare(model, reference, edges, opts);
  const double point = aggregate(p.model.bins, p.reference.bins, p.weights, nullptr);
  const KeyedRng rng(seed);

  std::vector<double> stats;
  stats.reserve(resamples);
  std::vector<std::vector<Point2>> mb(p.weights.size()), rb(p.weights.size());
  for (std::size_t r = 0; r < resamples; ++r) {
    std::uint64_t draw = 0;
    auto resample = [&](const std::vector<Point2>& src, std::vector<Point2>& dst) {
      dst.resize(src.size());
      for (auto& q : dst) {
        const auto pick = static_cast<std::size_t>(rng.uniform(r, draw++) * static_cast<double>(src.size()));
        q = src[std::min(pick, src.size() - 1)];
      }
    };
    for (std::size_t k = 0; k < p.weights.size(); ++k) {
      resample(p.model.bins[k], mb[k]);
      resample(p.reference.bins[k], rb[k]);
    }
    stats.push_back(aggregate(mb, rb, p.weights, nullptr));
  }
  ConfidenceInterval ci;
  ci.low = std::max(0.0, 2.0 * point - quantile(stats, 0.975));
  ci.high = std::max(0.0, 2.0 * point - quantile(stats, 0.025));
  ci.resamples = resamples;
  ci.seed = seed;
  return ci;
}

std::string EwdReport::to_json() const {
  nlohmann::ordered_json j;
  j["bin_edges"] = bin_edges;
  j["weights"] = weights;
  j["per_bin_w2"] = per_bin_w2;
  j["per_bin_counts"] = {{"model", model_counts}, {"reference", reference_counts}};
  j["ewd"] = ewd;
  j["standardized"] = standardized;
  if (ci) {
    j["ci"] = {{"low", ci->low}, {"high", ci->high}, {"level", 0.95}, {"resamples", ci->resamples}, {"seed", ci->seed}};
  }
  return j.dump(2);
}

}  // namespace cgne
