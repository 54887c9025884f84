#include "rwot/transport.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <cstdint>
#include <numeric>
#include <vector>

namespace rwot {

Eigen::Index TransportPlan::support_size() const { return (mass.array() > 0.0).count(); }

namespace {

double lq_distance_pow(const VectorRef& x, const VectorRef& y, const LqCost& c) {
  const Eigen::ArrayXd diff = (x - y).array().abs();
  double norm = 0.0;
  if (std::isinf(c.q)) {
    norm = diff.maxCoeff();
  } else if (c.q == 2.0) {
    norm = std::sqrt(diff.square().sum());
  } else if (c.q == 1.0) {
    norm = diff.sum();
  } else {
    norm = std::pow(diff.pow(c.q).sum(), 1.0 / c.q);
  }
  if (c.p == 1.0) return norm;
  if (c.p == 2.0 && c.q == 2.0) return diff.square().sum();
  return std::pow(norm, c.p);
}

}  // namespace

Matrix cost_matrix(const CostSpec& spec, const DiscreteDistribution& p,
                   const DiscreteDistribution& q) {
  if (p.dim() != q.dim()) fail(ErrorCode::kInvalidArgument, "distributions differ in dimension");
  Matrix c(p.size(), q.size());
  if (const auto* gen = std::get_if<ConvexGenerator>(&spec)) {
    p.require_in_domain(*gen);
    q.require_in_domain(*gen);
    for (Eigen::Index i = 0; i < p.size(); ++i) {
      const Vector x = p.point(i);
      for (Eigen::Index j = 0; j < q.size(); ++j) c(i, j) = bregman_divergence(*gen, x, q.point(j));
    }
  } else {
    const auto& lq = std::get<LqCost>(spec);
    if (!(lq.p >= 1.0) || !(lq.q >= 1.0))
      fail(ErrorCode::kInvalidArgument, "Wasserstein order p and norm index q must be >= 1");
    for (Eigen::Index i = 0; i < p.size(); ++i) {
      const Vector x = p.point(i);
      for (Eigen::Index j = 0; j < q.size(); ++j) c(i, j) = lq_distance_pow(x, q.point(j), lq);
    }
  }
  return c;
}

bool CertificateCheck::ok(double primal) const {
  return max_violation <= 1e-9 && gap <= 1e-9 * (1.0 + std::abs(primal));
}

CertificateCheck check_certificate(const Matrix& cost, const Vector& a, const Vector& b,
                                   const TransportSolution& sol) {
  CertificateCheck check;
  for (Eigen::Index i = 0; i < cost.rows(); ++i) {
    for (Eigen::Index j = 0; j < cost.cols(); ++j) {
      check.max_violation =
          std::max(check.max_violation, sol.dual.u[i] + sol.dual.v[j] - cost(i, j));
    }
  }
  const double primal = (sol.plan.mass.array() * cost.array()).sum();
  check.gap = std::abs(primal - (a.dot(sol.dual.u) + b.dot(sol.dual.v)));
  return check;
}

TransportSolution solve_distributions(const CostSpec& spec, const DiscreteDistribution& p,
                                      const DiscreteDistribution& q) {
  return solve_transport(cost_matrix(spec, p, q), p.weights(), q.weights());
}

double rw_divergence(const ConvexGenerator& gen, const DiscreteDistribution& p,
                     const DiscreteDistribution& q) {
  return solve_distributions(gen, p, q).objective;
}

double wasserstein_p_lq(const DiscreteDistribution& p, const DiscreteDistribution& q,
                        double order_p, double norm_q) {
  const double obj = solve_distributions(LqCost{order_p, norm_q}, p, q).objective;
  return std::pow(std::max(obj, 0.0), 1.0 / order_p);
}

double tv_distance(const DiscreteDistribution& p, const DiscreteDistribution& q) {
  if (p.dim() != q.dim()) fail(ErrorCode::kInvalidArgument, "distributions differ in dimension");
  double sum = 0.0;
  std::vector<char> matched(static_cast<size_t>(q.size()), 0);
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    const Eigen::Index j = find_atom(q, p.point(i));
    if (j >= 0) {
      matched[j] = 1;
      sum += std::abs(p.weight(i) - q.weight(j));
    } else {
      sum += p.weight(i);
    }
  }
  for (Eigen::Index j = 0; j < q.size(); ++j)
    if (!matched[j]) sum += q.weight(j);
  return std::min(1.0, 0.5 * sum);
}

DiscreteDistribution pushforward_grad(const ConvexGenerator& gen, const DiscreteDistribution& q) {
  q.require_in_domain(gen);
  PointMatrix pts(q.size(), q.dim());
  for (Eigen::Index j = 0; j < q.size(); ++j) pts.row(j) = gen.grad(q.point(j)).transpose();
  return DiscreteDistribution(pts, q.weights());
}

// ---------------------------------------------------------------------------
// Enumeration oracle

namespace {

constexpr Eigen::Index kBruteForceMax = 6;

bool all_equal(const Vector& w, double value) {
  return ((w.array() - value).abs() <= 1e-15).all();
}

double min_over_permutations(const Matrix& cost) {
  const int n = static_cast<int>(cost.rows());
  std::vector<int> perm(static_cast<size_t>(n));
  std::iota(perm.begin(), perm.end(), 0);
  double best = std::numeric_limits<double>::infinity();
  do {
    double s = 0.0;
    for (int i = 0; i < n; ++i) s += cost(i, perm[i]);
    best = std::min(best, s);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best / n;
}

// Enumerates every feasible basis of the transportation polytope. A basis is
// a spanning tree of K_{n,m} (bitmask over cells); its flow follows from
// repeated leaf elimination. The set of feasible bases is connected under
// simplex pivots, including degenerate ones, so a graph search from the
// northwest-corner basis that tries every entering cell and every tied
// leaving cell visits all of them.
class BasisEnumerator {
 public:
  BasisEnumerator(const Matrix& cost, const Vector& a, const Vector& b)
      : a_(a), b_(b), n_(static_cast<int>(a.size())), m_(static_cast<int>(b.size())) {
    for (int i = 0; i < n_; ++i)
      for (int j = 0; j < m_; ++j) flat_cost_[i * m_ + j] = cost(i, j);
  }

  double run() {
    std::vector<std::uint64_t> stack = {northwest_corner()};
    seen_.insert(stack.front());
    double best = std::numeric_limits<double>::infinity();
    int minus[2 * kMaxSide];
    while (!stack.empty()) {
      const std::uint64_t tree = stack.back();
      stack.pop_back();
      load(tree);
      double value = 0.0;
      for (int e = 0; e < n_ * m_; ++e)
        if (tree >> e & 1U) value += flat_cost_[e] * flow_[e];
      best = std::min(best, value);
      for (int e = 0; e < n_ * m_; ++e) {
        if (tree >> e & 1U) continue;
        // Along the cycle path from column j to row i the tree cells
        // alternate -,+,-,...; the path has odd length, so counted from
        // either end the minus cells sit at even steps.
        double theta = std::numeric_limits<double>::infinity();
        int count = 0;
        int u = n_ + e % m_, v = e / m_;
        int su = 0, sv = 0;
        while (u != v) {
          if (depth_[u] >= depth_[v]) {
            if ((su++ & 1) == 0) {
              minus[count++] = up_cell_[u];
              theta = std::min(theta, flow_[up_cell_[u]]);
            }
            u = parent_[u];
          } else {
            if ((sv++ & 1) == 0) {
              minus[count++] = up_cell_[v];
              theta = std::min(theta, flow_[up_cell_[v]]);
            }
            v = parent_[v];
          }
        }
        for (int k = 0; k < count; ++k) {
          if (flow_[minus[k]] > theta + kTie) continue;
          const std::uint64_t next =
              (tree | (std::uint64_t{1} << e)) & ~(std::uint64_t{1} << minus[k]);
          if (seen_.insert(next)) stack.push_back(next);
        }
      }
    }
    return best;
  }

 private:
  static constexpr int kMaxSide = 6;
  static constexpr double kTie = 1e-15;

  std::uint64_t northwest_corner() const {
    std::vector<double> ra(a_.data(), a_.data() + n_), rb(b_.data(), b_.data() + m_);
    std::uint64_t tree = 0;
    int i = 0, j = 0;
    while (i < n_ && j < m_) {
      tree |= std::uint64_t{1} << (i * m_ + j);
      const double x = std::min(ra[i], rb[j]);
      ra[i] -= x;
      rb[j] -= x;
      if (i == n_ - 1) {
        ++j;
      } else if (j == m_ - 1) {
        ++i;
      } else if (ra[i] <= rb[j]) {
        ++i;
      } else {
        ++j;
      }
    }
    return tree;
  }

  int cell(int u, int v) const { return u < n_ ? u * m_ + (v - n_) : v * m_ + (u - n_); }

  // Flow by leaf elimination, then parent pointers rooted at row 0.
  void load(std::uint64_t tree) {
    const int k = n_ + m_;
    int degree[2 * kMaxSide] = {};
    double rem[2 * kMaxSide];
    for (int v = 0; v < k; ++v) adj_[v] = 0;
    for (int i = 0; i < n_; ++i) rem[i] = a_[i];
    for (int j = 0; j < m_; ++j) rem[n_ + j] = b_[j];
    for (int e = 0; e < n_ * m_; ++e) {
      if (!(tree >> e & 1U)) continue;
      const int r = e / m_, c = n_ + e % m_;
      adj_[r] |= 1U << c;
      adj_[c] |= 1U << r;
      ++degree[r];
      ++degree[c];
    }
    unsigned live[2 * kMaxSide];
    for (int v = 0; v < k; ++v) live[v] = adj_[v];
    int leaves[2 * kMaxSide];
    int top = 0;
    for (int v = 0; v < k; ++v)
      if (degree[v] == 1) leaves[top++] = v;
    while (top > 0) {
      const int leaf = leaves[--top];
      if (degree[leaf] != 1) continue;
      const int other = __builtin_ctz(live[leaf]);
      flow_[cell(leaf, other)] = rem[leaf];
      rem[other] -= rem[leaf];
      degree[leaf] = 0;
      live[other] &= ~(1U << leaf);
      live[leaf] = 0;
      if (--degree[other] == 1) leaves[top++] = other;
    }

    int queue[2 * kMaxSide];
    int head = 0, tail = 0;
    for (int v = 0; v < k; ++v) depth_[v] = -1;
    queue[tail++] = 0;
    depth_[0] = 0;
    parent_[0] = -1;
    while (head < tail) {
      const int v = queue[head++];
      for (unsigned rest = adj_[v]; rest != 0; rest &= rest - 1) {
        const int w = __builtin_ctz(rest);
        if (depth_[w] >= 0) continue;
        depth_[w] = depth_[v] + 1;
        parent_[w] = v;
        up_cell_[w] = cell(w, v);
        queue[tail++] = w;
      }
    }
  }

  const Vector& a_;
  const Vector& b_;
  int n_;
  int m_;
  double flat_cost_[kMaxSide * kMaxSide] = {};
  int up_cell_[2 * kMaxSide] = {};
  unsigned adj_[2 * kMaxSide] = {};
  int parent_[2 * kMaxSide] = {};
  int depth_[2 * kMaxSide] = {};
  double flow_[kMaxSide * kMaxSide] = {};
  // Open-addressing set of visited trees; a tree mask is never zero.
  class TreeSet {
   public:
    TreeSet() : slots_(1U << 12, 0) {}
    bool insert(std::uint64_t key) {
      if (2 * (size_ + 1) > slots_.size()) grow();
      return place(slots_, key);
    }
    std::size_t size() const { return size_; }

   private:
    static std::uint64_t mix(std::uint64_t x) {
      x ^= x >> 31;
      x *= 0x7fb5d329728ea185ULL;
      x ^= x >> 27;
      x *= 0x81dadef4bc2dd44dULL;
      return x ^ (x >> 33);
    }
    bool place(std::vector<std::uint64_t>& slots, std::uint64_t key) {
      const std::size_t mask = slots.size() - 1;
      for (std::size_t h = mix(key) & mask;; h = (h + 1) & mask) {
        if (slots[h] == key) return false;
        if (slots[h] == 0) {
          slots[h] = key;
          ++size_;
          return true;
        }
      }
    }
    void grow() {
      std::vector<std::uint64_t> bigger(slots_.size() * 2, 0);
      size_ = 0;
      for (std::uint64_t key : slots_)
        if (key != 0) place(bigger, key);
      slots_.swap(bigger);
    }
    std::vector<std::uint64_t> slots_;
    std::size_t size_ = 0;
  };

  TreeSet seen_;
};

}  // namespace

double brute_force_transport(const Matrix& cost, const Vector& a, const Vector& b) {
  const Eigen::Index n = a.size();
  const Eigen::Index m = b.size();
  if (n > kBruteForceMax || m > kBruteForceMax)
    fail(ErrorCode::kTooLarge, "brute-force transport is limited to 6 x 6 instances");
  if (n == 0 || m == 0) fail(ErrorCode::kInvalidArgument, "empty marginal");
  if (cost.rows() != n || cost.cols() != m)
    fail(ErrorCode::kInvalidArgument, "cost matrix shape does not match the marginals");
  if (std::abs(a.sum() - b.sum()) > 1e-10) fail(ErrorCode::kUnbalanced, "marginal totals differ");
  if (n == m && all_equal(a, 1.0 / n) && all_equal(b, 1.0 / m)) return min_over_permutations(cost);
  return BasisEnumerator(cost, a, b).run();
}

}  // namespace rwot
