// Network simplex for the balanced transportation problem.
//
// The graph has one node per source atom, one per target atom and an
// artificial root. Every source starts with an arc to the root carrying its
// supply and every target with an arc from the root carrying its demand, so
// the initial tree is strongly feasible. The leaving arc is picked with
// Cunningham's rule (last blocking arc along the cycle orientation starting
// at the apex), which keeps the tree strongly feasible and rules out cycling
// on degenerate pivots; it is the combinatorial form of lexicographic
// perturbation of the supplies. Pricing is block search, with a Bland-rule
// fallback after a long run of degenerate pivots.

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <vector>

#include "rwot/transport.hpp"

namespace rwot {

namespace {

constexpr signed char kUp = 1;     // tree arc points from the node to its parent
constexpr signed char kDown = -1;  // tree arc points from the parent to the node

class NetworkSimplex {
 public:
  NetworkSimplex(const Matrix& cost, const Vector& a, const Vector& b)
      : n_(static_cast<int>(a.size())),
        m_(static_cast<int>(b.size())),
        node_count_(n_ + m_ + 1),
        root_(n_ + m_),
        original_arcs_(static_cast<long>(n_) * m_) {
    const long arcs = original_arcs_ + n_ + m_;
    src_.resize(arcs);
    dst_.resize(arcs);
    cost_.resize(arcs);
    flow_.assign(arcs, 0.0);
    in_tree_.assign(arcs, 0);

    double max_cost = 0.0;
    for (int i = 0; i < n_; ++i) {
      for (int j = 0; j < m_; ++j) {
        const long e = static_cast<long>(i) * m_ + j;
        src_[e] = i;
        dst_[e] = n_ + j;
        cost_[e] = cost(i, j);
        max_cost = std::max(max_cost, std::abs(cost_[e]));
      }
    }
    const double art = (max_cost + 1.0) * node_count_;
    tree_adj_.assign(node_count_, {});
    for (int i = 0; i < n_; ++i) {
      const long e = original_arcs_ + i;
      src_[e] = i;
      dst_[e] = root_;
      cost_[e] = 0.0;
      flow_[e] = a[i];
      add_tree_arc(e);
    }
    for (int j = 0; j < m_; ++j) {
      const long e = original_arcs_ + n_ + j;
      src_[e] = root_;
      dst_[e] = n_ + j;
      cost_[e] = art;
      flow_[e] = b[j];
      add_tree_arc(e);
    }
    // Pricing tolerance relative to the largest potential magnitude.
    tolerance_ = 1e-14 * art;
    parent_.assign(node_count_, -1);
    pred_.assign(node_count_, -1);
    depth_.assign(node_count_, 0);
    dir_.assign(node_count_, 0);
    pi_.assign(node_count_, 0.0);
    block_size_ = std::max<long>(10, static_cast<long>(std::sqrt(static_cast<double>(arcs))));
    rebuild_tree();
  }

  void run() {
    const long arcs = static_cast<long>(cost_.size());
    const long max_pivots = 1000L * node_count_ + 100000L;
    long degenerate_run = 0;
    const long bland_threshold = 2L * node_count_;
    while (true) {
      const long in = degenerate_run > bland_threshold ? find_entering_bland(arcs)
                                                       : find_entering_block(arcs);
      if (in < 0) break;
      if (++pivots_ > max_pivots) fail(ErrorCode::kInvalidArgument, "network simplex did not converge");
      const double delta = pivot(in);
      degenerate_run = delta > 0.0 ? 0 : degenerate_run + 1;
    }
  }

  long pivots() const { return pivots_; }
  double flow(int i, int j) const { return flow_[static_cast<long>(i) * m_ + j]; }
  // Potentials mapped to the transportation dual: u_i = -pi_i, v_j = pi_{n+j}.
  double u(int i) const { return -pi_[i]; }
  double v(int j) const { return pi_[n_ + j]; }

  double artificial_flow() const {
    double s = 0.0;
    for (long e = original_arcs_; e < static_cast<long>(flow_.size()); ++e) s += flow_[e];
    return s;
  }

 private:
  double reduced_cost(long e) const { return cost_[e] + pi_[src_[e]] - pi_[dst_[e]]; }

  void add_tree_arc(long e) {
    in_tree_[e] = 1;
    tree_adj_[src_[e]].push_back(e);
    tree_adj_[dst_[e]].push_back(e);
  }

  void remove_tree_arc(long e) {
    in_tree_[e] = 0;
    for (int node : {src_[e], dst_[e]}) {
      auto& adj = tree_adj_[node];
      adj.erase(std::find(adj.begin(), adj.end(), e));
    }
  }

  // Recomputes parent pointers, depths and potentials from the root.
  void rebuild_tree() {
    std::fill(depth_.begin(), depth_.end(), -1);
    stack_.clear();
    stack_.push_back(root_);
    depth_[root_] = 0;
    parent_[root_] = -1;
    pred_[root_] = -1;
    pi_[root_] = 0.0;
    while (!stack_.empty()) {
      const int u = stack_.back();
      stack_.pop_back();
      for (long e : tree_adj_[u]) {
        const int w = src_[e] == u ? dst_[e] : src_[e];
        if (depth_[w] >= 0) continue;
        depth_[w] = depth_[u] + 1;
        parent_[w] = u;
        pred_[w] = e;
        if (src_[e] == w) {
          dir_[w] = kUp;
          pi_[w] = pi_[u] - cost_[e];
        } else {
          dir_[w] = kDown;
          pi_[w] = pi_[u] + cost_[e];
        }
        stack_.push_back(w);
      }
    }
  }

  long find_entering_block(long arcs) {
    double best = -tolerance_;
    long best_arc = -1;
    long scanned = 0;
    long e = next_arc_;
    while (scanned < arcs) {
      const long block_end = std::min(scanned + block_size_, arcs);
      for (; scanned < block_end; ++scanned) {
        if (!in_tree_[e]) {
          const double rc = reduced_cost(e);
          if (rc < best) {
            best = rc;
            best_arc = e;
          }
        }
        if (++e == arcs) e = 0;
      }
      if (best_arc >= 0) {
        next_arc_ = e;
        return best_arc;
      }
    }
    return -1;
  }

  long find_entering_bland(long arcs) {
    for (long e = 0; e < arcs; ++e) {
      if (!in_tree_[e] && reduced_cost(e) < -tolerance_) return e;
    }
    return -1;
  }

  int find_join(int u, int v) const {
    while (u != v) {
      if (depth_[u] > depth_[v]) {
        u = parent_[u];
      } else if (depth_[v] > depth_[u]) {
        v = parent_[v];
      } else {
        u = parent_[u];
        v = parent_[v];
      }
    }
    return u;
  }

  // Pushes the maximal flow around the cycle closed by `in` and swaps the
  // blocking arc out of the tree. Returns the amount pushed.
  double pivot(long in) {
    const int first = src_[in];
    const int second = dst_[in];
    const int join = find_join(first, second);

    // Flow runs join -> first along the first path, so arcs pointing up lose
    // flow there; along the second path it runs second -> join.
    double delta = std::numeric_limits<double>::infinity();
    int out_node = -1;
    for (int u = first; u != join; u = parent_[u]) {
      if (dir_[u] == kUp && flow_[pred_[u]] < delta) {
        delta = flow_[pred_[u]];
        out_node = u;
      }
    }
    for (int u = second; u != join; u = parent_[u]) {
      if (dir_[u] == kDown && flow_[pred_[u]] <= delta) {
        delta = flow_[pred_[u]];
        out_node = u;
      }
    }
    if (out_node < 0) fail(ErrorCode::kInvalidArgument, "unbounded transportation cycle");

    const long out = pred_[out_node];
    if (delta > 0.0) {
      flow_[in] += delta;
      for (int u = first; u != join; u = parent_[u]) flow_[pred_[u]] -= dir_[u] * delta;
      for (int u = second; u != join; u = parent_[u]) flow_[pred_[u]] += dir_[u] * delta;
    }
    flow_[out] = 0.0;
    remove_tree_arc(out);
    add_tree_arc(in);
    rebuild_tree();
    return delta;
  }

  int n_;
  int m_;
  int node_count_;
  int root_;
  long original_arcs_;
  std::vector<int> src_;
  std::vector<int> dst_;
  std::vector<double> cost_;
  std::vector<double> flow_;
  std::vector<char> in_tree_;
  std::vector<std::vector<long>> tree_adj_;
  std::vector<int> parent_;
  std::vector<long> pred_;
  std::vector<int> depth_;
  std::vector<signed char> dir_;
  std::vector<double> pi_;
  std::vector<int> stack_;
  double tolerance_ = 0.0;
  long block_size_ = 10;
  long next_arc_ = 0;
  long pivots_ = 0;
};

}  // namespace

TransportSolution solve_transport(const Matrix& cost, const Vector& a, const Vector& b) {
  const Eigen::Index n = a.size();
  const Eigen::Index m = b.size();
  if (n == 0 || m == 0) fail(ErrorCode::kInvalidArgument, "empty marginal");
  if (cost.rows() != n || cost.cols() != m)
    fail(ErrorCode::kInvalidArgument, "cost matrix shape does not match the marginals");
  if (!cost.allFinite()) fail(ErrorCode::kInvalidArgument, "cost matrix has non-finite entries");
  if (!a.allFinite() || !b.allFinite() || (a.array() < 0.0).any() || (b.array() < 0.0).any())
    fail(ErrorCode::kInvalidArgument, "marginals must be finite and nonnegative");
  const double sa = a.sum();
  const double sb = b.sum();
  if (std::abs(sa - sb) > 1e-10) {
    std::ostringstream os;
    os.precision(17);
    os << "marginal totals differ: " << sa << " vs " << sb;
    fail(ErrorCode::kUnbalanced, os.str());
  }
  if (!(sa > 0.0)) fail(ErrorCode::kInvalidArgument, "marginals carry no mass");

  // Zero-mass atoms are dropped from the graph and get potentials afterwards.
  std::vector<int> rows, cols;
  for (Eigen::Index i = 0; i < n; ++i)
    if (a[i] > 0.0) rows.push_back(static_cast<int>(i));
  for (Eigen::Index j = 0; j < m; ++j)
    if (b[j] > 0.0) cols.push_back(static_cast<int>(j));
  const auto rn = static_cast<Eigen::Index>(rows.size());
  const auto cm = static_cast<Eigen::Index>(cols.size());
  Matrix sub_cost(rn, cm);
  Vector sub_a(rn), sub_b(cm);
  for (Eigen::Index r = 0; r < rn; ++r) sub_a[r] = a[rows[r]];
  for (Eigen::Index c = 0; c < cm; ++c) sub_b[c] = b[cols[c]] * (sa / sb);
  for (Eigen::Index r = 0; r < rn; ++r)
    for (Eigen::Index c = 0; c < cm; ++c) sub_cost(r, c) = cost(rows[r], cols[c]);

  NetworkSimplex simplex(sub_cost, sub_a, sub_b);
  simplex.run();

  TransportSolution sol;
  sol.pivots = simplex.pivots();
  sol.plan.mass = Matrix::Zero(n, m);
  sol.dual.u = Vector::Zero(n);
  sol.dual.v = Vector::Zero(m);
  for (Eigen::Index r = 0; r < rn; ++r) {
    sol.dual.u[rows[r]] = simplex.u(static_cast<int>(r));
    for (Eigen::Index c = 0; c < cm; ++c)
      sol.plan.mass(rows[r], cols[c]) = simplex.flow(static_cast<int>(r), static_cast<int>(c));
  }
  for (Eigen::Index c = 0; c < cm; ++c) sol.dual.v[cols[c]] = simplex.v(static_cast<int>(c));
  // Normalize so the first active source has u = 0.
  const double shift = sol.dual.u[rows.front()];
  for (int r : rows) sol.dual.u[r] -= shift;
  for (int c : cols) sol.dual.v[c] += shift;
  std::vector<char> row_active(static_cast<size_t>(n), 0), col_active(static_cast<size_t>(m), 0);
  for (int r : rows) row_active[r] = 1;
  for (int c : cols) col_active[c] = 1;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (row_active[i]) continue;
    double best = std::numeric_limits<double>::infinity();
    for (int c : cols) best = std::min(best, cost(i, c) - sol.dual.v[c]);
    sol.dual.u[i] = best;
  }
  for (Eigen::Index j = 0; j < m; ++j) {
    if (col_active[j]) continue;
    double best = std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < n; ++i) best = std::min(best, cost(i, j) - sol.dual.u[i]);
    sol.dual.v[j] = best;
  }

  sol.objective = (sol.plan.mass.array() * cost.array()).sum();
  const CertificateCheck check = check_certificate(cost, a, b, sol);
  sol.dual.gap = check.gap;
  sol.dual.max_violation = check.max_violation;
  return sol;
}

}  // namespace rwot
