#include "pokforge/network.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <utility>
#include <string>

#include "pokforge/errors.hpp"

namespace pokforge {

ResistorNetwork::ResistorNetwork(std::size_t node_count) : fixed_(node_count) {}

void ResistorNetwork::add_edge(std::size_t a, std::size_t b, double conductance) {
  if (a >= node_count() || b >= node_count() || a == b) throw DomainError("invalid edge endpoints");
  if (!(conductance > 0.0) || !std::isfinite(conductance)) {
    throw DomainError("edge conductance must be finite and positive");
  }
  edges_.push_back({a, b, conductance});
}

void ResistorNetwork::fix(std::size_t node, double potential) {
  if (node >= node_count()) throw DomainError("node out of range");
  fixed_[node] = potential;
}

void ResistorNetwork::release(std::size_t node) {
  if (node >= node_count()) throw DomainError("node out of range");
  fixed_[node].reset();
}

namespace {

// Free-node system in CSR form (off-diagonals only) plus diagonal.
struct FreeSystem {
  std::vector<std::size_t> free_nodes;
  std::vector<std::size_t> row_start;
  std::vector<std::size_t> col;
  std::vector<double> val;  // negative conductances
  std::vector<double> diag;
  std::vector<double> rhs;
};

constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();

FreeSystem assemble(const ResistorNetwork& net, std::vector<std::size_t>& index_of) {
  const std::size_t n = net.node_count();
  index_of.assign(n, kNone);
  FreeSystem sys;
  for (std::size_t v = 0; v < n; ++v) {
    if (!net.is_fixed(v)) {
      index_of[v] = sys.free_nodes.size();
      sys.free_nodes.push_back(v);
    }
  }
  const std::size_t m = sys.free_nodes.size();
  sys.diag.assign(m, 0.0);
  sys.rhs.assign(m, 0.0);
  std::vector<std::size_t> count(m, 0);
  for (const auto& e : net.edges()) {
    const auto ia = index_of[e.a], ib = index_of[e.b];
    if (ia != kNone && ib != kNone) {
      ++count[ia];
      ++count[ib];
    }
  }
  sys.row_start.assign(m + 1, 0);
  for (std::size_t i = 0; i < m; ++i) sys.row_start[i + 1] = sys.row_start[i] + count[i];
  sys.col.resize(sys.row_start[m]);
  sys.val.resize(sys.row_start[m]);
  std::vector<std::size_t> fill(sys.row_start.begin(), sys.row_start.end() - 1);
  for (const auto& e : net.edges()) {
    const auto ia = index_of[e.a], ib = index_of[e.b];
    if (ia != kNone) sys.diag[ia] += e.conductance;
    if (ib != kNone) sys.diag[ib] += e.conductance;
    if (ia != kNone && ib != kNone) {
      sys.col[fill[ia]] = ib;
      sys.val[fill[ia]++] = -e.conductance;
      sys.col[fill[ib]] = ia;
      sys.val[fill[ib]++] = -e.conductance;
    } else if (ia != kNone) {
      sys.rhs[ia] += e.conductance * net.fixed_potential(e.b);
    } else if (ib != kNone) {
      sys.rhs[ib] += e.conductance * net.fixed_potential(e.a);
    }
  }
  return sys;
}

void check_grounded(const ResistorNetwork& net, const std::vector<std::size_t>& index_of,
                    const FreeSystem& sys) {
  // Union-find over free nodes; each component needs a fixed neighbor or
  // the Laplacian block is singular.
  const std::size_t m = sys.free_nodes.size();
  std::vector<std::size_t> parent(m);
  std::iota(parent.begin(), parent.end(), std::size_t{0});
  auto find = [&](std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  std::vector<char> anchored(m, 0);
  for (const auto& e : net.edges()) {
    const auto ia = index_of[e.a], ib = index_of[e.b];
    if (ia != kNone && ib != kNone) {
      parent[find(ia)] = find(ib);
    }
  }
  for (const auto& e : net.edges()) {
    const auto ia = index_of[e.a], ib = index_of[e.b];
    if (ia != kNone && ib == kNone) anchored[find(ia)] = 1;
    if (ib != kNone && ia == kNone) anchored[find(ib)] = 1;
  }
  for (std::size_t i = 0; i < m; ++i) {
    if (!anchored[find(i)]) throw DomainError("free node group not connected to any fixed node");
  }
}

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

void apply(const FreeSystem& sys, const std::vector<double>& x, std::vector<double>& y) {
  const std::size_t m = sys.diag.size();
  for (std::size_t i = 0; i < m; ++i) {
    double s = sys.diag[i] * x[i];
    for (std::size_t k = sys.row_start[i]; k < sys.row_start[i + 1]; ++k) s += sys.val[k] * x[sys.col[k]];
    y[i] = s;
  }
}


// Four fixed-order partial sums; vectorizes without reassociation flags and
// stays bit-reproducible.
double dot_span(const double* a, const double* b, std::size_t n) {
  double s0 = 0.0, s1 = 0.0, s2 = 0.0, s3 = 0.0;
  std::size_t t = 0;
  for (; t + 4 <= n; t += 4) {
    s0 += a[t] * b[t];
    s1 += a[t + 1] * b[t + 1];
    s2 += a[t + 2] * b[t + 2];
    s3 += a[t + 3] * b[t + 3];
  }
  for (; t < n; ++t) s0 += a[t] * b[t];
  return (s0 + s1) + (s2 + s3);
}

struct Preconditioner {
  virtual ~Preconditioner() = default;
  virtual void apply(const std::vector<double>& r, std::vector<double>& z) const = 0;
};

struct JacobiPreconditioner final : Preconditioner {
  explicit JacobiPreconditioner(const std::vector<double>& d) : diag(d) {}
  void apply(const std::vector<double>& r, std::vector<double>& z) const override {
    for (std::size_t i = 0; i < r.size(); ++i) z[i] = r[i] / diag[i];
  }
  const std::vector<double>& diag;
};

// Cholesky factor with profile (envelope) storage in a permuted order.
class ProfileCholesky final : public Preconditioner {
 public:
  ProfileCholesky(const FreeSystem& sys, const std::vector<std::size_t>& order) : order_(order) {
    const std::size_t m = sys.diag.size();
    position_.assign(m, 0);
    for (std::size_t k = 0; k < m; ++k) position_[order_[k]] = k;
    first_.assign(m, 0);
    for (std::size_t k = 0; k < m; ++k) {
      const std::size_t i = order_[k];
      std::size_t lo = k;
      for (std::size_t e = sys.row_start[i]; e < sys.row_start[i + 1]; ++e) lo = std::min(lo, position_[sys.col[e]]);
      first_[k] = lo;
    }
    offset_.assign(m + 1, 0);
    for (std::size_t k = 0; k < m; ++k) offset_[k + 1] = offset_[k] + (k - first_[k] + 1);
    l_.assign(offset_[m], 0.0);
    for (std::size_t k = 0; k < m; ++k) {
      const std::size_t i = order_[k];
      at(k, k) = sys.diag[i];
      for (std::size_t e = sys.row_start[i]; e < sys.row_start[i + 1]; ++e) {
        const std::size_t j = position_[sys.col[e]];
        if (j < k) at(k, j) += sys.val[e];
      }
    }
    for (std::size_t k = 0; k < m; ++k) {
      for (std::size_t j = first_[k]; j <= k; ++j) {
        double s = at(k, j);
        const std::size_t lo = std::max(first_[k], first_[j]);
        const double* rk = &l_[offset_[k] + (lo - first_[k])];
        const double* rj = &l_[offset_[j] + (lo - first_[j])];
        s -= dot_span(rk, rj, j - lo);
        if (j < k) {
          at(k, j) = s / at(j, j);
        } else {
          if (!(s > 0.0)) throw DomainError("network matrix is not positive definite");
          at(k, k) = std::sqrt(s);
        }
      }
    }
  }

  void apply(const std::vector<double>& r, std::vector<double>& z) const override {
    const std::size_t m = order_.size();
    std::vector<double> y(m);
    for (std::size_t k = 0; k < m; ++k) {
      double s = r[order_[k]];
      const double* row = &l_[offset_[k]];
      s -= dot_span(row, &y[first_[k]], k - first_[k]);
      y[k] = s / row[k - first_[k]];
    }
    for (std::size_t k = m; k-- > 0;) {
      const double* row = &l_[offset_[k]];
      y[k] /= row[k - first_[k]];
      const double yk = y[k];
      double* yj = &y[first_[k]];
      for (std::size_t j = 0; j < k - first_[k]; ++j) yj[j] -= row[j] * yk;
    }
    for (std::size_t k = 0; k < m; ++k) z[order_[k]] = y[k];
  }

 private:
  double& at(std::size_t k, std::size_t j) { return l_[offset_[k] + (j - first_[k])]; }
  double at(std::size_t k, std::size_t j) const { return l_[offset_[k] + (j - first_[k])]; }

  std::vector<std::size_t> order_;
  std::vector<std::size_t> position_;
  std::vector<std::size_t> first_;
  std::vector<std::size_t> offset_;
  std::vector<double> l_;
};

// Reverse Cuthill-McKee over the free-node graph.
std::vector<std::size_t> rcm_order(const FreeSystem& sys) {
  const std::size_t m = sys.diag.size();
  auto degree = [&](std::size_t i) { return sys.row_start[i + 1] - sys.row_start[i]; };
  std::vector<std::size_t> order;
  order.reserve(m);
  std::vector<char> seen(m, 0);
  std::vector<std::size_t> by_degree(m);
  std::iota(by_degree.begin(), by_degree.end(), std::size_t{0});
  std::stable_sort(by_degree.begin(), by_degree.end(),
                   [&](std::size_t a, std::size_t b) { return degree(a) < degree(b); });
  std::vector<std::size_t> nbrs;
  for (std::size_t start : by_degree) {
    if (seen[start]) continue;
    seen[start] = 1;
    std::size_t head = order.size();
    order.push_back(start);
    while (head < order.size()) {
      const std::size_t v = order[head++];
      nbrs.clear();
      for (std::size_t e = sys.row_start[v]; e < sys.row_start[v + 1]; ++e) {
        if (!seen[sys.col[e]]) {
          seen[sys.col[e]] = 1;
          nbrs.push_back(sys.col[e]);
        }
      }
      std::stable_sort(nbrs.begin(), nbrs.end(), [&](std::size_t a, std::size_t b) { return degree(a) < degree(b); });
      order.insert(order.end(), nbrs.begin(), nbrs.end());
    }
  }
  std::reverse(order.begin(), order.end());
  return order;
}

NetworkSolution run_pcg(const ResistorNetwork& net, const FreeSystem& sys, const Preconditioner& pre,
                        const SolveOptions& options, std::span<const double> initial) {
  const std::size_t m = sys.free_nodes.size();
  NetworkSolution out;
  out.potentials.assign(net.node_count(), 0.0);
  for (std::size_t v = 0; v < net.node_count(); ++v) {
    if (net.is_fixed(v)) out.potentials[v] = net.fixed_potential(v);
  }
  if (m == 0) return out;

  std::vector<double> x(m, 0.0);
  if (initial.size() == net.node_count()) {
    for (std::size_t i = 0; i < m; ++i) x[i] = initial[sys.free_nodes[i]];
  }

  const double bnorm = std::sqrt(dot(sys.rhs, sys.rhs));
  if (bnorm == 0.0) {
    // All sources at zero: the unique solution is zero everywhere.
    return out;
  }

  std::vector<double> r(m), z(m), p(m), q(m);
  apply(sys, x, q);
  for (std::size_t i = 0; i < m; ++i) r[i] = sys.rhs[i] - q[i];
  const std::size_t max_iter = options.max_iterations ? options.max_iterations : 10 * m;
  const double target = options.relative_tolerance * bnorm;

  double rnorm = std::sqrt(dot(r, r));
  std::size_t it = 0;
  if (rnorm > target) {
    pre.apply(r, z);
    p = z;
    double rz = dot(r, z);
    for (it = 1; it <= max_iter; ++it) {
      apply(sys, p, q);
      const double alpha = rz / dot(p, q);
      for (std::size_t i = 0; i < m; ++i) {
        x[i] += alpha * p[i];
        r[i] -= alpha * q[i];
      }
      rnorm = std::sqrt(dot(r, r));
      if (rnorm <= target) break;
      pre.apply(r, z);
      const double rz_next = dot(r, z);
      const double beta = rz_next / rz;
      rz = rz_next;
      for (std::size_t i = 0; i < m; ++i) p[i] = z[i] + beta * p[i];
    }
    if (rnorm > target) {
      throw SolverError("conjugate gradient did not converge, relative residual " +
                            std::to_string(rnorm / bnorm),
                        rnorm / bnorm);
    }
  }

  // Recompute the true residual; the recurrence drifts slightly.
  apply(sys, x, q);
  double true_r = 0.0;
  for (std::size_t i = 0; i < m; ++i) true_r += (sys.rhs[i] - q[i]) * (sys.rhs[i] - q[i]);
  out.iterations = it;
  out.relative_residual = std::sqrt(true_r) / bnorm;
  for (std::size_t i = 0; i < m; ++i) out.potentials[sys.free_nodes[i]] = x[i];
  return out;
}

}  // namespace

NetworkSolution solve_network(const ResistorNetwork& net, const SolveOptions& options,
                              std::span<const double> initial) {
  std::vector<std::size_t> index_of;
  FreeSystem sys = assemble(net, index_of);
  check_grounded(net, index_of, sys);
  JacobiPreconditioner jacobi(sys.diag);
  return run_pcg(net, sys, jacobi, options, initial);
}

struct NetworkSolver::Cache {
  std::vector<std::size_t> free_nodes;
  std::vector<std::pair<std::size_t, std::size_t>> endpoints;
  std::vector<std::size_t> order;
  std::unique_ptr<ProfileCholesky> factor;
  bool stale = true;
};

NetworkSolver::NetworkSolver(SolveOptions options, std::size_t refactor_threshold)
    : options_(options), refactor_threshold_(refactor_threshold), cache_(std::make_unique<Cache>()) {}
NetworkSolver::~NetworkSolver() = default;
NetworkSolver::NetworkSolver(NetworkSolver&&) noexcept = default;
NetworkSolver& NetworkSolver::operator=(NetworkSolver&&) noexcept = default;

NetworkSolution NetworkSolver::solve(const ResistorNetwork& net, std::span<const double> initial) {
  std::vector<std::size_t> index_of;
  FreeSystem sys = assemble(net, index_of);

  bool same = cache_->free_nodes == sys.free_nodes && cache_->endpoints.size() == net.edges().size();
  if (same) {
    for (std::size_t e = 0; e < net.edges().size(); ++e) {
      if (cache_->endpoints[e] != std::pair{net.edges()[e].a, net.edges()[e].b}) {
        same = false;
        break;
      }
    }
  }
  if (!same) {
    check_grounded(net, index_of, sys);
    cache_->free_nodes = sys.free_nodes;
    cache_->endpoints.clear();
    for (const auto& e : net.edges()) cache_->endpoints.emplace_back(e.a, e.b);
    cache_->order = rcm_order(sys);
    cache_->stale = true;
  }
  if (cache_->stale || !cache_->factor) {
    cache_->factor = std::make_unique<ProfileCholesky>(sys, cache_->order);
    cache_->stale = false;
    ++factorizations_;
  }
  NetworkSolution sol = run_pcg(net, sys, *cache_->factor, options_, initial);
  if (sol.iterations > refactor_threshold_) cache_->stale = true;
  return sol;
}

double current_into(const ResistorNetwork& net, std::span<const double> potentials, std::size_t node) {
  double current = 0.0;
  for (const auto& e : net.edges()) {
    if (e.a == node) current += e.conductance * (potentials[e.b] - potentials[e.a]);
    if (e.b == node) current += e.conductance * (potentials[e.a] - potentials[e.b]);
  }
  return current;
}

double max_kcl_residual(const ResistorNetwork& net, std::span<const double> potentials) {
  std::vector<double> imbalance(net.node_count(), 0.0);
  for (const auto& e : net.edges()) {
    const double i_ab = e.conductance * (potentials[e.a] - potentials[e.b]);
    imbalance[e.a] -= i_ab;
    imbalance[e.b] += i_ab;
  }
  double worst = 0.0;
  for (std::size_t v = 0; v < net.node_count(); ++v) {
    if (!net.is_fixed(v)) worst = std::max(worst, std::abs(imbalance[v]));
  }
  return worst;
}

}  // namespace pokforge
