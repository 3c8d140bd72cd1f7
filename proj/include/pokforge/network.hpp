#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <span>
#include <vector>

namespace pokforge {

/// Resistor network: nodes joined by positive conductances, a subset of
/// nodes held at fixed potentials (Dirichlet). Solving yields the potentials
/// of the free nodes from Kirchhoff's current law, i.e. the conductance
/// weighted graph Laplacian restricted to the free nodes.
class ResistorNetwork {
 public:
  struct Edge {
    std::size_t a;
    std::size_t b;
    double conductance;
  };

  explicit ResistorNetwork(std::size_t node_count);

  std::size_t node_count() const noexcept { return fixed_.size(); }
  const std::vector<Edge>& edges() const noexcept { return edges_; }

  /// Conductance must be finite and > 0.
  void add_edge(std::size_t a, std::size_t b, double conductance);
  void fix(std::size_t node, double potential);
  void release(std::size_t node);
  bool is_fixed(std::size_t node) const { return fixed_[node].has_value(); }
  double fixed_potential(std::size_t node) const { return *fixed_[node]; }

  void reserve_edges(std::size_t n) { edges_.reserve(n); }

 private:
  std::vector<std::optional<double>> fixed_;
  std::vector<Edge> edges_;
};

struct SolveOptions {
  double relative_tolerance = 1e-8;
  /// 0 means 10 x (number of free nodes).
  std::size_t max_iterations = 0;
};

struct NetworkSolution {
  std::vector<double> potentials;  ///< all nodes, fixed ones included
  std::size_t iterations = 0;
  double relative_residual = 0.0;  ///< ||b - A v|| / ||b|| over free nodes
};

/// Jacobi-preconditioned conjugate gradient on the free-node system.
/// `initial` (all nodes) warm-starts the free potentials. Reductions run in
/// node order, so results are bit-reproducible. Throws SolverError when
/// the tolerance is not met within the iteration budget, and DomainError
/// when a connected group of free nodes touches no fixed node.
NetworkSolution solve_network(const ResistorNetwork& net, const SolveOptions& options = {},
                              std::span<const double> initial = {});

/// Reusable solver for a sequence of networks with the same topology
/// (same fixed set, same edge endpoints in the same order) but drifting
/// conductances, as in a time-stepped simulation.
///
/// Conjugate gradient is preconditioned with an exact Cholesky factor of
/// an earlier matrix in the sequence, computed in reverse Cuthill-McKee
/// order with profile storage. The factor is refreshed when the topology
/// changes or when the previous solve needed more than
/// `refactor_threshold` iterations. Convergence criterion and iteration
/// budget are those of SolveOptions; results depend only on the sequence
/// of calls, never on timing.
class NetworkSolver {
 public:
  explicit NetworkSolver(SolveOptions options = {}, std::size_t refactor_threshold = 6);
  ~NetworkSolver();
  NetworkSolver(NetworkSolver&&) noexcept;
  NetworkSolver& operator=(NetworkSolver&&) noexcept;

  NetworkSolution solve(const ResistorNetwork& net, std::span<const double> initial = {});

  std::size_t factorizations() const noexcept { return factorizations_; }

 private:
  struct Cache;
  SolveOptions options_;
  std::size_t refactor_threshold_;
  std::size_t factorizations_ = 0;
  std::unique_ptr<Cache> cache_;
};

/// Net current flowing from the rest of the network into `node`.
double current_into(const ResistorNetwork& net, std::span<const double> potentials, std::size_t node);

/// Largest absolute KCL imbalance over free nodes.
double max_kcl_residual(const ResistorNetwork& net, std::span<const double> potentials);

}  // namespace pokforge
