#pragma once

#include <cstdint>
#include <iosfwd>
#include <utility>
#include <vector>

#include "dzgt/feasible_set.hpp"  // Matrix/Vector aliases
#include "dzgt/random.hpp"

namespace dzgt {

enum class Topology { kRing, kSparse, kComplete, kCustom };

/// Undirected edges as 0-indexed (i, j) pairs, i != j, stored with i < j.
using EdgeList = std::vector<std::pair<int, int>>;

struct TopologyParams {
  /// Seed for the sparse generator's chord placement.
  std::uint64_t sparse_seed = 1;
  /// When true and m == 10, the sparse generator returns the fixed 10-agent
  /// pattern (ring + chords {0,5} and {2,7}) instead of seeded chords.
  bool fixed_pattern_10 = false;
  /// Complete graphs use the uniform averaging matrix (1/m) 11', whose
  /// deviation from the consensus projector is exactly zero. When false they
  /// get Metropolis weights like any other graph.
  bool complete_uniform = true;
  /// Edges for Topology::kCustom.
  EdgeList custom_edges;
};

/// A doubly stochastic symmetric mixing matrix with its spectral gap data.
struct MixingMatrix {
  Matrix W;
  double rho = 0.0;  // || W - (1/m) 11' ||_2
  Topology topology = Topology::kCustom;
  int m = 0;
};

EdgeList ring_edges(int m);                     // m >= 1 (m <= 2 degenerate)
EdgeList complete_edges(int m);                 // m >= 1
/// Ring plus seeded extra chords, sampled without replacement from the
/// non-ring pairs using params.sparse_seed (or the fixed 10-agent pattern).
/// The chord budget starts at floor(m/5) and each candidate set is screened
/// so the returned graph mixes at least as well as the plain ring under the
/// Metropolis weights (small chord budgets can otherwise mix *worse*: a chord
/// raises its endpoints' degrees and dilutes every incident weight). The
/// budget escalates, deterministically in (seed, m), until a candidate
/// passes; for m >= 10 the initial floor(m/5) budget always suffices.
EdgeList sparse_edges(int m, const TopologyParams& params = {});

/// Parses "i j" pairs, one per line, 0-indexed, whitespace-separated; blank
/// lines and lines starting with '#' are skipped. Throws InvalidTopologyError
/// on malformed input (m is validated later when the matrix is built).
EdgeList read_edge_list(std::istream& in);
EdgeList read_edge_list_file(const std::string& path);

bool is_connected(int m, const EdgeList& edges);

/// Lazy Metropolis weights: W_ij = 1/(2 max(d_i, d_j)) on edges, diagonal
/// absorbs the slack. Symmetric, doubly stochastic, diagonal >= 1/2 (hence
/// positive semidefinite), rho < 1 on connected graphs.
Matrix metropolis_weights(int m, const EdgeList& edges);

/// Builds W for a named topology and computes rho. Throws
/// DisconnectedGraphError / InvalidTopologyError on bad graphs.
MixingMatrix build_mixing(Topology t, int m, const TopologyParams& params = {});
MixingMatrix build_mixing_from_edges(int m, const EdgeList& edges,
                                     Topology tag = Topology::kCustom);

/// rho = || W - (1/m) 11' ||_2 by power iteration on M^2 (M symmetric, so M^2
/// is PSD and +/- eigenvalue pairs cannot stall the iteration). Deterministic
/// start vector; returns 0 exactly when M vanishes; falls back to the dense
/// eigensolver route if the tolerance is not met within the iteration cap.
double deviation_norm(const Matrix& W);
/// Power-iteration route alone; throws NoConvergenceError past max_iter.
double deviation_norm_power(const Matrix& W, double tol = 1e-12, long max_iter = 200000);
/// Dense symmetric eigendecomposition route (independent of power iteration).
double deviation_norm_dense(const Matrix& W);

const char* topology_name(Topology t);

}  // namespace dzgt
