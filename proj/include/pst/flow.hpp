#pragma once

#include <cmath>
#include <vector>

#include "pst/errors.hpp"
#include "pst/graph.hpp"

namespace pst {

/// Current injection pattern: every source feeds base_current into the
/// network and the single sink drains |sources| * base_current.
struct FluxBoundary {
  std::vector<VertexId> sources;
  VertexId sink = 0;
  double base_current = 1.0;
};

/// Per-edge conductivities, per-vertex pressures and per-edge fluxes of one
/// inner iteration. Flux signs follow the stored (u, v) edge orientation.
struct FlowState {
  std::vector<double> conductivity;  // per edge
  std::vector<double> pressure;      // per vertex, [0] unused, sink pinned to 0
  std::vector<double> flux;          // per edge
};

/// Relative residual every solve must reach.
inline constexpr double kFlowResidualTarget = 1e-10;

namespace detail {

// Grounded conduction system restricted to the sink's live component.
struct GroundedSystem {
  std::vector<VertexId> vertices;        // system index -> vertex (sink excluded)
  std::vector<int> index;                // vertex -> system index, -1 outside
  std::vector<double> diag;              // row sums of edge weights
  std::vector<std::size_t> row_offsets;  // CSR over off-diagonal entries
  std::vector<int> cols;
  std::vector<double> values;
  std::vector<double> rhs;

  std::size_t size() const { return vertices.size(); }

  void multiply(const std::vector<double>& x, std::vector<double>& y) const {
    for (std::size_t i = 0; i < size(); ++i) {
      double acc = diag[i] * x[i];
      for (std::size_t k = row_offsets[i]; k < row_offsets[i + 1]; ++k)
        acc -= values[k] * x[static_cast<std::size_t>(cols[k])];
      y[i] = acc;
    }
  }
};

inline GroundedSystem assemble_grounded_system(const Graph& g, const EdgeMask& live,
                                               const std::vector<double>& conductivity,
                                               const FluxBoundary& boundary) {
  if (boundary.sources.empty()) throw std::invalid_argument("flux boundary needs sources");
  if (boundary.sink < 1 || boundary.sink > g.vertex_count())
    throw std::invalid_argument("sink out of range");
  for (VertexId s : boundary.sources) {
    if (s < 1 || s > g.vertex_count()) throw std::invalid_argument("source out of range");
    if (s == boundary.sink) throw std::invalid_argument("sink cannot also be a source");
  }
  if (!(boundary.base_current > 0.0)) throw std::invalid_argument("base current must be positive");

  const std::size_t n = static_cast<std::size_t>(g.vertex_count()) + 1;
  std::vector<std::uint8_t> in_comp(n, 0);
  {
    std::vector<VertexId> stack{boundary.sink};
    in_comp[static_cast<std::size_t>(boundary.sink)] = 1;
    while (!stack.empty()) {
      VertexId v = stack.back();
      stack.pop_back();
      for (const Neighbor& nb : g.neighbors(v)) {
        if (!live[static_cast<std::size_t>(nb.edge)]) continue;
        if (!in_comp[static_cast<std::size_t>(nb.to)]) {
          in_comp[static_cast<std::size_t>(nb.to)] = 1;
          stack.push_back(nb.to);
        }
      }
    }
  }
  for (VertexId s : boundary.sources)
    if (!in_comp[static_cast<std::size_t>(s)])
      throw SingularSystemError("source " + std::to_string(s) +
                                " is not live-connected to the sink");

  GroundedSystem sys;
  sys.index.assign(n, -1);
  for (VertexId v = 1; v < static_cast<VertexId>(n); ++v) {
    if (in_comp[static_cast<std::size_t>(v)] && v != boundary.sink) {
      sys.index[static_cast<std::size_t>(v)] = static_cast<int>(sys.vertices.size());
      sys.vertices.push_back(v);
    }
  }
  sys.diag.assign(sys.size(), 0.0);
  sys.rhs.assign(sys.size(), 0.0);
  sys.row_offsets.assign(sys.size() + 1, 0);

  for (std::size_t i = 0; i < sys.size(); ++i) {
    VertexId v = sys.vertices[i];
    for (const Neighbor& nb : g.neighbors(v)) {
      if (!live[static_cast<std::size_t>(nb.edge)]) continue;
      double w = conductivity[static_cast<std::size_t>(nb.edge)] / g.edge(nb.edge).length;
      sys.diag[i] += w;
      if (nb.to != boundary.sink) ++sys.row_offsets[i + 1];
    }
  }
  for (std::size_t i = 0; i < sys.size(); ++i) sys.row_offsets[i + 1] += sys.row_offsets[i];
  sys.cols.resize(sys.row_offsets.back());
  sys.values.resize(sys.row_offsets.back());
  std::vector<std::size_t> fill(sys.row_offsets.begin(), sys.row_offsets.end() - 1);
  for (std::size_t i = 0; i < sys.size(); ++i) {
    VertexId v = sys.vertices[i];
    for (const Neighbor& nb : g.neighbors(v)) {
      if (!live[static_cast<std::size_t>(nb.edge)]) continue;
      if (nb.to == boundary.sink) continue;
      sys.cols[fill[i]] = sys.index[static_cast<std::size_t>(nb.to)];
      sys.values[fill[i]] = conductivity[static_cast<std::size_t>(nb.edge)] / g.edge(nb.edge).length;
      ++fill[i];
    }
  }
  for (VertexId s : boundary.sources)
    sys.rhs[static_cast<std::size_t>(sys.index[static_cast<std::size_t>(s)])] +=
        boundary.base_current;
  return sys;
}

// Cholesky solve for small systems.
inline std::vector<double> solve_dense(const GroundedSystem& sys) {
  const std::size_t k = sys.size();
  std::vector<double> a(k * k, 0.0);
  for (std::size_t i = 0; i < k; ++i) {
    a[i * k + i] = sys.diag[i];
    for (std::size_t idx = sys.row_offsets[i]; idx < sys.row_offsets[i + 1]; ++idx)
      a[i * k + static_cast<std::size_t>(sys.cols[idx])] -= sys.values[idx];
  }
  for (std::size_t j = 0; j < k; ++j) {
    double d = a[j * k + j];
    for (std::size_t p = 0; p < j; ++p) d -= a[j * k + p] * a[j * k + p];
    if (!(d > 0.0)) throw SingularSystemError("grounded system is not positive definite");
    d = std::sqrt(d);
    a[j * k + j] = d;
    for (std::size_t i = j + 1; i < k; ++i) {
      double s = a[i * k + j];
      for (std::size_t p = 0; p < j; ++p) s -= a[i * k + p] * a[j * k + p];
      a[i * k + j] = s / d;
    }
  }
  std::vector<double> x(sys.rhs);
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t p = 0; p < i; ++p) x[i] -= a[i * k + p] * x[p];
    x[i] /= a[i * k + i];
  }
  for (std::size_t ii = k; ii-- > 0;) {
    for (std::size_t p = ii + 1; p < k; ++p) x[ii] -= a[p * k + ii] * x[p];
    x[ii] /= a[ii * k + ii];
  }
  return x;
}

// Jacobi-preconditioned conjugate gradients.
inline std::vector<double> solve_cg(const GroundedSystem& sys) {
  const std::size_t k = sys.size();
  std::vector<double> x(k, 0.0), r(sys.rhs), z(k), p(k), ap(k);
  double b_norm2 = 0.0;
  for (double v : sys.rhs) b_norm2 += v * v;
  if (b_norm2 == 0.0) return x;
  const double target2 = b_norm2 * 1e-12 * 1e-12;

  for (std::size_t i = 0; i < k; ++i) z[i] = r[i] / sys.diag[i];
  p = z;
  double rz = 0.0;
  for (std::size_t i = 0; i < k; ++i) rz += r[i] * z[i];
  const std::size_t max_iters = 40 * k + 100;
  for (std::size_t it = 0; it < max_iters; ++it) {
    sys.multiply(p, ap);
    double pap = 0.0;
    for (std::size_t i = 0; i < k; ++i) pap += p[i] * ap[i];
    if (!(pap > 0.0)) throw SingularSystemError("conjugate gradients broke down");
    double alpha = rz / pap;
    double r_norm2 = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
      x[i] += alpha * p[i];
      r[i] -= alpha * ap[i];
      r_norm2 += r[i] * r[i];
    }
    if (r_norm2 <= target2) return x;
    double rz_next = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
      z[i] = r[i] / sys.diag[i];
      rz_next += r[i] * z[i];
    }
    double beta = rz_next / rz;
    rz = rz_next;
    for (std::size_t i = 0; i < k; ++i) p[i] = z[i] + beta * p[i];
  }
  throw SingularSystemError("conjugate gradients failed to converge");
}

}  // namespace detail

/// Solve the flux-conservation system for vertex pressures with the sink
/// grounded at 0. Only the sink's live component enters the system; a
/// source outside it raises SingularSystemError. Dense Cholesky below 200
/// unknowns, Jacobi-preconditioned CG above.
inline std::vector<double> solve_pressures(const Graph& g, const EdgeMask& live,
                                           const std::vector<double>& conductivity,
                                           const FluxBoundary& boundary) {
  detail::GroundedSystem sys = detail::assemble_grounded_system(g, live, conductivity, boundary);
  std::vector<double> x = sys.size() < 200 ? detail::solve_dense(sys) : detail::solve_cg(sys);

  // enforce the residual contract regardless of the path taken
  std::vector<double> ax(sys.size());
  sys.multiply(x, ax);
  double rr = 0.0, bb = 0.0;
  for (std::size_t i = 0; i < sys.size(); ++i) {
    double d = ax[i] - sys.rhs[i];
    rr += d * d;
    bb += sys.rhs[i] * sys.rhs[i];
  }
  if (bb > 0.0 && rr > bb * kFlowResidualTarget * kFlowResidualTarget)
    throw SingularSystemError("pressure solve missed the residual target");

  std::vector<double> pressure(static_cast<std::size_t>(g.vertex_count()) + 1, 0.0);
  for (std::size_t i = 0; i < sys.size(); ++i)
    pressure[static_cast<std::size_t>(sys.vertices[i])] = x[i];
  return pressure;
}

/// Per-edge flux from solved pressures; dead edges carry zero flux.
inline std::vector<double> compute_fluxes(const Graph& g, const EdgeMask& live,
                                          const std::vector<double>& conductivity,
                                          const std::vector<double>& pressure) {
  std::vector<double> flux(static_cast<std::size_t>(g.edge_count()), 0.0);
  for (EdgeId id = 0; id < g.edge_count(); ++id) {
    if (!live[static_cast<std::size_t>(id)]) continue;
    const Edge& e = g.edge(id);
    flux[static_cast<std::size_t>(id)] =
        conductivity[static_cast<std::size_t>(id)] / e.length *
        (pressure[static_cast<std::size_t>(e.u)] - pressure[static_cast<std::size_t>(e.v)]);
  }
  return flux;
}

}  // namespace pst
