#pragma once

// Independent P1 finite element reference for real-valued minimizers.

#include <Eigen/Sparse>
#include <cmath>
#include <vector>

#include "polyharm/domain.hpp"

namespace fixtures {

using namespace polyharm;

// Classical P1 stiffness matrix, assembled independently of EnergyModel.
inline Eigen::SparseMatrix<double> stiffness(const Mesh& mesh) {
  std::vector<Eigen::Triplet<double>> trips;
  for (int s = 0; s < mesh.simplex_count(); ++s) {
    Eigen::Matrix3d m;
    for (int k = 0; k < 3; ++k) {
      const Point3 x = mesh.local_coords(s, k);
      m.row(k) << 1.0, x[0], x[1];
    }
    const Eigen::Matrix3d inv = m.inverse();  // columns: coefficients of the hat functions
    const double area = 0.5 * std::abs(m.determinant());
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) {
        const double gij = inv(1, i) * inv(1, j) + inv(2, i) * inv(2, j);
        trips.emplace_back(mesh.simplices()[s].v[i], mesh.simplices()[s].v[j], area * gij);
      }
    }
  }
  Eigen::SparseMatrix<double> k(mesh.vertex_count(), mesh.vertex_count());
  k.setFromTriplets(trips.begin(), trips.end());
  return k;
}

// Discrete harmonic extension of boundary values by a direct sparse solve.
inline Eigen::VectorXd fem_solve(const Mesh& mesh, const Eigen::VectorXd& boundary_values) {
  const int n = mesh.vertex_count();
  std::vector<int> idx(n, -1);
  int m = 0;
  for (int v = 0; v < n; ++v) {
    if (!mesh.vertices()[v].boundary) idx[v] = m++;
  }
  const Eigen::SparseMatrix<double> k = stiffness(mesh);
  std::vector<Eigen::Triplet<double>> trips;
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(m);
  for (int c = 0; c < k.outerSize(); ++c) {
    for (Eigen::SparseMatrix<double>::InnerIterator it(k, c); it; ++it) {
      const int i = idx[it.row()];
      if (i < 0) continue;
      const int j = idx[it.col()];
      if (j >= 0) {
        trips.emplace_back(i, j, it.value());
      } else {
        rhs[i] -= it.value() * boundary_values[it.col()];
      }
    }
  }
  Eigen::SparseMatrix<double> a(m, m);
  a.setFromTriplets(trips.begin(), trips.end());
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt(a);
  if (ldlt.info() != Eigen::Success) throw polyharm::Error("FEM factorization failed");
  const Eigen::VectorXd x = ldlt.solve(rhs);
  Eigen::VectorXd out = boundary_values;
  for (int v = 0; v < n; ++v) {
    if (idx[v] >= 0) out[v] = x[idx[v]];
  }
  return out;
}

}  // namespace fixtures
