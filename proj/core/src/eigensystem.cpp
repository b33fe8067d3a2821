#include <algorithm>
#include <cmath>
#include <numeric>

#include "nvgyro/errors.hpp"
#include "nvgyro/spin_core.hpp"

namespace nvgyro::spin {
namespace {

constexpr double kTieTolerance = 1e-9;

// Inside a cluster of (numerically) degenerate eigenvalues the solver's basis
// is arbitrary. Rebuild it from the projections of the reference states with
// the largest weight so repeated calls and diagonal inputs give the reference
// vectors themselves.
void canonicalize_degenerate(const Eigen::Matrix<double, 6, 1>& values,
                             Matrix6c& vectors, const Matrix6c& reference) {
  const double scale = std::max(1.0, values.cwiseAbs().maxCoeff());
  const double tol = 1e-9 * scale;
  int start = 0;
  while (start < 6) {
    int end = start + 1;
    while (end < 6 && values(end) - values(end - 1) <= tol) ++end;
    const int m = end - start;
    if (m > 1) {
      const auto cluster = vectors.middleCols(start, m);
      const Matrix6c projector = cluster * cluster.adjoint();
      std::array<int, 6> order{};
      std::array<double, 6> weight{};
      for (int b = 0; b < 6; ++b) {
        order[static_cast<std::size_t>(b)] = b;
        weight[static_cast<std::size_t>(b)] = (projector * reference.col(b)).squaredNorm();
      }
      std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
        return weight[static_cast<std::size_t>(a)] >
               weight[static_cast<std::size_t>(b)] + kTieTolerance;
      });
      Eigen::Matrix<Complex, 6, Eigen::Dynamic> chosen(6, m);
      int filled = 0;
      for (int b : order) {
        if (filled == m) break;
        Vector6c v = projector * reference.col(b);
        for (int j = 0; j < filled; ++j) {
          v -= chosen.col(j) * chosen.col(j).dot(v);
        }
        const double norm = v.norm();
        if (norm > 1e-6) chosen.col(filled++) = v / norm;
      }
      if (filled == m) vectors.middleCols(start, m) = chosen;
    }
    start = end;
  }
}

std::array<std::size_t, 6> best_assignment(const Eigen::Matrix<double, 6, 6>& overlap) {
  // Fast path: every vector's dominant reference state is unique.
  std::array<std::size_t, 6> argmax{};
  bool unique = true;
  std::array<bool, 6> taken{};
  for (int k = 0; k < 6 && unique; ++k) {
    Eigen::Index best = 0;
    overlap.row(k).maxCoeff(&best);
    for (int b = 0; b < 6; ++b) {
      if (b != best && overlap(k, b) > overlap(k, best) - kTieTolerance) unique = false;
    }
    if (taken[static_cast<std::size_t>(best)]) unique = false;
    taken[static_cast<std::size_t>(best)] = true;
    argmax[static_cast<std::size_t>(k)] = static_cast<std::size_t>(best);
  }
  if (unique) return argmax;

  // Exhaustive search over the 720 bijections. Permutations are visited in
  // lexicographic order and only a strictly better score replaces the best,
  // so ties resolve to ascending eigenvalue -> ascending basis index.
  std::array<std::size_t, 6> perm{0, 1, 2, 3, 4, 5};
  std::array<std::size_t, 6> best = perm;
  double best_score = -1.0;
  do {
    double score = 0.0;
    for (int k = 0; k < 6; ++k) score += overlap(k, static_cast<Eigen::Index>(perm[static_cast<std::size_t>(k)]));
    if (score > best_score + kTieTolerance) {
      best_score = score;
      best = perm;
    }
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

}  // namespace

std::size_t LabeledEigensystem::index_of(SpinLabel label) const {
  for (std::size_t k = 0; k < kDim; ++k) {
    if (labels[k] == label) return k;
  }
  throw InvalidArgument("no level carries the requested label");
}

Matrix6c LabeledEigensystem::dressed_basis() const {
  Matrix6c out;
  for (std::size_t k = 0; k < kDim; ++k) {
    out.col(static_cast<Eigen::Index>(canonical_index(labels[k]))) =
        eigenvectors.col(static_cast<Eigen::Index>(k));
  }
  return out;
}

std::array<double, kDim> LabeledEigensystem::dressed_energies() const {
  std::array<double, kDim> out{};
  for (std::size_t k = 0; k < kDim; ++k) out[canonical_index(labels[k])] = eigenvalues[k];
  return out;
}

LabeledEigensystem eigensystem_in_basis(const Matrix6c& h, const Matrix6c& reference) {
  Eigen::SelfAdjointEigenSolver<Matrix6c> solver(h);
  if (solver.info() != Eigen::Success) {
    throw NumericalError("Hermitian eigensolver did not converge");
  }
  Eigen::Matrix<double, 6, 1> values = solver.eigenvalues();
  Matrix6c vectors = solver.eigenvectors();
  canonicalize_degenerate(values, vectors, reference);

  Eigen::Matrix<double, 6, 6> overlap;
  const Matrix6c projections = reference.adjoint() * vectors;  // (b, k)
  for (int k = 0; k < 6; ++k) {
    for (int b = 0; b < 6; ++b) overlap(k, b) = std::norm(projections(b, k));
  }
  const std::array<std::size_t, 6> assignment = best_assignment(overlap);

  LabeledEigensystem es;
  for (int k = 0; k < 6; ++k) {
    const std::size_t b = assignment[static_cast<std::size_t>(k)];
    es.eigenvalues[static_cast<std::size_t>(k)] = values(k);
    es.labels[static_cast<std::size_t>(k)] = label_at(b);
    const Complex c = projections(static_cast<Eigen::Index>(b), k);
    const double mag = std::abs(c);
    const Complex phase = mag > 0.0 ? std::conj(c) / mag : Complex{1.0, 0.0};
    es.eigenvectors.col(k) = vectors.col(k) * phase;
  }
  return es;
}

LabeledEigensystem eigensystem(const HermitianOperator& h) {
  return eigensystem_in_basis(h.matrix(), Matrix6c::Identity());
}

}  // namespace nvgyro::spin
