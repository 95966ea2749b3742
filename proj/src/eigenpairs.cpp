#include "mfglab/eigenpairs.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

namespace mfglab {

namespace {

void fix_sign(Eigen::VectorXd& y) {
  const double scale = y.cwiseAbs().maxCoeff();
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    if (std::abs(y[i]) > 1e-8 * scale) {
      if (y[i] < 0) y = -y;
      return;
    }
  }
}

// Rayleigh-Ritz on a block X: solve the projected generalized problem and
// rotate X to approximate eigenvectors.
void rayleigh_ritz(const Eigen::SparseMatrix<double>& L, const Eigen::VectorXd& area,
                   Eigen::MatrixXd& X, Eigen::VectorXd& lambda) {
  const Eigen::MatrixXd LX = L * X;
  const Eigen::MatrixXd MX = area.asDiagonal() * X;
  const Eigen::MatrixXd A = X.transpose() * LX;
  const Eigen::MatrixXd B = X.transpose() * MX;
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(A, B);
  X = X * es.eigenvectors();
  lambda = es.eigenvalues();
}

// Block inverse iteration with M-orthonormalization, reusing the SPD solver.
std::vector<std::pair<double, Eigen::VectorXd>> iterative_smallest(
    const Eigen::SparseMatrix<double>& L, const Eigen::VectorXd& area, int count,
    const EigenOptions& opts) {
  const int n = static_cast<int>(L.rows());
  const int block = std::min(n, count + std::max(2, count / 4));
  // Shift by M keeps the solve definite even when L has a Neumann nullspace.
  Eigen::SparseMatrix<double> Ls = L;
  for (int i = 0; i < n; ++i) Ls.coeffRef(i, i) += area[i];

  Eigen::MatrixXd X(n, block);
  std::uint64_t state = 0x9e3779b97f4a7c15ull;
  for (Eigen::Index i = 0; i < X.size(); ++i) {
    state = state * 6364136223846793005ull + 1442695040888963407ull;
    X.data()[i] = static_cast<double>(state >> 11) / 9007199254740992.0 - 0.5;
  }

  Eigen::VectorXd lambda;
  Eigen::VectorXd prev = Eigen::VectorXd::Zero(block);
  for (int it = 0; it < opts.max_iterations; ++it) {
    for (int c = 0; c < block; ++c) {
      X.col(c) = solve_spd(Ls, area.cwiseProduct(X.col(c)), 1e-12);
    }
    // Modified Gram-Schmidt in the M inner product.
    for (int c = 0; c < block; ++c) {
      for (int p = 0; p < c; ++p) {
        const double proj = X.col(p).dot(area.cwiseProduct(X.col(c)));
        X.col(c) -= proj * X.col(p);
      }
      const double nrm = std::sqrt(X.col(c).dot(area.cwiseProduct(X.col(c))));
      if (nrm == 0) throw SolverError("eigen iteration produced a null vector");
      X.col(c) /= nrm;
    }
    rayleigh_ritz(L, area, X, lambda);
    if (it > 0 && (lambda.head(count) - prev.head(count)).cwiseAbs().maxCoeff() <
                      1e-12 * (1.0 + lambda[count - 1])) {
      break;
    }
    prev = lambda;
    if (it == opts.max_iterations - 1) {
      throw SolverError("eigen iteration did not converge");
    }
  }
  std::vector<std::pair<double, Eigen::VectorXd>> out;
  for (int c = 0; c < count; ++c) out.emplace_back(lambda[c], X.col(c));
  return out;
}

std::vector<std::pair<double, Eigen::VectorXd>> dense_smallest(
    const Eigen::SparseMatrix<double>& L, const Eigen::VectorXd& area, int count) {
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(
      Eigen::MatrixXd(L), Eigen::MatrixXd(area.asDiagonal()));
  if (es.info() != Eigen::Success) throw SolverError("dense eigensolve failed");
  std::vector<std::pair<double, Eigen::VectorXd>> out;
  for (int c = 0; c < count; ++c) out.emplace_back(es.eigenvalues()[c], es.eigenvectors().col(c));
  return out;
}

}  // namespace

std::vector<EigenPair> eigenpairs(const Grid& grid, Bc bc, int count, double nu,
                                  const EigenOptions& opts) {
  SparseOperator op = assemble_laplacian(grid, bc);
  if (count < 1 || count > op.n_unknown / 4) {
    throw PreconditionError("eigenpair count must satisfy 1 <= K <= unknowns/4");
  }
  auto raw = op.n_unknown <= opts.dense_threshold
                 ? dense_smallest(op.L_uu, op.area, count)
                 : iterative_smallest(op.L_uu, op.area, count, opts);
  std::sort(raw.begin(), raw.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });

  std::vector<EigenPair> pairs;
  pairs.reserve(raw.size());
  for (auto& [lam, vec] : raw) {
    const double nrm = std::sqrt(vec.dot(op.area.cwiseProduct(vec)));
    vec /= nrm;
    fix_sign(vec);
    EigenPair p;
    p.mu = nu * lam;
    p.bc = bc;
    p.y = op.scatter(vec);
    const Eigen::VectorXd r = op.apply(p.y) - lam * vec;
    // Measure in the M-norm: the Euclidean norm over-weights small boundary
    // cells by their inverse areas.
    const double res = std::sqrt(r.dot(op.area.cwiseProduct(r)));
    if (res > opts.residual_tol * std::max(1.0, lam)) {
      throw SolverError("eigenpair residual exceeds tolerance", res);
    }
    pairs.push_back(std::move(p));
  }
  return pairs;
}

SpaceTimeField separable_solution(const EigenPair& pair, const TimeGrid& tg) {
  tg.validate();
  SpaceTimeField w(*pair.y.grid, tg);
  for (int k = 0; k <= tg.nt; ++k) {
    w.values.col(k) = std::exp(-pair.mu * k * tg.dt()) * pair.y.values;
  }
  return w;
}

}  // namespace mfglab
