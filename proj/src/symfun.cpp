#include "kcurv/symfun.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>

namespace kcurv {

HermitianMatrix HermitianMatrix::from(const MatC& raw, double tol) {
  if (raw.rows() != raw.cols() || raw.rows() < 1) {
    throw validation_error("hermitian matrix must be square and nonempty");
  }
  if (raw.rows() > 16) {
    throw validation_error("matrix dimension exceeds the supported limit 16");
  }
  const double scale = std::max(1.0, raw.cwiseAbs().maxCoeff());
  const double defect = (raw - raw.adjoint()).cwiseAbs().maxCoeff();
  if (defect > tol * scale) {
    throw validation_error("matrix is not hermitian: defect " +
                           std::to_string(defect) + " exceeds tolerance");
  }
  return HermitianMatrix{((raw + raw.adjoint()) / 2.0).eval()};
}

HermitianMatrix HermitianMatrix::assembled(const MatC& raw) {
  return HermitianMatrix{((raw + raw.adjoint()) / 2.0).eval()};
}

VecR eigenvalues(const HermitianMatrix& A) {
  Eigen::SelfAdjointEigenSolver<MatC> es(A.a, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) {
    throw check_error("hermitian eigensolver failed to converge");
  }
  return es.eigenvalues();
}

VecR elementary_symmetric(const VecR& lam) {
  const int m = static_cast<int>(lam.size());
  VecR esf = VecR::Zero(m + 1);
  esf(0) = 1.0;
  for (int i = 0; i < m; ++i) {
    for (int j = i + 1; j >= 1; --j) {
      esf(j) += lam(i) * esf(j - 1);
    }
  }
  return esf;
}

double binom(int n, int k) {
  if (k < 0 || k > n) return 0.0;
  k = std::min(k, n - k);
  double r = 1.0;
  for (int i = 1; i <= k; ++i) {
    r = r * static_cast<double>(n - k + i) / static_cast<double>(i);
  }
  return std::round(r);
}

namespace {
void check_k_range(int k, int n) {
  if (k < 0 || k > n) {
    throw validation_error("k = " + std::to_string(k) +
                           " out of range [0, " + std::to_string(n) + "]");
  }
}
}  // namespace

double sigma_k(const HermitianMatrix& A, int k) {
  check_k_range(k, A.dim());
  if (k == 0) return 1.0;
  return elementary_symmetric(eigenvalues(A))(k);
}

double sigma_k_minors(const HermitianMatrix& A, int k) {
  const int n = A.dim();
  check_k_range(k, n);
  if (k == 0) return 1.0;
  // enumerate k-subsets of {0..n-1} in lexicographic order
  std::vector<int> idx(k);
  for (int i = 0; i < k; ++i) idx[i] = i;
  double total = 0.0;
  while (true) {
    MatC sub(k, k);
    for (int r = 0; r < k; ++r) {
      for (int c = 0; c < k; ++c) sub(r, c) = A.a(idx[r], idx[c]);
    }
    total += sub.determinant().real();  // principal hermitian minor is real
    int pos = k - 1;
    while (pos >= 0 && idx[pos] == n - k + pos) --pos;
    if (pos < 0) break;
    ++idx[pos];
    for (int i = pos + 1; i < k; ++i) idx[i] = idx[i - 1] + 1;
  }
  return total;
}

HermitianMatrix newton_transform(const HermitianMatrix& A, int m) {
  const int n = A.dim();
  check_k_range(m, n);
  const VecR esf = elementary_symmetric(eigenvalues(A));
  MatC T = MatC::Identity(n, n);
  for (int j = 1; j <= m; ++j) {
    T = (esf(j) * MatC::Identity(n, n) - T * A.a).eval();
  }
  return HermitianMatrix::assembled(T);
}

HermitianMatrix newton_transform_direct(const HermitianMatrix& A, int m) {
  const int n = A.dim();
  check_k_range(m, n);
  const VecR esf = elementary_symmetric(eigenvalues(A));
  MatC T = MatC::Zero(n, n);
  MatC power = MatC::Identity(n, n);  // A^j
  double sign = 1.0;
  for (int j = 0; j <= m; ++j) {
    T += sign * esf(m - j) * power;
    power = (power * A.a).eval();
    sign = -sign;
  }
  return HermitianMatrix::assembled(T);
}

ConeReport cone_membership(const HermitianMatrix& A, int k) {
  const int n = A.dim();
  if (k < 1 || k > n) {
    throw validation_error("cone index k = " + std::to_string(k) +
                           " out of range [1, " + std::to_string(n) + "]");
  }
  const VecR esf = elementary_symmetric(eigenvalues(A));
  ConeReport rep;
  rep.k = k;
  rep.member = true;
  for (int j = 1; j <= k; ++j) {
    rep.sigmas.push_back(esf(j));
    const bool in = esf(j) > 0.0;
    rep.in_cone.push_back(in);
    rep.member = rep.member && in;
  }
  return rep;
}

InequalityReport inequality_suite(const HermitianMatrix& A, int k) {
  const int n = A.dim();
  const ConeReport cone = cone_membership(A, k);
  if (!cone.member) {
    throw hypothesis_error(
        "matrix is outside Gamma_" + std::to_string(k) +
        "^+: some sigma_j <= 0 for j <= k");
  }
  const VecR esf = elementary_symmetric(eigenvalues(A));
  InequalityReport rep;
  rep.n = n;
  rep.k = k;
  rep.sigma_km1 = esf(k - 1);
  rep.sigma_k = esf(k);
  if (k <= n - 1) {
    rep.sigma_kp1 = esf(k + 1);
    const double lhs =
        (static_cast<double>(n - k) / (static_cast<double>(n) * (k + 1))) *
        esf(k) * esf(1);
    rep.slack_ratio = lhs - esf(k + 1);
    rep.tol = 1e-10 * std::max(1.0, std::abs(lhs));
    rep.equality = std::abs(*rep.slack_ratio) <= rep.tol;
  } else {
    rep.tol = 0.0;
    rep.equality = false;  // detector undefined at k = n; see README notes
  }
  const double coeff =
      static_cast<double>(k) / static_cast<double>(n - k + 1);
  rep.slack_power = esf(k - 1) - coeff * std::pow(binom(n, k), 1.0 / k) *
                                     std::pow(esf(k), double(k - 1) / k);
  return rep;
}

ConcavityReport concavity_check(const HermitianMatrix& A,
                                const HermitianMatrix& B, int k,
                                const std::vector<double>& ts) {
  if (A.dim() != B.dim()) {
    throw validation_error("concavity endpoints have mismatched dimensions");
  }
  if (ts.size() < 3) {
    throw validation_error("concavity check needs at least 3 t-samples");
  }
  auto root_k = [k](const HermitianMatrix& M) {
    const ConeReport c = cone_membership(M, k);
    if (!c.member) {
      throw hypothesis_error(
          "segment sample leaves Gamma_" + std::to_string(k) + "^+");
    }
    return std::pow(c.sigmas[static_cast<std::size_t>(k) - 1], 1.0 / k);
  };
  const double fA = root_k(A);
  const double fB = root_k(B);
  ConcavityReport rep;
  rep.min_gap = std::numeric_limits<double>::infinity();
  for (double t : ts) {
    if (t < 0.0 || t > 1.0) {
      throw validation_error("t-sample outside [0, 1]");
    }
    const HermitianMatrix M =
        HermitianMatrix::assembled(((1.0 - t) * A.a + t * B.a).eval());
    const double gap = root_k(M) - (1.0 - t) * fA - t * fB;
    rep.t.push_back(t);
    rep.gap.push_back(gap);
    rep.min_gap = std::min(rep.min_gap, gap);
  }
  return rep;
}

HermitianMatrix raise_index(const HermitianMatrix& S_lower,
                            const HermitianMatrix& h) {
  if (S_lower.dim() != h.dim()) {
    throw validation_error("raise_index: dimension mismatch");
  }
  Eigen::LLT<MatC> llt(h.a);
  if (llt.info() != Eigen::Success) {
    throw validation_error("raise_index: h is not positive definite");
  }
  const MatC L = llt.matrixL();
  // M = L^{-1} S L^{-dagger}: solve L X = S, then M = X L^{-dagger}
  const MatC X = L.triangularView<Eigen::Lower>().solve(S_lower.a);
  const MatC M = L.triangularView<Eigen::Lower>()
                     .solve(X.adjoint())
                     .adjoint();
  return HermitianMatrix::assembled(M);
}

}  // namespace kcurv
