#include "qcost/profiled_sse.hpp"

#include <algorithm>
#include <cmath>

#include "qcost/errors.hpp"

namespace qcost {

PsdSolve solve_psd_rank_tolerant(const Eigen::MatrixXd& S,
                                 const Eigen::VectorXd& rhs, double tol) {
  const Eigen::Index n = S.rows();
  PsdSolve out;
  out.x = Eigen::VectorXd::Zero(n);

  // Jacobi equilibration gives the pivot tolerance a uniform meaning.
  Eigen::VectorXd d(n);
  for (Eigen::Index j = 0; j < n; ++j) {
    const double sj = S(j, j);
    d[j] = sj > 0.0 ? std::sqrt(sj) : 1.0;
  }
  Eigen::MatrixXd A = S;
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) A(i, j) /= d[i] * d[j];
  Eigen::VectorXd b = rhs.array() / d.array();

  std::vector<Eigen::Index> perm(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) perm[static_cast<std::size_t>(i)] = i;

  Eigen::Index rank = n;
  for (Eigen::Index k = 0; k < n; ++k) {
    // Diagonal pivoting: largest remaining diagonal entry.
    Eigen::Index best = k;
    for (Eigen::Index j = k + 1; j < n; ++j)
      if (A(j, j) > A(best, best)) best = j;
    if (!(A(best, best) > tol)) {
      rank = k;
      break;
    }
    if (best != k) {
      A.row(k).swap(A.row(best));
      A.col(k).swap(A.col(best));
      std::swap(b[k], b[best]);
      std::swap(perm[static_cast<std::size_t>(k)],
                perm[static_cast<std::size_t>(best)]);
    }
    const double piv = std::sqrt(A(k, k));
    A(k, k) = piv;
    if (k + 1 < n) {
      const Eigen::Index m = n - k - 1;
      A.col(k).segment(k + 1, m) /= piv;
      // Full trailing-block update keeps both triangles valid, which the
      // symmetric pivot swaps rely on.
      for (Eigen::Index j = k + 1; j < n; ++j) {
        const double f = A(j, k);
        if (f != 0.0)
          A.col(j).segment(k + 1, m).noalias() -=
              f * A.col(k).segment(k + 1, m);
      }
    }
  }

  // Forward/back substitution on the leading rank x rank factor; coordinates
  // beyond the numerical rank stay at zero (restricted least squares).
  Eigen::VectorXd u = b.head(rank);
  for (Eigen::Index i = 0; i < rank; ++i) {
    for (Eigen::Index j = 0; j < i; ++j) u[i] -= A(i, j) * u[j];
    u[i] /= A(i, i);
  }
  for (Eigen::Index i = rank - 1; i >= 0; --i) {
    for (Eigen::Index j = i + 1; j < rank; ++j) u[i] -= A(j, i) * u[j];
    u[i] /= A(i, i);
  }

  for (Eigen::Index i = 0; i < rank; ++i)
    out.x[perm[static_cast<std::size_t>(i)]] =
        u[i] / d[perm[static_cast<std::size_t>(i)]];
  out.rank = static_cast<int>(rank);
  for (Eigen::Index i = rank; i < n; ++i)
    out.dropped.push_back(static_cast<int>(perm[static_cast<std::size_t>(i)]));
  std::sort(out.dropped.begin(), out.dropped.end());
  return out;
}

ProfiledSse::ProfiledSse(const TranslogDesign& design)
    : T_(design.T),
      obs_bank_(design.group),
      obs_year_(design.time),
      bank_start_(design.bank_start),
      bank_count_(design.bank_count) {
  const Eigen::Index N = design.rows();
  if (T_ < 2) throw Error(ErrorKind::data, "design needs T >= 2");
  const int Tm1 = T_ - 1;

  X_.resize(N, kBase);
  X_.leftCols(kNumRegressors) = design.v;
  X_.rightCols(kNumQuad) = 0.5 * design.vquad;

  // Within-demeaned copy (bank blocks are contiguous).
  Z_.resize(N, kBase);
  for (std::size_t bk = 0; bk < bank_start_.size(); ++bk) {
    const int s = bank_start_[bk];
    const int c = bank_count_[bk];
    const Eigen::RowVectorXd mean = X_.middleRows(s, c).colwise().mean();
    Z_.middleRows(s, c) = X_.middleRows(s, c).rowwise() - mean;
  }

  A_.noalias() = Z_.transpose() * Z_;

  M_.assign(static_cast<std::size_t>(Tm1), Eigen::MatrixXd::Zero(kBase, kBase));
  N_.assign(static_cast<std::size_t>(Tm1), Eigen::MatrixXd::Zero(kBase, kBase));
  p_ = Eigen::MatrixXd::Zero(Tm1, kBase);
  n_ = Eigen::MatrixXd::Zero(Tm1, kBase);
  m_ = Eigen::VectorXd::Zero(Tm1);
  for (Eigen::Index i = 0; i < N; ++i) {
    const int t = obs_year_[static_cast<std::size_t>(i)];
    if (t < 2) continue;
    const int k = yi(t);
    M_[static_cast<std::size_t>(k)].noalias() +=
        Z_.row(i).transpose() * X_.row(i);
    N_[static_cast<std::size_t>(k)].noalias() +=
        X_.row(i).transpose() * X_.row(i);
    p_.row(k) += Z_.row(i);
    n_.row(k) += X_.row(i);
    m_[k] += 1.0;
  }

  G_.assign(static_cast<std::size_t>(Tm1 * Tm1),
            Eigen::MatrixXd::Zero(kBase, kBase));
  g_.assign(static_cast<std::size_t>(Tm1),
            Eigen::MatrixXd::Zero(Tm1, kBase));
  h_ = Eigen::MatrixXd::Zero(Tm1, Tm1);
  for (std::size_t bk = 0; bk < bank_start_.size(); ++bk) {
    const int s0 = bank_start_[bk];
    const int c = bank_count_[bk];
    const double invT = 1.0 / static_cast<double>(c);
    for (int a = 0; a < c; ++a) {
      const int ta = obs_year_[static_cast<std::size_t>(s0 + a)];
      if (ta < 2) continue;
      const int ka = yi(ta);
      for (int bidx = 0; bidx < c; ++bidx) {
        const int tb = obs_year_[static_cast<std::size_t>(s0 + bidx)];
        if (tb < 2) continue;
        const int kb = yi(tb);
        if (kb >= ka) {
          G_[static_cast<std::size_t>(ka * Tm1 + kb)].noalias() +=
              invT * (X_.row(s0 + a).transpose() * X_.row(s0 + bidx));
        }
        g_[static_cast<std::size_t>(ka)].row(kb) += invT * X_.row(s0 + a);
      }
    }
    // h_{ts} = sum over banks having both years of 1/T_i
    for (int a = 0; a < c; ++a) {
      const int ta = obs_year_[static_cast<std::size_t>(s0 + a)];
      if (ta < 2) continue;
      for (int bidx = 0; bidx < c; ++bidx) {
        const int tb = obs_year_[static_cast<std::size_t>(s0 + bidx)];
        if (tb < 2) continue;
        h_(yi(ta), yi(tb)) += invT;
      }
    }
  }
  for (int ka = 0; ka < Tm1; ++ka)
    for (int kb = 0; kb < ka; ++kb)
      G_[static_cast<std::size_t>(ka * Tm1 + kb)] =
          G_[static_cast<std::size_t>(kb * Tm1 + ka)].transpose();
}

ProfiledSse::Response ProfiledSse::bind(const Eigen::VectorXd& y) const {
  if (y.size() != X_.rows())
    throw Error(ErrorKind::data, "response length mismatch");
  const int Tm1 = T_ - 1;
  Response r;
  Eigen::VectorXd ytil(y.size());
  for (std::size_t bk = 0; bk < bank_start_.size(); ++bk) {
    const int s = bank_start_[bk];
    const int c = bank_count_[bk];
    const double mean = y.segment(s, c).mean();
    ytil.segment(s, c) = y.segment(s, c).array() - mean;
  }
  r.p0.noalias() = Z_.transpose() * ytil;
  r.q = Eigen::MatrixXd::Zero(Tm1, kBase);
  r.s = Eigen::VectorXd::Zero(Tm1);
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    const int t = obs_year_[static_cast<std::size_t>(i)];
    if (t < 2) continue;
    r.q.row(yi(t)) += ytil[i] * X_.row(i);
    r.s[yi(t)] += ytil[i];
  }
  r.ssq = ytil.squaredNorm();
  return r;
}

ProfiledSse::Eval ProfiledSse::evaluate(const Eigen::VectorXd& eta,
                                        const Response& r) const {
  const int Tm1 = T_ - 1;
  if (eta.size() != Tm1)
    throw Error(ErrorKind::estimation, "eta must have T-1 entries");

  Eigen::MatrixXd S = Eigen::MatrixXd::Zero(kFull, kFull);
  S.topLeftCorner(kBase, kBase) = A_;

  Eigen::MatrixXd B = Eigen::MatrixXd::Zero(kBase, kBase);
  Eigen::MatrixXd C = Eigen::MatrixXd::Zero(kBase, kBase);
  for (int k = 0; k < Tm1; ++k) {
    const double e = eta[k];
    if (e != 0.0) {
      B.noalias() += e * M_[static_cast<std::size_t>(k)];
      C.noalias() += (e * e) * N_[static_cast<std::size_t>(k)];
    }
  }
  for (int ka = 0; ka < Tm1; ++ka) {
    if (eta[ka] == 0.0) continue;
    for (int kb = 0; kb < Tm1; ++kb) {
      const double w = eta[ka] * eta[kb];
      if (w != 0.0)
        C.noalias() -= w * G_[static_cast<std::size_t>(ka * Tm1 + kb)];
    }
  }
  S.topRightCorner(kBase, kBase) = B;
  S.bottomLeftCorner(kBase, kBase) = B.transpose();
  S.bottomRightCorner(kBase, kBase) = C;

  Eigen::VectorXd rhs(kFull);
  rhs.head(kBase) = r.p0;
  rhs.tail(kBase).setZero();
  double yty = r.ssq;
  for (int k = 0; k < Tm1; ++k) {
    const double e = eta[k];
    if (e == 0.0) continue;
    rhs.head(kBase) -= e * p_.row(k).transpose();
    rhs.tail(kBase) += e * r.q.row(k).transpose();
    rhs.tail(kBase) -= (e * e) * n_.row(k).transpose();
    yty -= 2.0 * e * r.s[k];
    yty += e * e * m_[k];
    for (int kb = 0; kb < Tm1; ++kb) {
      const double eb = eta[kb];
      if (eb == 0.0) continue;
      rhs.tail(kBase) +=
          (e * eb) * g_[static_cast<std::size_t>(k)].row(kb).transpose();
      yty -= e * eb * h_(k, kb);
    }
  }

  auto sol = solve_psd_rank_tolerant(S, rhs);
  Eval ev;
  ev.coef = std::move(sol.x);
  ev.rank = sol.rank;
  ev.sse = std::max(0.0, yty - ev.coef.dot(rhs));
  return ev;
}

std::vector<std::string> ProfiledSse::collinear_base_columns(double tol) const {
  auto sol = solve_psd_rank_tolerant(A_, Eigen::VectorXd::Zero(kBase), tol);
  std::vector<std::string> names;
  for (int idx : sol.dropped) {
    if (idx < kNumRegressors)
      names.push_back(regressor_labels()[static_cast<std::size_t>(idx)]);
    else
      names.push_back(quad_label(idx - kNumRegressors));
  }
  return names;
}

}  // namespace qcost
