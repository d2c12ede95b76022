#pragma once

#include <Eigen/Dense>
#include <vector>

#include "qcost/design.hpp"

namespace qcost {

// Rank-tolerant solve of the PSD system S b = rhs after Jacobi
// equilibration: pivots falling below tol (relative to the equilibrated
// unit diagonal) are treated as unidentified and their coordinates set to 0,
// which minimizes the underlying least-squares objective on the identified
// subspace. Returns the solution, the numerical rank, and dropped indices.
struct PsdSolve {
  Eigen::VectorXd x;
  int rank = 0;
  std::vector<int> dropped;
};
PsdSolve solve_psd_rank_tolerant(const Eigen::MatrixXd& S,
                                 const Eigen::VectorXd& rhs,
                                 double tol = 1e-12);

// Concentrated sum of within-transformed squared errors for the time-index
// model: given eta (one entry per year t = 2..T), the inner linear
// coefficients (base and starred blocks) have a closed-form least-squares
// solution; evaluate() returns the profiled objective and those coefficients.
//
// The within-transformed design row is
//   [ x_it - mean_i(x),  eta_t * x_it - mean_i(eta x) ]
// with x_it = [v_it; 0.5 * vquad_it] (54 columns), and the response is
//   (y_it - mean_i(y)) - (eta_t - mean_i(eta)).
// All eta-independent cross moments are precomputed once per design so an
// evaluation costs O(T^2 d^2 + d^3) instead of O(N d^2); the response-side
// moments are rebuilt per outcome vector, which is what makes bootstrap
// replicas cheap.
class ProfiledSse {
 public:
  static constexpr int kBase = kNumRegressors + kNumQuad;  // 54
  static constexpr int kFull = 2 * kBase;                  // 108

  explicit ProfiledSse(const TranslogDesign& design);

  struct Response {
    Eigen::VectorXd p0;   // sum z * ytilde            (54)
    Eigen::MatrixXd q;    // per year t>=2: sum_t x * ytilde, rows T-1 x 54
    Eigen::VectorXd s;    // per year t>=2: sum_t ytilde      (T-1)
    double ssq = 0.0;     // sum ytilde^2
  };
  Response bind(const Eigen::VectorXd& y) const;

  struct Eval {
    double sse = 0.0;
    Eigen::VectorXd coef;  // 108: [beta1(9); beta2(45); beta1*(9); beta2*(45)]
    int rank = 0;
  };
  Eval evaluate(const Eigen::VectorXd& eta, const Response& r) const;

  // Numerically dependent columns among the 54 eta-independent within
  // regressors; empty means full rank. Labels match regressor/quad naming.
  std::vector<std::string> collinear_base_columns(double tol = 1e-10) const;

  int T() const { return T_; }
  Eigen::Index observations() const { return X_.rows(); }

 private:
  int T_;
  Eigen::MatrixXd X_;  // N x 54 raw x
  Eigen::MatrixXd Z_;  // N x 54 within-demeaned x

  Eigen::MatrixXd A_;               // 54 x 54
  std::vector<Eigen::MatrixXd> M_;  // per year t>=2: sum z x'
  std::vector<Eigen::MatrixXd> N_;  // per year t>=2: sum x x'
  std::vector<Eigen::MatrixXd> G_;  // (T-1)^2: sum_i x_it x_is' / T_i
  Eigen::MatrixXd p_;               // (T-1) x 54: per year sum z
  Eigen::MatrixXd n_;               // (T-1) x 54: per year sum x
  std::vector<Eigen::MatrixXd> g_;  // (T-1): rows s -> sum_i x_it 1{has s}/T_i
  Eigen::MatrixXd h_;               // (T-1)^2: sum_i 1{has t,s}/T_i
  Eigen::VectorXd m_;               // (T-1): observation counts per year

  std::vector<int> obs_bank_;
  std::vector<int> obs_year_;       // t in 1..T
  std::vector<int> bank_start_;
  std::vector<int> bank_count_;

  int yi(int t) const { return t - 2; }  // year t>=2 -> array index
};

}  // namespace qcost
