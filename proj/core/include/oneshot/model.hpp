#ifndef ONESHOT_MODEL_HPP
#define ONESHOT_MODEL_HPP

#include <Eigen/Core>
#include <stdexcept>
#include <vector>

namespace oneshot {

/// Thrown when a computation fails for numerical reasons (singular matrix,
/// divergence, overflow) as opposed to invalid user input.
class NumericalError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Lifetime family member. Both satisfy F(t) = 1 - exp(-lambda * Q(t; gamma))
/// with Q strictly increasing in t for gamma > 0.
enum class DistributionKind {
  Weibull,   // Q(t; g) = t^g
  Gompertz,  // Q(t; g) = exp(g*t) - 1
};

double q_fn(DistributionKind kind, double t, double g);
double q_dt(DistributionKind kind, double t, double g);    // dQ/dt
double q_dg(DistributionKind kind, double t, double g);    // dQ/dgamma
double q_dt_dg(DistributionKind kind, double t, double g); // d2Q/dt dgamma

/// Geometry of the step-stress experiment: stress levels, change points,
/// inspection grid and the lag period during which the hazard interpolates
/// linearly after a stress change.
struct TestPlan {
  std::vector<double> stress;                    // x_i, one per level
  std::vector<double> change_points;             // tau_i, last one terminates
  std::vector<std::vector<double>> inspections;  // tau_{i,m}, last == tau_i
  double lag = 0.0;                              // delta

  int levels() const { return static_cast<int>(stress.size()); }
  int num_inspections(int level) const {
    return static_cast<int>(inspections[level].size());
  }
  int total_cells() const;  // failure cells only, excludes survival
  int param_dim() const { return levels() + 2; }

  /// Left endpoint of the failure interval for cell (level, m):
  /// tau_{i,m-1}, falling back to the previous change point (or 0) at m = 0.
  double left_edge(int level, int m) const;

  double termination() const { return change_points.back(); }

  /// Flat index of the cell containing time t; total_cells() means survival.
  int locate(double t) const;
  int flat_index(int level, int m) const;

  /// Throws std::invalid_argument if the geometry is inconsistent.
  void validate() const;
};

/// Model parameters theta = (c0, c1, gamma_1..gamma_k), gamma_i > 0.
struct ParamVector {
  double c0 = 0.0;
  double c1 = 0.0;
  std::vector<double> gammas;

  int dim() const { return static_cast<int>(gammas.size()) + 2; }
  Eigen::VectorXd as_vector() const;
  static ParamVector from_vector(const Eigen::VectorXd& v);
  bool valid() const;
};

/// Theoretical failure/survival probabilities on the plan's inspection grid.
struct CellProbs {
  std::vector<std::vector<double>> p;  // p[level][m]
  double p_s = 0.0;
  bool clamped = false;  // set when any cell hit the probability floor

  /// Flat vector, failure cells level-major then the survival cell last.
  Eigen::VectorXd flat() const;
  double total() const;
};

/// Observed interval failure counts plus survivors.
struct CountData {
  std::vector<std::vector<long>> counts;  // n_{im}, matches the plan grid
  long survivors = 0;
  long total = 0;

  long total_failures() const;
  Eigen::VectorXd flat_fractions() const;  // (n_cell/n, ..., n_s/n)
  void validate(const TestPlan& plan) const;
};

double lambda_of_stress(double c0, double c1, double x);

/// Piecewise hazard of the cumulative risk model, linear over each lag
/// segment (tau_{i-1}, tau_{i-1} + delta].
double crm_hazard(const TestPlan& plan, DistributionKind dist,
                  const ParamVector& theta, double t);

/// Integrated hazard; optionally accumulates d/dtheta into *grad
/// (size k+2, zeroed first).
double crm_cumulative_hazard(const TestPlan& plan, DistributionKind dist,
                             const ParamVector& theta, double t,
                             Eigen::VectorXd* grad = nullptr);

double crm_survival(const TestPlan& plan, DistributionKind dist,
                    const ParamVector& theta, double t);

/// Interval probabilities assembled from the closed-form survival pieces.
CellProbs cell_probabilities(const TestPlan& plan, DistributionKind dist,
                             const ParamVector& theta);

/// Analytic d p_r / d theta_h for every cell r (survival last) and every
/// parameter; rows telescope to zero by construction.
Eigen::MatrixXd cell_prob_gradient(const TestPlan& plan, DistributionKind dist,
                                   const ParamVector& theta);

/// Max relative mismatch between the analytic gradient and central finite
/// differences; self-check used by samplers and diagnostics.
double gradient_self_check(const TestPlan& plan, DistributionKind dist,
                           const ParamVector& theta, double step = 1e-6);

}  // namespace oneshot

#endif
