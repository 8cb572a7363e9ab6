#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace cdslab {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Piecewise-linear deterministic curve of time with flat extrapolation
/// outside the knot range. A single knot is a constant.
class Curve {
 public:
  Curve() : Curve(0.0) {}
  explicit Curve(double constant);
  Curve(std::vector<double> times, std::vector<double> values);

  double value(double t) const;
  /// Exact integral of the curve over [0, t].
  double integral(double t) const;

  bool is_constant() const;
  double max_abs() const;
  double max_slope() const;

  const std::vector<double>& times() const { return times_; }
  const std::vector<double>& values() const { return values_; }

 private:
  std::vector<double> times_;
  std::vector<double> values_;
};

enum class ContagionMode { None, LinearInDefaults };

/// Volatility of name i is base_vol[i] * (1 + jump_coeff[i] * min(alpha, max_jumps)),
/// alpha being the running number of reference-name defaults.
struct ContagionRule {
  ContagionMode mode = ContagionMode::None;
  Vector jump_coeff;
  int max_jumps = -1;  // -1: use the number of reference names

  int effective_max_jumps(int n_ref) const { return max_jumps < 0 ? n_ref : max_jumps; }
};

/// Index 0 is the protection seller (counterparty); 1..n_ref the reference basket.
struct MarketModel {
  int n_ref = 0;
  Vector v0;
  std::vector<Curve> drift;
  Vector base_vol;
  Matrix correlation;
  ContagionRule contagion;
  double k_bound = 1e6;
  std::vector<std::string> names;

  int dim() const { return n_ref + 1; }
};

/// Default barrier level * exp(growth * t). A zero level never triggers.
struct Barrier {
  double level = 0.0;
  double growth = 0.0;

  double value(double t) const;
  bool default_free() const { return level == 0.0; }
};

enum class DiscountMode { Constant, Curve, Vasicek };

struct VasicekParams {
  double speed = 0.0;
  double long_run = 0.0;
  double vol = 0.0;
  double r0 = 0.0;
};

struct DiscountRule {
  DiscountMode mode = DiscountMode::Constant;
  double rate = 0.0;
  Curve curve;
  VasicekParams vasicek;

  static DiscountRule constant(double r) {
    DiscountRule d;
    d.rate = r;
    return d;
  }
};

struct ContractSpec {
  double maturity = 0.0;
  std::vector<double> premium_dates;
  std::vector<double> recovery;  // indexed by seniority - 1
  int seniority = 1;
  DiscountRule discount;
  std::vector<Barrier> barriers;

  /// Default times are censored here, one year past maturity.
  double horizon() const { return maturity + 1.0; }
  std::vector<double> delta_t() const;
  double recovery_rate() const { return recovery.at(static_cast<std::size_t>(seniority - 1)); }
};

struct SimConfig {
  int steps = 64;  // steps per maturity, h = T / steps
  std::int64_t paths = 10000;
  std::uint64_t seed = 1;
  int workers = 1;
  int chunk_size = 1024;
};

/// Uniform grid t_n = n h extended past maturity until it covers the horizon.
struct TimeGrid {
  double maturity = 0.0;
  double horizon = 0.0;
  int steps_per_maturity = 0;
  double h = 0.0;
  int n_steps = 0;  // ceil(horizon / h)

  static TimeGrid make(double maturity, int steps_per_maturity);
  double time(int n) const { return n * h; }
  /// Largest grid index whose time does not exceed the horizon.
  int last_monitored() const;
};

enum class Check { Pass, Fail, Certified, Unknown };

const char* to_string(Check c);

struct ValidationReport {
  Check bounds = Check::Unknown;          // A1
  Check nondegenerate = Check::Unknown;   // A2
  Check continuity = Check::Unknown;      // A3
  Check zero_correlation = Check::Unknown;  // A4
  Check piecewise_constant = Check::Unknown;  // A5
  double min_eigenvalue = 0.0;  // of the correlation matrix
  double lambda = 0.0;          // lower bound of sigma sigma^T
  bool counterparty_default_free = false;
  std::vector<std::string> errors;

  /// Structurally valid with bounded and nondegenerate coefficients.
  bool ok() const;
  /// Every hypothesis of the swap-rate convergence result holds.
  bool convergence_applies() const;
};

ValidationReport validate(const MarketModel& model, const ContractSpec& contract);
void validate_sim(const SimConfig& sim, std::vector<std::string>& errors);

/// Lower-triangular A with A A^T = rho. Throws NotPositiveDefinite.
Matrix chol_factor(const Matrix& rho);
/// Same, but zero pivots yield zero columns instead of an error. Only for
/// deliberately degenerate negative-control models.
Matrix chol_factor_semidefinite(const Matrix& rho);

/// diag(base_vol_i * (1 + a_i * min(alpha, max_jumps))) * factor.
void instantaneous_sigma(const MarketModel& model, const Matrix& factor, int alpha, Matrix& out);
Matrix instantaneous_sigma(const MarketModel& model, const Matrix& factor, int alpha);

}  // namespace cdslab
