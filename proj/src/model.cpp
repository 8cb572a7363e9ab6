#include "cdslab/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "cdslab/error.hpp"

namespace cdslab {

namespace {

constexpr double kPivotTolerance = 1e-14;

template <typename... Args>
std::string concat(const Args&... args) {
  std::ostringstream os;
  (os << ... << args);
  return os.str();
}

}  // namespace

// ---------------------------------------------------------------------------
// Curve

Curve::Curve(double constant) : times_{0.0}, values_{constant} {}

Curve::Curve(std::vector<double> times, std::vector<double> values)
    : times_(std::move(times)), values_(std::move(values)) {
  if (times_.empty() || times_.size() != values_.size()) {
    throw std::invalid_argument("curve needs matching, non-empty knot times and values");
  }
  for (std::size_t i = 1; i < times_.size(); ++i) {
    if (!(times_[i] > times_[i - 1])) {
      throw std::invalid_argument("curve knot times must be strictly increasing");
    }
  }
}

double Curve::value(double t) const {
  if (t <= times_.front()) return values_.front();
  if (t >= times_.back()) return values_.back();
  auto it = std::upper_bound(times_.begin(), times_.end(), t);
  std::size_t j = static_cast<std::size_t>(it - times_.begin());
  double w = (t - times_[j - 1]) / (times_[j] - times_[j - 1]);
  return values_[j - 1] + w * (values_[j] - values_[j - 1]);
}

double Curve::integral(double t) const {
  if (t == 0.0) return 0.0;
  double lo = std::min(0.0, t);
  double hi = std::max(0.0, t);
  // consecutive breakpoints include every knot in (lo, hi); the curve is
  // linear between them so the trapezoid rule is exact
  double total = 0.0;
  double a = lo;
  double fa = value(a);
  for (double knot : times_) {
    if (knot <= lo || knot >= hi) continue;
    double fk = value(knot);
    total += 0.5 * (fa + fk) * (knot - a);
    a = knot;
    fa = fk;
  }
  total += 0.5 * (fa + value(hi)) * (hi - a);
  return t > 0.0 ? total : -total;
}

bool Curve::is_constant() const {
  return std::all_of(values_.begin(), values_.end(), [&](double v) { return v == values_.front(); });
}

double Curve::max_abs() const {
  double m = 0.0;
  for (double v : values_) m = std::max(m, std::abs(v));
  return m;
}

double Curve::max_slope() const {
  double m = 0.0;
  for (std::size_t i = 1; i < times_.size(); ++i) {
    m = std::max(m, std::abs(values_[i] - values_[i - 1]) / (times_[i] - times_[i - 1]));
  }
  return m;
}

// ---------------------------------------------------------------------------

double Barrier::value(double t) const {
  if (growth == 0.0) return level;
  return level * std::exp(growth * t);
}

std::vector<double> ContractSpec::delta_t() const {
  std::vector<double> out(premium_dates.size());
  double prev = 0.0;
  for (std::size_t j = 0; j < premium_dates.size(); ++j) {
    out[j] = premium_dates[j] - prev;
    prev = premium_dates[j];
  }
  return out;
}

TimeGrid TimeGrid::make(double maturity, int steps_per_maturity) {
  if (!(maturity > 0.0) || steps_per_maturity < 1) {
    throw std::invalid_argument("time grid needs maturity > 0 and at least one step");
  }
  TimeGrid g;
  g.maturity = maturity;
  g.horizon = maturity + 1.0;
  g.steps_per_maturity = steps_per_maturity;
  g.h = maturity / steps_per_maturity;
  g.n_steps = static_cast<int>(std::ceil(g.horizon / g.h - 1e-9));
  return g;
}

int TimeGrid::last_monitored() const {
  return time(n_steps) <= horizon * (1.0 + 1e-12) ? n_steps : n_steps - 1;
}

const char* to_string(Check c) {
  switch (c) {
    case Check::Pass: return "pass";
    case Check::Fail: return "fail";
    case Check::Certified: return "certified by construction";
    case Check::Unknown: return "unknown";
  }
  return "unknown";
}

bool ValidationReport::ok() const {
  return errors.empty() && bounds == Check::Pass && nondegenerate == Check::Pass;
}

bool ValidationReport::convergence_applies() const {
  return ok() && continuity == Check::Certified &&
         (zero_correlation == Check::Pass || piecewise_constant == Check::Pass ||
          counterparty_default_free);
}

// ---------------------------------------------------------------------------
// Cholesky

namespace {

Matrix cholesky_impl(const Matrix& rho, bool semidefinite) {
  if (rho.rows() != rho.cols()) throw std::invalid_argument("correlation matrix must be square");
  const Eigen::Index n = rho.rows();
  Matrix a = Matrix::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j <= i; ++j) {
      double sum = rho(i, j);
      for (Eigen::Index p = 0; p < j; ++p) sum -= a(i, p) * a(j, p);
      if (i == j) {
        double scale = std::max(1.0, std::abs(rho(i, i)));
        if (!(sum > kPivotTolerance * scale)) {
          if (!semidefinite) throw NotPositiveDefinite(static_cast<int>(i + 1));
          a(i, i) = 0.0;
        } else {
          a(i, i) = std::sqrt(sum);
        }
      } else {
        a(i, j) = a(j, j) > 0.0 ? sum / a(j, j) : 0.0;
      }
    }
  }
  return a;
}

}  // namespace

Matrix chol_factor(const Matrix& rho) { return cholesky_impl(rho, false); }

Matrix chol_factor_semidefinite(const Matrix& rho) { return cholesky_impl(rho, true); }

void instantaneous_sigma(const MarketModel& model, const Matrix& factor, int alpha, Matrix& out) {
  const int d = model.dim();
  out.resize(d, d);
  const bool contagion = model.contagion.mode == ContagionMode::LinearInDefaults;
  const int jumps = contagion ? std::min(alpha, model.contagion.effective_max_jumps(model.n_ref)) : 0;
  for (int i = 0; i < d; ++i) {
    double scale = model.base_vol[i];
    if (jumps > 0) scale *= 1.0 + model.contagion.jump_coeff[i] * jumps;
    out.row(i) = scale * factor.row(i);
  }
}

Matrix instantaneous_sigma(const MarketModel& model, const Matrix& factor, int alpha) {
  Matrix out;
  instantaneous_sigma(model, factor, alpha, out);
  return out;
}

// ---------------------------------------------------------------------------
// Validation

namespace {

bool all_finite(const Vector& v) { return v.allFinite(); }

void check_model_shape(const MarketModel& m, std::vector<std::string>& errors) {
  const auto d = static_cast<Eigen::Index>(m.dim());
  if (m.n_ref < 1) errors.push_back("model/n_ref: at least one reference name is required");
  if (m.v0.size() != d) errors.push_back(concat("model/v0: expected ", d, " entries"));
  if (static_cast<Eigen::Index>(m.drift.size()) != d)
    errors.push_back(concat("model/drift: expected ", d, " entries"));
  if (m.base_vol.size() != d) errors.push_back(concat("model/base_vol: expected ", d, " entries"));
  if (m.correlation.rows() != d || m.correlation.cols() != d)
    errors.push_back(concat("model/correlation: expected a ", d, "x", d, " matrix"));
  if (m.contagion.mode == ContagionMode::LinearInDefaults && m.contagion.jump_coeff.size() != d)
    errors.push_back(concat("model/contagion/jump_coeff: expected ", d, " entries"));
}

}  // namespace

ValidationReport validate(const MarketModel& model, const ContractSpec& contract) {
  ValidationReport rep;
  auto& errors = rep.errors;
  check_model_shape(model, errors);
  if (!errors.empty()) {
    rep.bounds = rep.nondegenerate = Check::Fail;
    return rep;
  }
  const int d = model.dim();
  const int k = model.n_ref;
  const auto& cg = model.contagion;
  const bool linear = cg.mode == ContagionMode::LinearInDefaults;
  const int max_jumps = cg.effective_max_jumps(k);

  for (int i = 0; i < d; ++i) {
    if (!(model.v0[i] > 0.0) || !std::isfinite(model.v0[i]))
      errors.push_back(concat("model/v0/", i, ": initial firm value must be > 0"));
    if (!(model.base_vol[i] >= 0.0) || !std::isfinite(model.base_vol[i]))
      errors.push_back(concat("model/base_vol/", i, ": base volatility must be >= 0"));
  }
  if (linear) {
    for (int i = 0; i < d; ++i) {
      if (!(cg.jump_coeff[i] >= 0.0))
        errors.push_back(concat("model/contagion/jump_coeff/", i, ": must be >= 0"));
    }
  }
  if (max_jumps < 0 || max_jumps > k)
    errors.push_back(concat("model/contagion/max_jumps: must lie in [0, ", k, "]"));

  // correlation structure
  const Matrix& rho = model.correlation;
  bool symmetric = rho.allFinite();
  for (int i = 0; i < d && symmetric; ++i) {
    for (int j = 0; j < i; ++j) {
      if (std::abs(rho(i, j) - rho(j, i)) > 1e-12) symmetric = false;
    }
  }
  if (!symmetric) errors.push_back("model/correlation: matrix must be symmetric");
  for (int i = 0; i < d; ++i) {
    if (std::abs(rho(i, i) - 1.0) > 1e-12)
      errors.push_back(concat("model/correlation/", i, "/", i, ": diagonal must be 1"));
    for (int j = 0; j < d; ++j) {
      if (std::abs(rho(i, j)) > 1.0 + 1e-12)
        errors.push_back(concat("model/correlation/", i, "/", j, ": entries must lie in [-1, 1]"));
    }
  }

  // contract
  const double T = contract.maturity;
  if (!(T > 0.0) || !std::isfinite(T)) errors.push_back("contract/maturity: must be > 0");
  const auto& dates = contract.premium_dates;
  if (dates.empty()) {
    errors.push_back("contract/premium_dates: at least one premium date is required");
  } else {
    double prev = 0.0;
    for (std::size_t j = 0; j < dates.size(); ++j) {
      if (!(dates[j] > prev)) {
        errors.push_back(concat("contract/premium_dates/", j, ": dates must be positive and strictly increasing"));
        break;
      }
      prev = dates[j];
    }
    if (dates.back() != T) errors.push_back("contract/premium_dates: last date must equal the maturity");
  }
  if (static_cast<int>(contract.recovery.size()) != k)
    errors.push_back(concat("contract/recovery: expected ", k, " entries"));
  for (std::size_t j = 0; j < contract.recovery.size(); ++j) {
    double delta = contract.recovery[j];
    if (!(delta >= 0.0 && delta <= 1.0))
      errors.push_back(concat("contract/recovery/", j, ": must lie in [0, 1]"));
  }
  if (contract.seniority < 1 || contract.seniority > k)
    errors.push_back(concat("contract/seniority: must lie in [1, ", k, "]"));
  if (static_cast<int>(contract.barriers.size()) != d) {
    errors.push_back(concat("contract/barriers: expected ", d, " entries"));
  } else {
    for (int i = 0; i < d; ++i) {
      const auto& b = contract.barriers[static_cast<std::size_t>(i)];
      if (!(b.level >= 0.0) || !std::isfinite(b.level))
        errors.push_back(concat("contract/barriers/", i, "/level: must be >= 0"));
      if (!(b.growth >= 0.0) || !std::isfinite(b.growth))
        errors.push_back(concat("contract/barriers/", i, "/growth: must be >= 0"));
    }
    rep.counterparty_default_free = contract.barriers[0].default_free();
  }
  const auto& disc = contract.discount;
  switch (disc.mode) {
    case DiscountMode::Constant:
      if (!(disc.rate > 0.0) || !std::isfinite(disc.rate))
        errors.push_back("contract/discount/r: constant rate must be > 0");
      break;
    case DiscountMode::Curve:
      for (double v : disc.curve.values()) {
        if (!std::isfinite(v)) errors.push_back("contract/discount/curve: rates must be finite");
      }
      break;
    case DiscountMode::Vasicek: {
      const auto& p = disc.vasicek;
      if (!(p.speed >= 0.0)) errors.push_back("contract/discount/speed: must be >= 0");
      if (!(p.vol >= 0.0)) errors.push_back("contract/discount/vol: must be >= 0");
      if (!std::isfinite(p.long_run) || !std::isfinite(p.r0))
        errors.push_back("contract/discount: long_run and r0 must be finite");
      break;
    }
  }

  // A1: bounded coefficients, bounded jump counts and sizes, Hoelder-1/2 drift
  {
    const double K = model.k_bound;
    const double horizon = T > 0.0 ? contract.horizon() : 1.0;
    bool pass = max_jumps <= K;
    for (int i = 0; i < d; ++i) {
      const Curve& mu = model.drift[static_cast<std::size_t>(i)];
      if (!(mu.max_abs() <= K)) pass = false;
      if (!(mu.max_slope() * std::sqrt(horizon) <= K)) pass = false;
      double a = linear ? cg.jump_coeff[i] : 0.0;
      if (!(model.base_vol[i] * (1.0 + a * max_jumps) <= K)) pass = false;
      if (!(model.base_vol[i] * a <= K)) pass = false;
    }
    rep.bounds = pass ? Check::Pass : Check::Fail;
  }

  // A2: sigma sigma^T = D rho D with D >= min base vol, so rho PD and a zero-free D suffice
  {
    bool pass = symmetric && (model.base_vol.array() > 0.0).all() && all_finite(model.base_vol);
    if (symmetric) {
      Eigen::SelfAdjointEigenSolver<Matrix> es(rho, Eigen::EigenvaluesOnly);
      rep.min_eigenvalue = es.eigenvalues().minCoeff();
      try {
        (void)chol_factor(rho);
      } catch (const NotPositiveDefinite&) {
        pass = false;
      }
      if (pass) {
        double smin = model.base_vol.minCoeff();
        rep.lambda = smin * smin * rep.min_eigenvalue;
      }
    } else {
      pass = false;
    }
    rep.nondegenerate = pass ? Check::Pass : Check::Fail;
  }

  // A3 holds by construction for the certified contagion family
  rep.continuity = (cg.mode == ContagionMode::None || linear) ? Check::Certified : Check::Unknown;

  // A4
  {
    bool zero = true;
    for (int i = 1; i < d; ++i) {
      if (rho(0, i) != 0.0 || rho(i, 0) != 0.0) zero = false;
    }
    rep.zero_correlation = zero ? Check::Pass : Check::Fail;
  }

  // A5: volatility changes only at default times of reference names
  rep.piecewise_constant = rep.continuity == Check::Certified ? Check::Pass : Check::Unknown;

  return rep;
}

void validate_sim(const SimConfig& sim, std::vector<std::string>& errors) {
  if (sim.steps < 1) errors.push_back("sim/steps: must be >= 1");
  if (sim.paths < 1) errors.push_back("sim/paths: must be >= 1");
  if (sim.workers < 1) errors.push_back("sim/workers: must be >= 1");
  if (sim.chunk_size < 1) errors.push_back("sim/chunk_size: must be >= 1");
}

}  // namespace cdslab
