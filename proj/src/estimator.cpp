#include "momo/estimator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include <Eigen/Cholesky>

#include "momo/parallel.hpp"
#include "objective.hpp"

namespace momo {

namespace {

using detail::Jet;
using detail::Objective;
using detail::Vec2T;

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::vector<std::size_t> free_indices(const std::array<bool, kParamCount>& mask) {
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < kParamCount; ++i) {
    if (mask[i]) idx.push_back(i);
  }
  return idx;
}

/// Energy or +inf when the point is off the manifold domain or degenerate.
double energy_or_inf(const Objective& obj, const MotionParams& p) {
  if (!(std::abs(p.yaw) < std::numbers::pi)) return kInf;
  for (double v : p.values()) {
    if (!std::isfinite(v)) return kInf;
  }
  try {
    return obj.energy(p.values()).value;
  } catch (const Error& e) {
    if (e.code() == ErrorCode::DegenerateTranslation) return kInf;
    throw;
  }
}

struct Linearization {
  Eigen::MatrixXd normal;    // sum w J^T J
  Eigen::VectorXd gradient;  // 2 sum w J^T r
  std::size_t used = 0;
  bool ok = false;
};

/// Gauss-Newton model of the robust energy over the coordinates in `columns`,
/// reweighted by rho'(s_i) at `p`.
Linearization linearize(const Objective& obj, const MotionParams& p, const std::vector<std::size_t>& columns,
                        JacobianMode mode, double h) {
  const auto n = static_cast<Eigen::Index>(columns.size());
  Linearization lin;
  lin.normal = Eigen::MatrixXd::Zero(n, n);
  lin.gradient = Eigen::VectorXd::Zero(n);

  std::vector<Vec2T<double>> r;
  std::vector<std::uint8_t> valid;
  std::vector<Eigen::Matrix<double, 2, Eigen::Dynamic>> jac(obj.match_count(),
                                                             Eigen::Matrix<double, 2, Eigen::Dynamic>(2, n));

  if (mode == JacobianMode::Analytic) {
    std::array<Jet, kParamCount> x;
    const auto values = p.values();
    for (std::size_t k = 0; k < kParamCount; ++k) {
      x[k] = Jet(values[k], Eigen::Vector4d::Unit(static_cast<Eigen::Index>(k)));
    }
    std::vector<Vec2T<Jet>> rj;
    if (!obj.residuals(x, rj, valid)) return lin;
    r.resize(rj.size());
    for (std::size_t i = 0; i < rj.size(); ++i) {
      if (!valid[i]) continue;
      r[i] << rj[i](0).value(), rj[i](1).value();
      for (Eigen::Index c = 0; c < n; ++c) {
        const auto k = static_cast<Eigen::Index>(columns[static_cast<std::size_t>(c)]);
        // Unused second slot of AnglePlane carries an empty derivative vector.
        jac[i](0, c) = rj[i](0).derivatives().size() ? rj[i](0).derivatives()(k) : 0.0;
        jac[i](1, c) = rj[i](1).derivatives().size() ? rj[i](1).derivatives()(k) : 0.0;
      }
    }
  } else {
    if (!obj.residuals(p.values(), r, valid)) return lin;
    std::vector<Vec2T<double>> rp;
    std::vector<Vec2T<double>> rm;
    std::vector<std::uint8_t> vp;
    std::vector<std::uint8_t> vm;
    for (Eigen::Index c = 0; c < n; ++c) {
      const std::size_t k = columns[static_cast<std::size_t>(c)];
      auto xp = p.values();
      auto xm = p.values();
      xp[k] += h;
      xm[k] -= h;
      const bool okp = obj.residuals(xp, rp, vp);
      const bool okm = obj.residuals(xm, rm, vm);
      for (std::size_t i = 0; i < r.size(); ++i) {
        if (!okp || !okm || !vp[i] || !vm[i]) {
          valid[i] = 0;
          continue;
        }
        jac[i].col(c) = (rp[i] - rm[i]) / (2.0 * h);
      }
    }
  }

  const RobustLoss& loss = obj.loss();
  for (std::size_t i = 0; i < r.size(); ++i) {
    if (!valid[i]) continue;
    const double w = robust_loss_eval(loss, r[i].squaredNorm()).derivative;
    lin.normal.noalias() += w * jac[i].transpose() * jac[i];
    lin.gradient.noalias() += 2.0 * w * jac[i].transpose() * r[i];
    ++lin.used;
  }
  lin.ok = true;
  return lin;
}

MotionParams with_values(const MotionParams& tmpl, const std::vector<std::size_t>& idx,
                         const std::vector<double>& values) {
  MotionParams p = tmpl;
  for (std::size_t k = 0; k < idx.size(); ++k) p.set(static_cast<Param>(idx[k]), values[k]);
  return p;
}

/// Exhaustive cold-start search over the axes of `grid` that correspond to free coordinates.
std::optional<std::pair<MotionParams, double>> grid_start(const Objective& obj, const MotionParams& prior,
                                                          const GridSpec& grid) {
  std::vector<std::size_t> idx;
  std::vector<GridAxis> axes;
  for (std::size_t k = 0; k < kParamCount; ++k) {
    if (prior.free[k] && grid.axes[k]) {
      idx.push_back(k);
      axes.push_back(*grid.axes[k]);
    }
  }
  if (idx.empty()) return std::nullopt;
  std::size_t total = 1;
  for (const auto& a : axes) total *= a.steps;

  std::vector<double> energies(total);
  std::vector<MotionParams> candidates(total);
  parallel_for(total, [&](std::size_t flat) {
    std::vector<double> values(idx.size());
    std::size_t rem = flat;
    for (std::size_t d = idx.size(); d-- > 0;) {
      values[d] = axes[d].at(rem % axes[d].steps);
      rem /= axes[d].steps;
    }
    candidates[flat] = with_values(prior, idx, values);
    energies[flat] = energy_or_inf(obj, candidates[flat]);
  });

  std::optional<std::pair<MotionParams, double>> best;
  for (std::size_t i = 0; i < total; ++i) {
    if (!std::isfinite(energies[i])) continue;
    if (!best || grid_candidate_better(energies[i], candidates[i], best->second, best->first)) {
      best = std::make_pair(candidates[i], energies[i]);
    }
  }
  return best;
}

ConditionNote condition_of(const Objective& obj, const MotionParams& p, std::size_t used,
                           const EstimatorOptions& opts) {
  if (p.is_free(Param::ArcLength)) {
    const std::vector<std::size_t> cols = {static_cast<std::size_t>(Param::Yaw),
                                           static_cast<std::size_t>(Param::ArcLength)};
    const auto lin = linearize(obj, p, cols, JacobianMode::Analytic, opts.jacobian_step);
    if (lin.ok) {
      const double yaw_curv = lin.normal(0, 0);
      const double arc_curv = lin.normal(1, 1);
      const double ratio = yaw_curv > 0.0 ? std::sqrt(arc_curv / yaw_curv) * std::abs(p.arc_length) : 0.0;
      if (!(ratio >= opts.scale_observability_threshold)) return ConditionNote::ScaleUnobservable;
    }
  }
  if (used < opts.few_matches_threshold) return ConditionNote::FewMatches;
  return ConditionNote::OK;
}

}  // namespace

double GridAxis::at(std::size_t i) const {
  if (i + 1 == steps) return max;
  return min + static_cast<double>(i) * cell();
}

GridSpec GridSpec::yaw_default() {
  GridSpec g;
  g.with(Param::Yaw, {-0.3, 0.3, 41});
  return g;
}

bool grid_candidate_better(double energy_a, const MotionParams& a, double energy_b, const MotionParams& b) {
  if (energy_a != energy_b) return energy_a < energy_b;
  if (std::abs(a.yaw) != std::abs(b.yaw)) return std::abs(a.yaw) < std::abs(b.yaw);
  if (a.arc_length != b.arc_length) return a.arc_length < b.arc_length;
  if (std::abs(a.pitch) != std::abs(b.pitch)) return std::abs(a.pitch) < std::abs(b.pitch);
  return std::abs(a.roll) < std::abs(b.roll);
}

std::string_view to_string(ConditionNote note) {
  switch (note) {
    case ConditionNote::OK: return "OK";
    case ConditionNote::ScaleUnobservable: return "ScaleUnobservable";
    case ConditionNote::FewMatches: return "FewMatches";
  }
  return "OK";
}

void EstimatorOptions::validate() const {
  loss.validate();
  if (max_iterations < 1) throw Error(ErrorCode::InvalidArgument, "max_iterations must be >= 1");
  if (!(gradient_tolerance > 0.0) || !(step_tolerance > 0.0) || !(jacobian_step > 0.0) ||
      !(damping_init > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "tolerances, step and damping must be positive");
  }
  if (fallback_grid) {
    for (const auto& axis : fallback_grid->axes) {
      if (axis && (axis->steps < 2 || !(axis->max > axis->min))) {
        throw Error(ErrorCode::InvalidArgument, "grid axes need >= 2 steps and max > min");
      }
    }
  }
}

EstimateResult estimate(const CameraRig& rig, std::span<const MatchSet> sets, const MotionParams& prior,
                        const EstimatorOptions& opts) {
  opts.validate();
  prior.validate();
  std::size_t total = 0;
  for (const auto& s : sets) total += s.matches.size();
  if (total == 0) throw Error(ErrorCode::NoMatches, "no feature matches to estimate from");

  const Objective obj(rig, sets, opts.metric, opts.loss);

  MotionParams current = prior;
  double energy = energy_or_inf(obj, prior);
  if (opts.fallback_grid) {
    if (auto best = grid_start(obj, prior, *opts.fallback_grid); best && best->second < energy) {
      current = best->first;
      energy = best->second;
    }
  }
  if (!std::isfinite(energy)) {
    throw Error(ErrorCode::DegenerateTranslation, "prior yields undefined epipolar geometry");
  }

  EstimateResult result;
  result.initial_energy = energy;
  result.energy_history.push_back(energy);

  const auto columns = free_indices(prior.free);
  const auto n = static_cast<Eigen::Index>(columns.size());
  double lambda = opts.damping_init;

  Linearization lin;
  if (n > 0) lin = linearize(obj, current, columns, opts.jacobian, opts.jacobian_step);
  if (n == 0) {
    result.converged = true;
  } else {
    while (result.iterations < opts.max_iterations) {
      if (!lin.ok) break;
      if (lin.gradient.lpNorm<Eigen::Infinity>() <= opts.gradient_tolerance) {
        result.converged = true;
        break;
      }
      // Marquardt scaling; weakly observed directions keep a floor so they stay damped.
      Eigen::VectorXd scale = lin.normal.diagonal();
      const double max_diag = scale.maxCoeff();
      scale = scale.cwiseMax(max_diag > 0.0 ? 1e-6 * max_diag : 1.0);
      Eigen::MatrixXd damped = lin.normal;
      damped.diagonal() += lambda * scale;
      const Eigen::VectorXd step = damped.ldlt().solve(-0.5 * lin.gradient);

      const Eigen::VectorXd x = pack_free(current);
      if (!step.allFinite()) break;
      if (step.norm() <= opts.step_tolerance * (x.norm() + opts.step_tolerance)) {
        result.converged = true;
        break;
      }
      const MotionParams trial = unpack_free(x + step, current);
      const double trial_energy = energy_or_inf(obj, trial);
      ++result.iterations;
      if (trial_energy < energy) {
        current = trial;
        energy = trial_energy;
        result.energy_history.push_back(energy);
        lambda = std::max(lambda * 0.1, 1e-15);
        lin = linearize(obj, current, columns, opts.jacobian, opts.jacobian_step);
      } else {
        lambda *= 10.0;
        if (lambda > 1e20) break;
      }
    }
  }

  result.params = current;
  result.pose = pose_from_params(current);
  result.final_energy = energy;
  result.gradient_norm = n > 0 && lin.ok ? lin.gradient.norm() : 0.0;

  std::vector<Vec2T<double>> r;
  std::vector<std::uint8_t> valid;
  obj.residuals(current.values(), r, valid);
  result.residuals.resize(r.size());
  std::size_t used = 0;
  for (std::size_t i = 0; i < r.size(); ++i) {
    if (valid[i]) {
      result.residuals[i] = r[i](0);
      ++used;
    } else {
      result.residuals[i] = kNaN;
      ++result.skipped_matches;
    }
  }
  result.condition_note = condition_of(obj, current, used, opts);
  return result;
}

Eigen::VectorXd numeric_gradient(const CameraRig& rig, std::span<const MatchSet> sets, const MotionParams& p,
                                 const RobustLoss& loss, MetricKind metric, double h) {
  if (!(h > 0.0)) throw Error(ErrorCode::InvalidArgument, "finite-difference step must be positive");
  const Objective obj(rig, sets, metric, loss);
  const auto columns = free_indices(p.free);
  Eigen::VectorXd g(static_cast<Eigen::Index>(columns.size()));
  for (std::size_t c = 0; c < columns.size(); ++c) {
    auto xp = p.values();
    auto xm = p.values();
    xp[columns[c]] += h;
    xm[columns[c]] -= h;
    g(static_cast<Eigen::Index>(c)) = (obj.energy(xp).value - obj.energy(xm).value) / (2.0 * h);
  }
  return g;
}

Eigen::VectorXd internal_gradient(const CameraRig& rig, std::span<const MatchSet> sets, const MotionParams& p,
                                  const RobustLoss& loss, MetricKind metric, JacobianMode mode, double h) {
  const Objective obj(rig, sets, metric, loss);
  const auto lin = linearize(obj, p, free_indices(p.free), mode, h);
  if (!lin.ok) throw Error(ErrorCode::DegenerateTranslation, "no camera observes a nonzero translation");
  return lin.gradient;
}

bool Landscape::degenerate(std::size_t i, std::size_t j) const {
  return !std::isfinite(energy(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)));
}

Landscape Landscape::normalized() const {
  Landscape out = *this;
  double max_energy = 0.0;
  for (Eigen::Index k = 0; k < energy.size(); ++k) {
    if (std::isfinite(energy.data()[k])) max_energy = std::max(max_energy, energy.data()[k]);
  }
  if (max_energy > 0.0) out.energy = energy * (100.0 / max_energy);
  return out;
}

std::pair<std::size_t, std::size_t> Landscape::argmin() const {
  std::pair<std::size_t, std::size_t> best{0, 0};
  bool found = false;
  MotionParams best_p;
  double best_e = kInf;
  for (std::size_t i = 0; i < grid.yaw.steps; ++i) {
    for (std::size_t j = 0; j < grid.arc_length.steps; ++j) {
      const double e = energy(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
      if (!std::isfinite(e)) continue;
      MotionParams p;
      p.yaw = grid.yaw.at(i);
      p.arc_length = grid.arc_length.at(j);
      if (!found || grid_candidate_better(e, p, best_e, best_p)) {
        best = {i, j};
        best_p = p;
        best_e = e;
        found = true;
      }
    }
  }
  return best;
}

Landscape energy_landscape(const CameraRig& rig, std::span<const MatchSet> sets, const LandscapeGrid& grid,
                           const MotionParams& fixed, const RobustLoss& loss, MetricKind metric) {
  if (grid.yaw.steps < 2 || grid.arc_length.steps < 2) {
    throw Error(ErrorCode::InvalidArgument, "landscape grid needs >= 2 steps per axis");
  }
  const Objective obj(rig, sets, metric, loss);
  Landscape out;
  out.grid = grid;
  out.energy.resize(static_cast<Eigen::Index>(grid.yaw.steps), static_cast<Eigen::Index>(grid.arc_length.steps));
  parallel_for(grid.yaw.steps * grid.arc_length.steps, [&](std::size_t flat) {
    const std::size_t i = flat / grid.arc_length.steps;
    const std::size_t j = flat % grid.arc_length.steps;
    MotionParams p = fixed;
    p.yaw = grid.yaw.at(i);
    p.arc_length = grid.arc_length.at(j);
    const double e = energy_or_inf(obj, p);
    out.energy(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = std::isfinite(e) ? e : kNaN;
  });
  return out;
}

std::vector<bool> classify_inliers(const EstimateResult& result, double threshold) {
  if (!(threshold >= 0.0)) throw Error(ErrorCode::InvalidArgument, "inlier threshold must be non-negative");
  std::vector<bool> mask(result.residuals.size());
  const bool accept_all = std::isinf(threshold);
  for (std::size_t i = 0; i < mask.size(); ++i) {
    mask[i] = accept_all || std::abs(result.residuals[i]) <= threshold;
  }
  return mask;
}

}  // namespace momo
