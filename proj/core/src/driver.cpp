#include "dzgt/driver.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace dzgt {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

void check_shapes(const SmpecInstance& inst, const MixingMatrix& mix) {
  inst.validate();
  if (mix.m != inst.m || mix.W.rows() != inst.m || mix.W.cols() != inst.m)
    throw std::invalid_argument("driver: mixing matrix size does not match instance m");
}

struct GradientBatch {
  Matrix G;
  long inner_steps = 0;
};

/// Per-agent two-point gradients at the rows of X for the given epoch.
/// Updates the warm-start rows in place.
GradientBatch sample_gradients(const SmpecInstance& inst, const RunConfig& cfg, const Matrix& X,
                               long epoch, Matrix& Zx, Matrix& Zxv) {
  GradientBatch batch;
  batch.G.resize(inst.m, inst.n);
  for (int i = 0; i < inst.m; ++i) {
    Rng xi_rng = agent_stream(cfg.seed, epoch, i, StreamRole::kUpperNoise);
    const double xi = inst.noise_xi.draw(xi_rng);

    Rng v_rng = agent_stream(cfg.seed, epoch, i, StreamRole::kSphereDirection);
    const SphereSample v = sample_sphere(inst.n, cfg.eta, v_rng);

    const Vector x = X.row(i);
    const Vector x_shifted = x + v.v;

    Rng z_rng_a = agent_stream(cfg.seed, epoch, i, StreamRole::kLowerNoiseAtX);
    Rng z_rng_b = agent_stream(cfg.seed, epoch, i, StreamRole::kLowerNoiseAtShifted);
    const Vector z0a = cfg.warm_start ? Vector(Zx.row(i)) : Vector::Zero(inst.p);
    const Vector z0b = cfg.warm_start ? Vector(Zxv.row(i)) : Vector::Zero(inst.p);
    const InnerSolveResult sol_a = solve_inner(inst, x, epoch, cfg.inner, z0a, z_rng_a);
    const InnerSolveResult sol_b = solve_inner(inst, x_shifted, epoch, cfg.inner, z0b, z_rng_b);
    Zx.row(i) = sol_a.z;
    Zxv.row(i) = sol_b.z;
    batch.inner_steps += sol_a.iterations_used + sol_b.iterations_used;

    // Same xi at both evaluation points: the estimator differences one noise
    // realization, not two.
    const double h_at_x = inst.local_objectives[i](x, sol_a.z, xi);
    const double h_shift = inst.local_objectives[i](x_shifted, sol_b.z, xi);
    const ZoGradient g =
        zo_estimate(h_at_x, h_shift, v, inst.n, GradientProvenance::kInexact,
                    std::max(sol_a.epsilon_estimate, sol_b.epsilon_estimate));
    batch.G.row(i) = g.g;
  }
  return batch;
}

}  // namespace

void RunConfig::validate() const {
  if (!(gamma > 0) || !std::isfinite(gamma))
    throw std::invalid_argument("RunConfig: gamma must be positive and finite");
  if (!(eta > 0)) throw std::invalid_argument("RunConfig: eta must be > 0");
  if (K < 0) throw std::invalid_argument("RunConfig: K must be >= 0");
  if (!(x0_scale >= 0)) throw std::invalid_argument("RunConfig: x0_scale must be >= 0");
  if (eval.samples < 1) throw std::invalid_argument("RunConfig: eval.samples must be >= 1");
  if (eval.cadence < 0) throw std::invalid_argument("RunConfig: eval.cadence must be >= 0");
  if (eval.inner_budget < 1)
    throw std::invalid_argument("RunConfig: eval.inner_budget must be >= 1");
}

double consensus_violation(const Matrix& rows) {
  const Eigen::RowVectorXd mean = rows.colwise().mean();
  return (rows.rowwise() - mean).squaredNorm();
}

double tracker_dispersion(const Matrix& rows) { return consensus_violation(rows); }

SwarmState init_swarm(const SmpecInstance& inst, const MixingMatrix& mix, const RunConfig& cfg) {
  check_shapes(inst, mix);
  cfg.validate();
  cfg.inner.validate(inst.mu_F);

  SwarmState st;
  st.X.resize(inst.m, inst.n);
  for (int i = 0; i < inst.m; ++i) {
    Rng rng = agent_stream(cfg.seed, 0, i, StreamRole::kInitIterate);
    for (int j = 0; j < inst.n; ++j) st.X(i, j) = cfg.x0_scale * standard_normal(rng);
  }
  st.Zx = Matrix::Zero(inst.m, inst.p);
  st.Zxv = Matrix::Zero(inst.m, inst.p);

  GradientBatch batch = sample_gradients(inst, cfg, st.X, /*epoch=*/0, st.Zx, st.Zxv);
  if (!batch.G.allFinite())
    throw NonFiniteIterateError("init_swarm: non-finite initial gradient sample");
  st.Y = batch.G;
  st.G_prev = batch.G;
  st.k = 0;
  st.total_inner_steps = batch.inner_steps;
  return st;
}

StepDiagnostics step(SwarmState& st, const SmpecInstance& inst, const MixingMatrix& mix,
                     const RunConfig& cfg) {
  check_shapes(inst, mix);
  const long epoch = st.k + 1;

  const Eigen::RowVectorXd x_mean_old = st.X.colwise().mean();
  const Eigen::RowVectorXd y_mean_old = st.Y.colwise().mean();

  Matrix X_new = mix.W * st.X - cfg.gamma * st.Y;
  if (!X_new.allFinite())
    throw NonFiniteIterateError("step: iterate matrix became non-finite at epoch " +
                                std::to_string(epoch));

  GradientBatch batch = sample_gradients(inst, cfg, X_new, epoch, st.Zx, st.Zxv);
  Matrix Y_new = mix.W * st.Y + batch.G - st.G_prev;
  if (!Y_new.allFinite())
    throw NonFiniteIterateError("step: tracker matrix became non-finite at epoch " +
                                std::to_string(epoch));

  StepDiagnostics diag;
  diag.inner_steps = batch.inner_steps;

  const Eigen::RowVectorXd x_mean_new = X_new.colwise().mean();
  const Eigen::RowVectorXd y_mean_new = Y_new.colwise().mean();
  const Eigen::RowVectorXd g_mean_new = batch.G.colwise().mean();

  diag.tracking_residual = (y_mean_new - g_mean_new).norm() / (1.0 + Y_new.norm());
  diag.mean_update_residual =
      (x_mean_new - x_mean_old + cfg.gamma * y_mean_old).norm() /
      (1.0 + x_mean_new.norm() + x_mean_old.norm() + cfg.gamma * y_mean_old.norm());
  diag.centering_residual =
      (Y_new.colwise().sum() - double(inst.m) * y_mean_new).norm() / (1.0 + Y_new.norm());

  st.X = std::move(X_new);
  st.Y = std::move(Y_new);
  st.G_prev = std::move(batch.G);
  st.k = epoch;
  st.total_inner_steps += diag.inner_steps;
  return diag;
}

McValue evaluate_objective(const SmpecInstance& inst, const Vector& x_bar,
                           const EvalSettings& eval, const InnerConfig& inner,
                           std::uint64_t run_seed, long epoch) {
  InnerConfig ecfg = inner;
  ecfg.budget_rule = fixed_budget_rule(eval.inner_budget);
  Rng z_rng = agent_stream(run_seed, epoch, 0, StreamRole::kEvalLower);
  const InnerSolveResult sol =
      solve_inner(inst, x_bar, /*k=*/0, ecfg, Vector::Zero(inst.p), z_rng);

  double sum = 0.0, sum_sq = 0.0;
  long count = 0;
  for (int i = 0; i < inst.m; ++i) {
    Rng xi_rng = agent_stream(run_seed, epoch, i, StreamRole::kEvalObjective);
    for (int s = 0; s < eval.samples; ++s) {
      const double val = inst.local_objectives[i](x_bar, sol.z, inst.noise_xi.draw(xi_rng));
      sum += val;
      sum_sq += val * val;
      ++count;
    }
  }
  const double mean = sum / count;
  const double var = std::max(0.0, sum_sq / count - mean * mean);
  return McValue{mean, std::sqrt(var / count)};
}

TrajectoryRecord run(const SmpecInstance& inst, const MixingMatrix& mix, const RunConfig& cfg) {
  check_shapes(inst, mix);
  cfg.validate();

  const auto t_start = std::chrono::steady_clock::now();
  auto since = [](std::chrono::steady_clock::time_point a) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - a).count();
  };

  TrajectoryRecord rec;
  rec.epochs.reserve(cfg.K + 1);

  auto should_eval = [&](long epoch) {
    if (cfg.eval.cadence == 0) return false;
    return epoch % cfg.eval.cadence == 0 || epoch == cfg.K;
  };

  auto push_metrics = [&](long epoch, const SwarmState& st, const StepDiagnostics& diag,
                          double wall) {
    EpochMetrics em;
    em.epoch = epoch;
    em.consensus_violation = consensus_violation(st.X);
    em.tracker_dispersion = tracker_dispersion(st.Y);
    em.inner_steps = diag.inner_steps;
    em.tracking_residual = diag.tracking_residual;
    em.mean_update_residual = diag.mean_update_residual;
    em.centering_residual = diag.centering_residual;
    em.mean_iterate = st.X.colwise().mean().transpose();
    em.objective_mean = kNaN;
    em.objective_se = kNaN;
    if (should_eval(epoch)) {
      const McValue v =
          evaluate_objective(inst, em.mean_iterate, cfg.eval, cfg.inner, cfg.seed, epoch);
      em.objective_mean = v.value;
      em.objective_se = v.std_error;
    }
    em.wall_seconds = wall;
    rec.epochs.push_back(std::move(em));
  };

  auto t_epoch = std::chrono::steady_clock::now();
  SwarmState st = init_swarm(inst, mix, cfg);
  {
    StepDiagnostics init_diag;
    init_diag.inner_steps = st.total_inner_steps;
    // Epoch 0 tracking residual: trackers are initialized to the gradients.
    init_diag.tracking_residual =
        (st.Y.colwise().mean() - st.G_prev.colwise().mean()).norm() / (1.0 + st.Y.norm());
    push_metrics(0, st, init_diag, since(t_epoch));
  }

  for (long k = 1; k <= cfg.K; ++k) {
    t_epoch = std::chrono::steady_clock::now();
    const StepDiagnostics diag = step(st, inst, mix, cfg);
    push_metrics(k, st, diag, since(t_epoch));
  }

  rec.total_inner_steps = st.total_inner_steps;
  rec.total_wall_seconds = since(t_start);
  return rec;
}

}  // namespace dzgt
