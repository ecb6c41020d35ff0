#include "vortexlab/solver.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "vortexlab/errors.hpp"
#include "vortexlab/rng.hpp"

namespace vortexlab {

void SolveOptions::validate() const {
  if (!(grad_tolerance > 0.0))
    throw ConfigError("solve options: grad_tolerance must be positive");
  if (!(ls_shrink > 0.0 && ls_shrink < 1.0))
    throw ConfigError("solve options: ls_shrink must lie in (0, 1)");
  if (!(ls_sufficient_decrease > 0.0 && ls_sufficient_decrease <= 0.5))
    throw ConfigError("solve options: ls_sufficient_decrease must lie in (0, 0.5]");
  if (restart_period < 1)
    throw ConfigError("solve options: restart_period must be >= 1");
  if (max_iterations < 0)
    throw ConfigError("solve options: max_iterations must be >= 0");
}

int SolveOptions::resolved_max_iterations(int dof) const {
  if (max_iterations > 0) return max_iterations;
  const int automatic = static_cast<int>(50.0 * std::sqrt(static_cast<double>(dof)));
  return std::min(automatic, 200000);
}

Configuration random_configuration(const MeshPtr& mesh, int d, double epsilon,
                                   std::uint64_t seed) {
  if (!(epsilon > 0.0)) throw ConfigError("epsilon must be positive");
  Rng rng(seed);
  Configuration config;
  config.connection = background_connection(mesh, d);
  config.epsilon = epsilon;
  config.section.mesh = mesh;
  config.section.value.resize(mesh->vertex_count());
  const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
  for (int v = 0; v < mesh->vertex_count(); ++v) {
    const double re = rng.normal() * inv_sqrt2;
    const double im = rng.normal() * inv_sqrt2;
    config.section.value[v] = Complex(re, im);
  }
  for (int e = 0; e < mesh->edge_count(); ++e)
    config.connection.fluctuation[e] = rng.uniform(-0.1, 0.1);
  return config;
}

namespace {

void step_into(const Configuration& base, const Variation& dir, double alpha,
               Configuration& out) {
  const int nv = base.mesh()->vertex_count();
  const int ne = base.mesh()->edge_count();
  for (int v = 0; v < nv; ++v)
    out.section.value[v] = base.section.value[v] + alpha * dir.u[v];
  for (int e = 0; e < ne; ++e)
    out.connection.fluctuation[e] =
        base.connection.fluctuation[e] + alpha * dir.a[e];
}

}  // namespace

MinimizeResult minimize(const Configuration& initial, const SolveOptions& opts) {
  opts.validate();
  const Mesh& mesh = *initial.mesh();
  const int dof = 2 * mesh.vertex_count() + mesh.edge_count();
  const int max_iter = opts.resolved_max_iterations(dof);

  std::ofstream log;
  if (!opts.progress_log.empty()) {
    log.open(opts.progress_log);
    log << "iter,energy,grad_norm,defect_plus\n";
  }

  MinimizeResult result;
  result.config = initial;
  Configuration& cur = result.config;
  Configuration trial = cur;

  double e_cur = energy(cur).total;
  Variation g = gradient(cur);
  double g_norm = norm(mesh, g);
  result.energy_history.push_back(e_cur);

  Variation dir = g;
  for (auto& c : dir.u) c = -c;
  for (auto& r : dir.a) r = -r;

  auto stop_scale = [](double e) { return std::max(1.0, std::min(e, 10.0)); };

  double alpha_start = 1.0 / (1.0 + g_norm);
  int iter = 0;
  while (iter < max_iter) {
    if (g_norm <= opts.grad_tolerance * stop_scale(e_cur)) {
      result.converged = true;
      break;
    }

    double slope = inner(mesh, g, dir);
    if (!(slope < 0.0)) {
      // restart with steepest descent
      for (std::size_t i = 0; i < dir.u.size(); ++i) dir.u[i] = -g.u[i];
      for (std::size_t i = 0; i < dir.a.size(); ++i) dir.a[i] = -g.a[i];
      slope = -g_norm * g_norm;
    }

    // Armijo backtracking
    double alpha = alpha_start;
    double e_trial = 0.0;
    bool accepted = false;
    for (int bt = 0; bt < 80; ++bt) {
      step_into(cur, dir, alpha, trial);
      e_trial = energy(trial).total;
      if (e_trial <= e_cur + opts.ls_sufficient_decrease * alpha * slope) {
        accepted = true;
        break;
      }
      alpha *= opts.ls_shrink;
    }
    if (!accepted) {
      // try one steepest-descent rescue before giving up
      bool is_steepest = true;
      for (std::size_t i = 0; i < dir.u.size() && is_steepest; ++i)
        is_steepest = (dir.u[i] == -g.u[i]);
      if (is_steepest) break;
      for (std::size_t i = 0; i < dir.u.size(); ++i) dir.u[i] = -g.u[i];
      for (std::size_t i = 0; i < dir.a.size(); ++i) dir.a[i] = -g.a[i];
      alpha_start = 1.0 / (1.0 + g_norm);
      continue;
    }

    std::swap(cur.section.value, trial.section.value);
    std::swap(cur.connection.fluctuation, trial.connection.fluctuation);
    e_cur = e_trial;
    result.energy_history.push_back(e_cur);
    ++iter;
    alpha_start = std::min(1e6, alpha * 2.0);

    const Variation g_new = gradient(cur);
    const double g_new_norm = norm(mesh, g_new);

    if (iter % opts.restart_period == 0) {
      // periodic Coulomb re-fix keeps the connection from drifting along
      // the gauge orbit; adopt it only if the energy does not move up
      GaugeFixResult fix = coulomb_gauge_fix(cur);
      const double e_fixed = energy(fix.fixed).total;
      result.gauge_fix_energy_drift =
          std::max(result.gauge_fix_energy_drift, std::abs(e_fixed - e_cur));
      if (e_fixed <= e_cur) {
        cur = std::move(fix.fixed);
        e_cur = e_fixed;
      }
      g = gradient(cur);
      g_norm = norm(mesh, g);
      for (std::size_t i = 0; i < dir.u.size(); ++i) dir.u[i] = -g.u[i];
      for (std::size_t i = 0; i < dir.a.size(); ++i) dir.a[i] = -g.a[i];
    } else {
      // Polak-Ribiere+ update
      Variation diff = g_new;
      axpy(-1.0, g, diff);
      const double beta =
          std::max(0.0, inner(mesh, g_new, diff) / (g_norm * g_norm));
      for (std::size_t i = 0; i < dir.u.size(); ++i)
        dir.u[i] = -g_new.u[i] + beta * dir.u[i];
      for (std::size_t i = 0; i < dir.a.size(); ++i)
        dir.a[i] = -g_new.a[i] + beta * dir.a[i];
      g = g_new;
      g_norm = g_new_norm;
    }

    if (log.is_open()) {
      const BogomolnySplit split = bogomolny_split(cur);
      log << iter << ',' << e_cur << ',' << g_norm << ',' << split.defect_plus
          << '\n';
    }
  }

  if (g_norm <= opts.grad_tolerance * stop_scale(e_cur)) result.converged = true;
  result.iterations = iter;
  result.final_grad_norm = g_norm;
  return result;
}

std::vector<MinimizeResult> continue_in_epsilon(
    const Configuration& config, const std::vector<double>& epsilon_schedule,
    const SolveOptions& opts) {
  if (epsilon_schedule.empty())
    throw ConfigError("continuation: epsilon schedule must be nonempty");
  std::vector<MinimizeResult> results;
  results.reserve(epsilon_schedule.size());
  Configuration stage = config;
  for (double eps : epsilon_schedule) {
    if (!(eps > 0.0)) throw ConfigError("continuation: epsilon must be positive");
    stage.epsilon = eps;
    results.push_back(minimize(stage, opts));
    stage = results.back().config;
  }
  return results;
}

}  // namespace vortexlab
