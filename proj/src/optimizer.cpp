#include "cmem/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <random>

#include "cmem/errors.hpp"

namespace cmem {

std::string to_string(InitKind kind) {
  switch (kind) {
    case InitKind::empty: return "empty";
    case InitKind::random: return "random";
    case InitKind::annulus: return "annulus";
  }
  return "unknown";
}

InitKind parse_init_kind(const std::string& name) {
  if (name == "empty") return InitKind::empty;
  if (name == "random") return InitKind::random;
  if (name == "annulus") return InitKind::annulus;
  throw InvalidInput("unknown init kind '" + name + "'");
}

namespace {

double unit_uniform(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

void check_target(const DomainMask& mask, double target) {
  if (!(target > 0.0 && target < mask.measure())) {
    throw InvalidInput("target measure A = " + std::to_string(target) +
                       " must lie strictly inside (0, |Omega| = " +
                       std::to_string(mask.measure()) + ")");
  }
}

}  // namespace

CellSet initial_region(const MaskPtr& mask, double target, const InitSpec& init) {
  const Grid2D& g = mask->grid();
  switch (init.kind) {
    case InitKind::empty: return CellSet::empty(*mask);
    case InitKind::annulus: {
      std::vector<double> depth(g.size(), 0.0);
      for (int j = 0; j < g.ny(); ++j) {
        for (int i = 0; i < g.nx(); ++i) {
          depth[g.index(i, j)] = -mask->spec().signed_distance(g.node(i, j));
        }
      }
      return weighted_quantile(ScalarField(mask, std::move(depth)), target).region;
    }
    case InitKind::random: {
      std::mt19937_64 rng(init.seed);
      const double p = target / mask->measure();
      std::vector<double> field(g.size(), 0.0);
      for (std::size_t k = 0; k < g.size(); ++k) {
        if (mask->weight(k) > 0.0) field[k] = unit_uniform(rng) < p ? 1.0 : 0.0;
      }
      std::vector<double> next(field);
      for (int pass = 0; pass < 3; ++pass) {
        for (int j = 1; j < g.ny() - 1; ++j) {
          for (int i = 1; i < g.nx() - 1; ++i) {
            const std::size_t k = g.index(i, j);
            if (mask->weight(k) <= 0.0) continue;
            double s = field[k];
            int n = 1;
            for (std::size_t nb : {k + 1, k - 1, k + g.nx(), k - g.nx()}) {
              if (mask->weight(nb) > 0.0) {
                s += field[nb];
                ++n;
              }
            }
            next[k] = s / n;
          }
        }
        field.swap(next);
      }
      // Highest smoothed density first; a seeded jitter breaks the many ties.
      for (std::size_t k = 0; k < g.size(); ++k) field[k] = -field[k] + 1e-9 * unit_uniform(rng);
      return weighted_quantile(ScalarField(mask, std::move(field)), target).region;
    }
  }
  return CellSet::empty(*mask);
}

OptimalPair optimize_from(const MaskPtr& mask, double alpha, double target, CellSet start,
                          const ScalarField* warm_u, const OptimizerOptions& options) {
  check_target(*mask, target);
  if (!(alpha >= 0.0) || !std::isfinite(alpha)) throw InvalidInput("alpha must be >= 0");
  if (options.max_iter < 1) throw InvalidInput("max_iter must be >= 1");
  if (!(options.damping >= 0.0 && options.damping < 1.0)) {
    throw InvalidInput("damping must lie in [0, 1)");
  }
  const double one_cell = mask->grid().cell_area();

  CellSet region = std::move(start);
  std::optional<ScalarField> warm;
  if (warm_u) warm = *warm_u;
  std::optional<ScalarField> previous_u;

  OptimalPair pair{ScalarField(mask), region, 0.0, 0.0, alpha, target, {}, false, false, {}, 0.0};
  for (int k = 0; k < options.max_iter; ++k) {
    const SchrodingerOperator op = assemble(mask, region, alpha);
    EigenPair eig = ground_state(op, options.eigen, warm ? &*warm : nullptr);

    ScalarField cut_field = eig.u;
    if (options.damping > 0.0 && previous_u) {
      auto& d = cut_field.data();
      for (std::size_t n = 0; n < d.size(); ++n) {
        d[n] = (1.0 - options.damping) * d[n] + options.damping * (*previous_u)[n];
      }
    }
    QuantileResult q = weighted_quantile(cut_field, target);
    const double sd = symmetric_difference(q.region, region, *mask);
    pair.history.push_back({eig.lambda, q.level, sd, region.measure, eig.iterations});

    const bool stagnant =
        k >= 1 && std::abs(eig.lambda - pair.history[k - 1].lambda) < options.tol && sd < one_cell;
    pair.u = eig.u;
    pair.region = region;
    pair.level = q.level;
    pair.lambda = eig.lambda;
    pair.eigen_residual = eig.residual;
    if (stagnant) {
      pair.converged = true;
      break;
    }
    previous_u = eig.u;
    warm = std::move(eig.u);
    region = std::move(q.region);
  }
  pair.subcritical = alpha < pair.lambda;
  return pair;
}

OptimalPair optimize(const MaskPtr& mask, double alpha, double target, const InitSpec& init,
                     const OptimizerOptions& options) {
  check_target(*mask, target);
  OptimalPair pair =
      optimize_from(mask, alpha, target, initial_region(mask, target, init), nullptr, options);
  pair.init = init;
  return pair;
}

LambdaCurve sweep(const MaskPtr& mask, double alpha, const std::vector<double>& targets,
                  const InitSpec& init, const OptimizerOptions& options) {
  if (targets.empty()) throw InvalidInput("sweep needs at least one target");
  for (std::size_t i = 0; i < targets.size(); ++i) {
    if (!(targets[i] > 0.0 && targets[i] < mask->measure())) {
      throw InvalidInput("sweep target " + std::to_string(targets[i]) + " outside (0, |Omega|)");
    }
    if (i > 0 && !(targets[i] > targets[i - 1])) {
      throw InvalidInput("sweep targets must be strictly increasing");
    }
  }
  LambdaCurve curve;
  curve.alpha = alpha;
  std::optional<CellSet> warm_region;
  std::optional<ScalarField> warm_u;
  for (double a : targets) {
    CurveSample s;
    s.target = a;
    try {
      OptimalPair pair =
          warm_region
              ? optimize_from(mask, alpha, a, *warm_region, warm_u ? &*warm_u : nullptr, options)
              : optimize(mask, alpha, a, init, options);
      s.lambda = pair.lambda;
      s.level = pair.level;
      s.iterations = static_cast<int>(pair.history.size());
      s.subcritical = pair.subcritical;
      s.converged = pair.converged;
      const auto v = pair.u.values();
      s.max_u = *std::max_element(v.begin(), v.end());
      warm_region = pair.region;
      warm_u = pair.u;
    } catch (const std::exception& e) {
      s.error = e.what();
    }
    curve.samples.push_back(std::move(s));
  }
  for (std::size_t i = 1; i < curve.samples.size(); ++i) {
    const CurveSample& p = curve.samples[i - 1];
    const CurveSample& c = curve.samples[i];
    if (!p.error.empty() || !c.error.empty()) continue;
    if (!(c.lambda > p.lambda)) curve.strictly_increasing = false;
    const double umax = std::max(p.max_u, c.max_u);
    const double bound = alpha * umax * umax;
    if (bound > 0.0) {
      const double ratio = std::abs((c.lambda - p.lambda) / (c.target - p.target)) / bound;
      curve.max_lipschitz_ratio = std::max(curve.max_lipschitz_ratio, ratio);
    }
  }
  return curve;
}

ShapeDerivativeReport shape_derivative_residual(const LambdaCurve& curve, double alpha) {
  const auto& s = curve.samples;
  if (s.size() < 3) throw InvalidInput("shape derivative check needs at least 3 samples");
  if (!(alpha > 0.0)) throw InvalidInput("shape derivative check needs alpha > 0");
  ShapeDerivativeReport report;
  std::vector<double> used;
  for (std::size_t i = 1; i + 1 < s.size(); ++i) {
    ShapeDerivativeEntry e;
    e.target = s[i].target;
    if (!s[i - 1].error.empty() || !s[i].error.empty() || !s[i + 1].error.empty()) {
      e.skipped = true;
      e.note = "neighbouring sample failed";
      report.entries.push_back(e);
      continue;
    }
    const double a0 = s[i - 1].target, a1 = s[i].target, a2 = s[i + 1].target;
    const double l0 = s[i - 1].lambda, l1 = s[i].lambda, l2 = s[i + 1].lambda;
    e.slope = l0 * (a1 - a2) / ((a0 - a1) * (a0 - a2)) +
              l1 * (2.0 * a1 - a0 - a2) / ((a1 - a0) * (a1 - a2)) +
              l2 * (a1 - a0) / ((a2 - a0) * (a2 - a1));
    e.predicted = alpha * s[i].level * s[i].level;
    if (!(s[i].level > 0.0)) {
      e.skipped = true;
      e.note = "cut level c = 0";
      report.entries.push_back(e);
      continue;
    }
    e.residual = std::abs(e.slope - e.predicted) / e.predicted;
    used.push_back(e.residual);
    report.entries.push_back(e);
  }
  report.used = static_cast<int>(used.size());
  if (!used.empty()) {
    report.max = *std::max_element(used.begin(), used.end());
    std::vector<double> sorted = used;
    std::sort(sorted.begin(), sorted.end());
    const std::size_t n = sorted.size();
    report.median = n % 2 ? sorted[n / 2] : 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]);
  }
  return report;
}

}  // namespace cmem
