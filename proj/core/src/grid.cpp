#include "gibbsmix/grid.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <numbers>
#include <string>

#include "gibbsmix/parallel.hpp"

namespace gibbsmix {
namespace {

constexpr std::size_t kRowChunk = 16;

// h(x) = x (sqrt(pi)/2) erf(x) + (exp(-x^2) - 1)/2, the second antiderivative
// of exp(-x^2) with h(0) = h'(0) = 0. The cell mass of exp(-(u-v)^2) in units
// of 1/a is a second difference of h.
double second_antiderivative(double x) {
  if (x < 0.5) {
    // sum_k (-1)^k x^(2k+2) / (k! (2k+1) (2k+2))
    const double x2 = x * x;
    double power = x2;
    double factorial = 1.0;
    double sum = 0.0;
    for (int k = 0; k < 30; ++k) {
      if (k > 0) factorial *= k;
      const double term = power / (factorial * (2.0 * k + 1.0) * (2.0 * k + 2.0));
      sum += (k % 2 == 0) ? term : -term;
      if (term < 1e-19 * sum) break;
      power *= x2;
    }
    return sum;
  }
  return 0.5 * x * std::sqrt(std::numbers::pi) * std::erf(x) + 0.5 * std::expm1(-x * x);
}

// h(x) minus its linear asymptote x sqrt(pi)/2 - 1/2.
double antiderivative_tail(double x) {
  return 0.5 * std::exp(-x * x) - 0.5 * x * std::sqrt(std::numbers::pi) * std::erfc(x);
}

// Unnormalized mass of a cell with |i - j| = k, cell width c = a/n in units
// of 1/a.
double cell_mass(std::size_t k, double c) {
  const double lo = (k == 0 ? 1.0 : static_cast<double>(k - 1)) * c;
  const double mid = static_cast<double>(k) * c;
  const double hi = static_cast<double>(k + 1) * c;
  double mass;
  if (k >= 1 && lo >= 1.0) {
    // Linear parts cancel exactly in the second difference.
    mass = antiderivative_tail(hi) - 2.0 * antiderivative_tail(mid) + antiderivative_tail(lo);
  } else {
    mass = second_antiderivative(hi) - 2.0 * second_antiderivative(mid) +
           second_antiderivative(lo);
  }
  return std::max(mass, 0.0);
}

void require_same_shape(const GridDistribution& p, const GridDistribution& q) {
  if (p.n() != q.n() || p.dims() != q.dims()) {
    throw std::invalid_argument("grid distributions have different shapes");
  }
}

// Holds the two marginals that fully determine the next step.
struct Marginals {
  std::vector<double> u;
  std::vector<double> v;
};

Marginals marginals_of(const GridDistribution& dist) {
  return {dist.u_marginal(), dist.v_marginal()};
}

// Writes the one-step image of a law with marginals `in` into `out`, which
// must be zero outside the band. Returns the step statistics and the new
// marginals. Output cell (i, j) = 1/2 J(i,j) (v_j / m_j + u_i / m_i).
StepStats random_scan_step(const DiagonalTarget& target, const Marginals& in,
                           GridDistribution& out, Marginals& next) {
  const std::size_t n = target.n();
  const std::size_t band = target.band();
  const auto profile = target.profile();
  const auto marginal = target.marginal();

  std::vector<double> from_v(n);
  std::vector<double> from_u(n);
  for (std::size_t k = 0; k < n; ++k) {
    from_v[k] = 0.5 * in.v[k] / marginal[k];
    from_u[k] = 0.5 * in.u[k] / marginal[k];
  }

  const std::size_t chunks = chunk_count(n, kRowChunk);
  std::vector<double> chunk_total(chunks);
  auto weights = out.weights();
  parallel_chunks(chunks, [&](std::size_t c) {
    CompensatedSum total;
    const std::size_t end = std::min(n, (c + 1) * kRowChunk);
    for (std::size_t i = c * kRowChunk; i < end; ++i) {
      const std::size_t j0 = i > band ? i - band : 0;
      const std::size_t j1 = std::min(n - 1, i + band);
      double* row = weights.data() + i * n;
      const double bu = from_u[i];
      CompensatedSum row_total;
      for (std::size_t j = j0; j <= j1; ++j) {
        const double w = profile[i > j ? i - j : j - i] * (from_v[j] + bu);
        row[j] = w;
        row_total += w;
      }
      total += row_total.value();
    }
    chunk_total[c] = total.value();
  });
  CompensatedSum total;
  for (double t : chunk_total) total += t;
  const double mass = total.value();
  const double scale = 1.0 / mass;

  std::vector<double> chunk_tv(chunks);
  std::vector<double> chunk_columns(chunks * n, 0.0);
  next.u.assign(n, 0.0);
  parallel_chunks(chunks, [&](std::size_t c) {
    CompensatedSum tv;
    double* columns = chunk_columns.data() + c * n;
    const std::size_t end = std::min(n, (c + 1) * kRowChunk);
    for (std::size_t i = c * kRowChunk; i < end; ++i) {
      const std::size_t j0 = i > band ? i - band : 0;
      const std::size_t j1 = std::min(n - 1, i + band);
      double* row = weights.data() + i * n;
      CompensatedSum row_sum;
      CompensatedSum row_tv;
      for (std::size_t j = j0; j <= j1; ++j) {
        const double w = row[j] * scale;
        row[j] = w;
        row_sum += w;
        row_tv += std::abs(w - profile[i > j ? i - j : j - i]);
        columns[j] += w;
      }
      next.u[i] = row_sum.value();
      tv += row_tv.value();
    }
    chunk_tv[c] = tv.value();
  });

  next.v.assign(n, 0.0);
  for (std::size_t j = 0; j < n; ++j) {
    CompensatedSum col;
    for (std::size_t c = 0; c < chunks; ++c) col += chunk_columns[c * n + j];
    next.v[j] = col.value();
  }
  CompensatedSum tv;
  for (double t : chunk_tv) tv += t;
  return StepStats{0, 0.5 * tv.value(), mass};
}

}  // namespace

// ---------------------------------------------------------------------------
// GridDistribution

GridDistribution::GridDistribution(std::size_t n, int dims, std::vector<double> weights)
    : n_(n), dims_(dims), weights_(std::move(weights)) {}

GridDistribution GridDistribution::zeros(std::size_t n, int dims) {
  if (n < 1 || (dims != 1 && dims != 2)) {
    throw std::invalid_argument("grid needs n >= 1 and dims in {1, 2}");
  }
  return GridDistribution(n, dims, std::vector<double>(dims == 1 ? n : n * n, 0.0));
}

GridDistribution GridDistribution::uniform(std::size_t n, int dims) {
  GridDistribution g = zeros(n, dims);
  std::fill(g.weights_.begin(), g.weights_.end(), 1.0 / static_cast<double>(g.size()));
  return g;
}

GridDistribution GridDistribution::point_mass(std::size_t n, Point at) {
  GridDistribution g = zeros(n, 2);
  g(cell_of(at.u, n), cell_of(at.v, n)) = 1.0;
  return g;
}

GridDistribution GridDistribution::point_mass_1d(std::size_t n, double at) {
  GridDistribution g = zeros(n, 1);
  g.weights_[cell_of(at, n)] = 1.0;
  return g;
}

GridDistribution GridDistribution::from_weights(std::size_t n, int dims,
                                                std::vector<double> weights) {
  const std::size_t expected = dims == 1 ? n : n * n;
  if ((dims != 1 && dims != 2) || weights.size() != expected) {
    throw std::invalid_argument("weights do not match the grid shape");
  }
  if (std::any_of(weights.begin(), weights.end(), [](double w) { return !(w >= 0.0); })) {
    throw std::invalid_argument("grid weights must be nonnegative");
  }
  return GridDistribution(n, dims, std::move(weights));
}

std::size_t GridDistribution::cell_of(double x, std::size_t n) {
  if (!(x >= 0.0 && x <= 1.0)) throw std::invalid_argument("coordinate outside [0, 1]");
  return std::min(n - 1, static_cast<std::size_t>(x * static_cast<double>(n)));
}

double GridDistribution::total() const {
  CompensatedSum s;
  for (double w : weights_) s += w;
  return s.value();
}

void GridDistribution::renormalize() {
  const double t = total();
  if (!(t > 0.0)) throw std::domain_error("cannot renormalize a zero distribution");
  for (double& w : weights_) w /= t;
}

std::vector<double> GridDistribution::u_marginal() const {
  if (dims_ != 2) throw std::invalid_argument("marginals need a 2-D distribution");
  std::vector<double> out(n_);
  for (std::size_t i = 0; i < n_; ++i) {
    CompensatedSum s;
    for (std::size_t j = 0; j < n_; ++j) s += weights_[i * n_ + j];
    out[i] = s.value();
  }
  return out;
}

std::vector<double> GridDistribution::v_marginal() const {
  if (dims_ != 2) throw std::invalid_argument("marginals need a 2-D distribution");
  std::vector<CompensatedSum> sums(n_);
  for (std::size_t i = 0; i < n_; ++i) {
    for (std::size_t j = 0; j < n_; ++j) sums[j] += weights_[i * n_ + j];
  }
  std::vector<double> out(n_);
  for (std::size_t j = 0; j < n_; ++j) out[j] = sums[j].value();
  return out;
}

// ---------------------------------------------------------------------------
// DiagonalTarget

DiagonalTarget::DiagonalTarget(std::size_t n, const ModelParams& params)
    : n_(n), params_(params), profile_(n), marginal_(n) {
  if (n < 2) throw std::invalid_argument("grid needs n >= 2");
  const double c = params.a() / static_cast<double>(n);
  for (std::size_t k = 0; k < n; ++k) profile_[k] = cell_mass(k, c);

  CompensatedSum total;
  total += static_cast<double>(n) * profile_[0];
  for (std::size_t k = 1; k < n; ++k) total += 2.0 * static_cast<double>(n - k) * profile_[k];
  const double norm = total.value();
  for (double& g : profile_) g /= norm;

  for (std::size_t k = n; k-- > 0;) {
    if (profile_[k] > 0.0) {
      band_ = k;
      break;
    }
  }
  for (std::size_t j = 0; j < n; ++j) {
    CompensatedSum s;
    for (std::size_t i = 0; i < n; ++i) s += joint(i, j);
    marginal_[j] = s.value();
  }
}

GridDistribution DiagonalTarget::joint_distribution() const {
  std::vector<double> w(n_ * n_);
  for (std::size_t i = 0; i < n_; ++i) {
    for (std::size_t j = 0; j < n_; ++j) w[i * n_ + j] = joint(i, j);
  }
  return GridDistribution::from_weights(n_, 2, std::move(w));
}

GridDistribution DiagonalTarget::marginal_distribution() const {
  return GridDistribution::from_weights(n_, 1, marginal_);
}

GridDistribution build_discretized_target(std::size_t n, const ModelParams& params) {
  return DiagonalTarget(n, params).joint_distribution();
}

// ---------------------------------------------------------------------------
// RandomScanOperator

RandomScanOperator::RandomScanOperator(std::size_t n, const ModelParams& params)
    : target_(n, params) {}

GridDistribution RandomScanOperator::apply(const GridDistribution& dist) const {
  return evolve(dist, 1);
}

GridDistribution RandomScanOperator::evolve(const GridDistribution& dist, std::size_t steps,
                                            const StepObserver& observer) const {
  return evolve_until(dist, steps,
                      [&](const StepStats& stats) {
                        if (observer) observer(stats);
                        return false;
                      })
      .first;
}

std::pair<GridDistribution, std::size_t> RandomScanOperator::evolve_until(
    const GridDistribution& dist, std::size_t max_steps,
    const std::function<bool(const StepStats&)>& stop) const {
  if (dist.dims() != 2 || dist.n() != n()) {
    throw std::invalid_argument("distribution does not match the operator grid");
  }
  if (max_steps == 0) return {dist, 0};

  // The step only reads the input's marginals, so two banded buffers suffice.
  Marginals current = marginals_of(dist);
  Marginals next;
  GridDistribution buffers[2] = {GridDistribution::zeros(n(), 2),
                                 GridDistribution::zeros(n(), 2)};
  std::size_t t = 0;
  while (t < max_steps) {
    GridDistribution& out = buffers[t % 2];
    StepStats stats = random_scan_step(target_, current, out, next);
    stats.t = ++t;
    std::swap(current, next);
    if (stop && stop(stats)) break;
  }
  return {std::move(buffers[(t - 1) % 2]), t};
}

GridDistribution evolve_2d(const GridDistribution& dist, std::size_t steps,
                           const ModelParams& params) {
  return RandomScanOperator(dist.n(), params).evolve(dist, steps);
}

double tv_distance(const GridDistribution& p, const GridDistribution& q) {
  require_same_shape(p, q);
  CompensatedSum s;
  for (std::size_t k = 0; k < p.size(); ++k) s += std::abs(p[k] - q[k]);
  return 0.5 * s.value();
}

MixingResult find_mixing_time(Point start, double epsilon, const ModelParams& params,
                              std::size_t n, std::size_t max_steps) {
  if (!(epsilon > 0.0 && epsilon < 1.0)) throw std::invalid_argument("epsilon must be in (0, 1)");
  const RandomScanOperator op(n, params);
  const GridDistribution initial = GridDistribution::point_mass(n, start);

  MixingResult result;
  result.a = params.a();
  result.n = n;
  result.epsilon = epsilon;
  result.start = start;
  const double tv0 = tv_distance(initial, op.target().joint_distribution());
  result.tv_curve.emplace_back(0, tv0);
  if (tv0 <= epsilon) {
    result.converged = true;
    return result;
  }

  op.evolve_until(initial, max_steps, [&](const StepStats& stats) {
    result.tv_curve.emplace_back(stats.t, stats.tv_to_target);
    if (stats.tv_to_target <= epsilon) {
      result.converged = true;
      result.t_mix = stats.t;
      return true;
    }
    return false;
  });
  if (!result.converged) {
    result.t_mix = max_steps;
    throw NonConvergence("total variation stayed above " + std::to_string(epsilon) +
                             " for " + std::to_string(max_steps) + " steps",
                         std::move(result));
  }
  return result;
}

// ---------------------------------------------------------------------------
// Sets and images

std::vector<Box> corner_set() { return {Box{0.0, 0.25, 0.0, 0.25}, Box{0.75, 1.0, 0.75, 1.0}}; }

double set_probability(const GridDistribution& dist, std::span<const Box> region) {
  if (dist.dims() != 2) throw std::invalid_argument("set probability needs a 2-D distribution");
  for (const Box& b : region) {
    if (!(0.0 <= b.u0 && b.u0 <= b.u1 && b.u1 <= 1.0 && 0.0 <= b.v0 && b.v0 <= b.v1 &&
          b.v1 <= 1.0)) {
      throw std::invalid_argument("boxes must lie inside the unit square");
    }
  }
  for (std::size_t p = 0; p < region.size(); ++p) {
    for (std::size_t q = p + 1; q < region.size(); ++q) {
      const Box& a = region[p];
      const Box& b = region[q];
      const bool overlap = std::min(a.u1, b.u1) > std::max(a.u0, b.u0) &&
                           std::min(a.v1, b.v1) > std::max(a.v0, b.v0);
      if (overlap) throw std::invalid_argument("boxes must be disjoint");
    }
  }

  const std::size_t n = dist.n();
  const double scale = static_cast<double>(n);
  // Covered fraction of cell k along one axis, in cell units so aligned
  // edges give exact fractions.
  auto coverage = [&](std::size_t k, double lo, double hi) {
    const double cell_lo = static_cast<double>(k);
    return std::max(0.0, std::min(hi * scale, cell_lo + 1.0) - std::max(lo * scale, cell_lo));
  };
  auto cell_range = [&](double lo, double hi) {
    const auto first = static_cast<std::size_t>(std::floor(lo * scale));
    const auto last = std::min(n, static_cast<std::size_t>(std::ceil(hi * scale)));
    return std::make_pair(first, last);
  };

  CompensatedSum mass;
  for (const Box& b : region) {
    const auto [i0, i1] = cell_range(b.u0, b.u1);
    const auto [j0, j1] = cell_range(b.v0, b.v1);
    for (std::size_t i = i0; i < i1; ++i) {
      const double fu = coverage(i, b.u0, b.u1);
      if (fu == 0.0) continue;
      for (std::size_t j = j0; j < j1; ++j) {
        const double fv = coverage(j, b.v0, b.v1);
        if (fv != 0.0) mass += dist(i, j) * fu * fv;
      }
    }
  }
  return mass.value();
}

void export_heatmap(const GridDistribution& dist, const std::filesystem::path& path) {
  if (dist.dims() != 2) throw std::invalid_argument("heatmaps need a 2-D distribution");
  const auto w = dist.weights();
  const auto [lo_it, hi_it] = std::minmax_element(w.begin(), w.end());
  const double lo = *lo_it;
  const double range = *hi_it - lo;

  const std::size_t n = dist.n();
  std::vector<unsigned char> pixels(2 * n * n);
  for (std::size_t r = 0; r < n; ++r) {
    const std::size_t j = n - 1 - r;
    for (std::size_t i = 0; i < n; ++i) {
      const double level = range > 0.0 ? (dist(i, j) - lo) / range : 0.0;
      const auto value = static_cast<std::uint16_t>(std::lround(65535.0 * (1.0 - level)));
      pixels[2 * (r * n + i)] = static_cast<unsigned char>(value >> 8);
      pixels[2 * (r * n + i) + 1] = static_cast<unsigned char>(value & 0xff);
    }
  }

  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open heatmap file '" + path.string() + "'");
  out << "P5\n" << n << ' ' << n << "\n65535\n";
  out.write(reinterpret_cast<const char*>(pixels.data()),
            static_cast<std::streamsize>(pixels.size()));
  if (!out) throw std::runtime_error("failed writing heatmap file '" + path.string() + "'");
}

}  // namespace gibbsmix
