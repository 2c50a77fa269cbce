#include "dmbpp/simplex.hpp"

#include <algorithm>
#include <array>
#include <numeric>
#include <sstream>

#include "dmbpp/error.hpp"

namespace dmbpp {

namespace {

constexpr int kFactorialTableSize = 1024;

const std::array<double, kFactorialTableSize>& factorial_table() {
  static const std::array<double, kFactorialTableSize> table = [] {
    std::array<double, kFactorialTableSize> t{};
    for (int n = 0; n < kFactorialTableSize; ++n) t[n] = std::lgamma(n + 1.0);
    return t;
  }();
  return table;
}

int grid_cells(double h) {
  if (!(h > 0.0) || h > 0.5) throw DomainError("grid spacing must lie in (0, 0.5]");
  const double inv = 1.0 / h;
  const int n = static_cast<int>(std::lround(inv));
  if (std::abs(inv - n) > 1e-9 * inv) throw DomainError("grid spacing must divide 1");
  return n;
}

}  // namespace

SimplexPoint::SimplexPoint(std::vector<double> coords) : coords_(std::move(coords)) {
  if (coords_.empty()) throw DomainError("simplex point needs at least one coordinate");
  double sum = 0.0;
  for (double c : coords_) {
    if (!std::isfinite(c) || c < 0.0) {
      std::ostringstream os;
      os << "simplex coordinate " << c << " outside [0,1]";
      throw DomainError(os.str());
    }
    sum += c;
  }
  if (sum > 1.0 + kSumTolerance) {
    std::ostringstream os;
    os.precision(17);
    os << "simplex coordinates sum to " << sum << " > 1";
    throw DomainError(os.str());
  }
}

double SimplexPoint::last() const {
  const double s = std::accumulate(coords_.begin(), coords_.end(), 0.0);
  return std::max(0.0, 1.0 - s);
}

bool SimplexPoint::is_interior() const {
  for (double c : coords_)
    if (c < kInteriorTolerance) return false;
  return 1.0 - std::accumulate(coords_.begin(), coords_.end(), 0.0) >= kInteriorTolerance;
}

std::vector<double> log_parts(const SimplexPoint& y) {
  std::vector<double> out(y.dim() + 1);
  for (std::size_t l = 0; l < y.dim(); ++l) out[l] = y[l] > 0.0 ? std::log(y[l]) : kNegInf;
  const double last = y.last();
  out[y.dim()] = last > 0.0 ? std::log(last) : kNegInf;
  return out;
}

DirichletParam::DirichletParam(std::vector<double> alpha) : alpha_(std::move(alpha)) {
  if (alpha_.size() < 2) throw DomainError("Dirichlet parameter needs at least two components");
  for (double a : alpha_)
    if (!std::isfinite(a) || a <= 0.0) throw DomainError("Dirichlet components must be positive");
}

double DirichletParam::sum() const { return std::accumulate(alpha_.begin(), alpha_.end(), 0.0); }

double log_factorial(int n) {
  if (n < 0) throw DomainError("log_factorial of a negative integer");
  if (n < kFactorialTableSize) return factorial_table()[n];
  return std::lgamma(n + 1.0);
}

double dirichlet_log_density(std::span<const double> log_y, std::span<const double> alpha) {
  if (log_y.size() != alpha.size())
    throw DomainError("Dirichlet parameter size does not match the composition");
  double total = 0.0;
  double out = 0.0;
  for (std::size_t l = 0; l < alpha.size(); ++l) {
    const double a = alpha[l];
    total += a;
    out -= std::lgamma(a);
    if (a == 1.0) continue;
    if (log_y[l] == kNegInf) {
      if (a < 1.0) throw DomainError("zero part against a Dirichlet component below one");
      return kNegInf;
    }
    out += (a - 1.0) * log_y[l];
  }
  return out + std::lgamma(total);
}

double dirichlet_log_density(const SimplexPoint& y, const DirichletParam& a) {
  const auto ly = log_parts(y);
  return dirichlet_log_density(ly, a.values());
}

double multinomial_log_pmf(std::span<const int> j, int n, const SimplexPoint& y) {
  if (j.size() != y.dim()) throw DomainError("count vector size does not match the composition");
  if (n < 0) throw DomainError("negative multinomial size");
  int used = 0;
  for (int c : j) {
    if (c < 0) throw DomainError("negative multinomial count");
    used += c;
  }
  if (used > n) throw DomainError("multinomial counts exceed the number of trials");
  double out = log_factorial(n);
  auto add = [&out](int count, double prob) {
    out -= log_factorial(count);
    if (count == 0) return;
    out += prob > 0.0 ? count * std::log(prob) : kNegInf;
  };
  for (std::size_t l = 0; l < j.size(); ++l) add(j[l], y[l]);
  add(n - used, y.last());
  return out;
}

double log_sum_exp(std::span<const double> v) {
  double hi = kNegInf;
  for (double x : v) hi = std::max(hi, x);
  if (hi == kNegInf) return kNegInf;
  if (hi == std::numeric_limits<double>::infinity()) return hi;
  double s = 0.0;
  for (double x : v) s += std::exp(x - hi);
  return hi + std::log(s);
}

SimplexGrid SimplexGrid::interior(double h) {
  const int n = grid_cells(h);
  SimplexGrid g;
  g.kind = Kind::Interior;
  g.spacing = 1.0 / n;
  g.cell_volume = g.spacing * g.spacing;
  for (int i = 1; i <= n - 2; ++i)
    for (int j = 1; i + j <= n - 1; ++j) {
      g.points.emplace_back(std::vector<double>{i * g.spacing, j * g.spacing});
      g.weights.push_back(g.cell_volume);
    }
  return g;
}

SimplexGrid SimplexGrid::quadrature(double h) {
  const int n = grid_cells(h);
  SimplexGrid g;
  g.kind = Kind::Quadrature;
  g.spacing = 1.0 / n;
  g.cell_volume = g.spacing * g.spacing;
  for (int i = 1; i <= n - 1; ++i)
    for (int j = 1; i + j <= n; ++j) {
      g.points.emplace_back(std::vector<double>{(i - 0.5) * g.spacing, (j - 0.5) * g.spacing});
      g.weights.push_back(g.cell_volume);
    }
  for (int i = 1; i <= n; ++i) {
    const int j = n + 1 - i;
    g.points.emplace_back(
        std::vector<double>{(i - 2.0 / 3.0) * g.spacing, (j - 2.0 / 3.0) * g.spacing});
    g.weights.push_back(0.5 * g.cell_volume);
  }
  return g;
}

double simplex_quadrature(const std::function<double(const SimplexPoint&)>& g,
                          const SimplexGrid& grid) {
  double s = 0.0;
  for (std::size_t i = 0; i < grid.points.size(); ++i) s += g(grid.points[i]) * grid.weights[i];
  return s;
}

}  // namespace dmbpp
