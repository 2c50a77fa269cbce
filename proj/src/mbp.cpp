#include "dmbpp/mbp.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>
#include <numeric>
#include <shared_mutex>

#include "dmbpp/error.hpp"

namespace dmbpp {

DegreeK::DegreeK(int k) : k_(k) {
  if (k < 1) throw DomainError("polynomial degree must be >= 1");
}

bool in_H0(int k, std::span<const int> j) {
  const int m = static_cast<int>(j.size());
  int sum = 0;
  for (int v : j) {
    if (v < 1 || v > k) return false;
    sum += v;
  }
  return sum <= k + m - 1;
}

bool IndexSetH0::contains(std::span<const int> j) const {
  return static_cast<int>(j.size()) == m && in_H0(k, j);
}

namespace {

void enumerate_into(int k, int m, int budget, LatticeIndex& prefix, std::vector<LatticeIndex>& out) {
  if (static_cast<int>(prefix.size()) == m) {
    out.push_back(prefix);
    return;
  }
  // the remaining coordinates each need at least 1
  const int remaining = m - static_cast<int>(prefix.size()) - 1;
  for (int v = 1; v <= k && v + remaining <= budget; ++v) {
    prefix.push_back(v);
    enumerate_into(k, m, budget - v, prefix, out);
    prefix.pop_back();
  }
}

struct H0Cache {
  std::shared_mutex mutex;
  std::map<std::pair<int, int>, std::shared_ptr<const IndexSetH0>> sets;
};

H0Cache& h0_cache() {
  static H0Cache cache;
  return cache;
}

}  // namespace

std::shared_ptr<const IndexSetH0> enumerate_H0(DegreeK k, int m) {
  if (m < 1) throw DomainError("simplex dimension must be >= 1");
  if (k.value() > kMaxDegree) throw DomainError("polynomial degree above the hard cap");
  auto& cache = h0_cache();
  const auto key = std::make_pair(k.value(), m);
  {
    std::shared_lock lock(cache.mutex);
    if (auto it = cache.sets.find(key); it != cache.sets.end()) return it->second;
  }
  auto set = std::make_shared<IndexSetH0>();
  set->k = k.value();
  set->m = m;
  LatticeIndex prefix;
  enumerate_into(k.value(), m, k.value() + m - 1, prefix, set->indices);
  std::unique_lock lock(cache.mutex);
  return cache.sets.emplace(key, std::move(set)).first->second;
}

void lattice_cell(int k, std::span<const double> theta, std::span<int> out) {
  const int m = static_cast<int>(theta.size());
  int sum = 0;
  for (int l = 0; l < m; ++l) {
    const double c = std::ceil(k * theta[l] - 1e-12);
    const int v = c < 1.0 ? 1 : (c > k ? k : static_cast<int>(c));
    out[l] = v;
    sum += v;
  }
  while (sum > k + m - 1) {
    auto it = std::max_element(out.begin(), out.begin() + m);
    --*it;
    --sum;
  }
}

LatticeIndex ceil_index(DegreeK k, const SimplexPoint& theta) {
  double sum = 0.0;
  for (double t : theta.coords()) {
    if (!(t > 0.0)) throw DomainError("ceil_index needs a strictly interior point");
    sum += t;
  }
  if (!(sum < 1.0)) throw DomainError("ceil_index needs a strictly interior point");
  LatticeIndex out(theta.dim());
  lattice_cell(k.value(), theta.coords(), out);
  return out;
}

DirichletParam alpha_of(DegreeK k, std::span<const int> j) {
  if (!in_H0(k.value(), j)) throw DomainError("lattice index outside H0");
  std::vector<double> a(j.begin(), j.end());
  const int m = static_cast<int>(j.size());
  a.push_back(k.value() + m - std::accumulate(j.begin(), j.end(), 0));
  return DirichletParam(std::move(a));
}

double lattice_log_density(std::span<const double> log_y, int k, std::span<const int> j) {
  const int m = static_cast<int>(j.size());
  double out = log_factorial(k + m - 1);
  int used = 0;
  for (int l = 0; l < m; ++l) {
    const int a = j[l];
    used += a;
    out -= log_factorial(a - 1);
    if (a > 1) out += (a - 1) * log_y[l];
  }
  const int last = k + m - used;
  out -= log_factorial(last - 1);
  if (last > 1) out += (last - 1) * log_y[m];
  return out;
}

double mbp_mixture_log_density(const SimplexPoint& y, DegreeK k, const LatticeWeights& weights) {
  double total = 0.0;
  for (const auto& [j, w] : weights) {
    if (static_cast<std::size_t>(j.size()) != y.dim() || !in_H0(k.value(), j))
      throw DomainError("mixture weight keyed outside H0");
    if (!(w >= 0.0)) throw DomainError("negative mixture weight");
    total += w;
  }
  if (std::abs(total - 1.0) > 1e-6) throw DomainError("mixture weights do not sum to one");
  const auto ly = log_parts(y);
  std::vector<double> terms;
  terms.reserve(weights.size());
  for (const auto& [j, w] : weights) {
    if (w == 0.0) continue;
    terms.push_back(std::log(w) + lattice_log_density(ly, k.value(), j));
  }
  return log_sum_exp(terms);
}

}  // namespace dmbpp
