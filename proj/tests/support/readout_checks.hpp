#pragma once

#include <cmath>
#include <cstring>
#include <numeric>

#include "dfept/readout.hpp"
#include "gnn_checks.hpp"

namespace dfept::testing {

/// united == sum * max bitwise on random E; all four modes unchanged by row shuffles.
inline CheckResult pooling_identities(std::size_t count, std::uint64_t seed) {
  CheckResult r;
  Rng rng(seed);
  for (std::size_t t = 0; t < count; ++t) {
    const std::size_t n = 1 + rng.below(10), d = 1 + rng.below(8);
    Matrix<float> e(n, d);
    for (float& v : e.data()) v = static_cast<float>(rng.uniform(-2.0, 2.0));
    const auto sum = pool(e, PoolMode::Sum).values, mx = pool(e, PoolMode::Max).values;
    const auto uni = pool(e, PoolMode::United).values;
    for (std::size_t j = 0; j < d; ++j) {
      // brute-force reductions, independent of the tape ops
      float s = 0, m = e(0, j);
      for (std::size_t i = 0; i < n; ++i) s += e(i, j), m = std::max(m, e(i, j));
      if (sum[j] != s || mx[j] != m) r.fail("sum/max reduction mismatch in trial " + std::to_string(t));
      if (uni[j] != s * m) r.fail("united != sum * max in trial " + std::to_string(t));
    }
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    rng.shuffle(perm);
    Matrix<float> shuffled(n, d);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < d; ++j) shuffled(perm[i], j) = e(i, j);
    for (PoolMode mode : {PoolMode::Sum, PoolMode::Max, PoolMode::Mean, PoolMode::United}) {
      const auto a = pool(e, mode).values, b = pool(shuffled, mode).values;
      // float sums may reassociate; allow a few ulps
      for (std::size_t j = 0; j < d; ++j) {
        const double gap = std::abs(static_cast<double>(a[j]) - b[j]);
        r.worst = std::max(r.worst, gap);
        if (gap > 1e-5 * std::max(1.0, std::abs(static_cast<double>(a[j]))))
          r.fail(std::string(to_string(mode)) + " not permutation invariant in trial " + std::to_string(t));
      }
    }
    ++r.trials;
  }
  return r;
}

struct PeReport {
  CheckResult result;
  double p0 = 1, p1 = 0;
};

inline PeReport positional_checks() {
  PeReport rep;
  CheckResult& r = rep.result;
  PositionalEncoder enc{10000.0, 8, PeMode::PostPool};
  const auto p = enc.post_pool_offset();
  rep.p0 = p[0];
  rep.p1 = p[1];
  if (p[0] != 0.0) r.fail("P[0] is not exactly 0");
  if (std::abs(p[1] - std::cos(1.0)) > 1e-9) r.fail("P[1] differs from cos(1)");

  GraphVector<float> g{{0.25f, -1.5f, 3.0f, 0.0f, 1e-3f, -7.0f, 2.5f, 0.125f}, 3, false};
  GraphVector<float> off = positional_encode(g, PositionalEncoder{10000.0, 8, PeMode::Off});
  if (std::memcmp(off.values.data(), g.values.data(), g.values.size() * sizeof(float)) != 0 || off.pe_applied)
    r.fail("off mode is not the identity");

  GraphVector<float> once = positional_encode(g, enc);
  if (!once.pe_applied || once.values[0] != g.values[0]) r.fail("post-pool did not leave element 0 alone");
  try {
    positional_encode(once, enc);
    r.fail("second post-pool application accepted");
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::ContractViolation) r.fail("second application raised the wrong error kind");
  }
  ++r.trials;
  return rep;
}

}  // namespace dfept::testing
