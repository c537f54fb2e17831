#include "rim/ar.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include "rim/error.hpp"

namespace rim {

namespace {

using CMat = Eigen::MatrixXcd;
using CVec = Eigen::VectorXcd;

// Least squares on prediction targets n in [first, x.size()).
ArFit solve_ls(std::span<const cdouble> x, std::size_t order, std::size_t first) {
  const std::size_t rows = x.size() - first;
  CMat a(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(order));
  CVec b(static_cast<Eigen::Index>(rows));
  for (std::size_t r = 0; r < rows; ++r) {
    const std::size_t n = first + r;
    b(static_cast<Eigen::Index>(r)) = x[n];
    for (std::size_t i = 0; i < order; ++i)
      a(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(i)) = x[n - i - 1];
  }

  CMat g = a.adjoint() * a;
  const CVec rhs = a.adjoint() * b;
  ArFit fit;
  const double trace = g.trace().real();
  Eigen::SelfAdjointEigenSolver<CMat> eig(g, Eigen::EigenvaluesOnly);
  const auto& ev = eig.eigenvalues();
  const double top = ev.maxCoeff();
  if (!(top > 0.0) || ev.minCoeff() <= top * 1e-12) {
    fit.regularized = true;
    const double ridge = trace > 0.0 ? 1e-8 * trace : 1e-300;
    g.diagonal().array() += ridge;
  }
  const CVec psi = g.ldlt().solve(rhs);
  if (!psi.allFinite()) throw NumericalError("ar: least-squares solve failed");

  fit.coeffs.assign(psi.data(), psi.data() + psi.size());
  fit.residual_variance = (b - a * psi).squaredNorm() / static_cast<double>(rows);
  return fit;
}

double mean_power(std::span<const cdouble> x) {
  double acc = 0.0;
  for (auto v : x) acc += std::norm(v);
  return x.empty() ? 0.0 : acc / static_cast<double>(x.size());
}

}  // namespace

ArFit fit_ar(std::span<const cdouble> x, std::size_t order) {
  if (order == 0) throw ConfigError("ar: order must be >= 1");
  if (x.size() < 2 * order) throw DataError("ar: need at least 2q samples");
  return solve_ls(x, order, order);
}

ArFit fit_burg(std::span<const cdouble> x, std::size_t order) {
  if (order == 0) throw ConfigError("burg: order must be >= 1");
  if (x.size() < 2 * order) throw DataError("burg: need at least 2q samples");
  const std::size_t n = x.size();
  std::vector<cdouble> f(x.begin(), x.end()), b(x.begin(), x.end());
  std::vector<cdouble> a{1.0};
  double err = mean_power(x);
  for (std::size_t m = 1; m <= order; ++m) {
    cdouble num{};
    double den = 0.0;
    for (std::size_t k = m; k < n; ++k) {
      num += f[k] * std::conj(b[k - 1]);
      den += std::norm(f[k]) + std::norm(b[k - 1]);
    }
    const cdouble refl = den > 0.0 ? -2.0 * num / den : cdouble{};

    std::vector<cdouble> next(m + 1);
    for (std::size_t i = 0; i <= m; ++i) {
      const cdouble ai = i < m ? a[i] : cdouble{};
      const cdouble tail = (m - i) < m ? std::conj(a[m - i]) : cdouble{};
      next[i] = ai + refl * tail;
    }
    a = std::move(next);
    // Update from the top so f[k] and b[k-1] are still the previous stage.
    for (std::size_t k = n - 1; k >= m; --k) {
      const cdouble fk = f[k];
      f[k] = fk + refl * b[k - 1];
      b[k] = b[k - 1] + std::conj(refl) * fk;
    }
    err *= 1.0 - std::norm(refl);
  }
  ArFit fit;
  for (std::size_t i = 1; i <= order; ++i) fit.coeffs.push_back(-a[i]);
  fit.residual_variance = std::max(err, 0.0);
  return fit;
}

void ArConfig::validate() const {
  if (max_order == 0) throw ConfigError("ar: max_order must be >= 1");
  if (order_rule == OrderRule::fixed &&
      (fixed_order == 0 || fixed_order > max_order))
    throw ConfigError("ar: fixed order must lie in [1, max_order]");
  if (min_clean_run < 2 * max_order)
    throw ConfigError("ar: min_clean_run must be at least 2 * max_order");
}

std::size_t select_order(std::span<const cdouble> x, const ArConfig& cfg) {
  if (cfg.max_order == 0) throw ConfigError("ar: max_order must be >= 1");
  if (x.size() < 2 * cfg.max_order)
    throw DataError("ar: need at least 2 * max_order samples for AIC");
  const double floor = std::max(mean_power(x) * 1e-24,
                                std::numeric_limits<double>::min());
  const double len = static_cast<double>(x.size() - cfg.max_order);
  std::size_t best_q = 1;
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t q = 1; q <= cfg.max_order; ++q) {
    const ArFit fit = solve_ls(x, q, cfg.max_order);
    const double aic =
        len * std::log(std::max(fit.residual_variance, floor)) + 2.0 * static_cast<double>(q);
    if (aic < best) {
      best = aic;
      best_q = q;
    }
  }
  return best_q;
}

std::vector<cdouble> stabilize_ar(std::span<const cdouble> coeffs) {
  const auto q = static_cast<Eigen::Index>(coeffs.size());
  if (q == 0) return {};
  CMat companion = CMat::Zero(q, q);
  for (Eigen::Index i = 0; i < q; ++i) companion(0, i) = coeffs[static_cast<std::size_t>(i)];
  for (Eigen::Index i = 1; i < q; ++i) companion(i, i - 1) = 1.0;
  Eigen::ComplexEigenSolver<CMat> eig(companion, false);
  if (eig.info() != Eigen::Success) throw NumericalError("ar: root finding failed");
  CVec roots = eig.eigenvalues();
  bool changed = false;
  for (auto& r : roots)
    if (std::abs(r) > 1.0) {
      r = 1.0 / std::conj(r);
      changed = true;
    }
  if (!changed) return {coeffs.begin(), coeffs.end()};
  // Expand prod (z - r) into z^q + c_1 z^(q-1) + ... + c_q.
  std::vector<cdouble> poly{1.0};
  for (const auto& r : roots) {
    std::vector<cdouble> next(poly.size() + 1, cdouble{});
    for (std::size_t i = 0; i < poly.size(); ++i) {
      next[i] += poly[i];
      next[i + 1] -= r * poly[i];
    }
    poly = std::move(next);
  }
  std::vector<cdouble> out(coeffs.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = -poly[i + 1];
  return out;
}

void ar_extrapolate(std::span<const cdouble> coeffs, std::span<cdouble> out,
                    std::size_t begin, std::size_t end) {
  for (std::size_t n = begin; n < end; ++n) {
    cdouble acc{};
    for (std::size_t i = 0; i < coeffs.size() && i < n; ++i)
      acc += coeffs[i] * out[n - i - 1];
    out[n] = acc;
  }
}

namespace {

struct Run {
  std::size_t begin, end;
};

std::vector<Run> runs_of(std::span<const bool> mask, bool value) {
  std::vector<Run> out;
  std::size_t i = 0;
  while (i < mask.size()) {
    if (mask[i] != value) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j < mask.size() && mask[j] == value) ++j;
    out.push_back({i, j});
    i = j;
  }
  return out;
}

}  // namespace

SliceRepair repair_slice(std::span<const cdouble> slice,
                         std::span<const bool> gap, const ArConfig& cfg) {
  cfg.validate();
  if (slice.size() != gap.size())
    throw DataError("repair_slice: mask length differs from slice");
  SliceRepair out;
  out.values.assign(slice.begin(), slice.end());
  const auto gaps = runs_of(gap, true);
  if (gaps.empty()) return out;

  const auto clean = runs_of(gap, false);
  const auto longest = std::max_element(
      clean.begin(), clean.end(),
      [](const Run& a, const Run& b) { return a.end - a.begin < b.end - b.begin; });
  if (longest == clean.end() || longest->end - longest->begin < cfg.min_clean_run) {
    for (const auto& g : gaps)
      std::fill(out.values.begin() + static_cast<std::ptrdiff_t>(g.begin),
                out.values.begin() + static_cast<std::ptrdiff_t>(g.end), cdouble{});
    out.zero_filled = true;
    return out;
  }

  const std::span<const cdouble> train = slice.subspan(longest->begin, longest->end - longest->begin);
  std::vector<cdouble> reversed(train.rbegin(), train.rend());
  const std::size_t q = cfg.order_rule == OrderRule::aic ? select_order(train, cfg)
                                                         : cfg.fixed_order;
  out.order = q;
  const auto fit = cfg.estimator == ArEstimator::burg ? fit_burg : fit_ar;
  auto fwd = fit(train, q).coeffs;
  auto bwd = fit(reversed, q).coeffs;
  if (cfg.stabilize) {
    fwd = stabilize_ar(fwd);
    bwd = stabilize_ar(bwd);
  }
  const std::size_t len = slice.size();

  // Backward predictions, right to left, in their own working copy.
  std::vector<cdouble> back(slice.begin(), slice.end());
  std::vector<bool> back_ok(gaps.size(), false);
  for (std::size_t gi = gaps.size(); gi-- > 0;) {
    const auto& g = gaps[gi];
    if (g.end + q > len) continue;
    back_ok[gi] = true;
    for (std::size_t n = g.end; n-- > g.begin;) {
      cdouble acc{};
      for (std::size_t i = 0; i < q; ++i) acc += bwd[i] * back[n + i + 1];
      back[n] = acc;
    }
  }

  for (std::size_t gi = 0; gi < gaps.size(); ++gi) {
    const auto& g = gaps[gi];
    const bool has_left = g.begin >= q;
    const std::size_t width = g.end - g.begin;
    if (has_left) ar_extrapolate(fwd, out.values, g.begin, g.end);

    if (has_left && back_ok[gi] && cfg.direction == ArDirection::bidirectional) {
      for (std::size_t i = 0; i < width; ++i) {
        const double wb = static_cast<double>(i + 1) / static_cast<double>(width + 1);
        const std::size_t n = g.begin + i;
        out.values[n] = (1.0 - wb) * out.values[n] + wb * back[n];
      }
    } else if (!has_left && back_ok[gi]) {
      out.backward_fallback = true;
      for (std::size_t n = g.begin; n < g.end; ++n) out.values[n] = back[n];
    } else if (!has_left) {
      out.zero_filled = true;
      for (std::size_t n = g.begin; n < g.end; ++n) out.values[n] = cdouble{};
    }
  }
  return out;
}

}  // namespace rim
