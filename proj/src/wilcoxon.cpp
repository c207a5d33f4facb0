#include <algorithm>
#include <cmath>
#include <numeric>

#include <boost/math/distributions/binomial.hpp>
#include <boost/math/distributions/normal.hpp>

#include "qprad/errors.hpp"
#include "qprad/statistics.hpp"

namespace qprad {

namespace {

struct Ranked {
  std::vector<double> ranks;  // average ranks of |d|
  std::vector<bool> positive;
  double tie_term = 0;        // sum over tie groups of t^3 - t
};

Ranked rank_nonzero(const std::vector<double>& diffs) {
  std::vector<double> d;
  d.reserve(diffs.size());
  for (double x : diffs) {
    if (std::isnan(x)) throw DataError("wilcoxon_signed_rank: NaN difference");
    if (x != 0) d.push_back(x);
  }
  if (d.empty()) throw DataError("wilcoxon_signed_rank: all differences are zero");
  std::vector<std::size_t> order(d.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return std::abs(d[a]) < std::abs(d[b]); });
  Ranked out;
  out.ranks.resize(d.size());
  out.positive.resize(d.size());
  for (std::size_t i = 0; i < d.size();) {
    std::size_t j = i;
    while (j + 1 < d.size() && std::abs(d[order[j + 1]]) == std::abs(d[order[i]])) ++j;
    const double avg = 0.5 * static_cast<double>(i + j) + 1.0;
    const double t = static_cast<double>(j - i + 1);
    out.tie_term += t * t * t - t;
    for (std::size_t k = i; k <= j; ++k) out.ranks[order[k]] = avg;
    i = j + 1;
  }
  for (std::size_t i = 0; i < d.size(); ++i) out.positive[i] = d[i] > 0;
  return out;
}

double w_plus_of(const Ranked& r) {
  double w = 0;
  for (std::size_t i = 0; i < r.ranks.size(); ++i) {
    if (r.positive[i]) w += r.ranks[i];
  }
  return w;
}

WilcoxonResult normal_approx(const Ranked& r, Alternative alt) {
  const double n = static_cast<double>(r.ranks.size());
  WilcoxonResult out;
  out.w_plus = w_plus_of(r);
  out.n_effective = static_cast<int>(r.ranks.size());
  const double mean = n * (n + 1) / 4;
  const double var = n * (n + 1) * (2 * n + 1) / 24 - r.tie_term / 48;
  const double sd = std::sqrt(var);
  const boost::math::normal_distribution<double> std_normal;
  auto upper = [&](double w) {
    return sd > 0 ? boost::math::cdf(boost::math::complement(std_normal, (w - mean - 0.5) / sd))
                  : (w > mean ? 0.0 : 1.0);
  };
  auto lower = [&](double w) {
    return sd > 0 ? boost::math::cdf(std_normal, (w - mean + 0.5) / sd) : (w < mean ? 0.0 : 1.0);
  };
  out.z = sd > 0 ? (out.w_plus - mean) / sd : 0.0;
  switch (alt) {
    case Alternative::greater: out.p_value = upper(out.w_plus); break;
    case Alternative::less: out.p_value = lower(out.w_plus); break;
    case Alternative::two_sided:
      out.p_value = std::min(1.0, 2 * std::min(upper(out.w_plus), lower(out.w_plus)));
      break;
  }
  return out;
}

// Null distribution of 2 W+ by dynamic programming over doubled (integer) ranks.
WilcoxonResult exact(const Ranked& r, Alternative alt) {
  std::vector<long> doubled(r.ranks.size());
  long total = 0;
  for (std::size_t i = 0; i < r.ranks.size(); ++i) {
    doubled[i] = std::lround(2 * r.ranks[i]);
    total += doubled[i];
  }
  std::vector<double> counts(static_cast<std::size_t>(total) + 1, 0.0);
  counts[0] = 1;
  long reach = 0;
  for (long v : doubled) {
    for (long s = reach; s >= 0; --s) {
      if (counts[static_cast<std::size_t>(s)] != 0) counts[static_cast<std::size_t>(s + v)] += counts[static_cast<std::size_t>(s)];
    }
    reach += v;
  }
  const double all = std::ldexp(1.0, static_cast<int>(r.ranks.size()));
  WilcoxonResult out;
  out.w_plus = w_plus_of(r);
  out.n_effective = static_cast<int>(r.ranks.size());
  out.exact = true;
  const long w2 = std::lround(2 * out.w_plus);
  double ge = 0, le = 0;
  for (long s = 0; s <= total; ++s) {
    if (s >= w2) ge += counts[static_cast<std::size_t>(s)];
    if (s <= w2) le += counts[static_cast<std::size_t>(s)];
  }
  switch (alt) {
    case Alternative::greater: out.p_value = ge / all; break;
    case Alternative::less: out.p_value = le / all; break;
    case Alternative::two_sided: out.p_value = std::min(1.0, 2 * std::min(ge, le) / all); break;
  }
  return out;
}

}  // namespace

WilcoxonResult wilcoxon_signed_rank(const std::vector<double>& diffs, Alternative alternative,
                                    int exact_limit) {
  const Ranked r = rank_nonzero(diffs);
  if (static_cast<int>(r.ranks.size()) <= exact_limit) return exact(r, alternative);
  return normal_approx(r, alternative);
}

WilcoxonResult wilcoxon_signed_rank_normal(const std::vector<double>& diffs,
                                           Alternative alternative) {
  return normal_approx(rank_nonzero(diffs), alternative);
}

MedianCi median_with_ci(std::vector<double> values, double level) {
  if (values.empty()) throw DataError("median_with_ci: no values");
  if (!(level > 0 && level < 1)) throw ContractViolation("median_with_ci: level must be in (0, 1)");
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  MedianCi out;
  out.median = n % 2 == 1 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
  const double alpha = 1 - level;
  const auto dn = static_cast<double>(n);

  if (n >= 8) {
    const double z = boost::math::quantile(boost::math::normal_distribution<double>(), 1 - alpha / 2);
    const double half = z * std::sqrt(dn) / 2;
    auto lo = static_cast<long>(std::floor(dn / 2 - half));
    auto hi = static_cast<long>(std::ceil(1 + dn / 2 + half));
    lo = std::clamp<long>(lo, 1, static_cast<long>(n));
    hi = std::clamp<long>(hi, 1, static_cast<long>(n));
    out.lower = values[static_cast<std::size_t>(lo - 1)];
    out.upper = values[static_cast<std::size_t>(hi - 1)];
    out.achieved_level = level;
    return out;
  }

  // Exact: [X_(k), X_(n+1-k)] covers the median with probability 1 - 2 P(B <= k-1).
  const boost::math::binomial_distribution<double> b(dn, 0.5);
  std::size_t k = 0;
  for (std::size_t c = 1; c <= n / 2; ++c) {
    if (boost::math::cdf(b, static_cast<double>(c - 1)) <= alpha / 2) k = c;
  }
  out.exact = true;
  if (k == 0) {
    out.lower = values.front();
    out.upper = values.back();
    out.achieved_level = 1 - 2 * std::ldexp(1.0, -static_cast<int>(n));
  } else {
    out.lower = values[k - 1];
    out.upper = values[n - k];
    out.achieved_level = 1 - 2 * boost::math::cdf(b, static_cast<double>(k - 1));
  }
  return out;
}

}  // namespace qprad
