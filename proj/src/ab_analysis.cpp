#include "qprad/ab_analysis.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <random>
#include <tuple>

#include "qprad/errors.hpp"
#include "qprad/rng.hpp"

namespace qprad {

namespace {

struct Block {
  double omega = 0;
  std::vector<const AbRecord*> up;
  std::vector<const AbRecord*> down;
};

using BlockKey = std::pair<std::string, int>;

std::map<BlockKey, Block> group_blocks(const std::vector<AbRecord>& records) {
  std::map<BlockKey, Block> blocks;
  for (const auto& r : records) {
    if (!(r.t1_us > 0)) throw DataError("A/B record with non-positive T1 for qubit " + r.qubit_id);
    if (!(r.omega_q > 0)) throw DataError("A/B record with non-positive omega for qubit " + r.qubit_id);
    if (r.position == ShieldState::none) {
      throw DataError("A/B record without shield position for qubit " + r.qubit_id);
    }
    Block& b = blocks[{r.qubit_id, r.cycle}];
    b.omega = r.omega_q;
    (r.position == ShieldState::up ? b.up : b.down).push_back(&r);
  }
  auto by_rep = [](const AbRecord* a, const AbRecord* b) {
    return std::tie(a->repetition, a->timestamp_s) < std::tie(b->repetition, b->timestamp_s);
  };
  for (auto& [key, b] : blocks) {
    std::sort(b.up.begin(), b.up.end(), by_rep);
    std::sort(b.down.begin(), b.down.end(), by_rep);
  }
  return blocks;
}

double rate(double t1_us) { return 1e6 / t1_us; }

double mean_rate(const std::vector<const AbRecord*>& v) {
  double s = 0;
  for (const auto* r : v) s += rate(r->t1_us);
  return s / static_cast<double>(v.size());
}

}  // namespace

PairingMode pairing_mode_from_string(const std::string& text) {
  if (text == "real") return PairingMode::real;
  if (text == "no-move" || text == "no_move") return PairingMode::no_move;
  if (text == "shuffled") return PairingMode::shuffled;
  throw ConfigError("unknown pairing mode '" + text + "' (expected real, no-move or shuffled)");
}

std::string to_string(PairingMode mode) {
  switch (mode) {
    case PairingMode::real: return "real";
    case PairingMode::no_move: return "no-move";
    case PairingMode::shuffled: return "shuffled";
  }
  return "unknown";
}

Aggregation aggregation_from_string(const std::string& text) {
  if (text == "per-measurement" || text == "per_measurement") return Aggregation::per_measurement;
  if (text == "per-cycle" || text == "per_cycle") return Aggregation::per_cycle;
  throw ConfigError("unknown aggregation '" + text + "' (expected per-measurement or per-cycle)");
}

std::string to_string(Aggregation a) {
  return a == Aggregation::per_cycle ? "per-cycle" : "per-measurement";
}

void AnalysisConfig::validate() const {
  if (!(t1_cutoff_us >= 0)) throw ConfigError("analysis t1 cutoff must be >= 0");
  if (!(outlier_sigma > 0)) throw ConfigError("analysis outlier sigma must be > 0");
  if (!(omega_ref > 0)) throw ConfigError("analysis reference omega must be > 0");
  if (!(ci_level > 0 && ci_level < 1)) throw ConfigError("analysis ci level must be in (0, 1)");
  if (histogram_bins < 1) throw ConfigError("analysis histogram bins must be >= 1");
}

std::vector<double> PairingResult::deltas() const {
  std::vector<double> d;
  d.reserve(pairs.size());
  for (const auto& p : pairs) d.push_back(p.delta);
  return d;
}

PairingResult pair_and_normalize(const std::vector<AbRecord>& records, const AnalysisConfig& cfg) {
  cfg.validate();
  const auto blocks = group_blocks(records);
  PairingResult out;
  const double g_cut = cfg.t1_cutoff_us > 0 ? rate(cfg.t1_cutoff_us) : INFINITY;

  std::vector<RatePair> raw;
  std::vector<double> omegas;
  auto emit = [&](const std::string& id, int cycle, int index, double omega, double gu, double gd) {
    RatePair p{id, cycle, index, gu, gd, 0.0};
    raw.push_back(p);
    omegas.push_back(omega);
  };

  if (cfg.mode == PairingMode::real) {
    for (const auto& [key, b] : blocks) {
      if (b.up.empty() || b.down.empty()) {
        out.unmatched += static_cast<int>(b.up.size() + b.down.size());
        continue;
      }
      if (cfg.aggregation == Aggregation::per_cycle) {
        emit(key.first, key.second, 0, b.omega, mean_rate(b.up), mean_rate(b.down));
        continue;
      }
      const std::size_t m = std::min(b.up.size(), b.down.size());
      out.unmatched += static_cast<int>(b.up.size() + b.down.size() - 2 * m);
      for (std::size_t k = 0; k < m; ++k) {
        emit(key.first, key.second, static_cast<int>(k), b.omega, rate(b.up[k]->t1_us),
             rate(b.down[k]->t1_us));
      }
    }
  } else if (cfg.mode == PairingMode::no_move) {
    for (const auto& [key, b] : blocks) {
      int index = 0;
      for (const auto* half : {&b.up, &b.down}) {
        const auto& v = *half;
        if (cfg.aggregation == Aggregation::per_cycle) {
          // First half of the block against the second half.
          const std::size_t m = v.size() / 2;
          if (m == 0) {
            out.unmatched += static_cast<int>(v.size());
            continue;
          }
          std::vector<const AbRecord*> a(v.begin(), v.begin() + static_cast<long>(m));
          std::vector<const AbRecord*> c(v.begin() + static_cast<long>(m),
                                         v.begin() + static_cast<long>(2 * m));
          out.unmatched += static_cast<int>(v.size() - 2 * m);
          emit(key.first, key.second, index++, b.omega, mean_rate(a), mean_rate(c));
          continue;
        }
        for (std::size_t k = 0; k + 1 < v.size(); k += 2) {
          emit(key.first, key.second, index++, b.omega, rate(v[k]->t1_us), rate(v[k + 1]->t1_us));
        }
        out.unmatched += static_cast<int>(v.size() % 2);
      }
    }
  } else {
    std::map<std::string, std::pair<double, std::vector<std::pair<int, double>>>> pool;
    for (const auto& [key, b] : blocks) {
      auto& entry = pool[key.first];
      entry.first = b.omega;
      if (cfg.aggregation == Aggregation::per_cycle) {
        if (!b.up.empty()) entry.second.emplace_back(key.second, mean_rate(b.up));
        if (!b.down.empty()) entry.second.emplace_back(key.second, mean_rate(b.down));
      } else {
        for (const auto* r : b.up) entry.second.emplace_back(key.second, rate(r->t1_us));
        for (const auto* r : b.down) entry.second.emplace_back(key.second, rate(r->t1_us));
      }
    }
    for (auto& [id, entry] : pool) {
      Rng rng = make_rng(cfg.seed, "shuffle:" + id, 0);
      auto& v = entry.second;
      std::shuffle(v.begin(), v.end(), rng);
      std::bernoulli_distribution coin(0.5);
      for (std::size_t k = 0; k + 1 < v.size(); k += 2) {
        const bool flip = coin(rng);
        const double gu = flip ? v[k + 1].second : v[k].second;
        const double gd = flip ? v[k].second : v[k + 1].second;
        emit(id, v[k].first, static_cast<int>(k / 2), entry.first, gu, gd);
      }
      out.unmatched += static_cast<int>(v.size() % 2);
    }
  }

  // Cutoff on the slow side of the pair, then normalisation.
  std::vector<RatePair> kept;
  kept.reserve(raw.size());
  for (std::size_t i = 0; i < raw.size(); ++i) {
    RatePair p = raw[i];
    if (p.gamma_up > g_cut || p.gamma_down > g_cut) {
      ++out.removed_cutoff;
      continue;
    }
    p.delta = (p.gamma_down - p.gamma_up) * std::sqrt(cfg.omega_ref / omegas[i]);
    kept.push_back(std::move(p));
  }

  // Outliers against the pooled spread of all differences.
  if (kept.size() >= 2) {
    double mean = 0;
    for (const auto& p : kept) mean += p.delta;
    mean /= static_cast<double>(kept.size());
    double ss = 0;
    for (const auto& p : kept) ss += (p.delta - mean) * (p.delta - mean);
    const double sd = std::sqrt(ss / static_cast<double>(kept.size() - 1));
    for (auto& p : kept) {
      if (sd > 0 && std::abs(p.delta - mean) > cfg.outlier_sigma * sd) {
        ++out.removed_outlier;
      } else {
        out.pairs.push_back(std::move(p));
      }
    }
  } else {
    out.pairs = std::move(kept);
  }
  return out;
}

Histogram make_histogram(const std::vector<double>& values, int bins) {
  if (bins < 1) throw ContractViolation("make_histogram: bins must be >= 1");
  Histogram h;
  h.counts = Eigen::ArrayXd::Zero(bins);
  if (values.empty()) {
    h.edges = Eigen::ArrayXd::LinSpaced(bins + 1, 0.0, 1.0);
    return h;
  }
  double lo = *std::min_element(values.begin(), values.end());
  double hi = *std::max_element(values.begin(), values.end());
  if (!(hi > lo)) {
    lo -= 0.5;
    hi += 0.5;
  }
  h.edges = Eigen::ArrayXd::LinSpaced(bins + 1, lo, hi);
  const double width = (hi - lo) / bins;
  for (double v : values) {
    auto k = static_cast<Eigen::Index>((v - lo) / width);
    h.counts[std::clamp<Eigen::Index>(k, 0, bins - 1)] += 1;
  }
  return h;
}

AsymmetryStats asymmetry_stats(const std::vector<RatePair>& pairs, int bins) {
  AsymmetryStats out;
  out.values.reserve(pairs.size());
  for (const auto& p : pairs) {
    out.values.push_back(2 * (p.gamma_down - p.gamma_up) / (p.gamma_down + p.gamma_up));
  }
  if (!out.values.empty()) out.median = median_with_ci(out.values, 0.95).median;
  out.histogram = make_histogram(out.values, bins);
  return out;
}

std::vector<RobustnessCell> robustness_map(const std::vector<AbRecord>& records,
                                           const std::vector<double>& cutoffs_us,
                                           const std::vector<double>& sigmas,
                                           const AnalysisConfig& cfg) {
  if (cutoffs_us.empty() || sigmas.empty()) throw ContractViolation("robustness_map: empty grid");
  std::vector<RobustnessCell> cells;
  for (double cut : cutoffs_us) {
    for (double sig : sigmas) {
      AnalysisConfig c = cfg;
      c.t1_cutoff_us = cut;
      c.outlier_sigma = sig;
      RobustnessCell cell;
      cell.t1_cutoff_us = cut;
      cell.outlier_sigma = sig;
      const PairingResult pr = pair_and_normalize(records, c);
      cell.n_pairs = static_cast<int>(pr.pairs.size());
      const auto d = pr.deltas();
      bool nonzero = std::any_of(d.begin(), d.end(), [](double x) { return x != 0; });
      if (cell.n_pairs >= 8 && nonzero) {
        cell.valid = true;
        cell.p_value = wilcoxon_signed_rank(d, Alternative::greater).p_value;
        cell.median_delta = median_with_ci(d, c.ci_level).median;
      }
      cells.push_back(cell);
    }
  }
  return cells;
}

AbReport analyze_ab(const std::vector<AbRecord>& records, const AnalysisConfig& cfg) {
  AbReport out;
  out.pairing = pair_and_normalize(records, cfg);
  const auto d = out.pairing.deltas();
  if (d.empty()) throw DataError("A/B analysis: no pairs survive the cuts");
  out.median = median_with_ci(d, cfg.ci_level);
  out.wilcoxon = wilcoxon_signed_rank(d, Alternative::greater);
  out.asymmetry = asymmetry_stats(out.pairing.pairs, cfg.histogram_bins);
  out.delta_histogram = make_histogram(d, cfg.histogram_bins);
  return out;
}

}  // namespace qprad
