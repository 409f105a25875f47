#pragma once

// Seeded Monte Carlo studies: entropy MSE sweep, Chow-Liu phase transition,
// mutual-information sample complexity, TAN comparisons and learning curves.
//
// Every trial draws from a stream derived from (master seed, grid cell, trial),
// so results are identical however the trials are scheduled.

#include <array>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "infotree/data_io.hpp"
#include "infotree/dataset.hpp"
#include "infotree/estimators.hpp"
#include "infotree/graphical.hpp"
#include "infotree/parallel.hpp"
#include "infotree/rng.hpp"
#include "infotree/tan.hpp"

namespace infotree {

/// `points` integers evenly spaced from lo to hi (inclusive).
inline std::vector<std::size_t> linear_grid(std::size_t lo, std::size_t hi, std::size_t points) {
  if (points == 0 || lo > hi) throw std::invalid_argument("linear_grid: empty grid");
  if (points == 1) return {lo};
  std::vector<std::size_t> g(points);
  for (std::size_t i = 0; i < points; ++i) {
    g[i] = static_cast<std::size_t>(
        std::llround(static_cast<double>(lo) + static_cast<double>(hi - lo) * static_cast<double>(i) /
                                                   static_cast<double>(points - 1)));
  }
  return g;
}

/// `points` integers log-spaced from lo to hi (inclusive).
inline std::vector<std::size_t> geometric_grid(std::size_t lo, std::size_t hi, std::size_t points) {
  if (points == 0 || lo == 0 || lo > hi) throw std::invalid_argument("geometric_grid: empty grid");
  if (points == 1) return {lo};
  std::vector<std::size_t> g(points);
  const double a = std::log(static_cast<double>(lo)), b = std::log(static_cast<double>(hi));
  for (std::size_t i = 0; i < points; ++i) {
    g[i] = static_cast<std::size_t>(
        std::llround(std::exp(a + (b - a) * static_cast<double>(i) / static_cast<double>(points - 1))));
  }
  return g;
}

inline std::uint64_t hash_symbols(std::span<const Symbol> s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (auto v : s) {
    for (int b = 0; b < 4; ++b) {
      h ^= (v >> (8 * b)) & 0xffu;
      h *= 0x100000001b3ULL;
    }
  }
  return h;
}

// --------------------------------------------------------------------------
// Entropy sweep

/// Draws a histogram of n samples over S symbols.
using HistogramSampler = std::function<Histogram(std::size_t alphabet, std::size_t n, SeededGenerator&)>;

inline Histogram sample_uniform_histogram(std::size_t alphabet, std::size_t n, SeededGenerator& gen) {
  std::vector<Count> c(alphabet, 0);
  for (std::size_t i = 0; i < n; ++i) ++c[gen.uniform_below(alphabet)];
  return Histogram(std::move(c));
}

struct EntropySweepSpec {
  std::vector<std::size_t> alphabet_sizes;
  std::size_t mc = 20;
  /// n = ceil(samples_factor * S / ln S)
  double samples_factor = 5.0;
  EstimatorConfig cfg;
  std::uint64_t seed = 1;
  /// Defaults to multinomial sampling from the uniform distribution.
  HistogramSampler sampler;
};

struct EntropySweepRow {
  std::size_t alphabet = 0;
  std::size_t n = 0;
  double mse_mle = 0.0;
  double mse_mm = 0.0;
  double mse_poly = 0.0;
};

inline std::size_t entropy_sweep_samples(std::size_t s, double factor) {
  return static_cast<std::size_t>(std::ceil(factor * static_cast<double>(s) / std::log(static_cast<double>(s))));
}

inline std::vector<EntropySweepRow> run_entropy_sweep(const EntropySweepSpec& spec) {
  if (spec.alphabet_sizes.empty()) throw std::invalid_argument("run_entropy_sweep: empty alphabet grid");
  if (spec.mc < 1) throw std::invalid_argument("run_entropy_sweep: mc must be at least 1");
  for (auto s : spec.alphabet_sizes)
    if (s < 2) throw std::invalid_argument("run_entropy_sweep: alphabet sizes must be at least 2");
  const SeededGenerator master(spec.seed);
  const auto sampler = spec.sampler ? spec.sampler : HistogramSampler(sample_uniform_histogram);
  const auto cells = spec.alphabet_sizes.size();
  std::vector<std::array<double, 3>> sq(cells * spec.mc);
  parallel_for(cells * spec.mc, [&](std::size_t cell) {
    const auto si = cell / spec.mc, trial = cell % spec.mc;
    const auto s = spec.alphabet_sizes[si];
    const auto n = entropy_sweep_samples(s, spec.samples_factor);
    auto gen = derive_stream(derive_stream(master, si, StreamTag::entropy_sweep), trial, StreamTag::sample);
    const auto h = sampler(s, n, gen);
    const double truth = std::log(static_cast<double>(s));
    const double e[3] = {entropy_mle(h), entropy_miller_madow(h), entropy_poly(h, spec.cfg)};
    for (int k = 0; k < 3; ++k) sq[cell][k] = (e[k] - truth) * (e[k] - truth);
  });
  std::vector<EntropySweepRow> rows;
  for (std::size_t si = 0; si < cells; ++si) {
    EntropySweepRow r;
    r.alphabet = spec.alphabet_sizes[si];
    r.n = entropy_sweep_samples(r.alphabet, spec.samples_factor);
    for (std::size_t t = 0; t < spec.mc; ++t) {
      r.mse_mle += sq[si * spec.mc + t][0];
      r.mse_mm += sq[si * spec.mc + t][1];
      r.mse_poly += sq[si * spec.mc + t][2];
    }
    const auto mc = static_cast<double>(spec.mc);
    r.mse_mle /= mc;
    r.mse_mm /= mc;
    r.mse_poly /= mc;
    rows.push_back(r);
  }
  return rows;
}

// --------------------------------------------------------------------------
// Chow-Liu phase transition on random star models

struct TreeSweepSpec {
  std::size_t d = 7;
  std::size_t alphabet = 50;
  std::vector<std::size_t> sizes;
  std::size_t mc = 20;
  /// Draw one model for the whole sweep instead of one per (n, trial).
  bool fix_model = false;
  EstimatorConfig cfg;
  std::uint64_t seed = 1;
};

struct TreeSweepRow {
  std::size_t n = 0;
  double ratio_mle = 0.0;
  double ratio_poly = 0.0;
};

struct TreeTrial {
  std::size_t n = 0;
  std::size_t trial = 0;
  /// Both estimators are run on the sample with this hash.
  std::uint64_t data_hash = 0;
  double ratio_mle = 0.0;
  double ratio_poly = 0.0;
};

struct TreeSweepResult {
  std::vector<TreeSweepRow> rows;
  std::vector<TreeTrial> trials;
};

inline TreeSweepResult run_tree_sweep(const TreeSweepSpec& spec) {
  if (spec.sizes.empty()) throw std::invalid_argument("run_tree_sweep: empty sample-size grid");
  if (spec.mc < 1) throw std::invalid_argument("run_tree_sweep: mc must be at least 1");
  if (spec.d < 3) throw std::invalid_argument("run_tree_sweep: need d >= 3");
  const SeededGenerator master(spec.seed);
  TreeModel fixed;
  if (spec.fix_model) {
    auto g = derive_stream(master, 0, StreamTag::model);
    fixed = random_star_model(spec.d, spec.alphabet, g);
  }
  TreeSweepResult res;
  res.trials.resize(spec.sizes.size() * spec.mc);
  parallel_for(res.trials.size(), [&](std::size_t cell) {
    const auto ni = cell / spec.mc, trial = cell % spec.mc;
    const auto cell_gen = derive_stream(master, ni + 1, StreamTag::tree_sweep);
    TreeModel model;
    if (spec.fix_model) {
      model = fixed;
    } else {
      auto g = derive_stream(cell_gen, trial, StreamTag::model);
      model = random_star_model(spec.d, spec.alphabet, g);
    }
    auto gs = derive_stream(cell_gen, trial, StreamTag::sample);
    const auto x = sample_from_tree(model, spec.sizes[ni], gs);
    TreeTrial& t = res.trials[cell];
    t.n = spec.sizes[ni];
    t.trial = trial;
    t.data_hash = hash_symbols(x.data);
    t.ratio_mle = wrong_edges_ratio(chow_liu(x, EstimatorKind::mle, spec.cfg).structure, model.structure);
    t.ratio_poly = wrong_edges_ratio(chow_liu(x, EstimatorKind::poly, spec.cfg).structure, model.structure);
  });
  for (std::size_t ni = 0; ni < spec.sizes.size(); ++ni) {
    TreeSweepRow r;
    r.n = spec.sizes[ni];
    for (std::size_t t = 0; t < spec.mc; ++t) {
      r.ratio_mle += res.trials[ni * spec.mc + t].ratio_mle;
      r.ratio_poly += res.trials[ni * spec.mc + t].ratio_poly;
    }
    r.ratio_mle /= static_cast<double>(spec.mc);
    r.ratio_poly /= static_cast<double>(spec.mc);
    res.rows.push_back(r);
  }
  return res;
}

/// Smallest grid size whose mean ratio is at or below `level`, if any.
inline std::optional<std::size_t> threshold_sample_size(const std::vector<TreeSweepRow>& rows, bool poly,
                                                        double level = 0.1) {
  for (const auto& r : rows)
    if ((poly ? r.ratio_poly : r.ratio_mle) <= level) return r.n;
  return std::nullopt;
}

// --------------------------------------------------------------------------
// Mutual-information sample complexity

/// S x S joint with uniform marginals: P(i, j) = (1 + coupling * (-1)^(i+j)) / S^2
/// (marginals exactly uniform for even S).
inline std::vector<double> checkerboard_joint(std::size_t s, double coupling) {
  if (!(coupling >= 0.0 && coupling <= 1.0)) throw std::invalid_argument("checkerboard_joint: coupling in [0,1]");
  std::vector<double> p(s * s);
  const double base = 1.0 / static_cast<double>(s * s);
  for (std::size_t i = 0; i < s; ++i)
    for (std::size_t j = 0; j < s; ++j) p[i * s + j] = base * (1.0 + coupling * (((i + j) % 2) ? -1.0 : 1.0));
  return p;
}

struct MiSweepSpec {
  std::vector<std::size_t> alphabet_sizes;
  std::size_t mc = 50;
  double coupling = 0.5;
  EstimatorConfig cfg;
  std::uint64_t seed = 1;
};

struct MiSweepRow {
  std::size_t alphabet = 0;
  std::size_t n = 0;
  double true_mi = 0.0;
  double rmse_mle = 0.0;
  double rmse_poly = 0.0;
  double bias_mle = 0.0;
  double bias_poly = 0.0;
};

/// n = ceil(S^2 / ln S) samples from checkerboard_joint(S) per trial.
inline std::vector<MiSweepRow> run_mi_sweep(const MiSweepSpec& spec) {
  if (spec.alphabet_sizes.empty()) throw std::invalid_argument("run_mi_sweep: empty alphabet grid");
  if (spec.mc < 1) throw std::invalid_argument("run_mi_sweep: mc must be at least 1");
  const SeededGenerator master(spec.seed);
  const auto cells = spec.alphabet_sizes.size();
  std::vector<std::array<double, 2>> err(cells * spec.mc);
  std::vector<double> truth(cells);
  std::vector<std::size_t> samples(cells);
  for (std::size_t si = 0; si < cells; ++si) {
    const auto s = spec.alphabet_sizes[si];
    if (s < 2) throw std::invalid_argument("run_mi_sweep: alphabet sizes must be at least 2");
    truth[si] = mutual_information_of(checkerboard_joint(s, spec.coupling), s, s);
    samples[si] = static_cast<std::size_t>(
        std::ceil(static_cast<double>(s * s) / std::log(static_cast<double>(s))));
  }
  parallel_for(cells * spec.mc, [&](std::size_t cell) {
    const auto si = cell / spec.mc, trial = cell % spec.mc;
    const auto s = spec.alphabet_sizes[si];
    const CategoricalSampler sampler(checkerboard_joint(s, spec.coupling));
    auto gen = derive_stream(derive_stream(master, si, StreamTag::mi_sweep), trial, StreamTag::sample);
    JointHistogram j(s, s);
    for (std::size_t i = 0; i < samples[si]; ++i) {
      const auto k = sampler(gen);
      j.add(k / s, k % s);
    }
    err[cell] = {mutual_information(j, EstimatorKind::mle, spec.cfg) - truth[si],
                 mutual_information(j, EstimatorKind::poly, spec.cfg) - truth[si]};
  });
  std::vector<MiSweepRow> rows;
  for (std::size_t si = 0; si < cells; ++si) {
    MiSweepRow r;
    r.alphabet = spec.alphabet_sizes[si];
    r.n = samples[si];
    r.true_mi = truth[si];
    for (std::size_t t = 0; t < spec.mc; ++t) {
      const auto& e = err[si * spec.mc + t];
      r.rmse_mle += e[0] * e[0];
      r.rmse_poly += e[1] * e[1];
      r.bias_mle += e[0];
      r.bias_poly += e[1];
    }
    const auto mc = static_cast<double>(spec.mc);
    r.rmse_mle = std::sqrt(r.rmse_mle / mc);
    r.rmse_poly = std::sqrt(r.rmse_poly / mc);
    r.bias_mle /= mc;
    r.bias_poly /= mc;
    rows.push_back(r);
  }
  return rows;
}

// --------------------------------------------------------------------------
// TAN comparisons

/// Dataset drawn from a random TAN model; model and sample use separate
/// streams derived from `seed`.
inline LabeledDataset synthetic_tan_dataset(std::size_t d, std::size_t s, std::size_t classes, std::size_t n,
                                            std::uint64_t seed) {
  const SeededGenerator master(seed);
  auto gm = derive_stream(master, 0, StreamTag::model);
  const auto model = random_tan_model(d, s, classes, gm);
  auto gs = derive_stream(master, 0, StreamTag::sample);
  return sample_tan(model, n, gs);
}

struct TanCompareRow {
  std::string dataset;
  double error_mle = 0.0;
  double error_poly = 0.0;
  /// Per-repeat mean errors, index = repeat.
  std::vector<double> repeat_mle;
  std::vector<double> repeat_poly;
  /// Both kinds were evaluated on identical fold partitions.
  bool partitions_match = false;
  std::string status = "ok";
};

inline TanCompareRow compare_tan(const LabeledDataset& data, const std::string& name, const EstimatorConfig& cfg,
                                 std::size_t folds, std::size_t repeats, std::uint64_t seed) {
  TanCompareRow row;
  row.dataset = name;
  const auto a = cross_validate(data, EstimatorKind::mle, cfg, folds, repeats, seed);
  const auto b = cross_validate(data, EstimatorKind::poly, cfg, folds, repeats, seed);
  row.error_mle = a.aggregate;
  row.error_poly = b.aggregate;
  row.partitions_match = a.folds.size() == b.folds.size();
  for (std::size_t i = 0; row.partitions_match && i < a.folds.size(); ++i)
    row.partitions_match = a.folds[i].partition_hash == b.folds[i].partition_hash;
  for (std::size_t r = 0; r < repeats; ++r) {
    row.repeat_mle.push_back(a.repeat_mean(r));
    row.repeat_poly.push_back(b.repeat_mean(r));
  }
  return row;
}

struct TanDatasetEntry {
  std::string path;
  std::string label_col;
  std::size_t quantize_bins = 10;
  std::string cluster_spec;
};

/// Manifest CSV: dataset_path,label_col,quantize_bins,cluster_spec. Relative
/// dataset paths are resolved against the manifest's directory.
inline std::vector<TanDatasetEntry> read_manifest(const std::string& path) {
  const auto t = read_csv_file(path);
  const auto col = [&](const char* name) {
    auto c = t.column(name);
    if (!c) throw std::runtime_error(path + ": manifest lacks column '" + name + "'");
    return *c;
  };
  const auto cp = col("dataset_path"), cl = col("label_col"), cq = col("quantize_bins"), cc = col("cluster_spec");
  const auto base = std::filesystem::path(path).parent_path();
  std::vector<TanDatasetEntry> out;
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const auto& row = t.rows[r];
    TanDatasetEntry e;
    std::filesystem::path p(row[cp]);
    e.path = (p.is_relative() ? base / p : p).string();
    e.label_col = row[cl];
    if (!row[cq].empty()) {
      const auto q = detail::parse_unsigned(row[cq]);
      if (!q || *q == 0) {
        throw std::runtime_error(path + ": line " + std::to_string(t.lines[r]) + ": bad quantize_bins");
      }
      e.quantize_bins = *q;
    }
    e.cluster_spec = row[cc];
    out.push_back(std::move(e));
  }
  return out;
}

inline LabeledDataset load_entry(const TanDatasetEntry& e) {
  LoadOptions opts;
  opts.label_col = e.label_col;
  opts.quantize_bins = e.quantize_bins;
  auto d = load_dataset(e.path, opts);
  if (!e.cluster_spec.empty()) d = cluster_attributes(d, parse_cluster_spec(e.cluster_spec));
  return d;
}

/// Cross-validates both estimator kinds on every dataset with matched folds.
/// A dataset that fails to load or evaluate is reported in `status` and the
/// run continues.
inline std::vector<TanCompareRow> run_tan_compare(const std::vector<TanDatasetEntry>& entries,
                                                  const EstimatorConfig& cfg, std::size_t folds, std::size_t repeats,
                                                  std::uint64_t seed) {
  std::vector<TanCompareRow> rows;
  for (const auto& e : entries) {
    try {
      rows.push_back(compare_tan(load_entry(e), e.path, cfg, folds, repeats, seed));
    } catch (const std::exception& ex) {
      TanCompareRow r;
      r.dataset = e.path;
      r.error_mle = r.error_poly = std::nan("");
      r.status = std::string("error: ") + ex.what();
      rows.push_back(std::move(r));
    }
  }
  return rows;
}

}  // namespace infotree
