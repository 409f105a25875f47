// infotree command-line front end.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "infotree/infotree.hpp"

namespace {

using namespace infotree;

struct EstimatorFlags {
  std::string estimator = "poly";
  EstimatorConfig cfg;

  void attach(CLI::App* app, const std::string& choices) {
    app->add_option("--estimator", estimator, "Entropy estimator (" + choices + ")")->capture_default_str();
    attach_config(app);
  }
  void attach_config(CLI::App* app) {
    app->add_option("--c1", cfg.c1, "Regime threshold constant")->capture_default_str();
    app->add_option("--c2", cfg.c2, "Polynomial degree constant")->capture_default_str();
    app->add_option("--slack", cfg.interval_slack, "Approximation interval slack")->capture_default_str();
    app->add_option("--degree-cap", cfg.max_degree_cap, "Upper bound on the polynomial degree")
        ->capture_default_str();
    app->add_flag("--clamp-entropy", cfg.clamp_entropy, "Clip entropy estimates to [0, ln S]");
    app->add_flag("--clamp-mi", cfg.clamp_mi_nonnegative, "Clip mutual information estimates below at 0");
  }
  EstimatorKind kind() const { return parse_estimator(estimator); }
  std::string describe() const {
    std::ostringstream s;
    s << "c1=" << format_real(cfg.c1) << " c2=" << format_real(cfg.c2) << " slack=" << format_real(cfg.interval_slack)
      << " degree_cap=" << cfg.max_degree_cap << " clamp_entropy=" << cfg.clamp_entropy
      << " clamp_mi=" << cfg.clamp_mi_nonnegative;
    return s.str();
  }
};

std::vector<std::string> header(const std::string& command, const std::string& params, std::uint64_t seed) {
  return {std::string("infotree ") + kVersion + " " + command, params, "seed=" + std::to_string(seed)};
}

template <class T>
std::string join(const std::vector<T>& v) {
  std::ostringstream s;
  for (std::size_t i = 0; i < v.size(); ++i) s << (i ? "," : "") << v[i];
  return s.str();
}

std::vector<EstimatorKind> parse_kinds(const std::vector<std::string>& names) {
  std::vector<EstimatorKind> out;
  for (const auto& n : names) out.push_back(parse_estimator(n));
  return out;
}

void print_number(double v) {
  std::printf("%.12g\n", v);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Entropy and mutual-information estimation for tree-structured models"};
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1);

  std::uint64_t seed = 1;
  std::string out = "-";
  try {
    seed = default_seed(1);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  const auto add_seed = [&](CLI::App* c) {
    c->add_option("--seed", seed, "Master seed (default: INFOTREE_SEED or 1)")->capture_default_str();
  };
  const auto add_out = [&](CLI::App* c) {
    c->add_option("--out", out, "Output CSV path, '-' for standard output")->capture_default_str();
  };

  // approx
  int degree = 16;
  std::string method = "remez";
  auto* approx = app.add_subcommand("approx", "Best polynomial approximation of -x ln x on [0,1]");
  approx->add_option("--degree", degree, "Polynomial degree")->required()->check(CLI::Range(0, 40));
  approx->add_option("--method", method, "remez or cheb")->capture_default_str();
  add_out(approx);

  // entropy / mi
  EstimatorFlags est;
  std::string counts_path;
  std::optional<std::size_t> alphabet, rows_alphabet, cols_alphabet;
  bool split = false;
  auto* entropy_cmd = app.add_subcommand("entropy", "Estimate entropy (nats) from a symbol,count file");
  entropy_cmd->add_option("--counts", counts_path, "CSV of symbol,count rows")->required()->check(CLI::ExistingFile);
  entropy_cmd->add_option("--alphabet", alphabet, "Alphabet size override");
  entropy_cmd->add_flag("--split", split, "Classify regimes on one half of the sample and estimate on the other");
  add_seed(entropy_cmd);
  est.attach(entropy_cmd, "mle|mm|poly");

  auto* mi_cmd = app.add_subcommand("mi", "Estimate mutual information (nats) from a row,col,count file");
  mi_cmd->add_option("--joint", counts_path, "CSV of row,col,count rows")->required()->check(CLI::ExistingFile);
  mi_cmd->add_option("--rows", rows_alphabet, "Row alphabet size override");
  mi_cmd->add_option("--cols", cols_alphabet, "Column alphabet size override");
  est.attach(mi_cmd, "mle|mm|poly");

  // sim-entropy
  std::vector<std::size_t> s_list;
  std::size_t mc = 20;
  bool full_scale = false;
  auto* sim_entropy = app.add_subcommand("sim-entropy", "Entropy MSE sweep on uniform sources, n = ceil(5S/ln S)");
  sim_entropy->add_option("--alphabets", s_list, "Alphabet sizes (default 100,1000,10000)")->delimiter(',');
  sim_entropy->add_option("--mc", mc, "Trials per alphabet size")->capture_default_str()->check(CLI::PositiveNumber);
  sim_entropy->add_flag("--full-scale", full_scale, "Sweep S = 10^2 .. 10^6");
  add_seed(sim_entropy);
  add_out(sim_entropy);
  est.attach_config(sim_entropy);

  // sim-tree
  TreeSweepSpec tree;
  std::size_t n_min = 400, n_max = 4000, n_points = 12;
  std::string grid = "geometric";
  std::string trials_out;
  auto* sim_tree = app.add_subcommand("sim-tree", "Chow-Liu wrong-edges ratio versus sample size on random stars");
  sim_tree->add_option("--d", tree.d, "Number of variables")->capture_default_str();
  sim_tree->add_option("--alphabet", tree.alphabet, "Alphabet size per variable")->capture_default_str();
  sim_tree->add_option("--n-min", n_min, "Smallest sample size")->capture_default_str();
  sim_tree->add_option("--n-max", n_max, "Largest sample size")->capture_default_str();
  sim_tree->add_option("--n-points", n_points, "Grid points")->capture_default_str();
  sim_tree->add_option("--grid", grid, "geometric or linear")->capture_default_str();
  sim_tree->add_option("--mc", tree.mc, "Trials per sample size")->capture_default_str();
  sim_tree->add_flag("--fix-model", tree.fix_model, "Use one model for the whole sweep");
  sim_tree->add_flag("--full-scale", full_scale, "S=200 on a linear grid of 26 sizes from 1000 to 26000");
  sim_tree->add_option("--trials-out", trials_out, "Optional per-trial CSV with data hashes");
  add_seed(sim_tree);
  add_out(sim_tree);
  est.attach_config(sim_tree);

  // sim-mi
  MiSweepSpec mis;
  auto* sim_mi = app.add_subcommand("sim-mi", "Mutual-information RMSE at n = ceil(S^2/ln S)");
  sim_mi->add_option("--alphabets", s_list, "Alphabet sizes (default 50,100,200)")->delimiter(',');
  sim_mi->add_option("--mc", mis.mc, "Trials per alphabet size")->capture_default_str();
  sim_mi->add_option("--coupling", mis.coupling, "Checkerboard coupling in [0,1]")->capture_default_str();
  add_seed(sim_mi);
  add_out(sim_mi);
  est.attach_config(sim_mi);

  // chowliu
  std::string data_path;
  auto* chowliu_cmd = app.add_subcommand("chowliu", "Learn a Chow-Liu tree from a symbol matrix CSV");
  chowliu_cmd->add_option("--data", data_path, "CSV with one column per variable")->required()->check(CLI::ExistingFile);
  add_out(chowliu_cmd);
  est.attach(chowliu_cmd, "mle|mm|poly");

  // tan-cv / tan-curve
  LoadOptions load;
  std::string cluster;
  std::size_t folds = 5, repeats = 10;
  auto add_load = [&](CLI::App* c) {
    c->add_option("--data", data_path, "Dataset CSV with header")->required()->check(CLI::ExistingFile);
    c->add_option("--label-col", load.label_col, "Class column (default: last)");
    c->add_option("--quantize-bins", load.quantize_bins, "Bins for numeric columns")->capture_default_str();
    c->add_flag("--integer-symbols", load.integer_symbols, "Use integer columns as symbols without quantizing");
    c->add_option("--cluster", cluster, "Attribute groups, e.g. \"0,1|2,3,4\"");
  };
  auto* tan_cv = app.add_subcommand("tan-cv", "Repeated k-fold cross-validation of a TAN classifier");
  add_load(tan_cv);
  tan_cv->add_option("--folds", folds, "Folds")->capture_default_str();
  tan_cv->add_option("--repeats", repeats, "Repeats")->capture_default_str();
  add_seed(tan_cv);
  add_out(tan_cv);
  est.attach(tan_cv, "mle|mm|poly");

  std::vector<std::size_t> sizes;
  std::vector<std::string> kinds = {"mle", "poly"};
  auto* tan_curve = app.add_subcommand("tan-curve", "TAN learning curve over subset sizes");
  add_load(tan_curve);
  tan_curve->add_option("--sizes", sizes, "Subset sizes")->required()->delimiter(',');
  tan_curve->add_option("--estimators", kinds, "Estimators to compare")->delimiter(',')->capture_default_str();
  tan_curve->add_option("--mc", mc, "Random subsets per size")->capture_default_str();
  add_seed(tan_curve);
  add_out(tan_curve);
  est.attach_config(tan_curve);

  // tan-compare
  std::string manifest;
  auto* tan_compare = app.add_subcommand("tan-compare", "Cross-validated TAN error, mle versus poly, per dataset");
  tan_compare->add_option("--manifest", manifest, "CSV: dataset_path,label_col,quantize_bins,cluster_spec")
      ->required()
      ->check(CLI::ExistingFile);
  tan_compare->add_option("--folds", folds, "Folds")->capture_default_str();
  tan_compare->add_option("--repeats", repeats, "Repeats")->capture_default_str();
  add_seed(tan_compare);
  add_out(tan_compare);
  est.attach_config(tan_compare);

  // generators
  std::size_t gen_d = 6, gen_s = 40, gen_classes = 4, gen_n = 3000;
  auto* gen_tan = app.add_subcommand("gen-tan", "Sample a labeled dataset from a random TAN model");
  gen_tan->add_option("--d", gen_d, "Attributes")->capture_default_str();
  gen_tan->add_option("--alphabet", gen_s, "Alphabet size per attribute")->capture_default_str();
  gen_tan->add_option("--classes", gen_classes, "Classes")->capture_default_str();
  gen_tan->add_option("--n", gen_n, "Rows")->capture_default_str();
  add_seed(gen_tan);
  add_out(gen_tan);

  auto* gen_star = app.add_subcommand("gen-star", "Sample a symbol matrix from a random star model");
  gen_star->add_option("--d", gen_d, "Variables")->capture_default_str();
  gen_star->add_option("--alphabet", gen_s, "Alphabet size per variable")->capture_default_str();
  gen_star->add_option("--n", gen_n, "Rows")->capture_default_str();
  add_seed(gen_star);
  add_out(gen_star);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    est.cfg.validate();

    if (approx->parsed()) {
      const auto m = parse_approx_method(method);
      const auto p = best_entropy_poly(degree, m);
      std::vector<CsvRow> rows;
      for (std::size_t k = 0; k < p.coeffs.size(); ++k) rows.push_back({std::uint64_t{k}, p.coeffs[k]});
      std::ostringstream buf;
      write_csv(buf, {"k", "coeff"}, rows);
      buf << "# sup_error=" << format_real(p.sup_error) << '\n';
      if (out == "-") {
        std::cout << buf.str();
      } else {
        std::ofstream f(out, std::ios::binary | std::ios::trunc);
        if (!f || !(f << buf.str())) throw std::runtime_error("cannot write '" + out + "'");
      }
      return 0;
    }

    if (entropy_cmd->parsed()) {
      const auto h = read_counts(counts_path, alphabet);
      if (split) {
        if (est.kind() != EstimatorKind::poly) throw std::invalid_argument("--split applies to the poly estimator");
        auto g = derive_stream(SeededGenerator(seed), 0, StreamTag::generic);
        print_number(entropy_poly_split(h, est.cfg, g));
      } else {
        print_number(entropy(h, est.kind(), est.cfg));
      }
      return 0;
    }

    if (mi_cmd->parsed()) {
      print_number(mutual_information(read_joint_counts(counts_path, rows_alphabet, cols_alphabet), est.kind(), est.cfg));
      return 0;
    }

    if (sim_entropy->parsed()) {
      EntropySweepSpec spec;
      spec.alphabet_sizes = !s_list.empty()    ? s_list
                            : full_scale ? std::vector<std::size_t>{100, 1000, 10000, 100000, 1000000}
                                          : std::vector<std::size_t>{100, 1000, 10000};
      spec.mc = mc;
      spec.cfg = est.cfg;
      spec.seed = seed;
      std::vector<CsvRow> rows;
      for (const auto& r : run_entropy_sweep(spec))
        rows.push_back({std::uint64_t{r.alphabet}, std::uint64_t{r.n}, r.mse_mle, r.mse_mm, r.mse_poly});
      emit_csv(rows, {"S", "n", "mse_mle", "mse_mm", "mse_poly"}, out,
               header("sim-entropy", "alphabets=" + join(spec.alphabet_sizes) + " mc=" + std::to_string(mc) + " " +
                                         est.describe(),
                      seed));
      return 0;
    }

    if (sim_tree->parsed()) {
      if (full_scale) {
        tree.alphabet = 200;
        n_min = 1000;
        n_max = 26000;
        n_points = 26;
        grid = "linear";
      }
      if (grid == "linear") {
        tree.sizes = linear_grid(n_min, n_max, n_points);
      } else if (grid == "geometric") {
        tree.sizes = geometric_grid(n_min, n_max, n_points);
      } else {
        throw std::invalid_argument("--grid must be geometric or linear");
      }
      tree.cfg = est.cfg;
      tree.seed = seed;
      const auto res = run_tree_sweep(tree);
      const auto meta = header("sim-tree",
                               "d=" + std::to_string(tree.d) + " alphabet=" + std::to_string(tree.alphabet) +
                                   " sizes=" + join(tree.sizes) + " mc=" + std::to_string(tree.mc) +
                                   " fix_model=" + std::to_string(tree.fix_model) + " truth=star " + est.describe(),
                               seed);
      std::vector<CsvRow> rows;
      for (const auto& r : res.rows) rows.push_back({std::uint64_t{r.n}, r.ratio_mle, r.ratio_poly});
      emit_csv(rows, {"n", "ratio_mle_mean", "ratio_poly_mean"}, out, meta);
      if (!trials_out.empty()) {
        std::vector<CsvRow> trows;
        for (const auto& t : res.trials) {
          char hash[19];
          std::snprintf(hash, sizeof hash, "%016llx", static_cast<unsigned long long>(t.data_hash));
          trows.push_back({std::uint64_t{t.n}, std::uint64_t{t.trial}, std::string(hash), t.ratio_mle, t.ratio_poly});
        }
        emit_csv(trows, {"n", "trial", "data_hash", "ratio_mle", "ratio_poly"}, trials_out, meta);
      }
      return 0;
    }

    if (sim_mi->parsed()) {
      mis.alphabet_sizes = s_list.empty() ? std::vector<std::size_t>{50, 100, 200} : s_list;
      mis.cfg = est.cfg;
      mis.seed = seed;
      std::vector<CsvRow> rows;
      for (const auto& r : run_mi_sweep(mis))
        rows.push_back({std::uint64_t{r.alphabet}, std::uint64_t{r.n}, r.true_mi, r.rmse_mle, r.rmse_poly, r.bias_mle,
                        r.bias_poly});
      emit_csv(rows, {"S", "n", "true_mi", "rmse_mle", "rmse_poly", "bias_mle", "bias_poly"}, out,
               header("sim-mi",
                      "alphabets=" + join(mis.alphabet_sizes) + " mc=" + std::to_string(mis.mc) +
                          " coupling=" + format_real(mis.coupling) + " " + est.describe(),
                      seed));
      return 0;
    }

    if (chowliu_cmd->parsed()) {
      LoadOptions lo;
      lo.integer_symbols = true;
      const auto x = load_symbol_matrix(data_path, lo);
      const auto w = pairwise_mi_weights(x, est.kind(), est.cfg);
      const auto t = mwst(w);
      std::vector<CsvRow> rows;
      for (auto [u, v] : t.edges()) rows.push_back({std::uint64_t{u}, std::uint64_t{v}, w(u, v)});
      emit_csv(rows, {"u", "v", "weight"}, out,
               {std::string("infotree ") + kVersion + " chowliu", "estimator=" + est.estimator + " " + est.describe()});
      return 0;
    }

    const auto load_data = [&] {
      auto d = load_dataset(data_path, load);
      if (!cluster.empty()) d = cluster_attributes(d, parse_cluster_spec(cluster));
      return d;
    };
    const auto load_params = [&] {
      return "label_col=" + (load.label_col.empty() ? std::string("<last>") : load.label_col) +
             " quantize_bins=" + std::to_string(load.quantize_bins) +
             " integer_symbols=" + std::to_string(load.integer_symbols) + " cluster=" + cluster;
    };

    if (tan_cv->parsed()) {
      const auto rep = cross_validate(load_data(), est.kind(), est.cfg, folds, repeats, seed);
      std::vector<CsvRow> rows;
      for (const auto& f : rep.folds)
        rows.push_back({std::uint64_t{f.repeat}, std::uint64_t{f.fold}, est.estimator, f.error});
      emit_csv(rows, {"repeat", "fold", "estimator", "error"}, out,
               header("tan-cv",
                      "folds=" + std::to_string(folds) + " repeats=" + std::to_string(repeats) + " " + load_params() +
                          " " + est.describe(),
                      seed));
      return 0;
    }

    if (tan_curve->parsed()) {
      const auto ks = parse_kinds(kinds);
      std::vector<CsvRow> rows;
      for (const auto& p : learning_curve(load_data(), ks, est.cfg, sizes, mc, seed))
        rows.push_back({std::uint64_t{p.size}, std::string(to_string(p.kind)), p.mean_error});
      emit_csv(rows, {"size", "estimator", "mean_error"}, out,
               header("tan-curve",
                      "sizes=" + join(sizes) + " estimators=" + join(kinds) + " mc=" + std::to_string(mc) + " " +
                          load_params() + " " + est.describe(),
                      seed));
      return 0;
    }

    if (tan_compare->parsed()) {
      const auto rows_in = run_tan_compare(read_manifest(manifest), est.cfg, folds, repeats, seed);
      std::vector<CsvRow> rows;
      int failures = 0;
      for (const auto& r : rows_in) {
        if (r.status != "ok") {
          ++failures;
          std::cerr << "warning: " << r.dataset << ": " << r.status << '\n';
        } else if (!r.partitions_match) {
          throw std::runtime_error(r.dataset + ": fold partitions differ between estimators");
        }
        rows.push_back({r.dataset, r.error_mle, r.error_poly, r.status});
      }
      emit_csv(rows, {"dataset", "error_mle", "error_poly", "status"}, out,
               header("tan-compare",
                      "folds=" + std::to_string(folds) + " repeats=" + std::to_string(repeats) + " " + est.describe(),
                      seed));
      return failures == 0 ? 0 : 3;
    }

    if (gen_tan->parsed()) {
      write_dataset_csv(synthetic_tan_dataset(gen_d, gen_s, gen_classes, gen_n, seed), out,
                        header("gen-tan",
                               "d=" + std::to_string(gen_d) + " alphabet=" + std::to_string(gen_s) +
                                   " classes=" + std::to_string(gen_classes) + " n=" + std::to_string(gen_n),
                               seed));
      return 0;
    }

    if (gen_star->parsed()) {
      const SeededGenerator master(seed);
      auto gm = derive_stream(master, 0, StreamTag::model);
      const auto model = random_star_model(gen_d, gen_s, gm);
      auto gs = derive_stream(master, 0, StreamTag::sample);
      write_symbol_matrix_csv(sample_from_tree(model, gen_n, gs), out,
                              header("gen-star",
                                     "d=" + std::to_string(gen_d) + " alphabet=" + std::to_string(gen_s) +
                                         " n=" + std::to_string(gen_n),
                                     seed));
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
