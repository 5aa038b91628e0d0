// Command-line front end: train, predict, evaluate, plot, synth, gridsearch.
//
// Exit codes: 0 success, 1 usage error, 2 data/IO error, 3 convergence
// failure.

#include <chrono>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <geokern/geokern.hpp>

namespace gk = geokern;

namespace {

struct GlobalOptions {
  std::uint64_t seed = 42;
  unsigned threads = gk::default_thread_count();
  double earth_radius_km = gk::kEarthRadiusKm;
};

struct KernelOptions {
  int n_min = 3;
  int n_max = 5;
  bool no_normalize = false;

  gk::KernelConfig config() const {
    gk::KernelConfig c{n_min, n_max, !no_normalize};
    c.validate();
    return c;
  }
};

struct SvrOptions {
  double c = 10.0;
  double nu = 0.5;
  double tol = 1e-3;
  std::size_t max_iter = 0;

  gk::NuSvrParams params() const {
    gk::NuSvrParams p{c, nu, tol, max_iter};
    p.validate();
    return p;
  }
};

struct GbtOptions {
  std::size_t rounds = 1000;
  int depth = 3;
  double learning_rate = 1e-2;
  double colsample = 1.0;
  std::size_t min_leaf = 5;

  gk::GbtParams params(std::uint64_t seed) const {
    gk::GbtParams p;
    p.n_rounds = rounds;
    p.max_depth = depth;
    p.learning_rate = learning_rate;
    p.colsample = colsample;
    p.min_samples_leaf = min_leaf;
    p.seed = seed;
    p.validate();
    return p;
  }
};

void add_kernel_options(CLI::App* cmd, KernelOptions& k) {
  cmd->add_option("--n-min", k.n_min, "Smallest n-gram length");
  cmd->add_option("--n-max", k.n_max, "Largest n-gram length");
  cmd->add_flag("--no-normalize", k.no_normalize,
                "Skip kernel normalization to unit self-similarity");
}

void add_svr_options(CLI::App* cmd, SvrOptions& s) {
  cmd->add_option("--c", s.c, "Regularization parameter C");
  cmd->add_option("--nu", s.nu, "Support-vector fraction nu, in (0,1]");
  cmd->add_option("--tol", s.tol, "KKT stopping tolerance");
  cmd->add_option("--max-iter", s.max_iter,
                  "Solver iteration cap (0 = 100 * training size)");
}

gk::CityList load_cities(const std::string& path) {
  if (path.empty()) return gk::default_swiss_cities();
  return gk::parse_city_list(gk::read_file(path));
}

std::string checksum_hex(std::string_view bytes) {
  static const char* hex = "0123456789abcdef";
  std::uint64_t h = gk::fnv1a64(bytes);
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[static_cast<std::size_t>(i)] = hex[h & 0xF];
    h >>= 4;
  }
  return out;
}

// ---------------------------------------------------------------------------

int cmd_train(const GlobalOptions& global, const std::string& train_path,
              const std::string& out_path, const KernelOptions& kopt,
              const SvrOptions& sopt, bool ensemble, std::size_t folds,
              bool embed_texts, const GbtOptions& gopt) {
  const auto t0 = std::chrono::steady_clock::now();
  const std::string raw = gk::read_file(train_path);
  const gk::Corpus corpus = gk::parse_corpus(raw, true);

  gk::ModelBundle bundle;
  bundle.kernel = kopt.config();
  const gk::NuSvrParams svr_params = sopt.params();

  const std::vector<std::string> texts = gk::texts_of(corpus);
  bundle.train_profiles = gk::profile_all(texts, bundle.kernel, global.threads);
  const gk::KernelMatrix K = gk::gram_matrix(bundle.train_profiles, global.threads);
  bundle.regressor =
      gk::train_dual(K, gk::locations_of(corpus), svr_params, global.threads);

  if (ensemble) {
    auto base = gk::default_base_models(svr_params, global.threads);
    bundle.ensemble =
        gk::fit_stack(std::move(base), corpus, folds, gopt.params(global.seed));
  }
  if (embed_texts) bundle.train_texts = texts;

  bundle.provenance.seed = global.seed;
  bundle.provenance.corpus_checksum = checksum_hex(raw);
  bundle.provenance.train_samples = corpus.size();
  gk::save_bundle(bundle, out_path);

  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  std::cout << "trained on " << corpus.size() << " samples\n"
            << "support vectors: lat "
            << bundle.regressor.lat_model.support_indices.size() << ", lon "
            << bundle.regressor.lon_model.support_indices.size() << "\n";
  if (bundle.ensemble)
    std::cout << "ensemble: " << bundle.ensemble->base_models.size()
              << " base models, " << folds << " folds\n";
  std::cout << "bundle written to " << out_path << "\n"
            << "wall time: " << gk::format_fixed(secs, 2) << " s\n";
  return 0;
}

int cmd_predict(const GlobalOptions& global, const std::string& bundle_path,
                const std::string& test_path, const std::string& out_path,
                bool labeled_input) {
  const gk::ModelBundle bundle = gk::load_bundle(bundle_path, global.threads);
  const gk::Corpus test = gk::load_corpus(test_path, labeled_input);
  const std::vector<gk::GeoPoint> pred =
      gk::predict_with_bundle(bundle, gk::texts_of(test), global.threads);
  gk::write_file(out_path, gk::serialize_points(pred));
  std::cout << "wrote " << pred.size() << " predictions to " << out_path << "\n";
  return 0;
}

int cmd_evaluate(const GlobalOptions& global, const std::string& pred_path,
                 const std::string& gold_path, const std::string& cities_path) {
  const std::vector<gk::GeoPoint> pred = gk::parse_points(gk::read_file(pred_path));
  const std::vector<gk::GeoPoint> gold = gk::load_gold_points(gold_path);
  const gk::CityList cities = load_cities(cities_path);
  const gk::MetricsReport report =
      gk::evaluate_all(pred, gold, cities, global.earth_radius_km);
  std::cout << gk::format_metrics_table(report) << "\n"
            << gk::format_metrics_record(report) << "\n";
  return 0;
}

int cmd_plot(const GlobalOptions& global, const std::string& pred_path,
             const std::string& gold_path, const std::string& out_path,
             std::size_t n_points) {
  const std::vector<gk::GeoPoint> pred = gk::parse_points(gk::read_file(pred_path));
  const std::vector<gk::GeoPoint> gold = gk::load_gold_points(gold_path);
  if (pred.size() != gold.size())
    throw gk::DataError("length mismatch: " + std::to_string(pred.size()) +
                        " predictions vs " + std::to_string(gold.size()) +
                        " gold points");
  if (n_points > pred.size()) {
    std::cerr << "warning: only " << pred.size() << " pairs available; clamping "
              << n_points << " requested points\n";
    n_points = pred.size();
  }
  gk::write_file(out_path,
                 gk::render_scatter_svg(pred, gold, n_points, global.seed));
  std::cout << "wrote " << out_path << " with " << n_points << " pairs\n";
  return 0;
}

std::vector<std::vector<std::string>> parse_markers_file(const std::string& path,
                                                         const gk::CityList& cities) {
  const std::string contents = gk::read_file(path);
  std::vector<std::vector<std::string>> vocabs(cities.size());
  std::vector<bool> seen(cities.size(), false);
  gk::detail::for_each_line(contents, [&](std::string_view line, std::size_t line_no) {
    if (gk::detail::blank(line)) return;
    const std::size_t tab = line.find('\t');
    if (tab == std::string_view::npos)
      gk::detail::line_error(line_no, "expected `city TAB tokens...`");
    const std::string name(line.substr(0, tab));
    std::size_t city = cities.size();
    for (std::size_t i = 0; i < cities.size(); ++i)
      if (cities[i].name == name) city = i;
    if (city == cities.size())
      gk::detail::line_error(line_no, "unknown city '" + name + "'");
    seen[city] = true;
    std::string_view rest = line.substr(tab + 1);
    while (!rest.empty()) {
      const std::size_t sp = rest.find_first_of(" \t");
      const std::string_view tok = rest.substr(0, sp);
      if (!tok.empty()) vocabs[city].emplace_back(tok);
      if (sp == std::string_view::npos) break;
      rest = rest.substr(sp + 1);
    }
  });
  for (std::size_t i = 0; i < cities.size(); ++i)
    if (!seen[i])
      throw gk::DataError("markers file: no tokens for city '" + cities[i].name + "'");
  return vocabs;
}

int cmd_synth(const GlobalOptions& global, const std::string& out_train,
              const std::string& out_dev, const std::string& out_test,
              const std::string& cities_path, const std::string& markers_path,
              std::size_t per_city, double noise_std, std::size_t markers,
              std::size_t len_min, std::size_t len_max, double marker_fraction,
              const std::vector<double>& fractions) {
  gk::SyntheticSpec spec;
  spec.cities = load_cities(cities_path);
  if (!markers_path.empty())
    spec.marker_vocabs = parse_markers_file(markers_path, spec.cities);
  spec.tokens_per_city = markers;
  spec.samples_per_city = per_city;
  spec.noise_std_deg = noise_std;
  spec.min_tokens = len_min;
  spec.max_tokens = len_max;
  spec.marker_fraction = marker_fraction;
  spec.seed = global.seed;

  const gk::Corpus corpus = gk::generate_synthetic(spec);
  if (fractions.size() != 3)
    throw gk::DataError("synth: --split needs exactly 3 fractions");
  const auto parts = gk::split(corpus, fractions, global.seed);
  gk::write_file(out_train, gk::serialize_corpus(parts[0]));
  gk::write_file(out_dev, gk::serialize_corpus(parts[1]));
  gk::write_file(out_test, gk::serialize_corpus(parts[2]));
  std::cout << "wrote " << parts[0].size() << " train / " << parts[1].size()
            << " dev / " << parts[2].size() << " test samples\n";
  return 0;
}

int cmd_gridsearch(const GlobalOptions& global, const std::string& train_path,
                   const std::string& dev_path, const KernelOptions& kopt,
                   std::vector<double> c_grid, std::vector<double> nu_grid,
                   double tol, std::size_t max_iter) {
  if (c_grid.empty() || nu_grid.empty())
    throw gk::DataError("gridsearch: empty parameter grid");
  const gk::Corpus train_corpus = gk::load_corpus(train_path, true);
  const gk::Corpus dev_corpus = gk::load_corpus(dev_path, true);

  const gk::KernelConfig kernel = kopt.config();
  const auto train_profiles =
      gk::profile_all(gk::texts_of(train_corpus), kernel, global.threads);
  const auto dev_profiles =
      gk::profile_all(gk::texts_of(dev_corpus), kernel, global.threads);
  const gk::KernelMatrix K = gk::gram_matrix(train_profiles, global.threads);
  const gk::KernelMatrix K_dev =
      gk::gram_matrix(dev_profiles, train_profiles, global.threads);
  const auto train_locs = gk::locations_of(train_corpus);
  const auto dev_locs = gk::locations_of(dev_corpus);

  double best_mae = std::numeric_limits<double>::infinity();
  double best_c = 0.0, best_nu = 0.0;
  for (double c : c_grid) {
    for (double nu : nu_grid) {
      gk::NuSvrParams params{c, nu, tol, max_iter};
      params.validate();
      const gk::DualRegressor reg =
          gk::train_dual(K, train_locs, params, global.threads);
      const auto pred = gk::predict_dual(reg, K_dev);
      const double mae = gk::degree_errors(pred, dev_locs).mae;
      std::cout << "C=" << gk::format_shortest(c) << " nu=" << gk::format_shortest(nu)
                << " dev_mae=" << gk::format_fixed(mae, 6) << "\n";
      if (mae < best_mae) {
        best_mae = mae;
        best_c = c;
        best_nu = nu;
      }
    }
  }
  std::cout << "best C=" << gk::format_shortest(best_c)
            << " nu=" << gk::format_shortest(best_nu)
            << " dev_mae=" << gk::format_fixed(best_mae, 6) << "\n";
  return 0;
}

std::vector<double> default_c_grid() {
  std::vector<double> grid;
  for (int e = -4; e <= 4; ++e) grid.push_back(std::pow(10.0, e));
  return grid;
}

std::vector<double> default_nu_grid() {
  std::vector<double> grid;
  for (int i = 1; i <= 10; ++i) grid.push_back(static_cast<double>(i) / 10.0);
  return grid;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Text geolocation with blended presence-bits string kernels"};
  app.require_subcommand(1);

  GlobalOptions global;
  app.add_option("--seed", global.seed, "Seed for every random choice")
      ->capture_default_str();
  app.add_option("--threads", global.threads, "Worker threads (results are identical)")
      ->capture_default_str();
  app.add_option("--earth-radius-km", global.earth_radius_km,
                 "Sphere radius for kilometer metrics")
      ->capture_default_str();

  // train
  auto* train = app.add_subcommand("train", "Fit a model and write a bundle");
  std::string train_file, bundle_out;
  KernelOptions train_kernel;
  SvrOptions train_svr;
  GbtOptions train_gbt;
  bool ensemble = false, embed_texts = false;
  std::size_t folds = 5;
  train->add_option("train_file", train_file, "Labeled corpus")->required();
  train->add_option("-o,--out", bundle_out, "Bundle output path")->required();
  add_kernel_options(train, train_kernel);
  add_svr_options(train, train_svr);
  train->add_flag("--ensemble", ensemble, "Also fit the stacked ensemble");
  train->add_option("--folds", folds, "Out-of-fold count for stacking");
  train->add_flag("--embed-texts", embed_texts, "Embed raw training texts in the bundle");
  train->add_option("--gbt-rounds", train_gbt.rounds, "Meta-learner boosting rounds");
  train->add_option("--gbt-depth", train_gbt.depth, "Meta-learner tree depth");
  train->add_option("--gbt-lr", train_gbt.learning_rate, "Meta-learner shrinkage");
  train->add_option("--gbt-colsample", train_gbt.colsample, "Meta-learner column subsample");
  train->add_option("--gbt-min-leaf", train_gbt.min_leaf, "Meta-learner min rows per leaf");

  // predict
  auto* predict = app.add_subcommand("predict", "Predict coordinates for texts");
  std::string predict_bundle, predict_file, predict_out;
  bool labeled_input = false;
  predict->add_option("bundle", predict_bundle, "Model bundle")->required();
  predict->add_option("test_file", predict_file, "Unlabeled corpus")->required();
  predict->add_option("-o,--out", predict_out, "Prediction output path")->required();
  predict->add_flag("--labeled-input", labeled_input,
                    "Input is a labeled corpus; use its text column");

  // evaluate
  auto* evaluate = app.add_subcommand("evaluate", "Score predictions against gold");
  std::string eval_pred, eval_gold, cities_path;
  evaluate->add_option("predictions", eval_pred, "Prediction file")->required();
  evaluate->add_option("gold", eval_gold, "Gold file (points or labeled corpus)")
      ->required();
  evaluate->add_option("--cities", cities_path, "City reference file (name TAB lat TAB lon)");

  // plot
  auto* plot = app.add_subcommand("plot", "Render an SVG error scatter");
  std::string plot_pred, plot_gold, plot_out;
  std::size_t plot_points = 100;
  plot->add_option("predictions", plot_pred, "Prediction file")->required();
  plot->add_option("gold", plot_gold, "Gold file (points or labeled corpus)")->required();
  plot->add_option("-o,--out", plot_out, "SVG output path")->required();
  plot->add_option("--points", plot_points, "Pairs to draw")->capture_default_str();

  // synth
  auto* synth = app.add_subcommand("synth", "Generate a synthetic labeled corpus");
  std::string synth_train, synth_dev, synth_test, synth_cities, synth_markers_file;
  std::size_t per_city = 250, markers = 20, len_min = 6, len_max = 12;
  double noise_std = 0.05, marker_fraction = 0.8;
  std::vector<double> synth_split{0.8, 0.1, 0.1};
  synth->add_option("--out-train", synth_train, "Train output path")->required();
  synth->add_option("--out-dev", synth_dev, "Dev output path")->required();
  synth->add_option("--out-test", synth_test, "Test output path")->required();
  synth->add_option("--cities", synth_cities, "City centers file");
  synth->add_option("--markers-file", synth_markers_file,
                    "Explicit marker vocabularies (city TAB tokens...)");
  synth->add_option("--per-city", per_city, "Samples per city")->capture_default_str();
  synth->add_option("--noise-std", noise_std, "Coordinate noise std, degrees")
      ->capture_default_str();
  synth->add_option("--markers", markers, "Generated marker tokens per city")
      ->capture_default_str();
  synth->add_option("--len-min", len_min, "Minimum tokens per text")->capture_default_str();
  synth->add_option("--len-max", len_max, "Maximum tokens per text")->capture_default_str();
  synth->add_option("--marker-fraction", marker_fraction,
                    "Chance a token comes from the city vocabulary")
      ->capture_default_str();
  synth->add_option("--split", synth_split, "Train/dev/test fractions")
      ->delimiter(',')
      ->expected(3)
      ->capture_default_str();

  // gridsearch
  auto* grid = app.add_subcommand("gridsearch", "Sweep C and nu on a dev set");
  std::string grid_train, grid_dev;
  KernelOptions grid_kernel;
  std::vector<double> c_grid = default_c_grid();
  std::vector<double> nu_grid = default_nu_grid();
  double grid_tol = 1e-3;
  std::size_t grid_max_iter = 0;
  grid->add_option("train_file", grid_train, "Labeled train corpus")->required();
  grid->add_option("dev_file", grid_dev, "Labeled dev corpus")->required();
  add_kernel_options(grid, grid_kernel);
  grid->add_option("--c-grid", c_grid, "C values to try")->delimiter(',');
  grid->add_option("--nu-grid", nu_grid, "nu values to try")->delimiter(',');
  grid->add_option("--tol", grid_tol, "KKT stopping tolerance");
  grid->add_option("--max-iter", grid_max_iter, "Solver iteration cap (0 = auto)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (train->parsed())
      return cmd_train(global, train_file, bundle_out, train_kernel, train_svr,
                       ensemble, folds, embed_texts, train_gbt);
    if (predict->parsed())
      return cmd_predict(global, predict_bundle, predict_file, predict_out,
                         labeled_input);
    if (evaluate->parsed())
      return cmd_evaluate(global, eval_pred, eval_gold, cities_path);
    if (plot->parsed())
      return cmd_plot(global, plot_pred, plot_gold, plot_out, plot_points);
    if (synth->parsed())
      return cmd_synth(global, synth_train, synth_dev, synth_test, synth_cities,
                       synth_markers_file, per_city, noise_std, markers, len_min,
                       len_max, marker_fraction, synth_split);
    if (grid->parsed())
      return cmd_gridsearch(global, grid_train, grid_dev, grid_kernel, c_grid,
                            nu_grid, grid_tol, grid_max_iter);
  } catch (const gk::ConvergenceError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const gk::DataError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 1;
}
