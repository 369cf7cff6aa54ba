// Command-line front end: data generation, training, evaluation, analysis
// curves, and the three canned experiment runners.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "mvrbm/mvrbm.hpp"

namespace {

using namespace mvrbm;

std::vector<LevelSpec> parse_s_list(const std::string& text) {
  std::vector<LevelSpec> out;
  for (const std::string& tok : detail::split_list(text)) out.push_back(LevelSpec::parse(tok));
  if (out.empty()) throw std::invalid_argument("empty s list");
  return out;
}

struct RunFlags {
  std::string config_path;
  bool plots = false;
  std::optional<std::uint64_t> seed;
  std::string out_dir = "out";
  std::optional<int> reps;
  std::string s_list;
  std::string mnist_dir;
};

void add_run_flags(CLI::App* cmd, RunFlags& flags, bool mnist) {
  cmd->add_option("--config", flags.config_path, "experiment config file (key = value lines)");
  cmd->add_option("--seed", flags.seed, "master seed override");
  cmd->add_option("--out", flags.out_dir, "output directory");
  cmd->add_option("--reps", flags.reps, "repetition count override");
  cmd->add_option("--s", flags.s_list, "hidden level list override, e.g. 1,2,4,inf");
  cmd->add_flag("--plot", flags.plots, "also write SVG line plots of the mean curves");
  if (mnist) cmd->add_option("--mnist-dir", flags.mnist_dir, "directory with the IDX files");
}

ExperimentConfig assemble_config(const RunFlags& flags, const std::string& kind) {
  ExperimentConfig cfg = flags.config_path.empty() ? ExperimentConfig::defaults_for(kind)
                                                   : load_config(flags.config_path);
  if (cfg.kind != kind)
    throw std::invalid_argument("config kind \"" + cfg.kind + "\" does not match subcommand");
  if (flags.seed) cfg.seed = *flags.seed;
  if (flags.reps) cfg.repetitions = *flags.reps;
  if (!flags.s_list.empty()) cfg.s_list = parse_s_list(flags.s_list);
  if (!flags.mnist_dir.empty()) cfg.mnist_dir = flags.mnist_dir;
  return cfg;
}

LabeledDataset labeled_from_idx(const std::string& images_path, const std::string& labels_path,
                                double sigma, std::uint64_t noise_seed) {
  IdxTensor images = read_idx(images_path);
  const std::vector<int> labels = idx_labels(read_idx(labels_path));
  if (images.dims.empty() || images.dims[0] != labels.size())
    throw std::invalid_argument("image and label counts disagree");
  if (sigma > 0.0) {
    RngStream rng(noise_seed);
    images = corrupt_gaussian(images, sigma, rng);
  }
  const auto vectors = preprocess_images(images);
  LabeledDataset data(784, 10);
  for (std::size_t i = 0; i < vectors.size(); ++i) data.add(vectors[i], labels[i]);
  return data;
}

int run(int argc, char** argv) {
  CLI::App app{"RBMs with evenly spaced multilevel hidden units"};
  app.require_subcommand(1);

  // ---- gen-data ----------------------------------------------------------
  auto* gen = app.add_subcommand("gen-data", "sample a synthetic spin dataset from a generator RBM");
  std::string gen_model, gen_out = "data.spins", gen_save;
  int gen_n = 200, gen_burn = 1000, gen_thin = 100, gen_visible = 8, gen_hidden = 4;
  std::string gen_s = "1";
  std::uint64_t gen_seed = 1;
  gen->add_option("--model", gen_model, "generator model file (otherwise drawn from --visible/--hidden/--s)");
  gen->add_option("--save-model", gen_save, "also write the generator model here");
  gen->add_option("--visible", gen_visible, "visible units of a drawn generator");
  gen->add_option("--hidden", gen_hidden, "hidden units of a drawn generator");
  gen->add_option("--s", gen_s, "hidden level count of a drawn generator (integer or inf)");
  gen->add_option("--n", gen_n, "points to sample");
  gen->add_option("--burn-in", gen_burn, "sweeps discarded before recording");
  gen->add_option("--thin", gen_thin, "sweeps between recorded states");
  gen->add_option("--seed", gen_seed, "seed");
  gen->add_option("--out", gen_out, "output dataset file");
  gen->callback([&] {
    RngStream stream(gen_seed);
    RbmParams model;
    if (!gen_model.empty()) {
      model = load_rbm_model(gen_model);
    } else {
      RngStream init_rng = stream.split(0);
      model = init_generative(gen_visible, gen_hidden, LevelSpec::parse(gen_s), init_rng);
    }
    RngStream chain_rng = stream.split(1);
    const SpinDataset data = generate_dataset(model, gen_n, gen_burn, gen_thin, chain_rng);
    save_spin_dataset(gen_out, data);
    if (!gen_save.empty()) save_model(gen_save, model);
    std::cout << "wrote " << data.n_points() << " points (|V| = " << data.n_visible() << ") to "
              << gen_out << "\n";
  });

  // ---- train-rbm ---------------------------------------------------------
  auto* trbm = app.add_subcommand("train-rbm", "CD-train an RBM on a spin dataset");
  std::string trbm_data, trbm_out = "model.rbm", trbm_metrics, trbm_s = "1", trbm_opt = "adam";
  int trbm_hidden = 4, trbm_epochs = 1000, trbm_batch = 0, trbm_k = 1;
  double trbm_alpha = 0.001;
  std::uint64_t trbm_seed = 1;
  trbm->add_option("--data", trbm_data, "training dataset file")->required();
  trbm->add_option("--hidden", trbm_hidden, "hidden units");
  trbm->add_option("--s", trbm_s, "hidden level count (integer or inf)");
  trbm->add_option("--optimizer", trbm_opt, "adam or adamax");
  trbm->add_option("--alpha", trbm_alpha, "step size");
  trbm->add_option("--epochs", trbm_epochs, "training epochs");
  trbm->add_option("--batch", trbm_batch, "mini-batch size (0 = full batch)");
  trbm->add_option("--k", trbm_k, "CD order");
  trbm->add_option("--seed", trbm_seed, "seed");
  trbm->add_option("--out", trbm_out, "trained model file");
  trbm->add_option("--metrics", trbm_metrics, "per-epoch log-likelihood CSV");
  trbm->callback([&] {
    const SpinDataset data = load_spin_dataset(trbm_data);
    RngStream stream(trbm_seed);
    RngStream init_rng = stream.split(0);
    RbmParams model = init_trainee(data.n_visible(), trbm_hidden, LevelSpec::parse(trbm_s), init_rng);
    TrainConfig cfg;
    cfg.optimizer = parse_optimizer(trbm_opt);
    cfg.alpha = trbm_alpha;
    cfg.epochs = trbm_epochs;
    cfg.batch_size = trbm_batch;
    cfg.cd_k = trbm_k;
    cfg.seed = stream.split(1).seed();
    const std::string config_id = fingerprint_hex(
        "train-rbm|" + trbm_s + "|" + std::to_string(trbm_hidden) + "|" + trbm_opt + "|" +
        detail::format_double(trbm_alpha) + "|" + std::to_string(trbm_epochs) + "|" +
        std::to_string(trbm_batch) + "|" + std::to_string(trbm_k));
    std::vector<MetricsRecord> log;
    const bool track = !trbm_metrics.empty() && data.n_visible() <= kMaxExactVisible;
    auto result = train_rbm(std::move(model), data, cfg, [&](int epoch, const RbmParams& m) {
      if (track)
        log.push_back({epoch, "loglik_per_v_s" + trbm_s,
                       exact_log_likelihood(m, data) / data.n_visible(), trbm_seed, config_id});
    });
    save_model(trbm_out, result.params);
    if (track) write_metrics_csv(trbm_metrics, log);
    std::cout << "trained " << result.updates << " updates; model written to " << trbm_out << "\n";
  });

  // ---- eval-kld ----------------------------------------------------------
  auto* ekld = app.add_subcommand("eval-kld", "KLD per visible unit between two RBM model files");
  std::string ekld_gen, ekld_trained;
  ekld->add_option("--gen", ekld_gen, "generator model file")->required();
  ekld->add_option("--trained", ekld_trained, "trained model file")->required();
  ekld->callback([&] {
    const double value = kld_per_visible(load_rbm_model(ekld_gen), load_rbm_model(ekld_trained));
    std::printf("%.17g\n", value);
  });

  // ---- toy-curves --------------------------------------------------------
  auto* toy = app.add_subcommand("toy-curves", "pair-model correlation and likelihood curves");
  RunFlags toy_flags;
  add_run_flags(toy, toy_flags, false);
  int toy_hidden = 2;
  std::string toy_betas;
  toy->add_option("--n-hidden", toy_hidden, "hidden units of the pair model");
  toy->add_option("--beta", toy_betas, "data correlation list, e.g. 0.2,0.6");
  toy->callback([&] {
    ExperimentConfig cfg = assemble_config(toy_flags, "toy");
    cfg.toy_n_hidden = toy_hidden;
    if (!toy_betas.empty()) {
      cfg.beta_list.clear();
      for (const std::string& tok : detail::split_list(toy_betas))
        cfg.beta_list.push_back(std::stod(tok));
    }
    run_toy(cfg, toy_flags.out_dir, toy_flags.plots);
    std::cout << "curves written to " << toy_flags.out_dir << "\n";
  });

  // ---- train-drbm --------------------------------------------------------
  auto* tdrbm = app.add_subcommand("train-drbm", "train the classifier on IDX images");
  std::string td_images, td_labels, td_out = "model.drbm", td_metrics, td_s = "1",
              td_opt = "adamax";
  int td_n = 1000, td_hidden = 200, td_epochs = 50, td_batch = 100;
  double td_alpha = 0.001;
  std::uint64_t td_seed = 1;
  tdrbm->add_option("--images", td_images, "training images (IDX)")->required();
  tdrbm->add_option("--labels", td_labels, "training labels (IDX)")->required();
  tdrbm->add_option("--n", td_n, "training points (first n after a seeded shuffle; 0 = all)");
  tdrbm->add_option("--hidden", td_hidden, "hidden units");
  tdrbm->add_option("--s", td_s, "hidden level count (integer or inf)");
  tdrbm->add_option("--optimizer", td_opt, "adam or adamax");
  tdrbm->add_option("--alpha", td_alpha, "step size");
  tdrbm->add_option("--epochs", td_epochs, "training epochs");
  tdrbm->add_option("--batch", td_batch, "mini-batch size (0 = full batch)");
  tdrbm->add_option("--seed", td_seed, "seed");
  tdrbm->add_option("--out", td_out, "trained model file");
  tdrbm->add_option("--metrics", td_metrics, "per-epoch training error CSV");
  tdrbm->callback([&] {
    const IdxTensor images = read_idx(td_images);
    const std::vector<int> labels = idx_labels(read_idx(td_labels));
    if (images.dims.empty() || images.dims[0] != labels.size())
      throw std::invalid_argument("image and label counts disagree");
    RngStream stream(td_seed);
    const int avail = static_cast<int>(images.dims[0]);
    const int take = td_n == 0 ? avail : td_n;
    if (take < 1 || take > avail) throw std::invalid_argument("bad --n");
    RngStream pick = stream.split(0);
    std::vector<int> order(avail);
    std::iota(order.begin(), order.end(), 0);
    for (int i = avail - 1; i > 0; --i) {
      const int j = static_cast<int>(pick.uniform_below(static_cast<std::uint64_t>(i) + 1));
      std::swap(order[i], order[j]);
    }
    const std::vector<int> chosen(order.begin(), order.begin() + take);
    std::vector<int> chosen_labels;
    for (int i : chosen) chosen_labels.push_back(labels[i]);
    const auto vectors = preprocess_images(subset_images(images, chosen));
    LabeledDataset data(784, 10);
    for (std::size_t i = 0; i < vectors.size(); ++i) data.add(vectors[i], chosen_labels[i]);

    RngStream init_rng = stream.split(1);
    DrbmParams model = init_classifier(784, td_hidden, 10, LevelSpec::parse(td_s), init_rng);
    TrainConfig cfg;
    cfg.optimizer = parse_optimizer(td_opt);
    cfg.alpha = td_alpha;
    cfg.epochs = td_epochs;
    cfg.batch_size = td_batch;
    cfg.seed = stream.split(2).seed();
    const std::string config_id = fingerprint_hex(
        "train-drbm|" + td_s + "|" + std::to_string(td_hidden) + "|" + td_opt + "|" +
        detail::format_double(td_alpha) + "|" + std::to_string(td_epochs) + "|" +
        std::to_string(td_batch) + "|" + std::to_string(take));
    std::vector<MetricsRecord> log;
    auto result = train_classifier(std::move(model), data, cfg,
                                   [&](int epoch, const DrbmParams& m) {
                                     if (!td_metrics.empty())
                                       log.push_back({epoch, "train_err_s" + td_s,
                                                      misclassification_rate(m, data), td_seed,
                                                      config_id});
                                   });
    save_model(td_out, result.params);
    if (!td_metrics.empty()) write_metrics_csv(td_metrics, log);
    std::cout << "trained " << result.updates << " updates; model written to " << td_out << "\n";
  });

  // ---- eval-drbm ---------------------------------------------------------
  auto* edrbm = app.add_subcommand("eval-drbm", "misclassification rate of a classifier on IDX data");
  std::string ed_model, ed_images, ed_labels;
  double ed_sigma = 0.0;
  std::uint64_t ed_seed = 1;
  edrbm->add_option("--model", ed_model, "classifier model file")->required();
  edrbm->add_option("--images", ed_images, "images (IDX)")->required();
  edrbm->add_option("--labels", ed_labels, "labels (IDX)")->required();
  edrbm->add_option("--sigma", ed_sigma, "Gaussian pixel noise applied before normalization");
  edrbm->add_option("--seed", ed_seed, "noise seed");
  edrbm->callback([&] {
    const DrbmParams model = load_drbm_model(ed_model);
    const LabeledDataset data = labeled_from_idx(ed_images, ed_labels, ed_sigma, ed_seed);
    std::printf("%.17g\n", misclassification_rate(model, data));
  });

  // ---- experiment runners -------------------------------------------------
  auto* rart = app.add_subcommand("run-artificial", "synthetic-data over-fitting experiment");
  RunFlags rart_flags;
  add_run_flags(rart, rart_flags, false);
  rart->callback([&] {
    run_artificial(assemble_config(rart_flags, "artificial"), rart_flags.out_dir, rart_flags.plots);
    std::cout << "results written to " << rart_flags.out_dir << "\n";
  });

  auto* rtoy = app.add_subcommand("run-toy", "pair-model analysis curves");
  RunFlags rtoy_flags;
  add_run_flags(rtoy, rtoy_flags, false);
  rtoy->callback([&] {
    run_toy(assemble_config(rtoy_flags, "toy"), rtoy_flags.out_dir, rtoy_flags.plots);
    std::cout << "results written to " << rtoy_flags.out_dir << "\n";
  });

  auto* rmn = app.add_subcommand("run-mnist", "digit classification experiment");
  RunFlags rmn_flags;
  add_run_flags(rmn, rmn_flags, true);
  rmn->callback([&] {
    run_mnist(assemble_config(rmn_flags, "mnist"), rmn_flags.out_dir, rmn_flags.plots);
    std::cout << "results written to " << rmn_flags.out_dir << "\n";
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help
    std::cerr << "error: " << e.what() << "\n";
    return e.get_exit_code();
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
