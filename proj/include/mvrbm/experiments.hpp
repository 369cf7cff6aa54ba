#pragma once

#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <mutex>
#include <thread>
#include <vector>

#include "mvrbm/io.hpp"
#include "mvrbm/metrics.hpp"
#include "mvrbm/pair_model.hpp"
#include "mvrbm/plot.hpp"
#include "mvrbm/train.hpp"

namespace mvrbm {

/// Declarative description of one experiment run. Parsed from a key = value
/// config file; every field is echoed into the run metadata.
struct ExperimentConfig {
  std::string kind;  // artificial | toy | mnist
  std::uint64_t seed = 1;
  int repetitions = 1;
  std::vector<LevelSpec> s_list = {LevelSpec::finite(1), LevelSpec::finite(2),
                                   LevelSpec::finite(4), LevelSpec::continuous()};
  int log_every = 1;

  // model shapes: the generator (artificial) or the classifier (mnist) has
  // n_hidden hidden units; the artificial trainee gets n_hidden + extra_hidden
  int n_visible = 8;
  int n_hidden = 4;
  int extra_hidden = 0;
  int n_points = 200;
  int burn_in = 1000;
  int thin = 100;

  // pair-model curves (toy)
  int toy_n_hidden = 2;
  std::vector<double> beta_list = {0.2, 0.4, 0.6, 0.8};
  double w_max = 3.0;
  double w_step = 0.05;

  // classification experiment (mnist)
  std::string mnist_dir;
  int n_train = 1000;
  double noise_sigma = 120.0;

  TrainConfig train;

  void validate() const {
    if (kind != "artificial" && kind != "toy" && kind != "mnist")
      throw std::invalid_argument("config: kind must be artificial, toy, or mnist");
    if (repetitions < 1) throw std::invalid_argument("config: repetitions must be >= 1");
    if (s_list.empty()) throw std::invalid_argument("config: s_list must not be empty");
    if (log_every < 1) throw std::invalid_argument("config: log_every must be >= 1");
    if (kind != "toy") train.validate();
    if (kind == "toy") {
      if (!(w_step > 0.0) || !(w_max > 0.0))
        throw std::invalid_argument("config: w_max and w_step must be > 0");
      for (double b : beta_list)
        if (!(b >= 0.0 && b < 1.0))
          throw std::invalid_argument("config: beta values must lie in [0, 1)");
    }
  }

  static ExperimentConfig defaults_for(const std::string& kind) {
    ExperimentConfig cfg;
    cfg.kind = kind;
    if (kind == "artificial") {
      cfg.repetitions = 300;
      cfg.train.optimizer = OptimizerKind::Adam;
      cfg.train.epochs = 1000;
      cfg.train.batch_size = 0;
      cfg.train.cd_k = 1;
    } else if (kind == "mnist") {
      cfg.repetitions = 120;
      cfg.n_hidden = 200;
      cfg.s_list = {LevelSpec::finite(1), LevelSpec::continuous()};
      cfg.train.optimizer = OptimizerKind::AdaMax;
      cfg.train.epochs = 50;
      cfg.train.batch_size = 100;
    }
    return cfg;
  }

  /// Canonical one-field-per-line dump; also the fingerprint input.
  std::string canonical_text() const {
    std::ostringstream out;
    out << "kind = " << kind << "\nseed = " << seed << "\nrepetitions = " << repetitions
        << "\ns_list = " << format_s_list() << "\nlog_every = " << log_every
        << "\nn_visible = " << n_visible << "\nn_hidden = " << n_hidden
        << "\nextra_hidden = " << extra_hidden << "\nn_points = " << n_points
        << "\nburn_in = " << burn_in << "\nthin = " << thin
        << "\ntoy_n_hidden = " << toy_n_hidden << "\nbeta_list = " << format_beta_list()
        << "\nw_max = " << detail::format_double(w_max)
        << "\nw_step = " << detail::format_double(w_step) << "\nmnist_dir = " << mnist_dir
        << "\nn_train = " << n_train
        << "\nnoise_sigma = " << detail::format_double(noise_sigma)
        << "\noptimizer = " << to_string(train.optimizer)
        << "\nalpha = " << detail::format_double(train.alpha)
        << "\nbeta1 = " << detail::format_double(train.beta1)
        << "\nbeta2 = " << detail::format_double(train.beta2)
        << "\nepsilon = " << detail::format_double(train.epsilon)
        << "\nepochs = " << train.epochs << "\nbatch_size = " << train.batch_size
        << "\ncd_k = " << train.cd_k << '\n';
    return out.str();
  }

  std::string fingerprint() const { return fingerprint_hex(canonical_text()); }

  std::string format_s_list() const {
    std::string out;
    for (const LevelSpec& s : s_list) out += (out.empty() ? "" : ",") + s.str();
    return out;
  }
  std::string format_beta_list() const {
    std::string out;
    for (double b : beta_list) out += (out.empty() ? "" : ",") + detail::format_double(b);
    return out;
  }
};

namespace detail {

inline std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream ss(text);
  while (std::getline(ss, item, ',')) {
    const auto a = item.find_first_not_of(" \t");
    if (a == std::string::npos) continue;
    const auto b = item.find_last_not_of(" \t");
    out.push_back(item.substr(a, b - a + 1));
  }
  return out;
}

inline int parse_int(const std::string& key, const std::string& value) {
  try {
    std::size_t pos = 0;
    const int v = std::stoi(value, &pos);
    if (pos == value.size()) return v;
  } catch (const std::exception&) {
  }
  throw std::invalid_argument("config: bad integer for " + key + ": \"" + value + "\"");
}

inline double parse_real(const std::string& key, const std::string& value) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(value, &pos);
    if (pos == value.size()) return v;
  } catch (const std::exception&) {
  }
  throw std::invalid_argument("config: bad number for " + key + ": \"" + value + "\"");
}

inline std::uint64_t parse_u64(const std::string& key, const std::string& value) {
  try {
    std::size_t pos = 0;
    const std::uint64_t v = std::stoull(value, &pos);
    if (pos == value.size()) return v;
  } catch (const std::exception&) {
  }
  throw std::invalid_argument("config: bad seed for " + key + ": \"" + value + "\"");
}

}  // namespace detail

/// Key = value lines, # comments. `kind` selects the per-experiment defaults;
/// any other key overrides one config field. Unknown keys are rejected.
inline ExperimentConfig parse_config(std::istream& in) {
  std::vector<std::pair<std::string, std::string>> entries;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    const auto a = line.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("config line " + std::to_string(line_no) + ": expected key = value");
    auto trim = [](std::string s) {
      const auto x = s.find_first_not_of(" \t\r\n");
      if (x == std::string::npos) return std::string();
      const auto y = s.find_last_not_of(" \t\r\n");
      return s.substr(x, y - x + 1);
    };
    entries.emplace_back(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  std::string kind;
  for (const auto& [k, v] : entries)
    if (k == "kind") kind = v;
  if (kind.empty()) throw std::invalid_argument("config: missing kind");
  ExperimentConfig cfg = ExperimentConfig::defaults_for(kind);
  for (const auto& [key, value] : entries) {
    if (key == "kind") {
    } else if (key == "seed") {
      cfg.seed = detail::parse_u64(key, value);
    } else if (key == "repetitions") {
      cfg.repetitions = detail::parse_int(key, value);
    } else if (key == "s_list") {
      cfg.s_list.clear();
      for (const std::string& tok : detail::split_list(value))
        cfg.s_list.push_back(LevelSpec::parse(tok));
    } else if (key == "log_every") {
      cfg.log_every = detail::parse_int(key, value);
    } else if (key == "n_visible") {
      cfg.n_visible = detail::parse_int(key, value);
    } else if (key == "n_hidden") {
      cfg.n_hidden = detail::parse_int(key, value);
    } else if (key == "extra_hidden") {
      cfg.extra_hidden = detail::parse_int(key, value);
    } else if (key == "n_points") {
      cfg.n_points = detail::parse_int(key, value);
    } else if (key == "burn_in") {
      cfg.burn_in = detail::parse_int(key, value);
    } else if (key == "thin") {
      cfg.thin = detail::parse_int(key, value);
    } else if (key == "toy_n_hidden") {
      cfg.toy_n_hidden = detail::parse_int(key, value);
    } else if (key == "beta_list") {
      cfg.beta_list.clear();
      for (const std::string& tok : detail::split_list(value))
        cfg.beta_list.push_back(detail::parse_real(key, tok));
    } else if (key == "w_max") {
      cfg.w_max = detail::parse_real(key, value);
    } else if (key == "w_step") {
      cfg.w_step = detail::parse_real(key, value);
    } else if (key == "mnist_dir") {
      cfg.mnist_dir = value;
    } else if (key == "n_train") {
      cfg.n_train = detail::parse_int(key, value);
    } else if (key == "noise_sigma") {
      cfg.noise_sigma = detail::parse_real(key, value);
    } else if (key == "optimizer") {
      cfg.train.optimizer = parse_optimizer(value);
    } else if (key == "alpha") {
      cfg.train.alpha = detail::parse_real(key, value);
    } else if (key == "beta1") {
      cfg.train.beta1 = detail::parse_real(key, value);
    } else if (key == "beta2") {
      cfg.train.beta2 = detail::parse_real(key, value);
    } else if (key == "epsilon") {
      cfg.train.epsilon = detail::parse_real(key, value);
    } else if (key == "epochs") {
      cfg.train.epochs = detail::parse_int(key, value);
    } else if (key == "batch_size") {
      cfg.train.batch_size = detail::parse_int(key, value);
    } else if (key == "cd_k") {
      cfg.train.cd_k = detail::parse_int(key, value);
    } else {
      throw std::invalid_argument("config: unknown key \"" + key + "\"");
    }
  }
  return cfg;
}

inline ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config " + path.string());
  return parse_config(in);
}

namespace detail {

/// Run body(0..n-1) on a small worker pool. Each index must only touch its
/// own output slot; the first exception aborts the run.
inline void parallel_for_index(int n, const std::function<void(int)>& body) {
  const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  const int workers = static_cast<int>(std::min<unsigned>(hw, static_cast<unsigned>(n)));
  if (workers <= 1) {
    for (int i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<int> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (;;) {
        const int i = next.fetch_add(1);
        if (i >= n || failed.load()) return;
        try {
          body(i);
        } catch (...) {
          std::scoped_lock lk(error_mutex);
          if (!error) error = std::current_exception();
          failed.store(true);
          return;
        }
      }
    });
  }
  for (std::thread& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

inline void write_text_file(const std::filesystem::path& path, const std::string& text) {
  auto out = open_for_write(path);
  out << text;
}

/// Mean and standard error (sd/sqrt(n)) across repetitions of each row of a
/// reps x rows table.
struct CurveStats {
  std::vector<double> mean, se;
};

inline CurveStats curve_stats(const std::vector<std::vector<double>>& per_rep) {
  const int reps = static_cast<int>(per_rep.size());
  const std::size_t rows = per_rep.front().size();
  CurveStats out{std::vector<double>(rows, 0.0), std::vector<double>(rows, 0.0)};
  for (std::size_t r = 0; r < rows; ++r) {
    double mean = 0.0;
    for (int i = 0; i < reps; ++i) mean += per_rep[i][r];
    mean /= reps;
    double var = 0.0;
    for (int i = 0; i < reps; ++i) {
      const double d = per_rep[i][r] - mean;
      var += d * d;
    }
    out.mean[r] = mean;
    out.se[r] = reps > 1 ? std::sqrt(var / (reps - 1)) / std::sqrt(double(reps)) : 0.0;
  }
  return out;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Synthetic-data over-fitting experiment: a binary generator RBM produces a
// dataset; trainees with varying hidden level counts are CD-trained on it
// while the divergence from the generator and the training log-likelihood
// are tracked.

struct ArtificialResult {
  std::vector<int> logged_epochs;  // includes epoch 0 (pre-training)
  // one entry per s in cfg.s_list
  std::vector<detail::CurveStats> kld;
  std::vector<detail::CurveStats> loglik_per_visible;
};

inline ArtificialResult run_artificial(const ExperimentConfig& cfg,
                                       const std::filesystem::path& out_dir,
                                       bool emit_plots = false) {
  cfg.validate();
  if (cfg.kind != "artificial") throw std::invalid_argument("run_artificial: kind mismatch");
  std::filesystem::create_directories(out_dir);
  const RngStream master(cfg.seed);
  const int reps = cfg.repetitions;
  const int n_s = static_cast<int>(cfg.s_list.size());
  const int trainee_hidden = cfg.n_hidden + cfg.extra_hidden;

  std::vector<int> logged_epochs{0};
  for (int e = cfg.log_every; e <= cfg.train.epochs; e += cfg.log_every) logged_epochs.push_back(e);
  if (logged_epochs.back() != cfg.train.epochs) logged_epochs.push_back(cfg.train.epochs);
  const int rows = static_cast<int>(logged_epochs.size());

  struct RepOutput {
    std::uint64_t seed = 0;
    std::vector<std::vector<double>> kld, llv;  // [s_index][row]
  };
  std::vector<RepOutput> rep_out(reps);

  detail::parallel_for_index(reps, [&](int rep) {
    RngStream stream = master.split(rep);
    RepOutput& out = rep_out[rep];
    out.seed = stream.seed();
    out.kld.assign(n_s, std::vector<double>(rows, 0.0));
    out.llv.assign(n_s, std::vector<double>(rows, 0.0));
    RngStream gen_rng = stream.split(0);
    RngStream data_rng = stream.split(1);
    const RbmParams generator =
        init_generative(cfg.n_visible, cfg.n_hidden, LevelSpec::finite(1), gen_rng);
    const SpinDataset data =
        generate_dataset(generator, cfg.n_points, cfg.burn_in, cfg.thin, data_rng);
    for (int si = 0; si < n_s; ++si) {
      RngStream init_rng = stream.split(2 + 2 * si);
      RbmParams trainee =
          init_trainee(cfg.n_visible, trainee_hidden, cfg.s_list[si], init_rng);
      TrainConfig tc = cfg.train;
      tc.seed = stream.split(3 + 2 * si).seed();
      int row = 0;
      auto log_point = [&](int row_index, const RbmParams& model) {
        out.kld[si][row_index] = kld_per_visible(generator, model);
        out.llv[si][row_index] = exact_log_likelihood(model, data) / cfg.n_visible;
      };
      log_point(row++, trainee);
      train_rbm(std::move(trainee), data, tc, [&](int epoch, const RbmParams& model) {
        if (epoch % cfg.log_every == 0 || epoch == cfg.train.epochs) log_point(row++, model);
      });
    }
  });

  // raw per-repetition rows, then mean/standard-error aggregates
  const std::string config_id = cfg.fingerprint();
  std::vector<MetricsRecord> raw;
  for (int rep = 0; rep < reps; ++rep)
    for (int si = 0; si < n_s; ++si) {
      const std::string tag = "_s" + cfg.s_list[si].str();
      for (int r = 0; r < rows; ++r) {
        raw.push_back({logged_epochs[r], "kld" + tag, rep_out[rep].kld[si][r], rep_out[rep].seed,
                       config_id});
        raw.push_back({logged_epochs[r], "loglik_per_v" + tag, rep_out[rep].llv[si][r],
                       rep_out[rep].seed, config_id});
      }
    }
  write_metrics_csv(out_dir / "artificial_raw.csv", raw);

  ArtificialResult result;
  result.logged_epochs = logged_epochs;
  std::vector<MetricsRecord> agg;
  for (int si = 0; si < n_s; ++si) {
    std::vector<std::vector<double>> kld_rows(reps), llv_rows(reps);
    for (int rep = 0; rep < reps; ++rep) {
      kld_rows[rep] = rep_out[rep].kld[si];
      llv_rows[rep] = rep_out[rep].llv[si];
    }
    result.kld.push_back(detail::curve_stats(kld_rows));
    result.loglik_per_visible.push_back(detail::curve_stats(llv_rows));
    const std::string tag = "_s" + cfg.s_list[si].str();
    for (int r = 0; r < rows; ++r) {
      agg.push_back({logged_epochs[r], "kld" + tag + "_mean", result.kld[si].mean[r], cfg.seed,
                     config_id});
      agg.push_back(
          {logged_epochs[r], "kld" + tag + "_se", result.kld[si].se[r], cfg.seed, config_id});
      agg.push_back({logged_epochs[r], "loglik_per_v" + tag + "_mean",
                     result.loglik_per_visible[si].mean[r], cfg.seed, config_id});
      agg.push_back({logged_epochs[r], "loglik_per_v" + tag + "_se",
                     result.loglik_per_visible[si].se[r], cfg.seed, config_id});
    }
  }
  write_metrics_csv(out_dir / "artificial_mean.csv", agg);
  detail::write_text_file(out_dir / "run_config.txt",
                          cfg.canonical_text() + "config_id = " + config_id + "\n");
  if (emit_plots) {
    std::vector<double> epochs(logged_epochs.begin(), logged_epochs.end());
    std::vector<PlotSeries> kld_plot, ll_plot;
    for (int si = 0; si < n_s; ++si) {
      kld_plot.push_back({"s = " + cfg.s_list[si].str(), epochs, result.kld[si].mean});
      ll_plot.push_back(
          {"s = " + cfg.s_list[si].str(), epochs, result.loglik_per_visible[si].mean});
    }
    write_line_plot_svg(out_dir / "kld_mean.svg", "mean KLD vs generator", "epoch", "KLD / |V|",
                        kld_plot);
    write_line_plot_svg(out_dir / "loglik_mean.svg", "mean training log-likelihood", "epoch",
                        "log-likelihood / |V|", ll_plot);
  }
  return result;
}

// ---------------------------------------------------------------------------
// Pair-model analysis curves.

struct ToyResult {
  // w_star[si][bi] for s_list x beta_list
  std::vector<std::vector<double>> w_star;
};

inline ToyResult run_toy(const ExperimentConfig& cfg, const std::filesystem::path& out_dir,
                         bool emit_plots = false) {
  cfg.validate();
  if (cfg.kind != "toy") throw std::invalid_argument("run_toy: kind mismatch");
  std::filesystem::create_directories(out_dir);
  const int half = static_cast<int>(std::llround(cfg.w_max / cfg.w_step));

  std::vector<PlotSeries> alpha_plot, ll_plot;
  {
    auto out = detail::open_for_write(out_dir / "toy_curves.csv");
    out << "w,s,alpha,loglik\n";
    for (const LevelSpec& s : cfg.s_list) {
      PairModelSpec spec{s, cfg.toy_n_hidden, cfg.beta_list.empty() ? 0.0 : cfg.beta_list.front()};
      PlotSeries alpha_series{"s = " + s.str(), {}, {}}, ll_series = alpha_series;
      for (int k = -half; k <= half; ++k) {
        const double w = k * cfg.w_step;  // k = 0 lands exactly on w = 0
        const double alpha = pair_correlation(spec, w);
        const double ll = pair_log_likelihood(spec, w);
        out << detail::format_double(w) << ',' << s.str() << ',' << detail::format_double(alpha)
            << ',' << detail::format_double(ll) << '\n';
        alpha_series.x.push_back(w);
        alpha_series.y.push_back(alpha);
        ll_series.x.push_back(w);
        ll_series.y.push_back(ll);
      }
      alpha_plot.push_back(std::move(alpha_series));
      ll_plot.push_back(std::move(ll_series));
    }
  }
  if (emit_plots) {
    write_line_plot_svg(out_dir / "toy_alpha.svg", "pair correlation vs coupling", "w", "alpha",
                        alpha_plot);
    write_line_plot_svg(out_dir / "toy_loglik.svg", "pair log-likelihood vs coupling", "w",
                        "log-likelihood", ll_plot);
  }

  ToyResult result;
  {
    auto out = detail::open_for_write(out_dir / "toy_wstar.csv");
    out << "s,beta,w_star\n";
    for (const LevelSpec& s : cfg.s_list) {
      std::vector<double> per_beta;
      for (double beta : cfg.beta_list) {
        const double w = max_likelihood_coupling({s, cfg.toy_n_hidden, beta});
        per_beta.push_back(w);
        out << s.str() << ',' << detail::format_double(beta) << ','
            << detail::format_double(w) << '\n';
      }
      result.w_star.push_back(std::move(per_beta));
    }
  }
  detail::write_text_file(out_dir / "run_config.txt",
                          cfg.canonical_text() + "config_id = " + cfg.fingerprint() + "\n");
  return result;
}

// ---------------------------------------------------------------------------
// Classification experiment on the IDX-format digit set.

struct MnistResult {
  std::vector<int> logged_epochs;
  std::vector<detail::CurveStats> train_error;  // per s
  std::vector<detail::CurveStats> test_error;
};

namespace detail {

inline std::filesystem::path resolve_idx(const std::filesystem::path& dir, const std::string& stem) {
  for (const char* suffix : {"", ".gz"}) {
    const std::filesystem::path p = dir / (stem + suffix);
    if (std::filesystem::exists(p)) return p;
  }
  throw std::runtime_error("missing data file " + (dir / stem).string() + "[.gz]");
}

inline LabeledDataset to_labeled(const IdxTensor& images, const std::vector<int>& labels,
                                 int n_classes) {
  const std::vector<std::vector<double>> x = preprocess_images(images);
  LabeledDataset data(784, n_classes);
  for (std::size_t i = 0; i < x.size(); ++i) data.add(x[i], labels[i]);
  return data;
}

}  // namespace detail

inline MnistResult run_mnist(const ExperimentConfig& cfg, const std::filesystem::path& out_dir,
                             bool emit_plots = false) {
  cfg.validate();
  if (cfg.kind != "mnist") throw std::invalid_argument("run_mnist: kind mismatch");
  if (cfg.mnist_dir.empty()) throw std::invalid_argument("config: mnist_dir is required");
  std::filesystem::create_directories(out_dir);
  const std::filesystem::path dir = cfg.mnist_dir;
  const IdxTensor train_images = read_idx(detail::resolve_idx(dir, "train-images-idx3-ubyte"));
  const std::vector<int> train_labels =
      idx_labels(read_idx(detail::resolve_idx(dir, "train-labels-idx1-ubyte")));
  const IdxTensor test_images = read_idx(detail::resolve_idx(dir, "t10k-images-idx3-ubyte"));
  const std::vector<int> test_labels =
      idx_labels(read_idx(detail::resolve_idx(dir, "t10k-labels-idx1-ubyte")));
  detail::require(train_images.dims[0] == train_labels.size() &&
                      test_images.dims[0] == test_labels.size(),
                  "run_mnist: image/label counts disagree");
  const int n_classes = 10;
  const int n_avail = static_cast<int>(train_images.dims[0]);
  detail::require(cfg.n_train >= 1 && cfg.n_train <= n_avail, "run_mnist: bad n_train");

  const RngStream master(cfg.seed);
  const int reps = cfg.repetitions;
  const int n_s = static_cast<int>(cfg.s_list.size());

  std::vector<int> logged_epochs{0};
  for (int e = cfg.log_every; e <= cfg.train.epochs; e += cfg.log_every) logged_epochs.push_back(e);
  if (logged_epochs.back() != cfg.train.epochs) logged_epochs.push_back(cfg.train.epochs);
  const int rows = static_cast<int>(logged_epochs.size());

  struct RepOutput {
    std::uint64_t seed = 0;
    std::vector<std::vector<double>> train_err, test_err;
  };
  std::vector<RepOutput> rep_out(reps);

  detail::parallel_for_index(reps, [&](int rep) {
    RngStream stream = master.split(rep);
    RepOutput& out = rep_out[rep];
    out.seed = stream.seed();
    out.train_err.assign(n_s, std::vector<double>(rows, 0.0));
    out.test_err.assign(n_s, std::vector<double>(rows, 0.0));

    // first n_train of a seeded shuffle
    RngStream pick_rng = stream.split(0);
    std::vector<int> order(n_avail);
    std::iota(order.begin(), order.end(), 0);
    for (int i = n_avail - 1; i > 0; --i) {
      const int j = static_cast<int>(pick_rng.uniform_below(static_cast<std::uint64_t>(i) + 1));
      std::swap(order[i], order[j]);
    }
    std::vector<int> chosen(order.begin(), order.begin() + cfg.n_train);
    std::vector<int> chosen_labels;
    for (int i : chosen) chosen_labels.push_back(train_labels[i]);
    const LabeledDataset train_set =
        detail::to_labeled(subset_images(train_images, chosen), chosen_labels, n_classes);

    // test inputs corrupted once per repetition, before normalization
    RngStream noise_rng = stream.split(1);
    const LabeledDataset test_set = detail::to_labeled(
        corrupt_gaussian(test_images, cfg.noise_sigma, noise_rng), test_labels, n_classes);

    for (int si = 0; si < n_s; ++si) {
      RngStream init_rng = stream.split(2 + 2 * si);
      DrbmParams model =
          init_classifier(784, cfg.n_hidden, n_classes, cfg.s_list[si], init_rng);
      TrainConfig tc = cfg.train;
      tc.seed = stream.split(3 + 2 * si).seed();
      int row = 0;
      auto log_point = [&](int row_index, const DrbmParams& m) {
        out.train_err[si][row_index] = misclassification_rate(m, train_set);
        out.test_err[si][row_index] = misclassification_rate(m, test_set);
      };
      log_point(row++, model);
      train_classifier(std::move(model), train_set, tc,
                       [&](int epoch, const DrbmParams& m) {
                         if (epoch % cfg.log_every == 0 || epoch == cfg.train.epochs)
                           log_point(row++, m);
                       });
    }
  });

  const std::string config_id = cfg.fingerprint();
  std::vector<MetricsRecord> raw;
  for (int rep = 0; rep < reps; ++rep)
    for (int si = 0; si < n_s; ++si) {
      const std::string tag = "_s" + cfg.s_list[si].str();
      for (int r = 0; r < rows; ++r) {
        raw.push_back({logged_epochs[r], "train_err" + tag, rep_out[rep].train_err[si][r],
                       rep_out[rep].seed, config_id});
        raw.push_back({logged_epochs[r], "test_err" + tag, rep_out[rep].test_err[si][r],
                       rep_out[rep].seed, config_id});
      }
    }
  write_metrics_csv(out_dir / "mnist_raw.csv", raw);

  MnistResult result;
  result.logged_epochs = logged_epochs;
  std::vector<MetricsRecord> agg;
  for (int si = 0; si < n_s; ++si) {
    std::vector<std::vector<double>> tr(reps), te(reps);
    for (int rep = 0; rep < reps; ++rep) {
      tr[rep] = rep_out[rep].train_err[si];
      te[rep] = rep_out[rep].test_err[si];
    }
    result.train_error.push_back(detail::curve_stats(tr));
    result.test_error.push_back(detail::curve_stats(te));
    const std::string tag = "_s" + cfg.s_list[si].str();
    for (int r = 0; r < rows; ++r) {
      agg.push_back({logged_epochs[r], "train_err" + tag + "_mean",
                     result.train_error[si].mean[r], cfg.seed, config_id});
      agg.push_back({logged_epochs[r], "train_err" + tag + "_se", result.train_error[si].se[r],
                     cfg.seed, config_id});
      agg.push_back({logged_epochs[r], "test_err" + tag + "_mean", result.test_error[si].mean[r],
                     cfg.seed, config_id});
      agg.push_back({logged_epochs[r], "test_err" + tag + "_se", result.test_error[si].se[r],
                     cfg.seed, config_id});
    }
  }
  write_metrics_csv(out_dir / "mnist_mean.csv", agg);
  detail::write_text_file(out_dir / "run_config.txt",
                          cfg.canonical_text() + "config_id = " + config_id + "\n" +
                              "xavier_fans = input:n+H class:H+K\n");
  if (emit_plots) {
    std::vector<double> epochs(logged_epochs.begin(), logged_epochs.end());
    std::vector<PlotSeries> train_plot, test_plot;
    for (int si = 0; si < n_s; ++si) {
      train_plot.push_back({"s = " + cfg.s_list[si].str(), epochs, result.train_error[si].mean});
      test_plot.push_back({"s = " + cfg.s_list[si].str(), epochs, result.test_error[si].mean});
    }
    write_line_plot_svg(out_dir / "train_err.svg", "mean training error", "epoch", "error rate",
                        train_plot);
    write_line_plot_svg(out_dir / "test_err.svg", "mean test error (corrupted inputs)", "epoch",
                        "error rate", test_plot);
  }
  return result;
}

}  // namespace mvrbm
