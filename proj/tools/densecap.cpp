#include <cstdio>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>

#include <CLI11.hpp>

#include "densecap/bounds.hpp"
#include "densecap/compress.hpp"
#include "densecap/computational.hpp"
#include "densecap/cutnorm.hpp"
#include "densecap/error.hpp"
#include "densecap/experiments.hpp"
#include "densecap/network.hpp"
#include "densecap/parallel.hpp"
#include "densecap/propagation.hpp"
#include "densecap/textio.hpp"
#include "densecap/verify.hpp"

namespace {

using namespace densecap;

/// Failure of a check the user asked for (exit 1, but not a library error).
struct CheckFailed : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::vector<double> parse_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    textio::Line line{0, {item}};
    out.push_back(textio::parse_real(line, 0));
  }
  return out;
}

Eigen::VectorXd parse_vector(const std::string& text) {
  const auto v = parse_list(text);
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

void write_or_print(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") std::cout << text;
  else textio::write_file(path, text);
}

std::string vector_text(const Eigen::VectorXd& v) {
  std::string out;
  for (Eigen::Index i = 0; i < v.size(); ++i)
    out += (i ? " " : "") + textio::format_real(v(i));
  return out;
}

void print_bound(const BoundValue& v) {
  if (v.exact && v.exact_bits() <= 4096) {
    std::cout << v.exact_text() << "\n";
    return;
  }
  if (v.exact) std::cout << "value: " << v.exact_text() << "\n";
  std::cout << "log2: " << v.log2_text() << "\n";
}

struct TrainFlags {
  TrainConfig config;
  std::string mode = "standard";
  std::string dataset = "mnist";
  std::string data_dir;

  void add(CLI::App* app, bool with_width) {
    if (with_width) app->add_option("--width", config.width, "hidden width")->capture_default_str();
    if (with_width)
      app->add_option("--mode", mode, "standard | dense")->capture_default_str();
    app->add_option("--clamp", config.clamp_numerator, "dense clamp numerator")
        ->capture_default_str();
    app->add_option("--lr", config.lr, "Adam learning rate")->capture_default_str();
    app->add_option("--batch", config.batch, "mini-batch size")->capture_default_str();
    app->add_option("--epochs", config.epochs, "training epochs")->capture_default_str();
    app->add_option("--dataset", dataset, "mnist | mnist-subset:N | spike:d0,N,samples")
        ->capture_default_str();
    app->add_option("--data-dir", data_dir, "MNIST directory (default $DENSECAP_DATA)");
    app->add_option("--beta1", config.beta1)->capture_default_str();
    app->add_option("--beta2", config.beta2)->capture_default_str();
    app->add_option("--adam-eps", config.adam_eps)->capture_default_str();
  }

  TrainConfig resolve(std::uint64_t seed) const {
    TrainConfig c = config;
    c.mode = parse_train_mode(mode);
    c.dataset = parse_dataset_spec(dataset);
    c.dataset.data_dir = data_dir;
    c.seed = seed;
    return c;
  }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"densecap: strongly dense networks as computational kernels"};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_config("--config", "", "INI/TOML file supplying any flag; command-line flags win");
  int jobs = 0;
  std::uint64_t seed = 0;
  app.add_option("--jobs", jobs, "worker thread cap (default: all cores)");
  app.add_option("--seed", seed, "seed for every random choice")->capture_default_str();

  // generate
  auto* gen = app.add_subcommand("generate", "write a random B-strongly dense network");
  int g_L = 2, g_d0 = 1, g_dL = 1, g_d = 4;
  double g_B = 4.0;
  std::string g_out;
  gen->add_option("--L", g_L)->capture_default_str();
  gen->add_option("--d0", g_d0)->capture_default_str();
  gen->add_option("--dL", g_dL)->capture_default_str();
  gen->add_option("--d", g_d)->capture_default_str();
  gen->add_option("--B", g_B)->capture_default_str();
  gen->add_option("--out", g_out, "output file (default stdout)");

  // induce
  auto* induce = app.add_subcommand("induce", "network file -> computational kernel file");
  std::string i_net, i_out, i_input, i_signal_out;
  induce->add_option("--net", i_net, "network file")->required();
  induce->add_option("--out", i_out, "kernel file (default stdout)");
  induce->add_option("--input", i_input, "comma-separated input x to induce a signal from");
  induce->add_option("--signal-out", i_signal_out, "signal file for --input");

  // validate
  auto* validate = app.add_subcommand("validate", "check the four structural kernel conditions");
  std::string v_kernel;
  double v_tol = 0.0;
  validate->add_option("--kernel", v_kernel, "kernel file")->required();
  validate->add_option("--tol", v_tol, "tolerance for floating comparisons")->capture_default_str();

  // equiv-check
  auto* equiv = app.add_subcommand("equiv-check", "network vs. kernel MPNN vs. graph MPNN");
  std::string e_net, e_input;
  int e_random = 0;
  double e_tol = 1e-9;
  equiv->add_option("--net", e_net, "network file");
  equiv->add_option("--input", e_input, "comma-separated input (default: random)");
  equiv->add_option("--random", e_random, "check N random networks instead");
  equiv->add_option("--tol", e_tol)->capture_default_str();

  // cutnorm
  auto* cut = app.add_subcommand("cutnorm", "cut norm of a kernel, difference or signal");
  std::string c_kernel, c_against, c_signal, c_align = "identity";
  bool c_exact = false, c_heuristic = false;
  CutOptions c_opts;
  cut->add_option("--kernel", c_kernel, "kernel file");
  cut->add_option("--against", c_against, "second kernel: bound the computational cut distance");
  cut->add_option("--signal", c_signal, "signal file");
  auto* exact_flag = cut->add_flag("--exact", c_exact, "exact enumeration (default: certified)");
  cut->add_flag("--heuristic", c_heuristic, "alternating-maximization lower bound")
      ->excludes(exact_flag);
  cut->add_option("--restarts", c_opts.restarts)->capture_default_str();
  cut->add_option("--cap", c_opts.cap, "max exact dimension after reduction")
      ->capture_default_str();
  cut->add_option("--align", c_align, "identity | greedy | exhaustive (with --against)")
      ->capture_default_str();

  // compress
  auto* comp = app.add_subcommand("compress", "compress a network to hidden width d'");
  std::string k_net, k_out, k_report, k_oracle = "certified";
  CompressOptions k_opts;
  comp->add_option("--net", k_net, "network file")->required();
  auto* target = comp->add_option("--target-d", k_opts.target_d, "target hidden width d'");
  comp->add_option("--epsilon", k_opts.epsilon, "cut-norm accuracy; chooses d'")
      ->excludes(target);
  comp->add_option("--oracle", k_oracle, "exact | heuristic | certified")->capture_default_str();
  comp->add_option("--max-iterations", k_opts.max_iterations)->capture_default_str();
  comp->add_option("--samples", k_opts.samples, "inputs for the empirical gap")
      ->capture_default_str();
  comp->add_option("--out", k_out, "compressed network file");
  comp->add_option("--report", k_report, "JSON report file (default stdout)");

  // bounds
  auto* bounds = app.add_subcommand("bounds", "evaluate a bound formula exactly");
  std::string b_formula, b_B = "4", b_eps = "1", b_c = "1";
  int b_L = 2;
  std::int64_t b_d0 = 1, b_dL = 1;
  bounds->add_option("formula", b_formula,
                     "lipschitz | wrl | compression | vc | d0-threshold | non-universality")
      ->required();
  bounds->add_option("--B", b_B)->capture_default_str();
  bounds->add_option("--L", b_L)->capture_default_str();
  bounds->add_option("--d0", b_d0)->capture_default_str();
  bounds->add_option("--dL", b_dL)->capture_default_str();
  bounds->add_option("--epsilon", b_eps)->capture_default_str();
  bounds->add_option("--c", b_c, "VC constant")->capture_default_str();

  // train
  auto* tr = app.add_subcommand("train", "train a one-hidden-layer ReLU network");
  TrainFlags t_flags;
  t_flags.add(tr, true);

  // sweep
  auto* sw = app.add_subcommand("sweep", "train over widths x modes x seeds, write CSV");
  TrainFlags s_flags;
  s_flags.add(sw, false);
  std::string s_widths = "16,128,512", s_modes = "standard,dense", s_seeds = "0,1", s_out;
  sw->add_option("--widths", s_widths)->capture_default_str();
  sw->add_option("--modes", s_modes)->capture_default_str();
  sw->add_option("--seeds", s_seeds)->capture_default_str();
  sw->add_option("--out", s_out, "CSV file (default stdout)");

  // verify
  auto* ver = app.add_subcommand("verify", "run every module's invariant suite");
  bool quick = false;
  ver->add_flag("--quick", quick, "smaller instance counts");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    std::cerr << app.help();
    return 2;
  }

  try {
    if (jobs > 0) set_jobs(jobs);
    if (*gen) {
      std::mt19937_64 rng(seed);
      write_or_print(g_out, serialize(random_network(g_L, g_d0, g_dL, g_d, g_B, rng)));
    } else if (*induce) {
      const DenseNetwork net = load_network(i_net);
      const ComputationalKernel k = induce_kernel(net);
      write_or_print(i_out, serialize_kernel(k));
      if (!i_input.empty()) {
        const StepSignal f = induce_input_signal(parse_vector(i_input), k.layers());
        write_or_print(i_signal_out, serialize_signal(f));
      }
    } else if (*validate) {
      const ComputationalKernel k = load_kernel(v_kernel);
      const ValidationReport r = validate_computational(k.kernel(), k.layers(), k.bound(), v_tol);
      std::cout << r.summary() << "\n";
      if (!r.ok()) throw CheckFailed(std::to_string(r.failures()) + " condition(s) failed");
    } else if (*equiv) {
      std::mt19937_64 rng(seed);
      std::uniform_real_distribution<double> unit(0.0, 1.0);
      std::vector<DenseNetwork> nets;
      if (e_random > 0) {
        std::uniform_int_distribution<int> depth(2, 4), cells(1, 3), mult(1, 8);
        for (int t = 0; t < e_random; ++t) {
          const int L = depth(rng), d0 = cells(rng), dL = cells(rng);
          const int M = std::lcm(d0, dL);
          const int d = M * std::max(1, std::min(mult(rng), 24 / M));
          std::uniform_real_distribution<double> b(L + 2.0, 10.0);
          nets.push_back(random_network(L, d0, dL, d, b(rng), rng));
        }
      } else if (!e_net.empty()) {
        nets.push_back(load_network(e_net));
      } else {
        throw Error(ErrorKind::parameter, "equiv-check needs --net or --random N");
      }
      double worst = 0.0, bias = 0.0;
      for (const DenseNetwork& net : nets) {
        Eigen::VectorXd x = e_input.empty() || e_random > 0
                                ? Eigen::VectorXd::NullaryExpr(net.input_dim, [&] { return unit(rng); })
                                : parse_vector(e_input);
        const EquivalenceReport r = check_equivalence(net, x, e_tol);
        worst = std::max(worst, r.max_discrepancy);
        bias = std::max(bias, r.bias_deviation);
        if (nets.size() == 1) {
          std::cout << "network: " << vector_text(r.network) << "\n"
                    << "kernel:  " << vector_text(r.kernel) << "\n"
                    << "graph:   " << vector_text(r.graph) << "\n";
        }
      }
      std::cout << "instances: " << nets.size() << "\n"
                << "max discrepancy: " << textio::format_real(worst) << "\n"
                << "max bias deviation: " << textio::format_real(bias) << "\n";
      if (worst > e_tol) throw CheckFailed("discrepancy above tolerance " + textio::format_real(e_tol));
    } else if (*cut) {
      c_opts.seed = seed;
      if (!c_signal.empty()) {
        const StepSignal f = deserialize_signal(textio::read_file(c_signal));
        std::cout << "signal cut norm: " << textio::format_real(signal_cut_norm(f).value) << "\n";
      } else if (!c_kernel.empty() && !c_against.empty()) {
        const ComputationalKernel k = load_kernel(c_kernel);
        const ComputationalKernel j = load_kernel(c_against);
        const CutOracle oracle = c_exact       ? CutOracle::exact
                                 : c_heuristic ? CutOracle::heuristic
                                               : CutOracle::certified;
        const DistanceEstimate d =
            comp_cut_distance_upper(k, j, parse_align_mode(c_align), oracle, c_opts);
        std::cout << "computational cut distance <= " << textio::format_real(d.upper) << "\n"
                  << "relabelings explored: " << d.explored << "\n"
                  << "exact cut norms: " << (d.exact_cut_norms ? "yes" : "no") << "\n";
      } else if (!c_kernel.empty()) {
        const ComputationalKernel k = load_kernel(c_kernel);
        const MeasuredMatrix m = MeasuredMatrix::of(k.kernel());
        if (c_heuristic) {
          std::cout << "cut norm >= "
                    << textio::format_real(kernel_cut_norm_lower(m, c_opts.restarts, seed).value)
                    << "\n";
        } else {
          const CutEstimate e =
              kernel_cut_norm(m, c_exact ? CutOracle::exact : CutOracle::certified, c_opts);
          if (e.exact) std::cout << "cut norm: " << textio::format_real(e.upper) << "\n";
          else
            std::cout << "cut norm in [" << textio::format_real(e.lower) << ", "
                      << textio::format_real(e.upper) << "]\n";
        }
      } else {
        throw Error(ErrorKind::parameter, "cutnorm needs --kernel or --signal");
      }
    } else if (*comp) {
      k_opts.oracle = parse_cut_oracle(k_oracle);
      k_opts.seed = seed;
      k_opts.cut.seed = seed;
      const CompressionResult r = compress_network(load_network(k_net), k_opts);
      if (!k_out.empty()) save_network(r.network, k_out);
      write_or_print(k_report, report_json(r.report) + "\n");
      if (!r.report.bound_holds) throw CheckFailed("empirical gap exceeds the implied bound");
    } else if (*bounds) {
      const Rational B = parse_rational(b_B), eps = parse_rational(b_eps), c = parse_rational(b_c);
      if (b_formula == "lipschitz") print_bound(lipschitz_constant(B, b_L));
      else if (b_formula == "wrl") print_bound(wrl_hidden_dim(eps, b_L, b_d0, b_dL));
      else if (b_formula == "compression")
        print_bound(compression_hidden_dim(eps, B, b_L, b_d0, b_dL));
      else if (b_formula == "vc") print_bound(vc_lower_bound(eps, b_d0, c));
      else if (b_formula == "d0-threshold")
        print_bound(d0_threshold(B, b_L, static_cast<int>(b_dL), c));
      else if (b_formula == "non-universality") {
        const NonUniversalityReport r = non_universality_check(B, b_L, static_cast<int>(b_dL), b_d0, c);
        std::cout << "log2 W~: " << r.log2_w_tilde.str(20) << "\n"
                  << "log2 VC lower bound: " << r.log2_lower_bound.str(20) << "\n"
                  << "margin: " << r.margin.str(20) << "\n"
                  << "gap holds: " << (r.gap_holds ? "yes" : "no") << "\n";
      } else {
        std::cerr << "unknown formula '" << b_formula << "'\n" << bounds->help();
        return 2;
      }
    } else if (*tr) {
      const TrainConfig config = t_flags.resolve(seed);
      const RunMetrics m = train(config);
      for (std::size_t e = 0; e < m.epoch_loss.size(); ++e)
        std::printf("epoch %zu loss %.6f train_acc %.2f\n", e + 1, m.epoch_loss[e],
                    m.epoch_train_acc[e]);
      std::printf("final train_acc %.2f test_acc %.2f loss %.6f wall_s %.2f seed %llu\n",
                  m.final_train_acc, m.final_test_acc, m.final_loss, m.wall_seconds,
                  static_cast<unsigned long long>(m.seed));
    } else if (*sw) {
      std::vector<int> widths;
      for (double w : parse_list(s_widths)) widths.push_back(static_cast<int>(w));
      std::vector<TrainMode> modes;
      std::stringstream mode_list(s_modes);
      for (std::string item; std::getline(mode_list, item, ',');) modes.push_back(parse_train_mode(item));
      std::vector<std::uint64_t> seeds;
      for (double s : parse_list(s_seeds)) seeds.push_back(static_cast<std::uint64_t>(s));
      const auto rows = sweep(widths, modes, seeds, s_flags.resolve(seed));
      write_or_print(s_out, sweep_csv(rows));
      std::cerr << aggregate_table(aggregate(rows));
    } else if (*ver) {
      const VerifyReport r = run_verify(quick, seed);
      std::cout << r.matrix();
      if (!r.ok()) throw CheckFailed("invariant suite has failures");
      std::cout << "all checks passed\n";
    }
  } catch (const Error& e) {
    std::cerr << "error [" << to_string(e.kind()) << "]: " << e.what() << "\n";
    return 1;
  } catch (const CheckFailed& e) {
    std::cerr << "check failed: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
