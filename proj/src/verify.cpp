#include "densecap/verify.hpp"

#include <chrono>
#include <cmath>
#include <functional>
#include <random>
#include <sstream>

#include "densecap/bounds.hpp"
#include "densecap/compress.hpp"
#include "densecap/computational.hpp"
#include "densecap/cutnorm.hpp"
#include "densecap/experiments.hpp"
#include "densecap/network.hpp"
#include "densecap/propagation.hpp"
#include "densecap/regularity.hpp"

namespace densecap {

bool VerifyReport::ok() const {
  for (const auto& c : checks)
    if (!c.pass) return false;
  return true;
}

std::string VerifyReport::matrix() const {
  std::ostringstream out;
  char line[256];
  std::snprintf(line, sizeof line, "%-12s %-44s %-6s %8s  %s\n", "module", "property", "result",
                "seconds", "detail");
  out << line;
  for (const auto& c : checks) {
    std::snprintf(line, sizeof line, "%-12s %-44s %-6s %8.3f  %s\n", c.module.c_str(),
                  c.property.c_str(), c.pass ? "PASS" : "FAIL", c.seconds, c.detail.c_str());
    out << line;
  }
  return out.str();
}

namespace {

/// Outcome of a single property: pass flag plus a short detail string.
struct Outcome {
  bool pass;
  std::string detail;
};

std::string num(double v) {
  std::ostringstream s;
  s.precision(3);
  s << v;
  return s.str();
}

DenseNetwork sample_network(std::mt19937_64& rng, int max_d) {
  std::uniform_int_distribution<int> depth(2, 4);
  const int L = depth(rng);
  const int divisors[] = {1, 2, 3};
  std::uniform_int_distribution<int> pick(0, 2);
  const int d0 = divisors[pick(rng)];
  const int dL = divisors[pick(rng)];
  const int M = std::lcm(d0, dL);
  std::uniform_int_distribution<int> mult(1, std::max(1, max_d / M));
  const int d = M * mult(rng);
  std::uniform_real_distribution<double> bound(L + 2.0, 10.0);
  return random_network(L, d0, dL, d, bound(rng), rng);
}

Eigen::VectorXd uniform_input(int d0, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  return Eigen::VectorXd::NullaryExpr(d0, [&] { return u(rng); });
}

/// Random step kernel on a random partition with at most `max_parts` parts.
StepKernel sample_kernel(std::mt19937_64& rng, int max_parts) {
  std::uniform_int_distribution<int> parts(1, max_parts);
  std::uniform_int_distribution<std::int64_t> weight(1, 6);
  std::vector<std::int64_t> w(static_cast<std::size_t>(parts(rng)));
  for (auto& x : w) x = weight(rng);
  const Partition p = Partition::from_weights(w);
  std::uniform_real_distribution<double> c(-1.0, 1.0);
  const auto n = static_cast<Eigen::Index>(p.size());
  return StepKernel(p, Eigen::MatrixXd::NullaryExpr(n, n, [&] { return c(rng); }));
}

double brute_force_cut(const MeasuredMatrix& m) {
  const auto r = m.values.rows();
  const auto c = m.values.cols();
  double best = 0.0;
  for (std::uint64_t s = 0; s < (std::uint64_t{1} << r); ++s)
    for (std::uint64_t t = 0; t < (std::uint64_t{1} << c); ++t) {
      double total = 0.0;
      for (Eigen::Index i = 0; i < r; ++i)
        if ((s >> i) & 1U)
          for (Eigen::Index j = 0; j < c; ++j)
            if ((t >> j) & 1U) total += m.row_measure(i) * m.values(i, j) * m.col_measure(j);
      best = std::max(best, std::abs(total));
    }
  return best;
}

}  // namespace

VerifyReport run_verify(bool quick, std::uint64_t seed) {
  VerifyReport report;
  const auto run = [&](const std::string& module, const std::string& property,
                       const std::function<Outcome()>& body) {
    const auto start = std::chrono::steady_clock::now();
    VerifyCheck check{module, property};
    try {
      const Outcome o = body();
      check.pass = o.pass;
      check.detail = o.detail;
    } catch (const std::exception& e) {
      check.pass = false;
      check.detail = std::string("exception: ") + e.what();
    }
    check.seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    report.checks.push_back(std::move(check));
  };
  const int nets = quick ? 20 : 200;
  const int kernels = quick ? 20 : 100;

  run("net-core", "serialize round trip is exact", [&] {
    std::mt19937_64 rng(seed);
    for (int t = 0; t < nets; ++t) {
      const DenseNetwork net = sample_network(rng, 12);
      const DenseNetwork back = deserialize(serialize(net));
      for (int l = 0; l < net.depth; ++l)
        if (back.weights[l] != net.weights[l] || back.biases[l] != net.biases[l])
          return Outcome{false, "instance " + std::to_string(t)};
    }
    return Outcome{true, std::to_string(nets) + " networks"};
  });
  run("net-core", "param_count = stored entries + d^2", [&] {
    std::mt19937_64 rng(seed + 1);
    for (int t = 0; t < nets; ++t) {
      const DenseNetwork net = sample_network(rng, 12);
      const auto d = static_cast<std::uint64_t>(net.hidden_dim);
      if (count_parameters(net) + d * d !=
          param_count(net.depth, net.input_dim, net.output_dim, net.hidden_dim))
        return Outcome{false, "instance " + std::to_string(t)};
    }
    return Outcome{true, ""};
  });
  run("kernelspace", "induced kernel passes conditions 1-4", [&] {
    std::mt19937_64 rng(seed + 2);
    for (int t = 0; t < nets; ++t) {
      const DenseNetwork net = sample_network(rng, 12);
      const ComputationalKernel k = induce_kernel(net);
      const ValidationReport v = validate_computational(k.kernel(), k.layers(), net.bound);
      if (!v.ok()) return Outcome{false, v.summary()};
    }
    return Outcome{true, ""};
  });
  run("kernelspace", "extract(induce(net)) == net exactly", [&] {
    std::mt19937_64 rng(seed + 3);
    for (int t = 0; t < nets; ++t) {
      const DenseNetwork net = sample_network(rng, 12);
      const DenseNetwork back = extract_network(induce_kernel(net));
      for (int l = 0; l < net.depth; ++l)
        if (back.weights[l] != net.weights[l] || back.biases[l] != net.biases[l])
          return Outcome{false, "instance " + std::to_string(t) + " layer " + std::to_string(l)};
    }
    return Outcome{true, ""};
  });
  run("kernelspace", "graph and kernel induction agree", [&] {
    std::mt19937_64 rng(seed + 4);
    for (int t = 0; t < nets; ++t) {
      const DenseNetwork net = sample_network(rng, 12);
      const StepKernel from_graph = graph_to_kernel(induce_graph(net), net.bound);
      const double gap =
          (from_graph.coeffs() - induce_kernel(net).kernel().coeffs()).cwiseAbs().maxCoeff();
      if (gap != 0.0) return Outcome{false, "gap " + num(gap)};
    }
    return Outcome{true, ""};
  });
  run("propagation", "network = kernel MPNN = graph MPNN", [&] {
    std::mt19937_64 rng(seed + 5);
    double worst = 0.0;
    for (int t = 0; t < nets; ++t) {
      const DenseNetwork net = sample_network(rng, 24);
      worst = std::max(worst, check_equivalence(net, uniform_input(net.input_dim, rng)).max_discrepancy);
    }
    return Outcome{worst <= 1e-9, "max discrepancy " + num(worst)};
  });
  run("propagation", "bias part stays at 1", [&] {
    std::mt19937_64 rng(seed + 5);
    double worst = 0.0;
    for (int t = 0; t < nets; ++t) {
      const DenseNetwork net = sample_network(rng, 24);
      worst = std::max(worst, check_equivalence(net, uniform_input(net.input_dim, rng)).bias_deviation);
    }
    return Outcome{worst <= 1e-12, "max deviation " + num(worst)};
  });
  run("cutnorm", "exact equals 2^n x 2^n enumeration", [&] {
    std::mt19937_64 rng(seed + 6);
    double worst = 0.0;
    for (int t = 0; t < kernels; ++t) {
      const MeasuredMatrix m = MeasuredMatrix::of(sample_kernel(rng, quick ? 7 : 10));
      worst = std::max(worst, std::abs(kernel_cut_norm_exact(m).value - brute_force_cut(m)));
    }
    return Outcome{worst <= 1e-12, "max error " + num(worst)};
  });
  run("cutnorm", "heuristic <= exact <= certified upper", [&] {
    std::mt19937_64 rng(seed + 7);
    for (int t = 0; t < kernels; ++t) {
      const MeasuredMatrix m = MeasuredMatrix::of(sample_kernel(rng, 10));
      const double exact = kernel_cut_norm_exact(m).value;
      const double lower = kernel_cut_norm_lower(m, 8, seed).value;
      const double upper = kernel_cut_norm_upper(m);
      if (lower > exact + 1e-12 || exact > upper + 1e-12)
        return Outcome{false, num(lower) + " / " + num(exact) + " / " + num(upper)};
    }
    return Outcome{true, ""};
  });
  run("cutnorm", "signal sandwich |f|_1/2 <= |f|_cut <= |f|_1", [&] {
    std::mt19937_64 rng(seed + 8);
    std::uniform_real_distribution<double> v(-1.0, 1.0);
    for (int t = 0; t < (quick ? 100 : 1000); ++t) {
      const StepKernel k = sample_kernel(rng, 12);
      const auto n = static_cast<Eigen::Index>(k.size());
      const StepSignal f(k.partition(), Eigen::VectorXd::NullaryExpr(n, [&] { return v(rng); }));
      const double cut = signal_cut_norm(f).value;
      const double l1 = l1_norm(f);
      if (cut < 0.5 * l1 - 1e-12 || cut > l1 + 1e-12)
        return Outcome{false, "instance " + std::to_string(t)};
    }
    return Outcome{true, ""};
  });
  run("regularity", "energy non-decreasing, iterations within cap", [&] {
    std::mt19937_64 rng(seed + 9);
    for (int t = 0; t < (quick ? 4 : 20); ++t) {
      const StepKernel k = sample_kernel(rng, 16);
      const RegularityTrace tr = weak_regularity(k, 0.5);
      for (std::size_t i = 1; i < tr.steps.size(); ++i)
        if (tr.steps[i].energy < tr.steps[i - 1].energy - 1e-12)
          return Outcome{false, "energy decreased at step " + std::to_string(i)};
      if (static_cast<long long>(tr.steps.size()) > tr.iteration_cap + 1)
        return Outcome{false, "iteration cap exceeded"};
      if (tr.termination == Termination::below_epsilon && tr.final_upper >= 0.5)
        return Outcome{false, "certificate above epsilon"};
    }
    return Outcome{true, ""};
  });
  run("regularity", "equitize: equal parts, h <= |P|", [&] {
    std::mt19937_64 rng(seed + 10);
    for (int t = 0; t < kernels; ++t) {
      const Partition p = sample_kernel(rng, 6).partition();
      const int m = static_cast<int>(p.size()) + 1 + static_cast<int>(rng() % 9);
      const EquitizeResult e = equitize(p, m);
      if (!e.partition.is_equipartition() || static_cast<int>(e.partition.size()) != m ||
          e.h > static_cast<int>(p.size()))
        return Outcome{false, "instance " + std::to_string(t)};
    }
    return Outcome{true, ""};
  });
  run("bounds", "calculator reference values", [&] {
    const bool a = lipschitz_constant(4, 2).exact_text() == "64";
    const bool b = wrl_hidden_dim(4, 2, 1, 1).exact_text() == "16";
    const auto c = compression_hidden_dim(1, 4, 2, 1, 1);
    const bool cc = c.log2_exact && *c.log2_exact == 2097164;
    const bool d = d0_threshold(4, 2, 1, 1).exact_text() == "18253611637";
    return Outcome{a && b && cc && d, std::string(a ? "" : "lipschitz ") + (b ? "" : "wrl ") +
                                          (cc ? "" : "compression ") + (d ? "" : "d0_threshold")};
  });
  run("bounds", "spike function hits its labels", [&] {
    const SpikeDataset s = make_spike_dataset(2, 4, seed, 16);
    for (std::size_t m = 0; m < s.target.grid_size(); ++m)
      if (s.target(s.target.center(m)) != s.target.labels()[m])
        return Outcome{false, "grid point " + std::to_string(m)};
    return Outcome{true, ""};
  });
  run("compress", "compressed net valid and within bound", [&] {
    std::mt19937_64 rng(seed + 11);
    const DenseNetwork net = random_network(3, 2, 2, quick ? 48 : 120, 5.0, rng);
    CompressOptions o;
    o.target_d = quick ? 8 : 12;
    o.samples = quick ? 1000 : 10000;
    o.seed = seed;
    const CompressionResult r = compress_network(net, o);
    const bool pass = r.report.bound_holds && r.report.final_validation.ok() &&
                      r.report.projected_validation.ok() && r.report.roundtrip_exact;
    return Outcome{pass, "gap " + num(r.report.empirical_max_gap) + " <= " +
                             num(r.report.implied_bound)};
  });
  run("experiments", "backprop matches finite differences", [&] {
    const GradientCheck a = gradient_check(8, seed, true);
    const GradientCheck b = gradient_check(8, seed, false);
    const double worst = std::max(a.relative_error, b.relative_error);
    return Outcome{worst <= 1e-5, "relative error " + num(worst)};
  });
  run("experiments", "spike training deterministic, dense clamp holds", [&] {
    TrainConfig c;
    c.width = 16;
    c.epochs = 2;
    c.mode = TrainMode::dense;
    c.seed = seed;
    c.dataset = parse_dataset_spec("spike:2,4,512");
    const RunMetrics a = train(c);
    const RunMetrics b = train(c);
    const bool same = a.epoch_loss == b.epoch_loss && a.final_test_acc == b.final_test_acc;
    const bool clamped = a.max_scaled_weight <= c.clamp_numerator + 1e-12;
    return Outcome{same && clamped, std::string(same ? "" : "non-deterministic ") +
                                        (clamped ? "" : "clamp violated")};
  });
  return report;
}

}  // namespace densecap
