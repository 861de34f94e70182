#include "densecap/compress.hpp"

#include <chrono>
#include <cmath>
#include <map>
#include <random>
#include <tuple>

#include <nlohmann/json.hpp>

#include "densecap/bounds.hpp"
#include "densecap/error.hpp"
#include "densecap/textio.hpp"

namespace densecap {

namespace {

class StageClock {
 public:
  explicit StageClock(CompressionReport& report) : report_(report), start_(now()) {}
  void lap(const std::string& stage) {
    const auto t = now();
    report_.stage_seconds.emplace_back(stage, std::chrono::duration<double>(t - start_).count());
    start_ = t;
  }

 private:
  static std::chrono::steady_clock::time_point now() { return std::chrono::steady_clock::now(); }
  CompressionReport& report_;
  std::chrono::steady_clock::time_point start_;
};

/// Classes present in one layer, in order of first appearance, as lists of
/// unit segments on the I_n grid.
std::vector<std::vector<Segment>> layer_classes(const std::vector<int>& classes,
                                                const LayerStructure& s, int layer) {
  std::map<int, std::size_t> slot;
  std::vector<std::vector<Segment>> out;
  for (int p = s.layer_begin(layer); p < s.layer_end(layer); ++p) {
    auto [it, inserted] = slot.emplace(classes[static_cast<std::size_t>(p)], out.size());
    if (inserted) out.emplace_back();
    out[it->second].push_back({p, p + 1});
  }
  return out;
}

int count_hidden_max(const std::vector<int>& classes, const LayerStructure& s) {
  int worst = 1;
  for (int l = 1; l < s.L; ++l)
    worst = std::max(worst, static_cast<int>(layer_classes(classes, s, l).size()));
  return worst;
}

}  // namespace

CompressionResult compress_network(const DenseNetwork& net, const CompressOptions& opt) {
  validate_network(net);
  const bool target_mode = opt.target_d > 0;
  if (target_mode == (opt.epsilon > 0))
    throw Error(ErrorKind::parameter, "set exactly one of target_d and epsilon");
  CompressionReport report;
  StageClock clock(report);

  const ComputationalKernel k = induce_kernel(net);
  const LayerStructure& s = k.layers();
  const int n = s.n();
  const int M = s.M();
  report.L = s.L;
  report.d0 = s.d0;
  report.dL = s.dL;
  report.d = s.d;
  report.B = net.bound;
  report.mode = target_mode ? "target-d" : "epsilon";
  report.epsilon = opt.epsilon;
  if (target_mode && opt.target_d % M != 0)
    throw Error(ErrorKind::parameter, "d' = " + std::to_string(opt.target_d) +
                                          " is not divisible by M = lcm(d0, dL) = " +
                                          std::to_string(M));
  clock.lap("induce");

  // refinement of the parts of I_n
  std::vector<int> classes(static_cast<std::size_t>(n));
  if (target_mode && opt.target_d >= s.d) {
    std::iota(classes.begin(), classes.end(), 0);
    report.termination = "skipped (width already within budget)";
  } else if (!target_mode && opt.epsilon > 2.0) {
    classes = layer_respecting_classes(s);
    report.termination = "skipped (every cut norm of K - K_P is at most 2 < epsilon)";
  } else {
    RegularityOptions ro;
    ro.oracle = opt.oracle;
    ro.cut = opt.cut;
    ro.initial_classes = layer_respecting_classes(s);
    double eps = opt.epsilon;
    if (target_mode) {
      eps = 1e-6;
      ro.max_iterations = opt.max_iterations;
      const int budget = opt.target_d;
      ro.guard = [&s, budget](const std::vector<int>& cls) {
        return count_hidden_max(merge_cells(cls, s), s) <= budget;
      };
    } else {
      const auto cap = static_cast<long long>(std::ceil(4.0 / (eps * eps)));
      ro.max_iterations = opt.max_iterations >= 0 ? std::min(cap, opt.max_iterations) : cap;
    }
    const RegularityTrace trace = weak_regularity(k.kernel(), eps, ro);
    report.steps = trace.steps;
    report.termination = to_string(trace.termination);
    classes = trace.classes;
  }
  classes = merge_cells(classes, s);
  for (int l = 0; l <= s.bias_layer(); ++l)
    report.classes_per_layer.push_back(static_cast<int>(layer_classes(classes, s, l).size()));
  clock.lap("refine");

  const int dp = target_mode ? opt.target_d
                             : std::max(M, (count_hidden_max(classes, s) + M - 1) / M * M);
  report.d_prime = dp;

  // equitize every layer into d' parts and collect the global partition E
  std::int64_t grid = 0;
  if (__builtin_mul_overflow(static_cast<std::int64_t>(n), static_cast<std::int64_t>(dp), &grid))
    throw Error(ErrorKind::capacity, "compression grid overflows 64 bits");
  std::vector<std::tuple<std::int64_t, std::int64_t, int>> atoms;
  for (int l = 0; l <= s.bias_layer(); ++l) {
    const Carving c = carve(layer_classes(classes, s, l), dp);
    report.remainders_per_layer.push_back(c.h);
    for (std::size_t chunk = 0; chunk < c.chunks.size(); ++chunk)
      for (const auto& seg : c.chunks[chunk])
        atoms.emplace_back(seg.begin, seg.end, l * dp + static_cast<int>(chunk));
  }
  std::sort(atoms.begin(), atoms.end());
  std::vector<std::int64_t> cuts{0};
  std::vector<int> labels;
  for (const auto& [a, b, label] : atoms) {
    cuts.push_back(b);
    labels.push_back(label);
  }
  const Partition e = Partition::from_atoms(grid, std::move(cuts), std::move(labels));
  clock.lap("equitize");

  // project, lay out as intervals, read off the network
  const StepKernel projected = project(k.kernel(), e);
  const std::vector<int> perm = sort_to_intervals(e);
  const StepKernel laid_out = apply_layout(projected, perm);
  const LayerStructure sp(s.L, s.d0, s.dL, dp);
  report.projected_validation = validate_computational(laid_out, sp, net.bound, 1e-9);
  DenseNetwork compressed = extract_network(laid_out, sp, net.bound, 1e-9);
  const ComputationalKernel kc = induce_kernel(compressed);
  report.final_validation = validate_computational(kc.kernel(), sp, net.bound, 0.0);
  {
    const DenseNetwork back = extract_network(kc);
    bool same = true;
    for (int l = 0; l < s.L; ++l)
      same = same && back.weights[l] == compressed.weights[l] && back.biases[l] == compressed.biases[l];
    report.roundtrip_exact = same;
  }
  clock.lap("project");

  // cut distance between K and the compressed kernel pulled back onto E
  const std::vector<int> position = inverse_permutation(perm);
  Eigen::MatrixXd pulled(static_cast<Eigen::Index>(e.size()), static_cast<Eigen::Index>(e.size()));
  for (std::size_t p = 0; p < e.size(); ++p)
    for (std::size_t q = 0; q < e.size(); ++q)
      pulled(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(q)) =
          kc.kernel().coeffs()(position[p], position[q]);
  const StepKernel pulled_kernel(e, std::move(pulled));
  const CutEstimate delta = kernel_cut_norm(MeasuredMatrix::difference(k.kernel(), pulled_kernel),
                                            CutOracle::certified, opt.cut);
  report.delta_lower = delta.lower;
  report.delta_upper = delta.upper;
  report.delta_exact = delta.exact;
  report.implied_bound = (s.L + 2.0) * s.dL * std::pow(2.0 * net.bound, s.L) * delta.upper;
  clock.lap("distance");

  // empirical sup-norm gap on uniform inputs
  std::mt19937_64 rng(opt.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  double gap = 0.0;
  Eigen::VectorXd x(s.d0);
  for (int t = 0; t < opt.samples; ++t) {
    for (int i = 0; i < s.d0; ++i) x(i) = unit(rng);
    gap = std::max(gap, (forward(net, x) - forward(compressed, x)).cwiseAbs().maxCoeff());
  }
  report.empirical_max_gap = gap;
  report.samples = opt.samples;
  report.seed = opt.seed;
  report.bound_holds = gap <= report.implied_bound;
  clock.lap("sample");

  const double eps_theory = target_mode ? report.implied_bound : opt.epsilon;
  if (eps_theory > 0.0) {
    const BoundValue dim = compression_hidden_dim(parse_rational(textio::format_real(eps_theory)),
                                                  parse_rational(textio::format_real(net.bound)),
                                                  s.L, s.d0, s.dL);
    report.theoretical_hidden_dim_log2 = dim.log2_text();
  } else {
    report.theoretical_hidden_dim_log2 = "n/a (zero distance)";
  }
  return {std::move(compressed), std::move(report)};
}

namespace {

nlohmann::ordered_json validation_json(const ValidationReport& v) {
  nlohmann::ordered_json out = nlohmann::ordered_json::array();
  for (const auto& c : v.conditions)
    out.push_back({{"condition", c.condition}, {"pass", c.pass}, {"detail", c.detail}});
  return out;
}

}  // namespace

std::string report_json(const CompressionReport& r) {
  nlohmann::ordered_json j;
  j["L"] = r.L;
  j["d0"] = r.d0;
  j["dL"] = r.dL;
  j["B"] = r.B;
  j["d"] = r.d;
  j["d_prime"] = r.d_prime;
  j["mode"] = r.mode;
  if (r.mode == "epsilon") j["epsilon"] = r.epsilon;
  nlohmann::ordered_json steps = nlohmann::ordered_json::array();
  for (const auto& st : r.steps)
    steps.push_back({{"iteration", st.iteration},
                     {"partition_size", st.partition_size},
                     {"energy", st.energy},
                     {"witness", st.witness},
                     {"cut_upper", st.cut_upper},
                     {"exact", st.exact}});
  j["refinement"] = {{"termination", r.termination},
                     {"steps", steps},
                     {"classes_per_layer", r.classes_per_layer},
                     {"remainders_per_layer", r.remainders_per_layer}};
  j["validation"] = {{"projected_tol_1e-9", validation_json(r.projected_validation)},
                     {"compressed_exact", validation_json(r.final_validation)},
                     {"roundtrip_exact", r.roundtrip_exact}};
  j["delta_hat"] = r.delta_upper;
  j["delta_lower"] = r.delta_lower;
  j["delta_exact"] = r.delta_exact;
  j["theoretical_bound"] = r.implied_bound;
  j["empirical_max_gap"] = r.empirical_max_gap;
  j["bound_holds"] = r.bound_holds;
  j["samples"] = r.samples;
  j["seed"] = r.seed;
  j["theoretical_hidden_dim_log2"] = r.theoretical_hidden_dim_log2;
  nlohmann::ordered_json stages;
  for (const auto& [name, secs] : r.stage_seconds) stages[name] = secs;
  j["stage_seconds"] = stages;
  return j.dump(2);
}

}  // namespace densecap
