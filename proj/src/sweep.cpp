#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <tuple>

#include "densecap/error.hpp"
#include "densecap/experiments.hpp"
#include "densecap/parallel.hpp"
#include "densecap/textio.hpp"

namespace densecap {

std::vector<SweepRow> sweep(const std::vector<int>& widths, const std::vector<TrainMode>& modes,
                            const std::vector<std::uint64_t>& seeds, const TrainConfig& base,
                            const Dataset& train_set, const Dataset& test_set) {
  std::vector<SweepRow> rows;
  for (int w : widths)
    for (TrainMode m : modes)
      for (std::uint64_t s : seeds) rows.push_back({w, m, s});
  std::sort(rows.begin(), rows.end(), [](const SweepRow& a, const SweepRow& b) {
    return std::tuple(a.width, a.mode, a.seed) < std::tuple(b.width, b.mode, b.seed);
  });
  parallel_for(rows.size(), [&](std::size_t i) {
    SweepRow& row = rows[i];
    TrainConfig config = base;
    config.width = row.width;
    config.mode = row.mode;
    config.seed = row.seed;
    try {
      const RunMetrics m = train_on(config, train_set, test_set);
      row.train_acc = m.final_train_acc;
      row.test_acc = m.final_test_acc;
      row.final_loss = m.final_loss;
      row.wall_s = m.wall_seconds;
    } catch (const std::exception& e) {
      const double nan = std::numeric_limits<double>::quiet_NaN();
      row.train_acc = row.test_acc = row.final_loss = nan;
      row.status = std::string("error: ") + e.what();
    }
  });
  return rows;
}

std::vector<SweepRow> sweep(const std::vector<int>& widths, const std::vector<TrainMode>& modes,
                            const std::vector<std::uint64_t>& seeds, const TrainConfig& base) {
  const DatasetSpec& spec = base.dataset;
  if (spec.kind == DatasetKind::spike)
    throw Error(ErrorKind::parameter, "sweep supports the mnist datasets only");
  MnistData data = load_mnist(mnist_directory(spec.data_dir));
  // one fixed subset for the whole sweep so that cells differ only by model seed
  if (spec.kind == DatasetKind::mnist_subset)
    data.train = subset(data.train, spec.subset_size, base.seed);
  return sweep(widths, modes, seeds, base, data.train, data.test);
}

std::vector<SweepCell> aggregate(const std::vector<SweepRow>& rows) {
  std::vector<SweepCell> cells;
  for (const SweepRow& r : rows) {
    auto it = std::find_if(cells.begin(), cells.end(), [&](const SweepCell& c) {
      return c.width == r.width && c.mode == r.mode;
    });
    if (it == cells.end()) {
      cells.push_back({r.width, r.mode});
      it = cells.end() - 1;
    }
    if (r.status != "ok") continue;
    ++it->runs;
    it->train_mean += r.train_acc;
    it->test_mean += r.test_acc;
  }
  for (SweepCell& c : cells) {
    if (c.runs == 0) continue;
    c.train_mean /= c.runs;
    c.test_mean /= c.runs;
    for (const SweepRow& r : rows) {
      if (r.width != c.width || r.mode != c.mode || r.status != "ok") continue;
      c.train_std += (r.train_acc - c.train_mean) * (r.train_acc - c.train_mean);
      c.test_std += (r.test_acc - c.test_mean) * (r.test_acc - c.test_mean);
    }
    const double dof = c.runs > 1 ? c.runs - 1 : 1;
    c.train_std = std::sqrt(c.train_std / dof);
    c.test_std = std::sqrt(c.test_std / dof);
  }
  return cells;
}

std::string sweep_csv(const std::vector<SweepRow>& rows) {
  std::ostringstream out;
  out << "width,mode,seed,train_acc,test_acc,final_loss,wall_s,status\n";
  for (const SweepRow& r : rows) {
    std::string status = r.status;
    std::replace(status.begin(), status.end(), ',', ';');
    std::replace(status.begin(), status.end(), '\n', ' ');
    out << r.width << ',' << to_string(r.mode) << ',' << r.seed << ','
        << textio::format_real(r.train_acc) << ',' << textio::format_real(r.test_acc) << ','
        << textio::format_real(r.final_loss) << ',' << textio::format_real(r.wall_s) << ','
        << status << '\n';
  }
  return out.str();
}

std::string aggregate_table(const std::vector<SweepCell>& cells) {
  std::ostringstream out;
  out << "width  mode      runs  train_acc        test_acc\n";
  char line[128];
  for (const SweepCell& c : cells) {
    std::snprintf(line, sizeof line, "%-6d %-9s %-5d %6.2f +- %-6.2f %6.2f +- %-6.2f\n", c.width,
                  to_string(c.mode), c.runs, c.train_mean, c.train_std, c.test_mean, c.test_std);
    out << line;
  }
  return out.str();
}

}  // namespace densecap
