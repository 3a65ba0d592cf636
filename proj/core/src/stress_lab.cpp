#include "pgig/stress_lab.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

#include "pgig/csv.hpp"
#include "pgig/error.hpp"

namespace pgig::stress {

namespace {

constexpr double kPlateauStart = 1.05;

double pearson(const std::vector<double>& a, const std::vector<double>& b) {
  const double n = static_cast<double>(a.size());
  double ma = 0.0, mb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ma += a[i];
    mb += b[i];
  }
  ma /= n;
  mb /= n;
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
  }
  if (saa == 0.0 || sbb == 0.0) return 0.0;
  return sab / std::sqrt(saa * sbb);
}

}  // namespace

void StressConfig::validate() const {
  if (!(z_step > 0.0)) throw ArgumentError("z_step must be > 0");
  if (!(z_end >= z_start)) throw ArgumentError("z_end must be >= z_start");
  if (!(noise_sigma >= 0.0)) throw ArgumentError("noise sigma must be >= 0");
  if (steps < 1) throw ArgumentError("steps must be >= 1");
}

std::vector<double> StressConfig::grid() const {
  validate();
  const auto count = static_cast<std::size_t>(std::llround((z_end - z_start) / z_step)) + 1;
  std::vector<double> z(count);
  for (std::size_t i = 0; i < count; ++i) z[i] = z_start + static_cast<double>(i) * z_step;
  return z;
}

std::vector<Tensor> StressDataset::inputs() const {
  std::vector<Tensor> out;
  out.reserve(points.size());
  for (const auto& p : points) out.push_back(p.input);
  return out;
}

Network build_stress_model() {
  std::vector<Layer> layers;
  layers.push_back(make_layer(Tensor::matrix(1, 2, {-1.0, 1.0}), Tensor::vector({1.0}), Activation::ReLU));
  layers.push_back(make_layer(Tensor::matrix(1, 1, {-1.0}), Tensor::vector({1.0}), Activation::Linear));
  return Network(std::move(layers), OutputMode::Raw);
}

StressDataset generate_dataset(const StressConfig& cfg, RandomSource& rng) {
  StressDataset data;
  for (double z : cfg.grid()) {
    const double eps = rng.normal(cfg.noise_mu, cfg.noise_sigma);
    StressPoint p;
    p.z = z;
    p.y = 1.0 - std::max(0.0, 1.0 - z);
    p.signal = Tensor::vector({z, 0.0});
    p.distractor = Tensor::vector({eps, eps});
    p.input = p.signal + p.distractor;
    data.points.push_back(std::move(p));
  }
  return data;
}

PatternSet analytic_patterns() {
  PatternSet set;
  set.layers.push_back({Tensor::matrix(1, 2, {-1.0, 0.0}), {true}, {0}});
  set.layers.push_back({Tensor::matrix(1, 1, {-1.0}), {true}, {0}});
  return set;
}

StressComparison run_stress_comparison(const StressConfig& cfg) {
  cfg.validate();
  RandomSource rng(cfg.random_seed);
  StressComparison cmp{cfg, generate_dataset(cfg, rng), {}};
  const Network net = attach_patterns(build_stress_model(), analytic_patterns());
  MethodConfig mc;
  mc.steps = cfg.steps;
  for (const auto& p : cmp.data.points) {
    cmp.rows.push_back({p.z, integrated_gradients(net, p.input, std::nullopt, mc).values,
                        pattern_attribution(net, p.input, std::nullopt, mc).values,
                        pgig(net, p.input, std::nullopt, mc).values});
  }
  return cmp;
}

std::vector<PropertyCheck> check_properties(const StressComparison& cmp) {
  std::vector<PropertyCheck> out;

  double pa_plateau = 0.0;
  double pgig_plateau_min = std::numeric_limits<double>::infinity();
  double pgig_distractor = 0.0;
  double ig2_sum = 0.0, pgig2_sum = 0.0;
  double pa1_mid = 0.0, pa2_mid = 0.0;
  std::vector<double> mid_x1, mid_pgig1;
  for (std::size_t i = 0; i < cmp.rows.size(); ++i) {
    const auto& r = cmp.rows[i];
    if (r.z > kPlateauStart) {
      pa_plateau = std::max(pa_plateau, std::abs(r.pa[0]));
      pgig_plateau_min = std::min(pgig_plateau_min, r.pgig[0]);
    }
    pgig_distractor = std::max(pgig_distractor, std::abs(r.pgig[1]));
    ig2_sum += std::abs(r.ig[1]);
    pgig2_sum += std::abs(r.pgig[1]);
    if (r.z > -1.0 && r.z < 1.0) {
      pa1_mid += std::abs(r.pa[0]);
      pa2_mid += std::abs(r.pa[1]);
      mid_x1.push_back(cmp.data.points[i].input[0]);
      mid_pgig1.push_back(r.pgig[0]);
    }
  }
  const double n = static_cast<double>(cmp.rows.size());

  out.push_back({"pa_plateau_starvation", pa_plateau, 1e-9, pa_plateau < 1e-9});
  out.push_back({"pgig_plateau_survival", pgig_plateau_min, 0.0, pgig_plateau_min > 0.0});
  out.push_back({"pgig_distractor_nullity", pgig_distractor, 0.0, pgig_distractor == 0.0});
  // IG leaks into the distractor dimension at least ten times more than PGIG.
  out.push_back({"ig_distractor_leakage", ig2_sum / n, 10.0 * pgig2_sum / n, ig2_sum > 10.0 * pgig2_sum});
  out.push_back({"pa_noise_rejection", pa2_mid, 0.05 * pa1_mid, pa2_mid < 0.05 * pa1_mid});
  // Below the kink every path point is active, so PGIG₁ follows x₁.
  const double corr = pearson(mid_x1, mid_pgig1);
  out.push_back({"pgig_tracks_input", corr, 0.99, corr > 0.99});
  return out;
}

std::vector<std::string> write_panels(const StressComparison& cmp, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  std::vector<std::string> files;
  auto emit = [&](const std::string& name, std::vector<std::string> header, auto&& row_of) {
    CsvTable t{std::move(header), {}};
    for (std::size_t i = 0; i < cmp.rows.size(); ++i) t.rows.push_back(row_of(i));
    write_csv(dir / name, t);
    files.push_back(name);
  };
  const auto& pts = cmp.data.points;
  emit("z.csv", {"index", "z"}, [&](std::size_t i) { return std::vector<double>{double(i), pts[i].z}; });
  emit("y.csv", {"z", "y"}, [&](std::size_t i) { return std::vector<double>{pts[i].z, pts[i].y}; });
  auto vec = [&](auto member) {
    return [&, member](std::size_t i) {
      const Tensor& t = pts[i].*member;
      return std::vector<double>{pts[i].z, t[0], t[1]};
    };
  };
  emit("signal.csv", {"z", "dim1", "dim2"}, vec(&StressPoint::signal));
  emit("distractor.csv", {"z", "dim1", "dim2"}, vec(&StressPoint::distractor));
  emit("X.csv", {"z", "dim1", "dim2"}, vec(&StressPoint::input));
  const auto& rows = cmp.rows;
  auto attr = [&](auto member, std::size_t feature) {
    return [&, member, feature](std::size_t i) {
      return std::vector<double>{rows[i].z, (rows[i].*member)[feature]};
    };
  };
  emit("IG_signal.csv", {"z", "value"}, attr(&StressRow::ig, 0));
  emit("IG_distractor.csv", {"z", "value"}, attr(&StressRow::ig, 1));
  emit("PA_signal.csv", {"z", "value"}, attr(&StressRow::pa, 0));
  emit("PA_distractor.csv", {"z", "value"}, attr(&StressRow::pa, 1));
  emit("PGIG_signal.csv", {"z", "value"}, attr(&StressRow::pgig, 0));
  emit("PGIG_distractor.csv", {"z", "value"}, attr(&StressRow::pgig, 1));
  return files;
}

void write_report(const std::vector<PropertyCheck>& checks, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ArgumentError("cannot open " + path.string() + " for writing");
  out << "property,value,threshold,pass\n";
  for (const auto& c : checks) {
    out << c.name << ',' << format_number(c.value) << ',' << format_number(c.threshold) << ','
        << (c.pass ? "true" : "false") << '\n';
  }
}

}  // namespace pgig::stress
