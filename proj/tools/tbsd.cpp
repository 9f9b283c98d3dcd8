// tbsd: simulate -> learn -> detect -> evaluate from the command line.
//
// Exit codes: 0 success, 1 I/O error, 2 precondition failure (bad arguments,
// no texture direction, empty basis), 3 alarm raised with --fail-on-alarm.

#include "tbsd/anomaly_detect.hpp"
#include "tbsd/config.hpp"
#include "tbsd/io.hpp"
#include "tbsd/postprocess.hpp"
#include "tbsd/simulate.hpp"
#include "tbsd/texture_learning.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"

namespace fs = std::filesystem;
using nlohmann::ordered_json;
using namespace tbsd;

namespace {

constexpr int kExitIo = 1;
constexpr int kExitPrecondition = 2;
constexpr int kExitAlarm = 3;

// Raised after a diagnostic has already been printed.
struct Precondition {
  std::string message;
};

std::string dashed(std::string key) {
  std::replace(key.begin(), key.end(), '_', '-');
  return key;
}

// --config plus one flag per RunConfig key. Applied in the order
// defaults < file < flags.
struct ConfigOptions {
  std::string file;
  std::map<std::string, std::string> overrides;

  void attach(CLI::App* app, const std::vector<std::string>& skip = {}) {
    app->add_option("--config", file, "key = value file (or resolved-config.json)");
    for (const std::string& key : RunConfig::keys())
      if (std::find(skip.begin(), skip.end(), key) == skip.end())
        app->add_option("--" + dashed(key), overrides[key], RunConfig::help(key))
            ->group("Parameters");
  }

  RunConfig resolve() const {
    RunConfig config;
    if (!file.empty()) config.load_file(file);
    for (const std::string& key : RunConfig::keys()) {
      const auto it = overrides.find(key);
      if (it != overrides.end() && !it->second.empty()) config.set(key, it->second);
    }
    config.learn.decompose.lambda = config.detection.lambda;
    config.learn.decompose.gamma = config.detection.gamma;
    config.learn.decompose.iter_times = config.detection.iter_times;
    return config;
  }
};

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
}

void write_json(const fs::path& path, const ordered_json& j) {
  io::write_text_atomic(path, j.dump(2) + "\n");
}

void write_resolved(const fs::path& dir, const RunConfig& config) {
  write_json(dir / "resolved-config.json", config.to_json());
}

ordered_json spec_json(const SimSpec& s) {
  ordered_json j;
  j["rows"] = s.rows;
  j["cols"] = s.cols;
  j["pattern"] = to_string(s.pattern);
  j["angles_deg"] = s.angles_deg;
  j["spacing"] = s.spacing;
  j["texture_amplitude"] = s.texture_amplitude;
  j["amplitude_jitter"] = s.amplitude_jitter;
  j["alternate_sign"] = s.alternate_sign;
  j["background"] = s.background;
  ordered_json anomalies = ordered_json::array();
  for (const AnomalySpec& a : s.anomalies)
    anomalies.push_back({{"shape", to_string(a.shape)},
                         {"center_row", a.center_row},
                         {"center_col", a.center_col},
                         {"size", a.size},
                         {"amplitude", a.amplitude}});
  j["anomalies"] = std::move(anomalies);
  j["noise_sigma"] = s.noise_sigma;
  j["seed"] = s.seed;
  return j;
}

ordered_json metrics_json(const MetricReport& m) {
  return {{"tpr", m.tpr}, {"fpr", m.fpr}, {"tp", m.tp}, {"fp", m.fp}, {"tn", m.tn}, {"fn", m.fn}};
}

ordered_json score_table(const DirectionSet& d) {
  ordered_json rows = ordered_json::array();
  const double steps = static_cast<double>(d.scores.size());
  for (std::size_t k = 0; k < d.scores.size(); ++k)
    rows.push_back({{"angle_deg", static_cast<double>(k) * 180.0 / steps}, {"F", d.scores[k]}});
  return rows;
}

ordered_json directions_json(const DirectionSet& d) {
  ordered_json j;
  j["expansion_deg"] = d.expansion_degrees();
  j["extension_deg"] = d.extension_degrees();
  j["threshold"] = d.threshold;
  j["scores"] = score_table(d);
  return j;
}

// ---------------------------------------------------------------- simulate

struct SimulateArgs {
  std::string out;
  std::string family = "cross";
  int count = 5;
  std::uint64_t seed = 7;
  std::vector<double> angles;
  std::optional<double> amplitude;
  int rows = 344;
  int cols = 351;
  bool clean = false;
};

void rethrow_first(const std::vector<std::exception_ptr>& errors) {
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);
}

void write_sim(const fs::path& dir, const std::string& stem, const SimSpec& spec,
               ordered_json& entries) {
  const SimResult sim = generate(spec);
  io::write_image(dir / (stem + ".png"), sim.image);
  io::write_mask(dir / (stem + "_truth.png"), sim.truth);
  entries.push_back({{"image", stem + ".png"},
                     {"truth", stem + "_truth.png"},
                     {"seed", spec.seed},
                     {"spec", spec_json(spec)}});
}

int cmd_simulate(const SimulateArgs& args) {
  const fs::path out(args.out);
  ensure_dir(out);
  ordered_json manifest;
  manifest["family"] = args.family;
  manifest["seed"] = args.seed;

  if (args.family == "suite") {
    ordered_json families = ordered_json::array();
    for (const FixtureFamily& family : fixture_suite({args.count, args.seed})) {
      std::string slug = family.name;
      std::replace(slug.begin(), slug.end(), ' ', '_');
      const fs::path dir = out / slug;
      ensure_dir(dir);
      ordered_json training = ordered_json::array();
      write_sim(dir, "training", family.training, training);
      std::vector<ordered_json> tests(family.tests.size());
      std::vector<std::exception_ptr> errors(family.tests.size());
#pragma omp parallel for schedule(dynamic)
      for (int i = 0; i < static_cast<int>(family.tests.size()); ++i) {
        try {
          ordered_json one = ordered_json::array();
          char stem[32];
          std::snprintf(stem, sizeof stem, "test_%03d", i);
          write_sim(dir, stem, family.tests[i], one);
          tests[i] = std::move(one.front());
        } catch (...) {
          errors[i] = std::current_exception();
        }
      }
      rethrow_first(errors);
      families.push_back({{"name", family.name},
                          {"dir", slug},
                          {"training", training.front()},
                          {"prior_expansion_deg", family.prior_expansion_deg},
                          {"tests", tests}});
    }
    manifest["families"] = std::move(families);
  } else {
    const TexturePattern pattern = parse_pattern(args.family);
    std::vector<ordered_json> images(args.count);
    std::vector<std::exception_ptr> errors(args.count);
#pragma omp parallel for schedule(dynamic)
    for (int i = 0; i < args.count; ++i) {
      try {
        SimSpec spec;
        spec.rows = args.rows;
        spec.cols = args.cols;
        spec.pattern = pattern;
        if (!args.angles.empty()) spec.angles_deg = args.angles;
        if (pattern == TexturePattern::one_direction && args.angles.empty()) spec.angles_deg = {45.0};
        if (args.amplitude) spec.texture_amplitude = *args.amplitude;
        spec.seed = args.seed * 1000003ULL + static_cast<std::uint64_t>(i);
        if (!args.clean) plant_random_anomalies(spec, spec.seed);
        char stem[32];
        std::snprintf(stem, sizeof stem, "image_%03d", i);
        ordered_json one = ordered_json::array();
        write_sim(out, stem, spec, one);
        images[i] = std::move(one.front());
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
    rethrow_first(errors);
    manifest["images"] = images;
  }
  write_json(out / "manifest.json", manifest);
  std::cout << "wrote " << (out / "manifest.json").string() << "\n";
  return 0;
}

// ---------------------------------------------------------------- learn

struct GridCell {
  int grid_rows = 1, grid_cols = 1, row = 0, col = 0;
};

GridCell parse_cell(const std::string& grid, const std::string& cell) {
  GridCell g;
  if (grid.empty() && cell.empty()) return g;
  require(!grid.empty() && !cell.empty(), "--grid and --cell go together");
  char x = 0, comma = 0;
  std::istringstream gs(grid), cs(cell);
  if (!(gs >> g.grid_rows >> x >> g.grid_cols) || (x != 'x' && x != 'X') || !gs.eof())
    throw InvalidArgument("--grid expects RxC, got '" + grid + "'");
  if (!(cs >> g.row >> comma >> g.col) || comma != ',' || !cs.eof())
    throw InvalidArgument("--cell expects r,c, got '" + cell + "'");
  require(g.grid_rows >= 1 && g.grid_cols >= 1, "--grid needs positive counts");
  require(g.row >= 0 && g.row < g.grid_rows && g.col >= 0 && g.col < g.grid_cols,
          "--cell lies outside the grid");
  return g;
}

Matrix crop_cell(const Matrix& image, const GridCell& g) {
  const Eigen::Index r0 = image.rows() * g.row / g.grid_rows;
  const Eigen::Index r1 = image.rows() * (g.row + 1) / g.grid_rows;
  const Eigen::Index c0 = image.cols() * g.col / g.grid_cols;
  const Eigen::Index c1 = image.cols() * (g.col + 1) / g.grid_cols;
  require(r1 > r0 && c1 > c0, "grid cell is empty");
  return image.block(r0, c0, r1 - r0, c1 - c0);
}

struct LearnArgs {
  std::string input;
  std::string out;
  std::string grid;
  std::string cell;
  std::vector<double> prior;
};

int cmd_learn(const LearnArgs& args, const RunConfig& config) {
  const GridCell g = parse_cell(args.grid, args.cell);
  const Matrix image = crop_cell(io::read_image(args.input), g);

  std::optional<DirectionSet> prior;
  if (!args.prior.empty())
    prior = prior_directions(args.prior, config.learn.sampling.max_rotate);
  LearnResult learned = learn_texture_basis(image, config.learn, prior ? &*prior : nullptr);

  if (learned.directions.empty()) {
    std::cerr << "no texture direction detected; F table:\n"
              << score_table(learned.directions).dump(2) << "\n";
    throw Precondition{"no texture direction"};
  }
  if (learned.basis.atom_count() == 0) {
    std::cerr << "texture estimate yields no patches (" << learned.patches.size()
              << " clusters); refusing to write an empty basis\n";
    throw Precondition{"empty basis"};
  }

  std::ostringstream source;
  source << "learn " << fs::path(args.input).filename().string();
  if (!args.grid.empty()) source << " grid " << args.grid << " cell " << args.cell;
  learned.basis.source = source.str();

  const fs::path out(args.out);
  const fs::path dir = out.has_parent_path() ? out.parent_path() : fs::path(".");
  ensure_dir(dir);
  io::save_basis(out, learned.basis);
  ordered_json report = directions_json(learned.directions);
  report["prior"] = prior.has_value();
  report["patches"] = learned.patches.size();
  report["atoms"] = learned.basis.atom_count();
  write_json(dir / (out.stem().string() + ".directions.json"), report);
  write_resolved(dir, config);
  std::cout << "basis: " << learned.basis.atom_count() << " atoms, expansion directions";
  for (double d : learned.directions.expansion_degrees()) std::cout << " " << d;
  std::cout << "\n";
  return 0;
}

// ---------------------------------------------------------------- directions

int cmd_directions(const std::string& input, const std::string& out, const RunConfig& config) {
  const Matrix image = io::read_image(input);
  const SmoothBasis smooth =
      make_smooth_basis(static_cast<int>(image.rows()), static_cast<int>(image.cols()),
                        config.learn.knots_y, config.learn.knots_x, config.learn.degree);
  const DecomposeResult parts = low_rank_decompose(image, smooth, config.learn.decompose);
  const DirectionSet d = detect_directions(
      lsera_sample(parts.parts.texture, config.learn.sampling), config.learn.detect);
  const ordered_json j = directions_json(d);
  if (out.empty()) {
    std::cout << j.dump(2) << "\n";
  } else {
    write_json(out, j);
  }
  return d.empty() ? kExitPrecondition : 0;
}

// ---------------------------------------------------------------- decompose / detect

// Signed components are stored as offset + scale * value.
void write_signed(const fs::path& dir, const std::string& name, const Matrix& m,
                  ordered_json& scales) {
  const double peak = m.size() > 0 ? m.cwiseAbs().maxCoeff() : 0.0;
  const double scale = peak > 0.0 ? 0.5 / peak : 1.0;
  io::write_image(dir / (name + ".png"), (m.array() * scale + 0.5).matrix());
  scales[name] = {{"offset", 0.5}, {"scale", scale}};
}

void write_parts(const fs::path& dir, const Decomposition& parts) {
  ordered_json scales;
  io::write_image(dir / "background.png", parts.background);
  scales["background"] = {{"offset", 0.0}, {"scale", 1.0}};
  write_signed(dir, "texture", parts.texture, scales);
  write_signed(dir, "anomaly", parts.anomaly, scales);
  write_signed(dir, "residual", parts.residual, scales);
  write_json(dir / "scale.json", scales);
}

SmoothBasis smooth_for(const Matrix& image, const RunConfig& config) {
  return make_smooth_basis(static_cast<int>(image.rows()), static_cast<int>(image.cols()),
                           config.learn.knots_y, config.learn.knots_x, config.learn.degree);
}

int cmd_decompose(const std::string& input, const std::string& basis_path,
                  const std::string& out_dir, const RunConfig& config) {
  const Matrix image = io::read_image(input);
  const SmoothBasis smooth = smooth_for(image, config);
  const fs::path dir(out_dir);
  ensure_dir(dir);
  if (basis_path.empty()) {
    write_parts(dir, low_rank_decompose(image, smooth, config.learn.decompose).parts);
  } else {
    const TextureBasis basis = io::load_basis(basis_path);
    write_parts(dir, tbsd_detect(image, smooth, basis, config.detection).parts);
  }
  write_resolved(dir, config);
  return 0;
}

struct DetectArgs {
  std::string input;
  std::string basis;
  std::string truth;
  std::string out_dir;
  std::string method = "tbsd";
  bool fail_on_alarm = false;
  bool close = false;
};

int cmd_detect(const DetectArgs& args, const RunConfig& config) {
  const Matrix image = io::read_image(args.input);
  const SmoothBasis smooth = smooth_for(image, config);
  DetectResult result;
  if (args.method == "ssd") {
    result = ssd_baseline_detect(image, smooth, config.detection);
  } else if (args.method == "tbsd") {
    require(!args.basis.empty(), "detect: --basis is required unless --method ssd");
    result = tbsd_detect(image, smooth, io::load_basis(args.basis), config.detection);
  } else {
    throw InvalidArgument("detect: unknown method " + args.method);
  }
  const AnomalyMask am =
      anomaly_mask(result.parts, config.detection.binarize_eps, config.detection.phi_a);
  Mask mask = am.mask;
  if (args.close)
    mask = regions_to_mask(close_regions(mask, config.close_max_rotate, config.close_dmax),
                           static_cast<int>(mask.rows()), static_cast<int>(mask.cols()));

  const fs::path dir(args.out_dir);
  ensure_dir(dir);
  write_parts(dir, result.parts);
  io::write_mask(dir / "mask.png", mask);

  ordered_json metrics;
  if (!args.truth.empty()) {
    const Mask truth = io::read_mask(args.truth);
    require(truth.rows() == mask.rows() && truth.cols() == mask.cols(),
            "detect: truth mask size differs from the image");
    const MetricReport m = evaluate(mask, truth);
    metrics = metrics_json(m);
  }
  metrics["anomaly_proportion"] = am.proportion;
  metrics["alarm"] = am.alarm;
  metrics["method"] = args.method;
  metrics["closed"] = args.close;
  metrics["params"] = config.to_json();
  write_json(dir / "metrics.json", metrics);
  write_resolved(dir, config);

  std::cout << "anomaly proportion " << am.proportion << (am.alarm ? " (alarm)" : "") << "\n";
  return am.alarm && args.fail_on_alarm ? kExitAlarm : 0;
}

// ---------------------------------------------------------------- evaluate

struct EvaluateArgs {
  std::string pred;
  std::string truth;
  std::string out;
  std::string overlay;
  bool close = false;
};

int cmd_evaluate(const EvaluateArgs& args, const RunConfig& config) {
  Mask pred = io::read_mask(args.pred);
  const Mask truth = io::read_mask(args.truth);
  require(pred.rows() == truth.rows() && pred.cols() == truth.cols(),
          "evaluate: masks differ in size");
  std::size_t regions = 0;
  if (args.close) {
    const auto closed = close_regions(pred, config.close_max_rotate, config.close_dmax);
    regions = closed.size();
    pred = regions_to_mask(closed, static_cast<int>(pred.rows()), static_cast<int>(pred.cols()));
  }
  ordered_json j = metrics_json(evaluate(pred, truth));
  j["closed"] = args.close;
  if (args.close) j["regions"] = regions;
  if (!args.out.empty()) write_json(args.out, j);
  if (!args.overlay.empty()) {
    // Gray 0.5 where only the truth is set, 1 where both, 0.25 false positives.
    Matrix img = Matrix::Zero(pred.rows(), pred.cols());
    for (Eigen::Index r = 0; r < pred.rows(); ++r)
      for (Eigen::Index c = 0; c < pred.cols(); ++c)
        img(r, c) = pred(r, c) ? (truth(r, c) ? 1.0 : 0.25) : (truth(r, c) ? 0.5 : 0.0);
    io::write_image(args.overlay, img);
  }
  std::cout << j.dump(2) << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Texture-basis smooth decomposition for anomaly detection"};
  app.require_subcommand(1);

  SimulateArgs sim;
  auto* simulate = app.add_subcommand("simulate", "write synthetic images, truth masks and a manifest");
  simulate->add_option("--out", sim.out, "output directory")->required();
  simulate->add_option("--family", sim.family, "cross, one_direction or suite")
      ->check(CLI::IsMember({"cross", "one_direction", "suite"}));
  simulate->add_option("--count", sim.count, "images (per family for suite)")
      ->check(CLI::Range(1, 100000));
  simulate->add_option("--seed", sim.seed, "base seed");
  simulate->add_option("--angles", sim.angles, "line angles in degrees")->delimiter(',');
  simulate->add_option("--amplitude", sim.amplitude, "texture amplitude");
  simulate->add_option("--rows", sim.rows, "image height");
  simulate->add_option("--cols", sim.cols, "image width");
  simulate->add_flag("--clean", sim.clean, "no anomalies");

  LearnArgs learn;
  ConfigOptions learn_cfg;
  auto* learn_cmd = app.add_subcommand("learn", "learn a texture basis from a defect-free image");
  learn_cmd->add_option("--input", learn.input, "training image")->required();
  learn_cmd->add_option("--out", learn.out, "basis file (.tbsd.json)")->required();
  learn_cmd->add_option("--grid", learn.grid, "split the image into RxC parts");
  learn_cmd->add_option("--cell", learn.cell, "train on part r,c of the grid");
  learn_cmd->add_option("--prior-directions", learn.prior, "known expansion directions (degrees)")
      ->delimiter(',');
  learn_cfg.attach(learn_cmd);

  std::string dir_input, dir_out;
  ConfigOptions dir_cfg;
  auto* directions = app.add_subcommand("directions", "print the direction score table");
  directions->add_option("--input", dir_input, "image")->required();
  directions->add_option("--out", dir_out, "write JSON here instead of stdout");
  dir_cfg.attach(directions);

  std::string dec_input, dec_basis, dec_out;
  ConfigOptions dec_cfg;
  auto* decompose = app.add_subcommand("decompose", "write decomposition components as PNGs");
  decompose->add_option("--input", dec_input, "image")->required();
  decompose->add_option("--basis", dec_basis, "texture basis; omit for background/texture only");
  decompose->add_option("--out-dir", dec_out, "output directory")->required();
  dec_cfg.attach(decompose);

  DetectArgs det;
  ConfigOptions det_cfg;
  auto* detect = app.add_subcommand("detect", "detect anomalies in a defect image");
  detect->add_option("--input", det.input, "image")->required();
  detect->add_option("--basis", det.basis, "texture basis");
  detect->add_option("--truth", det.truth, "ground-truth mask for metrics");
  detect->add_option("--out-dir", det.out_dir, "output directory")->required();
  detect->add_option("--method", det.method, "tbsd or ssd")
      ->check(CLI::IsMember({"tbsd", "ssd"}));
  detect->add_flag("--fail-on-alarm", det.fail_on_alarm, "exit 3 when the alarm is raised");
  detect->add_flag("--close", det.close, "close detected pixels into regions before scoring");
  det_cfg.attach(detect);

  EvaluateArgs ev;
  ConfigOptions ev_cfg;
  auto* evaluate_cmd = app.add_subcommand("evaluate", "score a predicted mask against the truth");
  evaluate_cmd->add_option("--pred", ev.pred, "predicted mask")->required();
  evaluate_cmd->add_option("--truth", ev.truth, "ground-truth mask")->required();
  evaluate_cmd->add_option("--out", ev.out, "write metrics JSON");
  evaluate_cmd->add_option("--overlay", ev.overlay, "write a comparison PNG");
  evaluate_cmd->add_flag("--close", ev.close, "close regions before scoring");
  int max_rotate = 0, dmax = 0;
  evaluate_cmd->add_option("--max-rotate", max_rotate, "angular sectors for closing");
  evaluate_cmd->add_option("--dmax", dmax, "cluster merge distance for closing");
  ev_cfg.attach(evaluate_cmd, {"max_rotate"});

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitPrecondition;
  }

  try {
    if (*simulate) return cmd_simulate(sim);
    if (*learn_cmd) return cmd_learn(learn, learn_cfg.resolve());
    if (*directions) return cmd_directions(dir_input, dir_out, dir_cfg.resolve());
    if (*decompose) return cmd_decompose(dec_input, dec_basis, dec_out, dec_cfg.resolve());
    if (*detect) return cmd_detect(det, det_cfg.resolve());
    if (*evaluate_cmd) {
      RunConfig config = ev_cfg.resolve();
      if (max_rotate > 0) config.close_max_rotate = max_rotate;
      if (dmax > 0) config.close_dmax = dmax;
      return cmd_evaluate(ev, config);
    }
  } catch (const Precondition& p) {
    std::cerr << "error: " << p.message << "\n";
    return kExitPrecondition;
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitIo;
  } catch (const InvalidArgument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitPrecondition;
  } catch (const NumericalError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitPrecondition;
  }
  return 0;
}
