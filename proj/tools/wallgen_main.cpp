#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <iomanip>
#include <iostream>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <unordered_map>
#include <vector>

#include <CLI11.hpp>

#include "wallgen/io.hpp"
#include "wallgen/wallgen.hpp"

namespace fs = std::filesystem;

namespace {

bool has_image_extension(const fs::path& p) {
  std::string ext = p.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return ext == ".png" || ext == ".jpg" || ext == ".jpeg" || ext == ".tif" || ext == ".tiff";
}

std::vector<fs::path> collect_inputs(const fs::path& input) {
  std::vector<fs::path> files;
  if (fs::is_directory(input)) {
    for (const auto& entry : fs::directory_iterator(input)) {
      if (entry.is_regular_file() && has_image_extension(entry.path())) {
        files.push_back(entry.path());
      }
    }
    std::sort(files.begin(), files.end());
  } else {
    files.push_back(input);
  }
  return files;
}

std::string warning_label(wallgen::MaskGenWarning w) {
  switch (w) {
    case wallgen::MaskGenWarning::kBlankPage: return " [warning: blank page]";
    case wallgen::MaskGenWarning::kNoComponents: return " [warning: no components]";
    default: return "";
  }
}

struct GenerateOptions {
  fs::path input;
  fs::path out;
  fs::path config_file;
  bool debug_dumps = false;
  int jobs = 1;
  // Override slots; only applied when the flag was passed.
  std::optional<std::uint64_t> seed;
  std::optional<int> colors;
  std::optional<int> orientations;
  std::optional<double> theta_min;
  std::optional<double> theta_max;
  std::optional<int> connectivity;
  std::optional<int> fh;
  std::optional<int> downscale;
};

wallgen::PipelineConfig effective_config(const GenerateOptions& opt) {
  wallgen::PipelineConfig cfg;
  if (!opt.config_file.empty()) {
    std::ifstream in(opt.config_file);
    if (!in) throw std::runtime_error("cannot open config: " + opt.config_file.string());
    nlohmann::json j;
    in >> j;
    cfg = wallgen::config_from_json(j);
  }
  if (opt.seed) cfg.rng_seed = *opt.seed;
  if (opt.colors) cfg.color_count = *opt.colors;
  if (opt.orientations) cfg.orientation_count = *opt.orientations;
  if (opt.theta_min) cfg.theta_min_deg = *opt.theta_min;
  if (opt.theta_max) cfg.theta_max_deg = *opt.theta_max;
  if (opt.connectivity) cfg.connectivity = *opt.connectivity;
  if (opt.fh) cfg.fh_override = *opt.fh;
  if (opt.downscale) cfg.downscale = *opt.downscale;
  cfg.validate();
  return cfg;
}

void write_debug_dumps(const wallgen::StageArtifacts& stages, const fs::path& out_dir,
                       const std::string& stem) {
  wallgen::write_plan_png(stages.quantized, out_dir / (stem + ".quantized.png"));
  wallgen::write_mask_png(stages.binary, out_dir / (stem + ".binary.png"));
  wallgen::write_mask_png(stages.filtered, out_dir / (stem + ".filtered.png"));
  wallgen::write_gray_png(stages.alcm.normalized(), out_dir / (stem + ".alcm.png"));
  if (stages.summary) {
    wallgen::PlanImage overlay =
        wallgen::render_filtration_overlay(stages.binary, stages.labeling, stages.summary->eca);
    wallgen::write_plan_png(overlay, out_dir / (stem + ".removed.png"));
  }
}

int run_generate(const GenerateOptions& opt) {
  wallgen::PipelineConfig cfg = effective_config(opt);

  if (!fs::exists(opt.input)) {
    std::cerr << "input not found: " << opt.input.string() << "\n";
    return 1;
  }
  fs::create_directories(opt.out);
  wallgen::write_text_atomic(wallgen::to_json(cfg).dump(2) + "\n",
                             opt.out / "effective_config.json");

  std::vector<fs::path> inputs = collect_inputs(opt.input);
  if (inputs.empty()) {
    std::cout << "no input images found in " << opt.input.string() << "\n";
    return 0;
  }

  std::atomic<std::size_t> next{0};
  std::atomic<int> failures{0};
  std::mutex log_mutex;

  auto worker = [&] {
    for (;;) {
      std::size_t i = next.fetch_add(1);
      if (i >= inputs.size()) break;
      const fs::path& in = inputs[i];
      const std::string stem = in.stem().string();
      auto t0 = std::chrono::steady_clock::now();
      try {
        wallgen::PlanImage img = wallgen::decode_plan_image(in);
        wallgen::MaskGenResult res = wallgen::generate_wall_mask(img, cfg, opt.debug_dumps);
        wallgen::write_mask_png(res.mask, opt.out / (stem + ".mask.png"));
        if (opt.debug_dumps && res.stages) write_debug_dumps(*res.stages, opt.out, stem);

        std::chrono::duration<double> dt = std::chrono::steady_clock::now() - t0;
        std::scoped_lock lk(log_mutex);
        std::cout << in.filename().string() << ": ok (" << std::fixed << std::setprecision(2)
                  << dt.count() << " s)" << warning_label(res.warning) << "\n";
      } catch (const std::exception& e) {
        failures.fetch_add(1);
        std::scoped_lock lk(log_mutex);
        std::cerr << in.filename().string() << ": error: " << e.what() << "\n";
      }
    }
  };

  int thread_count = std::max(1, std::min<int>(opt.jobs, static_cast<int>(inputs.size())));
  if (thread_count == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(thread_count));
    for (int t = 0; t < thread_count; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  int failed = failures.load();
  std::cout << (inputs.size() - static_cast<std::size_t>(failed)) << "/" << inputs.size()
            << " images processed\n";
  return failed == 0 ? 0 : 1;
}

std::string percent(double ratio) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(2) << ratio * 100.0 << "%";
  return os.str();
}

void print_group_row(const std::string& name, const wallgen::GroupStats& g) {
  std::cout << std::left << std::setw(10) << name << std::right << std::setw(7) << g.count;
  if (g.count > 0) {
    std::cout << std::setw(12) << percent(g.mean_dice) << std::setw(12) << percent(g.mean_iou)
              << std::setw(14) << percent(g.mean_accuracy) << "\n";
  } else {
    std::cout << std::setw(12) << "n/a" << std::setw(12) << "n/a" << std::setw(14) << "n/a"
              << "\n";
  }
}

int run_evaluate(const fs::path& manifest_path, const fs::path& pred_dir,
                 const fs::path& report_path) {
  wallgen::DatasetManifest manifest = wallgen::load_manifest(manifest_path);

  wallgen::MaskSource predictions = [&](const wallgen::ManifestEntry& e) {
    fs::path p = pred_dir / (e.id + ".mask.png");
    if (!fs::exists(p)) return std::optional<wallgen::WallMask>{};
    try {
      return std::optional<wallgen::WallMask>(wallgen::decode_binary_mask(p));
    } catch (const std::exception&) {
      return std::optional<wallgen::WallMask>{};
    }
  };
  wallgen::MaskSource ground_truth = [&](const wallgen::ManifestEntry& e) {
    if (!e.has_mask()) return std::optional<wallgen::WallMask>{};
    try {
      return std::optional<wallgen::WallMask>(wallgen::decode_binary_mask(e.mask_path));
    } catch (const std::exception&) {
      return std::optional<wallgen::WallMask>{};
    }
  };

  wallgen::EvalReport report = wallgen::evaluate_dataset(manifest, predictions, ground_truth);
  wallgen::write_text_atomic(wallgen::report_to_json(report).dump(2) + "\n", report_path);

  std::cout << std::left << std::setw(10) << "wall type" << std::right << std::setw(7) << "n"
            << std::setw(12) << "dice" << std::setw(12) << "iou" << std::setw(14) << "accuracy"
            << "\n";
  print_group_row("filled", report.filled);
  print_group_row("empty", report.empty);
  print_group_row("overall", report.overall);

  for (const auto& err : report.errors) {
    std::cerr << err.id << ": error: " << err.message << "\n";
  }
  std::cout << "report written to " << report_path.string() << "\n";
  return report.ok() ? 0 : 1;
}

int run_augment(const fs::path& image_path, const fs::path& mask_path, const fs::path& out_dir,
                int n, const wallgen::AugmentParams& params) {
  wallgen::PlanImage img = wallgen::decode_plan_image(image_path);
  wallgen::WallMask mask = wallgen::decode_binary_mask(mask_path);

  fs::create_directories(out_dir);
  const std::string stem = image_path.stem().string();
  auto pairs = wallgen::augment(img, mask, params, static_cast<std::size_t>(n));
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    wallgen::write_plan_png(pairs[i].first,
                            out_dir / (stem + ".aug" + std::to_string(i) + ".png"));
    wallgen::write_mask_png(pairs[i].second,
                            out_dir / (stem + ".aug" + std::to_string(i) + ".mask.png"));
  }
  std::cout << pairs.size() << " augmented pair" << (pairs.size() == 1 ? "" : "s")
            << " written to " << out_dir.string() << "\n";
  return 0;
}

int run_split(const fs::path& manifest_path, int k, std::uint64_t seed, const fs::path& out_dir) {
  wallgen::DatasetManifest manifest = wallgen::load_manifest(manifest_path);
  std::vector<wallgen::FoldSplit> folds = wallgen::kfold_split(manifest, k, seed);

  fs::create_directories(out_dir);
  for (std::size_t i = 0; i < folds.size(); ++i) {
    std::unordered_map<std::string, std::string> tag;
    for (const auto& id : folds[i].train) tag[id] = "train";
    for (const auto& id : folds[i].validation) tag[id] = "val";
    for (const auto& id : folds[i].test) tag[id] = "test";

    wallgen::DatasetManifest fold = manifest;
    for (auto& e : fold.entries) e.split = tag.at(e.id);

    fs::path fold_path = out_dir / ("fold_" + std::to_string(i) + ".csv");
    wallgen::write_text_atomic(wallgen::manifest_to_string(fold, fold_path), fold_path);
    std::cout << fold_path.filename().string() << ": " << folds[i].train.size() << " train, "
              << folds[i].validation.size() << " val, " << folds[i].test.size() << " test\n";
  }
  return 0;
}

int run_substitute_bg(const fs::path& input, const fs::path& texture_path, const fs::path& out,
                      int threshold) {
  wallgen::PlanImage img = wallgen::decode_plan_image(input);
  wallgen::PlanImage texture = wallgen::decode_plan_image(texture_path);
  wallgen::PlanImage result = wallgen::substitute_background(img, texture, threshold);
  if (out.has_parent_path()) fs::create_directories(out.parent_path());
  wallgen::write_plan_png(result, out);
  std::cout << "written " << out.string() << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"wall mask generation and evaluation for scanned floor plans"};
  app.set_version_flag("--version", std::string("wallgen ") + wallgen::kVersion);
  app.require_subcommand(1);

  GenerateOptions gen_opt;
  std::uint64_t gen_seed = 0;
  int gen_colors = 0, gen_orient = 0, gen_conn = 0, gen_fh = 0, gen_down = 0;
  double gen_tmin = 0.0, gen_tmax = 0.0;

  auto* gen = app.add_subcommand("generate", "Generate wall masks from plan images");
  gen->add_option("--input", gen_opt.input, "Input image file or directory")->required();
  gen->add_option("--out", gen_opt.out, "Output directory")->required();
  gen->add_option("--config", gen_opt.config_file, "Pipeline config file (JSON)");
  gen->add_flag("--debug-dumps", gen_opt.debug_dumps, "Write intermediate-stage images");
  gen->add_option("--jobs", gen_opt.jobs, "Parallel workers (env WALLGEN_JOBS)")
      ->envname("WALLGEN_JOBS")
      ->check(CLI::PositiveNumber);
  auto* o_seed = gen->add_option("--seed", gen_seed, "Quantization RNG seed");
  auto* o_colors = gen->add_option("--colors", gen_colors, "Quantization color count");
  auto* o_orient = gen->add_option("--orientations", gen_orient, "Filter orientation count");
  auto* o_tmin = gen->add_option("--theta-min", gen_tmin, "Minimum filter angle (degrees)");
  auto* o_tmax = gen->add_option("--theta-max", gen_tmax, "Maximum filter angle (degrees)");
  auto* o_conn = gen->add_option("--connectivity", gen_conn, "Component connectivity (4 or 8)");
  auto* o_fh = gen->add_option("--fh", gen_fh, "Fixed filter height (skips ECA sizing)");
  auto* o_down = gen->add_option("--downscale", gen_down, "Integer downscale factor");

  fs::path eval_manifest, eval_pred, eval_report;
  auto* eval = app.add_subcommand("evaluate", "Score predicted masks against ground truth");
  eval->add_option("--manifest", eval_manifest, "Dataset manifest (CSV)")->required();
  eval->add_option("--pred", eval_pred, "Directory of <id>.mask.png predictions")->required();
  eval->add_option("--report", eval_report, "Report output path (JSON)")->required();

  fs::path aug_image, aug_mask, aug_out;
  int aug_n = 1;
  wallgen::AugmentParams aug_params;
  bool aug_no_hflip = false, aug_no_vflip = false;
  auto* aug = app.add_subcommand("augment", "Generate augmented image/mask pairs");
  aug->add_option("--image", aug_image, "Plan image")->required();
  aug->add_option("--mask", aug_mask, "Ground-truth mask")->required();
  aug->add_option("--out", aug_out, "Output directory")->required();
  aug->add_option("--n", aug_n, "Number of augmented pairs")->check(CLI::NonNegativeNumber);
  aug->add_option("--zoom", aug_params.zoom_range, "Zoom range fraction");
  aug->add_option("--shift", aug_params.shift_range, "Shift range fraction");
  aug->add_flag("--no-hflip", aug_no_hflip, "Disable horizontal flips");
  aug->add_flag("--no-vflip", aug_no_vflip, "Disable vertical flips");
  aug->add_option("--seed", aug_params.seed, "RNG seed")->required();

  fs::path split_manifest, split_out;
  int split_k = 5;
  std::uint64_t split_seed = 0;
  auto* split = app.add_subcommand("split", "Write k-fold cross-validation manifests");
  split->add_option("--manifest", split_manifest, "Dataset manifest (CSV)")->required();
  split->add_option("--k", split_k, "Fold count")->check(CLI::Range(2, 1000));
  split->add_option("--out", split_out, "Output directory")->required();
  split->add_option("--seed", split_seed, "Shuffle seed")->required();

  fs::path sub_input, sub_texture, sub_out;
  int sub_threshold = wallgen::PipelineConfig{}.white_threshold;
  auto* sub = app.add_subcommand("substitute-bg", "Replace white background with a texture");
  sub->add_option("--input", sub_input, "Input plan image")->required();
  sub->add_option("--texture", sub_texture, "Texture image (tiled)")->required();
  sub->add_option("--out", sub_out, "Output image path")->required();
  sub->add_option("--threshold", sub_threshold, "White-background cutoff (0-255)")
      ->check(CLI::Range(0, 255));

  CLI11_PARSE(app, argc, argv);

  try {
    if (gen->parsed()) {
      if (o_seed->count()) gen_opt.seed = gen_seed;
      if (o_colors->count()) gen_opt.colors = gen_colors;
      if (o_orient->count()) gen_opt.orientations = gen_orient;
      if (o_tmin->count()) gen_opt.theta_min = gen_tmin;
      if (o_tmax->count()) gen_opt.theta_max = gen_tmax;
      if (o_conn->count()) gen_opt.connectivity = gen_conn;
      if (o_fh->count()) gen_opt.fh = gen_fh;
      if (o_down->count()) gen_opt.downscale = gen_down;
      return run_generate(gen_opt);
    }
    if (eval->parsed()) return run_evaluate(eval_manifest, eval_pred, eval_report);
    if (aug->parsed()) {
      aug_params.horizontal_flip = !aug_no_hflip;
      aug_params.vertical_flip = !aug_no_vflip;
      aug_params.validate();
      return run_augment(aug_image, aug_mask, aug_out, aug_n, aug_params);
    }
    if (split->parsed()) return run_split(split_manifest, split_k, split_seed, split_out);
    if (sub->parsed()) return run_substitute_bg(sub_input, sub_texture, sub_out, sub_threshold);
  } catch (const wallgen::ManifestError& e) {
    std::cerr << e.what() << "\n";
    for (const auto& item : e.items()) std::cerr << "  " << item << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
