#include <CLI11.hpp>

#include <iostream>
#include <map>
#include <string>

#include "fieldcal/runner.hpp"

namespace {

void add_common_flags(CLI::App* cmd, fieldcal::RunConfig& config) {
  cmd->add_option("--pitch", config.pitch_path, "Pitch dimensions JSON (defaults to 105x68)");
  cmd->add_option("--tau", config.taus, "Matching tolerance in pixels (repeatable; default 5 2)")
      ->expected(-1);
  cmd->add_option("--spacing", config.spacing, "Template sampling spacing in meters");
  cmd->add_option("--out", config.out_dir, "Output directory");
  cmd->add_option("--jobs", config.jobs, "Worker threads");
  cmd->add_option("--seed", config.seed, "Random seed");
  const std::map<std::string, fieldcal::LegacyConvention> conventions{
      {"meters-to-pixels-center", fieldcal::LegacyConvention::meters_to_pixels_center},
      {"pixels-to-yards-corner", fieldcal::LegacyConvention::pixels_to_yards_corner},
  };
  cmd->add_option("--legacy-homography-convention", config.legacy_convention,
                  "Interpretation of legacy .txt homography files")
      ->transform(CLI::CheckedTransformer(conventions, CLI::ignore_case));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Camera-calibration benchmarking for broadcast soccer footage"};
  app.require_subcommand(1);

  fieldcal::RunConfig config;

  CLI::App* evaluate =
      app.add_subcommand("evaluate", "Score cameras against annotations; write reports");
  evaluate->add_option("--annotations", config.annotations_dir, "Annotation directory")
      ->required();
  evaluate->add_option("--cameras", config.cameras_dir, "Camera directory")->required();
  add_common_flags(evaluate, config);

  CLI::App* compare =
      app.add_subcommand("compare", "Side-by-side scores for two or more camera directories");
  compare->add_option("--annotations", config.annotations_dir, "Annotation directory")
      ->required();
  compare->add_option("--cameras", config.model_dirs, "Camera directories (two or more)")
      ->required()
      ->expected(-1);
  add_common_flags(compare, config);

  CLI::App* fit = app.add_subcommand("fit", "Fit a radial pinhole camera to each annotation");
  fit->add_option("--annotations", config.annotations_dir, "Annotation directory")->required();
  fit->add_option("--seed-camera", config.seed_camera_path,
                  "Camera JSON used as the starting point for every image");
  fit->add_option("--max-iterations", config.max_iterations, "LM iteration cap");
  fit->add_flag("--unlock-k2", config.unlock_k2, "Also optimize the quartic distortion term");
  fit->add_flag("--fix-focal", config.fix_focal, "Keep the seed focal length");
  fit->add_flag("--fix-rotation", config.fix_rotation, "Keep the seed rotation");
  fit->add_flag("--fix-translation", config.fix_translation, "Keep the seed translation");
  fit->add_flag("--fix-k1", config.fix_k1, "Keep the seed quadratic distortion term");
  add_common_flags(fit, config);

  CLI::App* synth = app.add_subcommand("synth", "Generate synthetic scenes");
  synth->add_option("--count", config.count, "Number of scenes");
  synth->add_option("--noise", config.noise_sigma, "Annotation noise sigma in pixels");
  synth->add_option("--dropout", config.dropout_rate, "Per-element dropout probability");
  synth->add_option("--hallucination", config.hallucination_rate,
                    "Per-element hallucination probability");
  add_common_flags(synth, config);

  CLI::App* render = app.add_subcommand("render", "Render SVG overlays for each image");
  render->add_option("--annotations", config.annotations_dir, "Annotation directory")
      ->required();
  render->add_option("--cameras", config.cameras_dir, "Camera directory")->required();
  add_common_flags(render, config);

  CLI11_PARSE(app, argc, argv);

  if (evaluate->parsed()) return fieldcal::cmd_evaluate(config, std::cout);
  if (compare->parsed()) return fieldcal::cmd_compare(config, std::cout);
  if (fit->parsed()) return fieldcal::cmd_fit(config, std::cout);
  if (synth->parsed()) return fieldcal::cmd_synth(config, std::cout);
  if (render->parsed()) return fieldcal::cmd_render(config, std::cout);
  return 1;
}
