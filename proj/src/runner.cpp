#include "fieldcal/runner.hpp"

#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <optional>
#include <sstream>
#include <thread>

#include "fieldcal/calibrate.hpp"
#include "fieldcal/error.hpp"
#include "fieldcal/synth.hpp"

namespace fieldcal {

namespace {

namespace fs = std::filesystem;

std::string tau_tag(double tau) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%g", tau);
  return buf;
}

std::string fmt(const char* spec, double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), spec, v);
  return buf;
}

PitchSpec load_pitch(const RunConfig& config) {
  if (config.pitch_path.empty()) return PitchSpec{};
  return read_pitch(config.pitch_path);
}

bool ends_with(const std::string& s, const std::string& suffix) {
  return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

std::string model_name(const fs::path& dir) {
  fs::path p = dir.lexically_normal();
  if (p.filename().empty() || p.filename() == ".") p = p.parent_path();
  const std::string name = p.filename().string();
  return name.empty() ? dir.string() : name;
}

void ensure_out_dir(const fs::path& out) {
  if (out.empty()) throw ValidationError("an output directory is required (--out)");
  std::error_code ec;
  fs::create_directories(out, ec);
  if (ec) throw IoError("cannot create output directory " + out.string() + ": " + ec.message());
}

/// id of a failed image plus the log line explaining it; index-addressed so
/// reports do not depend on worker scheduling.
struct TaskResult {
  std::string log_line;
  std::string failed_id;  // empty on success
};

int finish(std::ostream& log, const std::vector<TaskResult>& results) {
  std::vector<std::string> failures;
  for (const TaskResult& r : results) {
    if (!r.log_line.empty()) log << r.log_line << '\n';
    if (!r.failed_id.empty()) failures.push_back(r.failed_id);
  }
  if (!failures.empty()) {
    log << failures.size() << " of " << results.size() << " items failed:";
    for (const std::string& id : failures) log << ' ' << id;
    log << '\n';
    return 2;
  }
  return 0;
}

std::vector<std::string> failed_ids(const std::vector<TaskResult>& results) {
  std::vector<std::string> ids;
  for (const TaskResult& r : results) {
    if (!r.failed_id.empty()) ids.push_back(r.failed_id);
  }
  return ids;
}

}  // namespace

void RunConfig::validate() const {
  if (taus.empty()) throw ValidationError("at least one tolerance is required");
  for (double tau : taus) {
    if (!(tau > 0.0)) throw ValidationError("tolerances must be positive");
  }
  if (jobs < 1) throw ValidationError("jobs must be >= 1");
  if (!(spacing > 0.0)) throw ValidationError("sampling spacing must be positive");
  if (count < 1) throw ValidationError("scene count must be >= 1");
}

std::vector<fs::path> list_annotations(const fs::path& dir) {
  if (dir.empty() || !fs::is_directory(dir)) {
    throw IoError("annotation directory not found: " + dir.string());
  }
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    const std::string name = entry.path().filename().string();
    if (!ends_with(name, ".json")) continue;
    if (ends_with(name, ".camera.json") || ends_with(name, ".provenance.json") ||
        ends_with(name, ".eval.json") || name == "manifest.json") {
      continue;
    }
    files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  return files;
}

std::vector<ImagePair> pair_inputs(const fs::path& annotations_dir, const fs::path& cameras_dir) {
  if (cameras_dir.empty() || !fs::is_directory(cameras_dir)) {
    throw IoError("camera directory not found: " + cameras_dir.string());
  }

  std::map<std::string, fs::path> manifest;
  const fs::path manifest_path = cameras_dir / "manifest.json";
  if (fs::exists(manifest_path)) {
    const nlohmann::json j = [&] {
      try {
        return nlohmann::json::parse(read_text_file(manifest_path));
      } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(std::string("manifest: ") + e.what());
      }
    }();
    if (!j.is_object()) throw SchemaError("manifest: expected an object of id -> camera file");
    for (const auto& [id, file] : j.items()) {
      if (!file.is_string()) throw SchemaError("manifest: entry \"" + id + "\" must be a filename");
      manifest.emplace(id, cameras_dir / file.get<std::string>());
    }
  }

  std::vector<ImagePair> pairs;
  for (const fs::path& annotation : list_annotations(annotations_dir)) {
    ImagePair pair;
    pair.id = annotation.stem().string();
    pair.annotation = annotation;
    if (const auto it = manifest.find(pair.id); it != manifest.end()) {
      pair.camera = it->second;
    } else {
      const fs::path by_stem = cameras_dir / (pair.id + ".camera.json");
      if (fs::exists(by_stem)) pair.camera = by_stem;
    }
    pairs.push_back(std::move(pair));
  }
  return pairs;
}

CameraModel read_camera_auto(const fs::path& path, LegacyConvention convention,
                             const PitchSpec& pitch) {
  if (path.extension() == ".txt") {
    LegacyHomographyOptions options;
    options.convention = convention;
    options.pitch = pitch;
    return read_legacy_homography(path, options);
  }
  return read_camera(path);
}

void parallel_for(std::size_t n, int jobs, const std::function<void(std::size_t)>& fn) {
  if (n == 0) return;
  const int workers = std::max(1, std::min(jobs, static_cast<int>(n)));
  if (workers == 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next.fetch_add(1); i < n; i = next.fetch_add(1)) fn(i);
    });
  }
  for (std::thread& t : pool) t.join();
}

int cmd_evaluate(const RunConfig& config, std::ostream& log) {
  try {
    config.validate();
    const PitchSpec pitch = load_pitch(config);
    const std::vector<FieldElement> elements = build_pitch_template(pitch);
    const std::vector<ImagePair> pairs = pair_inputs(config.annotations_dir, config.cameras_dir);
    if (pairs.empty()) {
      log << "error: no annotation files in " << config.annotations_dir.string() << '\n';
      return 1;
    }
    ensure_out_dir(config.out_dir);

    std::vector<TaskResult> results(pairs.size());
    std::vector<std::vector<ImageEval>> evals(pairs.size());
    parallel_for(pairs.size(), config.jobs, [&](std::size_t i) {
      const ImagePair& pair = pairs[i];
      try {
        if (pair.camera.empty()) throw IoError("no matching camera file");
        const ImageAnnotation annotation = read_annotation(pair.annotation);
        const CameraModel camera =
            read_camera_auto(pair.camera, config.legacy_convention, pitch);
        std::vector<ImageEval> per_tau;
        per_tau.reserve(config.taus.size());
        for (double tau : config.taus) {
          per_tau.push_back(evaluate_image(camera, elements, annotation, tau, config.spacing));
        }
        results[i].log_line =
            "ok " + pair.id + " jaccard@" + tau_tag(config.taus.front()) + "=" +
            fmt("%.4f", per_tau.front().jaccard);
        evals[i] = std::move(per_tau);
      } catch (const std::exception& e) {
        results[i] = {"fail " + pair.id + ": " + e.what(), pair.id};
      }
    });

    for (std::size_t i = 0; i < pairs.size(); ++i) {
      if (evals[i].empty()) continue;
      write_text_file(config.out_dir / (pairs[i].id + ".eval.json"),
                      format_image_eval(pairs[i].id, evals[i]));
    }

    std::vector<double> taus_done;
    std::vector<DatasetSummary> summaries;
    for (std::size_t t = 0; t < config.taus.size(); ++t) {
      std::vector<std::pair<std::string, ImageEval>> rows;
      std::vector<ImageEval> tau_evals;
      for (std::size_t i = 0; i < pairs.size(); ++i) {
        if (evals[i].empty()) continue;
        rows.emplace_back(pairs[i].id, evals[i][t]);
        tau_evals.push_back(evals[i][t]);
      }
      write_text_file(config.out_dir / ("dataset_tau" + tau_tag(config.taus[t]) + ".csv"),
                      format_dataset_csv(rows));
      if (!tau_evals.empty()) {
        taus_done.push_back(config.taus[t]);
        summaries.push_back(aggregate(tau_evals));
      }
    }
    write_text_file(config.out_dir / "summary.json",
                    format_summary(taus_done, summaries, failed_ids(results)));

    for (std::size_t t = 0; t < taus_done.size(); ++t) {
      log << "tau=" << tau_tag(taus_done[t]) << " jaccard_micro="
          << fmt("%.4f", summaries[t].micro_jaccard);
      if (summaries[t].mean_reprojection_px) {
        log << " reproj_px_mean=" << fmt("%.3f", *summaries[t].mean_reprojection_px);
      }
      log << '\n';
    }
    return finish(log, results);
  } catch (const std::exception& e) {
    log << "error: " << e.what() << '\n';
    return 1;
  }
}

int cmd_compare(const RunConfig& config, std::ostream& log) {
  try {
    config.validate();
    if (config.model_dirs.size() < 2) {
      log << "error: compare needs at least two camera directories\n";
      return 1;
    }
    const PitchSpec pitch = load_pitch(config);
    const std::vector<FieldElement> elements = build_pitch_template(pitch);

    const std::size_t models = config.model_dirs.size();
    std::vector<std::vector<ImagePair>> per_model;
    per_model.reserve(models);
    for (const fs::path& dir : config.model_dirs) {
      per_model.push_back(pair_inputs(config.annotations_dir, dir));
    }
    const std::size_t n = per_model.front().size();
    if (n == 0) {
      log << "error: no annotation files in " << config.annotations_dir.string() << '\n';
      return 1;
    }

    // Every model must cover exactly the same images; partial coverage makes
    // the side-by-side aggregates incomparable.
    std::vector<std::size_t> usable;
    for (std::size_t i = 0; i < n; ++i) {
      std::size_t with_camera = 0;
      for (std::size_t m = 0; m < models; ++m) {
        if (!per_model[m][i].camera.empty()) ++with_camera;
      }
      if (with_camera == models) {
        usable.push_back(i);
      } else if (with_camera != 0) {
        log << "error: image " << per_model[0][i].id
            << " has a camera in some model directories but not all\n";
        return 1;
      }
    }
    if (usable.empty()) {
      log << "error: no image is covered by every model directory\n";
      return 1;
    }
    ensure_out_dir(config.out_dir);

    struct Cell {
      std::vector<ImageEval> per_tau;
      std::string error;
    };
    std::vector<std::vector<Cell>> cells(models, std::vector<Cell>(usable.size()));
    parallel_for(models * usable.size(), config.jobs, [&](std::size_t t) {
      const std::size_t m = t / usable.size();
      const ImagePair& pair = per_model[m][usable[t % usable.size()]];
      Cell& cell = cells[m][t % usable.size()];
      try {
        const ImageAnnotation annotation = read_annotation(pair.annotation);
        const CameraModel camera =
            read_camera_auto(pair.camera, config.legacy_convention, pitch);
        for (double tau : config.taus) {
          cell.per_tau.push_back(evaluate_image(camera, elements, annotation, tau, config.spacing));
        }
      } catch (const std::exception& e) {
        cell.error = e.what();
      }
    });

    // An image failing under any model is excluded from every model's
    // aggregate so the columns describe the same image set.
    std::vector<TaskResult> results(usable.size());
    std::vector<bool> included(usable.size(), true);
    for (std::size_t k = 0; k < usable.size(); ++k) {
      const std::string& id = per_model[0][usable[k]].id;
      for (std::size_t m = 0; m < models; ++m) {
        if (!cells[m][k].error.empty()) {
          included[k] = false;
          results[k] = {"fail " + id + " (" + model_name(config.model_dirs[m]) +
                            "): " + cells[m][k].error,
                        id};
          break;
        }
      }
    }

    std::vector<std::vector<DatasetSummary>> summaries(models);
    for (std::size_t m = 0; m < models; ++m) {
      for (std::size_t t = 0; t < config.taus.size(); ++t) {
        std::vector<ImageEval> tau_evals;
        for (std::size_t k = 0; k < usable.size(); ++k) {
          if (included[k]) tau_evals.push_back(cells[m][k].per_tau[t]);
        }
        if (tau_evals.empty()) {
          log << "error: no image evaluable under every model\n";
          return 1;
        }
        summaries[m].push_back(aggregate(tau_evals));
      }
    }

    std::string csv =
        "model,tau,images,tp,fp_halluc,fp_inacc,fn,jaccard_micro,jaccard_mean,"
        "reproj_px_mean,reproj_px_median\n";
    for (std::size_t m = 0; m < models; ++m) {
      for (std::size_t t = 0; t < config.taus.size(); ++t) {
        const DatasetSummary& s = summaries[m][t];
        csv += model_name(config.model_dirs[m]);
        csv += ',' + tau_tag(config.taus[t]);
        csv += ',' + std::to_string(s.images);
        csv += ',' + std::to_string(s.counts.tp);
        csv += ',' + std::to_string(s.counts.fp_hallucinated);
        csv += ',' + std::to_string(s.counts.fp_inaccurate);
        csv += ',' + std::to_string(s.counts.fn);
        csv += ',' + fmt("%.6f", s.micro_jaccard);
        csv += ',' + fmt("%.6f", s.mean_jaccard);
        csv += ',';
        if (s.mean_reprojection_px) csv += fmt("%.6f", *s.mean_reprojection_px);
        csv += ',';
        if (s.median_reprojection_px) csv += fmt("%.6f", *s.median_reprojection_px);
        csv += '\n';
      }
    }
    write_text_file(config.out_dir / "compare.csv", csv);

    // Aligned text table: one row per model, one jaccard column per tau,
    // mean reprojection last.
    std::vector<std::vector<std::string>> table;
    std::vector<std::string> header{"model"};
    for (double tau : config.taus) header.push_back("jaccard_" + tau_tag(tau));
    header.push_back("reproj_px");
    table.push_back(header);
    for (std::size_t m = 0; m < models; ++m) {
      std::vector<std::string> row{model_name(config.model_dirs[m])};
      for (std::size_t t = 0; t < config.taus.size(); ++t) {
        row.push_back(fmt("%.4f", summaries[m][t].micro_jaccard));
      }
      const auto& reproj = summaries[m][0].mean_reprojection_px;
      row.push_back(reproj ? fmt("%.3f", *reproj) : "-");
      table.push_back(row);
    }
    std::vector<std::size_t> widths(table[0].size(), 0);
    for (const auto& row : table) {
      for (std::size_t c = 0; c < row.size(); ++c) widths[c] = std::max(widths[c], row[c].size());
    }
    std::string text;
    for (const auto& row : table) {
      for (std::size_t c = 0; c < row.size(); ++c) {
        std::string cell = row[c];
        cell.resize(widths[c], ' ');
        if (c > 0) text += "  ";
        text += cell;
      }
      while (!text.empty() && text.back() == ' ') text.pop_back();
      text += '\n';
    }
    write_text_file(config.out_dir / "compare.txt", text);
    log << text;
    return finish(log, results);
  } catch (const std::exception& e) {
    log << "error: " << e.what() << '\n';
    return 1;
  }
}

int cmd_fit(const RunConfig& config, std::ostream& log) {
  try {
    config.validate();
    const PitchSpec pitch = load_pitch(config);
    const std::vector<FieldElement> elements = build_pitch_template(pitch);
    const std::vector<fs::path> files = list_annotations(config.annotations_dir);
    if (files.empty()) {
      log << "error: no annotation files in " << config.annotations_dir.string() << '\n';
      return 1;
    }
    ensure_out_dir(config.out_dir);

    FitOptions options;
    options.max_iterations = config.max_iterations;
    options.max_spacing = config.spacing;
    options.unlock_k2 = config.unlock_k2;
    options.fix_focal = config.fix_focal;
    options.fix_rotation = config.fix_rotation;
    options.fix_translation = config.fix_translation;
    options.fix_k1 = config.fix_k1;

    std::optional<PinholeRadial> seed;
    if (!config.seed_camera_path.empty()) {
      const CameraModel model = read_camera(config.seed_camera_path);
      if (const auto* radial = std::get_if<PinholeRadial>(&model)) {
        seed = *radial;
      } else if (const auto* pinhole = std::get_if<SimplifiedPinhole>(&model)) {
        PinholeRadial wrapped;
        wrapped.base = *pinhole;
        seed = wrapped;
      } else {
        throw ValidationError("the seed camera must be a pinhole model");
      }
    }

    std::vector<TaskResult> results(files.size());
    std::vector<std::optional<PinholeRadial>> cameras(files.size());
    parallel_for(files.size(), config.jobs, [&](std::size_t i) {
      const std::string id = files[i].stem().string();
      try {
        const ImageAnnotation annotation = read_annotation(files[i]);
        const RefineResult refined = fit_camera(elements, annotation, options, seed);
        results[i].log_line = "ok " + id + " iterations=" +
                              std::to_string(refined.report.iterations) +
                              " cost=" + fmt("%.6g", refined.report.final_cost);
        cameras[i] = refined.camera;
      } catch (const std::exception& e) {
        results[i] = {"fail " + id + ": " + e.what(), id};
      }
    });

    for (std::size_t i = 0; i < files.size(); ++i) {
      if (!cameras[i]) continue;
      write_camera(*cameras[i], config.out_dir / (files[i].stem().string() + ".camera.json"));
    }
    return finish(log, results);
  } catch (const std::exception& e) {
    log << "error: " << e.what() << '\n';
    return 1;
  }
}

int cmd_synth(const RunConfig& config, std::ostream& log) {
  try {
    config.validate();
    const PitchSpec pitch = load_pitch(config);
    ensure_out_dir(config.out_dir);

    const std::size_t n = static_cast<std::size_t>(config.count);
    std::vector<TaskResult> results(n);
    std::vector<std::optional<SyntheticScene>> scenes(n);
    parallel_for(n, config.jobs, [&](std::size_t i) {
      char name[32];
      std::snprintf(name, sizeof(name), "scene_%04zu", i);
      try {
        SceneConfig scene_config;
        scene_config.seed = config.seed + i;
        scene_config.pitch = pitch;
        scene_config.noise_sigma = config.noise_sigma;
        scene_config.dropout_rate = config.dropout_rate;
        scene_config.hallucination_rate = config.hallucination_rate;
        scene_config.max_spacing = config.spacing;
        SyntheticScene scene = generate_scene(scene_config);
        results[i].log_line =
            std::string("ok ") + name +
            " annotated=" + std::to_string(scene.provenance.annotated.size()) +
            " dropped=" + std::to_string(scene.provenance.dropped.size()) +
            " hallucinated=" + std::to_string(scene.provenance.hallucinated.size());
        scenes[i] = std::move(scene);
      } catch (const std::exception& e) {
        results[i] = {std::string("fail ") + name + ": " + e.what(), name};
      }
    });

    for (std::size_t i = 0; i < n; ++i) {
      if (!scenes[i]) continue;
      char name[32];
      std::snprintf(name, sizeof(name), "scene_%04zu", i);
      write_annotation(scenes[i]->annotation, config.out_dir / (std::string(name) + ".json"));
      write_camera(scenes[i]->camera, config.out_dir / (std::string(name) + ".camera.json"));
      write_provenance(scenes[i]->provenance,
                       config.out_dir / (std::string(name) + ".provenance.json"));
    }
    return finish(log, results);
  } catch (const std::exception& e) {
    log << "error: " << e.what() << '\n';
    return 1;
  }
}

int cmd_render(const RunConfig& config, std::ostream& log) {
  try {
    config.validate();
    const PitchSpec pitch = load_pitch(config);
    const std::vector<FieldElement> elements = build_pitch_template(pitch);
    const std::vector<ImagePair> pairs = pair_inputs(config.annotations_dir, config.cameras_dir);
    if (pairs.empty()) {
      log << "error: no annotation files in " << config.annotations_dir.string() << '\n';
      return 1;
    }
    ensure_out_dir(config.out_dir);

    std::vector<TaskResult> results(pairs.size());
    std::vector<std::string> svgs(pairs.size());
    parallel_for(pairs.size(), config.jobs, [&](std::size_t i) {
      const ImagePair& pair = pairs[i];
      try {
        if (pair.camera.empty()) throw IoError("no matching camera file");
        const ImageAnnotation annotation = read_annotation(pair.annotation);
        const CameraModel camera =
            read_camera_auto(pair.camera, config.legacy_convention, pitch);
        const ImageEval eval =
            evaluate_image(camera, elements, annotation, config.taus.front(), config.spacing);
        svgs[i] = format_overlay_svg(camera, elements, annotation, eval);
        results[i].log_line = "ok " + pair.id;
      } catch (const std::exception& e) {
        results[i] = {"fail " + pair.id + ": " + e.what(), pair.id};
      }
    });

    for (std::size_t i = 0; i < pairs.size(); ++i) {
      if (svgs[i].empty()) continue;
      write_text_file(config.out_dir / (pairs[i].id + ".svg"), svgs[i]);
    }
    return finish(log, results);
  } catch (const std::exception& e) {
    log << "error: " << e.what() << '\n';
    return 1;
  }
}

}  // namespace fieldcal
