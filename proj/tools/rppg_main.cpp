// rppg: offline perfusion analysis of RGB video.
//
// Subcommands cover the three analysis scales (whole ROI, facial regions,
// per-pixel maps), the synthetic-video generator used for verification, the
// presentation-attack classifier, and a standalone heatmap renderer.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "rppg/core/signal.hpp"
#include "rppg/errors.hpp"
#include "rppg/pad/features.hpp"
#include "rppg/pad/svm.hpp"
#include "rppg/render/heatmap.hpp"
#include "rppg/scales/io.hpp"
#include "rppg/scales/pipelines.hpp"
#include "rppg/scales/regions.hpp"
#include "rppg/synth/generator.hpp"
#include "rppg/video/io.hpp"
#include "rppg/video/ops.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct CommonArgs {
  std::string input;
  std::string roi;
  std::string ref;
  double external_hr_bpm = 0.0;  // 0 = not given
  std::string landmarks;
  std::string config;
  std::string out;
  bool skin_seg = false;
  bool register_frames = false;
  int threads = 1;
  int pyramid_target = 10000;
};

rppg::core::AnalysisConfig load_config(const std::string& path) {
  rppg::core::AnalysisConfig cfg;
  if (path.empty()) return cfg;
  std::ifstream in(path, std::ios::binary);
  if (!in)
    rppg::fail(rppg::Errc::IoFailure, "cli.config", "cannot open " + path);
  json j;
  try {
    j = json::parse(in);
    for (const auto& [key, value] : j.items()) {
      if (key == "t_win") {
        cfg.t_win = value.get<double>();
      } else if (key == "t_step") {
        cfg.t_step = value.get<double>();
      } else if (key == "f1") {
        cfg.f1 = value.get<double>();
      } else if (key == "f2") {
        cfg.f2 = value.get<double>();
      } else if (key == "hr_tolerance") {
        cfg.hr_tolerance = value.get<double>();
      } else if (key == "pi_cutoff") {
        cfg.pi_cutoff = value.get<double>();
      } else if (key == "filter_order") {
        cfg.filter_order = value.get<int>();
      } else if (key == "min_delta_f") {
        cfg.min_delta_f = value.get<double>();
      } else {
        rppg::fail(rppg::Errc::BadConfig, "cli.config",
                   "unknown config key: " + key);
      }
    }
  } catch (const json::exception& e) {
    rppg::fail(rppg::Errc::BadConfig, "cli.config",
               std::string("malformed config: ") + e.what());
  }
  cfg.validate();
  return cfg;
}

void ensure_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec)
    rppg::fail(rppg::Errc::IoFailure, "cli.out",
               "cannot create " + dir + ": " + ec.message());
}

void ensure_parent_dir(const std::string& file) {
  const fs::path parent = fs::path(file).parent_path();
  if (!parent.empty()) ensure_dir(parent.string());
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out)
    rppg::fail(rppg::Errc::IoFailure, "cli.out", "cannot write " + path);
  out << text;
  if (!out)
    rppg::fail(rppg::Errc::IoFailure, "cli.out", "write failed: " + path);
}

std::optional<double> external_hr_hz(const CommonArgs& a) {
  if (a.external_hr_bpm <= 0.0) return std::nullopt;
  return a.external_hr_bpm / 60.0;
}

rppg::scales::PipelineOptions pipeline_options(const CommonArgs& a) {
  rppg::scales::PipelineOptions opt;
  opt.register_frames = a.register_frames;
  opt.skin_seg = a.skin_seg;
  opt.threads = a.threads;
  opt.pyramid_target_px = a.pyramid_target;
  return opt;
}

json timeline_stats(const rppg::scales::MetricsTimeline& tl) {
  json j;
  j["windows"] = tl.entries.size();
  if (tl.entries.empty()) return j;
  double bpm = 0.0;
  double snr = 0.0;
  double mag = 0.0;
  double pi = 0.0;
  double rho = 0.0;
  std::size_t rho_n = 0;
  for (const auto& e : tl.entries) {
    bpm += e.bpm;
    snr += e.snr_db;
    mag += e.magnitude;
    pi += e.pi;
    if (e.rho_ref) {
      rho += *e.rho_ref;
      ++rho_n;
    }
  }
  const double n = static_cast<double>(tl.entries.size());
  j["mean_bpm"] = bpm / n;
  j["mean_snr_db"] = snr / n;
  j["mean_magnitude"] = mag / n;
  j["mean_pi"] = pi / n;
  if (rho_n > 0) j["mean_rho_ref"] = rho / static_cast<double>(rho_n);
  return j;
}

// Per-frame landmark sets: a single CSV gives one static set; a directory is
// read as one CSV per frame, in lexicographic order.
std::vector<rppg::video::LandmarkSet> load_landmarks(const std::string& path) {
  std::vector<rppg::video::LandmarkSet> sets;
  if (fs::is_directory(path)) {
    std::vector<std::string> files;
    for (const auto& entry : fs::directory_iterator(path)) {
      if (entry.path().extension() == ".csv")
        files.push_back(entry.path().string());
    }
    std::sort(files.begin(), files.end());
    for (const auto& f : files)
      sets.push_back(rppg::video::read_landmarks_csv(f));
    if (sets.empty())
      rppg::fail(rppg::Errc::BadLandmarks, "cli.landmarks",
                 "no .csv files in " + path);
  } else {
    sets.push_back(rppg::video::read_landmarks_csv(path));
  }
  return sets;
}

int run_analyze_global(const CommonArgs& a) {
  const rppg::core::AnalysisConfig cfg = load_config(a.config);
  const rppg::video::FrameSequence seq =
      rppg::video::load_frame_sequence(a.input);
  const rppg::video::RoiMask roi = rppg::video::read_mask_png(a.roi);
  rppg::video::RoiMask ref;
  const bool has_ref = !a.ref.empty();
  if (has_ref) ref = rppg::video::read_mask_png(a.ref);

  const rppg::scales::GlobalResult res = rppg::scales::analyze_global(
      seq, roi, has_ref ? &ref : nullptr, cfg, external_hr_hz(a),
      pipeline_options(a));

  ensure_dir(a.out);
  rppg::scales::write_timeline_csv(res.roi, a.out + "/roi_timeline.csv");
  if (!res.reference.entries.empty())
    rppg::scales::write_timeline_csv(res.reference,
                                     a.out + "/reference_timeline.csv");

  std::vector<double> pi;
  pi.reserve(res.roi.entries.size());
  for (const auto& e : res.roi.entries) pi.push_back(e.pi);
  rppg::video::write_png(rppg::render::render_line_plot(pi, 640, 240),
                         a.out + "/pi_normalized.png");

  json summary;
  summary["fs"] = res.roi.fs;
  summary["roi"] = timeline_stats(res.roi);
  if (!res.reference.entries.empty())
    summary["reference"] = timeline_stats(res.reference);
  summary["reperfusion_event_s"] = rppg::scales::reperfusion_event_time(res.roi);
  write_text(a.out + "/summary.json", summary.dump(2) + "\n");
  return 0;
}

int run_analyze_regions(const CommonArgs& a) {
  const rppg::core::AnalysisConfig cfg = load_config(a.config);
  const rppg::video::FrameSequence seq =
      rppg::video::load_frame_sequence(a.input);
  const std::vector<rppg::video::LandmarkSet> lm = load_landmarks(a.landmarks);

  const rppg::scales::RegionsResult res = rppg::scales::analyze_regions(
      seq, std::span(lm.data(), lm.size()), cfg, pipeline_options(a));

  ensure_dir(a.out);
  json summary;
  summary["fs"] = seq.fs;
  summary["reference_region"] = rppg::scales::region_name_str(
      rppg::scales::kRegionOrder[res.reference_index]);
  for (std::size_t r = 0; r < res.timelines.size(); ++r) {
    const std::string name =
        rppg::scales::region_name_str(rppg::scales::kRegionOrder[r]);
    rppg::scales::write_timeline_csv(res.timelines[r],
                                     a.out + "/region_" + name + ".csv");
    summary["regions"][name] = timeline_stats(res.timelines[r]);
  }
  write_text(a.out + "/summary.json", summary.dump(2) + "\n");
  return 0;
}

int run_analyze_local(const CommonArgs& a) {
  const rppg::core::AnalysisConfig cfg = load_config(a.config);
  const rppg::video::FrameSequence seq =
      rppg::video::load_frame_sequence(a.input);
  rppg::video::RoiMask roi;
  rppg::video::RoiMask ref;
  const bool has_roi = !a.roi.empty();
  const bool has_ref = !a.ref.empty();
  if (has_roi) roi = rppg::video::read_mask_png(a.roi);
  if (has_ref) ref = rppg::video::read_mask_png(a.ref);

  const rppg::scales::LocalResult res = rppg::scales::analyze_local(
      seq, has_roi ? &roi : nullptr, has_ref ? &ref : nullptr, cfg,
      external_hr_hz(a), pipeline_options(a));

  ensure_dir(a.out);
  for (std::size_t w = 0; w < res.windows.size(); ++w) {
    const auto maps = rppg::scales::maps_of(res.windows[w]);
    char prefix[32];
    std::snprintf(prefix, sizeof prefix, "window_%03zu_", w);
    for (const auto& m : maps) {
      const std::string stem = a.out + "/" + prefix + m.metric;
      rppg::scales::write_map_file(m, stem + ".bin");
      rppg::video::write_png(rppg::render::render_heatmap(m), stem + ".png");
    }
  }
  if (!res.reference.entries.empty())
    rppg::scales::write_timeline_csv(res.reference,
                                     a.out + "/reference_timeline.csv");

  json summary;
  summary["fs"] = seq.fs;
  summary["pyramid_level"] = res.level;
  summary["width"] = res.width;
  summary["height"] = res.height;
  summary["windows"] = res.windows.size();
  if (!res.reference.entries.empty())
    summary["reference"] = timeline_stats(res.reference);
  write_text(a.out + "/summary.json", summary.dump(2) + "\n");
  return 0;
}

int run_synth(const std::string& spec_path, const CommonArgs& a,
              bool seed_given, std::uint64_t seed, const std::string& format) {
  rppg::synth::SynthSpec spec = rppg::synth::load_synth_spec(spec_path);
  if (seed_given) spec.seed = seed;
  const rppg::synth::SynthResult res =
      rppg::synth::generate_synthetic_video(spec, a.threads);
  ensure_dir(a.out);
  rppg::synth::write_synth_output(res, a.out, format);
  return 0;
}

int run_pad_train(const std::string& features_path, int folds,
                  const std::string& model_path) {
  const std::vector<rppg::pad::PadSample> samples =
      rppg::pad::read_feature_csv(features_path);
  const rppg::pad::TrainResult res =
      rppg::pad::svm_train(std::span(samples.data(), samples.size()), folds);

  ensure_parent_dir(model_path);
  rppg::pad::save_model_json(res.model, model_path);

  json report;
  report["folds"] = json::array();
  for (const auto& f : res.cv.folds) {
    report["folds"].push_back({{"fold", f.fold},
                               {"test_count", f.test_count},
                               {"correct", f.correct},
                               {"accuracy", f.accuracy}});
  }
  report["accuracy"] = res.cv.accuracy;
  report["confusion"] = {
      {"actual_no_attack",
       {{"predicted_no_attack", res.cv.confusion[0][0]},
        {"predicted_attack", res.cv.confusion[0][1]}}},
      {"actual_attack",
       {{"predicted_no_attack", res.cv.confusion[1][0]},
        {"predicted_attack", res.cv.confusion[1][1]}}}};
  const fs::path report_path =
      fs::path(model_path).parent_path() / "cv_report.json";
  write_text(report_path.string(), report.dump(2) + "\n");

  std::printf("cv accuracy %.4f over %d folds (%zu samples)\n",
              res.cv.accuracy, folds, samples.size());
  return 0;
}

int run_pad_classify(const std::string& model_path,
                     const std::string& features_path,
                     const std::string& out_dir) {
  const rppg::pad::SvmModel model = rppg::pad::load_model_json(model_path);
  const std::vector<rppg::pad::PadSample> samples =
      rppg::pad::read_feature_csv(features_path);

  ensure_dir(out_dir);
  std::ofstream csv(out_dir + "/predictions.csv", std::ios::binary);
  if (!csv)
    rppg::fail(rppg::Errc::IoFailure, "cli.out",
               "cannot write predictions.csv");
  csv << "subject_id,region,window,decision,predicted,label\n";

  struct Tally {
    std::size_t attack = 0;
    std::size_t total = 0;
  };
  std::map<std::string, Tally> votes;
  std::size_t correct = 0;
  char buf[96];
  for (const auto& s : samples) {
    const double feats[3] = {s.snr_db, s.magnitude, s.rho_ref};
    const rppg::pad::Prediction p =
        rppg::pad::svm_predict(model, std::span(feats, 3));
    std::snprintf(buf, sizeof buf, ",%d,%.10g,%d,%d\n", s.window_index,
                  p.decision, p.label, s.label);
    csv << s.subject_id << ',' << s.region << buf;
    Tally& t = votes[s.subject_id];
    t.attack += p.label == 1;
    ++t.total;
    correct += p.label == s.label;
  }
  csv.close();

  json verdicts;
  verdicts["sample_accuracy"] =
      samples.empty() ? 0.0
                      : static_cast<double>(correct) /
                            static_cast<double>(samples.size());
  for (const auto& [subject, t] : votes) {
    // Majority vote per subject; a tie counts as an attack (the cautious
    // verdict for a detector).
    const bool attack = 2 * t.attack >= t.total;
    verdicts["subjects"][subject] = {{"attack_votes", t.attack},
                                     {"samples", t.total},
                                     {"verdict", attack ? "attack"
                                                        : "no-attack"}};
  }
  write_text(out_dir + "/verdicts.json", verdicts.dump(2) + "\n");
  return 0;
}

int run_render(const std::string& map_path, const std::string& out_png,
               std::optional<double> lo, std::optional<double> hi,
               const std::string& contour_path) {
  const rppg::scales::MapMatrix m = rppg::scales::read_map_file(map_path);
  rppg::render::HeatmapOptions opt;
  opt.range_min = lo;
  opt.range_max = hi;
  rppg::video::RoiMask contour;
  if (!contour_path.empty()) {
    contour = rppg::video::read_mask_png(contour_path);
    opt.contour = &contour;
  }
  ensure_parent_dir(out_png);
  rppg::video::write_png(rppg::render::render_heatmap(m, opt), out_png);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"rPPG perfusion analysis"};
  app.require_subcommand(1);

  CommonArgs args;
  std::string spec_path;
  std::string features_path;
  std::string model_path;
  std::string map_path;
  std::string out_png;
  std::string contour_path;
  std::string format = "png";
  int folds = 10;
  std::uint64_t seed = 0;
  double range_min = 0.0;
  double range_max = 0.0;

  auto add_common = [&](CLI::App* sub, bool needs_input) {
    if (needs_input)
      sub->add_option("--input", args.input,
                      "frame directory or raw stream file")
          ->required();
    sub->add_option("--config", args.config, "analysis config JSON");
    sub->add_option("--out", args.out, "output directory")->required();
    sub->add_option("--threads", args.threads, "worker threads")
        ->check(CLI::PositiveNumber);
    return sub;
  };

  CLI::App* global = add_common(
      app.add_subcommand("analyze-global", "whole-ROI perfusion metrics"),
      true);
  global->add_option("--roi", args.roi, "ROI mask PNG")->required();
  global->add_option("--ref", args.ref, "reference region mask PNG");
  global->add_option("--external-hr", args.external_hr_bpm,
                     "external heart rate, BPM");
  global->add_flag("--skin-seg", args.skin_seg, "restrict masks to skin");
  global->add_flag("--register", args.register_frames,
                   "translation motion compensation");

  CLI::App* regions = add_common(
      app.add_subcommand("analyze-regions", "five-region facial metrics"),
      true);
  regions->add_option("--landmarks", args.landmarks,
                      "68-point landmark CSV (or directory, one per frame)")
      ->required();
  regions->add_flag("--skin-seg", args.skin_seg, "restrict masks to skin");
  regions->add_flag("--register", args.register_frames,
                    "translation motion compensation");

  CLI::App* local = add_common(
      app.add_subcommand("analyze-local", "per-pixel perfusion maps"), true);
  local->add_option("--roi", args.roi, "ROI mask PNG");
  local->add_option("--ref", args.ref, "reference region mask PNG");
  local->add_option("--external-hr", args.external_hr_bpm,
                    "external heart rate, BPM");
  local->add_flag("--skin-seg", args.skin_seg, "restrict maps to skin");
  local->add_flag("--register", args.register_frames,
                  "translation motion compensation");
  local->add_option("--pyramid-target", args.pyramid_target,
                    "target pixel count of the analysis level")
      ->check(CLI::PositiveNumber);

  CLI::App* synth = add_common(
      app.add_subcommand("synth", "generate a synthetic pulsatile video"),
      false);
  synth->add_option("--spec", spec_path, "synthesis spec JSON")->required();
  CLI::Option* seed_opt =
      synth->add_option("--seed", seed, "override the spec seed");
  synth->add_option("--format", format, "frame format")
      ->check(CLI::IsMember({"png", "ppm"}));

  CLI::App* train =
      app.add_subcommand("pad-train", "train the attack classifier");
  train->add_option("--features", features_path, "feature table CSV")
      ->required();
  train->add_option("--folds", folds, "cross-validation folds")
      ->check(CLI::PositiveNumber);
  train->add_option("--out", model_path, "model JSON path")->required();

  CLI::App* classify =
      app.add_subcommand("pad-classify", "classify a feature table");
  classify->add_option("--model", model_path, "model JSON")->required();
  classify->add_option("--features", features_path, "feature table CSV")
      ->required();
  classify->add_option("--out", args.out, "output directory")->required();

  CLI::App* render = app.add_subcommand("render", "render a map to PNG");
  render->add_option("--map", map_path, "map matrix .bin file")->required();
  render->add_option("--out", out_png, "output PNG path")->required();
  CLI::Option* min_opt =
      render->add_option("--min", range_min, "fixed range minimum");
  CLI::Option* max_opt =
      render->add_option("--max", range_max, "fixed range maximum");
  render->add_option("--contour", contour_path, "mask whose outline is drawn");

  global->callback([&] { run_analyze_global(args); });
  regions->callback([&] { run_analyze_regions(args); });
  local->callback([&] { run_analyze_local(args); });
  synth->callback([&] {
    run_synth(spec_path, args, seed_opt->count() > 0, seed, format);
  });
  train->callback([&] { run_pad_train(features_path, folds, model_path); });
  classify->callback(
      [&] { run_pad_classify(model_path, features_path, args.out); });
  render->callback([&] {
    run_render(map_path, out_png,
               min_opt->count() > 0 ? std::optional<double>(range_min)
                                    : std::nullopt,
               max_opt->count() > 0 ? std::optional<double>(range_max)
                                    : std::nullopt,
               contour_path);
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  } catch (const rppg::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return rppg::is_input_error(e.code()) ? 2 : 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
