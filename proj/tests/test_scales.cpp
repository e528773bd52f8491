#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "rppg/errors.hpp"
#include "rppg/scales/io.hpp"
#include "rppg/scales/pipelines.hpp"
#include "rppg/scales/regions.hpp"
#include "rppg/synth/generator.hpp"
#include "test_util.hpp"

using namespace rppg;
using namespace rppg::scales;

namespace {

video::RoiMask rect_mask(int w, int h, int x0, int y0, int x1, int y1) {
  video::RoiMask m = video::RoiMask::filled(w, h, 0);
  for (int y = y0; y < y1; ++y)
    for (int x = x0; x < x1; ++x) m.set(x, y, true);
  return m;
}

synth::SynthSpec small_spec(int w, int h, double duration) {
  synth::SynthSpec spec;
  spec.width = w;
  spec.height = h;
  spec.fs = 30.0;
  spec.duration = duration;
  spec.pulse_hr = 72.0;
  spec.pulse_amplitude = 0.02;
  spec.noise_sigma = 0.005;
  spec.seed = 99;
  return spec;
}

double mean_of(const std::vector<double>& v) {
  double acc = 0.0;
  for (double x : v) acc += x;
  return acc / static_cast<double>(v.size());
}

}  // namespace

TEST_CASE("window_starts walks the recording in t_step hops") {
  core::AnalysisConfig cfg;
  const auto starts = window_starts(900, 30.0, cfg);
  REQUIRE(starts.size() == 21);
  CHECK(starts.front() == 0);
  CHECK(starts[1] == 30);
  CHECK(starts.back() == 600);
  CHECK(window_starts(299, 30.0, cfg).empty());
  CHECK(window_starts(300, 30.0, cfg).size() == 1);
}

TEST_CASE("polygon_area is the shoelace area") {
  std::vector<video::Point> square = {{2, 2}, {7, 2}, {7, 6}, {2, 6}};
  CHECK(polygon_area(square) == doctest::Approx(20.0));
  std::vector<video::Point> tri = {{0, 0}, {4, 0}, {0, 4}};
  CHECK(polygon_area(tri) == doctest::Approx(8.0));
}

TEST_CASE("rasterize_polygon fills pixel centers inside the outline") {
  SUBCASE("axis-aligned square") {
    std::vector<video::Point> square = {{2, 2}, {7, 2}, {7, 6}, {2, 6}};
    const auto mask = rasterize_polygon(square, 10, 10);
    CHECK(mask.count_set() == 20);
    for (int y = 0; y < 10; ++y)
      for (int x = 0; x < 10; ++x)
        CHECK(mask.at(x, y) == (x >= 2 && x <= 6 && y >= 2 && y <= 5));
  }
  SUBCASE("matches an even-odd oracle on a skewed triangle") {
    std::vector<video::Point> tri = {{0.3, 0.2}, {8.7, 1.1}, {4.2, 7.9}};
    const auto mask = rasterize_polygon(tri, 10, 10);
    for (int y = 0; y < 10; ++y)
      for (int x = 0; x < 10; ++x)
        CHECK(mask.at(x, y) ==
              testutil::point_in_polygon(x + 0.5, y + 0.5, tri));
  }
  SUBCASE("clips to the frame") {
    std::vector<video::Point> big = {{-5, -5}, {20, -5}, {20, 20}, {-5, 20}};
    const auto mask = rasterize_polygon(big, 4, 4);
    CHECK(mask.count_set() == 16);
  }
}

TEST_CASE("regions_from_landmarks builds five disjoint face regions") {
  const auto lm = testutil::make_face_landmarks();
  const auto regions = regions_from_landmarks(lm, 100, 100);

  SUBCASE("canonical order and sane areas") {
    for (std::size_t i = 0; i < 5; ++i) {
      CHECK(regions[i].name == kRegionOrder[i]);
      CHECK(polygon_area(regions[i].polygon) >= 25.0);
    }
  }
  SUBCASE("left regions sit left of right regions") {
    auto centroid_x = [](const RegionSpec& r) {
      double acc = 0.0;
      for (const auto& p : r.polygon) acc += p.x;
      return acc / static_cast<double>(r.polygon.size());
    };
    CHECK(centroid_x(regions[1]) < centroid_x(regions[0]));  // foreheads
    CHECK(centroid_x(regions[3]) < centroid_x(regions[2]));  // cheeks
  }
  SUBCASE("polygons are pairwise disjoint by point-in-polygon brute force") {
    for (int y = 0; y < 100; ++y)
      for (int x = 0; x < 100; ++x) {
        int hits = 0;
        for (const auto& r : regions)
          hits += testutil::point_in_polygon(x + 0.5, y + 0.5, r.polygon);
        CHECK(hits <= 1);
      }
  }
  SUBCASE("foreheads rise above the brows, nose covers the nose tip") {
    const auto masks = region_masks(regions, 100, 100);
    for (std::size_t i : {0u, 1u}) {
      REQUIRE(masks[i].count_set() > 0);
      for (int y = 0; y < 100; ++y)
        for (int x = 0; x < 100; ++x)
          if (masks[i].at(x, y)) CHECK(y < 40);
    }
    CHECK(masks[4].at(50, 60));
  }
  SUBCASE("rasterized region masks are pairwise disjoint and nonempty") {
    const auto masks = region_masks(regions, 100, 100);
    for (const auto& m : masks) CHECK(m.count_set() > 25);
    for (int y = 0; y < 100; ++y)
      for (int x = 0; x < 100; ++x) {
        int hits = 0;
        for (const auto& m : masks) hits += m.at(x, y);
        CHECK(hits <= 1);
      }
  }
  SUBCASE("mirroring the face swaps left and right") {
    video::LandmarkSet mirrored = lm;
    for (auto& p : mirrored.points) p.x = 99.0 - p.x;
    const auto swapped = regions_from_landmarks(mirrored, 100, 100);
    for (std::size_t i = 0; i < 5; ++i) CHECK(swapped[i].name == kRegionOrder[i]);
    // Mirroring preserves every area; the name assignment flips sides.
    CHECK(polygon_area(swapped[0].polygon) ==
          doctest::Approx(polygon_area(regions[1].polygon)).epsilon(0.01));
    CHECK(polygon_area(swapped[3].polygon) ==
          doctest::Approx(polygon_area(regions[2].polygon)).epsilon(0.01));
  }
  SUBCASE("collinear landmarks are degenerate") {
    video::LandmarkSet flat;
    flat.points.resize(68);
    for (std::size_t i = 0; i < 68; ++i)
      flat.points[i] = {static_cast<double>(i), 50.0};
    try {
      regions_from_landmarks(flat, 100, 100);
      FAIL("expected DegenerateLandmarks");
    } catch (const Error& e) {
      CHECK(e.code() == Errc::DegenerateLandmarks);
    }
  }
}

TEST_CASE("analyze_global tracks the pulse in the ROI") {
  auto spec = small_spec(40, 30, 15.0);
  spec.dead_zones.push_back({0, 0, 12, 30});
  const auto synth_out = synth::generate_synthetic_video(spec);
  const auto& seq = synth_out.video;
  core::AnalysisConfig cfg;

  const auto roi_pulse = rect_mask(40, 30, 14, 1, 26, 29);
  const auto roi_dead = rect_mask(40, 30, 1, 1, 11, 29);
  const auto ref = rect_mask(40, 30, 27, 1, 39, 29);

  SUBCASE("pulsatile ROI with a pulsatile reference") {
    const auto out = analyze_global(seq, roi_pulse, &ref, cfg);
    REQUIRE(out.roi.entries.size() == 6);
    REQUIRE(out.reference.entries.size() == 6);
    for (std::size_t i = 0; i < out.roi.entries.size(); ++i) {
      const auto& e = out.roi.entries[i];
      CHECK(e.t_start == doctest::Approx(static_cast<double>(i)));
      CHECK(e.bpm >= 71.0);
      CHECK(e.bpm <= 73.0);
      CHECK(e.bpm == 60.0 * e.f_hr);  // exact by construction
      CHECK(e.f_hr >= cfg.f1);
      CHECK(e.f_hr <= cfg.f2);
      CHECK(e.pi > 1.0);
      REQUIRE(e.rho_ref.has_value());
      CHECK(*e.rho_ref > 0.9);
      CHECK(out.reference.entries[i].rho_ref.value_or(0.0) == 1.0);
    }
  }
  SUBCASE("a dead ROI scores at least 10 dB below a pulsatile one") {
    // The default 0.05 Hz mask is narrower than the mainlobe of a 10 s
    // Hann window, which caps even a clean tone's SNR near +2 dB and the
    // dead-vs-live gap near 9 dB. Widen the mask to cover the mainlobe so
    // the paired runs separate cleanly; both runs share the same config.
    auto wide = cfg;
    wide.hr_tolerance = 0.2;
    const auto good = analyze_global(seq, roi_pulse, &ref, wide);
    const auto bad = analyze_global(seq, roi_dead, &ref, wide);
    double snr_good = 0.0, snr_bad = 0.0;
    for (const auto& e : good.roi.entries) snr_good += e.snr_db;
    for (const auto& e : bad.roi.entries) snr_bad += e.snr_db;
    snr_good /= static_cast<double>(good.roi.entries.size());
    snr_bad /= static_cast<double>(bad.roi.entries.size());
    CHECK(snr_bad < snr_good - 10.0);
  }
  SUBCASE("an external heart rate replaces the reference region") {
    const auto out = analyze_global(seq, roi_pulse, nullptr, cfg, 1.2);
    CHECK(out.reference.entries.empty());
    REQUIRE(out.roi.entries.size() == 6);
    for (const auto& e : out.roi.entries) {
      REQUIRE(e.rho_ref.has_value());
      CHECK(*e.rho_ref > 0.9);
      CHECK(*e.rho_ref <= 1.0);
    }
  }
  SUBCASE("missing reference sources are rejected") {
    try {
      analyze_global(seq, roi_pulse, nullptr, cfg);
      FAIL("expected MissingReference");
    } catch (const Error& e) {
      CHECK(e.code() == Errc::MissingReference);
    }
  }
  SUBCASE("an empty ROI is rejected") {
    const auto empty = video::RoiMask::filled(40, 30, 0);
    try {
      analyze_global(seq, empty, &ref, cfg);
      FAIL("expected EmptyMask");
    } catch (const Error& e) {
      CHECK(e.code() == Errc::EmptyMask);
    }
  }
}

TEST_CASE("analyze_global refuses recordings shorter than one window") {
  const auto out = synth::generate_synthetic_video(small_spec(8, 8, 5.0));
  core::AnalysisConfig cfg;
  const auto roi = rect_mask(8, 8, 0, 0, 8, 8);
  try {
    analyze_global(out.video, roi, &roi, cfg);
    FAIL("expected TooShortRecording");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::TooShortRecording);
  }
}

TEST_CASE("analyze_regions measures all five face regions") {
  auto spec = small_spec(100, 100, 15.0);
  // The smallest face region holds only a few dozen pixels, so give the
  // pulse more headroom over the noise there than the full-frame tests need.
  spec.pulse_amplitude = 0.04;
  spec.noise_sigma = 0.002;
  const auto lm = testutil::make_face_landmarks();
  core::AnalysisConfig cfg;

  SUBCASE("uniform pulsation lands every region near 72 BPM") {
    const auto synth_out = synth::generate_synthetic_video(spec);
    std::vector<video::LandmarkSet> single = {lm};
    const auto out = analyze_regions(synth_out.video, single, cfg);
    for (const auto& tl : out.timelines) {
      REQUIRE(tl.entries.size() == 6);
      for (const auto& e : tl.entries) {
        CHECK(e.bpm >= 70.0);
        CHECK(e.bpm <= 74.0);
      }
    }
    // Static landmarks and per-frame copies of the same set must agree
    // to the last bit.
    std::vector<video::LandmarkSet> per_frame(synth_out.video.size(), lm);
    const auto out2 = analyze_regions(synth_out.video, per_frame, cfg);
    CHECK(out2.reference_index == out.reference_index);
    for (std::size_t r = 0; r < 5; ++r) {
      REQUIRE(out2.timelines[r].entries.size() == out.timelines[r].entries.size());
      for (std::size_t i = 0; i < out.timelines[r].entries.size(); ++i) {
        const auto& a = out.timelines[r].entries[i];
        const auto& b = out2.timelines[r].entries[i];
        CHECK(a.f_hr == b.f_hr);
        CHECK(a.snr_db == b.snr_db);
        CHECK(a.magnitude == b.magnitude);
        CHECK(a.pi == b.pi);
        CHECK(a.rho_ref.value_or(-9.0) == b.rho_ref.value_or(-9.0));
      }
    }
  }
  SUBCASE("a dead nose decorrelates from the live regions") {
    auto dead = spec;
    dead.dead_zones.push_back({42, 40, 17, 28});  // covers the nose region
    const auto synth_out = synth::generate_synthetic_video(dead);
    std::vector<video::LandmarkSet> single = {lm};
    const auto out = analyze_regions(synth_out.video, single, cfg);
    const std::size_t nose = 4;
    CHECK(out.reference_index != nose);
    std::vector<double> rho_nose, rho_live;
    for (std::size_t r = 0; r < 5; ++r) {
      for (const auto& e : out.timelines[r].entries) {
        if (r == nose)
          rho_nose.push_back(e.rho_ref.value_or(0.0));
        else
          rho_live.push_back(e.rho_ref.value_or(0.0));
      }
    }
    CHECK(mean_of(rho_nose) < 0.3);
    CHECK(mean_of(rho_live) > 0.8);
  }
  SUBCASE("landmark count must be one or one per frame") {
    const auto synth_out = synth::generate_synthetic_video(small_spec(100, 100, 11.0));
    std::vector<video::LandmarkSet> two = {lm, lm};
    try {
      analyze_regions(synth_out.video, two, cfg);
      FAIL("expected BadLandmarks");
    } catch (const Error& e) {
      CHECK(e.code() == Errc::BadLandmarks);
    }
  }
}

TEST_CASE("analyze_local resolves perfusion down to pixels") {
  core::AnalysisConfig cfg;

  // Per-pixel traces see the full, unaveraged noise, so the pixel-level
  // subcases run a stronger pulse than the aggregate tests do. At 5%
  // amplitude and 0.3% noise a single pixel's band-passed noise sits near a
  // fifth of the pulse RMS, which keeps rho comfortably above 0.9.
  auto pixel_spec = [](double duration) {
    auto spec = small_spec(24, 24, duration);
    spec.pulse_amplitude = 0.05;
    spec.noise_sigma = 0.003;
    return spec;
  };

  SUBCASE("uniform pulsatile video correlates everywhere") {
    const auto out_s = synth::generate_synthetic_video(pixel_spec(12.0));
    const auto ref = rect_mask(24, 24, 0, 0, 6, 24);
    const auto res = analyze_local(out_s.video, nullptr, &ref, cfg);
    CHECK(res.level == 0);
    CHECK(res.width == 24);
    CHECK(res.height == 24);
    REQUIRE(res.windows.size() == 3);
    REQUIRE(res.reference.entries.size() == 3);
    for (const auto& win : res.windows) {
      double acc = 0.0, acc2 = 0.0;
      std::size_t n = 0;
      for (double v : win.rho_ref) {
        REQUIRE(std::isfinite(v));
        acc += v;
        acc2 += v * v;
        ++n;
      }
      const double mean = acc / static_cast<double>(n);
      const double var = acc2 / static_cast<double>(n) - mean * mean;
      CHECK(mean > 0.9);
      CHECK(var < 0.05);
    }
  }
  SUBCASE("a dead rectangle shows up in magnitude and correlation") {
    auto spec = pixel_spec(12.0);
    spec.dead_zones.push_back({2, 2, 10, 8});
    const auto out_s = synth::generate_synthetic_video(spec);
    const auto ref = rect_mask(24, 24, 16, 0, 24, 24);
    const auto res = analyze_local(out_s.video, nullptr, &ref, cfg);
    REQUIRE(!res.windows.empty());
    auto inside = [](int x, int y) {
      return x >= 2 && x < 12 && y >= 2 && y < 10;
    };
    for (const auto& win : res.windows) {
      double mag_in = 0.0, mag_out = 0.0, rho_in = 0.0, rho_out = 0.0;
      std::size_t n_in = 0, n_out = 0;
      for (int y = 0; y < 24; ++y)
        for (int x = 0; x < 24; ++x) {
          const std::size_t i = static_cast<std::size_t>(y) * 24 + x;
          if (inside(x, y)) {
            mag_in += win.magnitude[i];
            rho_in += win.rho_ref[i];
            ++n_in;
          } else {
            mag_out += win.magnitude[i];
            rho_out += win.rho_ref[i];
            ++n_out;
          }
        }
      mag_in /= static_cast<double>(n_in);
      mag_out /= static_cast<double>(n_out);
      rho_in /= static_cast<double>(n_in);
      rho_out /= static_cast<double>(n_out);
      CHECK(mag_in < 0.1 * mag_out);
      CHECK(rho_in < 0.3);
      CHECK(rho_out > 0.9);
    }
  }
  SUBCASE("defined pixels agree across the four maps when an ROI applies") {
    const auto out_s = synth::generate_synthetic_video(small_spec(24, 24, 11.0));
    const auto roi = rect_mask(24, 24, 3, 5, 20, 19);
    const auto ref = rect_mask(24, 24, 0, 0, 24, 3);
    const auto res = analyze_local(out_s.video, &roi, &ref, cfg);
    REQUIRE(!res.windows.empty());
    bool saw_defined = false, saw_undefined = false;
    for (const auto& win : res.windows) {
      for (std::size_t i = 0; i < win.magnitude.size(); ++i) {
        const bool def = !std::isnan(win.magnitude[i]);
        CHECK(def == !std::isnan(win.snr_db[i]));
        CHECK(def == !std::isnan(win.rho_ref[i]));
        CHECK(def == !std::isnan(win.bpm[i]));
        (def ? saw_defined : saw_undefined) = true;
      }
    }
    CHECK(saw_defined);
    CHECK(saw_undefined);
  }
  SUBCASE("global and local heart rates agree") {
    const auto out_s = synth::generate_synthetic_video(pixel_spec(12.0));
    const auto roi = rect_mask(24, 24, 0, 0, 24, 24);
    const auto ref = rect_mask(24, 24, 0, 0, 6, 24);
    const auto glob = analyze_global(out_s.video, roi, &ref, cfg);
    const auto loc = analyze_local(out_s.video, nullptr, &ref, cfg);
    REQUIRE(!loc.windows.empty());
    std::vector<double> bpms;
    for (double v : loc.windows[0].bpm)
      if (!std::isnan(v)) bpms.push_back(v);
    REQUIRE(!bpms.empty());
    std::sort(bpms.begin(), bpms.end());
    const double median = bpms[bpms.size() / 2];
    CHECK(std::abs(median - glob.roi.entries[0].bpm) <= 2.0);
  }
  SUBCASE("one frame is far too short") {
    video::FrameSequence seq;
    seq.width = 24;
    seq.height = 24;
    seq.fs = 30.0;
    seq.frames.push_back(video::Image::filled(24, 24, 180, 130, 110));
    try {
      analyze_local(seq, nullptr, nullptr, cfg, 1.2);
      FAIL("expected TooShortRecording");
    } catch (const Error& e) {
      CHECK(e.code() == Errc::TooShortRecording);
    }
  }
}

TEST_CASE("reperfusion_event_time finds the normalized PI peak") {
  MetricsTimeline tl;
  tl.fs = 30.0;
  auto add = [&](double t, double pi) {
    core::WindowMetrics m;
    m.t_start = t;
    m.pi = pi;
    tl.entries.push_back(m);
  };
  SUBCASE("simple peak") {
    add(0, 1.01);
    add(1, 1.02);
    add(2, 1.4);
    add(3, 1.1);
    CHECK(reperfusion_event_time(tl) == doctest::Approx(2.0));
  }
  SUBCASE("ties resolve to the earliest window") {
    add(0, 1.0);
    add(1, 1.4);
    add(2, 1.2);
    add(3, 1.4);
    CHECK(reperfusion_event_time(tl) == doctest::Approx(1.0));
  }
  SUBCASE("flat series falls back to the first window") {
    add(5, 1.3);
    add(6, 1.3);
    CHECK(reperfusion_event_time(tl) == doctest::Approx(5.0));
  }
  SUBCASE("empty timeline has no event") {
    CHECK(std::isnan(reperfusion_event_time(tl)));
  }
}

TEST_CASE("map files round-trip including NaN cells") {
  const auto dir = testutil::scratch_dir("scales_maps");
  MapMatrix m;
  m.width = 3;
  m.height = 2;
  m.metric = "magnitude";
  m.values = {1.5, -2.25, std::nan(""), 0.0, 1e300, -0.5};
  const auto path = (dir / "m.bin").string();
  write_map_file(m, path);
  const auto back = read_map_file(path);
  CHECK(back.width == 3);
  CHECK(back.height == 2);
  CHECK(back.metric == "magnitude");
  REQUIRE(back.values.size() == 6);
  for (std::size_t i = 0; i < 6; ++i) {
    if (std::isnan(m.values[i]))
      CHECK(std::isnan(back.values[i]));
    else
      CHECK(back.values[i] == m.values[i]);
  }
  SUBCASE("corrupt magic fails") {
    std::fstream f(path, std::ios::binary | std::ios::in | std::ios::out);
    f.write("XXXX", 4);
    f.close();
    try {
      read_map_file(path);
      FAIL("expected IoFailure");
    } catch (const Error& e) {
      CHECK(e.code() == Errc::IoFailure);
    }
  }
  SUBCASE("truncated payload fails") {
    std::filesystem::resize_file(path, std::filesystem::file_size(path) - 9);
    CHECK_THROWS_AS(read_map_file(path), Error);
  }
  SUBCASE("maps_of names the four planes") {
    PerfusionMapSet set;
    set.width = 2;
    set.height = 1;
    set.magnitude = {1, 2};
    set.snr_db = {3, 4};
    set.rho_ref = {5, 6};
    set.bpm = {7, 8};
    const auto arr = maps_of(set);
    CHECK(arr[0].metric == "magnitude");
    CHECK(arr[1].metric == "snr_db");
    CHECK(arr[2].metric == "rho_ref");
    CHECK(arr[3].metric == "bpm");
    CHECK(arr[3].values[1] == 8.0);
  }
}

TEST_CASE("timeline csv bytes are stable") {
  const auto dir = testutil::scratch_dir("scales_csv");
  MetricsTimeline tl;
  tl.fs = 30.0;
  core::WindowMetrics a;
  a.t_start = 0.0;
  a.f_hr = 1.2;
  a.bpm = 72.0;
  a.snr_db = 10.5;
  a.magnitude = 3.25;
  a.pi = 1.1;
  a.rho_ref = 0.5;
  core::WindowMetrics b = a;
  b.t_start = 1.0;
  b.rho_ref.reset();
  tl.entries = {a, b};
  const auto path = (dir / "t.csv").string();
  write_timeline_csv(tl, path);
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  CHECK(ss.str() ==
        "t_start,f_hr,bpm,snr_db,magnitude,pi,rho_ref\n"
        "0,1.2,72,10.5,3.25,1.1,0.5\n"
        "1,1.2,72,10.5,3.25,1.1,\n");
}
