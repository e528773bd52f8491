#include "rppg/pad/features.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>
#include <stdexcept>

#include "rppg/errors.hpp"
#include "rppg/scales/pipelines.hpp"

namespace rppg::pad {
namespace {

constexpr const char* kCsvHeader =
    "subject_id,region,window,snr_db,magnitude,rho_ref,label";

double parse_double(const std::string& field, const char* what) {
  try {
    std::size_t used = 0;
    double v = std::stod(field, &used);
    if (used != field.size() || !std::isfinite(v)) throw std::
        invalid_argument(field);
    return v;
  } catch (const std::logic_error&) {
    fail(Errc::BadFeatureTable, "pad.read_features",
         std::string("bad ") + what + " value: " + field);
  }
}

}  // namespace

std::size_t select_reference_region(
    std::span<const scales::MetricsTimeline> timelines) {
  std::size_t best = timelines.size();
  double best_mean = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < timelines.size(); ++i) {
    const auto& entries = timelines[i].entries;
    if (entries.empty()) continue;
    double sum = 0.0;
    for (const auto& e : entries) sum += e.snr_db;
    const double mean = sum / static_cast<double>(entries.size());
    if (mean > best_mean) {  // strict: ties keep the earlier region
      best_mean = mean;
      best = i;
    }
  }
  if (best == timelines.size())
    fail(Errc::NoRegions, "pad.select_reference",
         "no region with at least one analysis window");
  return best;
}

std::vector<PadSample> extract_feature_table(
    const video::FrameSequence& seq, std::span<const video::LandmarkSet> lm,
    const core::AnalysisConfig& cfg, int label,
    const std::string& subject_id) {
  scales::RegionsResult res = scales::analyze_regions(seq, lm, cfg);
  std::vector<PadSample> samples;
  for (std::size_t r = 0; r < res.timelines.size(); ++r) {
    const auto& tl = res.timelines[r];
    for (std::size_t wi = 0; wi < tl.entries.size(); ++wi) {
      PadSample s;
      s.subject_id = subject_id;
      s.region = scales::region_name_str(scales::kRegionOrder[r]);
      s.window_index = static_cast<int>(wi);
      s.snr_db = tl.entries[wi].snr_db;
      s.magnitude = tl.entries[wi].magnitude;
      s.rho_ref = tl.entries[wi].rho_ref.value_or(0.0);
      s.label = label;
      samples.push_back(std::move(s));
    }
  }
  return samples;
}

std::vector<std::uint8_t> subject_disjoint_split(
    std::span<const PadSample> samples, double test_fraction) {
  std::vector<std::uint8_t> flags(samples.size(), 0);
  if (samples.empty()) return flags;
  if (test_fraction >= 1.0) {
    std::fill(flags.begin(), flags.end(), 1);
    return flags;
  }
  if (test_fraction <= 0.0) return flags;

  std::map<std::string, std::size_t> counts;
  for (const auto& s : samples) ++counts[s.subject_id];
  std::vector<std::pair<std::string, std::size_t>> subjects(counts.begin(),
                                                            counts.end());
  // Large subjects first so the greedy fill approaches the target tightly.
  std::sort(subjects.begin(), subjects.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });

  const double target = test_fraction * static_cast<double>(samples.size());
  std::size_t taken = 0;
  std::map<std::string, bool> in_test;
  for (const auto& [name, count] : subjects) {
    if (static_cast<double>(taken + count) <= target) {
      in_test[name] = true;
      taken += count;
    }
  }
  for (std::size_t i = 0; i < samples.size(); ++i)
    if (in_test.count(samples[i].subject_id)) flags[i] = 1;
  return flags;
}

void write_feature_csv(std::span<const PadSample> samples,
                       const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out)
    fail(Errc::IoFailure, "pad.write_features", "cannot write " + path);
  out << kCsvHeader << "\n";
  char buf[160];
  for (const auto& s : samples) {
    std::snprintf(buf, sizeof buf, ",%d,%.10g,%.10g,%.10g,%d\n",
                  s.window_index, s.snr_db, s.magnitude, s.rho_ref, s.label);
    out << s.subject_id << ',' << s.region << buf;
  }
  if (!out)
    fail(Errc::IoFailure, "pad.write_features", "write failed: " + path);
}

std::vector<PadSample> read_feature_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(Errc::IoFailure, "pad.read_features", "cannot open " + path);
  std::string line;
  if (!std::getline(in, line) ||
      line.substr(0, line.find_last_not_of("\r") + 1) != kCsvHeader)
    fail(Errc::BadFeatureTable, "pad.read_features",
         "missing or wrong header line");

  std::vector<PadSample> samples;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) fields.push_back(field);
    if (fields.size() != 7)
      fail(Errc::BadFeatureTable, "pad.read_features",
           "expected 7 fields, got " + std::to_string(fields.size()));
    PadSample s;
    s.subject_id = fields[0];
    s.region = fields[1];
    s.window_index = static_cast<int>(parse_double(fields[2], "window"));
    s.snr_db = parse_double(fields[3], "snr_db");
    s.magnitude = parse_double(fields[4], "magnitude");
    s.rho_ref = parse_double(fields[5], "rho_ref");
    const double label = parse_double(fields[6], "label");
    if (label != 0.0 && label != 1.0)
      fail(Errc::BadFeatureTable, "pad.read_features",
           "label must be 0 or 1, got " + fields[6]);
    s.label = static_cast<int>(label);
    samples.push_back(std::move(s));
  }
  return samples;
}

}  // namespace rppg::pad
