#include "rppg/video/io.hpp"

#include <png.h>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "rppg/errors.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace rppg::video {

namespace {

constexpr char kRawMagic[8] = {'R', 'P', 'P', 'G', 'R', 'A', 'W', '1'};
constexpr std::size_t kRawPrefixSize = 48;

Image decode_png(const std::string& path) {
  png_image png;
  std::memset(&png, 0, sizeof(png));
  png.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&png, path.c_str()))
    fail(Errc::CorruptFrame, "video.io", "unreadable png: " + path);
  png.format = PNG_FORMAT_RGB;

  Image img;
  img.width = static_cast<int>(png.width);
  img.height = static_cast<int>(png.height);
  img.data.resize(PNG_IMAGE_SIZE(png));
  if (!png_image_finish_read(&png, nullptr, img.data.data(), 0, nullptr)) {
    png_image_free(&png);
    fail(Errc::CorruptFrame, "video.io", "corrupt png: " + path);
  }
  return img;
}

Image decode_ppm(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(Errc::IoFailure, "video.io", "cannot open " + path);

  auto next_token = [&in, &path]() {
    std::string tok;
    while (in >> tok) {
      if (tok[0] == '#') {
        std::string rest;
        std::getline(in, rest);
        continue;
      }
      return tok;
    }
    fail(Errc::CorruptFrame, "video.io", "truncated ppm header: " + path);
  };

  if (next_token() != "P6")
    fail(Errc::CorruptFrame, "video.io", "not a binary ppm: " + path);
  Image img;
  int maxval = 0;
  try {
    img.width = std::stoi(next_token());
    img.height = std::stoi(next_token());
    maxval = std::stoi(next_token());
  } catch (const std::logic_error&) {
    fail(Errc::CorruptFrame, "video.io", "malformed ppm header: " + path);
  }
  if (img.width <= 0 || img.height <= 0 || maxval != 255)
    fail(Errc::CorruptFrame, "video.io", "unsupported ppm header: " + path);
  in.get();  // single whitespace after maxval

  img.data.resize(static_cast<std::size_t>(img.width) * img.height * 3);
  in.read(reinterpret_cast<char*>(img.data.data()),
          static_cast<std::streamsize>(img.data.size()));
  if (in.gcount() != static_cast<std::streamsize>(img.data.size()))
    fail(Errc::CorruptFrame, "video.io", "truncated ppm data: " + path);
  return img;
}

bool has_png_signature(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  unsigned char sig[8] = {};
  in.read(reinterpret_cast<char*>(sig), 8);
  return in.gcount() >= 8 && png_sig_cmp(sig, 0, 8) == 0;
}

json read_json_file(const std::string& path, Errc missing_code) {
  std::ifstream in(path);
  if (!in) fail(missing_code, "video.io", "missing " + path);
  json j = json::parse(in, nullptr, false);
  if (j.is_discarded())
    fail(missing_code, "video.io", "unparseable json: " + path);
  return j;
}

FrameSequence load_frame_dir(const std::string& dir) {
  const fs::path meta_path = fs::path(dir) / "meta.json";
  if (!fs::exists(meta_path))
    fail(Errc::MissingSidecar, "video.io", "no meta.json in " + dir);
  const json meta = read_json_file(meta_path.string(), Errc::MissingSidecar);
  for (const char* key : {"width", "height", "fps", "count"})
    if (!meta.contains(key))
      fail(Errc::MissingSidecar, "video.io",
           std::string("meta.json lacks key ") + key);

  FrameSequence seq;
  std::size_t count = 0;
  try {
    seq.width = meta["width"].get<int>();
    seq.height = meta["height"].get<int>();
    seq.fs = meta["fps"].get<double>();
    count = meta["count"].get<std::size_t>();
  } catch (const json::exception&) {
    fail(Errc::MissingSidecar, "video.io", "bad value types in meta.json");
  }
  if (seq.width <= 0 || seq.height <= 0 || !(seq.fs > 0.0))
    fail(Errc::CorruptFrame, "video.io", "invalid meta.json in " + dir);

  std::vector<std::string> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    const std::string ext = entry.path().extension().string();
    if (ext == ".png" || ext == ".ppm") files.push_back(entry.path().string());
  }
  std::sort(files.begin(), files.end());
  if (files.size() != count)
    fail(Errc::CorruptFrame, "video.io",
         "meta.json declares " + std::to_string(count) + " frames, found " +
             std::to_string(files.size()));
  if (files.empty())
    fail(Errc::CorruptFrame, "video.io", "no frames in " + dir);

  seq.frames.reserve(files.size());
  for (const std::string& f : files) {
    Image img = has_png_signature(f) ? decode_png(f) : decode_ppm(f);
    if (img.width != seq.width || img.height != seq.height)
      fail(Errc::DimensionMismatch, "video.io",
           "frame size differs from meta.json: " + f);
    seq.frames.push_back(std::move(img));
  }
  return seq;
}

std::uint64_t read_u64_le(const unsigned char* p) {
  std::uint64_t v = 0;
  for (int i = 7; i >= 0; --i) v = (v << 8) | p[i];
  return v;
}

void write_u64_le(std::uint64_t v, unsigned char* p) {
  for (int i = 0; i < 8; ++i) {
    p[i] = static_cast<unsigned char>(v & 0xff);
    v >>= 8;
  }
}

FrameSequence load_raw_stream(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(Errc::IoFailure, "video.io", "cannot open " + path);

  unsigned char prefix[kRawPrefixSize];
  in.read(reinterpret_cast<char*>(prefix), kRawPrefixSize);
  if (in.gcount() != static_cast<std::streamsize>(kRawPrefixSize) ||
      std::memcmp(prefix, kRawMagic, sizeof(kRawMagic)) != 0)
    fail(Errc::CorruptFrame, "video.io", "not a raw rppg stream: " + path);

  const std::uint64_t json_len = read_u64_le(prefix + 8);
  if (json_len == 0 || json_len > (1u << 20))
    fail(Errc::CorruptFrame, "video.io", "implausible header length: " + path);
  std::string header(json_len, '\0');
  in.read(header.data(), static_cast<std::streamsize>(json_len));
  if (in.gcount() != static_cast<std::streamsize>(json_len))
    fail(Errc::CorruptFrame, "video.io", "truncated header: " + path);

  const json meta = json::parse(header, nullptr, false);
  if (meta.is_discarded())
    fail(Errc::CorruptFrame, "video.io", "unparseable stream header: " + path);
  for (const char* key : {"width", "height", "fps", "count"})
    if (!meta.contains(key))
      fail(Errc::CorruptFrame, "video.io",
           std::string("stream header lacks key ") + key);

  FrameSequence seq;
  std::size_t count = 0;
  try {
    seq.width = meta["width"].get<int>();
    seq.height = meta["height"].get<int>();
    seq.fs = meta["fps"].get<double>();
    count = meta["count"].get<std::size_t>();
  } catch (const json::exception&) {
    fail(Errc::CorruptFrame, "video.io", "bad value types in stream header");
  }
  if (seq.width <= 0 || seq.height <= 0 || !(seq.fs > 0.0) || count == 0)
    fail(Errc::CorruptFrame, "video.io", "invalid stream header: " + path);

  const std::size_t frame_bytes =
      static_cast<std::size_t>(seq.width) * seq.height * 3;
  seq.frames.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    Image img;
    img.width = seq.width;
    img.height = seq.height;
    img.data.resize(frame_bytes);
    in.read(reinterpret_cast<char*>(img.data.data()),
            static_cast<std::streamsize>(frame_bytes));
    if (in.gcount() != static_cast<std::streamsize>(frame_bytes))
      fail(Errc::CorruptFrame, "video.io",
           "stream ends before frame " + std::to_string(i));
    seq.frames.push_back(std::move(img));
  }
  return seq;
}

}  // namespace

FrameSequence load_frame_sequence(const std::string& path) {
  if (fs::is_directory(path)) return load_frame_dir(path);
  if (!fs::exists(path))
    fail(Errc::IoFailure, "video.io", "no such file or directory: " + path);
  return load_raw_stream(path);
}

void write_frame_dir(const FrameSequence& seq, const std::string& dir,
                     const std::string& ext) {
  if (ext != "png" && ext != "ppm")
    fail(Errc::BadConfig, "video.io", "frame extension must be png or ppm");
  fs::create_directories(dir);
  char name[32];
  for (std::size_t i = 0; i < seq.frames.size(); ++i) {
    std::snprintf(name, sizeof(name), "frame_%06zu.%s", i, ext.c_str());
    const std::string path = (fs::path(dir) / name).string();
    if (ext == "png")
      write_png(seq.frames[i], path);
    else
      write_ppm(seq.frames[i], path);
  }
  json meta;
  meta["width"] = seq.width;
  meta["height"] = seq.height;
  meta["fps"] = seq.fs;
  meta["count"] = seq.frames.size();
  std::ofstream out(fs::path(dir) / "meta.json");
  out << meta.dump(2) << "\n";
}

void write_raw_stream(const FrameSequence& seq, const std::string& path) {
  json meta;
  meta["width"] = seq.width;
  meta["height"] = seq.height;
  meta["fps"] = seq.fs;
  meta["count"] = seq.frames.size();
  const std::string header = meta.dump();

  std::ofstream out(path, std::ios::binary);
  if (!out) fail(Errc::IoFailure, "video.io", "cannot write " + path);
  unsigned char prefix[kRawPrefixSize] = {};
  std::memcpy(prefix, kRawMagic, sizeof(kRawMagic));
  write_u64_le(header.size(), prefix + 8);
  out.write(reinterpret_cast<const char*>(prefix), kRawPrefixSize);
  out.write(header.data(), static_cast<std::streamsize>(header.size()));
  for (const Image& img : seq.frames)
    out.write(reinterpret_cast<const char*>(img.data.data()),
              static_cast<std::streamsize>(img.data.size()));
  if (!out) fail(Errc::IoFailure, "video.io", "write failed: " + path);
}

Image read_image(const std::string& path) {
  if (!fs::exists(path))
    fail(Errc::IoFailure, "video.io", "no such file: " + path);
  return has_png_signature(path) ? decode_png(path) : decode_ppm(path);
}

void write_png(const Image& img, const std::string& path) {
  png_image png;
  std::memset(&png, 0, sizeof(png));
  png.version = PNG_IMAGE_VERSION;
  png.width = static_cast<png_uint_32>(img.width);
  png.height = static_cast<png_uint_32>(img.height);
  png.format = PNG_FORMAT_RGB;
  if (!png_image_write_to_file(&png, path.c_str(), 0, img.data.data(), 0,
                               nullptr))
    fail(Errc::IoFailure, "video.io", "cannot write png: " + path);
}

void write_ppm(const Image& img, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(Errc::IoFailure, "video.io", "cannot write " + path);
  out << "P6\n" << img.width << " " << img.height << "\n255\n";
  out.write(reinterpret_cast<const char*>(img.data.data()),
            static_cast<std::streamsize>(img.data.size()));
  if (!out) fail(Errc::IoFailure, "video.io", "write failed: " + path);
}

RoiMask read_mask_png(const std::string& path) {
  const Image img = read_image(path);
  RoiMask mask;
  mask.width = img.width;
  mask.height = img.height;
  mask.bits.resize(static_cast<std::size_t>(img.width) * img.height);
  for (std::size_t i = 0; i < mask.bits.size(); ++i) {
    const std::uint8_t* p = img.data.data() + i * 3;
    mask.bits[i] = (p[0] | p[1] | p[2]) ? 1 : 0;
  }
  return mask;
}

void write_mask_png(const RoiMask& mask, const std::string& path) {
  std::vector<std::uint8_t> gray(mask.bits.size());
  for (std::size_t i = 0; i < gray.size(); ++i)
    gray[i] = mask.bits[i] ? 255 : 0;

  png_image png;
  std::memset(&png, 0, sizeof(png));
  png.version = PNG_IMAGE_VERSION;
  png.width = static_cast<png_uint_32>(mask.width);
  png.height = static_cast<png_uint_32>(mask.height);
  png.format = PNG_FORMAT_GRAY;
  if (!png_image_write_to_file(&png, path.c_str(), 0, gray.data(), 0, nullptr))
    fail(Errc::IoFailure, "video.io", "cannot write png: " + path);
}

LandmarkSet read_landmarks_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(Errc::IoFailure, "video.io", "cannot open " + path);

  LandmarkSet lm;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (!std::isdigit(static_cast<unsigned char>(line[0]))) continue;  // header
    std::istringstream row(line);
    std::string idx_s, x_s, y_s;
    if (!std::getline(row, idx_s, ',') || !std::getline(row, x_s, ',') ||
        !std::getline(row, y_s, ','))
      fail(Errc::BadLandmarks, "video.io", "malformed landmark row: " + line);
    Point p;
    try {
      const int idx = std::stoi(idx_s);
      if (idx != static_cast<int>(lm.points.size()))
        fail(Errc::BadLandmarks, "video.io",
             "landmark indices must run 0..67 in order");
      p.x = std::stod(x_s);
      p.y = std::stod(y_s);
    } catch (const std::logic_error&) {
      fail(Errc::BadLandmarks, "video.io", "malformed landmark row: " + line);
    }
    if (!std::isfinite(p.x) || !std::isfinite(p.y))
      fail(Errc::BadLandmarks, "video.io", "non-finite landmark coordinate");
    lm.points.push_back(p);
  }
  if (lm.points.size() != 68)
    fail(Errc::BadLandmarks, "video.io",
         "expected 68 landmarks, got " + std::to_string(lm.points.size()));
  return lm;
}

void write_landmarks_csv(const LandmarkSet& lm, const std::string& path) {
  std::ofstream out(path);
  if (!out) fail(Errc::IoFailure, "video.io", "cannot write " + path);
  out << "index,x,y\n";
  char buf[96];
  for (std::size_t i = 0; i < lm.points.size(); ++i) {
    std::snprintf(buf, sizeof(buf), "%zu,%.10g,%.10g\n", i, lm.points[i].x,
                  lm.points[i].y);
    out << buf;
  }
}

}  // namespace rppg::video
