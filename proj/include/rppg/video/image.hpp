#pragma once

#include <cstdint>
#include <cstddef>
#include <vector>

namespace rppg::video {

// Interleaved 8-bit RGB image, row-major.
struct Image {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> data;  // size = 3 * width * height

  static Image filled(int w, int h, std::uint8_t r, std::uint8_t g,
                      std::uint8_t b) {
    Image img;
    img.width = w;
    img.height = h;
    img.data.resize(static_cast<std::size_t>(w) * h * 3);
    for (std::size_t i = 0; i < img.data.size(); i += 3) {
      img.data[i] = r;
      img.data[i + 1] = g;
      img.data[i + 2] = b;
    }
    return img;
  }

  std::uint8_t* px(int x, int y) {
    return data.data() + (static_cast<std::size_t>(y) * width + x) * 3;
  }
  const std::uint8_t* px(int x, int y) const {
    return data.data() + (static_cast<std::size_t>(y) * width + x) * 3;
  }
};

// Binary per-pixel inclusion mask.
struct RoiMask {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> bits;  // size = width * height, 0 or 1

  static RoiMask filled(int w, int h, std::uint8_t value) {
    RoiMask m;
    m.width = w;
    m.height = h;
    m.bits.assign(static_cast<std::size_t>(w) * h, value ? 1 : 0);
    return m;
  }

  bool at(int x, int y) const {
    return bits[static_cast<std::size_t>(y) * width + x] != 0;
  }
  void set(int x, int y, bool v) {
    bits[static_cast<std::size_t>(y) * width + x] = v ? 1 : 0;
  }
  std::size_t count_set() const {
    std::size_t n = 0;
    for (auto b : bits) n += b != 0;
    return n;
  }
};

struct FrameSequence {
  int width = 0;
  int height = 0;
  double fs = 0.0;  // frames per second
  std::vector<Image> frames;

  std::size_t size() const { return frames.size(); }
  double duration() const {
    return fs > 0.0 ? static_cast<double>(frames.size()) / fs : 0.0;
  }
};

struct Point {
  double x = 0.0;
  double y = 0.0;
};

// 68-point facial landmark set (iBUG layout), pixel coordinates.
struct LandmarkSet {
  std::vector<Point> points;
};

}  // namespace rppg::video
