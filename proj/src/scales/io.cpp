#include "rppg/scales/io.hpp"

#include <cstdio>
#include <cstring>
#include <fstream>

#include "rppg/errors.hpp"

namespace rppg::scales {

namespace {

constexpr char kMapMagic[8] = {'R', 'P', 'P', 'G', 'M', 'A', 'P', '1'};

void put_u32(std::ofstream& out, std::uint32_t v) {
  unsigned char b[4];
  for (int i = 0; i < 4; ++i) {
    b[i] = static_cast<unsigned char>(v & 0xff);
    v >>= 8;
  }
  out.write(reinterpret_cast<const char*>(b), 4);
}

std::uint32_t get_u32(std::ifstream& in, const std::string& path) {
  unsigned char b[4];
  in.read(reinterpret_cast<char*>(b), 4);
  if (in.gcount() != 4)
    fail(Errc::IoFailure, "scales.io", "truncated map file: " + path);
  std::uint32_t v = 0;
  for (int i = 3; i >= 0; --i) v = (v << 8) | b[i];
  return v;
}

}  // namespace

void write_map_file(const MapMatrix& m, const std::string& path) {
  if (m.values.size() != static_cast<std::size_t>(m.width) * m.height)
    fail(Errc::DimensionMismatch, "scales.io", "map values do not match dims");
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(Errc::IoFailure, "scales.io", "cannot write " + path);
  out.write(kMapMagic, sizeof(kMapMagic));
  put_u32(out, static_cast<std::uint32_t>(m.width));
  put_u32(out, static_cast<std::uint32_t>(m.height));
  put_u32(out, static_cast<std::uint32_t>(m.metric.size()));
  out.write(m.metric.data(), static_cast<std::streamsize>(m.metric.size()));
  // Doubles are stored little-endian; this writer assumes a little-endian
  // host, which covers every supported target.
  out.write(reinterpret_cast<const char*>(m.values.data()),
            static_cast<std::streamsize>(m.values.size() * sizeof(double)));
  if (!out) fail(Errc::IoFailure, "scales.io", "write failed: " + path);
}

MapMatrix read_map_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(Errc::IoFailure, "scales.io", "cannot open " + path);
  char magic[8];
  in.read(magic, 8);
  if (in.gcount() != 8 || std::memcmp(magic, kMapMagic, 8) != 0)
    fail(Errc::IoFailure, "scales.io", "not a map file: " + path);

  MapMatrix m;
  m.width = static_cast<int>(get_u32(in, path));
  m.height = static_cast<int>(get_u32(in, path));
  const std::uint32_t name_len = get_u32(in, path);
  if (m.width < 0 || m.height < 0 || name_len > 4096)
    fail(Errc::IoFailure, "scales.io", "implausible map header: " + path);
  m.metric.resize(name_len);
  in.read(m.metric.data(), name_len);

  const std::size_t n = static_cast<std::size_t>(m.width) * m.height;
  m.values.resize(n);
  in.read(reinterpret_cast<char*>(m.values.data()),
          static_cast<std::streamsize>(n * sizeof(double)));
  if (in.gcount() != static_cast<std::streamsize>(n * sizeof(double)))
    fail(Errc::IoFailure, "scales.io", "truncated map file: " + path);
  return m;
}

std::array<MapMatrix, 4> maps_of(const PerfusionMapSet& set) {
  auto make = [&](const char* name, const std::vector<double>& v) {
    MapMatrix m;
    m.width = set.width;
    m.height = set.height;
    m.metric = name;
    m.values = v;
    return m;
  };
  return {make("magnitude", set.magnitude), make("snr_db", set.snr_db),
          make("rho_ref", set.rho_ref), make("bpm", set.bpm)};
}

void write_timeline_csv(const MetricsTimeline& tl, const std::string& path) {
  std::ofstream out(path);
  if (!out) fail(Errc::IoFailure, "scales.io", "cannot write " + path);
  out << "t_start,f_hr,bpm,snr_db,magnitude,pi,rho_ref\n";
  char buf[256];
  for (const core::WindowMetrics& m : tl.entries) {
    std::snprintf(buf, sizeof(buf), "%.10g,%.10g,%.10g,%.10g,%.10g,%.10g,",
                  m.t_start, m.f_hr, m.bpm, m.snr_db, m.magnitude, m.pi);
    out << buf;
    if (m.rho_ref) {
      std::snprintf(buf, sizeof(buf), "%.10g", *m.rho_ref);
      out << buf;
    }
    out << "\n";
  }
}

}  // namespace rppg::scales
