#pragma once

#include <array>
#include <string>
#include <vector>

#include "rppg/scales/types.hpp"

namespace rppg::scales {

// One named real matrix; NaN cells are absent. Serialized as a flat binary
// file: magic "RPPGMAP1", u32 width, u32 height, u32 name length, the name,
// then width*height little-endian doubles, row-major.
struct MapMatrix {
  int width = 0;
  int height = 0;
  std::string metric;
  std::vector<double> values;
};

void write_map_file(const MapMatrix& m, const std::string& path);
MapMatrix read_map_file(const std::string& path);

// Splits a PerfusionMapSet into its four named matrices
// (magnitude, snr_db, rho_ref, bpm).
std::array<MapMatrix, 4> maps_of(const PerfusionMapSet& set);

// CSV with header t_start,f_hr,bpm,snr_db,magnitude,pi,rho_ref; an absent
// rho_ref leaves the field empty.
void write_timeline_csv(const MetricsTimeline& tl, const std::string& path);

}  // namespace rppg::scales
