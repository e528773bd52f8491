#pragma once

#include <string>

#include "rppg/video/image.hpp"

namespace rppg::video {

// Loads either a frame directory (PNG/PPM files in lexicographic order plus
// a meta.json sidecar) or a raw RGB8 stream file with a JSON header.
FrameSequence load_frame_sequence(const std::string& path);

// Writes the standard frame-directory format: frame_%06d.<ext> + meta.json.
// ext must be "png" or "ppm".
void write_frame_dir(const FrameSequence& seq, const std::string& dir,
                     const std::string& ext = "png");

// Raw stream: 48-byte prefix (8-byte magic "RPPGRAW1", 8-byte little-endian
// JSON length, 32 reserved zero bytes), the JSON header {"width","height",
// "fps","count"}, then count frames of width*height*3 bytes.
void write_raw_stream(const FrameSequence& seq, const std::string& path);

Image read_image(const std::string& path);         // PNG or PPM, forced to RGB8
void write_png(const Image& img, const std::string& path);
void write_ppm(const Image& img, const std::string& path);

// Masks are 8-bit grayscale PNGs, nonzero = included.
RoiMask read_mask_png(const std::string& path);
void write_mask_png(const RoiMask& mask, const std::string& path);

// Landmarks: CSV "index,x,y" with exactly 68 rows.
LandmarkSet read_landmarks_csv(const std::string& path);
void write_landmarks_csv(const LandmarkSet& lm, const std::string& path);

}  // namespace rppg::video
