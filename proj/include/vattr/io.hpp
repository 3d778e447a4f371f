#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "vattr/synth.hpp"
#include "vattr/tensor.hpp"
#include "vattr/toy_model.hpp"

namespace vattr {

namespace fs = std::filesystem;

// Tensor file layout (all little-endian):
//   "VATT" | u32 version | u32 dtype (1 = f64) | u32 ndim | u64 dims[ndim] | f64 payload
inline constexpr std::uint32_t kTensorVersion = 1;
inline constexpr std::uint32_t kDtypeF64 = 1;

struct RawTensor {
  std::vector<std::uint64_t> dims;
  std::vector<double> data;
};

void write_tensor(const fs::path& path, const RawTensor& t);
// Throws FormatError naming the offending field; never returns a partial tensor.
RawTensor read_tensor(const fs::path& path);

// Video tensors are stored with dims [T, H, W, C], volumes with [T, H, W].
void write_video(const fs::path& path, const VideoTensor& v);
void write_volume(const fs::path& path, const Volume& v);
VideoTensor read_video(const fs::path& path);
Volume read_volume(const fs::path& path);

// Model file: "VATM" | u32 version | u64 T, H, W, channels, classes, conv1,
// conv2, pool | f64 input_offset | u64 count | f64 parameters[count]
inline constexpr std::uint32_t kModelVersion = 1;

void write_model(const fs::path& path, const ToyConv3dScorer& model);
ToyConv3dScorer read_model(const fs::path& path);

// Dataset directory: video_NNNN.vatt, tube_NNNN.vatt and manifest.csv with
// columns path,label,boxes. boxes lists one "i0 j0 i1 j1" group per frame,
// groups separated by ';', '-' for a frame without a box.
void write_dataset(const fs::path& dir, const std::vector<SynthSample>& samples);
std::vector<SynthSample> read_dataset(const fs::path& dir);

std::string format_boxes(const BoxTrack& boxes);
BoxTrack parse_boxes(const std::string& text);

// 8-bit binary graymap (P5).
void write_pgm(const fs::path& path, std::size_t height, std::size_t width, const std::vector<std::uint8_t>& pixels);
// One graymap per frame, scaled by the min/max of the whole sequence.
// Returns the written paths.
std::vector<fs::path> export_frames(const Volume& map, const fs::path& dir, const std::string& stem = "frame");

void write_text(const fs::path& path, const std::string& text);
std::string read_text(const fs::path& path);

// Shortest round-trip representation of a double, '.' decimal separator.
std::string format_double(double v);

}  // namespace vattr
