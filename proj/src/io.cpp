#include "vattr/io.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <limits>
#include <sstream>

#include "vattr/error.hpp"

namespace vattr {

static_assert(std::endian::native == std::endian::little, "persistence assumes a little-endian host");

namespace {

class Writer {
 public:
  void bytes(const void* p, std::size_t n) { buf_.append(static_cast<const char*>(p), n); }
  void u32(std::uint32_t v) { bytes(&v, sizeof v); }
  void u64(std::uint64_t v) { bytes(&v, sizeof v); }
  void f64(double v) { bytes(&v, sizeof v); }
  void f64s(std::span<const double> v) { bytes(v.data(), v.size() * sizeof(double)); }
  void save(const fs::path& path) const {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot open '" + path.string() + "' for writing");
    out.write(buf_.data(), static_cast<std::streamsize>(buf_.size()));
    if (!out) throw Error("write failed for '" + path.string() + "'");
  }

 private:
  std::string buf_;
};

class Reader {
 public:
  explicit Reader(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open '" + path.string() + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    buf_ = ss.str();
  }
  void bytes(void* p, std::size_t n, const char* field) {
    if (buf_.size() - pos_ < n) throw FormatError(field, "file truncated");
    std::memcpy(p, buf_.data() + pos_, n);
    pos_ += n;
  }
  std::uint32_t u32(const char* field) {
    std::uint32_t v;
    bytes(&v, sizeof v, field);
    return v;
  }
  std::uint64_t u64(const char* field) {
    std::uint64_t v;
    bytes(&v, sizeof v, field);
    return v;
  }
  double f64(const char* field) {
    double v;
    bytes(&v, sizeof v, field);
    return v;
  }
  std::size_t remaining() const { return buf_.size() - pos_; }

 private:
  std::string buf_;
  std::size_t pos_ = 0;
};

void expect_magic(Reader& r, const char (&magic)[5]) {
  std::array<char, 4> m{};
  r.bytes(m.data(), 4, "magic");
  if (std::memcmp(m.data(), magic, 4) != 0) throw FormatError("magic", std::string("expected ") + magic);
}

}  // namespace

void write_tensor(const fs::path& path, const RawTensor& t) {
  std::uint64_t count = 1;
  for (auto d : t.dims) count *= d;
  if (count != t.data.size()) throw ContractError("write_tensor: dims do not match the payload");
  Writer w;
  w.bytes("VATT", 4);
  w.u32(kTensorVersion);
  w.u32(kDtypeF64);
  w.u32(static_cast<std::uint32_t>(t.dims.size()));
  for (auto d : t.dims) w.u64(d);
  w.f64s(t.data);
  w.save(path);
}

RawTensor read_tensor(const fs::path& path) {
  Reader r(path);
  expect_magic(r, "VATT");
  if (const auto v = r.u32("version"); v != kTensorVersion) {
    throw FormatError("version", "unsupported version " + std::to_string(v));
  }
  if (const auto d = r.u32("dtype"); d != kDtypeF64) throw FormatError("dtype", "unsupported dtype " + std::to_string(d));
  const std::uint32_t ndim = r.u32("ndim");
  if (ndim == 0 || ndim > 8) throw FormatError("ndim", "expected 1..8, got " + std::to_string(ndim));
  RawTensor t;
  std::uint64_t count = 1;
  constexpr std::uint64_t max_count = std::numeric_limits<std::uint64_t>::max() / sizeof(double);
  for (std::uint32_t k = 0; k < ndim; ++k) {
    const std::uint64_t d = r.u64("dims");
    if (d == 0) throw FormatError("dims", "zero-length dimension");
    if (count > max_count / d) throw FormatError("dims", "element count overflows");
    count *= d;
    t.dims.push_back(d);
  }
  if (r.remaining() != count * sizeof(double)) {
    throw FormatError("payload", r.remaining() < count * sizeof(double) ? "file truncated" : "trailing bytes");
  }
  t.data.resize(count);
  r.bytes(t.data.data(), count * sizeof(double), "payload");
  return t;
}

void write_video(const fs::path& path, const VideoTensor& v) {
  write_tensor(path, {{v.frames(), v.height(), v.width(), v.channels()}, {v.values().begin(), v.values().end()}});
}

void write_volume(const fs::path& path, const Volume& v) {
  write_tensor(path, {{v.frames(), v.height(), v.width()}, {v.values().begin(), v.values().end()}});
}

VideoTensor read_video(const fs::path& path) {
  RawTensor t = read_tensor(path);
  if (t.dims.size() != 4) throw FormatError("ndim", "a video needs 4 dims");
  return VideoTensor({t.dims[0], t.dims[1], t.dims[2]}, t.dims[3], std::move(t.data));
}

Volume read_volume(const fs::path& path) {
  RawTensor t = read_tensor(path);
  if (t.dims.size() != 3) throw FormatError("ndim", "a volume needs 3 dims");
  return Volume({t.dims[0], t.dims[1], t.dims[2]}, std::move(t.data));
}

void write_model(const fs::path& path, const ToyConv3dScorer& model) {
  const ToyArch& a = model.arch();
  Writer w;
  w.bytes("VATM", 4);
  w.u32(kModelVersion);
  for (std::uint64_t v : {a.input.t, a.input.h, a.input.w, a.channels, a.classes, a.conv1, a.conv2, a.pool}) w.u64(v);
  w.f64(a.input_offset);
  w.u64(model.parameters().size());
  w.f64s(model.parameters());
  w.save(path);
}

ToyConv3dScorer read_model(const fs::path& path) {
  Reader r(path);
  expect_magic(r, "VATM");
  if (const auto v = r.u32("version"); v != kModelVersion) {
    throw FormatError("version", "unsupported version " + std::to_string(v));
  }
  ToyArch a;
  a.input.t = r.u64("frames");
  a.input.h = r.u64("height");
  a.input.w = r.u64("width");
  a.channels = r.u64("channels");
  a.classes = r.u64("classes");
  a.conv1 = r.u64("conv1");
  a.conv2 = r.u64("conv2");
  a.pool = r.u64("pool");
  a.input_offset = r.f64("input_offset");
  const std::uint64_t n = r.u64("parameter_count");
  if (n > r.remaining() / sizeof(double) || r.remaining() != n * sizeof(double)) throw FormatError("parameters", "length mismatch");
  std::vector<double> p(n);
  r.bytes(p.data(), n * sizeof(double), "parameters");
  try {
    return ToyConv3dScorer(a, std::move(p));
  } catch (const Error& e) {
    throw FormatError("architecture", e.what());
  }
}

std::string format_boxes(const BoxTrack& boxes) {
  std::string s;
  for (std::size_t t = 0; t < boxes.size(); ++t) {
    if (t) s += ';';
    if (!boxes[t]) {
      s += '-';
      continue;
    }
    const Box& b = *boxes[t];
    s += std::to_string(b.i0) + ' ' + std::to_string(b.j0) + ' ' + std::to_string(b.i1) + ' ' + std::to_string(b.j1);
  }
  return s;
}

BoxTrack parse_boxes(const std::string& text) {
  BoxTrack out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ';')) {
    if (item == "-") {
      out.emplace_back(std::nullopt);
      continue;
    }
    std::istringstream is(item);
    Box b;
    if (!(is >> b.i0 >> b.j0 >> b.i1 >> b.j1) || !(is >> std::ws).eof()) {
      throw FormatError("boxes", "bad box entry '" + item + "'");
    }
    if (b.i1 < b.i0 || b.j1 < b.j0) throw FormatError("boxes", "inverted box '" + item + "'");
    out.emplace_back(b);
  }
  return out;
}

void write_dataset(const fs::path& dir, const std::vector<SynthSample>& samples) {
  fs::create_directories(dir);
  std::string manifest = "path,label,boxes\n";
  char name[32];
  for (std::size_t n = 0; n < samples.size(); ++n) {
    std::snprintf(name, sizeof name, "video_%04zu.vatt", n);
    write_video(dir / name, samples[n].video);
    manifest += std::string(name) + ',' + std::to_string(samples[n].label) + ',' + format_boxes(samples[n].boxes) + '\n';
    std::snprintf(name, sizeof name, "tube_%04zu.vatt", n);
    write_volume(dir / name, samples[n].tube_mask);
  }
  write_text(dir / "manifest.csv", manifest);
}

std::vector<SynthSample> read_dataset(const fs::path& dir) {
  std::istringstream in(read_text(dir / "manifest.csv"));
  std::string line;
  if (!std::getline(in, line) || line != "path,label,boxes") throw FormatError("manifest", "missing header");
  std::vector<SynthSample> out;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto c1 = line.find(','), c2 = line.find(',', c1 + 1);
    if (c1 == std::string::npos || c2 == std::string::npos) throw FormatError("manifest", "expected 3 columns");
    SynthSample s;
    const std::string path = line.substr(0, c1), label = line.substr(c1 + 1, c2 - c1 - 1);
    const auto res = std::from_chars(label.data(), label.data() + label.size(), s.label);
    if (res.ec != std::errc() || res.ptr != label.data() + label.size()) throw FormatError("label", "not a count");
    s.video = read_video(dir / path);
    s.boxes = parse_boxes(line.substr(c2 + 1));
    if (s.boxes.size() != s.video.frames()) throw FormatError("boxes", "need one entry per frame");
    std::string tube = path;
    if (tube.rfind("video_", 0) == 0) tube.replace(0, 6, "tube_");
    if (fs::exists(dir / tube)) s.tube_mask = read_volume(dir / tube);
    out.push_back(std::move(s));
  }
  return out;
}

void write_pgm(const fs::path& path, std::size_t height, std::size_t width, const std::vector<std::uint8_t>& pixels) {
  if (pixels.size() != height * width) throw ContractError("write_pgm: pixel count mismatch");
  Writer w;
  const std::string header = "P5\n" + std::to_string(width) + ' ' + std::to_string(height) + "\n255\n";
  w.bytes(header.data(), header.size());
  w.bytes(pixels.data(), pixels.size());
  w.save(path);
}

std::vector<fs::path> export_frames(const Volume& map, const fs::path& dir, const std::string& stem) {
  fs::create_directories(dir);
  const double lo = map.min(), hi = map.max();
  const double span = hi - lo;
  std::vector<fs::path> paths;
  char name[64];
  for (std::size_t t = 0; t < map.frames(); ++t) {
    const auto f = map.frame(t);
    std::vector<std::uint8_t> px(f.size());
    for (std::size_t k = 0; k < f.size(); ++k) {
      const double u = span > 0.0 ? (f[k] - lo) / span : 0.0;
      px[k] = static_cast<std::uint8_t>(std::lround(std::clamp(u, 0.0, 1.0) * 255.0));
    }
    std::snprintf(name, sizeof name, "%s_%03zu.pgm", stem.c_str(), t);
    write_pgm(dir / name, map.height(), map.width(), px);
    paths.push_back(dir / name);
  }
  return paths;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot open '" + path.string() + "' for writing");
  out << text;
  if (!out) throw Error("write failed for '" + path.string() + "'");
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

}  // namespace vattr
