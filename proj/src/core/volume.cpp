#include "t2motion/volume.hpp"

#include "t2motion/fft.hpp"

#include <json.hpp>

#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>
#include <sstream>

namespace t2motion {

using nlohmann::json;

namespace {
constexpr int kFormatVersion = 1;
constexpr char const *kMarker = "---";

void check_te(std::vector<double> const &te_ms, std::size_t echoes) {
  if (te_ms.size() != echoes) {
    throw VolumeError("echo time count " + std::to_string(te_ms.size()) +
                      " does not match echo dimension " + std::to_string(echoes));
  }
  for (std::size_t e = 1; e < te_ms.size(); ++e) {
    if (!(te_ms[e] > te_ms[e - 1])) {
      throw VolumeError("echo times not strictly increasing");
    }
  }
}

std::uint32_t to_little_endian(std::uint32_t v) {
  if constexpr (std::endian::native == std::endian::big) {
    return ((v & 0xffu) << 24) | ((v & 0xff00u) << 8) | ((v >> 8) & 0xff00u) | (v >> 24);
  }
  return v;
}
} // namespace

std::string to_string(Space space) { return space == Space::Image ? "image" : "kspace"; }

Space space_from_string(std::string const &name) {
  if (name == "image") {
    return Space::Image;
  }
  if (name == "kspace") {
    return Space::KSpace;
  }
  throw VolumeError("unknown space tag '" + name + "'");
}

MultiEchoVolume::MultiEchoVolume(Dims dims, VoxelSize voxel_size_mm, std::vector<double> te_ms,
                                 Space space)
    : MultiEchoVolume(dims, voxel_size_mm, std::move(te_ms), space,
                      std::vector<cfloat>(dims.size())) {}

MultiEchoVolume::MultiEchoVolume(Dims dims, VoxelSize voxel_size_mm, std::vector<double> te_ms,
                                 Space space, std::vector<cfloat> data)
    : dims_(dims), voxel_size_mm_(voxel_size_mm), te_ms_(std::move(te_ms)), space_(space),
      data_(std::move(data)) {
  validate();
}

void MultiEchoVolume::validate() const {
  if (dims_.echoes == 0 || dims_.slices == 0 || dims_.lines == 0 || dims_.readout == 0) {
    throw VolumeError("all dimension sizes must be >= 1");
  }
  if (data_.size() != dims_.size()) {
    throw VolumeError("data length does not match E*S*P*R");
  }
  for (double v : voxel_size_mm_) {
    if (!(v > 0.0) || !std::isfinite(v)) {
      throw VolumeError("voxel sizes must be positive and finite");
    }
  }
  check_te(te_ms_, dims_.echoes);
}

std::span<cfloat> MultiEchoVolume::plane(std::size_t echo, std::size_t slice) {
  return std::span<cfloat>(data_).subspan(index(echo, slice, 0, 0), dims_.plane());
}

std::span<cfloat const> MultiEchoVolume::plane(std::size_t echo, std::size_t slice) const {
  return std::span<cfloat const>(data_).subspan(index(echo, slice, 0, 0), dims_.plane());
}

MultiEchoVolume MultiEchoVolume::with_data(Space space, std::vector<cfloat> data) const {
  return MultiEchoVolume(dims_, voxel_size_mm_, te_ms_, space, std::move(data));
}

MultiEchoVolume MultiEchoVolume::extract_slice(std::size_t slice) const {
  if (slice >= dims_.slices) {
    throw VolumeError("slice index out of range");
  }
  Dims d = dims_;
  d.slices = 1;
  MultiEchoVolume out(d, voxel_size_mm_, te_ms_, space_);
  for (std::size_t e = 0; e < dims_.echoes; ++e) {
    auto src = plane(e, slice);
    std::copy(src.begin(), src.end(), out.plane(e, 0).begin());
  }
  return out;
}

void require_space(MultiEchoVolume const &vol, Space expected, char const *operation) {
  if (vol.space() != expected) {
    throw VolumeError(std::string(operation) + " requires " + to_string(expected) +
                      "-space input, got " + to_string(vol.space()));
  }
}

void write_volume(MultiEchoVolume const &vol, std::filesystem::path const &path) {
  auto const &d = vol.dims();
  json header;
  header["version"] = kFormatVersion;
  header["dims"] = {d.echoes, d.slices, d.lines, d.readout};
  header["voxel_size_mm"] = vol.voxel_size_mm();
  header["te_ms"] = vol.te_ms();
  header["space"] = to_string(vol.space());

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw VolumeError("cannot open '" + path.string() + "' for writing");
  }
  out << header.dump() << '\n' << kMarker << '\n';

  std::vector<std::uint32_t> words(2 * vol.data().size());
  std::size_t k = 0;
  for (cfloat v : vol.data()) {
    words[k++] = to_little_endian(std::bit_cast<std::uint32_t>(v.real()));
    words[k++] = to_little_endian(std::bit_cast<std::uint32_t>(v.imag()));
  }
  out.write(reinterpret_cast<char const *>(words.data()),
            static_cast<std::streamsize>(words.size() * sizeof(std::uint32_t)));
  if (!out) {
    throw VolumeError("write failed for '" + path.string() + "'");
  }
}

MultiEchoVolume read_volume(std::filesystem::path const &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw VolumeError("cannot open '" + path.string() + "'");
  }
  std::string header_text;
  std::string line;
  bool found_marker = false;
  while (std::getline(in, line)) {
    if (line == kMarker) {
      found_marker = true;
      break;
    }
    header_text += line;
    header_text += '\n';
  }
  if (!found_marker) {
    throw VolumeError("malformed header: missing '---' marker");
  }

  json header;
  try {
    header = json::parse(header_text);
  } catch (json::exception const &e) {
    throw VolumeError(std::string("malformed header: ") + e.what());
  }

  Dims dims;
  VoxelSize voxel{};
  std::vector<double> te;
  Space space{};
  try {
    auto const dv = header.at("dims").get<std::vector<std::size_t>>();
    if (dv.size() != 4) {
      throw VolumeError("malformed header: dims must have 4 entries");
    }
    dims = Dims{dv[0], dv[1], dv[2], dv[3]};
    voxel = header.at("voxel_size_mm").get<VoxelSize>();
    te = header.at("te_ms").get<std::vector<double>>();
    space = space_from_string(header.at("space").get<std::string>());
    if (header.at("version").get<int>() != kFormatVersion) {
      throw VolumeError("unsupported volume format version");
    }
  } catch (json::exception const &e) {
    throw VolumeError(std::string("malformed header: ") + e.what());
  }
  check_te(te, dims.echoes);

  std::string const payload((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  std::size_t const expected = dims.size() * 2 * sizeof(std::uint32_t);
  if (payload.size() != expected) {
    throw VolumeError("payload length mismatch: expected " + std::to_string(expected) +
                      " bytes, found " + std::to_string(payload.size()));
  }
  std::vector<cfloat> data(dims.size());
  for (std::size_t i = 0; i < data.size(); ++i) {
    std::uint32_t re = 0;
    std::uint32_t im = 0;
    std::memcpy(&re, payload.data() + 8 * i, 4);
    std::memcpy(&im, payload.data() + 8 * i + 4, 4);
    data[i] = {std::bit_cast<float>(to_little_endian(re)), std::bit_cast<float>(to_little_endian(im))};
  }
  return MultiEchoVolume(dims, voxel, std::move(te), space, std::move(data));
}

namespace {
MultiEchoVolume transform_planes(MultiEchoVolume const &vol, bool forward) {
  auto const &d = vol.dims();
  Fft2 fft(d.lines, d.readout);
  std::vector<cfloat> out(vol.data().size());
  std::vector<cdouble> buf(d.plane());
  for (std::size_t e = 0; e < d.echoes; ++e) {
    for (std::size_t s = 0; s < d.slices; ++s) {
      auto src = vol.plane(e, s);
      std::copy(src.begin(), src.end(), buf.begin());
      if (forward) {
        fft.forward(buf);
      } else {
        fft.inverse(buf);
      }
      std::size_t const base = vol.index(e, s, 0, 0);
      for (std::size_t i = 0; i < buf.size(); ++i) {
        out[base + i] = cfloat(buf[i]);
      }
    }
  }
  return vol.with_data(forward ? Space::KSpace : Space::Image, std::move(out));
}
} // namespace

MultiEchoVolume fft2_per_slice(MultiEchoVolume const &image) {
  require_space(image, Space::Image, "fft2_per_slice");
  return transform_planes(image, true);
}

MultiEchoVolume ifft2_per_slice(MultiEchoVolume const &kspace) {
  require_space(kspace, Space::KSpace, "ifft2_per_slice");
  return transform_planes(kspace, false);
}

std::vector<double> magnitude(MultiEchoVolume const &vol) {
  std::vector<double> out;
  out.reserve(vol.data().size());
  for (cfloat v : vol.data()) {
    out.push_back(std::abs(cdouble(v)));
  }
  return out;
}

double energy(MultiEchoVolume const &vol) {
  double sum = 0.0;
  for (cfloat v : vol.data()) {
    sum += std::norm(cdouble(v));
  }
  return sum;
}

} // namespace t2motion
