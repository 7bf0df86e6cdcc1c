#include "dfprune/dataset.hpp"

#include <array>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string>

#include "dfprune/error.hpp"

namespace dfprune {
namespace {

static_assert(std::endian::native == std::endian::little,
              "NNDS reader assumes a little-endian host");

constexpr std::array<char, 4> kMagic = {'N', 'N', 'D', 'S'};
constexpr std::uint32_t kVersion = 1;
constexpr std::size_t kHeaderBytes = 4 + 4 * 4;

std::uint32_t read_u32(const std::vector<char>& buf, std::size_t offset) {
  std::uint32_t v;
  std::memcpy(&v, buf.data() + offset, sizeof v);
  return v;
}

void write_u32(std::ofstream& out, std::uint32_t v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

}  // namespace

void validate(const LabeledDataset& ds) {
  if (ds.samples.size() != ds.n_samples * ds.n_features || ds.labels.size() != ds.n_samples) {
    throw ShapeError("dataset arrays do not match header counts");
  }
  for (std::size_t i = 0; i < ds.n_samples; ++i) {
    if (ds.labels[i] >= ds.n_classes) {
      throw FormatError("label " + std::to_string(ds.labels[i]) + " of sample " + std::to_string(i) +
                        " is out of range");
    }
  }
  for (float v : ds.samples) {
    if (!std::isfinite(v)) throw NumericError("dataset contains a non-finite feature");
  }
}

LabeledDataset load_dataset(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open dataset " + path.string());
  std::vector<char> buf((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());

  if (buf.size() < kHeaderBytes) throw FormatError("dataset header truncated");
  if (std::memcmp(buf.data(), kMagic.data(), kMagic.size()) != 0) {
    throw FormatError("bad dataset magic, expected NNDS");
  }
  if (read_u32(buf, 4) != kVersion) {
    throw FormatError("unsupported dataset version " + std::to_string(read_u32(buf, 4)));
  }
  LabeledDataset ds;
  ds.n_samples = read_u32(buf, 8);
  ds.n_features = read_u32(buf, 12);
  ds.n_classes = read_u32(buf, 16);

  const std::size_t n_values = ds.n_samples * ds.n_features;
  const std::size_t expected = kHeaderBytes + 4 * n_values + 4 * ds.n_samples;
  if (buf.size() < expected) {
    throw FormatError("dataset payload truncated: " + std::to_string(buf.size()) + " bytes, expected " +
                      std::to_string(expected));
  }
  if (buf.size() > expected) throw FormatError("dataset has trailing bytes");

  ds.samples.resize(n_values);
  std::memcpy(ds.samples.data(), buf.data() + kHeaderBytes, 4 * n_values);
  ds.labels.resize(ds.n_samples);
  std::memcpy(ds.labels.data(), buf.data() + kHeaderBytes + 4 * n_values, 4 * ds.n_samples);
  validate(ds);
  return ds;
}

void save_dataset(const LabeledDataset& ds, const std::filesystem::path& path) {
  validate(ds);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write dataset " + path.string());
  out.write(kMagic.data(), kMagic.size());
  write_u32(out, kVersion);
  write_u32(out, static_cast<std::uint32_t>(ds.n_samples));
  write_u32(out, static_cast<std::uint32_t>(ds.n_features));
  write_u32(out, static_cast<std::uint32_t>(ds.n_classes));
  out.write(reinterpret_cast<const char*>(ds.samples.data()),
            static_cast<std::streamsize>(ds.samples.size() * sizeof(float)));
  out.write(reinterpret_cast<const char*>(ds.labels.data()),
            static_cast<std::streamsize>(ds.labels.size() * sizeof(std::uint32_t)));
  if (!out) throw Error("failed writing dataset " + path.string());
}

}  // namespace dfprune
