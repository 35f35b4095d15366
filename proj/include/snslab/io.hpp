#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "snslab/density.hpp"
#include "snslab/spectral.hpp"

namespace snslab::io {

inline constexpr std::uint32_t kFormatVersion = 1;
inline constexpr std::uint32_t kEndianTag = 0x01020304;

/// Fixed header of the binary snapshot stream. Every integer and float is
/// stored little-endian; `endian_tag` lets readers verify this.
struct SnapshotHeader {
  char magic[4] = {'S', 'N', 'S', 'L'};
  std::uint32_t version = kFormatVersion;
  std::uint32_t cutoff = 0;
  std::uint32_t mode_count = 0;
  std::uint32_t endian_tag = kEndianTag;
};

struct SnapshotRecord {
  double time = 0.0;
  std::uint64_t trajectory = 0;
  std::vector<double> coeffs;
};

/// Appends (time, trajectory, coefficients) records after the header.
class SnapshotWriter {
 public:
  SnapshotWriter(const std::filesystem::path& path, const SpectralBasis& basis);
  void write(double time, std::uint64_t trajectory, const FourierState& state);
  void close();

 private:
  std::ofstream out_;
  std::uint32_t modes_;
};

struct SnapshotFile {
  SnapshotHeader header;
  std::vector<SnapshotRecord> records;
};

SnapshotFile read_snapshots(const std::filesystem::path& path);

/// In-memory form of the same stream: header, then records appended in order.
std::string encode_snapshot_header(const SpectralBasis& basis);
void append_snapshot(std::string& buffer, double time, std::uint64_t trajectory,
                     const FourierState& state);

/// Density grid in the same container with magic "DENS": the cutoff slot
/// holds the dimension d and the mode-count slot the number of cells,
/// followed by d x (origin, spacing, count) and the cell values.
std::string encode_density(const GridFunction& f);
void write_density(const std::filesystem::path& path, const GridFunction& f);
GridFunction read_density(const std::filesystem::path& path);

/// RFC 4180 field quoting: fields containing a comma, quote or line break
/// are wrapped in quotes with inner quotes doubled.
std::string csv_quote(const std::string& field);
/// Shortest round-trip decimal form of a double.
std::string csv_number(double v);

class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> header);
  void add_row(std::vector<std::string> row);
  std::string str() const;
  std::size_t rows() const { return rows_.size(); }

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

/// Parses RFC 4180 text into rows of fields.
std::vector<std::vector<std::string>> parse_csv(const std::string& text);

/// 64-bit FNV-1a.
std::uint64_t fnv1a(const std::string& bytes);
std::uint64_t file_checksum(const std::filesystem::path& path);
std::string hex64(std::uint64_t v);

/// Writes via a temporary file and rename, so readers never see a partial file.
void write_file_atomic(const std::filesystem::path& path, const std::string& contents);
std::string read_file(const std::filesystem::path& path);

}  // namespace snslab::io
