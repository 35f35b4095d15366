#include "snslab/io.hpp"

#include <bit>
#include <charconv>
#include <cstring>
#include <sstream>

#include "snslab/error.hpp"

namespace snslab::io {

namespace {

static_assert(std::endian::native == std::endian::little,
              "the binary formats are written in host order on little-endian hosts");

template <class T>
void put(std::ostream& out, T v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

template <class T>
T get(std::istream& in, const std::filesystem::path& path) {
  T v{};
  if (!in.read(reinterpret_cast<char*>(&v), sizeof v)) {
    throw Error("truncated binary file " + path.string());
  }
  return v;
}

void write_header(std::ostream& out, const SnapshotHeader& h) {
  out.write(h.magic, 4);
  put(out, h.version);
  put(out, h.cutoff);
  put(out, h.mode_count);
  put(out, h.endian_tag);
}

SnapshotHeader read_header(std::istream& in, const std::filesystem::path& path,
                           const char* magic) {
  SnapshotHeader h;
  if (!in.read(h.magic, 4) || std::memcmp(h.magic, magic, 4) != 0) {
    throw Error("bad magic in " + path.string() + " (expected " + std::string(magic, 4) + ")");
  }
  h.version = get<std::uint32_t>(in, path);
  h.cutoff = get<std::uint32_t>(in, path);
  h.mode_count = get<std::uint32_t>(in, path);
  h.endian_tag = get<std::uint32_t>(in, path);
  if (h.endian_tag != kEndianTag) throw Error("endianness tag mismatch in " + path.string());
  if (h.version != kFormatVersion) {
    throw Error("unsupported format version " + std::to_string(h.version) + " in " + path.string());
  }
  return h;
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  return out;
}

std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  return in;
}

}  // namespace

SnapshotWriter::SnapshotWriter(const std::filesystem::path& path, const SpectralBasis& basis)
    : out_(open_out(path)), modes_(static_cast<std::uint32_t>(basis.size())) {
  SnapshotHeader h;
  h.cutoff = static_cast<std::uint32_t>(basis.cutoff());
  h.mode_count = modes_;
  write_header(out_, h);
}

void SnapshotWriter::write(double time, std::uint64_t trajectory, const FourierState& state) {
  if (state.size() != modes_) throw BasisMismatch();
  put(out_, time);
  put(out_, trajectory);
  out_.write(reinterpret_cast<const char*>(state.coeffs().data()),
             static_cast<std::streamsize>(state.size() * sizeof(double)));
  if (!out_) throw Error("snapshot write failed");
}

void SnapshotWriter::close() {
  out_.close();
  if (out_.fail()) throw Error("snapshot file close failed");
}

SnapshotFile read_snapshots(const std::filesystem::path& path) {
  auto in = open_in(path);
  SnapshotFile f;
  f.header = read_header(in, path, "SNSL");
  for (;;) {
    SnapshotRecord r;
    if (!in.read(reinterpret_cast<char*>(&r.time), sizeof r.time)) break;
    r.trajectory = get<std::uint64_t>(in, path);
    r.coeffs.resize(f.header.mode_count);
    if (!in.read(reinterpret_cast<char*>(r.coeffs.data()),
                 static_cast<std::streamsize>(r.coeffs.size() * sizeof(double)))) {
      throw Error("truncated snapshot record in " + path.string());
    }
    f.records.push_back(std::move(r));
  }
  return f;
}

std::string encode_snapshot_header(const SpectralBasis& basis) {
  std::ostringstream out;
  SnapshotHeader h;
  h.cutoff = static_cast<std::uint32_t>(basis.cutoff());
  h.mode_count = static_cast<std::uint32_t>(basis.size());
  write_header(out, h);
  return out.str();
}

void append_snapshot(std::string& buffer, double time, std::uint64_t trajectory,
                     const FourierState& state) {
  auto raw = [&buffer](const void* p, std::size_t n) {
    buffer.append(static_cast<const char*>(p), n);
  };
  raw(&time, sizeof time);
  raw(&trajectory, sizeof trajectory);
  raw(state.coeffs().data(), state.size() * sizeof(double));
}

std::string encode_density(const GridFunction& f) {
  std::ostringstream out;
  SnapshotHeader h;
  std::memcpy(h.magic, "DENS", 4);
  h.cutoff = static_cast<std::uint32_t>(f.grid.dim());
  h.mode_count = static_cast<std::uint32_t>(f.values.size());
  write_header(out, h);
  for (std::size_t i = 0; i < f.grid.dim(); ++i) {
    put(out, f.grid.origin[i]);
    put(out, f.grid.spacing[i]);
    put(out, static_cast<std::uint64_t>(f.grid.counts[i]));
  }
  out.write(reinterpret_cast<const char*>(f.values.data()),
            static_cast<std::streamsize>(f.values.size() * sizeof(double)));
  return out.str();
}

void write_density(const std::filesystem::path& path, const GridFunction& f) {
  write_file_atomic(path, encode_density(f));
}

GridFunction read_density(const std::filesystem::path& path) {
  auto in = open_in(path);
  const auto h = read_header(in, path, "DENS");
  std::vector<double> lo, hi;
  std::vector<std::size_t> counts;
  std::vector<double> spacing;
  for (std::uint32_t i = 0; i < h.cutoff; ++i) {
    const double o = get<double>(in, path);
    const double s = get<double>(in, path);
    const auto c = get<std::uint64_t>(in, path);
    lo.push_back(o);
    hi.push_back(o + s * double(c));
    spacing.push_back(s);
    counts.push_back(static_cast<std::size_t>(c));
  }
  GridGeometry g(lo, hi, counts);
  g.spacing = spacing;
  std::vector<double> values(h.mode_count);
  if (!in.read(reinterpret_cast<char*>(values.data()),
               static_cast<std::streamsize>(values.size() * sizeof(double)))) {
    throw Error("truncated density grid in " + path.string());
  }
  return GridFunction(std::move(g), std::move(values));
}

std::string csv_quote(const std::string& field) {
  if (field.find_first_of(",\"\r\n") == std::string::npos) return field;
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

std::string csv_number(double v) {
  char buf[40];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

CsvTable::CsvTable(std::vector<std::string> header) : header_(std::move(header)) {
  if (header_.empty()) throw InvalidArgument("CSV table needs a header");
}

void CsvTable::add_row(std::vector<std::string> row) {
  if (row.size() != header_.size()) {
    throw InvalidArgument("CSV row has " + std::to_string(row.size()) + " fields, header has " +
                          std::to_string(header_.size()));
  }
  rows_.push_back(std::move(row));
}

std::string CsvTable::str() const {
  std::string out;
  auto line = [&out](const std::vector<std::string>& fields) {
    for (std::size_t i = 0; i < fields.size(); ++i) {
      if (i) out += ',';
      out += csv_quote(fields[i]);
    }
    out += "\n";
  };
  line(header_);
  for (const auto& r : rows_) line(r);
  return out;
}

std::vector<std::vector<std::string>> parse_csv(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> row;
  std::string field;
  bool quoted = false, any = false;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field += c;
      }
      continue;
    }
    if (c == '"') {
      quoted = true;
      any = true;
    } else if (c == ',') {
      row.push_back(std::move(field));
      field.clear();
      any = true;
    } else if (c == '\r' || c == '\n') {
      if (c == '\r' && i + 1 < text.size() && text[i + 1] == '\n') ++i;
      row.push_back(std::move(field));
      field.clear();
      rows.push_back(std::move(row));
      row.clear();
      any = false;
    } else {
      field += c;
      any = true;
    }
  }
  if (quoted) throw InvalidArgument("unterminated quoted CSV field");
  if (any || !field.empty()) {
    row.push_back(std::move(field));
    rows.push_back(std::move(row));
  }
  return rows;
}

std::uint64_t fnv1a(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string read_file(const std::filesystem::path& path) {
  auto in = open_in(path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::uint64_t file_checksum(const std::filesystem::path& path) { return fnv1a(read_file(path)); }

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

void write_file_atomic(const std::filesystem::path& path, const std::string& contents) {
  auto tmp = path;
  tmp += ".tmp";
  {
    auto out = open_out(tmp);
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    out.close();
    if (out.fail()) throw Error("write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace snslab::io
