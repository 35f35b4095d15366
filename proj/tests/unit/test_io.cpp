#include <doctest.h>

#include <cstdlib>
#include <cstring>
#include <filesystem>

#include "snslab/io.hpp"

using namespace snslab;

namespace {

std::filesystem::path scratch(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / "snslab_io_tests";
  std::filesystem::create_directories(dir);
  return dir / name;
}

}  // namespace

TEST_CASE("snapshot stream round trip with little-endian header") {
  auto basis = build_basis(2);
  const auto path = scratch("snap.bin");
  {
    io::SnapshotWriter w(path, *basis);
    for (std::uint64_t j = 0; j < 3; ++j) {
      FourierState s(basis);
      for (std::size_t k = 0; k < s.size(); ++k) s[k] = double(j) + 0.125 * double(k);
      w.write(0.25 * double(j), j, s);
    }
    w.close();
  }
  const std::string raw = io::read_file(path);
  CHECK(raw.substr(0, 4) == "SNSL");
  const unsigned char* b = reinterpret_cast<const unsigned char*>(raw.data());
  CHECK(b[4] == 1);  // version, least significant byte first
  CHECK(b[8] == 2);  // cutoff
  CHECK(b[12] == 36);
  CHECK((b[16] == 0x04 && b[17] == 0x03 && b[18] == 0x02 && b[19] == 0x01));
  CHECK(raw.size() == 20 + 3 * (16 + 36 * 8));

  const auto f = io::read_snapshots(path);
  CHECK(f.header.cutoff == 2);
  CHECK(f.header.mode_count == 36);
  REQUIRE(f.records.size() == 3);
  CHECK(f.records[2].time == 0.5);
  CHECK(f.records[2].trajectory == 2);
  CHECK(f.records[2].coeffs[5] == 2.625);
}

TEST_CASE("snapshot reader rejects corrupt files") {
  const auto path = scratch("bad.bin");
  io::write_file_atomic(path, "XXXX");
  CHECK_THROWS_AS(io::read_snapshots(path), Error);

  auto basis = build_basis(1);
  {
    io::SnapshotWriter w(path, *basis);
    w.write(0.0, 0, FourierState(basis));
  }
  std::string raw = io::read_file(path);
  io::write_file_atomic(path, raw.substr(0, raw.size() - 3));
  CHECK_THROWS_WITH_AS(io::read_snapshots(path), doctest::Contains("truncated"), Error);

  raw[16] = 0x01;  // corrupt the endianness tag
  io::write_file_atomic(path, raw);
  CHECK_THROWS_WITH_AS(io::read_snapshots(path), doctest::Contains("endianness"), Error);

  io::SnapshotWriter w(scratch("mismatch.bin"), *basis);
  CHECK_THROWS_AS(w.write(0.0, 0, FourierState(build_basis(2))), BasisMismatch);
}

TEST_CASE("density grid round trip") {
  GridGeometry g({-1.0, 0.0}, {1.0, 3.0}, {4, 6});
  GridFunction f(g);
  for (std::size_t i = 0; i < f.values.size(); ++i) f.values[i] = 0.5 * double(i);
  const auto path = scratch("dens.bin");
  io::write_density(path, f);
  CHECK(io::read_file(path).substr(0, 4) == "DENS");
  const auto r = io::read_density(path);
  CHECK(r.grid.counts == f.grid.counts);
  CHECK(r.grid.origin == f.grid.origin);
  CHECK(r.grid.spacing == f.grid.spacing);
  CHECK(r.values == f.values);
  CHECK_THROWS_AS(io::read_snapshots(path), Error);
}

TEST_CASE("CSV quoting follows RFC 4180 and parses back") {
  CHECK(io::csv_quote("plain") == "plain");
  CHECK(io::csv_quote("a,b") == "\"a,b\"");
  CHECK(io::csv_quote("say \"hi\"") == "\"say \"\"hi\"\"\"");
  CHECK(io::csv_quote("two\nlines") == "\"two\nlines\"");

  io::CsvTable t({"name", "value"});
  t.add_row({"x,y", io::csv_number(0.1)});
  t.add_row({"q\"r", io::csv_number(-2.5e-300)});
  CHECK_THROWS_AS(t.add_row({"only one"}), InvalidArgument);
  const auto rows = io::parse_csv(t.str());
  REQUIRE(rows.size() == 3);
  CHECK(rows[0] == std::vector<std::string>{"name", "value"});
  CHECK(rows[1][0] == "x,y");
  CHECK(std::stod(rows[1][1]) == 0.1);
  CHECK(rows[2][0] == "q\"r");
  CHECK(std::stod(rows[2][1]) == -2.5e-300);
  CHECK_THROWS_AS(io::parse_csv("\"open"), InvalidArgument);
}

TEST_CASE("csv_number round trips doubles exactly") {
  for (double v : {0.0, 1.0 / 3.0, 6.02214076e23, -1e-310, 0.1 + 0.2}) {
    CHECK(std::strtod(io::csv_number(v).c_str(), nullptr) == v);
  }
}

TEST_CASE("FNV-1a reference values") {
  CHECK(io::fnv1a("") == 0xcbf29ce484222325ULL);
  CHECK(io::fnv1a("a") == 0xaf63dc4c8601ec8cULL);
  CHECK(io::fnv1a("foobar") == 0x85944171f73967e8ULL);
  CHECK(io::hex64(0xabcULL) == "0000000000000abc");
}

TEST_CASE("atomic write leaves no temporary file") {
  const auto path = scratch("atomic.txt");
  io::write_file_atomic(path, "first");
  io::write_file_atomic(path, "second");
  CHECK(io::read_file(path) == "second");
  auto tmp = path;
  tmp += ".tmp";
  CHECK_FALSE(std::filesystem::exists(tmp));
  CHECK(io::file_checksum(path) == io::fnv1a("second"));
}
