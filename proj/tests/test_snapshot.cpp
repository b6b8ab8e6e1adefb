#include "lowmach/initial_data.hpp"
#include "lowmach/snapshot.hpp"

#include <doctest.h>

#include <cstring>
#include <filesystem>
#include <fstream>

using namespace lowmach;

namespace {

std::filesystem::path temp_file(const std::string& name) {
  return std::filesystem::temp_directory_path() / ("lowmach_test_" + name);
}

std::vector<unsigned char> bytes_of(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

}  // namespace

TEST_CASE("compressible state round-trips bit for bit") {
  const SpectralGrid g(GridSpec{2, 16, 2 * std::numbers::pi});
  const Eos air{};
  CompressibleState s = make_compressible_data(DataRecipe{}, 0.1, g, air).state;
  s.t = 0.25;
  Snapshot snap = to_snapshot(g, s);
  snap.metadata["config_hash"] = "0123456789abcdef";
  const auto path = temp_file("c.lmsnap");
  write_snapshot(path, snap);
  const Snapshot back = read_snapshot(path);
  CHECK(back.dim == 2);
  CHECK(back.n == 16);
  CHECK(back.metadata["config_hash"] == "0123456789abcdef");
  const CompressibleState t = compressible_from_snapshot(g, back);
  CHECK((t.q == s.q).all());
  CHECK((t.u == s.u).all());
  CHECK((t.H == s.H).all());
  CHECK((t.S == s.S).all());
  CHECK(t.eps == s.eps);
  CHECK(t.t == s.t);

  // Grid-point major: u at sample 3, component 1.
  CHECK(back.field("u").data[3 * 2 + 1] == s.u(3, 1));
  CHECK_THROWS_AS(back.field("v"), SnapshotError);
  CHECK_THROWS_AS(incompressible_from_snapshot(g, back), SnapshotError);
  CHECK_THROWS_AS(compressible_from_snapshot(SpectralGrid(GridSpec{2, 32, 2 * std::numbers::pi}), back),
                  SnapshotError);
}

TEST_CASE("byte layout") {
  Snapshot snap;
  snap.dim = 2;
  snap.n = 2;
  snap.metadata = {{"kind", "test"}};
  snap.fields.push_back({"f", 1, {1.0, 2.0, 3.0, 4.0}});
  const auto path = temp_file("layout.lmsnap");
  write_snapshot(path, snap);
  const auto b = bytes_of(path);
  const std::string meta = R"({"kind":"test"})";
  // magic 8 + version 4 + meta length 4 + meta + count 4 + name length 4 + "f" + rank 4 + shape 12 + data 32
  REQUIRE(b.size() == 8 + 4 + 4 + meta.size() + 4 + 4 + 1 + 4 + 12 + 32);
  CHECK(std::memcmp(b.data(), "LMSNAP\0\0", 8) == 0);
  CHECK(b[8] == 1);
  CHECK(b[12] == meta.size());
  CHECK(std::string(b.begin() + 16, b.begin() + 16 + meta.size()) == meta);
  const std::size_t field = 16 + meta.size() + 4;
  CHECK(b[field] == 1);
  CHECK(b[field + 4] == 'f');
  CHECK(b[field + 5] == 3);   // rank
  CHECK(b[field + 9] == 2);   // n
  CHECK(b[field + 17] == 1);  // components
  double first;
  std::memcpy(&first, b.data() + field + 21, 8);
  CHECK(first == 1.0);
}

TEST_CASE("malformed files are rejected") {
  const auto path = temp_file("bad.lmsnap");
  {
    std::ofstream out(path, std::ios::binary);
    out << "NOTASNAPSHOT";
  }
  CHECK_THROWS_AS(read_snapshot(path), SnapshotError);
  CHECK_THROWS_AS(read_snapshot(temp_file("missing.lmsnap")), SnapshotError);

  Snapshot snap;
  snap.dim = 2;
  snap.n = 2;
  snap.fields.push_back({"f", 1, {1.0, 2.0, 3.0, 4.0}});
  write_snapshot(path, snap);
  const auto full = bytes_of(path);
  {
    std::ofstream out(path, std::ios::binary);
    out.write(reinterpret_cast<const char*>(full.data()), static_cast<std::streamsize>(full.size() - 3));
  }
  CHECK_THROWS_AS(read_snapshot(path), SnapshotError);

  snap.fields[0].data.pop_back();
  CHECK_THROWS_AS(write_snapshot(path, snap), SnapshotError);
}
