#include "lowmach/snapshot.hpp"

#include <bit>
#include <cstring>
#include <fstream>

namespace lowmach {

namespace {

constexpr char kMagic[8] = {'L', 'M', 'S', 'N', 'A', 'P', '\0', '\0'};
constexpr std::uint32_t kVersion = 1;

static_assert(std::endian::native == std::endian::little, "snapshot I/O assumes a little-endian host");

class Writer {
 public:
  explicit Writer(const std::filesystem::path& path) : out_(path, std::ios::binary) {
    if (!out_) throw SnapshotError("cannot open " + path.string() + " for writing");
  }
  void bytes(const void* p, std::size_t size) { out_.write(static_cast<const char*>(p), size); }
  void u32(std::uint32_t v) { bytes(&v, 4); }
  void text(const std::string& s) {
    u32(static_cast<std::uint32_t>(s.size()));
    bytes(s.data(), s.size());
  }
  void finish() {
    out_.flush();
    if (!out_) throw SnapshotError("snapshot write failed");
  }

 private:
  std::ofstream out_;
};

class Reader {
 public:
  explicit Reader(const std::filesystem::path& path) : in_(path, std::ios::binary) {
    if (!in_) throw SnapshotError("cannot open " + path.string());
  }
  void bytes(void* p, std::size_t size) {
    in_.read(static_cast<char*>(p), size);
    if (!in_) throw SnapshotError("truncated snapshot");
  }
  std::uint32_t u32() {
    std::uint32_t v;
    bytes(&v, 4);
    return v;
  }
  std::string text() {
    std::string s(u32(), '\0');
    bytes(s.data(), s.size());
    return s;
  }
  bool at_end() { return in_.peek() == std::ifstream::traits_type::eof(); }

 private:
  std::ifstream in_;
};

SnapshotField scalar_field(const std::string& name, const ScalarField& f) {
  return {name, 1, std::vector<double>(f.data(), f.data() + f.size())};
}

SnapshotField vector_field(const std::string& name, const VectorField& f) {
  SnapshotField out{name, static_cast<int>(f.cols()), std::vector<double>(f.size())};
  for (Index i = 0; i < f.rows(); ++i) {
    for (Index c = 0; c < f.cols(); ++c) out.data[i * f.cols() + c] = f(i, c);
  }
  return out;
}

ScalarField as_scalar(const SnapshotField& f) {
  if (f.components != 1) throw SnapshotError("field " + f.name + " is not scalar");
  return Eigen::Map<const ScalarField>(f.data.data(), f.data.size());
}

VectorField as_vector(const SnapshotField& f) {
  const Index rows = static_cast<Index>(f.data.size()) / f.components;
  VectorField out(rows, f.components);
  for (Index i = 0; i < rows; ++i) {
    for (Index c = 0; c < f.components; ++c) out(i, c) = f.data[i * f.components + c];
  }
  return out;
}

Snapshot header(const SpectralGrid& grid, const std::string& kind, double t) {
  Snapshot snap;
  snap.dim = grid.dim();
  snap.n = grid.spec().n;
  snap.metadata["kind"] = kind;
  snap.metadata["length"] = grid.spec().length;
  snap.metadata["t"] = t;
  return snap;
}

void check_header(const SpectralGrid& grid, const Snapshot& snap, const std::string& kind) {
  if (snap.metadata.value("kind", "") != kind) throw SnapshotError("snapshot is not a " + kind + " state");
  if (snap.dim != grid.dim() || snap.n != grid.spec().n) throw SnapshotError("snapshot grid differs from config");
  if (snap.metadata.value("length", 0.0) != grid.spec().length) {
    throw SnapshotError("snapshot box length differs from config");
  }
}

}  // namespace

const SnapshotField& Snapshot::field(const std::string& name) const {
  for (const auto& f : fields) {
    if (f.name == name) return f;
  }
  throw SnapshotError("snapshot has no field " + name);
}

void write_snapshot(const std::filesystem::path& path, const Snapshot& snap) {
  Index points = 1;
  for (int d = 0; d < snap.dim; ++d) points *= snap.n;
  Writer w(path);
  w.bytes(kMagic, sizeof kMagic);
  w.u32(kVersion);
  w.text(snap.metadata.dump());
  w.u32(static_cast<std::uint32_t>(snap.fields.size()));
  for (const auto& f : snap.fields) {
    if (f.components < 1 || static_cast<Index>(f.data.size()) != points * f.components) {
      throw SnapshotError("field " + f.name + " does not match the snapshot shape");
    }
    w.text(f.name);
    w.u32(static_cast<std::uint32_t>(snap.dim + 1));
    for (int d = 0; d < snap.dim; ++d) w.u32(static_cast<std::uint32_t>(snap.n));
    w.u32(static_cast<std::uint32_t>(f.components));
    w.bytes(f.data.data(), f.data.size() * sizeof(double));
  }
  w.finish();
}

Snapshot read_snapshot(const std::filesystem::path& path) {
  Reader r(path);
  char magic[8];
  r.bytes(magic, sizeof magic);
  if (std::memcmp(magic, kMagic, sizeof magic) != 0) throw SnapshotError("not a snapshot file: bad magic");
  if (const auto v = r.u32(); v != kVersion) throw SnapshotError("unsupported snapshot version " + std::to_string(v));
  Snapshot snap;
  try {
    snap.metadata = nlohmann::json::parse(r.text());
  } catch (const nlohmann::json::exception& e) {
    throw SnapshotError(std::string("bad snapshot metadata: ") + e.what());
  }
  const std::uint32_t count = r.u32();
  for (std::uint32_t k = 0; k < count; ++k) {
    SnapshotField f;
    f.name = r.text();
    const std::uint32_t rank = r.u32();
    if (rank < 2 || rank > 4) throw SnapshotError("field " + f.name + " has unsupported rank");
    std::vector<std::uint32_t> shape(rank);
    for (auto& s : shape) s = r.u32();
    for (std::uint32_t d = 1; d + 1 < rank; ++d) {
      if (shape[d] != shape[0]) throw SnapshotError("field " + f.name + " is not on a cubic grid");
    }
    const int dim = static_cast<int>(rank) - 1;
    if (k == 0) {
      snap.dim = dim;
      snap.n = shape[0];
    } else if (dim != snap.dim || shape[0] != snap.n) {
      throw SnapshotError("fields disagree on the grid shape");
    }
    f.components = static_cast<int>(shape.back());
    std::size_t size = f.components;
    for (int d = 0; d < dim; ++d) size *= shape[0];
    f.data.resize(size);
    r.bytes(f.data.data(), size * sizeof(double));
    snap.fields.push_back(std::move(f));
  }
  if (!r.at_end()) throw SnapshotError("trailing bytes after the last field");
  return snap;
}

Snapshot to_snapshot(const SpectralGrid& grid, const CompressibleState& state) {
  Snapshot snap = header(grid, "compressible", state.t);
  snap.metadata["eps"] = state.eps;
  snap.fields = {scalar_field("q", state.q), vector_field("u", state.u), vector_field("H", state.H),
                 scalar_field("S", state.S)};
  return snap;
}

Snapshot to_snapshot(const SpectralGrid& grid, const IncompressibleState& state) {
  Snapshot snap = header(grid, "incompressible", state.t);
  snap.fields = {vector_field("v", state.v), vector_field("Hbar", state.Hbar), scalar_field("Sbar", state.Sbar),
                 scalar_field("pi", state.pi)};
  return snap;
}

CompressibleState compressible_from_snapshot(const SpectralGrid& grid, const Snapshot& snap) {
  check_header(grid, snap, "compressible");
  CompressibleState s;
  s.q = as_scalar(snap.field("q"));
  s.u = as_vector(snap.field("u"));
  s.H = as_vector(snap.field("H"));
  s.S = as_scalar(snap.field("S"));
  s.eps = snap.metadata.value("eps", 0.0);
  s.t = snap.metadata.value("t", 0.0);
  validate(grid, s);
  return s;
}

IncompressibleState incompressible_from_snapshot(const SpectralGrid& grid, const Snapshot& snap) {
  check_header(grid, snap, "incompressible");
  IncompressibleState s;
  s.v = as_vector(snap.field("v"));
  s.Hbar = as_vector(snap.field("Hbar"));
  s.Sbar = as_scalar(snap.field("Sbar"));
  s.pi = as_scalar(snap.field("pi"));
  s.t = snap.metadata.value("t", 0.0);
  validate(grid, s);
  return s;
}

}  // namespace lowmach
