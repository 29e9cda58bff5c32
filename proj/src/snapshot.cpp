#include "caloric/snapshot.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace caloric {

static_assert(std::endian::native == std::endian::little, "snapshot encoding assumes a little-endian host");

namespace {

template <class T>
void put(std::string& out, T v) {
  char buf[sizeof(T)];
  std::memcpy(buf, &v, sizeof(T));
  out.append(buf, sizeof(T));
}

class Reader {
 public:
  explicit Reader(const std::string& b) : bytes_(b) {}
  template <class T>
  T get() {
    need(sizeof(T));
    T v;
    std::memcpy(&v, bytes_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return v;
  }
  std::string str(size_t len) {
    need(len);
    std::string s = bytes_.substr(pos_, len);
    pos_ += len;
    return s;
  }
  void doubles(double* out, size_t count) {
    need(count * sizeof(double));
    std::memcpy(out, bytes_.data() + pos_, count * sizeof(double));
    pos_ += count * sizeof(double);
  }
  bool done() const { return pos_ == bytes_.size(); }

 private:
  void need(size_t k) {
    if (bytes_.size() - pos_ < k) throw std::runtime_error("snapshot: truncated payload");
  }
  const std::string& bytes_;
  size_t pos_ = 0;
};

}  // namespace

const SnapshotBlock* Snapshot::find(const std::string& name) const {
  for (const auto& b : blocks)
    if (b.name == name) return &b;
  return nullptr;
}

std::string encode_snapshot(const Snapshot& s) {
  std::string out = "CGWM";
  put<uint32_t>(out, kSnapshotVersion);
  put<uint32_t>(out, static_cast<uint32_t>(s.m));
  put<uint32_t>(out, static_cast<uint32_t>(s.grid.n));
  put<double>(out, s.grid.h);
  put<uint32_t>(out, static_cast<uint32_t>(s.grid.margin));
  if (static_cast<int>(s.base.size()) != s.m + 1) throw std::invalid_argument("snapshot: base size mismatch");
  for (double b : s.base) put<double>(out, b);
  put<uint32_t>(out, static_cast<uint32_t>(s.blocks.size()));
  for (const auto& b : s.blocks) {
    if (b.data.size() != static_cast<size_t>(s.grid.cells()) * b.components)
      throw std::invalid_argument("snapshot: block '" + b.name + "' has wrong size");
    put<uint32_t>(out, static_cast<uint32_t>(b.name.size()));
    out += b.name;
    put<uint32_t>(out, static_cast<uint32_t>(b.components));
    out.append(reinterpret_cast<const char*>(b.data.data()), b.data.size() * sizeof(double));
  }
  return out;
}

Snapshot decode_snapshot(const std::string& bytes) {
  Reader r(bytes);
  if (r.str(4) != "CGWM") throw std::runtime_error("snapshot: bad magic");
  const uint32_t version = r.get<uint32_t>();
  if (version != kSnapshotVersion) throw std::runtime_error("snapshot: unsupported version " + std::to_string(version));
  Snapshot s;
  s.m = static_cast<int>(r.get<uint32_t>());
  s.grid.n = static_cast<int>(r.get<uint32_t>());
  s.grid.h = r.get<double>();
  s.grid.margin = static_cast<int>(r.get<uint32_t>());
  if (s.m < 1 || s.m > 64) throw std::runtime_error("snapshot: implausible m");
  s.grid.validate();
  s.base.resize(s.m + 1);
  r.doubles(s.base.data(), s.base.size());
  const uint32_t count = r.get<uint32_t>();
  for (uint32_t k = 0; k < count; ++k) {
    SnapshotBlock b;
    const uint32_t len = r.get<uint32_t>();
    if (len > 256) throw std::runtime_error("snapshot: block name too long");
    b.name = r.str(len);
    b.components = static_cast<int>(r.get<uint32_t>());
    if (b.components < 1 || b.components > 4096) throw std::runtime_error("snapshot: implausible component count");
    b.data.resize(static_cast<size_t>(s.grid.cells()) * b.components);
    r.doubles(b.data.data(), b.data.size());
    s.blocks.push_back(std::move(b));
  }
  if (!r.done()) throw std::runtime_error("snapshot: trailing bytes");
  if (s.find("phi0")) {
    if (s.find("phi1"))
      data_from_snapshot(s);
    else
      map_from_snapshot(s);
  }
  return s;
}

void write_snapshot(const std::string& path, const Snapshot& s) {
  const std::string bytes = encode_snapshot(s);
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("snapshot: cannot open " + path);
  f.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!f) throw std::runtime_error("snapshot: write failed for " + path);
}

Snapshot read_snapshot(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("snapshot: cannot open " + path);
  std::ostringstream os;
  os << f.rdbuf();
  return decode_snapshot(os.str());
}

Snapshot snapshot_of(const MapField& phi) {
  Snapshot s;
  s.m = phi.m();
  s.grid = phi.grid();
  s.base.assign(phi.base().coords().begin(), phi.base().coords().end());
  s.blocks.push_back({"phi0", phi.dim(), phi.raw()});
  return s;
}

Snapshot snapshot_of(const DataPair& d) {
  Snapshot s = snapshot_of(d.phi0);
  s.blocks.push_back({"phi1", d.phi1.dim(), d.phi1.raw()});
  return s;
}

MapField map_from_snapshot(const Snapshot& s) {
  const SnapshotBlock* b = s.find("phi0");
  if (!b || b->components != s.m + 1) throw std::runtime_error("snapshot: missing or malformed phi0 block");
  MapField phi(s.grid, HyperbolicPoint::from_coords(s.base));
  for (size_t i = 0; i < s.base.size(); ++i)
    if (phi.base().coords()[i] != s.base[i]) throw std::runtime_error("snapshot: base point off the sheet");
  phi.raw() = b->data;
  try {
    phi.validate();
  } catch (const std::exception& e) {
    throw std::runtime_error(std::string("snapshot: invalid phi0: ") + e.what());
  }
  return phi;
}

DataPair data_from_snapshot(const Snapshot& s) {
  DataPair d{map_from_snapshot(s), TangentField(s.grid, s.m)};
  const SnapshotBlock* b = s.find("phi1");
  if (!b || b->components != s.m + 1) throw std::runtime_error("snapshot: missing or malformed phi1 block");
  d.phi1.raw() = b->data;
  try {
    d.validate();
  } catch (const std::exception& e) {
    throw std::runtime_error(std::string("snapshot: invalid data: ") + e.what());
  }
  return d;
}

}  // namespace caloric
