#pragma once

#include <string>
#include <vector>

#include "caloric/grid.hpp"

namespace caloric {

// Binary layout (little-endian):
//   "CGWM" | u32 version | u32 m | u32 n | f64 h | u32 margin | f64[m+1] base | u32 block count
//   then per block: u32 name length | name bytes | u32 components | f64[n*n*components] row-major
struct SnapshotBlock {
  std::string name;
  int components = 0;
  Vec data;
};

struct Snapshot {
  int m = 0;
  GridSpec grid;
  Vec base;
  std::vector<SnapshotBlock> blocks;

  const SnapshotBlock* find(const std::string& name) const;
};

inline constexpr unsigned kSnapshotVersion = 1;

std::string encode_snapshot(const Snapshot& s);
// Validates the header, block sizes and, for "phi0"/"phi1" blocks, the data invariants.
Snapshot decode_snapshot(const std::string& bytes);
void write_snapshot(const std::string& path, const Snapshot& s);
Snapshot read_snapshot(const std::string& path);

Snapshot snapshot_of(const DataPair& d);
Snapshot snapshot_of(const MapField& phi);
DataPair data_from_snapshot(const Snapshot& s);
MapField map_from_snapshot(const Snapshot& s);

}  // namespace caloric
