#pragma once

#include "skdv/grid.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace skdv {

struct Snapshot {
    double t = 0.0;
    double eps = 0.0;
    Field u;
};

// CSV: a header row "t,x_0,...,x_{N-1}", then one row "t,u_0,...,u_{N-1}" per snapshot.
void write_snapshots_csv(const std::string& path, const std::vector<Snapshot>& snaps);
std::vector<Snapshot> read_snapshots_csv(const std::string& path);

// Binary, little-endian: float64 L, uint64 N, float64 t, float64 eps, then N float64 values.
// A file holds consecutive records.
void write_snapshot_binary(std::ostream& os, const Snapshot& s);
void write_snapshots_binary(const std::string& path, const std::vector<Snapshot>& snaps);
std::vector<Snapshot> read_snapshots_binary(const std::string& path);

}  // namespace skdv
