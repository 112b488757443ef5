#pragma once

#include <filesystem>
#include <vector>

#include "hemorom/field.hpp"

namespace hemorom {

/// One stored full-order solution: fields plus the boundary data they were
/// computed with (inlet speed g_u, outlet pressures g_p per outlet).
struct SnapshotRecord {
  int index = 0;
  double t = 0.0;
  VectorField u;
  ScalarField p;
  double g_u = 0.0;
  std::vector<double> g_p;
};

/// Append-only collection of snapshots on one mesh, persisted as a directory
/// with `manifest.txt` (one line per snapshot: index, t, u file, p file, g_u,
/// g_p per outlet) and ROMFLD field files.
class SnapshotDatabase {
 public:
  SnapshotDatabase() = default;
  SnapshotDatabase(int nx, int ny, int n_outlets)
      : nx_(nx), ny_(ny), n_outlets_(n_outlets) {}

  void append(SnapshotRecord rec);
  int size() const { return static_cast<int>(records_.size()); }
  bool empty() const { return records_.empty(); }
  const SnapshotRecord& operator[](int i) const { return records_[i]; }
  const std::vector<SnapshotRecord>& records() const { return records_; }

  int nx() const { return nx_; }
  int ny() const { return ny_; }
  int n_outlets() const { return n_outlets_; }

  std::vector<double> times() const;

  void save(const std::filesystem::path& dir) const;
  static SnapshotDatabase load(const std::filesystem::path& dir);

 private:
  int nx_ = 0, ny_ = 0, n_outlets_ = 1;
  std::vector<SnapshotRecord> records_;
};

}  // namespace hemorom
