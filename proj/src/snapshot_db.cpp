#include "hemorom/snapshot_db.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "hemorom/errors.hpp"
#include "hemorom/io.hpp"

namespace hemorom {

void SnapshotDatabase::append(SnapshotRecord rec) {
  if (rec.u.size() != nx_ * ny_ || rec.p.size() != nx_ * ny_)
    throw DimensionError("snapshot append: field size mismatch");
  if (static_cast<int>(rec.g_p.size()) != n_outlets_)
    throw DimensionError("snapshot append: g_p size mismatch");
  records_.push_back(std::move(rec));
}

std::vector<double> SnapshotDatabase::times() const {
  std::vector<double> t;
  t.reserve(records_.size());
  for (const auto& r : records_) t.push_back(r.t);
  return t;
}

namespace {

std::string field_name(const char* prefix, int index) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%s_%04d.fld", prefix, index);
  return buf;
}

}  // namespace

void SnapshotDatabase::save(const std::filesystem::path& dir) const {
  std::filesystem::create_directories(dir);
  std::ofstream manifest(dir / "manifest.txt");
  if (!manifest) throw IoError("cannot write manifest in " + dir.string());
  for (const auto& r : records_) {
    const std::string uf = field_name("u", r.index);
    const std::string pf = field_name("p", r.index);
    write_field(dir / uf, r.u, nx_, ny_);
    write_field(dir / pf, r.p, nx_, ny_);
    manifest << r.index << ' ' << fmt17(r.t) << ' ' << uf << ' ' << pf << ' '
             << fmt17(r.g_u);
    for (double gp : r.g_p) manifest << ' ' << fmt17(gp);
    manifest << '\n';
  }
}

SnapshotDatabase SnapshotDatabase::load(const std::filesystem::path& dir) {
  std::ifstream manifest(dir / "manifest.txt");
  if (!manifest) throw IoError("cannot read manifest in " + dir.string());
  SnapshotDatabase db;
  std::string line;
  while (std::getline(manifest, line)) {
    if (line.empty()) continue;
    std::istringstream in(line);
    SnapshotRecord rec;
    std::string uf, pf;
    if (!(in >> rec.index >> rec.t >> uf >> pf >> rec.g_u))
      throw IoError("bad manifest line: " + line);
    double gp;
    while (in >> gp) rec.g_p.push_back(gp);
    if (rec.g_p.empty()) throw IoError("manifest line missing g_p: " + line);

    int nx, ny;
    rec.u = read_vector_field(dir / uf, &nx, &ny);
    rec.p = read_scalar_field(dir / pf);
    if (db.records_.empty()) {
      db.nx_ = nx;
      db.ny_ = ny;
      db.n_outlets_ = static_cast<int>(rec.g_p.size());
    } else if (nx != db.nx_ || ny != db.ny_ ||
               static_cast<int>(rec.g_p.size()) != db.n_outlets_) {
      throw IoError("inconsistent snapshot dimensions in " + dir.string());
    }
    db.records_.push_back(std::move(rec));
  }
  return db;
}

}  // namespace hemorom
