#include "hemorom/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <ostream>
#include <sstream>

#include "hemorom/errors.hpp"
#include "hemorom/io.hpp"

namespace hemorom {

namespace {

double wall_seconds() {
  using clock = std::chrono::steady_clock;
  return std::chrono::duration<double>(clock::now().time_since_epoch()).count();
}

std::string mode_file(const char* prefix, int k) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%s_%02d.fld", prefix, k);
  return buf;
}

bool same_time(double a, double b) {
  return std::abs(a - b) <= 1e-9 * std::max({1.0, std::abs(a), std::abs(b)});
}

}  // namespace

PipelineConfig PipelineConfig::from(const Config& cfg) {
  PipelineConfig p;
  p.nx = cfg.integer_or("mesh.nx", 40);
  p.ny = cfg.integer_or("mesh.ny", 8);
  p.n_outlets = cfg.integer_or("mesh.n_outlets", 1);
  p.length = cfg.number_or("mesh.length", 0.3);
  p.radius = cfg.number_or("mesh.radius", 0.02);

  p.fluid.nu = cfg.number_or("fluid.nu", 0.004);

  p.time.t0 = cfg.number_or("time.t0", 0.0);
  p.time.T = cfg.number_or("time.T", 1.0);
  p.time.dt = cfg.number_or("time.dt", 1e-3);
  p.time.stride = cfg.integer_or("time.stride", 20);
  p.time.validate();

  p.fom.n_piso = cfg.integer_or("fom.n_piso", 2);
  p.fom.lin_tol = cfg.number_or("fom.lin_tol", 1e-10);
  p.fom.u0 = cfg.number_or("inlet.u0", 0.007957);
  p.fluid.ref_u = p.fom.u0;
  p.fluid.ref_l = 2.0 * p.radius;

  WindkesselParams base;
  base.rp = cfg.number_or("wk.rp", 1e4);
  base.rd = cfg.number_or("wk.rd", 1e5);
  base.c = cfg.number_or("wk.c", 0.07957e-5);
  base.pd = cfg.number_or("wk.pd", 0.0);
  p.fom.wk.assign(p.n_outlets, base);
  for (int j = 0; j < p.n_outlets; ++j) {
    const std::string prefix = "wk." + std::to_string(j) + ".";
    p.fom.wk[j].rp = cfg.number_or(prefix + "rp", p.fom.wk[j].rp);
    p.fom.wk[j].rd = cfg.number_or(prefix + "rd", p.fom.wk[j].rd);
    p.fom.wk[j].c = cfg.number_or(prefix + "c", p.fom.wk[j].c);
    p.fom.wk[j].pd = cfg.number_or(prefix + "pd", p.fom.wk[j].pd);
    p.fom.wk[j].validate();
  }
  p.wk_decaying_exponential = cfg.flag_or("wk.analytic_decaying_exponential", false);

  p.lifting_outlet_neumann = cfg.number_or("lifting.outlet_neumann_value", 1.0);

  p.pod_delta = cfg.number_or("pod.delta", 0.9999);
  if (p.pod_delta <= 0.0 || p.pod_delta > 1.0)
    throw ConfigError("pod.delta must lie in (0, 1]");
  p.rom_n_modes = cfg.integer_or("rom.n_modes", 0);
  const std::string stab = cfg.str_or("rom.stabilization", "sup");
  if (stab == "sup")
    p.stabilization = Stabilization::Supremizer;
  else if (stab == "ppe")
    p.stabilization = Stabilization::Ppe;
  else
    throw ConfigError("rom.stabilization must be 'sup' or 'ppe'");
  const std::string supv = cfg.str_or("rom.supremizer", "exact");
  if (supv == "exact")
    p.supremizer = SupremizerVariant::Exact;
  else if (supv == "approximate")
    p.supremizer = SupremizerVariant::Approximate;
  else
    throw ConfigError("rom.supremizer must be 'exact' or 'approximate'");
  p.rom_substeps = cfg.integer_or("rom.substeps", 1);
  if (p.rom_substeps < 1) throw ConfigError("rom.substeps must be >= 1");

  const std::string preset = cfg.str_or("nn.preset", "desk");
  if (preset == "desk") {
    p.nn = NetworkConfig{};
  } else if (preset == "paper") {
    p.nn.hidden_layers = 2;
    p.nn.neurons = 150;
    p.nn.epochs = 50000;
    p.nn.learning_rate = 5e-6;
  } else {
    throw ConfigError("nn.preset must be 'desk' or 'paper'");
  }
  p.nn.hidden_layers = cfg.integer_or("nn.hidden_layers", p.nn.hidden_layers);
  p.nn.neurons = cfg.integer_or("nn.neurons", p.nn.neurons);
  p.nn.epochs = cfg.integer_or("nn.epochs", p.nn.epochs);
  p.nn.learning_rate = cfg.number_or("nn.learning_rate", p.nn.learning_rate);
  p.nn.train_fraction = cfg.number_or("nn.train_fraction", p.nn.train_fraction);
  p.nn.seed = static_cast<uint64_t>(
      cfg.integer_or("nn.seed", static_cast<int>(p.nn.seed)));
  p.nn.validate();
  p.nn_per_outlet = cfg.flag_or("nn.per_outlet", false);

  p.database_dir = cfg.str_or("paths.database", "fom_db");
  p.bundle_dir = cfg.str_or("paths.bundle", "rom_bundle");
  p.report_dir = cfg.str_or("paths.report", "report");
  return p;
}

StructuredMesh PipelineConfig::make_mesh() const {
  return StructuredMesh::channel(nx, ny, length, radius, n_outlets);
}

FomSolver PipelineConfig::make_solver() const {
  return FomSolver(make_mesh(), fluid, fom);
}

namespace {

std::map<std::string, std::string> flat_config(const PipelineConfig& p) {
  std::map<std::string, std::string> m;
  m["mesh.nx"] = std::to_string(p.nx);
  m["mesh.ny"] = std::to_string(p.ny);
  m["mesh.n_outlets"] = std::to_string(p.n_outlets);
  m["mesh.length"] = fmt17(p.length);
  m["mesh.radius"] = fmt17(p.radius);
  m["fluid.nu"] = fmt17(p.fluid.nu);
  m["time.t0"] = fmt17(p.time.t0);
  m["time.T"] = fmt17(p.time.T);
  m["time.dt"] = fmt17(p.time.dt);
  m["time.stride"] = std::to_string(p.time.stride);
  m["fom.n_piso"] = std::to_string(p.fom.n_piso);
  m["fom.lin_tol"] = fmt17(p.fom.lin_tol);
  m["inlet.u0"] = fmt17(p.fom.u0);
  for (int j = 0; j < p.n_outlets; ++j) {
    const std::string prefix = "wk." + std::to_string(j) + ".";
    m[prefix + "rp"] = fmt17(p.fom.wk[j].rp);
    m[prefix + "rd"] = fmt17(p.fom.wk[j].rd);
    m[prefix + "c"] = fmt17(p.fom.wk[j].c);
    m[prefix + "pd"] = fmt17(p.fom.wk[j].pd);
  }
  m["wk.analytic_decaying_exponential"] =
      p.wk_decaying_exponential ? "true" : "false";
  m["lifting.outlet_neumann_value"] = fmt17(p.lifting_outlet_neumann);
  m["pod.delta"] = fmt17(p.pod_delta);
  m["rom.n_modes"] = std::to_string(p.rom_n_modes);
  m["rom.stabilization"] =
      p.stabilization == Stabilization::Supremizer ? "sup" : "ppe";
  m["rom.supremizer"] =
      p.supremizer == SupremizerVariant::Exact ? "exact" : "approximate";
  m["rom.substeps"] = std::to_string(p.rom_substeps);
  m["nn.hidden_layers"] = std::to_string(p.nn.hidden_layers);
  m["nn.neurons"] = std::to_string(p.nn.neurons);
  m["nn.epochs"] = std::to_string(p.nn.epochs);
  m["nn.learning_rate"] = fmt17(p.nn.learning_rate);
  m["nn.train_fraction"] = fmt17(p.nn.train_fraction);
  m["nn.seed"] = std::to_string(p.nn.seed);
  m["nn.per_outlet"] = p.nn_per_outlet ? "true" : "false";
  m["paths.database"] = p.database_dir.string();
  m["paths.bundle"] = p.bundle_dir.string();
  m["paths.report"] = p.report_dir.string();
  return m;
}

struct LockGuard {
  std::filesystem::path lock;
  explicit LockGuard(const std::filesystem::path& dir) : lock(dir / ".lock") {
    if (std::filesystem::exists(lock))
      throw IoError("bundle directory is locked by another writer: " +
                    dir.string());
    std::ofstream out(lock);
    if (!out) throw IoError("cannot create lock file in " + dir.string());
    out << "locked\n";
  }
  ~LockGuard() {
    std::error_code ec;
    std::filesystem::remove(lock, ec);
  }
};

void write_spectrum(const std::filesystem::path& path,
                    const std::vector<double>& ev) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << "# modes have unit volume-weighted norm; eigenvalues belong to the\n"
      << "# (1/N_t)-scaled weighted snapshot Gram matrix\n"
      << "# index lambda cumulative_fraction\n";
  double total = 0.0;
  for (double l : ev) total += l;
  double cum = 0.0;
  for (size_t i = 0; i < ev.size(); ++i) {
    cum += ev[i];
    out << i + 1 << ' ' << fmt17(ev[i]) << ' '
        << fmt17(total > 0.0 ? cum / total : 0.0) << '\n';
  }
}

std::vector<double> read_spectrum(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read " + path.string());
  std::vector<double> ev;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    int idx;
    double lambda, cum;
    if (ls >> idx >> lambda >> cum) ev.push_back(lambda);
  }
  return ev;
}

void write_traces(const std::filesystem::path& path, const LiftingSet& lifting) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << "ROMTRC v1 " << lifting.times.size() << ' ' << lifting.n_outlets()
      << '\n';
  for (size_t k = 0; k < lifting.times.size(); ++k) {
    out << fmt17(lifting.times[k]) << ' ' << fmt17(lifting.g_u[k]);
    for (double gp : lifting.g_p[k]) out << ' ' << fmt17(gp);
    out << '\n';
  }
}

void read_traces(const std::filesystem::path& path, LiftingSet& lifting) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read " + path.string());
  std::string magic, version;
  size_t n;
  int outlets;
  in >> magic >> version >> n >> outlets;
  if (magic != "ROMTRC" || version != "v1")
    throw IoError("bad trace file header: " + path.string());
  lifting.times.resize(n);
  lifting.g_u.resize(n);
  lifting.g_p.assign(n, std::vector<double>(outlets));
  for (size_t k = 0; k < n; ++k) {
    in >> lifting.times[k] >> lifting.g_u[k];
    for (int j = 0; j < outlets; ++j) in >> lifting.g_p[k][j];
  }
  if (!in) throw IoError("truncated trace file: " + path.string());
}

}  // namespace

SnapshotDatabase run_fom(const PipelineConfig& cfg, std::ostream& log) {
  const FomSolver solver = cfg.make_solver();
  log << "fom: " << cfg.nx << "x" << cfg.ny << " cells, dt = " << cfg.time.dt
      << ", steps = " << cfg.time.steps() << ", Re = " << cfg.fluid.reynolds()
      << "\n";
  const double start = wall_seconds();
  SnapshotDatabase db = solver.run(cfg.time);
  const double elapsed = wall_seconds() - start;
  db.save(cfg.database_dir);
  std::ofstream timing(cfg.database_dir / "timings.txt");
  timing << "fom_seconds = " << fmt17(elapsed) << '\n';
  log << "fom: stored " << db.size() << " snapshots in "
      << cfg.database_dir.string() << " (" << elapsed << " s)\n";
  return db;
}

namespace {

template <typename F>
auto offline_stage(const char* name, std::ostream& log, F&& f) {
  log << "offline: " << name << "\n";
  const std::string prefix = "offline stage '" + std::string(name) + "' failed: ";
  try {
    return f();
  } catch (const ConfigError& e) {
    throw ConfigError(prefix + e.what());
  } catch (const IoError& e) {
    throw IoError(prefix + e.what());
  } catch (const std::exception& e) {
    throw NumericalError(prefix + e.what());
  }
}

}  // namespace

RomBundle run_offline(const PipelineConfig& cfg, bool with_fom, std::ostream& log) {
  const double start = wall_seconds();
  RomBundle bundle;
  bundle.config = cfg;
  bundle.mesh = cfg.make_mesh();
  const StructuredMesh& mesh = bundle.mesh;

  SnapshotDatabase db = offline_stage("fom database", log, [&] {
    if (with_fom || !std::filesystem::exists(cfg.database_dir / "manifest.txt"))
      return run_fom(cfg, log);
    return SnapshotDatabase::load(cfg.database_dir);
  });
  if (db.empty()) throw NumericalError("offline: snapshot database is empty");
  if (db.nx() != cfg.nx || db.ny() != cfg.ny)
    throw ConfigError("offline: database mesh does not match the config");

  bundle.lifting = offline_stage("lifting functions", log, [&] {
    return build_lifting(mesh, db, cfg.lifting_outlet_neumann);
  });

  SnapshotDatabase hom = offline_stage("homogenization", log, [&] {
    return homogenize(db, bundle.lifting);
  });

  PodBasis u_basis, p_basis;
  offline_stage("pod", log, [&] {
    SnapshotMatrix su = velocity_snapshots(hom, mesh);
    SnapshotMatrix sp = pressure_snapshots(hom, mesh);
    PodBasis probe_u = compute_basis(su, 1);
    PodBasis probe_p = compute_basis(sp, 1);
    int n_u, n_p;
    if (cfg.rom_n_modes > 0) {
      n_u = std::min(cfg.rom_n_modes, numerical_rank(probe_u.eigenvalues));
      n_p = std::min(cfg.rom_n_modes, numerical_rank(probe_p.eigenvalues));
    } else {
      n_u = std::min(select_rank(probe_u.eigenvalues, cfg.pod_delta),
                     numerical_rank(probe_u.eigenvalues));
      n_p = std::min(select_rank(probe_p.eigenvalues, cfg.pod_delta),
                     numerical_rank(probe_p.eigenvalues));
    }
    u_basis = compute_basis(su, n_u);
    p_basis = compute_basis(sp, n_p);
    log << "offline: retained " << n_u << " velocity and " << n_p
        << " pressure modes (delta = " << cfg.pod_delta << ")\n";
    return 0;
  });
  bundle.u_eigenvalues = u_basis.eigenvalues;
  bundle.p_eigenvalues = p_basis.eigenvalues;
  bundle.bases.u_modes = basis_vector_modes(u_basis);
  bundle.bases.p_modes = basis_scalar_modes(p_basis);

  offline_stage("supremizers", log, [&] {
    std::vector<ScalarField> sources;
    if (cfg.supremizer == SupremizerVariant::Exact) {
      sources = bundle.bases.p_modes;
    } else {
      // Approximate variant: supremizers of the pressure snapshots,
      // compressed back to the pressure-mode count.
      std::vector<ScalarField> snaps;
      for (const auto& r : hom.records()) snaps.push_back(r.p);
      const auto raw = compute_supremizers(
          snaps, mesh, homogeneous_pressure_bc(mesh.n_outlets()));
      std::vector<std::vector<double>> cols;
      for (const auto& s : raw) cols.push_back(flatten(s));
      SnapshotMatrix sm(std::move(cols), vector_weights(mesh));
      const int n = std::min<int>(p_basis.n_retained,
                                  numerical_rank(compute_basis(sm, 1).eigenvalues));
      bundle.bases.supremizers = orthonormalize_enrichment(
          bundle.bases.u_modes, basis_vector_modes(compute_basis(sm, n)), mesh);
      return 0;
    }
    const auto raw = compute_supremizers(
        sources, mesh, homogeneous_pressure_bc(mesh.n_outlets()));
    bundle.bases.supremizers =
        orthonormalize_enrichment(bundle.bases.u_modes, raw, mesh);
    return 0;
  });
  log << "offline: " << bundle.bases.n_sup() << " supremizer modes\n";

  bundle.ops = offline_stage("tensor assembly", log, [&] {
    return assemble_operators(mesh, bundle.bases, bundle.lifting);
  });

  offline_stage("outflow network", log, [&] {
    DenseMatrix targets(db.size(), db.n_outlets());
    for (int s = 0; s < db.size(); ++s)
      for (int j = 0; j < db.n_outlets(); ++j) targets(s, j) = db[s].g_p[j];
    bundle.outflow = fit_outflow_model(db.times(), targets, cfg.nn,
                                       cfg.nn_per_outlet);
    return 0;
  });

  offline_stage("initial coefficients", log, [&] {
    const SnapshotRecord& first = hom[0];
    bundle.initial_time = first.t;
    bundle.initial_a.clear();
    for (const auto& v : bundle.bases.u_modes)
      bundle.initial_a.push_back(inner_product(v, first.u, mesh));
    for (const auto& v : bundle.bases.supremizers)
      bundle.initial_a.push_back(inner_product(v, first.u, mesh));
    bundle.initial_b.clear();
    for (const auto& m : bundle.bases.p_modes)
      bundle.initial_b.push_back(inner_product(m, first.p, mesh));
    return 0;
  });

  bundle.offline_seconds = wall_seconds() - start;

  offline_stage("bundle write", log, [&] {
    const auto& dir = cfg.bundle_dir;
    std::filesystem::create_directories(dir);
    LockGuard lock(dir);
    std::error_code ec;
    std::filesystem::remove(dir / "manifest.txt", ec);  // invalidate first

    std::vector<std::string> artifacts;
    auto note = [&](const std::string& name) { artifacts.push_back(name); };

    write_field(dir / "chi_u.fld", bundle.lifting.chi_u, mesh.nx(), mesh.ny());
    note("chi_u.fld");
    for (int j = 0; j < bundle.lifting.n_outlets(); ++j) {
      const std::string name = "chi_p_" + std::to_string(j) + ".fld";
      write_field(dir / name, bundle.lifting.chi_p[j], mesh.nx(), mesh.ny());
      note(name);
    }
    for (int k = 0; k < bundle.bases.n_u(); ++k) {
      const std::string name = mode_file("u_mode", k);
      write_field(dir / name, bundle.bases.u_modes[k], mesh.nx(), mesh.ny());
      note(name);
    }
    for (int k = 0; k < bundle.bases.n_sup(); ++k) {
      const std::string name = mode_file("sup_mode", k);
      write_field(dir / name, bundle.bases.supremizers[k], mesh.nx(), mesh.ny());
      note(name);
    }
    for (int k = 0; k < bundle.bases.n_p(); ++k) {
      const std::string name = mode_file("p_mode", k);
      write_field(dir / name, bundle.bases.p_modes[k], mesh.nx(), mesh.ny());
      note(name);
    }
    write_spectrum(dir / "spectrum_u.txt", bundle.u_eigenvalues);
    note("spectrum_u.txt");
    write_spectrum(dir / "spectrum_p.txt", bundle.p_eigenvalues);
    note("spectrum_p.txt");

    DenseMatrix mass(bundle.ops.n_velocity(), 1);
    for (int i = 0; i < mass.rows; ++i) mass(i, 0) = bundle.ops.mass_chi[i];
    write_matrix(dir / "mass_chi.mat", mass);
    note("mass_chi.mat");
    write_matrix(dir / "diffusion.mat", bundle.ops.diffusion);
    note("diffusion.mat");
    write_tensor(dir / "convection.ten", bundle.ops.convection);
    note("convection.ten");
    write_matrix(dir / "pressure_grad.mat", bundle.ops.pressure_grad);
    note("pressure_grad.mat");
    write_matrix(dir / "divergence.mat", bundle.ops.divergence);
    note("divergence.mat");
    write_matrix(dir / "pressure_laplace.mat", bundle.ops.pressure_laplace);
    note("pressure_laplace.mat");
    write_matrix(dir / "outlet_boundary.mat", bundle.ops.outlet_boundary);
    note("outlet_boundary.mat");
    write_tensor(dir / "ppe_convection.ten", bundle.ops.ppe_convection);
    note("ppe_convection.ten");

    write_traces(dir / "traces.txt", bundle.lifting);
    note("traces.txt");
    bundle.outflow.save(dir / "outflow_nn.model");
    note("outflow_nn.model");

    DenseMatrix ia(static_cast<int>(bundle.initial_a.size()), 1);
    for (int i = 0; i < ia.rows; ++i) ia(i, 0) = bundle.initial_a[i];
    write_matrix(dir / "initial_a.mat", ia);
    note("initial_a.mat");
    DenseMatrix ib(static_cast<int>(bundle.initial_b.size()), 1);
    for (int i = 0; i < ib.rows; ++i) ib(i, 0) = bundle.initial_b[i];
    write_matrix(dir / "initial_b.mat", ib);
    note("initial_b.mat");

    {
      std::ofstream timing(dir / "timings.txt");  // advisory, not checksummed
      timing << "offline_seconds = " << fmt17(bundle.offline_seconds) << '\n';
    }

    std::sort(artifacts.begin(), artifacts.end());
    std::ofstream manifest(dir / "manifest.txt");
    if (!manifest) throw IoError("cannot write bundle manifest");
    for (const auto& [k, v] : flat_config(cfg))
      manifest << "config." << k << " = " << v << '\n';
    manifest << "info.n_u = " << bundle.bases.n_u() << '\n';
    manifest << "info.n_sup = " << bundle.bases.n_sup() << '\n';
    manifest << "info.n_p = " << bundle.bases.n_p() << '\n';
    manifest << "info.n_outlets = " << bundle.lifting.n_outlets() << '\n';
    manifest << "info.initial_time = " << fmt17(bundle.initial_time) << '\n';
    manifest << "info.chi_u_outlet_gradient = "
             << fmt17(bundle.lifting.chi_u_outlet_gradient) << '\n';
    for (const std::string& name : artifacts)
      manifest << "artifact." << name << " = " << file_checksum(dir / name)
               << '\n';
    manifest << "status = complete\n";
    return 0;
  });

  log << "offline: bundle written to " << cfg.bundle_dir.string() << " in "
      << bundle.offline_seconds << " s\n";
  return bundle;
}

RomBundle load_bundle(const std::filesystem::path& dir) {
  std::ifstream manifest(dir / "manifest.txt");
  if (!manifest)
    throw IoError("invalid bundle (no manifest): " + dir.string());
  std::map<std::string, std::string> kv;
  std::string line;
  while (std::getline(manifest, line)) {
    if (line.empty()) continue;
    const size_t eq = line.find('=');
    if (eq == std::string::npos) continue;
    std::string key = line.substr(0, eq);
    std::string value = line.substr(eq + 1);
    auto strip = [](std::string& s) {
      const size_t a = s.find_first_not_of(" \t");
      const size_t b = s.find_last_not_of(" \t\r");
      s = (a == std::string::npos) ? "" : s.substr(a, b - a + 1);
    };
    strip(key);
    strip(value);
    kv[key] = value;
  }
  if (kv.count("status") == 0 || kv["status"] != "complete")
    throw IoError("invalid bundle (incomplete): " + dir.string());

  // Checksum validation of every artifact.
  for (const auto& [key, value] : kv) {
    if (key.rfind("artifact.", 0) != 0) continue;
    const std::string name = key.substr(9);
    if (file_checksum(dir / name) != value)
      throw IoError("bundle artifact checksum mismatch: " + name);
  }

  std::string config_text;
  for (const auto& [key, value] : kv)
    if (key.rfind("config.", 0) == 0)
      config_text += key.substr(7) + " = " + value + "\n";

  RomBundle bundle;
  bundle.config = PipelineConfig::from(Config::from_string(config_text));
  bundle.mesh = bundle.config.make_mesh();
  const int n_u = std::stoi(kv.at("info.n_u"));
  const int n_sup = std::stoi(kv.at("info.n_sup"));
  const int n_p = std::stoi(kv.at("info.n_p"));
  const int n_outlets = std::stoi(kv.at("info.n_outlets"));
  bundle.initial_time = std::stod(kv.at("info.initial_time"));

  bundle.lifting.chi_u = read_vector_field(dir / "chi_u.fld");
  bundle.lifting.chi_u_outlet_gradient =
      std::stod(kv.at("info.chi_u_outlet_gradient"));
  for (int j = 0; j < n_outlets; ++j) {
    bundle.lifting.chi_p.push_back(
        read_scalar_field(dir / ("chi_p_" + std::to_string(j) + ".fld")));
    bundle.lifting.chi_p_outlet_trace.push_back(1.0);
  }
  read_traces(dir / "traces.txt", bundle.lifting);

  for (int k = 0; k < n_u; ++k)
    bundle.bases.u_modes.push_back(read_vector_field(dir / mode_file("u_mode", k)));
  for (int k = 0; k < n_sup; ++k)
    bundle.bases.supremizers.push_back(
        read_vector_field(dir / mode_file("sup_mode", k)));
  for (int k = 0; k < n_p; ++k)
    bundle.bases.p_modes.push_back(read_scalar_field(dir / mode_file("p_mode", k)));

  bundle.u_eigenvalues = read_spectrum(dir / "spectrum_u.txt");
  bundle.p_eigenvalues = read_spectrum(dir / "spectrum_p.txt");

  bundle.ops.n_u = n_u;
  bundle.ops.n_sup = n_sup;
  bundle.ops.n_p = n_p;
  bundle.ops.n_outlets = n_outlets;
  const DenseMatrix mass = read_matrix(dir / "mass_chi.mat");
  bundle.ops.mass_chi.assign(mass.rows, 0.0);
  for (int i = 0; i < mass.rows; ++i) bundle.ops.mass_chi[i] = mass(i, 0);
  bundle.ops.diffusion = read_matrix(dir / "diffusion.mat");
  bundle.ops.convection = read_tensor(dir / "convection.ten");
  bundle.ops.pressure_grad = read_matrix(dir / "pressure_grad.mat");
  bundle.ops.divergence = read_matrix(dir / "divergence.mat");
  bundle.ops.pressure_laplace = read_matrix(dir / "pressure_laplace.mat");
  bundle.ops.outlet_boundary = read_matrix(dir / "outlet_boundary.mat");
  bundle.ops.ppe_convection = read_tensor(dir / "ppe_convection.ten");

  bundle.outflow = OutflowModel::load(dir / "outflow_nn.model");

  const DenseMatrix ia = read_matrix(dir / "initial_a.mat");
  for (int i = 0; i < ia.rows; ++i) bundle.initial_a.push_back(ia(i, 0));
  const DenseMatrix ib = read_matrix(dir / "initial_b.mat");
  for (int i = 0; i < ib.rows; ++i) bundle.initial_b.push_back(ib(i, 0));

  std::ifstream timing(dir / "timings.txt");
  if (timing) {
    std::string key, eq;
    double v;
    if (timing >> key >> eq >> v) bundle.offline_seconds = v;
  }
  return bundle;
}

FieldErrors field_errors(const VectorField& u_ref, const ScalarField& p_ref,
                         const VectorField& u_rom, const ScalarField& p_rom,
                         const StructuredMesh& mesh) {
  const double tiny = 1e-300;
  FieldErrors fe;
  const VectorField du = axpy(-1.0, u_rom, u_ref);
  const ScalarField dp = axpy(-1.0, p_rom, p_ref);
  fe.abs_u = weighted_norm(du, mesh);
  fe.abs_p = weighted_norm(dp, mesh);
  fe.eps_u = fe.abs_u / std::max(weighted_norm(u_ref, mesh), tiny);
  fe.eps_p = fe.abs_p / std::max(weighted_norm(p_ref, mesh), tiny);
  return fe;
}

void ErrorReport::finalize_averages() {
  auto avg = [](const std::vector<double>& v) {
    double s = 0.0;
    int n = 0;
    for (double x : v)
      if (!std::isnan(x)) {
        s += x;
        ++n;
      }
    return n > 0 ? s / n : 0.0;
  };
  avg_eps_u = avg(eps_u);
  avg_eps_p = avg(eps_p);
  avg_abs_u = avg(abs_u);
  avg_abs_p = avg(abs_p);
}

OnlineResult run_online(const RomBundle& bundle, const std::vector<double>& times,
                        Stabilization stab, std::ostream& log) {
  if (times.empty()) throw ConfigError("online: empty time list");
  for (size_t k = 1; k < times.size(); ++k)
    if (times[k] <= times[k - 1])
      throw ConfigError("online: times must be strictly increasing");
  if (times.front() < bundle.initial_time - 1e-12)
    throw ConfigError("online: requested time precedes the reduced initial time " +
                      std::to_string(bundle.initial_time));

  const PipelineConfig& cfg = bundle.config;
  const StructuredMesh& mesh = bundle.mesh;

  // Integration grid: the stored initial time plus the requested times.
  std::vector<double> grid = times;
  const bool prepend = !same_time(times.front(), bundle.initial_time);
  if (prepend) grid.insert(grid.begin(), bundle.initial_time);

  const int n_outlets = bundle.lifting.n_outlets();
  std::vector<double> g_u(grid.size());
  DenseMatrix g_p(static_cast<int>(grid.size()), n_outlets);
  std::vector<int> from_nn(grid.size(), 0), extrapolated(grid.size(), 0);
  for (size_t k = 0; k < grid.size(); ++k) {
    const double t = grid[k];
    g_u[k] = inlet_profile(t, cfg.fom.u0, cfg.fom.wk[0]);
    const int idx = bundle.lifting.sample_index(t);
    if (idx >= 0) {
      for (int j = 0; j < n_outlets; ++j) g_p(static_cast<int>(k), j) =
          bundle.lifting.g_p[idx][j];
    } else {
      bool extra = false;
      const std::vector<double> pred = bundle.outflow.predict(t, &extra);
      for (int j = 0; j < n_outlets; ++j) g_p(static_cast<int>(k), j) = pred[j];
      from_nn[k] = 1;
      if (extra) extrapolated[k] = 1;
    }
    if (t < cfg.time.t0 || t > cfg.time.T + 1e-12) {
      extrapolated[k] = 1;
      log << "online: warning, t = " << t << " lies outside ("
          << cfg.time.t0 << ", " << cfg.time.T << "]\n";
    }
  }

  GTraces traces = GTraces::build(grid, g_u, g_p);
  IntegrateOptions opt;
  opt.nu = cfg.fluid.nu;
  opt.substeps = cfg.rom_substeps;

  const double start = wall_seconds();
  ReducedTrajectory traj;
  if (stab == Stabilization::Supremizer) {
    traj = integrate_supremizer(bundle.ops, bundle.initial_a, bundle.initial_b,
                                traces, opt);
  } else {
    std::vector<double> a0(bundle.initial_a.begin(),
                           bundle.initial_a.begin() + bundle.ops.n_u);
    traj = integrate_ppe(bundle.ops, a0, traces, opt);
  }
  const double online_seconds = wall_seconds() - start;

  // Velocity reconstruction set: plain modes (+ supremizers for that route).
  std::vector<VectorField> u_set = bundle.bases.u_modes;
  if (stab == Stabilization::Supremizer)
    for (const auto& s : bundle.bases.supremizers) u_set.push_back(s);

  OnlineResult result;
  result.report.online_seconds = online_seconds;
  result.report.offline_seconds = bundle.offline_seconds;

  const int skip = prepend ? 1 : 0;
  for (size_t k = skip; k < grid.size(); ++k) {
    const int row = static_cast<int>(k);
    std::vector<double> a(traj.a.cols), b(traj.b.cols);
    for (int i = 0; i < traj.a.cols; ++i) a[i] = traj.a(row, i);
    for (int i = 0; i < traj.b.cols; ++i) b[i] = traj.b(row, i);
    std::vector<double> gp_row(n_outlets);
    for (int j = 0; j < n_outlets; ++j) gp_row[j] = g_p(row, j);

    result.u_fields.push_back(
        reconstruct_velocity(a, u_set, bundle.lifting, g_u[k]));
    result.p_fields.push_back(
        reconstruct_pressure(b, bundle.bases.p_modes, bundle.lifting, gp_row));
    result.report.times.push_back(grid[k]);
    result.report.gp_from_nn.push_back(from_nn[k]);
    result.report.extrapolated.push_back(extrapolated[k]);
  }
  result.trajectory = std::move(traj);

  // Error accounting against the FOM database, when available.
  const std::filesystem::path db_dir = cfg.database_dir;
  if (std::filesystem::exists(db_dir / "manifest.txt")) {
    const SnapshotDatabase db = SnapshotDatabase::load(db_dir);
    std::ifstream timing(db_dir / "timings.txt");
    if (timing) {
      std::string key, eq;
      double v;
      if (timing >> key >> eq >> v) result.report.fom_seconds = v;
    }
    ErrorReport& rep = result.report;
    const double tiny = 1e-300;
    const double nan = std::numeric_limits<double>::quiet_NaN();
    double sum_err_u = 0, sum_ref_u = 0, sum_err_p = 0, sum_ref_p = 0;
    for (size_t k = 0; k < rep.times.size(); ++k) {
      int match = -1;
      for (int s = 0; s < db.size(); ++s)
        if (same_time(db[s].t, rep.times[k])) {
          match = s;
          break;
        }
      if (match < 0) {
        rep.eps_u.push_back(nan);
        rep.eps_p.push_back(nan);
        rep.abs_u.push_back(nan);
        rep.abs_p.push_back(nan);
        rep.proj_u.push_back(nan);
        rep.proj_p.push_back(nan);
        continue;
      }
      const SnapshotRecord& ref = db[match];
      const FieldErrors fe = field_errors(ref.u, ref.p, result.u_fields[k],
                                          result.p_fields[k], mesh);
      const double nu_ref = weighted_norm(ref.u, mesh);
      const double np_ref = weighted_norm(ref.p, mesh);
      rep.abs_u.push_back(fe.abs_u);
      rep.abs_p.push_back(fe.abs_p);
      rep.eps_u.push_back(fe.eps_u);
      rep.eps_p.push_back(fe.eps_p);
      sum_err_u += fe.abs_u * fe.abs_u;
      sum_err_p += fe.abs_p * fe.abs_p;
      sum_ref_u += nu_ref * nu_ref;
      sum_ref_p += np_ref * np_ref;

      // Projection error: homogenize with the stored record traces and
      // project onto the same reduced space the route uses.
      VectorField u_h = axpy(-ref.g_u, bundle.lifting.chi_u, ref.u);
      ScalarField p_h = ref.p;
      for (int j = 0; j < n_outlets; ++j)
        p_h = axpy(-ref.g_p[j], bundle.lifting.chi_p[j], p_h);
      VectorField u_proj(mesh.cell_count());
      for (const VectorField& v : u_set)
        u_proj = axpy(inner_product(v, u_h, mesh), v, u_proj);
      ScalarField p_proj(mesh.cell_count());
      for (const ScalarField& m : bundle.bases.p_modes)
        p_proj = axpy(inner_product(m, p_h, mesh), m, p_proj);
      const VectorField ru = axpy(-1.0, u_proj, u_h);
      const ScalarField rp2 = axpy(-1.0, p_proj, p_h);
      rep.proj_u.push_back(weighted_norm(ru, mesh) / std::max(nu_ref, tiny));
      rep.proj_p.push_back(weighted_norm(rp2, mesh) / std::max(np_ref, tiny));
    }
    rep.finalize_averages();
    rep.agg_eps_u = std::sqrt(sum_err_u / std::max(sum_ref_u, tiny));
    rep.agg_eps_p = std::sqrt(sum_err_p / std::max(sum_ref_p, tiny));
    // Orthogonal projection is optimal in the weighted norm, so the
    // reconstruction can only do worse; verify up to round-off.
    rep.projection_optimality_ok = true;
    for (size_t k = 0; k < rep.proj_u.size(); ++k) {
      if (std::isnan(rep.proj_u[k])) continue;
      const double tol_u = 1e-10 * std::max(1.0, rep.proj_u[k]);
      const double tol_p = 1e-10 * std::max(1.0, rep.proj_p[k]);
      if (rep.eps_u[k] + tol_u < rep.proj_u[k] ||
          rep.eps_p[k] + tol_p < rep.proj_p[k])
        rep.projection_optimality_ok = false;
    }
  }

  if (result.report.fom_seconds > 0.0 && online_seconds > 0.0)
    result.report.speedup = result.report.fom_seconds / online_seconds;
  log << "online: " << result.report.times.size() << " times in "
      << online_seconds << " s (" << (stab == Stabilization::Supremizer
                                          ? "supremizer"
                                          : "ppe")
      << ")\n";
  return result;
}

void write_report(const std::filesystem::path& dir, const ErrorReport& report,
                  const RomBundle& bundle, std::ostream& log) {
  std::filesystem::create_directories(dir);
  {
    std::ofstream out(dir / "errors.csv");
    if (!out) throw IoError("cannot write errors.csv");
    out << "t,eps_u,eps_p,abs_u,abs_p,proj_u,proj_p,gp_from_nn,extrapolated\n";
    for (size_t k = 0; k < report.times.size(); ++k) {
      auto field = [&](const std::vector<double>& v) {
        return k < v.size() ? fmt17(v[k]) : std::string("nan");
      };
      out << fmt17(report.times[k]) << ',' << field(report.eps_u) << ','
          << field(report.eps_p) << ',' << field(report.abs_u) << ','
          << field(report.abs_p) << ',' << field(report.proj_u) << ','
          << field(report.proj_p) << ','
          << (k < report.gp_from_nn.size() ? report.gp_from_nn[k] : 0) << ','
          << (k < report.extrapolated.size() ? report.extrapolated[k] : 0)
          << '\n';
    }
  }
  {
    std::ofstream out(dir / "spectrum.csv");
    out << "variable,index,lambda,cumulative_fraction\n";
    auto dump = [&](const char* var, const std::vector<double>& ev) {
      double total = 0.0;
      for (double l : ev) total += l;
      double cum = 0.0;
      for (size_t i = 0; i < ev.size(); ++i) {
        cum += ev[i];
        out << var << ',' << i + 1 << ',' << fmt17(ev[i]) << ','
            << fmt17(total > 0.0 ? cum / total : 0.0) << '\n';
      }
    };
    dump("u", bundle.u_eigenvalues);
    dump("p", bundle.p_eigenvalues);
  }
  {
    std::ofstream out(dir / "timings.txt");
    out << "offline_seconds = " << fmt17(report.offline_seconds) << '\n';
    out << "online_seconds = " << fmt17(report.online_seconds) << '\n';
    out << "fom_seconds = " << fmt17(report.fom_seconds) << '\n';
    out << "speedup = " << fmt17(report.speedup) << '\n';
  }

  log << "report: " << report.times.size() << " evaluation times\n";
  if (!report.eps_u.empty()) {
    log << "report: time-averaged eps_u = " << report.avg_eps_u
        << ", eps_p = " << report.avg_eps_p << "\n";
    log << "report: space-time aggregate eps_u = " << report.agg_eps_u
        << ", eps_p = " << report.agg_eps_p << "\n";
    log << "report: projection optimality "
        << (report.projection_optimality_ok ? "holds" : "VIOLATED") << "\n";
  }
  log << "report: offline " << report.offline_seconds << " s, online "
      << report.online_seconds << " s, fom " << report.fom_seconds
      << " s, speedup (fom/online) = " << report.speedup << "\n";
}

ErrorReport read_errors_csv(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw IoError("cannot read " + file.string());
  ErrorReport rep;
  std::string line;
  std::getline(in, line);  // header
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream ls(line);
    double t, eu, ep, au, ap, pu, pp;
    int nn_flag, ex_flag;
    if (!(ls >> t >> eu >> ep >> au >> ap >> pu >> pp >> nn_flag >> ex_flag))
      throw IoError("bad errors.csv row: " + line);
    rep.times.push_back(t);
    rep.eps_u.push_back(eu);
    rep.eps_p.push_back(ep);
    rep.abs_u.push_back(au);
    rep.abs_p.push_back(ap);
    rep.proj_u.push_back(pu);
    rep.proj_p.push_back(pp);
    rep.gp_from_nn.push_back(nn_flag);
    rep.extrapolated.push_back(ex_flag);
  }
  rep.finalize_averages();
  return rep;
}

std::vector<double> parse_time_list(const std::string& spec) {
  std::vector<double> times;
  if (std::filesystem::exists(spec) &&
      std::filesystem::is_regular_file(spec)) {
    std::ifstream in(spec);
    double t;
    while (in >> t) times.push_back(t);
  } else {
    std::string item;
    std::istringstream ls(spec);
    while (std::getline(ls, item, ',')) {
      if (item.empty()) continue;
      try {
        times.push_back(std::stod(item));
      } catch (const std::exception&) {
        throw ConfigError("bad time value: " + item);
      }
    }
  }
  if (times.empty()) throw ConfigError("empty time list");
  return times;
}

}  // namespace hemorom
