#include "genpanis/dataset.hpp"

#include <map>
#include <sstream>

#include "genpanis/fem.hpp"
#include "genpanis/grf.hpp"
#include "genpanis/tnsr.hpp"

namespace genpanis {

void save_dataset(const std::filesystem::path& dir, const Dataset& ds) {
  ensure_dir(dir);
  const std::size_t n = ds.size();
  const std::size_t d_x = static_cast<std::size_t>(ds.meta.n_pix) * ds.meta.n_pix;

  std::vector<std::uint8_t> flat(n * d_x);
  for (std::size_t i = 0; i < n; ++i) {
    if (ds.microstructures[i].values.size() != d_x)
      throw error("save_dataset: microstructure size mismatch");
    std::copy(ds.microstructures[i].values.begin(), ds.microstructures[i].values.end(),
              flat.begin() + static_cast<std::ptrdiff_t>(i * d_x));
  }
  tnsr::write_u8(dir / "x.tnsr", {n, d_x}, flat.data());

  if (ds.has_solutions()) {
    if (static_cast<std::size_t>(ds.solutions.rows()) != n)
      throw error("save_dataset: solution count mismatch");
    // Row-major on disk.
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> rm = ds.solutions;
    tnsr::write_f64(dir / "u.tnsr", {n, static_cast<std::size_t>(ds.solutions.cols())}, rm.data());
  }

  std::ostringstream meta;
  meta << "grid = " << ds.meta.n_pix << "\n";
  meta << "l = " << format_double(ds.meta.corr_length, 12) << "\n";
  meta << "seed = " << ds.meta.seed << "\n";
  meta << "phases = " << format_double(ds.meta.c0, 12) << "," << format_double(ds.meta.c1, 12)
       << "\n";
  meta << "CR = " << format_double(ds.meta.contrast, 12) << "\n";
  meta << "VF = " << format_double(ds.meta.volume_fraction, 12) << "\n";
  meta << "problem = " << ds.meta.problem << "\n";
  write_text(dir / "meta.txt", meta.str());
}

Dataset load_dataset(const std::filesystem::path& dir) {
  Dataset ds;

  std::map<std::string, std::string> meta;
  std::istringstream in(read_text(dir / "meta.txt"));
  std::string line;
  while (std::getline(in, line)) {
    const auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    auto trim = [](std::string s) {
      const auto b = s.find_first_not_of(" \t\r");
      const auto e = s.find_last_not_of(" \t\r");
      return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    meta[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
  }
  auto need = [&](const std::string& k) {
    auto it = meta.find(k);
    if (it == meta.end()) throw error("load_dataset: meta.txt missing key '" + k + "'");
    return it->second;
  };
  ds.meta.n_pix = std::stoi(need("grid"));
  ds.meta.corr_length = std::stod(need("l"));
  ds.meta.seed = std::stoull(need("seed"));
  {
    const std::string ph = need("phases");
    const auto comma = ph.find(',');
    if (comma == std::string::npos) throw error("load_dataset: malformed phases");
    ds.meta.c0 = std::stod(ph.substr(0, comma));
    ds.meta.c1 = std::stod(ph.substr(comma + 1));
  }
  ds.meta.contrast = std::stod(need("CR"));
  ds.meta.volume_fraction = std::stod(need("VF"));
  if (meta.count("problem")) ds.meta.problem = meta["problem"];

  const tnsr::Tensor xt = tnsr::read(dir / "x.tnsr");
  if (xt.dtype != "u8" || xt.shape.size() != 2)
    throw error("load_dataset: x.tnsr must be a 2-d u8 tensor");
  const std::size_t n = xt.shape[0], d_x = xt.shape[1];
  const GridSpec grid(ds.meta.n_pix);
  if (d_x != static_cast<std::size_t>(grid.cells()))
    throw error("load_dataset: x.tnsr shape does not match meta grid");
  ds.microstructures.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<std::uint8_t> v(xt.u8.begin() + static_cast<std::ptrdiff_t>(i * d_x),
                                xt.u8.begin() + static_cast<std::ptrdiff_t>((i + 1) * d_x));
    ds.microstructures.emplace_back(grid, std::move(v));
  }

  if (std::filesystem::exists(dir / "u.tnsr")) {
    const tnsr::Tensor ut = tnsr::read(dir / "u.tnsr");
    if (ut.dtype != "f64" || ut.shape.size() != 2 || ut.shape[0] != n)
      throw error("load_dataset: u.tnsr shape mismatch");
    ds.solutions.resize(n, ut.shape[1]);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < ut.shape[1]; ++j) ds.solutions(i, j) = ut.f64[i * ut.shape[1] + j];
  }
  return ds;
}

Dataset generate_dataset(int n, const GridSpec& grid, double corr_length, double volume_fraction,
                         const PhasePair& phases, const PdeProblem& problem, bool with_solutions,
                         std::uint64_t seed, int workers) {
  Dataset ds;
  ds.meta.n_pix = grid.n_pix;
  ds.meta.corr_length = corr_length;
  ds.meta.seed = seed;
  ds.meta.c0 = phases.c0;
  ds.meta.c1 = phases.c1;
  ds.meta.contrast = phases.c0 / phases.c1;
  ds.meta.volume_fraction = volume_fraction;
  ds.meta.problem = to_string(problem.kind);

  const double tau = threshold_for_volume_fraction(volume_fraction);
  const GrfSampler sampler(grid, corr_length);
  ds.microstructures.resize(n, Microstructure(grid, std::vector<std::uint8_t>(grid.cells(), 0)));

  std::optional<FineSolver> solver;
  if (with_solutions) {
    solver.emplace(grid.n_pix, problem);
    ds.solutions.resize(n, solver->mesh().n_nodes());
  }

  parallel_for(static_cast<std::size_t>(n), workers, [&](std::size_t i) {
    const Eigen::VectorXd field = sampler.sample(Rng::derive(seed, i));
    ds.microstructures[i] = threshold_field(field, tau, grid);
    if (with_solutions) {
      const Eigen::VectorXd c = to_coefficients(ds.microstructures[i], phases);
      ds.solutions.row(static_cast<Eigen::Index>(i)) = solver->solve_pixels(c, grid).values;
    }
  });
  return ds;
}

std::uint64_t dataset_hash(const std::filesystem::path& dir) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const char* name : {"meta.txt", "x.tnsr", "u.tnsr"}) {
    const auto p = dir / name;
    if (std::filesystem::exists(p)) {
      const std::uint64_t fh = hash_file(p);
      h = fnv1a64(&fh, sizeof(fh), h);
    }
  }
  return h;
}

}  // namespace genpanis
