#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "genpanis/grid.hpp"
#include "genpanis/pde.hpp"

namespace genpanis {

struct DatasetMeta {
  int n_pix = 32;
  double corr_length = 0.2;
  std::uint64_t seed = 0;
  double c0 = 1.0, c1 = 0.1;
  double contrast = 10.0;
  double volume_fraction = 0.5;
  std::string problem = "darcy";  // PDE used for solutions, if present
};

/// Microstructures plus (optionally) fine-scale nodal solutions, one row per
/// sample. Solutions live on the (n_pix+1)^2-node mesh matching the pixel grid.
struct Dataset {
  DatasetMeta meta;
  std::vector<Microstructure> microstructures;
  Eigen::MatrixXd solutions;  // N x (n_pix+1)^2, empty if absent

  bool has_solutions() const { return solutions.size() > 0; }
  std::size_t size() const { return microstructures.size(); }
};

void save_dataset(const std::filesystem::path& dir, const Dataset& ds);
Dataset load_dataset(const std::filesystem::path& dir);

/// Sample n thresholded-GRF microstructures (entry i uses the derived seed
/// seed^i) and optionally solve the PDE for each on the matched fine mesh.
Dataset generate_dataset(int n, const GridSpec& grid, double corr_length, double volume_fraction,
                         const PhasePair& phases, const PdeProblem& problem, bool with_solutions,
                         std::uint64_t seed, int workers);

/// Identity stamp over the binary contents of a dataset directory.
std::uint64_t dataset_hash(const std::filesystem::path& dir);

}  // namespace genpanis
