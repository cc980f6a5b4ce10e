#include "genpanis/obs.hpp"

#include <sstream>

namespace genpanis {

ObsSpec ObsSpec::grid(int k) {
  ObsSpec s;
  s.kind = Kind::Grid;
  s.k = k;
  if (k < 1) throw error("ObsSpec: grid size must be >= 1");
  return s;
}

ObsSpec ObsSpec::random(int n, std::uint64_t seed) {
  ObsSpec s;
  s.kind = Kind::Random;
  s.n = n;
  s.seed = seed;
  if (n < 1) throw error("ObsSpec: random count must be >= 1");
  return s;
}

ObsSpec ObsSpec::parse(const std::string& text) {
  std::istringstream in(text);
  std::string head;
  in >> head;
  if (head == "grid") {
    std::string dims;
    in >> dims;
    const auto x = dims.find('x');
    if (x == std::string::npos) throw error("ObsSpec: expected 'grid KxK', got '" + text + "'");
    const int k1 = std::stoi(dims.substr(0, x));
    const int k2 = std::stoi(dims.substr(x + 1));
    if (k1 != k2) throw error("ObsSpec: only square grids are supported");
    return grid(k1);
  }
  if (head == "random") {
    int n = 0;
    in >> n;
    std::uint64_t seed = 0;
    std::string rest;
    if (in >> rest) {
      if (rest.rfind("seed=", 0) != 0) throw error("ObsSpec: expected 'seed=S' in '" + text + "'");
      seed = std::stoull(rest.substr(5));
    }
    return random(n, seed);
  }
  if (head == "points") {
    ObsSpec s;
    s.kind = Kind::Explicit;
    std::string rest;
    in >> rest;
    std::vector<std::pair<double, double>> pts;
    std::size_t pos = 0;
    while (pos < rest.size()) {
      auto semi = rest.find(';', pos);
      if (semi == std::string::npos) semi = rest.size();
      const std::string pair = rest.substr(pos, semi - pos);
      const auto comma = pair.find(',');
      if (comma == std::string::npos) throw error("ObsSpec: malformed point '" + pair + "'");
      pts.emplace_back(std::stod(pair.substr(0, comma)), std::stod(pair.substr(comma + 1)));
      pos = semi + 1;
    }
    if (pts.empty()) throw error("ObsSpec: empty point list");
    s.explicit_pts.resize(static_cast<Eigen::Index>(pts.size()), 2);
    for (std::size_t i = 0; i < pts.size(); ++i) {
      s.explicit_pts(static_cast<Eigen::Index>(i), 0) = pts[i].first;
      s.explicit_pts(static_cast<Eigen::Index>(i), 1) = pts[i].second;
    }
    return s;
  }
  throw error("ObsSpec: cannot parse '" + text + "' (expected grid|random|points)");
}

Eigen::MatrixX2d ObsSpec::locations() const {
  switch (kind) {
    case Kind::Grid: {
      Eigen::MatrixX2d pts(k * k, 2);
      for (int j = 0; j < k; ++j)
        for (int i = 0; i < k; ++i) {
          pts(j * k + i, 0) = (i + 0.5) / k;
          pts(j * k + i, 1) = (j + 0.5) / k;
        }
      return pts;
    }
    case Kind::Random: {
      Rng rng(seed);
      Eigen::MatrixX2d pts(n, 2);
      for (int i = 0; i < n; ++i) {
        pts(i, 0) = rng.uniform();
        pts(i, 1) = rng.uniform();
      }
      return pts;
    }
    case Kind::Explicit:
      return explicit_pts;
  }
  throw error("ObsSpec: invalid kind");
}

int ObsSpec::count() const {
  switch (kind) {
    case Kind::Grid: return k * k;
    case Kind::Random: return n;
    case Kind::Explicit: return static_cast<int>(explicit_pts.rows());
  }
  return 0;
}

std::string ObsSpec::str() const {
  std::ostringstream out;
  switch (kind) {
    case Kind::Grid: out << "grid " << k << "x" << k; break;
    case Kind::Random: out << "random " << n << " seed=" << seed; break;
    case Kind::Explicit: {
      out << "points ";
      for (int i = 0; i < explicit_pts.rows(); ++i) {
        if (i) out << ";";
        out << format_double(explicit_pts(i, 0), 8) << "," << format_double(explicit_pts(i, 1), 8);
      }
      break;
    }
  }
  return out.str();
}

}  // namespace genpanis
