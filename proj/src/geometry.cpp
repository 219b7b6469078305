#include "dipsmc/geometry.hpp"

#include <Eigen/Geometry>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>
#include <unordered_map>

#include "dipsmc/errors.hpp"
#include "dipsmc/parallel.hpp"
#include "dipsmc/textio.hpp"

namespace dipsmc {

namespace {

constexpr double kMu0Over4Pi = 1e-7;  // T*m/A

// Relative slack when testing squared distances against squared radii, so
// that lattice offsets landing exactly on the radius are kept regardless of
// where in the lattice they occur.
constexpr double kRadiusSlack = 1e-9;

}  // namespace

Vec3 sarvas_field(const Vec3& r0, const Vec3& q, const Vec3& r) {
  const Vec3 a_vec = r - r0;
  const double a = a_vec.norm();
  if (a < 1e-12) throw DataError("sarvas_field: sensor coincides with dipole");
  const double rn = r.norm();
  const Vec3 qxr0 = q.cross(r0);

  const double f = a * (rn * a + rn * rn - r0.dot(r));
  const double adotr = a_vec.dot(r);
  const Vec3 grad_f = (a * a / rn + adotr / a + 2.0 * a + 2.0 * rn) * r -
                      (a + 2.0 * rn + adotr / a) * r0;
  return kMu0Over4Pi / (f * f) * (f * qxr0 - qxr0.dot(r) * grad_f);
}

SourceGrid build_spherical_grid(double conductor_radius, double shell_radius, double spacing,
                                double neighbor_radius, double proposal_sd) {
  if (spacing <= 0.0) throw ConfigError("grid spacing must be positive");
  if (!(shell_radius < conductor_radius))
    throw ConfigError("source shell must lie strictly inside the conductor");
  if (spacing > shell_radius)
    throw ConfigError("empty grid: spacing exceeds the source shell radius");
  if (neighbor_radius <= 0.0 || proposal_sd <= 0.0)
    throw ConfigError("neighbor radius and proposal sd must be positive");

  SourceGrid grid;
  grid.spacing = spacing;
  grid.neighbor_radius = neighbor_radius;
  grid.proposal_sd = proposal_sd;

  const int m = static_cast<int>(std::floor(shell_radius / spacing * (1.0 + kRadiusSlack)));
  const double shell2 = shell_radius * shell_radius * (1.0 + kRadiusSlack);
  std::vector<std::array<int, 3>> ijk;
  for (int i = -m; i <= m; ++i) {
    for (int j = -m; j <= m; ++j) {
      for (int k = -m; k <= m; ++k) {
        const Vec3 p(i * spacing, j * spacing, k * spacing);
        if (p.squaredNorm() <= shell2) {
          grid.points.push_back(p);  // i,j,k ascending => lexicographic (x,y,z)
          ijk.push_back({i, j, k});
        }
      }
    }
  }
  if (grid.points.empty()) throw ConfigError("empty grid: no lattice point fits");

  // Index lattice coordinates so neighbour search is O(offsets) per cell.
  auto key = [m](int i, int j, int k) {
    const long long s = 2 * static_cast<long long>(m) + 1;
    return ((static_cast<long long>(i) + m) * s + (j + m)) * s + (k + m);
  };
  std::unordered_map<long long, std::int32_t> index;
  index.reserve(grid.points.size());
  for (std::size_t c = 0; c < grid.points.size(); ++c)
    index.emplace(key(ijk[c][0], ijk[c][1], ijk[c][2]), static_cast<std::int32_t>(c));

  const int reach = static_cast<int>(std::floor(neighbor_radius / spacing * (1.0 + kRadiusSlack)));
  const double radius2 = neighbor_radius * neighbor_radius * (1.0 + kRadiusSlack);
  const double inv_two_sd2 = 1.0 / (2.0 * proposal_sd * proposal_sd);

  grid.neighbors.resize(grid.points.size());
  for (std::size_t c = 0; c < grid.points.size(); ++c) {
    auto& list = grid.neighbors[c];
    for (int di = -reach; di <= reach; ++di) {
      for (int dj = -reach; dj <= reach; ++dj) {
        for (int dk = -reach; dk <= reach; ++dk) {
          if (di == 0 && dj == 0 && dk == 0) continue;
          const auto it = index.find(key(ijk[c][0] + di, ijk[c][1] + dj, ijk[c][2] + dk));
          if (it == index.end()) continue;
          const double d2 = (grid.points[it->second] - grid.points[c]).squaredNorm();
          if (d2 <= radius2) list.push_back({it->second, std::exp(-d2 * inv_two_sd2)});
        }
      }
    }
    // lattice scan order is not index order; keep lists canonical
    std::sort(list.begin(), list.end(),
              [](const GridNeighbor& a, const GridNeighbor& b) { return a.cell < b.cell; });
  }
  return grid;
}

SensorArray build_sensor_array(int n_sensors, double helmet_radius) {
  if (n_sensors < 1) throw ConfigError("need at least one sensor");
  if (helmet_radius <= 0.0) throw ConfigError("helmet radius must be positive");

  SensorArray arr;
  arr.positions.reserve(n_sensors);
  arr.orientations.reserve(n_sensors);
  const double golden_angle = M_PI * (3.0 - std::sqrt(5.0));
  for (int i = 0; i < n_sensors; ++i) {
    const double z = 1.0 - static_cast<double>(i) / n_sensors;  // (0, 1], pole first
    const double rho = std::sqrt(std::max(0.0, 1.0 - z * z));
    const double phi = golden_angle * i;
    const Vec3 u(rho * std::cos(phi), rho * std::sin(phi), z);
    arr.positions.push_back(helmet_radius * u);
    arr.orientations.push_back(u);
  }
  return arr;
}

LeadField compute_leadfield(const SourceGrid& grid, const SensorArray& sensors) {
  const int n_c = grid.n_cells();
  const int n_s = sensors.n_sensors();
  std::vector<Eigen::Matrix3Xd> g(static_cast<std::size_t>(n_c));
  par::parallel_for(static_cast<std::size_t>(n_c), [&](std::size_t c) {
    Eigen::Matrix3Xd gc(3, n_s);
    for (int k = 0; k < 3; ++k) {
      const Vec3 e = Vec3::Unit(k);
      for (int s = 0; s < n_s; ++s) {
        gc(k, s) = sensors.orientations[s].dot(
            sarvas_field(grid.points[c], e, sensors.positions[s]));
      }
    }
    g[c] = std::move(gc);
  });
  return LeadField(std::move(g), n_s);
}

namespace {

constexpr char kMagic[4] = {'L', 'F', 'M', 'G'};
constexpr std::uint32_t kVersion = 1;

void put_u32(std::ostream& out, std::uint32_t v) {
  unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                        static_cast<unsigned char>(v >> 16), static_cast<unsigned char>(v >> 24)};
  out.write(reinterpret_cast<const char*>(b), 4);
}

std::uint32_t get_u32(std::istream& in, const char* what, std::size_t offset) {
  unsigned char b[4];
  in.read(reinterpret_cast<char*>(b), 4);
  if (in.gcount() != 4)
    throw DataError(std::string("lead-field file truncated reading ") + what + " at byte offset " +
                    std::to_string(offset));
  return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
         (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

}  // namespace

void save_leadfield(const LeadField& lf, const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot open lead-field file for writing: " + path);
  out.write(kMagic, 4);
  put_u32(out, kVersion);
  put_u32(out, static_cast<std::uint32_t>(lf.n_cells()));
  put_u32(out, static_cast<std::uint32_t>(lf.n_sensors()));
  for (int c = 0; c < lf.n_cells(); ++c) {
    // row-major: the three rows of g(c) back to back
    for (int k = 0; k < 3; ++k) {
      for (int s = 0; s < lf.n_sensors(); ++s) {
        const double v = lf.g(c)(k, s);
        out.write(reinterpret_cast<const char*>(&v), sizeof(double));
      }
    }
  }
  out.flush();
  if (!out) throw DataError("write failure on lead-field file: " + path);
}

LeadField load_leadfield(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open lead-field file: " + path);
  char magic[4];
  in.read(magic, 4);
  if (in.gcount() != 4 || std::memcmp(magic, kMagic, 4) != 0)
    throw DataError("bad lead-field magic (expected LFMG) in " + path);
  const std::uint32_t version = get_u32(in, "version", 4);
  if (version != kVersion)
    throw DataError("unsupported lead-field version " + std::to_string(version) + " in " + path);
  const std::uint32_t n_c = get_u32(in, "cell count", 8);
  const std::uint32_t n_s = get_u32(in, "sensor count", 12);

  std::vector<Eigen::Matrix3Xd> g(n_c);
  std::size_t offset = 16;
  std::vector<double> row(n_s);
  for (std::uint32_t c = 0; c < n_c; ++c) {
    Eigen::Matrix3Xd gc(3, static_cast<int>(n_s));
    for (int k = 0; k < 3; ++k) {
      in.read(reinterpret_cast<char*>(row.data()), static_cast<std::streamsize>(n_s * 8));
      if (in.gcount() != static_cast<std::streamsize>(n_s * 8))
        throw DataError("lead-field file truncated at byte offset " +
                        std::to_string(offset + static_cast<std::size_t>(std::max<std::streamsize>(in.gcount(), 0))) +
                        " in " + path);
      for (std::uint32_t s = 0; s < n_s; ++s) gc(k, static_cast<int>(s)) = row[s];
      offset += n_s * 8;
    }
    g[c] = std::move(gc);
  }
  char extra;
  in.read(&extra, 1);
  if (in.gcount() != 0)
    throw DataError("lead-field file has trailing bytes beyond declared dimensions: " + path);
  return LeadField(std::move(g), static_cast<int>(n_s));
}

void save_grid_csv(const SourceGrid& grid, const std::string& path) {
  std::ostringstream out;
  out << "x,y,z\n";
  for (const auto& p : grid.points)
    out << textio::fmt_g17(p.x()) << ',' << textio::fmt_g17(p.y()) << ','
        << textio::fmt_g17(p.z()) << '\n';
  textio::write_file(path, out.str());
}

void save_sensors_csv(const SensorArray& sensors, const std::string& path) {
  std::ostringstream out;
  out << "x,y,z,ox,oy,oz\n";
  for (int s = 0; s < sensors.n_sensors(); ++s) {
    const auto& p = sensors.positions[s];
    const auto& o = sensors.orientations[s];
    out << textio::fmt_g17(p.x()) << ',' << textio::fmt_g17(p.y()) << ','
        << textio::fmt_g17(p.z()) << ',' << textio::fmt_g17(o.x()) << ','
        << textio::fmt_g17(o.y()) << ',' << textio::fmt_g17(o.z()) << '\n';
  }
  textio::write_file(path, out.str());
}

}  // namespace dipsmc
