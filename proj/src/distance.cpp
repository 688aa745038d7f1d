#include "capbridge/distance.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <type_traits>

#include "capbridge/errors.hpp"

namespace capbridge {

struct ObstacleField::Grid {
  LevelSetGrid samples;
  std::vector<Vec3> gradient;
  std::vector<Mat3> hessian;
  std::size_t eikonal_violations = 0;

  // Trilinear weights for x; throws outside the sampled box.
  struct Cell {
    std::array<std::size_t, 8> idx;
    std::array<double, 8> w;
  };

  Cell locate(const Vec3& x) const {
    const auto& d = samples.dims;
    const Vec3 rel = (x - samples.origin) / samples.spacing;
    std::array<int, 3> base{};
    std::array<double, 3> frac{};
    for (int c = 0; c < 3; ++c) {
      const double r = rel[c];
      if (!(r >= 0.0 && r <= d[c] - 1)) {
        std::ostringstream msg;
        msg << "level-set query (" << x.transpose() << ") outside the grid";
        throw OutOfDomainError(msg.str());
      }
      base[c] = std::min(static_cast<int>(std::floor(r)), d[c] - 2);
      frac[c] = r - base[c];
    }
    Cell cell;
    int n = 0;
    for (int dk = 0; dk < 2; ++dk) {
      for (int dj = 0; dj < 2; ++dj) {
        for (int di = 0; di < 2; ++di) {
          cell.idx[n] = samples.index(base[0] + di, base[1] + dj, base[2] + dk);
          cell.w[n] = (di ? frac[0] : 1 - frac[0]) * (dj ? frac[1] : 1 - frac[1]) *
                      (dk ? frac[2] : 1 - frac[2]);
          ++n;
        }
      }
    }
    return cell;
  }
};

namespace {

// Derivative along `axis` at node (i,j,k): central inside, one-sided on the
// boundary layer.
template <class Get>
auto node_derivative(const LevelSetGrid& g, int i, int j, int k, int axis, Get&& get) {
  std::array<int, 3> p{i, j, k};
  std::array<int, 3> lo = p, hi = p;
  double span = 2.0;
  if (p[axis] == 0) {
    hi[axis] += 1;
    span = 1.0;
  } else if (p[axis] == g.dims[axis] - 1) {
    lo[axis] -= 1;
    span = 1.0;
  } else {
    lo[axis] -= 1;
    hi[axis] += 1;
  }
  using T = std::decay_t<decltype(get(std::size_t{0}))>;
  // evaluated here: an Eigen expression would outlive the temporaries
  return T((get(g.index(hi[0], hi[1], hi[2])) - get(g.index(lo[0], lo[1], lo[2]))) /
           (span * g.spacing));
}

}  // namespace

ObstacleField sphere_field(const Vec3& center, double radius) {
  if (!(radius > 0.0)) throw ParameterError("sphere radius must be > 0");
  return ObstacleField(ObstacleField::Sphere{center, radius});
}

ObstacleField plane_field(double offset, const Vec3& normal) {
  if (std::abs(normal.norm() - 1.0) > 1e-12) throw ParameterError("plane normal must be unit");
  return ObstacleField(ObstacleField::Plane{normal, offset});
}

ObstacleField grid_field(LevelSetGrid grid) {
  const auto& d = grid.dims;
  if (d[0] < 2 || d[1] < 2 || d[2] < 2) throw ParameterError("level-set grid needs >= 2 nodes per axis");
  if (!(grid.spacing > 0.0)) throw ParameterError("level-set spacing must be > 0");
  const std::size_t n = static_cast<std::size_t>(d[0]) * d[1] * d[2];
  if (grid.values.size() != n) throw ParameterError("level-set value count does not match dims");
  for (double v : grid.values) {
    if (!std::isfinite(v)) throw ParameterError("level-set grid contains NaN or inf");
  }
  auto impl = std::make_shared<ObstacleField::Grid>();
  impl->gradient.resize(n);
  impl->hessian.resize(n);
  for (int k = 0; k < d[2]; ++k) {
    for (int j = 0; j < d[1]; ++j) {
      for (int i = 0; i < d[0]; ++i) {
        Vec3 g;
        for (int a = 0; a < 3; ++a) {
          g[a] = node_derivative(grid, i, j, k, a,
                                 [&](std::size_t idx) { return grid.values[idx]; });
        }
        impl->gradient[grid.index(i, j, k)] = g;
        if (std::abs(g.norm() - 1.0) > 0.1) ++impl->eikonal_violations;
      }
    }
  }
  for (int k = 0; k < d[2]; ++k) {
    for (int j = 0; j < d[1]; ++j) {
      for (int i = 0; i < d[0]; ++i) {
        Mat3 h;
        for (int a = 0; a < 3; ++a) {
          const Vec3 col = node_derivative(
              grid, i, j, k, a, [&](std::size_t idx) -> Vec3 { return impl->gradient[idx]; });
          h.col(a) = col;
        }
        impl->hessian[grid.index(i, j, k)] = 0.5 * (h + h.transpose());
      }
    }
  }
  impl->samples = std::move(grid);
  return ObstacleField(std::shared_ptr<const ObstacleField::Grid>(std::move(impl)));
}

ObstacleField::Kind ObstacleField::kind() const {
  if (std::holds_alternative<Sphere>(impl_)) return Kind::sphere;
  if (std::holds_alternative<Plane>(impl_)) return Kind::plane;
  return Kind::grid;
}

std::string ObstacleField::describe() const {
  std::ostringstream s;
  if (const auto* sp = std::get_if<Sphere>(&impl_)) {
    s << "sphere centre (" << sp->center.transpose() << ") radius " << sp->radius;
  } else if (const auto* pl = std::get_if<Plane>(&impl_)) {
    s << "plane normal (" << pl->normal.transpose() << ") offset " << pl->offset;
  } else {
    const auto& g = std::get<std::shared_ptr<const Grid>>(impl_)->samples;
    s << "level-set grid " << g.dims[0] << "x" << g.dims[1] << "x" << g.dims[2] << " spacing "
      << g.spacing;
  }
  return s.str();
}

ObstacleField::Sample ObstacleField::eval(const Vec3& x) const {
  if (const auto* sp = std::get_if<Sphere>(&impl_)) {
    const Vec3 r = x - sp->center;
    const double len = r.norm();
    if (len < 1e-12 * sp->radius) {
      throw OutOfDomainError("sphere distance evaluated at the centre");
    }
    const Vec3 rhat = r / len;
    return {len - sp->radius, rhat, (Mat3::Identity() - rhat * rhat.transpose()) / len};
  }
  if (const auto* pl = std::get_if<Plane>(&impl_)) {
    return {pl->normal.dot(x) + pl->offset, pl->normal, Mat3::Zero()};
  }
  const auto& grid = *std::get<std::shared_ptr<const Grid>>(impl_);
  const auto cell = grid.locate(x);
  Sample s{0.0, Vec3::Zero(), Mat3::Zero()};
  for (int n = 0; n < 8; ++n) {
    s.dist += cell.w[n] * grid.samples.values[cell.idx[n]];
    s.grad += cell.w[n] * grid.gradient[cell.idx[n]];
    s.hess += cell.w[n] * grid.hessian[cell.idx[n]];
  }
  return s;
}

std::size_t ObstacleField::eikonal_violations() const {
  if (const auto* g = std::get_if<std::shared_ptr<const Grid>>(&impl_)) {
    return (*g)->eikonal_violations;
  }
  return 0;
}

LevelSetGrid sample_field(const ObstacleField& field, const Vec3& origin, double spacing,
                          const std::array<int, 3>& dims) {
  LevelSetGrid g;
  g.dims = dims;
  g.origin = origin;
  g.spacing = spacing;
  g.values.resize(static_cast<std::size_t>(dims[0]) * dims[1] * dims[2]);
  for (int k = 0; k < dims[2]; ++k) {
    for (int j = 0; j < dims[1]; ++j) {
      for (int i = 0; i < dims[0]; ++i) g.values[g.index(i, j, k)] = field.dist(g.node(i, j, k));
    }
  }
  return g;
}

LevelSetGrid read_levelset_grid(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open level-set file " + path.string());
  std::string magic;
  LevelSetGrid g;
  if (!(in >> magic) || magic != "levelset") {
    throw Error(path.string() + ": expected 'levelset' header");
  }
  if (!(in >> g.dims[0] >> g.dims[1] >> g.dims[2] >> g.origin.x() >> g.origin.y() >>
        g.origin.z() >> g.spacing)) {
    throw Error(path.string() + ": malformed level-set header");
  }
  if (g.dims[0] < 1 || g.dims[1] < 1 || g.dims[2] < 1) {
    throw Error(path.string() + ": non-positive grid dimensions");
  }
  const std::size_t n = static_cast<std::size_t>(g.dims[0]) * g.dims[1] * g.dims[2];
  g.values.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::string tok;
    if (!(in >> tok)) throw Error(path.string() + ": expected " + std::to_string(n) + " values");
    try {
      g.values[i] = std::stod(tok);
    } catch (const std::exception&) {
      throw Error(path.string() + ": bad value '" + tok + "'");
    }
  }
  return g;
}

void write_levelset_grid(const std::filesystem::path& path, const LevelSetGrid& grid) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  out << std::setprecision(17) << "levelset " << grid.dims[0] << ' ' << grid.dims[1] << ' '
      << grid.dims[2] << ' ' << grid.origin.x() << ' ' << grid.origin.y() << ' ' << grid.origin.z()
      << ' ' << grid.spacing << '\n';
  for (std::size_t i = 0; i < grid.values.size(); ++i) {
    out << grid.values[i] << ((i + 1) % grid.dims[0] == 0 ? '\n' : ' ');
  }
}

}  // namespace capbridge
