#include "capbridge/verify.hpp"

#include <algorithm>
#include <random>

#include "capbridge/calculus.hpp"
#include "capbridge/distance.hpp"
#include "capbridge/system.hpp"

namespace capbridge {

namespace {

using Mat9 = Eigen::Matrix<double, 9, 9>;
using Vec9 = Eigen::Matrix<double, 9, 1>;

VertexField random_field(std::size_t n, std::mt19937& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  VertexField V(n);
  for (auto& v : V) v = Vec3(u(rng), u(rng), u(rng));
  return V;
}

ShellMesh jitter(const ShellMesh& mesh, double amount, std::mt19937& rng) {
  auto V = random_field(mesh.num_vertices(), rng);
  return mesh.displaced(V, amount);
}

double rel_error(double a, double b) {
  const double scale = std::max({std::abs(a), std::abs(b), 1e-10});
  return std::abs(a - b) / scale;
}

Vec9 gather(const ShellMesh& mesh, int f, const VertexField& V) {
  Vec9 out;
  for (int k = 0; k < 3; ++k) out.segment<3>(3 * k) = V[mesh.triangle(f)[k]];
  return out;
}

template <class Element>
double assembled_first(const ShellMesh& mesh, Element&& element, const VertexField& V,
                       RegionFilter filter = RegionFilter::all()) {
  double sum = 0.0;
  for (int f = 0; f < static_cast<int>(mesh.num_faces()); ++f) {
    if (!filter.matches(mesh.region(f))) continue;
    sum += element(f).grad.dot(gather(mesh, f, V));
  }
  return sum;
}

template <class Element>
double assembled_second(const ShellMesh& mesh, Element&& element, const VertexField& V,
                        const VertexField& W, RegionFilter filter = RegionFilter::all()) {
  double sum = 0.0;
  for (int f = 0; f < static_cast<int>(mesh.num_faces()); ++f) {
    if (!filter.matches(mesh.region(f))) continue;
    sum += gather(mesh, f, V).dot(element(f).hess * gather(mesh, f, W));
  }
  return sum;
}

Eigen::VectorXd flatten(const VertexField& V) {
  Eigen::VectorXd x(3 * V.size());
  for (std::size_t i = 0; i < V.size(); ++i) x.segment<3>(3 * i) = V[i];
  return x;
}

struct Tracker {
  std::vector<OracleCheck> checks;
  OracleCheck& get(const std::string& name, double tol) {
    for (auto& c : checks) {
      if (c.name == name) return c;
    }
    checks.push_back({name, 0, 0.0, tol});
    return checks.back();
  }
  void add(const std::string& name, double tol, double err) {
    auto& c = get(name, tol);
    ++c.samples;
    c.max_rel_error = std::max(c.max_rel_error, err);
  }
};

constexpr double kFirst = 1e-6;
constexpr double kSecond = 1e-4;
constexpr double kHessEps = 1e-4;

}  // namespace

std::vector<OracleCheck> run_derivative_oracles(unsigned seed, int fields) {
  std::mt19937 rng(seed);
  Tracker t;

  const ShellMesh sphere = jitter(generate_icosphere(1.0, 3), 0.01, rng);
  const ShellMesh cyl = jitter(generate_cylinder(1.0, -0.3, 0.3, 0.2), 0.01, rng);
  Vec3 g = random_field(1, rng)[0].normalized();

  const auto pF = make_pair_F();
  const auto pG = make_pair_G(g);

  auto area = [](RegionFilter f) { return [f](const ShellMesh& m) { return surface_area(m, f); }; };
  auto area_el = [](const ShellMesh& m) { return [&m](int f) { return area_element(m, f); }; };
  auto j2_el = [](const ShellMesh& m, const IntegrandPair& p) {
    return [&m, &p](int f) { return j2_element(m, f, p); };
  };

  const auto ball = sphere_field(Vec3(0.2, -0.1, 2.5), 1.0);

  for (int k = 0; k < fields; ++k) {
    // Surface area, whole surface and per region.
    {
      const auto V = random_field(sphere.num_vertices(), rng);
      const auto W = random_field(sphere.num_vertices(), rng);
      const double a = dS(sphere, RegionFilter::all(), V);
      const auto fd = fd_gradient(area(RegionFilter::all()), sphere, V, default_eps_sweep(), a);
      t.add("dS formula (sphere)", kFirst, rel_error(a, fd.value));
      t.add("dS assembled (sphere)", kFirst,
            rel_error(assembled_first(sphere, area_el(sphere), V), fd.value));
      const double h = fd_hessian(area(RegionFilter::all()), sphere, V, W, kHessEps);
      t.add("d2S formula (sphere)", kSecond, rel_error(d2S(sphere, RegionFilter::all(), V, W), h));
      t.add("d2S assembled (sphere)", kSecond,
            rel_error(assembled_second(sphere, area_el(sphere), V, W), h));
    }
    for (RegionTag tag : {kLiquidAir, liquid_solid(0), liquid_solid(1)}) {
      const auto filter = RegionFilter::tag(tag);
      const auto V = random_field(cyl.num_vertices(), rng);
      const auto W = random_field(cyl.num_vertices(), rng);
      const std::string suffix = " (region " + std::to_string(tag) + ")";
      const double a = dS(cyl, filter, V);
      const auto fd = fd_gradient(area(filter), cyl, V, default_eps_sweep(), a);
      t.add("dS formula" + suffix, kFirst, rel_error(a, fd.value));
      t.add("dS assembled" + suffix, kFirst,
            rel_error(assembled_first(cyl, area_el(cyl), V, filter), fd.value));
      const double h = fd_hessian(area(filter), cyl, V, W, kHessEps);
      t.add("d2S formula" + suffix, kSecond, rel_error(d2S(cyl, filter, V, W), h));
      t.add("d2S assembled" + suffix, kSecond,
            rel_error(assembled_second(cyl, area_el(cyl), V, W, filter), h));
    }

    // J2-type functionals on both meshes.
    for (const ShellMesh* m : {&sphere, &cyl}) {
      const auto V = random_field(m->num_vertices(), rng);
      const auto W = random_field(m->num_vertices(), rng);
      struct Item {
        std::string name;
        IntegrandPair pair;
        std::function<double(const ShellMesh&)> J;
      };
      std::vector<Item> items = {
          {"F", pF, [](const ShellMesh& x) { return enclosed_volume(x); }},
          {"G", pG, [g](const ShellMesh& x) { return gravitational_energy(x, g); }},
      };
      for (int axis = 0; axis < 3; ++axis) {
        items.push_back({"centroid x" + std::to_string(axis + 1), make_pair_centroid(axis),
                         [axis](const ShellMesh& x) { return volume_centroid_component(x, axis); }});
      }
      for (const auto& it : items) {
        const double a = dJ2(*m, it.pair, V);
        const auto fd = fd_gradient(it.J, *m, V, default_eps_sweep(), a);
        t.add("d" + it.name + " formula", kFirst, rel_error(a, fd.value));
        t.add("d" + it.name + " assembled", kFirst,
              rel_error(assembled_first(*m, j2_el(*m, it.pair), V), fd.value));
        const double h = fd_hessian(it.J, *m, V, W, kHessEps);
        t.add("d2" + it.name + " formula", kSecond, rel_error(d2J2(*m, it.pair, V, W), h));
        t.add("d2" + it.name + " assembled", kSecond,
              rel_error(assembled_second(*m, j2_el(*m, it.pair), V, W), h));
      }
    }

    // Distance rows for analytic and sampled fields.
    {
      std::uniform_int_distribution<int> pick(0, static_cast<int>(cyl.num_vertices()) - 1);
      for (const auto& [name, field] :
           {std::pair<std::string, ObstacleField>{"sphere", ball},
            {"plane", plane_field(0.3, Vec3(0.6, 0.0, 0.8))}}) {
        const int j = pick(rng);
        const auto V = random_field(cyl.num_vertices(), rng);
        const auto W = random_field(cyl.num_vertices(), rng);
        auto J = [&field, j](const ShellMesh& x) { return field.dist(x.vertex(j)); };
        const double a = ddist(field, cyl.vertex(j), V[j]);
        const auto fd = fd_gradient(J, cyl, V, default_eps_sweep(), a);
        t.add("ddist " + name, kFirst, rel_error(a, fd.value));
        const double h = fd_hessian(J, cyl, V, W, kHessEps);
        t.add("d2dist " + name, kSecond,
              std::abs(d2dist(field, cyl.vertex(j), V[j], W[j]) - h) /
                  std::max(1.0, std::abs(h)));
      }
    }
  }

  // Whole Lagrangian through the KKT assembly (full Cartesian basis).
  {
    Problem problem;
    problem.obstacles = {sphere_field(Vec3(0.0, 0.0, 1.6), 1.0), plane_field(0.35)};
    problem.params.beta = {0.3, -0.2};
    problem.params.bond = 0.7;
    problem.params.gravity_dir = g;
    problem.params.target_volume = 1.5;
    problem.centroid = {{0, 0.01}, {2, -0.02}};
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    Multipliers mult;
    mult.volume = u(rng);
    for (std::size_t i = 0; i < 2; ++i) {
      for (int v : cyl.wetted_vertices(i)) mult.distance[v] = u(rng);
    }
    mult.centroid = {u(rng), u(rng)};

    auto lagrangian = [&](const ShellMesh& m) {
      double L = total_energy(m, problem);
      L += mult.volume * (enclosed_volume(m) - problem.params.target_volume);
      for (std::size_t i = 0; i < 2; ++i) {
        for (int v : m.wetted_vertices(i)) L += mult.distance_at(v) * problem.obstacles[i].dist(m.vertex(v));
      }
      for (std::size_t c = 0; c < problem.centroid.size(); ++c) {
        L += mult.centroid[c] *
             (volume_centroid_component(m, problem.centroid[c].axis) / problem.params.target_volume -
              problem.centroid[c].target);
      }
      return L;
    };

    const auto basis = MotionBasis::full(cyl);
    const auto sys = assemble_kkt(cyl, problem, mult, basis, HessianMode::exact);
    const auto& lay = sys.layout;
    const Eigen::MatrixXd dense = Eigen::MatrixXd(sys.matrix);
    const Eigen::MatrixXd H = dense.topLeftCorner(lay.shape, lay.shape);
    const Eigen::VectorXd grad = -sys.rhs.head(lay.shape);

    for (int k = 0; k < fields; ++k) {
      const auto V = random_field(cyl.num_vertices(), rng);
      const auto W = random_field(cyl.num_vertices(), rng);
      const Eigen::VectorXd v = flatten(V), w = flatten(W);
      const double a = grad.dot(v);
      const auto fd = fd_gradient(lagrangian, cyl, V, default_eps_sweep(), a);
      t.add("dL assembled KKT residual", kFirst, rel_error(a, fd.value));
      t.add("d2L assembled KKT block", kSecond,
            rel_error(v.dot(H * w), fd_hessian(lagrangian, cyl, V, W, kHessEps)));

      const double dvol = dense.row(lay.volume).head(lay.shape).dot(v);
      const auto fdv = fd_gradient([](const ShellMesh& m) { return enclosed_volume(m); }, cyl, V,
                                   default_eps_sweep(), dvol);
      t.add("KKT volume row", kFirst, rel_error(dvol, fdv.value));
      for (std::size_t c = 0; c < lay.num_centroid; ++c) {
        const int axis = problem.centroid[c].axis;
        const double dc = dense.row(lay.centroid_begin + c).head(lay.shape).dot(v);
        const auto fdc = fd_gradient(
            [&](const ShellMesh& m) { return volume_centroid_component(m, axis) / problem.params.target_volume; },
            cyl, V, default_eps_sweep(), dc);
        t.add("KKT centroid rows", kFirst, rel_error(dc, fdc.value));
      }
      for (std::size_t j = 0; j < lay.dist_vertex.size(); j += 17) {
        const int vtx = lay.dist_vertex[j];
        const auto& field = problem.obstacles[lay.dist_obstacle[j]];
        const double dd = dense.row(lay.dist_begin + j).head(lay.shape).dot(v);
        const auto fdd = fd_gradient([&](const ShellMesh& m) { return field.dist(m.vertex(vtx)); },
                                     cyl, V, default_eps_sweep(), dd);
        t.add("KKT distance rows", kFirst, rel_error(dd, fdd.value));
      }
    }
    t.add("KKT symmetry", 1e-12, (dense - dense.transpose()).cwiseAbs().maxCoeff() /
                                     std::max(1.0, dense.cwiseAbs().maxCoeff()));
  }
  return t.checks;
}

std::vector<OracleCheck> run_identity_checks(unsigned seed) {
  std::mt19937 rng(seed);
  Tracker t;
  constexpr double tol = 1e-12;
  const ShellMesh mesh = jitter(generate_icosphere(1.0, 3, Vec3(0.3, -0.2, 0.1)), 0.01, rng);
  const std::size_t n = mesh.num_vertices();
  const double S = surface_area(mesh);
  const double F = enclosed_volume(mesh);
  const auto pF = make_pair_F();

  VertexField id(mesh.vertices());
  for (int k = 0; k < 5; ++k) {
    const Vec3 c = random_field(1, rng)[0];
    const VertexField C(n, c);
    t.add("dS[const] = 0", tol, std::abs(dS(mesh, RegionFilter::all(), C)) / S);
    t.add("dF[const] = 0", tol, std::abs(dJ2(mesh, pF, C)) / F);
    t.add("d2S[const,const] = 0", tol, std::abs(d2S(mesh, RegionFilter::all(), C, C)) / S);
    t.add("d2F[const,const] = 0", tol, std::abs(d2J2(mesh, pF, C, C)) / F);

    const Vec3 w = random_field(1, rng)[0];
    VertexField R(n);
    for (std::size_t i = 0; i < n; ++i) R[i] = w.cross(mesh.vertex(static_cast<int>(i)));
    const auto d = dn(mesh, R);
    double worst = 0.0;
    for (int f = 0; f < static_cast<int>(mesh.num_faces()); ++f) {
      worst = std::max(worst, (d[f] - w.cross(mesh.normal(f))).norm() / std::max(1.0, w.norm()));
    }
    t.add("dn[w x s] = w x n", tol, worst);

    const Vec3 g = random_field(1, rng)[0].normalized();
    VertexField Rg(n);
    for (std::size_t i = 0; i < n; ++i) Rg[i] = g.cross(mesh.vertex(static_cast<int>(i)));
    const double G = std::abs(gravitational_energy(mesh, g)) + F;
    t.add("dG[rotation about g] = 0", tol, std::abs(dJ2(mesh, make_pair_G(g), Rg)) / G);
  }
  t.add("dS[s] = 2S", tol, std::abs(dS(mesh, RegionFilter::all(), id) - 2.0 * S) / S);
  t.add("dF[s] = 3F", tol, std::abs(dJ2(mesh, pF, id) - 3.0 * F) / F);
  t.add("d2S[s,s] = 2S", tol, std::abs(d2S(mesh, RegionFilter::all(), id, id) - 2.0 * S) / S);
  t.add("d2F[s,s] = 6F", tol, std::abs(d2J2(mesh, pF, id, id) - 6.0 * F) / F);
  double worst = 0.0;
  for (const auto& v : ddn(mesh, id, id)) worst = std::max(worst, v.norm());
  t.add("ddn[s,s] = 0", tol, worst);
  worst = 0.0;
  for (double v : mat_div(mesh, id, id)) worst = std::max(worst, std::abs(v + 2.0) / 2.0);
  t.add("mat_div[s,s] = -2", tol, worst);
  return t.checks;
}

}  // namespace capbridge
