#include "polyharm/mesh_io.hpp"

#include <charconv>
#include <sstream>

#include "polyharm/csv.hpp"

namespace polyharm {

namespace {

const char* kind_name(LocalModel::Kind k) {
  switch (k) {
    case LocalModel::Kind::book: return "book";
    case LocalModel::Kind::cone: return "cone";
    case LocalModel::Kind::sector: return "sector";
  }
  return "?";
}

LocalModel::Kind parse_kind(const std::string& s) {
  if (s == "book") return LocalModel::Kind::book;
  if (s == "cone") return LocalModel::Kind::cone;
  if (s == "sector") return LocalModel::Kind::sector;
  throw Error("unknown model kind '" + s + "' in mesh file");
}

double parse_double(const std::string& tok) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc() || ptr != tok.data() + tok.size()) {
    throw Error("bad number '" + tok + "' in mesh file");
  }
  return v;
}

int parse_int(const std::string& tok) {
  int v = 0;
  auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc() || ptr != tok.data() + tok.size()) {
    throw Error("bad integer '" + tok + "' in mesh file");
  }
  return v;
}

class Lines {
 public:
  explicit Lines(const std::string& text) : in_(text) {}
  std::vector<std::string> next(const char* expect) {
    std::string line;
    while (std::getline(in_, line)) {
      ++number_;
      if (line.empty() || line[0] == '#') continue;
      std::istringstream ls(line);
      std::vector<std::string> toks;
      for (std::string t; ls >> t;) toks.push_back(t);
      if (toks.empty()) continue;
      if (toks[0] != expect) {
        throw Error("mesh file line " + std::to_string(number_) + ": expected '" + expect +
                    "', found '" + toks[0] + "'");
      }
      return toks;
    }
    throw Error(std::string("mesh file ended before '") + expect + "'");
  }
  void need(const std::vector<std::string>& toks, std::size_t count) const {
    if (toks.size() != count) {
      throw Error("mesh file line " + std::to_string(number_) + ": expected " +
                  std::to_string(count) + " fields");
    }
  }

 private:
  std::istringstream in_;
  int number_ = 0;
};

}  // namespace

std::string mesh_to_text(const Mesh& mesh) {
  const LocalModel& m = mesh.model();
  std::ostringstream out;
  out << "polyharm-mesh 1\n";
  out << "model " << kind_name(m.kind()) << ' ' << fmt(m.parameter()) << ' ' << m.dimension()
      << ' ' << m.codimension() << ' ' << m.wedge_count() << ' ' << m.gluings().size() << '\n';
  for (int w = 0; w < m.wedge_count(); ++w) {
    out << "wedge " << w << ' ' << fmt(m.wedges()[w].angle) << ' ' << fmt(m.wedges()[w].offset)
        << '\n';
  }
  for (const Gluing& g : m.gluings()) {
    out << "glue " << g.wedge_a << ' ' << g.side_a << ' ' << g.wedge_b << ' ' << g.side_b
        << " arclength\n";
  }
  out << "grid " << fmt(mesh.radius()) << ' ' << fmt(mesh.h()) << ' ' << fmt(mesh.grading()) << ' '
      << mesh.radii().size() << '\n';
  for (std::size_t j = 0; j < mesh.radii().size(); ++j) {
    out << "radius " << j << ' ' << fmt(mesh.radii()[j]) << '\n';
  }
  out << "vertices " << mesh.vertex_count() << '\n';
  for (int i = 0; i < mesh.vertex_count(); ++i) {
    const MeshVertex& v = mesh.vertices()[i];
    out << "vertex " << i << ' ' << v.p.wedge << ' ' << fmt(v.p.rho) << ' ' << fmt(v.p.phi) << ' '
        << fmt(v.p.z) << ' ' << (v.boundary ? 1 : 0) << ' ' << v.ray_class << ' ' << v.level
        << '\n';
  }
  out << "simplices " << mesh.simplex_count() << '\n';
  for (int s = 0; s < mesh.simplex_count(); ++s) {
    const Simplex& sx = mesh.simplices()[s];
    out << "simplex " << s << ' ' << sx.wedge;
    for (int k = 0; k < mesh.simplex_size(); ++k) {
      out << ' ' << sx.v[k] << ' ' << static_cast<int>(sx.side[k]);
    }
    out << '\n';
  }
  out << "end\n";
  return out.str();
}

Mesh mesh_from_text(const std::string& text) {
  Lines lines(text);
  auto header = lines.next("polyharm-mesh");
  lines.need(header, 2);
  if (header[1] != "1") throw Error("unsupported mesh file version " + header[1]);
  auto mt = lines.next("model");
  lines.need(mt, 7);
  const auto kind = parse_kind(mt[1]);
  const double parameter = parse_double(mt[2]);
  const int n = parse_int(mt[3]), nu = parse_int(mt[4]);
  const int wedge_count = parse_int(mt[5]), glue_count = parse_int(mt[6]);
  std::vector<Wedge> wedges;
  for (int w = 0; w < wedge_count; ++w) {
    auto t = lines.next("wedge");
    lines.need(t, 4);
    if (parse_int(t[1]) != w) throw Error("wedges out of order in mesh file");
    wedges.push_back({parse_double(t[2]), parse_double(t[3])});
  }
  std::vector<Gluing> gluings;
  for (int g = 0; g < glue_count; ++g) {
    auto t = lines.next("glue");
    lines.need(t, 6);
    if (t[5] != "arclength") {
      throw Error("gluing isometry '" + t[5] + "' is not supported; only arclength identifications");
    }
    gluings.push_back({parse_int(t[1]), parse_int(t[2]), parse_int(t[3]), parse_int(t[4])});
  }
  LocalModel model(kind, parameter, n, nu, std::move(wedges), std::move(gluings));
  auto gt = lines.next("grid");
  lines.need(gt, 5);
  const double r = parse_double(gt[1]), h = parse_double(gt[2]), grading = parse_double(gt[3]);
  const int rings = parse_int(gt[4]);
  std::vector<double> radii;
  for (int j = 0; j < rings; ++j) {
    auto t = lines.next("radius");
    lines.need(t, 3);
    radii.push_back(parse_double(t[2]));
  }
  auto vt = lines.next("vertices");
  lines.need(vt, 2);
  const int nv = parse_int(vt[1]);
  std::vector<MeshVertex> vertices(nv);
  for (int i = 0; i < nv; ++i) {
    auto t = lines.next("vertex");
    lines.need(t, 9);
    if (parse_int(t[1]) != i) throw Error("vertices out of order in mesh file");
    MeshVertex& v = vertices[i];
    v.p = ModelPoint{parse_int(t[2]), parse_double(t[3]), parse_double(t[4]), parse_double(t[5])};
    v.boundary = parse_int(t[6]) != 0;
    v.ray_class = parse_int(t[7]);
    v.level = parse_int(t[8]);
  }
  auto st = lines.next("simplices");
  lines.need(st, 2);
  const int ns = parse_int(st[1]);
  std::vector<Simplex> simplices(ns);
  for (int s = 0; s < ns; ++s) {
    auto t = lines.next("simplex");
    lines.need(t, 3 + 2 * (n + 1));
    if (parse_int(t[1]) != s) throw Error("simplices out of order in mesh file");
    simplices[s].wedge = parse_int(t[2]);
    for (int k = 0; k <= n; ++k) {
      simplices[s].v[k] = parse_int(t[3 + 2 * k]);
      simplices[s].side[k] = static_cast<signed char>(parse_int(t[4 + 2 * k]));
    }
  }
  lines.next("end");
  return Mesh(std::move(model), r, h, grading, std::move(radii), std::move(vertices),
              std::move(simplices));
}

void write_mesh(const std::filesystem::path& path, const Mesh& mesh) {
  write_text(path, mesh_to_text(mesh));
}

Mesh read_mesh(const std::filesystem::path& path) { return mesh_from_text(read_text(path)); }

}  // namespace polyharm
