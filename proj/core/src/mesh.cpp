#include "rdc/mesh.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>

namespace rdc {

namespace {

Vec2 facet_center_xi(ElementKind k) {
  if (param_dim(k) == 1) return Vec2(0, 0);
  if (k == ElementKind::tri3 || k == ElementKind::tri6) return Vec2(1.0 / 3.0, 1.0 / 3.0);
  return Vec2(0, 0);
}

// Faces of a bulk element as locally numbered node lists.
std::vector<std::vector<int>> bulk_faces(ElementKind k) {
  switch (k) {
    case ElementKind::quad4_bulk2d:
      return {{0, 1}, {1, 2}, {2, 3}, {3, 0}};
    case ElementKind::quad8_bulk2d:
      return {{0, 1, 4}, {1, 2, 5}, {2, 3, 6}, {3, 0, 7}};
    case ElementKind::hex8:
      return {{0, 3, 2, 1}, {4, 5, 6, 7}, {0, 1, 5, 4}, {1, 2, 6, 5}, {2, 3, 7, 6}, {3, 0, 4, 7}};
    case ElementKind::hex20:
      return {{0, 3, 2, 1, 11, 10, 9, 8},  {4, 5, 6, 7, 12, 13, 14, 15},
              {0, 1, 5, 4, 8, 17, 12, 16}, {1, 2, 6, 5, 9, 18, 13, 17},
              {2, 3, 7, 6, 10, 19, 14, 18}, {3, 0, 4, 7, 11, 16, 15, 19}};
    default:
      throw Error("bulk_faces: not a bulk kind");
  }
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

struct Tokenizer {
  std::istream& in;
  int lineno = 0;
  std::string line;

  // Next non-empty line with comments stripped, false at EOF.
  bool next() {
    std::string raw;
    while (std::getline(in, raw)) {
      ++lineno;
      const auto hash = raw.find('#');
      if (hash != std::string::npos) raw.erase(hash);
      size_t a = raw.find_first_not_of(" \t\r");
      if (a == std::string::npos) continue;
      size_t b = raw.find_last_not_of(" \t\r");
      line = raw.substr(a, b - a + 1);
      return true;
    }
    return false;
  }
};

std::vector<std::string> split(const std::string& s) {
  std::vector<std::string> t;
  std::istringstream is(s);
  std::string w;
  while (is >> w) t.push_back(w);
  return t;
}

[[noreturn]] void fail(int lineno, const std::string& what) {
  throw Error("mesh line " + std::to_string(lineno) + ": " + what);
}

long to_int(const std::string& s, int lineno) {
  try {
    size_t pos = 0;
    long v = std::stol(s, &pos);
    if (pos != s.size()) fail(lineno, "bad integer '" + s + "'");
    return v;
  } catch (const std::exception&) {
    fail(lineno, "bad integer '" + s + "'");
  }
}

double to_double(const std::string& s, int lineno) {
  try {
    size_t pos = 0;
    double v = std::stod(s, &pos);
    if (pos != s.size()) fail(lineno, "bad number '" + s + "'");
    return v;
  } catch (const std::exception&) {
    fail(lineno, "bad number '" + s + "'");
  }
}

}  // namespace

Mesh read_mesh(std::istream& in) {
  Mesh m;
  m.dim = 0;
  Tokenizer tk{in};

  enum class Sec { none, nodes, elements, facets, set, rigid_interior };
  Sec sec = Sec::none;
  ElementKind kind = ElementKind::line2;
  std::vector<Facet>* facet_list = nullptr;
  std::vector<NodeId>* set_list = nullptr;

  bool pending = tk.next();
  while (pending) {
    auto t = split(tk.line);
    if (t[0] == "NODES") {
      sec = Sec::nodes;
    } else if (t[0] == "ELEMENTS") {
      if (t.size() != 2) fail(tk.lineno, "ELEMENTS needs a kind");
      kind = kind_from_name(t[1]);
      if (!is_bulk(kind)) fail(tk.lineno, "ELEMENTS kind must be a bulk kind");
      sec = Sec::elements;
    } else if (t[0] == "FACETS") {
      if (t.size() != 3) fail(tk.lineno, "FACETS needs a group and a kind");
      kind = kind_from_name(t[2]);
      if (!is_interface(kind)) fail(tk.lineno, "FACETS kind must be an interface kind");
      if (t[1] == "NONMORTAR")
        facet_list = &m.nonmortar;
      else if (t[1] == "RIGID")
        facet_list = &m.rigid;
      else if (t[1] == "NEUMANN")
        facet_list = &m.neumann;
      else
        fail(tk.lineno, "unknown facet group '" + t[1] + "'");
      sec = Sec::facets;
    } else if (t[0] == "SET") {
      if (t.size() != 2) fail(tk.lineno, "SET needs a name");
      set_list = &m.sets[t[1]];
      sec = Sec::set;
    } else if (t[0] == "RIGID_INTERIOR") {
      sec = Sec::rigid_interior;
    } else if (sec == Sec::none) {
      fail(tk.lineno, "expected a section header, got '" + t[0] + "'");
    } else {
      switch (sec) {
        case Sec::nodes: {
          if (m.dim == 0) {
            if (t.size() == 3)
              m.dim = 2;
            else if (t.size() == 4)
              m.dim = 3;
            else
              fail(tk.lineno, "node record needs id and 2 or 3 coordinates");
          }
          if (t.size() != static_cast<size_t>(1 + m.dim))
            fail(tk.lineno, "node record has wrong column count");
          const long id = to_int(t[0], tk.lineno);
          if (id != static_cast<long>(m.X.size()))
            fail(tk.lineno, "node ids must be contiguous from 0");
          Vec3 p = Vec3::Zero();
          for (int c = 0; c < m.dim; ++c) p[c] = to_double(t[1 + c], tk.lineno);
          m.X.push_back(p);
          break;
        }
        case Sec::elements: {
          const int nn = node_count(kind);
          if (t.size() != static_cast<size_t>(1 + nn))
            fail(tk.lineno, "element record has wrong node count");
          const long id = to_int(t[0], tk.lineno);
          if (id != static_cast<long>(m.bulk.size()))
            fail(tk.lineno, "element ids must be contiguous from 0");
          BulkElement e;
          e.kind = kind;
          e.nn = nn;
          for (int a = 0; a < nn; ++a) e.nodes[a] = static_cast<NodeId>(to_int(t[1 + a], tk.lineno));
          m.bulk.push_back(e);
          break;
        }
        case Sec::facets: {
          const int nn = node_count(kind);
          if (t.size() != static_cast<size_t>(1 + nn))
            fail(tk.lineno, "facet record has wrong node count");
          const long id = to_int(t[0], tk.lineno);
          if (id != static_cast<long>(facet_list->size()))
            fail(tk.lineno, "facet ids must be contiguous from 0");
          Facet f;
          f.kind = kind;
          f.nn = nn;
          for (int a = 0; a < nn; ++a) f.nodes[a] = static_cast<NodeId>(to_int(t[1 + a], tk.lineno));
          facet_list->push_back(f);
          break;
        }
        case Sec::set:
          for (const auto& s : t) set_list->push_back(static_cast<NodeId>(to_int(s, tk.lineno)));
          break;
        case Sec::rigid_interior: {
          if (m.dim == 0) fail(tk.lineno, "RIGID_INTERIOR must follow NODES");
          if (t.size() != static_cast<size_t>(m.dim))
            fail(tk.lineno, "RIGID_INTERIOR record has wrong column count");
          for (int c = 0; c < m.dim; ++c) m.rigid_interior[c] = to_double(t[c], tk.lineno);
          m.has_rigid_interior = true;
          break;
        }
        case Sec::none:
          break;
      }
    }
    pending = tk.next();
  }

  if (m.X.empty()) throw Error("mesh has no NODES section");
  m.finalize();
  return m;
}

Mesh read_mesh_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open mesh file: " + path);
  try {
    return read_mesh(in);
  } catch (const Error& e) {
    throw Error(path + ": " + e.what());
  }
}

void Mesh::finalize() {
  const int nn = nnodes();
  auto check_node = [&](NodeId n, const char* where) {
    if (n < 0 || n >= nn) throw Error(std::string("node id out of range in ") + where);
  };

  is_rigid_node.assign(nn, 0);
  for (const auto& f : rigid)
    for (int a = 0; a < f.nn; ++a) {
      check_node(f.nodes[a], "rigid facet");
      is_rigid_node[f.nodes[a]] = 1;
    }

  std::vector<char> in_bulk(nn, 0);
  for (const auto& e : bulk)
    for (int a = 0; a < e.nn; ++a) {
      check_node(e.nodes[a], "bulk element");
      if (is_rigid_node[e.nodes[a]])
        throw Error("rigid node " + std::to_string(e.nodes[a]) + " appears in bulk connectivity");
      in_bulk[e.nodes[a]] = 1;
    }
  for (const auto& f : nonmortar)
    for (int a = 0; a < f.nn; ++a) {
      check_node(f.nodes[a], "non-mortar facet");
      if (!in_bulk[f.nodes[a]])
        throw Error("non-mortar facet references node " + std::to_string(f.nodes[a]) +
                    " outside bulk connectivity");
    }
  for (const auto& f : neumann)
    for (int a = 0; a < f.nn; ++a) {
      check_node(f.nodes[a], "neumann facet");
      if (!in_bulk[f.nodes[a]])
        throw Error("neumann facet references node outside bulk connectivity");
    }
  for (const auto& [name, list] : sets)
    for (NodeId n : list) check_node(n, "node set");
  for (int n = 0; n < nn; ++n)
    if (!in_bulk[n] && !is_rigid_node[n])
      throw Error("node " + std::to_string(n) + " is referenced by no element");

  // DOF numbering: node-major over deformable nodes in ascending node id.
  node_dof.assign(nn, -1);
  ndof = 0;
  for (int n = 0; n < nn; ++n)
    if (in_bulk[n]) {
      node_dof[n] = ndof;
      ndof += dim;
    }

  // Match each non-mortar facet to the unique bulk face containing it.
  std::map<std::vector<NodeId>, std::vector<int>> face_owner;
  for (size_t e = 0; e < bulk.size(); ++e) {
    for (const auto& face : bulk_faces(bulk[e].kind)) {
      std::vector<NodeId> key;
      key.reserve(face.size());
      for (int loc : face) key.push_back(bulk[e].nodes[loc]);
      std::sort(key.begin(), key.end());
      face_owner[key].push_back(static_cast<int>(e));
    }
  }
  for (size_t i = 0; i < nonmortar.size(); ++i) {
    Facet& f = nonmortar[i];
    std::vector<NodeId> key(f.nodes.begin(), f.nodes.begin() + f.nn);
    std::sort(key.begin(), key.end());
    auto it = face_owner.find(key);
    if (it == face_owner.end())
      throw Error("non-mortar facet " + std::to_string(i) + " is not a face of any bulk element");
    if (it->second.size() != 1)
      throw Error("non-mortar facet " + std::to_string(i) + " is an interior face");
    f.bulk_elem = it->second[0];
  }

  slave_nodes.clear();
  for (const auto& f : nonmortar)
    for (int a = 0; a < f.nn; ++a) slave_nodes.push_back(f.nodes[a]);
  std::sort(slave_nodes.begin(), slave_nodes.end());
  slave_nodes.erase(std::unique(slave_nodes.begin(), slave_nodes.end()), slave_nodes.end());
  slave_index.assign(nn, -1);
  for (size_t i = 0; i < slave_nodes.size(); ++i) slave_index[slave_nodes[i]] = static_cast<int>(i);
}

double Mesh::facet_diameter(const Facet& f) const {
  double d2 = 0.0;
  for (int a = 0; a < f.nn; ++a)
    for (int b = a + 1; b < f.nn; ++b)
      d2 = std::max(d2, (X[f.nodes[a]] - X[f.nodes[b]]).squaredNorm());
  return std::sqrt(d2);
}

Vec3 facet_normal(const Mesh& m, const Facet& f, const Vec2& xi, const VecX* d) {
  double dN[kMaxInterfaceNodes][2];
  const double p[2] = {xi[0], xi[1]};
  shapefn::grads(f.kind, p, dN);
  Vec3 t1 = Vec3::Zero(), t2 = Vec3::Zero();
  for (int a = 0; a < f.nn; ++a) {
    const Vec3 x = d ? m.xcur(f.nodes[a], *d) : m.X[f.nodes[a]];
    t1 += dN[a][0] * x;
    t2 += dN[a][1] * x;
  }
  if (param_dim(f.kind) == 1) return Vec3(t1[1], -t1[0], 0.0);
  return t1.cross(t2);
}

std::vector<MisorientedFacet> boundary_orientation_check(const Mesh& m) {
  std::vector<MisorientedFacet> bad;
  auto centroid = [&](const NodeId* nodes, int nn) {
    Vec3 c = Vec3::Zero();
    for (int a = 0; a < nn; ++a) c += m.X[nodes[a]];
    return Vec3(c / nn);
  };
  for (size_t i = 0; i < m.nonmortar.size(); ++i) {
    const Facet& f = m.nonmortar[i];
    const Vec3 n = facet_normal(m, f, facet_center_xi(f.kind), nullptr);
    const Vec3 fc = centroid(f.nodes.data(), f.nn);
    const Vec3 bc = centroid(m.bulk[f.bulk_elem].nodes.data(), m.bulk[f.bulk_elem].nn);
    if (n.dot(fc - bc) <= 0.0) bad.push_back({false, static_cast<int>(i)});
  }
  if (m.has_rigid_interior) {
    for (size_t i = 0; i < m.rigid.size(); ++i) {
      const Facet& f = m.rigid[i];
      const Vec3 n = facet_normal(m, f, facet_center_xi(f.kind), nullptr);
      const Vec3 fc = centroid(f.nodes.data(), f.nn);
      if (n.dot(fc - m.rigid_interior) <= 0.0) bad.push_back({true, static_cast<int>(i)});
    }
  }
  return bad;
}

void write_mesh(const Mesh& m, std::ostream& out) {
  out << "NODES\n";
  for (int n = 0; n < m.nnodes(); ++n) {
    out << n;
    for (int c = 0; c < m.dim; ++c) out << ' ' << fmt(m.X[n][c]);
    out << '\n';
  }
  // Original order is preserved; a new header starts whenever the kind changes,
  // so ids stay contiguous and a read-write cycle reproduces the bytes.
  for (size_t i = 0; i < m.bulk.size(); ++i) {
    if (i == 0 || m.bulk[i].kind != m.bulk[i - 1].kind)
      out << "ELEMENTS " << kind_name(m.bulk[i].kind) << '\n';
    out << i;
    for (int a = 0; a < m.bulk[i].nn; ++a) out << ' ' << m.bulk[i].nodes[a];
    out << '\n';
  }

  auto write_facets = [&](const char* group, const std::vector<Facet>& list) {
    for (size_t i = 0; i < list.size(); ++i) {
      if (i == 0 || list[i].kind != list[i - 1].kind)
        out << "FACETS " << group << ' ' << kind_name(list[i].kind) << '\n';
      out << i;
      for (int a = 0; a < list[i].nn; ++a) out << ' ' << list[i].nodes[a];
      out << '\n';
    }
  };
  write_facets("NONMORTAR", m.nonmortar);
  write_facets("RIGID", m.rigid);
  write_facets("NEUMANN", m.neumann);

  if (m.has_rigid_interior) {
    out << "RIGID_INTERIOR\n";
    for (int c = 0; c < m.dim; ++c) out << (c ? " " : "") << fmt(m.rigid_interior[c]);
    out << '\n';
  }
  for (const auto& [name, list] : m.sets) {
    out << "SET " << name << '\n';
    for (size_t i = 0; i < list.size(); ++i) out << list[i] << ((i + 1) % 10 == 0 ? '\n' : ' ');
    if (list.size() % 10 != 0) out << '\n';
  }
}

std::string write_mesh_string(const Mesh& m) {
  std::ostringstream os;
  write_mesh(m, os);
  return os.str();
}

}  // namespace rdc
