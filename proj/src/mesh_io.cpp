#include "untrim/mesh_io.hpp"

#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "untrim/quadmesh.hpp"

namespace untrim {

namespace {

void check_faces(const std::vector<Vector3d>& pos, const std::vector<std::array<int, 3>>& faces) {
    std::string bad;
    for (size_t f = 0; f < faces.size(); ++f) {
        auto& t = faces[f];
        for (int c = 0; c < 3; ++c)
            if (t[c] < 0 || t[c] >= int(pos.size()))
                throw std::runtime_error("face " + std::to_string(f) + " references out-of-range vertex");
        if (t[0] == t[1] || t[1] == t[2] || t[0] == t[2])
            throw std::runtime_error("face " + std::to_string(f) + " repeats a vertex index");
        Vector3d n = (pos[t[1]] - pos[t[0]]).cross(pos[t[2]] - pos[t[0]]);
        if (n.norm() <= 0) bad += (bad.empty() ? "" : ",") + std::to_string(f);
    }
    if (!bad.empty()) throw std::runtime_error("zero-area faces rejected at load: " + bad);
}

int parse_obj_index(const std::string& tok, size_t nverts) {
    // "v", "v/vt", "v/vt/vn", "v//vn"
    size_t slash = tok.find('/');
    long idx = std::stol(slash == std::string::npos ? tok : tok.substr(0, slash));
    if (idx < 0) idx = long(nverts) + idx + 1;  // relative indexing
    return int(idx - 1);
}

struct ObjData {
    std::vector<Vector3d> positions;
    std::vector<std::vector<int>> faces;
};

ObjData read_obj(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    ObjData d;
    std::string line;
    size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::istringstream ss(line);
        std::string tag;
        if (!(ss >> tag)) continue;
        if (tag == "v") {
            Vector3d p;
            if (!(ss >> p[0] >> p[1] >> p[2]))
                throw std::runtime_error(path + ":" + std::to_string(lineno) + ": bad vertex");
            d.positions.push_back(p);
        } else if (tag == "f") {
            std::vector<int> f;
            std::string tok;
            while (ss >> tok) f.push_back(parse_obj_index(tok, d.positions.size()));
            if (f.size() < 3)
                throw std::runtime_error(path + ":" + std::to_string(lineno) + ": face with <3 vertices");
            d.faces.push_back(std::move(f));
        }
    }
    return d;
}

struct PlyProp {
    std::string type;
    std::string name;
    bool is_list = false;
    std::string count_type;
};

size_t scalar_size(const std::string& t) {
    if (t == "char" || t == "uchar" || t == "int8" || t == "uint8") return 1;
    if (t == "short" || t == "ushort" || t == "int16" || t == "uint16") return 2;
    if (t == "int" || t == "uint" || t == "int32" || t == "uint32" || t == "float" || t == "float32") return 4;
    if (t == "double" || t == "float64") return 8;
    throw std::runtime_error("unknown ply type " + t);
}

double read_scalar_bin(std::ifstream& in, const std::string& t) {
    char buf[8];
    size_t n = scalar_size(t);
    in.read(buf, std::streamsize(n));
    if (!in) throw std::runtime_error("truncated ply payload");
    if (t == "float" || t == "float32") { float v; std::memcpy(&v, buf, 4); return v; }
    if (t == "double" || t == "float64") { double v; std::memcpy(&v, buf, 8); return v; }
    if (t == "char" || t == "int8") { int8_t v; std::memcpy(&v, buf, 1); return v; }
    if (t == "uchar" || t == "uint8") { uint8_t v; std::memcpy(&v, buf, 1); return v; }
    if (t == "short" || t == "int16") { int16_t v; std::memcpy(&v, buf, 2); return v; }
    if (t == "ushort" || t == "uint16") { uint16_t v; std::memcpy(&v, buf, 2); return v; }
    if (t == "int" || t == "int32") { int32_t v; std::memcpy(&v, buf, 4); return v; }
    uint32_t v; std::memcpy(&v, buf, 4); return v;
}

ObjData read_ply(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::string line;
    if (!std::getline(in, line) || line.substr(0, 3) != "ply") throw std::runtime_error(path + ": not a ply file");
    bool binary = false;
    struct Element { std::string name; size_t count; std::vector<PlyProp> props; };
    std::vector<Element> elements;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        std::istringstream ss(line);
        std::string tag;
        ss >> tag;
        if (tag == "comment") continue;
        if (tag == "format") {
            std::string fmt;
            ss >> fmt;
            if (fmt == "binary_little_endian") binary = true;
            else if (fmt != "ascii") throw std::runtime_error(path + ": unsupported ply format " + fmt);
        } else if (tag == "element") {
            Element e;
            ss >> e.name >> e.count;
            elements.push_back(e);
        } else if (tag == "property") {
            if (elements.empty()) throw std::runtime_error(path + ": property before element");
            PlyProp p;
            std::string t;
            ss >> t;
            if (t == "list") {
                p.is_list = true;
                ss >> p.count_type >> p.type >> p.name;
            } else {
                p.type = t;
                ss >> p.name;
            }
            elements.back().props.push_back(p);
        } else if (tag == "end_header") {
            break;
        }
    }

    ObjData d;
    for (auto& e : elements) {
        if (e.name == "vertex") {
            d.positions.reserve(e.count);
            for (size_t i = 0; i < e.count; ++i) {
                Vector3d p = Vector3d::Zero();
                if (binary) {
                    for (auto& pr : e.props) {
                        double v = read_scalar_bin(in, pr.type);
                        if (pr.name == "x") p[0] = v;
                        else if (pr.name == "y") p[1] = v;
                        else if (pr.name == "z") p[2] = v;
                    }
                } else {
                    for (auto& pr : e.props) {
                        double v;
                        if (!(in >> v)) throw std::runtime_error(path + ": truncated vertex data");
                        if (pr.name == "x") p[0] = v;
                        else if (pr.name == "y") p[1] = v;
                        else if (pr.name == "z") p[2] = v;
                    }
                }
                d.positions.push_back(p);
            }
        } else if (e.name == "face") {
            d.faces.reserve(e.count);
            for (size_t i = 0; i < e.count; ++i) {
                std::vector<int> f;
                if (binary) {
                    for (auto& pr : e.props) {
                        if (!pr.is_list) { read_scalar_bin(in, pr.type); continue; }
                        int n = int(read_scalar_bin(in, pr.count_type));
                        for (int k = 0; k < n; ++k) f.push_back(int(read_scalar_bin(in, pr.type)));
                    }
                } else {
                    for (auto& pr : e.props) {
                        if (!pr.is_list) { double tmp; in >> tmp; continue; }
                        int n;
                        if (!(in >> n)) throw std::runtime_error(path + ": truncated face data");
                        f.resize(n);
                        for (int k = 0; k < n; ++k) in >> f[k];
                    }
                }
                d.faces.push_back(std::move(f));
            }
        } else {
            // skip unknown element payload
            for (size_t i = 0; i < e.count; ++i) {
                if (binary) {
                    for (auto& pr : e.props) {
                        if (pr.is_list) {
                            int n = int(read_scalar_bin(in, pr.count_type));
                            for (int k = 0; k < n; ++k) read_scalar_bin(in, pr.type);
                        } else {
                            read_scalar_bin(in, pr.type);
                        }
                    }
                } else {
                    std::getline(in, line);
                }
            }
        }
    }
    return d;
}

}  // namespace

MeshFormat format_from_path(const std::string& path) {
    auto dot = path.rfind('.');
    std::string ext = dot == std::string::npos ? "" : path.substr(dot + 1);
    for (auto& c : ext) c = char(tolower(c));
    if (ext == "ply") return MeshFormat::Ply;
    return MeshFormat::Obj;
}

TriMesh load_mesh(const std::string& path, MeshFormat format) {
    ObjData d = format == MeshFormat::Ply ? read_ply(path) : read_obj(path);
    TriMesh m;
    m.positions = std::move(d.positions);
    for (size_t f = 0; f < d.faces.size(); ++f) {
        if (d.faces[f].size() != 3)
            throw std::runtime_error(path + ": face " + std::to_string(f) + " is not a triangle");
        m.faces.push_back({d.faces[f][0], d.faces[f][1], d.faces[f][2]});
    }
    check_faces(m.positions, m.faces);
    m.build();
    return m;
}

TriMesh load_mesh(const std::string& path) { return load_mesh(path, format_from_path(path)); }

namespace {
void write_positions(std::FILE* out, const std::vector<Vector3d>& pos) {
    for (auto& p : pos) std::fprintf(out, "v %.17g %.17g %.17g\n", p[0], p[1], p[2]);
}
}  // namespace

void save_mesh(const TriMesh& m, const std::string& path) {
    if (m.n_vertices() == 0 || m.n_faces() == 0) throw std::runtime_error("refusing to save empty mesh");
    std::FILE* out = std::fopen(path.c_str(), "w");
    if (!out) throw std::runtime_error("cannot write " + path);
    write_positions(out, m.positions);
    for (auto& f : m.faces) std::fprintf(out, "f %d %d %d\n", f[0] + 1, f[1] + 1, f[2] + 1);
    std::fclose(out);
}

void save_mesh(const QuadMesh& m, const std::string& path) {
    if (m.n_vertices() == 0 || m.n_faces() == 0) throw std::runtime_error("refusing to save empty mesh");
    std::FILE* out = std::fopen(path.c_str(), "w");
    if (!out) throw std::runtime_error("cannot write " + path);
    write_positions(out, m.positions);
    for (auto& f : m.faces) std::fprintf(out, "f %d %d %d %d\n", f[0] + 1, f[1] + 1, f[2] + 1, f[3] + 1);
    std::fclose(out);
}

QuadMesh load_quad_obj(const std::string& path) {
    ObjData d = read_obj(path);
    QuadMesh m;
    m.positions = std::move(d.positions);
    for (size_t f = 0; f < d.faces.size(); ++f) {
        if (d.faces[f].size() != 4)
            throw std::runtime_error(path + ": face " + std::to_string(f) + " is not a quad");
        m.faces.push_back({d.faces[f][0], d.faces[f][1], d.faces[f][2], d.faces[f][3]});
    }
    m.build();
    return m;
}

void save_field_ply(const std::string& path, const std::vector<Vector3d>& points,
                    const std::vector<Vector3d>& normals, const std::vector<Vector3d>& dirs) {
    std::FILE* out = std::fopen(path.c_str(), "w");
    if (!out) throw std::runtime_error("cannot write " + path);
    std::fprintf(out, "ply\nformat ascii 1.0\nelement vertex %zu\n", points.size());
    std::fprintf(out, "property double x\nproperty double y\nproperty double z\n");
    std::fprintf(out, "property double nx\nproperty double ny\nproperty double nz\n");
    std::fprintf(out, "property double dx\nproperty double dy\nproperty double dz\nend_header\n");
    for (size_t i = 0; i < points.size(); ++i) {
        std::fprintf(out, "%.17g %.17g %.17g %.17g %.17g %.17g %.17g %.17g %.17g\n",
                     points[i][0], points[i][1], points[i][2], normals[i][0], normals[i][1],
                     normals[i][2], dirs[i][0], dirs[i][1], dirs[i][2]);
    }
    std::fclose(out);
}

}  // namespace untrim
