#include "vloc/mesh/meshio.hpp"

#include <fstream>

#include <json.hpp>

#include "vloc/core/binio.hpp"

namespace vloc {

using nlohmann::json;

namespace {

struct ArrayDesc {
    std::string name;
    std::string dtype;
    size_t count;
    size_t offset;  // bytes
};

void append_desc(json& manifest, std::vector<ArrayDesc>& descs, const std::string& name,
                 const std::string& dtype, size_t count, size_t elem_size, size_t& cursor) {
    descs.push_back({name, dtype, count, cursor});
    manifest["arrays"].push_back({{"name", name}, {"dtype", dtype}, {"count", count}, {"offset", cursor}});
    cursor += count * elem_size;
}

ArrayDesc find_desc(const json& manifest, const std::string& name) {
    for (const auto& a : manifest.at("arrays")) {
        if (a.at("name") == name)
            return {name, a.at("dtype"), a.at("count").get<size_t>(), a.at("offset").get<size_t>()};
    }
    throw std::runtime_error("meshio: array not found: " + name);
}

std::vector<float> pack_points(const std::vector<Vec3>& pts) {
    std::vector<float> out;
    out.reserve(pts.size() * 3);
    for (const auto& p : pts) {
        out.push_back(static_cast<float>(p.x()));
        out.push_back(static_cast<float>(p.y()));
        out.push_back(static_cast<float>(p.z()));
    }
    return out;
}

std::vector<Vec3> unpack_points(const std::vector<float>& raw) {
    std::vector<Vec3> out(raw.size() / 3);
    for (size_t i = 0; i < out.size(); ++i)
        out[i] = Vec3(raw[3 * i], raw[3 * i + 1], raw[3 * i + 2]);
    return out;
}

}  // namespace

void save_tetmesh(const TetMesh& mesh, const std::string& basename) {
    json manifest;
    manifest["format_version"] = 1;
    manifest["kind"] = "tetmesh";
    manifest["vertex_count"] = mesh.vertices.size();
    manifest["tet_count"] = mesh.tets.size();
    manifest["boundary_face_count"] = mesh.boundary.size();
    manifest["class_labels"] = {"lv_endo", "rv_endo", "epi", "base"};
    manifest["arrays"] = json::array();

    std::vector<ArrayDesc> descs;
    size_t cursor = 0;
    append_desc(manifest, descs, "vertices", "float32", mesh.vertices.size() * 3, 4, cursor);
    append_desc(manifest, descs, "tets", "uint32", mesh.tets.size() * 4, 4, cursor);
    append_desc(manifest, descs, "boundary_faces", "uint32", mesh.boundary.size() * 3, 4, cursor);
    append_desc(manifest, descs, "boundary_walls", "uint8", mesh.boundary.size(), 1, cursor);
    append_desc(manifest, descs, "vertex_walls", "uint8", mesh.vertices.size(), 1, cursor);

    std::ofstream bin(basename + ".bin", std::ios::binary);
    if (!bin) throw std::runtime_error("meshio: cannot write " + basename + ".bin");
    write_array(bin, pack_points(mesh.vertices));
    {
        std::vector<uint32_t> t;
        t.reserve(mesh.tets.size() * 4);
        for (const auto& q : mesh.tets)
            for (int k = 0; k < 4; ++k) t.push_back(static_cast<uint32_t>(q[k]));
        write_array(bin, t);
    }
    {
        std::vector<uint32_t> f;
        std::vector<uint8_t> w;
        f.reserve(mesh.boundary.size() * 3);
        w.reserve(mesh.boundary.size());
        for (const auto& bf : mesh.boundary) {
            for (int k = 0; k < 3; ++k) f.push_back(static_cast<uint32_t>(bf.verts[k]));
            w.push_back(static_cast<uint8_t>(bf.wall));
        }
        write_array(bin, f);
        write_array(bin, w);
    }
    {
        std::vector<uint8_t> vw(mesh.vertices.size(), 255);  // 255 = interior
        for (size_t i = 0; i < mesh.vertex_wall.size(); ++i)
            if (mesh.vertex_wall[i]) vw[i] = static_cast<uint8_t>(*mesh.vertex_wall[i]);
        write_array(bin, vw);
    }
    write_text_file(basename + ".json", manifest.dump(2));
}

TetMesh load_tetmesh(const std::string& basename) {
    const json manifest = json::parse(read_text_file(basename + ".json"));
    if (manifest.at("kind") != "tetmesh") throw std::runtime_error("meshio: not a tetmesh file");
    std::ifstream bin(basename + ".bin", std::ios::binary);
    if (!bin) throw std::runtime_error("meshio: cannot open " + basename + ".bin");

    TetMesh mesh;
    {
        const auto d = find_desc(manifest, "vertices");
        bin.seekg(static_cast<std::streamoff>(d.offset));
        mesh.vertices = unpack_points(read_array<float>(bin, d.count));
    }
    {
        const auto d = find_desc(manifest, "tets");
        bin.seekg(static_cast<std::streamoff>(d.offset));
        const auto raw = read_array<uint32_t>(bin, d.count);
        mesh.tets.resize(raw.size() / 4);
        for (size_t i = 0; i < mesh.tets.size(); ++i)
            for (int k = 0; k < 4; ++k) mesh.tets[i][k] = static_cast<int>(raw[4 * i + k]);
    }
    {
        const auto df = find_desc(manifest, "boundary_faces");
        bin.seekg(static_cast<std::streamoff>(df.offset));
        const auto raw = read_array<uint32_t>(bin, df.count);
        const auto dw = find_desc(manifest, "boundary_walls");
        bin.seekg(static_cast<std::streamoff>(dw.offset));
        const auto walls = read_array<uint8_t>(bin, dw.count);
        mesh.boundary.resize(walls.size());
        for (size_t i = 0; i < walls.size(); ++i) {
            for (int k = 0; k < 3; ++k) mesh.boundary[i].verts[k] = static_cast<int>(raw[3 * i + k]);
            mesh.boundary[i].wall = static_cast<WallClass>(walls[i]);
        }
    }
    {
        const auto d = find_desc(manifest, "vertex_walls");
        bin.seekg(static_cast<std::streamoff>(d.offset));
        const auto vw = read_array<uint8_t>(bin, d.count);
        mesh.vertex_wall.assign(vw.size(), std::nullopt);
        for (size_t i = 0; i < vw.size(); ++i)
            if (vw[i] != 255) mesh.vertex_wall[i] = static_cast<WallClass>(vw[i]);
    }
    return mesh;
}

void save_trimesh(const TriMesh& mesh, const std::string& basename) {
    json manifest;
    manifest["format_version"] = 1;
    manifest["kind"] = "trimesh";
    manifest["vertex_count"] = mesh.vertices.size();
    manifest["tri_count"] = mesh.tris.size();
    manifest["arrays"] = json::array();

    std::vector<ArrayDesc> descs;
    size_t cursor = 0;
    append_desc(manifest, descs, "vertices", "float32", mesh.vertices.size() * 3, 4, cursor);
    append_desc(manifest, descs, "tris", "uint32", mesh.tris.size() * 3, 4, cursor);

    std::ofstream bin(basename + ".bin", std::ios::binary);
    if (!bin) throw std::runtime_error("meshio: cannot write " + basename + ".bin");
    write_array(bin, pack_points(mesh.vertices));
    std::vector<uint32_t> t;
    t.reserve(mesh.tris.size() * 3);
    for (const auto& tr : mesh.tris)
        for (int k = 0; k < 3; ++k) t.push_back(static_cast<uint32_t>(tr[k]));
    write_array(bin, t);
    write_text_file(basename + ".json", manifest.dump(2));
}

TriMesh load_trimesh(const std::string& basename) {
    const json manifest = json::parse(read_text_file(basename + ".json"));
    if (manifest.at("kind") != "trimesh") throw std::runtime_error("meshio: not a trimesh file");
    std::ifstream bin(basename + ".bin", std::ios::binary);
    if (!bin) throw std::runtime_error("meshio: cannot open " + basename + ".bin");

    TriMesh mesh;
    {
        const auto d = find_desc(manifest, "vertices");
        bin.seekg(static_cast<std::streamoff>(d.offset));
        mesh.vertices = unpack_points(read_array<float>(bin, d.count));
    }
    {
        const auto d = find_desc(manifest, "tris");
        bin.seekg(static_cast<std::streamoff>(d.offset));
        const auto raw = read_array<uint32_t>(bin, d.count);
        mesh.tris.resize(raw.size() / 3);
        for (size_t i = 0; i < mesh.tris.size(); ++i)
            for (int k = 0; k < 3; ++k) mesh.tris[i][k] = static_cast<int>(raw[3 * i + k]);
    }
    mesh.update_areas();
    return mesh;
}

}  // namespace vloc
