#include "core/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <utility>

#include <json.hpp>

#include "core/error.hpp"

namespace logosp {

namespace {

using nlohmann::json;

std::ifstream open_in(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail_io("cannot open for reading: " + path);
    return in;
}

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) fail_io("cannot open for writing: " + path);
    return out;
}

template <typename T>
void write_le(std::ostream& out, T v) {
    unsigned char buf[sizeof(T)];
    std::memcpy(buf, &v, sizeof(T));
    out.write(reinterpret_cast<const char*>(buf), sizeof(T));
}

template <typename T>
T read_le(std::istream& in, const std::string& path, const char* what) {
    T v;
    if (!in.read(reinterpret_cast<char*>(&v), sizeof(T))) fail_parse(path + ": truncated while reading " + what);
    return v;
}

void expect_magic(std::istream& in, const char* magic, const std::string& path) {
    char buf[8];
    if (!in.read(buf, 8)) fail_parse(path + ": truncated magic");
    if (std::memcmp(buf, magic, 8) != 0) fail_parse(path + ": bad magic (expected " + std::string(magic, magic + 8) + ")");
}

void expect_eof(std::istream& in, const std::string& path) {
    char c;
    if (in.read(&c, 1)) fail_parse(path + ": trailing data after payload");
}

// ---------------------------------------------------------------- PLY

enum class PlyType { f32, f64, u8, i8, u16, i16, u32, i32 };

size_t ply_type_size(PlyType t) {
    switch (t) {
        case PlyType::f32: return 4;
        case PlyType::f64: return 8;
        case PlyType::u8:
        case PlyType::i8: return 1;
        case PlyType::u16:
        case PlyType::i16: return 2;
        default: return 4;
    }
}

PlyType ply_type(const std::string& name, const std::string& path) {
    if (name == "float" || name == "float32") return PlyType::f32;
    if (name == "double" || name == "float64") return PlyType::f64;
    if (name == "uchar" || name == "uint8") return PlyType::u8;
    if (name == "char" || name == "int8") return PlyType::i8;
    if (name == "ushort" || name == "uint16") return PlyType::u16;
    if (name == "short" || name == "int16") return PlyType::i16;
    if (name == "uint" || name == "uint32") return PlyType::u32;
    if (name == "int" || name == "int32") return PlyType::i32;
    fail_parse(path + ": unknown property type '" + name + "'");
}

struct PlyProperty {
    std::string name;
    PlyType type = PlyType::f32;
};

struct PlyElement {
    std::string name;
    size_t count = 0;
    std::vector<PlyProperty> props;
    bool has_list = false;
};

struct PlyHeader {
    bool binary = false;
    std::vector<PlyElement> elements;
};

PlyHeader read_ply_header(std::istream& in, const std::string& path) {
    std::string line;
    if (!std::getline(in, line)) fail_parse(path + ": empty file");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != "ply") fail_parse(path + ": missing 'ply' magic line");

    PlyHeader h;
    bool have_format = false;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        std::istringstream ls(line);
        std::string tok;
        ls >> tok;
        if (tok == "comment" || tok == "obj_info" || tok.empty()) continue;
        if (tok == "format") {
            std::string fmt, ver;
            ls >> fmt >> ver;
            if (fmt == "ascii") h.binary = false;
            else if (fmt == "binary_little_endian") h.binary = true;
            else fail_parse(path + ": unsupported format '" + fmt + "'");
            if (ver != "1.0") fail_parse(path + ": unsupported PLY version '" + ver + "'");
            have_format = true;
        } else if (tok == "element") {
            PlyElement e;
            ls >> e.name >> e.count;
            if (ls.fail()) fail_parse(path + ": malformed element line: " + line);
            h.elements.push_back(e);
        } else if (tok == "property") {
            if (h.elements.empty()) fail_parse(path + ": property before any element");
            std::string t;
            ls >> t;
            if (t == "list") {
                h.elements.back().has_list = true;
                continue;
            }
            PlyProperty p;
            p.type = ply_type(t, path);
            ls >> p.name;
            if (p.name.empty()) fail_parse(path + ": property without a name");
            h.elements.back().props.push_back(p);
        } else if (tok == "end_header") {
            if (!have_format) fail_parse(path + ": end_header before format line");
            return h;
        } else {
            fail_parse(path + ": unknown header keyword '" + tok + "'");
        }
    }
    fail_parse(path + ": header without end_header");
}

double ply_read_scalar_binary(std::istream& in, PlyType t, const std::string& path, const char* what) {
    switch (t) {
        case PlyType::f32: return read_le<float>(in, path, what);
        case PlyType::f64: return read_le<double>(in, path, what);
        case PlyType::u8: return read_le<uint8_t>(in, path, what);
        case PlyType::i8: return read_le<int8_t>(in, path, what);
        case PlyType::u16: return read_le<uint16_t>(in, path, what);
        case PlyType::i16: return read_le<int16_t>(in, path, what);
        case PlyType::u32: return read_le<uint32_t>(in, path, what);
        case PlyType::i32: return read_le<int32_t>(in, path, what);
    }
    fail_parse(path + ": unreachable property type");
}

}  // namespace

PointCloud read_point_cloud(const std::string& path) {
    std::ifstream in = open_in(path);
    const PlyHeader header = read_ply_header(in, path);

    size_t vertex_idx = header.elements.size();
    for (size_t i = 0; i < header.elements.size(); ++i) {
        if (header.elements[i].name == "vertex") {
            vertex_idx = i;
            break;
        }
        // An element stored before the vertex data has to be skipped to reach
        // it; list properties make the stride unknowable up front.
        if (header.elements[i].has_list)
            fail_parse(path + ": element '" + header.elements[i].name + "' with list properties precedes vertex");
    }
    if (vertex_idx == header.elements.size()) fail_parse(path + ": no vertex element");
    const PlyElement& vertex = header.elements[vertex_idx];
    if (vertex.count == 0) fail_parse(path + ": vertex element: N >= 1 violated");
    if (vertex.has_list) fail_parse(path + ": vertex element has unsupported list property");

    int px = -1, py = -1, pz = -1, pr = -1, pg = -1, pb = -1, pl = -1;
    for (size_t i = 0; i < vertex.props.size(); ++i) {
        const PlyProperty& p = vertex.props[i];
        auto expect = [&](PlyType t, const char* tname) {
            if (p.type != t)
                fail_parse(path + ": vertex property '" + p.name + "' must have type " + tname);
            return static_cast<int>(i);
        };
        if (p.name == "x") px = expect(PlyType::f32, "float");
        else if (p.name == "y") py = expect(PlyType::f32, "float");
        else if (p.name == "z") pz = expect(PlyType::f32, "float");
        else if (p.name == "red") pr = expect(PlyType::u8, "uchar");
        else if (p.name == "green") pg = expect(PlyType::u8, "uchar");
        else if (p.name == "blue") pb = expect(PlyType::u8, "uchar");
        else if (p.name == "label") pl = expect(PlyType::i32, "int");
    }
    const std::pair<int, const char*> required[] = {
        {px, "x"}, {py, "y"}, {pz, "z"}, {pr, "red"}, {pg, "green"}, {pb, "blue"}};
    for (const auto& [idx, name] : required)
        if (idx < 0) fail_parse(path + ": vertex element missing property '" + std::string(name) + "'");

    // Skip fixed-size elements that precede vertex.
    for (size_t e = 0; e < vertex_idx; ++e) {
        const PlyElement& el = header.elements[e];
        if (header.binary) {
            size_t stride = 0;
            for (const auto& p : el.props) stride += ply_type_size(p.type);
            in.seekg(static_cast<std::streamoff>(stride * el.count), std::ios::cur);
            if (!in) fail_parse(path + ": truncated while skipping element '" + el.name + "'");
        } else {
            std::string line;
            for (size_t r = 0; r < el.count; ++r)
                if (!std::getline(in, line)) fail_parse(path + ": truncated while skipping element '" + el.name + "'");
        }
    }

    PointCloud cloud;
    cloud.scene_id = std::filesystem::path(path).stem().string();
    cloud.positions.resize(vertex.count);
    cloud.colors.resize(vertex.count);
    if (pl >= 0) cloud.gt_labels.resize(vertex.count);

    std::vector<double> rowvals(vertex.props.size());
    for (size_t r = 0; r < vertex.count; ++r) {
        if (header.binary) {
            for (size_t c = 0; c < vertex.props.size(); ++c)
                rowvals[c] = ply_read_scalar_binary(in, vertex.props[c].type, path, vertex.props[c].name.c_str());
        } else {
            for (size_t c = 0; c < vertex.props.size(); ++c) {
                if (!(in >> rowvals[c]))
                    fail_parse(path + ": vertex " + std::to_string(r) + ": malformed value for property '" +
                               vertex.props[c].name + "'");
                // quantize through the declared storage type
                if (vertex.props[c].type == PlyType::f32) rowvals[c] = static_cast<float>(rowvals[c]);
            }
        }
        cloud.positions[r] = {rowvals[px], rowvals[py], rowvals[pz]};
        for (int k = 0; k < 3; ++k)
            if (!std::isfinite(cloud.positions[r][k]))
                fail_parse(path + ": vertex " + std::to_string(r) + ": non-finite coordinate");
        cloud.colors[r] = {rowvals[pr] / 255.0, rowvals[pg] / 255.0, rowvals[pb] / 255.0};
        if (pl >= 0) cloud.gt_labels[r] = static_cast<int32_t>(rowvals[pl]);
    }
    cloud.validate();
    return cloud;
}

void write_point_cloud(const PointCloud& cloud, const std::string& path, bool binary) {
    cloud.validate();
    std::ofstream out = open_out(path);
    out << std::setprecision(9);  // round-trip safe for f32 coordinates
    out << "ply\n";
    out << (binary ? "format binary_little_endian 1.0\n" : "format ascii 1.0\n");
    out << "element vertex " << cloud.size() << "\n";
    out << "property float x\nproperty float y\nproperty float z\n";
    out << "property uchar red\nproperty uchar green\nproperty uchar blue\n";
    if (cloud.has_gt()) out << "property int label\n";
    out << "end_header\n";
    for (size_t i = 0; i < cloud.size(); ++i) {
        const float x = static_cast<float>(cloud.positions[i][0]);
        const float y = static_cast<float>(cloud.positions[i][1]);
        const float z = static_cast<float>(cloud.positions[i][2]);
        const auto to_u8 = [](double c) { return static_cast<uint8_t>(std::lround(c * 255.0)); };
        const uint8_t r = to_u8(cloud.colors[i][0]);
        const uint8_t g = to_u8(cloud.colors[i][1]);
        const uint8_t b = to_u8(cloud.colors[i][2]);
        if (binary) {
            write_le(out, x);
            write_le(out, y);
            write_le(out, z);
            write_le(out, r);
            write_le(out, g);
            write_le(out, b);
            if (cloud.has_gt()) write_le(out, cloud.gt_labels[i]);
        } else {
            out << x << ' ' << y << ' ' << z << ' ' << int(r) << ' ' << int(g) << ' ' << int(b);
            if (cloud.has_gt()) out << ' ' << cloud.gt_labels[i];
            out << '\n';
        }
    }
    if (!out) fail_io("write failed: " + path);
}

// ---------------------------------------------------------------- LGSPFEAT

FeatureSet read_feature_set(const std::string& path) {
    std::ifstream in = open_in(path);
    expect_magic(in, "LGSPFEAT", path);
    const uint32_t version = read_le<uint32_t>(in, path, "version");
    if (version != 1) fail_parse(path + ": unsupported LGSPFEAT version " + std::to_string(version));
    const uint64_t rows = read_le<uint64_t>(in, path, "rows");
    const uint32_t dim = read_le<uint32_t>(in, path, "dim");
    const uint8_t has_mask = read_le<uint8_t>(in, path, "has_mask");
    if (rows == 0 || dim == 0) fail_parse(path + ": rows and dim must be >= 1");

    FeatureSet fs;
    fs.rows = rows;
    fs.dim = dim;
    fs.values.resize(rows * dim);
    std::vector<float> buf(rows * dim);
    if (!in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size() * sizeof(float))))
        fail_parse(path + ": payload shorter than rows*dim*4 bytes");
    for (size_t i = 0; i < buf.size(); ++i) fs.values[i] = static_cast<double>(buf[i]);

    fs.valid.assign(rows, 1);
    if (has_mask) {
        if (!in.read(reinterpret_cast<char*>(fs.valid.data()), static_cast<std::streamsize>(rows)))
            fail_parse(path + ": truncated validity mask");
        for (size_t r = 0; r < rows; ++r)
            if (fs.valid[r] > 1) fail_parse(path + ": mask byte at row " + std::to_string(r) + " not 0/1");
    }
    expect_eof(in, path);
    fs.validate();
    return fs;
}

void write_feature_set(const FeatureSet& fs, const std::string& path) {
    fs.validate();
    std::ofstream out = open_out(path);
    out.write("LGSPFEAT", 8);
    write_le<uint32_t>(out, 1);
    write_le<uint64_t>(out, fs.rows);
    write_le<uint32_t>(out, static_cast<uint32_t>(fs.dim));
    const bool all_valid = fs.valid_count() == fs.rows;
    write_le<uint8_t>(out, all_valid ? 0 : 1);
    std::vector<float> buf(fs.values.size());
    for (size_t i = 0; i < buf.size(); ++i) buf[i] = static_cast<float>(fs.values[i]);
    out.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size() * sizeof(float)));
    if (!all_valid)
        out.write(reinterpret_cast<const char*>(fs.valid.data()), static_cast<std::streamsize>(fs.valid.size()));
    if (!out) fail_io("write failed: " + path);
}

// ---------------------------------------------------------------- LGSPLBL

std::vector<int32_t> read_labels(const std::string& path) {
    std::ifstream in = open_in(path);
    expect_magic(in, "LGSPLBL\0", path);
    const uint32_t version = read_le<uint32_t>(in, path, "version");
    if (version != 1) fail_parse(path + ": unsupported LGSPLBL version " + std::to_string(version));
    const uint64_t rows = read_le<uint64_t>(in, path, "rows");
    if (rows == 0) fail_parse(path + ": rows must be >= 1");
    std::vector<int32_t> labels(rows);
    if (!in.read(reinterpret_cast<char*>(labels.data()), static_cast<std::streamsize>(rows * sizeof(int32_t))))
        fail_parse(path + ": truncated label payload");
    expect_eof(in, path);
    return labels;
}

void write_labels(std::span<const int32_t> labels, const std::string& path, int32_t classes) {
    if (labels.empty()) fail_pre("write_labels: rows must be >= 1");
    if (classes >= 0) {
        for (size_t i = 0; i < labels.size(); ++i)
            if (labels[i] != -1 && (labels[i] < 0 || labels[i] >= classes))
                fail_pre("write_labels: label " + std::to_string(labels[i]) + " at row " + std::to_string(i) +
                         " outside [0," + std::to_string(classes) + ") u {-1}");
    }
    std::ofstream out = open_out(path);
    out.write("LGSPLBL\0", 8);
    write_le<uint32_t>(out, 1);
    write_le<uint64_t>(out, labels.size());
    out.write(reinterpret_cast<const char*>(labels.data()), static_cast<std::streamsize>(labels.size() * sizeof(int32_t)));
    if (!out) fail_io("write failed: " + path);
}

// ---------------------------------------------------------------- depth

DepthMap read_depth_map(const std::string& path) {
    std::ifstream in = open_in(path);
    expect_magic(in, "LGSPDPTH", path);
    DepthMap d;
    d.width = read_le<uint32_t>(in, path, "width");
    d.height = read_le<uint32_t>(in, path, "height");
    if (d.width == 0 || d.height == 0) fail_parse(path + ": zero depth map dimension");
    d.depth_mm.resize(static_cast<size_t>(d.width) * d.height);
    if (!in.read(reinterpret_cast<char*>(d.depth_mm.data()),
                 static_cast<std::streamsize>(d.depth_mm.size() * sizeof(uint16_t))))
        fail_parse(path + ": truncated depth payload");
    expect_eof(in, path);
    return d;
}

void write_depth_map(const DepthMap& d, const std::string& path) {
    if (d.width == 0 || d.height == 0 || d.depth_mm.size() != static_cast<size_t>(d.width) * d.height)
        fail_pre("write_depth_map: inconsistent dimensions");
    std::ofstream out = open_out(path);
    out.write("LGSPDPTH", 8);
    write_le(out, d.width);
    write_le(out, d.height);
    out.write(reinterpret_cast<const char*>(d.depth_mm.data()),
              static_cast<std::streamsize>(d.depth_mm.size() * sizeof(uint16_t)));
    if (!out) fail_io("write failed: " + path);
}

// ---------------------------------------------------------------- manifest

DatasetManifest read_manifest(const std::string& path) {
    std::ifstream in = open_in(path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        fail_parse(path + ": invalid JSON: " + e.what());
    }
    const auto base = std::filesystem::path(path).parent_path();
    auto resolve = [&](const std::string& p) {
        if (p.empty()) return p;
        std::filesystem::path fp(p);
        return fp.is_absolute() ? fp.string() : (base / fp).string();
    };

    DatasetManifest m;
    if (!j.contains("scenes") || !j["scenes"].is_array()) fail_parse(path + ": missing 'scenes' array");
    try {
        for (const auto& js : j["scenes"]) {
            SceneEntry s;
            if (!js.contains("id") || !js.contains("cloud"))
                fail_parse(path + ": scene entries need 'id' and 'cloud'");
            s.scene_id = js["id"].get<std::string>();
            s.cloud_path = resolve(js["cloud"].get<std::string>());
            if (js.contains("features")) s.feature_path = resolve(js["features"].get<std::string>());
            if (js.contains("labels")) s.label_path = resolve(js["labels"].get<std::string>());
            if (js.contains("views")) {
                if (!js["views"].is_array()) fail_parse(path + ": 'views' must be an array");
                for (const auto& v : js["views"]) s.view_paths.push_back(resolve(v.get<std::string>()));
            }
            m.scenes.push_back(std::move(s));
        }
    } catch (const json::exception& e) {
        fail_parse(path + ": bad manifest value: " + e.what());
    }
    m.validate();
    return m;
}

void write_manifest(const DatasetManifest& m, const std::string& path) {
    json j;
    j["scenes"] = json::array();
    const auto base = std::filesystem::path(path).parent_path();
    auto relativize = [&](const std::string& p) {
        if (p.empty()) return p;
        std::error_code ec;
        auto rel = std::filesystem::relative(p, base, ec);
        return ec ? p : rel.string();
    };
    for (const auto& s : m.scenes) {
        json js;
        js["id"] = s.scene_id;
        js["cloud"] = relativize(s.cloud_path);
        if (!s.feature_path.empty()) js["features"] = relativize(s.feature_path);
        if (!s.label_path.empty()) js["labels"] = relativize(s.label_path);
        if (!s.view_paths.empty()) {
            js["views"] = json::array();
            for (const auto& v : s.view_paths) js["views"].push_back(relativize(v));
        }
        j["scenes"].push_back(js);
    }
    std::ofstream out = open_out(path);
    out << j.dump(2) << "\n";
    if (!out) fail_io("write failed: " + path);
}

}  // namespace logosp
