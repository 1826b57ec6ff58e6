#include "pkss/io.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstring>
#include <fstream>
#include <sstream>

namespace pkss {

namespace {

[[noreturn]] void fail(const std::filesystem::path& path, const std::string& what) {
    throw ParseError("parse error: " + path.string() + ": " + what);
}

[[noreturn]] void fail_line(const std::filesystem::path& path, std::size_t line,
                            const std::string& what) {
    fail(path, "line " + std::to_string(line) + ": " + what);
}

std::string lowercase(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
}

double parse_double(const std::filesystem::path& path, std::size_t line, const std::string& tok) {
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), value);
    if (ec != std::errc{} || ptr != tok.data() + tok.size()) {
        fail_line(path, line, "expected a number, got '" + tok + "'");
    }
    if (!std::isfinite(value)) {
        fail_line(path, line, "non-finite coordinate");
    }
    return value;
}

// If any loaded normal is degenerate the normals are dropped; otherwise
// they are re-normalized in place.
void finish_normals(PointCloud& cloud) {
    for (Vec3& n : cloud.normals) {
        const double len = n.norm();
        if (!std::isfinite(len) || len < 1e-12) {
            cloud.normals.clear();
            return;
        }
        n /= len;
    }
}

// ---------------------------------------------------------------------------
// PLY

enum class PlyType { i8, u8, i16, u16, i32, u32, f32, f64 };

std::size_t ply_type_size(PlyType t) {
    switch (t) {
        case PlyType::i8:
        case PlyType::u8: return 1;
        case PlyType::i16:
        case PlyType::u16: return 2;
        case PlyType::i32:
        case PlyType::u32:
        case PlyType::f32: return 4;
        case PlyType::f64: return 8;
    }
    return 0;
}

PlyType ply_type(const std::filesystem::path& path, std::size_t line, const std::string& name) {
    const std::string t = lowercase(name);
    if (t == "char" || t == "int8") return PlyType::i8;
    if (t == "uchar" || t == "uint8") return PlyType::u8;
    if (t == "short" || t == "int16") return PlyType::i16;
    if (t == "ushort" || t == "uint16") return PlyType::u16;
    if (t == "int" || t == "int32") return PlyType::i32;
    if (t == "uint" || t == "uint32") return PlyType::u32;
    if (t == "float" || t == "float32") return PlyType::f32;
    if (t == "double" || t == "float64") return PlyType::f64;
    fail_line(path, line, "unknown property type '" + name + "'");
}

struct PlyProperty {
    std::string name;
    PlyType type = PlyType::f32;
    bool is_list = false;
    PlyType count_type = PlyType::u8;
};

struct PlyElement {
    std::string name;
    std::size_t count = 0;
    std::vector<PlyProperty> properties;
};

double read_binary_scalar(std::istream& in, PlyType type, const std::filesystem::path& path) {
    unsigned char buf[8];
    const std::size_t size = ply_type_size(type);
    if (!in.read(reinterpret_cast<char*>(buf), static_cast<std::streamsize>(size))) {
        fail(path, "short read at byte offset " + std::to_string(in.gcount() >= 0 ? static_cast<long long>(in.tellg()) : -1));
    }
    switch (type) {
        case PlyType::i8: return static_cast<double>(static_cast<signed char>(buf[0]));
        case PlyType::u8: return static_cast<double>(buf[0]);
        case PlyType::i16: {
            std::int16_t v;
            std::memcpy(&v, buf, 2);
            return v;
        }
        case PlyType::u16: {
            std::uint16_t v;
            std::memcpy(&v, buf, 2);
            return v;
        }
        case PlyType::i32: {
            std::int32_t v;
            std::memcpy(&v, buf, 4);
            return v;
        }
        case PlyType::u32: {
            std::uint32_t v;
            std::memcpy(&v, buf, 4);
            return v;
        }
        case PlyType::f32: {
            float v;
            std::memcpy(&v, buf, 4);
            return v;
        }
        case PlyType::f64: {
            double v;
            std::memcpy(&v, buf, 8);
            return v;
        }
    }
    return 0.0;
}

class AsciiTokens {
public:
    AsciiTokens(std::istream& in, const std::filesystem::path& path, std::size_t header_lines)
        : in_(in), path_(path), line_(header_lines) {}

    std::string next() {
        while (buffer_.empty()) {
            std::string raw;
            if (!std::getline(in_, raw)) {
                fail(path_, "unexpected end of file in data section");
            }
            ++line_;
            std::istringstream ss(raw);
            std::string tok;
            while (ss >> tok) buffer_.push_back(tok);
            std::reverse(buffer_.begin(), buffer_.end());
        }
        std::string tok = buffer_.back();
        buffer_.pop_back();
        return tok;
    }

    std::size_t line() const { return line_; }

private:
    std::istream& in_;
    const std::filesystem::path& path_;
    std::size_t line_;
    std::vector<std::string> buffer_;
};

PointCloud load_ply(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw std::runtime_error("cannot open file: " + path.string());
    }

    std::size_t line_no = 0;
    auto next_line = [&]() {
        std::string raw;
        if (!std::getline(in, raw)) {
            fail_line(path, line_no, "unexpected end of header");
        }
        ++line_no;
        if (!raw.empty() && raw.back() == '\r') raw.pop_back();
        return raw;
    };

    if (next_line() != "ply") {
        fail_line(path, 1, "missing 'ply' magic");
    }

    bool binary = false;
    bool format_seen = false;
    std::vector<PlyElement> elements;
    for (;;) {
        const std::string raw = next_line();
        std::istringstream ss(raw);
        std::string keyword;
        ss >> keyword;
        if (keyword.empty() || keyword == "comment" || keyword == "obj_info") continue;
        if (keyword == "format") {
            std::string kind, version;
            ss >> kind >> version;
            if (kind == "ascii") {
                binary = false;
            } else if (kind == "binary_little_endian") {
                binary = true;
            } else if (kind == "binary_big_endian") {
                fail_line(path, line_no, "big-endian PLY is not supported");
            } else {
                fail_line(path, line_no, "unknown format '" + kind + "'");
            }
            format_seen = true;
        } else if (keyword == "element") {
            PlyElement el;
            if (!(ss >> el.name >> el.count)) {
                fail_line(path, line_no, "malformed element declaration");
            }
            elements.push_back(el);
        } else if (keyword == "property") {
            if (elements.empty()) {
                fail_line(path, line_no, "property before any element");
            }
            std::string first;
            ss >> first;
            PlyProperty prop;
            if (first == "list") {
                std::string count_type, value_type;
                if (!(ss >> count_type >> value_type >> prop.name)) {
                    fail_line(path, line_no, "malformed list property");
                }
                prop.is_list = true;
                prop.count_type = ply_type(path, line_no, count_type);
                prop.type = ply_type(path, line_no, value_type);
            } else {
                prop.type = ply_type(path, line_no, first);
                if (!(ss >> prop.name)) {
                    fail_line(path, line_no, "property missing a name");
                }
            }
            elements.back().properties.push_back(prop);
        } else if (keyword == "end_header") {
            break;
        } else {
            fail_line(path, line_no, "unknown header keyword '" + keyword + "'");
        }
    }
    if (!format_seen) {
        fail_line(path, line_no, "header lacks a format declaration");
    }

    const auto vertex_it = std::find_if(elements.begin(), elements.end(),
                                        [](const PlyElement& e) { return e.name == "vertex"; });
    if (vertex_it == elements.end()) {
        fail(path, "no vertex element");
    }
    int ix = -1, iy = -1, iz = -1, inx = -1, iny = -1, inz = -1;
    for (std::size_t p = 0; p < vertex_it->properties.size(); ++p) {
        const PlyProperty& prop = vertex_it->properties[p];
        if (prop.is_list) continue;
        if (prop.name == "x") ix = static_cast<int>(p);
        if (prop.name == "y") iy = static_cast<int>(p);
        if (prop.name == "z") iz = static_cast<int>(p);
        if (prop.name == "nx") inx = static_cast<int>(p);
        if (prop.name == "ny") iny = static_cast<int>(p);
        if (prop.name == "nz") inz = static_cast<int>(p);
    }
    if (ix < 0 || iy < 0 || iz < 0) {
        fail(path, "vertex element lacks x/y/z properties");
    }
    const bool with_normals = inx >= 0 && iny >= 0 && inz >= 0;

    PointCloud cloud;
    cloud.points.reserve(vertex_it->count);
    if (with_normals) cloud.normals.reserve(vertex_it->count);

    AsciiTokens tokens(in, path, line_no);
    std::vector<double> row;
    for (const PlyElement& el : elements) {
        const bool is_vertex = (&el == &*vertex_it);
        for (std::size_t i = 0; i < el.count; ++i) {
            row.clear();
            for (const PlyProperty& prop : el.properties) {
                if (prop.is_list) {
                    std::size_t count = 0;
                    if (binary) {
                        count = static_cast<std::size_t>(read_binary_scalar(in, prop.count_type, path));
                        for (std::size_t j = 0; j < count; ++j) read_binary_scalar(in, prop.type, path);
                    } else {
                        count = static_cast<std::size_t>(parse_double(path, tokens.line(), tokens.next()));
                        for (std::size_t j = 0; j < count; ++j) tokens.next();
                    }
                    row.push_back(0.0);
                } else if (binary) {
                    row.push_back(read_binary_scalar(in, prop.type, path));
                } else {
                    row.push_back(parse_double(path, tokens.line(), tokens.next()));
                }
            }
            if (!is_vertex) continue;
            const Vec3 p(row[ix], row[iy], row[iz]);
            if (!p.allFinite()) {
                fail(path, "non-finite coordinate in vertex " + std::to_string(i));
            }
            cloud.points.push_back(p);
            if (with_normals) {
                cloud.normals.emplace_back(row[inx], row[iny], row[inz]);
            }
        }
        if (is_vertex) break;  // later elements are irrelevant
    }
    if (cloud.points.empty()) {
        fail(path, "empty vertex element");
    }
    finish_normals(cloud);
    return cloud;
}

// ---------------------------------------------------------------------------
// OBJ

PointCloud load_obj(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("cannot open file: " + path.string());
    }
    PointCloud cloud;
    std::string raw;
    std::size_t line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        std::istringstream ss(raw);
        std::string tag;
        if (!(ss >> tag) || tag != "v") continue;  // faces, normals, comments ignored
        std::string sx, sy, sz;
        if (!(ss >> sx >> sy >> sz)) {
            fail_line(path, line_no, "vertex line with fewer than 3 coordinates");
        }
        cloud.points.emplace_back(parse_double(path, line_no, sx), parse_double(path, line_no, sy),
                                  parse_double(path, line_no, sz));
    }
    if (cloud.points.empty()) {
        fail(path, "no vertex lines found");
    }
    return cloud;
}

// ---------------------------------------------------------------------------
// XYZ

PointCloud load_xyz(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("cannot open file: " + path.string());
    }
    PointCloud cloud;
    std::string raw;
    std::size_t line_no = 0;
    int columns = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        std::istringstream ss(raw);
        std::vector<std::string> toks;
        std::string tok;
        while (ss >> tok) toks.push_back(tok);
        if (toks.empty() || toks.front().front() == '#') continue;
        if (toks.size() != 3 && toks.size() != 6) {
            fail_line(path, line_no, "expected 3 or 6 columns, got " + std::to_string(toks.size()));
        }
        if (columns == 0) {
            columns = static_cast<int>(toks.size());
        } else if (columns != static_cast<int>(toks.size())) {
            fail_line(path, line_no, "inconsistent column count");
        }
        cloud.points.emplace_back(parse_double(path, line_no, toks[0]),
                                  parse_double(path, line_no, toks[1]),
                                  parse_double(path, line_no, toks[2]));
        if (columns == 6) {
            cloud.normals.emplace_back(parse_double(path, line_no, toks[3]),
                                       parse_double(path, line_no, toks[4]),
                                       parse_double(path, line_no, toks[5]));
        }
    }
    if (cloud.points.empty()) {
        fail(path, "no data lines found");
    }
    finish_normals(cloud);
    return cloud;
}

CloudFormat detect_format(const std::filesystem::path& path) {
    const std::string ext = lowercase(path.extension().string());
    if (ext == ".ply") return CloudFormat::ply;
    if (ext == ".obj") return CloudFormat::obj;
    if (ext == ".xyz" || ext == ".txt" || ext == ".pts") return CloudFormat::xyz;

    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw std::runtime_error("cannot open file: " + path.string());
    }
    char magic[3] = {};
    in.read(magic, 3);
    if (in.gcount() == 3 && std::strncmp(magic, "ply", 3) == 0) return CloudFormat::ply;
    in.seekg(0);
    std::string first;
    std::getline(in, first);
    if (first.rfind("v ", 0) == 0) return CloudFormat::obj;
    return CloudFormat::xyz;
}

void save_ply(const std::filesystem::path& path, const PointCloud& cloud, bool binary) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw std::runtime_error("cannot open file for writing: " + path.string());
    }
    out << "ply\n"
        << (binary ? "format binary_little_endian 1.0\n" : "format ascii 1.0\n")
        << "element vertex " << cloud.points.size() << "\n"
        << "property double x\nproperty double y\nproperty double z\n";
    if (cloud.has_normals()) {
        out << "property double nx\nproperty double ny\nproperty double nz\n";
    }
    out << "end_header\n";

    if (binary) {
        for (std::size_t i = 0; i < cloud.points.size(); ++i) {
            out.write(reinterpret_cast<const char*>(cloud.points[i].data()), 3 * sizeof(double));
            if (cloud.has_normals()) {
                out.write(reinterpret_cast<const char*>(cloud.normals[i].data()), 3 * sizeof(double));
            }
        }
    } else {
        out.precision(9);
        for (std::size_t i = 0; i < cloud.points.size(); ++i) {
            const Vec3& p = cloud.points[i];
            out << p.x() << ' ' << p.y() << ' ' << p.z();
            if (cloud.has_normals()) {
                const Vec3& n = cloud.normals[i];
                out << ' ' << n.x() << ' ' << n.y() << ' ' << n.z();
            }
            out << '\n';
        }
    }
    if (!out) {
        throw std::runtime_error("write failed: " + path.string());
    }
}

void save_obj(const std::filesystem::path& path, const PointCloud& cloud) {
    std::ofstream out(path);
    if (!out) {
        throw std::runtime_error("cannot open file for writing: " + path.string());
    }
    out.precision(9);
    for (const Vec3& p : cloud.points) {
        out << "v " << p.x() << ' ' << p.y() << ' ' << p.z() << '\n';
    }
    if (!out) {
        throw std::runtime_error("write failed: " + path.string());
    }
}

void save_xyz(const std::filesystem::path& path, const PointCloud& cloud) {
    std::ofstream out(path);
    if (!out) {
        throw std::runtime_error("cannot open file for writing: " + path.string());
    }
    out.precision(9);
    for (std::size_t i = 0; i < cloud.points.size(); ++i) {
        const Vec3& p = cloud.points[i];
        out << p.x() << ' ' << p.y() << ' ' << p.z();
        if (cloud.has_normals()) {
            const Vec3& n = cloud.normals[i];
            out << ' ' << n.x() << ' ' << n.y() << ' ' << n.z();
        }
        out << '\n';
    }
    if (!out) {
        throw std::runtime_error("write failed: " + path.string());
    }
}

}  // namespace

PointCloud load_cloud(const std::filesystem::path& path, CloudFormat format) {
    if (!std::filesystem::exists(path)) {
        throw std::runtime_error("no such file: " + path.string());
    }
    if (format == CloudFormat::auto_detect) {
        format = detect_format(path);
    }
    PointCloud cloud;
    switch (format) {
        case CloudFormat::ply: cloud = load_ply(path); break;
        case CloudFormat::obj: cloud = load_obj(path); break;
        case CloudFormat::xyz: cloud = load_xyz(path); break;
        case CloudFormat::auto_detect: break;  // unreachable
    }
    cloud.validate();
    return cloud;
}

void save_cloud(const std::filesystem::path& path, const PointCloud& cloud, CloudFormat format,
                bool binary) {
    if (format == CloudFormat::auto_detect) {
        const std::string ext = lowercase(path.extension().string());
        if (ext == ".obj") {
            format = CloudFormat::obj;
        } else if (ext == ".xyz" || ext == ".txt" || ext == ".pts") {
            format = CloudFormat::xyz;
        } else {
            format = CloudFormat::ply;
        }
    }
    switch (format) {
        case CloudFormat::ply: save_ply(path, cloud, binary); break;
        case CloudFormat::obj: save_obj(path, cloud); break;
        case CloudFormat::xyz: save_xyz(path, cloud); break;
        case CloudFormat::auto_detect: break;  // unreachable
    }
}

}  // namespace pkss
