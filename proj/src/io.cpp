#include "hybridreg/io.hpp"

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <vector>

namespace hybridreg::io {

std::string fmt9(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.9g", v);
    return buf;
}

std::string fmt17(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

void write_ply(const std::string& path, const geom::PointCloud& cloud) {
    if (cloud.labels.size() != cloud.points.size())
        throw IoError("write_ply: label count does not match point count");
    std::ofstream out(path);
    if (!out) throw IoError("write_ply: cannot open " + path);
    out << "ply\n"
        << "format ascii 1.0\n"
        << "element vertex " << cloud.points.size() << "\n"
        << "property double x\n"
        << "property double y\n"
        << "property double z\n"
        << "property uchar motion_label\n"
        << "end_header\n";
    for (std::size_t i = 0; i < cloud.points.size(); ++i) {
        const auto& p = cloud.points[i];
        out << fmt17(p.x()) << ' ' << fmt17(p.y()) << ' ' << fmt17(p.z()) << ' '
            << static_cast<int>(cloud.labels[i]) << '\n';
    }
    if (!out) throw IoError("write_ply: write failed for " + path);
}

geom::PointCloud read_ply(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("read_ply: cannot open " + path);

    std::string line;
    if (!std::getline(in, line) || line != "ply")
        throw ParseError("read_ply: missing ply magic in " + path);

    std::size_t vertex_count = 0;
    std::vector<std::string> props;
    bool ascii = false;
    while (std::getline(in, line)) {
        std::istringstream ls(line);
        std::string tok;
        ls >> tok;
        if (tok == "format") {
            std::string kind;
            ls >> kind;
            ascii = (kind == "ascii");
        } else if (tok == "element") {
            std::string name;
            ls >> name >> vertex_count;
            if (name != "vertex")
                throw ParseError("read_ply: unsupported element '" + name + "' in " + path);
        } else if (tok == "property") {
            std::string type, name;
            ls >> type >> name;
            props.push_back(name);
        } else if (tok == "end_header") {
            break;
        } else if (tok == "comment" || tok == "obj_info") {
            continue;
        }
    }
    if (!ascii) throw ParseError("read_ply: only ascii 1.0 is supported: " + path);

    int ix = -1, iy = -1, iz = -1, ilabel = -1;
    for (std::size_t i = 0; i < props.size(); ++i) {
        if (props[i] == "x") ix = static_cast<int>(i);
        if (props[i] == "y") iy = static_cast<int>(i);
        if (props[i] == "z") iz = static_cast<int>(i);
        if (props[i] == "motion_label") ilabel = static_cast<int>(i);
    }
    if (ix < 0 || iy < 0 || iz < 0)
        throw ParseError("read_ply: x/y/z properties missing in " + path);

    geom::PointCloud cloud;
    cloud.points.reserve(vertex_count);
    cloud.labels.reserve(vertex_count);
    std::vector<double> row(props.size());
    for (std::size_t v = 0; v < vertex_count; ++v) {
        if (!std::getline(in, line))
            throw ParseError("read_ply: truncated vertex list in " + path);
        std::istringstream ls(line);
        for (double& value : row)
            if (!(ls >> value)) throw ParseError("read_ply: bad vertex row in " + path);
        cloud.points.emplace_back(row[ix], row[iy], row[iz]);
        int label = 0;
        if (ilabel >= 0) label = static_cast<int>(row[ilabel]);
        if (label < 0 || label > 2)
            throw ParseError("read_ply: motion_label out of range in " + path);
        cloud.labels.push_back(static_cast<geom::MotionLabel>(label));
    }
    return cloud;
}

}  // namespace hybridreg::io
