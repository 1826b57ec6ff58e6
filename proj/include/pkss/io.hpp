#pragma once

#include "pkss/geometry.hpp"

#include <filesystem>

namespace pkss {

enum class CloudFormat { ply, obj, xyz, auto_detect };

/// Parsing failure; the message names the file and the offending line or
/// byte offset.
struct ParseError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Reads a point cloud. PLY (ascii and binary little-endian; x/y/z
/// required, nx/ny/nz picked up and re-normalized when present), OBJ
/// (v lines only), XYZ (3 or 6 whitespace-separated columns). auto_detect
/// chooses by extension, then by content.
PointCloud load_cloud(const std::filesystem::path& path, CloudFormat format = CloudFormat::auto_detect);

/// Writes a point cloud in the given format (auto_detect: by extension,
/// defaulting to PLY). PLY output is binary little-endian with double
/// precision unless ascii is requested.
void save_cloud(const std::filesystem::path& path, const PointCloud& cloud,
                CloudFormat format = CloudFormat::auto_detect, bool binary = true);

}  // namespace pkss
