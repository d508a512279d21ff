#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace skelact {

// Numeric variable from a MATLAB level-5 file. `data` is column-major and
// converted to double regardless of the stored class.
struct MatArray {
  std::vector<std::size_t> dims;
  std::vector<double> data;

  std::size_t numel() const { return data.size(); }
};

// Reads every real numeric array in a little-endian MAT v5 file, including
// zlib-compressed elements. Cells, structs, sparse and complex arrays are skipped.
std::map<std::string, MatArray> read_mat_file(const std::filesystem::path& path);
std::map<std::string, MatArray> parse_mat(const std::vector<unsigned char>& bytes);

// Writes double arrays as a MAT v5 file, used for fixtures and round trips.
void write_mat_file(const std::filesystem::path& path, const std::map<std::string, MatArray>& vars,
                    bool compress = true);

}  // namespace skelact
